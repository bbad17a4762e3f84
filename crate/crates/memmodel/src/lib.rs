//! Litmus-test model checking for the weak memory model.

pub mod axioms;
pub mod bruteforce;
pub mod event;
pub mod explore;
pub mod litmus;
pub mod report;
pub mod thread;
