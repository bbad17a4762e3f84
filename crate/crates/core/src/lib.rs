//! RISC-V instruction-set semantics written once against an abstract
//! machine interface, plus the concrete platforms that instantiate it.
//!
//! The semantics (`exec`) manipulate a machine only through the
//! [`machine::MachineInterface`] primitives, so one definition of every
//! instruction drives the flat-memory simulator ([`platform`]), the
//! software-multiply differential harness ([`softmul`]) and any other
//! implementation of the interface.

pub mod csr;
pub mod decode;
pub mod encode;
pub mod exec;
pub mod inst;
pub mod layers;
pub mod machine;
pub mod platform;
pub mod softmul;
pub mod trap;
pub mod xword;
