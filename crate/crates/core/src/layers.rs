//! Interface combinators: wrap one machine into a richer one.
//!
//! Layers delegate every primitive to the wrapped machine and change the
//! behavior of just a few. They compose; the concrete simulator stacks
//! look like `TraceLayer<EarlyExitLayer<MmioLayer<MachineState>>>`.

use std::fmt;

use crate::csr::CSRField;
use crate::inst::Register;
use crate::machine::{
    HaltSource, MachineInterface, PlatformConfig, PrimResult, PrivMode, SourceType, StepAbort,
};
use crate::platform::{Event, EventSink};
use crate::xword::{MachineInt, XWord};

/// Makes `end_cycle_early` actually end the cycle instead of failing.
///
/// The base platforms reject `end_cycle_early`; wrapping with this layer
/// turns it into the abort the step driver understands, leaving every
/// other primitive untouched.
pub struct EarlyExitLayer<M> {
    inner: M,
}

impl<M> EarlyExitLayer<M> {
    pub fn new(inner: M) -> EarlyExitLayer<M> {
        EarlyExitLayer { inner }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut M {
        &mut self.inner
    }

    pub fn into_inner(self) -> M {
        self.inner
    }
}

impl<M: MachineInterface> MachineInterface for EarlyExitLayer<M> {
    fn get_register(&mut self, r: Register) -> XWord {
        self.inner.get_register(r)
    }

    fn set_register(&mut self, r: Register, v: XWord) {
        self.inner.set_register(r, v)
    }

    fn load_byte(&mut self, src: SourceType, addr: XWord) -> PrimResult<u8> {
        self.inner.load_byte(src, addr)
    }

    fn load_half(&mut self, src: SourceType, addr: XWord) -> PrimResult<u16> {
        self.inner.load_half(src, addr)
    }

    fn load_word(&mut self, src: SourceType, addr: XWord) -> PrimResult<u32> {
        self.inner.load_word(src, addr)
    }

    fn load_double(&mut self, src: SourceType, addr: XWord) -> PrimResult<u64> {
        self.inner.load_double(src, addr)
    }

    fn store_byte(&mut self, src: SourceType, addr: XWord, v: u8) -> PrimResult<()> {
        self.inner.store_byte(src, addr, v)
    }

    fn store_half(&mut self, src: SourceType, addr: XWord, v: u16) -> PrimResult<()> {
        self.inner.store_half(src, addr, v)
    }

    fn store_word(&mut self, src: SourceType, addr: XWord, v: u32) -> PrimResult<()> {
        self.inner.store_word(src, addr, v)
    }

    fn store_double(&mut self, src: SourceType, addr: XWord, v: u64) -> PrimResult<()> {
        self.inner.store_double(src, addr, v)
    }

    fn make_reservation(&mut self, addr: XWord) -> PrimResult<()> {
        self.inner.make_reservation(addr)
    }

    fn check_reservation(&mut self, addr: XWord) -> PrimResult<bool> {
        self.inner.check_reservation(addr)
    }

    fn clear_reservation(&mut self, addr: XWord) -> PrimResult<()> {
        self.inner.clear_reservation(addr)
    }

    fn get_csr_field(&mut self, field: CSRField) -> PrimResult<MachineInt> {
        self.inner.get_csr_field(field)
    }

    fn set_csr_field(&mut self, field: CSRField, value: MachineInt) -> PrimResult<()> {
        self.inner.set_csr_field(field, value)
    }

    fn get_pc(&mut self) -> XWord {
        self.inner.get_pc()
    }

    fn set_pc(&mut self, pc: XWord) {
        self.inner.set_pc(pc)
    }

    fn get_priv_mode(&mut self) -> PrivMode {
        self.inner.get_priv_mode()
    }

    fn set_priv_mode(&mut self, mode: PrivMode) {
        self.inner.set_priv_mode(mode)
    }

    fn commit(&mut self) {
        self.inner.commit()
    }

    fn end_cycle_early(&mut self) -> StepAbort {
        StepAbort::EarlyExit
    }

    fn flush_tlb(&mut self) {
        self.inner.flush_tlb()
    }

    fn fence(&mut self, pred: MachineInt, succ: MachineInt) {
        self.inner.fence(pred, succ)
    }

    fn get_platform(&self) -> &PlatformConfig {
        self.inner.get_platform()
    }
}

impl<M: HaltSource> HaltSource for EarlyExitLayer<M> {
    fn take_halt(&mut self) -> Option<MachineInt> {
        self.inner.take_halt()
    }
}

impl<M: EventSink> EventSink for EarlyExitLayer<M> {
    fn append_event(&mut self, event: Event) {
        self.inner.append_event(event)
    }

    fn events(&self) -> &[Event] {
        self.inner.events()
    }
}

/// One primitive call: name, rendered arguments, rendered result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub step: u64,
    pub primitive: &'static str,
    pub args: Vec<String>,
    pub result: Option<String>,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.step, self.primitive)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        if let Some(r) = &self.result {
            write!(f, " -> {r}")?;
        }
        Ok(())
    }
}

fn fmt_value<T: fmt::LowerHex>(v: &T) -> String {
    format!("{v:#x}")
}

fn fmt_unit(r: &PrimResult<()>) -> Option<String> {
    match r {
        Ok(()) => None,
        Err(StepAbort::EarlyExit) => Some("early-exit".into()),
        Err(StepAbort::HardFailure(f)) => Some(f.code.into()),
    }
}

fn fmt_result<T: fmt::LowerHex>(r: &PrimResult<T>) -> Option<String> {
    match r {
        Ok(v) => Some(fmt_value(v)),
        Err(StepAbort::EarlyExit) => Some("early-exit".into()),
        Err(StepAbort::HardFailure(f)) => Some(f.code.into()),
    }
}

/// Records every primitive call as a `TraceRecord`, tagged with a step
/// number the driver advances between instructions. `get_platform` is the
/// one unrecorded primitive (it is a read of static configuration).
pub struct TraceLayer<M> {
    inner: M,
    records: Vec<TraceRecord>,
    step: u64,
}

impl<M> TraceLayer<M> {
    pub fn new(inner: M) -> TraceLayer<M> {
        TraceLayer { inner, records: Vec::new(), step: 0 }
    }

    pub fn advance_step(&mut self) {
        self.step += 1;
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    /// Drains the accumulated records, for incremental printing.
    pub fn take_records(&mut self) -> Vec<TraceRecord> {
        std::mem::take(&mut self.records)
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut M {
        &mut self.inner
    }

    pub fn into_inner(self) -> M {
        self.inner
    }

    fn log(&mut self, primitive: &'static str, args: Vec<String>, result: Option<String>) {
        self.records.push(TraceRecord { step: self.step, primitive, args, result });
    }
}

impl<M: MachineInterface> MachineInterface for TraceLayer<M> {
    fn get_register(&mut self, r: Register) -> XWord {
        let v = self.inner.get_register(r);
        self.log("get_register", vec![r.to_string()], Some(fmt_value(&v.bits())));
        v
    }

    fn set_register(&mut self, r: Register, v: XWord) {
        self.inner.set_register(r, v);
        self.log("set_register", vec![r.to_string(), fmt_value(&v.bits())], None);
    }

    fn load_byte(&mut self, src: SourceType, addr: XWord) -> PrimResult<u8> {
        let r = self.inner.load_byte(src, addr);
        self.log(
            "load_byte",
            vec![format!("{src:?}"), fmt_value(&addr.bits())],
            fmt_result(&r),
        );
        r
    }

    fn load_half(&mut self, src: SourceType, addr: XWord) -> PrimResult<u16> {
        let r = self.inner.load_half(src, addr);
        self.log(
            "load_half",
            vec![format!("{src:?}"), fmt_value(&addr.bits())],
            fmt_result(&r),
        );
        r
    }

    fn load_word(&mut self, src: SourceType, addr: XWord) -> PrimResult<u32> {
        let r = self.inner.load_word(src, addr);
        self.log(
            "load_word",
            vec![format!("{src:?}"), fmt_value(&addr.bits())],
            fmt_result(&r),
        );
        r
    }

    fn load_double(&mut self, src: SourceType, addr: XWord) -> PrimResult<u64> {
        let r = self.inner.load_double(src, addr);
        self.log(
            "load_double",
            vec![format!("{src:?}"), fmt_value(&addr.bits())],
            fmt_result(&r),
        );
        r
    }

    fn store_byte(&mut self, src: SourceType, addr: XWord, v: u8) -> PrimResult<()> {
        let r = self.inner.store_byte(src, addr, v);
        self.log(
            "store_byte",
            vec![format!("{src:?}"), fmt_value(&addr.bits()), fmt_value(&v)],
            fmt_unit(&r),
        );
        r
    }

    fn store_half(&mut self, src: SourceType, addr: XWord, v: u16) -> PrimResult<()> {
        let r = self.inner.store_half(src, addr, v);
        self.log(
            "store_half",
            vec![format!("{src:?}"), fmt_value(&addr.bits()), fmt_value(&v)],
            fmt_unit(&r),
        );
        r
    }

    fn store_word(&mut self, src: SourceType, addr: XWord, v: u32) -> PrimResult<()> {
        let r = self.inner.store_word(src, addr, v);
        self.log(
            "store_word",
            vec![format!("{src:?}"), fmt_value(&addr.bits()), fmt_value(&v)],
            fmt_unit(&r),
        );
        r
    }

    fn store_double(&mut self, src: SourceType, addr: XWord, v: u64) -> PrimResult<()> {
        let r = self.inner.store_double(src, addr, v);
        self.log(
            "store_double",
            vec![format!("{src:?}"), fmt_value(&addr.bits()), fmt_value(&v)],
            fmt_unit(&r),
        );
        r
    }

    fn make_reservation(&mut self, addr: XWord) -> PrimResult<()> {
        let r = self.inner.make_reservation(addr);
        self.log("make_reservation", vec![fmt_value(&addr.bits())], fmt_unit(&r));
        r
    }

    fn check_reservation(&mut self, addr: XWord) -> PrimResult<bool> {
        let r = self.inner.check_reservation(addr);
        let shown = match &r {
            Ok(b) => Some(b.to_string()),
            Err(StepAbort::EarlyExit) => Some("early-exit".into()),
            Err(StepAbort::HardFailure(f)) => Some(f.code.into()),
        };
        self.log("check_reservation", vec![fmt_value(&addr.bits())], shown);
        r
    }

    fn clear_reservation(&mut self, addr: XWord) -> PrimResult<()> {
        let r = self.inner.clear_reservation(addr);
        self.log("clear_reservation", vec![fmt_value(&addr.bits())], fmt_unit(&r));
        r
    }

    fn get_csr_field(&mut self, field: CSRField) -> PrimResult<MachineInt> {
        let r = self.inner.get_csr_field(field);
        self.log("get_csr_field", vec![format!("{field:?}")], fmt_result(&r));
        r
    }

    fn set_csr_field(&mut self, field: CSRField, value: MachineInt) -> PrimResult<()> {
        let r = self.inner.set_csr_field(field, value);
        self.log("set_csr_field", vec![format!("{field:?}"), fmt_value(&value)], fmt_unit(&r));
        r
    }

    fn get_pc(&mut self) -> XWord {
        let v = self.inner.get_pc();
        self.log("get_pc", vec![], Some(fmt_value(&v.bits())));
        v
    }

    fn set_pc(&mut self, pc: XWord) {
        self.inner.set_pc(pc);
        self.log("set_pc", vec![fmt_value(&pc.bits())], None);
    }

    fn get_priv_mode(&mut self) -> PrivMode {
        let v = self.inner.get_priv_mode();
        self.log("get_priv_mode", vec![], Some(format!("{v:?}")));
        v
    }

    fn set_priv_mode(&mut self, mode: PrivMode) {
        self.inner.set_priv_mode(mode);
        self.log("set_priv_mode", vec![format!("{mode:?}")], None);
    }

    fn commit(&mut self) {
        self.inner.commit();
        self.log("commit", vec![], None);
    }

    fn end_cycle_early(&mut self) -> StepAbort {
        let r = self.inner.end_cycle_early();
        let shown = match &r {
            StepAbort::EarlyExit => "early-exit".to_string(),
            StepAbort::HardFailure(f) => f.code.to_string(),
        };
        self.log("end_cycle_early", vec![], Some(shown));
        r
    }

    fn flush_tlb(&mut self) {
        self.inner.flush_tlb();
        self.log("flush_tlb", vec![], None);
    }

    fn fence(&mut self, pred: MachineInt, succ: MachineInt) {
        self.inner.fence(pred, succ);
        self.log("fence", vec![pred.to_string(), succ.to_string()], None);
    }

    fn get_platform(&self) -> &PlatformConfig {
        self.inner.get_platform()
    }
}

impl<M: HaltSource> HaltSource for TraceLayer<M> {
    fn take_halt(&mut self) -> Option<MachineInt> {
        self.inner.take_halt()
    }
}

impl<M: EventSink> EventSink for TraceLayer<M> {
    fn append_event(&mut self, event: Event) {
        self.inner.append_event(event)
    }

    fn events(&self) -> &[Event] {
        self.inner.events()
    }
}
