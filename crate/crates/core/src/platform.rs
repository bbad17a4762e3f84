//! The concrete flat-memory platform.
//!
//! `MachineState` is the whole simulator: registers, pc, one contiguous
//! little-endian memory, the CSR field file, privilege, reservation and an
//! MMIO event log. Its `MachineInterface` impl is the minimal platform of
//! the stack; devices and early-exit handling come from layers on top.

pub mod elf;
pub mod mmio;

use std::fmt;

use crate::csr::{CSRField, CSR_FIELD_COUNT};
use crate::inst::Register;
use crate::machine::{
    hard_failure, HaltSource, MachineInterface, PlatformConfig, PrimResult, PrivMode, SourceType,
    StepAbort,
};
use crate::xword::{MachineInt, XWord};

/// One MMIO transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    MmioLoad,
    MmioStore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub kind: EventKind,
    pub addr: u64,
    pub value: MachineInt,
    pub width: u32,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dir = match self.kind {
            EventKind::MmioLoad => "LOAD",
            EventKind::MmioStore => "STORE",
        };
        write!(f, "MMIO {} {:#x} {:#x} {}", dir, self.addr, self.value, self.width)
    }
}

/// Owner of the append-only event log. Device layers append through this;
/// it lives on the base state so the log survives layer composition.
pub trait EventSink {
    fn append_event(&mut self, event: Event);
    fn events(&self) -> &[Event];
}

/// A chunk of initial memory contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub addr: u64,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageError(pub String);

impl fmt::Display for ImageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot place image: {}", self.0)
    }
}

impl std::error::Error for ImageError {}

#[derive(Debug, Clone)]
pub struct MachineState {
    regs: [XWord; 32],
    pc: XWord,
    mem: Vec<u8>,
    csr: [MachineInt; CSR_FIELD_COUNT],
    priv_mode: PrivMode,
    reservation: Option<u64>,
    events: Vec<Event>,
    halt: Option<MachineInt>,
    platform: PlatformConfig,
}

impl MachineState {
    /// A fresh machine: registers and CSR fields zero, machine mode,
    /// memory zero except for the given segments, pc at `entry`.
    pub fn new(
        platform: PlatformConfig,
        segments: &[Segment],
        entry: u64,
    ) -> Result<MachineState, ImageError> {
        let xlen = platform.xlen();
        let mut m = MachineState {
            regs: [XWord::zero(xlen); 32],
            pc: XWord::new(xlen, entry),
            mem: vec![0; platform.mem_size as usize],
            csr: [0; CSR_FIELD_COUNT],
            priv_mode: PrivMode::Machine,
            reservation: None,
            events: Vec::new(),
            halt: None,
            platform,
        };
        let mut placed: Vec<(u64, u64)> = Vec::new();
        for seg in segments {
            let len = seg.bytes.len() as u64;
            if len == 0 {
                continue;
            }
            if !m.platform.in_ram(seg.addr, len) {
                return Err(ImageError(format!(
                    "segment {:#x}+{:#x} is outside memory",
                    seg.addr, len
                )));
            }
            if placed.iter().any(|&(a, l)| seg.addr < a + l && a < seg.addr + len) {
                return Err(ImageError(format!(
                    "segment {:#x}+{:#x} overlaps another segment",
                    seg.addr, len
                )));
            }
            placed.push((seg.addr, len));
            let off = (seg.addr - m.platform.mem_base) as usize;
            m.mem[off..off + seg.bytes.len()].copy_from_slice(&seg.bytes);
        }
        Ok(m)
    }

    pub fn regs(&self) -> &[XWord; 32] {
        &self.regs
    }

    pub fn pc(&self) -> XWord {
        self.pc
    }

    pub fn priv_mode(&self) -> PrivMode {
        self.priv_mode
    }

    pub fn platform(&self) -> &PlatformConfig {
        &self.platform
    }

    pub fn csr_field(&self, field: CSRField) -> MachineInt {
        self.csr[field.slot()]
    }

    /// Reads memory without going through the access-checked primitives.
    /// `None` when any byte is outside memory.
    pub fn peek_mem(&self, addr: u64, len: u64) -> Option<&[u8]> {
        if len > 0 && !self.platform.in_ram(addr, len) {
            return None;
        }
        let off = (addr - self.platform.mem_base) as usize;
        Some(&self.mem[off..off + len as usize])
    }

    fn load(&mut self, addr: XWord, n: u32) -> PrimResult<u64> {
        let a = addr.bits();
        if !self.platform.in_ram(a, n as u64) {
            return hard_failure("bad-address", format!("{n}-byte load at {a:#x}"));
        }
        let off = (a - self.platform.mem_base) as usize;
        let mut v = 0u64;
        for i in (0..n as usize).rev() {
            v = v << 8 | self.mem[off + i] as u64;
        }
        Ok(v)
    }

    fn store(&mut self, addr: XWord, n: u32, v: u64) -> PrimResult<()> {
        let a = addr.bits();
        if !self.platform.in_ram(a, n as u64) {
            return hard_failure("bad-address", format!("{n}-byte store at {a:#x}"));
        }
        let off = (a - self.platform.mem_base) as usize;
        for i in 0..n as usize {
            self.mem[off + i] = (v >> (8 * i)) as u8;
        }
        if n == 4 && self.platform.tohost == Some(a) {
            self.halt = Some(v as MachineInt);
        }
        Ok(())
    }
}

impl MachineInterface for MachineState {
    fn get_register(&mut self, r: Register) -> XWord {
        self.regs[r.index()]
    }

    fn set_register(&mut self, r: Register, v: XWord) {
        if !r.is_zero() {
            self.regs[r.index()] = v;
        }
    }

    fn load_byte(&mut self, _src: SourceType, addr: XWord) -> PrimResult<u8> {
        self.load(addr, 1).map(|v| v as u8)
    }

    fn load_half(&mut self, _src: SourceType, addr: XWord) -> PrimResult<u16> {
        self.load(addr, 2).map(|v| v as u16)
    }

    fn load_word(&mut self, _src: SourceType, addr: XWord) -> PrimResult<u32> {
        self.load(addr, 4).map(|v| v as u32)
    }

    fn load_double(&mut self, _src: SourceType, addr: XWord) -> PrimResult<u64> {
        self.load(addr, 8)
    }

    fn store_byte(&mut self, _src: SourceType, addr: XWord, v: u8) -> PrimResult<()> {
        self.store(addr, 1, v as u64)
    }

    fn store_half(&mut self, _src: SourceType, addr: XWord, v: u16) -> PrimResult<()> {
        self.store(addr, 2, v as u64)
    }

    fn store_word(&mut self, _src: SourceType, addr: XWord, v: u32) -> PrimResult<()> {
        self.store(addr, 4, v as u64)
    }

    fn store_double(&mut self, _src: SourceType, addr: XWord, v: u64) -> PrimResult<()> {
        self.store(addr, 8, v)
    }

    fn make_reservation(&mut self, addr: XWord) -> PrimResult<()> {
        self.reservation = Some(addr.bits());
        Ok(())
    }

    fn check_reservation(&mut self, addr: XWord) -> PrimResult<bool> {
        Ok(self.reservation == Some(addr.bits()))
    }

    fn clear_reservation(&mut self, _addr: XWord) -> PrimResult<()> {
        self.reservation = None;
        Ok(())
    }

    fn get_csr_field(&mut self, field: CSRField) -> PrimResult<MachineInt> {
        Ok(self.csr[field.slot()])
    }

    fn set_csr_field(&mut self, field: CSRField, value: MachineInt) -> PrimResult<()> {
        let w = field.width(self.platform.xlen());
        let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
        self.csr[field.slot()] = (value as u64 & mask) as MachineInt;
        Ok(())
    }

    fn get_pc(&mut self) -> XWord {
        self.pc
    }

    fn set_pc(&mut self, pc: XWord) {
        self.pc = pc;
    }

    fn get_priv_mode(&mut self) -> PrivMode {
        self.priv_mode
    }

    fn set_priv_mode(&mut self, mode: PrivMode) {
        self.priv_mode = mode;
    }

    fn commit(&mut self) {}

    fn end_cycle_early(&mut self) -> StepAbort {
        StepAbort::HardFailure(crate::machine::HardFailure::new(
            "end-cycle-unsupported",
            "minimal platform cannot abort an instruction",
        ))
    }

    fn flush_tlb(&mut self) {}

    fn fence(&mut self, _pred: MachineInt, _succ: MachineInt) {}

    fn get_platform(&self) -> &PlatformConfig {
        &self.platform
    }
}

impl HaltSource for MachineState {
    fn take_halt(&mut self) -> Option<MachineInt> {
        self.halt.take()
    }
}

impl EventSink for MachineState {
    fn append_event(&mut self, event: Event) {
        self.events.push(event);
    }

    fn events(&self) -> &[Event] {
        &self.events
    }
}
