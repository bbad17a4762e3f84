//! Memory-mapped devices, layered over a base machine.

use std::collections::VecDeque;

use crate::csr::CSRField;
use crate::inst::Register;
use crate::machine::{
    hard_failure, ConfigError, HaltSource, HardFailure, MachineInterface, MmioRange,
    PlatformConfig, PrimResult, PrivMode, SourceType, StepAbort,
};
use crate::platform::{Event, EventKind, EventSink};
use crate::xword::{MachineInt, XWord};

/// A device occupying one MMIO window. Offsets are relative to the
/// window base; a device rejects accesses its register layout does not
/// define, and the rejection surfaces as a hard failure.
pub trait Device {
    fn range(&self) -> MmioRange;
    fn load(&mut self, offset: u64, width: u32) -> Result<MachineInt, HardFailure>;
    fn store(&mut self, offset: u64, width: u32, value: MachineInt) -> Result<(), HardFailure>;
}

/// Console with two byte-wide registers: writing base+0 transmits the
/// byte, reading base+4 takes the next byte from the input script (0 once
/// exhausted, keeping runs deterministic).
pub struct Uart {
    range: MmioRange,
    input: VecDeque<u8>,
}

impl Uart {
    pub const TX_OFFSET: u64 = 0;
    pub const RX_OFFSET: u64 = 4;

    pub fn new(range: MmioRange) -> Uart {
        Uart { range, input: VecDeque::new() }
    }

    pub fn with_input(range: MmioRange, input: &[u8]) -> Uart {
        Uart { range, input: input.iter().copied().collect() }
    }
}

impl Device for Uart {
    fn range(&self) -> MmioRange {
        self.range
    }

    fn load(&mut self, offset: u64, width: u32) -> Result<MachineInt, HardFailure> {
        if offset == Uart::RX_OFFSET && width == 1 {
            Ok(self.input.pop_front().unwrap_or(0) as MachineInt)
        } else {
            Err(HardFailure::new(
                "mmio-width",
                format!("uart has no {width}-byte load register at offset {offset}"),
            ))
        }
    }

    fn store(&mut self, offset: u64, width: u32, _value: MachineInt) -> Result<(), HardFailure> {
        if offset == Uart::TX_OFFSET && width == 1 {
            Ok(())
        } else {
            Err(HardFailure::new(
                "mmio-width",
                format!("uart has no {width}-byte store register at offset {offset}"),
            ))
        }
    }
}

/// Routes data accesses that hit a device window to the device and logs
/// them as events on the underlying machine; everything else delegates.
/// Fetching from a device window is a hard failure.
pub struct MmioLayer<M> {
    inner: M,
    devices: Vec<Box<dyn Device>>,
}

impl<M: MachineInterface + EventSink> MmioLayer<M> {
    /// Every device window must be one of the platform's declared MMIO
    /// ranges.
    pub fn new(inner: M, devices: Vec<Box<dyn Device>>) -> Result<MmioLayer<M>, ConfigError> {
        for d in &devices {
            let r = d.range();
            if !inner.get_platform().mmio.contains(&r) {
                return Err(ConfigError(format!(
                    "device range {:#x}+{:#x} is not a declared mmio range",
                    r.base, r.size
                )));
            }
        }
        Ok(MmioLayer { inner, devices })
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

    /// `None` means the access is not for a device and should delegate.
    fn route_load(&mut self, src: SourceType, addr: XWord, width: u32) -> Option<PrimResult<u64>> {
        let a = addr.bits();
        let idx = self.devices.iter().position(|d| d.range().contains(a))?;
        match src {
            SourceType::Fetch => {
                Some(hard_failure("mmio-fetch", format!("fetch from device window at {a:#x}")))
            }
            SourceType::VirtualMemory => None,
            SourceType::Execute => {
                let off = a - self.devices[idx].range().base;
                Some(match self.devices[idx].load(off, width) {
                    Ok(v) => {
                        self.inner.append_event(Event {
                            kind: EventKind::MmioLoad,
                            addr: a,
                            value: v,
                            width,
                        });
                        Ok(v as u64)
                    }
                    Err(f) => Err(StepAbort::HardFailure(f)),
                })
            }
        }
    }

    fn route_store(
        &mut self,
        src: SourceType,
        addr: XWord,
        width: u32,
        value: u64,
    ) -> Option<PrimResult<()>> {
        let a = addr.bits();
        let idx = self.devices.iter().position(|d| d.range().contains(a))?;
        match src {
            SourceType::Fetch => {
                Some(hard_failure("mmio-fetch", format!("fetch from device window at {a:#x}")))
            }
            SourceType::VirtualMemory => None,
            SourceType::Execute => {
                let off = a - self.devices[idx].range().base;
                Some(match self.devices[idx].store(off, width, value as MachineInt) {
                    Ok(()) => {
                        self.inner.append_event(Event {
                            kind: EventKind::MmioStore,
                            addr: a,
                            value: value as MachineInt,
                            width,
                        });
                        Ok(())
                    }
                    Err(f) => Err(StepAbort::HardFailure(f)),
                })
            }
        }
    }
}

impl<M: MachineInterface + EventSink> MachineInterface for MmioLayer<M> {
    fn get_register(&mut self, r: Register) -> XWord {
        self.inner.get_register(r)
    }

    fn set_register(&mut self, r: Register, v: XWord) {
        self.inner.set_register(r, v)
    }

    fn load_byte(&mut self, src: SourceType, addr: XWord) -> PrimResult<u8> {
        match self.route_load(src, addr, 1) {
            Some(r) => r.map(|v| v as u8),
            None => self.inner.load_byte(src, addr),
        }
    }

    fn load_half(&mut self, src: SourceType, addr: XWord) -> PrimResult<u16> {
        match self.route_load(src, addr, 2) {
            Some(r) => r.map(|v| v as u16),
            None => self.inner.load_half(src, addr),
        }
    }

    fn load_word(&mut self, src: SourceType, addr: XWord) -> PrimResult<u32> {
        match self.route_load(src, addr, 4) {
            Some(r) => r.map(|v| v as u32),
            None => self.inner.load_word(src, addr),
        }
    }

    fn load_double(&mut self, src: SourceType, addr: XWord) -> PrimResult<u64> {
        match self.route_load(src, addr, 8) {
            Some(r) => r,
            None => self.inner.load_double(src, addr),
        }
    }

    fn store_byte(&mut self, src: SourceType, addr: XWord, v: u8) -> PrimResult<()> {
        match self.route_store(src, addr, 1, v as u64) {
            Some(r) => r,
            None => self.inner.store_byte(src, addr, v),
        }
    }

    fn store_half(&mut self, src: SourceType, addr: XWord, v: u16) -> PrimResult<()> {
        match self.route_store(src, addr, 2, v as u64) {
            Some(r) => r,
            None => self.inner.store_half(src, addr, v),
        }
    }

    fn store_word(&mut self, src: SourceType, addr: XWord, v: u32) -> PrimResult<()> {
        match self.route_store(src, addr, 4, v as u64) {
            Some(r) => r,
            None => self.inner.store_word(src, addr, v),
        }
    }

    fn store_double(&mut self, src: SourceType, addr: XWord, v: u64) -> PrimResult<()> {
        match self.route_store(src, addr, 8, v) {
            Some(r) => r,
            None => self.inner.store_double(src, addr, v),
        }
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
        self.inner.end_cycle_early()
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

impl<M: HaltSource> HaltSource for MmioLayer<M> {
    fn take_halt(&mut self) -> Option<MachineInt> {
        self.inner.take_halt()
    }
}

impl<M: EventSink> EventSink for MmioLayer<M> {
    fn append_event(&mut self, event: Event) {
        self.inner.append_event(event)
    }

    fn events(&self) -> &[Event] {
        self.inner.events()
    }
}
