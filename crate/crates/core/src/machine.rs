//! The abstract machine interface.
//!
//! Instruction semantics are written once against this trait and reused by
//! every backend: the concrete simulator, the trap-handler differential
//! harness and the weak-memory explorer each supply their own primitives.
//! The trait deliberately stays small: registers, sized memory accesses
//! tagged with why they happen, reservations, CSR fields, pc, privilege,
//! and a handful of bookkeeping hooks.

use crate::csr::CSRField;
use crate::decode::ExtensionSet;
use crate::inst::Register;
use crate::xword::{MachineInt, XWord, Xlen};

/// Why a memory access happens. Fetches and data accesses may be treated
/// differently by a platform (an MMIO region, for example, refuses fetches).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceType {
    VirtualMemory,
    Fetch,
    Execute,
}

/// Privilege level. Only machine and user exist here; supervisor mode is
/// out of scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrivMode {
    User,
    Machine,
}

impl PrivMode {
    /// The architectural two-bit encoding used in mstatus.MPP.
    pub fn code(self) -> MachineInt {
        match self {
            PrivMode::User => 0,
            PrivMode::Machine => 3,
        }
    }

    pub fn from_code(code: MachineInt) -> PrivMode {
        if code & 3 == 3 {
            PrivMode::Machine
        } else {
            PrivMode::User
        }
    }
}

/// A non-recoverable platform error: the program walked off the rails in a
/// way the architecture does not give a trap for, or invoked a primitive
/// the platform does not implement.
///
/// `code` is a stable machine-readable identifier; the ones used by the
/// shipped platforms are `bad-address`, `mmio-width`, `mmio-fetch`,
/// `csr-unsupported`, `reservation-unsupported`, `end-cycle-unsupported`
/// and `non-word-access`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardFailure {
    pub code: &'static str,
    pub detail: String,
}

impl HardFailure {
    pub fn new(code: &'static str, detail: impl Into<String>) -> HardFailure {
        HardFailure { code, detail: detail.into() }
    }
}

impl std::fmt::Display for HardFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.detail.is_empty() {
            write!(f, "{}", self.code)
        } else {
            write!(f, "{}: {}", self.code, self.detail)
        }
    }
}

/// The abort channel threaded through one instruction's execution. Once a
/// primitive aborts, the step function propagates the abort outward and no
/// further primitive of that step runs, so an abort is sticky for the step
/// without any global flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepAbort {
    /// The instruction ended its cycle early (trap entry). Not an error:
    /// the driver continues with the next step.
    EarlyExit,
    HardFailure(HardFailure),
}

pub type PrimResult<T> = Result<T, StepAbort>;

pub fn hard_failure<T>(code: &'static str, detail: impl Into<String>) -> PrimResult<T> {
    Err(StepAbort::HardFailure(HardFailure::new(code, detail)))
}

/// What a single step did, as seen by the driver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Completed,
    EarlyExit,
    HardFailure(HardFailure),
}

impl From<PrimResult<()>> for StepOutcome {
    fn from(r: PrimResult<()>) -> StepOutcome {
        match r {
            Ok(()) => StepOutcome::Completed,
            Err(StepAbort::EarlyExit) => StepOutcome::EarlyExit,
            Err(StepAbort::HardFailure(f)) => StepOutcome::HardFailure(f),
        }
    }
}

/// An address range claimed by a memory-mapped device.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MmioRange {
    pub base: u64,
    pub size: u64,
}

impl MmioRange {
    pub fn contains(&self, addr: u64) -> bool {
        addr >= self.base && addr - self.base < self.size
    }

    fn overlaps(&self, base: u64, size: u64) -> bool {
        self.base < base.saturating_add(size) && base < self.base.saturating_add(self.size)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid platform configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Static description of a platform: width, decode set and memory map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlatformConfig {
    pub ext: ExtensionSet,
    pub mem_base: u64,
    pub mem_size: u64,
    pub mmio: Vec<MmioRange>,
    pub tohost: Option<u64>,
}

pub const DEFAULT_MEM_BASE: u64 = 0x8000_0000;
pub const DEFAULT_MEM_SIZE: u64 = 16 * 1024 * 1024;
pub const DEFAULT_UART_BASE: u64 = 0x1000_0000;
pub const DEFAULT_UART_SIZE: u64 = 16;

impl PlatformConfig {
    pub fn new(ext: ExtensionSet, mem_base: u64, mem_size: u64) -> PlatformConfig {
        PlatformConfig { ext, mem_base, mem_size, mmio: Vec::new(), tohost: None }
    }

    /// The default map: 16 MiB of ram at 0x8000_0000 and a 16-byte UART
    /// window at 0x1000_0000.
    pub fn default_map(ext: ExtensionSet) -> PlatformConfig {
        PlatformConfig::new(ext, DEFAULT_MEM_BASE, DEFAULT_MEM_SIZE)
            .add_mmio(MmioRange { base: DEFAULT_UART_BASE, size: DEFAULT_UART_SIZE })
            .expect("default map is consistent")
    }

    /// Adds a device window, rejecting overlap with ram or other windows.
    pub fn add_mmio(mut self, range: MmioRange) -> Result<PlatformConfig, ConfigError> {
        if range.overlaps(self.mem_base, self.mem_size) {
            return Err(ConfigError(format!(
                "mmio range {:#x}+{:#x} overlaps ram",
                range.base, range.size
            )));
        }
        if self.mmio.iter().any(|r| r.overlaps(range.base, range.size)) {
            return Err(ConfigError(format!(
                "mmio range {:#x}+{:#x} overlaps another device",
                range.base, range.size
            )));
        }
        self.mmio.push(range);
        Ok(self)
    }

    pub fn with_tohost(mut self, addr: u64) -> PlatformConfig {
        self.tohost = Some(addr);
        self
    }

    pub fn xlen(&self) -> Xlen {
        self.ext.xlen
    }

    pub fn in_ram(&self, addr: u64, len: u64) -> bool {
        addr >= self.mem_base
            && addr - self.mem_base < self.mem_size
            && self.mem_size - (addr - self.mem_base) >= len
    }

    pub fn mmio_range_of(&self, addr: u64) -> Option<&MmioRange> {
        self.mmio.iter().find(|r| r.contains(addr))
    }
}

/// The machine primitives.
///
/// Contracts every implementation honors:
/// - register x0 reads zero and ignores writes;
/// - memory order within one instruction is program order;
/// - `commit` and `flush_tlb` may be no-ops but must be callable;
/// - an unsupported primitive fails with a stable `HardFailure` code
///   rather than panicking.
pub trait MachineInterface {
    fn get_register(&mut self, r: Register) -> XWord;
    fn set_register(&mut self, r: Register, v: XWord);

    fn load_byte(&mut self, src: SourceType, addr: XWord) -> PrimResult<u8>;
    fn load_half(&mut self, src: SourceType, addr: XWord) -> PrimResult<u16>;
    fn load_word(&mut self, src: SourceType, addr: XWord) -> PrimResult<u32>;
    fn load_double(&mut self, src: SourceType, addr: XWord) -> PrimResult<u64>;
    fn store_byte(&mut self, src: SourceType, addr: XWord, v: u8) -> PrimResult<()>;
    fn store_half(&mut self, src: SourceType, addr: XWord, v: u16) -> PrimResult<()>;
    fn store_word(&mut self, src: SourceType, addr: XWord, v: u32) -> PrimResult<()>;
    fn store_double(&mut self, src: SourceType, addr: XWord, v: u64) -> PrimResult<()>;

    fn make_reservation(&mut self, addr: XWord) -> PrimResult<()>;
    fn check_reservation(&mut self, addr: XWord) -> PrimResult<bool>;
    fn clear_reservation(&mut self, addr: XWord) -> PrimResult<()>;

    fn get_csr_field(&mut self, field: CSRField) -> PrimResult<MachineInt>;
    fn set_csr_field(&mut self, field: CSRField, value: MachineInt) -> PrimResult<()>;

    fn get_pc(&mut self) -> XWord;
    fn set_pc(&mut self, pc: XWord);

    fn get_priv_mode(&mut self) -> PrivMode;
    fn set_priv_mode(&mut self, mode: PrivMode);

    /// Marks the current instruction as retired. A hook for layers; the
    /// shipped platforms do nothing here.
    fn commit(&mut self);

    /// Ends the cycle without running the rest of the instruction. The
    /// return value is the abort the caller must propagate; a platform
    /// without early-exit support returns a hard failure instead.
    fn end_cycle_early(&mut self) -> StepAbort;

    fn flush_tlb(&mut self);

    fn fence(&mut self, pred: MachineInt, succ: MachineInt);

    fn get_platform(&self) -> &PlatformConfig;

    fn xlen(&self) -> Xlen {
        self.get_platform().xlen()
    }
}

/// Halt conditions a platform can raise outside the abort channel, such as
/// a write to the configured tohost address. Polled by the run loop after
/// every step.
pub trait HaltSource {
    fn take_halt(&mut self) -> Option<MachineInt>;
}
