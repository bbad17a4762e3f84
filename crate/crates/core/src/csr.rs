//! Control and status register state, at field granularity.
//!
//! The machine interface exposes individual fields rather than whole CSRs;
//! the CSR instructions reassemble architectural register values from the
//! fields they are built of.

use crate::xword::Xlen;

/// A machine-mode CSR field. Writes through the interface are masked to the
/// field's declared width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CSRField {
    /// Trap vector base address, stored pre-shifted right by two
    /// (direct mode only, so the low mode bits are never kept).
    MTVecBase,
    /// Exception program counter.
    MEPC,
    /// Trap cause code.
    MCauseCode,
    /// Trap cause interrupt bit.
    MCauseInterrupt,
    /// Trap value (faulting address or instruction word).
    MTVal,
    /// Scratch register for trap handlers.
    MScratch,
    /// Previous privilege mode, two bits of mstatus.
    MStatusMPP,
    /// Previous interrupt-enable bit of mstatus.
    MStatusMPIE,
    /// Interrupt-enable bit of mstatus.
    MStatusMIE,
}

pub const CSR_FIELD_COUNT: usize = 9;

impl CSRField {
    pub fn width(self, xlen: Xlen) -> u32 {
        match self {
            CSRField::MTVecBase => xlen.bits() - 2,
            CSRField::MEPC | CSRField::MTVal | CSRField::MScratch => xlen.bits(),
            CSRField::MCauseCode => xlen.bits() - 1,
            CSRField::MCauseInterrupt | CSRField::MStatusMPIE | CSRField::MStatusMIE => 1,
            CSRField::MStatusMPP => 2,
        }
    }

    pub(crate) fn slot(self) -> usize {
        match self {
            CSRField::MTVecBase => 0,
            CSRField::MEPC => 1,
            CSRField::MCauseCode => 2,
            CSRField::MCauseInterrupt => 3,
            CSRField::MTVal => 4,
            CSRField::MScratch => 5,
            CSRField::MStatusMPP => 6,
            CSRField::MStatusMPIE => 7,
            CSRField::MStatusMIE => 8,
        }
    }
}

/// Architectural CSR addresses understood by the CSR instructions.
pub mod addr {
    use crate::xword::MachineInt;

    pub const MSTATUS: MachineInt = 0x300;
    pub const MTVEC: MachineInt = 0x305;
    pub const MSCRATCH: MachineInt = 0x340;
    pub const MEPC: MachineInt = 0x341;
    pub const MCAUSE: MachineInt = 0x342;
    pub const MTVAL: MachineInt = 0x343;
}

/// Bit positions of the mstatus fields we model.
pub mod mstatus {
    pub const MIE_SHIFT: u32 = 3;
    pub const MPIE_SHIFT: u32 = 7;
    pub const MPP_SHIFT: u32 = 11;
}
