//! Synchronous exception causes.

use crate::xword::MachineInt;

/// Exception cause codes (the mcause values we can raise).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CauseCode {
    InstrAddrMisaligned = 0,
    IllegalInstruction = 2,
    Breakpoint = 3,
    LoadAddrMisaligned = 4,
    StoreAddrMisaligned = 6,
    EcallFromM = 11,
}

impl CauseCode {
    pub fn code(self) -> MachineInt {
        self as u8 as MachineInt
    }
}

/// A cause together with the value destined for mtval: the faulting
/// address for misalignment, the raw word for an illegal instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExceptionCause {
    pub code: CauseCode,
    pub info: MachineInt,
}

impl ExceptionCause {
    pub fn new(code: CauseCode, info: MachineInt) -> ExceptionCause {
        ExceptionCause { code, info }
    }

    pub fn misaligned_fetch(target: MachineInt) -> ExceptionCause {
        ExceptionCause::new(CauseCode::InstrAddrMisaligned, target)
    }

    pub fn illegal(raw: MachineInt) -> ExceptionCause {
        ExceptionCause::new(CauseCode::IllegalInstruction, raw)
    }

    pub fn misaligned_load(addr: MachineInt) -> ExceptionCause {
        ExceptionCause::new(CauseCode::LoadAddrMisaligned, addr)
    }

    pub fn misaligned_store(addr: MachineInt) -> ExceptionCause {
        ExceptionCause::new(CauseCode::StoreAddrMisaligned, addr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cause_codes_match_architecture() {
        assert_eq!(CauseCode::InstrAddrMisaligned.code(), 0);
        assert_eq!(CauseCode::IllegalInstruction.code(), 2);
        assert_eq!(CauseCode::Breakpoint.code(), 3);
        assert_eq!(CauseCode::LoadAddrMisaligned.code(), 4);
        assert_eq!(CauseCode::StoreAddrMisaligned.code(), 6);
        assert_eq!(CauseCode::EcallFromM.code(), 11);
    }
}
