//! Register names and the decoded instruction set.

use std::fmt;

use crate::xword::MachineInt;

/// One of the 32 integer registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Register(u8);

impl Register {
    pub const ZERO: Register = Register(0);
    pub const RA: Register = Register(1);
    pub const SP: Register = Register(2);

    pub fn new(index: u8) -> Register {
        assert!(index < 32, "register index out of range: {index}");
        Register(index)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn all() -> impl Iterator<Item = Register> {
        (0..32).map(Register)
    }
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A decoded instruction.
///
/// Immediate fields carry their value after sign extension, so execution
/// never re-interprets encoding details: `sbimm12` and `jimm20` are byte
/// offsets, `imm20`/`oimm20` hold the upper immediate already shifted left
/// by twelve, and `shamt5`/`shamt6` are plain shift amounts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instruction {
    // RV32I
    Lui { rd: Register, imm20: MachineInt },
    Auipc { rd: Register, oimm20: MachineInt },
    Jal { rd: Register, jimm20: MachineInt },
    Jalr { rd: Register, rs1: Register, oimm12: MachineInt },
    Beq { rs1: Register, rs2: Register, sbimm12: MachineInt },
    Bne { rs1: Register, rs2: Register, sbimm12: MachineInt },
    Blt { rs1: Register, rs2: Register, sbimm12: MachineInt },
    Bge { rs1: Register, rs2: Register, sbimm12: MachineInt },
    Bltu { rs1: Register, rs2: Register, sbimm12: MachineInt },
    Bgeu { rs1: Register, rs2: Register, sbimm12: MachineInt },
    Lb { rd: Register, rs1: Register, oimm12: MachineInt },
    Lh { rd: Register, rs1: Register, oimm12: MachineInt },
    Lw { rd: Register, rs1: Register, oimm12: MachineInt },
    Lbu { rd: Register, rs1: Register, oimm12: MachineInt },
    Lhu { rd: Register, rs1: Register, oimm12: MachineInt },
    Sb { rs1: Register, rs2: Register, simm12: MachineInt },
    Sh { rs1: Register, rs2: Register, simm12: MachineInt },
    Sw { rs1: Register, rs2: Register, simm12: MachineInt },
    Addi { rd: Register, rs1: Register, imm12: MachineInt },
    Slti { rd: Register, rs1: Register, imm12: MachineInt },
    Sltiu { rd: Register, rs1: Register, imm12: MachineInt },
    Xori { rd: Register, rs1: Register, imm12: MachineInt },
    Ori { rd: Register, rs1: Register, imm12: MachineInt },
    Andi { rd: Register, rs1: Register, imm12: MachineInt },
    Slli { rd: Register, rs1: Register, shamt6: MachineInt },
    Srli { rd: Register, rs1: Register, shamt6: MachineInt },
    Srai { rd: Register, rs1: Register, shamt6: MachineInt },
    Add { rd: Register, rs1: Register, rs2: Register },
    Sub { rd: Register, rs1: Register, rs2: Register },
    Sll { rd: Register, rs1: Register, rs2: Register },
    Slt { rd: Register, rs1: Register, rs2: Register },
    Sltu { rd: Register, rs1: Register, rs2: Register },
    Xor { rd: Register, rs1: Register, rs2: Register },
    Srl { rd: Register, rs1: Register, rs2: Register },
    Sra { rd: Register, rs1: Register, rs2: Register },
    Or { rd: Register, rs1: Register, rs2: Register },
    And { rd: Register, rs1: Register, rs2: Register },
    Fence { pred: MachineInt, succ: MachineInt },
    Ecall,
    Ebreak,

    // RV64I
    Lwu { rd: Register, rs1: Register, oimm12: MachineInt },
    Ld { rd: Register, rs1: Register, oimm12: MachineInt },
    Sd { rs1: Register, rs2: Register, simm12: MachineInt },
    Addiw { rd: Register, rs1: Register, imm12: MachineInt },
    Slliw { rd: Register, rs1: Register, shamt5: MachineInt },
    Srliw { rd: Register, rs1: Register, shamt5: MachineInt },
    Sraiw { rd: Register, rs1: Register, shamt5: MachineInt },
    Addw { rd: Register, rs1: Register, rs2: Register },
    Subw { rd: Register, rs1: Register, rs2: Register },
    Sllw { rd: Register, rs1: Register, rs2: Register },
    Srlw { rd: Register, rs1: Register, rs2: Register },
    Sraw { rd: Register, rs1: Register, rs2: Register },

    // M
    Mul { rd: Register, rs1: Register, rs2: Register },
    Mulh { rd: Register, rs1: Register, rs2: Register },
    Mulhsu { rd: Register, rs1: Register, rs2: Register },
    Mulhu { rd: Register, rs1: Register, rs2: Register },
    Div { rd: Register, rs1: Register, rs2: Register },
    Divu { rd: Register, rs1: Register, rs2: Register },
    Rem { rd: Register, rs1: Register, rs2: Register },
    Remu { rd: Register, rs1: Register, rs2: Register },
    Mulw { rd: Register, rs1: Register, rs2: Register },
    Divw { rd: Register, rs1: Register, rs2: Register },
    Divuw { rd: Register, rs1: Register, rs2: Register },
    Remw { rd: Register, rs1: Register, rs2: Register },
    Remuw { rd: Register, rs1: Register, rs2: Register },

    // Zicsr
    Csrrw { rd: Register, rs1: Register, csr12: MachineInt },
    Csrrs { rd: Register, rs1: Register, csr12: MachineInt },
    Csrrc { rd: Register, rs1: Register, csr12: MachineInt },
    Csrrwi { rd: Register, zimm: MachineInt, csr12: MachineInt },
    Csrrsi { rd: Register, zimm: MachineInt, csr12: MachineInt },
    Csrrci { rd: Register, zimm: MachineInt, csr12: MachineInt },

    // Privileged
    Mret,

    InvalidInstruction { raw: MachineInt },
}

fn fence_set(bits: MachineInt) -> String {
    let mut s = String::new();
    for (bit, c) in [(8, 'i'), (4, 'o'), (2, 'r'), (1, 'w')] {
        if bits & bit != 0 {
            s.push(c);
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Instruction::*;
        macro_rules! r {
            ($n:literal, $rd:expr, $rs1:expr, $rs2:expr) => {
                write!(f, "{} {}, {}, {}", $n, $rd, $rs1, $rs2)
            };
        }
        macro_rules! i {
            ($n:literal, $rd:expr, $rs1:expr, $imm:expr) => {
                write!(f, "{} {}, {}, {}", $n, $rd, $rs1, $imm)
            };
        }
        macro_rules! mem {
            ($n:literal, $val:expr, $imm:expr, $base:expr) => {
                write!(f, "{} {}, {}({})", $n, $val, $imm, $base)
            };
        }
        macro_rules! b {
            ($n:literal, $rs1:expr, $rs2:expr, $off:expr) => {
                write!(f, "{} {}, {}, {}", $n, $rs1, $rs2, $off)
            };
        }
        macro_rules! csr {
            ($n:literal, $rd:expr, $csr:expr, $src:expr) => {
                write!(f, "{} {}, {:#x}, {}", $n, $rd, $csr, $src)
            };
        }
        match *self {
            Lui { rd, imm20 } => write!(f, "lui {}, {:#x}", rd, (imm20 as u64 >> 12) & 0xfffff),
            Auipc { rd, oimm20 } => write!(f, "auipc {}, {:#x}", rd, (oimm20 as u64 >> 12) & 0xfffff),
            Jal { rd, jimm20 } => write!(f, "jal {}, {}", rd, jimm20),
            Jalr { rd, rs1, oimm12 } => write!(f, "jalr {}, {}({})", rd, oimm12, rs1),
            Beq { rs1, rs2, sbimm12 } => b!("beq", rs1, rs2, sbimm12),
            Bne { rs1, rs2, sbimm12 } => b!("bne", rs1, rs2, sbimm12),
            Blt { rs1, rs2, sbimm12 } => b!("blt", rs1, rs2, sbimm12),
            Bge { rs1, rs2, sbimm12 } => b!("bge", rs1, rs2, sbimm12),
            Bltu { rs1, rs2, sbimm12 } => b!("bltu", rs1, rs2, sbimm12),
            Bgeu { rs1, rs2, sbimm12 } => b!("bgeu", rs1, rs2, sbimm12),
            Lb { rd, rs1, oimm12 } => mem!("lb", rd, oimm12, rs1),
            Lh { rd, rs1, oimm12 } => mem!("lh", rd, oimm12, rs1),
            Lw { rd, rs1, oimm12 } => mem!("lw", rd, oimm12, rs1),
            Lbu { rd, rs1, oimm12 } => mem!("lbu", rd, oimm12, rs1),
            Lhu { rd, rs1, oimm12 } => mem!("lhu", rd, oimm12, rs1),
            Lwu { rd, rs1, oimm12 } => mem!("lwu", rd, oimm12, rs1),
            Ld { rd, rs1, oimm12 } => mem!("ld", rd, oimm12, rs1),
            Sb { rs1, rs2, simm12 } => mem!("sb", rs2, simm12, rs1),
            Sh { rs1, rs2, simm12 } => mem!("sh", rs2, simm12, rs1),
            Sw { rs1, rs2, simm12 } => mem!("sw", rs2, simm12, rs1),
            Sd { rs1, rs2, simm12 } => mem!("sd", rs2, simm12, rs1),
            Addi { rd, rs1, imm12 } => i!("addi", rd, rs1, imm12),
            Slti { rd, rs1, imm12 } => i!("slti", rd, rs1, imm12),
            Sltiu { rd, rs1, imm12 } => i!("sltiu", rd, rs1, imm12),
            Xori { rd, rs1, imm12 } => i!("xori", rd, rs1, imm12),
            Ori { rd, rs1, imm12 } => i!("ori", rd, rs1, imm12),
            Andi { rd, rs1, imm12 } => i!("andi", rd, rs1, imm12),
            Slli { rd, rs1, shamt6 } => i!("slli", rd, rs1, shamt6),
            Srli { rd, rs1, shamt6 } => i!("srli", rd, rs1, shamt6),
            Srai { rd, rs1, shamt6 } => i!("srai", rd, rs1, shamt6),
            Addiw { rd, rs1, imm12 } => i!("addiw", rd, rs1, imm12),
            Slliw { rd, rs1, shamt5 } => i!("slliw", rd, rs1, shamt5),
            Srliw { rd, rs1, shamt5 } => i!("srliw", rd, rs1, shamt5),
            Sraiw { rd, rs1, shamt5 } => i!("sraiw", rd, rs1, shamt5),
            Add { rd, rs1, rs2 } => r!("add", rd, rs1, rs2),
            Sub { rd, rs1, rs2 } => r!("sub", rd, rs1, rs2),
            Sll { rd, rs1, rs2 } => r!("sll", rd, rs1, rs2),
            Slt { rd, rs1, rs2 } => r!("slt", rd, rs1, rs2),
            Sltu { rd, rs1, rs2 } => r!("sltu", rd, rs1, rs2),
            Xor { rd, rs1, rs2 } => r!("xor", rd, rs1, rs2),
            Srl { rd, rs1, rs2 } => r!("srl", rd, rs1, rs2),
            Sra { rd, rs1, rs2 } => r!("sra", rd, rs1, rs2),
            Or { rd, rs1, rs2 } => r!("or", rd, rs1, rs2),
            And { rd, rs1, rs2 } => r!("and", rd, rs1, rs2),
            Addw { rd, rs1, rs2 } => r!("addw", rd, rs1, rs2),
            Subw { rd, rs1, rs2 } => r!("subw", rd, rs1, rs2),
            Sllw { rd, rs1, rs2 } => r!("sllw", rd, rs1, rs2),
            Srlw { rd, rs1, rs2 } => r!("srlw", rd, rs1, rs2),
            Sraw { rd, rs1, rs2 } => r!("sraw", rd, rs1, rs2),
            Mul { rd, rs1, rs2 } => r!("mul", rd, rs1, rs2),
            Mulh { rd, rs1, rs2 } => r!("mulh", rd, rs1, rs2),
            Mulhsu { rd, rs1, rs2 } => r!("mulhsu", rd, rs1, rs2),
            Mulhu { rd, rs1, rs2 } => r!("mulhu", rd, rs1, rs2),
            Div { rd, rs1, rs2 } => r!("div", rd, rs1, rs2),
            Divu { rd, rs1, rs2 } => r!("divu", rd, rs1, rs2),
            Rem { rd, rs1, rs2 } => r!("rem", rd, rs1, rs2),
            Remu { rd, rs1, rs2 } => r!("remu", rd, rs1, rs2),
            Mulw { rd, rs1, rs2 } => r!("mulw", rd, rs1, rs2),
            Divw { rd, rs1, rs2 } => r!("divw", rd, rs1, rs2),
            Divuw { rd, rs1, rs2 } => r!("divuw", rd, rs1, rs2),
            Remw { rd, rs1, rs2 } => r!("remw", rd, rs1, rs2),
            Remuw { rd, rs1, rs2 } => r!("remuw", rd, rs1, rs2),
            Fence { pred, succ } => write!(f, "fence {},{}", fence_set(pred), fence_set(succ)),
            Ecall => write!(f, "ecall"),
            Ebreak => write!(f, "ebreak"),
            Mret => write!(f, "mret"),
            Csrrw { rd, rs1, csr12 } => csr!("csrrw", rd, csr12, rs1),
            Csrrs { rd, rs1, csr12 } => csr!("csrrs", rd, csr12, rs1),
            Csrrc { rd, rs1, csr12 } => csr!("csrrc", rd, csr12, rs1),
            Csrrwi { rd, zimm, csr12 } => csr!("csrrwi", rd, csr12, zimm),
            Csrrsi { rd, zimm, csr12 } => csr!("csrrsi", rd, csr12, zimm),
            Csrrci { rd, zimm, csr12 } => csr!("csrrci", rd, csr12, zimm),
            InvalidInstruction { raw } => write!(f, "invalid {:#010x}", raw),
        }
    }
}
