//! Instruction decoding for RV32I/RV64I plus the M and Zicsr extensions.
//!
//! Decoding is total: anything that does not match an enabled extension's
//! patterns comes back as `InvalidInstruction` carrying the raw word, and
//! the machine-level illegal-instruction trap is raised at execution time.

use crate::inst::{Instruction, Register};
use crate::xword::{MachineInt, Xlen};

/// Bits `[lo, hi)` of `word`, zero-extended.
pub fn bit_slice(word: MachineInt, lo: u32, hi: u32) -> MachineInt {
    debug_assert!(lo < hi && hi <= 64);
    let width = hi - lo;
    let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
    (((word as u64) >> lo) & mask) as MachineInt
}

/// Sign-extends the low `width` bits of `value`.
pub fn sign_extend(width: u32, value: MachineInt) -> MachineInt {
    debug_assert!((1..=64).contains(&width));
    let shift = 64 - width;
    (value << shift) >> shift
}

/// The ISA subset a decoder accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtensionSet {
    pub xlen: Xlen,
    pub m: bool,
    pub zicsr: bool,
}

impl ExtensionSet {
    pub fn rv32i() -> ExtensionSet {
        ExtensionSet { xlen: Xlen::X32, m: false, zicsr: false }
    }

    pub fn rv64i() -> ExtensionSet {
        ExtensionSet { xlen: Xlen::X64, m: false, zicsr: false }
    }

    pub fn with_m(self) -> ExtensionSet {
        ExtensionSet { m: true, ..self }
    }

    pub fn with_zicsr(self) -> ExtensionSet {
        ExtensionSet { zicsr: true, ..self }
    }

    /// Parses names like `rv32i`, `rv64im`, `rv32im_zicsr`, `rv64imzicsr`.
    pub fn parse(name: &str) -> Result<ExtensionSet, String> {
        let lower = name.to_ascii_lowercase();
        let rest = lower
            .strip_prefix("rv")
            .ok_or_else(|| format!("ISA string must start with rv: {name:?}"))?;
        let (xlen, rest) = if let Some(r) = rest.strip_prefix("32") {
            (Xlen::X32, r)
        } else if let Some(r) = rest.strip_prefix("64") {
            (Xlen::X64, r)
        } else {
            return Err(format!("ISA string must name a width of 32 or 64: {name:?}"));
        };
        let mut rest = rest
            .strip_prefix('i')
            .ok_or_else(|| format!("ISA string must include the base i set: {name:?}"))?;
        let mut ext = ExtensionSet { xlen, m: false, zicsr: false };
        while !rest.is_empty() {
            if let Some(r) = rest.strip_prefix('_') {
                rest = r;
            } else if let Some(r) = rest.strip_prefix('m') {
                ext.m = true;
                rest = r;
            } else if let Some(r) = rest.strip_prefix("zicsr") {
                ext.zicsr = true;
                rest = r;
            } else {
                return Err(format!("unsupported extension in ISA string {name:?}: {rest:?}"));
            }
        }
        Ok(ext)
    }
}

impl std::str::FromStr for ExtensionSet {
    type Err = String;

    fn from_str(s: &str) -> Result<ExtensionSet, String> {
        ExtensionSet::parse(s)
    }
}

/// A decode function fixed to one extension set, the shape the step
/// function is parameterized over.
#[derive(Debug, Clone, Copy)]
pub struct Decoder {
    ext: ExtensionSet,
}

impl Decoder {
    pub fn new(ext: ExtensionSet) -> Decoder {
        Decoder { ext }
    }

    pub fn ext(&self) -> ExtensionSet {
        self.ext
    }

    pub fn decode(&self, word: MachineInt) -> Instruction {
        decode(self.ext, word)
    }
}

mod opcode {
    pub const LOAD: i64 = 0x03;
    pub const MISC_MEM: i64 = 0x0f;
    pub const OP_IMM: i64 = 0x13;
    pub const AUIPC: i64 = 0x17;
    pub const OP_IMM_32: i64 = 0x1b;
    pub const STORE: i64 = 0x23;
    pub const OP: i64 = 0x33;
    pub const LUI: i64 = 0x37;
    pub const OP_32: i64 = 0x3b;
    pub const BRANCH: i64 = 0x63;
    pub const JALR: i64 = 0x67;
    pub const JAL: i64 = 0x6f;
    pub const SYSTEM: i64 = 0x73;
}

struct Fields {
    w: MachineInt,
    opcode: MachineInt,
    rd: Register,
    rs1: Register,
    rs2: Register,
    funct3: MachineInt,
    funct7: MachineInt,
}

impl Fields {
    fn new(w: MachineInt) -> Fields {
        Fields {
            w,
            opcode: bit_slice(w, 0, 7),
            rd: Register::new(bit_slice(w, 7, 12) as u8),
            rs1: Register::new(bit_slice(w, 15, 20) as u8),
            rs2: Register::new(bit_slice(w, 20, 25) as u8),
            funct3: bit_slice(w, 12, 15),
            funct7: bit_slice(w, 25, 32),
        }
    }

    fn imm_i(&self) -> MachineInt {
        sign_extend(12, bit_slice(self.w, 20, 32))
    }

    fn imm_s(&self) -> MachineInt {
        sign_extend(12, bit_slice(self.w, 25, 32) << 5 | bit_slice(self.w, 7, 12))
    }

    fn imm_b(&self) -> MachineInt {
        sign_extend(
            13,
            bit_slice(self.w, 31, 32) << 12
                | bit_slice(self.w, 7, 8) << 11
                | bit_slice(self.w, 25, 31) << 5
                | bit_slice(self.w, 8, 12) << 1,
        )
    }

    fn imm_u(&self) -> MachineInt {
        sign_extend(32, bit_slice(self.w, 12, 32) << 12)
    }

    fn imm_j(&self) -> MachineInt {
        sign_extend(
            21,
            bit_slice(self.w, 31, 32) << 20
                | bit_slice(self.w, 12, 20) << 12
                | bit_slice(self.w, 20, 21) << 11
                | bit_slice(self.w, 21, 31) << 1,
        )
    }
}

/// Decodes one 32-bit word against the enabled extensions.
pub fn decode(ext: ExtensionSet, word: MachineInt) -> Instruction {
    let w = word & 0xffff_ffff;
    let invalid = Instruction::InvalidInstruction { raw: w };
    // Only the 32-bit encoding space is supported; compressed instructions
    // live below it.
    if bit_slice(w, 0, 2) != 0b11 {
        return invalid;
    }
    let f = Fields::new(w);
    decode_i(ext.xlen, &f)
        .or_else(|| if ext.xlen == Xlen::X64 { decode_i64(&f) } else { None })
        .or_else(|| if ext.m { decode_m(&f) } else { None })
        .or_else(|| if ext.m && ext.xlen == Xlen::X64 { decode_m64(&f) } else { None })
        .or_else(|| if ext.zicsr { decode_csr(&f) } else { None })
        .or_else(|| decode_machine(&f))
        .unwrap_or(invalid)
}

fn decode_i(xlen: Xlen, f: &Fields) -> Option<Instruction> {
    use Instruction::*;
    let (rd, rs1, rs2) = (f.rd, f.rs1, f.rs2);
    let inst = match f.opcode {
        opcode::LUI => Lui { rd, imm20: f.imm_u() },
        opcode::AUIPC => Auipc { rd, oimm20: f.imm_u() },
        opcode::JAL => Jal { rd, jimm20: f.imm_j() },
        opcode::JALR if f.funct3 == 0 => Jalr { rd, rs1, oimm12: f.imm_i() },
        opcode::BRANCH => {
            let sbimm12 = f.imm_b();
            match f.funct3 {
                0 => Beq { rs1, rs2, sbimm12 },
                1 => Bne { rs1, rs2, sbimm12 },
                4 => Blt { rs1, rs2, sbimm12 },
                5 => Bge { rs1, rs2, sbimm12 },
                6 => Bltu { rs1, rs2, sbimm12 },
                7 => Bgeu { rs1, rs2, sbimm12 },
                _ => return None,
            }
        }
        opcode::LOAD => {
            let oimm12 = f.imm_i();
            match f.funct3 {
                0 => Lb { rd, rs1, oimm12 },
                1 => Lh { rd, rs1, oimm12 },
                2 => Lw { rd, rs1, oimm12 },
                4 => Lbu { rd, rs1, oimm12 },
                5 => Lhu { rd, rs1, oimm12 },
                _ => return None,
            }
        }
        opcode::STORE => {
            let simm12 = f.imm_s();
            match f.funct3 {
                0 => Sb { rs1, rs2, simm12 },
                1 => Sh { rs1, rs2, simm12 },
                2 => Sw { rs1, rs2, simm12 },
                _ => return None,
            }
        }
        opcode::OP_IMM => {
            let imm12 = f.imm_i();
            match f.funct3 {
                0 => Addi { rd, rs1, imm12 },
                2 => Slti { rd, rs1, imm12 },
                3 => Sltiu { rd, rs1, imm12 },
                4 => Xori { rd, rs1, imm12 },
                6 => Ori { rd, rs1, imm12 },
                7 => Andi { rd, rs1, imm12 },
                1 | 5 => return decode_shift_imm(xlen, f),
                _ => unreachable!(),
            }
        }
        opcode::OP => match (f.funct7, f.funct3) {
            (0x00, 0) => Add { rd, rs1, rs2 },
            (0x00, 1) => Sll { rd, rs1, rs2 },
            (0x00, 2) => Slt { rd, rs1, rs2 },
            (0x00, 3) => Sltu { rd, rs1, rs2 },
            (0x00, 4) => Xor { rd, rs1, rs2 },
            (0x00, 5) => Srl { rd, rs1, rs2 },
            (0x00, 6) => Or { rd, rs1, rs2 },
            (0x00, 7) => And { rd, rs1, rs2 },
            (0x20, 0) => Sub { rd, rs1, rs2 },
            (0x20, 5) => Sra { rd, rs1, rs2 },
            _ => return None,
        },
        opcode::MISC_MEM if f.funct3 == 0 => Fence {
            pred: bit_slice(f.w, 24, 28),
            succ: bit_slice(f.w, 20, 24),
        },
        opcode::SYSTEM if f.funct3 == 0 => match f.w {
            0x0000_0073 => Ecall,
            0x0010_0073 => Ebreak,
            _ => return None,
        },
        _ => return None,
    };
    Some(inst)
}

fn decode_shift_imm(xlen: Xlen, f: &Fields) -> Option<Instruction> {
    use Instruction::*;
    let (rd, rs1) = (f.rd, f.rs1);
    // RV64 widens the shift-amount field by one bit into funct7.
    let (high, shamt) = match xlen {
        Xlen::X32 => (bit_slice(f.w, 25, 32), bit_slice(f.w, 20, 25)),
        Xlen::X64 => (bit_slice(f.w, 26, 32), bit_slice(f.w, 20, 26)),
    };
    let arith = match (xlen, high) {
        (_, 0x00) => false,
        (Xlen::X32, 0x20) | (Xlen::X64, 0x10) => true,
        _ => return None,
    };
    match (f.funct3, arith) {
        (1, false) => Some(Slli { rd, rs1, shamt6: shamt }),
        (5, false) => Some(Srli { rd, rs1, shamt6: shamt }),
        (5, true) => Some(Srai { rd, rs1, shamt6: shamt }),
        _ => None,
    }
}

fn decode_i64(f: &Fields) -> Option<Instruction> {
    use Instruction::*;
    let (rd, rs1, rs2) = (f.rd, f.rs1, f.rs2);
    let inst = match (f.opcode, f.funct3) {
        (opcode::LOAD, 3) => Ld { rd, rs1, oimm12: f.imm_i() },
        (opcode::LOAD, 6) => Lwu { rd, rs1, oimm12: f.imm_i() },
        (opcode::STORE, 3) => Sd { rs1, rs2, simm12: f.imm_s() },
        (opcode::OP_IMM_32, 0) => Addiw { rd, rs1, imm12: f.imm_i() },
        (opcode::OP_IMM_32, 1) if f.funct7 == 0x00 => {
            Slliw { rd, rs1, shamt5: bit_slice(f.w, 20, 25) }
        }
        (opcode::OP_IMM_32, 5) if f.funct7 == 0x00 => {
            Srliw { rd, rs1, shamt5: bit_slice(f.w, 20, 25) }
        }
        (opcode::OP_IMM_32, 5) if f.funct7 == 0x20 => {
            Sraiw { rd, rs1, shamt5: bit_slice(f.w, 20, 25) }
        }
        (opcode::OP_32, 0) if f.funct7 == 0x00 => Addw { rd, rs1, rs2 },
        (opcode::OP_32, 0) if f.funct7 == 0x20 => Subw { rd, rs1, rs2 },
        (opcode::OP_32, 1) if f.funct7 == 0x00 => Sllw { rd, rs1, rs2 },
        (opcode::OP_32, 5) if f.funct7 == 0x00 => Srlw { rd, rs1, rs2 },
        (opcode::OP_32, 5) if f.funct7 == 0x20 => Sraw { rd, rs1, rs2 },
        _ => return None,
    };
    Some(inst)
}

fn decode_m(f: &Fields) -> Option<Instruction> {
    use Instruction::*;
    if f.opcode != opcode::OP || f.funct7 != 0x01 {
        return None;
    }
    let (rd, rs1, rs2) = (f.rd, f.rs1, f.rs2);
    let inst = match f.funct3 {
        0 => Mul { rd, rs1, rs2 },
        1 => Mulh { rd, rs1, rs2 },
        2 => Mulhsu { rd, rs1, rs2 },
        3 => Mulhu { rd, rs1, rs2 },
        4 => Div { rd, rs1, rs2 },
        5 => Divu { rd, rs1, rs2 },
        6 => Rem { rd, rs1, rs2 },
        7 => Remu { rd, rs1, rs2 },
        _ => unreachable!(),
    };
    Some(inst)
}

fn decode_m64(f: &Fields) -> Option<Instruction> {
    use Instruction::*;
    if f.opcode != opcode::OP_32 || f.funct7 != 0x01 {
        return None;
    }
    let (rd, rs1, rs2) = (f.rd, f.rs1, f.rs2);
    let inst = match f.funct3 {
        0 => Mulw { rd, rs1, rs2 },
        4 => Divw { rd, rs1, rs2 },
        5 => Divuw { rd, rs1, rs2 },
        6 => Remw { rd, rs1, rs2 },
        7 => Remuw { rd, rs1, rs2 },
        _ => return None,
    };
    Some(inst)
}

fn decode_csr(f: &Fields) -> Option<Instruction> {
    use Instruction::*;
    if f.opcode != opcode::SYSTEM {
        return None;
    }
    let (rd, rs1) = (f.rd, f.rs1);
    let csr12 = bit_slice(f.w, 20, 32);
    let zimm = bit_slice(f.w, 15, 20);
    let inst = match f.funct3 {
        1 => Csrrw { rd, rs1, csr12 },
        2 => Csrrs { rd, rs1, csr12 },
        3 => Csrrc { rd, rs1, csr12 },
        5 => Csrrwi { rd, zimm, csr12 },
        6 => Csrrsi { rd, zimm, csr12 },
        7 => Csrrci { rd, zimm, csr12 },
        _ => return None,
    };
    Some(inst)
}

fn decode_machine(f: &Fields) -> Option<Instruction> {
    if f.w == 0x3020_0073 {
        Some(Instruction::Mret)
    } else {
        None
    }
}
