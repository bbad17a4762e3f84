//! Instruction encoding, the inverse of decoding.
//!
//! Used to assemble test programs, trap handlers and litmus threads without
//! an external toolchain. Encoding validates field ranges up front so a bad
//! immediate is an error at assembly time instead of a mystery word later.

use std::fmt;

use crate::inst::{Instruction, Register};
use crate::xword::MachineInt;

/// An unencodable field: out-of-range immediate, misaligned offset, or an
/// instruction that has no encoding at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodeError {
    pub field: &'static str,
    pub value: MachineInt,
    pub reason: &'static str,
}

impl fmt::Display for EncodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot encode {} = {}: {}", self.field, self.value, self.reason)
    }
}

impl std::error::Error for EncodeError {}

type Result<T> = std::result::Result<T, EncodeError>;

fn signed_range(field: &'static str, value: MachineInt, bits: u32) -> Result<MachineInt> {
    let min = -(1 << (bits - 1));
    let max = (1 << (bits - 1)) - 1;
    if value < min || value > max {
        Err(EncodeError { field, value, reason: "out of range" })
    } else {
        Ok(value)
    }
}

fn unsigned_range(field: &'static str, value: MachineInt, bits: u32) -> Result<MachineInt> {
    if value < 0 || value >= (1 << bits) {
        Err(EncodeError { field, value, reason: "out of range" })
    } else {
        Ok(value)
    }
}

fn even(field: &'static str, value: MachineInt) -> Result<MachineInt> {
    if value & 1 != 0 {
        Err(EncodeError { field, value, reason: "offset must be even" })
    } else {
        Ok(value)
    }
}

fn bits(value: MachineInt, lo: u32, hi: u32) -> MachineInt {
    (value >> lo) & ((1 << (hi - lo)) - 1)
}

fn rd(r: Register) -> MachineInt {
    (r.index() as MachineInt) << 7
}

fn rs1(r: Register) -> MachineInt {
    (r.index() as MachineInt) << 15
}

fn rs2(r: Register) -> MachineInt {
    (r.index() as MachineInt) << 20
}

fn f3(v: MachineInt) -> MachineInt {
    v << 12
}

fn f7(v: MachineInt) -> MachineInt {
    v << 25
}

fn r_type(funct7: MachineInt, r2: Register, r1: Register, funct3: MachineInt, d: Register, op: MachineInt) -> MachineInt {
    f7(funct7) | rs2(r2) | rs1(r1) | f3(funct3) | rd(d) | op
}

fn i_type(field: &'static str, imm: MachineInt, r1: Register, funct3: MachineInt, d: Register, op: MachineInt) -> Result<MachineInt> {
    let imm = signed_range(field, imm, 12)?;
    Ok((imm & 0xfff) << 20 | rs1(r1) | f3(funct3) | rd(d) | op)
}

fn s_type(imm: MachineInt, r1: Register, r2: Register, funct3: MachineInt, op: MachineInt) -> Result<MachineInt> {
    let imm = signed_range("simm12", imm, 12)?;
    Ok(bits(imm, 5, 12) << 25 | rs2(r2) | rs1(r1) | f3(funct3) | bits(imm, 0, 5) << 7 | op)
}

fn b_type(imm: MachineInt, r1: Register, r2: Register, funct3: MachineInt) -> Result<MachineInt> {
    let imm = even("sbimm12", signed_range("sbimm12", imm, 13)?)?;
    Ok(bits(imm, 12, 13) << 31
        | bits(imm, 5, 11) << 25
        | rs2(r2)
        | rs1(r1)
        | f3(funct3)
        | bits(imm, 1, 5) << 8
        | bits(imm, 11, 12) << 7
        | 0x63)
}

fn u_type(field: &'static str, imm: MachineInt, d: Register, op: MachineInt) -> Result<MachineInt> {
    if imm & 0xfff != 0 {
        return Err(EncodeError { field, value: imm, reason: "low twelve bits must be zero" });
    }
    if imm != (imm as i32) as MachineInt {
        return Err(EncodeError { field, value: imm, reason: "out of range" });
    }
    Ok(bits(imm, 12, 32) << 12 | rd(d) | op)
}

fn j_type(imm: MachineInt, d: Register) -> Result<MachineInt> {
    let imm = even("jimm20", signed_range("jimm20", imm, 21)?)?;
    Ok(bits(imm, 20, 21) << 31
        | bits(imm, 1, 11) << 21
        | bits(imm, 11, 12) << 20
        | bits(imm, 12, 20) << 12
        | rd(d)
        | 0x6f)
}

#[allow(clippy::too_many_arguments)]
fn shift_imm(
    high: MachineInt,
    field: &'static str,
    shamt: MachineInt,
    width: u32,
    r1: Register,
    funct3: MachineInt,
    d: Register,
    op: MachineInt,
) -> Result<MachineInt> {
    let shamt = unsigned_range(field, shamt, width)?;
    Ok(f7(high) | shamt << 20 | rs1(r1) | f3(funct3) | rd(d) | op)
}

fn csr_type(
    csr: MachineInt,
    src: MachineInt,
    funct3: MachineInt,
    d: Register,
) -> Result<MachineInt> {
    let csr = unsigned_range("csr12", csr, 12)?;
    Ok(csr << 20 | src << 15 | f3(funct3) | rd(d) | 0x73)
}

/// Encodes a decoded instruction back into its 32-bit word.
pub fn encode(inst: &Instruction) -> Result<MachineInt> {
    use Instruction::*;
    match *inst {
        Lui { rd, imm20 } => u_type("imm20", imm20, rd, 0x37),
        Auipc { rd, oimm20 } => u_type("oimm20", oimm20, rd, 0x17),
        Jal { rd, jimm20 } => j_type(jimm20, rd),
        Jalr { rd, rs1, oimm12 } => i_type("oimm12", oimm12, rs1, 0, rd, 0x67),
        Beq { rs1, rs2, sbimm12 } => b_type(sbimm12, rs1, rs2, 0),
        Bne { rs1, rs2, sbimm12 } => b_type(sbimm12, rs1, rs2, 1),
        Blt { rs1, rs2, sbimm12 } => b_type(sbimm12, rs1, rs2, 4),
        Bge { rs1, rs2, sbimm12 } => b_type(sbimm12, rs1, rs2, 5),
        Bltu { rs1, rs2, sbimm12 } => b_type(sbimm12, rs1, rs2, 6),
        Bgeu { rs1, rs2, sbimm12 } => b_type(sbimm12, rs1, rs2, 7),
        Lb { rd, rs1, oimm12 } => i_type("oimm12", oimm12, rs1, 0, rd, 0x03),
        Lh { rd, rs1, oimm12 } => i_type("oimm12", oimm12, rs1, 1, rd, 0x03),
        Lw { rd, rs1, oimm12 } => i_type("oimm12", oimm12, rs1, 2, rd, 0x03),
        Lbu { rd, rs1, oimm12 } => i_type("oimm12", oimm12, rs1, 4, rd, 0x03),
        Lhu { rd, rs1, oimm12 } => i_type("oimm12", oimm12, rs1, 5, rd, 0x03),
        Lwu { rd, rs1, oimm12 } => i_type("oimm12", oimm12, rs1, 6, rd, 0x03),
        Ld { rd, rs1, oimm12 } => i_type("oimm12", oimm12, rs1, 3, rd, 0x03),
        Sb { rs1, rs2, simm12 } => s_type(simm12, rs1, rs2, 0, 0x23),
        Sh { rs1, rs2, simm12 } => s_type(simm12, rs1, rs2, 1, 0x23),
        Sw { rs1, rs2, simm12 } => s_type(simm12, rs1, rs2, 2, 0x23),
        Sd { rs1, rs2, simm12 } => s_type(simm12, rs1, rs2, 3, 0x23),
        Addi { rd, rs1, imm12 } => i_type("imm12", imm12, rs1, 0, rd, 0x13),
        Slti { rd, rs1, imm12 } => i_type("imm12", imm12, rs1, 2, rd, 0x13),
        Sltiu { rd, rs1, imm12 } => i_type("imm12", imm12, rs1, 3, rd, 0x13),
        Xori { rd, rs1, imm12 } => i_type("imm12", imm12, rs1, 4, rd, 0x13),
        Ori { rd, rs1, imm12 } => i_type("imm12", imm12, rs1, 6, rd, 0x13),
        Andi { rd, rs1, imm12 } => i_type("imm12", imm12, rs1, 7, rd, 0x13),
        Slli { rd, rs1, shamt6 } => shift_imm(0x00, "shamt6", shamt6, 6, rs1, 1, rd, 0x13),
        Srli { rd, rs1, shamt6 } => shift_imm(0x00, "shamt6", shamt6, 6, rs1, 5, rd, 0x13),
        Srai { rd, rs1, shamt6 } => {
            let w = shift_imm(0x00, "shamt6", shamt6, 6, rs1, 5, rd, 0x13)?;
            Ok(w | 1 << 30)
        }
        Addiw { rd, rs1, imm12 } => i_type("imm12", imm12, rs1, 0, rd, 0x1b),
        Slliw { rd, rs1, shamt5 } => shift_imm(0x00, "shamt5", shamt5, 5, rs1, 1, rd, 0x1b),
        Srliw { rd, rs1, shamt5 } => shift_imm(0x00, "shamt5", shamt5, 5, rs1, 5, rd, 0x1b),
        Sraiw { rd, rs1, shamt5 } => shift_imm(0x20, "shamt5", shamt5, 5, rs1, 5, rd, 0x1b),
        Add { rd, rs1, rs2 } => Ok(r_type(0x00, rs2, rs1, 0, rd, 0x33)),
        Sub { rd, rs1, rs2 } => Ok(r_type(0x20, rs2, rs1, 0, rd, 0x33)),
        Sll { rd, rs1, rs2 } => Ok(r_type(0x00, rs2, rs1, 1, rd, 0x33)),
        Slt { rd, rs1, rs2 } => Ok(r_type(0x00, rs2, rs1, 2, rd, 0x33)),
        Sltu { rd, rs1, rs2 } => Ok(r_type(0x00, rs2, rs1, 3, rd, 0x33)),
        Xor { rd, rs1, rs2 } => Ok(r_type(0x00, rs2, rs1, 4, rd, 0x33)),
        Srl { rd, rs1, rs2 } => Ok(r_type(0x00, rs2, rs1, 5, rd, 0x33)),
        Sra { rd, rs1, rs2 } => Ok(r_type(0x20, rs2, rs1, 5, rd, 0x33)),
        Or { rd, rs1, rs2 } => Ok(r_type(0x00, rs2, rs1, 6, rd, 0x33)),
        And { rd, rs1, rs2 } => Ok(r_type(0x00, rs2, rs1, 7, rd, 0x33)),
        Addw { rd, rs1, rs2 } => Ok(r_type(0x00, rs2, rs1, 0, rd, 0x3b)),
        Subw { rd, rs1, rs2 } => Ok(r_type(0x20, rs2, rs1, 0, rd, 0x3b)),
        Sllw { rd, rs1, rs2 } => Ok(r_type(0x00, rs2, rs1, 1, rd, 0x3b)),
        Srlw { rd, rs1, rs2 } => Ok(r_type(0x00, rs2, rs1, 5, rd, 0x3b)),
        Sraw { rd, rs1, rs2 } => Ok(r_type(0x20, rs2, rs1, 5, rd, 0x3b)),
        Mul { rd, rs1, rs2 } => Ok(r_type(0x01, rs2, rs1, 0, rd, 0x33)),
        Mulh { rd, rs1, rs2 } => Ok(r_type(0x01, rs2, rs1, 1, rd, 0x33)),
        Mulhsu { rd, rs1, rs2 } => Ok(r_type(0x01, rs2, rs1, 2, rd, 0x33)),
        Mulhu { rd, rs1, rs2 } => Ok(r_type(0x01, rs2, rs1, 3, rd, 0x33)),
        Div { rd, rs1, rs2 } => Ok(r_type(0x01, rs2, rs1, 4, rd, 0x33)),
        Divu { rd, rs1, rs2 } => Ok(r_type(0x01, rs2, rs1, 5, rd, 0x33)),
        Rem { rd, rs1, rs2 } => Ok(r_type(0x01, rs2, rs1, 6, rd, 0x33)),
        Remu { rd, rs1, rs2 } => Ok(r_type(0x01, rs2, rs1, 7, rd, 0x33)),
        Mulw { rd, rs1, rs2 } => Ok(r_type(0x01, rs2, rs1, 0, rd, 0x3b)),
        Divw { rd, rs1, rs2 } => Ok(r_type(0x01, rs2, rs1, 4, rd, 0x3b)),
        Divuw { rd, rs1, rs2 } => Ok(r_type(0x01, rs2, rs1, 5, rd, 0x3b)),
        Remw { rd, rs1, rs2 } => Ok(r_type(0x01, rs2, rs1, 6, rd, 0x3b)),
        Remuw { rd, rs1, rs2 } => Ok(r_type(0x01, rs2, rs1, 7, rd, 0x3b)),
        Fence { pred, succ } => {
            let pred = unsigned_range("pred", pred, 4)?;
            let succ = unsigned_range("succ", succ, 4)?;
            Ok(pred << 24 | succ << 20 | 0x0f)
        }
        Ecall => Ok(0x0000_0073),
        Ebreak => Ok(0x0010_0073),
        Mret => Ok(0x3020_0073),
        Csrrw { rd, rs1, csr12 } => csr_type(csr12, rs1.index() as MachineInt, 1, rd),
        Csrrs { rd, rs1, csr12 } => csr_type(csr12, rs1.index() as MachineInt, 2, rd),
        Csrrc { rd, rs1, csr12 } => csr_type(csr12, rs1.index() as MachineInt, 3, rd),
        Csrrwi { rd, zimm, csr12 } => {
            csr_type(csr12, unsigned_range("zimm", zimm, 5)?, 5, rd)
        }
        Csrrsi { rd, zimm, csr12 } => {
            csr_type(csr12, unsigned_range("zimm", zimm, 5)?, 6, rd)
        }
        Csrrci { rd, zimm, csr12 } => {
            csr_type(csr12, unsigned_range("zimm", zimm, 5)?, 7, rd)
        }
        InvalidInstruction { raw } => Err(EncodeError {
            field: "instruction",
            value: raw,
            reason: "invalid instruction has no encoding",
        }),
    }
}

/// Encodes a sequence into little-endian bytes, the in-memory layout of a
/// program.
pub fn assemble(insts: &[Instruction]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(insts.len() * 4);
    for inst in insts {
        let w = encode(inst)? as u32;
        out.extend_from_slice(&w.to_le_bytes());
    }
    Ok(out)
}
