//! Instruction semantics against the abstract machine.
//!
//! `execute` gives the meaning of one decoded instruction purely in terms
//! of `MachineInterface` primitives; `run1` adds fetch, decode and the
//! default pc advance; `run` loops until halt, step budget or failure.
//! None of this knows which backend it is driving.

use crate::csr::{addr, mstatus, CSRField};
use crate::decode::Decoder;
use crate::inst::{Instruction, Register};
use crate::machine::{
    HaltSource, HardFailure, MachineInterface, PrimResult, PrivMode, SourceType, StepAbort,
    StepOutcome,
};
use crate::trap::{CauseCode, ExceptionCause};
use crate::xword::{MachineInt, XWord};

/// Enters the trap handler: saves pc and cause state, stashes the
/// interrupt-enable stack, switches to machine mode, jumps to the vector
/// base and ends the cycle. Always returns `Err`.
pub fn raise_exception<M: MachineInterface>(m: &mut M, cause: ExceptionCause) -> PrimResult<()> {
    let xlen = m.xlen();
    let pc = m.get_pc();
    m.set_csr_field(CSRField::MEPC, pc.bits() as MachineInt)?;
    m.set_csr_field(CSRField::MCauseCode, cause.code.code())?;
    m.set_csr_field(CSRField::MCauseInterrupt, 0)?;
    m.set_csr_field(CSRField::MTVal, cause.info)?;
    let mode = m.get_priv_mode();
    m.set_csr_field(CSRField::MStatusMPP, mode.code())?;
    let mie = m.get_csr_field(CSRField::MStatusMIE)?;
    m.set_csr_field(CSRField::MStatusMPIE, mie)?;
    m.set_csr_field(CSRField::MStatusMIE, 0)?;
    m.set_priv_mode(PrivMode::Machine);
    let base = m.get_csr_field(CSRField::MTVecBase)?;
    m.set_pc(XWord::new(xlen, (base as u64) << 2));
    Err(m.end_cycle_early())
}

fn binop<M: MachineInterface>(
    m: &mut M,
    rd: Register,
    rs1: Register,
    rs2: Register,
    f: fn(XWord, XWord) -> XWord,
) -> PrimResult<()> {
    let a = m.get_register(rs1);
    let b = m.get_register(rs2);
    m.set_register(rd, f(a, b));
    Ok(())
}

fn binop_imm<M: MachineInterface>(
    m: &mut M,
    rd: Register,
    rs1: Register,
    imm: MachineInt,
    f: fn(XWord, XWord) -> XWord,
) -> PrimResult<()> {
    let a = m.get_register(rs1);
    let b = XWord::from_imm(m.xlen(), imm);
    m.set_register(rd, f(a, b));
    Ok(())
}

fn branch<M: MachineInterface>(
    m: &mut M,
    rs1: Register,
    rs2: Register,
    off: MachineInt,
    taken: fn(XWord, XWord) -> bool,
) -> PrimResult<()> {
    let a = m.get_register(rs1);
    let b = m.get_register(rs2);
    if taken(a, b) {
        let target = m.get_pc().add_imm(off);
        if !target.is_aligned(4) {
            return raise_exception(m, ExceptionCause::misaligned_fetch(target.signed()));
        }
        m.set_pc(target);
    }
    Ok(())
}

fn data_addr<M: MachineInterface>(
    m: &mut M,
    rs1: Register,
    imm: MachineInt,
    align: u64,
    store: bool,
) -> PrimResult<XWord> {
    let addr = m.get_register(rs1).add_imm(imm);
    if !addr.is_aligned(align) {
        let cause = if store {
            ExceptionCause::misaligned_store(addr.signed())
        } else {
            ExceptionCause::misaligned_load(addr.signed())
        };
        raise_exception(m, cause)?;
        unreachable!("raise_exception always aborts the step");
    }
    Ok(addr)
}

/// Reassembles an architectural CSR value from its fields. `None` means
/// the address is not implemented.
fn csr_read<M: MachineInterface>(m: &mut M, csr12: MachineInt) -> PrimResult<Option<XWord>> {
    let xlen = m.xlen();
    let v = match csr12 {
        addr::MSTATUS => {
            let mpp = m.get_csr_field(CSRField::MStatusMPP)? as u64;
            let mpie = m.get_csr_field(CSRField::MStatusMPIE)? as u64;
            let mie = m.get_csr_field(CSRField::MStatusMIE)? as u64;
            XWord::new(
                xlen,
                mpp << mstatus::MPP_SHIFT | mpie << mstatus::MPIE_SHIFT | mie << mstatus::MIE_SHIFT,
            )
        }
        addr::MTVEC => XWord::new(xlen, (m.get_csr_field(CSRField::MTVecBase)? as u64) << 2),
        addr::MSCRATCH => XWord::new(xlen, m.get_csr_field(CSRField::MScratch)? as u64),
        addr::MEPC => XWord::new(xlen, m.get_csr_field(CSRField::MEPC)? as u64),
        addr::MCAUSE => {
            let code = m.get_csr_field(CSRField::MCauseCode)? as u64;
            let int = m.get_csr_field(CSRField::MCauseInterrupt)? as u64;
            XWord::new(xlen, int << (xlen.bits() - 1) | code)
        }
        addr::MTVAL => XWord::new(xlen, m.get_csr_field(CSRField::MTVal)? as u64),
        _ => return Ok(None),
    };
    Ok(Some(v))
}

/// Scatters an architectural CSR value back into fields. `false` means the
/// address is not implemented.
fn csr_write<M: MachineInterface>(
    m: &mut M,
    csr12: MachineInt,
    value: XWord,
) -> PrimResult<bool> {
    let v = value.bits();
    match csr12 {
        addr::MSTATUS => {
            m.set_csr_field(CSRField::MStatusMPP, (v >> mstatus::MPP_SHIFT) as MachineInt & 3)?;
            m.set_csr_field(CSRField::MStatusMPIE, (v >> mstatus::MPIE_SHIFT) as MachineInt & 1)?;
            m.set_csr_field(CSRField::MStatusMIE, (v >> mstatus::MIE_SHIFT) as MachineInt & 1)?;
        }
        addr::MTVEC => m.set_csr_field(CSRField::MTVecBase, (v >> 2) as MachineInt)?,
        addr::MSCRATCH => m.set_csr_field(CSRField::MScratch, v as MachineInt)?,
        addr::MEPC => m.set_csr_field(CSRField::MEPC, v as MachineInt)?,
        addr::MCAUSE => {
            let int = (v >> (value.xlen().bits() - 1)) & 1;
            m.set_csr_field(CSRField::MCauseInterrupt, int as MachineInt)?;
            m.set_csr_field(CSRField::MCauseCode, v as MachineInt)?;
        }
        addr::MTVAL => m.set_csr_field(CSRField::MTVal, v as MachineInt)?,
        _ => return Ok(false),
    }
    Ok(true)
}

enum CsrOp {
    Write,
    Set,
    Clear,
}

fn exec_csr<M: MachineInterface>(
    m: &mut M,
    inst: &Instruction,
    rd: Register,
    csr12: MachineInt,
    src: XWord,
    op: CsrOp,
    write: bool,
) -> PrimResult<()> {
    let old = match csr_read(m, csr12)? {
        Some(v) => v,
        None => return illegal(m, inst),
    };
    if write {
        let new = match op {
            CsrOp::Write => src,
            CsrOp::Set => old.or(src),
            CsrOp::Clear => old.and(src.not()),
        };
        if !csr_write(m, csr12, new)? {
            return illegal(m, inst);
        }
    }
    m.set_register(rd, old);
    Ok(())
}

fn illegal<M: MachineInterface>(m: &mut M, inst: &Instruction) -> PrimResult<()> {
    let raw = crate::encode::encode(inst).unwrap_or(0);
    raise_exception(m, ExceptionCause::illegal(raw))
}

/// Executes one decoded instruction. The pc still points at the
/// instruction itself; control-flow instructions set it explicitly and
/// everything else leaves it for the caller to advance.
pub fn execute<M: MachineInterface>(m: &mut M, inst: &Instruction) -> PrimResult<()> {
    use Instruction::*;
    use SourceType::Execute;
    let xlen = m.xlen();
    match *inst {
        Lui { rd, imm20 } => {
            m.set_register(rd, XWord::from_imm(xlen, imm20));
            Ok(())
        }
        Auipc { rd, oimm20 } => {
            let pc = m.get_pc();
            m.set_register(rd, pc.add_imm(oimm20));
            Ok(())
        }
        Jal { rd, jimm20 } => {
            let pc = m.get_pc();
            let target = pc.add_imm(jimm20);
            if !target.is_aligned(4) {
                return raise_exception(m, ExceptionCause::misaligned_fetch(target.signed()));
            }
            m.set_register(rd, pc.add_imm(4));
            m.set_pc(target);
            Ok(())
        }
        Jalr { rd, rs1, oimm12 } => {
            let base = m.get_register(rs1);
            let pc = m.get_pc();
            let target = base.add_imm(oimm12).and(XWord::from_imm(xlen, -2));
            if !target.is_aligned(4) {
                return raise_exception(m, ExceptionCause::misaligned_fetch(target.signed()));
            }
            m.set_register(rd, pc.add_imm(4));
            m.set_pc(target);
            Ok(())
        }
        Beq { rs1, rs2, sbimm12 } => branch(m, rs1, rs2, sbimm12, |a, b| a == b),
        Bne { rs1, rs2, sbimm12 } => branch(m, rs1, rs2, sbimm12, |a, b| a != b),
        Blt { rs1, rs2, sbimm12 } => branch(m, rs1, rs2, sbimm12, XWord::lt_signed),
        Bge { rs1, rs2, sbimm12 } => branch(m, rs1, rs2, sbimm12, |a, b| !a.lt_signed(b)),
        Bltu { rs1, rs2, sbimm12 } => branch(m, rs1, rs2, sbimm12, XWord::lt_unsigned),
        Bgeu { rs1, rs2, sbimm12 } => branch(m, rs1, rs2, sbimm12, |a, b| !a.lt_unsigned(b)),

        Lb { rd, rs1, oimm12 } => {
            let a = data_addr(m, rs1, oimm12, 1, false)?;
            let v = m.load_byte(Execute, a)?;
            m.set_register(rd, XWord::from_imm(xlen, v as i8 as MachineInt));
            Ok(())
        }
        Lh { rd, rs1, oimm12 } => {
            let a = data_addr(m, rs1, oimm12, 2, false)?;
            let v = m.load_half(Execute, a)?;
            m.set_register(rd, XWord::from_imm(xlen, v as i16 as MachineInt));
            Ok(())
        }
        Lw { rd, rs1, oimm12 } => {
            let a = data_addr(m, rs1, oimm12, 4, false)?;
            let v = m.load_word(Execute, a)?;
            m.set_register(rd, XWord::from_imm(xlen, v as i32 as MachineInt));
            Ok(())
        }
        Lbu { rd, rs1, oimm12 } => {
            let a = data_addr(m, rs1, oimm12, 1, false)?;
            let v = m.load_byte(Execute, a)?;
            m.set_register(rd, XWord::new(xlen, v as u64));
            Ok(())
        }
        Lhu { rd, rs1, oimm12 } => {
            let a = data_addr(m, rs1, oimm12, 2, false)?;
            let v = m.load_half(Execute, a)?;
            m.set_register(rd, XWord::new(xlen, v as u64));
            Ok(())
        }
        Lwu { rd, rs1, oimm12 } => {
            let a = data_addr(m, rs1, oimm12, 4, false)?;
            let v = m.load_word(Execute, a)?;
            m.set_register(rd, XWord::new(xlen, v as u64));
            Ok(())
        }
        Ld { rd, rs1, oimm12 } => {
            let a = data_addr(m, rs1, oimm12, 8, false)?;
            let v = m.load_double(Execute, a)?;
            m.set_register(rd, XWord::new(xlen, v));
            Ok(())
        }
        Sb { rs1, rs2, simm12 } => {
            let a = data_addr(m, rs1, simm12, 1, true)?;
            let v = m.get_register(rs2);
            m.store_byte(Execute, a, v.bits() as u8)
        }
        Sh { rs1, rs2, simm12 } => {
            let a = data_addr(m, rs1, simm12, 2, true)?;
            let v = m.get_register(rs2);
            m.store_half(Execute, a, v.bits() as u16)
        }
        Sw { rs1, rs2, simm12 } => {
            let a = data_addr(m, rs1, simm12, 4, true)?;
            let v = m.get_register(rs2);
            m.store_word(Execute, a, v.bits() as u32)
        }
        Sd { rs1, rs2, simm12 } => {
            let a = data_addr(m, rs1, simm12, 8, true)?;
            let v = m.get_register(rs2);
            m.store_double(Execute, a, v.bits())
        }

        Addi { rd, rs1, imm12 } => binop_imm(m, rd, rs1, imm12, XWord::add),
        Slti { rd, rs1, imm12 } => binop_imm(m, rd, rs1, imm12, XWord::slt),
        Sltiu { rd, rs1, imm12 } => binop_imm(m, rd, rs1, imm12, XWord::sltu),
        Xori { rd, rs1, imm12 } => binop_imm(m, rd, rs1, imm12, XWord::xor),
        Ori { rd, rs1, imm12 } => binop_imm(m, rd, rs1, imm12, XWord::or),
        Andi { rd, rs1, imm12 } => binop_imm(m, rd, rs1, imm12, XWord::and),
        Slli { rd, rs1, shamt6 } => binop_imm(m, rd, rs1, shamt6, XWord::sll),
        Srli { rd, rs1, shamt6 } => binop_imm(m, rd, rs1, shamt6, XWord::srl),
        Srai { rd, rs1, shamt6 } => binop_imm(m, rd, rs1, shamt6, XWord::sra),
        Add { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::add),
        Sub { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::sub),
        Sll { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::sll),
        Slt { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::slt),
        Sltu { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::sltu),
        Xor { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::xor),
        Srl { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::srl),
        Sra { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::sra),
        Or { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::or),
        And { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::and),

        Addiw { rd, rs1, imm12 } => binop_imm(m, rd, rs1, imm12, XWord::addw),
        Slliw { rd, rs1, shamt5 } => binop_imm(m, rd, rs1, shamt5, XWord::sllw),
        Srliw { rd, rs1, shamt5 } => binop_imm(m, rd, rs1, shamt5, XWord::srlw),
        Sraiw { rd, rs1, shamt5 } => binop_imm(m, rd, rs1, shamt5, XWord::sraw),
        Addw { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::addw),
        Subw { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::subw),
        Sllw { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::sllw),
        Srlw { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::srlw),
        Sraw { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::sraw),

        Mul { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::mul),
        Mulh { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::mulh),
        Mulhsu { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::mulhsu),
        Mulhu { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::mulhu),
        Div { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::div),
        Divu { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::divu),
        Rem { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::rem),
        Remu { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::remu),
        Mulw { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::mulw),
        Divw { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::divw),
        Divuw { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::divuw),
        Remw { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::remw),
        Remuw { rd, rs1, rs2 } => binop(m, rd, rs1, rs2, XWord::remuw),

        Fence { pred, succ } => {
            m.fence(pred, succ);
            Ok(())
        }
        Ecall => raise_exception(m, ExceptionCause::new(CauseCode::EcallFromM, 0)),
        Ebreak => raise_exception(m, ExceptionCause::new(CauseCode::Breakpoint, 0)),

        Csrrw { rd, rs1, csr12 } => {
            let src = m.get_register(rs1);
            exec_csr(m, inst, rd, csr12, src, CsrOp::Write, true)
        }
        Csrrs { rd, rs1, csr12 } => {
            let src = m.get_register(rs1);
            exec_csr(m, inst, rd, csr12, src, CsrOp::Set, !rs1.is_zero())
        }
        Csrrc { rd, rs1, csr12 } => {
            let src = m.get_register(rs1);
            exec_csr(m, inst, rd, csr12, src, CsrOp::Clear, !rs1.is_zero())
        }
        Csrrwi { rd, zimm, csr12 } => {
            let src = XWord::new(xlen, zimm as u64);
            exec_csr(m, inst, rd, csr12, src, CsrOp::Write, true)
        }
        Csrrsi { rd, zimm, csr12 } => {
            let src = XWord::new(xlen, zimm as u64);
            exec_csr(m, inst, rd, csr12, src, CsrOp::Set, zimm != 0)
        }
        Csrrci { rd, zimm, csr12 } => {
            let src = XWord::new(xlen, zimm as u64);
            exec_csr(m, inst, rd, csr12, src, CsrOp::Clear, zimm != 0)
        }

        Mret => {
            let mepc = m.get_csr_field(CSRField::MEPC)?;
            m.set_pc(XWord::new(xlen, mepc as u64));
            let mpp = m.get_csr_field(CSRField::MStatusMPP)?;
            m.set_priv_mode(PrivMode::from_code(mpp));
            let mpie = m.get_csr_field(CSRField::MStatusMPIE)?;
            m.set_csr_field(CSRField::MStatusMIE, mpie)?;
            m.set_csr_field(CSRField::MStatusMPIE, 1)?;
            m.set_csr_field(CSRField::MStatusMPP, PrivMode::User.code())?;
            Ok(())
        }

        InvalidInstruction { raw } => raise_exception(m, ExceptionCause::illegal(raw)),
    }
}

/// Wrapper that notices whether the wrapped instruction performed its own
/// control flow, so the step function knows when to apply the default
/// pc advance. A jump back to the same pc counts as control flow.
struct PcTracker<'a, M> {
    inner: &'a mut M,
    pc_set: bool,
}

impl<M: MachineInterface> MachineInterface for PcTracker<'_, M> {
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
        self.pc_set = true;
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

    fn get_platform(&self) -> &crate::machine::PlatformConfig {
        self.inner.get_platform()
    }
}

fn step<M: MachineInterface>(m: &mut M, dec: &Decoder) -> PrimResult<()> {
    let pc = m.get_pc();
    if !pc.is_aligned(4) {
        return raise_exception(m, ExceptionCause::misaligned_fetch(pc.signed()));
    }
    let word = m.load_word(SourceType::Fetch, pc)?;
    let inst = dec.decode(word as MachineInt);
    let mut tracked = PcTracker { inner: m, pc_set: false };
    execute(&mut tracked, &inst)?;
    let jumped = tracked.pc_set;
    if !jumped {
        m.set_pc(pc.add_imm(4));
    }
    m.commit();
    Ok(())
}

/// Fetches, decodes and executes one instruction at the current pc,
/// advancing past it unless the instruction transferred control itself.
pub fn run1<M: MachineInterface>(m: &mut M, dec: &Decoder) -> StepOutcome {
    step(m, dec).into()
}

/// Why `run` stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunResult {
    /// The platform reported a halt (a tohost write), with its code.
    Halted { code: MachineInt, steps: u64 },
    /// The step budget ran out.
    OutOfSteps { steps: u64 },
    /// A primitive failed; the machine state is left as it was.
    Failed { failure: HardFailure, steps: u64 },
}

/// Steps the machine until it halts, fails or exhausts `max_steps`.
pub fn run<M: MachineInterface + HaltSource>(
    m: &mut M,
    dec: &Decoder,
    max_steps: u64,
) -> RunResult {
    let mut steps = 0;
    while steps < max_steps {
        match run1(m, dec) {
            StepOutcome::Completed | StepOutcome::EarlyExit => {}
            StepOutcome::HardFailure(f) => {
                return RunResult::Failed { failure: f, steps: steps + 1 }
            }
        }
        steps += 1;
        if let Some(code) = m.take_halt() {
            return RunResult::Halted { code, steps };
        }
    }
    RunResult::OutOfSteps { steps }
}

/// All 32 register values, for dumps and differential comparison.
pub fn read_registers<M: MachineInterface>(m: &mut M) -> Vec<XWord> {
    Register::all().map(|r| m.get_register(r)).collect()
}
