//! Multiplication in software: a machine-mode trap handler that emulates MUL
//! on an RV32I machine, plus a differential harness that locksteps such a
//! machine against one with hardware multiply.
//!
//! The harness runs two machines from states tied together by [`related`]:
//! the high machine H decodes RV32IM, the low machine L decodes RV32I only
//! and traps into the handler whenever it meets a MUL. After every H
//! instruction, L is advanced until its pc catches up (one instruction, or a
//! whole handler excursion) and the relation is re-checked.

use crate::csr::{addr, CSRField};
use crate::decode::{Decoder, ExtensionSet};
use crate::encode::assemble;
use crate::exec::run1;
use crate::inst::{Instruction, Register};
use crate::layers::EarlyExitLayer;
use crate::machine::{MachineInterface, PlatformConfig, StepOutcome};
use crate::platform::{MachineState, Segment};
use crate::xword::{MachineInt, Xlen, XWord};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Base of RAM on both machines.
pub const MEM_BASE: u64 = 0x8000_0000;
/// RAM size of the high machine; the program must fit here.
pub const HIGH_MEM_SIZE: u64 = 64 * 1024;
/// RAM size of the low machine; the extra 16 KiB hold handler and scratch.
pub const LOW_MEM_SIZE: u64 = 80 * 1024;

/// Scratch bytes the handler claims below the address held in MScratch:
/// one 32-bit slot per register.
pub const SCRATCH_BYTES: MachineInt = 128;

/// How many low-machine steps one high-machine instruction may expand to.
pub const SYNC_BUDGET: u64 = 10_000;

const XLEN: Xlen = Xlen::X32;

/// Where the handler code and its scratch stack live in low memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HandlerLayout {
    /// First handler instruction; becomes the trap vector.
    pub handler_base: u64,
    /// One past the last scratch byte; becomes the MScratch value.
    pub scratch_end: u64,
}

impl HandlerLayout {
    /// Handler right after high memory ends, scratch at the top of low
    /// memory.
    pub fn standard() -> HandlerLayout {
        HandlerLayout {
            handler_base: MEM_BASE + HIGH_MEM_SIZE,
            scratch_end: MEM_BASE + LOW_MEM_SIZE,
        }
    }

    pub fn scratch_base(&self) -> u64 {
        self.scratch_end - SCRATCH_BYTES as u64
    }
}

/// Known ways to get the handler wrong. Each reproduces a bug that the
/// differential suite has to catch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BugKind {
    /// Skip both MScratch resets, so the second trap sees a stale value.
    MscratchNotReset,
    /// Restore sp before the other registers instead of last.
    SpRestoreOrder,
    /// Save registers one slot too high, overrunning the scratch region.
    SaveOffset,
    /// Drop the stack pointer before taking the init-phase saves.
    SpEarlyAdd,
}

impl BugKind {
    pub fn all() -> [BugKind; 4] {
        [
            BugKind::MscratchNotReset,
            BugKind::SpRestoreOrder,
            BugKind::SaveOffset,
            BugKind::SpEarlyAdd,
        ]
    }

    pub fn label(self) -> &'static str {
        match self {
            BugKind::MscratchNotReset => "mscratch",
            BugKind::SpRestoreOrder => "sp-restore",
            BugKind::SaveOffset => "save-offset",
            BugKind::SpEarlyAdd => "sp-early-add",
        }
    }
}

impl std::str::FromStr for BugKind {
    type Err = String;

    fn from_str(s: &str) -> Result<BugKind, String> {
        BugKind::all()
            .into_iter()
            .find(|b| b.label() == s)
            .ok_or_else(|| format!("unknown bug `{s}`"))
    }
}

/// A pair setup or handler construction problem, as opposed to a verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetupError(pub String);

impl std::fmt::Display for SetupError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SetupError {}

/// Emits the trap handler as instructions, optionally with one injected bug.
///
/// Shape: swap sp with MScratch and save x0/ra/original-sp below the scratch
/// end, save x3..x31 into their slots, emulate the trapped MUL out of the
/// saved register file, bump MEPC past it, reset MScratch, restore every
/// register with sp last, and return with mret. Restoring sp from its slot
/// rather than from the swap means a MUL whose destination *is* sp still
/// lands its product.
pub fn build_handler(
    layout: &HandlerLayout,
    bug: Option<BugKind>,
) -> Result<Vec<Instruction>, SetupError> {
    use Instruction::*;

    let sp = Register::SP;
    let ra = Register::RA;
    let zero = Register::ZERO;
    let t0 = Register::new(5);
    let t1 = Register::new(6);
    let t2 = Register::new(7);
    let t3 = Register::new(28);
    let t4 = Register::new(29);

    let mut code = Vec::with_capacity(97);

    // Entry: sp <-> MScratch, leaving sp = scratch end. The first three
    // register slots are filled relative to the pre-drop sp.
    code.push(Csrrw { rd: sp, rs1: sp, csr12: addr::MSCRATCH });
    if bug == Some(BugKind::SpEarlyAdd) {
        code.push(Addi { rd: sp, rs1: sp, imm12: -SCRATCH_BYTES });
    }
    code.push(Sw { rs1: sp, rs2: zero, simm12: -128 });
    code.push(Sw { rs1: sp, rs2: ra, simm12: -124 });
    code.push(Csrrs { rd: ra, rs1: zero, csr12: addr::MSCRATCH });
    code.push(Sw { rs1: sp, rs2: ra, simm12: -120 });
    if bug != Some(BugKind::MscratchNotReset) {
        code.push(Csrrw { rd: zero, rs1: sp, csr12: addr::MSCRATCH });
    }
    if bug != Some(BugKind::SpEarlyAdd) {
        code.push(Addi { rd: sp, rs1: sp, imm12: -SCRATCH_BYTES });
    }

    // Save x3..x31 into slots 3..31.
    let save_shift = if bug == Some(BugKind::SaveOffset) { 4 } else { 0 };
    for i in 3..32u8 {
        code.push(Sw {
            rs1: sp,
            rs2: Register::new(i),
            simm12: 4 * i as MachineInt + save_shift,
        });
    }

    // The trapped instruction word sits in MTVal. Pull the operand values
    // and the destination slot address out of the saved register file:
    //   a = a_regs + (inst>>15 & 31)<<2
    //   b = a_regs + (inst>>20 & 31)<<2
    //   d = a_regs + (inst>>07 & 31)<<2
    code.push(Csrrs { rd: t0, rs1: zero, csr12: addr::MTVAL });
    for (reg, shift) in [(t1, 15), (t2, 20)] {
        code.push(Srli { rd: reg, rs1: t0, shamt6: shift });
        code.push(Andi { rd: reg, rs1: reg, imm12: 31 });
        code.push(Slli { rd: reg, rs1: reg, shamt6: 2 });
        code.push(Add { rd: reg, rs1: reg, rs2: sp });
        code.push(Lw { rd: reg, rs1: reg, oimm12: 0 });
    }
    code.push(Srli { rd: t3, rs1: t0, shamt6: 7 });
    code.push(Andi { rd: t3, rs1: t3, imm12: 31 });
    code.push(Slli { rd: t3, rs1: t3, shamt6: 2 });
    code.push(Add { rd: t3, rs1: t3, rs2: sp });

    // Russian peasant multiplication: t4 = t1 * t2 mod 2^32, then store
    // into the destination slot.
    code.push(Addi { rd: t4, rs1: zero, imm12: 0 });
    code.push(Beq { rs1: t2, rs2: zero, sbimm12: 28 });
    code.push(Andi { rd: t0, rs1: t2, imm12: 1 });
    code.push(Beq { rs1: t0, rs2: zero, sbimm12: 8 });
    code.push(Add { rd: t4, rs1: t4, rs2: t1 });
    code.push(Slli { rd: t1, rs1: t1, shamt6: 1 });
    code.push(Srli { rd: t2, rs1: t2, shamt6: 1 });
    code.push(Jal { rd: zero, jimm20: -24 });
    code.push(Sw { rs1: t3, rs2: t4, simm12: 0 });

    // Return one instruction past the MUL.
    code.push(Csrrs { rd: t0, rs1: zero, csr12: addr::MEPC });
    code.push(Addi { rd: t0, rs1: t0, imm12: 4 });
    code.push(Csrrw { rd: zero, rs1: t0, csr12: addr::MEPC });

    // Belt and suspenders: MScratch was already reset during init, but a
    // fresh write here keeps the next trap honest even if init changes.
    if bug != Some(BugKind::MscratchNotReset) {
        code.push(Addi { rd: t0, rs1: sp, imm12: SCRATCH_BYTES });
        code.push(Csrrw { rd: zero, rs1: t0, csr12: addr::MSCRATCH });
    }

    // Restore. sp comes out of slot 2 *last* so the other loads still use
    // the scratch base, and so a product written to slot 2 wins over the
    // original sp saved there.
    if bug == Some(BugKind::SpRestoreOrder) {
        code.push(Lw { rd: sp, rs1: sp, oimm12: 8 });
    }
    code.push(Lw { rd: ra, rs1: sp, oimm12: 4 });
    for i in 3..32u8 {
        code.push(Lw { rd: Register::new(i), rs1: sp, oimm12: 4 * i as MachineInt });
    }
    if bug != Some(BugKind::SpRestoreOrder) {
        code.push(Lw { rd: sp, rs1: sp, oimm12: 8 });
    }
    code.push(Mret);

    if !layout.handler_base.is_multiple_of(4) {
        return Err(SetupError(format!(
            "handler base {:#x} is not word aligned",
            layout.handler_base
        )));
    }
    let code_end = layout.handler_base + 4 * code.len() as u64;
    if layout.scratch_end < SCRATCH_BYTES as u64
        || layout.scratch_base() < code_end && layout.handler_base < layout.scratch_end
    {
        return Err(SetupError(format!(
            "handler {:#x}..{:#x} collides with scratch {:#x}..{:#x}",
            layout.handler_base,
            code_end,
            layout.scratch_base(),
            layout.scratch_end
        )));
    }
    Ok(code)
}

/// Why two states stopped being related.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationBreach {
    pub clause: &'static str,
    pub detail: String,
}

impl std::fmt::Display for RelationBreach {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.clause, self.detail)
    }
}

fn breach(clause: &'static str, detail: impl Into<String>) -> Result<(), RelationBreach> {
    Err(RelationBreach { clause, detail: detail.into() })
}

/// Checks the simulation relation between the high state `h` and the low
/// state `l`: equal registers and pc, every high memory byte present and
/// identical in low memory, the handler installed at its base, the scratch
/// region mapped, and the trap CSRs wired up. Reports the first clause that
/// fails.
pub fn related(
    h: &MachineState,
    l: &MachineState,
    layout: &HandlerLayout,
    handler: &[Instruction],
) -> Result<(), RelationBreach> {
    for i in 0..32 {
        let (hv, lv) = (h.regs()[i], l.regs()[i]);
        if hv != lv {
            return breach("regs", format!("x{i}: {hv} vs {lv}"));
        }
    }
    if h.pc() != l.pc() {
        return breach("pc", format!("{} vs {}", h.pc(), l.pc()));
    }

    let (base, size) = (h.platform().mem_base, h.platform().mem_size);
    let hmem = h.peek_mem(base, size).expect("high memory readable");
    let Some(lmem) = l.peek_mem(base, size) else {
        return breach("memory", format!("high range {base:#x}+{size:#x} not mapped low"));
    };
    if hmem != lmem {
        let i = hmem.iter().zip(lmem).position(|(a, b)| a != b).unwrap();
        return breach(
            "memory",
            format!("byte {:#x}: {:#x} vs {:#x}", base + i as u64, hmem[i], lmem[i]),
        );
    }

    let code = match assemble(handler) {
        Ok(code) => code,
        Err(e) => return breach("handler-code", format!("handler does not encode: {e}")),
    };
    match l.peek_mem(layout.handler_base, code.len() as u64) {
        Some(mem) if mem == code => {}
        Some(_) => return breach("handler-code", "handler bytes differ".to_string()),
        None => return breach("handler-code", "handler range not mapped".to_string()),
    }

    if !l.platform().in_ram(layout.scratch_base(), SCRATCH_BYTES as u64) {
        return breach(
            "scratch",
            format!("{:#x}+{:#x} not mapped", layout.scratch_base(), SCRATCH_BYTES),
        );
    }

    let mtvec = l.csr_field(CSRField::MTVecBase);
    if mtvec != (layout.handler_base >> 2) as MachineInt {
        return breach("mtvec", format!("MTVecBase {mtvec:#x}"));
    }
    let mscratch = l.csr_field(CSRField::MScratch);
    if mscratch != layout.scratch_end as MachineInt {
        return breach("mscratch", format!("MScratch {mscratch:#x}"));
    }
    if l.priv_mode() != crate::machine::PrivMode::Machine {
        return breach("priv", format!("{:?}", l.priv_mode()));
    }
    Ok(())
}

/// One differential test case: a program and the register file both
/// machines start from.
#[derive(Debug, Clone)]
pub struct DiffCase {
    pub program: Vec<Instruction>,
    pub init_regs: [u32; 32],
}

pub type Sim = EarlyExitLayer<MachineState>;

/// Builds the related machine pair for a case: H with hardware multiply and
/// the bare program, L with the handler installed and trap CSRs preset.
pub fn setup_pair(
    case: &DiffCase,
    layout: &HandlerLayout,
    bug: Option<BugKind>,
) -> Result<(Sim, Sim, Vec<Instruction>), SetupError> {
    let handler = build_handler(layout, bug)?;
    let prog =
        assemble(&case.program).map_err(|e| SetupError(format!("program does not encode: {e}")))?;
    let code =
        assemble(&handler).map_err(|e| SetupError(format!("handler does not encode: {e}")))?;

    if prog.len() as u64 > HIGH_MEM_SIZE {
        return Err(SetupError(format!("program too large: {} bytes", prog.len())));
    }
    if layout.handler_base < MEM_BASE + HIGH_MEM_SIZE
        || layout.scratch_end > MEM_BASE + LOW_MEM_SIZE
        || layout.handler_base + code.len() as u64 > MEM_BASE + LOW_MEM_SIZE
    {
        return Err(SetupError("handler or scratch outside reserved low memory".to_string()));
    }

    let h_ext = ExtensionSet::rv32i().with_m();
    let l_ext = ExtensionSet::rv32i().with_zicsr();
    let h_cfg = PlatformConfig::new(h_ext, MEM_BASE, HIGH_MEM_SIZE);
    let l_cfg = PlatformConfig::new(l_ext, MEM_BASE, LOW_MEM_SIZE);

    let seg = |bytes: &[u8], addr| Segment { addr, bytes: bytes.to_vec() };
    let mut h = MachineState::new(h_cfg, &[seg(&prog, MEM_BASE)], MEM_BASE)
        .map_err(|e| SetupError(e.to_string()))?;
    let mut l = MachineState::new(
        l_cfg,
        &[seg(&prog, MEM_BASE), seg(&code, layout.handler_base)],
        MEM_BASE,
    )
    .map_err(|e| SetupError(e.to_string()))?;

    for i in 1..32u8 {
        let v = XWord::new(XLEN, case.init_regs[i as usize] as u64);
        h.set_register(Register::new(i), v);
        l.set_register(Register::new(i), v);
    }
    l.set_csr_field(CSRField::MTVecBase, (layout.handler_base >> 2) as MachineInt)
        .expect("mtvec supported");
    l.set_csr_field(CSRField::MScratch, layout.scratch_end as MachineInt)
        .expect("mscratch supported");

    Ok((EarlyExitLayer::new(h), EarlyExitLayer::new(l), handler))
}

/// Outcome of one differential run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail { step: u64, clause: String, detail: String },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    fn breach(step: u64, b: RelationBreach) -> Verdict {
        Verdict::Fail { step, clause: b.clause.to_string(), detail: b.detail }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => f.write_str("PASS"),
            Verdict::Fail { clause, .. } => write!(f, "FAIL {clause}"),
        }
    }
}

/// Locksteps the pair until the program parks on its final self-jump,
/// checking [`related`] at every synchronization point.
///
/// H advances one instruction at a time; after each, L runs until its pc
/// reaches H's. For ordinary instructions that is one step, for a MUL it is
/// the whole trap round trip. `max_steps` bounds H's instruction count.
pub fn softmul_diff(
    case: &DiffCase,
    layout: &HandlerLayout,
    bug: Option<BugKind>,
    max_steps: u64,
) -> Result<Verdict, SetupError> {
    let (mut h, mut l, handler) = setup_pair(case, layout, bug)?;
    let mdec = Decoder::new(ExtensionSet::rv32i().with_m());
    let idec = Decoder::new(ExtensionSet::rv32i().with_zicsr());

    if let Err(b) = related(h.inner(), l.inner(), layout, &handler) {
        return Ok(Verdict::breach(0, b));
    }

    let mut step = 0;
    loop {
        step += 1;
        if step > max_steps {
            return Ok(Verdict::Fail {
                step,
                clause: "steps".to_string(),
                detail: format!("no terminal jump within {max_steps} instructions"),
            });
        }
        let hpc0 = h.inner().pc();
        if let StepOutcome::HardFailure(f) = run1(&mut h, &mdec) {
            return Ok(Verdict::Fail {
                step,
                clause: "hard-failure".to_string(),
                detail: format!("high: {f}"),
            });
        }
        let hpc = h.inner().pc();
        if hpc == hpc0 {
            break;
        }

        let mut budget = SYNC_BUDGET;
        while l.inner().pc() != hpc {
            if budget == 0 {
                return Ok(Verdict::Fail {
                    step,
                    clause: "budget".to_string(),
                    detail: format!("low pc {} never reached {hpc}", l.inner().pc()),
                });
            }
            budget -= 1;
            if let StepOutcome::HardFailure(f) = run1(&mut l, &idec) {
                return Ok(Verdict::Fail {
                    step,
                    clause: "hard-failure".to_string(),
                    detail: format!("low: {f}"),
                });
            }
        }
        if let Err(b) = related(h.inner(), l.inner(), layout, &handler) {
            return Ok(Verdict::breach(step, b));
        }
    }

    match related(h.inner(), l.inner(), layout, &handler) {
        Ok(()) => Ok(Verdict::Pass),
        Err(b) => Ok(Verdict::breach(step, b)),
    }
}

/// Deterministically derives test case `idx` of a suite. Indices 0 and 1
/// are fixed regression programs (consecutive MULs, MUL into sp); the rest
/// are seeded random programs over the integer ALU plus MUL and short
/// forward branches, ending in a self-jump.
pub fn generate_case(seed: u64, idx: u32, max_len: u32) -> DiffCase {
    use Instruction::*;

    let zero = Register::ZERO;
    if idx == 0 {
        return DiffCase {
            program: vec![
                Addi { rd: Register::new(6), rs1: zero, imm12: 3 },
                Addi { rd: Register::new(7), rs1: zero, imm12: 5 },
                Mul { rd: Register::new(5), rs1: Register::new(6), rs2: Register::new(7) },
                Mul { rd: Register::new(28), rs1: Register::new(5), rs2: Register::new(7) },
                Jal { rd: zero, jimm20: 0 },
            ],
            init_regs: [0; 32],
        };
    }
    if idx == 1 {
        return DiffCase {
            program: vec![
                Addi { rd: Register::new(6), rs1: zero, imm12: 7 },
                Addi { rd: Register::new(7), rs1: zero, imm12: 9 },
                Mul { rd: Register::SP, rs1: Register::new(6), rs2: Register::new(7) },
                Jal { rd: zero, jimm20: 0 },
            ],
            init_regs: [0; 32],
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
    let mut init_regs = [0u32; 32];
    for r in init_regs.iter_mut().skip(1) {
        *r = rng.gen();
    }

    let reg = |rng: &mut ChaCha8Rng| Register::new(rng.gen_range(0..32));
    let mul = |rng: &mut ChaCha8Rng| Mul { rd: reg(rng), rs1: reg(rng), rs2: reg(rng) };

    let len = rng.gen_range(4..=max_len.max(4)) as usize;
    let mut body = Vec::with_capacity(len + 1);
    for i in 0..len {
        let inst = match rng.gen_range(0..16u32) {
            0..=3 => mul(&mut rng),
            4 | 5 if len - i >= 2 => {
                let k = rng.gen_range(1..=(len - i).min(3)) as MachineInt;
                let (rs1, rs2, sbimm12) = (reg(&mut rng), reg(&mut rng), 4 * k);
                match rng.gen_range(0..6u32) {
                    0 => Beq { rs1, rs2, sbimm12 },
                    1 => Bne { rs1, rs2, sbimm12 },
                    2 => Blt { rs1, rs2, sbimm12 },
                    3 => Bge { rs1, rs2, sbimm12 },
                    4 => Bltu { rs1, rs2, sbimm12 },
                    _ => Bgeu { rs1, rs2, sbimm12 },
                }
            }
            _ => {
                let (rd, rs1, rs2) = (reg(&mut rng), reg(&mut rng), reg(&mut rng));
                let imm12 = rng.gen_range(-2048..=2047);
                match rng.gen_range(0..18u32) {
                    0 => Add { rd, rs1, rs2 },
                    1 => Sub { rd, rs1, rs2 },
                    2 => Sll { rd, rs1, rs2 },
                    3 => Slt { rd, rs1, rs2 },
                    4 => Sltu { rd, rs1, rs2 },
                    5 => Xor { rd, rs1, rs2 },
                    6 => Srl { rd, rs1, rs2 },
                    7 => Sra { rd, rs1, rs2 },
                    8 => Or { rd, rs1, rs2 },
                    9 => And { rd, rs1, rs2 },
                    10 => Addi { rd, rs1, imm12 },
                    11 => Slti { rd, rs1, imm12 },
                    12 => Sltiu { rd, rs1, imm12 },
                    13 => Xori { rd, rs1, imm12 },
                    14 => Ori { rd, rs1, imm12 },
                    15 => Andi { rd, rs1, imm12 },
                    16 => Slli { rd, rs1, shamt6: rng.gen_range(0..32) },
                    _ => Lui { rd, imm20: (rng.gen::<u32>() & 0xffff_f000) as i32 as MachineInt },
                }
            }
        };
        body.push(inst);
    }
    if !body.iter().any(|i| matches!(i, Mul { .. })) {
        let at = rng.gen_range(0..len);
        body[at] = mul(&mut rng);
    }
    body.push(Jal { rd: zero, jimm20: 0 });

    DiffCase { program: body, init_regs }
}

/// Suite parameters, mirroring the command-line flags.
#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    pub count: u32,
    pub max_len: u32,
    pub jobs: u32,
    pub bug: Option<BugKind>,
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub idx: u32,
    pub verdict: Verdict,
}

fn run_case(cfg: &SuiteConfig, layout: &HandlerLayout, idx: u32) -> CaseResult {
    let case = generate_case(cfg.seed, idx, cfg.max_len);
    let verdict = softmul_diff(&case, layout, cfg.bug, SYNC_BUDGET).unwrap_or_else(|e| {
        Verdict::Fail { step: 0, clause: "setup".to_string(), detail: e.to_string() }
    });
    CaseResult { idx, verdict }
}

/// Runs the whole differential suite, optionally sharded over threads.
/// Case `idx` depends only on `(seed, idx)`, so the verdicts are the same
/// at every job count.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<CaseResult> {
    let layout = HandlerLayout::standard();
    let jobs = cfg.jobs.max(1).min(cfg.count.max(1));
    if jobs <= 1 {
        return (0..cfg.count).map(|idx| run_case(cfg, &layout, idx)).collect();
    }
    let mut results = std::thread::scope(|s| {
        let workers: Vec<_> = (0..jobs)
            .map(|t| {
                let layout = &layout;
                s.spawn(move || {
                    (t..cfg.count)
                        .step_by(jobs as usize)
                        .map(|idx| run_case(cfg, layout, idx))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        workers.into_iter().flat_map(|w| w.join().expect("suite worker")).collect::<Vec<_>>()
    });
    results.sort_by_key(|r| r.idx);
    results
}
