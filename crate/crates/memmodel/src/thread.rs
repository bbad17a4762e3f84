//! Running one litmus thread against a pluggable memory.
//!
//! A `ThreadCore` owns the architectural state of a single hart: its
//! registers, pc and encoded program. Each step wires the core to a
//! `MemSide`, which decides what word loads and stores at data addresses
//! observe. The instruction semantics themselves are the shared step
//! function; only the memory side differs between exploration, replay
//! and readback.

use std::collections::BTreeSet;

use rvsem_core::decode::{Decoder, ExtensionSet};
use rvsem_core::encode::encode;
use rvsem_core::exec::run1;
use rvsem_core::inst::{Instruction, Register};
use rvsem_core::machine::{
    hard_failure, HardFailure, MachineInterface, PlatformConfig, PrimResult, PrivMode, SourceType,
    StepAbort, StepOutcome,
};
use rvsem_core::xword::{MachineInt, XWord};

use crate::event::{DepEdge, DepKind, EventId};
use crate::litmus::LitmusTest;

/// The memory as one thread sees it during a step. Word-sized only; the
/// machine wrapper rejects every other width before it gets here.
pub trait MemSide {
    fn load(&mut self, thread: usize, addr: u64) -> PrimResult<u32>;
    fn store(&mut self, thread: usize, addr: u64, value: u32) -> PrimResult<()>;
    fn fence(&mut self, thread: usize, pred: MachineInt, succ: MachineInt);
}

/// Architectural state of one litmus thread.
pub struct ThreadCore {
    pub thread: usize,
    regs: [XWord; 32],
    pc: XWord,
    pub base: u64,
    words: Vec<u32>,
    platform: PlatformConfig,
}

impl ThreadCore {
    pub fn new(test: &LitmusTest, thread: usize) -> ThreadCore {
        let platform = PlatformConfig::new(ExtensionSet::rv64i(), 0, 0x1_0000);
        let xlen = platform.xlen();
        let base = test.thread_base(thread);
        let words = test.programs[thread]
            .iter()
            .map(|i| encode(i).expect("parsed instructions always encode") as u32)
            .collect();
        let mut regs = std::array::from_fn(|_| XWord::zero(xlen));
        for r in 1..32u8 {
            regs[r as usize] = XWord::new(xlen, test.reg_init(thread, r));
        }
        ThreadCore { thread, regs, pc: XWord::new(xlen, base), base, words, platform }
    }

    /// Index of the instruction at the current pc, if it points into the
    /// program.
    pub fn pc_index(&self) -> Option<usize> {
        let pc = self.pc.bits();
        if pc < self.base || !pc.is_multiple_of(4) {
            return None;
        }
        let idx = ((pc - self.base) / 4) as usize;
        (idx < self.words.len()).then_some(idx)
    }

    /// True once the pc has fallen off the end of the program.
    pub fn done(&self) -> bool {
        self.pc.bits() == self.base + 4 * self.words.len() as u64
    }

    /// The decoded instruction the next step will run.
    pub fn fetch_decode(&self, dec: &Decoder) -> Option<Instruction> {
        self.pc_index().map(|i| dec.decode(self.words[i] as MachineInt))
    }

    pub fn reg(&self, r: u8) -> u64 {
        if r == 0 {
            0
        } else {
            self.regs[r as usize].bits()
        }
    }
}

/// Runs one instruction of `core`, serving data memory from `side`.
pub fn step_thread<S: MemSide>(core: &mut ThreadCore, side: &mut S, dec: &Decoder) -> StepOutcome {
    let mut m = LitmusMachine { core, side };
    run1(&mut m, dec)
}

struct LitmusMachine<'a, S> {
    core: &'a mut ThreadCore,
    side: &'a mut S,
}

impl<S: MemSide> LitmusMachine<'_, S> {
    fn reject_width<T>(&self, addr: XWord) -> PrimResult<T> {
        hard_failure("non-word-access", format!("at {:#x}", addr.bits()))
    }
}

impl<S: MemSide> MachineInterface for LitmusMachine<'_, S> {
    fn get_register(&mut self, r: Register) -> XWord {
        if r.index() == 0 {
            XWord::zero(self.core.pc.xlen())
        } else {
            self.core.regs[r.index()]
        }
    }

    fn set_register(&mut self, r: Register, v: XWord) {
        if r.index() != 0 {
            self.core.regs[r.index()] = v;
        }
    }

    fn load_byte(&mut self, _src: SourceType, addr: XWord) -> PrimResult<u8> {
        self.reject_width(addr)
    }

    fn load_half(&mut self, _src: SourceType, addr: XWord) -> PrimResult<u16> {
        self.reject_width(addr)
    }

    fn load_word(&mut self, src: SourceType, addr: XWord) -> PrimResult<u32> {
        if src == SourceType::Fetch {
            let core = &*self.core;
            let a = addr.bits();
            let in_code = a >= core.base
                && a.is_multiple_of(4)
                && ((a - core.base) / 4) < core.words.len() as u64;
            if in_code {
                return Ok(core.words[((a - core.base) / 4) as usize]);
            }
            return hard_failure("bad-address", format!("fetch outside the program at {a:#x}"));
        }
        self.side.load(self.core.thread, addr.bits())
    }

    fn load_double(&mut self, _src: SourceType, addr: XWord) -> PrimResult<u64> {
        self.reject_width(addr)
    }

    fn store_byte(&mut self, _src: SourceType, addr: XWord, _v: u8) -> PrimResult<()> {
        self.reject_width(addr)
    }

    fn store_half(&mut self, _src: SourceType, addr: XWord, _v: u16) -> PrimResult<()> {
        self.reject_width(addr)
    }

    fn store_word(&mut self, _src: SourceType, addr: XWord, v: u32) -> PrimResult<()> {
        self.side.store(self.core.thread, addr.bits(), v)
    }

    fn store_double(&mut self, _src: SourceType, addr: XWord, _v: u64) -> PrimResult<()> {
        self.reject_width(addr)
    }

    fn make_reservation(&mut self, _addr: XWord) -> PrimResult<()> {
        hard_failure("reservation-unsupported", "")
    }

    fn check_reservation(&mut self, _addr: XWord) -> PrimResult<bool> {
        hard_failure("reservation-unsupported", "")
    }

    fn clear_reservation(&mut self, _addr: XWord) -> PrimResult<()> {
        hard_failure("reservation-unsupported", "")
    }

    fn get_csr_field(&mut self, _field: rvsem_core::csr::CSRField) -> PrimResult<MachineInt> {
        hard_failure("csr-unsupported", "")
    }

    fn set_csr_field(&mut self, _field: rvsem_core::csr::CSRField, _v: MachineInt) -> PrimResult<()> {
        hard_failure("csr-unsupported", "")
    }

    fn get_pc(&mut self) -> XWord {
        self.core.pc
    }

    fn set_pc(&mut self, pc: XWord) {
        self.core.pc = pc;
    }

    fn get_priv_mode(&mut self) -> PrivMode {
        PrivMode::Machine
    }

    fn set_priv_mode(&mut self, _mode: PrivMode) {}

    fn commit(&mut self) {}

    fn end_cycle_early(&mut self) -> StepAbort {
        StepAbort::HardFailure(HardFailure::new("end-cycle-unsupported", ""))
    }

    fn flush_tlb(&mut self) {}

    fn fence(&mut self, pred: MachineInt, succ: MachineInt) {
        self.side.fence(self.core.thread, pred, succ);
    }

    fn get_platform(&self) -> &PlatformConfig {
        &self.core.platform
    }
}

/// Syntactic dependency state carried along one thread's execution.
/// `regdeps[r]` holds the load events register `r` currently derives
/// from; `ctrl` accumulates the loads that fed any branch condition so
/// far. x0 never carries a dependency.
pub struct ThreadState {
    pub regdeps: [BTreeSet<EventId>; 32],
    pub ctrl: BTreeSet<EventId>,
    pub emitted: usize,
}

impl Default for ThreadState {
    fn default() -> ThreadState {
        ThreadState {
            regdeps: std::array::from_fn(|_| BTreeSet::new()),
            ctrl: BTreeSet::new(),
            emitted: 0,
        }
    }
}

impl ThreadState {
    pub fn new() -> ThreadState {
        ThreadState::default()
    }
}

/// What the next instruction will contribute to the event graph: the
/// memory event it emits, if any, and the dependency edges into it.
pub struct StepPlan {
    pub event: Option<EventId>,
    pub edges: Vec<DepEdge>,
}

/// Advances the dependency state across `inst` and plans its event.
/// Purely syntactic: computed from the decoded instruction before the
/// step runs, never from observed values.
pub fn static_deps(state: &mut ThreadState, thread: usize, inst: &Instruction) -> StepPlan {
    use Instruction::*;

    let next_event = |state: &mut ThreadState| {
        let id = EventId::Code { thread, index: state.emitted };
        state.emitted += 1;
        id
    };
    let sources = |state: &ThreadState, r: Register| state.regdeps[r.index()].clone();

    match *inst {
        Lw { rd, rs1, .. } => {
            let id = next_event(state);
            let edges = sources(state, rs1)
                .into_iter()
                .map(|src| (src, id, DepKind::Addr))
                .collect();
            if rd.index() != 0 {
                state.regdeps[rd.index()] = BTreeSet::from([id]);
            }
            StepPlan { event: Some(id), edges }
        }
        Sw { rs1, rs2, .. } => {
            let id = next_event(state);
            let mut edges: Vec<DepEdge> = Vec::new();
            edges.extend(sources(state, rs1).into_iter().map(|s| (s, id, DepKind::Addr)));
            edges.extend(sources(state, rs2).into_iter().map(|s| (s, id, DepKind::Data)));
            edges.extend(state.ctrl.iter().map(|&s| (s, id, DepKind::Ctrl)));
            StepPlan { event: Some(id), edges }
        }
        Fence { .. } => StepPlan { event: Some(next_event(state)), edges: Vec::new() },
        Beq { rs1, rs2, .. } | Bne { rs1, rs2, .. } => {
            let mut feeds = sources(state, rs1);
            feeds.extend(sources(state, rs2));
            state.ctrl.extend(feeds);
            StepPlan { event: None, edges: Vec::new() }
        }
        Add { rd, rs1, rs2 }
        | Sub { rd, rs1, rs2 }
        | Xor { rd, rs1, rs2 }
        | Or { rd, rs1, rs2 }
        | And { rd, rs1, rs2 } => {
            let mut feeds = sources(state, rs1);
            feeds.extend(sources(state, rs2));
            if rd.index() != 0 {
                state.regdeps[rd.index()] = feeds;
            }
            StepPlan { event: None, edges: Vec::new() }
        }
        Addi { rd, rs1, .. }
        | Ori { rd, rs1, .. }
        | Xori { rd, rs1, .. }
        | Andi { rd, rs1, .. } => {
            let feeds = sources(state, rs1);
            if rd.index() != 0 {
                state.regdeps[rd.index()] = feeds;
            }
            StepPlan { event: None, edges: Vec::new() }
        }
        ref other => unreachable!("instruction outside the litmus subset: {other:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::litmus::parse_litmus;
    use std::collections::BTreeMap;

    /// Scripted memory: loads pop from a queue, stores and fences are
    /// recorded.
    #[derive(Default)]
    struct Script {
        load_values: Vec<u32>,
        calls: Vec<String>,
    }

    impl MemSide for Script {
        fn load(&mut self, thread: usize, addr: u64) -> PrimResult<u32> {
            let v = self.load_values.remove(0);
            self.calls.push(format!("load t{thread} {addr:#x} -> {v:#x}"));
            Ok(v)
        }

        fn store(&mut self, thread: usize, addr: u64, value: u32) -> PrimResult<()> {
            self.calls.push(format!("store t{thread} {addr:#x} {value:#x}"));
            Ok(())
        }

        fn fence(&mut self, thread: usize, pred: MachineInt, succ: MachineInt) {
            self.calls.push(format!("fence t{thread} {pred},{succ}"));
        }
    }

    fn dec() -> Decoder {
        Decoder::new(ExtensionSet::rv64i())
    }

    const SB0: &str = "\
RISCV SB
{ 0:x6=x; 0:x7=y; }
 P0           ;
 ori x5,x0,1  ;
 sw x5,0(x6)  ;
 lw x8,0(x7)  ;
exists (0:x8=0)
";

    #[test]
    fn a_thread_runs_its_program_against_the_side() {
        let test = parse_litmus(SB0).unwrap();
        let mut core = ThreadCore::new(&test, 0);
        let mut side = Script { load_values: vec![0xffff_ffff], ..Script::default() };
        let dec = dec();
        while !core.done() {
            assert_eq!(step_thread(&mut core, &mut side, &dec), StepOutcome::Completed);
        }
        assert_eq!(side.calls, ["store t0 0x1000 0x1", "load t0 0x1010 -> 0xffffffff"]);
        assert_eq!(core.reg(5), 1);
        // lw sign-extends.
        assert_eq!(core.reg(8), 0xffff_ffff_ffff_ffff);
        assert_eq!(core.reg(0), 0);
    }

    #[test]
    fn fences_reach_the_side_with_their_masks() {
        let text = "\
RISCV F
{ 0:x6=x; }
 P0          ;
 fence rw,w  ;
exists (0:x6=4096)
";
        let test = parse_litmus(text).unwrap();
        let mut core = ThreadCore::new(&test, 0);
        let mut side = Script::default();
        assert_eq!(step_thread(&mut core, &mut side, &dec()), StepOutcome::Completed);
        assert_eq!(side.calls, ["fence t0 3,1"]);
        assert!(core.done());
    }

    fn hand_test(program: Vec<Instruction>) -> LitmusTest {
        use crate::litmus::{Cond, RegInit};
        LitmusTest {
            name: "hand".into(),
            init_regs: BTreeMap::from([((0usize, 6u8), RegInit::Location("x".into()))]),
            locations: vec!["x".into()],
            init_mem: BTreeMap::new(),
            programs: vec![program],
            postcondition: Cond::Eq { thread: 0, reg: 5, value: 0 },
        }
    }

    #[test]
    fn non_word_accesses_fail_hard() {
        use Instruction::*;
        let test = hand_test(vec![Lb {
            rd: Register::new(5),
            rs1: Register::new(6),
            oimm12: 0,
        }]);
        let mut core = ThreadCore::new(&test, 0);
        let out = step_thread(&mut core, &mut Script::default(), &dec());
        match out {
            StepOutcome::HardFailure(f) => assert_eq!(f.code, "non-word-access"),
            other => panic!("expected a hard failure, got {other:?}"),
        }
    }

    #[test]
    fn traps_have_nowhere_to_go() {
        let test = hand_test(vec![Instruction::Ecall]);
        let mut core = ThreadCore::new(&test, 0);
        let out = step_thread(&mut core, &mut Script::default(), &dec());
        match out {
            StepOutcome::HardFailure(f) => assert_eq!(f.code, "csr-unsupported"),
            other => panic!("expected a hard failure, got {other:?}"),
        }
    }

    #[test]
    fn running_off_the_end_is_a_bad_fetch() {
        let test = parse_litmus(SB0).unwrap();
        let mut core = ThreadCore::new(&test, 0);
        let mut side = Script { load_values: vec![0], ..Script::default() };
        let dec = dec();
        for _ in 0..3 {
            assert!(!core.done());
            step_thread(&mut core, &mut side, &dec);
        }
        assert!(core.done());
        assert!(core.fetch_decode(&dec).is_none());
        let out = step_thread(&mut core, &mut side, &dec);
        match out {
            StepOutcome::HardFailure(f) => assert_eq!(f.code, "bad-address"),
            other => panic!("expected a hard failure, got {other:?}"),
        }
    }

    #[test]
    fn address_dependencies_chain_through_arithmetic() {
        use Instruction::*;
        let x = Register::new;
        let mut state = ThreadState::new();
        // lw x5,0(x6); xor x9,x5,x5; add x10,x8,x9; lw x7,0(x10)
        let p0 = static_deps(&mut state, 1, &Lw { rd: x(5), rs1: x(6), oimm12: 0 });
        let first = p0.event.unwrap();
        assert_eq!(first, EventId::Code { thread: 1, index: 0 });
        assert!(p0.edges.is_empty());

        static_deps(&mut state, 1, &Xor { rd: x(9), rs1: x(5), rs2: x(5) });
        static_deps(&mut state, 1, &Add { rd: x(10), rs1: x(8), rs2: x(9) });
        let p3 = static_deps(&mut state, 1, &Lw { rd: x(7), rs1: x(10), oimm12: 0 });
        assert_eq!(p3.edges, vec![(first, p3.event.unwrap(), DepKind::Addr)]);
    }

    #[test]
    fn control_dependencies_reach_stores_but_not_loads() {
        use Instruction::*;
        let x = Register::new;
        let mut state = ThreadState::new();
        let p0 = static_deps(&mut state, 0, &Lw { rd: x(5), rs1: x(6), oimm12: 0 });
        let load = p0.event.unwrap();
        static_deps(&mut state, 0, &Beq { rs1: x(5), rs2: x(5), sbimm12: 4 });

        let pl = static_deps(&mut state, 0, &Lw { rd: x(9), rs1: x(8), oimm12: 0 });
        assert!(pl.edges.is_empty());

        let ps = static_deps(&mut state, 0, &Sw { rs1: x(8), rs2: x(9), simm12: 0 });
        let store = ps.event.unwrap();
        assert!(ps.edges.contains(&(load, store, DepKind::Ctrl)));
        // The second load also feeds the store's data.
        assert!(ps.edges.contains(&(pl.event.unwrap(), store, DepKind::Data)));
    }

    #[test]
    fn data_dependencies_follow_register_copies() {
        use Instruction::*;
        let x = Register::new;
        let mut state = ThreadState::new();
        let p0 = static_deps(&mut state, 0, &Lw { rd: x(5), rs1: x(6), oimm12: 0 });
        let load = p0.event.unwrap();
        static_deps(&mut state, 0, &Xori { rd: x(9), rs1: x(5), imm12: 0 });
        static_deps(&mut state, 0, &Ori { rd: x(10), rs1: x(9), imm12: 1 });
        let ps = static_deps(&mut state, 0, &Sw { rs1: x(7), rs2: x(10), simm12: 0 });
        assert_eq!(ps.edges, vec![(load, ps.event.unwrap(), DepKind::Data)]);
    }

    #[test]
    fn x0_never_carries_dependencies() {
        use Instruction::*;
        let x = Register::new;
        let mut state = ThreadState::new();
        static_deps(&mut state, 0, &Lw { rd: x(0), rs1: x(6), oimm12: 0 });
        let ps = static_deps(&mut state, 0, &Sw { rs1: x(6), rs2: x(0), simm12: 0 });
        assert!(ps.edges.is_empty());
    }
}
