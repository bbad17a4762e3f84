//! The litmus corpus, checked four ways.
//!
//! For every fixture the explorer and the brute-force oracle must agree
//! on the exact set of executions, the report must match the frozen
//! verdict and state list, every sequentially consistent interleaving
//! (from a third, test-local interpreter) must appear among the relaxed
//! outcomes, and inserting a full fence anywhere must never produce a
//! state the unfenced program could not.

use std::collections::{BTreeMap, BTreeSet};

use rvsem_core::inst::Instruction;
use rvsem_memmodel::bruteforce::enumerate_bruteforce;
use rvsem_memmodel::explore::explore;
use rvsem_memmodel::litmus::{parse_litmus, LitmusTest};
use rvsem_memmodel::report::evaluate_postcondition;

struct Expect {
    file: &'static str,
    allowed: bool,
    states: &'static [&'static str],
}

const SB_ALL: &[&str] = &[
    "0:x8=0; 1:x8=0;",
    "0:x8=0; 1:x8=1;",
    "0:x8=1; 1:x8=0;",
    "0:x8=1; 1:x8=1;",
];
const SB_FENCED: &[&str] = &["0:x8=0; 1:x8=1;", "0:x8=1; 1:x8=0;", "0:x8=1; 1:x8=1;"];
const MP_ALL: &[&str] = &[
    "1:x5=0; 1:x7=0;",
    "1:x5=0; 1:x7=1;",
    "1:x5=1; 1:x7=0;",
    "1:x5=1; 1:x7=1;",
];
const MP_ORDERED: &[&str] = &["1:x5=0; 1:x7=0;", "1:x5=0; 1:x7=1;", "1:x5=1; 1:x7=1;"];
const LB_ALL: &[&str] = &[
    "0:x5=0; 1:x5=0;",
    "0:x5=0; 1:x5=1;",
    "0:x5=1; 1:x5=0;",
    "0:x5=1; 1:x5=1;",
];
const LB_ORDERED: &[&str] = &["0:x5=0; 1:x5=0;", "0:x5=0; 1:x5=1;", "0:x5=1; 1:x5=0;"];
const CORR_STATES: &[&str] = &["1:x5=0; 1:x7=0;", "1:x5=0; 1:x7=1;", "1:x5=1; 1:x7=1;"];

/// Verdicts and state lists frozen from the reference model-checker
/// results for these shapes.
const CORPUS: &[Expect] = &[
    Expect { file: "SB.litmus", allowed: true, states: SB_ALL },
    Expect { file: "SB+fence.rw.rws.litmus", allowed: false, states: SB_FENCED },
    Expect { file: "SB+fence.rw.rw+po.litmus", allowed: true, states: SB_ALL },
    Expect { file: "MP.litmus", allowed: true, states: MP_ALL },
    Expect { file: "MP+fence.w.w+po.litmus", allowed: true, states: MP_ALL },
    Expect { file: "MP+po+addr.litmus", allowed: true, states: MP_ALL },
    Expect { file: "MP+fence.w.w+addr.litmus", allowed: false, states: MP_ORDERED },
    Expect { file: "MP+fence.w.w+ctrl.litmus", allowed: true, states: MP_ALL },
    Expect { file: "MP+fence.w.w+fence.r.r.litmus", allowed: false, states: MP_ORDERED },
    Expect { file: "LB.litmus", allowed: true, states: LB_ALL },
    Expect { file: "LB+fence.rw.rw+po.litmus", allowed: true, states: LB_ALL },
    Expect { file: "LB+fence.rw.rws.litmus", allowed: false, states: LB_ORDERED },
    Expect { file: "LB+datas.litmus", allowed: false, states: LB_ORDERED },
    Expect { file: "LB+ctrls.litmus", allowed: false, states: LB_ORDERED },
    Expect { file: "LB+addrs.litmus", allowed: false, states: LB_ORDERED },
    Expect { file: "CoRR.litmus", allowed: false, states: CORR_STATES },
];

fn load(file: &str) -> LitmusTest {
    let path = format!("{}/tests/fixtures/{file}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_litmus(&text).unwrap_or_else(|e| panic!("{file}: {e}"))
}

fn explored_outcomes(test: &LitmusTest) -> Vec<String> {
    let graphs = explore(test).unwrap_or_else(|e| panic!("{}: {e}", test.name));
    evaluate_postcondition(test, &graphs)
        .unwrap_or_else(|e| panic!("{}: {e}", test.name))
        .outcomes
}

#[test]
fn explorer_and_bruteforce_agree_on_every_fixture() {
    for e in CORPUS {
        let test = load(e.file);
        let explored: BTreeSet<String> =
            explore(&test).unwrap().iter().map(|g| g.outcome_key()).collect();
        let brute: BTreeSet<String> = enumerate_bruteforce(&test)
            .unwrap_or_else(|err| panic!("{}: {err}", e.file))
            .iter()
            .map(|g| g.outcome_key())
            .collect();
        assert_eq!(explored, brute, "{} executions diverge between routes", e.file);
    }
}

#[test]
fn no_two_executions_share_an_outcome_key() {
    for e in CORPUS {
        let test = load(e.file);
        let graphs = explore(&test).unwrap();
        let keys: BTreeSet<String> = graphs.iter().map(|g| g.outcome_key()).collect();
        assert_eq!(keys.len(), graphs.len(), "{} has duplicate executions", e.file);
    }
}

#[test]
fn reports_match_the_frozen_verdicts() {
    for e in CORPUS {
        let test = load(e.file);
        let graphs = explore(&test).unwrap();
        let report = evaluate_postcondition(&test, &graphs).unwrap();
        assert_eq!(report.witnessed, e.allowed, "{} verdict", e.file);
        assert_eq!(report.outcomes, e.states, "{} states", e.file);
    }
}

#[test]
fn every_sequential_interleaving_appears_among_the_outcomes() {
    for e in CORPUS {
        let test = load(e.file);
        let relaxed: BTreeSet<String> = explored_outcomes(&test).into_iter().collect();
        let sc = sc_valuations(&test);
        assert!(!sc.is_empty(), "{} has no interleavings", e.file);
        for v in &sc {
            assert!(relaxed.contains(v), "{}: interleaving outcome {v} missing", e.file);
        }
    }
}

#[test]
fn adding_fences_never_adds_outcomes() {
    for e in CORPUS {
        let test = load(e.file);
        let base: BTreeSet<String> = explored_outcomes(&test).into_iter().collect();
        for t in 0..test.nthreads() {
            for pos in 0..=test.programs[t].len() {
                let mut fenced = test.clone();
                fenced.programs[t].insert(pos, Instruction::Fence { pred: 3, succ: 3 });
                for v in explored_outcomes(&fenced) {
                    assert!(
                        base.contains(&v),
                        "{}: fence at {t}:{pos} created outcome {v}",
                        e.file
                    );
                }
            }
        }
    }
}

/// Sequentially consistent reference: depth-first over every choice of
/// which thread steps next, with one flat memory. Deliberately a third
/// interpretation of the instruction set, sharing nothing with the
/// explorer or the brute-force oracle.
fn sc_valuations(test: &LitmusTest) -> BTreeSet<String> {
    #[derive(Clone)]
    struct State {
        regs: Vec<[u64; 32]>,
        ip: Vec<usize>,
        mem: BTreeMap<u64, u32>,
    }

    let which = test.postcondition.registers();
    let start = State {
        regs: (0..test.nthreads())
            .map(|t| {
                let mut r = [0u64; 32];
                for i in 1..32u8 {
                    r[i as usize] = test.reg_init(t, i);
                }
                r
            })
            .collect(),
        ip: vec![0; test.nthreads()],
        mem: test.init_mem_by_addr(),
    };

    let mut out = BTreeSet::new();
    let mut stack = vec![start];
    let mut visits = 0u64;
    while let Some(s) = stack.pop() {
        visits += 1;
        assert!(visits < 1_000_000, "interleaving blow-up in {}", test.name);
        let runnable: Vec<usize> =
            (0..test.nthreads()).filter(|&t| s.ip[t] < test.programs[t].len()).collect();
        if runnable.is_empty() {
            let line = which
                .iter()
                .map(|&(t, r)| format!("{t}:x{r}={};", s.regs[t][r as usize]))
                .collect::<Vec<_>>()
                .join(" ");
            out.insert(line);
            continue;
        }
        for t in runnable {
            let mut ns = s.clone();
            sc_step(test, t, &mut ns.regs, &mut ns.ip, &mut ns.mem);
            stack.push(ns);
        }
    }
    out
}

fn sc_step(
    test: &LitmusTest,
    t: usize,
    regs: &mut [[u64; 32]],
    ip: &mut [usize],
    mem: &mut BTreeMap<u64, u32>,
) {
    use Instruction::*;
    let prog = &test.programs[t];
    let r = &mut regs[t];
    let at = ip[t];
    let mut next = at + 1;
    let put = |r: &mut [u64; 32], rd: rvsem_core::inst::Register, v: u64| {
        if rd.index() != 0 {
            r[rd.index()] = v;
        }
    };
    match prog[at] {
        Lw { rd, rs1, oimm12 } => {
            let addr = r[rs1.index()].wrapping_add(oimm12 as u64);
            let v = mem.get(&addr).copied().unwrap_or(0);
            put(r, rd, v as i32 as i64 as u64);
        }
        Sw { rs1, rs2, simm12 } => {
            let addr = r[rs1.index()].wrapping_add(simm12 as u64);
            mem.insert(addr, r[rs2.index()] as u32);
        }
        Fence { .. } => {}
        Addi { rd, rs1, imm12 } => put(r, rd, r[rs1.index()].wrapping_add(imm12 as u64)),
        Ori { rd, rs1, imm12 } => put(r, rd, r[rs1.index()] | imm12 as u64),
        Xori { rd, rs1, imm12 } => put(r, rd, r[rs1.index()] ^ imm12 as u64),
        Andi { rd, rs1, imm12 } => put(r, rd, r[rs1.index()] & imm12 as u64),
        Add { rd, rs1, rs2 } => put(r, rd, r[rs1.index()].wrapping_add(r[rs2.index()])),
        Sub { rd, rs1, rs2 } => put(r, rd, r[rs1.index()].wrapping_sub(r[rs2.index()])),
        Xor { rd, rs1, rs2 } => put(r, rd, r[rs1.index()] ^ r[rs2.index()]),
        Or { rd, rs1, rs2 } => put(r, rd, r[rs1.index()] | r[rs2.index()]),
        And { rd, rs1, rs2 } => put(r, rd, r[rs1.index()] & r[rs2.index()]),
        Beq { rs1, rs2, sbimm12 } | Bne { rs1, rs2, sbimm12 } => {
            let equal = r[rs1.index()] == r[rs2.index()];
            let taken = matches!(prog[at], Beq { .. }) == equal;
            if taken {
                next = (at as i64 + sbimm12 / 4) as usize;
            }
        }
        ref other => panic!("instruction outside the litmus subset: {other:?}"),
    }
    ip[t] = next;
}
