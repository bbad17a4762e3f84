//! A brute-force oracle for the explorer.
//!
//! Executions are enumerated the obvious way: run each thread by itself
//! to find its memory-operation skeleton, then try every reads-from
//! assignment and every per-address coherence permutation, replay to
//! confirm the skeleton still holds, and keep what the axioms accept.
//! Thread semantics here are written directly over the instruction list
//! rather than through the shared machine interface, so this route and
//! the explorer only share the axioms.
//!
//! The oracle refuses tests whose memory-event skeleton or store values
//! depend on loaded values; the explorer handles those, this
//! cross-check does not.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use rvsem_core::inst::Instruction;
use rvsem_core::xword::MachineInt;

use crate::axioms::check_consistent;
use crate::event::{DepKind, EventId, ExecutionGraph};
use crate::litmus::LitmusTest;

const MAX_EVENTS: usize = 12;
const MAX_COMBINATIONS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Read { addr: u64 },
    Write { addr: u64, value: u32 },
    Fence { pred: MachineInt, succ: MachineInt },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct ThreadTrace {
    ops: Vec<Op>,
    /// Dependency edges between op ordinals of this thread.
    deps: BTreeSet<(usize, usize, DepKind)>,
}

/// One thread, straight-line interpretation. `load` maps an op ordinal
/// and address to the value the load observes.
fn run_thread(
    test: &LitmusTest,
    t: usize,
    load: &mut dyn FnMut(usize, u64) -> u32,
) -> Result<ThreadTrace, String> {
    let prog = &test.programs[t];
    let mut regs = [0u64; 32];
    for r in 1..32u8 {
        regs[r as usize] = test.reg_init(t, r);
    }
    let mut regdeps: [BTreeSet<usize>; 32] = std::array::from_fn(|_| BTreeSet::new());
    let mut ctrl: BTreeSet<usize> = BTreeSet::new();
    let mut ops: Vec<Op> = Vec::new();
    let mut deps = BTreeSet::new();
    let mut ip = 0usize;
    let mut steps = 0u32;
    while ip < prog.len() {
        steps += 1;
        if steps > 10_000 {
            return Err(format!("thread {t} did not terminate"));
        }
        use Instruction::*;
        let mut next = ip + 1;
        match prog[ip] {
            Lw { rd, rs1, oimm12 } => {
                let addr = regs[rs1.index()].wrapping_add(oimm12 as u64);
                let ord = ops.len();
                for &s in &regdeps[rs1.index()] {
                    deps.insert((s, ord, DepKind::Addr));
                }
                let v = load(ord, addr);
                ops.push(Op::Read { addr });
                if rd.index() != 0 {
                    regs[rd.index()] = v as i32 as i64 as u64;
                    regdeps[rd.index()] = BTreeSet::from([ord]);
                }
            }
            Sw { rs1, rs2, simm12 } => {
                let addr = regs[rs1.index()].wrapping_add(simm12 as u64);
                let ord = ops.len();
                for &s in &regdeps[rs1.index()] {
                    deps.insert((s, ord, DepKind::Addr));
                }
                for &s in &regdeps[rs2.index()] {
                    deps.insert((s, ord, DepKind::Data));
                }
                for &s in &ctrl {
                    deps.insert((s, ord, DepKind::Ctrl));
                }
                ops.push(Op::Write { addr, value: regs[rs2.index()] as u32 });
            }
            Fence { pred, succ } => ops.push(Op::Fence { pred, succ }),
            Addi { rd, rs1, imm12 }
            | Ori { rd, rs1, imm12 }
            | Xori { rd, rs1, imm12 }
            | Andi { rd, rs1, imm12 } => {
                let a = regs[rs1.index()];
                let b = imm12 as u64;
                let v = match prog[ip] {
                    Addi { .. } => a.wrapping_add(b),
                    Ori { .. } => a | b,
                    Xori { .. } => a ^ b,
                    _ => a & b,
                };
                if rd.index() != 0 {
                    regs[rd.index()] = v;
                    regdeps[rd.index()] = regdeps[rs1.index()].clone();
                }
            }
            Add { rd, rs1, rs2 }
            | Sub { rd, rs1, rs2 }
            | Xor { rd, rs1, rs2 }
            | Or { rd, rs1, rs2 }
            | And { rd, rs1, rs2 } => {
                let a = regs[rs1.index()];
                let b = regs[rs2.index()];
                let v = match prog[ip] {
                    Add { .. } => a.wrapping_add(b),
                    Sub { .. } => a.wrapping_sub(b),
                    Xor { .. } => a ^ b,
                    Or { .. } => a | b,
                    _ => a & b,
                };
                if rd.index() != 0 {
                    regs[rd.index()] = v;
                    let mut feeds = regdeps[rs1.index()].clone();
                    feeds.extend(regdeps[rs2.index()].iter().copied());
                    regdeps[rd.index()] = feeds;
                }
            }
            Beq { rs1, rs2, sbimm12 } | Bne { rs1, rs2, sbimm12 } => {
                ctrl.extend(regdeps[rs1.index()].iter().copied());
                ctrl.extend(regdeps[rs2.index()].iter().copied());
                let equal = regs[rs1.index()] == regs[rs2.index()];
                let taken = matches!(prog[ip], Beq { .. }) == equal;
                if taken {
                    let target = ip as i64 + sbimm12 / 4;
                    if target < 0 || target as usize > prog.len() {
                        return Err(format!("thread {t} branched out of its program"));
                    }
                    next = target as usize;
                }
            }
            ref other => return Err(format!("instruction outside the litmus subset: {other:?}")),
        }
        ip = next;
    }
    Ok(ThreadTrace { ops, deps })
}

/// Every index combination over slots of the given sizes; one empty
/// combination when there are no slots.
fn index_product(lens: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in lens {
        let mut next = Vec::with_capacity(out.len() * n);
        for combo in &out {
            for i in 0..n {
                let mut c = combo.clone();
                c.push(i);
                next.push(c);
            }
        }
        out = next;
    }
    out
}

/// All consistent executions of `test`, found without the explorer.
pub fn enumerate_bruteforce(test: &LitmusTest) -> Result<Vec<ExecutionGraph>, String> {
    let init = test.init_mem_by_addr();

    // Probe each thread under two memory valuations. Anything beyond the
    // observed load values (op kinds, addresses, store values, dependency
    // edges) must agree, or the test is out of this oracle's scope.
    let probe = |salt: u32| -> Result<Vec<ThreadTrace>, String> {
        (0..test.nthreads())
            .map(|t| {
                run_thread(test, t, &mut |_, addr| init.get(&addr).copied().unwrap_or(0) ^ salt)
            })
            .collect()
    };
    let skeleton = probe(0)?;
    if skeleton != probe(0x55aa_55aa)? {
        return Err("beyond the oracle's scope: memory events depend on loaded values".into());
    }

    let mut reads: Vec<(EventId, u64)> = Vec::new();
    let mut write_info: BTreeMap<EventId, (u64, u32)> = BTreeMap::new();
    let mut code_writes: BTreeMap<u64, Vec<EventId>> = BTreeMap::new();
    for (&addr, &v) in &init {
        write_info.insert(EventId::Init { addr }, (addr, v));
        code_writes.insert(addr, Vec::new());
    }
    let mut nevents = 0usize;
    for (t, trace) in skeleton.iter().enumerate() {
        for (i, op) in trace.ops.iter().enumerate() {
            let id = EventId::Code { thread: t, index: i };
            match *op {
                Op::Read { addr } => {
                    if !init.contains_key(&addr) {
                        return Err(format!("load of unmapped address {addr:#x}"));
                    }
                    reads.push((id, addr));
                    nevents += 1;
                }
                Op::Write { addr, value } => {
                    let Some(list) = code_writes.get_mut(&addr) else {
                        return Err(format!("store to unmapped address {addr:#x}"));
                    };
                    list.push(id);
                    write_info.insert(id, (addr, value));
                    nevents += 1;
                }
                Op::Fence { .. } => {}
            }
        }
    }
    if nevents > MAX_EVENTS {
        return Err(format!(
            "beyond the oracle's scope: {nevents} memory events, the cap is {MAX_EVENTS}"
        ));
    }

    // Candidate writes per read, and coherence permutations per address.
    let rf_candidates: Vec<Vec<EventId>> = reads
        .iter()
        .map(|&(_, addr)| {
            let mut c = vec![EventId::Init { addr }];
            c.extend(code_writes[&addr].iter().copied());
            c
        })
        .collect();
    let co_addrs: Vec<u64> = code_writes.keys().copied().collect();
    let co_perms: Vec<Vec<Vec<EventId>>> = co_addrs
        .iter()
        .map(|addr| {
            let ws = &code_writes[addr];
            ws.iter().copied().permutations(ws.len()).collect()
        })
        .collect();

    let mut combos = 1u64;
    for c in rf_candidates.iter().map(Vec::len).chain(co_perms.iter().map(Vec::len)) {
        combos = combos.saturating_mul(c as u64);
        if combos > MAX_COMBINATIONS {
            return Err("beyond the oracle's scope: combination count too large".into());
        }
    }

    let mut found: BTreeMap<String, ExecutionGraph> = BTreeMap::new();
    for rf_idx in index_product(&rf_candidates.iter().map(Vec::len).collect::<Vec<_>>()) {
        let rf: BTreeMap<EventId, EventId> = reads
            .iter()
            .enumerate()
            .map(|(k, &(r, _))| (r, rf_candidates[k][rf_idx[k]]))
            .collect();

        // Replay under this assignment; divergence from the skeleton
        // means loaded values steer execution after all.
        let mut diverged = false;
        for (t, expected) in skeleton.iter().enumerate() {
            let got = run_thread(test, t, &mut |ord, addr| {
                let r = EventId::Code { thread: t, index: ord };
                match rf.get(&r) {
                    Some(w) => write_info[w].1,
                    None => init.get(&addr).copied().unwrap_or(0),
                }
            })?;
            if got != *expected {
                diverged = true;
                break;
            }
        }
        if diverged {
            return Err("beyond the oracle's scope: execution depends on loaded values".into());
        }

        for co_idx in index_product(&co_perms.iter().map(Vec::len).collect::<Vec<_>>()) {
            let mut g = ExecutionGraph::with_init(&init);
            for (t, trace) in skeleton.iter().enumerate() {
                for (i, op) in trace.ops.iter().enumerate() {
                    let id = EventId::Code { thread: t, index: i };
                    match *op {
                        Op::Read { addr } => g.add_read(id, t, i, addr),
                        Op::Write { .. } => {} // placed below in coherence order
                        Op::Fence { pred, succ } => g.add_fence(id, t, i, pred, succ),
                    }
                }
                for &(a, b, kind) in &trace.deps {
                    g.deps.insert((
                        EventId::Code { thread: t, index: a },
                        EventId::Code { thread: t, index: b },
                        kind,
                    ));
                }
            }
            for (ai, &addr) in co_addrs.iter().enumerate() {
                let perm = &co_perms[ai][co_idx[ai]];
                for (pos, &w) in perm.iter().enumerate() {
                    let EventId::Code { thread, index } = w else { unreachable!() };
                    g.add_write(w, thread, index, addr, write_info[&w].1, pos + 1);
                }
            }
            for (&r, &w) in &rf {
                g.set_rf(r, w);
            }
            if check_consistent(&g) {
                found.insert(g.outcome_key(), g);
            }
        }
    }
    Ok(found.into_values().collect())
}
