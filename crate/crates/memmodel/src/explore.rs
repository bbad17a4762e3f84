//! Enumeration of the consistent executions of a litmus test.
//!
//! One execution is built at a time. Threads run sequentially against an
//! event graph: events already present from earlier decisions replay as
//! pinned, and the first new event is the frontier where the next choice
//! is made. Every alternative choice (a different reads-from source for a
//! new read, a different coherence slot for a new write, or the chance
//! for an already-executed read to see a brand-new write) is pushed on a
//! worklist as its own partial graph. Each choice is filtered through the
//! consistency axioms immediately, so dead branches stop early and every
//! completed graph is consistent by construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rvsem_core::decode::{Decoder, ExtensionSet};
use rvsem_core::machine::{hard_failure, PrimResult, StepOutcome};
use rvsem_core::xword::MachineInt;

use crate::axioms::check_consistent;
use crate::event::{EventId, EventKind, ExecutionGraph};
use crate::litmus::LitmusTest;
use crate::thread::{static_deps, step_thread, MemSide, ThreadCore, ThreadState};

#[derive(Debug, Clone)]
pub struct ExploreConfig {
    /// How many partial graphs may be taken off the worklist.
    pub max_partials: usize,
    /// Step budget per thread per replay.
    pub max_steps: u64,
}

impl Default for ExploreConfig {
    fn default() -> ExploreConfig {
        ExploreConfig { max_partials: 100_000, max_steps: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExploreError {
    /// The worklist budget ran out before the space was covered.
    Budget { explored: usize },
    /// The test itself is broken: a thread trapped, left its code window
    /// or touched memory outside the declared locations.
    Setup(String),
}

impl fmt::Display for ExploreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExploreError::Budget { explored } => {
                write!(f, "exploration budget exhausted after {explored} partial graphs")
            }
            ExploreError::Setup(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for ExploreError {}

/// All consistent executions of `test`, deduplicated by their
/// communication relations.
pub fn explore(test: &LitmusTest) -> Result<Vec<ExecutionGraph>, ExploreError> {
    explore_with(test, &ExploreConfig::default())
}

pub fn explore_with(
    test: &LitmusTest,
    cfg: &ExploreConfig,
) -> Result<Vec<ExecutionGraph>, ExploreError> {
    let mut stack = vec![Partial {
        graph: ExecutionGraph::with_init(&test.init_mem_by_addr()),
        revisit: BTreeSet::new(),
        order: Vec::new(),
    }];
    let mut seen = BTreeSet::new();
    let mut complete: BTreeMap<String, ExecutionGraph> = BTreeMap::new();
    let mut pops = 0usize;
    while let Some(p) = stack.pop() {
        pops += 1;
        if pops > cfg.max_partials {
            return Err(ExploreError::Budget { explored: pops - 1 });
        }
        if !seen.insert(format!("{}|{:?}", p.graph.partial_key(&p.revisit), p.order)) {
            continue;
        }
        match replay(test, p, cfg, &mut stack) {
            ReplayEnd::Complete(g) => {
                debug_assert!(check_consistent(&g), "completed graph must be consistent");
                complete.insert(g.outcome_key(), g);
            }
            ReplayEnd::Dropped => {}
            ReplayEnd::Error(msg) => return Err(ExploreError::Setup(msg)),
        }
    }
    Ok(complete.into_values().collect())
}

/// A graph under construction, the reads a later write may still
/// revisit, and the order events were inserted in. The order is what a
/// revisit cuts against: everything inserted after the revisited read
/// is provisional unless the new write causally needs it.
struct Partial {
    graph: ExecutionGraph,
    revisit: BTreeSet<EventId>,
    order: Vec<EventId>,
}

enum ReplayEnd {
    Complete(ExecutionGraph),
    /// Dead end or replay mismatch; siblings cover everything reachable.
    Dropped,
    Error(String),
}

/// Runs every thread of `test` over the partial graph. Alternative
/// decisions discovered along the way are pushed onto `stack` whether or
/// not this particular branch survives.
fn replay(
    test: &LitmusTest,
    partial: Partial,
    cfg: &ExploreConfig,
    stack: &mut Vec<Partial>,
) -> ReplayEnd {
    let mut engine = Engine {
        graph: partial.graph,
        revisit: partial.revisit,
        order: partial.order,
        siblings: Vec::new(),
        planned: None,
        dropped: false,
    };
    let end = run_threads(test, cfg, &mut engine);
    stack.append(&mut engine.siblings);
    end
}

fn run_threads(test: &LitmusTest, cfg: &ExploreConfig, engine: &mut Engine) -> ReplayEnd {
    let dec = Decoder::new(ExtensionSet::rv64i());
    let mut executed = 0usize;
    for t in 0..test.nthreads() {
        let mut core = ThreadCore::new(test, t);
        let mut state = ThreadState::new();
        let mut steps = 0u64;
        while !core.done() {
            steps += 1;
            if steps > cfg.max_steps {
                return ReplayEnd::Error(format!(
                    "thread {t} ran past {} steps; litmus programs must terminate",
                    cfg.max_steps
                ));
            }
            let Some(inst) = core.fetch_decode(&dec) else {
                return ReplayEnd::Error(format!("thread {t} jumped outside its program"));
            };
            let plan = static_deps(&mut state, t, &inst);
            engine.graph.deps.extend(plan.edges);
            engine.planned = plan.event;
            let out = step_thread(&mut core, engine, &dec);
            if engine.dropped {
                return ReplayEnd::Dropped;
            }
            match out {
                StepOutcome::Completed => {}
                StepOutcome::EarlyExit => {
                    return ReplayEnd::Error(format!("thread {t} took a trap"));
                }
                StepOutcome::HardFailure(f) => {
                    return ReplayEnd::Error(format!("thread {t}: {f}"));
                }
            }
        }
        executed += state.emitted;
    }
    let present = engine.graph.events.values().filter(|e| !e.id.is_init()).count();
    if present != executed {
        // Pinned events the replay never reached again: the prefix that
        // created them is gone, so the graph is stale.
        return ReplayEnd::Dropped;
    }
    ReplayEnd::Complete(std::mem::take(&mut engine.graph))
}

struct Engine {
    graph: ExecutionGraph,
    revisit: BTreeSet<EventId>,
    order: Vec<EventId>,
    siblings: Vec<Partial>,
    /// Event id the instruction being stepped will emit, set by the
    /// driver just before the step.
    planned: Option<EventId>,
    dropped: bool,
}

impl Engine {
    fn drop_branch<T>(&mut self, code: &'static str) -> PrimResult<T> {
        self.dropped = true;
        hard_failure(code, "")
    }

    /// Branches in which an already-executed read of `addr` in the
    /// revisit set reads from the new write instead. Everything inserted
    /// after that read is discarded and re-executes afresh, except the
    /// causal prefix the new write is built from; the write then tries
    /// every coherence slot of the restricted graph.
    fn spawn_revisits(&mut self, id: EventId, thread: usize, po: usize, addr: u64, value: u32) {
        let readers: Vec<EventId> = self
            .revisit
            .iter()
            .copied()
            .filter(|r| {
                self.graph
                    .events
                    .get(r)
                    .is_some_and(|e| e.kind == EventKind::Read && e.addr == Some(addr))
            })
            .collect();
        for r in readers {
            let prefix = self.causal_prefix(id);
            if prefix.contains(&r) {
                // The write descends from the read; letting the read see
                // it would be circular.
                continue;
            }
            let pos_r =
                self.order.iter().position(|&e| e == r).expect("revisitable reads are ordered");
            let discard: BTreeSet<EventId> =
                self.order[pos_r + 1..].iter().copied().filter(|e| !prefix.contains(e)).collect();
            let keep: BTreeSet<EventId> = self
                .graph
                .events
                .keys()
                .copied()
                .filter(|e| !e.is_init() && !discard.contains(e))
                .collect();
            let base = self.graph.restrict(&keep);
            // The restriction drops the new write's own dependency edges
            // (it is not a kept event); splice them back so consistency
            // checks before this thread replays still see them.
            let incoming: Vec<_> = self
                .graph
                .deps
                .iter()
                .copied()
                .filter(|&(src, dst, _)| dst == id && keep.contains(&src))
                .collect();
            // The read is re-inserted after the write it now reads from.
            let mut order: Vec<EventId> = self.order[..pos_r].to_vec();
            order.extend(self.order[pos_r + 1..].iter().copied().filter(|e| prefix.contains(e)));
            order.push(id);
            order.push(r);
            let slots = base.writes_to(addr).len();
            for pos in 1..=slots {
                let mut g = base.clone();
                g.add_write(id, thread, po, addr, value, pos);
                g.deps.extend(incoming.iter().copied());
                g.set_rf(r, id);
                if check_consistent(&g) {
                    let revisit = self.revisit.intersection(&keep).copied().collect();
                    self.siblings.push(Partial { graph: g, revisit, order: order.clone() });
                }
            }
        }
    }

    /// Events the new write `id` is causally built from: the sources of
    /// its dependency edges, closed under dependency sources and
    /// reads-from sources.
    fn causal_prefix(&self, id: EventId) -> BTreeSet<EventId> {
        let mut out = BTreeSet::new();
        let mut work: Vec<EventId> = self
            .graph
            .deps
            .iter()
            .filter(|&&(_, dst, _)| dst == id)
            .map(|&(src, _, _)| src)
            .collect();
        while let Some(n) = work.pop() {
            if !out.insert(n) {
                continue;
            }
            for &(src, dst, _) in &self.graph.deps {
                if dst == n {
                    work.push(src);
                }
            }
            if let Some(&w) = self.graph.rf.get(&n) {
                work.push(w);
            }
        }
        out
    }
}

impl MemSide for Engine {
    fn load(&mut self, thread: usize, addr: u64) -> PrimResult<u32> {
        let id = self.planned.take().expect("every load is planned");
        if let Some(ev) = self.graph.events.get(&id) {
            if ev.kind != EventKind::Read || ev.addr != Some(addr) {
                return self.drop_branch("replay-mismatch");
            }
            let Some(&w) = self.graph.rf.get(&id) else {
                return self.drop_branch("replay-mismatch");
            };
            return Ok(self.graph.write_value(w));
        }
        if !self.graph.co.contains_key(&addr) {
            return hard_failure("bad-address", format!("load of unmapped {addr:#x}"));
        }
        let EventId::Code { index, .. } = id else { unreachable!("code events only") };
        self.graph.add_read(id, thread, index, addr);
        self.revisit.insert(id);
        self.order.push(id);
        let options = self.graph.writes_to(addr).to_vec();
        let mut consistent = Vec::new();
        for w in options {
            self.graph.set_rf(id, w);
            if check_consistent(&self.graph) {
                consistent.push(w);
            }
        }
        let Some((&current, rest)) = consistent.split_first() else {
            self.graph.rf.remove(&id);
            return self.drop_branch("pruned");
        };
        for &w in rest {
            let mut g = self.graph.clone();
            g.set_rf(id, w);
            self.siblings.push(Partial {
                graph: g,
                revisit: self.revisit.clone(),
                order: self.order.clone(),
            });
        }
        self.graph.set_rf(id, current);
        Ok(self.graph.write_value(current))
    }

    fn store(&mut self, thread: usize, addr: u64, value: u32) -> PrimResult<()> {
        let id = self.planned.take().expect("every store is planned");
        if let Some(ev) = self.graph.events.get(&id) {
            if ev.kind != (EventKind::Write { value }) || ev.addr != Some(addr) {
                return self.drop_branch("replay-mismatch");
            }
            return Ok(());
        }
        if !self.graph.co.contains_key(&addr) {
            return hard_failure("bad-address", format!("store to unmapped {addr:#x}"));
        }
        let EventId::Code { index, .. } = id else { unreachable!("code events only") };

        self.spawn_revisits(id, thread, index, addr, value);
        self.order.push(id);

        let slots = self.graph.writes_to(addr).len();
        let mut current: Option<ExecutionGraph> = None;
        for pos in 1..=slots {
            let mut g = self.graph.clone();
            g.add_write(id, thread, index, addr, value, pos);
            if !check_consistent(&g) {
                continue;
            }
            match current {
                None => current = Some(g),
                Some(_) => self.siblings.push(Partial {
                    graph: g,
                    revisit: self.revisit.clone(),
                    order: self.order.clone(),
                }),
            }
        }
        match current {
            Some(g) => {
                self.graph = g;
                Ok(())
            }
            None => self.drop_branch("pruned"),
        }
    }

    fn fence(&mut self, thread: usize, pred: MachineInt, succ: MachineInt) {
        let id = self.planned.take().expect("every fence is planned");
        if let Some(ev) = self.graph.events.get(&id) {
            if ev.kind != (EventKind::Fence { pred, succ }) {
                self.dropped = true;
            }
            return;
        }
        let EventId::Code { index, .. } = id else { unreachable!("code events only") };
        self.graph.add_fence(id, thread, index, pred, succ);
        self.order.push(id);
        // A fence adds order edges without adding choices; if they close
        // a cycle now, no extension of this graph can reopen it.
        if !check_consistent(&self.graph) {
            self.dropped = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::litmus::parse_litmus;

    const SB: &str = "\
RISCV SB
{
0:x6=x; 0:x7=y;
1:x6=y; 1:x7=x;
}
 P0           | P1           ;
 ori x5,x0,1  | ori x5,x0,1  ;
 sw x5,0(x6)  | sw x5,0(x6)  ;
 lw x8,0(x7)  | lw x8,0(x7)  ;
exists (0:x8=0 /\\ 1:x8=0)
";

    const SB_FENCED: &str = "\
RISCV SB+fences
{
0:x6=x; 0:x7=y;
1:x6=y; 1:x7=x;
}
 P0           | P1           ;
 ori x5,x0,1  | ori x5,x0,1  ;
 sw x5,0(x6)  | sw x5,0(x6)  ;
 fence rw,rw  | fence rw,rw  ;
 lw x8,0(x7)  | lw x8,0(x7)  ;
exists (0:x8=0 /\\ 1:x8=0)
";

    const LB: &str = "\
RISCV LB
{
0:x6=x; 0:x7=y;
1:x6=y; 1:x7=x;
}
 P0           | P1           ;
 lw x5,0(x6)  | lw x5,0(x6)  ;
 ori x8,x0,1  | ori x8,x0,1  ;
 sw x8,0(x7)  | sw x8,0(x7)  ;
exists (0:x5=1 /\\ 1:x5=1)
";

    const CORR: &str = "\
RISCV CoRR
{
0:x6=x;
1:x6=x;
}
 P0           | P1           ;
 ori x5,x0,1  | lw x5,0(x6)  ;
 sw x5,0(x6)  | lw x7,0(x6)  ;
exists (1:x5=1 /\\ 1:x7=0)
";

    fn read_pair(g: &ExecutionGraph, a: EventId, b: EventId) -> (u32, u32) {
        (g.read_value(a), g.read_value(b))
    }

    #[test]
    fn store_buffering_has_all_four_executions() {
        let test = parse_litmus(SB).unwrap();
        let graphs = explore(&test).unwrap();
        let r0 = EventId::Code { thread: 0, index: 1 };
        let r1 = EventId::Code { thread: 1, index: 1 };
        let outcomes: BTreeSet<(u32, u32)> =
            graphs.iter().map(|g| read_pair(g, r0, r1)).collect();
        assert_eq!(graphs.len(), 4);
        assert_eq!(outcomes, BTreeSet::from([(0, 0), (0, 1), (1, 0), (1, 1)]));
    }

    #[test]
    fn full_fences_cut_store_buffering_to_three() {
        let test = parse_litmus(SB_FENCED).unwrap();
        let graphs = explore(&test).unwrap();
        let r0 = EventId::Code { thread: 0, index: 2 };
        let r1 = EventId::Code { thread: 1, index: 2 };
        let outcomes: BTreeSet<(u32, u32)> =
            graphs.iter().map(|g| read_pair(g, r0, r1)).collect();
        assert_eq!(outcomes, BTreeSet::from([(0, 1), (1, 0), (1, 1)]));
    }

    #[test]
    fn load_buffering_reaches_the_both_see_one_outcome() {
        let test = parse_litmus(LB).unwrap();
        let graphs = explore(&test).unwrap();
        let r0 = EventId::Code { thread: 0, index: 0 };
        let r1 = EventId::Code { thread: 1, index: 0 };
        let outcomes: BTreeSet<(u32, u32)> =
            graphs.iter().map(|g| read_pair(g, r0, r1)).collect();
        assert_eq!(outcomes, BTreeSet::from([(0, 0), (0, 1), (1, 0), (1, 1)]));
    }

    #[test]
    fn coherent_read_read_has_three_executions() {
        let test = parse_litmus(CORR).unwrap();
        let graphs = explore(&test).unwrap();
        let r1 = EventId::Code { thread: 1, index: 0 };
        let r2 = EventId::Code { thread: 1, index: 1 };
        let outcomes: BTreeSet<(u32, u32)> =
            graphs.iter().map(|g| read_pair(g, r1, r2)).collect();
        // Reading the new value then the stale one is the one coherence
        // forbids.
        assert_eq!(outcomes, BTreeSet::from([(0, 0), (0, 1), (1, 1)]));
    }

    #[test]
    fn the_budget_is_enforced() {
        let test = parse_litmus(SB).unwrap();
        let cfg = ExploreConfig { max_partials: 1, ..ExploreConfig::default() };
        match explore_with(&test, &cfg) {
            Err(ExploreError::Budget { explored: 1 }) => {}
            other => panic!("expected a budget error, got {other:?}"),
        }
    }

    #[test]
    fn completed_graphs_carry_their_dependency_edges() {
        let test = parse_litmus(LB).unwrap();
        let graphs = explore(&test).unwrap();
        // Plain LB has no syntactic dependencies at all.
        assert!(graphs.iter().all(|g| g.deps.is_empty()));
        for g in &graphs {
            assert!(check_consistent(g));
        }
    }
}
