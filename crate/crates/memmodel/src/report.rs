//! Postcondition evaluation over the explored executions.
//!
//! Each complete graph is replayed once more with every read pinned to
//! its reads-from source, giving the final register file of every
//! thread. The postcondition's registers are rendered into one state
//! line per distinct outcome, and the test verdict is whether any
//! execution satisfies the condition.

use std::collections::BTreeSet;
use std::fmt;

use rvsem_core::decode::{Decoder, ExtensionSet};
use rvsem_core::machine::{hard_failure, PrimResult, StepOutcome};
use rvsem_core::xword::MachineInt;

use crate::event::{EventId, EventKind, ExecutionGraph};
use crate::litmus::LitmusTest;
use crate::thread::{step_thread, MemSide, ThreadCore};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub name: String,
    /// Whether some execution satisfies the postcondition.
    pub witnessed: bool,
    /// Distinct final states over the postcondition's registers, sorted.
    pub outcomes: Vec<String>,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Test {} {}", self.name, if self.witnessed { "Allowed" } else { "Forbidden" })?;
        writeln!(f, "States {}", self.outcomes.len())?;
        for line in &self.outcomes {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Replays every thread against the pinned graph and returns the final
/// register file of each.
pub fn final_registers(
    test: &LitmusTest,
    graph: &ExecutionGraph,
) -> Result<Vec<[u64; 32]>, String> {
    let dec = Decoder::new(ExtensionSet::rv64i());
    let mut out = Vec::with_capacity(test.nthreads());
    for t in 0..test.nthreads() {
        let mut core = ThreadCore::new(test, t);
        let mut side = Readback { graph, emitted: 0, problem: None };
        let mut steps = 0u32;
        while !core.done() {
            steps += 1;
            if steps > 10_000 {
                return Err(format!("thread {t} did not terminate during readback"));
            }
            let outcome = step_thread(&mut core, &mut side, &dec);
            if let Some(p) = side.problem.take() {
                return Err(format!("thread {t}: {p}"));
            }
            match outcome {
                StepOutcome::Completed => {}
                other => return Err(format!("thread {t} failed during readback: {other:?}")),
            }
        }
        let expected = graph.thread_events(t).len();
        if side.emitted != expected {
            return Err(format!(
                "thread {t} replayed {} events, the graph has {expected}",
                side.emitted
            ));
        }
        let mut regs = [0u64; 32];
        for (r, slot) in regs.iter_mut().enumerate() {
            *slot = core.reg(r as u8);
        }
        out.push(regs);
    }
    Ok(out)
}

/// The `0:x8=0; 1:x8=1;` state line for one execution, covering the
/// registers the postcondition mentions.
pub fn valuation(test: &LitmusTest, graph: &ExecutionGraph) -> Result<String, String> {
    let regs = final_registers(test, graph)?;
    Ok(render_state(&test.postcondition.registers(), &regs))
}

fn render_state(which: &[(usize, u8)], regs: &[[u64; 32]]) -> String {
    which
        .iter()
        .map(|&(t, r)| format!("{t}:x{r}={};", regs[t][r as usize]))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn evaluate_postcondition(
    test: &LitmusTest,
    graphs: &[ExecutionGraph],
) -> Result<Report, String> {
    let which = test.postcondition.registers();
    let mut witnessed = false;
    let mut outcomes = BTreeSet::new();
    for graph in graphs {
        let regs = final_registers(test, graph)?;
        witnessed |= test.postcondition.eval(&|t, r| regs[t][r as usize]);
        outcomes.insert(render_state(&which, &regs));
    }
    Ok(Report { name: test.name.clone(), witnessed, outcomes: outcomes.into_iter().collect() })
}

/// Memory side that serves loads from the graph's reads-from edges and
/// checks stores and fences against the pinned events.
struct Readback<'g> {
    graph: &'g ExecutionGraph,
    emitted: usize,
    problem: Option<String>,
}

impl Readback<'_> {
    fn mismatch<T>(&mut self, msg: String) -> PrimResult<T> {
        self.problem = Some(msg);
        hard_failure("readback-mismatch", "")
    }
}

impl MemSide for Readback<'_> {
    fn load(&mut self, thread: usize, addr: u64) -> PrimResult<u32> {
        let id = EventId::Code { thread, index: self.emitted };
        self.emitted += 1;
        let Some(ev) = self.graph.events.get(&id) else {
            return self.mismatch(format!("{id:?} is not in the graph"));
        };
        if ev.kind != EventKind::Read || ev.addr != Some(addr) {
            return self.mismatch(format!("{id:?} is not a read of {addr:#x}"));
        }
        match self.graph.rf.get(&id) {
            Some(&w) => Ok(self.graph.write_value(w)),
            None => self.mismatch(format!("{id:?} has no reads-from source")),
        }
    }

    fn store(&mut self, thread: usize, addr: u64, value: u32) -> PrimResult<()> {
        let id = EventId::Code { thread, index: self.emitted };
        self.emitted += 1;
        let Some(ev) = self.graph.events.get(&id) else {
            return self.mismatch(format!("{id:?} is not in the graph"));
        };
        if ev.kind != (EventKind::Write { value }) || ev.addr != Some(addr) {
            return self.mismatch(format!("{id:?} is not a write of {value:#x} to {addr:#x}"));
        }
        Ok(())
    }

    fn fence(&mut self, thread: usize, pred: MachineInt, succ: MachineInt) {
        let id = EventId::Code { thread, index: self.emitted };
        self.emitted += 1;
        match self.graph.events.get(&id) {
            Some(ev) if ev.kind == (EventKind::Fence { pred, succ }) => {}
            _ => self.problem = Some(format!("{id:?} is not the expected fence")),
        }
    }
}
