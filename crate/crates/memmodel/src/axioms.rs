//! The embedded consistency check.
//!
//! Two axioms decide whether an execution graph is allowed:
//!
//! 1. coherence: per address, `po-loc ∪ rf ∪ co ∪ fr` is acyclic;
//! 2. global: `ppo ∪ rfe ∪ co ∪ fr` is acyclic, where ppo collects fence
//!    orderings, the static dependency edges, and same-address read→write
//!    and write→write program order.
//!
//! `fr` is derived as `rf⁻¹ ; co`. Internal reads-from is excluded from
//! the global axiom (store-to-load forwarding), external reads-from is
//! not. This is the word-sized load/store/fence fragment of the RISC-V
//! weak memory model; it is cross-checked against a brute-force oracle
//! and published outcomes for the shipped test corpus.

use std::collections::BTreeMap;

use crate::event::{EventId, EventKind, ExecutionGraph, MemEvent};

const FENCE_W: i64 = 1;
const FENCE_R: i64 = 2;

pub fn check_consistent(g: &ExecutionGraph) -> bool {
    sc_per_location(g) && global_order(g)
}

fn accesses_class(kind: EventKind) -> Option<i64> {
    match kind {
        EventKind::Read => Some(FENCE_R),
        EventKind::Write { .. } => Some(FENCE_W),
        EventKind::Fence { .. } => None,
    }
}

/// All from-read edges: each read precedes every write coherence-after
/// its source.
fn fr_edges(g: &ExecutionGraph) -> Vec<(EventId, EventId)> {
    let mut out = Vec::new();
    for (&r, &w) in &g.rf {
        let addr = g.events[&r].addr.expect("reads have addresses");
        let pos = g.co_position(addr, w);
        for &later in &g.writes_to(addr)[pos + 1..] {
            out.push((r, later));
        }
    }
    out
}

/// Adjacent coherence edges; transitively they generate the full order.
fn co_edges(g: &ExecutionGraph) -> Vec<(EventId, EventId)> {
    let mut out = Vec::new();
    for order in g.co.values() {
        for pair in order.windows(2) {
            out.push((pair[0], pair[1]));
        }
    }
    out
}

fn sc_per_location(g: &ExecutionGraph) -> bool {
    let mut edges = Vec::new();
    for (&addr, order) in &g.co {
        let on_addr: Vec<&MemEvent> =
            g.events.values().filter(|e| e.addr == Some(addr)).collect();
        for a in &on_addr {
            for b in &on_addr {
                if a.thread == b.thread && a.thread != usize::MAX && a.po_index < b.po_index {
                    edges.push((a.id, b.id));
                }
            }
        }
        for pair in order.windows(2) {
            edges.push((pair[0], pair[1]));
        }
        for (&r, &w) in &g.rf {
            if g.events[&r].addr == Some(addr) {
                edges.push((w, r));
                let pos = g.co_position(addr, w);
                for &later in &order[pos + 1..] {
                    edges.push((r, later));
                }
            }
        }
    }
    acyclic(g, &edges)
}

/// Preserved program order: fence-induced edges, dependency edges, and
/// same-address read→write / write→write pairs.
fn ppo_edges(g: &ExecutionGraph) -> Vec<(EventId, EventId)> {
    let mut edges: Vec<(EventId, EventId)> = g.deps.iter().map(|&(a, b, _)| (a, b)).collect();
    for t in g.threads() {
        let evs = g.thread_events(t);
        for (i, f) in evs.iter().enumerate() {
            if let EventKind::Fence { pred, succ } = f.kind {
                for a in &evs[..i] {
                    let Some(class) = accesses_class(a.kind) else { continue };
                    if pred & class == 0 {
                        continue;
                    }
                    for b in &evs[i + 1..] {
                        let Some(class) = accesses_class(b.kind) else { continue };
                        if succ & class != 0 {
                            edges.push((a.id, b.id));
                        }
                    }
                }
            }
        }
        for (i, a) in evs.iter().enumerate() {
            for b in &evs[i + 1..] {
                if a.addr.is_some()
                    && a.addr == b.addr
                    && matches!(b.kind, EventKind::Write { .. })
                {
                    edges.push((a.id, b.id));
                }
            }
        }
    }
    edges
}

fn global_order(g: &ExecutionGraph) -> bool {
    let mut edges = ppo_edges(g);
    for (&r, &w) in &g.rf {
        let external = w.is_init() || g.events[&w].thread != g.events[&r].thread;
        if external {
            edges.push((w, r));
        }
    }
    edges.extend(co_edges(g));
    edges.extend(fr_edges(g));
    acyclic(g, &edges)
}

fn acyclic(g: &ExecutionGraph, edges: &[(EventId, EventId)]) -> bool {
    let mut adj: BTreeMap<EventId, Vec<EventId>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
    }
    // 0 unvisited, 1 on stack, 2 done.
    let mut color: BTreeMap<EventId, u8> = g.events.keys().map(|&id| (id, 0u8)).collect();
    fn visit(
        id: EventId,
        adj: &BTreeMap<EventId, Vec<EventId>>,
        color: &mut BTreeMap<EventId, u8>,
    ) -> bool {
        match color[&id] {
            1 => return false,
            2 => return true,
            _ => {}
        }
        color.insert(id, 1);
        if let Some(next) = adj.get(&id) {
            for &n in next {
                if !visit(n, adj, color) {
                    return false;
                }
            }
        }
        color.insert(id, 2);
        true
    }
    g.events.keys().all(|&id| visit(id, &adj, &mut color))
}
