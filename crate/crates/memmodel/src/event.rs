//! Memory events and execution graphs.
//!
//! An execution graph holds the memory events seen so far together with
//! the relations the axioms care about: reads-from, per-address coherence
//! order, and the static dependency edges. Graphs are cheap to clone; the
//! explorer snapshots them freely.

use std::collections::{BTreeMap, BTreeSet};

use rvsem_core::xword::MachineInt;

/// Identity of one memory event. Initial writes are per address and sit
/// outside every thread; code events are numbered per thread in the order
/// the thread emits them (loads, stores and fences share one counter).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventId {
    Init { addr: u64 },
    Code { thread: usize, index: usize },
}

impl EventId {
    pub fn is_init(self) -> bool {
        matches!(self, EventId::Init { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DepKind {
    Addr,
    Data,
    Ctrl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Read,
    Write { value: u32 },
    Fence { pred: MachineInt, succ: MachineInt },
}

/// One memory event. `addr` is `None` only for fences. Read values are not
/// stored; they are determined by the reads-from edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemEvent {
    pub id: EventId,
    pub thread: usize,
    pub po_index: usize,
    pub kind: EventKind,
    pub addr: Option<u64>,
}

pub type DepEdge = (EventId, EventId, DepKind);

#[derive(Debug, Clone, Default)]
pub struct ExecutionGraph {
    pub events: BTreeMap<EventId, MemEvent>,
    /// read -> write, same address.
    pub rf: BTreeMap<EventId, EventId>,
    /// addr -> coherence order over the writes to it, initial write first.
    pub co: BTreeMap<u64, Vec<EventId>>,
    pub deps: BTreeSet<DepEdge>,
}

impl ExecutionGraph {
    /// A graph holding just the initial writes, one per address.
    pub fn with_init(init: &BTreeMap<u64, u32>) -> ExecutionGraph {
        let mut g = ExecutionGraph::default();
        for (&addr, &value) in init {
            let id = EventId::Init { addr };
            g.events.insert(
                id,
                MemEvent {
                    id,
                    thread: usize::MAX,
                    po_index: 0,
                    kind: EventKind::Write { value },
                    addr: Some(addr),
                },
            );
            g.co.insert(addr, vec![id]);
        }
        g
    }

    pub fn add_read(&mut self, id: EventId, thread: usize, po_index: usize, addr: u64) {
        self.events.insert(
            id,
            MemEvent { id, thread, po_index, kind: EventKind::Read, addr: Some(addr) },
        );
    }

    pub fn add_fence(
        &mut self,
        id: EventId,
        thread: usize,
        po_index: usize,
        pred: MachineInt,
        succ: MachineInt,
    ) {
        self.events.insert(
            id,
            MemEvent { id, thread, po_index, kind: EventKind::Fence { pred, succ }, addr: None },
        );
    }

    /// Adds a write and splices it into the coherence order at `pos`
    /// (position 0 is the initial write, so `pos` must be at least 1).
    pub fn add_write(
        &mut self,
        id: EventId,
        thread: usize,
        po_index: usize,
        addr: u64,
        value: u32,
        pos: usize,
    ) {
        assert!(pos >= 1, "the initial write stays coherence-first");
        self.events.insert(
            id,
            MemEvent { id, thread, po_index, kind: EventKind::Write { value }, addr: Some(addr) },
        );
        self.co.get_mut(&addr).expect("address has an init write").insert(pos, id);
    }

    pub fn set_rf(&mut self, read: EventId, write: EventId) {
        self.rf.insert(read, write);
    }

    /// Coherence order over the writes to `addr`, initial write first.
    pub fn writes_to(&self, addr: u64) -> &[EventId] {
        self.co.get(&addr).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn co_position(&self, addr: u64, id: EventId) -> usize {
        self.writes_to(addr).iter().position(|&w| w == id).expect("write is in co")
    }

    pub fn write_value(&self, id: EventId) -> u32 {
        match self.events[&id].kind {
            EventKind::Write { value } => value,
            _ => panic!("{id:?} is not a write"),
        }
    }

    /// The value a read observes through its reads-from edge.
    pub fn read_value(&self, read: EventId) -> u32 {
        self.write_value(self.rf[&read])
    }

    /// A copy of the graph keeping only `keep` (initial writes always
    /// survive). Relations incident to a dropped event are dropped; the
    /// caller is responsible for keeping the rf sources of kept reads.
    pub fn restrict(&self, keep: &BTreeSet<EventId>) -> ExecutionGraph {
        let retained = |id: &EventId| id.is_init() || keep.contains(id);
        let mut g = ExecutionGraph::default();
        for (id, ev) in &self.events {
            if retained(id) {
                g.events.insert(*id, *ev);
            }
        }
        for (r, w) in &self.rf {
            if retained(r) {
                assert!(retained(w), "kept read {r:?} lost its source {w:?}");
                g.rf.insert(*r, *w);
            }
        }
        for (addr, order) in &self.co {
            g.co.insert(*addr, order.iter().copied().filter(|w| retained(w)).collect());
        }
        for &(a, b, k) in &self.deps {
            if retained(&a) && retained(&b) {
                g.deps.insert((a, b, k));
            }
        }
        g
    }

    /// Canonical key over the communication relations, the dedup identity
    /// for complete executions.
    pub fn outcome_key(&self) -> String {
        format!("rf{:?} co{:?}", self.rf, self.co)
    }

    /// Canonical key over everything that distinguishes a partial graph.
    pub fn partial_key(&self, revisit: &BTreeSet<EventId>) -> String {
        let kinds: Vec<_> = self.events.values().map(|e| (e.id, e.kind, e.addr)).collect();
        format!("ev{:?} rf{:?} co{:?} rs{:?}", kinds, self.rf, self.co, revisit)
    }

    /// The thread's events in program order.
    pub fn thread_events(&self, thread: usize) -> Vec<&MemEvent> {
        let mut evs: Vec<_> = self.events.values().filter(|e| e.thread == thread).collect();
        evs.sort_by_key(|e| e.po_index);
        evs
    }

    pub fn threads(&self) -> BTreeSet<usize> {
        self.events.values().map(|e| e.thread).filter(|&t| t != usize::MAX).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn init_xy() -> BTreeMap<u64, u32> {
        [(0x1000, 0u32), (0x1010, 7u32)].into_iter().collect()
    }

    #[test]
    fn init_writes_anchor_coherence() {
        let g = ExecutionGraph::with_init(&init_xy());
        assert_eq!(g.writes_to(0x1000), &[EventId::Init { addr: 0x1000 }]);
        assert_eq!(g.write_value(EventId::Init { addr: 0x1010 }), 7);
        assert!(g.writes_to(0x2000).is_empty());
    }

    #[test]
    fn restrict_drops_an_event_and_its_relations() {
        let mut g = ExecutionGraph::with_init(&init_xy());
        let r = EventId::Code { thread: 0, index: 0 };
        let w = EventId::Code { thread: 1, index: 0 };
        g.add_read(r, 0, 0, 0x1000);
        g.add_write(w, 1, 0, 0x1000, 5, 1);
        g.set_rf(r, EventId::Init { addr: 0x1000 });
        g.deps.insert((r, w, DepKind::Data));

        let keep = [r].into_iter().collect();
        let cut = g.restrict(&keep);
        assert!(cut.events.contains_key(&r));
        assert!(!cut.events.contains_key(&w));
        assert_eq!(cut.writes_to(0x1000), &[EventId::Init { addr: 0x1000 }]);
        assert_eq!(cut.rf[&r], EventId::Init { addr: 0x1000 });
        assert!(cut.deps.is_empty());
    }

    #[test]
    fn outcome_key_tracks_rf_and_co_only() {
        let mut a = ExecutionGraph::with_init(&init_xy());
        let mut b = ExecutionGraph::with_init(&init_xy());
        let w = EventId::Code { thread: 0, index: 0 };
        a.add_write(w, 0, 0, 0x1000, 1, 1);
        b.add_write(w, 0, 0, 0x1000, 1, 1);
        assert_eq!(a.outcome_key(), b.outcome_key());
        b.deps.insert((w, w, DepKind::Addr));
        assert_eq!(a.outcome_key(), b.outcome_key());

        let mut c = ExecutionGraph::with_init(&init_xy());
        c.add_write(w, 0, 0, 0x1010, 1, 1);
        assert_ne!(a.outcome_key(), c.outcome_key());
    }
}
