//! Limited forward propagation.
//!
//! Gates are popped in topological order from a duplicate-free priority
//! queue. A popped gate from the originally flipped set only forwards to its
//! parents; any other popped gate is flipped (and forwards) when it is
//! unjustified and unconstrained. Every path therefore stops at the first gate
//! that is already justified or constrained.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::circuit::{Assignment, ConstrainedCircuit, Justification};

/// Counters from one propagation call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PropagationStats {
    /// Gates popped from the queue.
    pub pops: usize,
    /// Gates flipped by propagation (the originally flipped set excluded).
    pub flips: usize,
}

/// Reusable queue and marker storage for propagation calls.
#[derive(Debug, Clone)]
pub(crate) struct Propagator {
    heap: BinaryHeap<Reverse<u32>>,
    queued: Vec<bool>,
    origin: Vec<bool>,
}

impl Propagator {
    pub(crate) fn new(num_gates: usize) -> Self {
        Propagator {
            heap: BinaryHeap::new(),
            queued: vec![false; num_gates],
            origin: vec![false; num_gates],
        }
    }

    #[inline]
    fn enqueue(&mut self, cc: &ConstrainedCircuit, g: usize) {
        if !self.queued[g] {
            self.queued[g] = true;
            self.heap.push(Reverse(cc.circuit().topo_position(g) as u32));
        }
    }

    /// Propagates the changes of `flipped`, which must already be flipped in
    /// `assignment`. Gates flipped here are appended to `log` when given.
    pub(crate) fn forward(
        &mut self,
        cc: &ConstrainedCircuit,
        assignment: &mut Assignment,
        flipped: &[u32],
        mut log: Option<&mut Vec<u32>>,
    ) -> PropagationStats {
        let circuit = cc.circuit();
        let mut stats = PropagationStats::default();
        for &g in flipped {
            self.origin[g as usize] = true;
            self.enqueue(cc, g as usize);
        }
        while let Some(Reverse(pos)) = self.heap.pop() {
            let g = circuit.topo_order()[pos as usize] as usize;
            self.queued[g] = false;
            stats.pops += 1;
            if !self.origin[g] {
                if !assignment.is_unjust(g) || cc.is_constrained(g) {
                    continue;
                }
                assignment.flip(circuit, g);
                stats.flips += 1;
                if let Some(log) = log.as_deref_mut() {
                    log.push(g as u32);
                }
            }
            for &p in circuit.fanout(g) {
                self.enqueue(cc, p as usize);
            }
        }
        for &g in flipped {
            self.origin[g as usize] = false;
        }
        stats
    }

    /// Number of unjustified gates after flipping `flips` and propagating.
    /// The assignment is restored before returning; `log` is scratch space.
    pub(crate) fn trial(
        &mut self,
        cc: &ConstrainedCircuit,
        assignment: &mut Assignment,
        flips: &[u32],
        log: &mut Vec<u32>,
    ) -> (usize, PropagationStats) {
        let circuit = cc.circuit();
        log.clear();
        for &g in flips {
            assignment.flip(circuit, g as usize);
            log.push(g);
        }
        let stats = self.forward(cc, assignment, flips, Some(log));
        let count = assignment.num_unjust();
        for &g in log.iter().rev() {
            assignment.flip(circuit, g as usize);
        }
        (count, stats)
    }
}

/// Runs limited forward propagation for the gates in `flipped`, which have
/// just been flipped in `assignment`.
pub fn lbcp_forward(
    cc: &ConstrainedCircuit,
    flipped: &[usize],
    assignment: &mut Assignment,
) -> PropagationStats {
    let mut gates: Vec<u32> = flipped.iter().map(|&g| g as u32).collect();
    gates.sort_unstable();
    gates.dedup();
    Propagator::new(cc.circuit().num_gates()).forward(cc, assignment, &gates, None)
}

/// Size of the unjust set after taking the step that applies
/// `justification`: the gates it disagrees on are flipped, then propagated.
///
/// The assignment's values and unjust set are restored before returning.
pub fn count_unjust_after(
    cc: &ConstrainedCircuit,
    assignment: &mut Assignment,
    justification: &Justification,
) -> usize {
    let flips: Vec<u32> = justification
        .disagreeing_gates(assignment.values())
        .into_iter()
        .map(|g| g as u32)
        .collect();
    let mut log = Vec::new();
    Propagator::new(cc.circuit().num_gates())
        .trial(cc, assignment, &flips, &mut log)
        .0
}
