//! Constrained And-Inverter circuits, complete assignments and justifications.
//!
//! NOT gates are never materialized: every edge is a [`Literal`] that carries a
//! complement flag, so inverters are skipped structurally by everything that
//! walks the graph.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::ops::Not;

use rand::Rng;
use thiserror::Error;

/// Errors raised while building circuits or attaching constraints.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("cycle detected through gate {0}")]
    CycleDetected(usize),
    #[error("gate {0} is defined more than once")]
    DuplicateDefinition(usize),
    #[error("gate {gate} references undefined gate {child}")]
    DanglingReference { gate: usize, child: usize },
    #[error("gate {0} is referenced but never defined")]
    UndefinedGate(usize),
    #[error("and gate {0} has no children")]
    EmptyAnd(usize),
    #[error("gate {0} is out of range")]
    GateOutOfRange(usize),
    #[error("constraint on gate {0}, which is neither an output nor an input")]
    ConstraintOnInternalGate(usize),
    #[error("gate {0} is constrained to both 0 and 1")]
    ConflictingConstraint(usize),
    #[error("input gate {0} has no justification")]
    InputGateHasNoJustification(usize),
}

/// A gate reference with a complement flag.
///
/// Encoded like an AIGER literal: `2 * gate + complement`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal(u32);

impl Literal {
    pub fn new(gate: usize, complement: bool) -> Self {
        Literal(((gate as u32) << 1) | complement as u32)
    }

    pub fn positive(gate: usize) -> Self {
        Self::new(gate, false)
    }

    pub fn negative(gate: usize) -> Self {
        Self::new(gate, true)
    }

    /// Rebuilds a literal from its `2 * gate + complement` code.
    pub fn from_code(code: u32) -> Self {
        Literal(code)
    }

    pub fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn gate(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    /// Value of the literal under a complete vector of gate values.
    #[inline]
    pub fn value(self, values: &[bool]) -> bool {
        values[self.gate()] ^ self.is_complemented()
    }
}

impl Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal(self.0 ^ 1)
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.is_complemented() { '-' } else { '+' };
        write!(f, "{sign}g{}", self.gate())
    }
}

/// One gate definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GateDef {
    Input,
    And(Vec<Literal>),
}

/// Collects gate definitions keyed by gate index, in any order.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    defs: Vec<Option<GateDef>>,
}

impl CircuitBuilder {
    pub fn new(num_gates: usize) -> Self {
        CircuitBuilder {
            defs: vec![None; num_gates],
        }
    }

    pub fn define(&mut self, gate: usize, def: GateDef) -> Result<(), CircuitError> {
        let slot = self
            .defs
            .get_mut(gate)
            .ok_or(CircuitError::GateOutOfRange(gate))?;
        if slot.is_some() {
            return Err(CircuitError::DuplicateDefinition(gate));
        }
        *slot = Some(def);
        Ok(())
    }

    pub fn build(self) -> Result<Circuit, CircuitError> {
        let n = self.defs.len();
        let mut defs = Vec::with_capacity(n);
        for (gate, def) in self.defs.into_iter().enumerate() {
            defs.push(def.ok_or(CircuitError::UndefinedGate(gate))?);
        }
        Circuit::new(defs)
    }
}

/// An immutable gate graph with fanin/fanout adjacency and a fixed
/// topological order. Gates are densely indexed from 0.
#[derive(Clone, PartialEq, Eq)]
pub struct Circuit {
    fanin_start: Vec<u32>,
    fanin: Vec<Literal>,
    // distinct child gates, ascending
    child_start: Vec<u32>,
    children: Vec<u32>,
    // distinct parent gates, ascending
    fanout_start: Vec<u32>,
    fanout: Vec<u32>,
    topo_order: Vec<u32>,
    topo_pos: Vec<u32>,
    inputs: Vec<u32>,
    outputs: Vec<u32>,
}

impl fmt::Debug for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_map();
        for g in 0..self.num_gates() {
            if self.is_input(g) {
                list.entry(&g, &"input");
            } else {
                list.entry(&g, &self.fanin(g));
            }
        }
        list.finish()
    }
}

impl Circuit {
    /// Builds a circuit where `definitions[g]` defines gate `g`.
    pub fn new(definitions: Vec<GateDef>) -> Result<Circuit, CircuitError> {
        let n = definitions.len();
        let mut fanin_start = Vec::with_capacity(n + 1);
        let mut fanin = Vec::new();
        let mut child_start = Vec::with_capacity(n + 1);
        let mut children = Vec::new();
        fanin_start.push(0);
        child_start.push(0);
        for (gate, def) in definitions.iter().enumerate() {
            if let GateDef::And(lits) = def {
                if lits.is_empty() {
                    return Err(CircuitError::EmptyAnd(gate));
                }
                let first = children.len();
                for &lit in lits {
                    if lit.gate() >= n {
                        return Err(CircuitError::DanglingReference {
                            gate,
                            child: lit.gate(),
                        });
                    }
                    fanin.push(lit);
                    children.push(lit.gate() as u32);
                }
                children[first..].sort_unstable();
                let mut k = first;
                for i in first..children.len() {
                    if i == first || children[i] != children[k - 1] {
                        children[k] = children[i];
                        k += 1;
                    }
                }
                children.truncate(k);
            }
            fanin_start.push(fanin.len() as u32);
            child_start.push(children.len() as u32);
        }

        // transpose of the distinct child relation
        let mut degree = vec![0u32; n];
        for &c in &children {
            degree[c as usize] += 1;
        }
        let mut fanout_start = Vec::with_capacity(n + 1);
        fanout_start.push(0u32);
        for g in 0..n {
            fanout_start.push(fanout_start[g] + degree[g]);
        }
        let mut cursor: Vec<u32> = fanout_start[..n].to_vec();
        let mut fanout = vec![0u32; children.len()];
        for parent in 0..n {
            for &c in &children[child_start[parent] as usize..child_start[parent + 1] as usize] {
                fanout[cursor[c as usize] as usize] = parent as u32;
                cursor[c as usize] += 1;
            }
        }

        // Kahn's algorithm with a min-heap, so index order is kept whenever valid.
        let mut pending: Vec<u32> = (0..n)
            .map(|g| child_start[g + 1] - child_start[g])
            .collect();
        let mut ready: BinaryHeap<Reverse<u32>> = (0..n as u32)
            .filter(|&g| pending[g as usize] == 0)
            .map(Reverse)
            .collect();
        let mut topo_order = Vec::with_capacity(n);
        while let Some(Reverse(g)) = ready.pop() {
            topo_order.push(g);
            let g = g as usize;
            for &p in &fanout[fanout_start[g] as usize..fanout_start[g + 1] as usize] {
                pending[p as usize] -= 1;
                if pending[p as usize] == 0 {
                    ready.push(Reverse(p));
                }
            }
        }
        if topo_order.len() != n {
            let stuck = (0..n).find(|&g| pending[g] > 0).unwrap_or(0);
            return Err(CircuitError::CycleDetected(stuck));
        }
        let mut topo_pos = vec![0u32; n];
        for (pos, &g) in topo_order.iter().enumerate() {
            topo_pos[g as usize] = pos as u32;
        }

        let inputs = (0..n as u32)
            .filter(|&g| fanin_start[g as usize] == fanin_start[g as usize + 1])
            .collect();
        let outputs = (0..n as u32)
            .filter(|&g| fanout_start[g as usize] == fanout_start[g as usize + 1])
            .collect();

        Ok(Circuit {
            fanin_start,
            fanin,
            child_start,
            children,
            fanout_start,
            fanout,
            topo_order,
            topo_pos,
            inputs,
            outputs,
        })
    }

    #[inline]
    pub fn num_gates(&self) -> usize {
        self.topo_pos.len()
    }

    #[inline]
    pub fn is_input(&self, g: usize) -> bool {
        self.fanin_start[g] == self.fanin_start[g + 1]
    }

    /// A gate without parents.
    #[inline]
    pub fn is_output(&self, g: usize) -> bool {
        self.fanout_start[g] == self.fanout_start[g + 1]
    }

    /// Child literals of `g` in definition order; empty for inputs.
    #[inline]
    pub fn fanin(&self, g: usize) -> &[Literal] {
        &self.fanin[self.fanin_start[g] as usize..self.fanin_start[g + 1] as usize]
    }

    /// Distinct child gates of `g`, ascending.
    #[inline]
    pub fn children(&self, g: usize) -> &[u32] {
        &self.children[self.child_start[g] as usize..self.child_start[g + 1] as usize]
    }

    /// Distinct parent gates of `g`, ascending.
    #[inline]
    pub fn fanout(&self, g: usize) -> &[u32] {
        &self.fanout[self.fanout_start[g] as usize..self.fanout_start[g + 1] as usize]
    }

    pub fn topo_order(&self) -> &[u32] {
        &self.topo_order
    }

    #[inline]
    pub fn topo_position(&self, g: usize) -> usize {
        self.topo_pos[g] as usize
    }

    pub fn inputs(&self) -> &[u32] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[u32] {
        &self.outputs
    }

    pub fn num_ands(&self) -> usize {
        self.num_gates() - self.inputs.len()
    }

    /// The definition of gate `g`, as it would be passed to [`Circuit::new`].
    pub fn definition(&self, g: usize) -> GateDef {
        if self.is_input(g) {
            GateDef::Input
        } else {
            GateDef::And(self.fanin(g).to_vec())
        }
    }

    /// AND of the child literal values. Undefined for input gates.
    #[inline]
    pub fn eval_gate(&self, g: usize, values: &[bool]) -> bool {
        self.fanin(g).iter().all(|l| l.value(values))
    }

    /// True iff `g` is an input or its value equals the AND of its children.
    #[inline]
    pub fn is_consistent_at(&self, g: usize, values: &[bool]) -> bool {
        self.is_input(g) || values[g] == self.eval_gate(g, values)
    }

    /// Subset-minimal justifications for `<g, v>`.
    ///
    /// For `v = 1` this is the single justification binding every child
    /// literal to 1; for `v = 0` there is one singleton per distinct child
    /// literal. A fanin holding a literal and its complement is constant 0:
    /// it has no justification for 1 and the empty one for 0.
    pub fn minimal_justifications(
        &self,
        g: usize,
        v: bool,
    ) -> Result<Vec<Justification>, CircuitError> {
        if g >= self.num_gates() {
            return Err(CircuitError::GateOutOfRange(g));
        }
        if self.is_input(g) {
            return Err(CircuitError::InputGateHasNoJustification(g));
        }
        let mut lits = self.fanin(g).to_vec();
        lits.sort_unstable();
        lits.dedup();
        let contradictory = lits.windows(2).any(|w| w[0].gate() == w[1].gate());
        if contradictory {
            return Ok(if v {
                Vec::new()
            } else {
                vec![Justification {
                    bindings: Vec::new(),
                }]
            });
        }
        if v {
            let bindings = lits.iter().map(|&l| (l, !l.is_complemented())).collect();
            Ok(vec![Justification { bindings }])
        } else {
            Ok(lits
                .into_iter()
                .map(|l| Justification {
                    bindings: vec![(l, l.is_complemented())],
                })
                .collect())
        }
    }

    /// Consistent extension of an input pattern, given in the order of
    /// [`Circuit::inputs`].
    pub fn evaluate(&self, input_values: &[bool]) -> Assignment {
        assert_eq!(
            input_values.len(),
            self.inputs.len(),
            "one value per input gate required"
        );
        let mut values = vec![false; self.num_gates()];
        for (&g, &v) in self.inputs.iter().zip(input_values) {
            values[g as usize] = v;
        }
        self.propagate_values(&mut values);
        Assignment::from_values(self, values)
    }

    /// Recomputes every AND gate from its children in topological order.
    pub(crate) fn propagate_values(&self, values: &mut [bool]) {
        for &g in &self.topo_order {
            let g = g as usize;
            if !self.is_input(g) {
                values[g] = self.eval_gate(g, values);
            }
        }
    }
}

/// A partial assignment to the children of a gate: pairs of child literal and
/// the value required at the literal's gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Justification {
    pub bindings: Vec<(Literal, bool)>,
}

impl Justification {
    /// Gates on which the justification disagrees with `values`.
    pub fn disagreeing_gates(&self, values: &[bool]) -> Vec<usize> {
        let mut gates: Vec<usize> = self
            .bindings
            .iter()
            .filter(|(l, v)| values[l.gate()] != *v)
            .map(|(l, _)| l.gate())
            .collect();
        gates.sort_unstable();
        gates.dedup();
        gates
    }
}

/// A circuit together with constraints on its output gates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstrainedCircuit {
    circuit: Circuit,
    constraints: Vec<Option<bool>>,
    constrained: Vec<u32>,
}

impl ConstrainedCircuit {
    /// Attaches constraints. Constrained gates must be outputs; an input gate
    /// may also be pinned, which is how constant gates are modelled.
    pub fn new(
        circuit: Circuit,
        constraints: impl IntoIterator<Item = (usize, bool)>,
    ) -> Result<Self, CircuitError> {
        let mut table = vec![None; circuit.num_gates()];
        for (g, v) in constraints {
            if g >= circuit.num_gates() {
                return Err(CircuitError::GateOutOfRange(g));
            }
            if !circuit.is_output(g) && !circuit.is_input(g) {
                return Err(CircuitError::ConstraintOnInternalGate(g));
            }
            match table[g] {
                Some(old) if old != v => return Err(CircuitError::ConflictingConstraint(g)),
                _ => table[g] = Some(v),
            }
        }
        let constrained = (0..circuit.num_gates() as u32)
            .filter(|&g| table[g as usize].is_some())
            .collect();
        Ok(ConstrainedCircuit {
            circuit,
            constraints: table,
            constrained,
        })
    }

    pub fn unconstrained(circuit: Circuit) -> Self {
        let n = circuit.num_gates();
        ConstrainedCircuit {
            circuit,
            constraints: vec![None; n],
            constrained: Vec::new(),
        }
    }

    #[inline]
    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    #[inline]
    pub fn constraint(&self, g: usize) -> Option<bool> {
        self.constraints[g]
    }

    #[inline]
    pub fn is_constrained(&self, g: usize) -> bool {
        self.constraints[g].is_some()
    }

    /// Constrained gates, ascending.
    pub fn constrained_gates(&self) -> &[u32] {
        &self.constrained
    }

    pub fn constraints(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.constrained
            .iter()
            .map(|&g| (g as usize, self.constraints[g as usize].unwrap()))
    }

    /// True iff the assignment is consistent at every gate and extends the
    /// constraints. Recomputed from scratch; the incremental unjust set is
    /// not consulted.
    pub fn verify_satisfying(&self, assignment: &Assignment) -> bool {
        let values = assignment.values();
        values.len() == self.circuit.num_gates()
            && self.constraints().all(|(g, v)| values[g] == v)
            && (0..self.circuit.num_gates()).all(|g| self.circuit.is_consistent_at(g, values))
    }

    /// Random input pattern, consistently extended; constrained gates are then
    /// overwritten with their required value, so every violated constraint
    /// shows up as an unjustified gate.
    pub fn random_complete_extension<R: Rng + ?Sized>(&self, rng: &mut R) -> Assignment {
        let c = &self.circuit;
        let mut values = vec![false; c.num_gates()];
        for &g in c.inputs() {
            values[g as usize] = rng.random::<bool>();
        }
        for &g in c.inputs() {
            if let Some(v) = self.constraints[g as usize] {
                values[g as usize] = v;
            }
        }
        c.propagate_values(&mut values);
        for (g, v) in self.constraints() {
            values[g] = v;
        }
        Assignment::from_values(c, values)
    }
}

/// Membership-indexed set of gates with O(1) insert, remove and uniform pick.
#[derive(Debug, Clone)]
pub(crate) struct GateSet {
    members: Vec<u32>,
    slot: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl GateSet {
    fn new(n: usize) -> Self {
        GateSet {
            members: Vec::new(),
            slot: vec![ABSENT; n],
        }
    }

    #[inline]
    fn contains(&self, g: usize) -> bool {
        self.slot[g] != ABSENT
    }

    #[inline]
    fn insert(&mut self, g: usize) {
        if self.slot[g] == ABSENT {
            self.slot[g] = self.members.len() as u32;
            self.members.push(g as u32);
        }
    }

    #[inline]
    fn remove(&mut self, g: usize) {
        let s = self.slot[g];
        if s != ABSENT {
            let last = self.members.pop().unwrap();
            if last as usize != g {
                self.members[s as usize] = last;
                self.slot[last as usize] = s;
            }
            self.slot[g] = ABSENT;
        }
    }
}

/// A complete truth assignment plus the incrementally maintained set of
/// unjustified gates.
#[derive(Debug, Clone)]
pub struct Assignment {
    values: Vec<bool>,
    unjust: GateSet,
}

impl PartialEq for Assignment {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && self.unjust_sorted() == other.unjust_sorted()
    }
}

impl Eq for Assignment {}

impl Assignment {
    /// Wraps a complete value vector, computing the unjust set from scratch.
    pub fn from_values(circuit: &Circuit, values: Vec<bool>) -> Self {
        assert_eq!(values.len(), circuit.num_gates());
        let mut unjust = GateSet::new(values.len());
        for g in 0..values.len() {
            if !circuit.is_consistent_at(g, &values) {
                unjust.insert(g);
            }
        }
        Assignment { values, unjust }
    }

    #[inline]
    pub fn values(&self) -> &[bool] {
        &self.values
    }

    #[inline]
    pub fn value(&self, g: usize) -> bool {
        self.values[g]
    }

    /// Unjustified gates in internal (unspecified but deterministic) order.
    #[inline]
    pub fn unjust(&self) -> &[u32] {
        &self.unjust.members
    }

    pub fn unjust_sorted(&self) -> Vec<u32> {
        let mut v = self.unjust.members.clone();
        v.sort_unstable();
        v
    }

    #[inline]
    pub fn num_unjust(&self) -> usize {
        self.unjust.members.len()
    }

    #[inline]
    pub fn is_unjust(&self, g: usize) -> bool {
        self.unjust.contains(g)
    }

    pub fn is_justified(&self, circuit: &Circuit, g: usize) -> bool {
        circuit.is_consistent_at(g, &self.values)
    }

    /// Input values in the order of [`Circuit::inputs`].
    pub fn input_values(&self, circuit: &Circuit) -> Vec<bool> {
        circuit
            .inputs()
            .iter()
            .map(|&g| self.values[g as usize])
            .collect()
    }

    /// Flips one gate, updating the unjust status of the gate and its parents.
    #[inline]
    pub fn flip(&mut self, circuit: &Circuit, g: usize) {
        self.values[g] = !self.values[g];
        self.refresh(circuit, g);
        for &p in circuit.fanout(g) {
            self.refresh(circuit, p as usize);
        }
    }

    #[inline]
    fn refresh(&mut self, circuit: &Circuit, g: usize) {
        if circuit.is_consistent_at(g, &self.values) {
            self.unjust.remove(g);
        } else {
            self.unjust.insert(g);
        }
    }

    /// Full-scan check that the incremental unjust set is exact.
    pub fn unjust_is_exact(&self, circuit: &Circuit) -> bool {
        (0..self.values.len())
            .all(|g| self.unjust.contains(g) != circuit.is_consistent_at(g, &self.values))
    }
}

/// Free-function form of [`Assignment::is_justified`].
pub fn is_justified(circuit: &Circuit, assignment: &Assignment, g: usize) -> bool {
    assignment.is_justified(circuit, g)
}
