//! Random circuits and small independent reference implementations shared by
//! the integration tests.
#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};

use crsat::{Circuit, ConstrainedCircuit, GateDef, Literal, StructuralProfile};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random acyclic definitions: `inputs` inputs and `ands` AND gates of arity
/// `1..=max_arity` with random polarities, placed at shuffled indices so the
/// index order is not a topological order.
pub fn random_defs<R: Rng>(rng: &mut R, inputs: usize, ands: usize, max_arity: usize) -> Vec<GateDef> {
    let n = inputs + ands;
    let mut slot: Vec<usize> = (0..n).collect();
    slot.shuffle(rng);
    let mut defs = vec![GateDef::Input; n];
    for k in inputs..n {
        let arity = rng.random_range(1..=max_arity);
        let fanin = (0..arity)
            .map(|_| Literal::new(slot[rng.random_range(0..k)], rng.random::<bool>()))
            .collect();
        defs[slot[k]] = GateDef::And(fanin);
    }
    defs
}

pub fn random_circuit<R: Rng>(rng: &mut R, inputs: usize, ands: usize, max_arity: usize) -> Circuit {
    Circuit::new(random_defs(rng, inputs, ands, max_arity)).expect("acyclic by construction")
}

/// Constrains each output AND gate to a random value with probability `p`.
pub fn random_constraints<R: Rng>(rng: &mut R, circuit: Circuit, p: f64) -> ConstrainedCircuit {
    let mut picks = Vec::new();
    for &g in circuit.outputs() {
        let g = g as usize;
        if !circuit.is_input(g) && rng.random_bool(p) {
            picks.push((g, rng.random::<bool>()));
        }
    }
    ConstrainedCircuit::new(circuit, picks).expect("constraints on outputs")
}

pub fn fanin_of(def: &GateDef) -> &[Literal] {
    match def {
        GateDef::Input => &[],
        GateDef::And(f) => f,
    }
}

/// Parent lists (distinct) computed directly from definitions.
pub fn parents_of(defs: &[GateDef]) -> Vec<Vec<usize>> {
    let mut parents = vec![Vec::new(); defs.len()];
    for (g, d) in defs.iter().enumerate() {
        for l in fanin_of(d) {
            if !parents[l.gate()].contains(&g) {
                parents[l.gate()].push(g);
            }
        }
    }
    parents
}

/// Memoized recursive evaluation of every gate from input values.
pub fn eval_recursive(defs: &[GateDef], input: &HashMap<usize, bool>) -> Vec<bool> {
    fn go(g: usize, defs: &[GateDef], input: &HashMap<usize, bool>, memo: &mut Vec<Option<bool>>) -> bool {
        if let Some(v) = memo[g] {
            return v;
        }
        let v = match &defs[g] {
            GateDef::Input => input[&g],
            GateDef::And(f) => f
                .iter()
                .all(|l| go(l.gate(), defs, input, memo) != l.is_complemented()),
        };
        memo[g] = Some(v);
        v
    }
    let mut memo = vec![None; defs.len()];
    (0..defs.len()).map(|g| go(g, defs, input, &mut memo)).collect()
}

/// Satisfiability by enumerating every input pattern.
pub fn brute_force_sat(cc: &ConstrainedCircuit) -> bool {
    let c = cc.circuit();
    let defs: Vec<GateDef> = (0..c.num_gates()).map(|g| c.definition(g)).collect();
    let inputs: Vec<usize> = (0..defs.len())
        .filter(|&g| matches!(defs[g], GateDef::Input))
        .collect();
    assert!(inputs.len() <= 20, "too many inputs to enumerate");
    (0u64..1 << inputs.len()).any(|bits| {
        let input: HashMap<usize, bool> = inputs
            .iter()
            .enumerate()
            .map(|(i, &g)| (g, bits >> i & 1 == 1))
            .collect();
        let values = eval_recursive(&defs, &input);
        cc.constraints().all(|(g, v)| values[g] == v)
    })
}

/// DPLL with unit propagation over DIMACS-style clauses.
pub fn dpll(num_vars: usize, clauses: &[Vec<i64>]) -> bool {
    fn solve(clauses: &[Vec<i64>], assign: &mut Vec<Option<bool>>) -> bool {
        let mut trail = Vec::new();
        loop {
            let mut unit = None;
            let mut all_sat = true;
            for cl in clauses {
                let mut open = None;
                let mut n_open = 0;
                let mut sat = false;
                for &lit in cl {
                    let v = lit.unsigned_abs() as usize;
                    match assign[v] {
                        Some(b) if b == (lit > 0) => {
                            sat = true;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            n_open += 1;
                            open = Some(lit);
                        }
                    }
                }
                if sat {
                    continue;
                }
                all_sat = false;
                if n_open == 0 {
                    for v in trail {
                        assign[v] = None;
                    }
                    return false;
                }
                if n_open == 1 && unit.is_none() {
                    unit = open;
                }
            }
            if all_sat {
                return true;
            }
            match unit {
                Some(lit) => {
                    let v = lit.unsigned_abs() as usize;
                    assign[v] = Some(lit > 0);
                    trail.push(v);
                }
                None => break,
            }
        }
        let var = (1..assign.len()).find(|&v| assign[v].is_none()).unwrap();
        for b in [true, false] {
            assign[var] = Some(b);
            if solve(clauses, assign) {
                return true;
            }
        }
        assign[var] = None;
        for v in trail {
            assign[v] = None;
        }
        false
    }
    let mut assign = vec![None; num_vars + 1];
    solve(clauses, &mut assign)
}

/// Reference forward propagation as a memoized recursion: a gate changes iff
/// it is in `flipped`, or it is unconstrained, some child changed, and its
/// original value disagrees with the AND of the children's final values.
/// Returns the final values.
pub fn reference_propagation(cc: &ConstrainedCircuit, before: &[bool], flipped: &[usize]) -> Vec<bool> {
    fn changed(
        g: usize,
        cc: &ConstrainedCircuit,
        before: &[bool],
        flipped: &[usize],
        memo: &mut Vec<Option<bool>>,
    ) -> bool {
        if let Some(v) = memo[g] {
            return v;
        }
        let c = cc.circuit();
        let r = if flipped.contains(&g) {
            true
        } else if c.is_input(g) || cc.is_constrained(g) {
            false
        } else {
            let mut any_child_changed = false;
            let mut and = true;
            for l in c.fanin(g) {
                let ch = changed(l.gate(), cc, before, flipped, memo);
                any_child_changed |= ch;
                and &= (before[l.gate()] ^ ch) != l.is_complemented();
            }
            any_child_changed && and != before[g]
        };
        memo[g] = Some(r);
        r
    }
    let mut memo = vec![None; before.len()];
    (0..before.len())
        .map(|g| before[g] ^ changed(g, cc, before, flipped, &mut memo))
        .collect()
}

/// Structural measures from their recursive definitions, evaluated directly
/// on gate definitions with memoization.
pub struct MetricOracle<'a> {
    defs: &'a [GateDef],
    pub parents: Vec<Vec<usize>>,
    depth: RefCell<Vec<Option<u32>>>,
    level: RefCell<Vec<Option<u32>>>,
    llevel: RefCell<Vec<Option<u32>>>,
    alevel: RefCell<Vec<Option<f64>>>,
    cc: RefCell<Vec<Option<(u64, u64)>>>,
    co: RefCell<Vec<Option<u64>>>,
    flow: RefCell<Vec<Option<f64>>>,
    over_level: bool,
    by_fanout: bool,
}

impl<'a> MetricOracle<'a> {
    pub fn new(defs: &'a [GateDef], over_level: bool, by_fanout: bool) -> Self {
        let n = defs.len();
        MetricOracle {
            defs,
            parents: parents_of(defs),
            depth: RefCell::new(vec![None; n]),
            level: RefCell::new(vec![None; n]),
            llevel: RefCell::new(vec![None; n]),
            alevel: RefCell::new(vec![None; n]),
            cc: RefCell::new(vec![None; n]),
            co: RefCell::new(vec![None; n]),
            flow: RefCell::new(vec![None; n]),
            over_level,
            by_fanout,
        }
    }

    fn memo<T: Copy>(cell: &RefCell<Vec<Option<T>>>, g: usize, f: impl FnOnce() -> T) -> T {
        if let Some(v) = cell.borrow()[g] {
            return v;
        }
        let v = f();
        cell.borrow_mut()[g] = Some(v);
        v
    }

    pub fn children(&self, g: usize) -> Vec<usize> {
        let mut v: Vec<usize> = fanin_of(&self.defs[g]).iter().map(|l| l.gate()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn depth(&self, g: usize) -> u32 {
        Self::memo(&self.depth, g, || {
            self.parents[g].iter().map(|&p| 1 + self.depth(p)).max().unwrap_or(0)
        })
    }

    pub fn level(&self, g: usize) -> u32 {
        Self::memo(&self.level, g, || {
            self.children(g).iter().map(|&c| 1 + self.level(c)).max().unwrap_or(0)
        })
    }

    pub fn llevel(&self, g: usize) -> u32 {
        Self::memo(&self.llevel, g, || {
            self.children(g).iter().map(|&c| 1 + self.llevel(c)).min().unwrap_or(0)
        })
    }

    pub fn alevel(&self, g: usize) -> f64 {
        Self::memo(&self.alevel, g, || {
            let ch = self.children(g);
            if ch.is_empty() {
                return 0.0;
            }
            let sum: f64 = ch
                .iter()
                .map(|&c| if self.over_level { self.level(c) as f64 } else { self.alevel(c) })
                .sum();
            1.0 + sum / ch.len() as f64
        })
    }

    fn reach(&self, g: usize, up: bool) -> usize {
        let mut seen = HashSet::new();
        let mut stack = vec![g];
        while let Some(x) = stack.pop() {
            let next = if up { self.parents[x].clone() } else { self.children(x) };
            for y in next {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen.len()
    }

    pub fn tfo(&self, g: usize) -> u32 {
        self.reach(g, true) as u32
    }

    pub fn tfi(&self, g: usize) -> u32 {
        self.reach(g, false) as u32
    }

    fn lit_cc(&self, l: &Literal) -> (u64, u64) {
        let (c0, c1) = self.cc(l.gate());
        if l.is_complemented() {
            (c1, c0)
        } else {
            (c0, c1)
        }
    }

    /// `(cc0, cc1)`, saturating.
    pub fn cc(&self, g: usize) -> (u64, u64) {
        Self::memo(&self.cc, g, || match &self.defs[g] {
            GateDef::Input => (1, 1),
            GateDef::And(f) => {
                let cc0 = f.iter().map(|l| self.lit_cc(l).0).min().unwrap().saturating_add(1);
                let cc1 = f
                    .iter()
                    .fold(1u64, |acc, l| acc.saturating_add(self.lit_cc(l).1));
                (cc0, cc1)
            }
        })
    }

    pub fn co(&self, g: usize) -> u64 {
        Self::memo(&self.co, g, || {
            self.parents[g]
                .iter()
                .map(|&p| {
                    fanin_of(&self.defs[p])
                        .iter()
                        .filter(|l| l.gate() != g)
                        .fold(self.co(p).saturating_add(1), |acc, l| {
                            acc.saturating_add(self.lit_cc(l).1)
                        })
                })
                .min()
                .unwrap_or(0)
        })
    }

    pub fn flow(&self, g: usize) -> f64 {
        Self::memo(&self.flow, g, || {
            let base = if self.parents[g].is_empty() { 1.0 } else { 0.0 };
            base + self.parents[g]
                .iter()
                .map(|&p| {
                    let denom = if self.by_fanout {
                        self.parents[p].len().max(1)
                    } else {
                        self.children(p).len()
                    };
                    self.flow(p) / denom as f64
                })
                .sum::<f64>()
        })
    }
}

/// First disagreement between a profile and the oracle, if any.
pub fn profile_mismatch(c: &Circuit, p: &StructuralProfile, o: &MetricOracle<'_>) -> Option<String> {
    for g in 0..c.num_gates() {
        let checks = [
            ("depth", p.depth(g) == o.depth(g)),
            ("level", p.level(g) == o.level(g)),
            ("llevel", p.llevel(g) == o.llevel(g)),
            ("alevel", (p.alevel(g) - o.alevel(g)).abs() < 1e-9),
            ("fo", p.fanout_size(g) as usize == o.parents[g].len()),
            ("tfo", p.tfo_size(c, g) == o.tfo(g)),
            ("tfi", p.tfi_size(c, g) == o.tfi(g)),
            ("cc", (p.cc0(g), p.cc1(g)) == o.cc(g)),
            ("co", p.co(g) == o.co(g)),
            ("flow", (p.flow(g) - o.flow(g)).abs() < 1e-9),
        ];
        if let Some((name, _)) = checks.iter().find(|c| !c.1) {
            return Some(format!("{name} of gate {g}"));
        }
    }
    None
}
