//! Static per-gate structural measures used by the gate-selection heuristics.
//!
//! All measures walk the graph through complemented edges without counting
//! them, so inverters never add a level. Only the controllability measures
//! are polarity-sensitive: a complemented edge swaps `cc0` and `cc1` of the
//! referenced gate.
//!
//! Controllability and observability costs grow exponentially on reconvergent
//! structure and are computed with saturating `u64` arithmetic.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::circuit::{Circuit, Literal};

/// Recursion used for the average level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ALevelMode {
    /// `1 + mean(alevel(child))`
    #[default]
    SelfConsistent,
    /// `1 + mean(level(child))`
    OverLevel,
}

/// Denominator used when a gate splits its flow among its children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlowMode {
    /// Divide by the number of distinct children; flow is conserved.
    #[default]
    Fanin,
    /// Divide by the parent's own fanout size (at least 1).
    Fanout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProfileOptions {
    pub alevel: ALevelMode,
    pub flow: FlowMode,
}

/// A structural property a heuristic can maximize or minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Depth,
    Fo,
    Tfo,
    Tfi,
    Cc,
    Co,
    Flow,
    Level,
    LLevel,
    ALevel,
}

impl Measure {
    pub const ALL: [Measure; 10] = [
        Measure::Depth,
        Measure::Fo,
        Measure::Tfo,
        Measure::Tfi,
        Measure::Cc,
        Measure::Co,
        Measure::Flow,
        Measure::Level,
        Measure::LLevel,
        Measure::ALevel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Depth => "depth",
            Measure::Fo => "fo",
            Measure::Tfo => "tfo",
            Measure::Tfi => "tfi",
            Measure::Cc => "cc",
            Measure::Co => "co",
            Measure::Flow => "flow",
            Measure::Level => "level",
            Measure::LLevel => "llevel",
            Measure::ALevel => "alevel",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown measure {s:?}"))
    }
}

/// Per-gate precomputed measures.
///
/// Transitive fanin/fanout sizes are computed on first use per gate and
/// cached; everything else is computed up front in linear time.
#[derive(Debug)]
pub struct StructuralProfile {
    depth: Vec<u32>,
    level: Vec<u32>,
    llevel: Vec<u32>,
    alevel: Vec<f64>,
    fanout: Vec<u32>,
    cc0: Vec<u64>,
    cc1: Vec<u64>,
    co: Vec<u64>,
    flow: Vec<f64>,
    tfo: Vec<OnceLock<u32>>,
    tfi: Vec<OnceLock<u32>>,
}

/// One CSV-ready row of a profile.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ProfileRow {
    pub gate: usize,
    pub depth: u32,
    pub level: u32,
    pub llevel: u32,
    pub alevel: f64,
    pub fo: u32,
    pub tfo: u32,
    pub tfi: u32,
    pub cc0: u64,
    pub cc1: u64,
    pub co: u64,
    pub flow: f64,
}

/// Controllability of a literal to the value `v`.
#[inline]
fn literal_cc(cc0: &[u64], cc1: &[u64], lit: Literal, v: bool) -> u64 {
    if v ^ lit.is_complemented() {
        cc1[lit.gate()]
    } else {
        cc0[lit.gate()]
    }
}

pub fn compute_depths(circuit: &Circuit) -> Vec<u32> {
    let mut depth = vec![0u32; circuit.num_gates()];
    for &g in circuit.topo_order().iter().rev() {
        let g = g as usize;
        depth[g] = circuit
            .fanout(g)
            .iter()
            .map(|&p| depth[p as usize] + 1)
            .max()
            .unwrap_or(0);
    }
    depth
}

/// `(level, llevel, alevel)` per gate.
pub fn compute_levels(circuit: &Circuit, mode: ALevelMode) -> (Vec<u32>, Vec<u32>, Vec<f64>) {
    let n = circuit.num_gates();
    let mut level = vec![0u32; n];
    let mut llevel = vec![0u32; n];
    let mut alevel = vec![0f64; n];
    for &g in circuit.topo_order() {
        let g = g as usize;
        let children = circuit.children(g);
        if children.is_empty() {
            continue;
        }
        let mut hi = 0;
        let mut lo = u32::MAX;
        let mut sum = 0.0;
        for &c in children {
            let c = c as usize;
            hi = hi.max(level[c]);
            lo = lo.min(llevel[c]);
            sum += match mode {
                ALevelMode::SelfConsistent => alevel[c],
                ALevelMode::OverLevel => level[c] as f64,
            };
        }
        level[g] = hi + 1;
        llevel[g] = lo + 1;
        alevel[g] = 1.0 + sum / children.len() as f64;
    }
    (level, llevel, alevel)
}

pub fn compute_fanout_sizes(circuit: &Circuit) -> Vec<u32> {
    (0..circuit.num_gates())
        .map(|g| circuit.fanout(g).len() as u32)
        .collect()
}

/// Number of gates reachable from `g` over `step` (excluding `g`).
fn reach_count<'a>(n: usize, g: usize, step: impl Fn(usize) -> &'a [u32]) -> u32 {
    let mut seen = vec![false; n];
    let mut stack = vec![g];
    seen[g] = true;
    let mut count = 0;
    while let Some(x) = stack.pop() {
        for &y in step(x) {
            let y = y as usize;
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count
}

/// `|FO*(g)|`, the number of transitive ancestors.
pub fn transitive_fanout_size(circuit: &Circuit, g: usize) -> u32 {
    reach_count(circuit.num_gates(), g, |x| circuit.fanout(x))
}

/// `|FI*(g)|`, the number of transitive descendants.
pub fn transitive_fanin_size(circuit: &Circuit, g: usize) -> u32 {
    reach_count(circuit.num_gates(), g, |x| circuit.children(x))
}

/// `(fanout_size, tfo_size, tfi_size)` per gate, computed eagerly.
pub fn compute_fanout_tfo_tfi(circuit: &Circuit) -> (Vec<u32>, Vec<u32>, Vec<u32>) {
    let n = circuit.num_gates();
    let tfo = (0..n).map(|g| transitive_fanout_size(circuit, g)).collect();
    let tfi = (0..n).map(|g| transitive_fanin_size(circuit, g)).collect();
    (compute_fanout_sizes(circuit), tfo, tfi)
}

/// SCOAP combinational controllability `(cc0, cc1)` per gate.
pub fn compute_scoap_cc(circuit: &Circuit) -> (Vec<u64>, Vec<u64>) {
    let n = circuit.num_gates();
    let mut cc0 = vec![1u64; n];
    let mut cc1 = vec![1u64; n];
    for &g in circuit.topo_order() {
        let g = g as usize;
        let fanin = circuit.fanin(g);
        if fanin.is_empty() {
            continue;
        }
        let min0 = fanin
            .iter()
            .map(|&l| literal_cc(&cc0, &cc1, l, false))
            .min()
            .unwrap();
        let sum1 = fanin
            .iter()
            .fold(0u64, |acc, &l| acc.saturating_add(literal_cc(&cc0, &cc1, l, true)));
        cc0[g] = min0.saturating_add(1);
        cc1[g] = sum1.saturating_add(1);
    }
    (cc0, cc1)
}

/// SCOAP combinational observability per gate.
pub fn compute_scoap_co(circuit: &Circuit, cc0: &[u64], cc1: &[u64]) -> Vec<u64> {
    let n = circuit.num_gates();
    let mut co = vec![0u64; n];
    for &g in circuit.topo_order().iter().rev() {
        let g = g as usize;
        let best = circuit
            .fanout(g)
            .iter()
            .map(|&p| {
                let p = p as usize;
                circuit
                    .fanin(p)
                    .iter()
                    .filter(|l| l.gate() != g)
                    .fold(co[p], |acc, &l| {
                        acc.saturating_add(literal_cc(cc0, cc1, l, true))
                    })
            })
            .min();
        co[g] = best.map_or(0, |b| b.saturating_add(1));
    }
    co
}

/// Unit flow poured from every output and split among children.
pub fn compute_flow(circuit: &Circuit, mode: FlowMode) -> Vec<f64> {
    let n = circuit.num_gates();
    let mut flow = vec![0f64; n];
    for &g in circuit.topo_order().iter().rev() {
        let g = g as usize;
        if circuit.is_output(g) {
            flow[g] = 1.0;
        }
        let children = circuit.children(g);
        if children.is_empty() {
            continue;
        }
        let denom = match mode {
            FlowMode::Fanin => children.len(),
            FlowMode::Fanout => circuit.fanout(g).len().max(1),
        };
        let share = flow[g] / denom as f64;
        for &c in children {
            flow[c as usize] += share;
        }
    }
    flow
}

impl StructuralProfile {
    /// Profile with default options; closures are filled lazily.
    pub fn build(circuit: &Circuit) -> Self {
        Self::with_options(circuit, ProfileOptions::default())
    }

    pub fn with_options(circuit: &Circuit, options: ProfileOptions) -> Self {
        let n = circuit.num_gates();
        let depth = compute_depths(circuit);
        let (level, llevel, alevel) = compute_levels(circuit, options.alevel);
        let (cc0, cc1) = compute_scoap_cc(circuit);
        let co = compute_scoap_co(circuit, &cc0, &cc1);
        StructuralProfile {
            depth,
            level,
            llevel,
            alevel,
            fanout: compute_fanout_sizes(circuit),
            cc0,
            cc1,
            co,
            flow: compute_flow(circuit, options.flow),
            tfo: (0..n).map(|_| OnceLock::new()).collect(),
            tfi: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn num_gates(&self) -> usize {
        self.depth.len()
    }

    pub fn depth(&self, g: usize) -> u32 {
        self.depth[g]
    }
    pub fn level(&self, g: usize) -> u32 {
        self.level[g]
    }
    pub fn llevel(&self, g: usize) -> u32 {
        self.llevel[g]
    }
    pub fn alevel(&self, g: usize) -> f64 {
        self.alevel[g]
    }
    pub fn fanout_size(&self, g: usize) -> u32 {
        self.fanout[g]
    }
    pub fn cc0(&self, g: usize) -> u64 {
        self.cc0[g]
    }
    pub fn cc1(&self, g: usize) -> u64 {
        self.cc1[g]
    }
    /// Controllability of `g` to the value it currently holds.
    pub fn cc(&self, g: usize, value: bool) -> u64 {
        if value {
            self.cc1[g]
        } else {
            self.cc0[g]
        }
    }
    pub fn co(&self, g: usize) -> u64 {
        self.co[g]
    }
    pub fn flow(&self, g: usize) -> f64 {
        self.flow[g]
    }

    /// `circuit` must be the circuit this profile was built from.
    pub fn tfo_size(&self, circuit: &Circuit, g: usize) -> u32 {
        debug_assert_eq!(circuit.num_gates(), self.num_gates());
        *self.tfo[g].get_or_init(|| transitive_fanout_size(circuit, g))
    }

    /// `circuit` must be the circuit this profile was built from.
    pub fn tfi_size(&self, circuit: &Circuit, g: usize) -> u32 {
        debug_assert_eq!(circuit.num_gates(), self.num_gates());
        *self.tfi[g].get_or_init(|| transitive_fanin_size(circuit, g))
    }

    /// Every measure of every gate, forcing the transitive closures.
    pub fn rows(&self, circuit: &Circuit) -> Vec<ProfileRow> {
        (0..self.num_gates())
            .map(|g| ProfileRow {
                gate: g,
                depth: self.depth[g],
                level: self.level[g],
                llevel: self.llevel[g],
                alevel: self.alevel[g],
                fo: self.fanout[g],
                tfo: self.tfo_size(circuit, g),
                tfi: self.tfi_size(circuit, g),
                cc0: self.cc0[g],
                cc1: self.cc1[g],
                co: self.co[g],
                flow: self.flow[g],
            })
            .collect()
    }
}

/// Profile CSV: one row per gate with columns
/// `gate,depth,level,llevel,alevel,fo,tfo,tfi,cc0,cc1,co,flow`.
pub fn profile_csv(profile: &StructuralProfile, circuit: &Circuit) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in profile.rows(circuit) {
        w.serialize(row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).unwrap()
}

/// Shorthand for [`StructuralProfile::build`].
pub fn build_profile(circuit: &Circuit) -> StructuralProfile {
    StructuralProfile::build(circuit)
}
