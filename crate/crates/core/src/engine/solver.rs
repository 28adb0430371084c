use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::propagate::{PropagationStats, Propagator};
use super::select::{select_gate, Heuristic};
use super::EngineError;
use crate::circuit::{Assignment, ConstrainedCircuit};
use crate::metrics::StructuralProfile;

/// Parameters of one solver run.
///
/// The random source is ChaCha8 seeded with `seed` and positioned on stream
/// `stream`; the experiment harness keeps `seed` per configuration and uses
/// the try index as the stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub heuristic: Heuristic,
    /// Probability of a random-walk step.
    pub wp: f64,
    /// Maximum number of steps.
    pub cutoff: u64,
    pub seed: u64,
    pub stream: u64,
}

impl SolverConfig {
    pub fn new(heuristic: Heuristic, wp: f64, cutoff: u64, seed: u64) -> Result<Self, EngineError> {
        let config = SolverConfig {
            heuristic,
            wp,
            cutoff,
            seed,
            stream: 0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(0.0..=1.0).contains(&self.wp) {
            return Err(EngineError::InvalidNoise(self.wp));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Status {
    #[serde(rename = "SAT")]
    Sat,
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Sat => "SAT",
            Status::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: Status,
    /// The satisfying assignment when `status` is SAT.
    pub witness: Option<Assignment>,
    pub steps_used: u64,
    pub wall_time: f64,
}

/// Resumable search state of one run.
#[derive(Debug)]
pub struct Solver<'a> {
    cc: &'a ConstrainedCircuit,
    profile: &'a StructuralProfile,
    config: SolverConfig,
    assignment: Assignment,
    rng: ChaCha8Rng,
    steps: u64,
    work: u64,
    last_propagation: PropagationStats,
    propagator: Propagator,
    log: Vec<u32>,
    // flip sets of the candidate justifications, flattened
    cand_gates: Vec<u32>,
    cand_start: Vec<u32>,
    best: Vec<u32>,
}

const EXACTNESS_CHECK_PERIOD: u64 = 1 << 14;

impl<'a> Solver<'a> {
    /// Draws the initial complete extension.
    pub fn new(
        cc: &'a ConstrainedCircuit,
        profile: &'a StructuralProfile,
        config: SolverConfig,
    ) -> Self {
        assert_eq!(cc.circuit().num_gates(), profile.num_gates());
        let mut rng = config.rng();
        let assignment = cc.random_complete_extension(&mut rng);
        Solver {
            cc,
            profile,
            config,
            assignment,
            rng,
            steps: 0,
            work: cc.circuit().num_gates() as u64,
            last_propagation: PropagationStats::default(),
            propagator: Propagator::new(cc.circuit().num_gates()),
            log: Vec::new(),
            cand_gates: Vec::new(),
            cand_start: Vec::new(),
            best: Vec::new(),
        }
    }

    pub fn is_solved(&self) -> bool {
        self.assignment.num_unjust() == 0
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Deterministic effort counter: one unit per step, per queue pop, per
    /// gate scanned during selection, plus the size of the initial extension.
    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Counters of the propagation performed by the last step.
    pub fn last_propagation(&self) -> PropagationStats {
        self.last_propagation
    }

    /// Flip sets of the subset-minimal justifications of `<g, value(g)>`,
    /// skipping those that would change a constrained gate.
    fn collect_candidates(&mut self, g: usize) {
        let circuit = self.cc.circuit();
        let values = self.assignment.values();
        let fanin = circuit.fanin(g);
        self.cand_gates.clear();
        self.cand_start.clear();
        self.cand_start.push(0);
        if values[g] {
            // every child literal must be 1
            for (i, &l) in fanin.iter().enumerate() {
                if fanin[..i].contains(&l) {
                    continue;
                }
                let unusable = fanin.contains(&!l)
                    || (!l.value(values) && self.cc.is_constrained(l.gate()));
                if unusable {
                    self.cand_gates.clear();
                    return;
                }
                if !l.value(values) {
                    self.cand_gates.push(l.gate() as u32);
                }
            }
            self.cand_start.push(self.cand_gates.len() as u32);
        } else {
            // one child literal set to 0
            for (i, &l) in fanin.iter().enumerate() {
                if fanin[..i].contains(&l) {
                    continue;
                }
                if l.value(values) {
                    if self.cc.is_constrained(l.gate()) {
                        continue;
                    }
                    self.cand_gates.push(l.gate() as u32);
                }
                self.cand_start.push(self.cand_gates.len() as u32);
            }
        }
    }

    fn candidate(&self, i: usize) -> (usize, usize) {
        (self.cand_start[i] as usize, self.cand_start[i + 1] as usize)
    }

    /// One search step. Does nothing, and counts no step, when the
    /// assignment is already satisfying.
    pub fn step(&mut self) {
        let circuit = self.cc.circuit();
        let heuristic = self.config.heuristic;
        self.last_propagation = PropagationStats::default();
        let Some(g) = select_gate(
            circuit,
            &self.assignment,
            self.profile,
            heuristic,
            &mut self.rng,
        ) else {
            return;
        };
        self.work += 1 + match heuristic {
            Heuristic::Rand => 0,
            _ => self.assignment.num_unjust() as u64,
        };

        self.collect_candidates(g);
        let count = self.cand_start.len() - 1;
        if count > 0 {
            let choice = if count == 1 {
                0
            } else if self.rng.random::<f64>() < self.config.wp {
                self.rng.random_range(0..count)
            } else {
                self.greedy_choice(count)
            };
            let (lo, hi) = self.candidate(choice);
            let flips: Vec<u32> = self.cand_gates[lo..hi].to_vec();
            for &f in &flips {
                self.assignment.flip(circuit, f as usize);
            }
            let stats = self
                .propagator
                .forward(self.cc, &mut self.assignment, &flips, None);
            self.work += stats.pops as u64;
            self.last_propagation = stats;
        }
        self.steps += 1;

        if cfg!(debug_assertions) && self.steps.is_multiple_of(EXACTNESS_CHECK_PERIOD) {
            assert!(self.assignment.unjust_is_exact(circuit));
            assert!(self
                .cc
                .constraints()
                .all(|(g, v)| self.assignment.value(g) == v));
        }
    }

    fn greedy_choice(&mut self, count: usize) -> usize {
        let mut min = usize::MAX;
        self.best.clear();
        for i in 0..count {
            let (lo, hi) = self.candidate(i);
            let flips = &self.cand_gates[lo..hi];
            let (after, stats) =
                self.propagator
                    .trial(self.cc, &mut self.assignment, flips, &mut self.log);
            self.work += stats.pops as u64;
            if after < min {
                min = after;
                self.best.clear();
            }
            if after == min {
                self.best.push(i as u32);
            }
        }
        if cfg!(debug_assertions) && self.steps.is_multiple_of(EXACTNESS_CHECK_PERIOD) {
            self.check_greedy_minimum(count, min);
        }
        if self.best.len() == 1 {
            self.best[0] as usize
        } else {
            self.best[self.rng.random_range(0..self.best.len())] as usize
        }
    }

    /// Re-scans every candidate on a copy of the assignment and checks that
    /// `min` is the smallest resulting unjust-set size.
    fn check_greedy_minimum(&self, count: usize, min: usize) {
        let circuit = self.cc.circuit();
        let rescanned = (0..count)
            .map(|i| {
                let (lo, hi) = self.candidate(i);
                let mut copy = self.assignment.clone();
                for &g in &self.cand_gates[lo..hi] {
                    copy.flip(circuit, g as usize);
                }
                let flips: Vec<usize> = self.cand_gates[lo..hi].iter().map(|&g| g as usize).collect();
                super::propagate::lbcp_forward(self.cc, &flips, &mut copy);
                Assignment::from_values(circuit, copy.values().to_vec()).num_unjust()
            })
            .min();
        assert_eq!(rescanned, Some(min), "greedy choice is not minimal");
    }

    /// Consumes the solver into a result; SAT only when the current
    /// assignment is satisfying, which is re-verified from scratch.
    pub fn into_result(self, wall_time: f64) -> SolveResult {
        if self.is_solved() {
            assert!(
                self.cc.verify_satisfying(&self.assignment),
                "unjust set empty but assignment does not satisfy the instance"
            );
            SolveResult {
                status: Status::Sat,
                witness: Some(self.assignment),
                steps_used: self.steps,
                wall_time,
            }
        } else {
            SolveResult {
                status: Status::Unknown,
                witness: None,
                steps_used: self.steps,
                wall_time,
            }
        }
    }
}

/// Runs the search loop until the unjust set is empty or `cutoff` steps have
/// been taken.
pub fn crsat_solve(
    cc: &ConstrainedCircuit,
    profile: &StructuralProfile,
    config: &SolverConfig,
) -> SolveResult {
    let start = Instant::now();
    let mut solver = Solver::new(cc, profile, *config);
    while solver.steps() < config.cutoff {
        if solver.is_solved() {
            return solver.into_result(start.elapsed().as_secs_f64());
        }
        solver.step();
    }
    let elapsed = start.elapsed().as_secs_f64();
    let steps = solver.steps();
    SolveResult {
        status: Status::Unknown,
        witness: None,
        steps_used: steps,
        wall_time: elapsed,
    }
}
