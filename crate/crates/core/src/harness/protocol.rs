//! Tries, per-instance noise tuning and summaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::clock::{thread_cpu_time, Budget, Clock};
use super::HarnessError;
use crate::circuit::ConstrainedCircuit;
use crate::engine::{Heuristic, Solver, SolverConfig, Status};
use crate::metrics::StructuralProfile;

/// Noise grid of the tuning protocol.
pub const DEFAULT_NOISES: [f64; 6] = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
pub const DEFAULT_TRIES: usize = 25;
/// Step count reported for tries and instances without a solution.
pub const CENSORED_STEPS: u64 = 10_000_000;
/// Instances whose reference median is below this many steps are trivial.
pub const DEFAULT_TRIVIAL_THRESHOLD: u64 = 730;

/// A named instance with its precomputed profile.
#[derive(Debug)]
pub struct Instance {
    pub id: String,
    pub cc: ConstrainedCircuit,
    pub profile: StructuralProfile,
}

impl Instance {
    pub fn new(id: impl Into<String>, cc: ConstrainedCircuit) -> Self {
        let profile = StructuralProfile::build(cc.circuit());
        Instance {
            id: id.into(),
            cc,
            profile,
        }
    }
}

/// One solver run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TryRecord {
    pub instance: String,
    pub heuristic: Heuristic,
    pub wp: f64,
    pub seed: u64,
    #[serde(rename = "try")]
    pub try_index: u64,
    pub outcome: Status,
    pub steps: u64,
    /// In the unit of the budget's clock; equal to the timeout for timeouts.
    pub wall_time: f64,
}

/// Aggregate of the tries of one instance at one noise setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub instance: String,
    pub heuristic: Heuristic,
    pub best_wp: f64,
    pub tries: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub median_time: f64,
    pub median_steps: u64,
    pub solved: bool,
}

impl InstanceSummary {
    /// Median steps, or the censored value when the instance is unsolved.
    pub fn censored_steps(&self) -> u64 {
        if self.solved {
            self.median_steps
        } else {
            CENSORED_STEPS
        }
    }
}

/// Tuning result for one instance and heuristic.
#[derive(Debug, Clone)]
pub struct NoiseSelection {
    pub best_wp: f64,
    /// Summary of the tries at `best_wp`.
    pub summary: InstanceSummary,
    /// Every try at every candidate noise, grouped by candidate.
    pub records: Vec<TryRecord>,
}

/// Protocol parameters shared by all tries of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub tries: usize,
    pub budget: Budget,
    pub noises: Vec<f64>,
    pub master_seed: u64,
}

impl Protocol {
    pub fn new(budget: Budget, master_seed: u64) -> Self {
        Protocol {
            tries: DEFAULT_TRIES,
            budget,
            noises: DEFAULT_NOISES.to_vec(),
            master_seed,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

fn mix(parts: &[u64]) -> u64 {
    parts.iter().fold(0, |acc, &p| splitmix64(acc ^ p))
}

/// Seed of every try of one (instance, heuristic, noise) configuration. Try
/// `k` runs on ChaCha8 stream `k` of this seed.
pub fn config_seed(master_seed: u64, instance: &str, heuristic: Heuristic, wp: f64) -> u64 {
    mix(&[
        master_seed,
        fnv1a(instance.as_bytes()),
        fnv1a(heuristic.to_string().as_bytes()),
        wp.to_bits(),
    ])
}

/// Seed of the tie-breaking stream used when ranking noise candidates.
pub fn tie_break_seed(master_seed: u64, instance: &str, heuristic: Heuristic) -> u64 {
    mix(&[
        master_seed,
        fnv1a(instance.as_bytes()),
        fnv1a(heuristic.to_string().as_bytes()),
        fnv1a(b"noise-tie-break"),
    ])
}

/// Runs one try under `budget`. A SAT outcome is recorded only after the
/// witness re-verifies, and only if it was found within the budget.
pub fn run_try(
    instance: &Instance,
    heuristic: Heuristic,
    wp: f64,
    seed: u64,
    try_index: u64,
    budget: &Budget,
) -> Result<TryRecord, HarnessError> {
    let config = SolverConfig {
        heuristic,
        wp,
        cutoff: budget.cutoff.unwrap_or(u64::MAX),
        seed,
        stream: try_index,
    };
    config.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    let started = thread_cpu_time();
    let elapsed = |solver: &Solver<'_>| match budget.clock {
        Clock::Cpu => thread_cpu_time() - started,
        Clock::Work => solver.work() as f64,
    };
    let mut solver = Solver::new(&instance.cc, &instance.profile, config);
    let mut time = elapsed(&solver);
    loop {
        if solver.is_solved() || solver.steps() >= config.cutoff || time >= budget.timeout {
            break;
        }
        solver.step();
        if budget.clock == Clock::Work || solver.steps().is_multiple_of(64) {
            time = elapsed(&solver);
        }
    }
    time = elapsed(&solver);
    let mut outcome = Status::Unknown;
    if solver.is_solved() {
        if !instance.cc.verify_satisfying(solver.assignment()) {
            return Err(HarnessError::UnverifiedWitness {
                instance: instance.id.clone(),
                seed,
                try_index,
            });
        }
        if time <= budget.timeout {
            outcome = Status::Sat;
        }
    }
    if outcome == Status::Unknown && time >= budget.timeout {
        time = budget.timeout;
    }
    Ok(TryRecord {
        instance: instance.id.clone(),
        heuristic,
        wp,
        seed,
        try_index,
        outcome,
        steps: solver.steps(),
        wall_time: time,
    })
}

/// Lower median: the element at index `(n - 1) / 2` of the sorted values.
pub fn lower_median<T: Copy>(values: &mut [T], cmp: impl Fn(&T, &T) -> std::cmp::Ordering) -> T {
    assert!(!values.is_empty(), "median of an empty list");
    values.sort_by(cmp);
    values[(values.len() - 1) / 2]
}

/// Aggregates the `tries` records of one configuration. Unsuccessful tries
/// count at their recorded (censored) time and at [`CENSORED_STEPS`].
pub fn summarize(records: &[TryRecord], tries: usize) -> Result<InstanceSummary, HarnessError> {
    if records.len() != tries || tries == 0 {
        return Err(HarnessError::IncompleteRecords {
            expected: tries,
            found: records.len(),
        });
    }
    let first = &records[0];
    if records
        .iter()
        .any(|r| r.instance != first.instance || r.heuristic != first.heuristic || r.wp != first.wp)
    {
        return Err(HarnessError::Config(
            "records of different configurations cannot be summarized together".into(),
        ));
    }
    let successes = records.iter().filter(|r| r.outcome == Status::Sat).count();
    let mut times: Vec<f64> = records.iter().map(|r| r.wall_time).collect();
    let mut steps: Vec<u64> = records
        .iter()
        .map(|r| match r.outcome {
            Status::Sat => r.steps,
            Status::Unknown => CENSORED_STEPS,
        })
        .collect();
    Ok(InstanceSummary {
        instance: first.instance.clone(),
        heuristic: first.heuristic,
        best_wp: first.wp,
        tries,
        successes,
        success_rate: successes as f64 / tries as f64,
        median_time: lower_median(&mut times, |a, b| a.total_cmp(b)),
        median_steps: lower_median(&mut steps, Ord::cmp),
        solved: 2 * successes >= tries,
    })
}

/// Index of the best candidate: highest success rate, then lowest median
/// time; remaining ties are broken uniformly with `rng`.
pub fn rank_candidates<R: Rng + ?Sized>(summaries: &[InstanceSummary], rng: &mut R) -> usize {
    assert!(!summaries.is_empty());
    let better = |a: &InstanceSummary, b: &InstanceSummary| {
        a.successes * b.tries > b.successes * a.tries
            || (a.successes * b.tries == b.successes * a.tries && a.median_time < b.median_time)
    };
    let same = |a: &InstanceSummary, b: &InstanceSummary| {
        a.successes * b.tries == b.successes * a.tries && a.median_time == b.median_time
    };
    let mut best = 0;
    for i in 1..summaries.len() {
        if better(&summaries[i], &summaries[best]) {
            best = i;
        }
    }
    let tied: Vec<usize> = (0..summaries.len())
        .filter(|&i| same(&summaries[i], &summaries[best]))
        .collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.random_range(0..tied.len())]
    }
}

/// A single try to run: indices into the instance list and noise grid.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Job {
    pub instance: usize,
    pub heuristic: Heuristic,
    pub noise: usize,
    pub try_index: u64,
}

/// Runs jobs on the current rayon pool; results keep the job order.
pub(crate) fn run_jobs(
    instances: &[Instance],
    jobs: &[Job],
    protocol: &Protocol,
) -> Result<Vec<TryRecord>, HarnessError> {
    jobs.par_iter()
        .map(|job| {
            let inst = &instances[job.instance];
            let wp = protocol.noises[job.noise];
            let seed = config_seed(protocol.master_seed, &inst.id, job.heuristic, wp);
            run_try(inst, job.heuristic, wp, seed, job.try_index, &protocol.budget)
        })
        .collect()
}

/// Picks the best noise from the per-candidate records of one instance and
/// heuristic (records grouped by candidate, `tries` each).
pub(crate) fn select_noise(
    instance: &str,
    heuristic: Heuristic,
    records: Vec<TryRecord>,
    protocol: &Protocol,
) -> Result<NoiseSelection, HarnessError> {
    let summaries = records
        .chunks(protocol.tries)
        .map(|chunk| summarize(chunk, protocol.tries))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(tie_break_seed(protocol.master_seed, instance, heuristic));
    let best = rank_candidates(&summaries, &mut rng);
    Ok(NoiseSelection {
        best_wp: protocol.noises[best],
        summary: summaries[best].clone(),
        records,
    })
}

/// Tunes the noise of one heuristic on one instance: `tries` runs per
/// candidate with no step limit beyond the budget.
pub fn optimize_noise(
    instance: &Instance,
    heuristic: Heuristic,
    protocol: &Protocol,
) -> Result<NoiseSelection, HarnessError> {
    if protocol.noises.is_empty() || protocol.tries == 0 {
        return Err(HarnessError::Config(
            "need at least one noise candidate and one try".into(),
        ));
    }
    let jobs: Vec<Job> = (0..protocol.noises.len())
        .flat_map(|noise| {
            (0..protocol.tries as u64).map(move |try_index| Job {
                instance: 0,
                heuristic,
                noise,
                try_index,
            })
        })
        .collect();
    let records = run_jobs(std::slice::from_ref(instance), &jobs, protocol)?;
    select_noise(&instance.id, heuristic, records, protocol)
}

/// Splits summaries into `(trivial, retained)` by median steps.
pub fn filter_trivial(
    summaries: &[InstanceSummary],
    threshold: u64,
) -> (Vec<InstanceSummary>, Vec<InstanceSummary>) {
    summaries
        .iter()
        .cloned()
        .partition(|s| s.median_steps < threshold)
}
