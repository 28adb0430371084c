//! Whole experiments driven by a TOML config file.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::clock::{Budget, Clock};
use super::protocol::{
    filter_trivial, run_jobs, select_noise, Instance, InstanceSummary, Job, Protocol, TryRecord,
    DEFAULT_NOISES, DEFAULT_TRIES, DEFAULT_TRIVIAL_THRESHOLD,
};
use super::report::{emit_cactus_csv, emit_scatter_csv, emit_summaries_csv, emit_tries_csv};
use super::HarnessError;
use crate::engine::Heuristic;
use crate::io::{generate_random_sat_aig, parse_aiger};
use crate::metrics::Measure;

/// A suite of random satisfiable instances built from one seed.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub count: usize,
    pub inputs: usize,
    pub ands_min: usize,
    pub ands_max: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Experiment description. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub instances: Vec<PathBuf>,
    pub generate: Option<GenerateConfig>,
    pub heuristics: Vec<Heuristic>,
    #[serde(default = "default_noises")]
    pub noises: Vec<f64>,
    #[serde(default = "default_tries")]
    pub tries: usize,
    /// Per-try budget in the unit of `clock` (seconds or work units).
    #[serde(default = "default_timeout")]
    pub timeout: f64,
    #[serde(default)]
    pub clock: Clock,
    pub cutoff: Option<u64>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub jobs: usize,
    /// Heuristic pairs written to scatter.csv.
    #[serde(default)]
    pub scatter: Vec<[Heuristic; 2]>,
    /// Heuristic whose median steps decide which instances are trivial.
    pub trivial_reference: Option<Heuristic>,
    #[serde(default = "default_trivial_threshold")]
    pub trivial_threshold: u64,
}

fn default_noises() -> Vec<f64> {
    DEFAULT_NOISES.to_vec()
}
fn default_tries() -> usize {
    DEFAULT_TRIES
}
fn default_timeout() -> f64 {
    20.0
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}
fn default_trivial_threshold() -> u64 {
    DEFAULT_TRIVIAL_THRESHOLD
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::File {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in config.instances.iter_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if config.output_dir.is_relative() {
            config.output_dir = base.join(&config.output_dir);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let err = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.heuristics.is_empty() {
            return err("at least one heuristic is required");
        }
        if self.noises.is_empty() || self.noises.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return err("noises must be a nonempty list of probabilities");
        }
        if self.tries == 0 {
            return err("tries must be at least 1");
        }
        if self.timeout.is_nan() || self.timeout <= 0.0 {
            return err("timeout must be positive");
        }
        if self.instances.is_empty() && self.generate.is_none() {
            return err("no instances listed and no [generate] section");
        }
        if let Some(g) = &self.generate {
            if g.inputs == 0 || g.ands_min == 0 || g.ands_min > g.ands_max {
                return err("[generate] needs inputs >= 1 and 1 <= ands_min <= ands_max");
            }
        }
        let known = |h: &Heuristic| self.heuristics.contains(h);
        if self.scatter.iter().flatten().any(|h| !known(h)) {
            return err("scatter pairs must name configured heuristics");
        }
        if self.trivial_reference.as_ref().is_some_and(|h| !known(h)) {
            return err("trivial_reference must be a configured heuristic");
        }
        Ok(())
    }

    pub fn protocol(&self) -> Protocol {
        Protocol {
            tries: self.tries,
            budget: Budget {
                clock: self.clock,
                timeout: self.timeout,
                cutoff: self.cutoff,
            },
            noises: self.noises.clone(),
            master_seed: self.master_seed,
        }
    }

    /// Loads the listed files and builds the generated suite.
    pub fn load_instances(&self) -> Result<Vec<Instance>, HarnessError> {
        let mut instances = Vec::new();
        for path in &self.instances {
            let bytes = fs::read(path).map_err(|e| HarnessError::File {
                path: path.clone(),
                source: e,
            })?;
            let cc = parse_aiger(&bytes).map_err(|e| HarnessError::Aiger {
                path: path.clone(),
                source: e,
            })?;
            instances.push(Instance::new(path.display().to_string(), cc));
        }
        if let Some(g) = &self.generate {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            let width = g.count.saturating_sub(1).to_string().len().max(3);
            for i in 0..g.count {
                let ands = rng.random_range(g.ands_min..=g.ands_max);
                let cc = generate_random_sat_aig(g.inputs, ands, &mut rng);
                instances.push(Instance::new(format!("gen-{i:0width$}"), cc));
            }
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = instances.iter().find(|i| !seen.insert(i.id.as_str())) {
            return Err(HarnessError::Config(format!("duplicate instance id {}", dup.id)));
        }
        Ok(instances)
    }
}

/// Everything an experiment produced, also written to the output directory.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<TryRecord>,
    /// One per (instance, heuristic), at the tuned noise; instance-major.
    pub summaries: Vec<InstanceSummary>,
    /// Ids removed by the trivial filter.
    pub trivial: Vec<String>,
    pub tries_csv: String,
    pub summaries_csv: String,
    pub cactus_csv: String,
    pub scatter_csv: String,
    pub report: String,
}

/// Runs every (instance, heuristic, noise, try) job on a pool of
/// `config.jobs` workers, tunes the noise per instance and heuristic, and
/// writes tries.csv, summaries.csv, cactus.csv, scatter.csv and report.txt.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    config.validate()?;
    let instances = config.load_instances()?;
    let protocol = config.protocol();
    let per_config = protocol.tries;
    let mut jobs = Vec::new();
    for (i, _) in instances.iter().enumerate() {
        for &h in &config.heuristics {
            for noise in 0..protocol.noises.len() {
                for t in 0..per_config as u64 {
                    jobs.push(Job {
                        instance: i,
                        heuristic: h,
                        noise,
                        try_index: t,
                    });
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let records = pool.install(|| run_jobs(&instances, &jobs, &protocol))?;

    let group = protocol.noises.len() * per_config;
    let mut summaries = Vec::new();
    for (k, chunk) in records.chunks(group).enumerate() {
        let inst = &instances[k / config.heuristics.len()];
        let h = config.heuristics[k % config.heuristics.len()];
        summaries.push(select_noise(&inst.id, h, chunk.to_vec(), &protocol)?.summary);
    }

    let trivial: Vec<String> = match config.trivial_reference {
        Some(reference) => {
            let refs: Vec<InstanceSummary> = summaries
                .iter()
                .filter(|s| s.heuristic == reference)
                .cloned()
                .collect();
            filter_trivial(&refs, config.trivial_threshold)
                .0
                .into_iter()
                .map(|s| s.instance)
                .collect()
        }
        None => Vec::new(),
    };
    let retained: Vec<InstanceSummary> = summaries
        .iter()
        .filter(|s| !trivial.contains(&s.instance))
        .cloned()
        .collect();

    let tries_csv = emit_tries_csv(&records)?;
    let summaries_csv = emit_summaries_csv(&summaries)?;
    let cactus_csv = emit_cactus_csv(&retained)?;
    let mut scatter_csv = String::new();
    for (n, [a, b]) in config.scatter.iter().enumerate() {
        let side = |h: &Heuristic| -> Vec<InstanceSummary> {
            retained.iter().filter(|s| s.heuristic == *h).cloned().collect()
        };
        let text = emit_scatter_csv(&side(a), &side(b))?;
        // one header for the whole file
        let body = if n == 0 { &text[..] } else { text.split_once('\n').map_or("", |x| x.1) };
        scatter_csv.push_str(body);
    }
    if config.scatter.is_empty() {
        scatter_csv = emit_scatter_csv(&[], &[])?;
    }
    let report = render_report(config, &instances, &retained, &trivial);

    fs::create_dir_all(&config.output_dir).map_err(|e| HarnessError::File {
        path: config.output_dir.clone(),
        source: e,
    })?;
    for (name, text) in [
        ("tries.csv", &tries_csv),
        ("summaries.csv", &summaries_csv),
        ("cactus.csv", &cactus_csv),
        ("scatter.csv", &scatter_csv),
        ("report.txt", &report),
    ] {
        let path = config.output_dir.join(name);
        fs::write(&path, text).map_err(|e| HarnessError::File { path, source: e })?;
    }
    Ok(ExperimentOutput {
        records,
        summaries,
        trivial,
        tries_csv,
        summaries_csv,
        cactus_csv,
        scatter_csv,
        report,
    })
}

/// Ratio statistics of one heuristic against a baseline over shared instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRatio {
    /// Geometric mean of per-instance censored median-step ratios.
    pub geometric_mean: f64,
    /// Median of the per-instance ratios.
    pub median: f64,
}

/// Per-instance ratios `steps(h) / steps(baseline)` with steps censored and
/// clamped to at least 1.
pub fn median_step_ratio(
    summaries: &[InstanceSummary],
    heuristic: Heuristic,
    baseline: Heuristic,
) -> Option<StepRatio> {
    let base: HashMap<&str, u64> = summaries
        .iter()
        .filter(|s| s.heuristic == baseline)
        .map(|s| (s.instance.as_str(), s.censored_steps().max(1)))
        .collect();
    let mut ratios: Vec<f64> = summaries
        .iter()
        .filter(|s| s.heuristic == heuristic)
        .filter_map(|s| {
            base.get(s.instance.as_str())
                .map(|&b| s.censored_steps().max(1) as f64 / b as f64)
        })
        .collect();
    if ratios.is_empty() {
        return None;
    }
    let log_mean = ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64;
    let median = super::protocol::lower_median(&mut ratios, |a, b| a.total_cmp(b));
    Some(StepRatio {
        geometric_mean: log_mean.exp(),
        median,
    })
}

fn render_report(
    config: &ExperimentConfig,
    instances: &[Instance],
    retained: &[InstanceSummary],
    trivial: &[String],
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "instances: {}", instances.len());
    match config.trivial_reference {
        Some(h) => {
            let _ = writeln!(
                out,
                "trivial (median steps of {h} < {}): {}",
                config.trivial_threshold,
                trivial.len()
            );
        }
        None => {
            let _ = writeln!(out, "trivial filter: off");
        }
    }
    let _ = writeln!(out, "retained: {}", instances.len() - trivial.len());
    let _ = writeln!(
        out,
        "protocol: tries={} timeout={} clock={:?} noises={:?} master_seed={}",
        config.tries, config.timeout, config.clock, config.noises, config.master_seed
    );
    let baseline = if config.heuristics.contains(&Heuristic::Rand) {
        Heuristic::Rand
    } else {
        config.heuristics[0]
    };
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "heuristic\tsolved\tmedian_steps\tratio_vs_{baseline}_geomean\tratio_vs_{baseline}_median"
    );
    for &h in &config.heuristics {
        let rows: Vec<&InstanceSummary> = retained.iter().filter(|s| s.heuristic == h).collect();
        let solved = rows.iter().filter(|s| s.solved).count();
        let mut steps: Vec<u64> = rows.iter().map(|s| s.censored_steps()).collect();
        let median = if steps.is_empty() {
            "-".to_string()
        } else {
            super::protocol::lower_median(&mut steps, Ord::cmp).to_string()
        };
        let (geo, med) = match median_step_ratio(retained, h, baseline) {
            Some(r) => (format!("{:.4}", r.geometric_mean), format!("{:.4}", r.median)),
            None => ("-".into(), "-".into()),
        };
        let _ = writeln!(out, "{h}\t{solved}/{}\t{median}\t{geo}\t{med}", rows.len());
    }
    let tfi = Heuristic::Min(Measure::Tfi);
    let depth = Heuristic::Max(Measure::Depth);
    if [tfi, depth, Heuristic::Rand].iter().all(|h| config.heuristics.contains(h)) {
        let steps_of = |h: Heuristic, id: &str| {
            retained
                .iter()
                .find(|s| s.heuristic == h && s.instance == id)
                .map(|s| s.censored_steps())
        };
        let ids: Vec<&str> = retained
            .iter()
            .filter(|s| s.heuristic == Heuristic::Rand)
            .map(|s| s.instance.as_str())
            .collect();
        let ordered = ids
            .iter()
            .filter(|id| {
                match (steps_of(tfi, id), steps_of(depth, id), steps_of(Heuristic::Rand, id)) {
                    (Some(t), Some(d), Some(r)) => t <= d && d <= r,
                    _ => false,
                }
            })
            .count();
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "ranking tfi-min <= depth-max <= rand (median steps): {ordered}/{} instances, majority: {}",
            ids.len(),
            if 2 * ordered > ids.len() { "yes" } else { "no" }
        );
    }
    out
}
