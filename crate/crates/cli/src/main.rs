use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crsat::harness::{
    emit_tries_csv, optimize_noise, run_experiment, Budget, Clock, ExperimentConfig, Instance,
    Protocol, DEFAULT_NOISES,
};
use crsat::io::{export_dimacs, generate_random_sat_aig, parse_aiger, write_aiger_ascii};
use crsat::metrics::{profile_csv, ALevelMode, FlowMode, ProfileOptions};
use crsat::{crsat_solve, ConstrainedCircuit, Heuristic, SolverConfig, StructuralProfile};

const EXIT_SAT: u8 = 10;
const EXIT_UNKNOWN: u8 = 20;

/// Stochastic local search for constrained And-Inverter graphs.
#[derive(Parser)]
#[command(name = "crsat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an AIGER instance; exit 10 on SAT, 20 on UNKNOWN.
    Solve {
        /// AIGER file (ASCII or binary), `-` for standard input.
        file: PathBuf,
        #[arg(long, default_value = "rand")]
        heuristic: Heuristic,
        #[arg(long, default_value_t = 0.2)]
        wp: f64,
        #[arg(long, default_value_t = 1_000_000)]
        cutoff: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the witness on SAT [default: FILE.witness].
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Print the structural profile as CSV, one row per gate.
    Metrics {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ALevelArg::SelfConsistent)]
        alevel: ALevelArg,
        #[arg(long, value_enum, default_value_t = FlowArg::Fanin)]
        flow: FlowArg,
    },
    /// Pick the best noise for one heuristic on one instance.
    Tune {
        file: PathBuf,
        #[arg(long)]
        heuristic: Heuristic,
        #[arg(long, default_value_t = 25)]
        tries: usize,
        /// Per-try budget, in units of --clock.
        #[arg(long, default_value_t = 200.0)]
        timeout: f64,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_NOISES)]
        noises: Vec<f64>,
        /// `cpu` (seconds of thread CPU time) or `work` (deterministic units).
        #[arg(long, default_value = "cpu")]
        clock: Clock,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run an experiment described by a TOML config.
    Bench {
        config: PathBuf,
        /// Worker threads (overrides the config; 0 = all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print a random satisfiable instance as ASCII AIGER.
    Gen {
        #[arg(long)]
        inputs: usize,
        #[arg(long)]
        ands: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the instance as DIMACS CNF.
    ExportCnf { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ALevelArg {
    SelfConsistent,
    OverLevel,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlowArg {
    Fanin,
    Fanout,
}

fn read_instance(path: &Path) -> Result<ConstrainedCircuit> {
    let bytes = if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).context("reading standard input")?;
        buf
    } else {
        fs::read(path).with_context(|| format!("reading {}", path.display()))?
    };
    parse_aiger(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn witness_path(file: &Path) -> PathBuf {
    if file == Path::new("-") {
        PathBuf::from("stdin.witness")
    } else {
        let mut name = file.as_os_str().to_owned();
        name.push(".witness");
        PathBuf::from(name)
    }
}

fn run(cli: Cli) -> Result<u8> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Solve {
            file,
            heuristic,
            wp,
            cutoff,
            seed,
            witness,
        } => {
            let cc = read_instance(&file)?;
            let config = SolverConfig::new(heuristic, wp, cutoff, seed)?;
            let start = Instant::now();
            let profile = StructuralProfile::build(cc.circuit());
            let result = crsat_solve(&cc, &profile, &config);
            writeln!(out, "{}", result.status)?;
            writeln!(out, "steps {}", result.steps_used)?;
            eprintln!("time {:.6}", start.elapsed().as_secs_f64());
            match result.witness {
                Some(assignment) => {
                    let path = witness.unwrap_or_else(|| witness_path(&file));
                    let mut text = String::from("gate,value\n");
                    for (g, &v) in assignment.values().iter().enumerate() {
                        text.push_str(&format!("{g},{}\n", u8::from(v)));
                    }
                    fs::write(&path, text)
                        .with_context(|| format!("writing {}", path.display()))?;
                    Ok(EXIT_SAT)
                }
                None => Ok(EXIT_UNKNOWN),
            }
        }
        Command::Metrics { file, alevel, flow } => {
            let cc = read_instance(&file)?;
            let options = ProfileOptions {
                alevel: match alevel {
                    ALevelArg::SelfConsistent => ALevelMode::SelfConsistent,
                    ALevelArg::OverLevel => ALevelMode::OverLevel,
                },
                flow: match flow {
                    FlowArg::Fanin => FlowMode::Fanin,
                    FlowArg::Fanout => FlowMode::Fanout,
                },
            };
            let profile = StructuralProfile::with_options(cc.circuit(), options);
            out.write_all(profile_csv(&profile, cc.circuit()).as_bytes())?;
            Ok(0)
        }
        Command::Tune {
            file,
            heuristic,
            tries,
            timeout,
            noises,
            clock,
            seed,
        } => {
            if tries == 0 || noises.is_empty() {
                bail!("need at least one try and one noise value");
            }
            if timeout.is_nan() || timeout <= 0.0 {
                bail!("timeout must be positive");
            }
            let cc = read_instance(&file)?;
            let instance = Instance::new(file.display().to_string(), cc);
            let budget = Budget {
                clock,
                timeout,
                cutoff: None,
            };
            let protocol = Protocol {
                tries,
                noises,
                ..Protocol::new(budget, seed)
            };
            let selection = optimize_noise(&instance, heuristic, &protocol)?;
            let s = &selection.summary;
            eprintln!(
                "best wp {} (success {}/{}, median time {}, median steps {})",
                selection.best_wp, s.successes, s.tries, s.median_time, s.median_steps
            );
            writeln!(out, "best_wp,{}", selection.best_wp)?;
            out.write_all(emit_tries_csv(&selection.records)?.as_bytes())?;
            Ok(0)
        }
        Command::Bench { config, jobs } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(j) = jobs {
                config.jobs = j;
            }
            let output = run_experiment(&config)?;
            out.write_all(output.report.as_bytes())?;
            eprintln!("results written to {}", config.output_dir.display());
            Ok(0)
        }
        Command::Gen { inputs, ands, seed } => {
            if inputs == 0 || ands == 0 {
                bail!("--inputs and --ands must be at least 1");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cc = generate_random_sat_aig(inputs, ands, &mut rng);
            out.write_all(write_aiger_ascii(&cc)?.as_bytes())?;
            Ok(0)
        }
        Command::ExportCnf { file } => {
            let cc = read_instance(&file)?;
            out.write_all(export_dimacs(&cc).as_bytes())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("crsat: {}", line.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("crsat: {e:#}");
            ExitCode::from(1)
        }
    }
}
