use clap::{Parser, Subcommand};
use kmsat::benchgen::{gen_branch_n, gen_branch_p, gen_random_boxcnf, BranchParams, RandomCnfParams};
use kmsat::formula::{parse, FormulaStore};
use kmsat::satsolver::{read_dimacs, write_dimacs, write_model, SolveResult, Solver, SolverConfig};
use kmsat_cli::bench::{run_suite, worker_count, Suite};
use kmsat_cli::error::{read_file, write_file};
use kmsat_cli::options::OptionFlags;
use kmsat_cli::run::{encode_into, run_formula, RunConfig, SolverChoice};
use kmsat_cli::{exit, CliError, ReportVerdict, RunOptions, RunReport};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

#[derive(Parser)]
#[command(name = "kmsat", version, about = "Decide K_m satisfiability by encoding into SAT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a formula into DIMACS plus a variable map.
    Encode {
        input: PathBuf,
        /// DIMACS output; `-` for stdout.
        #[arg(short, long)]
        output: PathBuf,
        /// Variable map, defaults to `<output>.map`.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        max_bytes: Option<u64>,
        #[command(flatten)]
        flags: OptionFlags,
    },
    /// Encode, solve and check the model.
    Solve {
        input: PathBuf,
        /// Seconds.
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long)]
        max_bytes: Option<u64>,
        /// `embedded` or `external:<command>`.
        #[arg(long, default_value = "embedded")]
        solver: SolverChoice,
        /// Write the Kripke model here when satisfiable.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        flags: OptionFlags,
    },
    /// Generate benchmark formulas.
    Gen {
        #[command(subcommand)]
        family: GenCommand,
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Run a benchmark suite and write a JSON-lines report.
    Bench {
        suite: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Worker threads; defaults to $KMSAT_WORKERS, then the core count.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "embedded")]
        solver: SolverChoice,
    },
    /// Solve a DIMACS file with the embedded solver, competition output.
    Dimacs {
        input: PathBuf,
        #[arg(long)]
        timeout: Option<f64>,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    BranchN {
        #[arg(long)]
        h: u32,
    },
    BranchP {
        #[arg(long)]
        h: u32,
    },
    Random {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kmsat: {e}");
            exit::ERROR
        }
    };
    std::process::exit(code);
}

fn emit(path: &Path, text: &str) -> Result<(), CliError> {
    if path.as_os_str() == "-" {
        print!("{text}");
        Ok(())
    } else {
        write_file(path, text)
    }
}

fn load_formula(store: &mut FormulaStore, path: &Path) -> Result<kmsat::formula::NodeId, CliError> {
    let text = read_file(path)?;
    parse(store, &text).map_err(|source| CliError::Parse { path: path.into(), source })
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Encode { input, output, map, max_bytes, flags } => {
            let mut store = FormulaStore::new();
            let f = load_formula(&mut store, &input)?;
            let config = RunConfig { options: RunOptions::from(flags), max_bytes, ..Default::default() };
            let mut report = RunReport::new(input.to_string_lossy(), config.options);
            let enc = match encode_into(&mut store, f, &config, None, &mut report) {
                Ok(enc) => enc,
                Err(_) => return Err(CliError::Usage(report.error.unwrap_or_else(|| "encoding failed".into()))),
            };
            if enc.trivial.is_some() {
                report.verdict = Some(ReportVerdict::Unsat);
            }
            emit(&output, &write_dimacs(&enc.cnf))?;
            let map = map.unwrap_or_else(|| {
                let mut p = output.clone().into_os_string();
                p.push(".map");
                p.into()
            });
            if output.as_os_str() != "-" {
                write_file(&map, &enc.sidecar(&store))?;
                println!("{}", report.to_json());
            }
            Ok(exit::SAT)
        }
        Command::Solve { input, timeout, max_bytes, solver, model, flags } => {
            let mut store = FormulaStore::new();
            let f = load_formula(&mut store, &input)?;
            let config = RunConfig {
                options: RunOptions::from(flags),
                solver,
                timeout: timeout.map(Duration::from_secs_f64),
                max_bytes,
            };
            let run = run_formula(&input.to_string_lossy(), &mut store, f, &config);
            println!("{}", run.report.to_json());
            if let (Some(path), Some(m)) = (model, &run.model) {
                write_file(&path, &m.to_dump())?;
            }
            if let Some(e) = &run.report.error {
                eprintln!("kmsat: {e}");
            }
            Ok(run.report.verdict.map_or(exit::ERROR, ReportVerdict::exit_code))
        }
        Command::Gen { family, output } => {
            let mut store = FormulaStore::new();
            let (manifest, f) = match family {
                GenCommand::BranchN { h } => {
                    (format!("kmsat-gen branch-n h={h}"), gen_branch_n(&mut store, BranchParams { h })?)
                }
                GenCommand::BranchP { h } => {
                    (format!("kmsat-gen branch-p h={h}"), gen_branch_p(&mut store, BranchParams { h })?)
                }
                GenCommand::Random { d, l, k, n, m, p, seed } => {
                    let params = RandomCnfParams { d, l, k, n, m, p, seed };
                    (params.manifest(), gen_random_boxcnf(&mut store, &params)?)
                }
            };
            let text = format!("; {manifest}\n{}\n", store.display(f));
            emit(output.as_deref().unwrap_or(Path::new("-")), &text)?;
            Ok(exit::SAT)
        }
        Command::Bench { suite, output, workers, solver } => {
            let suite = Suite::load(&suite)?;
            let report = run_suite(&suite, solver, worker_count(workers))?;
            emit(output.as_deref().unwrap_or(Path::new("-")), &report.to_jsonl())?;
            for p in &report.points {
                eprintln!(
                    "{:<24} solved {}/{} sat-fraction {} p50 {} ms p90 {} ms",
                    p.point,
                    p.solved,
                    p.instances,
                    p.sat_fraction.map_or("-".into(), |v| format!("{v:.2}")),
                    p.p50_ms.map_or("-".into(), |v| format!("{v:.1}")),
                    p.p90_ms.map_or("-".into(), |v| format!("{v:.1}")),
                );
            }
            Ok(exit::SAT)
        }
        Command::Dimacs { input, timeout } => {
            let cnf = read_dimacs(&read_file(&input)?)?;
            let deadline = timeout.map(|t| Instant::now() + Duration::from_secs_f64(t));
            match Solver::new(&cnf, SolverConfig::default()).solve(deadline) {
                SolveResult::Sat(m) => {
                    print!("{}", write_model(Some(&m)));
                    Ok(exit::SAT)
                }
                SolveResult::Unsat => {
                    print!("{}", write_model(None));
                    Ok(exit::UNSAT)
                }
                SolveResult::Timeout => {
                    println!("s UNKNOWN");
                    Ok(exit::TIMEOUT)
                }
            }
        }
    }
}
