use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use roster_core::acs::{run_acs, AcsParams};
use roster_core::boa::{run_boa, BoaParams};
use roster_core::generator::{generate, GenSpec};
use roster_core::model::{ensure_valid, load_instance, save_instance, Instance};
use roster_core::oracle::{exact_optimum, exhaustive_rule_strings, OracleLimits};
use roster_core::report::{parse_csv, render_table, summarize, to_csv, to_csv_rows, RunRecord};
use roster_core::schedule::is_feasible;
use roster_core::solver::SolverResult;
use roster_core::Result;

#[derive(Parser)]
#[command(
    name = "roster",
    version,
    about = "Rule-based nurse rostering: solvers, oracle, instance generator and reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance with a planted feasible schedule.
    Generate(GenerateArgs),
    /// Run a solver; emit one CSV run record per seed.
    Solve(SolveArgs),
    /// Exact optimum by exhaustive enumeration (desk scale only).
    Oracle(OracleArgs),
    /// Aggregate run-record CSVs into a category table.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of nurses.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    nurses: u32,
    /// Number of grade bands.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    grades: u32,
    /// Demand as a fraction of the planted schedule's coverage, in (0, 1].
    #[arg(long, default_value_t = 0.9)]
    tightness: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output instance file (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Day pattern lengths to enumerate, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [4u32, 5])]
    days: Vec<u32>,
    /// Night pattern lengths to enumerate, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [3u32, 4])]
    nights: Vec<u32>,
    /// Fraction of night-contract nurses.
    #[arg(long, default_value_t = 0.3)]
    night_frac: f64,
    /// Fraction of combined-contract nurses.
    #[arg(long, default_value_t = 0.1)]
    combined_frac: f64,
    #[arg(long, default_value_t = 0)]
    cost_min: u32,
    #[arg(long, default_value_t = 100)]
    cost_max: u32,
    /// Instance name (derived from the parameters when omitted).
    #[arg(long)]
    name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Boa,
    Acs,
}

impl Algo {
    fn as_str(self) -> &'static str {
        match self {
            Algo::Boa => "boa",
            Algo::Acs => "acs",
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    /// Instance file (JSON).
    #[arg(long)]
    instance: PathBuf,
    /// Seed of the first run; run r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of independent runs.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    runs: u32,
    /// Iteration cap (BOA generations / ACS steps).
    #[arg(long)]
    iters: Option<u32>,
    /// Population size (BOA only).
    #[arg(long)]
    pop: Option<usize>,
    /// Penalty weight per uncovered shift.
    #[arg(long, default_value_t = 200.0)]
    w_demand: f64,
    /// Evaluation budget (BOA only).
    #[arg(long)]
    evals: Option<u64>,
    /// List length of the k-cheapest rule.
    #[arg(long, default_value_t = 5)]
    k_cheapest: usize,
    /// Output CSV; rewritten unless --append is given.
    #[arg(long)]
    out: PathBuf,
    /// Append rows to an existing CSV instead of rewriting it.
    #[arg(long)]
    append: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleMode {
    /// Enumerate all pattern assignments.
    Assignments,
    /// Enumerate all rule strings under a fixed decode seed.
    Rulestrings,
}

#[derive(Args)]
struct OracleArgs {
    /// Instance file (JSON).
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = OracleMode::Assignments)]
    mode: OracleMode,
    #[arg(long, default_value_t = 200.0)]
    w_demand: f64,
    /// State-count limit for the enumeration.
    #[arg(long, default_value_t = 10_000_000)]
    max_space: u64,
    /// Decode seed (rulestrings mode).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ReportArgs {
    /// Run-record CSV files.
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let spec = GenSpec {
        nurses: args.nurses,
        grades: args.grades,
        day_lengths: args.days,
        night_lengths: args.nights,
        night_fraction: args.night_frac,
        combined_fraction: args.combined_frac,
        tightness: args.tightness,
        cost_min: args.cost_min,
        cost_max: args.cost_max,
        seed: args.seed,
        name: args.name,
    };
    let generated = generate(&spec)?;
    let inst = &generated.instance;
    save_instance(inst, File::create(&args.out)?)?;
    println!(
        "wrote {} (nurses={}, patterns={}, grades={}) to {}",
        inst.name,
        inst.nurse_count(),
        inst.pattern_count(),
        inst.grade_count(),
        args.out.display()
    );
    Ok(())
}

fn load_validated(path: &Path) -> Result<Instance> {
    let inst = load_instance(BufReader::new(File::open(path)?))?;
    ensure_valid(&inst)?;
    Ok(inst)
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let inst = load_validated(&args.instance)?;
    let grades = inst.grades;

    let mut records = Vec::with_capacity(args.runs as usize);
    for run in 0..args.runs {
        let seed = args.seed.wrapping_add(run as u64);
        let started = Instant::now();
        let result: SolverResult = match args.algo {
            Algo::Boa => {
                let mut params = BoaParams::defaults(grades);
                params.seed = seed;
                params.decode.seed = seed;
                params.decode.w_demand = args.w_demand;
                params.decode.k_cheapest_len = args.k_cheapest;
                if let Some(iters) = args.iters {
                    params.max_iterations = iters;
                }
                if let Some(pop) = args.pop {
                    params.pop_size = pop;
                    params.select_count = (pop / 2).max(1);
                    params.offspring_count = (pop / 2).max(1);
                }
                if let Some(budget) = args.evals {
                    params.eval_budget = budget;
                }
                run_boa(&inst, &params)?
            }
            Algo::Acs => {
                let mut params = AcsParams::defaults(grades);
                params.seed = seed;
                params.decode.seed = seed;
                params.decode.w_demand = args.w_demand;
                params.decode.k_cheapest_len = args.k_cheapest;
                if let Some(iters) = args.iters {
                    params.max_iterations = iters;
                }
                run_acs(&inst, &params)?
            }
        };
        let elapsed_ms = started.elapsed().as_millis();
        let feasible = is_feasible(&inst, &result.best_schedule)?;
        eprintln!(
            "# {} seed {}: fitness {} feasible {} evals {} in {} ms",
            args.algo.as_str(),
            seed,
            result.best_fitness,
            feasible,
            result.evaluations,
            elapsed_ms
        );
        records.push(RunRecord::new(
            inst.name.clone(),
            args.algo.as_str(),
            seed,
            result.best_fitness,
            feasible,
            None,
            None,
            result.evaluations,
        ));
    }

    print!("{}", to_csv(&records));
    let append_rows = args.append
        && fs::metadata(&args.out).map(|m| m.len() > 0).unwrap_or(false);
    if append_rows {
        let mut file = fs::OpenOptions::new().append(true).open(&args.out)?;
        file.write_all(to_csv_rows(&records).as_bytes())?;
    } else {
        fs::write(&args.out, to_csv(&records))?;
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let inst = load_validated(&args.instance)?;
    let limits = OracleLimits {
        max_search_space: args.max_space,
    };
    println!("instance: {}", inst.name);
    match args.mode {
        OracleMode::Assignments => {
            let (sched, fit) = exact_optimum(&inst, args.w_demand, &limits)?;
            println!("mode: assignments");
            println!("optimum fitness: {fit}");
            println!("assignment: {}", join_ids(&sched.assignment));
            println!("feasible: {}", is_feasible(&inst, &sched)?);
        }
        OracleMode::Rulestrings => {
            let mut params = roster_core::rules::DecodeParams::for_grades(inst.grades);
            params.w_demand = args.w_demand;
            params.seed = args.seed;
            let (rules, fit) = exhaustive_rule_strings(&inst, &params, &limits)?;
            println!("mode: rulestrings");
            println!("optimum fitness: {fit}");
            println!("rules: {rules}");
        }
    }
    Ok(())
}

fn join_ids(ids: &[u32]) -> String {
    ids.iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let mut records = Vec::new();
    for path in &args.inputs {
        let label = path.display().to_string();
        let file = File::open(path)?;
        records.extend(parse_csv(BufReader::new(file), &label)?);
    }
    print!("{}", render_table(&summarize(&records)));
    Ok(())
}
