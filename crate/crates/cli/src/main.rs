//! `stubborn`: closed-form metrics, Monte Carlo estimation, absorbing-walk
//! inspection, mixed-strategy composition and dominance-map sweeps for
//! block-withholding mining strategies.
//!
//! Exit codes: 0 on success, 2 for invalid arguments or domain errors, 3 for
//! I/O failures, 4 for internal-consistency failures.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use stubborn_mining::params::{NetworkParams, StrategyId};
use stubborn_mining::sweep::{self, MapMode, SweepConfig};
use stubborn_mining::{analytic, hiker, mixed, simulator, Error};

#[derive(Parser)]
#[command(
    name = "stubborn",
    version,
    about = "Profitability analysis of block-withholding mining strategies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form cycle metrics for a trail-stubborn strategy
    Analytic(AnalyticArgs),
    /// Monte Carlo estimates of the cycle metrics with standard errors
    Simulate(SimulateArgs),
    /// Closed forms (and optionally oracle values) for the absorbing walk
    Hiker(HikerArgs),
    /// Compose a pattern of strategies and check the no-advantage bound
    Mixed(MixedArgs),
    /// Dominance map over the (q, gamma) plane
    Sweep(Box<SweepArgs>),
}

#[derive(Args)]
struct AnalyticArgs {
    /// Attacker relative hashrate, in [0, 0.5)
    #[arg(long)]
    q: f64,
    /// Fraction of honest hashpower mining on the attacker's fork
    #[arg(long)]
    gamma: f64,
    /// Trail threshold A >= 1
    #[arg(long)]
    a: u32,
    /// Mean inter-block time of the network
    #[arg(long, default_value_t = 1.0)]
    tau0: f64,
    /// Block reward
    #[arg(long, default_value_t = 1.0)]
    reward: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Honest,
    Sm,
    Lsm,
    Tsm,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    /// Trail threshold A >= 1 (tsm only)
    #[arg(long)]
    a: Option<u32>,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    gamma: f64,
    /// Number of independent attack cycles
    #[arg(long)]
    cycles: u64,
    /// Master seed; a fixed seed gives bit-identical output at any worker count
    #[arg(long)]
    seed: u64,
    /// Worker threads (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct HikerArgs {
    /// Start position
    #[arg(long)]
    m: u32,
    /// Right absorbing boundary M >= 2
    #[arg(long = "capital-m")]
    capital_m: u32,
    /// Probability of a +1 step, strictly between 0.5 and 1
    #[arg(long)]
    p: f64,
    /// Also solve the absorbing chain directly and print the oracle values
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MixedArgs {
    /// Comma-separated strategy pattern, e.g. "tsm:2,honest"
    #[arg(long)]
    pattern: String,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config file (flat `key = value` lines)
    #[arg(long)]
    grid: PathBuf,
    /// Output file
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    format: OutputFormat,
    /// Overrides for the config file
    #[arg(long)]
    q_min: Option<f64>,
    #[arg(long)]
    q_max: Option<f64>,
    #[arg(long)]
    q_steps: Option<usize>,
    #[arg(long)]
    gamma_min: Option<f64>,
    #[arg(long)]
    gamma_max: Option<f64>,
    #[arg(long)]
    gamma_steps: Option<usize>,
    /// Comma-separated trail thresholds (fig1 mode)
    #[arg(long)]
    a_values: Option<String>,
    /// Comma-separated strategy set (dominance mode)
    #[arg(long)]
    strategies: Option<String>,
    /// `analytic` or `simulation`
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    cycles: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// `dominance` or `fig1`
    #[arg(long)]
    mode: Option<String>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Json(_) => 3,
        Error::InternalInconsistency(_)
        | Error::SingularSystem
        | Error::EventCapExceeded(_)
        | Error::StepCapExceeded(_) => 4,
        _ => 2,
    }
}

fn run(cli: Cli) -> stubborn_mining::Result<()> {
    match cli.command {
        Command::Analytic(args) => run_analytic(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Hiker(args) => run_hiker(args),
        Command::Mixed(args) => run_mixed(args),
        Command::Sweep(args) => run_sweep(*args),
    }
}

fn run_analytic(args: AnalyticArgs) -> stubborn_mining::Result<()> {
    let params = NetworkParams::new(args.q, args.gamma, args.tau0, args.reward)?;
    let strategy = StrategyId::trail_stubborn(args.a)?;
    let m = analytic::tsm_metrics(&params, args.a);
    let scaled = json!({
        "strategy": strategy.to_string(),
        "q": args.q,
        "gamma": args.gamma,
        "tau0": args.tau0,
        "reward": args.reward,
        "e_duration": m.e_duration * args.tau0,
        "e_revenue": m.e_revenue * args.reward,
        "e_official": m.e_official,
        "delta": m.delta,
        "revenue_ratio": m.revenue_ratio * args.reward / args.tau0,
        "apparent_hashrate": m.apparent_hashrate,
    });
    if args.json {
        println!("{}", serde_json::to_string_pretty(&scaled)?);
    } else {
        println!("strategy            {strategy}  (q = {}, gamma = {})", args.q, args.gamma);
        println!("E[duration]         {:.17}", m.e_duration * args.tau0);
        println!("E[revenue]          {:.17}", m.e_revenue * args.reward);
        println!("E[official blocks]  {:.17}", m.e_official);
        println!("delta               {:.17}", m.delta);
        println!("revenue ratio       {:.17}", m.revenue_ratio * args.reward / args.tau0);
        println!("apparent hashrate   {:.17}", m.apparent_hashrate);
    }
    Ok(())
}

fn resolve_strategy(strategy: StrategyArg, a: Option<u32>) -> stubborn_mining::Result<StrategyId> {
    match (strategy, a) {
        (StrategyArg::Tsm, Some(a)) => StrategyId::trail_stubborn(a),
        (StrategyArg::Tsm, None) => {
            Err(Error::InvalidArgument("--a is required for --strategy tsm".to_string()))
        }
        (_, Some(_)) => {
            Err(Error::InvalidArgument("--a only applies to --strategy tsm".to_string()))
        }
        (StrategyArg::Honest, None) => Ok(StrategyId::Honest),
        (StrategyArg::Sm, None) => Ok(StrategyId::SelfishMining),
        (StrategyArg::Lsm, None) => Ok(StrategyId::LEAD_STUBBORN),
    }
}

fn run_simulate(args: SimulateArgs) -> stubborn_mining::Result<()> {
    let params = NetworkParams::unit(args.q, args.gamma)?;
    let strategy = resolve_strategy(args.strategy, args.a)?;
    if args.cycles == 0 {
        return Err(Error::InvalidArgument("--cycles must be at least 1".to_string()));
    }
    let summary = match args.threads {
        None => simulator::estimate_metrics(strategy, &params, args.cycles, args.seed)?,
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("--threads {threads}: {e}")))?;
            pool.install(|| simulator::estimate_metrics(strategy, &params, args.cycles, args.seed))?
        }
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
        return Ok(());
    }
    println!(
        "strategy {strategy}  q = {}  gamma = {}  cycles = {}  seed = {}",
        args.q, args.gamma, args.cycles, args.seed
    );
    let row = |name: &str, e: simulator::Estimate| {
        println!("{name:<22} {:<24.17} +- {:.3e}", e.mean, e.std_error);
    };
    row("revenue ratio", summary.revenue_ratio);
    row("difficulty delta", summary.difficulty_adjustment);
    row("apparent hashrate", summary.apparent_hashrate);
    row("E[duration]", summary.e_duration);
    row("E[revenue]", summary.e_revenue);
    row("E[official blocks]", summary.e_official);
    row("P[trail phase]", summary.p_sigma);
    row("E[N'(tau)]", summary.e_n_prime);
    if let Some(steps) = summary.e_sigma_steps {
        println!("trail cycles           {}", summary.sigma_cycles);
        row("E[trail steps]", steps);
    }
    if !summary.z_table.is_empty() {
        println!("conditional Z(tau) by N'(tau):");
        for z in &summary.z_table {
            println!(
                "  n = {:<3} samples = {:<10} mean = {:<22.17} +- {:.3e}",
                z.n_prime, z.samples, z.mean, z.std_error
            );
        }
    }
    Ok(())
}

fn run_hiker(args: HikerArgs) -> stubborn_mining::Result<()> {
    let problem = hiker::HikerProblem::new(args.m, args.capital_m, args.p)?;
    let forms = hiker::closed_forms(&problem)?;
    let oracle = if args.oracle {
        Some(hiker::absorption_oracle(&problem, true)?)
    } else {
        None
    };
    if args.json {
        let mut doc = json!({
            "m": args.m,
            "capital_m": args.capital_m,
            "p": args.p,
            "closed_forms": forms,
        });
        if let Some(oracle) = oracle {
            doc["oracle"] = serde_json::to_value(oracle)?;
        }
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(());
    }
    println!("walk on [0, {}] from {} with p = {}", args.capital_m, args.m, args.p);
    let row = |name: &str, closed: f64, oracle: Option<f64>| match oracle {
        Some(o) => println!("{name:<28} {closed:<24.17} oracle {o:.17}"),
        None => println!("{name:<28} {closed:.17}"),
    };
    row("P[exit low]", forms.exit_prob_low, oracle.map(|o| o.exit_prob_low));
    row("E[steps]", forms.e_exit_time, oracle.map(|o| o.e_exit_time));
    row("E[steps | low]", forms.e_exit_time_given_low, oracle.map(|o| o.e_exit_time_given_low));
    row("E[left steps | low]", forms.e_left_given_low, oracle.map(|o| o.e_left_given_low));
    row("E[right steps | high]", forms.e_right_given_high, oracle.map(|o| o.e_right_given_high));
    Ok(())
}

fn run_mixed(args: MixedArgs) -> stubborn_mining::Result<()> {
    let params = NetworkParams::unit(args.q, args.gamma)?;
    let ids = args
        .pattern
        .split(',')
        .map(|s| s.trim().parse::<StrategyId>())
        .collect::<stubborn_mining::Result<Vec<_>>>()?;
    let summaries = ids
        .iter()
        .map(|id| match id {
            StrategyId::Honest => Ok(mixed::StrategySummary::from_metrics(&analytic::honest_metrics(&params))),
            StrategyId::TrailStubborn(a) => {
                Ok(mixed::StrategySummary::from_metrics(&analytic::tsm_metrics(&params, *a)))
            }
            StrategyId::SelfishMining => Err(Error::InvalidArgument(
                "selfish mining has no analytic difficulty adjustment; patterns support honest, lsm and tsm:A"
                    .to_string(),
            )),
        })
        .collect::<stubborn_mining::Result<Vec<_>>>()?;
    let composed = mixed::compose(&summaries)?;
    let report = mixed::no_advantage_check(&summaries)?;
    if args.json {
        let doc = json!({
            "q": args.q,
            "gamma": args.gamma,
            "pattern": ids.iter().map(|i| i.to_string()).collect::<Vec<_>>(),
            "components": summaries,
            "composed": {
                "d": composed.d,
                "gamma_tilde": composed.gamma_tilde,
                "q_tilde": composed.gamma_tilde,
                "e_duration": composed.e_duration,
                "mu": composed.mu,
            },
            "no_advantage": report,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(());
    }
    println!("pattern over q = {}, gamma = {}:", args.q, args.gamma);
    for (id, s) in ids.iter().zip(&summaries) {
        println!(
            "  {id:<8} D = {:<22.17} gamma_tilde = {:<22.17} mu = {:.17}",
            s.d, s.gamma_tilde, s.mu
        );
    }
    println!("composed D           {:.17}", composed.d);
    println!("composed gamma_tilde {:.17} (= q_tilde)", composed.gamma_tilde);
    println!(
        "no advantage         {} (composed {:.6} <= max component {:.6})",
        if report.holds { "holds" } else { "VIOLATED" },
        report.composed_gamma_tilde,
        report.max_component_gamma_tilde
    );
    Ok(())
}

fn run_sweep(args: SweepArgs) -> stubborn_mining::Result<()> {
    let text = std::fs::read_to_string(&args.grid)?;
    let SweepConfig { mut grid, mut mode } = sweep::parse_config(&text)?;
    if let Some(v) = args.q_min {
        grid.q_min = v;
    }
    if let Some(v) = args.q_max {
        grid.q_max = v;
    }
    if let Some(v) = args.q_steps {
        grid.q_steps = v;
    }
    if let Some(v) = args.gamma_min {
        grid.gamma_min = v;
    }
    if let Some(v) = args.gamma_max {
        grid.gamma_max = v;
    }
    if let Some(v) = args.gamma_steps {
        grid.gamma_steps = v;
    }
    if let Some(v) = &args.a_values {
        grid.a_values = v
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidArgument(format!("bad trail threshold {s:?}")))
            })
            .collect::<stubborn_mining::Result<_>>()?;
    }
    if let Some(v) = &args.strategies {
        grid.strategies = v
            .split(',')
            .map(|s| s.trim().parse::<StrategyId>())
            .collect::<stubborn_mining::Result<_>>()?;
    }
    match args.backend.as_deref() {
        None => {}
        Some("analytic") => grid.backend = sweep::Backend::Analytic,
        Some("simulation") => {
            grid.backend = sweep::Backend::Simulation {
                n_cycles: args.cycles.unwrap_or(1_000_000),
                master_seed: args.seed.unwrap_or(0),
            }
        }
        Some(other) => return Err(Error::InvalidArgument(format!("unknown backend {other:?}"))),
    }
    if args.backend.is_none() {
        if let sweep::Backend::Simulation { n_cycles, master_seed } = grid.backend {
            grid.backend = sweep::Backend::Simulation {
                n_cycles: args.cycles.unwrap_or(n_cycles),
                master_seed: args.seed.unwrap_or(master_seed),
            };
        }
    }
    match args.mode.as_deref() {
        None => {}
        Some("dominance") => mode = MapMode::Dominance,
        Some("fig1") => mode = MapMode::Fig1,
        Some(other) => return Err(Error::InvalidArgument(format!("unknown mode {other:?}"))),
    }
    let cells = match mode {
        MapMode::Dominance => sweep::sweep(&grid)?,
        MapMode::Fig1 => sweep::fig1_map(&grid)?,
    };
    match args.format {
        OutputFormat::Csv => sweep::emit_csv(&cells, &args.out)?,
        OutputFormat::Json => sweep::emit_json(&cells, &args.out)?,
    }
    println!("wrote {} cells to {}", cells.len(), args.out.display());
    Ok(())
}
