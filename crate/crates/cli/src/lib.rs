//! Command-line front door for the catalytic surface model.
//!
//! Every subcommand writes its tabular results as CSV plus a metadata JSON
//! (seed, version, resolved configuration, wall time) next to it, so runs
//! are reproducible byte-for-byte from (config, seed, version) apart from
//! the wall-time field. Exit codes: 0 success, 1 usage or I/O error, 2 a
//! check the command performs came out negative (non-positive certificate,
//! no threshold found, solver did not converge).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use catalysis_core::blocks::{CanonicalBlock, ScoreTable};
use catalysis_core::coupling::{
    monotonicity_check, parse_script, replay, violation_frequency, CoupledState,
    CouplingMcConfig, JointArrivalLaw, BUNDLED_SCRIPT,
};
use catalysis_core::model::{Boundary, Configuration, GasCount, ModelSpec};
use catalysis_core::randomness::{MasterSeed, MIXER_ID};
use catalysis_core::score::reference::{check_reference_table, reference_score_table};
use catalysis_core::score::{
    fixed_point_solve, threshold_search, verify_certificate, SolverConfig,
};
use catalysis_core::sim::{
    absorption_runs, default_event_budget, empirical_drift, sweep, tally, StopRule,
};

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "catalysis",
    version,
    about = "n-gas catalytic surface model: simulation, drift certificates, score solving",
    long_about = "Simulates the n-gas catalytic surface model on a finite 1-D lattice and \
                  verifies weight-drift certificates for the spread of gas 1.\n\n\
                  Options may also come from a plain-text config file (one `key = value` per \
                  line, keys named like the long flags); explicit flags win."
)]
struct Cli {
    /// Master seed; every random quantity derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV and metadata files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also print the primary result as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Plain-text config file (`key = value` per line); flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Re-derive the bundled 4-gas reference table from the dynamics and
    /// check the drift certificate at the given rate.
    ///
    /// Writes `table1.csv` (columns: block,score,expected_drift,computed_drift,
    /// worst_drift,worst_scenario) and `certificate.json`.
    #[command(name = "verify-table1")]
    VerifyTable1(VerifyTable1Args),
    /// Solve the score fixed point at a given rate.
    ///
    /// Writes `scores.csv` (block,score) and `solve.json`.
    #[command(name = "solve-scores")]
    SolveScores(SolveArgs),
    /// Bisection search for the smallest certified rate of gas 1.
    ///
    /// Writes `threshold.csv` (step,lo,hi,mid,certified).
    Threshold(ThresholdArgs),
    /// Simulate independent trajectories from the all-vacant lattice.
    ///
    /// Writes `runs.csv` (run,seed,absorbed,time,events,fingerprint) and
    /// `summary.csv` (gas,count,frequency,mean_time).
    Simulate(SimulateArgs),
    /// Absorption frequencies over a grid of gas-1 rates.
    ///
    /// Writes `sweep.csv` (p1,gas1_frequency,undecided_frequency,mean_time).
    Sweep(SweepArgs),
    /// Monte Carlo estimate of the weight drift from a fixed configuration.
    ///
    /// Writes `drift.csv` (replicas,horizon,mean,std_error,ci_low,ci_high).
    Drift(DriftArgs),
    /// Replay a coupled-arrival script and report monotonicity violations.
    #[command(name = "couple-replay")]
    CoupleReplay(CoupleReplayArgs),
    /// Monte Carlo frequency of monotonicity violations under the bundled
    /// two-system coupling.
    ///
    /// Writes `couple.csv` (runs,violating_runs,frequency).
    #[command(name = "couple-mc")]
    CoupleMc(CoupleMcArgs),
}

#[derive(Args, Debug)]
struct VerifyTable1Args {
    /// Rate of gas 1.
    #[arg(long)]
    p1: Option<f64>,
    /// Follower string length for the worst-case search.
    #[arg(long)]
    followers: Option<usize>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Number of gases, or `infinite`.
    #[arg(long = "n")]
    n: Option<String>,
    /// Block length.
    #[arg(long = "L")]
    block_len: Option<usize>,
    #[arg(long)]
    p1: Option<f64>,
    /// Sup-norm stopping tolerance on score updates.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_sweeps: Option<usize>,
    #[arg(long)]
    followers: Option<usize>,
    /// Gauss-Seidel damping factor in (0, 1].
    #[arg(long)]
    damping: Option<f64>,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    /// Number of gases, or `infinite`.
    #[arg(long = "n")]
    n: Option<String>,
    /// Block length.
    #[arg(long = "L")]
    block_len: Option<usize>,
    #[arg(long)]
    followers: Option<usize>,
    /// Bisection tolerance on the rate.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Number of gases, or `infinite`.
    #[arg(long = "n")]
    n: Option<String>,
    /// Rate of gas 1; the others share the rest evenly.
    #[arg(long)]
    p1: Option<f64>,
    /// Full comma-separated rate vector (overrides --p1).
    #[arg(long)]
    rates: Option<String>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    runs: Option<u64>,
    /// `torus` or `blocked`.
    #[arg(long)]
    boundary: Option<String>,
    /// Per-run arrival budget; default 10^4 x size.
    #[arg(long)]
    max_events: Option<u64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long = "n")]
    n: Option<String>,
    /// Comma-separated gas-1 rates.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    boundary: Option<String>,
}

#[derive(Args, Debug)]
struct DriftArgs {
    #[arg(long = "n")]
    n: Option<String>,
    #[arg(long)]
    p1: Option<f64>,
    /// Initial configuration text (blocked boundary), e.g. 1102222222.
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    replicas: Option<u64>,
    /// JSON file mapping block text to score; default: the bundled 4-gas,
    /// 3-site table.
    #[arg(long)]
    scores: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CoupleReplayArgs {
    /// Script file (`site type_a type_b order` per line); default: the
    /// bundled counterexample script.
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long)]
    size: Option<usize>,
}

#[derive(Args, Debug)]
struct CoupleMcArgs {
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    boundary: Option<String>,
}

/// Values from a `key = value` config file; flags override them.
struct FileCfg(BTreeMap<String, String>);

impl FileCfg {
    fn load(path: Option<&Path>) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| format!("config line {}: expected key = value", lineno + 1))?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(FileCfg(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| format!("config key {key}: cannot parse {raw:?}")),
        }
    }
}

fn resolve<T: FromStr>(
    flag: Option<T>,
    file: &FileCfg,
    key: &str,
    default: Option<T>,
) -> Result<T, String> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(v) = file.get(key)? {
        return Ok(v);
    }
    default.ok_or_else(|| format!("missing required option --{key}"))
}

fn parse_gases(raw: &str) -> Result<GasCount, String> {
    match raw {
        "infinite" | "inf" => Ok(GasCount::Infinite),
        n => n
            .parse::<u32>()
            .map(GasCount::Finite)
            .map_err(|_| format!("--n must be a gas count or `infinite`, got {raw:?}")),
    }
}

fn parse_boundary(raw: &str) -> Result<Boundary, String> {
    match raw {
        "torus" => Ok(Boundary::Torus),
        "blocked" => Ok(Boundary::Blocked),
        other => Err(format!("boundary must be torus or blocked, got {other:?}")),
    }
}

#[derive(Serialize)]
struct Meta {
    version: &'static str,
    command: String,
    seed: u64,
    mixer: &'static str,
    config: BTreeMap<String, String>,
    wall_time_s: f64,
}

struct Out {
    dir: PathBuf,
    json: bool,
    seed: u64,
    command: String,
    config: BTreeMap<String, String>,
    started: Instant,
}

impl Out {
    fn write(&self, name: &str, body: &str) -> Result<PathBuf, String> {
        std::fs::create_dir_all(&self.dir)
            .map_err(|e| format!("cannot create {}: {e}", self.dir.display()))?;
        let path = self.dir.join(name);
        std::fs::write(&path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        Ok(path)
    }

    fn finish(&self) -> Result<(), String> {
        let meta = Meta {
            version: env!("CARGO_PKG_VERSION"),
            command: self.command.clone(),
            seed: self.seed,
            mixer: MIXER_ID,
            config: self.config.clone(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let body = serde_json::to_string_pretty(&meta).map_err(|e| e.to_string())?;
        self.write(&format!("{}.meta.json", self.command), &body)?;
        Ok(())
    }
}

fn record(config: &mut BTreeMap<String, String>, key: &str, value: impl std::fmt::Display) {
    config.insert(key.to_string(), value.to_string());
}

/// Runs the CLI and returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // clap renders --help/--version through the error path too.
            let is_help = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if is_help { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: Cli) -> Result<i32, String> {
    let file = FileCfg::load(cli.config.as_deref())?;
    let seed = resolve(cli.seed, &file, "seed", Some(1))?;
    let dir = match cli.out {
        Some(dir) => dir,
        None => match file.get::<PathBuf>("out")? {
            Some(dir) => dir,
            None => PathBuf::from("."),
        },
    };
    let command_name = match &cli.command {
        Command::VerifyTable1(_) => "verify-table1",
        Command::SolveScores(_) => "solve-scores",
        Command::Threshold(_) => "threshold",
        Command::Simulate(_) => "simulate",
        Command::Sweep(_) => "sweep",
        Command::Drift(_) => "drift",
        Command::CoupleReplay(_) => "couple-replay",
        Command::CoupleMc(_) => "couple-mc",
    };
    let mut out = Out {
        dir,
        json: cli.json,
        seed,
        command: command_name.to_string(),
        config: BTreeMap::new(),
        started: Instant::now(),
    };
    record(&mut out.config, "seed", seed);
    let code = match cli.command {
        Command::VerifyTable1(args) => cmd_verify_table1(args, &file, &mut out)?,
        Command::SolveScores(args) => cmd_solve_scores(args, &file, &mut out)?,
        Command::Threshold(args) => cmd_threshold(args, &file, &mut out)?,
        Command::Simulate(args) => cmd_simulate(args, &file, &mut out)?,
        Command::Sweep(args) => cmd_sweep(args, &file, &mut out)?,
        Command::Drift(args) => cmd_drift(args, &file, &mut out)?,
        Command::CoupleReplay(args) => cmd_couple_replay(args, &file, &mut out)?,
        Command::CoupleMc(args) => cmd_couple_mc(args, &file, &mut out)?,
    };
    out.finish()?;
    Ok(code)
}

fn cmd_verify_table1(
    args: VerifyTable1Args,
    file: &FileCfg,
    out: &mut Out,
) -> Result<i32, String> {
    let p1 = resolve(args.p1, file, "p1", Some(0.47))?;
    let followers = resolve(args.followers, file, "followers", Some(6))?;
    record(&mut out.config, "p1", p1);
    record(&mut out.config, "followers", followers);

    let check = check_reference_table(p1, followers).map_err(|e| e.to_string())?;
    let table = reference_score_table();
    let cert = verify_certificate(p1, GasCount::Finite(4), 3, &table, followers)
        .map_err(|e| e.to_string())?;

    let mut csv = String::from("block,score,expected_drift,computed_drift,worst_drift,worst_scenario\n");
    println!("block  score  expected  computed   worst      follower");
    for row in &check.rows {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.block, row.score, row.expected, row.computed, row.worst_drift, row.worst_scenario
        )
        .unwrap();
        println!(
            "{}    {:<5}  {:+.4}   {:+.5}   {:+.5}   {}",
            row.block, row.score, row.expected, row.computed, row.worst_drift, row.worst_scenario
        );
    }
    out.write("table1.csv", &csv)?;
    let cert_json = serde_json::to_string_pretty(&cert).map_err(|e| e.to_string())?;
    out.write("certificate.json", &cert_json)?;
    if out.json {
        println!("{cert_json}");
    }
    println!(
        "verdict: {} (c = {:.6}, max table deviation {:.6})",
        cert.verdict,
        cert.c,
        check.max_deviation()
    );
    Ok(if cert.positive() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Serialize)]
struct SolveReport {
    gases: String,
    block_len: usize,
    p1: f64,
    converged: bool,
    sweeps: usize,
    final_change: f64,
    max_residual: f64,
    reference_drift: f64,
    scores: BTreeMap<String, f64>,
}

fn cmd_solve_scores(args: SolveArgs, file: &FileCfg, out: &mut Out) -> Result<i32, String> {
    let gases = parse_gases(&resolve(args.n, file, "n", None::<String>)?)?;
    let block_len = resolve(args.block_len, file, "L", None)?;
    let p1 = resolve(args.p1, file, "p1", None)?;
    let mut cfg = SolverConfig::new(gases, block_len, p1);
    cfg.tolerance = resolve(args.tol, file, "tol", Some(cfg.tolerance))?;
    cfg.max_sweeps = resolve(args.max_sweeps, file, "max-sweeps", Some(cfg.max_sweeps))?;
    cfg.follower_bound = resolve(args.followers, file, "followers", Some(cfg.follower_bound))?;
    cfg.damping = resolve(args.damping, file, "damping", Some(cfg.damping))?;
    record(&mut out.config, "n", gases);
    record(&mut out.config, "L", block_len);
    record(&mut out.config, "p1", p1);
    record(&mut out.config, "tol", cfg.tolerance);
    record(&mut out.config, "followers", cfg.follower_bound);

    let solved = fixed_point_solve(&cfg).map_err(|e| e.to_string())?;
    let mut csv = String::from("block,score\n");
    for (block, score) in solved.table.iter() {
        writeln!(csv, "{block},{score}").unwrap();
    }
    out.write("scores.csv", &csv)?;
    let report = SolveReport {
        gases: gases.to_string(),
        block_len,
        p1,
        converged: solved.converged,
        sweeps: solved.sweeps,
        final_change: solved.final_change,
        max_residual: solved.max_residual,
        reference_drift: solved.reference_drift,
        scores: solved.table.as_string_map(),
    };
    let body = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    out.write("solve.json", &body)?;
    if out.json {
        println!("{body}");
    } else {
        for (block, score) in solved.table.iter() {
            println!("{block}: {score:.4}");
        }
    }
    println!(
        "converged: {} in {} sweeps; reference-block test {:+.6}",
        solved.converged, solved.sweeps, solved.reference_drift
    );
    Ok(if solved.converged { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_threshold(args: ThresholdArgs, file: &FileCfg, out: &mut Out) -> Result<i32, String> {
    let gases = parse_gases(&resolve(args.n, file, "n", None::<String>)?)?;
    let block_len = resolve(args.block_len, file, "L", None)?;
    let followers = resolve(
        args.followers,
        file,
        "followers",
        Some(SolverConfig::new(gases, block_len, 0.5).follower_bound),
    )?;
    let tol = resolve(args.tol, file, "tol", Some(1e-4))?;
    record(&mut out.config, "n", gases);
    record(&mut out.config, "L", block_len);
    record(&mut out.config, "followers", followers);
    record(&mut out.config, "tol", tol);

    let result = threshold_search(gases, block_len, followers, tol).map_err(|e| e.to_string())?;
    let mut csv = String::from("step,lo,hi,mid,certified\n");
    for (i, step) in result.history.iter().enumerate() {
        writeln!(csv, "{},{},{},{},{}", i, step.lo, step.hi, step.mid, step.certified).unwrap();
    }
    out.write("threshold.csv", &csv)?;
    match result.p1_star {
        Some(p1) => {
            if out.json {
                println!("{{\"p1_star\": {p1}}}");
            }
            println!("smallest certified rate: {p1:.6} ({} bisection steps)", result.history.len());
            Ok(EXIT_OK)
        }
        None => {
            println!("no certificate at this block length (tried up to 0.999)");
            Ok(EXIT_CHECK_FAILED)
        }
    }
}

fn build_spec(
    gases: GasCount,
    p1: Option<f64>,
    rates: Option<String>,
) -> Result<ModelSpec, String> {
    match (gases, rates) {
        (GasCount::Infinite, None) => {
            ModelSpec::infinite(p1.ok_or("missing --p1")?).map_err(|e| e.to_string())
        }
        (GasCount::Infinite, Some(_)) => Err("--rates needs a finite gas count".into()),
        (GasCount::Finite(n), None) => {
            ModelSpec::symmetric(n, p1.ok_or("missing --p1")?).map_err(|e| e.to_string())
        }
        (GasCount::Finite(n), Some(raw)) => {
            let rates: Vec<f64> = raw
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| format!("bad rate {s:?}")))
                .collect::<Result<_, String>>()?;
            if rates.len() != n as usize {
                return Err(format!("--rates lists {} rates for {n} gases", rates.len()));
            }
            ModelSpec::finite(rates).map_err(|e| e.to_string())
        }
    }
}

fn cmd_simulate(args: SimulateArgs, file: &FileCfg, out: &mut Out) -> Result<i32, String> {
    let gases = parse_gases(&resolve(args.n, file, "n", None::<String>)?)?;
    let p1 = match args.p1 {
        Some(v) => Some(v),
        None => file.get("p1")?,
    };
    let rates = match args.rates {
        Some(v) => Some(v),
        None => file.get("rates")?,
    };
    let spec = build_spec(gases, p1, rates)?;
    let size = resolve(args.size, file, "size", None)?;
    let runs = resolve(args.runs, file, "runs", None)?;
    let boundary = parse_boundary(&resolve(args.boundary, file, "boundary", Some("torus".into()))?)?;
    let budget = resolve(args.max_events, file, "max-events", Some(default_event_budget(size)))?;
    record(&mut out.config, "n", gases);
    record(&mut out.config, "rates", format!("{:?}", spec.rates()));
    record(&mut out.config, "size", size);
    record(&mut out.config, "runs", runs);
    record(&mut out.config, "boundary", format!("{boundary:?}"));
    record(&mut out.config, "max-events", budget);

    let outcomes = absorption_runs(
        &spec,
        size,
        boundary,
        runs,
        MasterSeed(out.seed),
        StopRule::MaxEvents(budget),
    )
    .map_err(|e| e.to_string())?;
    let stats = tally(&outcomes);

    let mut csv = String::from("run,seed,absorbed,time,events,fingerprint\n");
    for o in &outcomes {
        writeln!(
            csv,
            "{},{},{},{},{},{:016x}",
            o.run,
            o.seed,
            o.absorbed.map_or(String::from("undecided"), |g| g.to_string()),
            o.final_time,
            o.events,
            o.fingerprint
        )
        .unwrap();
    }
    out.write("runs.csv", &csv)?;

    let mut summary = String::from("gas,count,frequency,mean_time\n");
    for (&gas, &count) in &stats.counts {
        writeln!(
            summary,
            "{},{},{},{}",
            gas,
            count,
            count as f64 / stats.runs as f64,
            stats.mean_time.map_or(String::from(""), |t| t.to_string())
        )
        .unwrap();
    }
    writeln!(summary, "undecided,{},{},", stats.undecided, stats.undecided_frequency()).unwrap();
    out.write("summary.csv", &summary)?;

    if out.json {
        let mut freq: BTreeMap<String, f64> = stats
            .counts
            .iter()
            .map(|(&g, &c)| (g.to_string(), c as f64 / stats.runs as f64))
            .collect();
        freq.insert("undecided".into(), stats.undecided_frequency());
        println!("{}", serde_json::to_string_pretty(&freq).map_err(|e| e.to_string())?);
    }
    println!(
        "{} runs on {} sites: gas-1 frequency {:.4}, undecided {:.4}, mean absorption time {}",
        stats.runs,
        size,
        stats.frequency(1),
        stats.undecided_frequency(),
        stats.mean_time.map_or(String::from("n/a"), |t| format!("{t:.2}"))
    );
    Ok(EXIT_OK)
}

fn cmd_sweep(args: SweepArgs, file: &FileCfg, out: &mut Out) -> Result<i32, String> {
    let raw_n = resolve(args.n, file, "n", None::<String>)?;
    let n: u32 = raw_n.parse().map_err(|_| "--n must be finite for sweeps".to_string())?;
    let grid_raw = resolve(args.grid, file, "grid", None::<String>)?;
    let grid: Vec<f64> = grid_raw
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| format!("bad grid point {s:?}")))
        .collect::<Result<_, String>>()?;
    let size = resolve(args.size, file, "size", None)?;
    let runs = resolve(args.runs, file, "runs", None)?;
    let boundary = parse_boundary(&resolve(args.boundary, file, "boundary", Some("torus".into()))?)?;
    record(&mut out.config, "n", n);
    record(&mut out.config, "grid", &grid_raw);
    record(&mut out.config, "size", size);
    record(&mut out.config, "runs", runs);

    let report = sweep(n, &grid, size, boundary, runs, MasterSeed(out.seed))
        .map_err(|e| e.to_string())?;
    let mut csv = String::from("p1,gas1_frequency,undecided_frequency,mean_time\n");
    for row in &report.rows {
        writeln!(
            csv,
            "{},{},{},{}",
            row.p1,
            row.gas1_frequency,
            row.undecided_frequency,
            row.mean_time.map_or(String::from(""), |t| t.to_string())
        )
        .unwrap();
        println!(
            "p1 {:.4}: gas-1 frequency {:.4} (undecided {:.4})",
            row.p1, row.gas1_frequency, row.undecided_frequency
        );
    }
    out.write("sweep.csv", &csv)?;
    println!(
        "gas-1 frequency trend along the grid: {}",
        if report.monotone_trend { "nondecreasing" } else { "not monotone" }
    );
    Ok(EXIT_OK)
}

fn load_score_table(path: Option<&Path>) -> Result<ScoreTable, String> {
    match path {
        None => Ok(reference_score_table()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let raw: BTreeMap<String, f64> =
                serde_json::from_str(&text).map_err(|e| format!("bad score file: {e}"))?;
            let mut scores = BTreeMap::new();
            let mut len = 0;
            for (block, score) in &raw {
                let block = CanonicalBlock::parse(block).map_err(|e| e.to_string())?;
                len = block.len();
                scores.insert(block, *score);
            }
            // Infer the gas count from the labels used.
            let max_label = scores
                .keys()
                .flat_map(|b| b.symbols().iter().copied())
                .max()
                .unwrap_or(2);
            ScoreTable::new(len, GasCount::Finite(max_label.max(2) + 1), scores)
                .map_err(|e| e.to_string())
        }
    }
}

fn cmd_drift(args: DriftArgs, file: &FileCfg, out: &mut Out) -> Result<i32, String> {
    let gases = parse_gases(&resolve(args.n, file, "n", Some("4".into()))?)?;
    let p1 = resolve(args.p1, file, "p1", None)?;
    let initial_text = resolve(args.initial, file, "initial", None::<String>)?;
    let horizon = resolve(args.horizon, file, "horizon", Some(0.2))?;
    let replicas = resolve(args.replicas, file, "replicas", Some(10_000))?;
    let spec = build_spec(gases, Some(p1), None)?;
    let initial =
        Configuration::parse(&initial_text, Boundary::Blocked).map_err(|e| e.to_string())?;
    let table = load_score_table(args.scores.as_deref())?;
    record(&mut out.config, "n", gases);
    record(&mut out.config, "p1", p1);
    record(&mut out.config, "initial", &initial_text);
    record(&mut out.config, "horizon", horizon);
    record(&mut out.config, "replicas", replicas);

    let est = empirical_drift(&spec, &initial, &table, horizon, replicas, MasterSeed(out.seed))
        .map_err(|e| e.to_string())?;
    let mut csv = String::from("replicas,horizon,mean,std_error,ci_low,ci_high\n");
    writeln!(
        csv,
        "{},{},{},{},{},{}",
        est.replicas, est.horizon, est.mean, est.std_error, est.ci95.0, est.ci95.1
    )
    .unwrap();
    out.write("drift.csv", &csv)?;
    if out.json {
        println!(
            "{{\"mean\": {}, \"std_error\": {}, \"ci_low\": {}, \"ci_high\": {}}}",
            est.mean, est.std_error, est.ci95.0, est.ci95.1
        );
    }
    println!(
        "mean dW/dt over {} replicas of horizon {}: {:+.5} +- {:.5} (95% CI [{:+.5}, {:+.5}])",
        est.replicas, est.horizon, est.mean, est.std_error, est.ci95.0, est.ci95.1
    );
    Ok(EXIT_OK)
}

fn cmd_couple_replay(
    args: CoupleReplayArgs,
    file: &FileCfg,
    out: &mut Out,
) -> Result<i32, String> {
    let size = resolve(args.size, file, "size", Some(10))?;
    let script_text = match &args.script {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?,
        None => BUNDLED_SCRIPT.to_string(),
    };
    record(&mut out.config, "size", size);
    record(
        &mut out.config,
        "script",
        args.script
            .as_ref()
            .map_or(String::from("bundled"), |p| p.display().to_string()),
    );

    let script = parse_script(&script_text).map_err(|e| e.to_string())?;
    let initial = CoupledState::all_vacant(size, Boundary::Blocked);
    let states = replay(&initial, &script).map_err(|e| e.to_string())?;
    let mut csv = String::from("step,first,second\n");
    for (i, state) in states.iter().enumerate() {
        let a = state.first.to_text().map_err(|e| e.to_string())?;
        let b = state.second.to_text().map_err(|e| e.to_string())?;
        writeln!(csv, "{i},{a},{b}").unwrap();
        println!("{a},{b}");
    }
    out.write("replay.csv", &csv)?;
    let violations = monotonicity_check(states.last().unwrap()).map_err(|e| e.to_string())?;
    if violations.is_empty() {
        println!("no site holds a 1 in the first system only");
    } else {
        println!(
            "sites with a 1 in the first system but not the second: {:?}",
            violations
        );
    }
    Ok(EXIT_OK)
}

fn cmd_couple_mc(args: CoupleMcArgs, file: &FileCfg, out: &mut Out) -> Result<i32, String> {
    let size = resolve(args.size, file, "size", Some(32))?;
    let horizon = resolve(args.horizon, file, "horizon", Some(50.0))?;
    let runs = resolve(args.runs, file, "runs", Some(200))?;
    let boundary =
        parse_boundary(&resolve(args.boundary, file, "boundary", Some("blocked".into()))?)?;
    record(&mut out.config, "size", size);
    record(&mut out.config, "horizon", horizon);
    record(&mut out.config, "runs", runs);

    let law = JointArrivalLaw::third_vs_half();
    let cfg = CouplingMcConfig { size, boundary, horizon, runs, seed: MasterSeed(out.seed) };
    let stats = violation_frequency(&law, &cfg).map_err(|e| e.to_string())?;
    let mut csv = String::from("runs,violating_runs,frequency\n");
    writeln!(csv, "{},{},{}", stats.runs, stats.violating_runs, stats.frequency).unwrap();
    out.write("couple.csv", &csv)?;
    if out.json {
        println!("{{\"frequency\": {}}}", stats.frequency);
    }
    println!(
        "{} of {} coupled runs showed a 1 in the slower system only (frequency {:.4})",
        stats.violating_runs, stats.runs, stats.frequency
    );
    Ok(EXIT_OK)
}
