//! Command-line surface: one subcommand per capability, reproducible seeds,
//! human output on stdout plus machine-readable files (and a replayable
//! manifest) when `--out` is given.
//!
//! Seed discipline: every run takes one `--seed`; each subcommand works from
//! `seed XOR first-8-bytes(SHA-256(subcommand name))`, so different
//! subcommands never share streams and a manifest pins everything needed to
//! reproduce its outputs byte for byte.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::combinatorics::rational_to_f64;
use crate::dynamics::{
    classical_coupon_expectation, coverage_pmf_with_limit, coverage_table, expected_coverage,
    expected_occupancy_with_limit, full_coverage_prob_with_limit, occupancy_pmf_with_limit,
    CoverageDistribution, OccupancyDistribution, SamplingConfig, DEFAULT_EPSILON_TAIL,
    DEFAULT_EXACT_LIMIT,
};
use crate::error::{Error, Result};
use crate::generalization::{inv_sqrt_coverage_chain_with, sweep_csv, BoundReport};
use crate::sampler::{build_schedule, coverage_of_schedule, SelectionPolicy};
use crate::simulator::{enumerate_coverage, simulate_coverage, simulate_occupancy};
use crate::trainer::{
    pl_quadratic_benchmark, run_benchmark_trials, two_layer_benchmark, Benchmark, BoundMode,
    DatasetHandle, LeastSquares, Logistic, Model, OptimizerConfig, WithinEpochSampling,
};

/// Sampling-dynamics analytics, Monte Carlo oracles, subset-schedule SGD
/// training, and bound evaluation, all runnable from one binary.
#[derive(Debug, Parser)]
#[command(name = "srs", version, about)]
pub struct Cli {
    /// Base seed; each subcommand derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for machine-readable outputs plus a replayable manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coverage pmf/expectation after K epochs, or a ratio × epochs grid.
    Coverage(CoverageArgs),
    /// Occupancy pmf/expectation: epochs needed to reach s distinct samples.
    Occupancy(OccupancyArgs),
    /// Materialize a subset schedule and its prefix-coverage curve.
    Schedule(ScheduleArgs),
    /// Train under a subset schedule; optionally verify convergence bounds.
    Train(TrainArgs),
    /// Generalization-bound terms and the E[1/√|S|] inequality chain.
    Genbound(GenboundArgs),
    /// Re-run a manifest and check outputs are byte-identical.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverageMode {
    Exact,
    Enumerate,
    Simulate,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CoverageArgs {
    /// Ground-set size.
    #[arg(long)]
    pub n: usize,
    /// Per-epoch subset size (single-config mode).
    #[arg(long)]
    pub m: Option<usize>,
    /// Epoch count (single-config mode).
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Emit an expected-coverage grid instead of one pmf.
    #[arg(long, default_value_t = false)]
    pub table: bool,
    /// Grid subset ratios as percentages, e.g. 5,10,20.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<String>>,
    /// Grid epoch counts, e.g. 10,20,30.
    #[arg(long, value_delimiter = ',')]
    pub epochs: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = CoverageMode::Exact)]
    pub mode: CoverageMode,
    /// Monte Carlo trial count (simulate mode).
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Exact-mode size bound override.
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    pub limit: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OccupancyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: Option<usize>,
    /// Coverage target (defaults to n: full coverage).
    #[arg(long)]
    pub s: Option<usize>,
    /// Emit the classical coupon-collector table n·H_n for 1..=n.
    #[arg(long, default_value_t = false)]
    pub classical: bool,
    /// Estimate by Monte Carlo instead of the exact pmf.
    #[arg(long, default_value_t = false)]
    pub simulate: bool,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Truncate the pmf once the tail bound drops below this.
    #[arg(long, default_value_t = DEFAULT_EPSILON_TAIL)]
    pub epsilon_tail: f64,
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    pub limit: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Selection interval R: refresh the subset every R epochs.
    #[arg(long, default_value_t = 1)]
    pub interval: usize,
    #[arg(long = "K")]
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkArg {
    PlQuadratic,
    TwoLayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    LeastSquares,
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingArg {
    Iid,
    Reshuffle,
}

impl From<SamplingArg> for WithinEpochSampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Iid => WithinEpochSampling::IidWithReplacement,
            SamplingArg::Reshuffle => WithinEpochSampling::Reshuffle,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    /// Synthetic benchmark with known constants.
    #[arg(long, value_enum, conflicts_with = "data")]
    pub benchmark: Option<BenchmarkArg>,
    /// CSV dataset (feature columns then one label column).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Loss for CSV datasets.
    #[arg(long, value_enum, default_value_t = ModelArg::LeastSquares)]
    pub model: ModelArg,
    /// Benchmark dimension.
    #[arg(long, default_value_t = 5)]
    pub d: usize,
    /// Benchmark sample count.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Benchmark noise level (0 = deterministic instance).
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Per-epoch subset size (defaults to the full set).
    #[arg(long)]
    pub m: Option<usize>,
    /// Selection interval R.
    #[arg(long, default_value_t = 1)]
    pub interval: usize,
    #[arg(long = "K", default_value_t = 100)]
    pub k: usize,
    /// Step size, or "auto" for 0.5/L on benchmarks.
    #[arg(long, default_value = "auto")]
    pub alpha: String,
    /// Inner SGD steps per epoch (defaults to m).
    #[arg(long)]
    pub epoch_steps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub batch_size: usize,
    #[arg(long, value_enum, default_value_t = SamplingArg::Iid)]
    pub sampling: SamplingArg,
    /// Number of independently seeded runs (averaged for bound checks).
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// Check the convergence bounds against the averaged runs.
    #[arg(long, default_value_t = false)]
    pub verify_bound: bool,
    /// Epoch checkpoints for the bound check (defaults to K).
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenboundArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Sweep the whole (n ≤ n-max, m ≤ n, K ≤ k-max) grid to CSV.
    #[arg(long, default_value_t = false)]
    pub sweep: bool,
    #[arg(long, default_value_t = 20)]
    pub n_max: usize,
    #[arg(long, default_value_t = 5)]
    pub k_max: usize,
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    pub limit: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by a previous run's --out.
    #[arg(long)]
    pub manifest: PathBuf,
}

/// Everything needed to reproduce a run: parameters, seeds, and digests of
/// the files it wrote.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub base_seed: u64,
    pub derived_seed: u64,
    pub params: serde_json::Value,
    /// file name → SHA-256 hex of its bytes.
    pub outputs: BTreeMap<String, String>,
}

/// Stdout text plus the machine files a subcommand produced.
struct CommandOutput {
    stdout: String,
    files: BTreeMap<String, Vec<u8>>,
}

impl CommandOutput {
    fn new() -> Self {
        CommandOutput {
            stdout: String::new(),
            files: BTreeMap::new(),
        }
    }
}

/// Per-subcommand seed: base XOR the first 8 bytes (little endian) of
/// SHA-256 over the subcommand name.
pub fn derive_seed(base: u64, subcommand: &str) -> u64 {
    let digest = Sha256::digest(subcommand.as_bytes());
    let mut eight = [0u8; 8];
    eight.copy_from_slice(&digest[..8]);
    base ^ u64::from_le_bytes(eight)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Parse a percentage written in decimal ("5", "12.5") into an exact ratio.
fn parse_percent(token: &str) -> Result<BigRational> {
    let bad = || Error::InvalidConfig(format!("cannot parse ratio percentage '{token}'"));
    let (int_part, frac_part) = match token.split_once('.') {
        Some((i, f)) => (i, f),
        None => (token, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: num_bigint::BigInt = digits.parse().map_err(|_| bad())?;
    let mut denom = num_bigint::BigInt::from(100);
    for _ in 0..frac_part.len() {
        denom *= 10;
    }
    let ratio = BigRational::new(numer, denom);
    if !ratio.is_positive() || ratio > BigRational::one() {
        return Err(Error::InvalidConfig(format!(
            "ratio percentage must lie in (0, 100], got {token}"
        )));
    }
    Ok(ratio)
}

/// Entry point for the binary: parse, execute, map errors to exit codes.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Coverage(args) => {
            finish(cli, "coverage", serde_json::to_value(args)?, |seed| {
                exec_coverage(args, seed)
            })
        }
        Command::Occupancy(args) => {
            finish(cli, "occupancy", serde_json::to_value(args)?, |seed| {
                exec_occupancy(args, seed)
            })
        }
        Command::Schedule(args) => {
            finish(cli, "schedule", serde_json::to_value(args)?, |seed| {
                exec_schedule(args, seed)
            })
        }
        Command::Train(args) => finish(cli, "train", serde_json::to_value(args)?, |seed| {
            exec_train(args, seed)
        }),
        Command::Genbound(args) => {
            finish(cli, "genbound", serde_json::to_value(args)?, |seed| {
                exec_genbound(args, seed)
            })
        }
        Command::Replay(args) => exec_replay(cli, args),
    }
}

fn finish(
    cli: &Cli,
    name: &str,
    params: serde_json::Value,
    handler: impl FnOnce(u64) -> Result<CommandOutput>,
) -> Result<()> {
    let derived = derive_seed(cli.seed, name);
    let output = handler(derived)?;
    print!("{}", output.stdout);
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        let mut digests = BTreeMap::new();
        for (file, bytes) in &output.files {
            std::fs::write(dir.join(file), bytes)?;
            digests.insert(file.clone(), sha256_hex(bytes));
        }
        let manifest = RunManifest {
            tool: "srs".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: name.into(),
            base_seed: cli.seed,
            derived_seed: derived,
            params,
            outputs: digests,
        };
        std::fs::write(dir.join("manifest.json"), to_json_bytes(&manifest)?)?;
        println!("wrote {} file(s) + manifest.json to {}", output.files.len(), dir.display());
    }
    Ok(())
}

fn render_coverage(dist: &CoverageDistribution) -> String {
    let mut out = format!(
        "coverage pmf  (n={}, m={}, K={}, source={})\n{:>6}  {:>24}  {:>22}\n",
        dist.config.n, dist.config.m, dist.config.k, dist.source, "l", "probability", "float"
    );
    let rows: Vec<usize> = dist
        .pmf
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(l, _)| l)
        .collect();
    let shown = rows.len().min(40);
    for &l in &rows[..shown] {
        let p = dist.prob(l);
        out.push_str(&format!(
            "{l:>6}  {:>24}  {:>22}\n",
            p.to_string(),
            rational_to_f64(&p)
        ));
    }
    if rows.len() > shown {
        out.push_str(&format!("  … {} more rows (see CSV output)\n", rows.len() - shown));
    }
    let mean = dist.mean();
    out.push_str(&format!(
        "expected coverage: {} = {} ({:.4}% of n)\n",
        mean,
        rational_to_f64(&mean),
        100.0 * rational_to_f64(&mean) / dist.config.n as f64
    ));
    out
}

fn exec_coverage(args: &CoverageArgs, seed: u64) -> Result<CommandOutput> {
    let mut out = CommandOutput::new();
    if args.table || args.ratios.is_some() {
        let ratio_tokens = args
            .ratios
            .clone()
            .unwrap_or_else(|| vec!["5".into(), "10".into(), "20".into()]);
        let ratios = ratio_tokens
            .iter()
            .map(|t| parse_percent(t))
            .collect::<Result<Vec<_>>>()?;
        let epochs = args.epochs.clone().unwrap_or_else(|| vec![10, 20, 30]);
        let table = coverage_table(args.n, &ratios, &epochs)?;
        out.stdout = table.render();
        out.files.insert("coverage_table.csv".into(), table.csv_string().into_bytes());
        return Ok(out);
    }

    let m = args
        .m
        .ok_or_else(|| Error::InvalidConfig("--m is required without --table".into()))?;
    let k = args
        .k
        .ok_or_else(|| Error::InvalidConfig("--K is required without --table".into()))?;
    let config = SamplingConfig::new(args.n, m, k)?;
    match args.mode {
        CoverageMode::Exact | CoverageMode::Enumerate => {
            let dist = if args.mode == CoverageMode::Exact {
                coverage_pmf_with_limit(&config, args.limit)?
            } else {
                enumerate_coverage(&config)?
            };
            out.stdout = render_coverage(&dist);
            let full = full_coverage_prob_with_limit(&config, args.limit.max(args.n))?;
            out.stdout.push_str(&format!(
                "full coverage probability: {} = {}\n",
                full,
                rational_to_f64(&full)
            ));
            out.files.insert("coverage_pmf.csv".into(), dist.csv_string().into_bytes());
            out.files.insert("coverage_pmf.json".into(), to_json_bytes(&dist.to_json())?);
        }
        CoverageMode::Simulate => {
            let sim = simulate_coverage(&config, args.trials, seed)?;
            let mut text = format!(
                "empirical coverage pmf  (n={}, m={}, K={k}, trials={}, seed={seed})\n",
                args.n, m, args.trials
            );
            for (outcome, p) in sim.float_pmf() {
                text.push_str(&format!("{outcome:>6}  {p}\n"));
            }
            let exact_mean = rational_to_f64(&expected_coverage(&config)?);
            text.push_str(&format!(
                "empirical mean: {}  (closed form {exact_mean})\n",
                sim.mean()
            ));
            out.stdout = text;
            out.files.insert("coverage_sim.json".into(), to_json_bytes(&sim.to_json())?);
        }
    }
    Ok(out)
}

fn render_occupancy(dist: &OccupancyDistribution) -> String {
    let mut out = format!(
        "occupancy pmf  (n={}, m={}, s={}, k_max={}, tail bound {:.3e})\n{:>6}  {:>28}  {:>22}\n",
        dist.n, dist.m, dist.s, dist.k_max, dist.tail_mass.value, "k", "probability", "float"
    );
    let mut shown = 0;
    for (k, p) in &dist.pmf {
        if p.is_zero() {
            continue;
        }
        if shown == 40 {
            out.push_str("  … remaining rows in CSV output\n");
            break;
        }
        out.push_str(&format!(
            "{k:>6}  {:>28}  {:>22}\n",
            p.to_string(),
            rational_to_f64(p)
        ));
        shown += 1;
    }
    out
}

fn exec_occupancy(args: &OccupancyArgs, seed: u64) -> Result<CommandOutput> {
    let mut out = CommandOutput::new();
    if args.classical {
        let mut text = format!("classical coupon collector n·H_n for n = 1..={}\n", args.n);
        let mut csv = String::from("n,expectation_numerator,expectation_denominator,expectation_float\n");
        for n in 1..=args.n {
            let e = classical_coupon_expectation(n)?;
            text.push_str(&format!("{n:>6}  {} = {}\n", e, rational_to_f64(&e)));
            csv.push_str(&format!("{n},{},{},{}\n", e.numer(), e.denom(), rational_to_f64(&e)));
        }
        out.stdout = text;
        out.files.insert("coupon_collector.csv".into(), csv.into_bytes());
        return Ok(out);
    }

    let m = args
        .m
        .ok_or_else(|| Error::InvalidConfig("--m is required without --classical".into()))?;
    let s = args.s.unwrap_or(args.n);
    if args.simulate {
        let sim = simulate_occupancy(args.n, m, s, args.trials, seed)?;
        let mut text = format!(
            "empirical occupancy  (n={}, m={m}, s={s}, trials={}, seed={seed})\n",
            args.n, args.trials
        );
        text.push_str(&format!(
            "empirical mean epochs: {}  variance: {}\n",
            sim.mean(),
            sim.variance()
        ));
        out.stdout = text;
        out.files.insert("occupancy_sim.json".into(), to_json_bytes(&sim.to_json())?);
    } else {
        let dist = occupancy_pmf_with_limit(args.n, m, s, args.epsilon_tail, args.limit)?;
        let expected = expected_occupancy_with_limit(args.n, m, s, args.limit)?;
        let mut text = render_occupancy(&dist);
        text.push_str(&format!(
            "expected epochs to cover {s} of {}: {} = {}\n",
            args.n,
            expected,
            rational_to_f64(&expected)
        ));
        out.stdout = text;
        out.files.insert("occupancy_pmf.csv".into(), dist.csv_string().into_bytes());
        out.files.insert("occupancy_pmf.json".into(), to_json_bytes(&dist.to_json())?);
    }
    Ok(out)
}

fn exec_schedule(args: &ScheduleArgs, seed: u64) -> Result<CommandOutput> {
    let policy = SelectionPolicy::new(args.m, args.interval, seed)?;
    let schedule = build_schedule(args.n, &policy, args.k)?;
    let curve = coverage_of_schedule(&schedule);

    let mut text = format!(
        "schedule  (n={}, m={}, R={}, K={}, seed={seed})\n{:>6}  {:>10}\n",
        args.n, args.m, args.interval, args.k, "epoch", "distinct"
    );
    for &(epoch, count) in &curve {
        text.push_str(&format!("{epoch:>6}  {count:>10}\n"));
    }
    let mut csv = String::from("epoch,distinct_count\n");
    for (epoch, count) in &curve {
        csv.push_str(&format!("{epoch},{count}\n"));
    }

    // Flat on-disk shape: one object holding the policy and every epoch's
    // sorted subset, enough to replay an experiment exactly.
    let json = serde_json::json!({
        "n": schedule.n,
        "m": schedule.policy.m,
        "R": schedule.policy.interval_r,
        "K": schedule.k(),
        "seed": schedule.policy.seed,
        "epochs": schedule.epochs,
    });

    let mut out = CommandOutput::new();
    out.stdout = text;
    out.files.insert("schedule.json".into(), to_json_bytes(&json)?);
    out.files.insert("coverage_curve.csv".into(), csv.into_bytes());
    Ok(out)
}

fn resolve_alpha(token: &str, constants_l: Option<f64>) -> Result<f64> {
    if token == "auto" {
        let l = constants_l.ok_or_else(|| {
            Error::InvalidConfig(
                "--alpha auto needs a benchmark with known constants; pass an explicit value"
                    .into(),
            )
        })?;
        return Ok(0.5 / l);
    }
    token
        .parse::<f64>()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse --alpha '{token}'")))
}

fn exec_train(args: &TrainArgs, seed: u64) -> Result<CommandOutput> {
    let mut out = CommandOutput::new();

    // Assemble the instance: a constants-bearing benchmark or a CSV dataset.
    let bench: Benchmark = match (&args.benchmark, &args.data) {
        (Some(BenchmarkArg::PlQuadratic), None) => {
            pl_quadratic_benchmark(args.d, args.n, seed, args.noise)?
        }
        (Some(BenchmarkArg::TwoLayer), None) => two_layer_benchmark(args.n, seed)?,
        (None, Some(path)) => {
            let dataset = DatasetHandle::from_csv(path)?;
            let w0 = vec![0.0; dataset.dim()];
            let loss: Arc<dyn crate::trainer::SampleLoss> = match args.model {
                ModelArg::LeastSquares => Arc::new(LeastSquares),
                ModelArg::Logistic => Arc::new(Logistic),
            };
            Benchmark {
                model: Model::new(w0, loss),
                dataset,
                constants: crate::trainer::BenchmarkConstants {
                    l: f64::NAN,
                    mu: 0.0,
                    kappa: 0.0,
                    sigma_sq: f64::NAN,
                    w_star: vec![],
                    f_star: 0.0,
                    estimated: true,
                },
            }
        }
        (None, None) => {
            return Err(Error::InvalidConfig(
                "pass --benchmark or --data to choose a training instance".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let have_constants = args.data.is_none();

    let n = bench.dataset.n();
    let m = args.m.unwrap_or(n);
    let alpha = resolve_alpha(&args.alpha, have_constants.then_some(bench.constants.l))?;
    let mut opt = OptimizerConfig::new(alpha)?;
    opt.epoch_steps = args.epoch_steps;
    opt.batch_size = args.batch_size;
    opt.within_epoch_sampling = args.sampling.into();

    let traces = run_benchmark_trials(&bench, m, args.interval, args.k, &opt, args.seeds, seed)?;

    let mut text = format!(
        "train  (instance n={n}, m={m}, R={}, K={}, alpha={alpha}, runs={})\n",
        args.interval, args.k, args.seeds
    );
    if have_constants {
        let c = &bench.constants;
        text.push_str(&format!(
            "constants: L={} mu={} kappa={} sigma^2={}{}\n",
            c.l,
            c.mu,
            c.kappa,
            c.sigma_sq,
            if c.estimated { " (estimated)" } else { "" }
        ));
    }
    for (r, t) in traces.iter().enumerate() {
        text.push_str(&format!(
            "run {r:>3}: L_G start {:.6e} → final {:.6e}, final ‖∇‖² {:.3e}, distinct seen {}, {:.3}s\n",
            t.records[0].objective,
            t.final_objective,
            t.final_grad_norm_sq,
            t.records.last().map_or(0, |rec| rec.distinct_seen),
            t.elapsed_seconds
        ));
    }

    for (r, t) in traces.iter().enumerate() {
        out.files.insert(format!("trace_run{r:03}.csv"), t.csv_string().into_bytes());
    }
    out.files.insert("traces.json".into(), to_json_bytes(&traces)?);

    if args.verify_bound {
        if !have_constants {
            return Err(Error::InvalidConfig(
                "--verify-bound needs a benchmark with known constants".into(),
            ));
        }
        let checkpoints = args.checkpoints.clone().unwrap_or_else(|| vec![args.k]);
        let mut reports = Vec::new();
        let mut modes = vec![BoundMode::Nonconvex];
        if bench.constants.mu > 0.0 {
            modes.push(BoundMode::Pl);
        }
        for mode in modes {
            let report = crate::trainer::verify_convergence_bound(
                &traces,
                &bench.constants,
                &opt,
                m,
                n,
                mode,
                &checkpoints,
            )?;
            text.push_str(&report.render());
            reports.push(report);
        }
        if bench.constants.sigma_sq < 1e-20 && !bench.constants.estimated {
            text.push_str(
                "noise-free instance: the noise-ball term vanishes and the gap contracts linearly\n",
            );
        }
        out.files.insert("bound_report.json".into(), to_json_bytes(&reports)?);
    }

    out.stdout = text;
    Ok(out)
}

fn exec_genbound(args: &GenboundArgs, _seed: u64) -> Result<CommandOutput> {
    let mut out = CommandOutput::new();
    if args.sweep {
        let mut configs = Vec::new();
        for n in 1..=args.n_max {
            for m in 1..=n {
                for k in 1..=args.k_max {
                    configs.push(SamplingConfig { n, m, k });
                }
            }
        }
        use rayon::prelude::*;
        let reports: Vec<BoundReport> = configs
            .par_iter()
            .map(|c| inv_sqrt_coverage_chain_with(c, args.delta, args.limit))
            .collect::<Result<Vec<_>>>()?;
        let all_hold = reports.iter().all(|r| r.chain_holds);
        out.stdout = format!(
            "swept {} grid points (n ≤ {}, K ≤ {}); chain ordering holds everywhere: {}\n",
            reports.len(),
            args.n_max,
            args.k_max,
            all_hold
        );
        out.files.insert("genbound_sweep.csv".into(), sweep_csv(&reports).into_bytes());
        return Ok(out);
    }

    let (n, m, k) = match (args.n, args.m, args.k) {
        (Some(n), Some(m), Some(k)) => (n, m, k),
        _ => {
            return Err(Error::InvalidConfig(
                "--n, --m and --K are required without --sweep".into(),
            ))
        }
    };
    let config = SamplingConfig::new(n, m, k)?;
    let report = inv_sqrt_coverage_chain_with(&config, args.delta, args.limit)?;
    out.stdout = format!(
        "generalization chain  (n={n}, m={m}, K={k}, delta={})\n\
         E[1/√|S|]          = {}\n\
         √((n+1−E|S|)/n)    = {}\n\
         √((1+n(1−m/n)^K)/n) = {}\n\
         tail term          = {}\n\
         chain holds: {} (first inequality strict: {})\n\
         rademacher term: not computed (symbolic)\n",
        report.delta,
        report.exact_e_inv_sqrt,
        report.mid_term,
        report.final_term,
        report.tail_term,
        report.chain_holds,
        report.strict_first
    );
    out.files.insert("genbound.json".into(), to_json_bytes(&report)?);
    Ok(out)
}

fn exec_replay(cli: &Cli, args: &ReplayArgs) -> Result<()> {
    let bytes = std::fs::read(&args.manifest)?;
    let manifest: RunManifest = serde_json::from_slice(&bytes)?;
    let expected_seed = derive_seed(manifest.base_seed, &manifest.subcommand);
    if expected_seed != manifest.derived_seed {
        return Err(Error::InvalidConfig(format!(
            "manifest seed derivation mismatch: stored {}, derived {expected_seed}",
            manifest.derived_seed
        )));
    }

    let output = match manifest.subcommand.as_str() {
        "coverage" => exec_coverage(
            &serde_json::from_value(manifest.params.clone())?,
            manifest.derived_seed,
        )?,
        "occupancy" => exec_occupancy(
            &serde_json::from_value(manifest.params.clone())?,
            manifest.derived_seed,
        )?,
        "schedule" => exec_schedule(
            &serde_json::from_value(manifest.params.clone())?,
            manifest.derived_seed,
        )?,
        "train" => exec_train(
            &serde_json::from_value(manifest.params.clone())?,
            manifest.derived_seed,
        )?,
        "genbound" => exec_genbound(
            &serde_json::from_value(manifest.params.clone())?,
            manifest.derived_seed,
        )?,
        other => {
            return Err(Error::InvalidConfig(format!(
                "manifest names unknown subcommand '{other}'"
            )))
        }
    };

    let produced: BTreeMap<String, String> = output
        .files
        .iter()
        .map(|(name, bytes)| (name.clone(), sha256_hex(bytes)))
        .collect();
    for (name, digest) in &manifest.outputs {
        match produced.get(name) {
            Some(actual) if actual == digest => {
                println!("replay ok: {name} ({digest})");
            }
            Some(actual) => {
                return Err(Error::ReplayMismatch {
                    path: name.clone(),
                    expected: digest.clone(),
                    actual: actual.clone(),
                });
            }
            None => {
                return Err(Error::ReplayMismatch {
                    path: name.clone(),
                    expected: digest.clone(),
                    actual: "missing".into(),
                });
            }
        }
    }
    for name in produced.keys() {
        if !manifest.outputs.contains_key(name) {
            return Err(Error::ReplayMismatch {
                path: name.clone(),
                expected: "absent from manifest".into(),
                actual: produced[name].clone(),
            });
        }
    }
    println!(
        "replay of '{}' reproduced {} file(s) byte-identically",
        manifest.subcommand,
        manifest.outputs.len()
    );
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        for (file, bytes) in &output.files {
            std::fs::write(dir.join(file), bytes)?;
        }
        println!("rewrote replayed files to {}", dir.display());
    }
    Ok(())
}
