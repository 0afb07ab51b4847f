//! The `permix` command-line front end.
//!
//! Every subcommand writes one report, to `--output` or stdout. Reports are
//! JSON documents of the form
//!
//! ```text
//! { "command", "version", "seed", "config", "result", "timing" }
//! ```
//!
//! where `config` is the fully resolved parameter record and `timing` holds
//! the only run-dependent value (wall time). `sample` writes a sample file
//! instead, and `tv-scan` defaults to CSV.
//!
//! Exit codes: 0 on success, 1 on input or domain errors, 2 on usage errors.
//! Diagnostics go to stderr prefixed `error[usage]`, `error[input]` or
//! `error[domain]`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use permix::demix::noiseless::{
    demix_strong, distinguishing_set, hard_instance, indistinguishable, insertion_demixing, min_group_size,
    strong_query_bound, weak_query_bound,
};
use permix::demix::{demix_mallows, estimate_weights, DemixReport, WeightEstimate};
use permix::moments::{check_l_invertible, default_eps_grid, hard_instance_moments, tv_slope_scan, EpsScan};
use permix::random::{derive_seed, stream_rng};
use permix::{
    factorial, Convention, DeltaMixture, DemixConfig, Error, LCheck, MallowsMixture, MixtureOracle, Mode, Permutation,
    SampleSet, SetOracle, WeightConfig,
};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_521;

/// Environment variable giving the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "PERMIX_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "permix",
    version,
    about = "Learn mixtures of permutations from groups of pairwise comparisons"
)]
pub struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (falls back to $PERMIX_THREADS, then the core count). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    /// Report format; csv is only available for tv-scan.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Leave the timing field null so reports compare byte for byte.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a sample file from a Mallows mixture.
    Sample(SampleArgs),
    /// Recover the central permutations of a Mallows mixture from samples.
    Demix(DemixArgs),
    /// Estimate mixing weights for known central permutations.
    Weights(WeightsArgs),
    /// Plant a random mixture and demix it with exact oracles.
    NoiselessDemo(NoiselessArgs),
    /// Emit the hard instance for group size m and test it at order ell.
    HardInstance(HardArgs),
    /// Check invertibility of the diagonal blocks of the group-algebra matrix L.
    VerifyDeterminant(DeterminantArgs),
    /// Exact TV between the perturbed hard-instance mixtures over a grid of eps.
    TvScan(TvScanArgs),
    /// Highest distance moment on which the hard-instance mixtures agree.
    Moments(MomentsArgs),
}

fn parse_perm(s: &str) -> Result<Permutation, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Permutation size; defaults to the size of the centrals.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub phi: f64,
    /// Central permutation in rank order, e.g. "2 1 3 4". Repeat for a mixture; defaults to the identity.
    #[arg(long, value_parser = parse_perm)]
    pub central: Vec<Permutation>,
    /// Mixing weights, one per central; defaults to equal weights.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    #[arg(long)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct DemixArgs {
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub phi: f64,
    /// Lower bound on the smallest mixing weight.
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Practical)]
    pub mode: ModeArg,
    /// Simulated draws per candidate (defaults to the sample count).
    #[arg(long)]
    pub n_prime: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Rank window around cluster centers used to prune candidates.
    #[arg(long)]
    pub prune_radius: Option<f64>,
    /// Weight-grid size.
    #[arg(long, default_value_t = permix::demix::mallows::DEFAULT_GRID)]
    pub grid: usize,
    /// Accept the first candidate within this TV instead of the minimiser.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, default_value_t = permix::demix::mallows::DEFAULT_MAX_CANDIDATES)]
    pub max_candidates: u64,
    /// Also write the recovered permutations here, one per line.
    #[arg(long)]
    pub perms: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Theoretical,
    Practical,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Theoretical => Mode::Theoretical,
            ModeArg::Practical => Mode::Practical,
        }
    }
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub phi: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Known central permutation, repeated once per component.
    #[arg(long, value_parser = parse_perm, required_unless_present = "perms")]
    pub central: Vec<Permutation>,
    /// File of central permutations, one per line (e.g. from `demix --perms`).
    #[arg(long, conflicts_with = "central")]
    pub perms: Option<PathBuf>,
    /// Weight-grid size (defaults to ceil(k sqrt N)).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Simulated draws per component (defaults to ceil(k N ln N)).
    #[arg(long)]
    pub n_prime: Option<usize>,
}

#[derive(Debug, Args)]
pub struct NoiselessArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct HardArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub ell: usize,
}

#[derive(Debug, Args)]
pub struct DeterminantArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long, value_enum, default_value_t = ConventionArg::Sum)]
    pub convention: ConventionArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Sum,
    Max,
    Min,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Convention {
        match c {
            ConventionArg::Sum => Convention::Sum,
            ConventionArg::Max => Convention::Max,
            ConventionArg::Min => Convention::Min,
        }
    }
}

#[derive(Debug, Args)]
pub struct TvScanArgs {
    #[arg(long)]
    pub m: usize,
    /// Strictly decreasing eps values, comma separated (default 10^-1 to 10^-3 in half decades).
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub eps_grid: Option<Vec<f64>>,
    /// Leave the largest eps out of the slope fit.
    #[arg(long)]
    pub drop_largest: bool,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub m: usize,
    /// Highest moment order to test (default 2m).
    #[arg(long)]
    pub max_ell: Option<u32>,
}

/// Envelope shared by every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report<C, R> {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: C,
    pub result: R,
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemixRunConfig {
    pub samples: String,
    pub n: usize,
    pub count: usize,
    pub k: usize,
    pub phi: f64,
    pub gamma: f64,
    pub demix: DemixConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemixResult {
    pub perms: Vec<Permutation>,
    pub report: DemixReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsRunConfig {
    pub samples: String,
    pub n: usize,
    pub count: usize,
    pub phi: f64,
    pub gamma: f64,
    pub centrals: Vec<Permutation>,
    pub weights: WeightConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiselessRunConfig {
    pub n: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedComponent {
    /// Exact weight as "p/q".
    pub weight: String,
    pub perm: Permutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemixerOutcome {
    pub recovered: bool,
    pub group_size: usize,
    pub queries: u64,
    pub query_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiselessResult {
    pub planted: Vec<PlantedComponent>,
    pub strong: DemixerOutcome,
    pub weak: DemixerOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardRunConfig {
    pub m: usize,
    pub ell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardResult {
    pub n: usize,
    pub sigma1: Vec<Permutation>,
    pub sigma2: Vec<Permutation>,
    /// "indistinguishable" or "distinguishable".
    pub verdict: String,
    /// A 1-based index set whose relative orders tell the sets apart.
    pub witness: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeterminantRunConfig {
    pub r: usize,
    pub convention: Convention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TvScanRunConfig {
    pub m: usize,
    pub eps_grid: Vec<f64>,
    pub drop_largest: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsRunConfig {
    pub m: usize,
    pub max_ell: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsResult {
    /// Largest `ell` such that moments `1..=ell` agree (capped at `max_ell`).
    pub order: u32,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) | CliError::Domain(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error[usage]: {m}"),
            CliError::Input(m) => write!(f, "error[input]: {m}"),
            CliError::Domain(m) => write!(f, "error[domain]: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => CliError::Input(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

fn input_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let text = text.trim_end();
                    let _ = writeln!(stderr, "error[usage]: {}", text.strip_prefix("error: ").unwrap_or(text));
                    2
                }
            };
        }
    };
    match execute(&cli) {
        Ok(bytes) => match &cli.output {
            Some(path) => match std::fs::write(path, &bytes) {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(stderr, "{}", input_err(path, e));
                    1
                }
            },
            None => match stdout.write_all(&bytes) {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(stderr, "error[input]: writing stdout: {e}");
                    1
                }
            },
        },
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

/// Worker count: `--threads`, then `$PERMIX_THREADS`, then the core count.
pub fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("{THREADS_ENV}={v:?}: {e}")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if n == 0 {
        return Err(CliError::Usage("thread count must be at least 1".into()));
    }
    Ok(n)
}

/// Runs the parsed command and returns the report bytes.
pub fn execute(cli: &Cli) -> Result<Vec<u8>, CliError> {
    let format = cli.format.unwrap_or(match cli.command {
        Command::TvScan(_) => Format::Csv,
        _ => Format::Json,
    });
    if format == Format::Csv && !matches!(cli.command, Command::TvScan(_)) {
        return Err(CliError::Usage("--format csv is only supported by tv-scan".into()));
    }
    let threads = resolve_threads(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Domain(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(cli, format))
}

fn dispatch(cli: &Cli, format: Format) -> Result<Vec<u8>, CliError> {
    let start = Instant::now();
    let seed = cli.seed;
    let envelope = |command: &str, config, result| -> Result<Vec<u8>, CliError> {
        let timing = (!cli.no_timing).then(|| Timing {
            wall_seconds: start.elapsed().as_secs_f64(),
        });
        let report = Report {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            result,
            timing,
        };
        to_json(&report)
    };
    match &cli.command {
        Command::Sample(a) => cmd_sample(a, seed),
        Command::Demix(a) => {
            let (config, result) = cmd_demix(a, seed)?;
            envelope("demix", json(&config)?, json(&result)?)
        }
        Command::Weights(a) => {
            let (config, result) = cmd_weights(a, seed)?;
            envelope("weights", json(&config)?, json(&result)?)
        }
        Command::NoiselessDemo(a) => {
            let (config, result) = cmd_noiseless(a, seed)?;
            envelope("noiseless-demo", json(&config)?, json(&result)?)
        }
        Command::HardInstance(a) => {
            let (config, result) = cmd_hard(a)?;
            envelope("hard-instance", json(&config)?, json(&result)?)
        }
        Command::VerifyDeterminant(a) => {
            let config = DeterminantRunConfig {
                r: a.r,
                convention: a.convention.into(),
            };
            let result: LCheck = check_l_invertible(config.r, config.convention)?;
            envelope("verify-determinant", json(&config)?, json(&result)?)
        }
        Command::TvScan(a) => {
            let (config, result) = cmd_tv_scan(a)?;
            match format {
                Format::Csv => Ok(tv_scan_csv(&config, &result).into_bytes()),
                Format::Json => envelope("tv-scan", json(&config)?, json(&result)?),
            }
        }
        Command::Moments(a) => {
            let config = MomentsRunConfig {
                m: a.m,
                max_ell: a.max_ell.unwrap_or(2 * a.m as u32),
            };
            let h = hard_instance(config.m)?;
            let order = hard_instance_moments(&h, config.max_ell)?;
            envelope("moments", json(&config)?, json(&MomentsResult { order })?)
        }
    }
}

fn json<T: Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Domain(format!("serialising report: {e}")))
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(v).map_err(|e| CliError::Domain(format!("serialising report: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

fn read_samples(path: &Path) -> Result<SampleSet, CliError> {
    let f = File::open(path).map_err(|e| input_err(path, e))?;
    SampleSet::read_from(BufReader::new(f)).map_err(|e| input_err(path, e))
}

fn read_perms(path: &Path) -> Result<Vec<Permutation>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input_err(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.parse::<Permutation>()
                .map_err(|e| input_err(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

fn cmd_sample(a: &SampleArgs, seed: u64) -> Result<Vec<u8>, CliError> {
    let centrals = if a.central.is_empty() {
        let n =
            a.n.ok_or_else(|| CliError::Usage("give --n or at least one --central".into()))?;
        vec![Permutation::identity(n)]
    } else {
        a.central.clone()
    };
    if let Some(n) = a.n {
        if let Some(bad) = centrals.iter().find(|c| c.n() != n) {
            return Err(CliError::Usage(format!(
                "central \"{bad}\" has size {} but --n is {n}",
                bad.n()
            )));
        }
    }
    let mix = match &a.weights {
        None => MallowsMixture::uniform(centrals, a.phi)?,
        Some(w) => {
            if w.len() != centrals.len() {
                return Err(CliError::Usage(format!(
                    "{} weights given for {} centrals",
                    w.len(),
                    centrals.len()
                )));
            }
            MallowsMixture::new(w.iter().copied().zip(centrals).collect(), a.phi)?
        }
    };
    let set = mix.sample_set(a.count, seed);
    let mut out = Vec::new();
    set.write_to(&mut out)
        .map_err(|e| CliError::Domain(format!("formatting samples: {e}")))?;
    Ok(out)
}

fn cmd_demix(a: &DemixArgs, seed: u64) -> Result<(DemixRunConfig, DemixResult), CliError> {
    let samples = read_samples(&a.samples)?;
    let cfg = DemixConfig {
        mode: a.mode.into(),
        n_prime: a.n_prime,
        grid: a.grid,
        threshold: a.threshold,
        delta: a.delta,
        seed,
        prune_radius: a.prune_radius,
        max_candidates: a.max_candidates,
    };
    let outcome = demix_mallows(&samples, a.k, a.phi, a.gamma, &cfg)?;
    if let Some(path) = &a.perms {
        let text: String = outcome.perms.iter().map(|p| format!("{p}\n")).collect();
        std::fs::write(path, text).map_err(|e| input_err(path, e))?;
    }
    let config = DemixRunConfig {
        samples: a.samples.display().to_string(),
        n: samples.n(),
        count: samples.len(),
        k: a.k,
        phi: a.phi,
        gamma: a.gamma,
        demix: cfg,
    };
    Ok((
        config,
        DemixResult {
            perms: outcome.perms,
            report: outcome.report,
        },
    ))
}

fn cmd_weights(a: &WeightsArgs, seed: u64) -> Result<(WeightsRunConfig, WeightEstimate), CliError> {
    let samples = read_samples(&a.samples)?;
    let centrals = match &a.perms {
        Some(path) => read_perms(path)?,
        None => a.central.clone(),
    };
    let cfg = WeightConfig {
        grid: a.grid,
        n_prime: a.n_prime,
        seed,
    };
    let est = estimate_weights(&samples, a.phi, a.gamma, &centrals, &cfg)?;
    let config = WeightsRunConfig {
        samples: a.samples.display().to_string(),
        n: samples.n(),
        count: samples.len(),
        phi: a.phi,
        gamma: a.gamma,
        centrals,
        weights: WeightConfig {
            grid: Some(est.grid),
            n_prime: Some(est.n_prime),
            seed,
        },
    };
    Ok((config, est))
}

/// Label mixed into the seed for the planted noiseless instance.
const LABEL_PLANT: u64 = 0x0070_6c61_6e74;

fn cmd_noiseless(a: &NoiselessArgs, seed: u64) -> Result<(NoiselessRunConfig, NoiselessResult), CliError> {
    let (n, k) = (a.n, a.k);
    if n < 2 {
        return Err(CliError::Domain(format!("n = {n}: need at least 2 items")));
    }
    if k == 0 || (n <= 34 && factorial(n) < k as u128) {
        return Err(CliError::Domain(format!("k = {k}: need 1 <= k <= {n}!")));
    }
    let mut rng = stream_rng(derive_seed(seed, LABEL_PLANT), 0);
    let mut perms: Vec<Permutation> = Vec::with_capacity(k);
    while perms.len() < k {
        let mut ranks: Vec<usize> = (0..n).collect();
        ranks.shuffle(&mut rng);
        let p = Permutation::from_ranks(ranks)?;
        if !perms.contains(&p) {
            perms.push(p);
        }
    }
    let raw: Vec<i64> = (0..k).map(|_| rng.random_range(1..=20)).collect();
    let total: i64 = raw.iter().sum();
    let mixture = DeltaMixture::new(
        raw.iter()
            .zip(&perms)
            .map(|(&w, p)| (Ratio::new(w, total), p.clone()))
            .collect(),
    )?;

    let m_strong = min_group_size(k);
    let mut strong = MixtureOracle::new(mixture.clone(), m_strong)?;
    let got = demix_strong(&mut strong, k)?;
    let strong_out = DemixerOutcome {
        recovered: got == mixture,
        group_size: m_strong,
        queries: permix::StrongGroupOracle::budget(&strong).count(),
        query_bound: strong_query_bound(n, k),
    };

    let mut weak = SetOracle::new(perms.clone(), k + 1)?;
    let got = insertion_demixing(&mut weak, k)?;
    let mut want = perms;
    want.sort();
    let weak_out = DemixerOutcome {
        recovered: got == want,
        group_size: k + 1,
        queries: permix::WeakGroupOracle::budget(&weak).count(),
        query_bound: weak_query_bound(n, k),
    };

    let planted = mixture
        .components()
        .iter()
        .map(|(w, p)| PlantedComponent {
            weight: w.to_string(),
            perm: p.clone(),
        })
        .collect();
    Ok((
        NoiselessRunConfig { n, k },
        NoiselessResult {
            planted,
            strong: strong_out,
            weak: weak_out,
        },
    ))
}

fn cmd_hard(a: &HardArgs) -> Result<(HardRunConfig, HardResult), CliError> {
    let h = hard_instance(a.m)?;
    let same = indistinguishable(&h, a.ell)?;
    let witness = if same {
        None
    } else {
        distinguishing_set(&h, a.ell)?.map(|s| s.iter().map(|i| i + 1).collect())
    };
    Ok((
        HardRunConfig { m: a.m, ell: a.ell },
        HardResult {
            n: h.n(),
            sigma1: h.sigma1().to_vec(),
            sigma2: h.sigma2().to_vec(),
            verdict: if same { "indistinguishable" } else { "distinguishable" }.to_string(),
            witness,
        },
    ))
}

fn cmd_tv_scan(a: &TvScanArgs) -> Result<(TvScanRunConfig, EpsScan), CliError> {
    let eps_grid = a.eps_grid.clone().unwrap_or_else(default_eps_grid);
    let h = hard_instance(a.m)?;
    let scan = tv_slope_scan(&h, &eps_grid, a.drop_largest)?;
    Ok((
        TvScanRunConfig {
            m: a.m,
            eps_grid,
            drop_largest: a.drop_largest,
        },
        scan,
    ))
}

/// CSV with a `#` comment carrying the config and a trailing comment with the slope.
pub fn tv_scan_csv(config: &TvScanRunConfig, scan: &EpsScan) -> String {
    let mut out = format!(
        "# permix tv-scan m={} drop_largest={}\neps,tv,log_eps,log_tv\n",
        config.m, config.drop_largest
    );
    for (&eps, &tv) in scan.eps_grid.iter().zip(&scan.tv_values) {
        out.push_str(&format!("{eps},{tv},{},{}\n", eps.ln(), tv.ln()));
    }
    out.push_str(&format!("# fitted_slope={}\n", scan.fitted_slope));
    out
}
