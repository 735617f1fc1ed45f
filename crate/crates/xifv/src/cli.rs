//! The `xifv` command line.
//!
//! Exit codes: 2 for an invalid configuration, 1 for a failure while
//! running, 0 otherwise. Check-style runs end with a line starting with
//! `pass` or `fail`.
//!
//! `--config <file>` reads a JSON object whose `command` key names the
//! subcommand and whose other keys are its flags (`"n": 3` means `--n 3`,
//! `true` switches a flag on). Flags given after `--config` override the
//! file.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use xifv_core::coalescent::{simulate_bottleneck, simulate_bottleneck_schedule, simulate_poisson_construction, BottleneckSpec, JumpChainSampler, SeverityLaw};
use xifv_core::combinatorics::{integer_partitions, Partition};
use xifv_core::duality::{self, MomentFunction};
use xifv_core::lookdown::{iid_initial, run_coupled, simulate_lookdown};
use xifv_core::rates::{self, RateQuery, MAX_BLOCKS};
use xifv_core::seed::{derive_seed, rng_from_seed, stream_seed, ReplicateRunner};
use xifv_core::stats::{DualityReport, Estimate, MeanVar};

use crate::model::{parse_distribution, parse_mutation, parse_schedule, parse_xi};
use crate::output::{emit, fmt17, manifest_ref, to_json, CsvTable, Manifest};
use crate::runner::Rayon;

#[derive(Debug, Parser)]
#[command(name = "xifv", version, about = "Xi-coalescents, lookdown models and duality checks", args_override_self = true)]
pub struct Cli {
    /// Worker threads for replicates; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collision rates and block counting rates.
    Rates(RatesArgs),
    /// Coalescent paths: time to the most recent common ancestor per replicate.
    Coalescent(CoalescentArgs),
    /// Lookdown model runs, optionally coupled to the Moran model.
    Lookdown(LookdownArgs),
    /// Monte Carlo duality checks.
    Duality(DualityArgs),
    /// Kingman coalescent with recurrent bottlenecks.
    Bottleneck(BottleneckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rates(_) => "rates",
            Command::Coalescent(_) => "coalescent",
            Command::Lookdown(_) => "lookdown",
            Command::Duality(_) => "duality",
            Command::Bottleneck(_) => "bottleneck",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateMethodArg {
    /// Tuple enumeration over atoms, closed form for Poisson-Dirichlet.
    Exact,
    PowerSums,
    MonteCarlo,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RatesArgs {
    /// Preset (kingman[:a], uniform_l:<l>, pd:<theta>) or JSON.
    #[arg(long)]
    pub xi: String,
    /// Largest number of blocks.
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = RateMethodArg::Exact)]
    pub method: RateMethodArg,
    /// Samples per Monte Carlo integral.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerArg {
    JumpChain,
    Poisson,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoalescentArgs {
    /// Preset (kingman[:a], uniform_l:<l>, pd:<theta>) or JSON.
    #[arg(long)]
    pub xi: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    /// Stop at this time; runs to a single block when absent.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, value_enum, default_value_t = SamplerArg::JumpChain)]
    pub method: SamplerArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LookdownArgs {
    /// Preset (kingman[:a], uniform_l:<l>, pd:<theta>) or JSON.
    #[arg(long)]
    pub xi: String,
    #[arg(long, default_value_t = 10)]
    pub levels: usize,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    /// Alphabet size.
    #[arg(long, default_value_t = 2)]
    pub types: usize,
    /// Law of the i.i.d. initial types: `uniform` or comma-separated.
    #[arg(long, default_value = "uniform")]
    pub initial: String,
    /// `none`, `flip:<rate>` or JSON with `rate` and `transition`.
    #[arg(long, default_value = "none")]
    pub mutation: String,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// Run the Moran model alongside and check that it is the relabelled
    /// lookdown model at every event.
    #[arg(long)]
    pub coupled: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckArg {
    /// `E[Y_tⁿ]` against `E[y0^{D_t}]`.
    Moment,
    /// Sampling functional of the lookdown model against the coalescent.
    Distributional,
    /// Lookdown model against the function-valued dual.
    Function,
    /// Finite-difference drift against the generator.
    Generator,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DualityArgs {
    #[arg(long, value_enum)]
    pub check: CheckArg,
    /// Preset (kingman[:a], uniform_l:<l>, pd:<theta>) or JSON.
    #[arg(long)]
    pub xi: String,
    /// Sample size.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Initial frequency of type 1 (two types).
    #[arg(long, default_value_t = 0.3)]
    pub y0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Paths per side.
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    /// Lookdown levels for the checks that simulate the lookdown model.
    #[arg(long, default_value_t = 200)]
    pub levels: usize,
    /// Step of the generator check.
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    /// Mutation for the function and generator checks.
    #[arg(long, default_value = "none")]
    pub mutation: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BottleneckArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Fixed bottlenecks `time:severity,…`.
    #[arg(long, conflicts_with_all = ["beta", "severity"])]
    pub schedule: Option<String>,
    /// Rate of random bottlenecks.
    #[arg(long, requires = "severity")]
    pub beta: Option<f64>,
    /// `fixed:<gamma>` or `exp:<mean>`.
    #[arg(long, requires = "beta")]
    pub severity: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Runtime(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl From<xifv_core::Error> for CliError {
    fn from(e: xifv_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn config<T>(r: Result<T, String>) -> Result<T, CliError> {
    r.map_err(CliError::Config)
}

fn require(ok: bool, msg: impl Into<String>) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg.into()))
    }
}

fn io_error(path: Option<&Path>, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("cannot write {}: {e}", path.map_or("stdout".into(), |p| p.display().to_string())))
}

/// The lines printed after the artifacts, and whether a check passed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub summary: Vec<String>,
    pub check: Option<bool>,
}

fn finish_csv(table: &CsvTable, out: Option<&Path>, mut manifest: Manifest) -> Result<(), CliError> {
    let body = table.render(&manifest_ref(out, &manifest));
    emit(out, &body, &mut manifest).map_err(|e| io_error(out, e))
}

fn manifest_for<T: Serialize>(command: &str, args: &T, seed: u64) -> Manifest {
    Manifest::new(command, serde_json::to_value(args).expect("arguments serialise"), seed)
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

pub fn run_rates(a: &RatesArgs) -> Result<Outcome, CliError> {
    let xi = config(parse_xi(&a.xi))?;
    require((2..=MAX_BLOCKS).contains(&a.n), format!("n must be in 2..={MAX_BLOCKS}"))?;
    require(a.method != RateMethodArg::MonteCarlo || a.samples >= rates::MIN_MC_SAMPLES, format!("at least {} samples are required", rates::MIN_MC_SAMPLES))?;
    let mut table = CsvTable::new(["quantity", "b", "k", "signature", "value", "stderr"]);
    for b in 2..=a.n {
        for (j, sig) in integer_partitions(b).into_iter().filter(|s| !s.is_trivial()).enumerate() {
            let q = RateQuery::from_signature(sig.clone())?;
            let est = match a.method {
                RateMethodArg::Exact => Estimate { value: rates::collision_rate(&xi, &q)?, stderr: 0.0 },
                RateMethodArg::PowerSums => Estimate { value: rates::collision_rate_power_sums(&xi, &q)?, stderr: 0.0 },
                RateMethodArg::MonteCarlo => {
                    let mut rng = rng_from_seed(derive_seed(stream_seed(a.seed, 0x1A, b as u64), j as u64));
                    rates::collision_rate_mc(&xi, &q, a.samples, &mut rng)?
                }
            };
            table.push(vec![
                "lambda".into(),
                b.to_string(),
                q.resulting_blocks().to_string(),
                sig.to_string(),
                fmt17(est.value),
                fmt17(est.stderr),
            ]);
        }
        let g: Vec<Estimate> = match a.method {
            RateMethodArg::Exact => rates::block_counting_rates(&xi, b)?.iter().map(|(_, v)| Estimate { value: v, stderr: 0.0 }).collect(),
            RateMethodArg::PowerSums => {
                rates::block_counting_rates_power_sums(&xi, b)?.iter().map(|(_, v)| Estimate { value: v, stderr: 0.0 }).collect()
            }
            RateMethodArg::MonteCarlo => {
                let mut rng = rng_from_seed(derive_seed(stream_seed(a.seed, 0x1B, 0), b as u64));
                rates::block_counting_rates_mc(&xi, b, a.samples, &mut rng)?[1..b].to_vec()
            }
        };
        let mut total = 0.0;
        for (k, est) in (1..b).zip(&g) {
            total += est.value;
            table.push(vec!["g".into(), b.to_string(), k.to_string(), String::new(), fmt17(est.value), fmt17(est.stderr)]);
        }
        table.push(vec!["total".into(), b.to_string(), String::new(), String::new(), fmt17(total), String::new()]);
    }
    finish_csv(&table, a.out.as_deref(), manifest_for("rates", a, a.seed))?;
    Ok(Outcome::default())
}

pub fn run_coalescent<R: ReplicateRunner>(a: &CoalescentArgs, runner: &R) -> Result<Outcome, CliError> {
    let xi = config(parse_xi(&a.xi))?;
    require(a.n >= 1, "n must be at least 1")?;
    require(a.method == SamplerArg::Poisson || a.n <= MAX_BLOCKS, format!("the jump chain supports n <= {MAX_BLOCKS}"))?;
    require(a.replicates >= 1, "replicates must be at least 1")?;
    let horizon = a.horizon.unwrap_or(f64::INFINITY);
    require(horizon > 0.0, "horizon must be > 0")?;
    require(a.horizon.is_some() || xi.total_mass() > 0.0, "a zero measure never coalesces; give a horizon")?;
    let chain = match a.method {
        SamplerArg::JumpChain => Some(JumpChainSampler::new(&xi, a.n)?),
        SamplerArg::Poisson => None,
    };
    let rows = runner.run(a.replicates, |i| -> Result<_, xifv_core::Error> {
        let seed = derive_seed(a.seed, i as u64);
        match &chain {
            Some(c) => Ok((seed, c.sample(horizon, seed)?, None)),
            None => {
                let (path, diag) = simulate_poisson_construction(&xi, a.n, horizon, seed)?;
                Ok((seed, path, Some(diag)))
            }
        }
    });
    let mut table = CsvTable::new(["replicate", "seed", "tmrca", "jumps", "final_blocks", "reproduction_events", "null_events"]);
    let mut tmrca = MeanVar::default();
    for (i, row) in rows.into_iter().enumerate() {
        let (seed, path, diag) = row?;
        if let Some(t) = path.tmrca() {
            tmrca.push(t);
        }
        table.push(vec![
            i.to_string(),
            seed.to_string(),
            opt(path.tmrca()),
            path.num_jumps().to_string(),
            path.current().num_blocks().to_string(),
            diag.map(|d| d.reproduction_events.to_string()).unwrap_or_default(),
            diag.map(|d| d.null_events.to_string()).unwrap_or_default(),
        ]);
    }
    finish_csv(&table, a.out.as_deref(), manifest_for("coalescent", a, a.seed))?;
    let e = Estimate::from(&tmrca);
    Ok(Outcome {
        summary: vec![format!("reached_one_block={} of {} mean_tmrca={} stderr={}", tmrca.count(), a.replicates, fmt17(e.value), fmt17(e.stderr))],
        check: None,
    })
}

pub fn run_lookdown<R: ReplicateRunner>(a: &LookdownArgs, runner: &R) -> Result<Outcome, CliError> {
    let xi = config(parse_xi(&a.xi))?;
    require(a.types >= 1, "types must be at least 1")?;
    require(a.levels >= 1, "levels must be at least 1")?;
    require(a.replicates >= 1, "replicates must be at least 1")?;
    require(a.horizon >= 0.0, "horizon must be >= 0")?;
    let mutation = config(parse_mutation(&a.mutation, a.types))?;
    let dist = config(parse_distribution(&a.initial, a.types))?;
    let runs = runner.run(a.replicates, |i| -> Result<_, xifv_core::Error> {
        let seed = derive_seed(a.seed, i as u64);
        let initial = iid_initial(a.levels, &dist, seed)?;
        if a.coupled {
            let run = run_coupled(&xi, &mutation, initial, a.horizon, seed)?;
            let ok = run.identity_holds() && run.empirical_measures_agree();
            let last = run.lookdown.last().expect("initial state is recorded").clone();
            Ok((seed, last, run.log.len(), Some(ok)))
        } else {
            let run = simulate_lookdown(&xi, &mutation, initial, a.horizon, seed)?;
            Ok((seed, run.final_state.types, run.log.entries.len(), None))
        }
    });
    let mut table = CsvTable::new(["replicate", "seed", "level", "type"]);
    let mut events = 0usize;
    let mut all_ok = true;
    for (i, r) in runs.into_iter().enumerate() {
        let (seed, types, n_events, ok) = r?;
        events += n_events;
        all_ok &= ok.unwrap_or(true);
        for (v, t) in types.iter().enumerate() {
            table.push(vec![i.to_string(), seed.to_string(), (v + 1).to_string(), t.to_string()]);
        }
    }
    finish_csv(&table, a.out.as_deref(), manifest_for("lookdown", a, a.seed))?;
    let mut summary = vec![format!("replicates={} events={events}", a.replicates)];
    let check = a.coupled.then_some(all_ok);
    if let Some(ok) = check {
        summary.push(format!("{} coupling identity {} in all {} replicates", if ok { "pass" } else { "fail" }, if ok { "held" } else { "broke" }, a.replicates));
    }
    Ok(Outcome { summary, check })
}

#[derive(Debug, Clone, Serialize)]
struct ReportJson {
    estimate_left: f64,
    stderr_left: f64,
    estimate_right: f64,
    stderr_right: f64,
    z: f64,
    pass: bool,
}

impl From<&DualityReport> for ReportJson {
    fn from(r: &DualityReport) -> Self {
        Self {
            estimate_left: r.estimate_left,
            stderr_left: r.stderr_left,
            estimate_right: r.estimate_right,
            stderr_right: r.stderr_right,
            z: r.z,
            pass: r.pass(),
        }
    }
}

pub fn run_duality<R: ReplicateRunner>(a: &DualityArgs, runner: &R) -> Result<Outcome, CliError> {
    let xi = config(parse_xi(&a.xi))?;
    require((0.0..=1.0).contains(&a.y0), "y0 must lie in [0, 1]")?;
    require(a.n >= 1, "n must be at least 1")?;
    require(a.paths >= 1, "paths must be at least 1")?;
    let mutation = config(parse_mutation(&a.mutation, 2))?;
    let mu = [1.0 - a.y0, a.y0];
    let report = match a.check {
        CheckArg::Moment => {
            require(a.n <= 8, "n must be at most 8")?;
            require(a.paths >= duality::MIN_DUALITY_PATHS, format!("at least {} paths are required", duality::MIN_DUALITY_PATHS))?;
            require(a.t > 0.0, "t must be > 0")?;
            duality::moment_duality_check(&xi, a.n, a.y0, a.t, a.paths, a.seed, runner)?
        }
        CheckArg::Distributional => {
            require(a.n <= 5, "n must be at most 5")?;
            require(a.levels >= a.n, "levels must be at least n")?;
            let f = MomentFunction::all_equal(a.n, 2)?;
            duality::distributional_duality_check(&xi, &f, &Partition::singletons(a.n), &mu, a.t, a.levels, a.paths, a.seed, runner)?
        }
        CheckArg::Function => {
            require(a.n <= duality::MAX_ARITY, format!("n must be at most {}", duality::MAX_ARITY))?;
            require(a.levels >= a.n, "levels must be at least n")?;
            let f = MomentFunction::indicator_product(a.n, 2, 1)?;
            duality::function_duality_check(&xi, &mutation, &f, &mu, a.t, a.levels, a.paths, a.seed, runner)?
        }
        CheckArg::Generator => {
            require(a.n <= duality::MAX_ARITY, format!("n must be at most {}", duality::MAX_ARITY))?;
            require(a.levels >= a.n, "levels must be at least n")?;
            require(a.h > 0.0, "h must be > 0")?;
            let f = MomentFunction::indicator_product(a.n, 2, 1)?;
            duality::generator_martingale_check(&xi, &mutation, &f, &mu, a.t, a.h, a.levels, a.paths, a.seed, runner)?
        }
    };
    let mut manifest = manifest_for("duality", a, a.seed);
    let body = to_json(&ReportJson::from(&report));
    let out = a.out.as_deref();
    emit(out, &body, &mut manifest).map_err(|e| io_error(out, e))?;
    let verdict = if report.pass() { "pass" } else { "fail" };
    Ok(Outcome { summary: vec![format!("{verdict} z={}", fmt17(report.z))], check: Some(report.pass()) })
}

fn parse_severity(s: &str) -> Result<SeverityLaw, String> {
    let law = if let Some(g) = s.strip_prefix("fixed:") {
        SeverityLaw::Fixed(g.trim().parse().map_err(|_| format!("cannot read severity from {s:?}"))?)
    } else if let Some(m) = s.strip_prefix("exp:") {
        SeverityLaw::Exponential { mean: m.trim().parse().map_err(|_| format!("cannot read mean from {s:?}"))? }
    } else {
        return Err(format!("severity {s:?} is neither fixed:<gamma> nor exp:<mean>"));
    };
    law.validate().map_err(|e| e.to_string())?;
    Ok(law)
}

/// `E exp(−S_t)` for the clock `S_t = t + Σ_{τᵢ ≤ t} γᵢ`: the chance that
/// two lineages are still apart at `t`.
fn pair_survival(horizon: f64, schedule: Option<&[(f64, f64)]>, random: Option<&BottleneckSpec>) -> f64 {
    if let Some(s) = schedule {
        let extra: f64 = s.iter().filter(|(t, _)| *t <= horizon).map(|(_, g)| g).sum();
        return (-(horizon + extra)).exp();
    }
    let spec = random.expect("either a schedule or a random law");
    let laplace = match &spec.severity {
        SeverityLaw::Fixed(g) => (-g).exp(),
        SeverityLaw::Exponential { mean } => 1.0 / (1.0 + mean),
        SeverityLaw::Discrete(v) => {
            let total: f64 = v.iter().map(|(_, w)| w).sum();
            v.iter().map(|(g, w)| w * (-g).exp()).sum::<f64>() / total
        }
    };
    (-horizon - spec.beta * horizon * (1.0 - laplace)).exp()
}

pub fn run_bottleneck<R: ReplicateRunner>(a: &BottleneckArgs, runner: &R) -> Result<Outcome, CliError> {
    require(a.n >= 1, "n must be at least 1")?;
    require(a.horizon > 0.0, "horizon must be > 0")?;
    require(a.replicates >= 1, "replicates must be at least 1")?;
    let schedule = a.schedule.as_deref().map(parse_schedule).transpose().map_err(CliError::Config)?;
    if let Some(s) = &schedule {
        require(s.iter().all(|(t, g)| *t >= 0.0 && *g > 0.0), "schedule times must be >= 0 and severities > 0")?;
    }
    let random = match (a.beta, a.severity.as_deref()) {
        (Some(beta), Some(sev)) => Some(BottleneckSpec::new(beta, config(parse_severity(sev))?).map_err(|e| CliError::Config(e.to_string()))?),
        _ => None,
    };
    let schedule = schedule.unwrap_or_default();
    let paths = runner.run(a.replicates, |i| {
        let seed = derive_seed(a.seed, i as u64);
        let path = match &random {
            Some(spec) => simulate_bottleneck(spec, a.n, a.horizon, seed),
            None => simulate_bottleneck_schedule(&schedule, a.n, a.horizon, seed),
        };
        path.map(|p| (seed, p))
    });
    let mut table = CsvTable::new(["replicate", "seed", "final_blocks", "first_merge_time"]);
    let mut survived = MeanVar::default();
    let mut single = 0usize;
    for (i, p) in paths.into_iter().enumerate() {
        let (seed, path) = p?;
        let blocks = path.current().num_blocks();
        survived.push(if blocks == a.n { 1.0 } else { 0.0 });
        single += usize::from(blocks == 1);
        let first = path.first_jump().map(|(t, _)| t);
        table.push(vec![i.to_string(), seed.to_string(), blocks.to_string(), opt(first)]);
    }
    finish_csv(&table, a.out.as_deref(), manifest_for("bottleneck", a, a.seed))?;
    let est = Estimate::from(&survived);
    let mut summary = vec![format!(
        "no_merger={} stderr={} one_block_fraction={}",
        fmt17(est.value),
        fmt17(est.stderr),
        fmt17(single as f64 / a.replicates as f64)
    )];
    let mut check = None;
    if a.n == 2 {
        let predicted = pair_survival(a.horizon, random.is_none().then_some(&schedule[..]), random.as_ref());
        let ok = est.within(predicted, 3.0);
        summary.push(format!("{} pair survival {} against exp(-R_t) = {}", if ok { "pass" } else { "fail" }, fmt17(est.value), fmt17(predicted)));
        check = Some(ok);
    }
    Ok(Outcome { summary, check })
}

pub fn run_command(cli: &Cli) -> Result<Outcome, CliError> {
    let runner = Rayon::new(cli.jobs).map_err(CliError::Runtime)?;
    match &cli.command {
        Command::Rates(a) => run_rates(a),
        Command::Coalescent(a) => run_coalescent(a, &runner),
        Command::Lookdown(a) => run_lookdown(a, &runner),
        Command::Duality(a) => run_duality(a, &runner),
        Command::Bottleneck(a) => run_bottleneck(a, &runner),
    }
}

/// Replaces `--config <file>` by the flags it holds.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let pos = args.iter().position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="));
    let Some(pos) = pos else { return Ok(args) };
    let mut rest = args.clone();
    let flag = rest.remove(pos).to_string_lossy().into_owned();
    let path = match flag.strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => {
            if pos >= rest.len() {
                return Err(CliError::Config("--config needs a file".into()));
            }
            rest.remove(pos).to_string_lossy().into_owned()
        }
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
    let obj = value.as_object().ok_or_else(|| CliError::Config(format!("{path} must hold a JSON object")))?;
    let command = obj
        .get("command")
        .and_then(|c| c.as_str())
        .ok_or_else(|| CliError::Config(format!("{path} needs a string \"command\"")))?
        .to_string();
    let mut out: Vec<OsString> = vec![rest.first().cloned().unwrap_or_else(|| "xifv".into()), command.clone().into()];
    for (key, v) in obj {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            serde_json::Value::Bool(true) => out.push(flag.into()),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => {
                out.push(flag.into());
                out.push(s.into());
            }
            serde_json::Value::Number(n) => {
                out.push(flag.into());
                out.push(n.to_string().into());
            }
            other => {
                out.push(flag.into());
                out.push(other.to_string().into());
            }
        }
    }
    let mut tail = rest.into_iter().skip(1).peekable();
    if tail.peek().is_some_and(|a| *a == *command) {
        tail.next();
    }
    out.extend(tail);
    Ok(out)
}

/// Parses, runs and reports; returns the process exit code.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run_command(&cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
