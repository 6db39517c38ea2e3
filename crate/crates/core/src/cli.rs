//! Command-line driver. Every artifact embeds the command, its resolved
//! configuration, the seed and the library version; identical inputs give
//! identical bytes.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::covering::{build_covering, Covering};
use crate::cubature::{build_rule, verify_exactness, CubatureRule, SolverOptions};
use crate::error::{Error, Result};
use crate::kernels::{kernel_decay_profile, CutoffEta, KernelSpec};
use crate::manifold::{make_spec, Kind, ManifoldSpec};
use crate::mzlab::{approx_rate, bump_fixture, mz_report, oscillation_check, MzOptions};
use crate::report::{exponent, sha256_hex, ExperimentReport, LIB_VERSION};

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ctphs", version, about = "Cubature and Marcinkiewicz-Zygmund experiments on two-point homogeneous spaces")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the structure constants of a space.
    Spec(SpaceArgs),
    /// Build and verify a (δ/n)-covering.
    Cover(CoverArgs),
    /// Solve for a positive cubature rule and verify its exactness.
    Cubature(CubatureArgs),
    /// Discrete/continuous norm ratio bands.
    Mz(MzArgs),
    /// Implied constants of the oscillation inequality.
    Oscillation(OscillationArgs),
    /// Decay profile of a smoothed kernel or its derivatives.
    KernelDecay(DecayArgs),
    /// Approximation-rate fit of delayed means.
    Rate(RateArgs),
    /// Bump-function fixture diagnostics.
    Bumps(BumpArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpaceArgs {
    #[arg(long, default_value = "sphere")]
    pub manifold: Kind,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoverArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CubatureArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Exactness degree (default 4n).
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Covering JSON from `cover`; built from --n/--delta when absent.
    #[arg(long)]
    #[serde(skip)]
    pub covering: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MzArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1.2)]
    pub delta: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2", value_parser = parse_exponent)]
    pub p: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Rule files from `cubature`, one per degree; built when absent.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip)]
    pub rule: Vec<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OscillationArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub delta: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecayArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, value_delimiter = ',', default_value = "32")]
    pub n: Vec<usize>,
    /// Decay orders ℓ.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub ell: Vec<usize>,
    /// Derivative order of the kernel.
    #[arg(long, default_value_t = 0)]
    pub order: usize,
    #[arg(long, default_value = "canonical")]
    pub eta: String,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RateArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Smoothness orders.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = 2.0, value_parser = parse_exponent)]
    pub p: f64,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BumpArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Bump scales m.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn parse_exponent(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| e.to_string()),
    }
}

/// Self-describing file wrapper for JSON artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub data: T,
}

impl<T: Serialize> Artifact<T> {
    fn new(command: &str, config: &impl Serialize, seed: u64, data: T) -> Result<Self> {
        Ok(Self {
            version: LIB_VERSION.to_string(),
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            seed,
            data,
        })
    }
}

/// Reads a covering artifact or a bare covering.
pub fn load_covering(path: &Path) -> Result<Covering> {
    let text = std::fs::read_to_string(path)?;
    let c = match serde_json::from_str::<Artifact<Covering>>(&text) {
        Ok(a) => a.data,
        Err(_) => serde_json::from_str::<Covering>(&text)?,
    };
    c.validate()?;
    Ok(c)
}

/// Reads a rule artifact or a bare rule.
pub fn load_rule(path: &Path) -> Result<CubatureRule> {
    let text = std::fs::read_to_string(path)?;
    let r = match serde_json::from_str::<Artifact<CubatureRule>>(&text) {
        Ok(a) => a.data,
        Err(_) => serde_json::from_str::<CubatureRule>(&text)?,
    };
    r.validate()?;
    Ok(r)
}

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Done,
    NotConverged,
}

fn write_out(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn write_json(out: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_out(out, s.as_bytes())
}

/// CSV to `out` (or stdout) and, with a path, the JSON record next to it.
fn write_report(out: Option<&Path>, rep: &ExperimentReport) -> Result<()> {
    let mut buf = Vec::new();
    rep.write_csv(&mut buf)?;
    write_out(out, &buf)?;
    if let Some(p) = out {
        std::fs::write(p.with_extension("json"), rep.to_json()? + "\n")?;
    }
    Ok(())
}

fn space(args: &SpaceArgs) -> Result<ManifoldSpec> {
    make_spec(args.manifold, args.d)
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::param(msg))
    }
}

fn radius(n: usize, delta: f64) -> Result<f64> {
    require(n >= 1, "--n must be at least 1")?;
    require(delta > 0.0 && delta.is_finite(), "--delta must be positive")?;
    Ok(delta / n as f64)
}

fn solver_opts(tol: f64, max_iter: usize) -> Result<SolverOptions> {
    require(tol > 0.0 && tol.is_finite(), "--tol must be positive")?;
    Ok(SolverOptions {
        tol_rel: tol,
        max_iter,
        ..SolverOptions::default()
    })
}

pub fn run(cli: Cli) -> Result<Outcome> {
    if let Some(t) = cli.threads {
        require(t >= 1, "--threads must be at least 1")?;
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match cli.command {
        Command::Spec(a) => {
            let spec = space(&a)?;
            write_json(None, &Artifact::new("spec", &a, 0, spec)?)?;
        }
        Command::Cover(a) => {
            let spec = space(&a.space)?;
            let cov = build_covering(&spec, radius(a.n, a.delta)?, a.seed)?;
            write_json(a.out.as_deref(), &Artifact::new("cover", &a, a.seed, cov)?)?;
        }
        Command::Cubature(a) => return cubature(a),
        Command::Mz(a) => mz(a)?,
        Command::Oscillation(a) => oscillation(a)?,
        Command::KernelDecay(a) => kernel_decay(a)?,
        Command::Rate(a) => rate(a)?,
        Command::Bumps(a) => bumps(a)?,
    }
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct CubatureOutput {
    rule: CubatureRule,
    exactness: crate::cubature::ExactnessReport,
}

fn cubature(a: CubatureArgs) -> Result<Outcome> {
    let spec = space(&a.space)?;
    let degree = a.degree.unwrap_or(4 * a.n);
    let opts = solver_opts(a.tol, a.max_iter)?;
    let cov = match &a.covering {
        Some(p) => {
            let c = load_covering(p)?;
            require(c.spec == spec, "covering file is for a different space")?;
            c
        }
        None => build_covering(&spec, radius(a.n, a.delta)?, a.seed)?,
    };
    let rule = build_rule(&cov, degree, a.n, opts, a.seed)?;
    let exactness = verify_exactness(&rule, a.trials, a.seed)?;
    let converged = rule.converged();
    let mut config = serde_json::to_value(&a)?;
    config["degree"] = degree.into();
    let art = Artifact {
        version: LIB_VERSION.to_string(),
        command: "cubature".into(),
        config,
        seed: a.seed,
        data: CubatureOutput { rule, exactness },
    };
    write_json(a.out.as_deref(), &art)?;
    Ok(if converged { Outcome::Done } else { Outcome::NotConverged })
}

/// Reads the rule part of a `cubature` output, an artifact of a bare rule, or a bare rule.
fn load_rule_any(path: &Path) -> Result<CubatureRule> {
    #[derive(Deserialize)]
    struct Out {
        rule: CubatureRule,
    }
    let text = std::fs::read_to_string(path)?;
    if let Ok(a) = serde_json::from_str::<Artifact<Out>>(&text) {
        a.data.rule.validate()?;
        return Ok(a.data.rule);
    }
    load_rule(path)
}

fn mz(a: MzArgs) -> Result<()> {
    let spec = space(&a.space)?;
    require(!a.n.is_empty() && !a.p.is_empty() && !a.t.is_empty(), "--n, --p and --t need values")?;
    require(a.p.iter().all(|&p| p > 0.0), "--p values must be positive")?;
    require(a.t.iter().all(|&t| (0.0..=1.0).contains(&t)), "--t values must lie in [0, 1]")?;
    require(a.trials >= 1, "--trials must be at least 1")?;
    let mut hashes = Vec::new();
    let rules: Vec<CubatureRule> = if a.rule.is_empty() {
        let opts = solver_opts(a.tol, 5000)?;
        a.n.iter()
            .map(|&n| build_rule(&build_covering(&spec, radius(n, a.delta)?, a.seed)?, 4 * n, n, opts, a.seed))
            .collect::<Result<_>>()?
    } else {
        require(a.rule.len() == a.n.len(), "give one --rule file per --n value")?;
        a.rule
            .iter()
            .map(|p| {
                hashes.push((p.display().to_string(), sha256_hex(&std::fs::read(p)?)));
                let r = load_rule_any(p)?;
                require(r.spec == spec, "rule file is for a different space")?;
                Ok(r)
            })
            .collect::<Result<_>>()?
    };
    let configs: Vec<(usize, &CubatureRule)> = a.n.iter().copied().zip(rules.iter()).collect();
    let mut rep = mz_report(&configs, &a.p, &a.t, a.trials, a.seed, MzOptions::default())?;
    rep.config = serde_json::json!({ "args": a, "p_text": a.p.iter().map(|&p| exponent::to_text(p)).collect::<Vec<_>>() });
    for (n, r) in &configs {
        rep.push(Some(*n), None, None, "", "converged", if r.converged() { 1.0 } else { 0.0 });
    }
    rep.rule_hashes.extend(hashes);
    write_report(a.out.as_deref(), &rep)
}

fn oscillation(a: OscillationArgs) -> Result<()> {
    let spec = space(&a.space)?;
    let mut rep = ExperimentReport::new("oscillation", serde_json::to_value(&a)?);
    rep.seeds.push(a.seed);
    for &n in &a.n {
        for &delta in &a.delta {
            let cov = build_covering(&spec, radius(n, delta)?, a.seed)?;
            let o = oscillation_check(&spec, &cov, n, a.p, a.trials, a.seed)?;
            let param = format!("delta={delta}");
            rep.push(Some(n), Some(a.p), None, &param, "nodes", o.nodes as f64);
            rep.push(Some(n), Some(a.p), None, &param, "multiplicity", o.multiplicity as f64);
            rep.push(Some(n), Some(a.p), None, &param, "implied_max", o.implied_max);
            rep.push(Some(n), Some(a.p), None, &param, "implied_mean", o.implied_mean);
        }
    }
    write_report(a.out.as_deref(), &rep)
}

fn kernel_decay(a: DecayArgs) -> Result<()> {
    let spec = space(&a.space)?;
    let eta = match a.eta.as_str() {
        "canonical" => CutoffEta::Canonical,
        "hard" => CutoffEta::Hard,
        other => return Err(Error::param(format!("unknown cutoff '{other}' (canonical, hard)"))),
    };
    let mut rep = ExperimentReport::new("kernel_decay", serde_json::to_value(&a)?);
    for &n in &a.n {
        for &ell in &a.ell {
            let prof = kernel_decay_profile(&spec, KernelSpec::new(n, eta)?, ell, a.order)?;
            let param = format!("ell={ell}");
            rep.push(Some(n), None, None, &param, "implied_constant", prof.implied_constant);
            rep.push(Some(n), None, None, &param, "argmax_x", prof.argmax_x);
            rep.push(Some(n), None, None, &param, "tail_slope", prof.tail_slope);
            for row in &prof.rows {
                rep.push(Some(n), None, None, &format!("{param};x={:e}", row.x), "abs_kernel", row.value);
            }
        }
    }
    write_report(a.out.as_deref(), &rep)
}

fn rate(a: RateArgs) -> Result<()> {
    let spec = space(&a.space)?;
    let mut rep = ExperimentReport::new("rate", serde_json::to_value(&a)?);
    rep.seeds.push(a.seed);
    for &r in &a.r {
        let fit = approx_rate(&spec, r, a.p, &a.n, a.seed)?;
        let param = format!("r={r}");
        for (&n, &y) in a.n.iter().zip(&fit.y) {
            rep.push(Some(n), Some(a.p), None, &param, "log_error", y);
        }
        rep.push(None, Some(a.p), None, &param, "slope", fit.slope);
        rep.push(None, Some(a.p), None, &param, "r2", fit.r2);
        rep.push(None, Some(a.p), None, &param, "degenerate", if fit.degenerate { 1.0 } else { 0.0 });
    }
    write_report(a.out.as_deref(), &rep)
}

fn bumps(a: BumpArgs) -> Result<()> {
    let spec = space(&a.space)?;
    let mut rep = ExperimentReport::new("bumps", serde_json::to_value(&a)?);
    rep.seeds.push(a.seed);
    for &m in &a.n {
        let fx = bump_fixture(&spec, m as f64, a.count, a.seed)?;
        let d = &fx.diagnostics;
        for (stat, v) in [
            ("min_center_distance", d.min_center_distance),
            ("norm_l1", d.norm_l1),
            ("norm_l2", d.norm_l2),
            ("scaled_l1", d.scaled_l1),
            ("scaled_l2", d.scaled_l2),
            ("laplacian_max", d.laplacian_max),
            ("scaled_laplacian", d.scaled_laplacian),
        ] {
            rep.push(Some(m), None, None, "", stat, v);
        }
    }
    write_report(a.out.as_deref(), &rep)
}

/// Exit code for a library error: invalid configuration versus anything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) | Error::UnsupportedKind { .. } | Error::UseLift(_) | Error::DimensionMismatch { .. } => {
            EXIT_INVALID
        }
        _ => EXIT_OTHER,
    }
}

/// Machine-readable error line for standard error.
pub fn error_json(code: &str, message: &str) -> String {
    serde_json::json!({ "error": code, "message": message }).to_string()
}

/// Parses arguments, runs, and maps the outcome to a process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            eprintln!("{}", error_json("usage", e.to_string().trim()));
            return EXIT_INVALID;
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::NotConverged) => {
            eprintln!("{}", error_json("not_converged", "solver stopped above its residual tolerance"));
            EXIT_NOT_CONVERGED
        }
        Err(e) => {
            eprintln!("{}", error_json(e.code(), &e.to_string()));
            exit_code(&e)
        }
    }
}
