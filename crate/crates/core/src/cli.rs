//! The `qconnect` command-line front end: `verify`, `eval` and `sample`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};
use crate::identities::sampler::SampleConfig;
use crate::identities::{check, sample_instance, Instance, RelationKind};
use crate::jackson::{h3_phi, phi, RPParams};
use crate::qcore::{qpoch_fin, qpoch_inf, theta, Nome, Scalar, TruncationPolicy};
use crate::qdiff::H3Params;
use crate::report::{nullable_f64, IdentityReport, Status};
use crate::series::{bailey_integral, kajihara_w, w87, BaileyParams, KajiharaParams};

/// Environment variable overriding the default tolerance of every relation.
pub const TOL_ENV: &str = "QCONNECT_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qconnect", version, about = "Evaluate q-special functions and verify their connection formulas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a relation's checker over seeded random instances.
    Verify(VerifyArgs),
    /// Evaluate a single function.
    Eval(EvalArgs),
    /// Print a sampled parameter set as JSON.
    Sample(SampleArgs),
}

#[derive(Debug, Args, Default)]
pub struct VerifyArgs {
    /// Relation name (e.g. `rp-connection`) or `all`.
    pub relation: String,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// A fixed real nome, or `sample`.
    #[arg(long)]
    pub q: Option<String>,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Key-value config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sample complex parameters (only for relations that allow it).
    #[arg(long)]
    pub complex: bool,
    #[arg(long)]
    pub max_terms: Option<usize>,
    #[arg(long)]
    pub max_total_index: Option<usize>,
    /// Tail tolerance of products, sums and integrals.
    #[arg(long)]
    pub trunc_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// One of qpoch, theta, w87, kajihara, phi, h3phi, bailey.
    pub function: String,
    /// Scalar literals such as `0.5`, `-2`, `0.3+0.1i` or `0.3,0.1`. Complex
    /// literals with a leading minus go after `--`.
    #[arg(allow_negative_numbers = true)]
    pub args: Vec<String>,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub trunc_tol: Option<f64>,
    #[arg(long)]
    pub max_terms: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Relation whose parameter family is sampled.
    #[arg(long, default_value = "rp-connection")]
    pub relation: String,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub complex: bool,
}

/// Which relations a `verify` run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    One(RelationKind),
    All,
}

/// Fully resolved settings of a `verify` run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub relation: Selection,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    /// `None` means each relation's default (or `QCONNECT_TOL`).
    pub tol: Option<f64>,
    /// `None` samples the nome.
    pub q: Option<f64>,
    pub truncation: TruncationPolicy,
    pub report_path: Option<PathBuf>,
    pub real_only: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            relation: Selection::All,
            m: 1,
            trials: 20,
            seed: 0,
            tol: None,
            q: None,
            truncation: TruncationPolicy::default(),
            report_path: None,
            real_only: true,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| QError::InvalidParams(format!("config line {}: expected key = value", n + 1)))?;
        out.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| QError::InvalidParams(format!("cannot parse {key} = '{v}'")))
}

fn parse_q(v: &str) -> Result<Option<f64>> {
    if v == "sample" {
        Ok(None)
    } else {
        let q: f64 = parse_field("q", v)?;
        if !(q > 0.0 && q < 1.0) {
            return Err(QError::InvalidParams(format!("q = {q} must lie in (0, 1)")));
        }
        Ok(Some(q))
    }
}

impl RunConfig {
    /// Layers the config file, then the flags, over the defaults. `env_tol`
    /// is the value of `QCONNECT_TOL`, which replaces relation defaults.
    pub fn resolve(args: &VerifyArgs, env_tol: Option<&str>) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut relation = None;
        if let Some(t) = env_tol {
            cfg.tol = Some(parse_field(TOL_ENV, t.trim())?);
        }
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| QError::InvalidParams(format!("cannot read {}: {e}", path.display())))?;
            for (k, v) in parse_config_text(&text)? {
                match k.as_str() {
                    "relation" => relation = Some(v),
                    "m" => cfg.m = parse_field(&k, &v)?,
                    "trials" => cfg.trials = parse_field(&k, &v)?,
                    "seed" => cfg.seed = parse_field(&k, &v)?,
                    "tol" => cfg.tol = Some(parse_field(&k, &v)?),
                    "q" => cfg.q = parse_q(&v)?,
                    "report" => cfg.report_path = Some(PathBuf::from(v)),
                    "complex" => cfg.real_only = !parse_field::<bool>(&k, &v)?,
                    "max_terms" => cfg.truncation.max_terms = parse_field(&k, &v)?,
                    "max_total_index" => cfg.truncation.max_total_index = parse_field(&k, &v)?,
                    "trunc_tol" => cfg.truncation.tol = parse_field(&k, &v)?,
                    _ => return Err(QError::InvalidParams(format!("unknown config key '{k}'"))),
                }
            }
        }
        if !args.relation.is_empty() {
            relation = Some(args.relation.clone());
        }
        let relation = relation.ok_or_else(|| QError::InvalidParams("no relation given".into()))?;
        cfg.relation = if relation == "all" { Selection::All } else { Selection::One(relation.parse()?) };
        if let Some(m) = args.m {
            cfg.m = m;
        }
        if let Some(t) = args.trials {
            cfg.trials = t;
        }
        if let Some(s) = args.seed {
            cfg.seed = s;
        }
        if let Some(t) = args.tol {
            cfg.tol = Some(t);
        }
        if let Some(q) = &args.q {
            cfg.q = parse_q(q)?;
        }
        if let Some(p) = &args.report {
            cfg.report_path = Some(p.clone());
        }
        if args.complex {
            cfg.real_only = false;
        }
        if let Some(v) = args.max_terms {
            cfg.truncation.max_terms = v;
        }
        if let Some(v) = args.max_total_index {
            cfg.truncation.max_total_index = v;
        }
        if let Some(v) = args.trunc_tol {
            cfg.truncation.tol = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(QError::InvalidParams("trials must be at least 1".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(QError::InvalidParams(format!("tol = {t} must be positive")));
            }
        }
        self.truncation.validate()?;
        if let Selection::One(kind) = self.relation {
            kind.effective_m(self.m)?;
            if !self.real_only && !kind.allows_complex() {
                return Err(QError::InvalidParams(format!("{} is only checked for real parameters", kind.name())));
            }
        }
        self.sample_config().validate()
    }

    pub fn sample_config(&self) -> SampleConfig {
        SampleConfig { seed: self.seed, m: self.m, q: self.q, real_only: self.real_only, ..SampleConfig::default() }
    }

    pub fn tol_for(&self, kind: RelationKind) -> f64 {
        self.tol.unwrap_or_else(|| kind.default_tol())
    }
}

/// The trial with the largest residual, or the first errored trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub trial: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<Instance>,
    pub report: IdentityReport,
}

/// Aggregate of one relation over all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub relation: String,
    pub anchor: String,
    pub m: usize,
    pub trials: usize,
    pub passes: usize,
    pub failures: usize,
    pub errors: usize,
    #[serde(with = "nullable_f64")]
    pub max_rel_residual: f64,
    pub tol: f64,
    pub seed: u64,
    pub wall_time_s: f64,
    /// Relative residual per trial, in trial order.
    pub rel_residuals: Vec<Option<f64>>,
    pub worst: Option<WorstCase>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.errors == 0
    }
}

/// Several suites from one `verify all` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyAllReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub skipped: Vec<String>,
}

fn run_trial(kind: RelationKind, cfg: &SampleConfig, pol: &TruncationPolicy, tol: f64, trial: u64) -> (Option<Instance>, IdentityReport) {
    match sample_instance(kind, cfg, trial) {
        Ok(inst) => {
            let r = check(kind, &inst, pol, tol);
            (Some(inst), r)
        }
        Err(e) => (None, IdentityReport::from_error(&e)),
    }
}

/// Runs `cfg.trials` instances of `kind` in parallel; results are ordered by trial.
pub fn run_suite(kind: RelationKind, cfg: &RunConfig) -> Result<SuiteReport> {
    let m = kind.effective_m(cfg.m)?;
    let tol = cfg.tol_for(kind);
    let scfg = SampleConfig { m, ..cfg.sample_config() };
    let start = Instant::now();
    let results: Vec<(Option<Instance>, IdentityReport)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(kind, &scfg, &cfg.truncation, tol, t))
        .collect();
    let wall_time_s = start.elapsed().as_secs_f64();

    let count = |s: Status| results.iter().filter(|(_, r)| r.status == s).count();
    let mut worst_idx: Option<usize> = None;
    for (i, (_, r)) in results.iter().enumerate() {
        worst_idx = match worst_idx {
            None => Some(i),
            Some(w) => {
                let cur = &results[w].1;
                let replace = match (cur.status, r.status) {
                    (Status::Error, _) => false,
                    (_, Status::Error) => true,
                    _ => r.rel_residual > cur.rel_residual,
                };
                Some(if replace { i } else { w })
            }
        };
    }
    let max_rel_residual = results
        .iter()
        .map(|(_, r)| if r.status == Status::Error { f64::NAN } else { r.rel_residual })
        .fold(0.0_f64, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) });
    let worst = worst_idx.map(|i| WorstCase { trial: i as u64, instance: results[i].0.clone(), report: results[i].1.clone() });
    Ok(SuiteReport {
        relation: kind.name().to_string(),
        anchor: kind.anchor().to_string(),
        m: if kind.m_range().is_some() { m } else { 1 },
        trials: cfg.trials,
        passes: count(Status::Pass),
        failures: count(Status::Fail),
        errors: count(Status::Error),
        max_rel_residual,
        tol,
        seed: cfg.seed,
        wall_time_s,
        rel_residuals: results
            .iter()
            .map(|(_, r)| if r.rel_residual.is_finite() { Some(r.rel_residual) } else { None })
            .collect(),
        worst,
    })
}

/// Writes `json` to `path`, creating parent directories.
fn write_report(path: &Path, json: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| QError::InvalidParams(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, json).map_err(|e| QError::InvalidParams(format!("cannot write {}: {e}", path.display())))
}

/// `verify`: returns the exit code.
pub fn cmd_verify(cfg: &RunConfig, out: &mut dyn Write) -> i32 {
    let (json, ok) = match cfg.relation {
        Selection::One(kind) => match run_suite(kind, cfg) {
            Ok(r) => (serde_json::to_string_pretty(&r).expect("report serializes"), r.passed()),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        },
        Selection::All => {
            let mut suites = Vec::new();
            let mut skipped = Vec::new();
            for kind in RelationKind::ALL {
                if kind.effective_m(cfg.m).is_err() || (!cfg.real_only && !kind.allows_complex()) {
                    skipped.push(kind.name().to_string());
                    continue;
                }
                match run_suite(kind, cfg) {
                    Ok(r) => suites.push(r),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return EXIT_CONFIG;
                    }
                }
            }
            let ok = suites.iter().all(SuiteReport::passed);
            let all = VerifyAllReport { seed: cfg.seed, suites, skipped };
            (serde_json::to_string_pretty(&all).expect("report serializes"), ok)
        }
    };
    if let Some(path) = &cfg.report_path {
        if let Err(e) = write_report(path, &json) {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    }
    let _ = writeln!(out, "{json}");
    if ok {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

/// Parses `0.5`, `-2e-3`, `0.3+0.1i`, `-1-2i`, `2i` or `0.3,0.1`.
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let bad = || QError::InvalidParams(format!("cannot parse scalar '{s}'"));
    let t = s.trim().replace(' ', "");
    if let Some((a, b)) = t.split_once(',') {
        return Ok(Scalar::new(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?));
    }
    if let Ok(v) = t.parse::<f64>() {
        return Ok(Scalar::new(v, 0.0));
    }
    let body = t.strip_suffix('i').or_else(|| t.strip_suffix('j')).ok_or_else(bad)?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_part, im_part) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse().map_err(|_| bad())?,
    };
    Ok(Scalar::new(re_part.parse().map_err(|_| bad())?, im))
}

fn parse_index(s: &str) -> Result<usize> {
    s.parse().map_err(|_| QError::InvalidParams(format!("expected an index, got '{s}'")))
}

fn arity(name: &str, got: usize, ok: bool, expected: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(QError::InvalidParams(format!("{name} takes {expected}, got {got} arguments")))
    }
}

/// Error split into the two exit codes of `eval`.
#[derive(Debug)]
pub enum EvalError {
    Usage(QError),
    Numeric(QError),
}

/// Evaluates one named function on string arguments.
pub fn eval_function(name: &str, args: &[String], q: Nome, pol: &TruncationPolicy) -> std::result::Result<Scalar, EvalError> {
    use EvalError::*;
    let n = args.len();
    let scalars = |from: usize| -> std::result::Result<Vec<Scalar>, EvalError> {
        args[from..].iter().map(|s| parse_scalar(s)).collect::<Result<_>>().map_err(Usage)
    };
    match name {
        "qpoch" => {
            arity(name, n, n == 1 || n == 2, "a [n]").map_err(Usage)?;
            let a = parse_scalar(&args[0]).map_err(Usage)?;
            if n == 2 {
                Ok(qpoch_fin(a, q, parse_index(&args[1]).map_err(Usage)?))
            } else {
                qpoch_inf(a, q, pol).map_err(Numeric)
            }
        }
        "theta" => {
            arity(name, n, n == 1, "x").map_err(Usage)?;
            theta(parse_scalar(&args[0]).map_err(Usage)?, q, pol).map_err(Numeric)
        }
        "w87" => {
            arity(name, n, n == 7, "a b c d e f z").map_err(Usage)?;
            let v = scalars(0)?;
            w87(v[0], v[1], v[2], v[3], v[4], v[5], v[6], q, pol).map_err(Numeric)
        }
        "kajihara" => {
            arity(name, n, n >= 2, "M N a_1..a_M x_1..x_M s u_1..u_N v_1..v_N z").map_err(Usage)?;
            let m = parse_index(&args[0]).map_err(Usage)?;
            let nn = parse_index(&args[1]).map_err(Usage)?;
            arity(name, n, n == 2 + 2 * m + 2 * nn + 2, "M N a_1..a_M x_1..x_M s u_1..u_N v_1..v_N z").map_err(Usage)?;
            let v = scalars(2)?;
            let (a, rest) = v.split_at(m);
            let (x, rest) = rest.split_at(m);
            let s = rest[0];
            let (u, rest) = rest[1..].split_at(nn);
            let (vv, rest) = rest.split_at(nn);
            let p = KajiharaParams::new(a.to_vec(), x.to_vec(), s, u.to_vec(), vv.to_vec(), rest[0]).map_err(Usage)?;
            kajihara_w(&p, q, pol).map_err(Numeric)
        }
        "phi" => {
            arity(name, n, n >= 10 && n % 2 == 0, "i j a_1..a_{M+3} b_1..b_{M+3}").map_err(Usage)?;
            let (i, j) = (parse_index(&args[0]).map_err(Usage)?, parse_index(&args[1]).map_err(Usage)?);
            let v = scalars(2)?;
            let (a, b) = v.split_at(v.len() / 2);
            let p = RPParams::new(a.to_vec(), b.to_vec(), q).map_err(Usage)?;
            phi(&p, i, j, q, pol).map_err(Numeric)
        }
        "h3phi" => {
            arity(name, n, n == 14, "i j alpha nu h1 h2 h3 l1 l2 l3 t1 t2 t3 x").map_err(Usage)?;
            let (i, j) = (parse_index(&args[0]).map_err(Usage)?, parse_index(&args[1]).map_err(Usage)?);
            let v = scalars(2)?;
            let hp = H3Params::new(v[0], v[1], [v[2], v[3], v[4]], [v[5], v[6], v[7]], [v[8], v[9], v[10]], v[11])
                .map_err(Usage)?;
            h3_phi(&hp, i, j, q, pol).map_err(Numeric)
        }
        "bailey" => {
            arity(name, n, n == 8, "a b c d e f g h").map_err(Usage)?;
            let v = scalars(0)?;
            let p = BaileyParams { a: v[0], b: v[1], c: v[2], d: v[3], e: v[4], f: v[5], g: v[6], h: v[7] };
            p.check().map_err(Usage)?;
            bailey_integral(&p, q, pol).map_err(Numeric)
        }
        other => Err(Usage(QError::InvalidParams(format!(
            "unknown function '{other}' (expected qpoch, theta, w87, kajihara, phi, h3phi, bailey)"
        )))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub function: String,
    pub q: f64,
    pub value: Scalar,
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> i32 {
    let mut pol = TruncationPolicy::default();
    if let Some(t) = args.trunc_tol {
        pol.tol = t;
    }
    if let Some(m) = args.max_terms {
        pol.max_terms = m;
    }
    let setup = pol.validate().and_then(|_| Nome::real(args.q));
    let q = match setup {
        Ok(q) => q,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match eval_function(&args.function, &args.args, q, &pol) {
        Ok(v) => {
            let o = EvalOutput { function: args.function.clone(), q: args.q, value: v };
            let _ = writeln!(out, "{:e} {:e}", v.re, v.im);
            let _ = writeln!(out, "{}", serde_json::to_string(&o).expect("value serializes"));
            EXIT_OK
        }
        Err(EvalError::Usage(e)) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(EvalError::Numeric(e)) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    }
}

pub fn cmd_sample(args: &SampleArgs, out: &mut dyn Write) -> i32 {
    let kind: RelationKind = match args.relation.parse() {
        Ok(k) => k,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let cfg = SampleConfig { seed: args.seed, m: args.m, q: args.q, real_only: !args.complex, ..SampleConfig::default() };
    if let Err(e) = cfg.validate().and_then(|_| kind.effective_m(args.m).map(|_| ())) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    match sample_instance(kind, &cfg, args.trial) {
        Ok(inst) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&inst).expect("instance serializes"));
            EXIT_OK
        }
        Err(e @ QError::InvalidParams(_)) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    }
}

/// Dispatches a parsed command line; returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> i32 {
    match &cli.command {
        Command::Verify(args) => {
            let env_tol = std::env::var(TOL_ENV).ok();
            match RunConfig::resolve(args, env_tol.as_deref()) {
                Ok(cfg) => cmd_verify(&cfg, out),
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_CONFIG
                }
            }
        }
        Command::Eval(args) => cmd_eval(args, out),
        Command::Sample(args) => cmd_sample(args, out),
    }
}
