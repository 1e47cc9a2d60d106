//! Command-line front end.
//!
//! Exit codes: 0 pass or certified, 1 analysis completed with a negative
//! verdict, 2 usage or input error, 3 numerical failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::colehopf::{self, BurgersFamily, ColeHopfError, HietarintaParams, Verdict};
use crate::entropy::{seed_check, Backend, EntropyError, GrowthClass};
use crate::equation::{EquationError, QuadEquation};
use crate::expr::EquationFile;
use crate::lattice::{Grid, InitialData, Provenance};
use crate::linearize::{check_conditions, detect_affine_linear, LinearizeError, DEFAULT_SAMPLES};
use crate::report::{emit_report, float_value, Format, Report, ReportError};
use crate::transform::{certify, CertifyOptions, TransformError};

pub const SEED_ENV: &str = "QUADLIN_SEED";
const DEFAULT_SEED: u64 = 1;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "quadlin", version, about = "Linearizability analysis for quad-graph lattice equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the necessary linearizability conditions and detect affine equations.
    Check(Common),
    /// Build and certify the linearizing point transformation.
    Transform {
        #[command(flatten)]
        common: Common,
        /// Fit even when the necessary conditions fail.
        #[arg(long)]
        force: bool,
    },
    /// Certify, then compare nonlinear and linear evolution in transformed variables.
    Roundtrip(Common),
    /// Degree growth of exact iterates.
    Entropy {
        #[command(flatten)]
        common: Common,
        /// Arbitrary-precision integer coefficients instead of the prime field.
        #[arg(long)]
        exact: bool,
    },
    /// Check a member of the Burgers family on a generated or supplied grid.
    Colehopf(ColeHopfArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Equation file (JSON with "rhs", "params", "sample_box").
    #[arg(long, value_name = "PATH")]
    eq: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override, e.g. `conditions=1e-8`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Grid size as `NxM`.
    #[arg(long, value_name = "NxM")]
    grid: Option<String>,
    #[arg(long, value_name = "K", default_value_t = 8)]
    depth: usize,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyName {
    G8,
    G23,
    Canonical,
    Rosa,
}

#[derive(Args, Debug)]
struct ColeHopfArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "g8")]
    family: FamilyName,
    /// Parameter of the classical equation.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    p: f64,
    /// `k0,k1,k2` for the generalized family.
    #[arg(long, value_name = "K0,K1,K2", allow_negative_numbers = true)]
    kappa: Option<String>,
    /// `e1,e2,o1,o2` of the Hietarinta equation.
    #[arg(long, value_name = "E1,E2,O1,O2", default_value = "2,0,3,1", allow_negative_numbers = true)]
    rosa: String,
    /// Gauge `kappa0` of the Möbius map.
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    kappa0: f64,
    /// Grid JSON to check instead of a generated solution.
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
}

/// Tolerances by name, with defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances(BTreeMap<&'static str, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances(BTreeMap::from([
            ("affine", crate::linearize::AFFINE_TOL),
            ("certify", crate::transform::CERTIFY_TOL),
            ("conditions", crate::linearize::DEFAULT_TOL),
            ("quadrature", crate::transform::QUADRATURE_TOL),
            ("residual", 1e-10),
            ("roundtrip", 1e-6),
        ]))
    }
}

impl Tolerances {
    /// Apply `NAME=VALUE` overrides; unknown names and non-positive values are rejected.
    pub fn with_overrides(overrides: &[String]) -> Result<Self, String> {
        let mut t = Tolerances::default();
        for item in overrides {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| format!("tolerance `{item}` is not NAME=VALUE"))?;
            let key = *t
                .0
                .keys()
                .find(|k| **k == name)
                .ok_or_else(|| format!("unknown tolerance `{name}`"))?;
            let v: f64 = value.parse().map_err(|_| format!("tolerance `{name}` has invalid value `{value}`"))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("tolerance `{name}` must be strictly positive"));
            }
            t.0.insert(key, v);
        }
        Ok(t)
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    fn to_json(&self) -> Value {
        Value::Object(self.0.iter().map(|(k, v)| (k.to_string(), float_value(*v))).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Check,
    Transform,
    Roundtrip,
    Entropy,
    Colehopf,
}

impl CommandKind {
    fn name(self) -> &'static str {
        match self {
            CommandKind::Check => "check",
            CommandKind::Transform => "transform",
            CommandKind::Roundtrip => "roundtrip",
            CommandKind::Entropy => "entropy",
            CommandKind::Colehopf => "colehopf",
        }
    }
}

/// Validated settings of one invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: CommandKind,
    pub equation_path: Option<PathBuf>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub grid: Option<(usize, usize)>,
    pub depth: usize,
}

/// Failure with its exit code and a diagnostic for the error stream.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure { code: EXIT_USAGE, message: message.to_string() }
}

fn numerical(message: impl ToString) -> Failure {
    Failure { code: EXIT_NUMERICAL, message: message.to_string() }
}

fn parse_grid(text: &str) -> Result<(usize, usize), Failure> {
    let (n, m) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| usage(format!("grid `{text}` is not NxM")))?;
    let parse = |s: &str| s.trim().parse::<usize>().ok().filter(|v| *v > 0);
    match (parse(n), parse(m)) {
        (Some(n), Some(m)) => Ok((n, m)),
        _ => Err(usage(format!("grid `{text}` needs positive integers"))),
    }
}

fn parse_list(text: &str, len: usize, what: &str) -> Result<Vec<f64>, Failure> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("{what} `{text}` is not a comma-separated list of numbers")))?;
    if values.len() != len {
        return Err(usage(format!("{what} needs {len} values, got {}", values.len())));
    }
    Ok(values)
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

impl RunConfig {
    fn from_common(command: CommandKind, c: &Common) -> Result<Self, Failure> {
        Ok(RunConfig {
            command,
            equation_path: c.eq.clone(),
            seed: resolve_seed(c.seed)?,
            tolerances: Tolerances::with_overrides(&c.tol).map_err(usage)?,
            output: c.out.clone(),
            format: c.format.parse().map_err(|e: ReportError| usage(e))?,
            grid: c.grid.as_deref().map(parse_grid).transpose()?,
            depth: c.depth,
        })
    }

    fn load_equation(&self) -> Result<QuadEquation, Failure> {
        let path = self.equation_path.as_ref().ok_or_else(|| usage("--eq PATH is required"))?;
        let file = EquationFile::load(path).map_err(usage)?;
        QuadEquation::from_file(&file).map_err(|e| match e {
            EquationError::NotEvaluable { .. } => numerical(e),
            other => usage(other),
        })
    }

    fn header(&self) -> Value {
        json!({
            "tool": "quadlin",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command.name(),
            "seed": self.seed,
            "tolerances": self.tolerances.to_json(),
        })
    }
}

/// Header fields followed by the command's own report.
struct Output {
    header: Value,
    body: Value,
    csv: Option<String>,
}

impl Report for Output {
    fn to_json(&self) -> Value {
        let mut out = self.header.clone();
        if let (Value::Object(out), Value::Object(body)) = (&mut out, &self.body) {
            for (k, v) in body {
                out.insert(k.clone(), v.clone());
            }
        }
        out
    }

    fn to_csv(&self) -> Option<String> {
        self.csv.clone()
    }
}

fn linearize_failure(e: LinearizeError) -> Failure {
    match e {
        LinearizeError::TooFewSamples(_) => usage(e),
        _ => numerical(e),
    }
}

fn transform_failure(e: TransformError) -> Failure {
    match e {
        TransformError::Linearize(inner) => linearize_failure(inner),
        TransformError::InvalidKnots(_) | TransformError::InvalidDomain { .. } => usage(e),
        other => numerical(other),
    }
}

fn colehopf_failure(e: ColeHopfError) -> Failure {
    match e {
        ColeHopfError::DegenerateParams(_) | ColeHopfError::InvalidFamily(_) | ColeHopfError::Lattice(_) => usage(e),
        other => numerical(other),
    }
}

fn run_check(cfg: &RunConfig) -> Result<(Output, bool), Failure> {
    let eq = cfg.load_equation()?;
    let report = check_conditions(&eq, DEFAULT_SAMPLES, cfg.seed, cfg.tolerances.get("conditions"))
        .map_err(linearize_failure)?;
    let affine = detect_affine_linear(&eq, cfg.tolerances.get("affine")).map_err(linearize_failure)?;
    let mut body = report.to_json();
    body["affine"] = affine.to_json();
    Ok((Output { header: cfg.header(), body, csv: None }, report.passed))
}

fn run_transform(cfg: &RunConfig, force: bool, roundtrip: Option<(usize, usize)>) -> Result<(Output, bool), Failure> {
    let eq = cfg.load_equation()?;
    let options = CertifyOptions {
        conditions_tol: cfg.tolerances.get("conditions"),
        certify_tol: cfg.tolerances.get("certify"),
        quadrature_tol: cfg.tolerances.get("quadrature"),
        roundtrip,
        force,
        ..CertifyOptions::default()
    };
    let result = certify(&eq, cfg.seed, &options).map_err(transform_failure)?;
    let mut body = result.to_json();
    let mut passed = result.certified();
    if roundtrip.is_some() {
        let ok = result.roundtrip.is_some_and(|d| d <= cfg.tolerances.get("roundtrip"));
        body["roundtrip_passed"] = json!(ok);
        passed &= ok;
    }
    Ok((Output { header: cfg.header(), body, csv: None }, passed))
}

/// Seeds compared by the entropy command, starting at the configured one.
const ENTROPY_SEEDS: u64 = 3;

fn run_entropy(cfg: &RunConfig, exact: bool) -> Result<(Output, bool), Failure> {
    let eq = cfg.load_equation()?;
    let backend = if exact { Backend::Exact } else { Backend::PrimeField };
    let seeds: Vec<u64> = (0..ENTROPY_SEEDS).map(|i| cfg.seed.wrapping_add(i)).collect();
    let check = seed_check(&eq, cfg.depth, &seeds, backend).map_err(|e| match e {
        EntropyError::DegenerateTrajectory => numerical(e),
        other => usage(other),
    })?;
    let seq = &check.sequences[0];
    let mut body = seq.to_json();
    body["seed_stable"] = json!(check.stable);
    body["check_seeds"] = json!(seeds);
    let passed = matches!(seq.growth.class, GrowthClass::Constant | GrowthClass::Linear);
    Ok((Output { header: cfg.header(), body, csv: seq.to_csv() }, passed))
}

fn read_grid(path: &PathBuf) -> Result<Grid, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            usage(format!("file not found: {}", path.display()))
        } else {
            usage(format!("cannot read {}: {e}", path.display()))
        }
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|e| usage(format!("malformed grid file: {e}")))?;
    let rows = value["values"].as_array().ok_or_else(|| usage("grid file needs a \"values\" array of rows"))?;
    let width = rows.first().and_then(Value::as_array).map_or(0, Vec::len);
    if rows.len() < 2 || width < 2 {
        return Err(usage("grid must be at least 2x2"));
    }
    let mut grid = Grid::empty(width - 1, rows.len() - 1);
    for (m, row) in rows.iter().enumerate() {
        let row = row.as_array().filter(|r| r.len() == width).ok_or_else(|| usage("grid rows must have equal length"))?;
        for (n, v) in row.iter().enumerate() {
            let v = v.as_f64().ok_or_else(|| usage(format!("cell ({n}, {m}) is not a number")))?;
            grid.set(n, m, v, Provenance::Initial);
        }
    }
    Ok(grid)
}

fn run_colehopf(cfg: &RunConfig, args: &ColeHopfArgs) -> Result<(Output, bool), Failure> {
    let (n, m) = cfg.grid.unwrap_or((20, 20));
    let tol = cfg.tolerances.get("residual");
    let input = args.input.as_ref().map(read_grid).transpose()?;
    let family_for = |kappa: &Option<String>| -> Result<BurgersFamily, Failure> {
        match kappa {
            Some(text) => {
                let k = parse_list(text, 3, "--kappa")?;
                BurgersFamily::new(k[0], k[1], k[2]).map_err(colehopf_failure)
            }
            None => Ok(BurgersFamily::classical(args.p)),
        }
    };
    let mut extra = json!({});
    let (name, residual, grid) = match args.family {
        FamilyName::G8 => {
            let u = match input {
                Some(g) => g,
                None => colehopf::burgers_solution(args.p, n, m, cfg.seed).map_err(colehopf_failure)?.1,
            };
            extra["p"] = float_value(args.p);
            ("g8", colehopf::verify_g8(&u, args.p).map_err(colehopf_failure)?, u)
        }
        FamilyName::G23 => {
            let family = family_for(&args.kappa)?;
            let u = match input {
                Some(g) => g,
                None => colehopf::family_solution(&family, n, m, cfg.seed).map_err(colehopf_failure)?,
            };
            extra["kappa"] = json!([float_value(family.kappa0), float_value(family.kappa1), float_value(family.kappa2)]);
            let r = colehopf::verify_burgers(&u, &family).map_err(colehopf_failure)?;
            let v = colehopf::verify_potential_compatibility(&u, &family, 1.0).map_err(colehopf_failure)?;
            extra["potential_mismatch"] = float_value(v);
            ("g23", r, u)
        }
        FamilyName::Canonical => {
            let u = match input {
                Some(g) => g,
                None => colehopf::canonical_solution(n, m, cfg.seed).map_err(colehopf_failure)?,
            };
            ("canonical", colehopf::verify_canonical_form(&u).map_err(colehopf_failure)?, u)
        }
        FamilyName::Rosa => {
            let r = parse_list(&args.rosa, 4, "--rosa")?;
            let params = HietarintaParams::new(r[0], r[1], r[2], r[3]).map_err(colehopf_failure)?;
            let ut = match input {
                Some(g) => g,
                None => {
                    let init = Grid::random_staircase(n, m, cfg.seed, InitialData::LogUniform { lo: 0.5, hi: 2.0 })
                        .map_err(usage)?;
                    params.evolve(&init).map_err(colehopf_failure)?
                }
            };
            let rosa = params.residual(&ut).map_err(colehopf_failure)?;
            let (u, family) = colehopf::hietarinta_transform(&params, args.kappa0, &ut).map_err(colehopf_failure)?;
            let g23 = colehopf::verify_burgers(&u, &family).map_err(colehopf_failure)?;
            extra["cross_ratio"] = float_value(params.cross_ratio());
            extra["kappa"] = json!([float_value(family.kappa0), float_value(family.kappa1), float_value(family.kappa2)]);
            extra["rosa_residual"] = float_value(rosa);
            extra["g23_residual"] = float_value(g23);
            ("rosa", rosa.max(g23), ut)
        }
    };
    let verdict = Verdict { family: name, max_residual: residual, tol };
    let mut body = verdict.to_json();
    if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
        b.extend(e);
    }
    Ok((Output { header: cfg.header(), body, csv: Some(grid.to_csv()) }, verdict.passed()))
}

fn dispatch(cli: Cli) -> Result<(RunConfig, Output, bool), Failure> {
    let (cfg, result) = match &cli.command {
        Command::Check(c) => {
            let cfg = RunConfig::from_common(CommandKind::Check, c)?;
            let r = run_check(&cfg);
            (cfg, r)
        }
        Command::Transform { common, force } => {
            let cfg = RunConfig::from_common(CommandKind::Transform, common)?;
            let r = run_transform(&cfg, *force, cfg.grid);
            (cfg, r)
        }
        Command::Roundtrip(c) => {
            let cfg = RunConfig::from_common(CommandKind::Roundtrip, c)?;
            let r = run_transform(&cfg, false, Some(cfg.grid.unwrap_or((30, 30))));
            (cfg, r)
        }
        Command::Entropy { common, exact } => {
            let cfg = RunConfig::from_common(CommandKind::Entropy, common)?;
            let r = run_entropy(&cfg, *exact);
            (cfg, r)
        }
        Command::Colehopf(args) => {
            let cfg = RunConfig::from_common(CommandKind::Colehopf, &args.common)?;
            let r = run_colehopf(&cfg, args);
            (cfg, r)
        }
    };
    let (output, passed) = result?;
    Ok((cfg, output, passed))
}

/// Run one invocation; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let (cfg, output, passed) = match dispatch(cli) {
        Ok(v) => v,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            return f.code;
        }
    };
    let bytes = match emit_report(&output, cfg.format) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_USAGE;
    }
    if passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
