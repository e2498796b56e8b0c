//! Command-line front end: argument schema, dispatch and report serialization.

pub mod suite;

use crate::iwasawa::{verify_casimir_formula, CasimirVariant};
use crate::ode_expansion::{
    expand_iterated, filter_coefficients, max_abs_difference, ode_residual, residual_scale, solve_ode_explicit,
    solve_ode_numeric, ExpPoly, GeometricTheta, OdeParams,
};
use crate::repn_catalog::{
    branch_k_to_m, casimir_g_series, general_casimir, series_datum, HighestWeight, RationalJson, Scalar, SeriesParam,
};
use crate::spectral_counting::{branching_count_s, log_grid, summability_report, weyl_dimension, SyntheticSpectrum};
use crate::{C64, Q};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for malformed or invalid input.
pub const EXIT_USAGE: i32 = 1;
/// Exit status for a violated internal invariant.
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// A parsed invocation.
#[derive(Debug, Clone, Parser)]
#[command(name = "rank1", version, about = "Casimir, branching, counting and ODE-expansion checks for SO(n,1)")]
pub struct CommandRequest {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Compare the Casimir action with its Iwasawa-coordinate expression.
    VerifyCasimir(VerifyCasimirArgs),
    /// Casimir eigenvalue of a principal, complementary, end-point or discrete series member.
    Spectrum(SpectrumArgs),
    /// Restrict an SO(n) weight to SO(n−1).
    Branch(BranchArgs),
    /// Growth of the branching counting function.
    WeylCount(WeylCountArgs),
    /// Compare the closed-form ODE solution with RK4.
    OdeCheck(OdeCheckArgs),
    /// Iterated expansion with synthetic Θ scalars.
    Expand(ExpandArgs),
    /// Dyadic partial sums of a planted spectrum.
    Summability(SummabilityArgs),
    /// Run every acceptance criterion.
    ReproduceAll,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyCasimirArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesKind {
    Principal,
    Complementary,
    EndPoint,
    Discrete,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum)]
    pub kind: SeriesKind,
    /// `s` (principal, optional for discrete), `ν` (complementary) or `m` (end-point); rational like `3/2`.
    #[arg(long, allow_hyphen_values = true)]
    pub param: Option<String>,
    /// M-type, comma-separated rationals.
    #[arg(long, allow_hyphen_values = true)]
    pub eta: String,
    /// K-Casimir value `ϖ` used for the discriminant.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub varpi: String,
}

#[derive(Debug, Clone, Args)]
pub struct BranchArgs {
    #[arg(long)]
    pub n: usize,
    /// Comma-separated rationals.
    #[arg(long, allow_hyphen_values = true)]
    pub weight: String,
}

#[derive(Debug, Clone, Args)]
pub struct WeylCountArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1e2)]
    pub lo: f64,
    #[arg(long, default_value_t = 1e4)]
    pub hi: f64,
    #[arg(long, default_value_t = 13)]
    pub points: usize,
    #[arg(long, default_value_t = 1)]
    pub mult_bound: u64,
}

#[derive(Debug, Clone, Args)]
pub struct OdeCheckArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "D", allow_hyphen_values = true)]
    pub d: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub y0: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub y0p: f64,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub varpi: String,
    /// Number of random forcing terms drawn from the seed.
    #[arg(long, default_value_t = 0)]
    pub forcing_terms: usize,
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "D", allow_hyphen_values = true)]
    pub d: f64,
    #[arg(long)]
    pub ell: usize,
    /// Θ± = ratio^{|word|}.
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    /// Apply the plus-branch filter with this ν(Γ).
    #[arg(long)]
    pub nu_gamma: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SummabilityArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, default_value_t = 30)]
    pub shells: usize,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invariant {invariant} violated")]
    Invariant { invariant: String, values: Value },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Serialized report text.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub body: String,
}

/// Result of a full invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the request.
pub fn run<I, T>(args: I) -> RunOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let req = match CommandRequest::try_parse_from(args) {
        Ok(r) => r,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                RunOutcome { exit_code: code, stdout: text, stderr: String::new() }
            } else {
                RunOutcome { exit_code: code, stdout: String::new(), stderr: text }
            };
        }
    };
    run_request(&req)
}

/// Runs an already parsed request, writing to `output_path` when set.
pub fn run_request(req: &CommandRequest) -> RunOutcome {
    let (code, body, err) = match execute(req) {
        Ok(r) => (EXIT_OK, r.body, String::new()),
        Err(CliError::Usage(m)) => (EXIT_USAGE, String::new(), format!("error: {m}\n")),
        Err(CliError::Invariant { invariant, values }) => {
            let mut err = format!("invariant violated: {invariant}\n");
            if let Some(lines) = values.get("summary").and_then(Value::as_array) {
                for l in lines.iter().filter_map(Value::as_str) {
                    err.push_str(l);
                    err.push('\n');
                }
            }
            let body = json!({ "invariant": invariant, "values": values }).to_string() + "\n";
            (EXIT_INVARIANT, body, err)
        }
        Err(CliError::Io(e)) => (EXIT_USAGE, String::new(), format!("error: {e}\n")),
    };
    if let Some(path) = &req.output_path {
        if !body.is_empty() {
            if let Err(e) = std::fs::write(path, &body) {
                return RunOutcome { exit_code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {e}\n") };
            }
        }
        return RunOutcome { exit_code: code, stdout: String::new(), stderr: err };
    }
    RunOutcome { exit_code: code, stdout: body, stderr: err }
}

fn parse_q(s: &str) -> Result<Q, CliError> {
    let s = s.trim();
    if let Ok(q) = Q::from_str(s) {
        return Ok(q);
    }
    let v: f64 = s.parse().map_err(|_| usage(format!("cannot parse rational '{s}'")))?;
    Q::approximate_float(v).ok_or_else(|| usage(format!("cannot represent '{s}'")))
}

fn parse_weight(s: &str) -> Result<Vec<Q>, CliError> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(parse_q).collect()
}

fn q_json(q: &Q) -> Value {
    if q.is_integer() {
        json!(*q.numer())
    } else {
        serde_json::to_value(RationalJson { num: *q.numer(), den: *q.denom() }).expect("plain struct")
    }
}

fn scalar_json(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(q) => q_json(q),
        Scalar::Real(v) => json!(v),
    }
}

fn to_json<T: Serialize>(v: &T) -> Rendered {
    Rendered { body: serde_json::to_string(v).expect("serializable report") + "\n" }
}

fn to_csv<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Rendered, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(usage)?;
    }
    let bytes = w.into_inner().map_err(|e| usage(e.into_error()))?;
    Ok(Rendered { body: String::from_utf8(bytes).expect("csv output is UTF-8") })
}

fn render<T: Serialize, R: Serialize>(
    fmt: OutputFormat,
    report: &T,
    rows: impl FnOnce() -> Vec<R>,
) -> Result<Rendered, CliError> {
    match fmt {
        OutputFormat::Json => Ok(to_json(report)),
        OutputFormat::Csv => to_csv(rows()),
    }
}

fn execute(req: &CommandRequest) -> Result<Rendered, CliError> {
    let fmt = req.format;
    match &req.command {
        Command::VerifyCasimir(a) => verify_casimir_cmd(a, req.seed, fmt),
        Command::Spectrum(a) => spectrum_cmd(a, fmt),
        Command::Branch(a) => branch_cmd(a, fmt),
        Command::WeylCount(a) => weyl_count_cmd(a, fmt),
        Command::OdeCheck(a) => ode_check_cmd(a, req.seed, fmt),
        Command::Expand(a) => expand_cmd(a, fmt),
        Command::Summability(a) => summability_cmd(a, fmt),
        Command::ReproduceAll => reproduce_all_cmd(req.seed, fmt),
    }
}

fn verify_casimir_cmd(a: &VerifyCasimirArgs, seed: u64, fmt: OutputFormat) -> Result<Rendered, CliError> {
    let report = verify_casimir_formula(a.trials, a.n, seed).map_err(usage)?;
    if let Some(v) = report.variants.iter().find(|v| v.variant == CasimirVariant::MixedExpT) {
        if !v.matches {
            return Err(CliError::Invariant {
                invariant: "casimir_within_tolerance".into(),
                values: json!({ "n": a.n, "max_rel_err": v.max_rel_err, "tolerance": crate::iwasawa::CASIMIR_TOL }),
            });
        }
    }
    #[derive(Serialize)]
    struct Row {
        variant: &'static str,
        trials: usize,
        max_rel_err: f64,
        mean_rel_err: f64,
        matches: bool,
    }
    render(fmt, &report, || {
        report
            .variants
            .iter()
            .map(|v| Row {
                variant: v.variant.name(),
                trials: v.trials,
                max_rel_err: v.max_rel_err,
                mean_rel_err: v.mean_rel_err,
                matches: v.matches,
            })
            .collect()
    })
}

fn spectrum_cmd(a: &SpectrumArgs, fmt: OutputFormat) -> Result<Rendered, CliError> {
    let eta = HighestWeight::new(parse_weight(&a.eta)?, a.n.saturating_sub(1)).map_err(usage)?;
    let param = a.param.as_deref().map(parse_q).transpose()?;
    let need = |p: Option<Q>| p.ok_or_else(|| usage("--param is required for this series"));
    let series = match a.kind {
        SeriesKind::Principal => SeriesParam::Principal { s: Scalar::Exact(need(param)?), eta },
        SeriesKind::Complementary => SeriesParam::Complementary { nu: Scalar::Exact(need(param)?), eta },
        SeriesKind::EndPoint => {
            let m = need(param)?;
            if !m.is_integer() {
                return Err(usage("end-point m must be an integer"));
            }
            SeriesParam::EndPoint { m: m.to_integer(), eta }
        }
        SeriesKind::Discrete => SeriesParam::Discrete { s: param, eta },
    };
    let eigen = casimir_g_series(&series, a.n).map_err(usage)?;
    let varpi_hat = crate::repn_catalog::casimir_m(series.eta(), a.n).map_err(usage)?;
    let general = general_casimir(series.nu_squared(a.n), varpi_hat, a.n);
    let datum = series_datum(&series, parse_q(&a.varpi)?, a.n).map_err(usage)?;
    let agrees = match (eigen.exact(), general.exact()) {
        (Some(x), Some(y)) => x == y,
        _ => (eigen.to_f64() - general.to_f64()).abs() <= 1e-12 * (1.0 + eigen.to_f64().abs()),
    };
    let out = json!({
        "n": a.n,
        "kind": series.kind(),
        "casimir": scalar_json(&eigen),
        "general_formula": scalar_json(&general),
        "agrees": agrees,
        "datum": datum,
    });
    if !agrees {
        return Err(CliError::Invariant { invariant: "series_matches_general_casimir".into(), values: out });
    }
    #[derive(Serialize)]
    struct Row {
        n: usize,
        kind: &'static str,
        casimir: f64,
        general_formula: f64,
        d: f64,
    }
    render(fmt, &out, || {
        vec![Row {
            n: a.n,
            kind: series.kind(),
            casimir: eigen.to_f64(),
            general_formula: general.to_f64(),
            d: datum.d_f64(),
        }]
    })
}

fn branch_cmd(a: &BranchArgs, fmt: OutputFormat) -> Result<Rendered, CliError> {
    let tau = HighestWeight::new(parse_weight(&a.weight)?, a.n).map_err(usage)?;
    let mut etas = branch_k_to_m(&tau, a.n).map_err(usage)?;
    etas.sort();
    let dim = weyl_dimension(&tau).map_err(usage)?;
    let sum: u64 = etas.iter().map(weyl_dimension).collect::<Result<Vec<_>, _>>().map_err(usage)?.iter().sum();
    let rows: Vec<Value> = etas.iter().map(|e| Value::Array(e.coords().iter().map(q_json).collect())).collect();
    if dim != sum {
        return Err(CliError::Invariant {
            invariant: "branching_dimension_sum".into(),
            values: json!({ "dim_tau": dim, "sum_dim_eta": sum, "branches": rows }),
        });
    }
    match fmt {
        OutputFormat::Json => Ok(to_json(&rows)),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let width = (a.n - 1) / 2;
            w.write_record((1..=width).map(|i| format!("eta{i}"))).map_err(usage)?;
            for e in &etas {
                w.write_record(e.coords().iter().map(|q| q.to_string())).map_err(usage)?;
            }
            let bytes = w.into_inner().map_err(|e| usage(e.into_error()))?;
            Ok(Rendered { body: String::from_utf8(bytes).expect("csv output is UTF-8") })
        }
    }
}

fn weyl_count_cmd(a: &WeylCountArgs, fmt: OutputFormat) -> Result<Rendered, CliError> {
    let grid = log_grid(a.lo, a.hi, a.points);
    let report = branching_count_s(a.n, &grid, a.mult_bound).map_err(usage)?;
    #[derive(Serialize)]
    #[allow(non_snake_case)]
    struct Row {
        W: f64,
        S: u64,
        fit: Option<f64>,
    }
    render(fmt, &report, || {
        report
            .thresholds
            .iter()
            .zip(&report.counts)
            .map(|(&w, &s)| Row { W: w, S: s, fit: report.fitted_exponent })
            .collect()
    })
}

/// Random exponential-polynomial forcing with `terms` terms.
pub fn random_forcing(terms: usize, rng: &mut impl rand::Rng) -> ExpPoly {
    ExpPoly::from_terms((0..terms).map(|_| crate::ode_expansion::ExpPolyTerm {
        coeff: C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        tpow: rng.gen_range(0..2),
        exponent: C64::new(rng.gen_range(-2.0..0.0), rng.gen_range(-2.0..2.0)),
    }))
}

/// Explicit-versus-RK4 comparison.
#[derive(Debug, Clone, Serialize)]
pub struct OdeCheckReport {
    pub params: OdeParams,
    pub forcing_terms: usize,
    pub steps: usize,
    pub t_end: f64,
    pub max_abs_diff: f64,
    pub residual_max_coeff: f64,
    pub residual_scale: f64,
}

/// Largest admissible `|explicit − RK4|`.
pub const ODE_ORACLE_TOL: f64 = 1e-6;
/// Largest admissible residual coefficient relative to the residual scale.
pub const ODE_RESIDUAL_TOL: f64 = 1e-12;

/// Solves both ways and measures the gap.
pub fn ode_check(params: &OdeParams, forcing: &ExpPoly, steps: usize, t_end: f64) -> Result<OdeCheckReport, CliError> {
    let y = solve_ode_explicit(params, forcing).map_err(usage)?;
    let rk = solve_ode_numeric(params, |t| forcing.eval(t), t_end, steps).map_err(usage)?;
    let res = ode_residual(params, &y, forcing);
    Ok(OdeCheckReport {
        params: params.clone(),
        forcing_terms: forcing.len(),
        steps,
        t_end,
        max_abs_diff: max_abs_difference(&y, &rk),
        residual_max_coeff: res.max_abs_coeff(),
        residual_scale: residual_scale(params, &y, forcing),
    })
}

impl OdeCheckReport {
    pub fn passes(&self) -> bool {
        self.max_abs_diff <= ODE_ORACLE_TOL && self.residual_max_coeff <= ODE_RESIDUAL_TOL * self.residual_scale
    }
}

fn ode_check_cmd(a: &OdeCheckArgs, seed: u64, fmt: OutputFormat) -> Result<Rendered, CliError> {
    let params = OdeParams::from_discriminant(a.n, a.d, parse_q(&a.varpi)?, C64::new(a.y0, 0.0), C64::new(a.y0p, 0.0))
        .map_err(usage)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forcing = random_forcing(a.forcing_terms, &mut rng);
    let report = ode_check(&params, &forcing, a.steps, a.t_end)?;
    if !report.passes() {
        return Err(CliError::Invariant {
            invariant: "ode_explicit_matches_rk4".into(),
            values: serde_json::to_value(&report).expect("plain report"),
        });
    }
    render(fmt, &report, || {
        vec![CsvOde {
            n: report.params.n,
            d: report.params.d,
            max_abs_diff: report.max_abs_diff,
            residual_max_coeff: report.residual_max_coeff,
        }]
    })
}

#[derive(Serialize)]
struct CsvOde {
    n: usize,
    d: f64,
    max_abs_diff: f64,
    residual_max_coeff: f64,
}

/// Largest admissible relative residual of the expansion identity.
pub const EXPANSION_IDENTITY_TOL: f64 = 1e-8;

fn expand_cmd(a: &ExpandArgs, fmt: OutputFormat) -> Result<Rendered, CliError> {
    let params = OdeParams::from_discriminant(a.n, a.d, Q::from_integer(0), C64::new(1.0, 0.0), C64::new(0.0, 0.0))
        .map_err(usage)?;
    let theta = GeometricTheta { ratio: a.ratio, ..GeometricTheta::halving() };
    let mut report = expand_iterated(&params, &theta, a.ell).map_err(|e| match e {
        crate::ode_expansion::OdeError::Internal(m) => {
            CliError::Invariant { invariant: "no_divergence_before_switch".into(), values: json!({ "detail": m }) }
        }
        e => usage(e),
    })?;
    if let Some(nu) = a.nu_gamma {
        report = filter_coefficients(&report, nu, &params).map_err(usage)?;
    }
    if report.identity_residual > EXPANSION_IDENTITY_TOL {
        return Err(CliError::Invariant {
            invariant: "expansion_identity".into(),
            values: json!({ "identity_residual": report.identity_residual, "tolerance": EXPANSION_IDENTITY_TOL }),
        });
    }
    if params.d < 0.0 && report.max_complex_divisor >= 1.0 {
        return Err(CliError::Invariant {
            invariant: "complex_divisor_bound".into(),
            values: json!({ "max_complex_divisor": report.max_complex_divisor }),
        });
    }
    match fmt {
        OutputFormat::Json => Ok(to_json(&report)),
        OutputFormat::Csv => Ok(Rendered { body: report.remainder_csv().map_err(usage)? }),
    }
}

fn summability_cmd(a: &SummabilityArgs, fmt: OutputFormat) -> Result<Rendered, CliError> {
    if !(a.alpha > 0.0 && a.alpha * a.shells as f64 <= 63.0) {
        return Err(usage("need α > 0 and α·shells ≤ 63 for exact u64 multiplicities"));
    }
    let spec = SyntheticSpectrum::planted(a.alpha, a.shells as u32);
    let report = summability_report(&spec, a.s, a.shells).map_err(usage)?;
    #[derive(Serialize)]
    struct Row {
        shell: usize,
        partial_sum: f64,
    }
    render(fmt, &report, || {
        report.partial_sums.iter().enumerate().map(|(shell, &partial_sum)| Row { shell, partial_sum }).collect()
    })
}

fn reproduce_all_cmd(seed: u64, fmt: OutputFormat) -> Result<Rendered, CliError> {
    let outcomes = suite::run_all(seed);
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if !failed.is_empty() {
        return Err(CliError::Invariant {
            invariant: "acceptance_suite".into(),
            values: json!({
                "failed": failed,
                "summary": outcomes.iter().map(suite::CriterionOutcome::line).collect::<Vec<_>>(),
                "outcomes": outcomes,
            }),
        });
    }
    render(fmt, &outcomes, || outcomes.clone())
}
