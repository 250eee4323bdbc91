//! Command-line front end. [`run`] does all the work and returns what would
//! be printed together with the exit code, so tests can drive it in-process.
//!
//! Exit codes: 0 ok, 2 parse error, 3 invariant violation, 4 ambiguous
//! numerical verdict, 5 convergence failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use psdpencil::oracle::{plant_instance, scan_interval, PlantKind};
use psdpencil::{
    check_kkt, format_real, is_sdc, psd_interval, solve, Error, GtrsInstance, SolveOptions,
    SymMatrix, Tolerances,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub mod document;
pub mod schema;

use document::{InstanceDocument, PairDocument, ReferenceDocument, SolutionDocument};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_AMBIGUOUS: i32 = 4;
pub const EXIT_CONVERGENCE: i32 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "psdpencil",
    version,
    about = "PSD intervals of symmetric pencils A + μB and a generalized trust-region solver"
)]
struct Cli {
    /// Emit a single JSON document instead of `key = value` lines.
    #[arg(long, global = true)]
    json: bool,
    /// Base tolerance for rank, PSD and clustering decisions.
    #[arg(long, global = true, default_value = "1e-9")]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// PSD interval of A + μB for a pair (or instance) file.
    Interval { path: PathBuf },
    /// Simultaneous diagonalizability by congruence.
    Sdc { path: PathBuf },
    /// Solve min xᵀAx + 2aᵀx s.t. xᵀBx + 2bᵀx + c ≤ 0.
    Solve {
        path: PathBuf,
        /// Relative bracket width that ends the multiplier bisection.
        #[arg(long, default_value = "1e-10")]
        tol_mu: f64,
        /// Accept a multiplier once |φ(μ)| is below this, relative to the data.
        #[arg(long, default_value = "1e-9")]
        tol_g: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
    },
    /// Check the optimality conditions of a candidate (x, μ).
    Verify {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Generate a planted instance with a known solution.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// interior_mu, boundary_mu, singleton_mu, reducible_singular or unbounded.
        #[arg(long, default_value = "interior_mu")]
        kind: String,
        /// Instance path; the reference goes to `<stem>.ref.json` next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// λ_min(A + μB) on an equispaced grid.
    Scan {
        path: PathBuf,
        #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
    },
}

/// Error with its exit-code class.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn parse(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    fn invariant(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVARIANT,
            message: message.into(),
        }
    }

    fn class(&self) -> &'static str {
        match self.code {
            EXIT_PARSE => "parse",
            EXIT_INVARIANT => "invariant",
            EXIT_AMBIGUOUS => "ambiguous",
            _ => "convergence",
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_)
            | Error::DimensionMismatch { .. }
            | Error::ContractViolation(_) => EXIT_INVARIANT,
            Error::Ambiguous { .. } => EXIT_AMBIGUOUS,
            Error::Convergence { .. } | Error::Numerical(_) => EXIT_CONVERGENCE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// What a command produced: `key = value` lines or a JSON value.
enum Report {
    Text(Vec<(String, String)>),
    Json(serde_json::Value),
    /// A complete report that still ends in a nonzero exit.
    Failed(Box<Report>, CliError),
}

impl Report {
    fn render(self) -> String {
        match self {
            Report::Text(lines) => lines.into_iter().fold(String::new(), |mut s, (k, v)| {
                let _ = writeln!(s, "{k} = {v}");
                s
            }),
            Report::Json(v) => {
                let mut s = serde_json::to_string_pretty(&v).expect("serializable");
                s.push('\n');
                s
            }
            Report::Failed(r, _) => r.render(),
        }
    }
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let json = args.iter().any(|a| a == "--json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliOutput {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => {
                    let text = text.trim_end();
                    failure(
                        json,
                        CliError::parse(text.strip_prefix("error: ").unwrap_or(text)),
                    )
                }
            };
        }
    };
    match dispatch(&cli) {
        Ok(Report::Failed(report, e)) => CliOutput {
            code: e.code,
            stdout: report.render(),
            stderr: format!("error: {}\n", e.message),
        },
        Ok(report) => CliOutput {
            code: EXIT_OK,
            stdout: report.render(),
            stderr: String::new(),
        },
        Err(e) => failure(cli.json, e),
    }
}

fn failure(json: bool, e: CliError) -> CliOutput {
    let stdout = if json {
        Report::Json(json!({
            "error": { "code": e.code, "class": e.class(), "message": e.message }
        }))
        .render()
    } else {
        String::new()
    };
    CliOutput {
        code: e.code,
        stdout,
        stderr: format!("error: {}\n", e.message),
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(CliError::invariant(format!(
            "{name} must lie in (0, 1), got {v}"
        )))
    }
}

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    let tol = Tolerances::from_base(positive("--tol", cli.tol)?);
    match &cli.command {
        Command::Interval { path } => cmd_interval(path, &tol, cli.json),
        Command::Sdc { path } => cmd_sdc(path, &tol, cli.json),
        Command::Solve {
            path,
            tol_mu,
            tol_g,
            max_iter,
        } => {
            if *max_iter == 0 {
                return Err(CliError::invariant("--max-iter must be at least 1"));
            }
            let opts = SolveOptions {
                tol,
                tol_mu: positive("--tol-mu", *tol_mu)?,
                tol_g: positive("--tol-g", *tol_g)?,
                max_iter: *max_iter,
                ..SolveOptions::default()
            };
            cmd_solve(path, &opts, cli.json)
        }
        Command::Verify { instance, solution } => cmd_verify(instance, solution, cli.json),
        Command::Gen { seed, n, kind, out } => cmd_gen(*seed, *n, kind, out.as_deref(), cli.json),
        Command::Scan {
            path,
            lo,
            hi,
            steps,
        } => cmd_scan(path, *lo, *hi, *steps, cli.tol, cli.json),
    }
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

/// The serde (snake_case) name of a unit enum value.
fn name<T: Serialize>(v: &T) -> String {
    match to_json(v) {
        serde_json::Value::String(s) => s,
        other => other.to_string(),
    }
}

fn real(x: f64) -> String {
    format_real(x)
}

fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| real(x)).collect();
    format!("[{}]", parts.join(", "))
}

fn matrix(rows: &[Vec<f64>]) -> String {
    let parts: Vec<String> = rows.iter().map(|r| vector(r)).collect();
    format!("[{}]", parts.join(", "))
}

fn line(k: &str, v: impl Into<String>) -> (String, String) {
    (k.to_string(), v.into())
}

fn read_pair(path: &Path) -> Result<(SymMatrix, SymMatrix), CliError> {
    let doc: PairDocument = document::read(path)?;
    doc.matrices()
}

fn read_instance(path: &Path) -> Result<GtrsInstance, CliError> {
    let doc: InstanceDocument = document::read(path)?;
    doc.instance()
}

fn cmd_interval(path: &Path, tol: &Tolerances, json: bool) -> Result<Report, CliError> {
    let (a, b) = read_pair(path)?;
    let r = psd_interval(&a, &b, tol)?;
    if json {
        return Ok(Report::Json(to_json(&r)));
    }
    let mut out = vec![
        line("I_psd", r.interval.to_string()),
        line("kind", name(&r.interval.kind)),
        line("path", r.path.to_string()),
    ];
    if let Some(v) = &r.sdc {
        out.push(line("sdc", name(v)));
    }
    out.push(line("I_pd", r.pd_interval.to_string()));
    out.push(line("pd_scope", name(&r.pd_interval.scope)));
    if let Some(o) = &r.obstruction {
        out.push(line("obstruction", obstruction(o)));
    }
    for blk in r.block_classification.iter().flatten() {
        out.push(line(
            "block",
            format!(
                "lambda {}, multiplicity {}, {}",
                real(blk.lambda),
                blk.multiplicity,
                name(&blk.inertia)
            ),
        ));
    }
    if let Some(rp) = &r.reduced_pair {
        out.push(line("coupling_norm", real(rp.coupling_norm)));
    }
    for c in &r.candidates {
        out.push(line(
            "candidate",
            format!(
                "mu {}, {}, psd {}",
                real(c.mu),
                name(&c.source),
                name(&c.verdict)
            ),
        ));
    }
    for n in &r.notes {
        out.push(line("note", n.to_string()));
    }
    Ok(Report::Text(out))
}

fn obstruction(o: &psdpencil::Obstruction) -> String {
    use psdpencil::Obstruction::*;
    match o {
        ComplexEigenvalue { re, im } => {
            format!("complex_eigenvalue {} ± {}i", real(*re), real(*im))
        }
        DefectiveRealEigenvalue {
            value,
            algebraic,
            geometric,
        } => format!(
            "defective_real_eigenvalue {} (algebraic {algebraic}, geometric {geometric})",
            real(*value)
        ),
        OffdiagCouplingA2 { norm } => format!("offdiag_coupling_a2 {}", real(*norm)),
    }
}

fn cmd_sdc(path: &Path, tol: &Tolerances, json: bool) -> Result<Report, CliError> {
    let (a, b) = read_pair(path)?;
    let r = is_sdc(&a, &b, tol)?;
    if json {
        return Ok(Report::Json(to_json(&r)));
    }
    let mut out = vec![
        line("verdict", name(&r.verdict)),
        line("route", name(&r.route)),
    ];
    if let Some(o) = &r.obstruction {
        out.push(line("obstruction", obstruction(o)));
    }
    if let Some(d) = &r.diagonalization {
        out.push(line("alpha", vector(&d.alpha)));
        out.push(line("beta", vector(&d.beta)));
        let rows: Vec<Vec<f64>> = d
            .congruence
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect();
        out.push(line("congruence", matrix(&rows)));
        out.push(line("residual_a", real(d.residual(&a, &d.alpha))));
        out.push(line("residual_b", real(d.residual(&b, &d.beta))));
    }
    for blk in &r.blocks {
        out.push(line(
            "block",
            format!(
                "lambda {}, multiplicity {}, {}",
                real(blk.lambda),
                blk.multiplicity,
                name(&blk.inertia)
            ),
        ));
    }
    Ok(Report::Text(out))
}

fn cmd_solve(path: &Path, opts: &SolveOptions, json: bool) -> Result<Report, CliError> {
    let inst = read_instance(path)?;
    let o = solve(&inst, opts)?;
    if json {
        return Ok(Report::Json(to_json(&o)));
    }
    let d = &o.diagnostics;
    let mut out = vec![line("status", o.tag.to_string())];
    if let Some(c) = &o.certificate {
        out.push(line("mu*", real(c.mu)));
        out.push(line("lambda*", real(c.objective)));
        out.push(line("x*", vector(&c.x)));
    }
    if let Some(r) = &o.unbounded_reason {
        out.push(line("reason", name(r)));
    }
    if let Some(w) = &o.witness {
        out.push(line("ray_origin", vector(&w.x0)));
        out.push(line("ray_direction", vector(&w.direction)));
        out.push(line("ray_verified", w.verify(&inst, 1e-8).to_string()));
    }
    out.push(line("path", d.path.to_string()));
    if let Some(p) = &d.reduced_path {
        out.push(line("reduced_path", p.to_string()));
    }
    out.push(line("I_psd", d.psd_interval.to_string()));
    out.push(line("I_mult", d.multiplier_interval.to_string()));
    if let Some(c) = &o.certificate {
        out.push(line("r_stationarity", real(c.r_stationarity)));
        out.push(line("g", real(c.g_value)));
        out.push(line("r_complementarity", real(c.r_complementarity)));
        out.push(line("psd_margin", real(c.psd_margin)));
    }
    out.push(line("iterations", d.iterations.to_string()));
    out.push(line("slater_violated", d.slater_violated.to_string()));
    Ok(Report::Text(out))
}

/// Residuals at the candidate, with the pass threshold `1e-7 · scale`.
#[derive(Serialize, Deserialize)]
struct VerifyReport {
    certificate: psdpencil::KktCertificate,
    scale: f64,
    threshold: f64,
    pass: bool,
}

fn cmd_verify(instance: &Path, solution: &Path, json: bool) -> Result<Report, CliError> {
    let inst = read_instance(instance)?;
    let sol: SolutionDocument = document::read(solution)?;
    if sol.x.len() != inst.dim() {
        return Err(CliError::invariant(format!(
            "solution has {} entries, instance dimension is {}",
            sol.x.len(),
            inst.dim()
        )));
    }
    let cert = check_kkt(&inst, &DVector::from_column_slice(&sol.x), sol.mu);
    let scale = inst.scale();
    let report = VerifyReport {
        pass: cert.passes(1e-7, scale),
        threshold: 1e-7 * scale,
        scale,
        certificate: cert,
    };
    let pass = report.pass;
    let out = if json {
        Report::Json(to_json(&report))
    } else {
        verify_text(&report)
    };
    Ok(if pass {
        out
    } else {
        Report::Failed(
            Box::new(out),
            CliError::invariant("candidate fails the optimality check"),
        )
    })
}

fn verify_text(r: &VerifyReport) -> Report {
    let c = &r.certificate;
    Report::Text(vec![
        line("r_stationarity", real(c.r_stationarity)),
        line("g", real(c.g_value)),
        line("r_complementarity", real(c.r_complementarity)),
        line("psd_margin", real(c.psd_margin)),
        line("objective", real(c.objective)),
        line("threshold", real(r.threshold)),
        line("pass", r.pass.to_string()),
    ])
}

fn cmd_gen(
    seed: u64,
    n: usize,
    kind: &str,
    out: Option<&Path>,
    json: bool,
) -> Result<Report, CliError> {
    let kind: PlantKind = kind.parse().map_err(CliError::parse)?;
    if n == 0 {
        return Err(CliError::invariant("--n must be at least 1"));
    }
    let p = plant_instance(seed, n, kind);
    let inst_doc = InstanceDocument::from_instance(&p.instance);
    let Some(out) = out else {
        return Ok(Report::Json(to_json(&inst_doc)));
    };
    let ref_path = reference_path(out);
    let ref_doc = ReferenceDocument {
        x: p.ref_x.clone(),
        mu: p.ref_mu,
        objective: p.ref_objective,
        kind: name(&p.kind),
        seed: p.seed,
    };
    document::write(out, &inst_doc)?;
    document::write(&ref_path, &ref_doc)?;
    let (ip, rp) = (out.display().to_string(), ref_path.display().to_string());
    Ok(if json {
        Report::Json(json!({ "instance": ip, "reference": rp }))
    } else {
        Report::Text(vec![
            line("instance", ip),
            line("reference", rp),
            line("kind", name(&p.kind)),
            line("seed", p.seed.to_string()),
            line("n", p.instance.dim().to_string()),
        ])
    })
}

/// `dir/name.json` → `dir/name.ref.json`.
pub fn reference_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    out.with_file_name(format!("{stem}.ref.json"))
}

fn cmd_scan(
    path: &Path,
    lo: f64,
    hi: f64,
    steps: usize,
    tol: f64,
    json: bool,
) -> Result<Report, CliError> {
    let (a, b) = read_pair(path)?;
    if !(lo < hi) || steps < 2 {
        return Err(CliError::invariant(
            "scan needs --lo < --hi and --steps >= 2",
        ));
    }
    let r = scan_interval(&a, &b, lo, hi, steps, tol)?;
    if json {
        return Ok(Report::Json(to_json(&r)));
    }
    let scale = psdpencil::oracle::scan_scale(&a, &b, lo, hi);
    let mut out = vec![
        line("resolution", real(r.resolution)),
        line("empirical", r.empirical_interval.to_string()),
        line("touches_lo", r.touches_lo.to_string()),
        line("touches_hi", r.touches_hi.to_string()),
    ];
    for (k, p) in r.grid.iter().enumerate() {
        let mark = if r.is_psd_at(k, tol, scale) {
            "psd"
        } else {
            "-"
        };
        out.push(line(
            "point",
            format!("{} {} {mark}", real(p.mu), real(p.lambda_min)),
        ));
    }
    Ok(Report::Text(out))
}
