//! `gcm`: point evaluation, CSV tables and the verification report.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gcm_core::cutplane::{eval_g_boundary, eval_g_direct, eval_g_prime_direct, CutPlanePoint};
use gcm_core::density;
use gcm_core::quad::Integrator;
use gcm_core::sweep::{self, linspace, Execution};
use gcm_core::transforms::{MomentQuery, Transforms, MAX_MOMENT_ORDER};
use gcm_core::verify::{VerificationReport, Verifier, CHECK_NAMES};
use gcm_core::{DensityModel, Error};
use num_complex::Complex64;

const TOL_RANGE: (f64, f64) = (1e-14, 1e-2);

#[derive(Debug, Parser)]
#[command(name = "gcm", version, about = "Evaluate G, its density and its Laplace kernel; verify their properties")]
struct Cli {
    /// Quadrature tolerance, in [1e-14, 1e-2]
    #[arg(long, global = true, default_value_t = 1e-10, value_parser = parse_tol)]
    tol: f64,

    /// Write to this file instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Evaluate grids on a single thread
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// G, its integral representation and G' at one point of the cut plane
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        im: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Upper boundary value G(t + i0) for t < 0
    Boundary {
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// CSV table `t,rho` of the density
    RhoTable {
        #[arg(long, default_value_t = 0.01)]
        t_min: f64,
        #[arg(long, default_value_t = 5.0)]
        t_max: f64,
        #[arg(long, default_value_t = 500)]
        points: usize,
    },
    /// CSV table `s,phi` of the Laplace kernel
    PhiTable {
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        s_min: f64,
        #[arg(long, default_value_t = 20.0)]
        s_max: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// CSV table `k,moment,derivative,sign_ok` of derivatives of G at x
    Moments {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 10)]
        k_max: u32,
    },
    /// Run the verification checks
    Verify {
        /// `all` or one check name
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
        /// Use the density sign-flipped below its zero (harness self-test)
        #[arg(long)]
        mutate: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v >= TOL_RANGE.0 && v <= TOL_RANGE.1 {
        Ok(v)
    } else {
        Err(format!("tolerance must lie in [{:e}, {:e}]", TOL_RANGE.0, TOL_RANGE.1))
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Full precision for data: 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Six significant digits for human-readable summaries.
fn short(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".to_string()
    } else if (1e-4..1e6).contains(&a) {
        let decimals = (5 - a.log10().floor() as i32).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

fn short_c(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{} {} {}i", short(z.re), sign, short(z.im.abs()))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, Failure> {
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}

fn json_bytes(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s.into_bytes()
}

fn check_range(lo: f64, hi: f64, points: usize, what: &str) -> Result<(), Failure> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Failure::Usage(format!("{what} range needs min < max, got [{lo}, {hi}]")));
    }
    if points < 2 {
        return Err(Failure::Usage(format!("need at least 2 points, got {points}")));
    }
    Ok(())
}

struct Context {
    tol: f64,
    execution: Execution,
}

impl Context {
    fn transforms(&self) -> Transforms {
        Transforms::exact(self.tol)
    }
}

fn cmd_eval(ctx: &Context, re: f64, im: f64, format: Format) -> Result<Vec<u8>, Failure> {
    let z = CutPlanePoint::new(re, im).map_err(|e| Failure::Usage(format!("{e} (try `gcm boundary --t {re}`)")))?;
    let g = eval_g_direct(z)?;
    let rep = ctx.transforms().stieltjes_g(z)?;
    let gp = eval_g_prime_direct(z)?;
    let diff = (g - rep).norm();
    Ok(match format {
        Format::Text => format!(
            "z                  = {}\nG (direct)         = {}\nG (representation) = {}\n|difference|       = {}\nG'                 = {}\n",
            short_c(z.to_complex()),
            short_c(g),
            short_c(rep),
            short(diff),
            short_c(gp)
        )
        .into_bytes(),
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["re", "im", "g_re", "g_im", "rep_re", "rep_im", "abs_difference", "g_prime_re", "g_prime_im"])?;
            w.write_record([re, im, g.re, g.im, rep.re, rep.im, diff, gp.re, gp.im].map(num))?;
            finish_csv(w)?
        }
        Format::Json => json_bytes(&serde_json::json!({
            "z": [re, im],
            "g_direct": [g.re, g.im],
            "g_representation": [rep.re, rep.im],
            "abs_difference": diff,
            "g_prime": [gp.re, gp.im],
        })),
    })
}

fn cmd_boundary(t: f64, format: Format) -> Result<Vec<u8>, Failure> {
    let b = eval_g_boundary(t)?;
    Ok(match format {
        Format::Text => format!("G({} + i0) = {}\n", short(t), short_c(b.value)).into_bytes(),
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["t", "g_re", "g_im"])?;
            w.write_record([t, b.value.re, b.value.im].map(num))?;
            finish_csv(w)?
        }
        Format::Json => json_bytes(&serde_json::json!({ "t": t, "g_upper": [b.value.re, b.value.im] })),
    })
}

fn cmd_rho_table(t_min: f64, t_max: f64, points: usize) -> Result<Vec<u8>, Failure> {
    check_range(t_min, t_max, points, "t")?;
    if t_min <= 0.0 {
        return Err(Failure::Usage(format!("rho needs t > 0, got t_min = {t_min}")));
    }
    let mut w = csv_writer();
    w.write_record(["t", "rho"])?;
    for t in linspace(t_min, t_max, points) {
        w.write_record([num(t), num(density::rho(t)?)])?;
    }
    finish_csv(w)
}

fn cmd_phi_table(ctx: &Context, s_min: f64, s_max: f64, points: usize) -> Result<Vec<u8>, Failure> {
    check_range(s_min, s_max, points, "s")?;
    if s_min < 0.0 {
        return Err(Failure::Usage(format!("phi needs s >= 0, got s_min = {s_min}")));
    }
    let grid = linspace(s_min, s_max, points);
    let values = ctx.transforms().phi_table(ctx.execution, &grid);
    let mut w = csv_writer();
    w.write_record(["s", "phi"])?;
    for (s, v) in grid.iter().zip(values) {
        w.write_record([num(*s), num(v?)])?;
    }
    finish_csv(w)
}

fn cmd_moments(ctx: &Context, x: f64, k_max: u32) -> Result<Vec<u8>, Failure> {
    if !(1..=MAX_MOMENT_ORDER).contains(&k_max) {
        return Err(Failure::Usage(format!("k_max must be in 1..={MAX_MOMENT_ORDER}, got {k_max}")));
    }
    let queries = (1..=k_max).map(|k| MomentQuery::new(x, k)).collect::<Result<Vec<_>, _>>()?;
    let t = ctx.transforms();
    let rows = sweep::map(ctx.execution, &queries, |&q| -> Result<(f64, f64), Error> {
        Ok((t.g_moment(q)?, t.g_derivative(q)?))
    });
    let mut w = csv_writer();
    w.write_record(["k", "moment", "derivative", "sign_ok"])?;
    for (q, row) in queries.iter().zip(rows) {
        let (m, d) = row?;
        // (-1)^{k-1} G^{(k)} > 0
        let signed = if q.k % 2 == 1 { d } else { -d };
        w.write_record([q.k.to_string(), num(m), num(d), (signed > 0.0).to_string()])?;
    }
    finish_csv(w)
}

fn cmd_verify(ctx: &Context, suite: &str, seed: u64, format: ReportFormat, mutate: bool) -> Result<(Vec<u8>, bool), Failure> {
    let model = if mutate { DensityModel::SignFlippedBelowZero } else { DensityModel::Exact };
    let verifier = Verifier::new(model)
        .with_integrator(Integrator::new(ctx.tol))
        .with_execution(ctx.execution);
    let report = if suite == "all" {
        verifier.run_all(seed)
    } else {
        verifier.run_one(suite, seed).ok_or_else(|| {
            Failure::Usage(format!("unknown suite {suite:?}; expected `all` or one of: {}", CHECK_NAMES.join(", ")))
        })?
    };
    let passed = report.all_passed();
    let body = match format {
        ReportFormat::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s.into_bytes()
        }
        ReportFormat::Text => text_report(&report).into_bytes(),
    };
    Ok((body, passed))
}

fn text_report(report: &VerificationReport) -> String {
    let mut out = String::new();
    for r in &report.results {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        let obs = r
            .observed
            .iter()
            .map(|o| format!("{}={}", o.label, short(o.value)))
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!("{verdict} {} :: {obs}\n", r.name));
        if let Some(d) = &r.diagnostic {
            out.push_str(&format!("     {d}\n"));
        }
    }
    let passed = report.results.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} checks passed (seed {})\n", report.results.len(), report.seed));
    out
}

fn emit(output: &Option<PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, bytes).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let ctx = Context {
        tol: cli.tol,
        execution: if cli.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    let (bytes, passed) = match cli.command {
        Command::Eval { re, im, format } => (cmd_eval(&ctx, re, im, format)?, true),
        Command::Boundary { t, format } => (cmd_boundary(t, format)?, true),
        Command::RhoTable { t_min, t_max, points } => (cmd_rho_table(t_min, t_max, points)?, true),
        Command::PhiTable { s_min, s_max, points } => (cmd_phi_table(&ctx, s_min, s_max, points)?, true),
        Command::Moments { x, k_max } => (cmd_moments(&ctx, x, k_max)?, true),
        Command::Verify { suite, seed, format, mutate } => cmd_verify(&ctx, &suite, seed, format, mutate)?,
    };
    emit(&cli.output, &bytes)?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("gcm: some checks failed");
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("gcm: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
