//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use gcm_core::cutplane::eval_g_boundary;
use gcm_core::density::{rho, DensityModel};
use gcm_core::verify::{CheckResult, Verifier};

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_check(c: &CheckResult) -> Outcome {
    let mut detail = c
        .observed
        .iter()
        .map(|o| format!("{}={:.6e}", o.label, o.value))
        .collect::<Vec<_>>()
        .join(" ");
    if let Some(d) = &c.diagnostic {
        detail.push_str(&format!(" [{d}]"));
    }
    Outcome { passed: c.passed, detail }
}

fn both(a: &CheckResult, b: &CheckResult) -> Outcome {
    let (x, y) = (from_check(a), from_check(b));
    Outcome { passed: x.passed && y.passed, detail: format!("{}: {} | {}: {}", a.name, x.detail, b.name, y.detail) }
}

fn main() -> ExitCode {
    let v = Verifier::default();
    let mut criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = Vec::new();

    criteria.push((
        "representation identity on the 50-point grid, max error <= 1e-8 within 60 s",
        Box::new(move || {
            let start = Instant::now();
            let c = v.check_representation();
            let secs = start.elapsed().as_secs_f64();
            let mut o = from_check(&c);
            o.passed &= secs <= 60.0;
            o.detail.push_str(&format!(" runtime_s={secs:.2}"));
            o
        }),
    ));
    criteria.push((
        "boundary density identity <= 1e-10 at 7 points plus exact anchors",
        Box::new(move || {
            let c = v.check_boundary_density();
            let mut o = from_check(&c);
            let at_one = eval_g_boundary(-1.0).unwrap().value;
            let anchors = [
                (rho(1.0).unwrap() + 1.0).abs(),
                at_one.re.abs() + (at_one.im + PI).abs(),
                (rho(0.5).unwrap() - 0.5).abs(),
                (rho(2.0).unwrap() + 2.0 * 2f64.ln().powi(2) / (PI * PI)).abs(),
            ];
            let worst = anchors.iter().cloned().fold(0.0, f64::max);
            o.passed &= worst <= 1e-15;
            o.detail.push_str(&format!(" anchor_max_error={worst:.3e}"));
            o
        }),
    ));
    criteria.push(("phi(0) = 0.5192 +/- 5e-4", Box::new(move || from_check(&v.check_phi_zero_anchor()))));
    criteria.push((
        "integral bound chain with margins >= 1e-3",
        Box::new(move || from_check(&v.check_integral_bounds())),
    ));
    criteria.push((
        "Cauchy-number series vs quadrature of the unit-interval integral within 1e-8",
        Box::new(move || from_check(&v.check_series_crosscheck())),
    ));
    criteria.push((
        "moments positive for k in 1..=10 on 21 points; derivatives within 1e-5 relative for k <= 4",
        Box::new(move || from_check(&v.check_complete_monotonicity(10))),
    ));
    criteria.push((
        "phi(s) >= (A+B)exp(-s t0) - 1e-12 on [0, 50]",
        Box::new(move || from_check(&v.check_phi_positivity())),
    ));
    criteria.push((
        "Laplace reconstruction of 1 - G within 1e-5 at x in {0.5, 1, 2, 5, 10}",
        Box::new(move || from_check(&v.check_laplace_reconstruction())),
    ));
    criteria.push((
        "h(1) = 1 +/- 1e-12 and h(2) in (1.02, 1.03)",
        Box::new(move || from_check(&v.check_stieltjes_counterexample())),
    ));
    criteria.push((
        "Plancherel sides within 5% at T = S = 1e3, both monotone",
        Box::new(move || from_check(&v.check_plancherel())),
    ));
    criteria.push((
        "50 random 6x6 Bochner matrices PSD (floor -1e-8); Re G(a+it) >= G(a) - 1e-12 on 5x41 grid",
        Box::new(move || both(&v.check_positive_definiteness(1.0, 6, 50, 7), &v.check_negdef_inequality())),
    ));
    criteria.push((
        "Im G' < 0 on the sector; integral form within 1e-7; 1e4 random pairs never collide",
        Box::new(move || from_check(&v.check_conformal_sector(10_000, 0))),
    ));
    criteria.push((
        "exact series identities and dilog(2) = -pi^2/12 +/- 1e-12",
        Box::new(move || from_check(&v.check_series_identities())),
    ));
    criteria.push((
        "sign-flipped density fails representation, monotonicity and phi positivity",
        Box::new(|| {
            let m = Verifier::new(DensityModel::SignFlippedBelowZero);
            let checks = [m.check_representation(), m.check_complete_monotonicity(10), m.check_phi_positivity()];
            let detail = checks
                .iter()
                .map(|c| format!("{}={}", c.name, if c.passed { "passed" } else { "failed" }))
                .collect::<Vec<_>>()
                .join(" ");
            Outcome { passed: checks.iter().all(|c| !c.passed), detail }
        }),
    ));

    let mut failures = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        if !o.passed {
            failures += 1;
        }
        println!("{verdict} [{:>2}] {title} ({:.1}s) :: {}", i + 1, start.elapsed().as_secs_f64(), o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
