//! The density `ρ` on `(0, ∞)`:
//!
//! ```text
//! ρ(t) = -t ln((1-t)/t²) / ln(1-t)                    0 < t < 1
//! ρ(t) = -t (ln((t-1)/t))² / ((ln(t-1))² + π²)        t > 1
//! ```
//!
//! with the removable value `ρ(1) = -1`. It is positive on `(0, t0)` and negative
//! on `(t0, ∞)` where `t0 = (√5 - 1)/2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Integrator};

/// The zero of `ρ`, `(√5 - 1)/2`.
pub const T0: f64 = 0.618_033_988_749_894_9;

/// Which density the integral representations are built on.
///
/// Everything except [`DensityModel::Exact`] is a deliberately wrong density used
/// to show that the verification suite notices broken inputs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "param")]
pub enum DensityModel {
    #[default]
    Exact,
    /// `-ρ` on `(0, t0)`.
    SignFlippedBelowZero,
    /// `ρ + δ` on `(0, 1)`.
    ShiftedOnUnitInterval(f64),
    /// `c·ρ` on `(t0, ∞)`.
    ScaledAboveZero(f64),
}

impl DensityModel {
    /// Evaluates the model density; `t` must be positive.
    pub fn eval(&self, t: f64) -> f64 {
        let r = rho_unchecked(t);
        match *self {
            DensityModel::Exact => r,
            DensityModel::SignFlippedBelowZero if t < T0 => -r,
            DensityModel::ShiftedOnUnitInterval(d) if t < 1.0 => r + d,
            DensityModel::ScaledAboveZero(c) if t > T0 => c * r,
            _ => r,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, DensityModel::Exact)
    }
}

/// `ρ(t)` for `t > 0`.
pub fn rho(t: f64) -> Result<f64> {
    if !(t > 0.0) || t.is_infinite() {
        return Err(Error::domain(format!("rho is defined for 0 < t < inf, got {t}")));
    }
    Ok(rho_unchecked(t))
}

pub(crate) fn rho_unchecked(t: f64) -> f64 {
    if t < 1.0 {
        // ln t and ln(1-t), each from the argument that is known exactly
        let (ln_t, ln_1m) = if t < 0.5 {
            (t.ln(), (-t).ln_1p())
        } else {
            let u = 1.0 - t;
            ((-u).ln_1p(), u.ln())
        };
        // t/ln(1-t) → -1 as t → 0; keep it as one factor so tiny t cannot underflow
        -(t / ln_1m) * (ln_1m - 2.0 * ln_t)
    } else if t == 1.0 {
        -1.0
    } else if t <= 2.0 {
        let u = t - 1.0;
        let l = (u / t).ln();
        let lu = u.ln();
        -t * l * l / (lu * lu + PI * PI)
    } else {
        // t·ln(1 - 1/t) → -1; square it before dividing by t
        let l = (-1.0 / t).ln_1p();
        let tl = t * l;
        let lu = t.ln() + l;
        -(tl * tl / t) / (lu * lu + PI * PI)
    }
}

/// Leading-order behaviour of `ρ`: `-2 ln t` as `t → 0⁺` and `-1/(t ln²t)` as `t → ∞`.
///
/// Only defined on the windows `(0, 0.01]` and `[100, ∞)`.
pub fn rho_asymptotic(t: f64) -> Result<f64> {
    if t > 0.0 && t <= 0.01 {
        Ok(-2.0 * t.ln())
    } else if t >= 100.0 && t.is_finite() {
        let l = t.ln();
        Ok(-1.0 / (t * l * l))
    } else {
        Err(Error::domain(format!(
            "asymptotic form of rho only valid on (0, 0.01] and [100, inf), got {t}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityConstants {
    pub t0: f64,
    pub rho_at_one: f64,
    /// `∫₀^{t0} ρ`
    pub a_pos: f64,
    /// `∫_{t0}^∞ ρ`
    pub b_neg: f64,
    pub abs_error_estimate: f64,
}

impl DensityConstants {
    /// `∫₀^∞ ρ = φ(0)`.
    pub fn total(&self) -> f64 {
        self.a_pos + self.b_neg
    }
}

pub fn density_constants() -> Result<DensityConstants> {
    density_constants_for(DensityModel::Exact, &Integrator::default())
}

pub fn density_constants_for(model: DensityModel, integrator: &Integrator) -> Result<DensityConstants> {
    let split = quad::integrate_against_density(model, |_| 1.0, &[], integrator);
    let total = split.total();
    if !total.converged {
        return Err(total.non_convergence("integral of rho"));
    }
    let a = split.below_zero();
    let b = split.above_zero();
    Ok(DensityConstants {
        t0: T0,
        rho_at_one: model.eval(1.0),
        a_pos: a.value,
        b_neg: b.value,
        abs_error_estimate: a.abs_error_estimate + b.abs_error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutplane::eval_g_boundary;
    use std::f64::consts::LN_2;

    #[test]
    fn t0_is_the_golden_ratio_conjugate() {
        assert_eq!(T0, (5f64.sqrt() - 1.0) / 2.0);
        assert!((T0 * T0 + T0 - 1.0).abs() < 1e-16);
    }

    #[test]
    fn special_values() {
        assert_eq!(rho(1.0).unwrap(), -1.0);
        assert!(rho(T0).unwrap().abs() < 1e-15);
        assert!((rho(0.5).unwrap() - 0.5).abs() < 1e-15);
        let expected = -2.0 * LN_2 * LN_2 / (PI * PI);
        assert!((rho(2.0).unwrap() - expected).abs() < 1e-16);
    }

    #[test]
    fn rejects_nonpositive_arguments() {
        assert!(rho(0.0).is_err());
        assert!(rho(-1.0).is_err());
        assert!(rho(f64::NAN).is_err());
        assert!(rho(f64::INFINITY).is_err());
    }

    #[test]
    fn continuous_across_one() {
        for h in [1e-6, 1e-9, 1e-13] {
            assert!((rho(1.0 - h).unwrap() + 1.0).abs() < 10.0 * h.max(1e-15) + 4.0 * h / h.ln().abs());
            // right side approaches -1 only like π²/ln²h
            assert!((rho(1.0 + h).unwrap() + 1.0).abs() < 2.0 * PI * PI / (h.ln() * h.ln()));
        }
    }

    #[test]
    fn sign_pattern() {
        for &t in &[1e-300, 1e-10, 0.1, 0.5, 0.6] {
            assert!(rho(t).unwrap() > 0.0, "t={t}");
        }
        for &t in &[0.62, 0.9, 1.0, 1.5, 3.0, 1e10, 1e300] {
            assert!(rho(t).unwrap() < 0.0, "t={t}");
        }
    }

    #[test]
    fn monotone_shape() {
        let left = crate::sweep::linspace(1e-4, 1.0 - 1e-4, 2000);
        for w in left.windows(2) {
            assert!(rho(w[1]).unwrap() < rho(w[0]).unwrap(), "decreasing on (0,1) at {}", w[0]);
        }
        let right = crate::sweep::geomspace(1.0 + 1e-6, 1e8, 2000);
        for w in right.windows(2) {
            assert!(rho(w[1]).unwrap() > rho(w[0]).unwrap(), "increasing on (1,inf) at {}", w[0]);
        }
    }

    #[test]
    fn one_sided_derivatives_at_one() {
        let left: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&h| (rho(1.0).unwrap() - rho(1.0 - h).unwrap()) / h)
            .collect();
        let errs: Vec<f64> = left.iter().map(|d| (d + 1.0).abs()).collect();
        assert!(errs[2] < errs[1] && errs[1] < errs[0], "{left:?}");
        let right: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&h| (rho(1.0 + h).unwrap() - rho(1.0).unwrap()) / h)
            .collect();
        assert!(right[1] > right[0] && right[2] > right[1], "{right:?}");
        assert!(right[2] > 100.0);
    }

    #[test]
    fn asymptotic_forms() {
        let a = rho_asymptotic(1e-6).unwrap();
        assert!((a - 27.631021115928547).abs() < 1e-12);
        let ratio = rho(1e-6).unwrap() / a;
        assert!((0.9..=1.1).contains(&ratio));
        // at large t the ratio is ln²t/(ln²t + π²) + O(1/t), which is 0.896 at 1e4
        let ratio = rho(1e4).unwrap() / rho_asymptotic(1e4).unwrap();
        let l2 = 1e4f64.ln().powi(2);
        assert!((ratio - l2 / (l2 + PI * PI)).abs() < 1e-3, "{ratio}");
        for &t in &[1e5, 1e8, 1e100] {
            let ratio = rho(t).unwrap() / rho_asymptotic(t).unwrap();
            assert!((0.9..=1.1).contains(&ratio), "t={t}: {ratio}");
        }
        assert!(rho_asymptotic(0.5).is_err());
        assert!(rho_asymptotic(0.0).is_err());
    }

    #[test]
    fn large_arguments_do_not_underflow() {
        // t·ρ(t)·((ln t)² + π²) → -1
        for &t in &[1e20, 1e100, 1e300] {
            let l = f64::ln(t);
            let scaled = rho(t).unwrap() * t * (l * l + PI * PI);
            assert!((scaled + 1.0).abs() < 1e-12, "t={t}: {scaled}");
        }
    }

    #[test]
    fn matches_boundary_values_of_g() {
        for &t in &[0.1, 0.5, T0, 1.0, 1.5, 2.0, 10.0] {
            let im = eval_g_boundary(-t).unwrap().value.im;
            assert!((rho(t).unwrap() - im / PI).abs() <= 1e-10, "t={t}");
        }
    }

    #[test]
    fn constants() {
        let c = density_constants().unwrap();
        assert_eq!(c.rho_at_one, -1.0);
        assert!((c.t0 - 0.6180339887).abs() < 1e-10);
        assert!(c.a_pos > 0.0 && c.b_neg < 0.0 && c.total() > 0.0);
        // ∫₀^∞ ρ = lim x(1-G(x)) = 1/2
        assert!((c.total() - 0.5).abs() < 1e-9, "{}", c.total());
        assert!(c.total() > 0.3238);
    }

    #[test]
    fn mutations_change_the_density_where_documented() {
        let m = DensityModel::SignFlippedBelowZero;
        assert_eq!(m.eval(0.3), -rho(0.3).unwrap());
        assert_eq!(m.eval(0.9), rho(0.9).unwrap());
        let m = DensityModel::ShiftedOnUnitInterval(0.1);
        assert_eq!(m.eval(0.9), rho(0.9).unwrap() + 0.1);
        assert_eq!(m.eval(1.5), rho(1.5).unwrap());
        let m = DensityModel::ScaledAboveZero(2.0);
        assert_eq!(m.eval(3.0), 2.0 * rho(3.0).unwrap());
        assert_eq!(m.eval(0.3), rho(0.3).unwrap());
    }
}
