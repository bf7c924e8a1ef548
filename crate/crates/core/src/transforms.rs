//! Integral representations built on the density:
//!
//! ```text
//! G(z)     = 1 - ∫₀^∞ ρ(t)/(z+t) dt
//! M_k(x)   = ∫₀^∞ ρ(t)/(x+t)^{k+1} dt,      G^{(k)}(x) = (-1)^{k+1} k! M_k(x)
//! φ(s)     = ∫₀^∞ e^{-st} ρ(t) dt
//! 1 - G(x) = ∫₀^∞ e^{-xs} φ(s) ds
//! ```
//!
//! All of them go through [`quad::integrate_against_density`], so a mutated
//! [`DensityModel`] propagates everywhere.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutplane::{eval_g_direct, CutPlanePoint};
use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::quad::{self, Integrator, QuadratureResult, TailSpec, Tolerance};
use crate::sweep;

/// Largest derivative order served by [`Transforms::g_moment`].
pub const MAX_MOMENT_ORDER: u32 = 40;

/// Below this `x` the Laplace reconstruction is flagged: `1 - G(x)` blows up like `ln²x`.
pub const SMALL_X_WARNING: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentQuery {
    pub x: f64,
    pub k: u32,
}

impl MomentQuery {
    pub fn new(x: f64, k: u32) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::domain(format!("moments need x > 0, got {x}")));
        }
        if k > MAX_MOMENT_ORDER {
            return Err(Error::range(format!("moment order {k} exceeds {MAX_MOMENT_ORDER}")));
        }
        Ok(Self { x, k })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceReconstruction {
    pub x: f64,
    pub value: f64,
    pub abs_error_estimate: f64,
    /// `x` is below [`SMALL_X_WARNING`], where the value grows without bound.
    pub small_x_warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlancherelPair {
    pub t_max: f64,
    pub s_max: f64,
    /// `(1/2π) ∫_{-T}^{T} |1 - G(it)|² dt`
    pub lhs: f64,
    /// `∫₀^S φ(s)² ds`
    pub rhs: f64,
}

impl PlancherelPair {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs.abs()
    }
}

/// A density plus the quadrature settings used for every integral against it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Transforms {
    pub model: DensityModel,
    pub integrator: Integrator,
}

impl Transforms {
    pub fn new(model: DensityModel, integrator: Integrator) -> Self {
        Self { model, integrator }
    }

    /// The exact density with an absolute tolerance.
    pub fn exact(tol: f64) -> Self {
        Self::new(DensityModel::Exact, Integrator::new(tol))
    }

    fn against<K: Fn(f64) -> f64>(&self, kernel: K, hints: &[f64], tol: Tolerance, what: &str) -> Result<QuadratureResult> {
        let it = self.integrator.with_tol(tol);
        let total = quad::integrate_against_density(self.model, kernel, hints, &it).total();
        if total.converged {
            Ok(total)
        } else {
            Err(total.non_convergence(what))
        }
    }

    /// `1 - ∫₀^∞ ρ(t)/(z+t) dt`; real and imaginary parts are separate integrals.
    pub fn stieltjes_g(&self, z: CutPlanePoint) -> Result<Complex64> {
        let (a, b) = (z.re(), z.im());
        let hints = pole_hints(a, b);
        let tol = self.integrator.tol;
        let re = self.against(|t| (a + t) / sq_dist(a + t, b), &hints, tol, "Re of the Stieltjes form of G")?;
        let im = if b == 0.0 {
            0.0
        } else {
            b * self
                .against(|t| 1.0 / sq_dist(a + t, b), &hints, tol.scaled_abs(1.0 / b.abs()), "Im of the Stieltjes form of G")?
                .value
        };
        Ok(Complex64::new(1.0 - re.value, im))
    }

    /// `M_k(x)` to the integrator's tolerance, read as relative.
    pub fn g_moment(&self, q: MomentQuery) -> Result<f64> {
        let MomentQuery { x, k } = q;
        let p = (k + 1) as i32;
        // M_k = x^{-(k+1)} ∫ ρ(t)(1 + t/x)^{-(k+1)} dt keeps the kernel ≤ 1
        let rel = self.integrator.tol.abs.max(self.integrator.tol.rel);
        let tol = Tolerance::mixed(0.0, rel);
        let it = Transforms {
            integrator: self.integrator.with_max_evals(self.integrator.max_evals * (1 + k as usize / 8)),
            ..*self
        };
        let hints = [x / (k as f64 + 1.0), x];
        let scaled = it.against(|t| (1.0 + t / x).powi(-p), &hints, tol, "moment integral")?;
        let value = scaled.value * x.powi(-p);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Overflow(format!("M_{k}({x}) exceeds the double range")))
        }
    }

    /// `G^{(k)}(x) = (-1)^{k+1} k! M_k(x)` for `k ≥ 1`.
    pub fn g_derivative(&self, q: MomentQuery) -> Result<f64> {
        if q.k == 0 {
            return Err(Error::range("g_derivative needs k >= 1; use stieltjes_g for k = 0"));
        }
        let m = self.g_moment(q)?;
        let fact: f64 = (1..=q.k).map(f64::from).product();
        let sign = if q.k % 2 == 1 { 1.0 } else { -1.0 };
        Ok(sign * fact * m)
    }

    /// `φ(s) = ∫₀^∞ e^{-st} ρ(t) dt`.
    pub fn phi(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::domain(format!("phi needs s >= 0, got {s}")));
        }
        let hints: &[f64] = if s > 0.0 { &[1.0 / s] } else { &[] };
        Ok(self.against(|t| (-s * t).exp(), hints, self.integrator.tol, "phi")?.value)
    }

    /// `∫₀^∞ e^{-xs} φ(s) ds`, a double integral that should reproduce `1 - G(x)`.
    ///
    /// The outer integral runs over the whole half-line through the map
    /// `s = (1-y)/(x·y)`; the inner `φ` is computed 100 times tighter.
    pub fn reconstruct_one_minus_g(&self, x: f64) -> Result<LaplaceReconstruction> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::domain(format!("Laplace reconstruction needs x > 0, got {x}")));
        }
        let outer_tol = self.integrator.tol;
        let inner = Transforms { integrator: self.integrator.with_tol(outer_tol.scaled_abs(0.01)), ..*self };
        let failure = std::cell::Cell::new(None);
        let f = |s: f64| {
            let e = (-x * s).exp();
            if e == 0.0 {
                return 0.0;
            }
            match inner.phi(s) {
                Ok(p) => e * p,
                Err(err) => {
                    failure.set(Some(err));
                    f64::NAN
                }
            }
        };
        let r = self.integrator.semi_infinite(f, 0.0, TailSpec::Exponential { rate: x }, &[])?;
        if let Some(err) = failure.take() {
            return Err(err);
        }
        let value = r.value_or_err("outer Laplace integral")?;
        Ok(LaplaceReconstruction {
            x,
            value,
            abs_error_estimate: r.abs_error_estimate,
            small_x_warning: x < SMALL_X_WARNING,
        })
    }

    /// The two truncated sides of the Plancherel identity for `1 - G` on the
    /// imaginary axis and `φ`.
    pub fn plancherel_pair(&self, t_max: f64, s_max: f64) -> Result<PlancherelPair> {
        for (name, v) in [("T", t_max), ("S", s_max)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("Plancherel truncation {name} must be positive, got {v}")));
            }
        }
        Ok(PlancherelPair { t_max, s_max, lhs: self.plancherel_lhs(t_max)?, rhs: self.plancherel_rhs(s_max)? })
    }

    /// `(1/π) ∫₀^T |1 - G(it)|² dt`, using `|1-G(-it)| = |1-G(it)|`.
    fn plancherel_lhs(&self, t_max: f64) -> Result<f64> {
        let sq = |t: f64| match CutPlanePoint::new(0.0, t).and_then(eval_g_direct) {
            Ok(g) => (1.0 - g).norm_sqr(),
            Err(_) => f64::NAN,
        };
        let tol = self.integrator.tol.scaled_abs(PI);
        let it = self.integrator.with_tol(tol);
        let split = t_max.min(1.0);
        // (0, split]: t = split·e^{-u} tames the ln⁴ growth at the origin
        let near = it.half_line(
            |u| {
                let t = split * (-u).exp();
                if t == 0.0 {
                    0.0
                } else {
                    sq(t) * t
                }
            },
            0.0,
            1.0,
            &[],
        )?;
        let mut parts = vec![near];
        if t_max > 1.0 {
            let mut pts = vec![1.0];
            let mut p = 2.0;
            while p < t_max {
                pts.push(p);
                p *= 2.0;
            }
            pts.push(t_max);
            parts.push(it.finite_with_breaks(sq, &pts)?);
        }
        let total = QuadratureResult::sum(&parts, tol);
        Ok(total.value_or_err("Plancherel left side")? / PI)
    }

    /// `∫₀^S φ(s)² ds`.
    fn plancherel_rhs(&self, s_max: f64) -> Result<f64> {
        let tol = self.integrator.tol;
        let inner = Transforms { integrator: self.integrator.with_tol(tol.scaled_abs(0.01)), ..*self };
        let failure = std::cell::Cell::new(None);
        let f = |s: f64| match inner.phi(s) {
            Ok(p) => p * p,
            Err(err) => {
                failure.set(Some(err));
                f64::NAN
            }
        };
        let mut pts = vec![0.0];
        let mut p = 1.0 / 64.0;
        while p < s_max {
            pts.push(p);
            p *= 2.0;
        }
        pts.push(s_max);
        let it = self.integrator.with_tol(tol.scaled_abs(10.0));
        let r = it.finite_with_breaks(f, &pts)?;
        if let Some(err) = failure.take() {
            return Err(err);
        }
        r.value_or_err("Plancherel right side")
    }

    /// `Im G'(re^{iθ}) = -2r sinθ ∫ (r cosθ + t) ρ(t) / ((r cosθ + t)² + r² sin²θ)² dt`.
    pub fn im_g_prime_polar(&self, r: f64, theta: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() || !(theta.abs() < PI) {
            return Err(Error::domain(format!("need r > 0 and |theta| < pi, got r={r}, theta={theta}")));
        }
        let (a, b) = (r * theta.cos(), r * theta.sin());
        if b == 0.0 {
            return Ok(0.0);
        }
        let hints = pole_hints(a, b);
        let scale = 2.0 * b.abs();
        let v = self.against(
            |t| {
                let d = sq_dist(a + t, b);
                (a + t) / (d * d)
            },
            &hints,
            self.integrator.tol.scaled_abs(1.0 / scale),
            "Im G' polar integral",
        )?;
        Ok(-2.0 * b * v.value)
    }

    /// `Im G(x+iy) = y ∫₀^∞ ρ(t)/((x+t)² + y²) dt` for `x > 0`.
    pub fn im_g_cartesian(&self, x: f64, y: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::domain(format!("need x > 0 and finite y, got x={x}, y={y}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let v = self.against(
            |t| 1.0 / sq_dist(x + t, y),
            &pole_hints(x, y),
            self.integrator.tol.scaled_abs(1.0 / y.abs()),
            "Im G cartesian integral",
        )?;
        Ok(y * v.value)
    }

    /// `φ` on a grid, in grid order.
    pub fn phi_table(&self, exec: sweep::Execution, s: &[f64]) -> Vec<Result<f64>> {
        sweep::map(exec, s, |&s| self.phi(s))
    }
}

fn sq_dist(re: f64, im: f64) -> f64 {
    re.mul_add(re, im * im)
}

/// Where `1/(z+t)` has structure on `t > 0`: its near-pole at `-Re z` and the scale `|z|`.
fn pole_hints(a: f64, b: f64) -> Vec<f64> {
    let w = b.abs();
    let mut h = vec![a.hypot(b)];
    if a < 0.0 {
        h.extend([-a - w, -a, -a + w]);
    }
    h.retain(|&t| t > 0.0 && t.is_finite());
    h
}

trait ScaledAbs {
    fn scaled_abs(&self, factor: f64) -> Tolerance;
}

impl ScaledAbs for Tolerance {
    fn scaled_abs(&self, factor: f64) -> Tolerance {
        Tolerance::mixed(self.abs * factor, self.rel)
    }
}

/// [`Transforms::stieltjes_g`] for the exact density.
pub fn stieltjes_g(z: CutPlanePoint, tol: f64) -> Result<Complex64> {
    Transforms::exact(tol).stieltjes_g(z)
}

/// [`Transforms::g_moment`] for the exact density with relative tolerance `tol`.
pub fn g_moment(q: MomentQuery, tol: f64) -> Result<f64> {
    Transforms::exact(tol).g_moment(q)
}

/// [`Transforms::phi`] for the exact density.
pub fn phi(s: f64, tol: f64) -> Result<f64> {
    Transforms::exact(tol).phi(s)
}

/// [`Transforms::reconstruct_one_minus_g`] for the exact density.
pub fn reconstruct_one_minus_g(x: f64, tol: f64) -> Result<LaplaceReconstruction> {
    Transforms::exact(tol).reconstruct_one_minus_g(x)
}

/// [`Transforms::plancherel_pair`] for the exact density.
pub fn plancherel_pair(t_max: f64, s_max: f64, tol: f64) -> Result<PlancherelPair> {
    Transforms::exact(tol).plancherel_pair(t_max, s_max)
}

/// [`Transforms::im_g_prime_polar`] for the exact density.
pub fn im_g_prime_polar(r: f64, theta: f64, tol: f64) -> Result<f64> {
    Transforms::exact(tol).im_g_prime_polar(r, theta)
}

/// [`Transforms::im_g_cartesian`] for the exact density.
pub fn im_g_cartesian(x: f64, y: f64, tol: f64) -> Result<f64> {
    Transforms::exact(tol).im_g_cartesian(x, y)
}
