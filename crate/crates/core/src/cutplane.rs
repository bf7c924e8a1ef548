//! Principal-branch evaluation of `G`, `G'` and the boundary values of `G` on
//! the cut `(-∞, 0]`.
//!
//! Three regimes keep the closed form accurate:
//!
//! * `|z| ≥ 2`: `D = Log(1 + 1/z)` through a `log1p` kernel, so that
//!   `G = z·D·Log z / Log(1+z)` does not lose digits as `G → 1`;
//! * `|z − 1| < 1/2`: `Log z = log1p(z − 1)`, keeping `G(1) = 0` exact;
//! * `|z| < 1/2`: `Log(1 + z) = log1p(z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the cut plane `ℂ \ (-∞, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutPlanePoint {
    re: f64,
    im: f64,
}

impl CutPlanePoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::domain(format!("non-finite point {re} + {im}i")));
        }
        if im == 0.0 && re <= 0.0 {
            return Err(Error::domain(format!(
                "{re} lies on the cut (-inf, 0]; use the boundary evaluation instead"
            )));
        }
        Ok(Self { re, im })
    }

    /// `r·e^{iθ}` with `r > 0`, `|θ| < π`.
    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        if !(r > 0.0) || !(theta.abs() < PI) {
            return Err(Error::domain(format!("polar point r={r}, theta={theta} outside the cut plane")));
        }
        let z = Complex64::from_polar(r, theta);
        // cos(θ) rounding can put |θ| ≈ π points at im = 0
        Self::new(z.re, if z.im == 0.0 && theta != 0.0 { theta.signum() * f64::MIN_POSITIVE } else { z.im })
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(x, 0.0)
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }
}

impl TryFrom<Complex64> for CutPlanePoint {
    type Error = Error;

    fn try_from(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }
}

impl From<CutPlanePoint> for Complex64 {
    fn from(z: CutPlanePoint) -> Self {
        z.to_complex()
    }
}

/// `1/z` without forming `|z|²` (Smith's method).
fn recip(z: Complex64) -> Complex64 {
    if z.re.abs() >= z.im.abs() {
        let r = z.im / z.re;
        let d = z.re + z.im * r;
        Complex64::new(1.0 / d, -r / d)
    } else {
        let r = z.re / z.im;
        let d = z.re * r + z.im;
        Complex64::new(r / d, -1.0 / d)
    }
}

/// `a/b` by Smith's method, which never forms `|b|²`.
fn div(a: Complex64, b: Complex64) -> Complex64 {
    if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let d = b.re + b.im * r;
        Complex64::new((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    } else {
        let r = b.re / b.im;
        let d = b.re * r + b.im;
        Complex64::new((a.re * r + a.im) / d, (a.im * r - a.re) / d)
    }
}

/// `Log(1 + w)` for small `|w|`.
fn log1p(w: Complex64) -> Complex64 {
    // |1+w|² - 1 = a(2+a) + b²
    let m = w.re.mul_add(2.0 + w.re, w.im * w.im);
    Complex64::new(0.5 * m.ln_1p(), w.im.atan2(1.0 + w.re))
}

/// `Log z = ln|z| + i Arg z`, `Arg z ∈ (-π, π)`.
pub fn principal_log(z: CutPlanePoint) -> Complex64 {
    log_unchecked(z.to_complex())
}

fn log_unchecked(z: Complex64) -> Complex64 {
    let w = z - 1.0;
    if w.norm() < 0.5 {
        log1p(w)
    } else {
        z.ln()
    }
}

/// The three logarithms `(Log z, Log(1+z), Log(1 + 1/z))` in their accurate regimes.
fn logs(z: Complex64) -> (Complex64, Complex64, Complex64) {
    let r = z.norm();
    if r >= 2.0 {
        let lz = z.ln();
        let d = log1p(recip(z));
        (lz, lz + d, d)
    } else {
        let lz = log_unchecked(z);
        let l1 = if r < 0.5 { log1p(z) } else { (z + 1.0).ln() };
        (lz, l1, l1 - lz)
    }
}

fn finite(v: Complex64, what: &str, z: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("{what} at {z} is not representable")))
    }
}

/// `G(z) = (1 - Log z/Log(1+z))·z·Log z`.
pub fn eval_g_direct(z: CutPlanePoint) -> Result<Complex64> {
    let z = z.to_complex();
    let (lz, l1, d) = logs(z);
    // group the factor that tends to 1: z·D for large z, z/Log(1+z) for small z
    let g = if z.norm() < 0.5 { div(z, l1) * d * lz } else { z * d * div(lz, l1) };
    finite(g, "G", z)
}

/// `Log(1+w) - w/(1+w)` for `|w| ≤ 1/2`, as `Σ_{n≥2} (-1)^n (n-1)/n wⁿ`.
fn log1p_minus_ratio(w: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = w * w;
    let mut n = 2u32;
    loop {
        let coeff = (n - 1) as f64 / n as f64;
        let term = pow * if n % 2 == 0 { coeff } else { -coeff };
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() || n > 200 {
            break;
        }
        pow *= w;
        n += 1;
    }
    sum
}

/// Closed-form derivative of [`eval_g_direct`].
///
/// Written as `G = E·F` with `E = z·Log(1+1/z)` and `F = 1 − Log(1+1/z)/Log(1+z)`,
/// so that both factors of `G' = E'F + EF'` are `O(1/z²)`-accurate for large `|z|`.
pub fn eval_g_prime_direct(z: CutPlanePoint) -> Result<Complex64> {
    let z = z.to_complex();
    let (_, l1, d) = logs(z);
    let one_plus = z + 1.0;
    // E' = D - 1/(1+z)
    let e_prime = if z.norm() >= 2.0 {
        log1p_minus_ratio(recip(z))
    } else {
        d - recip(one_plus)
    };
    let d_over_l1 = div(d, l1);
    let f = 1.0 - d_over_l1;
    // D(L1 + zD)/((1+z)L1²), without squaring a tiny L1
    let e_f_prime = div(d_over_l1 * (1.0 + div(z, l1) * d), one_plus);
    finite(e_prime * f + e_f_prime, "G'", z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySide {
    Upper,
}

/// `G(t + i0) = lim_{ε→0+} G(t + iε)` for `t < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryValue {
    pub t: f64,
    pub value: Complex64,
    pub side: BoundarySide,
}

impl BoundaryValue {
    /// `G(t - i0)`, the conjugate of the upper limit.
    pub fn lower(&self) -> Complex64 {
        self.value.conj()
    }
}

/// Upper boundary value of `G` on the negative real axis.
pub fn eval_g_boundary(t: f64) -> Result<BoundaryValue> {
    if !(t < 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("boundary values exist only for t < 0, got {t}")));
    }
    // G = t·D·Log z/Log(1+z) with D = Log(1+z) - Log z, as in the interior
    let lz = Complex64::new((-t).ln(), PI);
    let value = if t == -1.0 {
        Complex64::new(0.0, -PI)
    } else if t < -1.0 {
        // both logs carry iπ, so D = ln(1 + 1/t) is real and free of cancellation
        let d = (1.0 / t).ln_1p();
        let l1 = Complex64::new((-1.0 - t).ln(), PI);
        // Log z/Log(1+z) = 1 - D/Log(1+z) keeps the tiny imaginary part
        (t * d) * (1.0 - div(Complex64::new(d, 0.0), l1))
    } else {
        let l1 = t.ln_1p();
        (t / l1) * (l1 - lz) * lz
    };
    Ok(BoundaryValue { t, value, side: BoundarySide::Upper })
}
