//! Exact and floating series: Cauchy numbers `b_n`, harmonic numbers, the
//! coefficients `c_n` of `(ln(1-u))²/u²`, and the dilogarithm on `[1, ∞)`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// Largest index for which exact Cauchy numbers are served.
pub const MAX_CAUCHY_INDEX: usize = 200;

/// An arbitrary-precision rational, always in lowest terms with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        // BigRational::new reduces and normalizes the sign; a zero denominator panics
        Self(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    /// Nearest `f64` (correct to a few ulp even when numerator and denominator
    /// individually overflow `f64`).
    pub fn to_f64(&self) -> f64 {
        if let Some(v) = self.0.to_f64() {
            if v.is_finite() {
                return v;
            }
        }
        let n = self.numer();
        let d = self.denom();
        let shift = n.bits().max(d.bits()).saturating_sub(900) as usize;
        let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for ExactRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("not a rational number: {s:?}"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Self::new(n, d))
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

/// `H_n = Σ_{k=1}^n 1/k`.
pub fn harmonic(n: u64) -> Result<ExactRational> {
    if n == 0 {
        return Err(Error::range("harmonic numbers start at n = 1"));
    }
    // common denominator n!/…: accumulate p/q with a single reduction at the end
    let mut p = BigInt::zero();
    let mut q = BigInt::one();
    for k in 1..=n {
        let k = BigInt::from(k);
        p = p * &k + &q;
        q *= k;
        if q.bits() > 4096 {
            let g = p.gcd(&q);
            p /= &g;
            q /= &g;
        }
    }
    Ok(ExactRational::new(p, q))
}

/// `c_n = Σ_{k=0}^n 1/((k+1)(n+1-k))`, summed term by term.
pub fn c_bruteforce(n: u64) -> ExactRational {
    (0..=n).fold(ExactRational::zero(), |acc, k| {
        acc + ExactRational::new(1, BigInt::from(k + 1) * BigInt::from(n + 1 - k))
    })
}

/// `c_n = 2 H_{n+1} / (n+2)`.
pub fn c_closed(n: u64) -> ExactRational {
    let h = harmonic(n + 1).expect("n + 1 >= 1");
    h * ExactRational::new(2, n + 2)
}

/// Signed Stirling numbers of the first kind `s(n, k)`, `k = 0..=n`: the
/// coefficients of the falling factorial `x(x-1)…(x-n+1)`.
fn falling_factorial_coefficients(n: usize) -> Vec<BigInt> {
    let mut coeffs = vec![BigInt::one()];
    for m in 0..n {
        // multiply by (x - m)
        let mut next = vec![BigInt::zero(); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * BigInt::from(m);
        }
        coeffs = next;
    }
    coeffs
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn lcm_up_to(n: usize) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc.lcm(&BigInt::from(k)))
}

/// `b_n = ∫₀¹ binom(x, n) dx` computed by integrating the falling factorial exactly.
fn cauchy_exact(n: usize) -> ExactRational {
    let coeffs = falling_factorial_coefficients(n);
    let l = lcm_up_to(n + 1);
    let mut sum = BigInt::zero();
    for (k, c) in coeffs.iter().enumerate() {
        // ∫₀¹ x^k dx = 1/(k+1)
        sum += c * (&l / BigInt::from(k + 1));
    }
    ExactRational::new(sum, l * factorial(n))
}

/// The Cauchy number `b_n`, the coefficient of `tⁿ` in `t/ln(1+t)`.
pub fn cauchy_number(n: usize) -> Result<ExactRational> {
    if !(1..=MAX_CAUCHY_INDEX).contains(&n) {
        return Err(Error::range(format!("Cauchy numbers are served for 1 <= n <= {MAX_CAUCHY_INDEX}, got {n}")));
    }
    Ok(cauchy_exact(n))
}

/// `b_1, …, b_{n_max}` in one pass.
pub fn cauchy_numbers(n_max: usize) -> Result<Vec<ExactRational>> {
    if n_max > MAX_CAUCHY_INDEX {
        return Err(Error::range(format!("at most {MAX_CAUCHY_INDEX} Cauchy numbers, asked for {n_max}")));
    }
    let l = lcm_up_to(n_max + 1);
    let mut coeffs = vec![BigInt::one()];
    let mut fact = BigInt::one();
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let m = n - 1;
        let mut next = vec![BigInt::zero(); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * BigInt::from(m);
        }
        coeffs = next;
        fact *= BigInt::from(n);
        let sum = coeffs
            .iter()
            .enumerate()
            .fold(BigInt::zero(), |acc, (k, c)| acc + c * (&l / BigInt::from(k + 1)));
        out.push(ExactRational::new(sum, &l * &fact));
    }
    Ok(out)
}

fn cauchy_f64() -> &'static [f64] {
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    CACHE.get_or_init(|| {
        cauchy_numbers(MAX_CAUCHY_INDEX)
            .expect("within range")
            .iter()
            .map(ExactRational::to_f64)
            .collect()
    })
}

/// `|b_n|` for `n = 1..=n_max` in floating point, from
/// `|b_n| = (1/n) ∫₀¹ x Π_{k=1}^{n-1} (1 - x/k) dx` with running products at
/// fixed Gauss–Legendre nodes. Serves indices far beyond [`MAX_CAUCHY_INDEX`].
pub fn cauchy_abs_f64(n_max: usize) -> Vec<f64> {
    let (nodes, weights) = gauss_legendre(40);
    let xs: Vec<f64> = nodes.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let ws: Vec<f64> = weights.iter().map(|w| 0.5 * w).collect();
    let mut prod = xs.clone();
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n > 1 {
            let k = (n - 1) as f64;
            for (p, x) in prod.iter_mut().zip(&xs) {
                *p *= 1.0 - x / k;
            }
        }
        let integral: f64 = prod.iter().zip(&ws).map(|(p, w)| p * w).sum();
        out.push(integral / n as f64);
    }
    out
}

/// A truncated series value with a rigorous bound on the omitted remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
    pub remainder_bound: f64,
}

/// `∫₀¹ ρ = 3/2 - 2 Σ_{n≥1} (-1)^{n-1} b_n/(n+1)²`, truncated after `terms` terms.
///
/// Uses the exact `b_n` up to [`MAX_CAUCHY_INDEX`] and [`cauchy_abs_f64`] beyond.
/// From `|b_n| ≤ 1/(2n)` the omitted part is at most `Σ_{n>N} 1/(n(n+1)²) ≤ 1/(2N²)`.
pub fn rho_integral_zero_to_one(terms: usize) -> SeriesValue {
    let exact = cauchy_f64();
    let tail = if terms > MAX_CAUCHY_INDEX { cauchy_abs_f64(terms) } else { Vec::new() };
    // (-1)^{n-1} b_n = |b_n|; add smallest terms first
    let mut sum = 0.0;
    for n in (1..=terms).rev() {
        let b = if n <= MAX_CAUCHY_INDEX { exact[n - 1].abs() } else { tail[n - 1] };
        let m = (n + 1) as f64;
        sum += b / (m * m);
    }
    let n = terms.max(1) as f64;
    SeriesValue {
        value: 1.5 - 2.0 * sum,
        terms,
        remainder_bound: 1.0 / (2.0 * n * n),
    }
}

/// Partial sum `1 + Σ_{n=1}^{N} b_n tⁿ` of `t/ln(1+t)`.
pub fn t_over_log1p(t: f64, terms: usize) -> Result<f64> {
    if !(t.abs() < 1.0) {
        return Err(Error::Divergent(format!("t/ln(1+t) series needs |t| < 1, got {t}")));
    }
    if terms > MAX_CAUCHY_INDEX {
        return Err(Error::range(format!("at most {MAX_CAUCHY_INDEX} terms, asked for {terms}")));
    }
    let b = &cauchy_f64()[..terms];
    // Horner on t·(b_1 + t(b_2 + …))
    let poly = b.iter().rev().fold(0.0, |acc, &c| acc * t + c);
    Ok(1.0 + t * poly)
}

/// Partial sum `u² Σ_{n=0}^{N-1} c_n uⁿ` of `(ln(1-u))²`, with `c_n = 2H_{n+1}/(n+2)`.
pub fn log1m_squared_series(u: f64, terms: usize) -> Result<f64> {
    if !(u.abs() < 1.0) {
        return Err(Error::Divergent(format!("(ln(1-u))² series needs |u| < 1, got {u}")));
    }
    if terms > 100_000 {
        return Err(Error::range(format!("too many terms: {terms}")));
    }
    let mut h = 0.0;
    let coeffs: Vec<f64> = (0..terms)
        .map(|n| {
            h += 1.0 / (n + 1) as f64;
            2.0 * h / (n + 2) as f64
        })
        .collect();
    let poly = coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c);
    Ok(u * u * poly)
}

/// `Li₂(w) = Σ wᵏ/k²` for `0 ≤ w ≤ 1/2`.
fn li2_small(w: f64) -> f64 {
    // 0.5^60/60² is far below an ulp of the sum
    let mut sum = 0.0;
    let mut pow = 1.0;
    for k in 1..=60 {
        pow *= w;
        sum += pow / (k * k) as f64;
    }
    sum
}

/// `dilog(t) = ∫₁^t ln x/(1-x) dx = Li₂(1-t)` for `t ≥ 1`.
///
/// Reduced to `Li₂` on `[0, 1/2]` with the Landen identity for `1 ≤ t ≤ 2` and
/// the inversion identity beyond.
pub fn dilog(t: f64) -> Result<f64> {
    if !(t >= 1.0) || !t.is_finite() {
        return Err(Error::domain(format!("dilog is served for t >= 1, got {t}")));
    }
    let pi2_6 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    let lt = t.ln();
    Ok(if t <= 2.0 {
        -li2_small((t - 1.0) / t) - 0.5 * lt * lt
    } else {
        let l1 = (t - 1.0).ln();
        let lr = lt - l1;
        -pi2_6 - 0.5 * l1 * l1 + li2_small(1.0 / t) + 0.5 * lr * lr
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_finite;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn q(n: i64, d: i64) -> ExactRational {
        ExactRational::new(n, d)
    }

    /// ∫₀¹ binom(x, n) dx by expanding the product term by term in rationals.
    fn cauchy_oracle(n: i64) -> ExactRational {
        // polynomial coefficients in x, built as Π (x - j)/(j+1)
        let mut poly = vec![ExactRational::one()];
        for j in 0..n {
            let mut next = vec![ExactRational::zero(); poly.len() + 1];
            for (k, c) in poly.iter().enumerate() {
                next[k + 1] = &next[k + 1] + &(c * &q(1, j + 1));
                next[k] = &next[k] - &(c * &q(j, j + 1));
            }
            poly = next;
        }
        poly.iter()
            .enumerate()
            .fold(ExactRational::zero(), |acc, (k, c)| acc + c * &q(1, k as i64 + 1))
    }

    #[test]
    fn cauchy_examples() {
        assert_eq!(cauchy_number(1).unwrap(), q(1, 2));
        assert_eq!(cauchy_number(2).unwrap(), q(-1, 12));
        assert_eq!(cauchy_number(3).unwrap(), q(1, 24));
        for n in 1..=12 {
            assert_eq!(cauchy_number(n as usize).unwrap(), cauchy_oracle(n), "n={n}");
        }
        assert!(cauchy_number(0).is_err());
        assert!(cauchy_number(201).is_err());
    }

    #[test]
    fn batch_matches_single() {
        let all = cauchy_numbers(40).unwrap();
        for n in [1usize, 2, 7, 23, 40] {
            assert_eq!(all[n - 1], cauchy_number(n).unwrap());
        }
        assert!(cauchy_numbers(201).is_err());
    }

    #[test]
    fn cauchy_sign_and_bound() {
        for (i, b) in cauchy_numbers(200).unwrap().iter().enumerate() {
            let n = i as i64 + 1;
            let signed = if n % 2 == 1 { b.clone() } else { -b.clone() };
            assert!(signed.is_positive(), "n={n}");
            assert!(signed <= q(1, 2 * n), "n={n}");
        }
    }

    #[test]
    fn floating_cauchy_numbers_agree_with_exact() {
        let f = cauchy_abs_f64(200);
        for (i, b) in cauchy_numbers(200).unwrap().iter().enumerate() {
            let e = b.abs().to_f64();
            assert!((f[i] - e).abs() <= 1e-14 * e, "n={}: {} vs {e}", i + 1, f[i]);
        }
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic(1).unwrap(), q(1, 1));
        assert_eq!(harmonic(3).unwrap(), q(11, 6));
        assert_eq!(harmonic(6).unwrap(), q(49, 20));
        assert!(harmonic(0).is_err());
        let h = harmonic(500).unwrap();
        let direct = (1..=500).fold(ExactRational::zero(), |acc, k| acc + q(1, k));
        assert_eq!(h, direct);
    }

    #[test]
    fn c_examples() {
        assert_eq!(c_closed(0), ExactRational::one());
        assert_eq!(c_closed(1), ExactRational::one());
        assert_eq!(c_closed(2), q(11, 12));
        assert_eq!(c_closed(5), q(7, 10));
        assert_eq!(c_bruteforce(0), ExactRational::one());
        assert_eq!(c_bruteforce(1), ExactRational::one());
        assert_eq!(c_bruteforce(2), q(11, 12));
    }

    #[test]
    fn c_closed_form_and_difference_identity() {
        for n in 0..=100u64 {
            assert_eq!(c_closed(n), c_bruteforce(n), "n={n}");
        }
        for n in 1..=100u64 {
            let lhs = c_closed(n - 1) - c_closed(n);
            let rhs = (harmonic(n).unwrap() - ExactRational::one()) * ExactRational::new(2, (n + 1) * (n + 2));
            assert_eq!(lhs, rhs, "n={n}");
            if n >= 2 {
                assert!(lhs.is_positive());
            }
            assert!(c_closed(n).is_positive() && c_closed(n) <= ExactRational::one());
        }
    }

    #[test]
    fn rational_text_round_trip() {
        let r = q(-22, 7);
        assert_eq!(r.to_string(), "-22/7");
        assert_eq!("-22/7".parse::<ExactRational>().unwrap(), r);
        assert_eq!("4/2".parse::<ExactRational>().unwrap().to_string(), "2");
        assert!("1/0".parse::<ExactRational>().is_err());
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, "\"-22/7\"");
    }

    #[test]
    fn to_f64_handles_huge_parts() {
        let big = ExactRational::new(BigInt::from(3) * factorial(300), BigInt::from(7) * factorial(300));
        assert_eq!(big, q(3, 7));
        let b = cauchy_number(200).unwrap().to_f64();
        assert!(b.is_finite() && b != 0.0);
    }

    #[test]
    fn dilog_examples() {
        assert_eq!(dilog(1.0).unwrap(), 0.0);
        assert!((dilog(2.0).unwrap() + PI * PI / 12.0).abs() < 1e-15);
        let oracle = integrate_finite(|x: f64| if x == 1.0 { -1.0 } else { x.ln() / (1.0 - x) }, 1.0, 1.5, 1e-14).unwrap();
        assert!((dilog(1.5).unwrap() - oracle.value).abs() < 1e-10);
        assert!(dilog(0.5).is_err());
    }

    #[test]
    fn dilog_matches_quadrature_beyond_two() {
        for &t in &[2.5, 5.0, 40.0] {
            let oracle = integrate_finite(|x: f64| x.ln() / (1.0 - x), 1.0 + 1e-300, t, 1e-13).unwrap();
            assert!((dilog(t).unwrap() - oracle.value).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn t_over_log1p_examples() {
        let v = t_over_log1p(1e-8, 50).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
        assert!((t_over_log1p(0.5, 50).unwrap() - 0.5 / 1.5f64.ln()).abs() < 1e-12);
        assert!((t_over_log1p(-0.5, 50).unwrap() - (-0.5 / 0.5f64.ln())).abs() < 1e-12);
        assert!(matches!(t_over_log1p(1.0, 10), Err(Error::Divergent(_))));
        assert!(t_over_log1p(0.1, 201).is_err());
    }

    #[test]
    fn log1m_squared_examples() {
        assert_eq!(log1m_squared_series(0.0, 60).unwrap(), 0.0);
        let l = 0.5f64.ln();
        assert!((log1m_squared_series(0.5, 60).unwrap() - l * l).abs() < 1e-12);
        let l = 1.5f64.ln();
        assert!((log1m_squared_series(-0.5, 60).unwrap() - l * l).abs() < 1e-12);
        assert!(log1m_squared_series(-1.0, 60).is_err());
    }

    #[test]
    fn density_integral_series_converges() {
        let short = rho_integral_zero_to_one(200);
        let long = rho_integral_zero_to_one(20_000);
        assert!(long.remainder_bound < 2e-9);
        assert!(long.value < short.value);
        assert!(short.value - long.value <= short.remainder_bound);
        // the lower bound π²/6 - 1/2 from |b_n| ≤ 1/(2n)
        assert!(long.value > PI * PI / 6.0 - 0.5);
    }

    proptest! {
        #[test]
        fn partial_sums_match_closed_forms(t in -0.5f64..0.5) {
            prop_assume!(t.abs() > 1e-6);
            let direct = t / t.ln_1p();
            prop_assert!((t_over_log1p(t, 50).unwrap() - direct).abs() < 1e-12);
            let l = (-t).ln_1p();
            prop_assert!((log1m_squared_series(t, 60).unwrap() - l * l).abs() < 1e-12);
        }
    }
}
