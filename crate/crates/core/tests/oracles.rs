//! Values frozen from an independent 50-digit evaluation of the same integrals.

use gcm_core::density::{self, T0};
use gcm_core::quad::{integrate_against_density, Integrator};
use gcm_core::series;
use gcm_core::DensityModel;

const INT_0_1: f64 = 1.221_240_385_706_28;
const INT_1_2: f64 = -0.223_615_232_910_649_5;
const INT_2_INF: f64 = -0.497_625_152_795_627_2;
const A_POS: f64 = 1.438_566_448_803_665;
const INT_T0_1: f64 = -0.217_326_063_097_389;

#[test]
fn density_integral_pieces() {
    let split = integrate_against_density(DensityModel::Exact, |_| 1.0, &[], &Integrator::new(1e-12));
    assert!((split.zero_to_one().value - INT_0_1).abs() < 1e-11);
    assert!((split.one_to_two().value - INT_1_2).abs() < 1e-11);
    assert!((split.two_to_infinity().value - INT_2_INF).abs() < 1e-11);
    assert!((split.below_zero().value - A_POS).abs() < 1e-11);
    assert!((split.pieces[1].value - INT_T0_1).abs() < 1e-11);
    assert!((split.total().value - 0.5).abs() < 1e-11);
}

#[test]
fn constants_agree_with_the_pieces() {
    let c = density::density_constants().unwrap();
    assert_eq!(c.t0, T0);
    assert!((c.a_pos - A_POS).abs() < 1e-9);
    assert!((c.b_neg - (INT_T0_1 + INT_1_2 + INT_2_INF)).abs() < 1e-9);
}

#[test]
fn cauchy_series_reaches_the_frozen_value() {
    let s = series::rho_integral_zero_to_one(20_000);
    assert!((s.value - INT_0_1).abs() < s.remainder_bound + 1e-12);
}
