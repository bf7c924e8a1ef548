//! Numerics for the function
//!
//! ```text
//! G(z) = (1 - Log z / Log(1+z)) · z · Log z,    z ∈ ℂ \ (-∞, 0],
//! ```
//!
//! its real density `ρ` (so that `G(z) = 1 - ∫₀^∞ ρ(t)/(z+t) dt`) and the
//! Laplace kernel `φ(s) = ∫₀^∞ e^{-st} ρ(t) dt` (so that `1 - G` is the Laplace
//! transform of `φ`).
//!
//! The crate is split along the numerical layers:
//!
//! * [`cutplane`] – principal-branch closed forms of `G`, `G'` and the boundary
//!   values `G(t + i0)` on the cut.
//! * [`density`] – `ρ`, its zero `t0`, asymptotics and signed integrals.
//! * [`quad`] – adaptive Gauss–Kronrod engine with logarithmic endpoint maps
//!   and the `1/(t ln²t)` tail.
//! * [`transforms`] – every integral representation built on `ρ`.
//! * [`series`] – exact Cauchy numbers, harmonic numbers, `c_n`, and `Li₂`.
//! * [`verify`] – property checks assembled into a [`verify::VerificationReport`].
//! * [`sweep`] – data-parallel grid evaluation (rayon behind the `parallel`
//!   feature, sequential otherwise).

pub mod cutplane;
pub mod density;
pub mod quad;
pub mod series;
pub mod sweep;
pub mod transforms;
pub mod verify;

mod error;

pub use cutplane::CutPlanePoint;
pub use density::DensityModel;
pub use error::{Error, Result};
pub use quad::{QuadratureResult, TailSpec, Tolerance};
pub use series::ExactRational;
pub use sweep::Execution;
