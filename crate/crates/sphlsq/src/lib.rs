//! Polynomial approximation and quadrature on the unit sphere from weighted
//! point samples.
//!
//! Given a layer of sample points on S^2 with positive weights, this crate
//! builds the weighted least squares projector onto spherical polynomials of
//! degree at most `n`, derives the matching least squares quadrature rule,
//! and measures the quantities that control both: the frame constants `A`, `B`
//! of the layer (extremal eigenvalues of the Gram matrix), the condition
//! number `kappa = B / A`, operator (Lebesgue) norms, and exact `L_2` /
//! Sobolev errors for zonal test functions with known expansion coefficients.
//!
//! All inner products use the rotation-invariant probability measure on the
//! sphere (total mass 1). Under that convention the reproducing kernel of the
//! degree-`n` polynomial space satisfies `E_n(x, x) = dim` exactly, which the
//! test suites rely on.
//!
//! Module map:
//!
//! * [`harmonics`] - Gegenbauer polynomials, harmonic-space dimensions, the
//!   reproducing kernel, and the real orthonormal basis on S^2.
//! * [`points`] - sample-layer generators (exact product grids, Fibonacci
//!   spirals, perturbations) and geometric diagnostics.
//! * [`linalg`] - dense column-major kernels: Householder QR, triangular
//!   solves, symmetric extremal eigenvalues.
//! * [`design`] - the weighted design matrix, its factorization, and the
//!   measured frame constants.
//! * [`fitting`] - the least squares projector, discrete reproducing kernel,
//!   Christoffel functions, hyperinterpolation, and Lebesgue estimates.
//! * [`quadrature`] - least squares quadrature weights, integration, and
//!   error measurement.
//! * [`lab`] - zonal test functions with exact Parseval norms and the
//!   convergence / operator-norm sweep drivers.

pub mod design;
pub mod error;
pub mod fitting;
pub mod harmonics;
pub mod lab;
pub mod linalg;
pub mod points;
pub mod quadrature;
pub mod selftest;
mod util;

pub use error::{Error, MzDeficiency, Result};
