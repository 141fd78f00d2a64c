//! The weighted least squares projector onto spherical polynomials, the
//! discrete reproducing kernel it induces, Christoffel functions,
//! hyperinterpolation, and the operator-norm (Lebesgue) estimator.

use crate::design::DesignSystem;
use crate::error::{Error, Result};
use crate::harmonics::{kernel_value, BasisSpec};
use crate::points::{covering_grid, Layer};
use crate::util::dot;
use rayon::prelude::*;

/// A spherical polynomial stored as coefficients in the orthonormal harmonic
/// basis, in the frozen [`BasisSpec`] ordering. The `L_2` norm of the
/// polynomial is the Euclidean norm of the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Approximant {
    spec: BasisSpec,
    pub coefficients: Vec<f64>,
}

impl Approximant {
    pub fn new(spec: BasisSpec, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != spec.len() {
            return Err(Error::DimensionMismatch {
                expected: spec.len(),
                got: coefficients.len(),
            });
        }
        Ok(Self { spec, coefficients })
    }

    pub fn spec(&self) -> BasisSpec {
        self.spec
    }

    pub fn degree(&self) -> u32 {
        self.spec.degree()
    }

    /// `L_2` norm under the probability measure (Parseval).
    pub fn l2_norm(&self) -> f64 {
        dot(&self.coefficients, &self.coefficients).sqrt()
    }

    /// Point evaluation `a . Phi(x)`.
    pub fn evaluate(&self, x: &crate::points::UnitPoint) -> f64 {
        let phi = self.spec.eval(x).expect("S^2 basis evaluation");
        dot(&self.coefficients, &phi)
    }
}

/// Solves the weighted least squares problem for the sampled values:
/// the returned polynomial minimizes `sum_k tau_k (f(x_k) - p(x_k))^2` over
/// polynomials of the system's degree. Sampling any polynomial of that
/// degree reproduces its coefficients (the operator is a projection).
pub fn fit(sys: &DesignSystem, samples: &[f64]) -> Result<Approximant> {
    let layer = sys.layer();
    if samples.len() != layer.len() {
        return Err(Error::DimensionMismatch { expected: layer.len(), got: samples.len() });
    }
    let b: Vec<f64> = samples
        .iter()
        .zip(&layer.weights)
        .map(|(f, tau)| tau.sqrt() * f)
        .collect();
    let coeffs = sys.factorization().lsq_solve(&b)?;
    Approximant::new(sys.spec(), coeffs)
}

/// Discrete reproducing kernel `D_n(x, y) = Phi(x)^T R^{-1} Phi(y)`; it
/// reproduces every polynomial of the system's degree under the weighted
/// discrete inner product.
pub fn discrete_kernel(
    sys: &DesignSystem,
    x: &crate::points::UnitPoint,
    y: &crate::points::UnitPoint,
) -> Result<f64> {
    let spec = sys.spec();
    let phix = spec.eval(x)?;
    let phiy = spec.eval(y)?;
    let z = sys.factorization().gram_apply_inverse(&phiy)?;
    Ok(dot(&phix, &z))
}

/// Christoffel functions at `x`: the continuous one `1 / E_n(x, x)` and the
/// discrete one `1 / D_n(x, x)`.
pub fn christoffel(sys: &DesignSystem, x: &crate::points::UnitPoint) -> Result<(f64, f64)> {
    let e_diag = kernel_value(2, sys.degree(), 1.0)?;
    let d_diag = discrete_kernel(sys, x, x)?;
    Ok((1.0 / e_diag, 1.0 / d_diag))
}

/// Hyperinterpolation: discrete Fourier coefficients
/// `b_j = sum_k tau_k f(x_k) Phi_j(x_k)`.
///
/// The layer is expected to carry a positive quadrature rule exact to twice
/// the requested degree; on such layers this equals the least squares fit.
pub fn hyperinterpolate(layer: &Layer, n: u32, samples: &[f64]) -> Result<Approximant> {
    if samples.len() != layer.len() {
        return Err(Error::DimensionMismatch { expected: layer.len(), got: samples.len() });
    }
    let spec = BasisSpec::new(2, n);
    let dn = spec.len();
    let mut coeffs = vec![0.0f64; dn];
    let mut phi = vec![0.0f64; dn];
    for ((x, tau), f) in layer.points.iter().zip(&layer.weights).zip(samples) {
        spec.eval_into(x, &mut phi)?;
        let w = tau * f;
        for (c, p) in coeffs.iter_mut().zip(&phi) {
            *c += w * p;
        }
    }
    Approximant::new(spec, coeffs)
}

/// Lower estimate of the operator norm of the least squares projector:
/// the maximum over the deterministic covering grid of
/// `sum_k tau_k |D_n(x_k, x)|`. Converges to the true norm from below as
/// the grid refines.
pub fn lebesgue_constant(sys: &DesignSystem, grid_resolution: u32) -> Result<f64> {
    let grid = covering_grid(grid_resolution);
    let spec = sys.spec();
    let layer = sys.layer();
    let sqrt_tau: Vec<f64> = layer.weights.iter().map(|t| t.sqrt()).collect();
    // Per node: tau_k |D(x_k, x)| = sqrt(tau_k) |(U R^{-1} Phi(x))_k|.
    let node_value = |x: &crate::points::UnitPoint, phi: &mut [f64]| -> Result<f64> {
        spec.eval_into(x, phi)?;
        let c = sys.factorization().gram_apply_inverse(phi)?;
        let uc = sys.design_matrix().matvec(&c);
        Ok(uc.iter().zip(&sqrt_tau).map(|(v, s)| s * v.abs()).sum())
    };
    let best = grid
        .par_chunks(64)
        .map(|chunk| {
            let mut phi = vec![0.0f64; spec.len()];
            let mut worst = 0.0f64;
            for x in chunk {
                worst = worst.max(node_value(x, &mut phi)?);
            }
            Ok(worst)
        })
        .try_reduce(|| 0.0f64, |a, b| Ok(a.max(b)))?;
    Ok(best)
}
