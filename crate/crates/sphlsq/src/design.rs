//! The weighted design matrix `U` (rows `sqrt(tau_k) Phi(x_k)`), its
//! factorization, the Gram matrix `R = U^T U`, and the measured per-layer
//! frame constants `A = lambda_min(R)`, `B = lambda_max(R)`,
//! `kappa = B / A`.

use crate::error::{Error, MzDeficiency, Result};
use crate::harmonics::BasisSpec;
use crate::linalg::{factorize, sym_eig_extremes, Mat, TallFactorization};
use crate::points::Layer;
use crate::util::dot;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::Arc;

/// Diagonal threshold separating genuine loss of the lower frame bound from
/// roundoff.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Relative tolerance for the extremal Gram eigenvalues; downstream bounds
/// use `sqrt(kappa)`, so this is plenty.
pub const EIG_REL_TOL: f64 = 1e-9;

/// A sampling layer prepared for least squares fitting at a fixed degree.
///
/// Immutable after construction; sharing across threads is safe.
#[derive(Debug, Clone)]
pub struct DesignSystem {
    spec: BasisSpec,
    layer: Arc<Layer>,
    u: Mat,
    factor: TallFactorization,
    gram: Mat,
    a_est: f64,
    b_est: f64,
    kappa: f64,
}

impl DesignSystem {
    pub fn spec(&self) -> BasisSpec {
        self.spec
    }

    pub fn degree(&self) -> u32 {
        self.spec.degree()
    }

    pub fn layer(&self) -> &Arc<Layer> {
        &self.layer
    }

    /// The weighted design matrix (row `k` is `sqrt(tau_k) Phi(x_k)`).
    pub fn design_matrix(&self) -> &Mat {
        &self.u
    }

    pub fn factorization(&self) -> &TallFactorization {
        &self.factor
    }

    /// The Gram matrix `R = U^T U`.
    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    /// Tightest lower frame constant for this layer.
    pub fn a_est(&self) -> f64 {
        self.a_est
    }

    /// Tightest upper frame constant for this layer.
    pub fn b_est(&self) -> f64 {
        self.b_est
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Assembles and factorizes the design system for fitting degree `n` on the
/// given layer.
///
/// Fails with [`Error::MzDeficient`] when the layer cannot support the
/// degree: too few points, a rank-deficient design matrix, or a lower frame
/// bound that vanishes against the upper one.
pub fn build_design(layer: Arc<Layer>, n: u32) -> Result<DesignSystem> {
    let spec = BasisSpec::new(2, n);
    let dn = spec.len();
    let ln = layer.len();
    if ln < dn {
        return Err(Error::MzDeficient(MzDeficiency::TooFewPoints { points: ln, dim: dn }));
    }

    let mut u = Mat::zeros(ln, dn);
    let mut row = vec![0.0f64; dn];
    for (k, (x, tau)) in layer.points.iter().zip(&layer.weights).enumerate() {
        spec.eval_into(x, &mut row)?;
        let s = tau.sqrt();
        for v in row.iter_mut() {
            *v *= s;
        }
        u.set_row(k, &row);
    }

    let factor = match factorize(&u, DEFAULT_RANK_TOL) {
        Ok(f) => f,
        Err(Error::RankDeficient { column }) => {
            return Err(Error::MzDeficient(MzDeficiency::RankDeficient { column }))
        }
        Err(e) => return Err(e),
    };

    let gram = u.gram();
    let (a_est, b_est) = sym_eig_extremes(&gram, EIG_REL_TOL)?;
    if !(a_est > DEFAULT_RANK_TOL * b_est) {
        return Err(Error::MzDeficient(MzDeficiency::VanishingLowerBound { a_est, b_est }));
    }

    Ok(DesignSystem { spec, layer, u, factor, gram, a_est, b_est, kappa: b_est / a_est })
}

/// Observed range of discrete Rayleigh quotients over random coefficient
/// directions, against the certified `[A, B]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MzVerification {
    pub trials: usize,
    pub min_quotient: f64,
    pub max_quotient: f64,
    pub a_est: f64,
    pub b_est: f64,
    /// Every quotient fell inside `[A - tol, B + tol]`.
    pub within_bounds: bool,
}

/// Draws `trials` random unit coefficient vectors and checks that the
/// discrete Rayleigh quotient `|U c|^2 / |c|^2` stays in `[A, B]` up to a
/// `1e-9`-relative slack. The quotients go through the design matrix
/// directly, not through its factorization, so this cross-checks the
/// eigenvalue route.
pub fn verify_mz(sys: &DesignSystem, trials: usize, seed: u64) -> MzVerification {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = sys.spec.len();
    let mut min_q = f64::INFINITY;
    let mut max_q = f64::NEG_INFINITY;
    for _ in 0..trials {
        let c: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let uc = sys.u.matvec(&c);
        let q = dot(&uc, &uc) / dot(&c, &c);
        min_q = min_q.min(q);
        max_q = max_q.max(q);
    }
    let tol = 1e-9 * sys.b_est;
    MzVerification {
        trials,
        min_quotient: min_q,
        max_quotient: max_q,
        a_est: sys.a_est,
        b_est: sys.b_est,
        within_bounds: trials == 0 || (min_q >= sys.a_est - tol && max_q <= sys.b_est + tol),
    }
}

/// Sum of the layer weights and the containment `A <= sum tau <= B` that
/// testing the frame bounds on the constant polynomial forces.
pub fn weight_sum_bounds(sys: &DesignSystem) -> (f64, bool, bool) {
    let sum_tau = sys.layer.weight_sum();
    let tol = 1e-9 * sys.b_est;
    let lower_ok = sys.a_est <= sum_tau + tol;
    let upper_ok = sum_tau <= sys.b_est + tol;
    (sum_tau, lower_ok, upper_ok)
}
