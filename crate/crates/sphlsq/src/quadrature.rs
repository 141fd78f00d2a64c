//! Least squares quadrature: the rule whose value on samples of `f` equals
//! the exact integral of the fitted polynomial, its certification, and the
//! high-degree reference rule used when measuring integration errors.

use crate::design::DesignSystem;
use crate::error::{Error, Result};
use crate::fitting::fit;
use crate::harmonics::BasisSpec;
use crate::lab::ZonalTestFunction;
use crate::points::{gauss_product_layer, Layer, UnitPoint};
use crate::util::compensated_sum;
use std::sync::Arc;

/// Nodes (shared with the originating layer) and least squares weights.
/// Weights may be negative on ill-conditioned layers; `sum_abs_weights`
/// relative to `sum_weights` is the stability indicator to watch.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub layer: Arc<Layer>,
    pub weights: Vec<f64>,
    pub exactness_degree: u32,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sum_weights(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    pub fn sum_abs_weights(&self) -> f64 {
        compensated_sum(self.weights.iter().map(|w| w.abs()))
    }

    pub fn has_negative_weights(&self) -> bool {
        self.weights.iter().any(|w| *w < 0.0)
    }
}

/// Derives the least squares quadrature weights from a design system:
/// `w_k = sqrt(tau_k) (U R^{-1} e_1)_k`, the constant-coefficient component
/// of the fitted polynomial written out as a linear functional of the
/// samples. Under the probability measure only the constant basis element
/// has a nonzero integral, so applying the rule to samples of `f` gives
/// exactly the integral of the least squares fit of `f`.
pub fn lsq_weights(sys: &DesignSystem) -> Result<QuadratureRule> {
    let m = sys.spec().len();
    let mut e1 = vec![0.0f64; m];
    e1[0] = 1.0;
    let g = sys.factorization().gram_apply_inverse(&e1)?;
    let v = sys.design_matrix().matvec(&g);
    let weights: Vec<f64> = v
        .iter()
        .zip(&sys.layer().weights)
        .map(|(vk, tau)| tau.sqrt() * vk)
        .collect();
    Ok(QuadratureRule {
        layer: Arc::clone(sys.layer()),
        weights,
        exactness_degree: sys.degree(),
    })
}

/// `I(f) = sum_k w_k f(x_k)` with compensated accumulation; the weights may
/// have mixed signs.
pub fn integrate(rule: &QuadratureRule, samples: &[f64]) -> Result<f64> {
    if samples.len() != rule.len() {
        return Err(Error::DimensionMismatch { expected: rule.len(), got: samples.len() });
    }
    Ok(compensated_sum(rule.weights.iter().zip(samples).map(|(w, f)| w * f)))
}

/// Ground-truth integral from the exact product rule: builds the layer at
/// `ceil(degree / 2)`, whose rule integrates every polynomial of degree at
/// most `degree` (indeed `degree + 1`) exactly.
pub fn reference_integral(f: impl Fn(&UnitPoint) -> f64, degree: u32) -> f64 {
    assert!(degree >= 1);
    let layer = gauss_product_layer(degree.div_ceil(2));
    compensated_sum(layer.points.iter().zip(&layer.weights).map(|(x, tau)| tau * f(x)))
}

/// Certification data for a rule: weight sums and the worst residual of the
/// rule applied to the orthonormal basis, where the exact answer is 1 for
/// the constant element and 0 elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleCertificate {
    pub sum_weights: f64,
    pub sum_abs_weights: f64,
    /// Largest degree whose full harmonic block integrates to within the
    /// certification tolerance (1e-9).
    pub exactness_degree: u32,
    /// Worst `|sum_k w_k Y(x_k)|` over the non-constant harmonics up to the
    /// design degree.
    pub max_harmonic_residual: f64,
}

/// Re-derives the exactness degree by applying the rule to every basis
/// element up to the design degree with freshly evaluated harmonics.
pub fn certify(rule: &QuadratureRule) -> Result<RuleCertificate> {
    let n = rule.exactness_degree;
    let spec = BasisSpec::new(2, n);
    let dn = spec.len();
    let mut sums = vec![0.0f64; dn];
    let mut phi = vec![0.0f64; dn];
    for (x, w) in rule.layer.points.iter().zip(&rule.weights) {
        spec.eval_into(x, &mut phi)?;
        for (s, p) in sums.iter_mut().zip(&phi) {
            *s += w * p;
        }
    }
    let mut max_res = 0.0f64;
    let mut exact_upto = n;
    let mut found_failure = false;
    for ell in 0..=n {
        let a = spec.block_start(ell);
        let b = if ell == n { dn } else { spec.block_start(ell + 1) };
        let block_res = sums[a..b]
            .iter()
            .enumerate()
            .map(|(i, s)| if ell == 0 && i == 0 { (s - 1.0).abs() } else { s.abs() })
            .fold(0.0f64, f64::max);
        if ell > 0 {
            max_res = max_res.max(block_res);
        }
        if block_res > 1e-9 && !found_failure {
            exact_upto = ell.saturating_sub(1);
            found_failure = true;
        }
    }
    Ok(RuleCertificate {
        sum_weights: rule.sum_weights(),
        sum_abs_weights: rule.sum_abs_weights(),
        exactness_degree: exact_upto,
        max_harmonic_residual: max_res,
    })
}

/// Measures `|integral(f) - I_n(f)|` against the exact `L_2` fitting error
/// `|f - L_n f|_2`; the first never exceeds the second (up to roundoff)
/// because the rule integrates the fitted polynomial exactly.
///
/// Returns `(err_quad, err_l2)`.
pub fn quadrature_error(
    sys: &DesignSystem,
    f: &ZonalTestFunction,
    reference_degree: u32,
) -> Result<(f64, f64)> {
    let n = sys.degree();
    assert!(reference_degree >= 2 * n + 1, "reference rule must out-resolve the fit");
    let samples: Vec<f64> = sys.layer().points.iter().map(|x| f.eval(x)).collect();
    let rule = lsq_weights(sys)?;
    let i_n = integrate(&rule, &samples)?;
    let truth = reference_integral(|x| f.eval(x), reference_degree);
    let approx = fit(sys, &samples)?;
    let err_l2 = crate::lab::lsq_error_exact(f, &approx)?;
    Ok(((truth - i_n).abs(), err_l2))
}
