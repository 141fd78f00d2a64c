//! Test functions with exactly known harmonic coefficients, exact error
//! measurement by Parseval, and the sweep drivers that measure convergence
//! rates and operator-norm growth over a family of layers.

use crate::design::{build_design, DesignSystem};
use crate::error::{Error, Result};
use crate::fitting::{fit, lebesgue_constant, Approximant};
use crate::harmonics::BasisSpec;
use crate::points::{fibonacci_layer, gauss_product_layer, perturb_layer, Layer, UnitPoint};
use crate::quadrature::{integrate, lsq_weights};
use crate::util::compensated_sum;
use std::sync::Arc;

/// Zonal series `f(x) = sum_{l<=L} a_l (2l + 1) P_l(x . p)` with the power
/// law `a_l = (1 + l)^(-t)` about a pole `p`.
///
/// Its harmonic coefficients are known exactly: the coefficient against any
/// basis element of degree `l` is `a_l` times that element's value at the
/// pole, and the block energy at degree `l` is `a_l^2 (2l + 1)`. That makes
/// `L_2` and Sobolev norms, truncation errors, and fitting errors computable
/// by plain coefficient sums with no cubature noise.
#[derive(Debug, Clone)]
pub struct ZonalTestFunction {
    pole: UnitPoint,
    decay: f64,
    l_max: u32,
    coeffs: Vec<f64>,
}

impl ZonalTestFunction {
    /// `decay` must exceed 1.5 so the untruncated law lies in `L_2` with
    /// room to spare; the realized smoothness index is `decay - 1`.
    pub fn new(pole: UnitPoint, decay: f64, l_max: u32) -> Self {
        assert!(decay > 1.5, "decay exponent must exceed 1.5");
        let coeffs = (0..=l_max).map(|l| (1.0 + f64::from(l)).powf(-decay)).collect();
        Self { pole, decay, l_max, coeffs }
    }

    pub fn pole(&self) -> UnitPoint {
        self.pole
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    /// `a_l`, zero beyond the truncation.
    pub fn coefficient(&self, ell: u32) -> f64 {
        self.coeffs.get(ell as usize).copied().unwrap_or(0.0)
    }

    /// Smoothness index realized by the power law at d = 2: `decay - 1`.
    pub fn effective_smoothness(&self) -> f64 {
        self.decay - 1.0
    }

    /// The exact integral against the probability measure: only the constant
    /// harmonic survives, so it is `a_0 = 1`.
    pub fn exact_integral(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn eval(&self, x: &UnitPoint) -> f64 {
        self.sum_range(x, 0, self.l_max)
    }

    /// Evaluates the degree-`n` truncation (the orthogonal projection).
    pub fn eval_truncated(&self, n: u32, x: &UnitPoint) -> f64 {
        self.sum_range(x, 0, n.min(self.l_max))
    }

    /// Evaluates the tail `f - S_n f` pointwise in a single recurrence pass.
    pub fn eval_tail(&self, n: u32, x: &UnitPoint) -> f64 {
        if n >= self.l_max {
            return 0.0;
        }
        self.sum_range(x, n + 1, self.l_max)
    }

    fn sum_range(&self, x: &UnitPoint, lo: u32, hi: u32) -> f64 {
        let u = x.dot(&self.pole).clamp(-1.0, 1.0);
        let mut sum = 0.0f64;
        let mut prev = 1.0f64; // P_0
        let mut cur = u; // P_1
        if lo == 0 {
            sum += self.coeffs[0];
        }
        if hi == 0 {
            return sum;
        }
        if lo <= 1 {
            sum += self.coeffs[1] * 3.0 * u;
        }
        for l in 2..=hi {
            let lf = f64::from(l);
            let next = ((2.0 * lf - 1.0) * u * cur - (lf - 1.0) * prev) / lf;
            prev = cur;
            cur = next;
            if l >= lo {
                sum += self.coeffs[l as usize] * (2.0 * lf + 1.0) * cur;
            }
        }
        sum
    }

    /// Exact harmonic coefficients of the degree-`n` truncation, in the
    /// basis ordering: block `l` is `a_l` times the basis block at the pole.
    pub fn coefficients_upto(&self, n: u32) -> Vec<f64> {
        let spec = BasisSpec::new(2, n);
        let mut phi = spec.eval(&self.pole).expect("S^2 basis evaluation");
        for ell in 0..=n {
            let a = self.coefficient(ell);
            let start = (ell * ell) as usize;
            let end = ((ell + 1) * (ell + 1)) as usize;
            for v in phi[start..end].iter_mut() {
                *v *= a;
            }
        }
        phi
    }

    /// Sobolev norm of the truncated series:
    /// `(sum_l (1 + l(l+1))^sigma a_l^2 (2l + 1))^(1/2)`, exact summation.
    pub fn sobolev_norm(&self, sigma: f64) -> f64 {
        assert!(sigma >= 0.0);
        compensated_sum((0..=self.l_max).map(|l| {
            let lf = f64::from(l);
            (1.0 + lf * (lf + 1.0)).powf(sigma)
                * self.coeffs[l as usize].powi(2)
                * (2.0 * lf + 1.0)
        }))
        .sqrt()
    }
}

/// Exact `|f - S_n f|_2` via Parseval: the square root of the coefficient
/// energy strictly above degree `n` (zero once `n` reaches the truncation).
pub fn projection_error_exact(f: &ZonalTestFunction, n: u32) -> f64 {
    if n >= f.l_max {
        return 0.0;
    }
    compensated_sum((n + 1..=f.l_max).map(|l| {
        let lf = f64::from(l);
        f.coefficient(l).powi(2) * (2.0 * lf + 1.0)
    }))
    .sqrt()
}

/// Exact `|f - L_n f|_2` for a fitted polynomial: the truncation tail plus
/// the coefficient difference below the fitting degree, no cubature.
pub fn lsq_error_exact(f: &ZonalTestFunction, approx: &Approximant) -> Result<f64> {
    let n = approx.degree();
    let truth = f.coefficients_upto(n);
    if truth.len() != approx.coefficients.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: approx.coefficients.len(),
        });
    }
    let diff_sq = compensated_sum(
        truth
            .iter()
            .zip(&approx.coefficients)
            .map(|(c, a)| (c - a) * (c - a)),
    );
    let tail = projection_error_exact(f, n);
    Ok((tail * tail + diff_sq).sqrt())
}

/// Layer generator families the sweeps iterate over.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerFamily {
    /// Exact product grids; condition number 1 by construction.
    Gauss,
    /// Equal-weight Fibonacci spirals with the given oversampling factor.
    Fibonacci { oversampling: f64 },
    /// A base family perturbed by random tangent displacements of geodesic
    /// length up to `epsilon / (n + 1)`.
    Perturbed { base: Box<LayerFamily>, epsilon: f64, seed: u64 },
}

impl LayerFamily {
    pub fn perturbed_gauss(epsilon: f64, seed: u64) -> Self {
        LayerFamily::Perturbed { base: Box::new(LayerFamily::Gauss), epsilon, seed }
    }

    pub fn layer(&self, n: u32) -> Layer {
        match self {
            LayerFamily::Gauss => gauss_product_layer(n),
            LayerFamily::Fibonacci { oversampling } => fibonacci_layer(n, *oversampling),
            LayerFamily::Perturbed { base, epsilon, seed } => {
                perturb_layer(&base.layer(n), *epsilon, *seed)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            LayerFamily::Gauss => "gauss".to_string(),
            LayerFamily::Fibonacci { oversampling } => format!("fibonacci c={oversampling}"),
            LayerFamily::Perturbed { base, epsilon, seed } => {
                format!("perturbed eps={epsilon} seed={seed} of {}", base.label())
            }
        }
    }
}

/// Per-degree measurements of one convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: u32,
    pub l_n: usize,
    pub kappa: f64,
    pub a_est: f64,
    pub b_est: f64,
    /// Exact `|f - L_n f|_2`.
    pub err_l2: f64,
    /// Exact `|f - S_n f|_2`.
    pub err_sn: f64,
    /// `|integral of f - I_n(f)|` against the exact integral.
    pub err_quad: f64,
    /// `|S_n f - L_n f|_2`, the aliasing part of the error.
    pub stab_lhs: f64,
    /// `|f - S_n f|_(n)`, the discrete norm of the truncation tail.
    pub stab_rhs: f64,
    /// Operator-norm estimate, when a grid resolution was requested.
    pub lebesgue: Option<f64>,
}

/// Ordinary least squares fit of `log err` against `log n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; the reported confidence band is
    /// `slope +/- 1.96 std_error`.
    pub std_error: f64,
    pub points: usize,
}

/// Error floor below which points are dropped from slope fits; fitting the
/// roundoff plateau would corrupt the exponent.
pub const SLOPE_FLOOR: f64 = 1e3 * f64::EPSILON;

/// Fits `log y = slope log x + intercept`. Returns `None` with fewer than
/// two usable points.
pub fn fit_loglog(pairs: &[(f64, f64)]) -> Option<SlopeFit> {
    let usable: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > SLOPE_FLOOR)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let k = usable.len();
    if k < 2 {
        return None;
    }
    let kf = k as f64;
    let mean_x = usable.iter().map(|(x, _)| x).sum::<f64>() / kf;
    let mean_y = usable.iter().map(|(_, y)| y).sum::<f64>() / kf;
    let sxx: f64 = usable.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let std_error = if k > 2 {
        let rss: f64 = usable
            .iter()
            .map(|(x, y)| (y - slope * x - intercept).powi(2))
            .sum();
        (rss / (kf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(SlopeFit { slope, intercept, std_error, points: k })
}

/// One convergence sweep: per-degree errors for one test function over one
/// layer family, plus fitted log-log slopes.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub family: String,
    pub function: String,
    pub rows: Vec<SweepRow>,
    /// Degrees the family could not support, with the reason.
    pub gaps: Vec<(u32, String)>,
    pub slope_l2: Option<SlopeFit>,
    pub slope_sn: Option<SlopeFit>,
    pub slope_quad: Option<SlopeFit>,
}

/// Runs [`convergence_sweep_multi`] for a single test function.
pub fn convergence_sweep(
    family: &LayerFamily,
    f: &ZonalTestFunction,
    n_list: &[u32],
) -> Result<ConvergenceReport> {
    let mut reports = convergence_sweep_multi(family, &[f], n_list, None)?;
    Ok(reports.remove(0))
}

/// Builds each degree's design system once and measures every test function
/// on it: exact `L_2` error, exact truncation error, quadrature error
/// against the exact integral, and the two sides of the aliasing bound
/// `|S_n f - L_n f|_2 <= A^{-1} B^{1/2} |f - S_n f|_(n)`.
///
/// Degrees the family cannot support are recorded as gaps, not errors.
/// When `lebesgue_grid` is set, the operator-norm estimate at that grid
/// resolution is attached to every row.
///
/// Fitted slopes reflect the coefficient law only while the probed degrees
/// stay at or below half the truncation; past that the sweep still runs
/// (errors eventually hit the roundoff floor and drop out of the fit).
pub fn convergence_sweep_multi(
    family: &LayerFamily,
    fs: &[&ZonalTestFunction],
    n_list: &[u32],
    lebesgue_grid: Option<u32>,
) -> Result<Vec<ConvergenceReport>> {
    let mut rows: Vec<Vec<SweepRow>> = vec![Vec::new(); fs.len()];
    let mut gaps: Vec<(u32, String)> = Vec::new();

    for &n in n_list {
        let layer = Arc::new(family.layer(n));
        let sys = match build_design(Arc::clone(&layer), n) {
            Ok(sys) => sys,
            Err(Error::MzDeficient(reason)) => {
                gaps.push((n, reason.to_string()));
                continue;
            }
            Err(e) => return Err(e),
        };
        let rule = lsq_weights(&sys)?;
        let lebesgue = match lebesgue_grid {
            Some(g) => Some(lebesgue_constant(&sys, g)?),
            None => None,
        };
        for (fi, f) in fs.iter().enumerate() {
            rows[fi].push(measure_row(&sys, f, &rule, lebesgue)?);
        }
    }

    Ok(fs
        .iter()
        .zip(rows)
        .map(|(f, rows)| {
            let pairs =
                |sel: fn(&SweepRow) -> f64| -> Vec<(f64, f64)> {
                    rows.iter().map(|r| (f64::from(r.n), sel(r))).collect()
                };
            ConvergenceReport {
                family: family.label(),
                function: format!(
                    "zonal t={} L={} pole=({:.3},{:.3},{:.3})",
                    f.decay(),
                    f.l_max(),
                    f.pole().coords()[0],
                    f.pole().coords()[1],
                    f.pole().coords()[2]
                ),
                slope_l2: fit_loglog(&pairs(|r| r.err_l2)),
                slope_sn: fit_loglog(&pairs(|r| r.err_sn)),
                slope_quad: fit_loglog(&pairs(|r| r.err_quad)),
                rows,
                gaps: gaps.clone(),
            }
        })
        .collect())
}

fn measure_row(
    sys: &DesignSystem,
    f: &ZonalTestFunction,
    rule: &crate::quadrature::QuadratureRule,
    lebesgue: Option<f64>,
) -> Result<SweepRow> {
    let n = sys.degree();
    let layer = sys.layer();
    let samples: Vec<f64> = layer.points.iter().map(|x| f.eval(x)).collect();
    let approx = fit(sys, &samples)?;

    let truth = f.coefficients_upto(n);
    let stab_lhs = compensated_sum(
        truth
            .iter()
            .zip(&approx.coefficients)
            .map(|(c, a)| (c - a) * (c - a)),
    )
    .sqrt();
    let err_sn = projection_error_exact(f, n);
    let err_l2 = (err_sn * err_sn + stab_lhs * stab_lhs).sqrt();

    let i_n = integrate(rule, &samples)?;
    let err_quad = (f.exact_integral() - i_n).abs();

    let stab_rhs = compensated_sum(layer.points.iter().zip(&layer.weights).map(|(x, tau)| {
        let tail = f.eval_tail(n, x);
        tau * tail * tail
    }))
    .sqrt();

    Ok(SweepRow {
        n,
        l_n: layer.len(),
        kappa: sys.kappa(),
        a_est: sys.a_est(),
        b_est: sys.b_est(),
        err_l2,
        err_sn,
        err_quad,
        stab_lhs,
        stab_rhs,
        lebesgue,
    })
}

/// Per-degree operator-norm estimates with their refinement sequences.
#[derive(Debug, Clone)]
pub struct LebesgueRow {
    pub n: u32,
    pub l_n: usize,
    pub kappa: f64,
    /// `(grid resolution, estimate)` at increasing resolutions; the last
    /// entry is the reported value.
    pub refinements: Vec<(u32, f64)>,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct LebesgueReport {
    pub family: String,
    pub rows: Vec<LebesgueRow>,
    pub gaps: Vec<(u32, String)>,
    /// Fitted growth exponent of the estimate against `n` (degrees >= 1).
    pub exponent: Option<SlopeFit>,
    /// Whether the exponent lies in `[(d-1)/2 - 0.3, d/2 + 0.3]`, the window
    /// bracketing the proven growth range for bounded condition numbers.
    pub exponent_in_window: bool,
}

/// Grid resolution giving at least `40 d_n` scan nodes.
pub fn default_lebesgue_resolution(dn: usize) -> u32 {
    ((20.0 * dn as f64).sqrt().ceil() as u32).max(4)
}

/// Measures the operator-norm estimate over the family at each degree,
/// scanning three nested grid refinements (the requested resolution and two
/// coarsenings) so reports show the stabilization, and fits the growth
/// exponent on the finest values.
pub fn lebesgue_sweep(
    family: &LayerFamily,
    n_list: &[u32],
    grid_resolution: Option<u32>,
) -> Result<LebesgueReport> {
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    for &n in n_list {
        let layer = Arc::new(family.layer(n));
        let sys = match build_design(layer, n) {
            Ok(sys) => sys,
            Err(Error::MzDeficient(reason)) => {
                gaps.push((n, reason.to_string()));
                continue;
            }
            Err(e) => return Err(e),
        };
        let finest = grid_resolution.unwrap_or_else(|| default_lebesgue_resolution(sys.spec().len()));
        let mut levels = vec![(finest / 4).max(2), (finest / 2).max(3), finest];
        levels.dedup();
        let mut refinements = Vec::with_capacity(levels.len());
        for g in levels {
            refinements.push((g, lebesgue_constant(&sys, g)?));
        }
        let value = refinements.last().expect("at least one refinement").1;
        rows.push(LebesgueRow { n, l_n: sys.layer().len(), kappa: sys.kappa(), refinements, value });
    }
    let pairs: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.n >= 1).map(|r| (f64::from(r.n), r.value)).collect();
    let exponent = fit_loglog(&pairs);
    let exponent_in_window = exponent
        .map(|e| e.slope >= 0.5 - 0.3 && e.slope <= 1.0 + 0.3)
        .unwrap_or(false);
    Ok(LebesgueReport { family: family.label(), rows, gaps, exponent, exponent_in_window })
}
