//! Condensed invariant battery behind the CLI `selftest` subcommand: a
//! quick pass over the identities every healthy build must satisfy.

use crate::design::{build_design, verify_mz, weight_sum_bounds};
use crate::fitting::{discrete_kernel, fit, hyperinterpolate, lebesgue_constant, Approximant};
use crate::harmonics::{gegenbauer_eval, kernel_value, BasisSpec};
use crate::lab::{projection_error_exact, ZonalTestFunction};
use crate::points::{fibonacci_layer, gauss_product_layer, perturb_layer, UnitPoint};
use crate::quadrature::{certify, integrate, lsq_weights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

fn random_unit(rng: &mut ChaCha8Rng) -> UnitPoint {
    loop {
        let v = [
            rng.gen_range(-1.0f64..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 {
            return UnitPoint::from_unnormalized(v[0], v[1], v[2]);
        }
    }
}

/// Runs the battery; every entry carries a pass/fail and a short detail
/// line. The CLI prints one line per entry and exits nonzero on any failure.
pub fn run() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);

    // Kernel and basis identities.
    {
        let n = 16;
        let spec = BasisSpec::new(2, n);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let x = random_unit(&mut rng);
            let y = random_unit(&mut rng);
            let phix = spec.eval(&x).unwrap();
            let phiy = spec.eval(&y).unwrap();
            let u = x.dot(&y);
            for ell in 0..=n {
                let a = (ell * ell) as usize;
                let b = ((ell + 1) * (ell + 1)) as usize;
                let block: f64 =
                    phix[a..b].iter().zip(&phiy[a..b]).map(|(p, q)| p * q).sum();
                let want = (2.0 * f64::from(ell) + 1.0) * gegenbauer_eval(0.5, ell, u).unwrap();
                worst = worst.max((block - want).abs());
            }
        }
        out.push(check(
            "addition-theorem residual (l <= 16)",
            worst <= 1e-10,
            format!("max residual {worst:.3e}"),
        ));
        let diag = kernel_value(2, n, 1.0).unwrap();
        let want = f64::from((n + 1) * (n + 1));
        out.push(check(
            "kernel diagonal equals dimension",
            (diag - want).abs() <= 1e-9 * want,
            format!("E_n(x,x) = {diag}, dim = {want}"),
        ));
    }

    // Exact product layers: unit condition number, fit == hyperinterpolation.
    {
        let n = 5;
        let layer = gauss_product_layer(n);
        let sys = build_design(Arc::new(layer.clone()), n).unwrap();
        let ok_frame = (sys.a_est() - 1.0).abs() <= 1e-9 && (sys.b_est() - 1.0).abs() <= 1e-9;
        out.push(check(
            "product grid has A = B = 1",
            ok_frame,
            format!("A = {:.12}, B = {:.12}", sys.a_est(), sys.b_est()),
        ));
        let samples: Vec<f64> =
            layer.points.iter().map(|x| (1.0 + x.coords()[2]).sin()).collect();
        let fitted = fit(&sys, &samples).unwrap();
        let hyper = hyperinterpolate(&layer, n, &samples).unwrap();
        let diff = fitted
            .coefficients
            .iter()
            .zip(&hyper.coefficients)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        out.push(check(
            "fit equals hyperinterpolation on exact layers",
            diff <= 1e-9,
            format!("max coefficient gap {diff:.3e}"),
        ));
        let report = verify_mz(&sys, 50, 777);
        out.push(check(
            "random Rayleigh quotients inside [A, B]",
            report.within_bounds,
            format!("observed [{:.9}, {:.9}]", report.min_quotient, report.max_quotient),
        ));
        let (sum_tau, lo, hi) = weight_sum_bounds(&sys);
        out.push(check(
            "weight sum bracketed by frame bounds",
            lo && hi && (sum_tau - 1.0).abs() <= 1e-12,
            format!("sum tau = {sum_tau:.15}"),
        ));
    }

    // Projection property on an oversampled spiral.
    {
        let n = 4;
        let sys = build_design(Arc::new(fibonacci_layer(n, 2.0)), n).unwrap();
        let coeffs: Vec<f64> =
            (0..sys.spec().len()).map(|_| rng.gen_range(-1.0f64..1.0)).collect();
        let p = Approximant::new(sys.spec(), coeffs.clone()).unwrap();
        let samples: Vec<f64> = sys.layer().points.iter().map(|x| p.evaluate(x)).collect();
        let refit = fit(&sys, &samples).unwrap();
        let diff = refit
            .coefficients
            .iter()
            .zip(&coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        out.push(check(
            "fitting reproduces polynomials",
            diff <= 1e-9,
            format!("max coefficient error {diff:.3e}"),
        ));
    }

    // Quadrature structure.
    {
        let n = 6;
        let sys = build_design(Arc::new(perturb_layer(&gauss_product_layer(n), 0.3, 42)), n)
            .unwrap();
        let rule = lsq_weights(&sys).unwrap();
        let cert = certify(&rule).unwrap();
        out.push(check(
            "least squares rule exact of full degree",
            cert.exactness_degree == n
                && (cert.sum_weights - 1.0).abs() <= 1e-10
                && cert.max_harmonic_residual <= 1e-9,
            format!(
                "sum w = {:.12}, residual {:.3e}",
                cert.sum_weights, cert.max_harmonic_residual
            ),
        ));
        let ones = vec![1.0; rule.len()];
        let one = integrate(&rule, &ones).unwrap();
        out.push(check(
            "rule integrates constants to one",
            (one - 1.0).abs() <= 1e-10,
            format!("I(1) = {one:.15}"),
        ));
        // Christoffel containment at random points.
        let mut ok = true;
        for _ in 0..10 {
            let x = random_unit(&mut rng);
            let e = kernel_value(2, n, 1.0).unwrap();
            let d = discrete_kernel(&sys, &x, &x).unwrap();
            if !(e / sys.b_est() <= d + 1e-8 * d && d <= e / sys.a_est() + 1e-8 * d) {
                ok = false;
            }
        }
        out.push(check(
            "discrete kernel diagonal inside Christoffel band",
            ok,
            format!("kappa = {:.6}", sys.kappa()),
        ));
    }

    // Error chain on a smooth zonal function.
    {
        let n = 8;
        let f = ZonalTestFunction::new(UnitPoint::from_unnormalized(0.3, 0.1, 0.95), 3.0, 32);
        let sys = build_design(Arc::new(gauss_product_layer(n)), n).unwrap();
        let samples: Vec<f64> = sys.layer().points.iter().map(|x| f.eval(x)).collect();
        let approx = fit(&sys, &samples).unwrap();
        let err_l2 = crate::lab::lsq_error_exact(&f, &approx).unwrap();
        let rule = lsq_weights(&sys).unwrap();
        let i_n = integrate(&rule, &samples).unwrap();
        let err_quad = (f.exact_integral() - i_n).abs();
        out.push(check(
            "quadrature error below L2 error",
            err_quad <= err_l2 + 1e-9,
            format!("{err_quad:.3e} <= {err_l2:.3e}"),
        ));
        let err_sn = projection_error_exact(&f, n);
        out.push(check(
            "truncation error below total error",
            err_sn <= err_l2 + 1e-12,
            format!("{err_sn:.3e} <= {err_l2:.3e}"),
        ));
    }

    // Operator-norm estimate at degree zero is forced to 1.
    {
        let sys = build_design(Arc::new(gauss_product_layer(0)), 0).unwrap();
        let v = lebesgue_constant(&sys, 12).unwrap();
        out.push(check(
            "degree-zero operator norm equals one",
            (v - 1.0).abs() <= 1e-12,
            format!("estimate {v:.15}"),
        ));
    }

    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn battery_passes() {
        for r in super::run() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
