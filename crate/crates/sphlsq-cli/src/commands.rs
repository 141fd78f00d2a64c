//! Subcommand implementations.

use crate::errors::{CmdError, CmdResult};
use crate::formats;
use crate::report::{self, envelope, ConvergenceJson, SlopeJson};
use crate::{EvalArgs, FamilyArgs, FitArgs, GenArgs, LebesgueArgs, MzArgs, QuadArgs, SweepArgs, ZonalArgs};
use serde::Serialize;
use sphlsq::design::{build_design, verify_mz, weight_sum_bounds, DesignSystem};
use sphlsq::fitting::fit as fit_system;
use sphlsq::lab::{
    convergence_sweep_multi, lebesgue_sweep, LayerFamily, LebesgueReport, ZonalTestFunction,
};
use sphlsq::points::{Layer, UnitPoint};
use sphlsq::quadrature::{certify, lsq_weights};
use sphlsq::Error as CoreError;
use std::path::Path;
use std::sync::Arc;

fn parse_pole(text: &str) -> CmdResult<UnitPoint> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CmdError::validation(format!("point must be `x,y,z`, got `{text}`")));
    }
    let mut v = [0.0f64; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CmdError::validation(format!("bad coordinate `{part}`")))?;
    }
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if norm == 0.0 {
        return Err(CmdError::validation("point must be nonzero".to_string()));
    }
    Ok(UnitPoint::from_unnormalized(v[0], v[1], v[2]))
}

fn parse_n_list(text: &str) -> CmdResult<Vec<u32>> {
    let mut out = Vec::new();
    for tok in text.split(',') {
        out.push(
            tok.trim()
                .parse::<u32>()
                .map_err(|_| CmdError::validation(format!("bad degree `{tok}` in list")))?,
        );
    }
    if out.is_empty() {
        return Err(CmdError::validation("degree list is empty".to_string()));
    }
    Ok(out)
}

impl FamilyArgs {
    fn to_family(&self) -> CmdResult<LayerFamily> {
        let base = match self.family.as_str() {
            "gauss" => LayerFamily::Gauss,
            "fibonacci" => {
                if !(self.oversampling > 0.0) {
                    return Err(CmdError::validation("oversampling must be positive"));
                }
                LayerFamily::Fibonacci { oversampling: self.oversampling }
            }
            other => {
                return Err(CmdError::validation(format!(
                    "unknown family `{other}` (expected gauss or fibonacci)"
                )))
            }
        };
        if self.perturb < 0.0 {
            return Err(CmdError::validation("perturbation scale must be nonnegative"));
        }
        Ok(if self.perturb > 0.0 {
            LayerFamily::Perturbed { base: Box::new(base), epsilon: self.perturb, seed: self.seed }
        } else {
            base
        })
    }
}

impl ZonalArgs {
    fn to_function(&self) -> CmdResult<ZonalTestFunction> {
        if !(self.t > 1.5) {
            return Err(CmdError::validation("decay exponent t must exceed 1.5"));
        }
        Ok(ZonalTestFunction::new(parse_pole(&self.pole)?, self.t, self.lmax))
    }
}

fn build(layer: Layer, n: u32) -> CmdResult<DesignSystem> {
    build_design(Arc::new(layer), n).map_err(CmdError::from)
}

pub fn gen(args: GenArgs) -> CmdResult<()> {
    let family = args.family.to_family()?;
    let layer = family.layer(args.n);
    formats::write_layer(&args.out, &layer)?;
    println!(
        "wrote layer `{}`: family={} n={} points={} sum_tau={}",
        args.out.display(),
        family.label(),
        args.n,
        layer.len(),
        formats::fmt_f64(layer.weight_sum())
    );
    Ok(())
}

#[derive(Serialize)]
struct MzJson {
    d: usize,
    n: u32,
    l_n: usize,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    sum_tau: f64,
    rank_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    deficiency: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verify: Option<MzVerifyJson>,
}

#[derive(Serialize)]
struct MzVerifyJson {
    trials: usize,
    min_quotient: f64,
    max_quotient: f64,
    within_bounds: bool,
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult<()> {
    match out {
        Some(path) => formats::atomic_write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn mz(args: MzArgs) -> CmdResult<()> {
    let layer = formats::read_layer(&args.layer)?;
    let sum_tau = layer.weight_sum();
    let l_n = layer.len();
    let config = &args;
    match build_design(Arc::new(layer), args.n) {
        Ok(sys) => {
            let verify = if args.trials > 0 {
                let v = verify_mz(&sys, args.trials, args.seed);
                Some(MzVerifyJson {
                    trials: v.trials,
                    min_quotient: v.min_quotient,
                    max_quotient: v.max_quotient,
                    within_bounds: v.within_bounds,
                })
            } else {
                None
            };
            let (sum_tau, lower_ok, upper_ok) = weight_sum_bounds(&sys);
            let result = MzJson {
                d: 2,
                n: args.n,
                l_n,
                a: Some(sys.a_est()),
                b: Some(sys.b_est()),
                kappa: Some(sys.kappa()),
                sum_tau,
                rank_ok: lower_ok && upper_ok,
                deficiency: None,
                verify,
            };
            emit(args.out.as_deref(), &envelope("mz", config, result))
        }
        Err(CoreError::MzDeficient(reason)) => {
            let result = MzJson {
                d: 2,
                n: args.n,
                l_n,
                a: None,
                b: None,
                kappa: None,
                sum_tau,
                rank_ok: false,
                deficiency: Some(reason.to_string()),
                verify: None,
            };
            emit(args.out.as_deref(), &envelope("mz", config, result))?;
            Err(CmdError::Numerical(reason.to_string()))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct FitJson {
    d: usize,
    n: u32,
    l_n: usize,
    kappa: f64,
    coefficient_norm: f64,
    /// Weighted discrete residual of the fit at the sample points.
    discrete_residual: f64,
    /// Exact L2 error by Parseval; present only for the built-in source.
    #[serde(skip_serializing_if = "Option::is_none")]
    err_l2_exact: Option<f64>,
}

pub fn fit(args: FitArgs) -> CmdResult<()> {
    let layer = formats::read_layer(&args.layer)?;
    let zonal = match args.values {
        Some(_) => None,
        None => Some(args.zonal.to_function()?),
    };
    let samples: Vec<f64> = match (&args.values, &zonal) {
        (Some(path), _) => {
            let vals = formats::read_values(path)?;
            if vals.len() != layer.len() {
                return Err(CmdError::validation(format!(
                    "value file has {} entries, layer has {} points",
                    vals.len(),
                    layer.len()
                )));
            }
            vals
        }
        (None, Some(f)) => layer.points.iter().map(|x| f.eval(x)).collect(),
        (None, None) => unreachable!(),
    };
    let sys = build(layer, args.n)?;
    let approx = fit_system(&sys, &samples).map_err(CmdError::from)?;
    formats::write_approximant(&args.out, &approx)?;
    if let Some(report_path) = &args.report {
        let discrete_residual = sys
            .layer()
            .points
            .iter()
            .zip(&sys.layer().weights)
            .zip(&samples)
            .map(|((x, tau), f)| tau * (f - approx.evaluate(x)).powi(2))
            .sum::<f64>()
            .sqrt();
        let err_l2_exact = zonal
            .as_ref()
            .map(|f| sphlsq::lab::lsq_error_exact(f, &approx))
            .transpose()
            .map_err(CmdError::from)?;
        let result = FitJson {
            d: 2,
            n: args.n,
            l_n: sys.layer().len(),
            kappa: sys.kappa(),
            coefficient_norm: approx.l2_norm(),
            discrete_residual,
            err_l2_exact,
        };
        formats::atomic_write(report_path, &envelope("fit", &args, result))?;
    }
    println!(
        "wrote approximant `{}`: n={} coefficients={}",
        args.out.display(),
        args.n,
        approx.coefficients.len()
    );
    Ok(())
}

pub fn eval(args: EvalArgs) -> CmdResult<()> {
    let approx = formats::read_approximant(&args.approx)?;
    let mut did_something = false;
    if let Some(point) = &args.point {
        let x = parse_pole(point)?;
        println!("{}", formats::fmt_f64(approx.evaluate(&x)));
        did_something = true;
    }
    if let Some(points_path) = &args.points {
        let out = args.out.as_ref().ok_or_else(|| {
            CmdError::validation("--points requires --out for the value file".to_string())
        })?;
        let pts = formats::read_points(points_path)?;
        let mut text = String::new();
        for p in &pts {
            text.push_str(&formats::fmt_f64(approx.evaluate(p)));
            text.push('\n');
        }
        formats::atomic_write(out, &text)?;
        println!("wrote {} values to `{}`", pts.len(), out.display());
        did_something = true;
    }
    if !did_something {
        return Err(CmdError::validation("provide --point or --points".to_string()));
    }
    Ok(())
}

#[derive(Serialize)]
struct QuadJson {
    d: usize,
    n: u32,
    l_n: usize,
    sum_w: f64,
    sum_abs_w: f64,
    exactness_degree: u32,
    max_harmonic_residual: f64,
    has_negative_weights: bool,
    /// `I_n` applied to the requested sample source.
    #[serde(skip_serializing_if = "Option::is_none")]
    integral: Option<f64>,
    /// Gap to the exact integral; present only for the built-in source.
    #[serde(skip_serializing_if = "Option::is_none")]
    integral_error_exact: Option<f64>,
}

pub fn quad(args: QuadArgs) -> CmdResult<()> {
    let layer = formats::read_layer(&args.layer)?;
    let sys = build(layer, args.n)?;
    let rule = lsq_weights(&sys).map_err(CmdError::from)?;
    let cert = certify(&rule).map_err(CmdError::from)?;
    formats::write_rule(&args.out, &rule)?;
    let mut integral = None;
    let mut integral_error_exact = None;
    if let Some(path) = &args.values {
        let vals = formats::read_values(path)?;
        integral =
            Some(sphlsq::quadrature::integrate(&rule, &vals).map_err(CmdError::from)?);
    } else if args.integrate {
        let f = args.zonal.to_function()?;
        let samples: Vec<f64> = sys.layer().points.iter().map(|x| f.eval(x)).collect();
        let value = sphlsq::quadrature::integrate(&rule, &samples).map_err(CmdError::from)?;
        integral = Some(value);
        integral_error_exact = Some((f.exact_integral() - value).abs());
    }
    let result = QuadJson {
        d: 2,
        n: args.n,
        l_n: rule.len(),
        sum_w: cert.sum_weights,
        sum_abs_w: cert.sum_abs_weights,
        exactness_degree: cert.exactness_degree,
        max_harmonic_residual: cert.max_harmonic_residual,
        has_negative_weights: rule.has_negative_weights(),
        integral,
        integral_error_exact,
    };
    let text = envelope("quad", &args, result);
    match &args.report {
        Some(path) => formats::atomic_write(path, &text)?,
        None => print!("{text}"),
    }
    println!(
        "wrote rule `{}`: n={} nodes={} exactness={}",
        args.out.display(),
        args.n,
        rule.len(),
        cert.exactness_degree
    );
    Ok(())
}

#[derive(Serialize)]
struct LebesgueRowJson {
    n: u32,
    l_n: usize,
    kappa: f64,
    refinements: Vec<(u32, f64)>,
    value: f64,
}

#[derive(Serialize)]
struct LebesgueJson {
    family: String,
    rows: Vec<LebesgueRowJson>,
    gaps: Vec<(u32, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exponent: Option<SlopeJson>,
    exponent_in_window: bool,
}

impl From<&LebesgueReport> for LebesgueJson {
    fn from(rep: &LebesgueReport) -> Self {
        LebesgueJson {
            family: rep.family.clone(),
            rows: rep
                .rows
                .iter()
                .map(|r| LebesgueRowJson {
                    n: r.n,
                    l_n: r.l_n,
                    kappa: r.kappa,
                    refinements: r.refinements.clone(),
                    value: r.value,
                })
                .collect(),
            gaps: rep.gaps.clone(),
            exponent: rep.exponent.map(SlopeJson::from),
            exponent_in_window: rep.exponent_in_window,
        }
    }
}

pub fn lebesgue(args: LebesgueArgs) -> CmdResult<()> {
    let family = args.family.to_family()?;
    let n_list = parse_n_list(&args.n_list)?;
    let rep = lebesgue_sweep(&family, &n_list, args.grid_resolution).map_err(CmdError::from)?;
    let text = envelope("lebesgue", &args, LebesgueJson::from(&rep));
    formats::atomic_write(&args.out, &text)?;
    println!(
        "wrote operator-norm report `{}`: {} degrees, exponent {}",
        args.out.display(),
        rep.rows.len(),
        rep.exponent.map(|e| format!("{:.3}", e.slope)).unwrap_or_else(|| "n/a".into())
    );
    Ok(())
}

pub fn sweep(args: SweepArgs) -> CmdResult<()> {
    let family = args.family.to_family()?;
    let n_list = parse_n_list(&args.n_list)?;
    let f = args.zonal.to_function()?;
    let max_n = n_list.iter().copied().max().unwrap_or(0);
    if 2 * max_n > f.l_max() {
        return Err(CmdError::validation(format!(
            "max degree {max_n} exceeds half the truncation {}; raise --lmax",
            f.l_max()
        )));
    }
    let reports = convergence_sweep_multi(&family, &[&f], &n_list, args.lebesgue_grid)
        .map_err(CmdError::from)?;
    let rep = &reports[0];
    formats::atomic_write(&args.out_csv, &report::sweep_csv(&rep.rows))?;
    formats::atomic_write(&args.out_json, &envelope("sweep", &args, ConvergenceJson::from(rep)))?;
    println!(
        "wrote sweep `{}` + `{}`: {} degrees, {} gaps, l2 slope {}",
        args.out_csv.display(),
        args.out_json.display(),
        rep.rows.len(),
        rep.gaps.len(),
        rep.slope_l2.map(|s| format!("{:.3}", s.slope)).unwrap_or_else(|| "n/a".into())
    );
    Ok(())
}

pub fn selftest() -> CmdResult<()> {
    let results = sphlsq::selftest::run();
    let mut failures = 0;
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} ({})", r.name, r.detail);
        if !r.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        return Err(CmdError::Numerical(format!("{failures} self-test checks failed")));
    }
    println!("all {} checks passed", results.len());
    Ok(())
}
