//! Special-function and kernel machinery: Gegenbauer polynomials, dimensions
//! of harmonic spaces, the reproducing kernel of the degree-`n` polynomial
//! space, and the real orthonormal spherical-harmonic basis on S^2.
//!
//! Everything here is normalized against the rotation-invariant probability
//! measure on the sphere: the constant basis element is identically 1 and the
//! kernel diagonal `E_n(x, x)` equals the space dimension.

use crate::error::{Error, Result};
use crate::points::UnitPoint;

/// Tolerance for scalar arguments that must lie in `[-1, 1]`.
const DOMAIN_TOL: f64 = 1e-12;

/// Evaluates the Gegenbauer (ultraspherical) polynomial `C_l^lambda(t)` in the
/// normalization `C_l^lambda(1) = Gamma(l + 2 lambda) / (Gamma(2 lambda) l!)`,
/// the one produced by the generating function `(1 - 2zt + z^2)^(-lambda)`.
///
/// Uses the three-term recurrence
/// `l C_l = 2 (l + lambda - 1) t C_{l-1} - (l + 2 lambda - 2) C_{l-2}`
/// seeded with `C_0 = 1`, `C_1 = 2 lambda t`; no Gamma evaluations at runtime.
///
/// For `lambda = 1/2` this is the Legendre polynomial `P_l`.
pub fn gegenbauer_eval(lambda: f64, ell: u32, t: f64) -> Result<f64> {
    assert!(lambda > 0.0, "Gegenbauer order must be positive");
    let t = clamp_to_domain("t", t)?;
    if ell == 0 {
        return Ok(1.0);
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * lambda * t;
    for l in 2..=ell {
        let lf = f64::from(l);
        let next = (2.0 * (lf + lambda - 1.0) * t * cur - (lf + 2.0 * lambda - 2.0) * prev) / lf;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

fn clamp_to_domain(name: &'static str, t: f64) -> Result<f64> {
    if !(t.abs() <= 1.0 + DOMAIN_TOL) {
        return Err(Error::DomainOutOfRange { name, value: t });
    }
    Ok(t.clamp(-1.0, 1.0))
}

/// Exact binomial coefficient, or `None` on overflow.
fn binomial(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut r: u128 = 1;
    for i in 1..=k {
        // Multiply before dividing; the running product of i consecutive
        // ratios is always integral.
        r = r.checked_mul((n - k + i) as u128)? / (i as u128);
    }
    Some(r)
}

/// Dimension `N(d, l)` of the space of spherical harmonics of exact degree
/// `l` on S^d: 1 for `l = 0`, else `(2l + d - 1) (l + d - 2)! / ((d - 1)! l!)`.
/// Exact integer arithmetic throughout.
pub fn dim_harmonic(d: usize, ell: u32) -> u64 {
    assert!(d >= 2, "sphere dimension must be at least 2");
    if ell == 0 {
        return 1;
    }
    let l = ell as u64;
    let d = d as u64;
    // (l + d - 2)! / ((d - 1)! l!) = binom(l + d - 2, d - 2) / (d - 1)
    let b = binomial(l + d - 2, d - 2).expect("harmonic dimension overflow");
    let n = (2 * l + d - 1) as u128 * b / (d - 1) as u128;
    u64::try_from(n).expect("harmonic dimension overflow")
}

/// Dimension `d_n` of the space of spherical polynomials of degree at most
/// `n` on S^d: `(2n + d) (n + d - 1)! / (d! n!)`, equal to the sum of
/// `dim_harmonic(d, l)` over `l <= n`. At `d = 2` this is `(n + 1)^2`.
pub fn dim_poly(d: usize, n: u32) -> Result<u64> {
    assert!(d >= 2, "sphere dimension must be at least 2");
    let n = n as u64;
    let d = d as u64;
    let b = binomial(n + d - 1, d - 1).ok_or(Error::Overflow)?;
    let v = (2 * n + d) as u128 * b / d as u128;
    u64::try_from(v).map_err(|_| Error::Overflow)
}

/// Zonal reproducing kernel `E_n` of the degree-`n` polynomial space under
/// the probability measure, as a function of `u = x . y`:
///
/// `E_n(x, y) = sum_{l=0}^{n} ((l + lambda) / lambda) C_l^lambda(u)` with
/// `lambda = (d - 1) / 2`.
///
/// At `u = 1` the value is the space dimension `d_n`; at `d = 2` the sum is
/// `sum (2l + 1) P_l(u)`.
pub fn kernel_value(d: usize, n: u32, u: f64) -> Result<f64> {
    assert!(d >= 2, "sphere dimension must be at least 2");
    let u = clamp_to_domain("u", u)?;
    let lambda = (d as f64 - 1.0) / 2.0;
    // Run the Gegenbauer recurrence once, accumulating the weighted sum.
    let mut sum = 1.0; // l = 0 term: (lambda/lambda) * 1
    if n == 0 {
        return Ok(sum);
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * lambda * u;
    sum += (1.0 + lambda) / lambda * cur;
    for l in 2..=n {
        let lf = f64::from(l);
        let next = (2.0 * (lf + lambda - 1.0) * u * cur - (lf + 2.0 * lambda - 2.0) * prev) / lf;
        prev = cur;
        cur = next;
        sum += (lf + lambda) / lambda * cur;
    }
    Ok(sum)
}

/// Identifies the real orthonormal basis of the spherical polynomials of
/// degree at most `degree` on S^d.
///
/// The enumeration is frozen (file formats and coefficient vectors depend on
/// it): degrees `l = 0..=degree` in order; inside degree `l` first the zonal
/// element `m = 0`, then the pair (cosine, sine) for each `m = 1..=l`. The
/// first element is the constant function 1. Harmonics are real, carry no
/// Condon-Shortley phase, and are orthonormal under the probability measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSpec {
    dimension: usize,
    degree: u32,
}

impl BasisSpec {
    pub fn new(dimension: usize, degree: u32) -> Self {
        assert!(dimension >= 2, "sphere dimension must be at least 2");
        Self { dimension, degree }
    }

    /// Sphere dimension `d` (the sphere lives in `R^{d+1}`).
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Total number of basis elements, `d_n`.
    pub fn len(&self) -> usize {
        dim_poly(self.dimension, self.degree).expect("basis dimension overflow") as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the first element of the degree-`l` block. At `d = 2` the
    /// block starts at `l^2` and has length `2l + 1`.
    pub fn block_start(&self, ell: u32) -> usize {
        (0..ell).map(|l| dim_harmonic(self.dimension, l) as usize).sum()
    }

    /// Evaluates the full basis vector at a point of S^2.
    pub fn eval(&self, x: &UnitPoint) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    /// Evaluates the basis into a caller-provided slice of length `d_n`.
    ///
    /// The associated Legendre factors are generated by an upward recurrence
    /// on fully normalized values, so no factorial or Gamma evaluation occurs
    /// and the iteration is stable up to degrees in the hundreds. `sin(theta)`
    /// is taken from the point's own coordinates rather than from
    /// `sqrt(1 - cos^2)`, which keeps the polar caps accurate.
    pub fn eval_into(&self, x: &UnitPoint, out: &mut [f64]) -> Result<()> {
        if self.dimension != 2 {
            return Err(Error::UnsupportedDimension { d: self.dimension });
        }
        let dn = self.len();
        if out.len() != dn {
            return Err(Error::DimensionMismatch { expected: dn, got: out.len() });
        }
        let n = self.degree;
        let [px, py, pz] = x.coords();
        let t = pz; // cos(theta)
        let s = px.hypot(py); // sin(theta) from coordinates
        let (cos_phi, sin_phi) = if s > 0.0 { (px / s, py / s) } else { (1.0, 0.0) };

        let sqrt2 = std::f64::consts::SQRT_2;
        // Running diagonal value q_m^m and azimuthal phases cos(m phi),
        // sin(m phi), advanced together as m grows.
        let mut q_diag = 1.0f64;
        let mut cos_m = 1.0f64;
        let mut sin_m = 0.0f64;

        for m in 0..=n {
            if m > 0 {
                let mf = f64::from(m);
                q_diag *= s * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
                let (c, sn) = (cos_m, sin_m);
                cos_m = c * cos_phi - sn * sin_phi;
                sin_m = sn * cos_phi + c * sin_phi;
            }
            // Upward in l at fixed m, writing each normalized value into its
            // slot: q_m^m, then q_{m+1}^m = t sqrt(2m + 3) q_m^m, then the
            // two-term recurrence.
            let mut prev = 0.0f64;
            let mut cur = q_diag;
            for l in m..=n {
                if l > m {
                    let lf = f64::from(l);
                    let mf = f64::from(m);
                    let next = if l == m + 1 {
                        t * (2.0 * mf + 3.0).sqrt() * cur
                    } else {
                        let alpha = ((2.0 * lf - 1.0) * (2.0 * lf + 1.0)
                            / ((lf - mf) * (lf + mf)))
                            .sqrt();
                        let beta = ((2.0 * lf + 1.0) * (lf + mf - 1.0) * (lf - mf - 1.0)
                            / ((2.0 * lf - 3.0) * (lf + mf) * (lf - mf)))
                            .sqrt();
                        alpha * t * cur - beta * prev
                    };
                    prev = cur;
                    cur = next;
                }
                let block = (l * l) as usize;
                if m == 0 {
                    out[block] = cur;
                } else {
                    out[block + 2 * m as usize - 1] = sqrt2 * cur * cos_m;
                    out[block + 2 * m as usize] = sqrt2 * cur * sin_m;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::UnitPoint;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng) -> UnitPoint {
        loop {
            let v = [
                rng.gen_range(-1.0f64..1.0),
                rng.gen_range(-1.0f64..1.0),
                rng.gen_range(-1.0f64..1.0),
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-3 {
                return UnitPoint::from_unnormalized(v[0], v[1], v[2]);
            }
        }
    }

    /// Legendre polynomial via the explicit sum
    /// `P_l(t) = 2^-l sum_k binom(l,k)^2 (t-1)^(l-k) (t+1)^k`,
    /// evaluated in exact rational arithmetic for `t = num/2`.
    fn legendre_exact_rational(ell: u32, num: i64) -> f64 {
        // t = num / 2 with num in {-2,-1,0,1,2}; (t-1) = (num-2)/2, (t+1) = (num+2)/2.
        let l = ell as i64;
        let mut total_num: i128 = 0;
        // denominator is 2^l * 2^l = 4^l
        for k in 0..=l {
            let b = binomial(l as u64, k as u64).unwrap() as i128;
            let mut term: i128 = b * b;
            for _ in 0..(l - k) {
                term *= (num - 2) as i128;
            }
            for _ in 0..k {
                term *= (num + 2) as i128;
            }
            total_num += term;
        }
        total_num as f64 / 4f64.powi(ell as i32)
    }

    #[test]
    fn gegenbauer_degree_zero_is_one() {
        assert_eq!(gegenbauer_eval(0.5, 0, 0.3).unwrap(), 1.0);
    }

    #[test]
    fn gegenbauer_legendre_normalization_at_one() {
        // For lambda = 1/2 the normalization constant is 1 for every degree.
        assert_abs_diff_eq!(gegenbauer_eval(0.5, 5, 1.0).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn gegenbauer_matches_explicit_legendre() {
        // P_2(t) = (3t^2 - 1)/2 at t = 0.5.
        assert_abs_diff_eq!(gegenbauer_eval(0.5, 2, 0.5).unwrap(), -0.125, epsilon = 1e-15);
    }

    #[test]
    fn gegenbauer_matches_exact_rational_oracle() {
        for ell in 0..=10u32 {
            for num in [-2i64, -1, 0, 1, 2] {
                let got = gegenbauer_eval(0.5, ell, num as f64 / 2.0).unwrap();
                let want = legendre_exact_rational(ell, num);
                assert_abs_diff_eq!(got, want, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn gegenbauer_lambda_one_is_chebyshev_second_kind() {
        // C_l^1(cos a) = sin((l+1) a) / sin(a), an independent trig oracle.
        for ell in 0..=12u32 {
            for &a in &[0.3f64, 1.1, 2.0, 2.9] {
                let got = gegenbauer_eval(1.0, ell, a.cos()).unwrap();
                let want = ((ell as f64 + 1.0) * a).sin() / a.sin();
                assert_abs_diff_eq!(got, want, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn gegenbauer_rejects_out_of_domain() {
        assert!(matches!(
            gegenbauer_eval(0.5, 3, 1.1),
            Err(Error::DomainOutOfRange { .. })
        ));
        // Values within the 1e-12 tolerance are clamped, not rejected.
        assert!(gegenbauer_eval(0.5, 3, 1.0 + 5e-13).is_ok());
    }

    #[test]
    fn harmonic_dimensions() {
        assert_eq!(dim_harmonic(2, 0), 1);
        assert_eq!(dim_harmonic(2, 4), 9); // 2l + 1 at d = 2
        assert_eq!(dim_harmonic(3, 2), 9);
        // Independent factorial evaluation for a handful of cases.
        let factorial = |k: u64| -> u128 { (1..=k as u128).product::<u128>().max(1) };
        for d in 2..=5usize {
            for ell in 1..=12u32 {
                let l = ell as u128;
                let du = d as u128;
                let want = (2 * l + du - 1) * factorial(ell as u64 + d as u64 - 2)
                    / (factorial(d as u64 - 1) * factorial(ell as u64));
                assert_eq!(dim_harmonic(d, ell) as u128, want, "d={d} l={ell}");
            }
        }
    }

    #[test]
    fn poly_dimensions() {
        assert_eq!(dim_poly(2, 0).unwrap(), 1);
        assert_eq!(dim_poly(2, 3).unwrap(), 16); // (n+1)^2 at d = 2
        assert_eq!(dim_poly(4, 2).unwrap(), 20);
        // d_n equals the sum of the harmonic dimensions.
        for d in 2..=5usize {
            for n in 0..=20u32 {
                let sum: u64 = (0..=n).map(|l| dim_harmonic(d, l)).sum();
                assert_eq!(dim_poly(d, n).unwrap(), sum, "d={d} n={n}");
            }
        }
    }

    #[test]
    fn poly_dimension_overflow_is_an_error() {
        assert!(matches!(dim_poly(64, 2_000_000_000), Err(Error::Overflow)));
    }

    #[test]
    fn kernel_degree_zero_is_one() {
        assert_eq!(kernel_value(2, 0, 0.7).unwrap(), 1.0);
    }

    #[test]
    fn kernel_diagonal_equals_dimension() {
        // Independent summation: sum of (2l+1) at d=2; 1+4+9 at d=3, n=2.
        assert_abs_diff_eq!(kernel_value(2, 5, 1.0).unwrap(), 36.0, epsilon = 1e-12);
        assert_abs_diff_eq!(kernel_value(3, 2, 1.0).unwrap(), 14.0, epsilon = 1e-12);
        for d in 2..=4usize {
            for n in 0..=16u32 {
                let want = dim_poly(d, n).unwrap() as f64;
                let got = kernel_value(d, n, 1.0).unwrap();
                assert_abs_diff_eq!(got, want, epsilon = 1e-9 * want);
            }
        }
    }

    #[test]
    fn basis_degree_zero_is_constant_one() {
        let spec = BasisSpec::new(2, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let x = random_unit(&mut rng);
            assert_eq!(spec.eval(&x).unwrap(), vec![1.0]);
        }
    }

    #[test]
    fn basis_rejects_unsupported_dimension() {
        let spec = BasisSpec::new(3, 2);
        let x = UnitPoint::from_unnormalized(0.0, 0.0, 1.0);
        assert!(matches!(
            spec.eval(&x),
            Err(Error::UnsupportedDimension { d: 3 })
        ));
    }

    #[test]
    fn degree_one_block_sum_of_squares_is_three() {
        let spec = BasisSpec::new(2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let x = random_unit(&mut rng);
            let phi = spec.eval(&x).unwrap();
            let block: f64 = phi[1..4].iter().map(|v| v * v).sum();
            assert_abs_diff_eq!(block, 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn addition_theorem_per_block() {
        // Block sums of products match (2l+1) P_l(x . y) up to l = 32.
        let n = 32;
        let spec = BasisSpec::new(2, n);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let x = random_unit(&mut rng);
            let y = random_unit(&mut rng);
            let phix = spec.eval(&x).unwrap();
            let phiy = spec.eval(&y).unwrap();
            let u = x.dot(&y);
            for ell in 0..=n {
                let a = (ell * ell) as usize;
                let b = ((ell + 1) * (ell + 1)) as usize;
                let block: f64 = phix[a..b].iter().zip(&phiy[a..b]).map(|(p, q)| p * q).sum();
                let want =
                    (2.0 * ell as f64 + 1.0) * gegenbauer_eval(0.5, ell, u).unwrap();
                assert_abs_diff_eq!(block, want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn zonal_and_basis_forms_of_the_kernel_agree() {
        let n = 20;
        let spec = BasisSpec::new(2, n);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let x = random_unit(&mut rng);
            let y = random_unit(&mut rng);
            let phix = spec.eval(&x).unwrap();
            let phiy = spec.eval(&y).unwrap();
            let inner: f64 = phix.iter().zip(&phiy).map(|(p, q)| p * q).sum();
            let zonal = kernel_value(2, n, x.dot(&y)).unwrap();
            assert_abs_diff_eq!(inner, zonal, epsilon = 1e-10);
        }
    }

    #[test]
    fn kernel_diagonal_is_constant_over_the_sphere() {
        let n = 24;
        let spec = BasisSpec::new(2, n);
        let want = ((n + 1) * (n + 1)) as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = random_unit(&mut rng);
            let phi = spec.eval(&x).unwrap();
            let diag: f64 = phi.iter().map(|v| v * v).sum();
            assert_abs_diff_eq!(diag, want, epsilon = 1e-9 * want);
        }
        // Poles are the delicate spots for associated Legendre evaluation.
        for pole in [UnitPoint::from_unnormalized(0.0, 0.0, 1.0),
                     UnitPoint::from_unnormalized(0.0, 0.0, -1.0)] {
            let phi = spec.eval(&pole).unwrap();
            let diag: f64 = phi.iter().map(|v| v * v).sum();
            assert_abs_diff_eq!(diag, want, epsilon = 1e-9 * want);
        }
    }

    #[test]
    fn block_start_matches_square_layout() {
        let spec = BasisSpec::new(2, 6);
        for ell in 0..=6u32 {
            assert_eq!(spec.block_start(ell), (ell * ell) as usize);
        }
        assert_eq!(spec.len(), 49);
    }
}
