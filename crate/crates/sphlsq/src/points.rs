//! Sampling layers on S^2: the exact Gauss product grid, Fibonacci spirals,
//! random tangent perturbations, and geometric diagnostics (mesh norm,
//! minimal separation).

use crate::error::{Error, Result};
use crate::util::compensated_sum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Tolerance for the unit-norm invariant of sphere points.
pub const UNIT_TOL: f64 = 1e-12;

/// A point on S^2, stored as a unit vector in R^3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitPoint([f64; 3]);

impl UnitPoint {
    /// Wraps coordinates that must already be normalized to within 1e-12.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self([x, y, z]))
    }

    /// Normalizes arbitrary non-zero coordinates onto the sphere.
    pub fn from_unnormalized(x: f64, y: f64, z: f64) -> Self {
        let norm = (x * x + y * y + z * z).sqrt();
        assert!(norm > 0.0, "cannot normalize the zero vector");
        Self([x / norm, y / norm, z / norm])
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    /// Geodesic distance `arccos(x . y)`.
    pub fn geodesic_distance(&self, other: &Self) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }
}

/// One sampling layer: points with positive weights, tied to the degree the
/// layer is meant to sample, plus a provenance tag naming the generator,
/// its parameters, and any seed.
#[derive(Debug, Clone)]
pub struct Layer {
    pub degree: u32,
    pub points: Vec<UnitPoint>,
    pub weights: Vec<f64>,
    pub provenance: String,
}

impl Layer {
    pub fn new(
        degree: u32,
        points: Vec<UnitPoint>,
        weights: Vec<f64>,
        provenance: String,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyLayer);
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: weights.len() });
        }
        if let Some(&w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::DomainOutOfRange { name: "weight", value: w });
        }
        Ok(Self { degree, points, weights, provenance })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Compensated sum of the weights.
    pub fn weight_sum(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// degree-`n` Legendre polynomial. Nodes ascend; weights sum to 2. The rule
/// is exact for polynomials of degree `2n - 1`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let legendre_pair = |t: f64| -> (f64, f64) {
        // Returns (P_n(t), P_n'(t)).
        let mut prev = 1.0;
        let mut cur = t;
        if n == 1 {
            return (t, 1.0);
        }
        for l in 2..=n {
            let lf = l as f64;
            let next = ((2.0 * lf - 1.0) * t * cur - (lf - 1.0) * prev) / lf;
            prev = cur;
            cur = next;
        }
        let deriv = (n as f64) * (prev - t * cur) / (1.0 - t * t);
        (cur, deriv)
    };
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() <= 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(t);
        nodes[i] = t;
        weights[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    // Enforce the symmetry of the rule exactly; the initial guesses run from
    // the largest node down, so i pairs with n-1-i.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let a = (nodes[i] - nodes[j]) / 2.0;
        nodes[i] = a;
        nodes[j] = -a;
        let w = (weights[i] + weights[j]) / 2.0;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, dp) = legendre_pair(0.0);
        weights[n / 2] = 2.0 / (dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Product rule layer: `n + 1` Gauss-Legendre latitudes times `2n + 2`
/// equispaced longitudes, with weights `tau = (gauss weight / 2) / (2n + 2)`.
///
/// The rule integrates every spherical polynomial of degree at most `2n + 1`
/// exactly under the probability measure, so a layer built for degree `n`
/// has frame constants `A = B = 1` and condition number 1.
pub fn gauss_product_layer(n: u32) -> Layer {
    let n_lat = n as usize + 1;
    let n_lon = 2 * n as usize + 2;
    let (nodes, gw) = gauss_legendre(n_lat);
    let mut points = Vec::with_capacity(n_lat * n_lon);
    let mut weights = Vec::with_capacity(n_lat * n_lon);
    for (t, w) in nodes.iter().zip(&gw) {
        let s = (1.0 - t * t).max(0.0).sqrt();
        let tau = w / 2.0 / n_lon as f64;
        for j in 0..n_lon {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_lon as f64;
            points.push(UnitPoint::from_unnormalized(s * phi.cos(), s * phi.sin(), *t));
            weights.push(tau);
        }
    }
    Layer { degree: n, points, weights, provenance: format!("gauss n={n}") }
}

/// Fibonacci spiral layer with `ceil(c (n+1)^2)` points and equal weights
/// `1 / l_n`. Oversampling `c` below roughly 1.2 generally leaves too few
/// points for fitting at degree `n` (the layer is still generated; the
/// design-system builder is what rejects it).
pub fn fibonacci_layer(n: u32, c: f64) -> Layer {
    assert!(c > 0.0, "oversampling factor must be positive");
    let count = (c * ((n as f64 + 1.0).powi(2))).ceil() as usize;
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden_angle * i as f64;
        points.push(UnitPoint::from_unnormalized(r * phi.cos(), r * phi.sin(), z));
    }
    let w = 1.0 / count as f64;
    Layer {
        degree: n,
        points,
        weights: vec![w; count],
        provenance: format!("fibonacci n={n} c={c}"),
    }
}

/// Moves every point by an independent random tangent displacement of
/// geodesic length at most `epsilon / (n + 1)`, then renormalizes. Weights
/// are unchanged. The draw for point `k` comes from a counter-based stream
/// keyed by `(seed, k)`, so the output is deterministic across platforms
/// and identical for repeated calls with the same seed.
pub fn perturb_layer(layer: &Layer, epsilon: f64, seed: u64) -> Layer {
    assert!(epsilon >= 0.0);
    let provenance = format!(
        "perturbed eps={epsilon} seed={seed} of [{}]",
        layer.provenance
    );
    if epsilon == 0.0 {
        return Layer {
            degree: layer.degree,
            points: layer.points.clone(),
            weights: layer.weights.clone(),
            provenance,
        };
    }
    let max_len = epsilon / (layer.degree as f64 + 1.0);
    let points = layer
        .points
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let alpha = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = max_len * rng.gen_range(0.0..=1.0);
            displace(x, alpha, r)
        })
        .collect();
    Layer { degree: layer.degree, points, weights: layer.weights.clone(), provenance }
}

/// Walks geodesic length `r` from `x` in the tangent direction given by
/// angle `alpha` within a deterministic tangent frame.
fn displace(x: &UnitPoint, alpha: f64, r: f64) -> UnitPoint {
    if r == 0.0 {
        return *x;
    }
    let [px, py, pz] = x.coords();
    // Axis least aligned with x keeps the frame well conditioned.
    let axis = if px.abs() <= py.abs() && px.abs() <= pz.abs() {
        [1.0, 0.0, 0.0]
    } else if py.abs() <= pz.abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let d = axis[0] * px + axis[1] * py + axis[2] * pz;
    let mut e1 = [axis[0] - d * px, axis[1] - d * py, axis[2] - d * pz];
    let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1 = [e1[0] / n1, e1[1] / n1, e1[2] / n1];
    let e2 = [
        py * e1[2] - pz * e1[1],
        pz * e1[0] - px * e1[2],
        px * e1[1] - py * e1[0],
    ];
    let (sa, ca) = alpha.sin_cos();
    let (sr, cr) = r.sin_cos();
    UnitPoint::from_unnormalized(
        cr * px + sr * (ca * e1[0] + sa * e2[0]),
        cr * py + sr * (ca * e1[1] + sa * e2[1]),
        cr * pz + sr * (ca * e1[2] + sa * e2[2]),
    )
}

/// Deterministic covering grid used by the mesh-norm and operator-norm
/// scans: `resolution - 1` interior latitudes times `2 * resolution`
/// longitudes plus both poles, about `2 resolution^2` nodes in total.
/// Doubling the resolution yields a superset of the nodes, so scans over
/// the grid refine monotonically.
pub fn covering_grid(resolution: u32) -> Vec<UnitPoint> {
    assert!(resolution >= 1);
    let g = resolution as usize;
    let mut grid = Vec::with_capacity(2 * g * g + 2);
    grid.push(UnitPoint::from_unnormalized(0.0, 0.0, 1.0));
    grid.push(UnitPoint::from_unnormalized(0.0, 0.0, -1.0));
    for a in 1..g {
        let theta = std::f64::consts::PI * a as f64 / g as f64;
        let (st, ct) = theta.sin_cos();
        for b in 0..2 * g {
            let phi = std::f64::consts::PI * b as f64 / g as f64;
            grid.push(UnitPoint::from_unnormalized(st * phi.cos(), st * phi.sin(), ct));
        }
    }
    grid
}

/// Lower bound for the mesh norm (covering radius) of the layer: the largest
/// geodesic distance from a node of the deterministic covering grid to the
/// nearest layer point. Converges to the true mesh norm from below as the
/// grid refines.
pub fn mesh_norm(layer: &Layer, grid_resolution: u32) -> Result<f64> {
    if layer.is_empty() {
        return Err(Error::EmptyLayer);
    }
    let grid = covering_grid(grid_resolution);
    let worst = grid
        .par_chunks(512)
        .map(|chunk| {
            chunk
                .iter()
                .map(|u| {
                    layer
                        .points
                        .iter()
                        .map(|x| u.dot(x))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(worst.clamp(-1.0, 1.0).acos())
}

/// Exact minimal pairwise geodesic distance (full pairwise scan).
pub fn min_separation(layer: &Layer) -> Result<f64> {
    if layer.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: layer.len() });
    }
    let pts = &layer.points;
    let max_dot = (0..pts.len() - 1)
        .into_par_iter()
        .map(|i| {
            pts[i + 1..]
                .iter()
                .map(|y| pts[i].dot(y))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(max_dot.clamp(-1.0, 1.0).acos())
}
