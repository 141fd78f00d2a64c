//! Dense column-major kernels for the fitting pipeline: Householder QR of
//! tall matrices, triangular solves against the implied Gram factor, and
//! extremal eigenvalues of symmetric matrices.

use crate::error::{Error, Result};
use crate::util::{axpy, dot};

/// Dense column-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[j * rows + i] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Writes `v` into row `i`; the scattered stores are the price of the
    /// column-major layout and only the assembly path pays it.
    pub fn set_row(&mut self, i: usize, v: &[f64]) {
        debug_assert_eq!(v.len(), self.cols);
        for (j, x) in v.iter().enumerate() {
            self.data[j * self.rows + i] = *x;
        }
    }

    /// `y = A x` accumulated column by column.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for (j, xj) in x.iter().enumerate() {
            if *xj != 0.0 {
                axpy(*xj, self.col(j), &mut y);
            }
        }
        y
    }

    /// `y = A^T x` as one dot product per column.
    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), x)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.cols {
            for i in 0..j.min(self.rows) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `A^T A`, exploiting symmetry, in column panels so the streamed columns
    /// stay cache resident.
    pub fn gram(&self) -> Mat {
        let m = self.cols;
        let mut r = Mat::zeros(m, m);
        const PANEL: usize = 48;
        let mut jb = 0;
        while jb < m {
            let je = (jb + PANEL).min(m);
            for i in 0..je {
                let ci = self.col(i);
                for j in jb.max(i)..je {
                    let v = dot(ci, self.col(j));
                    r.set(i, j, v);
                    r.set(j, i, v);
                }
            }
            jb = je;
        }
        r
    }
}

/// Panel width for the blocked QR; reflections are aggregated and applied to
/// the trailing matrix in one sweep per panel, which is what keeps the
/// factorization memory traffic tolerable at `l x m` in the thousands.
const QR_BLOCK: usize = 32;

/// Householder factorization of a tall (`l >= m`) matrix, stored LAPACK
/// style: the upper triangle of `qr` holds `R`, the columns below the
/// diagonal hold the reflector tails (unit diagonal implied).
///
/// Construction fails with [`Error::RankDeficient`] when any diagonal of `R`
/// falls below `rank_tol` times the largest diagonal magnitude, so an
/// existing factorization is always full rank.
#[derive(Debug, Clone)]
pub struct TallFactorization {
    qr: Mat,
    tau: Vec<f64>,
    rank_tol: f64,
}

/// Factorizes by successive elementary reflectors, aggregated in compact-WY
/// panels of [`QR_BLOCK`] columns.
pub fn factorize(a: &Mat, rank_tol: f64) -> Result<TallFactorization> {
    let (l, m) = (a.rows(), a.cols());
    if l < m {
        return Err(Error::NotTall { rows: l, cols: m });
    }
    let mut qr = a.clone();
    let mut tau = vec![0.0f64; m];

    // Panel scratch: reflector columns with explicit unit diagonal, the T
    // factor, and the per-column coefficient vector.
    let mut v_panel = vec![0.0f64; l * QR_BLOCK];
    let mut t_mat = [[0.0f64; QR_BLOCK]; QR_BLOCK];
    let mut w = vec![0.0f64; QR_BLOCK];

    let mut jb = 0;
    while jb < m {
        let kb = QR_BLOCK.min(m - jb);

        // Unblocked factorization of the panel.
        for pj in 0..kb {
            let j = jb + pj;
            // Apply the panel's previous reflectors to column j.
            for pk in 0..pj {
                let k = jb + pk;
                reflect_column(&mut qr, k, j, tau[k], l);
            }
            tau[j] = make_householder(&mut qr, j, l);
        }

        // Gather the panel reflectors with explicit unit diagonals.
        let vrows = l - jb;
        for pj in 0..kb {
            let j = jb + pj;
            let dst = &mut v_panel[pj * vrows..(pj + 1) * vrows];
            dst[..pj].fill(0.0);
            dst[pj] = 1.0;
            dst[pj + 1..].copy_from_slice(&qr.col(j)[jb + pj + 1..l]);
        }

        // T factor (forward, columnwise): T_ii = tau_i and
        // T[0..i, i] = -tau_i T[0..i, 0..i] (V[, 0..i]^T v_i).
        for i in 0..kb {
            let vi = &v_panel[i * vrows..(i + 1) * vrows];
            for k in 0..i {
                let vk = &v_panel[k * vrows..(k + 1) * vrows];
                w[k] = -tau[jb + i] * dot(vk, vi);
            }
            for row in 0..i {
                let mut s = 0.0;
                for k in row..i {
                    s += t_mat[row][k] * w[k];
                }
                t_mat[row][i] = s;
            }
            t_mat[i][i] = tau[jb + i];
        }

        // Trailing update A2 <- A2 - V T^T (V^T A2), column by column; the
        // panel V stays cache resident while each trailing column streams.
        for j in jb + kb..m {
            let colj = &mut qr.col_mut(j)[jb..l];
            for k in 0..kb {
                w[k] = dot(&v_panel[k * vrows..(k + 1) * vrows], colj);
            }
            // w <- T^T w, in place, descending.
            for i in (0..kb).rev() {
                let mut s = 0.0;
                for k in 0..=i {
                    s += t_mat[k][i] * w[k];
                }
                w[i] = s;
            }
            for k in 0..kb {
                if w[k] != 0.0 {
                    axpy(-w[k], &v_panel[k * vrows..(k + 1) * vrows], colj);
                }
            }
        }

        jb += kb;
    }

    // Rank check against the largest diagonal magnitude.
    let maxdiag = (0..m).fold(0.0f64, |acc, j| acc.max(qr.get(j, j).abs()));
    for j in 0..m {
        if qr.get(j, j).abs() < rank_tol * maxdiag || maxdiag == 0.0 {
            return Err(Error::RankDeficient { column: j });
        }
    }

    Ok(TallFactorization { qr, tau, rank_tol })
}

/// Builds the Householder reflector for column `j` (rows `j..l`), writing
/// `beta` to the diagonal and the scaled tail below it. Returns `tau`.
fn make_householder(qr: &mut Mat, j: usize, l: usize) -> f64 {
    let col = &mut qr.col_mut(j)[j..l];
    let alpha = col[0];
    let norm = dot(col, col).sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let scale = alpha - beta;
    for v in col[1..].iter_mut() {
        *v /= scale;
    }
    col[0] = beta;
    (beta - alpha) / beta
}

/// Applies reflector `k` to column `j` of the factor-in-progress.
fn reflect_column(qr: &mut Mat, k: usize, j: usize, tau: f64, l: usize) {
    if tau == 0.0 {
        return;
    }
    let (vk_col, cj_col) = {
        // Columns k and j are disjoint slices of the backing store.
        let rows = qr.rows;
        let (a, b) = qr.data.split_at_mut(j * rows);
        (&a[k * rows..(k + 1) * rows], &mut b[..rows])
    };
    let v = &vk_col[k..l];
    let c = &mut cj_col[k..l];
    let s = c[0] + dot(&v[1..], &c[1..]);
    c[0] -= tau * s;
    axpy(-tau * s, &v[1..], &mut c[1..]);
}

impl TallFactorization {
    pub fn nrows(&self) -> usize {
        self.qr.rows()
    }

    pub fn ncols(&self) -> usize {
        self.qr.cols()
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// `R[i, j]` for `i <= j`.
    pub fn r(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j);
        self.qr.get(i, j)
    }

    /// Applies `Q^T` in place to a full-length vector.
    pub fn apply_qt(&self, b: &mut [f64]) {
        let (l, m) = (self.nrows(), self.ncols());
        debug_assert_eq!(b.len(), l);
        for j in 0..m {
            let tau = self.tau[j];
            if tau == 0.0 {
                continue;
            }
            let v = &self.qr.col(j)[j..l];
            let c = &mut b[j..l];
            let s = c[0] + dot(&v[1..], &c[1..]);
            c[0] -= tau * s;
            axpy(-tau * s, &v[1..], &mut c[1..]);
        }
    }

    /// Applies `Q` in place (reflectors in reverse order).
    pub fn apply_q(&self, b: &mut [f64]) {
        let (l, m) = (self.nrows(), self.ncols());
        debug_assert_eq!(b.len(), l);
        for j in (0..m).rev() {
            let tau = self.tau[j];
            if tau == 0.0 {
                continue;
            }
            let v = &self.qr.col(j)[j..l];
            let c = &mut b[j..l];
            let s = c[0] + dot(&v[1..], &c[1..]);
            c[0] -= tau * s;
            axpy(-tau * s, &v[1..], &mut c[1..]);
        }
    }

    /// `argmin_z |U z - b|_2` via `Q^T b` and back substitution.
    pub fn lsq_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let (l, m) = (self.nrows(), self.ncols());
        if b.len() != l {
            return Err(Error::DimensionMismatch { expected: l, got: b.len() });
        }
        let mut work = b.to_vec();
        self.apply_qt(&mut work);
        let mut z = work[..m].to_vec();
        self.back_solve(&mut z);
        Ok(z)
    }

    /// Solves `R z = y` in place (column-sweep back substitution).
    fn back_solve(&self, y: &mut [f64]) {
        let m = self.ncols();
        debug_assert_eq!(y.len(), m);
        for k in (0..m).rev() {
            let zk = y[k] / self.qr.get(k, k);
            y[k] = zk;
            if zk != 0.0 {
                let colk = &self.qr.col(k)[..k];
                for (yi, rik) in y[..k].iter_mut().zip(colk) {
                    *yi -= zk * rik;
                }
            }
        }
    }

    /// Solves `R^T y = v` in place (forward substitution; column `i` of the
    /// stored factor holds `R[0..i, i]` contiguously).
    fn forward_solve_transposed(&self, v: &mut [f64]) {
        let m = self.ncols();
        debug_assert_eq!(v.len(), m);
        for i in 0..m {
            let s = dot(&self.qr.col(i)[..i], &v[..i]);
            v[i] = (v[i] - s) / self.qr.get(i, i);
        }
    }

    /// `(U^T U)^{-1} v` using the triangular factor twice
    /// (`R^T R = U^T U` regardless of the diagonal signs of `R`).
    pub fn gram_apply_inverse(&self, v: &[f64]) -> Result<Vec<f64>> {
        let m = self.ncols();
        if v.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: v.len() });
        }
        let mut z = v.to_vec();
        self.forward_solve_transposed(&mut z);
        self.back_solve(&mut z);
        Ok(z)
    }

    /// `|R c|^2 = |U c|^2`, the discrete Rayleigh numerator, without
    /// touching the original matrix.
    pub fn design_norm_sq(&self, c: &[f64]) -> f64 {
        let m = self.ncols();
        debug_assert_eq!(c.len(), m);
        let mut rc = vec![0.0; m];
        for j in 0..m {
            if c[j] != 0.0 {
                axpy(c[j], &self.qr.col(j)[..=j], &mut rc[..=j]);
            }
        }
        dot(&rc, &rc)
    }

    /// Rebuilds `Q R`; diagnostic used by the reconstruction tests.
    pub fn reconstruct(&self) -> Mat {
        let (l, m) = (self.nrows(), self.ncols());
        let mut out = Mat::zeros(l, m);
        for j in 0..m {
            let mut col = vec![0.0; l];
            col[..=j].copy_from_slice(&self.qr.col(j)[..=j]);
            self.apply_q(&mut col);
            out.col_mut(j).copy_from_slice(&col);
        }
        out
    }
}

/// Iteration cap for the power phases of [`sym_eig_extremes`]; hit the cap
/// and the call fails with [`Error::NonConvergence`].
const POWER_ITER_CAP: usize = 5000;
/// Full Jacobi reduction is used up to this order.
const DENSE_EIG_LIMIT: usize = 512;

/// Extremal eigenvalues `(lambda_min, lambda_max)` of a symmetric matrix.
///
/// Orders up to 512 go through a full cyclic Jacobi reduction. Larger
/// matrices use power iteration for the dominant eigenvalue followed by
/// power iteration on the shifted matrix for the opposite extreme, each
/// started from the all-ones vector with a fixed fallback start. Accuracy of
/// the power path is `tol` relative to the spectral radius when the extremes
/// are separated; clustered extremes converge to the cluster.
pub fn sym_eig_extremes(r: &Mat, tol: f64) -> Result<(f64, f64)> {
    assert_eq!(r.rows(), r.cols(), "matrix must be square");
    let asym = r.max_asymmetry();
    if asym > 1e-12 * (1.0 + r.max_abs()) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    if r.rows() <= DENSE_EIG_LIMIT {
        return Ok(jacobi_extremes(r));
    }
    let scale0 = r.max_abs();
    let (theta1, _) = power_iterate(|v, out| sym_matvec(r, v, out), r.rows(), tol, scale0)?;
    let (nu, _) = power_iterate(
        |v, out| {
            sym_matvec(r, v, out);
            for (o, vi) in out.iter_mut().zip(v) {
                *o -= theta1 * vi;
            }
        },
        r.rows(),
        tol,
        theta1.abs().max(scale0),
    )?;
    let other = theta1 + nu;
    Ok((theta1.min(other), theta1.max(other)))
}

/// Symmetric matvec: rows equal columns, so each output entry is one
/// contiguous column dot product.
fn sym_matvec(r: &Mat, v: &[f64], out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate() {
        *o = dot(r.col(j), v);
    }
}

/// Power iteration with Rayleigh-quotient tracking. Converges when the
/// residual `|Av - theta v|` drops below `tol * scale` or when the Rayleigh
/// value stalls to within `tol/8` relative for three consecutive steps.
fn power_iterate(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    m: usize,
    tol: f64,
    scale: f64,
) -> Result<(f64, Vec<f64>)> {
    let starts: [fn(usize) -> f64; 2] = [|_| 1.0, |i| (i as f64 + 1.0).sin() + 1.5];
    for start in starts {
        let mut v: Vec<f64> = (0..m).map(start).collect();
        normalize(&mut v);
        let mut w = vec![0.0f64; m];
        let mut theta_prev = f64::INFINITY;
        let mut stalled = 0;
        for _ in 0..POWER_ITER_CAP {
            apply(&v, &mut w);
            let theta = dot(&v, &w);
            let resid = {
                let mut s = 0.0;
                for (wi, vi) in w.iter().zip(&v) {
                    let d = wi - theta * vi;
                    s += d * d;
                }
                s.sqrt()
            };
            if resid <= tol * scale.max(theta.abs()) {
                return Ok((theta, v));
            }
            if (theta - theta_prev).abs() <= tol / 8.0 * theta.abs().max(tol) {
                stalled += 1;
                if stalled >= 3 {
                    return Ok((theta, v));
                }
            } else {
                stalled = 0;
            }
            theta_prev = theta;
            let norm = dot(&w, &w).sqrt();
            if norm == 0.0 {
                // The operator annihilates v: v is an exact null vector.
                return Ok((0.0, v));
            }
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / norm;
            }
        }
    }
    Err(Error::NonConvergence { iterations: POWER_ITER_CAP })
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
}

/// Cyclic Jacobi reduction; returns `(lambda_min, lambda_max)`.
fn jacobi_extremes(r: &Mat) -> (f64, f64) {
    let m = r.rows();
    let mut a = r.clone();
    let fro = a.frobenius_norm();
    if m == 1 {
        return (a.get(0, 0), a.get(0, 0));
    }
    for _sweep in 0..50 {
        let mut off = 0.0f64;
        for p in 0..m {
            for q in p + 1..m {
                off += a.get(p, q).powi(2);
            }
        }
        if (2.0 * off).sqrt() <= 1e-14 * fro.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Rotate rows/columns p and q.
                for k in 0..m {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..m {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        lo = lo.min(a.get(i, i));
        hi = hi.max(a.get(i, i));
    }
    (lo, hi)
}
