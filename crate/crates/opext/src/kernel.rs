//! Dense numeric kernel: SVD with a deterministic sign convention, rank
//! at tolerance, pseudoinverse, operator norm, and symmetric helpers.
//!
//! Everything downstream reduces to these primitives, so the sign
//! convention (largest-magnitude entry of each left singular vector made
//! positive) is fixed here once and inherited everywhere.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense real matrix; the carrier for every bounded operator.
pub type Mat = DMatrix<f64>;

/// Numerical thresholds used throughout.
///
/// `rank_rtol` is relative to the largest singular value; `residual_atol`
/// is an absolute residual bound (usually scaled by `1 + ‖·‖` at the
/// point of use).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rank_rtol: f64,
    pub residual_atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_rtol: 1e-10,
            residual_atol: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rtol: f64, residual_atol: f64) -> Result<Self> {
        for (name, v) in [("rank_rtol", rank_rtol), ("residual_atol", residual_atol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must lie strictly between 0 and 1, got {v}"
                )));
            }
        }
        Ok(Tolerance {
            rank_rtol,
            residual_atol,
        })
    }
}

/// Check that every entry is finite.
pub fn validate_finite(m: &Mat) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Thin SVD `M = U Σ Vᵀ` with singular values sorted descending and the
/// sign of each left singular vector fixed (largest-magnitude entry
/// positive; the matching right vector is flipped along with it).
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Mat,
    pub sigma: DVector<f64>,
    pub v_t: Mat,
}

impl Svd {
    pub fn rank(&self, tol: &Tolerance) -> usize {
        let smax = self.sigma.iter().cloned().fold(0.0, f64::max);
        if smax == 0.0 {
            return 0;
        }
        self.sigma.iter().filter(|&&s| s > tol.rank_rtol * smax).count()
    }
}

/// One-sided Jacobi SVD of `a` (rows ≥ cols assumed by the caller being
/// irrelevant — both shapes handled by transposition in `svd`). Returns
/// thin factors with `a = U Σ Vᵀ`, unsorted.
fn jacobi_svd(a: &Mat) -> (Mat, DVector<f64>, Mat) {
    let (rows, cols) = a.shape();
    debug_assert!(rows >= cols);
    let mut w = a.clone();
    let mut v = Mat::identity(cols, cols);
    let eps = 1e-15;
    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let cp = w.column(p);
                let cq = w.column(q);
                let alpha = cp.dot(&cp);
                let beta = cq.dot(&cq);
                let gamma = cp.dot(&cq);
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = cs * wp - sn * wq;
                    w[(i, q)] = sn * wp + cs * wq;
                }
                for i in 0..cols {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = cs * vp - sn * vq;
                    v[(i, q)] = sn * vp + cs * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma = DVector::zeros(cols);
    let mut u = Mat::zeros(rows, cols);
    for j in 0..cols {
        sigma[j] = w.column(j).norm();
    }
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    // Columns whose norm is at machine-noise level get σ = 0 and an
    // orthonormal completion instead of a normalized noise vector.
    let floor = smax * 1e-14;
    for j in 0..cols {
        if sigma[j] > floor && sigma[j] > 0.0 {
            let s = sigma[j];
            for i in 0..rows {
                u[(i, j)] = w[(i, j)] / s;
            }
        } else {
            sigma[j] = 0.0;
        }
    }
    // Complete u on the zero-σ columns by Gram-Schmidt over coordinate
    // candidates, so u always has orthonormal columns.
    for j in 0..cols {
        if sigma[j] != 0.0 {
            continue;
        }
        let orthogonalize = |col: &mut DVector<f64>, u: &Mat| {
            for jj in 0..cols {
                if sigma[jj] != 0.0 || jj < j {
                    let ujj = u.column(jj).into_owned();
                    let proj = ujj.dot(col);
                    *col -= proj * ujj;
                }
            }
        };
        // Coordinate candidate with the largest residual against the
        // columns already in place; re-orthogonalized once for stability.
        let mut best: Option<(f64, DVector<f64>)> = None;
        for cand in 0..rows {
            let mut col = DVector::zeros(rows);
            col[cand] = 1.0;
            orthogonalize(&mut col, &u);
            let n = col.norm();
            if best.as_ref().map_or(true, |(bn, _)| n > *bn) {
                best = Some((n, col));
            }
        }
        let (_, mut col) = best.expect("at least one candidate");
        orthogonalize(&mut col, &u);
        let n = col.norm();
        debug_assert!(n > 1e-8, "orthonormal completion failed");
        col /= n;
        u.set_column(j, &col.column(0));
    }
    (u, sigma, v)
}

/// Sign-fixed sorted SVD. Empty matrices yield empty factors.
///
/// Computed by one-sided Jacobi rotations: slower than a bidiagonal QR
/// sweep but accurate on the ill-conditioned projection products this
/// crate lives on, and fully deterministic.
pub fn svd(m: &Mat) -> Svd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Svd {
            u: Mat::zeros(rows, 0),
            sigma: DVector::zeros(0),
            v_t: Mat::zeros(0, cols),
        };
    }
    let (mut u, mut sigma, mut v_t);
    if rows >= cols {
        let (uu, ss, vv) = jacobi_svd(m);
        u = uu;
        sigma = ss;
        v_t = vv.transpose();
    } else {
        let (uu, ss, vv) = jacobi_svd(&m.transpose());
        u = vv;
        sigma = ss;
        v_t = uu.transpose();
    }

    // Sort descending (nalgebra already orders, but we do not rely on it).
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    if order.iter().enumerate().any(|(i, &o)| i != o) {
        let up = Mat::from_fn(rows, k, |r, c| u[(r, order[c])]);
        let vp = Mat::from_fn(k, cols, |r, c| v_t[(order[r], c)]);
        let sp = DVector::from_fn(k, |r, _| sigma[order[r]]);
        u = up;
        v_t = vp;
        sigma = sp;
    }

    for j in 0..k {
        let col = u.column(j);
        let mut best = 0;
        let mut best_abs = 0.0;
        for (i, &x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if u[(best, j)] < 0.0 {
            for i in 0..rows {
                u[(i, j)] = -u[(i, j)];
            }
            for c in 0..cols {
                v_t[(j, c)] = -v_t[(j, c)];
            }
        }
    }
    Svd { u, sigma, v_t }
}

/// Numerical rank: singular values above `rank_rtol · σ_max`.
pub fn rank_tol(m: &Mat, tol: &Tolerance) -> usize {
    svd(m).rank(tol)
}

/// Moore-Penrose pseudoinverse. Singular values at or below the rank
/// threshold are treated as exact zeros, so the zero matrix maps to the
/// zero matrix.
pub fn pinv(m: &Mat, tol: &Tolerance) -> Mat {
    let (rows, cols) = m.shape();
    let f = svd(m);
    let r = f.rank(tol);
    let mut out = Mat::zeros(cols, rows);
    for j in 0..r {
        let s_inv = 1.0 / f.sigma[j];
        // out += s_inv * v_j u_jᵀ
        let uj = f.u.column(j);
        let vj = f.v_t.row(j);
        for c in 0..cols {
            let vc = vj[c] * s_inv;
            if vc != 0.0 {
                for rr in 0..rows {
                    out[(c, rr)] += vc * uj[rr];
                }
            }
        }
    }
    out
}

/// Largest singular value.
pub fn op_norm(m: &Mat) -> f64 {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    svd(m).sigma.iter().cloned().fold(0.0, f64::max)
}

/// Spectral norm of the difference, the workhorse residual measure.
pub fn diff_norm(a: &Mat, b: &Mat) -> f64 {
    op_norm(&(a - b))
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn sym_eig(m: &Mat) -> (DVector<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), Mat::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let e = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| e.eigenvalues[i].partial_cmp(&e.eigenvalues[j]).unwrap());
    let vals = DVector::from_fn(n, |i, _| e.eigenvalues[order[i]]);
    let vecs = Mat::from_fn(n, n, |r, c| e.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Symmetric PSD square root. Eigenvalues at noise level (below
/// `1e-13 · λ_max`, including small negatives) are clamped to exact 0 —
/// otherwise the square root would lift 1e-16 rounding noise to 1e-8
/// singular values that later defeat rank thresholds.
pub fn sqrt_psd(m: &Mat) -> Mat {
    let (vals, vecs) = sym_eig(m);
    let n = m.nrows();
    let lmax = vals.iter().cloned().fold(0.0, f64::max);
    let floor = lmax * 1e-13;
    let d = Mat::from_diagonal(&DVector::from_fn(n, |i, _| {
        if vals[i] > floor { vals[i].sqrt() } else { 0.0 }
    }));
    &vecs * d * vecs.transpose()
}

/// Horizontal concatenation `[A | B]`.
pub fn hstack(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.nrows(), b.nrows(), "hstack row mismatch");
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

/// Vertical concatenation `[A; B]`.
pub fn vstack(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.ncols(), b.ncols(), "vstack column mismatch");
    let mut out = Mat::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

/// Penrose-equation residuals (‖MXM−M‖, ‖XMX−X‖, ‖(MX)ᵀ−MX‖, ‖(XM)ᵀ−XM‖).
pub fn penrose_residuals(m: &Mat, x: &Mat) -> [f64; 4] {
    let mx = m * x;
    let xm = x * m;
    [
        diff_norm(&(&mx * m), m),
        diff_norm(&(&xm * x), x),
        diff_norm(&mx.transpose(), &mx),
        diff_norm(&xm.transpose(), &xm),
    ]
}
