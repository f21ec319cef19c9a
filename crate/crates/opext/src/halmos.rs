//! Halmos two-projections decomposition: split the ambient space into the
//! four corner intersections plus a generic-position pair (M₀, M₁), on
//! which `P_N` takes the canonical block form
//! `[[1−S², S√(1−S²)Rᵀ], [RS√(1−S²), RS²Rᵀ]]` with `S = sin Θ` built from
//! the principal angles strictly between 0 and π/2.

use crate::error::{Error, Result};
use crate::kernel::{self, Mat, Tolerance};
use crate::subspace::Subspace;

#[derive(Debug, Clone)]
pub struct HalmosDecomposition {
    pub corner_mn: Subspace,
    pub corner_mnp: Subspace,
    pub corner_mpn: Subspace,
    pub corner_mpnp: Subspace,
    /// Generic-position part of `M`, in its principal-vector basis.
    pub m0: Subspace,
    /// Generic-position part of `M⊥`.
    pub m1: Subspace,
    /// Orthogonal `dim M1 × dim M0` matrix pairing principal vectors.
    pub r: Mat,
    /// `diag(sin Θ)`, eigenvalues strictly inside (0, 1).
    pub s: Mat,
    /// ‖P_N on M0 ⊕ M1 − block formula‖.
    pub reconstruction_residual: f64,
}

/// Compute the six-space decomposition for the pair `(M, N)`.
pub fn decompose(m: &Subspace, n: &Subspace, tol: &Tolerance) -> Result<HalmosDecomposition> {
    if m.ambient() != n.ambient() {
        return Err(Error::AmbientMismatch(m.ambient(), n.ambient()));
    }
    let mp = m.complement();
    let np = n.complement();
    let corner_mn = m.intersect(n, tol)?;
    let corner_mnp = m.intersect(&np, tol)?;
    let corner_mpn = mp.intersect(n, tol)?;
    let corner_mpnp = mp.intersect(&np, tol)?;
    let m0_raw = m.minus(&corner_mn.sum(&corner_mnp, tol)?, tol)?;
    let m1_raw = mp.minus(&corner_mpn.sum(&corner_mpnp, tol)?, tol)?;
    if m0_raw.dim() != m1_raw.dim() {
        return Err(Error::Defect(format!(
            "generic-position parts have dimensions {} and {}",
            m0_raw.dim(),
            m1_raw.dim()
        )));
    }
    let k = m0_raw.dim();
    if k == 0 {
        return Ok(HalmosDecomposition {
            corner_mn,
            corner_mnp,
            corner_mpn,
            corner_mpnp,
            m0: m0_raw,
            m1: m1_raw,
            r: Mat::zeros(0, 0),
            s: Mat::zeros(0, 0),
            reconstruction_residual: 0.0,
        });
    }
    // Principal pairs between M0 and N: cosines strictly in (0,1) because
    // the corner directions have been removed.
    let g = n.basis().transpose() * m0_raw.basis();
    let f = kernel::svd(&g);
    let mut p_cols = Mat::zeros(m.ambient(), k);
    let mut r_cols = Mat::zeros(m.ambient(), k);
    let mut s = Mat::zeros(k, k);
    for j in 0..k {
        let c = f.sigma[j].clamp(0.0, 1.0);
        let sj = (1.0 - c * c).sqrt();
        if c >= 1.0 - tol.rank_rtol || c <= tol.rank_rtol {
            return Err(Error::Defect(format!(
                "principal cosine {c:.3e} not strictly between 0 and 1 after corner removal"
            )));
        }
        let p = m0_raw.basis() * f.v_t.row(j).transpose();
        let q = n.basis() * f.u.column(j).into_owned();
        let r = (&q - c * &p) / sj;
        p_cols.set_column(j, &p.column(0));
        r_cols.set_column(j, &r.column(0));
        s[(j, j)] = sj;
    }
    let m0 = Subspace::from_orthonormal(p_cols)?;
    let m1 = m1_raw;
    let r = m1.basis().transpose() * &r_cols;
    // Reconstruction check of P_N on M0 ⊕ M1 in the (principal, M1) basis.
    let frame = kernel::hstack(m0.basis(), m1.basis());
    let actual = frame.transpose() * n.projection() * &frame;
    let c2 = Mat::from_fn(k, k, |i, j| if i == j { 1.0 - s[(i, i)] * s[(i, i)] } else { 0.0 });
    let sc = Mat::from_fn(k, k, |i, j| {
        if i == j {
            s[(i, i)] * (1.0 - s[(i, i)] * s[(i, i)]).sqrt()
        } else {
            0.0
        }
    });
    let top = kernel::hstack(&c2, &(&sc * r.transpose()));
    let bottom = kernel::hstack(&(&r * &sc), &(&r * &s * &s * r.transpose()));
    let expected = kernel::vstack(&top, &bottom);
    let reconstruction_residual = kernel::diff_norm(&actual, &expected);
    Ok(HalmosDecomposition {
        corner_mn,
        corner_mnp,
        corner_mpn,
        corner_mpnp,
        m0,
        m1,
        r,
        s,
        reconstruction_residual,
    })
}

/// `M + N` is closed iff `M₀ = {0}` or `S` is invertible; the margin is
/// the smallest eigenvalue of `S` (1 when `M₀` is trivial). At finite
/// dimension the boolean is always true; the margin is the content.
pub fn closedness_test(d: &HalmosDecomposition, tol: &Tolerance) -> (bool, f64) {
    if d.m0.dim() == 0 {
        return (true, 1.0);
    }
    let min_s = (0..d.s.nrows()).map(|i| d.s[(i, i)]).fold(f64::INFINITY, f64::min);
    (min_s > tol.rank_rtol, min_s)
}

/// Boundedness of the extension through the Halmos form: with `D` the
/// restriction of `A − B` to `M₀`, the test is `R(Dᵀ) ⊆ R(S)`.
pub fn bounded_via_halmos(a: &Mat, b: &Mat, d: &HalmosDecomposition, tol: &Tolerance) -> Result<bool> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if d.m0.dim() == 0 {
        return Ok(true);
    }
    let dd = (a - b) * d.m0.basis();
    let stacked = kernel::hstack(&d.s, &dd.transpose());
    Ok(kernel::rank_tol(&stacked, tol) == kernel::rank_tol(&d.s, tol))
}
