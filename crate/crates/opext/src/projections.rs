//! Orthogonal and oblique projection constructors.
//!
//! The centerpiece is `cm_projection`, the Moore-Penrose inverse of
//! `P_{N⊥} P_M`: an idempotent with range `M ⊖ (M ∩ N)` and nullspace
//! `N ⊕ (M + N)⊥`. In finite dimension its domain is the whole space, so
//! it is an ordinary (possibly ill-conditioned) matrix.

use crate::error::Result;
use crate::kernel::{self, Mat, Tolerance};
use crate::subspace::Subspace;

/// Orthogonal projection matrix onto `s`.
pub fn orth_proj(s: &Subspace) -> Mat {
    s.projection()
}

/// The projection onto `M ⊖ (M ∩ N)` along `N ⊕ (M + N)⊥`, computed as
/// `(P_{N⊥} P_M)†`.
pub fn cm_projection(m: &Subspace, n: &Subspace, tol: &Tolerance) -> Result<Mat> {
    if m.ambient() != n.ambient() {
        return Err(crate::error::Error::AmbientMismatch(m.ambient(), n.ambient()));
    }
    let s = n.complement().projection() * m.projection();
    // The singular values of P_{N⊥}P_M are sines of the angles between M
    // and N, so the natural scale is 1: cut at rank_rtol absolutely
    // (angles below it count as intersection). A cutoff relative to σ_max
    // would amplify noise into rank when M ≈ N.
    let f = kernel::svd(&s);
    let amb = m.ambient();
    let mut q = Mat::zeros(amb, amb);
    for j in 0..f.sigma.len() {
        if f.sigma[j] > tol.rank_rtol {
            let s_inv = 1.0 / f.sigma[j];
            q += s_inv * f.v_t.row(j).transpose() * f.u.column(j).transpose();
        }
    }
    Ok(q)
}
