//! Star partial order `A ≤* C` (eq. AA* = CA* and A*A = A*C), the
//! necessary condition AA*B = AB*B / BA*A = BB*A, and the star-supremum
//! built as the canonical simultaneous extension on `N(A)⊥` and `N(B)⊥`,
//! certified by `C(A,B) = C(Aᵀ,Bᵀ)ᵀ`.

use crate::error::{Error, Result};
use crate::extension;
use crate::kernel::{self, Mat, Tolerance};
use crate::subspace::Subspace;

fn check_same_shape(a: &Mat, b: &Mat) -> Result<()> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "shapes {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// `A ≤* C` at tolerance.
pub fn star_leq(a: &Mat, c: &Mat, tol: &Tolerance) -> Result<bool> {
    check_same_shape(a, c)?;
    let scale = tol.residual_atol * (1.0 + kernel::op_norm(a) * kernel::op_norm(c));
    let r1 = kernel::diff_norm(&(a * a.transpose()), &(c * a.transpose()));
    let r2 = kernel::diff_norm(&(a.transpose() * a), &(a.transpose() * c));
    Ok(r1 <= scale && r2 <= scale)
}

/// The necessary condition for a common star upper bound:
/// `AAᵀB = ABᵀB` and `BAᵀA = BBᵀA`.
pub fn necessary_eq15(a: &Mat, b: &Mat, tol: &Tolerance) -> Result<bool> {
    check_same_shape(a, b)?;
    let na = kernel::op_norm(a);
    let nb = kernel::op_norm(b);
    let scale = tol.residual_atol * (1.0 + na * na * nb + nb * nb * na);
    let r1 = kernel::diff_norm(&(a * a.transpose() * b), &(a * b.transpose() * b));
    let r2 = kernel::diff_norm(&(b * a.transpose() * a), &(b * b.transpose() * a));
    Ok(r1 <= scale && r2 <= scale)
}

/// Why a star-supremum does not exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupremumFailure {
    /// `A` and `B` disagree on `N(A)⊥ ∩ N(B)⊥` (either the primal or the
    /// adjoint compatibility check).
    IncompatibleOnIntersection,
    /// Both extensions exist but `C(A,B) ≠ C(Aᵀ,Bᵀ)ᵀ`.
    AdjointMismatch,
}

#[derive(Debug, Clone)]
pub struct SupremumReport {
    pub exists: bool,
    pub c: Option<Mat>,
    pub reason: Option<SupremumFailure>,
}

/// Construct the star-supremum of `A` and `B`, when it exists, as the
/// canonical extension with `M = N(A)⊥`, `N = N(B)⊥` (zero on
/// `N(A) ∩ N(B)`), cross-checked against the adjoint-route construction.
pub fn star_supremum(a: &Mat, b: &Mat, tol: &Tolerance) -> Result<SupremumReport> {
    check_same_shape(a, b)?;
    let m = Subspace::span_of(&a.transpose(), tol);
    let n = Subspace::span_of(&b.transpose(), tol);
    let rep1 = extension::build(a, b, &m, &n, tol)?;
    let mt = Subspace::span_of(a, tol);
    let nt = Subspace::span_of(b, tol);
    let at = a.transpose();
    let bt = b.transpose();
    let rep2 = extension::build(&at, &bt, &mt, &nt, tol)?;
    if !rep1.compatible || !rep2.compatible {
        return Ok(SupremumReport {
            exists: false,
            c: None,
            reason: Some(SupremumFailure::IncompatibleOnIntersection),
        });
    }
    let c1 = rep1.c_canonical.unwrap();
    let c2 = rep2.c_canonical.unwrap();
    let scale = tol.residual_atol * (1.0 + kernel::op_norm(a) + kernel::op_norm(b));
    if kernel::diff_norm(&c1, &c2.transpose()) > scale {
        return Ok(SupremumReport {
            exists: false,
            c: None,
            reason: Some(SupremumFailure::AdjointMismatch),
        });
    }
    if !star_leq(a, &c1, tol)? || !star_leq(b, &c1, tol)? {
        return Err(Error::Defect(
            "existence test passed but the supremum fails star_leq".into(),
        ));
    }
    Ok(SupremumReport {
        exists: true,
        c: Some(c1),
        reason: None,
    })
}

/// At finite dimension `R(A − B)` is closed, so the necessary condition
/// is also sufficient: the shortcut returns it directly.
pub fn closed_range_shortcut(a: &Mat, b: &Mat, tol: &Tolerance) -> Result<bool> {
    necessary_eq15(a, b, tol)
}
