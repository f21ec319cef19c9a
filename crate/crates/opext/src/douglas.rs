//! Douglas-type factorization: range inclusion, bounded factor, and the
//! majorization certificate, plus the dual equation `B = XA`.

use crate::error::{Error, Result};
use crate::kernel::{self, Mat, Tolerance};

/// Result of solving `T = S X`.
#[derive(Debug, Clone)]
pub struct DouglasSolution {
    pub solvable: bool,
    /// Minimal-norm solution `S† T`, when solvable.
    pub x: Option<Mat>,
    /// Minimal majorization constant, `‖S† T‖`.
    pub lambda: Option<f64>,
    /// Smallest eigenvalue of `λ² S Sᵀ − T Tᵀ` (certificate; should be
    /// ≥ −residual_atol·scale when solvable).
    pub certificate_min_eig: Option<f64>,
}

/// Solve `T = S X`: solvable iff `R(T) ⊆ R(S)` at the rank tolerance.
pub fn douglas_solve(s: &Mat, t: &Mat, tol: &Tolerance) -> Result<DouglasSolution> {
    if s.nrows() != t.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "S has {} rows, T has {}",
            s.nrows(),
            t.nrows()
        )));
    }
    let solvable = kernel::rank_tol(&kernel::hstack(s, t), tol) == kernel::rank_tol(s, tol);
    if !solvable {
        return Ok(DouglasSolution {
            solvable: false,
            x: None,
            lambda: None,
            certificate_min_eig: None,
        });
    }
    let x = kernel::pinv(s, tol) * t;
    let lambda = kernel::op_norm(&x);
    let cert = lambda * lambda * (s * s.transpose()) - t * t.transpose();
    let (eigs, _) = kernel::sym_eig(&cert);
    let min_eig = if eigs.len() == 0 { 0.0 } else { eigs[0] };
    Ok(DouglasSolution {
        solvable: true,
        x: Some(x),
        lambda: Some(lambda),
        certificate_min_eig: Some(min_eig),
    })
}

/// Result of solving the dual equation `B = X A`.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub solvable: bool,
    /// The solution `B A†`, when solvable.
    pub x: Option<Mat>,
}

/// Solve `B = X A`: solvable iff `R(Bᵀ) ⊆ R(Aᵀ)`.
pub fn dual_solve(a: &Mat, b: &Mat, tol: &Tolerance) -> Result<DualSolution> {
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} columns, B has {}",
            a.ncols(),
            b.ncols()
        )));
    }
    let at = a.transpose();
    let bt = b.transpose();
    let solvable = kernel::rank_tol(&kernel::hstack(&at, &bt), tol) == kernel::rank_tol(&at, tol);
    let x = solvable.then(|| b * kernel::pinv(a, tol));
    Ok(DualSolution { solvable, x })
}

/// The gain `‖B A†‖ = sup_{x ⊥ N(A)} ‖Bx‖ / ‖Ax‖`; finite precisely
/// because `N(A) ⊆ N(B)` is required.
pub fn quotient_gain(a: &Mat, b: &Mat, tol: &Tolerance) -> Result<f64> {
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} columns, B has {}",
            a.ncols(),
            b.ncols()
        )));
    }
    if kernel::rank_tol(&kernel::vstack(a, b), tol) != kernel::rank_tol(a, tol) {
        return Err(Error::NullSpaceInclusion);
    }
    Ok(kernel::op_norm(&(b * kernel::pinv(a, tol))))
}
