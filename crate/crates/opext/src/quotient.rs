//! Quotient operators `B/A`: the multivalued map `Ax ↦ Bx`, single valued
//! exactly when `N(A) ⊆ N(B)`. At finite dimension every quotient is the
//! bounded matrix `B A†` restricted to `R(A)`, so the interesting content
//! is the algebra (parallel sums, addition through the representers) and
//! the classification margins that later feed the truncation diagnostics.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::kernel::{self, Mat, Tolerance};
use crate::subspace::Subspace;

/// The quotient `B/A` with `N(A) ⊆ N(B)` validated at construction.
#[derive(Debug, Clone)]
pub struct QuotientOp {
    a: Mat,
    b: Mat,
    tol: Tolerance,
}

/// Classification of a quotient, with quantitative margins.
#[derive(Debug, Clone)]
pub struct QuotientClass {
    pub bounded: bool,
    pub closable: bool,
    pub closed: bool,
    /// `‖B A†‖` when bounded.
    pub bounded_margin: f64,
    /// Smallest nonzero singular value of the normalized graph stack.
    pub closed_margin: f64,
}

impl QuotientOp {
    /// Build `B/A`, checking shapes and the null-space inclusion
    /// `N(A) ⊆ N(B)` (equivalently, stacking `B` under `A` adds no rank).
    pub fn new(a: Mat, b: Mat, tol: Tolerance) -> Result<Self> {
        if a.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "domain mismatch: A has {} columns, B has {}",
                a.ncols(),
                b.ncols()
            )));
        }
        kernel::validate_finite(&a)?;
        kernel::validate_finite(&b)?;
        if kernel::rank_tol(&kernel::vstack(&a, &b), &tol) != kernel::rank_tol(&a, &tol) {
            return Err(Error::NullSpaceInclusion);
        }
        Ok(QuotientOp { a, b, tol })
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn b(&self) -> &Mat {
        &self.b
    }

    /// Domain of the quotient, `R(A)`.
    pub fn domain(&self) -> Subspace {
        Subspace::span_of(&self.a, &self.tol)
    }

    /// Apply the quotient to `y`: returns `(B A† y, ‖A A† y − y‖)`. The
    /// second component measures membership of `y` in `R(A)`; the value is
    /// only meaningful when it is small.
    pub fn q_apply(&self, y: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        if y.len() != self.a.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} vs codomain {}",
                y.len(),
                self.a.nrows()
            )));
        }
        let apinv = kernel::pinv(&self.a, &self.tol);
        let x = &apinv * y;
        let residual = (&self.a * &x - y).norm();
        Ok((&self.b * x, residual))
    }

    /// The matrix `B A†`: the quotient on `R(A)`, zero on `R(A)⊥`.
    pub fn to_matrix(&self) -> Mat {
        &self.b * kernel::pinv(&self.a, &self.tol)
    }

    /// Decompose `y = y_r + y_⊥` against `R(A)`, returning
    /// `(A† y, y_r, y_⊥)` with `A(A†y) = y_r`.
    pub fn preimage_decomposition(
        &self,
        y: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        if y.len() != self.a.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} vs codomain {}",
                y.len(),
                self.a.nrows()
            )));
        }
        let x = kernel::pinv(&self.a, &self.tol) * y;
        let yr = &self.a * &x;
        let yp = y - &yr;
        Ok((x, yr, yp))
    }

    /// Classify the quotient. At finite dimension every single-valued
    /// quotient is closed and bounded; the margins quantify how robustly.
    pub fn classify(&self) -> QuotientClass {
        let bounded_margin = kernel::op_norm(&self.to_matrix());
        // Graph of the quotient: columns (Ax, Bx) for x spanning N(A)⊥,
        // normalized so the margin is scale free.
        let stack = kernel::vstack(&self.a, &self.b);
        let f = kernel::svd(&stack);
        let r = f.rank(&self.tol);
        let closed_margin = if r == 0 {
            1.0
        } else {
            f.sigma[r - 1] / f.sigma[0]
        };
        QuotientClass {
            bounded: true,
            closable: true,
            closed: true,
            bounded_margin,
            closed_margin,
        }
    }

    /// Residual of the graph isometry: with `D = (AᵀA + BᵀB)^{1/2}`, the
    /// maps `A D†` and `B D†` have `‖(AD†)ᵀ(AD†) + (BD†)ᵀ(BD†) − P_{R(D)}‖`
    /// equal to zero. Returns that residual.
    pub fn graph_isometry_residual(&self) -> f64 {
        let g = self.a.transpose() * &self.a + self.b.transpose() * &self.b;
        let d = kernel::sqrt_psd(&g);
        let dp = kernel::pinv(&d, &self.tol);
        let ca = &self.a * &dp;
        let cb = &self.b * &dp;
        let sum = ca.transpose() * &ca + cb.transpose() * &cb;
        let proj = Subspace::span_of(&d, &self.tol).projection();
        kernel::diff_norm(&sum, &proj)
    }
}

/// Parallel sum `P : Q = Q (P + Q)† P` of two symmetric PSD matrices.
pub fn parallel_sum(p: &Mat, q: &Mat, tol: &Tolerance) -> Result<Mat> {
    if p.nrows() != q.nrows() || p.ncols() != q.ncols() || p.nrows() != p.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "parallel sum needs equal square matrices, got {}x{} and {}x{}",
            p.nrows(),
            p.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    check_psd(p, tol)?;
    check_psd(q, tol)?;
    Ok(q * kernel::pinv(&(p + q), tol) * p)
}

fn check_psd(m: &Mat, tol: &Tolerance) -> Result<()> {
    let scale = kernel::op_norm(m).max(1.0);
    if kernel::diff_norm(m, &m.transpose()) > tol.residual_atol * scale {
        return Err(Error::NotPsd("matrix is not symmetric".into()));
    }
    let (eigs, _) = kernel::sym_eig(&(0.5 * (m + m.transpose())));
    if eigs.len() > 0 && eigs[0] < -tol.residual_atol * scale {
        return Err(Error::NotPsd(format!("minimum eigenvalue {:.3e}", eigs[0])));
    }
    Ok(())
}

/// Sum of two quotients `B₁/A₁ + B₂/A₂` as a quotient `B'/A'` with
/// `A' = S^{1/2}` for `S = (A₁A₁ᵀ) : (A₂A₂ᵀ)` and
/// `B' = (B₁A₁† + B₂A₂†) S^{1/2}`. The domain of the sum is
/// `R(A₁) ∩ R(A₂) = R(S^{1/2})`, and on it the new quotient acts as the
/// pointwise sum.
pub fn q_add(q1: &QuotientOp, q2: &QuotientOp, tol: &Tolerance) -> Result<QuotientOp> {
    if q1.a.nrows() != q2.a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "codomain mismatch: {} vs {}",
            q1.a.nrows(),
            q2.a.nrows()
        )));
    }
    if q1.b.nrows() != q2.b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "value codomain mismatch: {} vs {}",
            q1.b.nrows(),
            q2.b.nrows()
        )));
    }
    let s = parallel_sum(&(&q1.a * q1.a.transpose()), &(&q2.a * q2.a.transpose()), tol)?;
    let a_new = kernel::sqrt_psd(&(0.5 * (&s + s.transpose())));
    let b_new = (q1.to_matrix() + q2.to_matrix()) * &a_new;
    QuotientOp::new(a_new, b_new, tol.clone())
}
