//! Closed-subspace algebra on orthonormal frames: spans, complements,
//! lattice operations (∩, +, ⊖), principal angles, and equality at
//! tolerance.
//!
//! Subspaces are always stored through an orthonormal basis extracted by
//! the kernel SVD; no raw spanning sets persist. The zero subspace is a
//! first-class value with a 0-column basis.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::kernel::{self, Mat, Tolerance};

#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    basis: Mat,
}

impl Subspace {
    /// Wrap an already orthonormal frame (columns). Validates
    /// `basisᵀ basis = I` to 1e-10.
    pub fn from_orthonormal(basis: Mat) -> Result<Self> {
        let ambient = basis.nrows();
        let k = basis.ncols();
        if k > ambient {
            return Err(Error::DimensionMismatch(format!(
                "{k} basis columns in ambient dimension {ambient}"
            )));
        }
        let gram = basis.transpose() * &basis;
        if kernel::diff_norm(&gram, &Mat::identity(k, k)) > 1e-10 {
            return Err(Error::DimensionMismatch(
                "basis columns are not orthonormal".into(),
            ));
        }
        Ok(Subspace { ambient, basis })
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Mat::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Mat::identity(ambient, ambient),
        }
    }

    /// Column space of `m`, via singular vectors above the rank threshold.
    pub fn span_of(m: &Mat, tol: &Tolerance) -> Self {
        let f = kernel::svd(m);
        let r = f.rank(tol);
        Subspace {
            ambient: m.nrows(),
            basis: f.u.columns(0, r).into_owned(),
        }
    }

    /// Null space of `m`, as span of `I − M†M`.
    pub fn nullspace(m: &Mat, tol: &Tolerance) -> Self {
        let n = m.ncols();
        let p = Mat::identity(n, n) - kernel::pinv(m, tol) * m;
        // p is an orthogonal projection: its singular values are 0 or 1,
        // so an absolute cut at 1/2 is immune to the noise floor that a
        // relative threshold would mistake for rank when N(m) = {0}.
        let f = kernel::svd(&p);
        let r = f.sigma.iter().filter(|&&s| s > 0.5).count();
        Subspace {
            ambient: n,
            basis: f.u.columns(0, r).into_owned(),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// Orthogonal projection matrix `basis · basisᵀ`.
    pub fn projection(&self) -> Mat {
        &self.basis * self.basis.transpose()
    }

    pub fn complement(&self) -> Self {
        // Vectors orthogonal to the basis columns.
        let tol = Tolerance::default();
        Subspace::nullspace(&self.basis.transpose(), &tol)
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            Err(Error::AmbientMismatch(self.ambient, other.ambient))
        } else {
            Ok(())
        }
    }

    /// `M ∩ N` as the nullspace of the stacked complement projections.
    pub fn intersect(&self, other: &Subspace, tol: &Tolerance) -> Result<Self> {
        self.check_ambient(other)?;
        let pm = self.complement().projection();
        let pn = other.complement().projection();
        Ok(Subspace::nullspace(&kernel::vstack(&pm, &pn), tol))
    }

    /// `M + N` as the span of the concatenated bases.
    pub fn sum(&self, other: &Subspace, tol: &Tolerance) -> Result<Self> {
        self.check_ambient(other)?;
        Ok(Subspace::span_of(
            &kernel::hstack(&self.basis, &other.basis),
            tol,
        ))
    }

    /// `M ⊖ N = M ∩ N⊥`.
    pub fn minus(&self, other: &Subspace, tol: &Tolerance) -> Result<Self> {
        self.check_ambient(other)?;
        self.intersect(&other.complement(), tol)
    }

    /// Cosines of the principal angles, nonincreasing, clamped to [0, 1].
    /// Length is `min(dim M, dim N)`; both inputs must be nonzero.
    pub fn principal_cosines(&self, other: &Subspace) -> Result<DVector<f64>> {
        self.check_ambient(other)?;
        if self.dim() == 0 || other.dim() == 0 {
            return Err(Error::ZeroSubspace);
        }
        let g = self.basis.transpose() * &other.basis;
        let f = kernel::svd(&g);
        Ok(DVector::from_fn(f.sigma.len(), |i, _| {
            f.sigma[i].clamp(0.0, 1.0)
        }))
    }

    /// Equality at tolerance: same dimension and every principal cosine
    /// at least `1 − residual_atol`.
    pub fn eq_at(&self, other: &Subspace, tol: &Tolerance) -> Result<bool> {
        self.check_ambient(other)?;
        if self.dim() != other.dim() {
            return Ok(false);
        }
        if self.dim() == 0 {
            return Ok(true);
        }
        let cosines = self.principal_cosines(other)?;
        Ok(cosines.iter().all(|&c| c >= 1.0 - tol.residual_atol))
    }

    /// Largest distance of a unit vector of `self` from `other`
    /// (sine of the largest principal angle, with dimension bookkeeping).
    pub fn contained_in(&self, other: &Subspace, tol: &Tolerance) -> Result<bool> {
        self.check_ambient(other)?;
        if self.dim() == 0 {
            return Ok(true);
        }
        if self.dim() > other.dim() {
            return Ok(false);
        }
        let cosines = self.principal_cosines(other)?;
        Ok(cosines.iter().all(|&c| c >= 1.0 - tol.residual_atol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn e(i: usize, n: usize) -> Mat {
        let mut m = Mat::zeros(n, 1);
        m[(i, 0)] = 1.0;
        m
    }

    #[test]
    fn span_of_collinear_columns() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        let s = Subspace::span_of(&m, &tol());
        assert_eq!(s.dim(), 1);
        let dir = s.basis().column(0);
        assert!((dir[0] - dir[1]).abs() < 1e-12);
    }

    #[test]
    fn span_of_zero_matrix() {
        let s = Subspace::span_of(&Mat::zeros(4, 3), &tol());
        assert_eq!(s.dim(), 0);
    }

    #[test]
    fn span_of_random_rank3() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = gen::rand_rank(&mut rng, 6, 4, 3);
        assert_eq!(Subspace::span_of(&m, &tol()).dim(), kernel::rank_tol(&m, &tol()));
        assert_eq!(Subspace::span_of(&m, &tol()).dim(), 3);
    }

    #[test]
    fn complement_basics() {
        let s = Subspace::span_of(&e(0, 2), &tol());
        let c = s.complement();
        assert_eq!(c.dim(), 1);
        assert!((c.basis().column(0)[1]).abs() > 0.999);
        assert_eq!(Subspace::full(3).complement().dim(), 0);
    }

    #[test]
    fn complement_orthogonality_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = gen::rand_subspace(&mut rng, 7, 3, &tol());
        let c = s.complement();
        assert_eq!(c.dim(), 4);
        let cross = s.basis().transpose() * c.basis();
        assert!(kernel::op_norm(&cross) <= 1e-10);
    }

    #[test]
    fn intersect_coordinate_planes() {
        let t = tol();
        let m = Subspace::span_of(&kernel::hstack(&e(0, 3), &e(1, 3)), &t);
        let n = Subspace::span_of(&kernel::hstack(&e(1, 3), &e(2, 3)), &t);
        let i = m.intersect(&n, &t).unwrap();
        assert_eq!(i.dim(), 1);
        assert!(i.eq_at(&Subspace::span_of(&e(1, 3), &t), &t).unwrap());
        // idempotence
        assert!(m.intersect(&m, &t).unwrap().eq_at(&m, &t).unwrap());
    }

    #[test]
    fn intersect_planted() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (m, n) = gen::planted_intersection(&mut rng, 10, 2, 2, 2, &t);
        assert_eq!(m.intersect(&n, &t).unwrap().dim(), 2);
    }

    #[test]
    fn sum_dimension_formula() {
        let t = tol();
        let m = Subspace::span_of(&e(0, 3), &t);
        let n = Subspace::span_of(&e(1, 3), &t);
        assert_eq!(m.sum(&n, &t).unwrap().dim(), 2);
        assert!(m.sum(&Subspace::zero(3), &t).unwrap().eq_at(&m, &t).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (m, n) = gen::planted_intersection(&mut rng, 9, 2, 3, 2, &t);
        let inter = m.intersect(&n, &t).unwrap();
        assert_eq!(
            m.sum(&n, &t).unwrap().dim(),
            m.dim() + n.dim() - inter.dim()
        );
    }

    #[test]
    fn minus_basics() {
        let t = tol();
        let m = Subspace::span_of(&kernel::hstack(&e(0, 3), &e(1, 3)), &t);
        let n = Subspace::span_of(&e(0, 3), &t);
        let d = m.minus(&n, &t).unwrap();
        assert!(d.eq_at(&Subspace::span_of(&e(1, 3), &t), &t).unwrap());
        assert_eq!(m.minus(&m, &t).unwrap().dim(), 0);
        // nested pair dimension count
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let big = gen::rand_subspace(&mut rng, 8, 5, &t);
        let small = Subspace::span_of(&(big.basis().columns(0, 2).into_owned()), &t);
        assert_eq!(big.minus(&small, &t).unwrap().dim(), 3);
    }

    #[test]
    fn principal_angles_analytic() {
        let t = tol();
        let m = Subspace::span_of(&e(0, 2), &t);
        assert!((m.principal_cosines(&m).unwrap()[0] - 1.0).abs() < 1e-14);
        let n = Subspace::span_of(&e(1, 2), &t);
        assert!(m.principal_cosines(&n).unwrap()[0].abs() < 1e-14);
        let theta: f64 = 0.3;
        let line = Mat::from_column_slice(2, 1, &[theta.cos(), theta.sin()]);
        let c = m.principal_cosines(&Subspace::span_of(&line, &t)).unwrap();
        assert!((c[0] - theta.cos()).abs() < 1e-14);
        assert!(m.principal_cosines(&Subspace::zero(2)).is_err());
    }

    #[test]
    fn eq_under_change_of_basis() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = gen::rand_subspace(&mut rng, 6, 3, &t);
        let mix = gen::rand_mat(&mut rng, 3, 3);
        let remixed = Subspace::span_of(&(m.basis() * mix), &t);
        assert!(m.eq_at(&remixed, &t).unwrap());
        let other = Subspace::span_of(&e(0, 6), &t);
        assert!(!m.eq_at(&other, &t).unwrap());
    }

    #[test]
    fn ambient_mismatch_errors() {
        let t = tol();
        let m = Subspace::full(3);
        let n = Subspace::full(4);
        assert!(matches!(
            m.intersect(&n, &t),
            Err(Error::AmbientMismatch(3, 4))
        ));
    }
}
