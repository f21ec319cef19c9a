//! Seeded random generators for matrices, subspaces, and compatible
//! operator/subspace instances. Used by the stochastic test suites and by
//! the randomized CLI paths; all sampling is deterministic given the rng.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::kernel::{self, Mat, Tolerance};
use crate::subspace::Subspace;

/// Matrix with iid standard normal entries.
pub fn rand_mat<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Random matrix of the given shape and exact rank.
pub fn rand_rank<R: Rng>(rng: &mut R, rows: usize, cols: usize, rank: usize) -> Mat {
    assert!(rank <= rows.min(cols));
    rand_mat(rng, rows, rank) * rand_mat(rng, rank, cols)
}

/// Random unit vector.
pub fn rand_unit<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Random subspace of the given dimension (orthonormal basis via SVD).
pub fn rand_subspace<R: Rng>(rng: &mut R, ambient: usize, dim: usize, tol: &Tolerance) -> Subspace {
    let m = rand_rank(rng, ambient, ambient.min(dim.max(1)), dim);
    let s = Subspace::span_of(&m, tol);
    debug_assert_eq!(s.dim(), dim);
    s
}

/// Random pair of subspaces together with operators `A`, `B` that agree on
/// `M ∩ N`, so the simultaneous extension is well defined.
pub struct CompatibleInstance {
    pub a: Mat,
    pub b: Mat,
    pub m: Subspace,
    pub n: Subspace,
}

/// Draw a compatible instance in `ambient` dimensions with codomain
/// `out_dim`. Subspace dimensions are drawn uniformly from `1..=ambient/2`,
/// which keeps `M ∩ N` generically trivial but does not force it.
pub fn compatible_instance<R: Rng>(
    rng: &mut R,
    ambient: usize,
    out_dim: usize,
    tol: &Tolerance,
) -> CompatibleInstance {
    let dm = rng.random_range(1..=(ambient / 2).max(1));
    let dn = rng.random_range(1..=(ambient / 2).max(1));
    let m = rand_subspace(rng, ambient, dm, tol);
    let n = rand_subspace(rng, ambient, dn, tol);
    let a = rand_mat(rng, out_dim, ambient);
    let b0 = rand_mat(rng, out_dim, ambient);
    // Correct B on M ∩ N so that A and B coincide there exactly.
    let inter = m.intersect(&n, tol).expect("same ambient");
    let p = inter.projection();
    let b = &b0 + (&a - &b0) * p;
    CompatibleInstance { a, b, m, n }
}

/// Instance with a planted intersection of dimension `k` between `M` and `N`.
pub fn planted_intersection<R: Rng>(
    rng: &mut R,
    ambient: usize,
    k: usize,
    extra_m: usize,
    extra_n: usize,
    tol: &Tolerance,
) -> (Subspace, Subspace) {
    let common = rand_mat(rng, ambient, k);
    let m = Subspace::span_of(
        &kernel::hstack(&common, &rand_mat(rng, ambient, extra_m)),
        tol,
    );
    let n = Subspace::span_of(
        &kernel::hstack(&common, &rand_mat(rng, ambient, extra_n)),
        tol,
    );
    (m, n)
}
