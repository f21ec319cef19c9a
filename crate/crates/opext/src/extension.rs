//! The simultaneous extension `C_{M,N}(A,B)`: the unique operator on
//! `M + N` agreeing with `A` on `M` and `B` on `N`, realized through the
//! oblique projection `Q = (P_{N⊥} P_M)†` as `C = (A−B)Q + B`. The module
//! also evaluates the boundedness / closability / closedness criteria,
//! which coincide at finite dimension but carry different quantitative
//! margins, and the metric supremum κ₁₃ with its [κ₁₃, 2κ₁₃] sandwich for
//! the angle-test quantity.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{self, Mat, Tolerance};
use crate::projections;
use crate::subspace::Subspace;

/// Everything `build` knows about one instance.
#[derive(Debug, Clone)]
pub struct ExtensionReport {
    pub compatible: bool,
    /// Max residual ‖(A−B)v‖ over unit v ∈ M∩N.
    pub incompat_residual: f64,
    /// Extension equal to `B` on `(M+N)⊥`; absent when incompatible.
    pub c_full: Option<Mat>,
    /// Extension vanishing on `(M+N)⊥`: `C_full · P_{M+N}`.
    pub c_canonical: Option<Mat>,
    pub bounded: bool,
    pub bounded_margin: f64,
    pub closable: bool,
    pub closed: bool,
    /// `‖C restricted to M+N‖`.
    pub extension_norm: f64,
    /// κ₁₃, present when M∩N = {0} and M ≠ {0}.
    pub metric_sup: Option<f64>,
}

fn check_shapes(a: &Mat, b: &Mat, m: &Subspace, n: &Subspace) -> Result<()> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if m.ambient() != n.ambient() {
        return Err(Error::AmbientMismatch(m.ambient(), n.ambient()));
    }
    if a.ncols() != m.ambient() {
        return Err(Error::DimensionMismatch(format!(
            "operator domain {} vs ambient {}",
            a.ncols(),
            m.ambient()
        )));
    }
    Ok(())
}

/// Does an extension exist? True iff `A` and `B` coincide on `M ∩ N`;
/// also returns the largest disagreement residual over unit vectors there.
pub fn compatible(a: &Mat, b: &Mat, m: &Subspace, n: &Subspace, tol: &Tolerance) -> Result<(bool, f64)> {
    check_shapes(a, b, m, n)?;
    let inter = m.intersect(n, tol)?;
    if inter.dim() == 0 {
        return Ok((true, 0.0));
    }
    let d = (a - b) * inter.basis();
    let residual = kernel::op_norm(&d);
    let scale = 1.0 + kernel::op_norm(&(a - b));
    Ok((residual <= tol.residual_atol * scale, residual))
}

/// Construct the extension and evaluate every criterion. An incompatible
/// instance yields a report with `compatible = false` and no matrices.
pub fn build(a: &Mat, b: &Mat, m: &Subspace, n: &Subspace, tol: &Tolerance) -> Result<ExtensionReport> {
    let (ok, incompat_residual) = compatible(a, b, m, n, tol)?;
    if !ok {
        return Ok(ExtensionReport {
            compatible: false,
            incompat_residual,
            c_full: None,
            c_canonical: None,
            bounded: false,
            bounded_margin: 0.0,
            closable: false,
            closed: false,
            extension_norm: f64::NAN,
            metric_sup: None,
        });
    }
    let q = projections::cm_projection(m, n, tol)?;
    let c_full = (a - b) * q + b;
    let p_sum = m.sum(n, tol)?.projection();
    let c_canonical = &c_full * &p_sum;
    let extension_norm = kernel::op_norm(&c_canonical);
    let (bounded, bounded_margin) = bounded_criterion(a, b, m, n, tol)?;
    let closable = closable_criterion(a, b, m, n, tol)?;
    let closed = closed_criterion(a, b, m, n, tol)?;
    let metric = if m.dim() > 0 && m.intersect(n, tol)?.dim() == 0 {
        metric_sup(a, b, m, n, tol).ok().map(|r| r.kappa13)
    } else {
        None
    };
    Ok(ExtensionReport {
        compatible: true,
        incompat_residual,
        c_full: Some(c_full),
        c_canonical: Some(c_canonical),
        bounded,
        bounded_margin,
        closable,
        closed,
        extension_norm,
        metric_sup: metric,
    })
}

/// Boundedness criterion: `R(Aᵀ − Bᵀ) ⊆ M⊥ + N⊥`.
///
/// The margin quantifies how robustly the inclusion is satisfied: with
/// `Z = [basis M⊥ | basis N⊥]` and `U` an orthonormal basis of
/// `R(Aᵀ−Bᵀ)`, it is `1 / (‖Z† U‖ · ‖Z‖)` — the reciprocal (relative)
/// coefficient size needed to represent the range inside the sum. It is
/// 1 for a zero range, 0 when the inclusion fails, and decays toward 0
/// exactly when the range leans on nearly-escaping directions of
/// `M⊥ + N⊥` (the truncation families drive it to 0).
pub fn bounded_criterion(
    a: &Mat,
    b: &Mat,
    m: &Subspace,
    n: &Subspace,
    tol: &Tolerance,
) -> Result<(bool, f64)> {
    check_shapes(a, b, m, n)?;
    let d_t = (a - b).transpose();
    let range = Subspace::span_of(&d_t, tol);
    if range.dim() == 0 {
        return Ok((true, 1.0));
    }
    let w = m.complement().sum(&n.complement(), tol)?;
    let stacked = kernel::hstack(w.basis(), range.basis());
    let ok = kernel::rank_tol(&stacked, tol) == w.dim();
    if !ok {
        return Ok((false, 0.0));
    }
    let z = kernel::hstack(m.complement().basis(), n.complement().basis());
    let coeff = kernel::op_norm(&(kernel::pinv(&z, tol) * range.basis()));
    let margin = if coeff <= 0.0 {
        1.0
    } else {
        (1.0 / (coeff * kernel::op_norm(&z).max(1e-300))).min(1.0)
    };
    Ok((ok, margin))
}

/// Closability criterion: `(Aᵀ−Bᵀ)⁻¹(M⊥ + N⊥)` dense — at finite
/// dimension, equal to the whole domain.
pub fn closable_criterion(a: &Mat, b: &Mat, m: &Subspace, n: &Subspace, tol: &Tolerance) -> Result<bool> {
    check_shapes(a, b, m, n)?;
    // Preimage of W under D = Aᵀ−Bᵀ: null(D) ⊕ D†(R(D) ∩ W); totality
    // means its dimension reaches the full domain dimension.
    let d = (a - b).transpose();
    let w = m.complement().sum(&n.complement(), tol)?;
    let range = Subspace::span_of(&d, tol);
    let hit = range.intersect(&w, tol)?;
    let null_dim = d.ncols() - kernel::rank_tol(&d, tol);
    Ok(null_dim + hit.dim() == d.ncols())
}

/// Closedness criterion: `R(Aᵀ−Bᵀ) + M⊥ + N⊥ = cl(M⊥ + N⊥)`; at finite
/// dimension the closure is the sum itself, so this is a subspace equality.
pub fn closed_criterion(a: &Mat, b: &Mat, m: &Subspace, n: &Subspace, tol: &Tolerance) -> Result<bool> {
    check_shapes(a, b, m, n)?;
    let w = m.complement().sum(&n.complement(), tol)?;
    let range = Subspace::span_of(&(a - b).transpose(), tol);
    range.sum(&w, tol)?.eq_at(&w, tol)
}

#[derive(Debug, Clone)]
pub struct MetricReport {
    /// `max over unit m ∈ M of ‖(A−B)m‖² / (1 − ‖P_N m‖²)`.
    pub kappa13: f64,
    /// The eq.-(12) value is sandwiched in `[kappa13, 2·kappa13]`.
    pub kappa12_bounds: (f64, f64),
    /// A maximizing unit vector of the pencil, in ambient coordinates.
    pub maximizer: DVector<f64>,
}

/// The metric supremum κ₁₃, solved exactly as the largest generalized
/// eigenvalue of the pencil `(G_D, G_⊥)` on `M`'s coordinates, whitened
/// by the eigendecomposition of `G_⊥`.
pub fn metric_sup(a: &Mat, b: &Mat, m: &Subspace, n: &Subspace, tol: &Tolerance) -> Result<MetricReport> {
    check_shapes(a, b, m, n)?;
    if m.dim() == 0 {
        return Err(Error::ZeroSubspace);
    }
    let bm = m.basis();
    let d = (a - b) * bm;
    let g_d = d.transpose() * &d;
    let amb = m.ambient();
    let g_perp = bm.transpose() * (Mat::identity(amb, amb) - n.projection()) * bm;
    let (lam, v) = kernel::sym_eig(&(0.5 * (&g_perp + g_perp.transpose())));
    let lam_max = lam[lam.len() - 1].max(0.0);
    if lam[0] <= tol.rank_rtol * lam_max.max(1.0) {
        // G_⊥ singular: some unit vector of M lies in N.
        return Err(Error::NontrivialIntersection);
    }
    // Whitening W = V Λ^{-1/2}; pencil becomes the symmetric matrix WᵀG_D W.
    let k = lam.len();
    let w = &v * Mat::from_fn(k, k, |i, j| if i == j { lam[i].powf(-0.5) } else { 0.0 });
    let sym = w.transpose() * &g_d * &w;
    let (mu, u) = kernel::sym_eig(&(0.5 * (&sym + sym.transpose())));
    let kappa13 = mu[mu.len() - 1].max(0.0);
    let coeffs = &w * u.column(k - 1).into_owned();
    let mut maximizer = bm * coeffs;
    let nrm = maximizer.norm();
    if nrm > 0.0 {
        maximizer /= nrm;
    }
    Ok(MetricReport {
        kappa13,
        kappa12_bounds: (kappa13, 2.0 * kappa13),
        maximizer,
    })
}

/// Monte-Carlo estimate of the eq.-(12) supremum
/// `sup ‖(A−B)m‖² / (1 − ‖P_N m‖)` over unit `m ∈ M`. The sample set
/// always includes the exact pencil maximizer, so the estimate is never
/// below κ₁₃.
pub fn metric_mc_estimate(
    a: &Mat,
    b: &Mat,
    m: &Subspace,
    n: &Subspace,
    samples: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<f64> {
    let report = metric_sup(a, b, m, n, tol)?;
    let d = a - b;
    let pn = n.projection();
    let ratio = |v: &DVector<f64>| -> f64 {
        let num = (&d * v).norm_squared();
        let den = 1.0 - (&pn * v).norm();
        if den <= 0.0 { f64::INFINITY } else { num / den }
    };
    let mut best = ratio(&report.maximizer);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = m.dim();
    for _ in 0..samples {
        let c = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let nrm = c.norm();
        if nrm < 1e-12 {
            continue;
        }
        let v = m.basis() * (c / nrm);
        let r = ratio(&v);
        if r > best {
            best = r;
        }
    }
    Ok(best)
}
