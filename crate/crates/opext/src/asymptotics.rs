//! Galerkin truncation families on ℓ²(N) × ℓ²(N) and the growth harness
//! that turns bounded/unbounded/closable verdicts into measurable curves.
//!
//! The built-in families live on ambient dimension 2n, coordinates
//! `(x₁..x_n, y₁..y_n)`, with `M = K × {0}` and `N = Γ(T₁)` the graph of
//! `T₁ : e_i ↦ e_i / i`. This geometry block-diagonalizes into n
//! independent 2×2 blocks `span{(e_i,0),(0,e_i)}`, so the built-in
//! diagnostics are evaluated exactly in O(n) from the per-block closed
//! forms; the dense pipeline (extension/halmos/metric modules) is used
//! for the adversarial family and as a cross-check at small n.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension;
use crate::halmos;
use crate::kernel::{self, Mat, Tolerance};
use crate::subspace::Subspace;
use crate::gen;

/// Subspace geometry an adversarial family is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseGeometry {
    /// `M = K × {0}`, `N = Γ(T₁)`: gap margin decays like 1/n.
    Example31Graph,
    /// `M = K × {0}`, `N = {0} × K`: gap margin identically 1.
    OrthogonalPair,
}

#[derive(Debug, Clone)]
enum FamilyKind {
    Example31 { alpha: f64 },
    RankOne,
    Adversarial { base: BaseGeometry, seed: u64 },
}

/// A deterministic rule `n ↦ (A_n, B_n, M_n, N_n)` in ambient dimension 2n.
#[derive(Debug, Clone)]
pub struct TruncationFamily {
    pub name: String,
    kind: FamilyKind,
}

/// One generated truncation level.
#[derive(Debug, Clone)]
pub struct Instance {
    pub a: Mat,
    pub b: Mat,
    pub m: Subspace,
    pub n: Subspace,
}

/// Probe direction rule; always normalized to a unit vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZRule {
    Zero,
    /// `(e₁, 0)`.
    E1,
    /// `(y_n, 0) / ‖y_n‖` with `y_n = (1, 1/2, …, 1/n)`.
    NormalizedY,
}

/// Classification thresholds; heuristics, not claims — reports always
/// carry the raw curves.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Thresholds {
    /// Log-log slope above which a monotone tail is called unbounded.
    pub slope: f64,
    /// Final/initial probe-norm ratio below which the probe vanishes.
    pub probe_ratio: f64,
    /// Max probe residual for the vanishing verdict to count.
    pub probe_residual_max: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            slope: 0.2,
            probe_ratio: 0.1,
            probe_residual_max: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    #[serde(rename = "BOUNDED_TREND")]
    BoundedTrend,
    #[serde(rename = "UNBOUNDED_TREND")]
    UnboundedTrend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProbeFlag {
    #[serde(rename = "PROBE_VANISHING")]
    ProbeVanishing,
    #[serde(rename = "PROBE_BOUNDED_AWAY")]
    ProbeBoundedAway,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub family: String,
    pub ns: Vec<usize>,
    pub extension_norms: Vec<f64>,
    pub gap_margins: Vec<f64>,
    pub metric_sups: Vec<Option<f64>>,
    pub probe_norms: Vec<f64>,
    pub probe_residuals: Vec<f64>,
    pub slope: f64,
    pub classification: Classification,
    pub probe_flag: ProbeFlag,
    pub thresholds: Thresholds,
}

fn harmonic(n: usize, p: i32) -> f64 {
    (1..=n).map(|i| (i as f64).powi(-p)).sum()
}

impl TruncationFamily {
    /// `T_α`-graph family: `A(x,y) = (T_α x, 0)`, `B = 0`.
    pub fn example31(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be nonnegative, got {alpha}"
            )));
        }
        Ok(TruncationFamily {
            name: format!("example31(alpha={alpha})"),
            kind: FamilyKind::Example31 { alpha },
        })
    }

    /// Rank-one family: `A` the orthogonal projection onto
    /// `span{(y_n, 0)}` with `y_n = (1, 1/2, …, 1/n)`, `B = 0`.
    pub fn rank_one() -> Self {
        TruncationFamily {
            name: "rank_one".into(),
            kind: FamilyKind::RankOne,
        }
    }

    /// Adversarial family on a base geometry whose sum gap decays:
    /// `A = y · (P_M x_n)ᵀ` with `x_n` the most poorly represented unit
    /// direction of `M⊥ + N⊥` at level n (smallest singular vector of the
    /// stacked complement frames) and `y` a seeded random unit vector;
    /// `B = 0` (the intersection is trivial). Bases with a closed-sum
    /// geometry (gap margin bounded below) are rejected.
    pub fn adversarial(base: BaseGeometry, seed: u64) -> Result<Self> {
        let tol = Tolerance::default();
        let margin_at = |n: usize| -> Result<f64> {
            let (m, nn) = base_geometry(base, n);
            let d = halmos::decompose(&m, &nn, &tol)?;
            Ok(halmos::closedness_test(&d, &tol).1)
        };
        if margin_at(32)? > 0.5 * margin_at(8)? {
            return Err(Error::ClosedSumGeometry);
        }
        Ok(TruncationFamily {
            name: format!("adversarial(seed={seed})"),
            kind: FamilyKind::Adversarial { base, seed },
        })
    }

    /// Dense instance at level n (ambient 2n).
    pub fn generate(&self, n: usize) -> Result<Instance> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let tol = Tolerance::default();
        match &self.kind {
            FamilyKind::Example31 { alpha } => {
                let (m, nn) = base_geometry(BaseGeometry::Example31Graph, n);
                let mut a = Mat::zeros(2 * n, 2 * n);
                for i in 0..n {
                    a[(i, i)] = ((i + 1) as f64).powf(-alpha);
                }
                Ok(Instance { a, b: Mat::zeros(2 * n, 2 * n), m, n: nn })
            }
            FamilyKind::RankOne => {
                let (m, nn) = base_geometry(BaseGeometry::Example31Graph, n);
                let v = y0_vector(n);
                let a = (&v * v.transpose()) / v.norm_squared();
                Ok(Instance { a, b: Mat::zeros(2 * n, 2 * n), m, n: nn })
            }
            FamilyKind::Adversarial { base, seed } => {
                let (m, nn) = base_geometry(*base, n);
                let z = kernel::hstack(m.complement().basis(), nn.complement().basis());
                let f = kernel::svd(&z);
                let r = f.rank(&tol);
                if r == 0 {
                    return Err(Error::Generation {
                        n,
                        source: Box::new(Error::ZeroSubspace),
                    });
                }
                let x = f.u.column(r - 1).into_owned();
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(n as u64));
                let y = gen::rand_unit(&mut rng, 2 * n);
                let pmx = m.projection() * x;
                let a = &y * pmx.transpose();
                Ok(Instance { a, b: Mat::zeros(2 * n, 2 * n), m, n: nn })
            }
        }
    }

    /// Exact per-level diagnostics: closed forms for the block-diagonal
    /// built-ins, the dense pipeline otherwise.
    pub fn diagnostics(&self, n: usize, z: ZRule, tol: &Tolerance) -> Result<DiagRow> {
        match &self.kind {
            FamilyKind::Example31 { alpha } => Ok(diag_example31(*alpha, n, z)),
            FamilyKind::RankOne => Ok(diag_rank_one(n, z)),
            FamilyKind::Adversarial { .. } => {
                let inst = self.generate(n).map_err(|e| Error::Generation {
                    n,
                    source: Box::new(e),
                })?;
                dense_diagnostics(&inst, z, tol)
            }
        }
    }
}

/// Per-n measurement row.
#[derive(Debug, Clone)]
pub struct DiagRow {
    pub extension_norm: f64,
    pub gap_margin: f64,
    pub metric_sup: Option<f64>,
    pub probe_norm: f64,
    pub probe_residual: f64,
}

fn base_geometry(base: BaseGeometry, n: usize) -> (Subspace, Subspace) {
    let amb = 2 * n;
    let mut mb = Mat::zeros(amb, n);
    for i in 0..n {
        mb[(i, i)] = 1.0;
    }
    let m = Subspace::from_orthonormal(mb).expect("coordinate frame");
    let nb = match base {
        BaseGeometry::Example31Graph => {
            let mut nb = Mat::zeros(amb, n);
            for i in 0..n {
                let ii = (i + 1) as f64;
                let s = (1.0 + 1.0 / (ii * ii)).sqrt();
                nb[(i, i)] = 1.0 / s;
                nb[(n + i, i)] = 1.0 / (ii * s);
            }
            nb
        }
        BaseGeometry::OrthogonalPair => {
            let mut nb = Mat::zeros(amb, n);
            for i in 0..n {
                nb[(n + i, i)] = 1.0;
            }
            nb
        }
    };
    let nn = Subspace::from_orthonormal(nb).expect("graph frame");
    (m, nn)
}

/// `(y_n, 0)` as a 2n-vector, `y_i = 1/i`.
fn y0_vector(n: usize) -> DVector<f64> {
    DVector::from_fn(2 * n, |j, _| if j < n { 1.0 / ((j + 1) as f64) } else { 0.0 })
}

fn diag_example31(alpha: f64, n: usize, z: ZRule) -> DiagRow {
    // Block i of C = (A−B)Q + B is i^{-α}·[[1, −i],[0,0]].
    let mut extension_norm: f64 = 0.0;
    let mut metric: f64 = 0.0;
    for i in 1..=n {
        let ii = i as f64;
        extension_norm = extension_norm.max(ii.powf(-alpha) * (1.0 + ii * ii).sqrt());
        metric = metric.max(ii.powf(-2.0 * alpha) * (1.0 + ii * ii));
    }
    let nf = n as f64;
    let gap_margin = 1.0 / (1.0 + nf * nf).sqrt();
    let (probe_norm, probe_residual) = match z {
        ZRule::Zero => (0.0, 0.0),
        // Only block 1 meets (e₁,0); min-norm solution of u₁ − u₂ = 1.
        ZRule::E1 => (0.5_f64.sqrt(), 0.0),
        ZRule::NormalizedY => {
            // block i: i^{-α}(u₁ − i u₂) = z_i with z_i = (1/i)/‖y‖.
            let h2 = harmonic(n, 2);
            let norm_sq: f64 = (1..=n)
                .map(|i| {
                    let ii = i as f64;
                    (1.0 / (ii * ii) / h2) * ii.powf(2.0 * alpha) / (1.0 + ii * ii)
                })
                .sum();
            (norm_sq.sqrt(), 0.0)
        }
    };
    DiagRow {
        extension_norm,
        gap_margin,
        metric_sup: Some(metric),
        probe_norm,
        probe_residual,
    }
}

fn diag_rank_one(n: usize, z: ZRule) -> DiagRow {
    // C = (y,0) wᵀ / ‖y‖² with w in block coordinates (1/i, −1).
    let h2 = harmonic(n, 2);
    let w_norm_sq = h2 + n as f64;
    let extension_norm = (w_norm_sq / h2).sqrt();
    let nf = n as f64;
    let gap_margin = 1.0 / (1.0 + nf * nf).sqrt();
    let metric = (nf + h2) / h2;
    let (probe_norm, probe_residual) = match z {
        ZRule::Zero => (0.0, 0.0),
        ZRule::E1 => {
            // C† (e₁,0) = w / ‖w‖²; residual ‖(y,0)/‖y‖² − (e₁,0)‖.
            let res = (1.0 - 1.0 / h2).max(0.0).sqrt();
            (1.0 / w_norm_sq.sqrt(), res)
        }
        ZRule::NormalizedY => ((h2 / w_norm_sq).sqrt(), 0.0),
    };
    DiagRow {
        extension_norm,
        gap_margin,
        metric_sup: Some(metric),
        probe_norm,
        probe_residual,
    }
}

/// Full dense pipeline for one instance: extension build, Halmos gap
/// margin, metric supremum, and the minimum-norm probe `C† z`.
pub fn dense_diagnostics(inst: &Instance, z: ZRule, tol: &Tolerance) -> Result<DiagRow> {
    let rep = extension::build(&inst.a, &inst.b, &inst.m, &inst.n, tol)?;
    if !rep.compatible {
        return Err(Error::Incompatible {
            residual: rep.incompat_residual,
        });
    }
    let d = halmos::decompose(&inst.m, &inst.n, tol)?;
    let gap_margin = halmos::closedness_test(&d, tol).1;
    let c = rep.c_canonical.as_ref().unwrap();
    let (probe_norm, probe_residual) = match probe_vector(z, inst.m.ambient() / 2) {
        None => (0.0, 0.0),
        Some(zv) => {
            let u = kernel::pinv(c, tol) * &zv;
            ((&u).norm(), (c * &u - &zv).norm())
        }
    };
    Ok(DiagRow {
        extension_norm: rep.extension_norm,
        gap_margin,
        metric_sup: rep.metric_sup,
        probe_norm,
        probe_residual,
    })
}

fn probe_vector(z: ZRule, n: usize) -> Option<DVector<f64>> {
    match z {
        ZRule::Zero => None,
        ZRule::E1 => {
            let mut v = DVector::zeros(2 * n);
            v[0] = 1.0;
            Some(v)
        }
        ZRule::NormalizedY => {
            let v = y0_vector(n);
            let nrm = v.norm();
            Some(v / nrm)
        }
    }
}

/// Least-squares slope of log norm against log n (nonpositive norms are
/// skipped; fewer than two usable points give slope 0).
fn loglog_slope(ns: &[usize], norms: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(norms)
        .filter(|(_, &v)| v > 0.0 && v.is_finite())
        .map(|(&n, &v)| ((n as f64).ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let k = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = k * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        0.0
    } else {
        (k * sxy - sx * sy) / denom
    }
}

/// Run the family over `ns` with default thresholds and the `(e₁,0)` probe.
pub fn run(f: &TruncationFamily, ns: &[usize], tol: &Tolerance) -> Result<GrowthReport> {
    run_with(f, ns, ZRule::E1, Thresholds::default(), tol)
}

/// Run the family over `ns`, collecting per-level diagnostics and fitting
/// the growth classification.
pub fn run_with(
    f: &TruncationFamily,
    ns: &[usize],
    z: ZRule,
    thresholds: Thresholds,
    tol: &Tolerance,
) -> Result<GrowthReport> {
    if ns.is_empty() {
        return Err(Error::InvalidParameter("ns must be nonempty".into()));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("ns must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        rows.push(f.diagnostics(n, z, tol)?);
    }
    let extension_norms: Vec<f64> = rows.iter().map(|r| r.extension_norm).collect();
    let slope = loglog_slope(ns, &extension_norms);
    // Monotone increase beyond the median level is required for the
    // unbounded verdict, so a noisy plateau cannot trigger it.
    let median = ns[ns.len() / 2];
    let tail: Vec<f64> = ns
        .iter()
        .zip(&extension_norms)
        .filter(|(&n, _)| n >= median)
        .map(|(_, &v)| v)
        .collect();
    let monotone = tail.windows(2).all(|w| w[1] > w[0] * (1.0 - 1e-12));
    let classification = if slope > thresholds.slope && monotone {
        Classification::UnboundedTrend
    } else {
        Classification::BoundedTrend
    };
    let probe_norms: Vec<f64> = rows.iter().map(|r| r.probe_norm).collect();
    let probe_residuals: Vec<f64> = rows.iter().map(|r| r.probe_residual).collect();
    let first = probe_norms.first().copied().unwrap_or(0.0);
    let last = probe_norms.last().copied().unwrap_or(0.0);
    let residual_ok = probe_residuals.iter().all(|&r| r <= thresholds.probe_residual_max);
    let probe_flag = if first > 0.0 && last <= thresholds.probe_ratio * first && residual_ok {
        ProbeFlag::ProbeVanishing
    } else {
        ProbeFlag::ProbeBoundedAway
    };
    Ok(GrowthReport {
        family: f.name.clone(),
        ns: ns.to_vec(),
        extension_norms,
        gap_margins: rows.iter().map(|r| r.gap_margin).collect(),
        metric_sups: rows.iter().map(|r| r.metric_sup).collect(),
        probe_norms,
        probe_residuals,
        slope,
        classification,
        probe_flag,
        thresholds,
    })
}

/// Per-n minimum-norm probe curve `(‖C_n† z_n‖, ‖C_n C_n† z_n − z_n‖)`
/// with the vanishing/bounded-away verdict.
pub fn closability_probe(
    f: &TruncationFamily,
    z: ZRule,
    ns: &[usize],
    tol: &Tolerance,
) -> Result<(Vec<(f64, f64)>, ProbeFlag)> {
    let report = run_with(f, ns, z, Thresholds::default(), tol)?;
    let pairs = report
        .probe_norms
        .iter()
        .zip(&report.probe_residuals)
        .map(|(&a, &b)| (a, b))
        .collect();
    Ok((pairs, report.probe_flag))
}

/// The hand-built non-closability witness of the rank-one family,
/// evaluated verbatim at level n: `u_n = s_n (x_n, 0) + s_n (−x_n, −T₁x_n)`
/// with `x_n = (1,…,1)`, `s_n = 1/H_n`. Returns `(‖u_n‖, ‖C_n u_n‖)`;
/// as n grows the first tends to 0 while the second tends to
/// `(Σ 1/i²)^{-1/2} = √6/π`.
pub fn rank_one_witness(n: usize) -> (f64, f64) {
    let s = 1.0 / harmonic(n, 1);
    let y = y0_vector(n); // (y_n, 0)
    // u = s(x,0) + s(−x,−T₁x) assembled literally.
    let mut u: DVector<f64> = DVector::zeros(2 * n);
    for i in 0..n {
        u[i] += s; // s(x,0)
        u[i] -= s; // first component of s(−x,−T₁x)
        u[n + i] -= s / ((i + 1) as f64);
    }
    // C u = (y,0) · wᵀu / ‖y‖², with w = (1/i, −1) in block coordinates.
    let mut wu: f64 = 0.0;
    for i in 0..n {
        wu += u[i] / ((i + 1) as f64) - u[n + i];
    }
    let cu = &y * (wu / y.norm_squared());
    (u.norm(), cu.norm())
}

impl GrowthReport {
    /// CSV table: `n,extension_norm,gap_margin,metric_sup,probe_norm,probe_residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,extension_norm,gap_margin,metric_sup,probe_norm,probe_residual\n");
        for i in 0..self.ns.len() {
            let metric = match self.metric_sups[i] {
                Some(v) => format!("{v}"),
                None => String::new(),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.ns[i],
                self.extension_norms[i],
                self.gap_margins[i],
                metric,
                self.probe_norms[i],
                self.probe_residuals[i]
            ));
        }
        out
    }

    /// JSON summary of the fitted behavior (slope values for α ∈ (0,1)
    /// are empirical observations, not claims).
    pub fn summary(&self) -> GrowthSummary {
        GrowthSummary {
            family: self.family.clone(),
            slope: self.slope,
            classification: self.classification,
            probe_flag: self.probe_flag,
            thresholds: self.thresholds,
            note: "slopes are empirical fits over the sampled truncation levels".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthSummary {
    pub family: String,
    pub slope: f64,
    pub classification: Classification,
    pub probe_flag: ProbeFlag,
    pub thresholds: Thresholds,
    pub note: String,
}
