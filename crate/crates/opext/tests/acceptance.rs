//! End-to-end acceptance gate: ten numbered checks, one printed verdict
//! line each. Run with `--nocapture` to see the lines on success.

use nalgebra::DVector;
use opext::asymptotics::{self, Classification, ProbeFlag, TruncationFamily, ZRule};
use opext::kernel::{self, Mat, Tolerance};
use opext::quotient::{self, QuotientOp};
use opext::subspace::Subspace;
use opext::{douglas, extension, gen, halmos, projections, star};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn random_pair(rng: &mut ChaCha8Rng, t: &Tolerance) -> (Subspace, Subspace) {
    let ambient = rng.random_range(8..=32usize);
    if rng.random_range(0..4u32) == 0 {
        let k = rng.random_range(1..=2usize);
        let em = rng.random_range(1..=ambient / 4);
        let en = rng.random_range(1..=ambient / 4);
        gen::planted_intersection(rng, ambient, k, em, en, t)
    } else {
        let dm = rng.random_range(1..=ambient / 2);
        let dn = rng.random_range(1..=ambient / 2);
        (
            gen::rand_subspace(rng, ambient, dm, t),
            gen::rand_subspace(rng, ambient, dn, t),
        )
    }
}

fn c01_cm_projection() -> Result<(), String> {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    for i in 0..200 {
        let (m, n) = random_pair(&mut rng, &t);
        let q = projections::cm_projection(&m, &n, &t).map_err(|e| e.to_string())?;
        let idem = kernel::diff_norm(&(&q * &q), &q);
        if idem > 1e-8 {
            return Err(format!("case {i}: ‖Q²−Q‖ = {idem:.3e}"));
        }
        let inter = m.intersect(&n, &t).map_err(|e| e.to_string())?;
        let want_range = m.minus(&inter, &t).map_err(|e| e.to_string())?;
        let got_range = Subspace::span_of(&q, &t);
        if !got_range.eq_at(&want_range, &t).map_err(|e| e.to_string())? {
            return Err(format!(
                "case {i}: range dim {} vs expected {}",
                got_range.dim(),
                want_range.dim()
            ));
        }
        let sum_perp = m.sum(&n, &t).map_err(|e| e.to_string())?.complement();
        let want_null = n.sum(&sum_perp, &t).map_err(|e| e.to_string())?;
        let got_null = Subspace::nullspace(&q, &t);
        if !got_null.eq_at(&want_null, &t).map_err(|e| e.to_string())? {
            return Err(format!(
                "case {i}: nullspace dim {} vs expected {}",
                got_null.dim(),
                want_null.dim()
            ));
        }
    }
    Ok(())
}

fn c02_extension_agreement() -> Result<(), String> {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    for i in 0..200 {
        let ambient = rng.random_range(8..=32usize);
        let inst = gen::compatible_instance(&mut rng, ambient, ambient, &t);
        let scale = 1.0 + kernel::op_norm(&inst.a) + kernel::op_norm(&inst.b);
        let rep = extension::build(&inst.a, &inst.b, &inst.m, &inst.n, &t).map_err(|e| e.to_string())?;
        if !rep.compatible {
            return Err(format!("case {i}: unexpectedly incompatible"));
        }
        let c = rep.c_full.as_ref().unwrap();
        let ra = kernel::op_norm(&((c - &inst.a) * inst.m.basis()));
        let rb = kernel::op_norm(&((c - &inst.b) * inst.n.basis()));
        if ra > 1e-8 * scale || rb > 1e-8 * scale {
            return Err(format!("case {i}: agreement residuals {ra:.3e}, {rb:.3e}"));
        }
        let rep2 = extension::build(
            &(&inst.a * inst.m.projection()),
            &(&inst.b * inst.n.projection()),
            &inst.m,
            &inst.n,
            &t,
        )
        .map_err(|e| e.to_string())?;
        let d_restrict = kernel::diff_norm(
            rep.c_canonical.as_ref().unwrap(),
            rep2.c_canonical.as_ref().unwrap(),
        );
        let rep3 = extension::build(&inst.b, &inst.a, &inst.n, &inst.m, &t).map_err(|e| e.to_string())?;
        let d_sym = kernel::diff_norm(
            rep.c_canonical.as_ref().unwrap(),
            rep3.c_canonical.as_ref().unwrap(),
        );
        if d_restrict > 1e-8 * scale || d_sym > 1e-8 * scale {
            return Err(format!(
                "case {i}: invariance residuals {d_restrict:.3e}, {d_sym:.3e}"
            ));
        }
    }
    Ok(())
}

fn c03_criterion_cross_validation() -> Result<(), String> {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    for i in 0..200 {
        let ambient = rng.random_range(6..=16usize);
        let inst = gen::compatible_instance(&mut rng, ambient, ambient, &t);
        let (via_range, _) =
            extension::bounded_criterion(&inst.a, &inst.b, &inst.m, &inst.n, &t).map_err(|e| e.to_string())?;
        let d = halmos::decompose(&inst.m, &inst.n, &t).map_err(|e| e.to_string())?;
        let via_halmos = halmos::bounded_via_halmos(&inst.a, &inst.b, &d, &t).map_err(|e| e.to_string())?;
        // Douglas route: (A−B)P_M = X · P_{N⊥}P_M.
        let lhs = (&inst.a - &inst.b) * inst.m.projection();
        let s = inst.n.complement().projection() * inst.m.projection();
        let via_douglas = douglas::dual_solve(&s, &lhs, &t).map_err(|e| e.to_string())?.solvable;
        if via_range != via_halmos || via_halmos != via_douglas {
            return Err(format!(
                "case {i}: routes disagree (range {via_range}, halmos {via_halmos}, douglas {via_douglas})"
            ));
        }
    }
    Ok(())
}

fn c04_example31_sweeps() -> Result<(), String> {
    let t = tol();
    let ns: Vec<usize> = (4..=12).map(|k| 1usize << k).collect();
    let r = asymptotics::run(&TruncationFamily::example31(1.5).unwrap(), &ns, &t).map_err(|e| e.to_string())?;
    let max = r.extension_norms.iter().cloned().fold(f64::MIN, f64::max);
    let min = r.extension_norms.iter().cloned().fold(f64::MAX, f64::min);
    if max / min >= 1.05 {
        return Err(format!("alpha 1.5: norm ratio {}", max / min));
    }
    let r = asymptotics::run(&TruncationFamily::example31(0.0).unwrap(), &ns, &t).map_err(|e| e.to_string())?;
    if !(0.8..=1.2).contains(&r.slope) {
        return Err(format!("alpha 0: slope {}", r.slope));
    }
    let r = asymptotics::run(&TruncationFamily::example31(0.5).unwrap(), &ns, &t).map_err(|e| e.to_string())?;
    if !r.extension_norms.windows(2).all(|w| w[1] > w[0]) {
        return Err("alpha 0.5: norms not monotone".into());
    }
    if !(r.slope > 0.05 && r.slope < 0.95) {
        return Err(format!("alpha 0.5: slope {}", r.slope));
    }
    if r.classification != Classification::UnboundedTrend {
        return Err("alpha 0.5: expected UNBOUNDED_TREND".into());
    }
    Ok(())
}

fn c05_nonclosability_witness() -> Result<(), String> {
    let t = tol();
    let (u_norm, cu_norm) = asymptotics::rank_one_witness(10_000);
    if u_norm > 0.15 {
        return Err(format!("witness ‖u‖ = {u_norm}"));
    }
    if !(0.70..=0.78).contains(&cu_norm) {
        return Err(format!("witness ‖Cu‖ = {cu_norm}"));
    }
    let ns: Vec<usize> = (4..=12).map(|k| 1usize << k).collect();
    let (_, flag) = asymptotics::closability_probe(&TruncationFamily::rank_one(), ZRule::NormalizedY, &ns, &t)
        .map_err(|e| e.to_string())?;
    if flag != ProbeFlag::ProbeVanishing {
        return Err("rank-one probe not vanishing".into());
    }
    let (_, flag) = asymptotics::closability_probe(
        &TruncationFamily::example31(1.0).unwrap(),
        ZRule::E1,
        &ns,
        &t,
    )
    .map_err(|e| e.to_string())?;
    if flag != ProbeFlag::ProbeBoundedAway {
        return Err("alpha 1 probe not bounded away".into());
    }
    Ok(())
}

fn c06_metric_sandwich() -> Result<(), String> {
    let t = tol();
    let theta: f64 = 0.4;
    let m = Subspace::span_of(&Mat::from_column_slice(2, 1, &[1.0, 0.0]), &t);
    let n = Subspace::span_of(&Mat::from_column_slice(2, 1, &[theta.cos(), theta.sin()]), &t);
    let rep = extension::metric_sup(&Mat::identity(2, 2), &Mat::zeros(2, 2), &m, &n, &t).map_err(|e| e.to_string())?;
    if (rep.kappa13 - 1.0 / theta.sin().powi(2)).abs() > 1e-8 {
        return Err(format!("2-D kappa13 = {}", rep.kappa13));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
    let mut done = 0;
    while done < 100 {
        let ambient = rng.random_range(5..=8usize);
        let m = gen::rand_subspace(&mut rng, ambient, 2, &t);
        let n = gen::rand_subspace(&mut rng, ambient, 2, &t);
        if m.intersect(&n, &t).map_err(|e| e.to_string())?.dim() != 0 {
            continue;
        }
        let a = gen::rand_mat(&mut rng, ambient, ambient);
        let b = gen::rand_mat(&mut rng, ambient, ambient);
        let rep = extension::metric_sup(&a, &b, &m, &n, &t).map_err(|e| e.to_string())?;
        let est = extension::metric_mc_estimate(&a, &b, &m, &n, 100_000, 0, &t).map_err(|e| e.to_string())?;
        if est < rep.kappa13 * (1.0 - 1e-6) || est > 2.0 * rep.kappa13 * (1.0 + 1e-12) {
            return Err(format!(
                "case {done}: estimate {est} outside [{}, {}]",
                rep.kappa13,
                2.0 * rep.kappa13
            ));
        }
        done += 1;
    }
    Ok(())
}

fn c07_douglas_suite() -> Result<(), String> {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    for i in 0..500 {
        let rows = rng.random_range(2..=20usize);
        let inner = rng.random_range(1..=20usize);
        let cols = rng.random_range(1..=20usize);
        let rank = rng.random_range(1..=rows.min(inner));
        let s = gen::rand_rank(&mut rng, rows, inner, rank);
        let x0 = gen::rand_mat(&mut rng, inner, cols);
        let tt = &s * &x0;
        let sol = douglas::douglas_solve(&s, &tt, &t).map_err(|e| e.to_string())?;
        if !sol.solvable {
            return Err(format!("case {i}: planted instance reported unsolvable"));
        }
        let x = sol.x.unwrap();
        let res = kernel::diff_norm(&(&s * &x), &tt);
        if res > 1e-9 * (1.0 + kernel::op_norm(&tt)) {
            return Err(format!("case {i}: residual {res:.3e}"));
        }
        if sol.lambda.unwrap() > kernel::op_norm(&x0) + 1e-8 {
            return Err(format!("case {i}: lambda exceeds planted norm"));
        }
        let min_eig = sol.certificate_min_eig.unwrap();
        let cert_scale = 1.0 + kernel::op_norm(&(&s * s.transpose())) * sol.lambda.unwrap().powi(2);
        if min_eig < -1e-8 * cert_scale {
            return Err(format!("case {i}: certificate eigenvalue {min_eig:.3e}"));
        }
    }
    Ok(())
}

fn c08_halmos_reconstruction() -> Result<(), String> {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
    for i in 0..200 {
        let dm = rng.random_range(1..=6usize);
        let dn = rng.random_range(1..=6usize);
        let m = gen::rand_subspace(&mut rng, 12, dm, &t);
        let n = gen::rand_subspace(&mut rng, 12, dn, &t);
        let d = halmos::decompose(&m, &n, &t).map_err(|e| e.to_string())?;
        if d.reconstruction_residual > 1e-8 {
            return Err(format!("case {i}: reconstruction {:.3e}", d.reconstruction_residual));
        }
        let (closed, _) = halmos::closedness_test(&d, &t);
        // at finite dimension every subspace sum is closed
        if !closed {
            return Err(format!("case {i}: closedness test false"));
        }
        for j in 0..d.m0.dim() {
            let s = d.s[(j, j)];
            if !(s > 0.0 && s < 1.0) {
                return Err(format!("case {i}: S eigenvalue {s} outside (0,1)"));
            }
        }
    }
    Ok(())
}

fn c09_star_order() -> Result<(), String> {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC9);
    let subset = |c: &Mat, idx: &[usize]| -> Mat {
        let f = kernel::svd(c);
        let mut out = Mat::zeros(c.nrows(), c.ncols());
        for &j in idx {
            out += f.sigma[j] * f.u.column(j) * f.v_t.row(j);
        }
        out
    };
    for i in 0..100 {
        let c0 = gen::rand_mat(&mut rng, 6, 6);
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for j in 0..6 {
            if j % 2 == 0 { even.push(j) } else { odd.push(j) }
        }
        let a = subset(&c0, &even);
        let b = subset(&c0, &odd);
        let rep = star::star_supremum(&a, &b, &t).map_err(|e| e.to_string())?;
        if !rep.exists {
            return Err(format!("case {i}: supremum missing"));
        }
        let diff = kernel::diff_norm(rep.c.as_ref().unwrap(), &c0);
        if diff > 1e-8 * (1.0 + kernel::op_norm(&c0)) {
            return Err(format!("case {i}: supremum differs from C0 by {diff:.3e}"));
        }
    }
    for i in 0..200 {
        let ra = rng.random_range(1..=3usize);
        let rb = rng.random_range(1..=3usize);
        let a = gen::rand_rank(&mut rng, 5, 5, ra);
        let b = gen::rand_rank(&mut rng, 5, 5, rb);
        let eq15 = star::necessary_eq15(&a, &b, &t).map_err(|e| e.to_string())?;
        let rep = star::star_supremum(&a, &b, &t).map_err(|e| e.to_string())?;
        if eq15 != rep.exists {
            return Err(format!("case {i}: eq15 {eq15} vs existence {}", rep.exists));
        }
    }
    // partial-order axioms on a chain
    let c = gen::rand_mat(&mut rng, 6, 6);
    let a1 = subset(&c, &[0]);
    let a2 = subset(&c, &[0, 1]);
    let a3 = subset(&c, &[0, 1, 2]);
    let lt = |x: &Mat, y: &Mat| star::star_leq(x, y, &t).unwrap();
    if !(lt(&a1, &a1) && lt(&a1, &a2) && lt(&a2, &a3) && lt(&a1, &a3)) {
        return Err("chain axioms failed".into());
    }
    if lt(&a3, &a2) {
        return Err("antisymmetry violated".into());
    }
    Ok(())
}

fn c10_quotients() -> Result<(), String> {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(0xCA);
    for i in 0..100 {
        let rows = rng.random_range(2..=10usize);
        let cols = rng.random_range(2..=10usize);
        let rank = rng.random_range(1..=rows.min(cols));
        let m = gen::rand_rank(&mut rng, rows, cols, rank);
        let p = kernel::pinv(&m, &t);
        for r in kernel::penrose_residuals(&m, &p) {
            if r > 1e-8 * (1.0 + kernel::op_norm(&m)) {
                return Err(format!("case {i}: penrose residual {r:.3e}"));
            }
        }
        // random quotient via planted factor
        let a = gen::rand_rank(&mut rng, rows, cols, rank);
        let x0 = gen::rand_mat(&mut rng, rows, rows);
        let b = &x0 * &a;
        let q = QuotientOp::new(a.clone(), b, t.clone()).map_err(|e| e.to_string())?;
        let gi = q.graph_isometry_residual();
        if gi > 1e-8 {
            return Err(format!("case {i}: graph isometry residual {gi:.3e}"));
        }
        // parallel-sum range identity
        let rank2 = rng.random_range(1..=rows.min(cols));
        let a2 = gen::rand_rank(&mut rng, rows, cols, rank2);
        let p1 = a.transpose() * &a;
        let p2 = a2.transpose() * &a2;
        let s = quotient::parallel_sum(&p1, &p2, &t).map_err(|e| e.to_string())?;
        let w = Subspace::span_of(&a.transpose(), &t)
            .intersect(&Subspace::span_of(&a2.transpose(), &t), &t)
            .map_err(|e| e.to_string())?;
        // R(S) = R(Aᵀ) ∩ R(A₂ᵀ): S must vanish off W and restrict to a
        // full-rank form on W.
        let scale = 1.0 + kernel::op_norm(&p1) + kernel::op_norm(&p2);
        let off = kernel::op_norm(&((Mat::identity(cols, cols) - w.projection()) * &s));
        if off > 1e-7 * scale {
            return Err(format!("case {i}: parallel-sum range escapes intersection ({off:.3e})"));
        }
        if w.dim() > 0 {
            let restricted = w.basis().transpose() * &s * w.basis();
            if kernel::rank_tol(&restricted, &t) != w.dim() {
                return Err(format!(
                    "case {i}: parallel-sum restriction rank {} vs dim {}",
                    kernel::rank_tol(&restricted, &t),
                    w.dim()
                ));
            }
        }
        // preimage decomposition, both routes
        let y = gen::rand_unit(&mut rng, rows);
        let (x, yr, yp) = q.preimage_decomposition(&y).map_err(|e| e.to_string())?;
        let yr2 = &a * &x;
        let yr3 = q.domain().projection() * &y;
        let e1 = (&yr - &yr2).norm();
        let e2 = (&yr - yr3).norm();
        let e3 = (&yr + &yp - DVector::from(y)).norm();
        if e1 > 1e-9 || e2 > 1e-8 || e3 > 1e-12 {
            return Err(format!("case {i}: preimage residuals {e1:.2e} {e2:.2e} {e3:.2e}"));
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let checks: Vec<(&str, fn() -> Result<(), String>)> = vec![
        ("01 CM-projection idempotent with exact range/nullspace", c01_cm_projection),
        ("02 extension agreement, restriction invariance, symmetry", c02_extension_agreement),
        ("03 boundedness criterion agrees across three routes", c03_criterion_cross_validation),
        ("04 truncation sweeps match the alpha verdicts", c04_example31_sweeps),
        ("05 non-closability witness and probe separation", c05_nonclosability_witness),
        ("06 metric supremum sandwich", c06_metric_sandwich),
        ("07 Douglas planted-solution suite", c07_douglas_suite),
        ("08 Halmos reconstruction and S spectrum", c08_halmos_reconstruction),
        ("09 star order: suprema, eq-15 equivalence, axioms", c09_star_order),
        ("10 quotient: Penrose, graph isometry, parallel sum", c10_quotients),
    ];
    let mut failed = Vec::new();
    for (name, f) in checks {
        match f() {
            Ok(()) => println!("[PASS] criterion {name}"),
            Err(msg) => {
                println!("[FAIL] criterion {name}: {msg}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
