//! Independent oracles and property checks shared by the property tests and
//! the acceptance target. Each check returns a one-line summary on success
//! and the failing detail otherwise.
#![allow(dead_code)]

use std::sync::Arc;

use magcross::asym::{build_lambda_set, ppstar_bound, ppstar_desk, scale_eigenvalue, scaled_mass, CrossingPoint};
use magcross::cross2d::{
    decay_profile, modulus_field, solve_lowest, CrossOperatorSpec, MagneticForm, Rect, LADDER_ELEMENTS,
};
use magcross::mesh::MeshSpec;
use magcross::symbol::{fh_gradient, potential, roots, DEFAULT_MESH};
use magcross::{assemble_1d, assemble_cross, build_mesh, ground_state, solve_dense_sym, SymbolParams};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Check = Result<String, String>;

pub fn ensure(c: Check) {
    match c {
        Ok(s) => eprintln!("{s}"),
        Err(e) => panic!("{e}"),
    }
}

fn fail_if(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Err(msg())
    } else {
        Ok(())
    }
}

fn err(e: magcross::Error) -> String {
    e.to_string()
}

/// Deterministic low-discrepancy samples in `[0, 1)²` (additive recurrence
/// with the plastic-number constants).
pub fn r2_samples(n: usize) -> Vec<(f64, f64)> {
    let g = 1.324_717_957_244_746_f64;
    let (a1, a2) = (1.0 / g, 1.0 / (g * g));
    (0..n).map(|k| ((0.5 + a1 * k as f64).fract(), (0.5 + a2 * k as f64).fract())).collect()
}

pub fn rho1_default(a: f64, x: f64) -> f64 {
    let mesh = Arc::new(DEFAULT_MESH.build().unwrap());
    ground_state(SymbolParams::new(a, x), &mesh).unwrap().rho1
}

// ---------------------------------------------------------------- oracles

/// Roots of `t³ - 3α² t - 3ξ` (monic multiple of the band cubic) as the
/// eigenvalues of its companion matrix.
pub fn companion_roots(alpha: f64, xi: f64) -> Vec<Complex64> {
    let c = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 3.0 * xi, 1.0, 0.0, 3.0 * alpha * alpha, 0.0, 1.0, 0.0]);
    c.complex_eigenvalues().iter().copied().collect()
}

/// Lowest eigenvalue of the second-order central difference discretization
/// of `-u'' + V u` with Dirichlet conditions at `lo`, `hi`, `n` interior
/// points, by Sturm-sequence bisection.
pub fn fd_lowest(v: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / (n + 1) as f64;
    let off = -1.0 / (h * h);
    let diag: Vec<f64> = (1..=n).map(|i| 2.0 / (h * h) + v(lo + i as f64 * h)).collect();
    let count_below = |x: f64| {
        let mut d = 1.0f64;
        let mut c = 0;
        for (i, &a) in diag.iter().enumerate() {
            d = a - x - if i == 0 { 0.0 } else { off * off / d };
            if d == 0.0 {
                d = f64::MIN_POSITIVE;
            }
            if d < 0.0 {
                c += 1;
            }
        }
        c
    };
    // Gershgorin interval
    let mut a: f64 = diag.iter().cloned().fold(f64::INFINITY, f64::min) + 2.0 * off;
    let mut b: f64 = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - 2.0 * off;
    while b - a > 1e-13 * (1.0 + b.abs()) {
        let m = 0.5 * (a + b);
        if count_below(m) >= 1 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

// ---------------------------------------------------------------- symbol

pub fn roots_vs_companion() -> Check {
    let mut worst_res = 0.0f64;
    let mut worst_match = 0.0f64;
    for (u, v) in r2_samples(1000) {
        let (alpha, xi) = (3.0 * u, 10.0 * v);
        let p = SymbolParams::new(alpha, xi);
        let r = roots(p).map_err(err)?;
        let cubic = |t: Complex64| Complex64::new(xi, 0.0) + t * (alpha * alpha) - t * t * t / 3.0;
        let oracle = companion_roots(alpha, xi);
        for t in r.as_array() {
            let res = cubic(t).norm() / (1.0 + t.norm().powi(3));
            worst_res = worst_res.max(res);
            let d = oracle.iter().map(|o| (o - t).norm()).fold(f64::INFINITY, f64::min);
            worst_match = worst_match.max(d / (1.0 + t.norm()));
        }
    }
    fail_if(worst_res > 1e-12, || format!("cubic residual {worst_res:.2e} > 1e-12"))?;
    fail_if(worst_match > 1e-10, || format!("companion mismatch {worst_match:.2e} > 1e-10"))?;
    Ok(format!("1000 samples: max scaled residual {worst_res:.1e}, max companion distance {worst_match:.1e}"))
}

pub fn double_root_boundary() -> Check {
    for alpha in [0.5, 1.0, 1.7, 3.0] {
        let r = roots(SymbolParams::new(alpha, 2.0 * alpha.powi(3) / 3.0)).map_err(err)?;
        let d = (r.t3 - 2.0 * alpha).norm().max((r.t1 + alpha).norm()).max((r.t2 + alpha).norm());
        fail_if(d > 1e-12 * (1.0 + alpha), || format!("alpha {alpha}: roots off the boundary values by {d:.2e}"))?;
    }
    Ok("on xi = 2 alpha^3 / 3: t3 = 2 alpha, t1 = t2 = -alpha".into())
}

pub fn root_bracketing() -> Check {
    let s3 = 3f64.sqrt();
    for (u, v) in r2_samples(400) {
        let alpha = 1.0 + 2.0 * u;
        let xi = (v.max(1e-6)) * 2.0 * alpha.powi(3) / 3.0;
        let r = roots(SymbolParams::new(alpha, xi)).map_err(err)?;
        let (t1, t2, t3) = (r.t1.re, r.t2.re, r.t3.re);
        let tol = 1e-10 * alpha;
        let ok = -s3 * alpha < t1 && t1 <= -alpha + tol && -alpha - tol <= t2 && t2 < s3 * alpha && s3 * alpha < t3 && t3 <= 2.0 * alpha + tol;
        fail_if(!ok, || format!("bracketing fails at ({alpha}, {xi}): {t1}, {t2}, {t3}"))?;
    }
    Ok("400 samples with 1 <= alpha <= 3, 0 < xi <= 2 alpha^3/3".into())
}

pub fn t3_monotone() -> Check {
    let h = 1e-6;
    let mut n = 0;
    for i in 0..20 {
        let alpha = 0.05 + 0.1 * i as f64;
        for j in 1..=10 {
            let xi = 2.0 * alpha.powi(3) / 3.0 + 0.3 * j as f64;
            let t3 = |a: f64| roots(SymbolParams::new(a, xi)).map(|r| r.t3.re).map_err(err);
            let d = (t3(alpha + h)? - t3(alpha - h)?) / (2.0 * h);
            fail_if(!(d > 0.0), || format!("d t3 / d alpha = {d} at ({alpha}, {xi})"))?;
            n += 1;
        }
    }
    Ok(format!("d t3 / d alpha > 0 at {n} points above the double-root curve"))
}

pub fn fh_vs_fd() -> Check {
    let mesh = Arc::new(DEFAULT_MESH.build().map_err(err)?);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for (u, v) in r2_samples(20) {
        let (a, x) = (-2.0 + 4.0 * u, -2.0 + 4.0 * v);
        let p = SymbolParams::new(a, x);
        let g = ground_state(p, &mesh).map_err(err)?;
        let (ga, gx) = fh_gradient(&g, p);
        let r = |a: f64, x: f64| ground_state(SymbolParams::new(a, x), &mesh).map(|g| g.rho1).map_err(err);
        let fa = (r(a + h, x)? - r(a - h, x)?) / (2.0 * h);
        let fx = (r(a, x + h)? - r(a, x - h)?) / (2.0 * h);
        worst = worst.max((ga - fa).abs()).max((gx - fx).abs());
    }
    fail_if(worst > 1e-6, || format!("FH vs finite differences {worst:.2e} > 1e-6"))?;
    Ok(format!("20 points: max |FH - FD| = {worst:.1e}"))
}

pub fn symmetry_identities() -> Check {
    let mut worst = 0.0f64;
    for (u, v) in r2_samples(12) {
        let (a, x) = (2.0 * u, 2.0 * v);
        let base = rho1_default(a, x);
        for (sa, sx) in [(-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
            worst = worst.max((rho1_default(sa * a, sx * x) - base).abs() / base);
        }
    }
    fail_if(worst > 1e-12, || format!("symmetry defect {worst:.2e} > 1e-12"))?;
    Ok(format!("rho1 even in alpha and xi: max relative defect {worst:.1e}"))
}

/// Large-`ξ` growth at `α = 0`: harmonic expansion of the potential about
/// the real root `t₃ = (3ξ)^{1/3}` gives `V ≈ t₃⁴ (t - t₃)²`, so
/// `ρ₁ ≈ t₃² = 3^{2/3} ξ^{2/3}`.
pub fn divergence_at_infinity() -> Check {
    let limit = 3f64.powf(2.0 / 3.0);
    let mut gaps = Vec::new();
    for xi in [50.0, 100.0, 200.0] {
        let t3 = (3.0 * xi as f64).cbrt();
        let mesh = Arc::new(build_mesh(t3 - 4.0, t3 + 4.0, 16, 10).map_err(err)?);
        let r = ground_state(SymbolParams::new(0.0, xi), &mesh).map_err(err)?.rho1;
        gaps.push((r / xi.powf(2.0 / 3.0) - limit).abs());
    }
    fail_if(!(gaps[0] > gaps[1] && gaps[1] > gaps[2]), || format!("ratio not approaching 3^(2/3): gaps {gaps:?}"))?;
    fail_if(gaps[2] > 0.01 * limit, || format!("ratio at xi = 200 off the harmonic limit by {:.3e}", gaps[2]))?;
    Ok(format!("rho1(0, xi) / xi^(2/3) -> 3^(2/3): gaps {:.2e}, {:.2e}, {:.2e}", gaps[0], gaps[1], gaps[2]))
}

pub fn no_critical_point_above_curve() -> Check {
    let mesh = Arc::new(DEFAULT_MESH.build().map_err(err)?);
    let mut worst = f64::NEG_INFINITY;
    for (u, v) in r2_samples(60) {
        let alpha = 0.1 + 1.4 * u;
        let xi = 2.0 * alpha.powi(3) / 3.0 + 2.0 * v;
        let p = SymbolParams::new(alpha, xi);
        let g = ground_state(p, &mesh).map_err(err)?;
        let (ga, gx) = fh_gradient(&g, p);
        let t3 = roots(p).map_err(err)?.t3.re;
        let d = ga - 2.0 * alpha * t3 * gx;
        worst = worst.max(d);
        fail_if(!(d < 0.0), || format!("directional derivative {d:.3e} >= 0 at ({alpha}, {xi})"))?;
    }
    Ok(format!("60 points with xi >= 2 alpha^3/3: directional derivative <= {worst:.2e} < 0"))
}

// ---------------------------------------------------------------- core1d

pub fn harmonic_oscillator() -> Check {
    let mesh = build_mesh(-10.0, 10.0, 40, 10).map_err(err)?;
    let r = solve_dense_sym(&assemble_1d(&mesh, |t| t * t).map_err(err)?, 5).map_err(err)?;
    let worst = r.eigenvalues.iter().enumerate().map(|(k, l)| (l - (2 * k + 1) as f64).abs()).fold(0.0, f64::max);
    fail_if(worst > 1e-8, || format!("oscillator eigenvalues {:?} off by {worst:.2e}", r.eigenvalues))?;
    Ok(format!("D^2 + t^2: {{1,3,5,7,9}} to {worst:.1e}"))
}

fn table_cases() -> [(f64, f64); 2] {
    [(0.0, 0.0), (0.786, 0.0)]
}

pub fn domain_independence() -> Check {
    let m5 = Arc::new(build_mesh(-5.0, 5.0, 10, 10).map_err(err)?);
    let m7 = Arc::new(build_mesh(-7.0, 7.0, 14, 10).map_err(err)?);
    let mut worst = 0.0f64;
    for (u, v) in r2_samples(8) {
        let p = SymbolParams::new(-2.0 + 4.0 * u, -2.0 + 4.0 * v);
        let a = ground_state(p, &m5).map_err(err)?.rho1;
        let b = ground_state(p, &m7).map_err(err)?.rho1;
        worst = worst.max((a - b).abs() / a);
    }
    fail_if(worst > 1e-12, || format!("(-5,5) vs (-7,7): relative change {worst:.2e} > 1e-12"))?;
    Ok(format!("(-5,5) vs (-7,7): max relative change {worst:.1e}"))
}

pub fn p_convergence() -> Check {
    for (a, x) in table_cases() {
        let vals: Vec<f64> = (1..=12)
            .map(|q| {
                let mesh = Arc::new(MeshSpec { degree: q, ..DEFAULT_MESH }.build().unwrap());
                ground_state(SymbolParams::new(a, x), &mesh).unwrap().rho1
            })
            .collect();
        for q in 3..12 {
            fail_if(vals[q] > vals[q - 1] + 1e-13, || format!("({a},{x}): rho1 increases from Q={q} to Q={}", q + 1))?;
        }
        let errs: Vec<f64> = vals.iter().map(|v| (v - vals[11]).abs()).collect();
        for q in 3..10 {
            fail_if(errs[q] > errs[q - 1], || format!("({a},{x}): error to Q=12 grows at Q={}", q + 1))?;
        }
    }
    Ok("rho1 non-increasing in Q >= 3 with shrinking distance to Q = 12".into())
}

pub fn nested_upper_bound() -> Check {
    for (a, x) in table_cases() {
        let p = SymbolParams::new(a, x);
        let mut prev: Option<Vec<f64>> = None;
        for q in 1..=11 {
            let mesh = MeshSpec { degree: q, ..DEFAULT_MESH }.build().map_err(err)?;
            let vals = solve_dense_sym(&assemble_1d(&mesh, |t| potential(p, t)).map_err(err)?, 4).map_err(err)?.eigenvalues;
            if let Some(pv) = &prev {
                for (k, (lo, hi)) in vals.iter().zip(pv).enumerate() {
                    fail_if(*lo > hi + 1e-13, || format!("({a},{x}) lambda_{} at Q={q}: {lo} > {hi}", k + 1))?;
                }
            }
            prev = Some(vals);
        }
    }
    Ok("lambda_1..4 at Q+1 <= Q for Q = 1..10".into())
}

pub fn fd_oracle() -> Check {
    let mut worst = 0.0f64;
    for (a, x) in table_cases() {
        let p = SymbolParams::new(a, x);
        let se = rho1_default(a, x);
        let fd = fd_lowest(|t| potential(p, t), -5.0, 5.0, 10_000);
        worst = worst.max((se - fd).abs());
    }
    fail_if(worst > 1e-5, || format!("spectral vs finite differences {worst:.2e} > 1e-5"))?;
    Ok(format!("spectral elements vs 10^4-point finite differences: {worst:.1e}"))
}

// ---------------------------------------------------------------- asym

pub fn ppstar_closed_form() -> Check {
    let b = ppstar_bound(&[1.0, 3.0, 5.0], 0.0, 0.0).map_err(err)?;
    fail_if(b != vec![1.0, 3.0, 5.0], || format!("zero defects changed the list: {b:?}"))?;
    let b = ppstar_bound(&[1.0, 3.0], 0.1, 0.1).map_err(err)?;
    let want = [1.1 / 0.9, 3.2 / 0.8];
    fail_if(b.iter().zip(want).any(|(x, y)| (x - y).abs() > 1e-15), || format!("{b:?} vs {want:?}"))?;
    fail_if(ppstar_bound(&[1.0, 3.0], 0.0, 0.5).is_ok(), || "nu = 1/N accepted".into())?;
    let base = ppstar_bound(&[1.0, 2.0, 4.0], 0.01, 0.05).map_err(err)?;
    for (m, n) in [(0.02, 0.05), (0.01, 0.06)] {
        let up = ppstar_bound(&[1.0, 2.0, 4.0], m, n).map_err(err)?;
        fail_if(up.iter().zip(&base).any(|(u, b)| u < b), || format!("bound decreased at mu={m}, nu={n}"))?;
    }
    let d = ppstar_desk(4, 5.0).map_err(err)?;
    fail_if(!d.holds(), || format!("desk instance: {:?} above {:?}", d.mu_star, d.bound))?;
    Ok(format!("closed forms exact; desk instance holds (mu {:.1e}, nu {:.1e})", d.mu, d.nu))
}

pub fn scale_homogeneity() -> Check {
    let mut worst = 0.0f64;
    for (k, xi, h) in [(0.7039, 1.0, 0.01), (0.51, 4.0, 1e-3), (1.2, 0.3, 0.5)] {
        let base = scale_eigenvalue(k, xi, h).map_err(err)?;
        for c in [0.1, 2.0, 7.5] {
            let v = scale_eigenvalue(k, xi, h * c).map_err(err)?;
            worst = worst.max((v - c.powf(1.5) * base).abs() / v);
        }
    }
    fail_if(worst > 1e-14, || format!("homogeneity defect {worst:.2e}"))?;
    Ok(format!("scale(k, Xi, c h) = c^(3/2) scale(k, Xi, h): {worst:.1e}"))
}

/// A fixed synthetic spectrum `κ_n(ε) = ε + n`, for bookkeeping checks.
fn synthetic(eps: f64) -> magcross::Result<Vec<f64>> {
    Ok((1..=4).map(|n| eps + n as f64).collect())
}

pub fn lambda_set_bookkeeping() -> Check {
    let pts = vec![
        CrossingPoint::new("a", 0.5, 1.0).map_err(err)?,
        CrossingPoint::new("b", 0.25, 4.0).map_err(err)?,
        CrossingPoint::new("c", 0.5, 1.0).map_err(err)?,
    ];
    let set = build_lambda_set(&pts, 3, synthetic).map_err(err)?;
    fail_if(set.len() != 9, || format!("length {} != 9", set.len()))?;
    let v = set.values();
    fail_if(v.windows(2).any(|w| w[1] < w[0]), || "not ascending".into())?;
    fail_if(set.entries[0].label != "a" || set.entries[1].label != "c", || "ties not kept in input order".into())?;
    let mut rev = pts.clone();
    rev.reverse();
    let other = build_lambda_set(&rev, 3, synthetic).map_err(err)?;
    fail_if(other.values() != v, || "multiset changed under permutation".into())?;
    let b1 = set.entries.iter().find(|e| e.label == "b" && e.n == 1).unwrap().value;
    fail_if((b1 - 2.0 * 1.25).abs() > 1e-15, || format!("Xi = 4 entry {b1} != 2 kappa"))?;
    Ok("length, order, ties, permutation and Xi^(1/2) weight".into())
}

pub fn lambda1_consistency(degree: usize) -> Check {
    let pts = vec![CrossingPoint::new("p", 0.5, 1.0).map_err(err)?, CrossingPoint::new("q", 0.5, 2.25).map_err(err)?];
    let sys = assemble_cross(&CrossOperatorSpec::for_epsilon(0.5, degree)).map_err(err)?;
    let k = solve_lowest(&sys, 1).map_err(err)?.eigenvalues;
    let set = build_lambda_set(&pts, 1, |_| Ok(k.clone())).map_err(err)?;
    let h = 1e-2f64;
    let lhs = h.powf(1.5) * set.lambda1().unwrap().value;
    let rhs = pts.iter().map(|p| scale_eigenvalue(k[0], p.xi_cap, h).unwrap()).fold(f64::INFINITY, f64::min);
    fail_if((lhs - rhs).abs() > 1e-15 * rhs, || format!("h^(3/2) Lambda_1 = {lhs} vs {rhs}"))?;
    Ok(format!("h^(3/2) Lambda_1 = min scaled kappa_1 = {rhs:.6e}"))
}

pub fn scaled_mass_unit(degree: usize) -> Check {
    let sys = assemble_cross(&CrossOperatorSpec::for_epsilon(0.5, degree)).map_err(err)?;
    let res = solve_lowest(&sys, 1).map_err(err)?;
    let mut worst = 0.0f64;
    for (xi, h) in [(1.0, 1.0), (4.0, 0.01), (0.5, 0.1)] {
        let m = scaled_mass(&res, &sys, 0, xi, h, 96).map_err(err)?;
        worst = worst.max((m - 1.0).abs());
    }
    fail_if(worst > 1e-6, || format!("scaled eigenfunction mass off 1 by {worst:.2e}"))?;
    Ok(format!("L2 mass of the rescaled eigenfunction = 1 to {worst:.1e}"))
}

// ---------------------------------------------------------------- cross2d

pub fn isospectrality(degree: usize) -> Check {
    let mut worst = 0.0f64;
    for eps in [0.5, 0.25] {
        let a = 4.0 / eps;
        let k = |spec: CrossOperatorSpec| -> Result<f64, String> {
            let sys = assemble_cross(&spec).map_err(err)?;
            Ok(solve_lowest(&sys, 1).map_err(err)?.eigenvalues[0])
        };
        let k1 = k(CrossOperatorSpec::sigma_tau(eps, a, 8.0, LADDER_ELEMENTS, degree))?;
        let k2 = k(CrossOperatorSpec::st(eps, a, 8.0, LADDER_ELEMENTS, degree))?;
        worst = worst.max((k1 - k2).abs());
    }
    fail_if(worst > 5e-6, || format!("SigmaTau vs ST {worst:.2e} > 5e-6"))?;
    Ok(format!("SigmaTau vs ST at eps = 1/2, 1/4: {worst:.1e}"))
}

pub fn tau_saturation(degree: usize) -> Check {
    let k = |b: f64, ny: usize| -> Result<f64, String> {
        let sys = assemble_cross(&CrossOperatorSpec::sigma_tau(0.5, 8.0, b, (48, ny), degree)).map_err(err)?;
        Ok(solve_lowest(&sys, 1).map_err(err)?.eigenvalues[0])
    };
    let (k8, k10) = (k(8.0, 8)?, k(10.0, 10)?);
    let d = (k8 - k10).abs();
    fail_if(d > 1e-6, || format!("tau extent 8 -> 10 moves kappa_1 by {d:.2e}"))?;
    Ok(format!("tau extent 8 -> 10 at eps = 1/2: |dkappa_1| = {d:.1e}"))
}

pub fn positivity_and_hermitian(degree: usize) -> Check {
    let sys = assemble_cross(&CrossOperatorSpec::for_epsilon(0.5, degree)).map_err(err)?;
    let defect = sys.hermitian_defect();
    fail_if(defect > 1e-12, || format!("hermitian defect {defect:.2e}"))?;
    let res = solve_lowest(&sys, 4).map_err(err)?;
    fail_if(res.eigenvalues.iter().any(|&k| !(k > 0.0)), || format!("non-positive eigenvalue in {:?}", res.eigenvalues))?;
    fail_if(res.residuals.iter().any(|&r| r > 1e-8), || format!("residuals {:?}", res.residuals))?;
    Ok(format!("kappa_1..4 = {:.5?} > 0, hermitian defect {defect:.1e}", res.eigenvalues))
}

pub fn tail_decay(degree: usize) -> Check {
    let sys = assemble_cross(&CrossOperatorSpec::for_epsilon(0.5, degree)).map_err(err)?;
    let res = solve_lowest(&sys, 1).map_err(err)?;
    let radii: Vec<f64> = (0..=12).map(|k| 0.5 * k as f64).collect();
    let prof = decay_profile(&res, &sys, 0, &radii).map_err(err)?;
    fail_if(prof[0].1 != 1.0, || format!("tail mass at R = 0 is {}", prof[0].1))?;
    fail_if(prof.windows(2).any(|w| w[1].1 > w[0].1), || "tail mass increases".into())?;
    let fit: Vec<(f64, f64)> = prof.iter().filter(|(r, _)| (2.0..=5.0).contains(r)).map(|(r, m)| (*r, m.ln())).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = fit.iter().cloned().unzip();
    let (slope, icpt) = magcross::output::fit_line(&xs, &ys);
    let dev = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - icpt).abs()).fold(0.0, f64::max);
    let span = ys[0] - ys[ys.len() - 1];
    fail_if(slope > -0.5, || format!("log tail slope {slope:.3} > -0.5"))?;
    fail_if(dev > 0.25 * span, || format!("log tail not linear: deviation {dev:.3} over span {span:.3}"))?;
    Ok(format!("monotone tail mass, log slope {slope:.2} over R in [2, 5], max deviation {dev:.2}"))
}

pub fn modulus_symmetry(degree: usize) -> Check {
    let sys = assemble_cross(&CrossOperatorSpec::for_epsilon(0.5, degree)).map_err(err)?;
    let res = solve_lowest(&sys, 1).map_err(err)?;
    let r = modulus_field(&res, &sys, 0, Rect::new((-6.0, 6.0), (-4.0, 4.0)), 41).map_err(err)?;
    let mut worst = 0.0f64;
    for row in &r.values {
        for i in 0..row.len() {
            worst = worst.max((row[i] - row[row.len() - 1 - i]).abs());
        }
    }
    let n = r.values.len();
    for j in 0..n {
        for i in 0..r.values[j].len() {
            worst = worst.max((r.values[j][i] - r.values[n - 1 - j][i]).abs());
        }
    }
    fail_if(worst > 1e-6 * r.max(), || format!("|psi| reflection defect {worst:.2e}"))?;
    Ok(format!("|psi_1| even in sigma and tau to {:.1e} (relative)", worst / r.max()))
}

pub fn free_constant_mode() -> Check {
    let form = MagneticForm::free();
    let (ms, mt) = (MeshSpec::new(0.0, 2.0, 3, 4), MeshSpec::new(-1.0, 1.0, 2, 4));
    let sys = magcross::cross2d::assemble_form(&form, &ms, &mt).map_err(err)?;
    let res = magcross::cross2d::solve_sparse(&sys, 1, -0.5).map_err(err)?;
    fail_if(res.eigenvalues[0].abs() > 1e-10, || format!("free lowest {}", res.eigenvalues[0]))?;
    let r = modulus_field(&res, &sys, 0, Rect::new((0.0, 2.0), (-1.0, 1.0)), 9).map_err(err)?;
    let want = 0.5;
    let dev = r.values.iter().flatten().map(|v| (v - want).abs()).fold(0.0, f64::max);
    fail_if(dev > 1e-8, || format!("constant raster deviates by {dev:.2e}"))?;
    Ok("free operator: zero mode with constant modulus 1/sqrt(area)".into())
}
