use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};

use magcross::asym::{
    build_lambda_set, ppstar_desk, quasimode_report, scale_eigenvalue, CrossingPoint,
};
use magcross::band::{axis_min, degree_study, lattice, refine_min, scan_values, MinResult, RefineStep};
use magcross::cross2d::{
    decay_profile, ladder_epsilon, ladder_solve, modulus_field, solve_lowest, write_ladder_csv, zoom_window,
    CrossOperatorSpec, LadderEntry, Rect,
};
use magcross::mesh::QuadratureRule;
use magcross::output::{fit_line, fmt17};
use magcross::reference::reference;
use magcross::symbol::DEFAULT_MESH;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BandScanConfig, LadderConfig, LambdaSetConfig, PpstarConfig, QuasimodeConfig, Table1Config};
use crate::{BandScanArgs, CliError, Ctx, LadderArgs, LambdaSetArgs, PpstarArgs, QuasimodeArgs, Table1Args};

const FALLBACK_ALPHA: f64 = 0.786;

fn create(ctx: &Ctx, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(ctx.path(name))?))
}

fn write_json<T: Serialize>(ctx: &Ctx, name: &str, v: &T) -> Result<(), CliError> {
    let mut w = create(ctx, name)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(|e| CliError::Numeric(e.into()))?;
    writeln!(w)?;
    Ok(())
}

pub fn table1(ctx: &Ctx, mut cfg: Table1Config, args: Table1Args) -> Result<(), CliError> {
    if let Some(d) = args.degrees {
        cfg.degrees = d;
    }
    if cfg.degrees.is_empty() {
        return Err(CliError::Usage("no degrees given".into()));
    }
    let refs = reference();
    let rule = QuadratureRule::TripleDegree;
    let mut w = create(ctx, "table1.csv")?;
    writeln!(w, "Q,rho1_00,alpha0,rho1_alpha0")?;
    let mut worst: Option<(usize, f64)> = None;
    for &q in &cfg.degrees {
        let row = refs.table1_row(q);
        let alpha = row.map_or(FALLBACK_ALPHA, |r| r.alpha0);
        let r00 = degree_study(0.0, 0.0, &[q], rule)?[0].rho1;
        let ra = degree_study(alpha, 0.0, &[q], rule)?[0].rho1;
        writeln!(w, "{q},{},{},{}", fmt17(r00), fmt17(alpha), fmt17(ra))?;
        let mut line = format!("Q={q:2}  rho1(0,0)={r00:.15}  rho1({alpha},0)={ra:.15}");
        if let Some(r) = row {
            let err = ((r00 - r.rho1_00) / r.rho1_00).abs().max(((ra - r.rho1_alpha0) / r.rho1_alpha0).abs());
            line.push_str(&format!("  rel.err={err:.1e}"));
            if worst.is_none_or(|(_, e)| err > e) {
                worst = Some((q, err));
            }
        }
        ctx.say(line);
    }
    w.flush()?;
    match worst {
        Some((q, e)) if e > cfg.tolerance => {
            Err(CliError::Tolerance(format!("worst row Q={q}: relative error {e:.3e} > {:.0e}", cfg.tolerance)))
        }
        _ => Ok(()),
    }
}

pub fn band_scan(ctx: &Ctx, mut cfg: BandScanConfig, args: BandScanArgs) -> Result<(), CliError> {
    if let Some(s) = args.step {
        cfg.step = s;
    }
    if let Some(r) = args.refine {
        cfg.refine = r;
    }
    if args.paper_exact {
        cfg.step = 0.01;
        cfg.alpha_range = (-2.0, 2.0);
        cfg.xi_range = (-2.0, 2.0);
    }
    cfg.axis_only |= args.axis_only;
    if !(cfg.step > 0.0) {
        return Err(CliError::Usage(format!("step must be positive, got {}", cfg.step)));
    }
    let alphas = lattice(cfg.alpha_range.0, cfg.alpha_range.1, cfg.step)?;
    let xis = if cfg.axis_only { vec![0.0] } else { lattice(cfg.xi_range.0, cfg.xi_range.1, cfg.step)? };
    let grid = scan_values(&alphas, &xis, cfg.mesh)?;
    grid.write_csv(create(ctx, "band_grid.csv")?)?;
    ctx.say(format!(
        "scanned {} points ({:.2} ms/point), grid minimum {:.6}",
        grid.len(),
        1e3 * grid.seconds_per_point,
        grid.min_value()
    ));
    let min = if cfg.refine == 0 {
        let (i, j) = grid.argmin();
        let (alpha, xi, value) = (grid.alpha_values[i], grid.xi_values[j], grid.rho1[i][j]);
        MinResult { alpha0: alpha, xi0: xi, s0: value, history: vec![RefineStep { grid_step: cfg.step, alpha, xi, value }] }
    } else {
        refine_min(&grid, cfg.refine)?
    };
    min.write_json(create(ctx, "min_result.json")?)?;
    ctx.say(format!("alpha0 = {:.5}  xi0 = {}  S0 = {:.11}", min.alpha0, min.xi0, min.s0));
    let r = reference().minimum;
    if (min.s0 - r.s0_rounded).abs() > 5e-4 || (min.alpha0.abs() - FALLBACK_ALPHA).abs() > 0.02 {
        return Err(CliError::Tolerance(format!(
            "minimum {:.6} at alpha {:.5}, expected {} at |alpha| = {FALLBACK_ALPHA}",
            min.s0, min.alpha0, r.s0_rounded
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ConvergenceReport {
    s0: f64,
    levels: Vec<usize>,
    slope: f64,
    bounds: (f64, f64),
}

pub fn kappa_ladder(ctx: &Ctx, mut cfg: LadderConfig, args: LadderArgs) -> Result<(), CliError> {
    if let Some(v) = args.lmax {
        cfg.l_max = v;
    }
    if let Some(v) = args.neigs {
        cfg.n_eigs = v;
    }
    if let Some(v) = args.degree {
        cfg.degree = v;
    }
    if let Some(v) = args.resolution {
        cfg.resolution = v;
    }
    cfg.slope |= args.slope;
    let levels: Vec<usize> = match args.l {
        Some(l) => vec![l],
        None => (cfg.l_min..=cfg.l_max).collect(),
    };
    if levels.is_empty() || levels.iter().any(|&l| l > 12) {
        return Err(CliError::Usage("ladder levels must lie in 0..=12".into()));
    }
    if cfg.n_eigs == 0 {
        return Err(CliError::Usage("--neigs must be at least 1".into()));
    }
    let need_min = cfg.slope || cfg.resolution > 0;
    let minimum = if need_min { Some(axis_min(0.01, 3, DEFAULT_MESH)?) } else { None };
    let alpha0 = minimum.as_ref().map_or(FALLBACK_ALPHA, |m| m.alpha0);

    let results: Vec<(LadderEntry, Vec<(f64, f64)>)> = levels
        .par_iter()
        .map(|&l| {
            let eps = ladder_epsilon(l);
            let run = || -> magcross::Result<(Vec<f64>, Vec<(f64, f64)>)> {
                let (sys, res) = ladder_solve(l, cfg.degree, cfg.n_eigs)?;
                let decay = decay_profile(&res, &sys, 0, &cfg.decay_radii)?;
                if cfg.resolution > 0 {
                    let s = 5.0 * 2f64.powf(l as f64 / 2.0);
                    let main = if l <= 5 { Rect::new((-s, s), (-5.0, 5.0)) } else { zoom_window(eps, alpha0) };
                    let raster = modulus_field(&res, &sys, 0, main, cfg.resolution)?;
                    raster.write_csv(BufWriter::new(File::create(ctx.path(&format!("modulus_{l}.csv")))?))?;
                    if (3..=5).contains(&l) {
                        let zoom = modulus_field(&res, &sys, 0, zoom_window(eps, alpha0), cfg.resolution)?;
                        zoom.write_csv(BufWriter::new(File::create(ctx.path(&format!("modulus_zoom_{l}.csv")))?))?;
                    }
                }
                Ok((res.eigenvalues, decay))
            };
            match run() {
                Ok((k, d)) => (LadderEntry { l, epsilon: eps, kappa: Ok(k) }, d),
                Err(e) => {
                    let msg = e.context(format!("level {l}")).to_string();
                    log::error!("{msg}");
                    (LadderEntry { l, epsilon: eps, kappa: Err(msg) }, Vec::new())
                }
            }
        })
        .collect();
    let entries: Vec<LadderEntry> = results.iter().map(|r| r.0.clone()).collect();
    write_ladder_csv(&entries, cfg.n_eigs, create(ctx, "kappa_ladder.csv")?)?;
    let mut dw = create(ctx, "decay.csv")?;
    writeln!(dw, "l,R,tail_mass")?;
    for (e, d) in &results {
        for (r, m) in d {
            writeln!(dw, "{},{},{}", e.l, fmt17(*r), fmt17(*m))?;
        }
    }
    dw.flush()?;

    let mut misses = Vec::new();
    let mut failures = Vec::new();
    for e in &entries {
        match &e.kappa {
            Ok(k) => {
                let refv = reference().kappa1(e.l);
                let tag = refv.map_or(String::new(), |r| format!("  (reference {r})"));
                let shown: Vec<String> = k.iter().map(|v| format!("{v:.6}")).collect();
                ctx.say(format!("l={:2}  eps={:.6}  kappa={}{tag}", e.l, e.epsilon, shown.join(" ")));
                if let Some(r) = refv {
                    if (k[0] - r).abs() > cfg.tolerance {
                        misses.push(format!("l={} kappa1={:.6} vs {r}", e.l, k[0]));
                    }
                }
            }
            Err(m) => failures.push(m.clone()),
        }
    }
    if cfg.slope {
        let s0 = minimum.as_ref().expect("minimum computed for the slope").s0;
        let pts: Vec<(f64, f64)> = entries
            .iter()
            .filter(|e| (6..=10).contains(&e.l))
            .filter_map(|e| e.kappa.as_ref().ok().map(|k| (e.epsilon.log2(), (k[0] - s0).log2())))
            .collect();
        if pts.len() < 2 {
            return Err(CliError::Usage("--slope needs levels 6..10 in the ladder".into()));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let slope = fit_line(&xs, &ys).0;
        ctx.say(format!("convergence slope over l=6..10: {slope:.4} (S0 = {s0:.11})"));
        let used: Vec<usize> = entries.iter().filter(|e| (6..=10).contains(&e.l) && e.kappa.is_ok()).map(|e| e.l).collect();
        write_json(ctx, "convergence.json", &ConvergenceReport { s0, levels: used, slope, bounds: cfg.slope_bounds })?;
        if !(slope >= cfg.slope_bounds.0 && slope <= cfg.slope_bounds.1) {
            misses.push(format!("slope {slope:.4} outside {:?}", cfg.slope_bounds));
        }
    }
    if !failures.is_empty() {
        return Err(CliError::Numeric(magcross::Error::Convergence {
            what: "kappa ladder",
            iterations: 0,
            detail: failures.join("; "),
        }));
    }
    if !misses.is_empty() {
        return Err(CliError::Tolerance(misses.join("; ")));
    }
    Ok(())
}

pub fn quasimode(ctx: &Ctx, mut cfg: QuasimodeConfig, args: QuasimodeArgs) -> Result<(), CliError> {
    if let Some(e) = args.eps {
        cfg.epsilons = e;
    }
    if let Some(a) = args.alpha0 {
        cfg.alpha0 = Some(a);
    }
    cfg.omit_psi1 |= args.omit_psi1;
    if cfg.epsilons.len() < 2 {
        return Err(CliError::Usage("--eps needs at least two values to fit a slope".into()));
    }
    let alpha0 = match cfg.alpha0 {
        Some(a) => a,
        None => axis_min(0.01, 3, DEFAULT_MESH)?.alpha0,
    };
    let rep = quasimode_report(&cfg.epsilons, alpha0, cfg.xi0, cfg.mesh)?;
    rep.write_json(create(ctx, "quasimode_report.json")?)?;
    for r in &rep.rows {
        ctx.say(format!(
            "eps={:.6}  residual={:.4e}  psi0 only={:.4e}  rayleigh gap={:.4e}",
            r.epsilon, r.residual, r.residual_psi0, r.rayleigh_gap
        ));
    }
    ctx.say(format!(
        "slopes: with psi1 {:.3}, psi0 only {:.3}, rayleigh {:.3}",
        rep.slope_with_psi1, rep.slope_psi0_only, rep.slope_rayleigh
    ));
    if cfg.omit_psi1 {
        let (lo, hi) = cfg.psi0_slope_bounds;
        if !(rep.slope_psi0_only >= lo && rep.slope_psi0_only <= hi) {
            return Err(CliError::Tolerance(format!("psi0-only slope {:.3} outside [{lo}, {hi}]", rep.slope_psi0_only)));
        }
    } else if !(rep.slope_with_psi1 >= cfg.min_slope) {
        return Err(CliError::Tolerance(format!("slope {:.3} below {}", rep.slope_with_psi1, cfg.min_slope)));
    }
    Ok(())
}

pub fn lambda_set(ctx: &Ctx, mut cfg: LambdaSetConfig, args: LambdaSetArgs) -> Result<(), CliError> {
    if let Some(n) = args.n_per_point {
        cfg.n_per_point = n;
    }
    if let Some(d) = args.degree {
        cfg.degree = d;
    }
    if args.h.is_some() {
        cfg.h = args.h;
    }
    if cfg.n_per_point == 0 {
        return Err(CliError::Usage("--n-per-point must be at least 1".into()));
    }
    let points = cfg
        .points
        .iter()
        .map(|p| CrossingPoint::new(p.label.clone(), p.epsilon, p.xi_cap))
        .collect::<magcross::Result<Vec<_>>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut cache: HashMap<u64, Vec<f64>> = HashMap::new();
    let set = build_lambda_set(&points, cfg.n_per_point, |eps| {
        if let Some(v) = cache.get(&eps.to_bits()) {
            return Ok(v.clone());
        }
        let sys = magcross::assemble_cross(&CrossOperatorSpec::for_epsilon(eps, cfg.degree))?;
        let v = solve_lowest(&sys, cfg.n_per_point)?.eigenvalues;
        cache.insert(eps.to_bits(), v.clone());
        Ok(v)
    })?;
    set.write_json(create(ctx, "lambda_set.json")?)?;
    for e in &set.entries {
        ctx.say(format!("{:.10}  {}  n={}", e.value, e.label, e.n));
    }
    if let (Some(h), Some(first)) = (cfg.h, set.lambda1()) {
        let p = points.iter().find(|p| p.label == first.label).expect("label from the input");
        let kappa = first.value / p.xi_cap.sqrt();
        ctx.say(format!("h^(3/2) Lambda_1 at h = {h}: {:.6e}", scale_eigenvalue(kappa, p.xi_cap, h)?));
    }
    Ok(())
}

pub fn ppstar(ctx: &Ctx, mut cfg: PpstarConfig, args: PpstarArgs) -> Result<(), CliError> {
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(l) = args.half_width {
        cfg.half_width = l;
    }
    let d = ppstar_desk(cfg.n, cfg.half_width)?;
    write_json(ctx, "ppstar.json", &d)?;
    ctx.say(format!("mu = {:.3e}  nu = {:.3e}", d.mu, d.nu));
    for (k, (s, b)) in d.mu_star.iter().zip(&d.bound).enumerate() {
        ctx.say(format!("n={}  mu*={s:.10}  bound={b:.10}", k + 1));
    }
    if !d.holds() {
        return Err(CliError::Tolerance("eigenvalue above the quasimode bound".into()));
    }
    Ok(())
}
