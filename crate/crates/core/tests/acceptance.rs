//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use serrin_core::constants::{tau, Problem};
use serrin_core::deviation::{deviation_field, oscillation_bound_check, select_center, CenterStrategy};
use serrin_core::experiments::{run_family, ExponentFit, FamilyKind, FamilySpec};
use serrin_core::geometry::{
    boundary_grid, build_domain, radii_about, summary_from_grid, Domain, DomainSpec, GeometrySummary,
};
use serrin_core::identities::{
    check_pointwise, deficits, sample, verify_all, verify_flux, verify_hk, DeficitKind, Grids, IdentityReport,
};
use serrin_core::torsion::{gradient_bound, normal_derivative, solve_adaptive, solve_fourier2d, TorsionField};

type Outcome = Result<String, String>;

struct Run {
    field: TorsionField,
    grids: Grids,
    summary: GeometrySummary,
    z: Vec<f64>,
}

impl Run {
    fn new(domain: &Domain, grids: Option<Grids>) -> Run {
        let field = solve_adaptive(domain, 40).expect("solve");
        let grids = grids.unwrap_or_else(|| Grids::default_for(domain).expect("grids"));
        let summary = summary_from_grid(&grids.boundary);
        let z = select_center(&field, &CenterStrategy::ArgminU, &grids.volume).expect("center");
        Run { field, grids, summary, z }
    }

    fn identities(&self) -> Vec<IdentityReport> {
        let dev = deviation_field(&self.field, &self.z, 0.0).unwrap();
        verify_all(&sample(&self.field, &self.grids), &dev, &self.summary)
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn worst(reports: &[IdentityReport]) -> (f64, String) {
    reports
        .iter()
        .map(|r| (r.rel_residual, r.name.clone()))
        .fold((0.0, String::new()), |a, b| if b.0 > a.0 { b } else { a })
}

fn bundled() -> Vec<(String, DomainSpec)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../domains");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .expect("domains directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p.file_stem().unwrap().to_string_lossy().into_owned(), DomainSpec::from_json(&text).unwrap())
        })
        .collect()
}

/// Star-shaped planar domain `r = 1 + Σ_{k=2}^{4} (a_k cos kθ + b_k sin kθ)`, resampled until convex.
fn random_convex_fourier(rng: &mut ChaCha8Rng, amplitude: f64) -> DomainSpec {
    loop {
        let mut cos = vec![1.0, 0.0];
        let mut sin = vec![0.0, 0.0];
        for k in 2..=4 {
            let s = amplitude / (k * k) as f64;
            cos.push(rng.gen_range(-s..s));
            sin.push(rng.gen_range(-s..s));
        }
        let spec = DomainSpec::Fourier2d { cos, sin };
        let d = build_domain(&spec).unwrap();
        if summary_from_grid(&boundary_grid(&d, 256).unwrap()).convex {
            return spec;
        }
    }
}

fn random_ellipsoid(rng: &mut ChaCha8Rng, dim: usize, spread: f64) -> DomainSpec {
    DomainSpec::Ellipsoid { axes: (0..dim).map(|_| rng.gen_range(1.0..1.0 + spread)).collect() }
}

fn c1_ball_degeneracy() -> Outcome {
    let mut slowest = 0.0f64;
    for n in [2, 3, 5] {
        for rho in [0.5, 1.0, 2.0] {
            let t = Instant::now();
            let d = Domain::ball(rho, n).unwrap();
            let run = Run::new(&d, None);
            let smp = sample(&run.field, &run.grids);
            let def = deficits(&smp, &run.summary).unwrap();
            for k in DeficitKind::ALL {
                let v = def.get(k).unwrap();
                ensure(v.abs() <= 1e-10, || format!("N={n} ρ={rho}: {} = {v:e}", k.name()))?;
            }
            let dev = deviation_field(&run.field, &run.z, 0.0).unwrap();
            for r in verify_all(&smp, &dev, &run.summary) {
                if r.name.starts_with("flux") {
                    ensure(r.rel_residual <= 1e-10, || format!("N={n} ρ={rho}: {} residual {:e}", r.name, r.rel_residual))?;
                } else {
                    ensure(r.lhs.abs().max(r.rhs.abs()) <= 1e-10, || {
                        format!("N={n} ρ={rho}: {} sides {:e} {:e}", r.name, r.lhs, r.rhs)
                    })?;
                }
            }
            let (ri, re) = radii_about(&d, &run.z).unwrap();
            ensure((re - ri).abs() <= 1e-10, || format!("N={n} ρ={rho}: gap {:e}", re - ri))?;
            let newton = (0..run.grids.volume.len())
                .map(|m| {
                    let j = run.field.eval_unchecked(run.grids.volume.point(m));
                    (n as f64 * j.hess_norm_sq() - j.laplacian().powi(2)).abs()
                })
                .fold(0.0, f64::max);
            ensure(newton <= 1e-10, || format!("N={n} ρ={rho}: Newton equality off by {newton:e}"))?;
            let secs = t.elapsed().as_secs_f64();
            ensure(secs < 1.0, || format!("N={n} ρ={rho}: took {secs:.2}s"))?;
            slowest = slowest.max(secs);
        }
    }
    Ok(format!("9 balls, all deficits/sides/gaps ≤ 1e-10, slowest {slowest:.2}s"))
}

fn c2_identities() -> Outcome {
    let ellipsoids: [&[f64]; 4] = [&[2.0, 1.0], &[2.0, 1.4, 1.0], &[2.0, 1.5, 1.2, 1.0], &[2.0, 1.6, 1.3, 1.1, 1.0]];
    let mut summary = Vec::new();
    for axes in ellipsoids {
        let d = Domain::ellipsoid(axes).unwrap();
        let reps = Run::new(&d, None).identities();
        let (w, name) = worst(&reps);
        ensure(w <= 1e-8, || format!("ellipsoid {axes:?}: {name} residual {w:e}"))?;
        // Grid doubling, from the default orders (N ≤ 4) or from coarse orders (N = 5).
        let n = axes.len();
        let base = if n == 5 { Grids::new(&d, 24, 8, 12).unwrap() } else { Grids::default_for(&d).unwrap() };
        let coarse = Run::new(&d, Some(base.clone())).identities();
        let fine = Run::new(&d, Some(base.refined().unwrap())).identities();
        for (c, f) in coarse.iter().zip(&fine) {
            ensure(c.rel_residual <= 1e-12 || f.rel_residual <= 1e-12 || f.rel_residual * 10.0 <= c.rel_residual, || {
                format!("ellipsoid {axes:?}: {} {:e} → {:e} after doubling", c.name, c.rel_residual, f.rel_residual)
            })?;
        }
        summary.push(format!("N={n} {w:.1e}"));
    }
    let fourier = [
        DomainSpec::Fourier2d { cos: vec![1.0, 0.0, 0.1], sin: vec![] },
        DomainSpec::Fourier2d { cos: vec![1.0, 0.0, 0.0, 0.1], sin: vec![] },
        DomainSpec::Fourier2d { cos: vec![1.0, 0.0, 0.0, 0.0, 0.1], sin: vec![] },
        DomainSpec::Fourier2d { cos: vec![1.0, 0.0, 0.05], sin: vec![0.0, 0.0, 0.0, 0.06, 0.04] },
    ];
    let mut fw = 0.0f64;
    for spec in &fourier {
        let d = build_domain(spec).unwrap();
        let reps = Run::new(&d, None).identities();
        let (w, name) = worst(&reps);
        ensure(w <= 1e-6, || format!("{spec:?}: {name} residual {w:e}"))?;
        let base = Grids::default_for(&d).unwrap();
        let coarse = Run::new(&d, Some(base.clone())).identities();
        let fine = Run::new(&d, Some(base.refined().unwrap())).identities();
        for (c, f) in coarse.iter().zip(&fine) {
            ensure(c.rel_residual <= 1e-12 || f.rel_residual <= 1e-12 || f.rel_residual * 10.0 <= c.rel_residual, || {
                format!("{spec:?}: {} {:e} → {:e} after doubling", c.name, c.rel_residual, f.rel_residual)
            })?;
        }
        fw = fw.max(w);
    }
    Ok(format!("ellipsoids worst rel. residual [{}]; Fourier worst {fw:.1e}; doubling shrinks ≥ 10×", summary.join(", ")))
}

fn c3_flux() -> Outcome {
    let domains = bundled();
    let mut w = 0.0f64;
    for (name, spec) in &domains {
        let d = build_domain(spec).unwrap();
        let run = Run::new(&d, None);
        for r in verify_flux(&sample(&run.field, &run.grids), &run.summary, &run.z) {
            ensure(r.rel_residual <= 1e-8, || format!("{name}: {} residual {:e}", r.name, r.rel_residual))?;
            w = w.max(r.rel_residual);
        }
    }
    Ok(format!("{} bundled domains, worst rel. residual {w:.1e}", domains.len()))
}

fn c4_pointwise() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let specs: Vec<DomainSpec> = (0..100).map(|_| random_convex_fourier(&mut rng, 0.4)).collect();
    let results: Vec<(usize, String)> = specs
        .par_iter()
        .map(|spec| {
            let d = build_domain(spec).unwrap();
            let run = Run::new(&d, None);
            let m = gradient_bound(&run.field, &run.grids.boundary).m;
            let v = check_pointwise(&sample(&run.field, &run.grids), &run.summary, m);
            (v.len(), v.first().map(|x| format!("{spec:?}: {x:?}")).unwrap_or_default())
        })
        .collect();
    let total: usize = results.iter().map(|r| r.0).sum();
    ensure(total == 0, || format!("{total} violations, first: {}", results.iter().find(|r| r.0 > 0).unwrap().1))?;
    Ok("100 random convex Fourier domains, 0 violations".into())
}

fn fit(kind: FamilyKind, eps: &[f64], deficit: DeficitKind) -> Result<ExponentFit, String> {
    run_family(&FamilySpec::new(kind, eps.to_vec(), deficit), None).map_err(|e| e.to_string())
}

const EPS: [f64; 7] = [1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3];

fn c5_serrin_2d() -> Outcome {
    let t = Instant::now();
    let f = fit(FamilyKind::EllipsoidEccentric { dim: 2, base: 1.0 }, &EPS, DeficitKind::SerrinL2)?;
    let secs = t.elapsed().as_secs_f64();
    ensure((0.9..=1.1).contains(&f.slope) && f.r_squared >= 0.999 && secs < 30.0, || {
        format!("slope {:.4}, R² {:.6}, {secs:.1}s", f.slope, f.r_squared)
    })?;
    Ok(format!("slope {:.4}, R² {:.6}, {} rows, {secs:.1}s", f.slope, f.r_squared, f.rows.len()))
}

fn c6_sbt_low_dim() -> Outcome {
    let mut out = Vec::new();
    for dim in [2, 3] {
        let f = fit(FamilyKind::EllipsoidEccentric { dim, base: 1.0 }, &EPS, DeficitKind::SbtL2)?;
        ensure((0.9..=1.1).contains(&f.slope), || format!("N={dim}: slope {:.4}", f.slope))?;
        out.push(format!("N={dim} slope {:.4} (R² {:.5})", f.slope, f.r_squared));
    }
    Ok(out.join(", "))
}

fn c7_high_dim_consistency() -> Outcome {
    let mut out = Vec::new();
    for dim in [4, 5] {
        for (deficit, problem) in [(DeficitKind::SerrinL2, Problem::Serrin), (DeficitKind::SbtL2, Problem::Sbt)] {
            let f = fit(FamilyKind::EllipsoidEccentric { dim, base: 1.0 }, &EPS[..5], deficit)?;
            let t = tau(dim, problem, 0.1).unwrap();
            ensure(f.slope >= t - 0.05, || format!("N={dim} {}: slope {:.4} < τ − 0.05 = {:.4}", deficit.name(), f.slope, t - 0.05))?;
            out.push(format!("N={dim} {} {:.3}≥{:.3}", deficit.name(), f.slope, t));
        }
    }
    Ok(out.join(", "))
}

fn c8_oscillation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = [0usize; 3];
    let mut attempts = 0;
    let ps = [1.0, 2.0, 4.0];
    while checked.iter().any(|&c| c < 50) {
        attempts += 1;
        ensure(attempts <= 600, || format!("smallness held on only {checked:?} of {attempts} domains"))?;
        let spec = if attempts % 3 == 0 {
            random_ellipsoid(&mut rng, 3, 0.06)
        } else {
            random_convex_fourier(&mut rng, 0.06)
        };
        let d = build_domain(&spec).unwrap();
        let run = Run::new(&d, None);
        let dev = deviation_field(&run.field, &run.z, 0.0).unwrap();
        let m = gradient_bound(&run.field, &run.grids.boundary).m;
        for (i, &p) in ps.iter().enumerate() {
            let rec = oscillation_bound_check(&dev, &run.grids.volume, &run.grids.boundary, &run.summary, p, m)
                .map_err(|e| e.to_string())?;
            if rec.smallness_holds && checked[i] < 50 {
                ensure(rec.oscillation_bound_holds == Some(true), || format!("{spec:?} p={p}: {rec:?}"))?;
                ensure(rec.gap_bound_holds, || format!("{spec:?} p={p}: gap bound fails {rec:?}"))?;
                checked[i] += 1;
            }
        }
    }
    Ok(format!("50 domains per p ∈ {{1,2,4}} ({attempts} sampled), both bounds hold"))
}

fn c9_heintze_karcher() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut specs: Vec<DomainSpec> = bundled().into_iter().map(|(_, s)| s).collect();
    specs.extend((0..20).map(|_| random_convex_fourier(&mut rng, 0.4)));
    specs.extend((0..5).map(|_| random_ellipsoid(&mut rng, 3, 0.8)));
    let mut count = 0;
    let mut worst_res = 0.0f64;
    for spec in &specs {
        let d = build_domain(spec).unwrap();
        let run = Run::new(&d, None);
        let smp = sample(&run.field, &run.grids);
        let def = deficits(&smp, &run.summary).unwrap();
        let Some(hk) = def.heintze_karcher else { continue };
        count += 1;
        if d.is_ball() {
            ensure(hk.abs() <= 1e-10, || format!("{spec:?}: ball deficit {hk:e}"))?;
        } else {
            ensure(hk > 0.0, || format!("{spec:?}: deficit {hk:e}"))?;
        }
        let rep = &verify_hk(&smp, &run.summary).map_err(|e| e.to_string())?[0];
        ensure(rep.passes(1e-8), || format!("{spec:?}: identity residual {:e}", rep.rel_residual))?;
        worst_res = worst_res.max(if rep.degenerate() { 0.0 } else { rep.rel_residual });
    }
    Ok(format!("{count} mean-convex domains, deficit ≥ 0, worst identity residual {worst_res:.1e}"))
}

fn c10_solver_oracle() -> Outcome {
    let mut w = 0.0f64;
    for (a, b) in [(2.0, 1.0), (1.5, 1.0), (1.2, 1.0 / 1.2), (1.0, 3.0)] {
        let d = Domain::ellipsoid(&[a, b]).unwrap();
        let exact = solve_adaptive(&d, 40).unwrap();
        let coll = solve_fourier2d(&d, 40).unwrap();
        let grid = boundary_grid(&d, 512).unwrap();
        let err = (0..grid.len())
            .map(|j| (normal_derivative(&exact, grid.params(j)) - normal_derivative(&coll, grid.params(j))).abs())
            .fold(0.0, f64::max);
        ensure(err <= 1e-8, || format!("ellipse {a}×{b}: max |Δu_ν| = {err:e}"))?;
        w = w.max(err);
    }
    Ok(format!("4 ellipses at degree 40, max |Δu_ν| = {w:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("ball degeneracy", c1_ball_degeneracy),
        ("identity verification", c2_identities),
        ("flux identities", c3_flux),
        ("pointwise suite", c4_pointwise),
        ("Serrin exponent, N = 2", c5_serrin_2d),
        ("SBT exponent, N = 2, 3", c6_sbt_low_dim),
        ("theorem consistency, N = 4, 5", c7_high_dim_consistency),
        ("oscillation lemma", c8_oscillation),
        ("Heintze-Karcher", c9_heintze_karcher),
        ("solver oracle equivalence", c10_solver_oracle),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || f == &id.to_string()) {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
