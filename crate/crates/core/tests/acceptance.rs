//! Acceptance suite. Run with `cargo test -p germ-equiv --release --test acceptance`.
//!
//! Prints one `PASS`/`FAIL` line per criterion and exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use germ_equiv::condition::{
    check_theorem2, check_theorem3, compare_exponents, estimate_lojasiewicz, SamplingSpec, Verdict,
};
use germ_equiv::flow::{
    diffeo_forward, displacement_profile, round_trip, verify_equivalence, DiffeoMap, DisplacementProfile,
    HomotopySystem,
};
use germ_equiv::germ::{parse, PolyGerm};
use germ_equiv::jacobi::{generate_pair, ideal_power_generators, random_multipliers, JacobiIdealBasis};
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn germ(text: &str, n: usize) -> PolyGerm {
    parse(text, n).expect("fixture parses")
}

fn map(f: &PolyGerm, g: &PolyGerm) -> DiffeoMap {
    DiffeoMap::new(HomotopySystem::new(f.clone(), g.clone(), 1).expect("fixture is critical"))
}

fn cubic() -> (PolyGerm, PolyGerm) {
    (germ("x1^2", 1), germ("x1^2 + 1/4*x1^3", 1))
}

fn radial() -> (PolyGerm, PolyGerm) {
    (germ("x1^2 + x2^2", 2), germ("x1^2 + x2^2 + x1^4 + 2*x1^2*x2^2 + x2^4", 2))
}

/// 200 samples on 0 < |x| ≤ 0.2.
fn spec200(n: usize) -> SamplingSpec {
    SamplingSpec::new(n).with_grid(10, 20)
}

fn bisect(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(lo) * h(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(
        elapsed < Duration::from_secs(limit_s),
        format!("runtime {elapsed:?} exceeds {limit_s} s"),
    )
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (f, g) = cubic();
    let rep = check_theorem2(&f, &g, 1, &SamplingSpec::new(1)).map_err(|e| e.to_string())?;
    ensure(rep.verdict == Verdict::Pass, format!("verdict {:?}", rep.verdict))?;
    ensure(
        (rep.c_estimate - 0.1875).abs() <= 1e-9,
        format!("C_estimate {}", rep.c_estimate),
    )?;
    let m = map(&f, &g);
    let eq = verify_equivalence(&m, &SamplingSpec::new(1)).map_err(|e| e.to_string())?;
    ensure(eq.max_residual <= 1e-8, format!("max_residual {:e}", eq.max_residual))?;
    let oracle = bisect(|s| s * s + s * s * s / 4.0 - 0.01, 0.05, 0.15);
    let phi = diffeo_forward(&m, &[0.1]).map_err(|e| e.to_string())?[0];
    ensure((phi - oracle).abs() <= 1e-7, format!("phi(0.1) = {phi}, oracle {oracle}"))?;
    within(start.elapsed(), 5)?;
    Ok(format!(
        "C = {:.12}, residual {:.1e}, phi(0.1) = {phi:.12} (oracle {oracle:.12}), {:?}",
        rep.c_estimate,
        eq.max_residual,
        start.elapsed()
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (f, g) = radial();
    let m = map(&f, &g);
    let spec = spec200(2);
    ensure(spec.total_points() == 200, "sample count")?;
    let eq = verify_equivalence(&m, &spec).map_err(|e| e.to_string())?;
    ensure(eq.max_residual <= 1e-8, format!("max_residual {:e}", eq.max_residual))?;
    let oracle = ((-1.0 + 1.04f64.sqrt()) / 2.0).sqrt();
    let y = diffeo_forward(&m, &[0.1, 0.0]).map_err(|e| e.to_string())?;
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    ensure((norm - oracle).abs() <= 1e-7, format!("|phi(0.1,0)| = {norm}, oracle {oracle}"))?;
    within(start.elapsed(), 30)?;
    Ok(format!(
        "residual {:.1e}, |phi(0.1,0)| = {norm:.12} (oracle {oracle:.12}), {:?}",
        eq.max_residual,
        start.elapsed()
    ))
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for ((f, g), spec) in [(cubic(), SamplingSpec::new(1)), (radial(), spec200(2))] {
        let eq = verify_equivalence(&map(&f, &g), &spec).map_err(|e| e.to_string())?;
        worst = worst.max(eq.max_conservation_drift);
        for p in &eq.points {
            ensure(
                p.conservation_drift <= 1e-9,
                format!("drift {:e} at {:?}", p.conservation_drift, p.x),
            )?;
        }
    }
    Ok(format!("max drift {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    for (f, g) in [cubic(), radial()] {
        let n = f.dim();
        let m = map(&f, &g);
        let origin = vec![0.0; n];
        ensure(
            diffeo_forward(&m, &origin).map_err(|e| e.to_string())? == origin,
            "phi(0) != 0",
        )?;
        ensure(
            m.inverse().apply(&origin).map_err(|e| e.to_string())? == origin,
            "psi(0) != 0",
        )?;
        // the same germ on both sides, pushed through the integrator
        let id = map(&f, &f);
        let eq = verify_equivalence(&id, &spec200(n)).map_err(|e| e.to_string())?;
        for p in &eq.points {
            ensure(p.image == p.x, format!("identity moved {:?} to {:?}", p.x, p.image))?;
            let traj = id.trajectory(&p.x).map_err(|e| e.to_string())?;
            ensure(traj.y_nodes.iter().all(|y| *y == p.x), "trajectory left its start")?;
        }
        ensure(eq.max_residual == 0.0, format!("identity residual {:e}", eq.max_residual))?;
    }
    Ok("phi(0) = 0 exactly; f = g is the identity on all 400 samples".into())
}

fn criterion_5() -> Outcome {
    let mut report = Vec::new();
    for ((f, g), n) in [(cubic(), 1), (radial(), 2)] {
        let rt = round_trip(&map(&f, &g), &spec200(n)).map_err(|e| e.to_string())?;
        ensure(
            rt.max_error <= 1e-7,
            format!("n={n}: round trip {:e} at {:?}", rt.max_error, rt.worst_point),
        )?;
        report.push(format!("n={n}: {:.1e}", rt.max_error));
    }
    Ok(report.join(", "))
}

fn criterion_6() -> Outcome {
    let (f, g) = cubic();
    match displacement_profile(&map(&f, &g), &SamplingSpec::new(1)).map_err(|e| e.to_string())? {
        DisplacementProfile::Decay { slope, fit_points, .. } => {
            ensure(slope >= 1.9, format!("slope {slope}"))?;
            Ok(format!("slope {slope:.4} over {fit_points} samples"))
        }
        DisplacementProfile::IdentityWithinNoise => Err("no displacement measured".into()),
    }
}

fn criterion_7() -> Outcome {
    let f = germ("x1^2", 1);
    let g = germ("2*x1^2", 1);
    let mut worst = Vec::new();
    for rmin in [1e-2, 1e-3, 1e-4] {
        let rep = check_theorem2(&f, &g, 1, &SamplingSpec::new(1).with_radii(rmin, 0.2)).map_err(|e| e.to_string())?;
        ensure(rep.verdict == Verdict::Fail, format!("radius_min {rmin}: verdict {:?}", rep.verdict))?;
        let divergent = rep
            .records
            .iter()
            .any(|r| r.ratio_slope < -0.25 && r.worst_ratio >= 10.0 * r.outer_ratio);
        ensure(divergent, format!("radius_min {rmin}: no record with slope < -0.25 and 10x growth"))?;
        worst.push(rep.c_estimate);
    }
    ensure(
        worst[2] >= 10.0 * worst[0],
        format!("worst ratio {} at 1e-4 vs {} at 1e-2", worst[2], worst[0]),
    )?;
    Ok(format!(
        "FAIL at every radius_min; worst ratio {:.3e} -> {:.3e} -> {:.3e}",
        worst[0], worst[1], worst[2]
    ))
}

fn criterion_8() -> Outcome {
    let mut out = Vec::new();
    for k in 2..=4u32 {
        let est = estimate_lojasiewicz(&germ(&format!("x1^{k}"), 1), &SamplingSpec::lojasiewicz(1))
            .map_err(|e| e.to_string())?;
        let want = f64::from(k - 1) / f64::from(k);
        ensure((est.eta_hat - want).abs() <= 0.05, format!("k={k}: eta {} vs {want}", est.eta_hat))?;
        out.push(format!("eta(x^{k}) = {:.4}", est.eta_hat));
    }
    for ((f, g), n) in [(cubic(), 1), (radial(), 2)] {
        let cmp = compare_exponents(&f, &g, &SamplingSpec::lojasiewicz(n)).map_err(|e| e.to_string())?;
        ensure(cmp.delta <= 0.05, format!("n={n}: delta {}", cmp.delta))?;
        out.push(format!("delta(n={n}) = {:.1e}", cmp.delta));
    }
    Ok(out.join(", "))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let germs = [("x1^2", 1), ("x1^2 + x2^2", 2), ("x1^2 - x2^2", 2), ("x1*x2", 2)];
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let (text, n) = germs[seed as usize % germs.len()];
        let f = germ(text, n);
        let count = ideal_power_generators(&JacobiIdealBasis::new(f.clone()), 3).unwrap().len();
        let pair = generate_pair(&f, 1, &random_multipliers(n, count, 2, seed)).map_err(|e| e.to_string())?;
        let rep = check_theorem2(&f, &pair.g, 1, &SamplingSpec::new(n)).map_err(|e| e.to_string())?;
        ensure(
            rep.verdict == Verdict::Pass,
            format!("seed {seed}, g = {}: verdict {:?}", pair.g, rep.verdict),
        )?;
        let eq = verify_equivalence(&map(&f, &pair.g), &SamplingSpec::new(n)).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(
            eq.max_residual <= 1e-7,
            format!("seed {seed}: residual {:e}", eq.max_residual),
        )?;
        worst = worst.max(eq.max_residual);
    }
    within(start.elapsed(), 300)?;
    Ok(format!("20 pairs PASS, worst residual {worst:.1e}, {:?}", start.elapsed()))
}

fn criterion_10() -> Outcome {
    let f = germ("x1^2", 1);
    let g = germ("x1^2 + x1^4", 1);
    let rep = check_theorem3(&f, &g, &SamplingSpec::new(1)).map_err(|e| e.to_string())?;
    ensure(rep.verdict == Verdict::Pass, format!("verdict {:?}", rep.verdict))?;
    let eq = verify_equivalence(&map(&f, &g), &SamplingSpec::new(1)).map_err(|e| e.to_string())?;
    ensure(eq.max_residual <= 1e-8, format!("residual {:e}", eq.max_residual))?;
    Ok(format!(
        "C = {:.3e}, C' = {:.3e}, residual {:.1e}",
        rep.c_estimate,
        rep.c_prime_estimate.unwrap_or(f64::NAN),
        eq.max_residual
    ))
}

fn criterion_11() -> Outcome {
    let config = Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new(config.clone());
    runner
        .run(&fd_case(), |(n, p, m, x)| check_finite_difference(n, &p, &m, &x))
        .map_err(|e| format!("finite differences: {e}"))?;
    let mut runner = TestRunner::new(config);
    runner
        .run(&roundtrip_case(), |(n, p)| check_roundtrip(n, &p))
        .map_err(|e| format!("parse/serialize: {e}"))?;
    Ok("1000 finite-difference cases, 1000 round-trip cases".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1-D cubic equivalence", criterion_1),
        ("2-D radial equivalence", criterion_2),
        ("conservation along trajectories", criterion_3),
        ("fixed point and identity degeneracy", criterion_4),
        ("forward/inverse round trip", criterion_5),
        ("displacement decay", criterion_6),
        ("negative control", criterion_7),
        ("Lojasiewicz estimator", criterion_8),
        ("Jacobi pipeline", criterion_9),
        ("value/gradient hypothesis path", criterion_10),
        ("symbolic core properties", criterion_11),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {:>2}  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {:>2}  {name}: {detail} ({:?})", i + 1, started.elapsed());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
