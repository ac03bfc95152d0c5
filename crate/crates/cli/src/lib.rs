//! Library side of the `germeq` binary: configuration, dispatch and reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod config;

use std::time::Instant;

use anyhow::{bail, Context, Result};
use germ_equiv::condition::{
    check_theorem2, check_theorem3, compare_exponents, estimate_gradient_dist_bound, estimate_lojasiewicz,
    sample_domain, ConditionReport, LojasiewiczEstimate, RatioRecord, Verdict,
};
use germ_equiv::flow::{
    displacement_profile, numeric_jacobian, round_trip, verify_equivalence, DiffeoMap, HomotopySystem,
    SingularSetApprox, Trajectory,
};
use germ_equiv::germ::{parse, parse_poly, PolyGerm};
use germ_equiv::jacobi::{generate_pair, ideal_power_generators, random_multipliers, JacobiIdealBasis};
use serde::Serialize;
use serde_json::{json, Value};

pub use config::{Command, Format, RunConfig};

/// Top-level JSON report; optional fields are present only where they apply.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_estimate: Option<f64>,
    pub records: Vec<RatioRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conservation_drift: Option<f64>,
    pub runtime_ms: f64,
    /// Command-specific results.
    pub details: Value,
}

/// A finished run: the report, its CSV rendering, and the process exit code.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub csv: String,
}

impl Outcome {
    /// 1 for a FAIL verdict, 0 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self.report.verdict {
            Some(Verdict::Fail) => 1,
            _ => 0,
        }
    }

    pub fn render(&self) -> Result<String> {
        Ok(match self.report.config.format {
            Format::Json => serde_json::to_string_pretty(&self.report)? + "\n",
            Format::Csv => self.csv.clone(),
        })
    }

    /// Writes the rendered report to `config.output`, or returns it for stdout.
    pub fn emit(&self) -> Result<Option<String>> {
        let text = self.render()?;
        match &self.report.config.output {
            Some(path) => {
                std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
                Ok(None)
            }
            None => Ok(Some(text)),
        }
    }

    /// One line for standard error.
    pub fn summary(&self) -> String {
        let r = &self.report;
        let mut parts = vec![r.command.to_string()];
        if let Some(v) = r.verdict {
            parts.push(format!("verdict {}", verdict_name(v)));
        }
        if let Some(c) = r.c_estimate {
            parts.push(format!("C {c:.6e}"));
        }
        if let Some(m) = r.max_residual {
            parts.push(format!("max residual {m:.3e}"));
        }
        if let Some(e) = r.eta {
            parts.push(format!("eta {e:.4}"));
        }
        if let Some(d) = r.conservation_drift {
            parts.push(format!("drift {d:.3e}"));
        }
        parts.push(format!("{:.1} ms", r.runtime_ms));
        parts.join(", ")
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Inconclusive => "INCONCLUSIVE",
    }
}

struct Partial {
    verdict: Option<Verdict>,
    c_estimate: Option<f64>,
    records: Vec<RatioRecord>,
    max_residual: Option<f64>,
    eta: Option<f64>,
    conservation_drift: Option<f64>,
    details: Value,
    csv: String,
}

impl Partial {
    fn new(details: Value, csv: String) -> Self {
        Partial {
            verdict: None,
            c_estimate: None,
            records: Vec::new(),
            max_residual: None,
            eta: None,
            conservation_drift: None,
            details,
            csv,
        }
    }

    fn from_condition(rep: ConditionReport) -> Self {
        let csv = rep.to_csv();
        let details = json!({
            "excluded_count": rep.excluded_count,
            "c_prime_estimate": rep.c_prime_estimate,
        });
        Partial {
            verdict: Some(rep.verdict),
            c_estimate: Some(rep.c_estimate),
            records: rep.records,
            ..Partial::new(details, csv)
        }
    }
}

/// Runs one command to completion.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    config.validate()?;
    let started = Instant::now();
    let f = parse(&config.f, config.n).context("parsing f")?;
    let g = config
        .g
        .as_deref()
        .map(|text| parse(text, config.n).context("parsing g"))
        .transpose()?;
    let need_g = || g.clone().context("g is required");

    let part = match config.command {
        Command::Check => Partial::from_condition(check_theorem2(&f, &need_g()?, config.r, &config.sampling)?),
        Command::Check0 => Partial::from_condition(check_theorem3(&f, &need_g()?, &config.sampling)?),
        Command::Flow => flow(config, &f, &need_g()?)?,
        Command::Verify => verify(config, &f, &need_g()?)?,
        Command::Loja => loja(config, &f, g.as_ref())?,
        Command::Genpair => genpair(config, &f)?,
        Command::Distbound => distbound(config, &f)?,
    };

    let report = Report {
        config: config.clone(),
        command: config.command,
        verdict: part.verdict,
        c_estimate: part.c_estimate,
        records: part.records,
        max_residual: part.max_residual,
        eta: part.eta,
        conservation_drift: part.conservation_drift,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        details: part.details,
    };
    Ok(Outcome { report, csv: part.csv })
}

fn zero_set(config: &RunConfig, f: &PolyGerm, eps: f64) -> SingularSetApprox {
    let mut points = vec![vec![0.0; config.n]];
    points.extend(config.zero_points.iter().cloned());
    let z = SingularSetApprox::from_points(config.n, points);
    match config.grid_pitch {
        Some(pitch) => z.refine_grid(f, config.sampling.radius_max, pitch, eps),
        None => z,
    }
}

fn diffeo(config: &RunConfig, f: &PolyGerm, g: &PolyGerm) -> Result<DiffeoMap> {
    let system = HomotopySystem::new(f.clone(), g.clone(), config.r)?
        .with_delta(config.delta)?
        .with_domain_radius(config.sampling.radius_max);
    let z = zero_set(config, f, system.eps_z());
    Ok(DiffeoMap::new(system)
        .with_settings(config.integrator.clone())
        .with_zero_set(z))
}

fn start_points(config: &RunConfig) -> Result<Vec<Vec<f64>>> {
    if !config.points.is_empty() {
        return Ok(config.points.clone());
    }
    Ok(sample_domain(&config.sampling)?.into_iter().map(|s| s.x).collect())
}

fn flow(config: &RunConfig, f: &PolyGerm, g: &PolyGerm) -> Result<Partial> {
    let mut map = diffeo(config, f, g)?;
    if config.inverse {
        map = map.inverse();
    }
    let mut trajectories: Vec<Trajectory> = Vec::new();
    for x in start_points(config)? {
        trajectories.push(map.trajectory(&x).with_context(|| format!("integrating from {x:?}"))?);
    }
    let drift = trajectories.iter().map(|t| t.conservation_drift).fold(0.0, f64::max);

    let n = config.n;
    let mut csv = String::from("sample,t");
    for i in 1..=n {
        csv.push_str(&format!(",y{i}"));
    }
    csv.push_str(",F,W_norm\n");
    for (k, traj) in trajectories.iter().enumerate() {
        for line in traj.to_csv(false).lines() {
            csv.push_str(&format!("{k},{line}\n"));
        }
    }
    let details = json!({
        "direction": map.direction,
        "eps_z": map.system.eps_z(),
        "trajectories": trajectories,
    });
    Ok(Partial {
        conservation_drift: Some(drift),
        ..Partial::new(details, csv)
    })
}

fn verify(config: &RunConfig, f: &PolyGerm, g: &PolyGerm) -> Result<Partial> {
    let map = diffeo(config, f, g)?;
    let eq = verify_equivalence(&map, &config.sampling)?;
    let rt = round_trip(&map, &config.sampling)?;
    let mut min_det = f64::INFINITY;
    let mut max_cond: f64 = 0.0;
    for p in &eq.points {
        let jac = numeric_jacobian(&map, &p.x, config.jacobian_step)?;
        min_det = min_det.min(jac.determinant());
        let sv = jac.singular_values();
        let cond = sv.max() / sv.min();
        max_cond = max_cond.max(cond);
    }
    let displacement = displacement_profile(&map, &config.sampling)?;
    let pass = eq.max_residual <= config.residual_tol && min_det > 0.0;
    let details = json!({
        "round_trip_error": rt.max_error,
        "round_trip_worst_point": rt.worst_point,
        "min_jacobian_det": min_det,
        "max_jacobian_condition": max_cond,
        "displacement": displacement,
        "points": eq.points.len(),
    });
    Ok(Partial {
        verdict: Some(if pass { Verdict::Pass } else { Verdict::Fail }),
        max_residual: Some(eq.max_residual),
        conservation_drift: Some(eq.max_conservation_drift),
        ..Partial::new(details, eq.to_csv())
    })
}

fn binding_csv(rows: &mut String, label: &str, est: &LojasiewiczEstimate) {
    for (lf, lg) in &est.binding {
        rows.push_str(&format!("{label},{lf:e},{lg:e}\n"));
    }
}

fn loja(config: &RunConfig, f: &PolyGerm, g: Option<&PolyGerm>) -> Result<Partial> {
    let mut csv = String::from("germ,log_abs_f,log_grad_norm\n");
    let (eta, details) = match g {
        Some(g) => {
            let cmp = compare_exponents(f, g, &config.sampling)?;
            binding_csv(&mut csv, "f", &cmp.f);
            binding_csv(&mut csv, "g", &cmp.g);
            (cmp.f.eta_hat, serde_json::to_value(&cmp)?)
        }
        None => {
            let est = estimate_lojasiewicz(f, &config.sampling)?;
            binding_csv(&mut csv, "f", &est);
            (est.eta_hat, json!({ "f": est }))
        }
    };
    Ok(Partial {
        eta: Some(eta),
        ..Partial::new(details, csv)
    })
}

fn genpair(config: &RunConfig, f: &PolyGerm) -> Result<Partial> {
    let basis = JacobiIdealBasis::new(f.clone());
    let count = ideal_power_generators(&basis, config.r + 2)?.len();
    let multipliers = match &config.multipliers {
        Some(texts) => texts
            .iter()
            .map(|t| parse_poly(t.trim(), config.n).with_context(|| format!("parsing multiplier {t:?}")))
            .collect::<Result<Vec<_>>>()?,
        None => random_multipliers(config.n, count, config.multiplier_degree, config.sampling.seed),
    };
    let pair = generate_pair(f, config.r, &multipliers)?;
    if !pair.element.is_consistent(&basis) {
        bail!("ideal element failed to re-assemble");
    }
    let mut csv = String::from("kind,index,word,polynomial\n");
    csv.push_str(&format!("g,0,,{}\n", pair.g));
    let mut generators = Vec::new();
    for (k, (gen, m)) in pair.generators.iter().zip(&multipliers).enumerate() {
        let word = gen.word.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ");
        csv.push_str(&format!("generator,{k},{word},{}\n", gen.poly));
        csv.push_str(&format!("multiplier,{k},{word},{m}\n"));
        generators.push(json!({
            "word": gen.word.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "generator": gen.poly.to_string(),
            "multiplier": m.to_string(),
        }));
    }
    let details = json!({
        "g": pair.g.to_string(),
        "difference": pair.element.assembled.to_string(),
        "multipliers": multipliers.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "generators": generators,
    });
    Ok(Partial::new(details, csv))
}

fn distbound(config: &RunConfig, f: &PolyGerm) -> Result<Partial> {
    let eps = 1e-12 * (1.0 + f.gradient_bound(config.sampling.radius_max));
    let z = zero_set(config, f, eps);
    let rep = estimate_gradient_dist_bound(f, &z, &config.sampling)?;
    let mut csv = String::from("shell_radius,max_ratio\n");
    for (radius, max) in config.sampling.radii().iter().zip(&rep.record.shell_max) {
        csv.push_str(&format!("{radius:e},{max:e}\n"));
    }
    let details = json!({
        "a_estimate": rep.a_estimate,
        "excluded_count": rep.excluded_count,
        "zero_set_points": z.known_points().len(),
        "grid_points": z.refinement().map(|g| g.points.len()),
    });
    Ok(Partial {
        verdict: Some(rep.verdict),
        records: vec![rep.record],
        ..Partial::new(details, csv)
    })
}
