//! Runs a resolved experiment and writes its artifact files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use projlab::certify::{
    bound_report, bound_report_with_trajectory, cycle_decay_ledger, rate_fit, sqrt_decay_bound,
    step_identities, CheckResult,
};
use projlab::constructions::{bakers_oracle, cycle_norms_closed_form, BlockConstruction};
use projlab::iterates::{remotest_choice, run, Trajectory};
use projlab::quantities::{friedrichs_number, measure, s_norm, DEFAULT_SNORM_TOL};

use crate::config::{CertKind, Experiment, QuantityKind};

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let file = fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// family.json: the construction provenance and the serialized family.
pub fn write_family(exp: &Experiment) -> Result<()> {
    fs::create_dir_all(&exp.out)?;
    let mut extra = Map::new();
    if let Some(p) = &exp.bakers_params {
        extra.insert("bakers_params".into(), serde_json::to_value(p)?);
    }
    if let Some(cfg) = &exp.block_cfg {
        if let Some(eps) = exp.construction_params.get("epsilon").and_then(Value::as_f64) {
            extra.insert(
                "x0_truncation_tail_bound".into(),
                json!(BlockConstruction::harmonic_tail_bound(eps, cfg.blocks())),
            );
        }
    }
    let value = json!({
        "schema_version": 1,
        "construction": {
            "name": exp.construction_name,
            "params": exp.construction_params,
        },
        "x0": exp.x0.iter().cloned().collect::<Vec<f64>>(),
        "extra": extra,
        "family": serde_json::to_value(&exp.family)?,
    });
    write_json(&exp.out.join("family.json"), &value)
}

/// Runs the trajectory and writes trajectory.csv and trajectory.json.
pub fn run_trajectory(exp: &Experiment) -> Result<Trajectory> {
    let policy = exp
        .policy
        .clone()
        .ok_or_else(|| anyhow::anyhow!("no policy configured"))?;
    let traj = run(&exp.family, &exp.x0, &policy, exp.n_steps, exp.run_opts)?;
    let mut csv = BufWriter::new(fs::File::create(exp.out.join("trajectory.csv"))?);
    traj.to_csv(&mut csv)?;
    csv.flush()?;
    write_json(&exp.out.join("trajectory.json"), &traj.to_json_value())?;
    Ok(traj)
}

/// Computes the requested quantities and writes quantities.json.
pub fn run_quantities(exp: &Experiment) -> Result<()> {
    let mut out = Map::new();
    out.insert("schema_version".into(), json!(1));
    if let Some(seed) = exp.seed {
        out.insert("seed".into(), json!(seed));
    }
    let wants_rho = exp.quantities.contains(&QuantityKind::Rho)
        || exp.quantities.contains(&QuantityKind::RhoStar);
    if wants_rho {
        let report = measure(
            &exp.family,
            exp.restarts,
            exp.seed.expect("validated: randomized quantities carry a seed"),
        )?;
        let full = serde_json::to_value(&report)?;
        for key in [
            "friedrichs_c",
            "rho_est",
            "rho_witness",
            "rho_star_est",
            "rho_star_witness",
            "zero_rank_members",
            "restarts",
            "subgradient_iterations",
        ] {
            if let Some(v) = full.get(key) {
                out.insert(key.into(), v.clone());
            }
        }
    } else if exp.quantities.contains(&QuantityKind::Friedrichs) {
        out.insert("friedrichs_c".into(), json!(friedrichs_number(&exp.family)?));
    }
    if exp.quantities.contains(&QuantityKind::SNormX0) {
        let r = s_norm(&exp.family, &exp.x0, DEFAULT_SNORM_TOL)?;
        out.insert("s_norm_x0".into(), r.to_json_value());
    }
    if exp.quantities.contains(&QuantityKind::ClosedFormSlope) {
        let cfg = exp.block_cfg.as_ref().expect("validated");
        let n = exp.n_steps.max(1000);
        let norms = cycle_norms_closed_form(cfg, n);
        let window = (n / 100).max(10)..(n + 1);
        let fit = rate_fit(&norms, window.clone())?;
        out.insert(
            "closed_form_slope".into(),
            json!({
                "slope": fit.slope,
                "r_squared": fit.r_squared,
                "window": [window.start, window.end],
                "cycles": n,
            }),
        );
    }
    write_json(&exp.out.join("quantities.json"), &Value::Object(out))
}

/// Runs the requested certifications against the trajectory; writes
/// certification.json and returns whether every check passed.
pub fn run_certifications(exp: &Experiment, traj: Option<&Trajectory>) -> Result<bool> {
    let mut checks: Vec<CheckResult> = Vec::new();
    let mut reports = Map::new();

    for cert in &exp.certifications {
        match cert {
            CertKind::StepIdentities => {
                let t = traj.expect("validated: trajectory present");
                let r = step_identities(t, &exp.family, 1e-9)?;
                checks.extend(r.checks);
            }
            CertKind::BakersAgreement => {
                let t = traj.expect("validated");
                let params = exp.bakers_params.as_ref().expect("validated");
                let xi = exp.x0[0];
                let eta = exp.x0[2];
                let lambda0 = (eta / xi).ln();
                let oracle = bakers_oracle(params, lambda0, t.steps() / 2 + 1);
                let mut agree = CheckResult::new(
                    "bakers_agreement",
                    "simulated remotest indices match the log-domain oracle",
                    0.0,
                );
                for n in 0..t.steps() {
                    if t.indices[n] != oracle.predicted_index(n) {
                        agree.observe(1.0, n);
                    }
                }
                let mut odd = CheckResult::new(
                    "bakers_odd_steps",
                    "odd steps return to the first member",
                    0.0,
                );
                for n in (1..t.steps()).step_by(2) {
                    if t.indices[n] != 0 {
                        odd.observe(1.0, n);
                    }
                }
                let long = bakers_oracle(params, lambda0, 500);
                let mut acyclic = CheckResult::new(
                    "bakers_no_short_period",
                    "no period <= 20 in the first 500 even-step predictions",
                    0.0,
                );
                for period in 1..=20usize {
                    if (0..500 - period).all(|k| long.even_indices[k] == long.even_indices[k + period])
                    {
                        acyclic.observe(1.0, period);
                    }
                }
                checks.push(agree.finish());
                checks.push(odd.finish());
                checks.push(acyclic.finish());
            }
            CertKind::CycleDecayLedger => {
                let cycles = (exp.n_steps / exp.family.k()).max(1);
                let ledger = cycle_decay_ledger(&exp.family, &exp.x0, cycles)?;
                reports.insert("cycle_decay_ledger".into(), ledger.to_json_value());
                checks.extend(ledger.checks);
            }
            CertKind::ClosedFormAgreement => {
                let t = traj.expect("validated");
                let cfg = exp.block_cfg.as_ref().expect("validated");
                let per_cycle = t
                    .per_cycle_norms()
                    .ok_or_else(|| anyhow::anyhow!("closed_form_agreement needs a cyclic run"))?;
                let closed = cycle_norms_closed_form(cfg, per_cycle.len().saturating_sub(1));
                let mut agree = CheckResult::new(
                    "closed_form_agreement",
                    "simulated cycle norms match the closed form (relative)",
                    1e-10,
                );
                for n in 1..per_cycle.len() {
                    let scale = closed[n].max(per_cycle[n]).max(1e-300);
                    agree.observe((closed[n] - per_cycle[n]).abs() / scale, n);
                }
                checks.push(agree.finish());
            }
            CertKind::SqrtDecayBound => {
                let t = traj.expect("validated");
                let (k0, _) = remotest_choice(&exp.family, &exp.x0)?;
                let x1 = exp.family.member(k0).project(&exp.x0)?;
                let s1 = s_norm(&exp.family, &x1, DEFAULT_SNORM_TOL)?;
                if !s1.certified {
                    anyhow::bail!("s(x_1) did not certify (gap {})", s1.gap);
                }
                reports.insert("s_norm_x1".into(), s1.to_json_value());
                checks.push(sqrt_decay_bound(t, s1.value, 1e-9));
            }
            CertKind::SlowWitnessFloor => {
                let t = traj.expect("validated");
                let target = exp.witness_target.as_ref().expect("validated");
                let mut floor = CheckResult::new(
                    "slow_witness_floor",
                    "remotest residuals stay above the witness target",
                    0.0,
                );
                for n in 1..=target.len().min(t.steps()) {
                    floor.observe(target[n - 1] - t.norms[n], n);
                }
                checks.push(floor.finish());
            }
            CertKind::RateReport => {
                let report = match traj {
                    Some(t) => bound_report_with_trajectory(&exp.family, t)?,
                    None => bound_report(&exp.family)?,
                };
                let mut ordering = CheckResult::new(
                    "factor_ordering",
                    "predicted remotest factor <= predicted alternating factor",
                    0.0,
                );
                ordering.observe(report.remotest_factor - report.alternating_factor, 0);
                reports.insert("rate_report".into(), serde_json::to_value(&report)?);
                checks.push(ordering.finish());
            }
        }
    }

    let pass = checks.iter().all(|c| c.pass);
    let value = json!({
        "schema_version": 1,
        "pass": pass,
        "checks": checks,
        "reports": reports,
    });
    write_json(&exp.out.join("certification.json"), &value)?;
    Ok(pass)
}

