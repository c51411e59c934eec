//! Experiment configuration: JSON schema, validation, and resolution into
//! concrete families, starting points, and policies.
//!
//! User-facing indices (explicit schedules) are 1-based subspace labels;
//! they are converted to 0-based indices during validation.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use projlab::constructions::{
    bakers_family, bakers_start, block_family, four_lines_family, random_family,
    slow_witness, slow_witness_required_blocks, BakersParams, BlockConstruction,
};
use projlab::hilbert::coordinate_axes;
use projlab::iterates::{Policy, RunOptions};
use projlab::{SubspaceFamily, Vector};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub construction: ConstructionSpec,
    #[serde(default)]
    pub x0: Option<X0Spec>,
    #[serde(default)]
    pub policy: Option<PolicySpec>,
    #[serde(default)]
    pub n_steps: Option<usize>,
    #[serde(default)]
    pub stop_norm: Option<f64>,
    #[serde(default)]
    pub store_iterates: Option<bool>,
    #[serde(default)]
    pub quantities: Vec<String>,
    #[serde(default)]
    pub certifications: Vec<String>,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionSpec {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum X0Spec {
    /// The construction's canonical starting point.
    Preset(String),
    Coords(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PolicySpec {
    Name(String),
    Explicit { explicit: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantityKind {
    Friedrichs,
    Rho,
    RhoStar,
    SNormX0,
    ClosedFormSlope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertKind {
    StepIdentities,
    BakersAgreement,
    CycleDecayLedger,
    ClosedFormAgreement,
    SqrtDecayBound,
    SlowWitnessFloor,
    RateReport,
}

/// A fully validated and resolved experiment.
pub struct Experiment {
    pub family: SubspaceFamily,
    pub construction_name: String,
    pub construction_params: serde_json::Value,
    pub block_cfg: Option<BlockConstruction>,
    pub bakers_params: Option<BakersParams>,
    /// Residual floor of a slow-witness construction, indexed from n = 1.
    pub witness_target: Option<Vec<f64>>,
    pub x0: Vector,
    pub policy: Option<Policy>,
    pub n_steps: usize,
    pub run_opts: RunOptions,
    pub quantities: Vec<QuantityKind>,
    pub certifications: Vec<CertKind>,
    pub restarts: usize,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

fn param_f64(params: &serde_json::Value, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(|v| v.as_f64())
        .ok_or_else(|| anyhow!("construction params must set numeric '{key}'"))
}

fn param_usize(params: &serde_json::Value, key: &str) -> Result<usize> {
    params
        .get(key)
        .and_then(|v| v.as_u64())
        .map(|v| v as usize)
        .ok_or_else(|| anyhow!("construction params must set integer '{key}'"))
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| "parsing config JSON")?;
        Ok(cfg)
    }

    /// Validates the configuration and builds the concrete experiment.
    /// `seed_override` and `out_override` come from the command line.
    pub fn resolve(
        self,
        seed_override: Option<u64>,
        out_override: Option<PathBuf>,
    ) -> Result<Experiment> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            );
        }
        let seed = seed_override.or(self.seed);

        let mut quantities = Vec::new();
        for q in &self.quantities {
            quantities.push(match q.as_str() {
                "friedrichs" => QuantityKind::Friedrichs,
                "rho" => QuantityKind::Rho,
                "rho_star" => QuantityKind::RhoStar,
                "s_norm_x0" => QuantityKind::SNormX0,
                "closed_form_slope" => QuantityKind::ClosedFormSlope,
                other => bail!("unknown quantity '{other}'"),
            });
        }
        let mut certifications = Vec::new();
        for c in &self.certifications {
            certifications.push(match c.as_str() {
                "step_identities" => CertKind::StepIdentities,
                "bakers_agreement" => CertKind::BakersAgreement,
                "cycle_decay_ledger" => CertKind::CycleDecayLedger,
                "closed_form_agreement" => CertKind::ClosedFormAgreement,
                "sqrt_decay_bound" => CertKind::SqrtDecayBound,
                "slow_witness_floor" => CertKind::SlowWitnessFloor,
                "rate_report" => CertKind::RateReport,
                other => bail!("unknown certification '{other}'"),
            });
        }

        let randomized = self.construction.name == "random"
            || quantities.contains(&QuantityKind::Rho)
            || quantities.contains(&QuantityKind::RhoStar);
        if randomized && seed.is_none() {
            bail!("a seed is required when randomized estimators or constructions are requested");
        }

        let params = &self.construction.params;
        let mut block_cfg = None;
        let mut bakers_params = None;
        let mut witness_target = None;
        let (family, preset_x0): (SubspaceFamily, Option<Vector>) =
            match self.construction.name.as_str() {
                "four_lines" => {
                    let eps = param_f64(params, "eps")?;
                    let f = four_lines_family(eps)?;
                    (f, Some(Vector::from_vec(vec![1.0, 1.0])))
                }
                "bakers" => {
                    let (f, p) = bakers_family()?;
                    bakers_params = Some(p);
                    let (x0, _) = bakers_start();
                    (f, Some(x0))
                }
                "blocks" => {
                    let epsilon = param_f64(params, "epsilon")?;
                    let blocks = param_usize(params, "blocks")?;
                    let cfg = BlockConstruction::harmonic(epsilon, blocks)?;
                    let (f, x0) = block_family(&cfg)?;
                    block_cfg = Some(cfg);
                    (f, Some(x0))
                }
                "orthogonal_axes" => {
                    let dim = param_usize(params, "dim")?;
                    let f = coordinate_axes(dim)?;
                    let x0 = Vector::from_fn(dim, |i, _| (i + 1) as f64);
                    (f, Some(x0))
                }
                "random" => {
                    let dim = param_usize(params, "dim")?;
                    let k = param_usize(params, "k")?;
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(seed.expect("checked above"));
                    let f = random_family(dim, k, &mut rng)?;
                    let x0 = loop {
                        let v = Vector::from_fn(dim, |_, _| rng.random::<f64>() * 2.0 - 1.0);
                        let n = v.norm();
                        if n > 1e-3 {
                            break v / n;
                        }
                    };
                    (f, Some(x0))
                }
                "slow_witness" => {
                    // explicit "target" list, or "horizon" N for the
                    // canonical floor 1/ln(n+2), n = 1..=N
                    let target: Vec<f64> = if let Some(t) = params.get("target") {
                        serde_json::from_value(t.clone()).context("parsing witness target")?
                    } else {
                        let horizon = param_usize(params, "horizon")?;
                        (1..=horizon).map(|n| 1.0 / ((n + 2) as f64).ln()).collect()
                    };
                    let blocks = slow_witness_required_blocks(&target)?;
                    let cfg = BlockConstruction::harmonic(0.25, blocks)?;
                    let witness = slow_witness(&cfg, &target)?;
                    let (f, _) = block_family(&cfg)?;
                    block_cfg = Some(cfg);
                    witness_target = Some(target);
                    (f, Some(witness.x0))
                }
                "inline" => {
                    let fam_json = params
                        .get("family")
                        .ok_or_else(|| anyhow!("inline construction needs 'family'"))?;
                    let f: SubspaceFamily = serde_json::from_value(fam_json.clone())
                        .context("parsing inline family")?;
                    (f, None)
                }
                other => bail!("unknown construction '{other}'"),
            };

        let x0 = match &self.x0 {
            None => preset_x0
                .clone()
                .ok_or_else(|| anyhow!("this construction has no preset x0; give coordinates"))?,
            Some(X0Spec::Preset(word)) => {
                if word != "preset" {
                    bail!("x0 must be \"preset\" or a coordinate array, got \"{word}\"");
                }
                preset_x0
                    .clone()
                    .ok_or_else(|| anyhow!("this construction has no preset x0; give coordinates"))?
            }
            Some(X0Spec::Coords(c)) => {
                if c.len() != family.ambient_dim() {
                    bail!(
                        "x0 has {} coordinates, family lives in dimension {}",
                        c.len(),
                        family.ambient_dim()
                    );
                }
                Vector::from_vec(c.clone())
            }
        };

        let policy = match &self.policy {
            None => None,
            Some(PolicySpec::Name(name)) => Some(match name.as_str() {
                "cyclic" => Policy::Cyclic,
                "remotest" => Policy::Remotest,
                other => bail!("unknown policy '{other}'"),
            }),
            Some(PolicySpec::Explicit { explicit }) => {
                if explicit.is_empty() {
                    bail!("explicit schedule must be non-empty");
                }
                let mut sched = Vec::with_capacity(explicit.len());
                for &label in explicit {
                    if label < 1 || label > family.k() {
                        bail!("schedule label {label} outside 1..={}", family.k());
                    }
                    sched.push(label - 1);
                }
                Some(Policy::Explicit(sched))
            }
        };

        let needs_trajectory = certifications.iter().any(|c| {
            matches!(
                c,
                CertKind::StepIdentities
                    | CertKind::BakersAgreement
                    | CertKind::CycleDecayLedger
                    | CertKind::ClosedFormAgreement
                    | CertKind::SqrtDecayBound
                    | CertKind::SlowWitnessFloor
            )
        });
        if needs_trajectory && (policy.is_none() || self.n_steps.is_none()) {
            bail!("the requested certifications need 'policy' and 'n_steps'");
        }

        for c in &certifications {
            match c {
                CertKind::BakersAgreement => {
                    if bakers_params.is_none() {
                        bail!("bakers_agreement requires the 'bakers' construction");
                    }
                    if !matches!(policy, Some(Policy::Remotest)) {
                        bail!("bakers_agreement requires the remotest policy");
                    }
                }
                CertKind::CycleDecayLedger => {
                    if !matches!(policy, Some(Policy::Cyclic)) {
                        bail!("cycle_decay_ledger requires the cyclic policy");
                    }
                }
                CertKind::ClosedFormAgreement => {
                    if block_cfg.is_none() {
                        bail!("closed_form_agreement requires the 'blocks' construction");
                    }
                    if policy.is_none() || self.n_steps.is_none() {
                        bail!("closed_form_agreement needs 'policy' and 'n_steps'");
                    }
                }
                CertKind::SqrtDecayBound => {
                    if family.k() != 2 {
                        bail!("sqrt_decay_bound applies to two-member families");
                    }
                    if !matches!(policy, Some(Policy::Remotest)) {
                        bail!("sqrt_decay_bound requires the remotest policy");
                    }
                }
                CertKind::SlowWitnessFloor => {
                    let target = witness_target
                        .as_ref()
                        .ok_or_else(|| anyhow!("slow_witness_floor requires the 'slow_witness' construction"))?;
                    if !matches!(policy, Some(Policy::Remotest)) {
                        bail!("slow_witness_floor requires the remotest policy");
                    }
                    if self.n_steps.unwrap_or(0) < target.len() {
                        bail!(
                            "slow_witness_floor needs n_steps >= the target horizon ({})",
                            target.len()
                        );
                    }
                }
                _ => {}
            }
        }
        if quantities.contains(&QuantityKind::ClosedFormSlope) && block_cfg.is_none() {
            bail!("closed_form_slope requires the 'blocks' construction");
        }

        let n_steps = self.n_steps.unwrap_or(0);
        if policy.is_some() && n_steps == 0 {
            bail!("'n_steps' must be >= 1 when a policy is given");
        }
        let stop_norm = self.stop_norm.unwrap_or(projlab::iterates::DEFAULT_STOP_NORM);
        if stop_norm.is_nan() || stop_norm.is_infinite() || stop_norm < 0.0 {
            bail!("'stop_norm' must be a finite value >= 0");
        }

        let out = out_override
            .or_else(|| self.out.as_ref().map(PathBuf::from))
            .ok_or_else(|| anyhow!("no output directory: set 'out' in the config or pass --out"))?;

        Ok(Experiment {
            family,
            construction_name: self.construction.name,
            construction_params: self.construction.params,
            block_cfg,
            bakers_params,
            witness_target,
            x0,
            policy,
            n_steps,
            run_opts: RunOptions {
                stop_norm,
                store_iterates: self.store_iterates.unwrap_or(true),
            },
            quantities,
            certifications,
            restarts: self.restarts.unwrap_or(8),
            seed,
            out,
        })
    }
}
