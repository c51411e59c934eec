//! Grid sweeps: a template experiment, a list of parameter axes, one cell
//! per point of the Cartesian product. Cells run concurrently; each owns
//! its output directory; scalar outputs are aggregated once all cells
//! finish.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::config::ExperimentConfig;
use crate::experiment;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub template: Value,
    pub grid: Vec<GridAxis>,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    /// Dotted path into the template JSON, e.g. "construction.params.epsilon".
    pub path: String,
    pub values: Vec<Value>,
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut cursor = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let map = cursor
            .as_object_mut()
            .ok_or_else(|| anyhow!("path '{path}' does not traverse objects"))?;
        if i + 1 == parts.len() {
            map.insert((*part).to_string(), value);
            return Ok(());
        }
        cursor = map
            .entry((*part).to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("empty path rejected earlier")
}

/// Numeric leaves of a JSON document, flattened into dotted keys. Arrays
/// are skipped (witness vectors and norm lists are not sweep scalars).
fn scalar_leaves(prefix: &str, value: &Value, out: &mut Map<String, Value>) {
    match value {
        Value::Number(_) | Value::Bool(_) => {
            out.insert(prefix.to_string(), value.clone());
        }
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                scalar_leaves(&key, v, out);
            }
        }
        _ => {}
    }
}

struct Cell {
    index: usize,
    params: Map<String, Value>,
    config: Value,
    out: PathBuf,
}

pub fn run_sweep(cfg: SweepConfig, out_override: Option<PathBuf>) -> Result<()> {
    if cfg.schema_version != crate::config::SCHEMA_VERSION {
        bail!("unsupported schema_version {}", cfg.schema_version);
    }
    if cfg.grid.is_empty() || cfg.grid.iter().any(|a| a.values.is_empty()) {
        bail!("the grid must have at least one axis with at least one value");
    }
    let out_root = out_override
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .ok_or_else(|| anyhow!("no output directory: set 'out' or pass --out"))?;

    // Cartesian product of the axes, last axis fastest.
    let total: usize = cfg.grid.iter().map(|a| a.values.len()).product();
    let mut cells: Vec<Cell> = Vec::with_capacity(total);
    for index in 0..total {
        let mut config = cfg.template.clone();
        let mut params = Map::new();
        let mut rest = index;
        for axis in cfg.grid.iter().rev() {
            let at = rest % axis.values.len();
            rest /= axis.values.len();
            let value = axis.values[at].clone();
            set_path(&mut config, &axis.path, value.clone())?;
            params.insert(axis.path.clone(), value);
        }
        let cell_out = out_root.join(format!("cell_{index:04}"));
        set_path(&mut config, "out", json!(cell_out.to_string_lossy()))?;
        cells.push(Cell { index, params, config, out: cell_out });
    }

    // Validate every cell before any file is written.
    for cell in &cells {
        let parsed: ExperimentConfig = serde_json::from_value(cell.config.clone())
            .with_context(|| format!("cell {}: parsing config", cell.index))?;
        parsed
            .resolve(None, Some(cell.out.clone()))
            .with_context(|| format!("cell {}: invalid config", cell.index))?;
    }

    fs::create_dir_all(&out_root)?;
    let mut results: Vec<(usize, Map<String, Value>, String)> = cells
        .par_iter()
        .map(|cell| {
            let status = run_cell(cell);
            let mut scalars = Map::new();
            for file in ["quantities.json", "certification.json", "trajectory.json"] {
                let path = cell.out.join(file);
                if let Ok(text) = fs::read_to_string(&path) {
                    if let Ok(v) = serde_json::from_str::<Value>(&text) {
                        let prefix = file.trim_end_matches(".json");
                        // trajectory norms are large arrays; keep its scalar
                        // summary only
                        if file == "trajectory.json" {
                            if let Some(norms) = v.get("norms").and_then(Value::as_array) {
                                if let Some(last) = norms.last() {
                                    scalars.insert("trajectory.final_norm".into(), last.clone());
                                }
                                scalars.insert(
                                    "trajectory.steps".into(),
                                    json!(norms.len().saturating_sub(1)),
                                );
                            }
                        } else {
                            scalar_leaves(prefix, &v, &mut scalars);
                        }
                    }
                }
            }
            let status = match status {
                Ok(all_passed) => {
                    if all_passed {
                        "ok".to_string()
                    } else {
                        "certification_failed".to_string()
                    }
                }
                Err(e) => format!("error: {e:#}"),
            };
            (cell.index, scalars, status)
        })
        .collect();
    results.sort_by_key(|(i, _, _)| *i);

    let aggregated: Vec<Value> = cells
        .iter()
        .zip(&results)
        .map(|(cell, (_, scalars, status))| {
            json!({
                "index": cell.index,
                "params": cell.params,
                "status": status,
                "scalars": scalars,
            })
        })
        .collect();
    let doc = json!({
        "schema_version": 1,
        "cells": aggregated,
    });
    let mut file = std::io::BufWriter::new(fs::File::create(out_root.join("aggregate.json"))?);
    serde_json::to_writer_pretty(&mut file, &doc)?;
    writeln!(file)?;
    file.flush()?;

    let failures = results.iter().filter(|(_, _, s)| s.starts_with("error")).count();
    if failures > 0 {
        eprintln!("sweep: {failures} of {} cells reported errors (see aggregate.json)", results.len());
    }
    Ok(())
}

fn run_cell(cell: &Cell) -> Result<bool> {
    let parsed: ExperimentConfig = serde_json::from_value(cell.config.clone())?;
    let exp = parsed.resolve(None, Some(cell.out.clone()))?;
    fs::create_dir_all(&exp.out)?;
    experiment::write_family(&exp)?;
    let traj = if exp.policy.is_some() && exp.n_steps > 0 {
        Some(experiment::run_trajectory(&exp)?)
    } else {
        None
    };
    if !exp.quantities.is_empty() {
        experiment::run_quantities(&exp)?;
    }
    if exp.certifications.is_empty() {
        Ok(true)
    } else {
        experiment::run_certifications(&exp, traj.as_ref())
    }
}

pub fn sweep_from_path(path: &Path, out_override: Option<PathBuf>) -> Result<()> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading sweep config {}", path.display()))?;
    let cfg: SweepConfig = serde_json::from_str(&text).context("parsing sweep config JSON")?;
    run_sweep(cfg, out_override)
}
