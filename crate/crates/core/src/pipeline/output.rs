//! Rendering a bundle to CSV/JSON files and writing them with a manifest.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::run::{MethodResult, ResultBundle};
use crate::error::Result;

pub const MANIFEST_NAME: &str = "manifest.json";

/// One rendered output file.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

impl OutputFile {
    fn csv(name: String, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Self> {
        let mut contents = Vec::new();
        write(&mut contents)?;
        Ok(OutputFile { name, contents })
    }

    fn json(name: String, value: &Value) -> Self {
        let mut contents = serde_json::to_vec_pretty(value).expect("json values serialize");
        contents.push(b'\n');
        OutputFile { name, contents }
    }

    pub fn sha256(&self) -> String {
        Sha256::digest(&self.contents).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn method_sidecar(cfg: &ExperimentConfig, drop_top: usize, m: &MethodResult) -> Value {
    let members: Vec<Value> = m
        .unfolded
        .iter()
        .enumerate()
        .map(|(i, u)| match u {
            None => json!({"index": i, "status": "FAILED"}),
            Some(u) => {
                let fit = u.fit().map(|f| {
                    json!({
                        "coefficients": f.coefficients,
                        "residual_rms": f.residual_rms,
                    })
                });
                json!({
                    "index": i,
                    "status": "OK",
                    "levels": u.len(),
                    "mean_spacing": u.mean_spacing(),
                    "fit": fit,
                })
            }
        })
        .collect();
    json!({
        "label": m.label,
        "method": m.method.to_json(),
        "trim": {"drop_top": drop_top, "edge_fraction": cfg.trim.edge_fraction},
        "status": if m.failed { "FAILED" } else { "OK" },
        "members": members,
    })
}

/// Render every CSV and method sidecar of a bundle, in a fixed order.
pub fn render(bundle: &ResultBundle) -> Result<Vec<OutputFile>> {
    let cfg = &bundle.config;
    let mut files = Vec::new();
    let nnsd_stem = cfg.stem('a');
    let delta3_stem = cfg.stem('b');
    let sigma2_stem = cfg.stem('c');
    let density_stem = cfg.stem('d');
    for m in &bundle.methods {
        if let Some(h) = &m.nnsd {
            files.push(OutputFile::csv(format!("{nnsd_stem}_nnsd_{}.csv", m.label), |w| h.write_csv(w))?);
        }
        if let Some(c) = &m.delta3 {
            files.push(OutputFile::csv(format!("{delta3_stem}_delta3_{}.csv", m.label), |w| c.write_csv(w))?);
        }
        if let Some(c) = &m.sigma2 {
            files.push(OutputFile::csv(format!("{sigma2_stem}_sigma2_{}.csv", m.label), |w| c.write_csv(w))?);
        }
        files.push(OutputFile::json(
            format!("{}_method_{}.json", cfg.name, m.label),
            &method_sidecar(cfg, bundle.drop_top, m),
        ));
    }
    for (name, h) in &bundle.nnsd_references {
        files.push(OutputFile::csv(format!("{nnsd_stem}_nnsd_{name}.csv"), |w| h.write_csv(w))?);
    }
    for c in &bundle.curve_references {
        let (stem, stat, model) = match c.method.split_once('_') {
            Some((model, "delta3")) => (&delta3_stem, "delta3", model),
            Some((model, "sigma2")) => (&sigma2_stem, "sigma2", model),
            _ => continue,
        };
        files.push(OutputFile::csv(format!("{stem}_{stat}_{model}.csv"), |w| c.write_csv(w))?);
    }
    if let Some(h) = &bundle.density {
        files.push(OutputFile::csv(format!("{density_stem}_density.csv"), |w| h.write_csv(w))?);
    }
    if let Some(c) = &bundle.density_reference {
        files.push(OutputFile::csv(format!("{density_stem}_density_semicircle.csv"), |w| c.write_csv(w))?);
    }
    Ok(files)
}

fn run_summary(bundle: &ResultBundle) -> Value {
    let errors: Vec<Value> = bundle
        .errors
        .iter()
        .map(|e| {
            json!({
                "member": e.member,
                "stage": e.stage,
                "method": e.method,
                "message": e.error.to_string(),
            })
        })
        .collect();
    let methods: serde_json::Map<String, Value> = bundle
        .methods
        .iter()
        .map(|m| (m.label.clone(), json!(if m.failed { "FAILED" } else { "OK" })))
        .collect();
    json!({
        "name": bundle.config.name,
        "seed": bundle.config.ensemble.seed,
        "status": if bundle.failed() { "FAILED" } else { "OK" },
        "config": bundle.config.to_text(),
        "drop_top": bundle.drop_top,
        "methods": methods,
        "density_l1": bundle.density_l1,
        "errors": errors,
    })
}

/// Manifest listing each file with its hash, plus the configs that produced them.
pub fn manifest(bundles: &[&ResultBundle], files: &[OutputFile]) -> OutputFile {
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let failed = bundles.iter().any(|b| b.failed());
    let listed: Vec<Value> = files
        .iter()
        .map(|f| json!({"name": f.name, "sha256": f.sha256(), "bytes": f.contents.len()}))
        .collect();
    OutputFile::json(
        MANIFEST_NAME.to_string(),
        &json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "created_unix": created,
            "status": if failed { "FAILED" } else { "OK" },
            "runs": bundles.iter().map(|b| run_summary(b)).collect::<Vec<_>>(),
            "files": listed,
        }),
    )
}

/// Write `files` and their manifest into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, bundles: &[&ResultBundle], files: &[OutputFile]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for f in files {
        fs::write(dir.join(&f.name), &f.contents)?;
    }
    let m = manifest(bundles, files);
    fs::write(dir.join(&m.name), &m.contents)?;
    log::info!("wrote {} files to {}", files.len() + 1, dir.display());
    Ok(())
}
