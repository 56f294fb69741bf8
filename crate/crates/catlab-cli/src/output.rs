//! Atomic file outputs, checksums, and the run manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};


use crate::Failure;

/// Collects every file a run produces so the manifest can list it with a
/// checksum. Files are written to a temp name and renamed into place.
pub struct OutputSink {
    dir: PathBuf,
    outputs: Vec<(String, String)>,
}

impl OutputSink {
    pub fn new(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::Internal(format!("create {}: {e}", dir.display())))?;
        Ok(OutputSink {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }


    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let fin = self.dir.join(name);
        fs::write(&tmp, contents)
            .map_err(|e| Failure::Internal(format!("write {}: {e}", tmp.display())))?;
        fs::rename(&tmp, &fin)
            .map_err(|e| Failure::Internal(format!("rename {}: {e}", fin.display())))?;
        let digest = Sha256::digest(contents.as_bytes());
        self.outputs.push((name.to_string(), hex_string(&digest)));
        Ok(())
    }

    pub fn outputs(&self) -> &[(String, String)] {
        &self.outputs
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
pub struct ManifestOutput {
    pub path: String,
    pub sha256: String,
}

/// The reproducibility record: map, command, parameters, tool version,
/// timestamp, per-output checksums, and the budgets in force.
#[derive(Serialize)]
pub struct RunManifest {
    pub map: [i64; 4],
    pub command: String,
    pub params: serde_json::Value,
    pub version: String,
    pub timestamp: String,
    pub outputs: Vec<ManifestOutput>,
    pub budgets: serde_json::Value,
}

pub fn budgets_json(b: &catlab::budgets::Budgets) -> serde_json::Value {
    serde_json::json!({
        "egorov_tol": b.egorov_tol,
        "commutator_tol": b.commutator_tol,
        "unitarity_tol": b.unitarity_tol,
        "gram_tol": b.gram_tol,
        "eigen_residual_tol": b.eigen_residual_tol,
        "amplitude_tol": b.amplitude_tol,
        "profile_imag_tol": b.profile_imag_tol,
        "profile_range_tol": b.profile_range_tol,
        "relation_tol": b.relation_tol,
        "ks_mid": b.ks_mid,
        "ks_large": b.ks_large,
        "ks_pass_fraction": b.ks_pass_fraction,
        "ks_sample_size": b.ks_sample_size,
        "joint_tol": b.joint_tol,
        "joint_grid": b.joint_grid,
        "joint_pairs": b.joint_pairs,
        "oracle_overlap_tol": b.oracle_overlap_tol,
        "oracle_angle_tol": b.oracle_angle_tol,
        "moment_budget": b.moment_budget,
        "solcount_ratio": b.solcount_ratio,
        "solcount_limit": b.solcount_limit,
        "slope_max": b.slope_max,
    })
}

pub fn write_manifest(
    sink: &mut OutputSink,
    map: [i64; 4],
    command: &str,
    params: serde_json::Value,
    budgets: &catlab::budgets::Budgets,
) -> Result<(), Failure> {
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".into());
    let manifest = RunManifest {
        map,
        command: command.to_string(),
        params,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp,
        outputs: sink
            .outputs()
            .iter()
            .map(|(path, sha256)| ManifestOutput {
                path: path.clone(),
                sha256: sha256.clone(),
            })
            .collect(),
        budgets: budgets_json(budgets),
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Failure::Internal(format!("manifest serialization: {e}")))?;
    sink.write("manifest.json", &text)
}
