//! Aggregates run manifests into `summary.csv` and `summary.md`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::LabError;
use crate::output::OutputDir;
use crate::runner::{RunManifest, RunStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub manifests: Vec<(PathBuf, RunManifest)>,
}

impl Summary {
    pub fn failures(&self) -> usize {
        self.manifests.iter().filter(|(_, m)| m.status != RunStatus::Pass).count()
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.failures() > 0)
    }
}

/// Every `manifest.json` below the given roots, sorted by path.
pub fn find_manifests(roots: &[PathBuf]) -> Result<Vec<PathBuf>, LabError> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), LabError> {
        for entry in fs::read_dir(dir).map_err(|e| LabError::io(dir, e))? {
            let path = entry.map_err(|e| LabError::io(dir, e))?.path();
            if path.is_dir() {
                walk(&path, out)?;
            } else if path.file_name().is_some_and(|n| n == "manifest.json") {
                out.push(path);
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    for root in roots {
        if root.is_file() {
            out.push(root.clone());
        } else if root.is_dir() {
            walk(root, &mut out)?;
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn load(paths: &[PathBuf]) -> Result<Summary, LabError> {
    let mut manifests = Vec::with_capacity(paths.len());
    for p in paths {
        let text = fs::read_to_string(p).map_err(|e| LabError::io(p, e))?;
        let m: RunManifest =
            serde_json::from_str(&text).map_err(|e| LabError::Output(format!("{}: {e}", p.display())))?;
        manifests.push((p.clone(), m));
    }
    Ok(Summary { manifests })
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Pass => "pass",
        RunStatus::Fail => "fail",
        RunStatus::Error => "error",
    }
}

/// Write both summary files into `out`.
pub fn write(summary: &Summary, out: &Path) -> Result<Vec<PathBuf>, LabError> {
    let mut dir = OutputDir::create(out)?;
    let csv_path = out.join("summary.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| LabError::Output(format!("{}: {e}", csv_path.display())))?;
    let err = |e: csv::Error| LabError::Output(e.to_string());
    w.write_record(["run", "kind", "digest", "status", "assertions", "failed", "error"]).map_err(err)?;
    for (_, m) in &summary.manifests {
        let failed: Vec<&str> = m.assertions.iter().filter(|a| !a.passed).map(|a| a.name.as_str()).collect();
        w.write_record([
            Path::new(&m.directory).file_name().map_or(String::new(), |n| n.to_string_lossy().into_owned()),
            m.kind.name().to_string(),
            m.config_digest.clone(),
            status_name(m.status).to_string(),
            m.assertions.len().to_string(),
            failed.join(";"),
            m.error.as_ref().map_or(String::new(), |e| format!("{}: {}", e.stage, e.message)),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| LabError::io(&csv_path, e))?;

    let mut md = String::from("# Run summary\n\n");
    let _ = writeln!(md, "{} runs, {} not passing.\n", summary.manifests.len(), summary.failures());
    if !summary.manifests.is_empty() {
        md.push_str("| kind | digest | status | assertion | measured | expected | tolerance |\n");
        md.push_str("|---|---|---|---|---|---|---|\n");
        for (_, m) in &summary.manifests {
            let digest = &m.config_digest[..12.min(m.config_digest.len())];
            if m.assertions.is_empty() {
                let _ = writeln!(md, "| {} | {digest} | {} | | | | |", m.kind.name(), status_name(m.status));
            }
            for a in &m.assertions {
                let _ = writeln!(
                    md,
                    "| {} | {digest} | {} | {} | {:.6e} | {:.6e} | {} |",
                    m.kind.name(),
                    if a.passed { "pass" } else { "FAIL" },
                    a.name,
                    a.measured,
                    a.expected,
                    a.tolerance
                );
            }
            if let Some(e) = &m.error {
                let _ = writeln!(md, "| {} | {digest} | error | {} | | | |", m.kind.name(), e.message.replace('|', "/"));
            }
        }
    }
    dir.text("summary.md", &md)?;
    Ok(vec![csv_path, out.join("summary.md")])
}
