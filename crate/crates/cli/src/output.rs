//! Output files. Every file is written to a temporary sibling and renamed
//! into place, so readers never see a partial file.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use hidden_feedback::harness::{CheckpointRow, ReplicateResult, SummaryRow};

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn csv_bytes(fill: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    fill(&mut w)?;
    w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

/// `replicate, round, cum_pseudo_regret, cum_realized_regret`.
pub fn write_checkpoints(path: &Path, rows: &[CheckpointRow]) -> Result<()> {
    let bytes = csv_bytes(|w| {
        w.write_record(["replicate", "round", "cum_pseudo_regret", "cum_realized_regret"])?;
        for r in rows {
            w.serialize((r.replicate, r.round, r.cum_pseudo_regret, r.cum_realized_regret))?;
        }
        Ok(())
    })?;
    write_atomic(path, &bytes)
}

/// `replicate, phase, eps_r, n_r, rounds_spent, surviving_actions`, with the
/// surviving actions 1-based and `;`-separated.
pub fn write_phase_log(path: &Path, replicates: &[ReplicateResult]) -> Result<()> {
    let bytes = csv_bytes(|w| {
        w.write_record(["replicate", "phase", "eps_r", "n_r", "rounds_spent", "surviving_actions"])?;
        for rep in replicates {
            for p in rep.phases.iter().flatten() {
                let surviving = p
                    .surviving
                    .iter()
                    .map(|a| (a + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(";");
                w.serialize((rep.replicate, p.phase, p.eps, p.n, p.rounds_spent, surviving))?;
            }
        }
        Ok(())
    })?;
    write_atomic(path, &bytes)
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One column per axis, then `mean_regret, se`.
pub fn write_summary(path: &Path, axis_names: &[String], rows: &[SummaryRow]) -> Result<()> {
    let bytes = csv_bytes(|w| {
        let mut header: Vec<String> = axis_names.to_vec();
        header.extend(["mean_regret".to_string(), "se".to_string()]);
        w.write_record(&header)?;
        for r in rows {
            let mut rec: Vec<String> = r.params.iter().map(cell_text).collect();
            rec.push(r.mean_regret.to_string());
            rec.push(r.se.to_string());
            w.write_record(&rec)?;
        }
        Ok(())
    })?;
    write_atomic(path, &bytes)
}
