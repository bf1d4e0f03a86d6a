//! CSV emission for sweeps, heatmaps, and probability curves, each with a
//! JSON sidecar recording the seed, config hash, and evaluation mode.
//! Numbers are written with shortest-roundtrip formatting, so identical
//! analyses produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{CrossoverReport, HeatmapGrid, Mode};
use crate::error::Result;
use crate::scenario::ScenarioFile;

#[derive(Debug, Clone, Serialize)]
pub struct Sidecar {
    pub seed: u64,
    pub config_sha256: String,
    pub mode: Mode,
    pub n_samples: u64,
}

/// SHA-256 of the resolved scenario dump; identifies the exact configuration
/// an output file was produced from.
pub fn config_hash(file: &ScenarioFile) -> String {
    let mut hasher = Sha256::new();
    hasher.update(file.dump().as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn write_sidecar(path: &Path, sidecar: &Sidecar) -> Result<()> {
    let mut body = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

/// Write `<stem>.csv` and `<stem>.meta.json`; returns the CSV path.
pub fn write_sweep(
    report: &CrossoverReport,
    out_dir: &Path,
    stem: &str,
    sidecar: &Sidecar,
) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record([report.variable_name.as_str(), "cfp_a", "cfp_b", "ratio", "crossing"])?;
    for (i, x) in report.grid.iter().enumerate() {
        let a = report.series_a[i];
        let b = report.series_b[i];
        let crossing = report
            .crossings
            .iter()
            .find(|c| c.index == i)
            .map(|c| fmt(c.interpolated_x))
            .unwrap_or_default();
        w.write_record([fmt(*x), fmt(a), fmt(b), fmt(a / b), crossing])?;
    }
    w.flush()?;
    write_sidecar(&out_dir.join(format!("{stem}.meta.json")), sidecar)?;
    Ok(csv_path)
}

/// Write `<stem>.csv` (long form x,y,ratio), `<stem>_locus.csv`, and the
/// sidecar; returns the main CSV path.
pub fn write_heatmap(
    grid: &HeatmapGrid,
    out_dir: &Path,
    stem: &str,
    sidecar: &Sidecar,
) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record([grid.x_name.as_str(), grid.y_name.as_str(), "ratio"])?;
    for (iy, y) in grid.y_grid.iter().enumerate() {
        for (ix, x) in grid.x_grid.iter().enumerate() {
            w.write_record([fmt(*x), fmt(*y), fmt(grid.ratio[iy][ix])])?;
        }
    }
    w.flush()?;

    let locus_path = out_dir.join(format!("{stem}_locus.csv"));
    let mut w = csv::Writer::from_path(&locus_path)?;
    w.write_record([grid.x_name.as_str(), grid.y_name.as_str()])?;
    for (x, y) in &grid.locus {
        w.write_record([fmt(*x), fmt(*y)])?;
    }
    w.flush()?;
    write_sidecar(&out_dir.join(format!("{stem}.meta.json")), sidecar)?;
    Ok(csv_path)
}

/// Write a dominance-probability curve as `<stem>.csv`.
pub fn write_prob(
    variable_name: &str,
    curve: &[(f64, f64)],
    out_dir: &Path,
    stem: &str,
    sidecar: &Sidecar,
) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record([variable_name, "p_a_less_b"])?;
    for (x, p) in curve {
        w.write_record([fmt(*x), fmt(*p)])?;
    }
    w.flush()?;
    write_sidecar(&out_dir.join(format!("{stem}.meta.json")), sidecar)?;
    Ok(csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{CrossDirection, Crossing};
    use tempfile::tempdir;

    #[test]
    fn sweep_csv_roundtrips_exactly() {
        let report = CrossoverReport {
            variable_name: "n_app".into(),
            grid: vec![1.0, 2.0, 3.0],
            series_a: vec![10.0, 20.5, 30.25],
            series_b: vec![25.125, 20.75, 15.0625],
            crossings: vec![Crossing {
                index: 2,
                interpolated_x: 3.0,
                direction: CrossDirection::AtoB,
            }],
        };
        let sidecar = Sidecar {
            seed: 0,
            config_sha256: "deadbeef".into(),
            mode: Mode::Expected,
            n_samples: 1,
        };
        let dir = tempdir().unwrap();
        let path = write_sweep(&report, dir.path(), "sweep", &sidecar).unwrap();

        let mut reader = csv::Reader::from_path(&path).unwrap();
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 3);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.get(0).unwrap().parse::<f64>().unwrap(), report.grid[i]);
            assert_eq!(row.get(1).unwrap().parse::<f64>().unwrap(), report.series_a[i]);
            assert_eq!(row.get(2).unwrap().parse::<f64>().unwrap(), report.series_b[i]);
        }
        assert_eq!(rows[2].get(4).unwrap(), "3");
        assert_eq!(rows[0].get(4).unwrap(), "");
        assert!(dir.path().join("sweep.meta.json").exists());
    }
}
