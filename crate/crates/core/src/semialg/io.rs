use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{SampleCloud, SamplingDiagnostics};
use crate::error::{Error, Result};

/// JSON metadata written next to a cloud CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudSidecar {
    pub variables: Vec<String>,
    pub count: usize,
    pub radius: f64,
    pub seed: u64,
    pub tol: f64,
    pub sep_tol: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub diagnostics: SamplingDiagnostics,
}

fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the points as CSV (header = variable names) and the sidecar as
/// `<stem>.json`.
pub fn write_cloud_csv(cloud: &SampleCloud, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(&cloud.variables)
        .map_err(|e| Error::Io(e.to_string()))?;
    for p in &cloud.points {
        w.write_record(p.iter().map(|v| format!("{v:e}")))
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    let n = cloud.residuals.len().max(1) as f64;
    let side = CloudSidecar {
        variables: cloud.variables.clone(),
        count: cloud.points.len(),
        radius: cloud.radius,
        seed: cloud.seed,
        tol: cloud.tol,
        sep_tol: cloud.sep_tol,
        max_residual: cloud.max_residual(),
        mean_residual: cloud.residuals.iter().sum::<f64>() / n,
        diagnostics: cloud.diagnostics.clone(),
    };
    let f = File::create(sidecar_path(path))?;
    serde_json::to_writer_pretty(f, &side).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

/// Reads a CSV written by [`write_cloud_csv`] together with its sidecar.
pub fn read_cloud_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>, CloudSidecar)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::Io(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Io(format!("bad number `{s}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch {
                expected: header.len(),
                found: row.len(),
            });
        }
        points.push(row);
    }
    let f = File::open(sidecar_path(path))?;
    let side: CloudSidecar = serde_json::from_reader(f).map_err(|e| Error::Io(e.to_string()))?;
    Ok((header, points, side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::VarList;
    use crate::semialg::{sample_on_sphere, ConstructibleSet, SamplerConfig};

    #[test]
    fn csv_round_trip() {
        let v = VarList::new(&["u", "v", "t"]);
        let s = ConstructibleSet::parse(&v, &[(vec!["t"], vec![])]).unwrap();
        let cloud = sample_on_sphere(&s, 0.1, 12, 5, &SamplerConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.csv");
        write_cloud_csv(&cloud, &path).unwrap();
        let (h, pts, side) = read_cloud_csv(&path).unwrap();
        assert_eq!(h, vec!["u", "v", "t"]);
        assert_eq!(pts, cloud.points);
        assert_eq!(side.count, 12);
        assert_eq!(side.seed, 5);
    }
}
