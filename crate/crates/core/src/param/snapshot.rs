use std::io::BufRead;
use std::path::{Path, PathBuf};

use super::{ParamDomain, ParamGrid, ParamMatrixModel};
use crate::error::{dim_err, Error, Result};
use crate::linalg::DenseMatrix;

/// Precomputed `A(t_j)` values; evaluation is only defined at stored points.
#[derive(Clone, Debug)]
pub struct SnapshotModel {
    snapshots: Vec<(f64, DenseMatrix)>,
    domain: ParamDomain,
}

/// Builds a snapshot model; snapshots are sorted by parameter and must have
/// distinct parameters and equal shapes.
pub fn snapshot_model(mut snapshots: Vec<(f64, DenseMatrix)>) -> Result<SnapshotModel> {
    if snapshots.is_empty() {
        return Err(Error::InvalidArgument(
            "a snapshot model needs at least one snapshot".into(),
        ));
    }
    snapshots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let dims = snapshots[0].1.dims();
    for (t, a) in &snapshots {
        if a.dims() != dims {
            return Err(dim_err(
                "snapshot_model",
                format!("snapshot at t = {t} is {:?}, expected {dims:?}", a.dims()),
            ));
        }
    }
    if snapshots.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidArgument("duplicate snapshot parameter".into()));
    }
    let domain = ParamDomain::interval(snapshots[0].0, snapshots[snapshots.len() - 1].0)?;
    Ok(SnapshotModel { snapshots, domain })
}

impl SnapshotModel {
    pub fn snapshots(&self) -> &[(f64, DenseMatrix)] {
        &self.snapshots
    }

    /// Grid of the stored parameters.
    pub fn grid(&self) -> ParamGrid {
        ParamGrid::new(self.snapshots.iter().map(|(t, _)| *t).collect(), &self.domain)
            .expect("snapshot parameters are sorted, distinct and inside their own hull")
    }

    /// Reads a manifest with one `t,path` pair per line (`#` comments
    /// allowed). Relative paths are resolved against the manifest directory.
    pub fn load_manifest(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let reader = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut snaps = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (t, file) = line.split_once(',').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: "expected `t,path`".into(),
            })?;
            let t: f64 = t.trim().parse().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("bad parameter {t:?}: {e}"),
            })?;
            let file = PathBuf::from(file.trim());
            let full = if file.is_absolute() { file } else { base.join(file) };
            snaps.push((t, DenseMatrix::load_csv(full)?));
        }
        snapshot_model(snaps)
    }

    /// Writes `<stem>_<j>.csv` files and the manifest `<stem>.manifest` into
    /// `dir`, returning the manifest path.
    pub fn save_manifest(&self, dir: impl AsRef<Path>, stem: &str) -> Result<PathBuf> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut manifest = String::new();
        for (j, (t, a)) in self.snapshots.iter().enumerate() {
            let name = format!("{stem}_{j:04}.csv");
            a.save_csv(dir.join(&name))?;
            manifest.push_str(&format!("{t:?},{name}\n"));
        }
        let path = dir.join(format!("{stem}.manifest"));
        std::fs::write(&path, manifest)?;
        Ok(path)
    }
}

impl ParamMatrixModel for SnapshotModel {
    fn dims(&self) -> (usize, usize) {
        self.snapshots[0].1.dims()
    }

    fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    fn eval(&self, t: f64) -> Result<DenseMatrix> {
        self.snapshots
            .iter()
            .find(|(s, _)| *s == t)
            .map(|(_, a)| a.clone())
            .ok_or(Error::NotStored { t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RngState;

    #[test]
    fn single_snapshot() {
        let a = DenseMatrix::identity(3);
        let m = snapshot_model(vec![(0.0, a.clone())]).unwrap();
        assert_eq!(m.eval(0.0).unwrap(), a);
        assert!(matches!(m.eval(0.5), Err(Error::NotStored { .. })));
    }

    #[test]
    fn rejects_inconsistent_snapshots() {
        assert!(snapshot_model(vec![]).is_err());
        assert!(snapshot_model(vec![(0.0, DenseMatrix::zeros(2, 2)), (1.0, DenseMatrix::zeros(3, 2))]).is_err());
        assert!(snapshot_model(vec![(0.0, DenseMatrix::zeros(2, 2)), (0.0, DenseMatrix::zeros(2, 2))]).is_err());
    }

    #[test]
    fn manifest_round_trip_is_bit_identical() {
        let mut rng = RngState::new(3, 0);
        let snaps: Vec<_> = [0.0, 1.0 / 3.0, 0.7]
            .iter()
            .map(|&t| (t, rng.gaussian_matrix(4, 3).scale(1e-9)))
            .collect();
        let m = snapshot_model(snaps.clone()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = m.save_manifest(dir.path(), "snap").unwrap();
        let back = SnapshotModel::load_manifest(&path).unwrap();
        for (t, a) in &snaps {
            assert_eq!(back.eval(*t).unwrap().as_slice(), a.as_slice());
        }
        assert_eq!(back.grid().points(), m.grid().points());
    }
}
