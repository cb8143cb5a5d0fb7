//! Row types of the pipeline outputs and their CSV/JSON encodings.
//!
//! Every table is a flat list of rows; CSV files carry a header line and
//! JSON files hold an array of objects with the same field names. Floats are
//! written in shortest round-trip form, so reading a table back yields
//! bit-identical values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub use phonorank::stylometry::{ClusterMargins, Relation};

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}: unknown table extension (expected .csv or .json)")]
    Extension(PathBuf),
}

pub type Result<T> = std::result::Result<T, TableError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }

    fn of_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Ok(Self::Csv),
            Some("json") => Ok(Self::Json),
            _ => Err(TableError::Extension(path.to_owned())),
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown format {s:?} (expected csv or json)")),
        }
    }
}

/// One rank of the model curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub rank: usize,
    /// Expected sorted frequency by quadrature.
    pub exact: Option<f64>,
    /// Saddle-point approximation of the same.
    pub approx: Option<f64>,
    /// Relative fluctuation `ε_r` by quadrature.
    pub epsilon: Option<f64>,
    /// Monte Carlo mean and its standard error, when sampling was requested.
    pub mc_mean: Option<f64>,
    pub mc_stderr: Option<f64>,
}

/// Size and coverage of one text under one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub text_id: String,
    pub author: String,
    pub mode: String,
    pub token_count: u64,
    pub type_count: u64,
    pub phoneme_total: u64,
    pub coverage: f64,
    pub oov_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub text_id: String,
    pub author: String,
    pub mode: String,
    pub beta: f64,
    /// Sum of squared residuals, scaled by 1e7.
    pub ss_err_e7: f64,
    pub r_squared: f64,
    pub grid_warning: bool,
}

/// Observed and fitted frequency at one rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub rank: usize,
    pub observed: f64,
    pub predicted: f64,
}

/// One unordered pair of the long-form distance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub text_i: String,
    pub text_j: String,
    pub rho0: f64,
    pub rho1: f64,
    pub mode: String,
}

/// Fraction of word types two texts share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonRow {
    pub text_i: String,
    pub text_j: String,
    pub p: f64,
}

/// Margin of an author under the shared-vocabulary distance `1 - p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonMarginRow {
    pub author: String,
    pub min_inter: f64,
    pub max_intra: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionRow {
    pub candidate: String,
    pub author: String,
    pub mode: String,
    pub lambda: u8,
    pub max_to_candidate: f64,
    pub max_intra: f64,
    pub verdict: phonorank::stylometry::Verdict,
}

/// Writes `rows` to `dir/name.{csv,json}` and returns the path.
pub fn write_table<R: Serialize>(dir: &Path, name: &str, rows: &[R], format: Format) -> Result<PathBuf> {
    let path = dir.join(format!("{name}.{}", format.extension()));
    write_table_to(&path, rows)?;
    Ok(path)
}

/// Writes `rows` to `path`, choosing the encoding by extension.
pub fn write_table_to<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let io = |source| TableError::Io { path: path.to_owned(), source };
    let file = File::create(path).map_err(io)?;
    match Format::of_path(path)? {
        Format::Csv => {
            let csv_err = |source| TableError::Csv { path: path.to_owned(), source };
            let mut w = csv::Writer::from_writer(file);
            for row in rows {
                w.serialize(row).map_err(csv_err)?;
            }
            w.flush().map_err(io)?;
        }
        Format::Json => {
            let mut w = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, rows)
                .map_err(|source| TableError::Json { path: path.to_owned(), source })?;
            w.write_all(b"\n").map_err(io)?;
            w.flush().map_err(io)?;
        }
    }
    Ok(())
}

/// Reads a table written by [`write_table`].
pub fn read_table<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let file = File::open(path).map_err(|source| TableError::Io { path: path.to_owned(), source })?;
    match Format::of_path(path)? {
        Format::Csv => csv::Reader::from_reader(file)
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(|source| TableError::Csv { path: path.to_owned(), source }),
        Format::Json => serde_json::from_reader(BufReader::new(file))
            .map_err(|source| TableError::Json { path: path.to_owned(), source }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use phonorank::stylometry::Verdict;

    fn round_trip<R>(rows: Vec<R>)
    where
        R: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug,
    {
        let dir = tempfile::tempdir().unwrap();
        for format in [Format::Csv, Format::Json] {
            let path = write_table(dir.path(), "t", &rows, format).unwrap();
            assert_eq!(read_table::<R>(&path).unwrap(), rows);
        }
    }

    #[test]
    fn rows_survive_both_encodings() {
        round_trip(vec![
            ModelRow { rank: 1, exact: Some(0.75), approx: None, epsilon: Some(1.0 / 3.0), mc_mean: None, mc_stderr: None },
            ModelRow { rank: 2, exact: Some(0.25), approx: Some(0.1 + 0.2), epsilon: None, mc_mean: Some(1e-300), mc_stderr: Some(2.5e-7) },
        ]);
        round_trip(vec![DistanceRow {
            text_i: "a,b".into(),
            text_j: "c \"d\"".into(),
            rho0: 0.123456789012345,
            rho1: 0.0,
            mode: "exclusive-types".into(),
        }]);
        round_trip(vec![AttributionRow {
            candidate: "x".into(),
            author: "A".into(),
            mode: "types".into(),
            lambda: 1,
            max_to_candidate: 0.2,
            max_intra: 0.3,
            verdict: Verdict::NoEvidence,
        }]);
        round_trip(vec![ClusterMargins { author: "A".into(), mode: "all".into(), b: None, z0: -0.1, z1: 0.2 }]);
    }

    #[test]
    fn unknown_extension() {
        let dir = tempfile::tempdir().unwrap();
        let rows: Vec<CommonRow> = Vec::new();
        assert!(matches!(
            write_table_to(&dir.path().join("t.txt"), &rows),
            Err(TableError::Extension(_))
        ));
    }
}
