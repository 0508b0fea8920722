//! File formats: dataset CSV (`x1..xp,y`) with a JSON truth sidecar, plain
//! numeric matrix CSV, and JSON fit results.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, GroundTruth};
use crate::solver::FitResult;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Supports {
    pub s: Vec<usize>,
    pub o: Vec<usize>,
}

/// JSON sidecar describing how a dataset was generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub o: usize,
    pub sigma: f64,
    pub seed: Option<u64>,
    pub beta_star: Vec<f64>,
    pub theta_star: Vec<f64>,
    pub supports: Supports,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
}

impl DatasetMeta {
    pub fn from_dataset(data: &Dataset, seed: Option<u64>) -> Option<Self> {
        let t = data.truth.as_ref()?;
        Some(DatasetMeta {
            n: data.n(),
            p: data.p(),
            s: t.support_s.len(),
            o: t.support_o.len(),
            sigma: t.sigma,
            seed,
            beta_star: t.beta_star.as_slice().to_vec(),
            theta_star: t.theta_star.as_slice().to_vec(),
            supports: Supports {
                s: t.support_s.clone(),
                o: t.support_o.clone(),
            },
            xi: Some(t.xi.as_slice().to_vec()),
        })
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn json_err(path: &Path) -> impl Fn(serde_json::Error) -> Error + '_ {
    move |source| Error::Json {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(json_err(path))?;
    std::io::Write::flush(&mut w).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).map_err(json_err(path))
}

pub fn write_dataset_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let p = data.p();
    let mut header: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header).map_err(csv_err(path))?;
    let mut row = Vec::with_capacity(p + 1);
    for i in 0..data.n() {
        row.clear();
        row.extend(data.x.row(i).iter().map(|v| v.to_string()));
        row.push(data.y[i].to_string());
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `<stem>.csv` and, when the dataset carries ground truth, `<stem>.json`.
pub fn write_dataset(data: &Dataset, seed: Option<u64>, csv_path: &Path, meta_path: &Path) -> Result<()> {
    write_dataset_csv(data, csv_path)?;
    if let Some(meta) = DatasetMeta::from_dataset(data, seed) {
        write_json(&meta, meta_path)?;
    }
    Ok(())
}

/// Reads a numeric CSV; a first row that does not parse as numbers is taken as a header.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if k == 0 => continue,
            Err(e) => return Err(Error::invalid(format!("{}: row {}: {e}", path.display(), k + 1))),
        }
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(Error::invalid(format!("{}: no numeric rows", path.display())));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::dims("matrix csv row", ncols, rows[bad].len()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Reads a dataset CSV (last column is `y`) and optionally its truth sidecar.
pub fn read_dataset(csv_path: &Path, meta_path: Option<&Path>) -> Result<Dataset> {
    let m = read_matrix_csv(csv_path)?;
    if m.ncols() < 2 {
        return Err(Error::invalid(format!("{}: need at least one x column and y", csv_path.display())));
    }
    let p = m.ncols() - 1;
    let x = m.columns(0, p).into_owned();
    let y = m.column(p).into_owned();
    let mut data = Dataset::new(x, y)?;
    if let Some(meta_path) = meta_path {
        let meta: DatasetMeta = read_json(meta_path)?;
        if meta.n != data.n() || meta.p != data.p() || meta.beta_star.len() != p || meta.theta_star.len() != data.n() {
            return Err(Error::dims(
                "dataset sidecar",
                format!("n={} p={}", data.n(), data.p()),
                format!("n={} p={}", meta.n, meta.p),
            ));
        }
        let xi = meta.xi.clone().unwrap_or_else(|| vec![0.0; data.n()]);
        data.sigma_hint = Some(meta.sigma);
        data.truth = Some(GroundTruth {
            beta_star: DVector::from_vec(meta.beta_star),
            support_s: meta.supports.s,
            theta_star: DVector::from_vec(meta.theta_star),
            support_o: meta.supports.o,
            xi: DVector::from_vec(xi),
            sigma: meta.sigma,
        });
    }
    Ok(data)
}

pub fn write_fit(fit: &FitResult, path: &Path) -> Result<()> {
    write_json(fit, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate, make_beta, ContaminationSpec, CovarianceModel};
    use crate::rng::rng_from_seed;

    #[test]
    fn dataset_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let beta = make_beta(4, 2, 10.0).unwrap();
        let data = generate(12, 4, &CovarianceModel::Identity, &beta, 1.0, &ContaminationSpec::fixed_shift(3, 10.0), &mut rng_from_seed(5))
            .unwrap();
        let (csv_path, json_path) = (dir.path().join("d.csv"), dir.path().join("d.json"));
        write_dataset(&data, Some(5), &csv_path, &json_path).unwrap();

        let header = std::fs::read_to_string(&csv_path).unwrap();
        assert!(header.starts_with("x1,x2,x3,x4,y\n"));
        let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
        for key in ["n", "p", "s", "o", "sigma", "seed", "beta_star", "theta_star", "supports"] {
            assert!(meta.get(key).is_some(), "missing {key}");
        }

        let back = read_dataset(&csv_path, Some(&json_path)).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn headerless_matrix_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "1,2\n3,4\n").unwrap();
        let m = read_matrix_csv(&path).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        std::fs::write(&path, "1,2\n3\n").unwrap();
        assert!(read_matrix_csv(&path).is_err());
        assert!(matches!(read_matrix_csv(&dir.path().join("missing.csv")), Err(Error::Io { .. })));
    }

    #[test]
    fn fit_result_json_shape() {
        let fit = FitResult {
            beta_hat: DVector::from_vec(vec![1.0, 0.0]),
            theta_hat: DVector::from_vec(vec![0.5]),
            objective: 0.25,
            kkt_residual: 0.0,
            sweeps_used: 3,
            converged: true,
        };
        let v = serde_json::to_value(&fit).unwrap();
        assert_eq!(v["beta_hat"], serde_json::json!([1.0, 0.0]));
        assert_eq!(v["sweeps_used"], 3);
        let back: FitResult = serde_json::from_value(v).unwrap();
        assert_eq!(back, fit);
    }
}
