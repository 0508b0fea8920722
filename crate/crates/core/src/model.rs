//! The contaminated linear model `y = Xβ* + √n θ* + ξ` and deterministic
//! synthetic data generation.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Population covariance of the design rows.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceModel {
    #[default]
    Identity,
    /// `Σ_ij = ρ^|i-j|`, `ρ ∈ (-1, 1)`.
    Ar1 { rho: f64 },
    /// `Σ_ij = ρ + (1-ρ)·1{i=j}`, `ρ ∈ [0, 1)`.
    Equicorrelated { rho: f64 },
    /// Row-major `p×p` matrix.
    Explicit { matrix: Vec<Vec<f64>> },
}

impl fmt::Display for CovarianceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CovarianceModel::Identity => write!(f, "identity"),
            CovarianceModel::Ar1 { rho } => write!(f, "ar1:{rho}"),
            CovarianceModel::Equicorrelated { rho } => write!(f, "equi:{rho}"),
            CovarianceModel::Explicit { matrix } => write!(f, "explicit({}x{})", matrix.len(), matrix.len()),
        }
    }
}

/// Parses `identity`, `ar1:<rho>` and `equi:<rho>`.
impl FromStr for CovarianceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let rho = || -> Result<f64> {
            arg.ok_or_else(|| Error::invalid(format!("covariance `{s}` needs a correlation, e.g. `{kind}:0.5`")))?
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad correlation in `{s}`: {e}")))
        };
        match kind {
            "identity" | "id" => Ok(CovarianceModel::Identity),
            "ar1" => Ok(CovarianceModel::Ar1 { rho: rho()? }),
            "equi" | "equicorrelated" => Ok(CovarianceModel::Equicorrelated { rho: rho()? }),
            _ => Err(Error::invalid(format!(
                "unknown covariance `{s}` (expected identity, ar1:<rho> or equi:<rho>)"
            ))),
        }
    }
}

pub fn make_covariance(model: &CovarianceModel, p: usize) -> Result<DMatrix<f64>> {
    if p == 0 {
        return Err(Error::invalid("covariance dimension must be at least 1"));
    }
    let sigma = match model {
        CovarianceModel::Identity => DMatrix::identity(p, p),
        CovarianceModel::Ar1 { rho } => {
            let rho = *rho;
            if !(rho > -1.0 && rho < 1.0) {
                return Err(Error::invalid(format!("ar1 correlation {rho} outside (-1, 1)")));
            }
            DMatrix::from_fn(p, p, |i, j| rho.powi(i.abs_diff(j) as i32))
        }
        CovarianceModel::Equicorrelated { rho } => {
            let rho = *rho;
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::invalid(format!("equicorrelation {rho} outside [0, 1)")));
            }
            DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho })
        }
        CovarianceModel::Explicit { matrix } => {
            if matrix.len() != p || matrix.iter().any(|row| row.len() != p) {
                return Err(Error::dims("explicit covariance", format!("{p}x{p}"), shape_of(matrix)));
            }
            let m = DMatrix::from_fn(p, p, |i, j| matrix[i][j]);
            let asym = (&m - m.transpose()).amax();
            if asym > 1e-12 * (1.0 + m.amax()) {
                return Err(Error::invalid(format!("explicit covariance is not symmetric (max asymmetry {asym:e})")));
            }
            m
        }
    };
    linalg::check_psd(&sigma)?;
    Ok(sigma)
}

fn shape_of(rows: &[Vec<f64>]) -> String {
    let widths: Vec<usize> = rows.iter().map(Vec::len).collect();
    format!("{} rows with widths {:?}", rows.len(), widths)
}

/// Draws `n` iid rows from `N_p(0, Σ)` as `Z·Σ^{1/2}` with a symmetric root.
pub fn sample_design<R: Rng + ?Sized>(n: usize, sigma: &DMatrix<f64>, rng: &mut R) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::invalid("design must have at least one row"));
    }
    let root = linalg::sym_sqrt(sigma)?;
    Ok(standard_normal_rows(n, sigma.nrows(), rng) * root)
}

/// `n×p` matrix of iid standard normals, filled row by row.
pub(crate) fn standard_normal_rows<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            z[(i, j)] = StandardNormal.sample(rng);
        }
    }
    z
}

/// First `s` coordinates equal to `amplitude`, the rest zero.
pub fn make_beta(p: usize, s: usize, amplitude: f64) -> Result<DVector<f64>> {
    if s > p {
        return Err(Error::invalid(format!("sparsity s={s} exceeds dimension p={p}")));
    }
    Ok(DVector::from_fn(p, |j, _| if j < s { amplitude } else { 0.0 }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    /// `θ*_i = magnitude`, i.e. `y_i = y°_i + √n·magnitude`.
    FixedShift { magnitude: f64 },
    /// Shift of size `|magnitude|` pointing against the sign of the clean response.
    SignFlipShift { magnitude: f64 },
}

impl Mechanism {
    fn magnitude(&self) -> f64 {
        match *self {
            Mechanism::FixedShift { magnitude } | Mechanism::SignFlipShift { magnitude } => magnitude,
        }
    }

    fn theta_for(&self, clean: f64) -> f64 {
        match *self {
            Mechanism::FixedShift { magnitude } => magnitude,
            Mechanism::SignFlipShift { magnitude } => {
                if clean >= 0.0 {
                    -magnitude.abs()
                } else {
                    magnitude.abs()
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexRule {
    #[default]
    FirstO,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub o: usize,
    pub mechanism: Mechanism,
    #[serde(default)]
    pub index_rule: IndexRule,
}

impl ContaminationSpec {
    pub fn none() -> Self {
        ContaminationSpec {
            o: 0,
            mechanism: Mechanism::FixedShift { magnitude: 0.0 },
            index_rule: IndexRule::FirstO,
        }
    }

    pub fn fixed_shift(o: usize, magnitude: f64) -> Self {
        ContaminationSpec {
            o,
            mechanism: Mechanism::FixedShift { magnitude },
            index_rule: IndexRule::FirstO,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub beta_star: DVector<f64>,
    pub support_s: Vec<usize>,
    pub theta_star: DVector<f64>,
    pub support_o: Vec<usize>,
    pub xi: DVector<f64>,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub truth: Option<GroundTruth>,
    pub sigma_hint: Option<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::dims("dataset", format!("y of length {}", x.nrows()), y.len()));
        }
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::invalid("dataset needs n >= 1 and p >= 1"));
        }
        Ok(Dataset {
            x,
            y,
            truth: None,
            sigma_hint: None,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// `‖y − Xβ* − √n θ* − ξ‖∞`, or `None` without ground truth.
    pub fn reconstruction_error(&self) -> Option<f64> {
        let t = self.truth.as_ref()?;
        let sqrt_n = (self.n() as f64).sqrt();
        let rebuilt = &self.x * &t.beta_star + &t.theta_star * sqrt_n + &t.xi;
        Some((&self.y - rebuilt).amax())
    }
}

/// Clean responses `y° = Xβ* + ξ`, then `o` labels shifted per the contamination
/// mechanism. Draw order: design rows, noise, outlier positions.
#[allow(clippy::too_many_arguments)]
pub fn generate<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    cov: &CovarianceModel,
    beta_star: &DVector<f64>,
    sigma: f64,
    contamination: &ContaminationSpec,
    rng: &mut R,
) -> Result<Dataset> {
    if beta_star.len() != p {
        return Err(Error::dims("generate: beta_star", p, beta_star.len()));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("noise level {sigma} must be finite and nonnegative")));
    }
    let o = contamination.o;
    if o > n {
        return Err(Error::invalid(format!("o={o} corrupted labels exceeds n={n}")));
    }
    let magnitude = contamination.mechanism.magnitude();
    if o > 0 && !(magnitude != 0.0 && magnitude.is_finite()) {
        return Err(Error::invalid("contamination magnitude must be finite and nonzero when o > 0"));
    }

    let cov_matrix = make_covariance(cov, p)?;
    let x = sample_design(n, &cov_matrix, rng)?;
    let xi = DVector::from_fn(n, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    });
    let clean = &x * beta_star + &xi;

    let mut support_o: Vec<usize> = match contamination.index_rule {
        IndexRule::FirstO => (0..o).collect(),
        IndexRule::Random => index::sample(rng, n, o).into_vec(),
    };
    support_o.sort_unstable();

    let sqrt_n = (n as f64).sqrt();
    let mut y = clean.clone();
    for &i in &support_o {
        y[i] = clean[i] + sqrt_n * contamination.mechanism.theta_for(clean[i]);
    }
    let theta_star = (&y - &clean) / sqrt_n;

    let support_s = beta_star
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect();

    Ok(Dataset {
        x,
        y,
        truth: Some(GroundTruth {
            beta_star: beta_star.clone(),
            support_s,
            theta_star,
            support_o,
            xi,
            sigma,
        }),
        sigma_hint: Some(sigma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn covariance_examples() {
        assert_eq!(make_covariance(&CovarianceModel::Identity, 3).unwrap(), DMatrix::identity(3, 3));
        let ar2 = make_covariance(&CovarianceModel::Ar1 { rho: 0.5 }, 2).unwrap();
        assert_eq!(ar2, DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]));
        let ar3 = make_covariance(&CovarianceModel::Ar1 { rho: 0.5 }, 3).unwrap();
        assert_eq!(ar3[(0, 2)], 0.25);
        let eq = make_covariance(&CovarianceModel::Equicorrelated { rho: 0.3 }, 3).unwrap();
        assert_eq!(eq[(1, 1)], 1.0);
        assert_eq!(eq[(0, 1)], 0.3);
    }

    #[test]
    fn covariance_rejects_bad_input() {
        let bad = CovarianceModel::Explicit {
            matrix: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
        };
        assert!(matches!(make_covariance(&bad, 2), Err(Error::NotPsd { .. })));
        let wrong_shape = CovarianceModel::Explicit {
            matrix: vec![vec![1.0, 0.0]],
        };
        assert!(matches!(make_covariance(&wrong_shape, 2), Err(Error::Dimension { .. })));
        assert!(make_covariance(&CovarianceModel::Ar1 { rho: 1.0 }, 2).is_err());
        assert!(make_covariance(&CovarianceModel::Equicorrelated { rho: -0.1 }, 2).is_err());
        assert!(make_covariance(&CovarianceModel::Identity, 0).is_err());
    }

    #[test]
    fn covariance_parsing() {
        assert_eq!("identity".parse::<CovarianceModel>().unwrap(), CovarianceModel::Identity);
        assert_eq!("ar1:0.5".parse::<CovarianceModel>().unwrap(), CovarianceModel::Ar1 { rho: 0.5 });
        assert_eq!(
            "equi:0.9".parse::<CovarianceModel>().unwrap(),
            CovarianceModel::Equicorrelated { rho: 0.9 }
        );
        assert!("ar1".parse::<CovarianceModel>().is_err());
        assert!("toeplitz:1".parse::<CovarianceModel>().is_err());
    }

    #[test]
    fn degenerate_covariance_gives_zero_design() {
        let x = sample_design(4, &DMatrix::zeros(2, 2), &mut rng_from_seed(3)).unwrap();
        assert_eq!(x, DMatrix::zeros(4, 2));
    }

    #[test]
    fn design_moments_identity() {
        let n = 10_000;
        let x = sample_design(n, &DMatrix::identity(2, 2), &mut rng_from_seed(1)).unwrap();
        for col in x.column_iter() {
            let mean = col.mean();
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            assert!(mean.abs() <= 4.0 / (n as f64).sqrt(), "mean {mean}");
            assert!((var - 1.0).abs() <= 0.1, "var {var}");
        }
    }

    #[test]
    fn design_correlation_ar1() {
        let sigma = make_covariance(&CovarianceModel::Ar1 { rho: 0.5 }, 2).unwrap();
        let x = sample_design(10_000, &sigma, &mut rng_from_seed(1)).unwrap();
        let (a, b) = (x.column(0), x.column(1));
        let (ma, mb) = (a.mean(), b.mean());
        let cov: f64 = a.iter().zip(b.iter()).map(|(u, v)| (u - ma) * (v - mb)).sum();
        let va: f64 = a.iter().map(|u| (u - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|v| (v - mb).powi(2)).sum();
        let corr = cov / (va * vb).sqrt();
        assert!((corr - 0.5).abs() <= 0.05, "corr {corr}");
    }

    #[test]
    fn beta_examples() {
        assert_eq!(make_beta(5, 0, 10.0).unwrap(), DVector::zeros(5));
        let b = make_beta(100, 5, 10.0).unwrap();
        assert!(b.iter().take(5).all(|&v| v == 10.0));
        assert!(b.iter().skip(5).all(|&v| v == 0.0));
        assert_eq!(make_beta(3, 3, -2.0).unwrap(), DVector::from_element(3, -2.0));
        assert!(make_beta(3, 4, 1.0).is_err());
    }

    #[test]
    fn noiseless_clean_generation() {
        let beta = make_beta(6, 2, 1.5).unwrap();
        let d = generate(20, 6, &CovarianceModel::Identity, &beta, 0.0, &ContaminationSpec::none(), &mut rng_from_seed(9))
            .unwrap();
        let t = d.truth.as_ref().unwrap();
        assert_eq!(d.y, &d.x * &beta);
        assert!(t.theta_star.iter().all(|&v| v == 0.0));
        assert!(t.xi.iter().all(|&v| v == 0.0));
        assert_eq!(t.support_s, vec![0, 1]);
    }

    #[test]
    fn fixed_shift_on_theta_scale() {
        let beta = make_beta(3, 1, 1.0).unwrap();
        let spec = ContaminationSpec::fixed_shift(1, 3.0);
        let mut rng = rng_from_seed(4);
        let d = generate(4, 3, &CovarianceModel::Identity, &beta, 0.5, &spec, &mut rng).unwrap();
        let t = d.truth.as_ref().unwrap();
        assert_eq!(t.theta_star.as_slice(), &[3.0, 0.0, 0.0, 0.0]);
        let clean0 = (d.x.row(0) * &beta)[0] + t.xi[0];
        assert!((d.y[0] - clean0 - 6.0).abs() < 1e-12);
        assert_eq!(t.support_o, vec![0]);
    }

    #[test]
    fn sign_flip_and_random_positions() {
        let beta = make_beta(5, 2, 4.0).unwrap();
        let spec = ContaminationSpec {
            o: 7,
            mechanism: Mechanism::SignFlipShift { magnitude: 2.0 },
            index_rule: IndexRule::Random,
        };
        let d = generate(30, 5, &CovarianceModel::Ar1 { rho: 0.3 }, &beta, 1.0, &spec, &mut rng_from_seed(11)).unwrap();
        let t = d.truth.as_ref().unwrap();
        assert_eq!(t.support_o.len(), 7);
        assert_eq!(t.theta_star.iter().filter(|&&v| v != 0.0).count(), 7);
        for &i in &t.support_o {
            let clean = d.y[i] - (30f64).sqrt() * t.theta_star[i];
            assert!(t.theta_star[i] * clean <= 0.0);
            assert!((t.theta_star[i].abs() - 2.0).abs() < 1e-9);
        }
        assert!(d.reconstruction_error().unwrap() <= 1e-12 * (1.0 + d.y.amax()));
    }

    #[test]
    fn generate_rejects_too_many_outliers() {
        let beta = make_beta(2, 1, 1.0).unwrap();
        let spec = ContaminationSpec::fixed_shift(5, 1.0);
        assert!(generate(4, 2, &CovarianceModel::Identity, &beta, 1.0, &spec, &mut rng_from_seed(0)).is_err());
    }
}
