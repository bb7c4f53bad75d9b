//! JSON input formats.
//!
//! Metrics are tagged by `"type"`:
//!
//! ```json
//! {"type": "riemannian", "a": [[1, 0], [0, 1]], "conformal": [1, 0]}
//! {"type": "randers", "alpha": [[1, 0], [0, 1]], "beta": [0, 0.5]}
//! {"type": "fiber_profile", "fourier": {"a0": 1, "cos": [0], "sin": [0.5]}}
//! {"type": "navigation", "h": [[1, 0], [0, 1]], "W": [0.5, 0]}
//! ```
//!
//! Optional fields: `conformal` (`exp(2 <c, x>)` factor on `a` / `alpha`),
//! `beta_linear` (`beta + B x`), `beta_exponential` (`exp(<c, x>) beta`), and a
//! top-level `pullback` matrix `M` giving `F(x, M y)`. Connections are
//! `{"n": 2, "gamma": [[[..]]], "at": [x, y]}` with `gamma[i][j][k] = Gamma^i_{jk}`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::connection::Christoffel;
use crate::error::{FinslerError, Result};
use crate::fiber2d::{FiberProfile, FourierSeries, ProfileTerm};
use crate::metric::{MatrixField, MetricSpec, Point, VectorField};
use crate::navigation::{navigation_metric, NavigationData, ShiftedEllipsoid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricJson {
    Riemannian {
        a: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        conformal: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pullback: Option<Vec<Vec<f64>>>,
    },
    Randers {
        alpha: Vec<Vec<f64>>,
        beta: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        conformal: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta_linear: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta_exponential: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pullback: Option<Vec<Vec<f64>>>,
    },
    FiberProfile {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fourier: Option<FourierSeries>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        terms: Option<Vec<ProfileTerm>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pullback: Option<Vec<Vec<f64>>>,
    },
    Navigation {
        h: Vec<Vec<f64>>,
        #[serde(rename = "W")]
        w: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pullback: Option<Vec<Vec<f64>>>,
    },
}

pub fn matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(FinslerError::Parse(format!("expected a square matrix, got {n} rows of lengths {:?}", rows.iter().map(Vec::len).collect::<Vec<_>>())));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(FinslerError::Parse("matrix entries must be finite".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn vector(v: &[f64], n: usize) -> Result<DVector<f64>> {
    if v.len() != n {
        return Err(FinslerError::DimensionMismatch { expected: n, got: v.len() });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(FinslerError::Parse("vector entries must be finite".into()));
    }
    Ok(DVector::from_column_slice(v))
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn riemannian_field(a: &[Vec<f64>], conformal: &Option<Vec<f64>>) -> Result<MatrixField> {
    let base = matrix(a)?;
    Ok(match conformal {
        Some(c) => MatrixField::Conformal { exponent: vector(c, base.nrows())?, base },
        None => MatrixField::Constant(base),
    })
}

impl MetricJson {
    pub fn to_spec(&self) -> Result<MetricSpec> {
        let (spec, pullback) = match self {
            MetricJson::Riemannian { a, conformal, pullback } => {
                (MetricSpec::Riemannian(riemannian_field(a, conformal)?), pullback)
            }
            MetricJson::Randers { alpha, beta, conformal, beta_linear, beta_exponential, pullback } => {
                let alpha = riemannian_field(alpha, conformal)?;
                let n = alpha.dim();
                let b = vector(beta, n)?;
                let beta = match (beta_linear, beta_exponential) {
                    (Some(_), Some(_)) => {
                        return Err(FinslerError::Parse("beta_linear and beta_exponential are exclusive".into()))
                    }
                    (Some(l), None) => {
                        let linear = matrix(l)?;
                        if linear.nrows() != n {
                            return Err(FinslerError::DimensionMismatch { expected: n, got: linear.nrows() });
                        }
                        VectorField::Affine { constant: b, linear }
                    }
                    (None, Some(c)) => VectorField::Exponential { base: b, exponent: vector(c, n)? },
                    (None, None) => VectorField::Constant(b),
                };
                (MetricSpec::Randers { alpha, beta }, pullback)
            }
            MetricJson::FiberProfile { fourier, terms, pullback } => {
                let profile = match (fourier, terms) {
                    (Some(f), None) => FiberProfile::fourier(f.clone()),
                    (None, Some(t)) => FiberProfile { terms: t.clone() },
                    _ => return Err(FinslerError::Parse("fiber_profile needs exactly one of fourier, terms".into())),
                };
                (MetricSpec::profile(profile), pullback)
            }
            MetricJson::Navigation { h, w, pullback } => {
                let h = matrix(h)?;
                let n = h.nrows();
                let nav = NavigationData::constant(h, vector(w, n)?);
                (navigation_metric(&nav, &Point::zeros(n))?, pullback)
            }
        };
        match pullback {
            None => Ok(spec),
            Some(m) => {
                let map = matrix(m)?;
                if map.nrows() != spec.dim() {
                    return Err(FinslerError::DimensionMismatch { expected: spec.dim(), got: map.nrows() });
                }
                Ok(MetricSpec::pullback(spec, map))
            }
        }
    }
}

pub fn parse_metric(text: &str) -> Result<MetricSpec> {
    let m: MetricJson = serde_json::from_str(text).map_err(|e| FinslerError::Parse(format!("metric: {e}")))?;
    m.to_spec()
}

/// Constant Christoffel symbols and the base point they refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionJson {
    pub n: usize,
    pub gamma: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<Vec<f64>>,
}

impl ConnectionJson {
    pub fn christoffel(&self) -> Result<Christoffel> {
        let c = Christoffel::from_nested(&self.gamma)?;
        if c.dim() != self.n {
            return Err(FinslerError::DimensionMismatch { expected: self.n, got: c.dim() });
        }
        Ok(c)
    }

    pub fn point(&self) -> Result<Point> {
        match &self.at {
            Some(p) => vector(p, self.n),
            None => Ok(Point::zeros(self.n)),
        }
    }

    pub fn from_christoffel(c: &Christoffel, at: Option<&Point>) -> Self {
        Self { n: c.dim(), gamma: c.to_nested(), at: at.map(|p| p.iter().copied().collect()) }
    }
}

pub fn parse_connection(text: &str) -> Result<ConnectionJson> {
    let c: ConnectionJson = serde_json::from_str(text).map_err(|e| FinslerError::Parse(format!("connection: {e}")))?;
    c.christoffel()?;
    c.point()?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipsoidJson {
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    pub v: Vec<f64>,
}

impl EllipsoidJson {
    pub fn to_ellipsoid(&self) -> Result<ShiftedEllipsoid> {
        let q = matrix(&self.q)?;
        let v = vector(&self.v, q.nrows())?;
        ShiftedEllipsoid::new(q, v)
    }

    pub fn from_ellipsoid(e: &ShiftedEllipsoid) -> Self {
        Self { q: matrix_rows(&e.q), v: e.v.iter().copied().collect() }
    }
}

pub fn parse_ellipsoid(text: &str) -> Result<ShiftedEllipsoid> {
    let e: EllipsoidJson = serde_json::from_str(text).map_err(|e| FinslerError::Parse(format!("ellipsoid: {e}")))?;
    e.to_ellipsoid()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NavigationJson {
    pub h: Vec<Vec<f64>>,
    #[serde(rename = "W")]
    pub w: Vec<f64>,
}

impl NavigationJson {
    pub fn to_navigation(&self) -> Result<NavigationData> {
        let h = matrix(&self.h)?;
        let w = vector(&self.w, h.nrows())?;
        Ok(NavigationData::constant(h, w))
    }
}

pub fn parse_navigation(text: &str) -> Result<NavigationData> {
    let n: NavigationJson = serde_json::from_str(text).map_err(|e| FinslerError::Parse(format!("navigation: {e}")))?;
    n.to_navigation()
}
