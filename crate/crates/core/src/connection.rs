//! Affine connections, their difference/torsion tensors, and the 2D torsion
//! normalization used by the classification.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::linalg;
use crate::metric::{Point, Vector};
use crate::tolerances as tol;

/// Christoffel symbols `Gamma^i_{jk}` at one point, stored row-major over `(i, j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n] }
    }

    pub fn from_fn<F: FnMut(usize, usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut c = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    c.data[(i * n + j) * n + k] = f(i, j, k);
                }
            }
        }
        c
    }

    /// From nested arrays `gamma[i][j][k]`.
    pub fn from_nested(gamma: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n = gamma.len();
        for (i, plane) in gamma.iter().enumerate() {
            if plane.len() != n || plane.iter().any(|row| row.len() != n) {
                return Err(FinslerError::Parse(format!("gamma[{i}] is not {n}x{n}")));
            }
        }
        let c = Self::from_fn(n, |i, j, k| gamma[i][j][k]);
        if c.data.iter().any(|v| !v.is_finite()) {
            return Err(FinslerError::Parse("non-finite Christoffel symbol".into()));
        }
        Ok(c)
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| (0..self.n).map(|k| self.get(i, j, k)).collect()).collect())
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.n;
        self.data[(i * n + j) * n + k] = v;
    }

    /// Builder-style setter.
    pub fn with(mut self, i: usize, j: usize, k: usize, v: f64) -> Self {
        self.set(i, j, k, v);
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn symmetric_part(&self) -> Self {
        Self::from_fn(self.n, |i, j, k| 0.5 * (self.get(i, j, k) + self.get(i, k, j)))
    }

    /// `T^i_{jk} = Gamma^i_{jk} - Gamma^i_{kj}`.
    pub fn torsion(&self) -> Self {
        Self::from_fn(self.n, |i, j, k| self.get(i, j, k) - self.get(i, k, j))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.n, |i, j, k| self.get(i, j, k) - other.get(i, j, k))
    }

    /// `Gamma^i_{jk} y^j y^k`.
    pub fn quadratic(&self, y: &Vector) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| {
            let mut s = 0.0;
            for j in 0..self.n {
                for k in 0..self.n {
                    s += self.get(i, j, k) * y[j] * y[k];
                }
            }
            s
        })
    }

    /// The matrix `A^i_k = Gamma^i_{jk} v^j` (contraction on the first lower index).
    pub fn along(&self, v: &Vector) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, k| (0..self.n).map(|j| self.get(i, j, k) * v[j]).sum())
    }

    /// `(1,2)`-tensor rule under the fiber change `y' = L y`.
    pub fn transformed(&self, l: &DMatrix<f64>, l_inv: &DMatrix<f64>) -> Self {
        let n = self.n;
        // contract lower indices first, then the upper one
        let mut low = Self::zeros(n);
        for a in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut s = 0.0;
                    for b in 0..n {
                        for c in 0..n {
                            s += self.get(a, b, c) * l_inv[(b, j)] * l_inv[(c, k)];
                        }
                    }
                    low.set(a, j, k, s);
                }
            }
        }
        Self::from_fn(n, |i, j, k| (0..n).map(|a| l[(i, a)] * low.get(a, j, k)).sum())
    }
}

type ChristoffelFn = Arc<dyn Fn(&Point) -> Christoffel + Send + Sync>;

/// An affine connection on the chart, possibly with torsion.
#[derive(Clone)]
pub enum Connection {
    Constant(Christoffel),
    Field { dim: usize, f: ChristoffelFn },
}

impl Connection {
    pub fn constant(c: Christoffel) -> Self {
        Connection::Constant(c)
    }

    pub fn flat(n: usize) -> Self {
        Connection::Constant(Christoffel::zeros(n))
    }

    pub fn field<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&Point) -> Christoffel + Send + Sync + 'static,
    {
        Connection::Field { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        match self {
            Connection::Constant(c) => c.dim(),
            Connection::Field { dim, .. } => *dim,
        }
    }

    pub fn at(&self, x: &Point) -> Christoffel {
        match self {
            Connection::Constant(c) => c.clone(),
            Connection::Field { f, .. } => f(x),
        }
    }
}

impl fmt::Debug for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Connection::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Connection::Field { dim, .. } => write!(f, "Field(dim = {dim})"),
        }
    }
}

/// Symmetrized difference `Gamma` and torsion `T` of a connection pair at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceData {
    pub gamma: Christoffel,
    pub torsion: Christoffel,
}

impl DifferenceData {
    pub fn zeros(n: usize) -> Self {
        Self { gamma: Christoffel::zeros(n), torsion: Christoffel::zeros(n) }
    }

    /// Builds from arbitrary arrays, enforcing the index symmetries.
    pub fn new(gamma: Christoffel, torsion: Christoffel) -> Result<Self> {
        if gamma.dim() != torsion.dim() {
            return Err(FinslerError::DimensionMismatch { expected: gamma.dim(), got: torsion.dim() });
        }
        Ok(Self { gamma: gamma.symmetric_part(), torsion: torsion.torsion().scaled(0.5) }.exact())
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    /// Copies the `j <= k` half over the other half, so the symmetries are bitwise exact.
    fn exact(mut self) -> Self {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                self.torsion.set(i, j, j, 0.0);
                for k in j + 1..n {
                    let g = self.gamma.get(i, j, k);
                    self.gamma.set(i, k, j, g);
                    let t = self.torsion.get(i, j, k);
                    self.torsion.set(i, k, j, -t);
                }
            }
        }
        self
    }

    /// `(T^1_{12}, T^2_{12})` in two dimensions.
    pub fn torsion_vector(&self) -> Result<TorsionVector2D> {
        if self.dim() != 2 {
            return Err(FinslerError::DimensionMismatch { expected: 2, got: self.dim() });
        }
        Ok(TorsionVector2D { tau: [self.torsion.get(0, 0, 1), self.torsion.get(1, 0, 1)] })
    }

    /// Replaces the torsion by `tau epsilon_{jk}` (2D).
    pub fn with_torsion_vector(mut self, tau: [f64; 2]) -> Self {
        let mut t = Christoffel::zeros(2);
        for (i, &ti) in tau.iter().enumerate() {
            t.set(i, 0, 1, ti);
            t.set(i, 1, 0, -ti);
        }
        self.torsion = t;
        self
    }
}

impl Christoffel {
    fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }
}

/// The 2D torsion, which is a single vector at each point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorsionVector2D {
    pub tau: [f64; 2],
}

impl TorsionVector2D {
    pub fn norm(&self) -> f64 {
        self.tau[0].hypot(self.tau[1])
    }
}

/// `Gamma = sym(gB) - D` and `T^i_{jk} = gB^i_{jk} - gB^i_{kj}` at one point.
/// `D` must be torsion free.
pub fn difference_tensors(gb: &Christoffel, d: &Christoffel) -> Result<DifferenceData> {
    if gb.dim() != d.dim() {
        return Err(FinslerError::DimensionMismatch { expected: gb.dim(), got: d.dim() });
    }
    let n = d.dim();
    let scale = d.max_abs().max(1.0);
    let mut offending = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                if (d.get(i, j, k) - d.get(i, k, j)).abs() > 1e-12 * scale {
                    offending.push((i, j, k));
                }
            }
        }
    }
    if !offending.is_empty() {
        return Err(FinslerError::TorsionInSymmetricConnection { components: offending });
    }
    Ok(DifferenceData { gamma: gb.symmetric_part().sub(&d.symmetric_part()), torsion: gb.torsion() }.exact())
}

/// `y`-contractions `Gamma^i_j`, `Gamma^i` and `T^i_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contractions {
    /// `Gamma^i_j = Gamma^i_{jk} y^k` (row `i`, column `j`)
    pub gamma_ij: DMatrix<f64>,
    /// `Gamma^i = Gamma^i_{jk} y^j y^k`
    pub gamma_i: DVector<f64>,
    /// `T^i_j = T^i_{jk} y^k`
    pub torsion_ij: DMatrix<f64>,
}

pub fn contract(dd: &DifferenceData, y: &Vector) -> Contractions {
    let n = dd.dim();
    let by_last = |c: &Christoffel| {
        DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| c.get(i, j, k) * y[k]).sum())
    };
    let gamma_ij = by_last(&dd.gamma);
    let gamma_i = &gamma_ij * y;
    Contractions { gamma_ij, gamma_i, torsion_ij: by_last(&dd.torsion) }
}

/// Applies the fiber change `y' = L y` to both tensors.
pub fn transform_linear(dd: &DifferenceData, l: &DMatrix<f64>) -> Result<DifferenceData> {
    if l.nrows() != dd.dim() || l.ncols() != dd.dim() {
        return Err(FinslerError::DimensionMismatch { expected: dd.dim(), got: l.nrows() });
    }
    let l_inv = linalg::inverse(l)?;
    Ok(DifferenceData {
        gamma: dd.gamma.transformed(l, &l_inv),
        torsion: dd.torsion.transformed(l, &l_inv),
    }
    .exact())
}

/// Result of [`normalize_torsion_2d`].
#[derive(Debug, Clone, PartialEq)]
pub enum TorsionNormalization {
    /// The torsion vanishes: the generalized Berwald connection can be taken symmetric.
    Berwald,
    Normalized {
        /// fiber change with `transform_linear(dd, l)` having torsion vector `(1, 0)`
        l: DMatrix<f64>,
        dd: DifferenceData,
        /// torsion vector before normalization
        tau: TorsionVector2D,
    },
}

/// Finds `L` with normalized torsion vector `(1, 0)`: rotate `tau` onto the
/// positive first axis, then scale the second coordinate by `|tau|`.
///
/// `L` is unique only up to the stabilizer `[[a, b], [0, 1]]` of `(1, 0)`;
/// the rotation branch used here always maps `tau` to `+e1`.
pub fn normalize_torsion_2d(dd: &DifferenceData) -> Result<TorsionNormalization> {
    let tau = dd.torsion_vector()?;
    let norm = tau.norm();
    if norm <= tol::TORSION_ZERO * dd.gamma.max_abs().max(1.0) {
        return Ok(TorsionNormalization::Berwald);
    }
    let rot = linalg::align_to_first_axis(&DVector::from_vec(tau.tau.to_vec()));
    let scale = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, norm]);
    let l = scale * rot;
    let out = transform_linear(dd, &l)?.with_torsion_vector([1.0, 0.0]);
    Ok(TorsionNormalization::Normalized { l, dd: out, tau })
}
