//! Polar fiber profiles `F = r f(theta)` on a single tangent plane.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};

/// `f` and its first three theta-derivatives at one angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileValue {
    pub f: f64,
    pub f_t: f64,
    pub f_tt: f64,
    pub f_ttt: f64,
}

impl ProfileValue {
    /// `f + f_tt`, the scalar that controls convexity.
    pub fn curvature_sum(&self) -> f64 {
        self.f + self.f_tt
    }

    fn scaled(self, w: f64) -> Self {
        Self {
            f: w * self.f,
            f_t: w * self.f_t,
            f_tt: w * self.f_tt,
            f_ttt: w * self.f_ttt,
        }
    }

    fn add(self, o: Self) -> Self {
        Self {
            f: self.f + o.f,
            f_t: self.f_t + o.f_t,
            f_tt: self.f_tt + o.f_tt,
            f_ttt: self.f_ttt + o.f_ttt,
        }
    }
}

/// Truncated Fourier series `a0 + sum_k (cos[k-1] cos(k t) + sin[k-1] sin(k t))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    pub a0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn constant(c: f64) -> Self {
        Self { a0: c, cos: vec![], sin: vec![] }
    }

    pub fn sin_theta() -> Self {
        Self { a0: 0.0, cos: vec![0.0], sin: vec![1.0] }
    }

    pub fn order(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    fn coeff(v: &[f64], k: usize) -> f64 {
        v.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn cos_coeff(&self, k: usize) -> f64 {
        if k == 0 {
            self.a0
        } else {
            Self::coeff(&self.cos, k)
        }
    }

    pub fn sin_coeff(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            Self::coeff(&self.sin, k)
        }
    }

    pub fn eval(&self, theta: f64) -> ProfileValue {
        let (s1, c1) = theta.sin_cos();
        let (mut ck, mut sk) = (1.0_f64, 0.0_f64);
        let mut out = ProfileValue { f: self.a0, f_t: 0.0, f_tt: 0.0, f_ttt: 0.0 };
        for k in 1..=self.order() {
            // rotate (cos((k-1)t), sin((k-1)t)) by t
            let (cn, sn) = (ck * c1 - sk * s1, sk * c1 + ck * s1);
            ck = cn;
            sk = sn;
            let (a, b) = (Self::coeff(&self.cos, k), Self::coeff(&self.sin, k));
            let kf = k as f64;
            let k2 = kf * kf;
            out.f += a * ck + b * sk;
            out.f_t += kf * (-a * sk + b * ck);
            out.f_tt -= k2 * (a * ck + b * sk);
            out.f_ttt += k2 * kf * (a * sk - b * ck);
        }
        out
    }

    /// Least-squares projection of a 2pi-periodic function onto `modes` harmonics,
    /// computed from `max(8 * modes, 256)` equispaced samples by FFT.
    pub fn project<F: Fn(f64) -> f64>(f: F, modes: usize) -> Self {
        let m = (8 * modes).max(256).next_power_of_two();
        let mut buf: Vec<Complex<f64>> = (0..m)
            .map(|j| Complex::new(f(2.0 * PI * j as f64 / m as f64), 0.0))
            .collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        let scale = 2.0 / m as f64;
        Self {
            a0: buf[0].re / m as f64,
            cos: (1..=modes).map(|k| buf[k].re * scale).collect(),
            sin: (1..=modes).map(|k| -buf[k].im * scale).collect(),
        }
    }

    /// Even part `(f(t) + f(t + pi)) / 2`: drops odd harmonics.
    pub fn symmetrized(&self) -> Self {
        let keep = |v: &Vec<f64>| {
            v.iter()
                .enumerate()
                .map(|(i, &c)| if (i + 1) % 2 == 0 { c } else { 0.0 })
                .collect()
        };
        Self { a0: self.a0, cos: keep(&self.cos), sin: keep(&self.sin) }
    }

    /// Largest |coefficient| among the top quarter of modes; a cheap
    /// truncation-error indicator.
    pub fn tail_magnitude(&self) -> f64 {
        let n = self.order();
        let start = n - n / 4;
        (start.max(1)..=n)
            .map(|k| Self::coeff(&self.cos, k).abs().max(Self::coeff(&self.sin, k).abs()))
            .fold(0.0, f64::max)
    }

    /// Solves `f'' + f = self` mode by mode. The first harmonic is resonant:
    /// it must vanish in the right-hand side (within `tol`), and the
    /// corresponding homogeneous part of the solution is set to zero.
    pub fn solve_resonant(&self, tol: f64) -> Result<Self> {
        let (a1, b1) = (self.cos_coeff(1), self.sin_coeff(1));
        if a1.hypot(b1) > tol {
            return Err(FinslerError::Precondition(format!(
                "f'' + f = g is solvable only if g has no first harmonic (|g_1| = {:e})",
                a1.hypot(b1)
            )));
        }
        let n = self.order();
        let solve = |v: &Vec<f64>| {
            (1..=n)
                .map(|k| if k == 1 { 0.0 } else { Self::coeff(v, k) / (1.0 - (k * k) as f64) })
                .collect()
        };
        Ok(Self { a0: self.a0, cos: solve(&self.cos), sin: solve(&self.sin) })
    }
}

/// Entries of a symmetric positive definite 2x2 matrix `[[g11, g12], [g12, g22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl Sym2 {
    pub fn new(g11: f64, g12: f64, g22: f64) -> Self {
        Self { g11, g12, g22 }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    pub fn is_spd(&self) -> bool {
        self.g11 > 0.0 && self.det() > 0.0
    }

    pub fn to_rows(&self) -> [[f64; 2]; 2] {
        [[self.g11, self.g12], [self.g12, self.g22]]
    }

    /// `sqrt(g11 cos^2 + 2 g12 cos sin + g22 sin^2)` and derivatives.
    pub fn norm_profile(&self, theta: f64) -> ProfileValue {
        let a = 0.5 * (self.g11 + self.g22);
        let b = 0.5 * (self.g11 - self.g22);
        let d = self.g12;
        let (s2, c2) = (2.0 * theta).sin_cos();
        let q = a + b * c2 + d * s2;
        let q1 = 2.0 * (d * c2 - b * s2);
        let q2 = -4.0 * (b * c2 + d * s2);
        let q3 = 8.0 * (b * s2 - d * c2);
        let f = q.sqrt();
        let f_t = q1 / (2.0 * f);
        let f_tt = (0.5 * q2 - f_t * f_t) / f;
        let f_ttt = (0.5 * q3 - 3.0 * f_t * f_tt) / f;
        ProfileValue { f, f_t, f_tt, f_ttt }
    }
}

/// One summand of a [`FiberProfile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileTerm {
    Fourier(FourierSeries),
    /// `weight * sqrt(g(e_theta, e_theta))`, kept in closed form: its Fourier
    /// coefficients decay slowly for ill-conditioned `g`.
    RiemannianNorm { weight: f64, g: Sym2 },
}

impl ProfileTerm {
    fn eval(&self, theta: f64) -> ProfileValue {
        match self {
            ProfileTerm::Fourier(s) => s.eval(theta),
            ProfileTerm::RiemannianNorm { weight, g } => g.norm_profile(theta).scaled(*weight),
        }
    }
}

/// A 2pi-periodic profile, stored as a sum of terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberProfile {
    pub terms: Vec<ProfileTerm>,
}

impl FiberProfile {
    pub fn fourier(series: FourierSeries) -> Self {
        Self { terms: vec![ProfileTerm::Fourier(series)] }
    }

    pub fn constant(c: f64) -> Self {
        Self::fourier(FourierSeries::constant(c))
    }

    pub fn sin_theta() -> Self {
        Self::fourier(FourierSeries::sin_theta())
    }

    /// The Riemannian norm of `g` restricted to the unit circle.
    pub fn riemannian(g: Sym2) -> Self {
        Self { terms: vec![ProfileTerm::RiemannianNorm { weight: 1.0, g }] }
    }

    pub fn eval(&self, theta: f64) -> ProfileValue {
        self.terms
            .iter()
            .map(|t| t.eval(theta))
            .fold(ProfileValue { f: 0.0, f_t: 0.0, f_tt: 0.0, f_ttt: 0.0 }, ProfileValue::add)
    }

    pub fn scaled(&self, w: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                ProfileTerm::Fourier(s) => ProfileTerm::Fourier(FourierSeries {
                    a0: w * s.a0,
                    cos: s.cos.iter().map(|c| w * c).collect(),
                    sin: s.sin.iter().map(|c| w * c).collect(),
                }),
                ProfileTerm::RiemannianNorm { weight, g } => {
                    ProfileTerm::RiemannianNorm { weight: w * weight, g: *g }
                }
            })
            .collect();
        Self { terms }
    }

    /// `c1 * self + c2 * other`.
    pub fn combine(&self, c1: f64, other: &FiberProfile, c2: f64) -> Self {
        let mut terms = self.scaled(c1).terms;
        terms.extend(other.scaled(c2).terms);
        Self { terms }
    }

    pub fn symmetrized(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                ProfileTerm::Fourier(s) => ProfileTerm::Fourier(s.symmetrized()),
                other => other.clone(),
            })
            .collect();
        Self { terms }
    }

    /// Fourier projection of the whole profile. The number of modes is
    /// doubled from `min_modes` (up to 4096) until the tail drops below `tail_tol`.
    pub fn to_fourier(&self, min_modes: usize, tail_tol: f64) -> FourierSeries {
        let mut modes = min_modes.max(1);
        loop {
            let s = FourierSeries::project(|t| self.eval(t).f, modes);
            if s.tail_magnitude() <= tail_tol || modes >= 4096 {
                return s;
            }
            modes *= 2;
        }
    }
}

/// Profile as a function of the base point.
#[derive(Clone)]
pub enum ProfileField {
    Constant(FiberProfile),
    Function(ProfileFn),
}

type ProfileFn = Arc<dyn Fn(&nalgebra::DVector<f64>) -> FiberProfile + Send + Sync>;

impl ProfileField {
    pub fn at(&self, x: &nalgebra::DVector<f64>) -> FiberProfile {
        match self {
            ProfileField::Constant(p) => p.clone(),
            ProfileField::Function(f) => f(x),
        }
    }
}

impl std::fmt::Debug for ProfileField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProfileField::Constant(p) => f.debug_tuple("Constant").field(p).finish(),
            ProfileField::Function(_) => f.write_str("Function(..)"),
        }
    }
}
