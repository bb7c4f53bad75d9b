//! One tangent plane of a 2D metric in polar form: the K/P data, the central
//! equation `(f + f_tt) P = -sin(t) f_t + cos(t) f`, the log-derivative of
//! `g = f + f_tt`, and periodic solutions.

pub mod profile;

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use profile::{FiberProfile, FourierSeries, ProfileField, ProfileTerm, ProfileValue, Sym2};

use crate::connection::DifferenceData;
use crate::cubic::cubic_roots;
use crate::error::{FinslerError, Result};
use crate::tolerances as tol;

/// Coefficients of `p(t) = K3 t^3 + K2 t^2 + K1 t + K0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KCoefficients {
    pub k3: f64,
    pub k2: f64,
    pub k1: f64,
    pub k0: f64,
}

impl KCoefficients {
    pub fn new(k3: f64, k2: f64, k1: f64, k0: f64) -> Self {
        Self { k3, k2, k1, k0 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.k3, self.k2, self.k1, self.k0]
    }

    pub fn max_abs(&self) -> f64 {
        self.as_array().iter().fold(0.0_f64, |a, k| a.max(k.abs()))
    }

    pub fn p(&self, t: f64) -> f64 {
        ((self.k3 * t + self.k2) * t + self.k1) * t + self.k0
    }

    pub fn dp(&self, t: f64) -> f64 {
        (3.0 * self.k3 * t + 2.0 * self.k2) * t + self.k1
    }

    /// `P(t) = K3 c^3 + K2 c^2 s + K1 c s^2 + K0 s^3`.
    pub fn trig(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.k3 * c * c * c + self.k2 * c * c * s + self.k1 * c * s * s + self.k0 * s * s * s
    }

    pub fn trig_theta(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        -3.0 * self.k3 * c * c * s + self.k2 * (c * c * c - 2.0 * c * s * s)
            + self.k1 * (2.0 * c * c * s - s * s * s)
            + 3.0 * self.k0 * s * s * c
    }
}

/// `F_{y^i y^j}` of `F = r f(theta)`: `((f + f_tt) / r) u u^T`, `u = (-sin, cos)`.
pub fn polar_hessian(f: &FiberProfile, theta: f64, r: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    let h = f.eval(theta).curvature_sum() / r;
    DMatrix::from_row_slice(2, 2, &[h * s * s, -h * s * c, -h * s * c, h * c * c])
}

/// `K3 = -G^2_11, K2 = G^1_11 - 2 G^2_12, K1 = 2 G^1_12 - G^2_22, K0 = G^1_22`,
/// valid once the torsion vector is `(1, 0)`.
pub fn k_from_difference(dd: &DifferenceData) -> Result<KCoefficients> {
    let tau = dd.torsion_vector()?.tau;
    if (tau[0] - 1.0).abs() > tol::TORSION_ZERO || tau[1].abs() > tol::TORSION_ZERO {
        return Err(FinslerError::Precondition(format!(
            "torsion vector must be normalized to (1, 0), got ({}, {})",
            tau[0], tau[1]
        )));
    }
    let g = |i: usize, j: usize, k: usize| dd.gamma.get(i - 1, j - 1, k - 1);
    Ok(KCoefficients {
        k3: -g(2, 1, 1),
        k2: g(1, 1, 1) - 2.0 * g(2, 1, 2),
        k1: 2.0 * g(1, 1, 2) - g(2, 2, 2),
        k0: g(1, 2, 2),
    })
}

/// `n` equispaced angles on `[0, 2 pi)`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Pointwise residual of the central equation.
pub fn eq10_at(f: &FiberProfile, k: &KCoefficients, theta: f64) -> f64 {
    let v = f.eval(theta);
    let (s, c) = theta.sin_cos();
    v.curvature_sum() * k.trig(theta) - (-s * v.f_t + c * v.f)
}

/// Maximum of `|eq10_at|` over a uniform grid of `n` angles.
pub fn eq10_residual(f: &FiberProfile, k: &KCoefficients, n: usize) -> f64 {
    theta_grid(n).into_iter().fold(0.0_f64, |a, t| a.max(eq10_at(f, k, t).abs()))
}

/// `-(ln g)_t = (P_t + sin t) / P`.
pub fn lng_derivative_trig(k: &KCoefficients, theta: f64) -> Result<f64> {
    let p = k.trig(theta);
    if p.abs() <= 1e-14 * k.max_abs().max(1.0) {
        return Err(FinslerError::Pole { theta });
    }
    Ok((k.trig_theta(theta) + theta.sin()) / p)
}

/// `-(ln g)_t` in the cotangent form
/// `(p'(ctg) - 1) ctg' / p(ctg) + 3 ctg`, which needs `sin t != 0`.
pub fn lng_derivative(k: &KCoefficients, theta: f64) -> Result<f64> {
    let (s, c) = theta.sin_cos();
    if s.abs() < tol::POLE_GUARD {
        return Err(FinslerError::Precondition(format!("cotangent form undefined at theta = {theta}")));
    }
    let t = c / s;
    let p = k.p(t);
    if p.abs() <= 1e-14 * k.max_abs().max(1.0) * (1.0 + t.abs()).powi(3) {
        return Err(FinslerError::Pole { theta });
    }
    let ctg_d = -1.0 / (s * s);
    Ok((k.dp(t) - 1.0) * ctg_d / p + 3.0 * t)
}

/// A zero of `P`, located in `[0, pi)`; zeros repeat with period `pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PZero {
    pub theta: f64,
    /// `P_t + sin` vanishes as well, so `(ln g)_t` stays bounded there
    pub removable: bool,
}

/// Zeros of `P` on `[0, pi)`: `theta = arccot(t)` for real roots `t` of `p`, and
/// `theta = 0` when `K3 = 0`.
pub fn p_zeros(k: &KCoefficients) -> Vec<PZero> {
    let scale = k.max_abs().max(1.0);
    let mut thetas: Vec<f64> = Vec::new();
    if k.k3.abs() <= 1e-14 * scale {
        thetas.push(0.0);
        thetas.extend(cubic_roots(0.0, k.k2, k.k1, k.k0).into_iter().map(|t| 1.0_f64.atan2(t)));
    } else {
        thetas.extend(cubic_roots(k.k3, k.k2, k.k1, k.k0).into_iter().map(|t| 1.0_f64.atan2(t)));
    }
    let mut out: Vec<PZero> = thetas
        .into_iter()
        .map(|theta| {
            let num = k.trig_theta(theta) + theta.sin();
            let removable = num.abs() <= tol::ROOT_CONDITION * scale && k.trig_theta(theta).abs() > tol::ROOT_CONDITION;
            PZero { theta, removable }
        })
        .collect();
    out.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    out
}

fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = 10;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        (x, w)
    })
}

fn gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gauss_legendre();
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(w).map(|(xi, wi)| wi * f(m + h * xi)).sum::<f64>() * h
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (l, r) = (gl(f, a, m), gl(f, m, b));
    if depth == 0 || (l + r - whole).abs() <= 1e-14 * (1.0 + (l + r).abs()) {
        return l + r;
    }
    adaptive(f, a, m, l, depth - 1) + adaptive(f, m, b, r, depth - 1)
}

/// Adaptive Gauss-Legendre quadrature of a smooth integrand.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    adaptive(f, a, b, gl(f, a, b), 30)
}

/// Samples `g(t) = g0 exp(int_{t0}^t (ln g)_t)` on `grid`.
///
/// Fails with [`FinslerError::Pole`] if a non-removable zero of `P` lies between
/// `t0` and some grid angle. Removable zeros are bridged by evaluating the
/// integrand just outside a small guard band.
pub fn g_quadrature(k: &KCoefficients, theta0: f64, g0: f64, grid: &[f64]) -> Result<Vec<f64>> {
    if !(g0 > 0.0) {
        return Err(FinslerError::Precondition(format!("g0 must be positive, got {g0}")));
    }
    let zeros = p_zeros(k);
    let lo = grid.iter().copied().fold(theta0, f64::min);
    let hi = grid.iter().copied().fold(theta0, f64::max);
    let mut removable = Vec::new();
    for z in &zeros {
        let first = ((lo - z.theta) / PI).ceil() as i64;
        let last = ((hi - z.theta) / PI).floor() as i64;
        for m in first..=last {
            let at = z.theta + m as f64 * PI;
            if z.removable {
                removable.push(at);
            } else {
                return Err(FinslerError::Pole { theta: at });
            }
        }
    }
    let integrand = |t: f64| -> f64 {
        match removable.iter().find(|&&z| (t - z).abs() < tol::POLE_GUARD) {
            Some(&z) => {
                let eval = |u: f64| -(k.trig_theta(u) + u.sin()) / k.trig(u);
                0.5 * (eval(z - tol::POLE_GUARD) + eval(z + tol::POLE_GUARD))
            }
            None => -(k.trig_theta(t) + t.sin()) / k.trig(t),
        }
    };
    // integrate between sorted breakpoints so each piece is evaluated once
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let mut out = vec![0.0; grid.len()];
    let split = order.partition_point(|&i| grid[i] < theta0);
    let mut acc = 0.0;
    let mut prev = theta0;
    for &i in &order[split..] {
        acc += integrate(&integrand, prev, grid[i]);
        prev = grid[i];
        out[i] = g0 * acc.exp();
    }
    let (mut acc, mut prev) = (0.0, theta0);
    for &i in order[..split].iter().rev() {
        acc -= integrate(&integrand, grid[i], prev);
        prev = grid[i];
        out[i] = g0 * acc.exp();
    }
    Ok(out)
}

/// `ln g(t0 + pi) - ln g(t0)`; zero for every fiber-global solution.
pub fn periodicity_defect(k: &KCoefficients, theta0: f64) -> Result<f64> {
    let g = g_quadrature(k, theta0, 1.0, &[theta0 + PI])?;
    Ok(g[0].ln())
}

/// A basis of the periodic solutions of the central equation: `sin` always,
/// and the Riemannian norm of the witness when `K` is in normal form.
pub fn periodic_basis(k: &KCoefficients) -> Vec<FiberProfile> {
    let mut basis = Vec::new();
    if let Some(nf) = crate::classify::normal_form_check(k) {
        if let Ok(w) = crate::classify::riemannian_witness(nf.a, nf.c) {
            basis.push(FiberProfile::riemannian(w));
        }
    }
    basis.push(FiberProfile::sin_theta());
    basis
}

/// Reconstructs a solution from the quadrature of `g` alone: spectral solve of
/// `f'' + f = g`, then the `cos` coefficient is fixed by the equation itself
/// (adding `a cos` shifts the right-hand side by `a`; `sin` is free).
pub fn solve_from_quadrature(k: &KCoefficients, modes: usize) -> Result<FiberProfile> {
    let theta0 = PI / 2.0 + 0.1234;
    let m = (8 * modes).max(256).next_power_of_two();
    let grid = theta_grid(m);
    let g = g_quadrature(k, theta0, 1.0, &grid)?;
    let defect = periodicity_defect(k, theta0)?;
    if defect.abs() > tol::INTEGRAL_CONDITION.max(1e-8) {
        return Err(FinslerError::Precondition(format!("g is not pi-periodic: ln g defect {defect:.3e}")));
    }
    let series = FourierSeries::project(|t| g[((t / (2.0 * PI) * m as f64).round() as usize) % m], modes);
    let mut f = series.solve_resonant(1e-6 * series.a0.abs().max(1.0))?;
    let base = FiberProfile::fourier(f.clone());
    let shift = grid.iter().map(|&t| eq10_at(&base, k, t)).sum::<f64>() / m as f64;
    if f.cos.is_empty() {
        f.cos.push(0.0);
    }
    f.cos[0] += shift;
    Ok(FiberProfile::fourier(f))
}

/// CSV `theta,f,f_theta,g` on `n` uniform angles.
pub fn profile_csv(f: &FiberProfile, n: usize) -> String {
    let mut s = String::from("theta,f,f_theta,g\n");
    for t in theta_grid(n) {
        let v = f.eval(t);
        s.push_str(&format!("{t:.17e},{:.17e},{:.17e},{:.17e}\n", v.f, v.f_t, v.curvature_sum()));
    }
    s
}

/// Reads the `theta,f` columns of a profile CSV and projects onto `modes` harmonics.
pub fn profile_from_csv(text: &str, modes: usize) -> Result<FourierSeries> {
    let mut pts = Vec::new();
    for (ln, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| FinslerError::Parse(format!("line {}: {e}", ln + 1)))
        };
        if cols.len() < 2 {
            return Err(FinslerError::Parse(format!("line {}: expected theta,f", ln + 1)));
        }
        pts.push((parse(cols[0])?, parse(cols[1])?));
    }
    let n = pts.len();
    if n < 2 * modes + 1 {
        return Err(FinslerError::Parse(format!("{n} samples cannot resolve {modes} modes")));
    }
    for (i, (t, _)) in pts.iter().enumerate() {
        if (t - 2.0 * PI * i as f64 / n as f64).abs() > 1e-9 {
            return Err(FinslerError::Parse("profile CSV must sample a uniform grid on [0, 2pi)".into()));
        }
    }
    // trapezoid projection is exact for band-limited samples
    let mut s = FourierSeries { a0: 0.0, cos: vec![0.0; modes], sin: vec![0.0; modes] };
    for (t, v) in &pts {
        s.a0 += v / n as f64;
        for k in 1..=modes {
            let (sk, ck) = (k as f64 * t).sin_cos();
            s.cos[k - 1] += 2.0 * v * ck / n as f64;
            s.sin[k - 1] += 2.0 * v * sk / n as f64;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::Christoffel;
    use crate::metric::{y_derivatives, MetricSpec};
    use nalgebra::DVector;

    fn k(a: f64, b: f64, c: f64, d: f64) -> KCoefficients {
        KCoefficients::new(a, b, c, d)
    }

    #[test]
    fn trig_and_cubic_agree() {
        let kk = k(1.3, -0.4, 2.2, 0.7);
        for i in 1..200 {
            let t = PI * i as f64 / 200.0;
            let (s, c) = t.sin_cos();
            assert!((kk.trig(t) - kk.p(c / s) * s.powi(3)).abs() < 1e-10 * (1.0 + kk.trig(t).abs()));
            let h = 1e-6;
            let fd = (kk.trig(t + h) - kk.trig(t - h)) / (2.0 * h);
            assert!((kk.trig_theta(t) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn polar_hessian_examples() {
        let h = polar_hessian(&FiberProfile::constant(1.0), 0.0, 1.0);
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        for i in 0..16 {
            let h = polar_hessian(&FiberProfile::sin_theta(), i as f64 * 0.4, 1.0);
            assert!(h.norm() < 1e-15);
        }
        let f = FiberProfile::fourier(FourierSeries { a0: 1.0, cos: vec![0.0], sin: vec![0.5] });
        let h = polar_hessian(&f, PI / 2.0, 2.0);
        assert!((h - DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0])).norm() < 1e-15);
        // agrees with the metric jet
        let spec = MetricSpec::profile(f.clone());
        let (t, r) = (0.7_f64, 1.7);
        let y = DVector::from_vec(vec![r * t.cos(), r * t.sin()]);
        let j = y_derivatives(&spec, &DVector::zeros(2), &y, 2).unwrap();
        assert!((j.hess - polar_hessian(&f, t, r)).norm() < 1e-8);
    }

    #[test]
    fn k_examples() {
        let dd = DifferenceData::zeros(2).with_torsion_vector([1.0, 0.0]);
        assert_eq!(k_from_difference(&dd).unwrap(), k(0.0, 0.0, 0.0, 0.0));
        let g = Christoffel::zeros(2).with(1, 0, 0, -1.0).with(0, 0, 1, 0.5).with(0, 1, 0, 0.5);
        let dd = DifferenceData::new(g, Christoffel::zeros(2)).unwrap().with_torsion_vector([1.0, 0.0]);
        assert_eq!(k_from_difference(&dd).unwrap(), k(1.0, 0.0, 1.0, 0.0));
        let g = Christoffel::zeros(2)
            .with(1, 0, 0, -1.0)
            .with(0, 0, 1, 2.0)
            .with(0, 1, 0, 2.0)
            .with(0, 0, 0, 3.0)
            .with(0, 1, 1, -2.0);
        let dd = DifferenceData::new(g, Christoffel::zeros(2)).unwrap().with_torsion_vector([1.0, 0.0]);
        assert_eq!(k_from_difference(&dd).unwrap(), k(1.0, 3.0, 4.0, -2.0));
        assert!(matches!(
            k_from_difference(&DifferenceData::zeros(2).with_torsion_vector([2.0, 0.0])),
            Err(FinslerError::Precondition(_))
        ));
    }

    #[test]
    fn eq10_examples() {
        for kk in [k(1.0, 0.0, 1.0, 0.0), k(-3.0, 2.0, 0.5, 9.0)] {
            assert!(eq10_residual(&FiberProfile::sin_theta(), &kk, 512) < 1e-15);
        }
        let f = FiberProfile::fourier(FourierSeries { a0: 1.0, cos: vec![0.0], sin: vec![0.5] });
        assert!(eq10_residual(&f, &k(1.0, 0.0, 1.0, 0.0), 512) < 1e-15);
        assert!((eq10_residual(&FiberProfile::constant(1.0), &k(0.0, 0.0, 0.0, 0.0), 512) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lng_examples() {
        let kk = k(1.0, 0.0, 1.0, 0.0);
        for i in (1..50).filter(|&i| i != 25) {
            assert!(lng_derivative(&kk, i as f64 * PI / 50.0).unwrap().abs() < 1e-12);
        }
        assert!((lng_derivative(&k(1.0, -3.0, 4.0, -2.0), PI / 2.0).unwrap() - 1.5).abs() < 1e-12);
        for kk in [k(1.0, -3.0, 4.0, -2.0), k(0.3, 1.1, -0.7, 2.0), k(0.0, 1.0, 0.0, 1.0)] {
            for i in 1..200 {
                let t = PI * i as f64 / 200.0 + 1e-3;
                if let (Ok(a), Ok(b)) = (lng_derivative(&kk, t), lng_derivative_trig(&kk, t)) {
                    assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
                }
            }
        }
        // p(ctg) = 0 at pi/2 in both cases; the cotangent form reports it even when removable
        assert!(matches!(lng_derivative(&k(1.0, 0.0, 1.0, 0.0), PI / 2.0), Err(FinslerError::Pole { .. })));
        assert!(matches!(lng_derivative(&k(1.0, 0.0, 2.0, 0.0), PI / 2.0), Err(FinslerError::Pole { .. })));
    }

    #[test]
    fn quadrature_examples() {
        let grid = theta_grid(64);
        let g = g_quadrature(&k(1.0, 0.0, 1.0, 0.0), 1.0, 1.0, &grid).unwrap();
        assert!(g.iter().all(|v| (v - 1.0).abs() < 1e-12));

        // g of the witness norm sqrt(c^2 - 2cs + 2s^2)
        let w = FiberProfile::riemannian(Sym2::new(1.0, -1.0, 2.0));
        let kk = k(1.0, -3.0, 4.0, -2.0);
        let t0 = PI / 2.0;
        let g0 = w.eval(t0).curvature_sum();
        let g = g_quadrature(&kk, t0, g0, &grid).unwrap();
        for (t, v) in grid.iter().zip(&g) {
            assert!((v - w.eval(*t).curvature_sum()).abs() < 1e-7 * v, "theta {t}");
        }
        assert!(periodicity_defect(&kk, 0.3).unwrap().abs() < 1e-10);

        match periodicity_defect(&k(1.0, 0.0, 2.0, 0.0), 0.3) {
            Err(FinslerError::Pole { theta }) => assert!((theta - PI / 2.0).abs() < 1e-12),
            other => panic!("expected a pole, got {other:?}"),
        }
    }

    #[test]
    fn removable_zeros_are_bridged() {
        // p = t (t^2 + 1): P vanishes at pi/2, but P_t + sin does as well
        let z = p_zeros(&k(1.0, 0.0, 1.0, 0.0));
        assert_eq!(z.len(), 1);
        assert!(z[0].removable && (z[0].theta - PI / 2.0).abs() < 1e-15);
        let g = g_quadrature(&k(1.0, 0.0, 1.0, 0.0), 0.0, 2.0, &[PI / 2.0, PI / 2.0 + 1e-7, 3.0]).unwrap();
        assert!(g.iter().all(|v| (v - 2.0).abs() < 1e-12));
        // K3 = 0: theta = 0 is a zero of P, non-removable unless K2 = 1... here a pole
        let z = p_zeros(&k(0.0, 0.0, 1.0, 0.0));
        assert!(z.iter().any(|z| z.theta == 0.0 && !z.removable));
    }

    #[test]
    fn basis_examples() {
        let b = periodic_basis(&k(1.0, 0.0, 1.0, 0.0));
        assert_eq!(b.len(), 2);
        assert!((b[0].eval(0.3).f - 1.0).abs() < 1e-15);
        let b = periodic_basis(&k(1.0, -3.0, 4.0, -2.0));
        assert_eq!(b.len(), 2);
        let t = 0.9_f64;
        let (s, c) = t.sin_cos();
        assert!((b[0].eval(t).f - (c * c - 2.0 * c * s + 2.0 * s * s).sqrt()).abs() < 1e-15);
        for f in &b {
            assert!(eq10_residual(f, &k(1.0, -3.0, 4.0, -2.0), 512) < 1e-9);
        }
        assert_eq!(periodic_basis(&k(0.0, 0.0, 0.0, 1.0)), vec![FiberProfile::sin_theta()]);
    }

    #[test]
    fn quadrature_solution_matches_closed_form() {
        let kk = k(1.0, -3.0, 4.0, -2.0);
        let f = solve_from_quadrature(&kk, 64).unwrap();
        assert!(eq10_residual(&f, &kk, 512) < 1e-8, "{}", eq10_residual(&f, &kk, 512));
        assert!(solve_from_quadrature(&k(1.0, 0.0, 2.0, 0.0), 64).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let f = FourierSeries { a0: 1.0, cos: vec![0.1, 0.0, 0.02], sin: vec![0.0, -0.05, 0.0] };
        let csv = profile_csv(&FiberProfile::fourier(f.clone()), 64);
        assert!(csv.starts_with("theta,f,f_theta,g\n"));
        let back = profile_from_csv(&csv, 3).unwrap();
        assert!((back.a0 - 1.0).abs() < 1e-14);
        for k in 1..=3 {
            assert!((back.cos_coeff(k) - f.cos_coeff(k)).abs() < 1e-14);
            assert!((back.sin_coeff(k) - f.sin_coeff(k)).abs() < 1e-14);
        }
    }
}
