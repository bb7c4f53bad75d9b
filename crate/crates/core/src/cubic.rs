//! Real roots of low-degree polynomials.

/// Real roots of `a t^2 + b t + c`, ascending. Degenerates to the linear case
/// when `a == 0`; returns nothing for the zero polynomial.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    let scale = (b * b).max((4.0 * a * c).abs()).max(f64::MIN_POSITIVE);
    if disc < -1e-14 * scale {
        return vec![];
    }
    if disc <= 1e-14 * scale {
        return vec![-b / (2.0 * a)];
    }
    // cancellation-free form
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let q = if q == 0.0 { -0.5 * disc.sqrt() } else { q };
    let mut r = vec![q / a, if q != 0.0 { c / q } else { -q / a }];
    r.sort_by(f64::total_cmp);
    r
}

/// Real roots of `a t^3 + b t^2 + c t + d`, ascending, with multiple roots
/// reported once. Falls back to [`quadratic_roots`] when `a == 0`.
pub fn cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    if a == 0.0 {
        return quadratic_roots(b, c, d);
    }
    let (b, c, d) = (b / a, c / a, d / a);
    // depressed cubic t = s - b/3: s^3 + p s + q
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let eps = 1e-12 * ((q / 2.0).powi(2) + (p / 3.0).abs().powi(3)) + f64::MIN_POSITIVE;
    let mut roots = if disc > eps {
        let sq = disc.sqrt();
        vec![(-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt()]
    } else if disc < -eps {
        let m = 2.0 * (-p / 3.0).sqrt();
        let phi = (3.0 * q / (p * m)).clamp(-1.0, 1.0).acos() / 3.0;
        (0..3).map(|k| m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos()).collect()
    } else {
        // double (or triple) root
        let u = (-q / 2.0).cbrt();
        vec![2.0 * u, -u]
    };
    for r in roots.iter_mut() {
        *r = polish(*r - shift, b, c, d);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * (1.0 + y.abs()));
    roots
}

fn polish(mut t: f64, b: f64, c: f64, d: f64) -> f64 {
    for _ in 0..4 {
        let f = ((t + b) * t + c) * t + d;
        let df = (3.0 * t + 2.0 * b) * t + c;
        if df == 0.0 || !f.is_finite() {
            break;
        }
        let step = f / df;
        if !step.is_finite() || step.abs() > 1e-3 * (1.0 + t.abs()) {
            break;
        }
        t -= step;
    }
    t
}
