use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use finsler_core::classify::{classify_coefficients_with, classify_with, ClassifyTolerances, Verdict};
use finsler_core::connection::{difference_tensors, normalize_torsion_2d, Christoffel, Connection, TorsionNormalization};
use finsler_core::curve::Curve;
use finsler_core::fiber2d::{
    eq10_residual, k_from_difference, periodic_basis, periodicity_defect, solve_from_quadrature, theta_grid,
    FiberProfile, KCoefficients,
};
use finsler_core::io::{self, ConnectionJson};
use finsler_core::metric::{convexity_scan, theta_directions, Point, Vector};
use finsler_core::navigation::{
    ellipsoid_equivalence, monochromatic_check_randers, randers_closed_check, randers_from_navigation,
    randers_gb_check, randers_invariant, sphere_directions, Region,
};
use finsler_core::ode::OdeOptions;
use finsler_core::spray::{douglas_residual, gb_residual, parallel_transport, pde5_residual, pde6_residual};
use finsler_core::{tolerances as tol, FinslerError, MetricSpec};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::{Common, Format};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<FinslerError> for CliError {
    fn from(e: FinslerError) -> Self {
        let code = match e {
            FinslerError::Parse(_)
            | FinslerError::DimensionMismatch { .. }
            | FinslerError::InvalidMetric(_)
            | FinslerError::Precondition(_)
            | FinslerError::TorsionInSymmetricConnection { .. }
            | FinslerError::ZeroVector { .. } => 2,
            FinslerError::NotStrictlyConvex { .. }
            | FinslerError::Singular(_)
            | FinslerError::Pole { .. }
            | FinslerError::StepUnderflow { .. }
            | FinslerError::Integration { .. } => 3,
        };
        CliError { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> CliError {
    CliError { code: 2, message: message.into() }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn parse_list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| input_error(format!("{what}: {s:?}: {e}"))))
        .collect()
}

/// Tolerance table with `--tol NAME=VALUE` overrides; unknown names are input errors.
struct Tolerances(BTreeMap<&'static str, f64>);

impl Tolerances {
    fn new(overrides: &[String]) -> CliResult<Self> {
        let mut t = BTreeMap::from([
            ("douglas", tol::PDE_RESIDUAL),
            ("gb", tol::PDE_RESIDUAL),
            ("pde5", tol::PDE_RESIDUAL),
            ("pde6", tol::PDE_RESIDUAL),
            ("convexity", 0.0),
            ("eq10", tol::EQ10_RESIDUAL),
            ("transport", tol::CONSTANT_LENGTH),
            ("ode", tol::ODE_ATOL),
            ("torsion_zero", tol::TORSION_ZERO),
            ("root_condition", tol::ROOT_CONDITION),
            ("integral_condition", tol::INTEGRAL_CONDITION),
            ("normal_form", tol::NORMAL_FORM),
            ("invariant", tol::INVARIANT_MATCH),
        ]);
        for o in overrides {
            let (name, value) = o.split_once('=').ok_or_else(|| input_error(format!("--tol expects NAME=VALUE, got {o:?}")))?;
            let value: f64 = value.trim().parse().map_err(|e| input_error(format!("--tol {name}: {e}")))?;
            if !(value >= 0.0) {
                return Err(input_error(format!("--tol {name}: must be non-negative")));
            }
            let slot = t
                .get_mut(name.trim())
                .ok_or_else(|| input_error(format!("unknown tolerance {name:?}")))?;
            *slot = value;
        }
        Ok(Self(t))
    }

    fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    fn classify(&self) -> ClassifyTolerances {
        ClassifyTolerances {
            torsion_zero: self.get("torsion_zero"),
            root_condition: self.get("root_condition"),
            integral_condition: self.get("integral_condition"),
            normal_form: self.get("normal_form"),
        }
    }
}

/// Writes `<name>.json` (and `<name>.csv`) under `--out`, or prints one of them.
fn emit(common: &Common, name: &str, report: &Value, csv: Option<&str>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(report).expect("reports are plain JSON") + "\n";
    match &common.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| input_error(format!("{}: {e}", dir.display())))?;
            let write = |file: String, body: &str| {
                let path = dir.join(file);
                fs::write(&path, body).map_err(|e| input_error(format!("{}: {e}", path.display())))
            };
            write(format!("{name}.json"), &text)?;
            if let Some(csv) = csv {
                write(format!("{name}.csv"), csv)?;
            }
        }
        None => match (common.format, csv) {
            (Format::Csv, Some(csv)) => print!("{csv}"),
            _ => print!("{text}"),
        },
    }
    Ok(())
}

fn load_connection(path: Option<&Path>) -> CliResult<Option<ConnectionJson>> {
    path.map(|p| Ok(io::parse_connection(&read(p)?)?)).transpose()
}

fn base_point(at: Option<&str>, conns: &[&Option<ConnectionJson>], n: usize) -> CliResult<Point> {
    if let Some(at) = at {
        let v = parse_list(at, "--at")?;
        if v.len() != n {
            return Err(FinslerError::DimensionMismatch { expected: n, got: v.len() }.into());
        }
        return Ok(Point::from_vec(v));
    }
    for c in conns.iter().copied().flatten() {
        if c.at.is_some() {
            return Ok(c.point()?);
        }
    }
    Ok(Point::zeros(n))
}

fn directions(n: usize, grid: usize) -> CliResult<Vec<Vector>> {
    if grid == 0 {
        return Err(input_error("--grid must be positive"));
    }
    Ok(if n == 2 { theta_directions(grid) } else { sphere_directions(n, grid) })
}

fn vec_json(v: &Vector) -> Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

fn mat_json(m: &DMatrix<f64>) -> Value {
    json!(io::matrix_rows(m))
}

pub fn check(
    metric: &Path,
    conn_gb: Option<&Path>,
    conn_d: Option<&Path>,
    at: Option<&str>,
    checks: &str,
    common: &Common,
) -> CliResult<bool> {
    let tols = Tolerances::new(&common.tol)?;
    let spec = io::parse_metric(&read(metric)?)?;
    let n = spec.dim();
    let gb = load_connection(conn_gb)?;
    let d = load_connection(conn_d)?;
    let x = base_point(at, &[&gb, &d], n)?;
    let gb_c = gb.as_ref().map(|c| c.christoffel()).transpose()?;
    let d_c = d.as_ref().map(|c| c.christoffel()).transpose()?;
    for c in gb_c.iter().chain(&d_c) {
        if c.dim() != n {
            return Err(FinslerError::DimensionMismatch { expected: n, got: c.dim() }.into());
        }
    }
    let names: Vec<&str> = checks.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(input_error("--checks is empty"));
    }
    let need = |c: &Option<Christoffel>, flag: &str, check: &str| {
        c.clone().ok_or_else(|| input_error(format!("check {check} needs {flag}")))
    };
    let dirs = directions(n, common.grid)?;
    let mut table: Vec<Vec<f64>> = vec![vec![]; dirs.len()];
    let mut results = serde_json::Map::new();
    let mut all_pass = true;
    for &name in &names {
        let mut worst = (f64::NEG_INFINITY, 0usize);
        let (values, pass_of): (Vec<f64>, Box<dyn Fn(f64) -> bool>) = match name {
            "douglas" => {
                let dc = need(&d_c, "--conn-d", name)?;
                let v = dirs
                    .iter()
                    .map(|y| douglas_residual(&spec, &dc, &x, y).map(|r| r.residual.norm()))
                    .collect::<Result<Vec<_>, _>>()?;
                let t = tols.get(name);
                (v, Box::new(move |m| m <= t))
            }
            "gb" => {
                let gc = need(&gb_c, "--conn-gb", name)?;
                let v = dirs
                    .iter()
                    .map(|y| gb_residual(&spec, &gc, &x, y).map(|r| r.norm()))
                    .collect::<Result<Vec<_>, _>>()?;
                let t = tols.get(name);
                (v, Box::new(move |m| m <= t))
            }
            "pde5" | "pde6" => {
                let dd = difference_tensors(&need(&gb_c, "--conn-gb", name)?, &need(&d_c, "--conn-d", name)?)?;
                let v = dirs
                    .iter()
                    .map(|y| {
                        if name == "pde5" {
                            pde5_residual(&spec, &dd, &x, y).map(|r| r.norm())
                        } else {
                            pde6_residual(&spec, &dd, &x, y).map(|r| r.amax())
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let t = tols.get(name);
                (v, Box::new(move |m| m <= t))
            }
            "convexity" => {
                // reported value: minus the smallest eigenvalue of g
                let v = dirs
                    .iter()
                    .map(|y| convexity_scan(&spec, &x, std::slice::from_ref(y)).map(|r| -r.worst_eigenvalue))
                    .collect::<Result<Vec<_>, _>>()?;
                let t = tols.get(name);
                (v, Box::new(move |m| m < -t))
            }
            other => return Err(input_error(format!("unknown check {other:?}"))),
        };
        for (i, v) in values.iter().enumerate() {
            if *v > worst.0 {
                worst = (*v, i);
            }
            table[i].push(*v);
        }
        let pass = pass_of(worst.0);
        all_pass &= pass;
        let (value_key, value) = if name == "convexity" {
            ("min_eigenvalue", -worst.0)
        } else {
            ("max_residual", worst.0)
        };
        results.insert(
            name.to_string(),
            json!({
                value_key: value,
                "tolerance": tols.get(name),
                "pass": pass,
                "worst_direction": vec_json(&dirs[worst.1]),
            }),
        );
    }
    let report = json!({
        "command": "check",
        "point": vec_json(&x),
        "grid": dirs.len(),
        "checks": results,
        "pass": all_pass,
    });
    let mut csv = (1..=n).map(|i| format!("y{i}")).collect::<Vec<_>>().join(",");
    for name in &names {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    for (y, row) in dirs.iter().zip(&table) {
        let cells: Vec<String> = y.iter().chain(row).map(|v| format!("{v:.17e}")).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    emit(common, "check", &report, Some(&csv))?;
    Ok(all_pass)
}

fn connection_pair(
    conn_gb: Option<&Path>,
    conn_d: Option<&Path>,
    at: Option<&str>,
) -> CliResult<(Connection, Connection, Point)> {
    let gb = load_connection(conn_gb)?.ok_or_else(|| input_error("--conn-gb is required (or pass --k)"))?;
    let d = load_connection(conn_d)?;
    let x = base_point(at, &[&Some(gb.clone()), &d], gb.n)?;
    let d = match d {
        Some(d) => d.christoffel()?,
        None => Christoffel::zeros(gb.n),
    };
    Ok((Connection::constant(gb.christoffel()?), Connection::constant(d), x))
}

fn parse_k(text: &str) -> CliResult<KCoefficients> {
    match parse_list(text, "--k")?.as_slice() {
        [a, b, c, d] => Ok(KCoefficients::new(*a, *b, *c, *d)),
        other => Err(input_error(format!("--k expects 4 values, got {}", other.len()))),
    }
}

fn basis_csv(basis: &[FiberProfile], grid: usize) -> String {
    let mut s = String::from("theta");
    for i in 1..=basis.len() {
        s.push_str(&format!(",f{i},f{i}_theta,g{i}"));
    }
    s.push('\n');
    for t in theta_grid(grid) {
        s.push_str(&format!("{t:.17e}"));
        for f in basis {
            let v = f.eval(t);
            s.push_str(&format!(",{:.17e},{:.17e},{:.17e}", v.f, v.f_t, v.curvature_sum()));
        }
        s.push('\n');
    }
    s
}

pub fn classify(
    conn_gb: Option<&Path>,
    conn_d: Option<&Path>,
    at: Option<&str>,
    k: Option<&str>,
    common: &Common,
) -> CliResult<bool> {
    let tols = Tolerances::new(&common.tol)?;
    let result = match k {
        Some(k) => classify_coefficients_with(&parse_k(k)?, &tols.classify()),
        None => {
            let (gb, d, x) = connection_pair(conn_gb, conn_d, at)?;
            classify_with(&gb, &d, &x, &tols.classify())?
        }
    };
    let mut report = result.report_json();
    report["command"] = json!("classify");
    let csv = match &result.verdict {
        Verdict::NormalForm { basis, .. } => Some(basis_csv(basis, common.grid)),
        _ => None,
    };
    emit(common, "classify", &report, csv.as_deref())?;
    Ok(true)
}

fn k_from_connections(conn_gb: Option<&Path>, conn_d: Option<&Path>, at: Option<&str>) -> CliResult<KCoefficients> {
    let (gb, d, x) = connection_pair(conn_gb, conn_d, at)?;
    if gb.dim() != 2 {
        return Err(FinslerError::DimensionMismatch { expected: 2, got: gb.dim() }.into());
    }
    let dd = difference_tensors(&gb.at(&x), &d.at(&x))?;
    match normalize_torsion_2d(&dd)? {
        TorsionNormalization::Berwald => Err(input_error("torsion vanishes: there is no central equation to solve")),
        TorsionNormalization::Normalized { dd, .. } => Ok(k_from_difference(&dd)?),
    }
}

pub fn solve_fiber(
    conn_gb: Option<&Path>,
    conn_d: Option<&Path>,
    at: Option<&str>,
    k: Option<&str>,
    common: &Common,
) -> CliResult<bool> {
    let tols = Tolerances::new(&common.tol)?;
    let k = match k {
        Some(k) => parse_k(k)?,
        None => k_from_connections(conn_gb, conn_d, at)?,
    };
    let basis = periodic_basis(&k);
    let grid = theta_grid(common.grid.max(1));
    let mut all_pass = true;
    let entries: Vec<Value> = basis
        .iter()
        .map(|f| {
            let res = eq10_residual(f, &k, common.grid.max(1));
            let pass = res <= tols.get("eq10");
            all_pass &= pass;
            let (min_f, min_g) = grid.iter().fold((f64::INFINITY, f64::INFINITY), |(a, b), &t| {
                let v = f.eval(t);
                (a.min(v.f), b.min(v.curvature_sum()))
            });
            json!({
                "profile": f,
                "eq10_residual": res,
                "pass": pass,
                "min_f": min_f,
                "min_curvature_sum": min_g,
            })
        })
        .collect();
    let quadrature = match (periodicity_defect(&k, 0.5), solve_from_quadrature(&k, tol::FOURIER_MODES)) {
        (Ok(defect), Ok(f)) => json!({
            "periodicity_defect": defect,
            "eq10_residual": eq10_residual(&f, &k, common.grid.max(1)),
        }),
        (Ok(defect), Err(e)) => json!({"periodicity_defect": defect, "error": e.to_string()}),
        (Err(e), _) => json!({"error": e.to_string()}),
    };
    let report = json!({
        "command": "solve-fiber",
        "K": k.as_array(),
        "basis": entries,
        "quadrature": quadrature,
        "pass": all_pass,
    });
    emit(common, "solve_fiber", &report, Some(&basis_csv(&basis, common.grid.max(1))))?;
    Ok(all_pass)
}

pub fn transport(conn: &Path, metric: &Path, curve: &Path, x0: &str, common: &Common) -> CliResult<bool> {
    let tols = Tolerances::new(&common.tol)?;
    let conn = io::parse_connection(&read(conn)?)?.christoffel()?;
    let spec = io::parse_metric(&read(metric)?)?;
    let curve: Curve = serde_json::from_str(&read(curve)?).map_err(|e| input_error(format!("curve: {e}")))?;
    curve.validate()?;
    let x0 = Vector::from_vec(parse_list(x0, "--x0")?);
    let opts = OdeOptions { atol: tols.get("ode"), rtol: tols.get("ode"), ..OdeOptions::default() };
    let gb = Connection::constant(conn.clone());
    let r = parallel_transport(&gb, &curve, &x0, &spec, common.grid.max(2), &opts)?;
    let max_gb = r
        .points
        .iter()
        .zip(&r.field)
        .map(|(c, x)| gb_residual(&spec, &conn, c, x).map(|g| g.norm()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0_f64, f64::max);
    let pass = r.max_abs_drift <= tols.get("transport") && r.diagnostic.is_none();
    let report = json!({
        "command": "transport",
        "samples": r.t.len(),
        "max_abs_drift": r.max_abs_drift,
        "final_drift": r.drift.last(),
        "final_field": r.field.last().map(vec_json),
        "max_gb_residual_along_field": max_gb,
        "tolerance": tols.get("transport"),
        "diagnostic": r.diagnostic,
        "pass": pass,
    });
    emit(common, "transport", &report, Some(&r.to_csv()))?;
    Ok(pass)
}

pub fn ellipsoid(e1: &Path, e2: &Path, common: &Common) -> CliResult<bool> {
    Tolerances::new(&common.tol)?;
    let a = io::parse_ellipsoid(&read(e1)?)?;
    let b = io::parse_ellipsoid(&read(e2)?)?;
    let map = ellipsoid_equivalence(&a, &b)?;
    let report = json!({
        "command": "ellipsoid",
        "invariants": [a.invariant(), b.invariant()],
        "equivalent": map.is_some(),
        "L": map.as_ref().map(|m| mat_json(&m.l)),
        "max_deviation": map.as_ref().map(|m| m.max_deviation),
        "pass": map.is_some(),
    });
    emit(common, "ellipsoid", &report, None)?;
    Ok(map.is_some())
}

pub fn randers(
    metric: Option<&Path>,
    navigation: Option<&Path>,
    region: &str,
    compare: Option<&str>,
    at: Option<&str>,
    checks: &str,
    common: &Common,
) -> CliResult<bool> {
    let tols = Tolerances::new(&common.tol)?;
    let wanted: Vec<&str> = checks.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if let Some(bad) = wanted.iter().find(|c| !matches!(**c, "closed" | "constant")) {
        return Err(input_error(format!("unknown randers check {bad:?}")));
    }
    let mut report = serde_json::Map::new();
    report.insert("command".into(), json!("randers"));
    let mut pass = true;
    match (metric, navigation) {
        (Some(m), None) => {
            let spec = io::parse_metric(&read(m)?)?;
            let MetricSpec::Randers { alpha, beta } = &spec else {
                return Err(input_error("--metric must be a randers metric"));
            };
            let n = alpha.dim();
            let reg = match parse_list(region, "--region")?.as_slice() {
                [w, s] if *w > 0.0 && *s >= 1.0 => Region { lo: vec![-w; n], hi: vec![*w; n], steps: *s as usize },
                _ => return Err(input_error("--region expects half_width,steps")),
            };
            let closed = randers_closed_check(beta, &reg);
            let constant = randers_gb_check(alpha, beta, &reg)?;
            report.insert("closed".into(), json!(closed));
            report.insert("constant_length".into(), json!(constant));
            report.insert("douglas".into(), json!(closed.closed));
            report.insert("generalized_berwald".into(), json!(constant.constant));
            pass &= !wanted.contains(&"closed") || closed.closed;
            pass &= !wanted.contains(&"constant") || constant.constant;
            let x1 = match at {
                Some(a) => Point::from_vec(parse_list(a, "--at")?),
                None => Point::zeros(n),
            };
            if let Some(c) = compare {
                let x2 = Point::from_vec(parse_list(c, "--compare")?);
                if x1.len() != n || x2.len() != n {
                    return Err(FinslerError::DimensionMismatch { expected: n, got: x2.len() }.into());
                }
                let r = monochromatic_check_randers(alpha, beta, &x1, &x2)?;
                report.insert(
                    "isometry".into(),
                    json!({
                        "isometric": r.isometric,
                        "invariants": r.invariants,
                        "L": r.l.as_ref().map(mat_json),
                        "isometry_defect": r.isometry_defect,
                    }),
                );
            }
        }
        (None, Some(nav)) => {
            let nav = io::parse_navigation(&read(nav)?)?;
            if !wanted.is_empty() {
                return Err(input_error("--checks applies to --metric only"));
            }
            let x = Point::zeros(nav.dim());
            let fit = randers_from_navigation(&nav, &x)?;
            let h_ww = nav.invariant(&x);
            let a_bb = randers_invariant(&fit.alpha, &fit.beta)?;
            let ok = (h_ww - a_bb).abs() <= tols.get("invariant") * (1.0 + h_ww.abs());
            pass &= ok;
            report.insert(
                "navigation".into(),
                json!({
                    "h_WW": h_ww,
                    "alpha": mat_json(&fit.alpha),
                    "beta": vec_json(&fit.beta),
                    "fit_residual": fit.residual,
                    "alpha_inv_beta_beta": a_bb,
                    "invariants_agree": ok,
                }),
            );
        }
        _ => return Err(input_error("pass exactly one of --metric, --navigation")),
    }
    report.insert("pass".into(), json!(pass));
    emit(common, "randers", &Value::Object(report), None)?;
    Ok(pass)
}
