//! The decision procedure on one tangent plane: from connection data (or
//! directly from `K`) decide whether a strictly convex fiber-global solution
//! exists, and if so produce the witness Riemannian metric and the solution
//! family.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::connection::{difference_tensors, normalize_torsion_2d, Connection, TorsionNormalization};
use crate::cubic::cubic_roots;
use crate::error::{FinslerError, Result};
use crate::fiber2d::{integrate, k_from_difference, periodic_basis, FiberProfile, KCoefficients, Sym2};
use crate::metric::Point;
use crate::tolerances as tol;

/// Thresholds of the pipeline; defaults come from [`crate::tolerances`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyTolerances {
    pub torsion_zero: f64,
    pub root_condition: f64,
    pub integral_condition: f64,
    pub normal_form: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        Self {
            torsion_zero: tol::TORSION_ZERO,
            root_condition: tol::ROOT_CONDITION,
            integral_condition: tol::INTEGRAL_CONDITION,
            normal_form: tol::NORMAL_FORM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicAnalysis {
    pub real_roots: Vec<f64>,
    /// `|p'(t) - 1|` at each real root, scaled by `max(|K|, 1) (1 + t^2)`
    pub root_defects: Vec<f64>,
    /// the single real root in `p = K3 (t - A)((t - B)^2 + C)`
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    /// second root of `p' - 1 = 3 K3 (t - A)(t - D)`
    pub d: Option<f64>,
    pub k3_zero: bool,
    pub multiple_real_roots: bool,
}

impl CubicAnalysis {
    pub fn max_root_defect(&self) -> f64 {
        self.root_defects.iter().fold(0.0_f64, |a, d| a.max(*d))
    }
}

pub fn cubic_analysis(k: &KCoefficients) -> CubicAnalysis {
    let scale = k.max_abs().max(1.0);
    let k3_zero = k.k3.abs() <= 1e-14 * scale;
    let real_roots = if k3_zero {
        cubic_roots(0.0, k.k2, k.k1, k.k0)
    } else {
        cubic_roots(k.k3, k.k2, k.k1, k.k0)
    };
    let root_defects = real_roots.iter().map(|&t| (k.dp(t) - 1.0).abs() / (scale * (1.0 + t * t))).collect();
    let mut out = CubicAnalysis {
        multiple_real_roots: real_roots.len() > 1,
        real_roots,
        root_defects,
        a: None,
        b: None,
        c: None,
        d: None,
        k3_zero,
    };
    if !k3_zero && out.real_roots.len() == 1 {
        let a = out.real_roots[0];
        let (b2, b1) = (k.k2 / k.k3, k.k1 / k.k3);
        // p / K3 = (t - A)(t^2 + q1 t + q0)
        let q1 = b2 + a;
        let q0 = b1 + a * q1;
        let b = -0.5 * q1;
        out.a = Some(a);
        out.b = Some(b);
        out.c = Some(q0 - b * b);
        out.d = Some(-2.0 * k.k2 / (3.0 * k.k3) - a);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralCondition {
    /// closed-form principal value `3 (B - D) pi / sqrt(C)`
    pub value: f64,
    /// the same principal value by quadrature
    pub numeric: f64,
    pub holds: bool,
}

/// `PV int 3 (t - D) / ((t - B)^2 + C) dt` over the real line, which must vanish.
pub fn integral_condition(analysis: &CubicAnalysis) -> Option<IntegralCondition> {
    integral_condition_with(analysis, tol::INTEGRAL_CONDITION)
}

fn integral_condition_with(analysis: &CubicAnalysis, threshold: f64) -> Option<IntegralCondition> {
    let (b, c, d) = (analysis.b?, analysis.c?, analysis.d?);
    if !(c > 0.0) {
        return None;
    }
    Some(IntegralCondition {
        value: 3.0 * (b - d) * PI / c.sqrt(),
        numeric: principal_value_numeric(b, c, d),
        holds: (b - d).abs() <= threshold * (1.0 + b.abs()),
    })
}

/// Symmetric-limit principal value: pair `t` with `-t`, then substitute `t = tan(phi)`.
pub fn principal_value_numeric(b: f64, c: f64, d: f64) -> f64 {
    let h = |t: f64| 3.0 * (t - d) / ((t - b).powi(2) + c);
    let paired = |phi: f64| {
        let t = phi.tan();
        let sec2 = 1.0 + t * t;
        if t > 1e6 {
            // h(t) + h(-t) = 6 (2B - D) / t^2 + O(t^-3)
            let num = 6.0 * ((2.0 * b - d) * t * t - d * (b * b + c));
            num * sec2 / (((t - b).powi(2) + c) * ((t + b).powi(2) + c))
        } else {
            (h(t) + h(-t)) * sec2
        }
    };
    integrate(&paired, 0.0, PI / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub a: f64,
    pub c: f64,
    /// largest relative mismatch of the two equations not used to solve for `(A, C)`
    pub mismatch: f64,
}

/// `K3 = 1/C, K2 = -3A/C, K1 = 3A^2/C + 1, K0 = -A(A^2 + C)/C`.
pub fn normal_form_k(a: f64, c: f64) -> KCoefficients {
    KCoefficients::new(1.0 / c, -3.0 * a / c, 3.0 * a * a / c + 1.0, -a * (a * a + c) / c)
}

fn normal_form_fit(k: &KCoefficients) -> Option<NormalForm> {
    if !(k.k3 > 0.0) {
        return None;
    }
    let c = 1.0 / k.k3;
    let a = -k.k2 * c / 3.0 + 0.0;
    let want = normal_form_k(a, c);
    let scale = k.max_abs().max(1.0);
    let mismatch = (want.k1 - k.k1).abs().max((want.k0 - k.k0).abs()) / scale;
    Some(NormalForm { a, c, mismatch })
}

/// Solves for `(A, C)` from `K3` and `K2` and accepts if the other two
/// equations hold to the normal-form tolerance.
pub fn normal_form_check(k: &KCoefficients) -> Option<NormalForm> {
    normal_form_fit(k).filter(|nf| nf.mismatch <= tol::NORMAL_FORM)
}

/// `[[1, -A], [-A, A^2 + C]]`.
pub fn riemannian_witness(a: f64, c: f64) -> Result<Sym2> {
    if !(c > 0.0) {
        return Err(FinslerError::Precondition(format!("witness needs C > 0, got {c}")));
    }
    Ok(Sym2::new(1.0, -a, a * a + c))
}

/// The `K` for which the norm of `g` solves the central equation.
pub fn k_from_riemannian(g: &Sym2) -> Result<KCoefficients> {
    if !g.is_spd() {
        return Err(FinslerError::InvalidMetric(format!("{:?} is not positive definite", g.to_rows())));
    }
    let det = g.det();
    Ok(KCoefficients::new(
        g.g11 * g.g11 / det,
        3.0 * g.g11 * g.g12 / det,
        3.0 * g.g12 * g.g12 / det + 1.0,
        g.g12 * g.g22 / det,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Torsion,
    K3Zero,
    RootCondition,
    Factorization,
    IntegralCondition,
    NormalForm,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Torsion => "torsion",
            Stage::K3Zero => "k3 zero",
            Stage::RootCondition => "root condition",
            Stage::Factorization => "factorization",
            Stage::IntegralCondition => "integral condition",
            Stage::NormalForm => "normal form",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub stage: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    BerwaldCompatible,
    NormalForm { a: f64, c: f64, witness: Sym2, basis: Vec<FiberProfile> },
    NoConvexSolution { stage: Stage, reason: String },
}

/// A Randers norm `alpha + beta` expressed in the input fiber coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandersForm {
    pub alpha: [[f64; 2]; 2],
    pub beta: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    pub k: Option<KCoefficients>,
    pub analysis: Option<CubicAnalysis>,
    /// torsion vector before normalization
    pub torsion: Option<[f64; 2]>,
    /// fiber change `y' = L y` to normalized torsion
    pub normalization: Option<DMatrix<f64>>,
    /// `alpha = L^T W L` and `beta = (L y)_2` for the witness `W`: the solution
    /// `f_R + sin` of the normalized problem in the input coordinates
    pub randers: Option<RandersForm>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ClassificationResult {
    pub fn is_normal_form(&self) -> bool {
        matches!(self.verdict, Verdict::NormalForm { .. })
    }

    /// Report with sorted keys and no timestamps, so equal inputs give equal bytes.
    pub fn report_json(&self) -> Value {
        let (verdict, a, c, witness, basis, reason) = match &self.verdict {
            Verdict::BerwaldCompatible => ("berwald_compatible", None, None, None, vec![], None),
            Verdict::NormalForm { a, c, witness, basis } => {
                ("normal_form", Some(*a), Some(*c), Some(witness.to_rows()), basis.clone(), None)
            }
            Verdict::NoConvexSolution { stage, reason } => {
                ("no_convex_solution", None, None, None, vec![], Some(json!({"stage": stage, "detail": reason})))
            }
        };
        let basis_fourier: Vec<Value> = basis
            .iter()
            .map(|f| serde_json::to_value(f.to_fourier(tol::FOURIER_MODES, 1e-10)).unwrap_or(Value::Null))
            .collect();
        json!({
            "verdict": verdict,
            "A": a,
            "C": c,
            "witness": witness,
            "basis_fourier": basis_fourier,
            "reason": reason,
            "K": self.k.map(|k| k.as_array()),
            "torsion": self.torsion,
            "normalization": self.normalization.as_ref().map(|l| [[l[(0, 0)], l[(0, 1)]], [l[(1, 0)], l[(1, 1)]]]),
            "randers": self.randers,
            "diagnostics": self.diagnostics,
        })
    }
}

fn diag(stage: &str, value: f64, threshold: f64, note: Option<String>) -> Diagnostic {
    Diagnostic { stage: stage.into(), value, threshold, passed: value <= threshold, note }
}

/// Classification when the torsion is already normalized to `(1, 0)`.
pub fn classify_coefficients(k: &KCoefficients) -> ClassificationResult {
    classify_coefficients_with(k, &ClassifyTolerances::default())
}

pub fn classify_coefficients_with(k: &KCoefficients, tols: &ClassifyTolerances) -> ClassificationResult {
    let analysis = cubic_analysis(k);
    let mut diagnostics = Vec::new();
    let reject = |stage: Stage, reason: String, diagnostics: Vec<Diagnostic>, analysis: CubicAnalysis| {
        ClassificationResult {
            verdict: Verdict::NoConvexSolution { stage, reason },
            k: Some(*k),
            analysis: Some(analysis),
            torsion: None,
            normalization: None,
            randers: None,
            diagnostics,
        }
    };

    let root_defect = analysis.max_root_defect();
    diagnostics.push(diag(
        "root_condition",
        root_defect,
        tols.root_condition,
        Some(format!("real roots of p: {:?}", analysis.real_roots)),
    ));

    if analysis.k3_zero {
        // P(0) = K3 = 0: the ray theta = 0 is a zero of P as well, bounded only if P_t(0) = K2 = 0
        diagnostics.push(diag(
            "k3_zero_root_at_infinity",
            k.k2.abs() / k.max_abs().max(1.0),
            tols.root_condition,
            Some("K3 = 0: normal form requires K3 = 1/C > 0 and is unreachable".into()),
        ));
        return reject(Stage::K3Zero, "K3 = 0, so the normal form is unreachable".into(), diagnostics, analysis);
    }
    if root_defect > tols.root_condition {
        let worst = analysis
            .real_roots
            .iter()
            .zip(&analysis.root_defects)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(t, _)| *t)
            .unwrap_or(f64::NAN);
        return reject(
            Stage::RootCondition,
            format!("root t = {worst} of p is not a root of p' - 1 (defect {root_defect:.3e})"),
            diagnostics,
            analysis,
        );
    }
    if analysis.multiple_real_roots {
        diagnostics.push(diag(
            "multiple_real_roots",
            analysis.real_roots.len() as f64,
            1.0,
            Some("root condition passed with several real roots; deferring to the normal form".into()),
        ));
    }
    match (analysis.b, analysis.c, analysis.d) {
        (Some(b), Some(c), Some(_)) if c > 0.0 => {
            let ic = integral_condition_with(&analysis, tols.integral_condition).expect("B, C, D present");
            let bd = (b - analysis.d.unwrap_or(b)).abs() / (1.0 + b.abs());
            diagnostics.push(diag(
                "integral_condition",
                bd,
                tols.integral_condition,
                Some(format!("principal value {:.6e} (quadrature {:.6e})", ic.value, ic.numeric)),
            ));
            if !ic.holds {
                return reject(
                    Stage::IntegralCondition,
                    format!("B != D: ln g changes by {:.6e} over a half turn", ic.value),
                    diagnostics,
                    analysis,
                );
            }
            let inv_k3 = 1.0 / k.k3;
            diagnostics.push(diag(
                "factor_c_vs_inverse_k3",
                (c - inv_k3).abs() / (1.0 + inv_k3.abs()),
                tols.normal_form,
                None,
            ));
            if let Some(a) = analysis.a {
                diagnostics.push(diag("a_equals_b", (a - b).abs() / (1.0 + b.abs()), tols.normal_form, None));
            }
        }
        (_, Some(c), _) => {
            diagnostics.push(diag("factorization", -c, 0.0, Some("complex factor has C <= 0".into())));
            return reject(Stage::Factorization, format!("quadratic factor is not positive (C = {c})"), diagnostics, analysis);
        }
        _ => {}
    }

    let fit = normal_form_fit(k);
    diagnostics.push(diag(
        "normal_form",
        fit.map_or(f64::INFINITY, |f| f.mismatch),
        tols.normal_form,
        Some(if k.k3 > 0.0 { "K3 > 0".to_string() } else { "K3 <= 0 gives C <= 0".to_string() }),
    ));
    match fit.filter(|f| f.mismatch <= tols.normal_form) {
        Some(nf) => {
            let witness = riemannian_witness(nf.a, nf.c).expect("C = 1/K3 > 0");
            ClassificationResult {
                verdict: Verdict::NormalForm { a: nf.a, c: nf.c, witness, basis: periodic_basis(k) },
                k: Some(*k),
                analysis: Some(analysis),
                torsion: None,
                normalization: None,
                randers: None,
                diagnostics,
            }
        }
        None => reject(Stage::NormalForm, "K is not of normal form".into(), diagnostics, analysis),
    }
}

/// Full pipeline on the connections at one point of a 2D chart.
pub fn classify(gb: &Connection, d: &Connection, at: &Point) -> Result<ClassificationResult> {
    classify_with(gb, d, at, &ClassifyTolerances::default())
}

pub fn classify_with(gb: &Connection, d: &Connection, at: &Point, tols: &ClassifyTolerances) -> Result<ClassificationResult> {
    for n in [gb.dim(), d.dim(), at.len()] {
        if n != 2 {
            return Err(FinslerError::DimensionMismatch { expected: 2, got: n });
        }
    }
    let dd = difference_tensors(&gb.at(at), &d.at(at))?;
    let tau = dd.torsion_vector()?;
    let tnorm = tau.norm();
    let scale = dd.gamma.max_abs().max(1.0);
    let torsion_diag = diag(
        "torsion",
        tnorm / scale,
        tols.torsion_zero,
        Some("zero torsion means the connection can be taken symmetric".into()),
    );
    if tnorm <= tols.torsion_zero * scale {
        return Ok(ClassificationResult {
            verdict: Verdict::BerwaldCompatible,
            k: None,
            analysis: None,
            torsion: Some(tau.tau),
            normalization: None,
            randers: None,
            diagnostics: vec![Diagnostic { passed: true, ..torsion_diag }],
        });
    }
    let (l, ndd) = match normalize_torsion_2d(&dd)? {
        TorsionNormalization::Normalized { l, dd, .. } => (l, dd),
        TorsionNormalization::Berwald => unreachable!("nonzero torsion checked above"),
    };
    let k = k_from_difference(&ndd)?;
    let mut out = classify_coefficients_with(&k, tols);
    out.diagnostics.insert(
        0,
        Diagnostic {
            passed: false,
            note: Some("torsion rotated onto +e1; the choice of sign is a convention".into()),
            ..torsion_diag
        },
    );
    if let Verdict::NormalForm { witness, .. } = &out.verdict {
        let w = DMatrix::from_row_slice(2, 2, &[witness.g11, witness.g12, witness.g12, witness.g22]);
        let alpha = l.transpose() * w * &l;
        out.randers = Some(RandersForm {
            alpha: [[alpha[(0, 0)], alpha[(0, 1)]], [alpha[(1, 0)], alpha[(1, 1)]]],
            beta: [l[(1, 0)], l[(1, 1)]],
        });
    }
    out.torsion = Some(tau.tau);
    out.normalization = Some(l);
    Ok(out)
}
