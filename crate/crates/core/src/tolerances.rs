//! Default thresholds used across the crate.
//!
//! Every residual check compares against one of these constants unless a
//! caller overrides it (the CLI exposes `--tol NAME=VALUE`).

/// Chart-norm threshold below which a tangent vector counts as zero.
pub const ZERO_VECTOR: f64 = 1e-8;

/// Relative base step for first-order y finite differences.
pub const FD_Y_STEP: f64 = 1e-4;

/// Relative steps for second and third order y finite differences.
pub const FD_Y_STEP_SECOND: f64 = 1e-3;
pub const FD_Y_STEP_THIRD: f64 = 1e-2;

/// Absolute chart step for x-derivatives.
pub const FD_X_STEP: f64 = 1e-5;

/// Leading-minor positivity threshold for the SPD test.
pub const SPD: f64 = 1e-10;

/// Number of random (lambda, y) pairs used to vet a black-box metric.
pub const HOMOGENEITY_SAMPLES: usize = 32;

/// Relative homogeneity defect accepted for a black-box metric.
pub const HOMOGENEITY: f64 = 1e-9;

/// Torsion vectors with norm at or below this are treated as zero.
pub const TORSION_ZERO: f64 = 1e-12;

/// Root matching |p'(t) - 1| after scale normalization.
pub const ROOT_CONDITION: f64 = 1e-9;

/// Relative coefficient mismatch accepted by the normal-form check.
pub const NORMAL_FORM: f64 = 1e-8;

/// |B - D| <= INTEGRAL_CONDITION * (1 + |B|).
pub const INTEGRAL_CONDITION: f64 = 1e-9;

/// Residual of the central fiber equation.
pub const EQ10_RESIDUAL: f64 = 1e-9;

/// Residual of the first-order PDE system on assembled metrics.
pub const PDE_RESIDUAL: f64 = 1e-8;

/// Guard band around removable zeros of P.
pub const POLE_GUARD: f64 = 1e-6;

/// Default number of directions in a theta grid.
pub const THETA_GRID: usize = 512;

/// Default Fourier truncation order.
pub const FOURIER_MODES: usize = 64;

/// Integrator tolerances (absolute and relative).
pub const ODE_ATOL: f64 = 1e-9;
pub const ODE_RTOL: f64 = 1e-9;

/// Curl threshold for closedness of a one-form.
pub const CLOSED_FORM: f64 = 1e-6;

/// Relative spread threshold for constancy of the Randers invariant.
pub const CONSTANT_LENGTH: f64 = 1e-8;

/// Relative threshold for comparing ellipsoid invariants.
pub const INVARIANT_MATCH: f64 = 1e-9;

/// Boundary deviation accepted when verifying a linear map between ellipsoids.
pub const BOUNDARY_DEVIATION: f64 = 1e-8;
