//! Numerical tolerances shared by the library and its tests.

/// Relative asymmetry admitted by the symmetric eigensolver.
pub const SYMMETRY: f64 = 1e-12;
/// Off-diagonal Frobenius threshold (relative to the input norm) ending Jacobi sweeps.
pub const JACOBI_OFF_DIAGONAL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Row-scaled pivot below which a matrix counts as singular (condition ~1e12).
pub const SINGULAR_PIVOT: f64 = 1e-12;
/// Pivot threshold used for numerical rank.
pub const RANK: f64 = 1e-10;
/// Largest ambient dimension for which binomials and index sets are built.
pub const MAX_COMPOUND_DIM: usize = 30;

/// Default step of the fixed-step integrator.
pub const DEFAULT_DT: f64 = 1e-3;
/// Default CSV decimation.
pub const DEFAULT_STRIDE: usize = 10;
/// Fraction of the bounding-box diameter a state may overshoot before the run is aborted.
pub const ESCAPE_FRACTION: f64 = 0.1;
/// Slack for domain membership tests of sampled/boundary points.
pub const DOMAIN_SLACK: f64 = 1e-12;
/// Relative central-difference step for Jacobians and directional derivatives.
pub const FD_STEP: f64 = 1e-6;

/// Default certification margin on strict inequalities.
pub const MARGIN: f64 = 1e-6;
/// Minimum coefficient of determination for a decay fit to count.
pub const R2_MIN: f64 = 0.99;
/// Fraction of the horizon (taken from the end) used for decay fits by default.
pub const WINDOW_FRACTION: f64 = 0.5;
/// Values at or below this are excluded from log fits.
pub const DECAY_FLOOR: f64 = 1e-300;
/// Residual admitted for g(t, p(x), x) = f(t, x).
pub const FACTORIZATION: f64 = 1e-9;
/// Residual admitted for H^T Q = 0 and other frame/invariance identities.
pub const FRAME: f64 = 1e-9;
/// Residual admitted for orthonormality of constant subspace bases.
pub const ORTHONORMAL: f64 = 1e-10;
/// Residual admitted for the partial-to-horizontal bridging identity.
pub const BRIDGE_RESIDUAL: f64 = 1e-6;
/// Smallest admissible lower norm-equivalence constant.
pub const CONSTANT_MIN: f64 = 1e-9;
/// Absolute slack for pointwise exponential bounds along trajectories.
pub const POINTWISE_SLACK: f64 = 1e-6;
/// Growth rate of trajectory separation still regarded as bounded.
pub const GROWTH_RATE: f64 = 1e-3;
/// Separation ratio regarded as unbounded regardless of the late growth rate.
pub const SEPARATION_CAP: f64 = 1e6;
/// Slope tolerance for wedge-decay fits.
pub const WEDGE_FIT: f64 = 1e-2;
