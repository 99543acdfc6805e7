//! Numerical verification lab for δ-invariant curvature inequalities on
//! Lagrangian submanifolds of complex space forms.
//!
//! The crate constructs Lagrangian immersions into C⁵, CP⁵(4) and CH⁵(−4)
//! (the latter two through horizontal lifts into S¹¹(1) ⊂ C⁶ and
//! H₁¹¹(−1) ⊂ C⁶₁), computes their second fundamental form and curvature
//! through exact truncated-Taylor jets, evaluates the Chen invariant
//! δ(2,2) by derivative-free optimization over orthogonal pairs of tangent
//! 2-planes, and checks the sharp inequality
//!
//! ```text
//! δ(2,2) ≤ 25/4 · H² + 8c
//! ```
//!
//! together with its equality case on every built-in family.
//!
//! Modules mirror the pipeline: [`ambient`] (space forms, Hermitian inner
//! products, Hopf projections), [`jet`]/[`poly`] (Taylor arithmetic),
//! [`immersion`] (charts with derivatives), [`curvature`] (second
//! fundamental form, Gauss equation, intrinsic cross-check), [`delta`]
//! (invariants, inequality coefficients, canonical frame fitting),
//! [`families`] (ODE systems, Legendre curves, complex extensors and the
//! classified ideal families), [`catalog`] (JSON chart specs) and
//! [`report`] (verification sweeps).

pub mod ambient;
pub mod catalog;
pub mod curvature;
pub mod delta;
pub mod families;
pub mod frames;
pub mod immersion;
pub mod jet;
pub mod poly;
pub mod report;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("flat space carries no constraint surface")]
    NoConstraintSurface,
    #[error("point is not on the model hypersurface (residual {residual:.3e})")]
    NotOnModel { residual: f64 },
    #[error("tangent vector is not horizontal (residual {residual:.3e})")]
    NotHorizontal { residual: f64 },
    #[error("point {value} outside chart domain on axis {axis}")]
    OutsideDomain { axis: usize, value: f64 },
    #[error("chart supports derivatives up to order {max}, requested {requested}")]
    UnsupportedOrder { requested: usize, max: usize },
    #[error("degenerate immersion: singular value ratio {ratio:.3e} below floor")]
    DegenerateImmersion { ratio: f64 },
    #[error("normal component outside span{{Je_i, L, JL}}: not Lagrangian/horizontal (residual {residual:.3e})")]
    NotLagrangian { residual: f64 },
    #[error("invalid tuple {parts:?} for dimension {n}: {reason}")]
    InvalidTuple {
        n: usize,
        parts: Vec<usize>,
        reason: String,
    },
    #[error("improved inequality requires sum of parts < n")]
    ImprovedRequiresStrict,
    #[error("basis is not orthonormal (residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },
    #[error("minimal point with h ≠ 0: mean-curvature-seeded pattern inapplicable")]
    MinimalPatternInapplicable,
    #[error("ratio ODE undefined for r = 2")]
    RatioTwoUndefined,
    #[error("trajectory left the admissible domain: {reason}")]
    DomainExit { reason: String },
    #[error("curve invariant drift {drift:.3e} exceeds tolerance (step too large)")]
    InvariantDrift { drift: f64 },
    #[error("plugin rejected: {failures}")]
    PluginRejected { failures: String },
    #[error("1-form is not closed (residual {residual:.3e}): input not Lagrangian")]
    NotClosed { residual: f64 },
    #[error("polynomial is not harmonic")]
    NotHarmonic,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("chart spec error: {0}")]
    ChartSpec(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Default numerical tolerances used across the pipeline.
///
/// Membership and residual checks on exact-jet charts sit near 1e−9;
/// finite-difference paths are an order or two looser. Every field can be
/// overridden from the CLI.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Tolerances {
    /// Constraint-surface membership |⟨z,z⟩ ∓ 1|.
    pub constraint: f64,
    /// Symplectic residual |⟨JX, Y⟩| on tangent pairs.
    pub lagrangian: f64,
    /// Horizontality residual |⟨X, JL⟩| for lifts.
    pub horizontality: f64,
    /// Total-symmetry deviation of the cubic form coefficients.
    pub cubic_symmetry: f64,
    /// Residual normal component outside span{Je_i, L, JL}.
    pub normal_residual: f64,
    /// Equality detection for ideal families.
    pub equality: f64,
    /// Slack floor for the inequality (numerical noise).
    pub inequality_slack: f64,
    /// Immersion condition: smallest/largest singular value of the Jacobian.
    pub immersion_floor: f64,
    /// First-integral drift over unit-length ODE spans.
    pub first_integral: f64,
    /// Absolute tolerance for adaptive quadratures.
    pub quadrature: f64,
    /// Intrinsic-vs-Gauss curvature agreement, analytic jets.
    pub intrinsic_exact: f64,
    /// Intrinsic-vs-Gauss curvature agreement, finite differences.
    pub intrinsic_fd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            constraint: 1e-9,
            lagrangian: 1e-9,
            horizontality: 1e-9,
            cubic_symmetry: 1e-8,
            normal_residual: 1e-7,
            equality: 1e-5,
            inequality_slack: 1e-7,
            immersion_floor: 1e-6,
            first_integral: 1e-8,
            quadrature: 1e-10,
            intrinsic_exact: 1e-8,
            intrinsic_fd: 1e-5,
        }
    }
}

/// Version string embedded in reports.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
