//! Numerical laboratory for transverse conformal geometry on the weighted
//! Sasakian 3-spheres `S³_a` and on round spheres.
//!
//! The crate computes the conformal integral invariant
//! `I_{Z₂}(g) = ∫ Z₂(R^T_g) dμ_g`, checks that it does not depend on the
//! metric within the basic conformal class, and runs a normalized
//! transverse Yamabe flow whose failure to converge for `a1 ≠ a2` is
//! explained by `I_{Z₂} ≠ 0`.
//!
//! All quantities are functions of the single torus coordinate
//! `t = |z₁|² ∈ [0, 1]` (or the height `x ∈ [−1, 1]` on round spheres) and
//! are discretized by Chebyshev collocation.

pub mod calculus;
pub mod conformal;
pub mod error;
pub mod flow;
pub mod invariants;
pub mod report;
pub mod sasakian;
pub mod sphere;

pub use calculus::{
    basic_laplacian, integrate, make_grid, random_basic, z2_apply, BasicFunction, CollocationGrid,
    Interval, Polynomial, SasakianOperators,
};
pub use conformal::{conformal_scalar, TransverseGeometry, TransverseModel};
pub use error::{Error, Result};
pub use flow::{
    functional_j2, run_flow, yamabe_residual, FlowConfig, FlowRecord, FlowSummary, FlowTrace,
    Termination,
};
pub use invariants::{
    compute_invariant, invariance_sweep, lichnerowicz_residual, q3_vanishing_check,
    InvariantReport, InvariantSample, LichnerowiczResidual,
};
pub use sasakian::{
    conformal_factor_closed, invariant_closed, lambda_base, sigma, total_curvature_closed,
    transverse_scalar_closed, volume_closed, z2_scalar_closed, Weights,
};
pub use sphere::{
    bourguignon_ezin_integral, kazdan_warner_integral, sphere_laplacian, sphere_scalar,
    yamabe_quotient, RoundSphere, SphereGeometry, SphereReport,
};
