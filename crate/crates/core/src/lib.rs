//! A priori bounds of Gronwall-Bellman type and the Riccati comparison
//! machinery behind them.
//!
//! * [`signal`]: uniform grids, signals, trapezoid running integrals.
//! * [`gronwall`]: classic bound, forced bound and two-sided envelope.
//! * [`riccati`]: Riccati and linear solvers, residuals, comparison checks.
//! * [`linsys`]: norm envelopes for `Y' = A(t) Y + g(t)`.
//! * [`oracle`]: reference trajectories and seeded random instances.

pub mod error;
pub mod gronwall;
pub mod linsys;
pub mod ode;
pub mod oracle;
pub mod riccati;
pub mod signal;

pub use error::{Error, Result};
pub use gronwall::{classic_bound, general_bound, two_sided_envelope, BoundProblem, Envelope};
pub use linsys::{
    integrate_system, norm_envelope, operator_norm, LinearSystem, NormEnvelopeReport,
};
pub use oracle::{equality_case, generate_instances, RandomInstanceSpec};
pub use riccati::{
    build_comparison, check_comparison_hypotheses, check_comparison_hypotheses_with,
    riccati_residual, solve_linear_cauchy, solve_riccati, verify_comparison, ComparisonSetup,
    HypothesisReport, RiccatiCoeffs, SquaredDifference, Trajectory,
};
pub use signal::{cumulative, weighted_tail_integral, CumulativeIntegral, Grid, Signal};
