//! Ground-state energies of spherical mixed p-spin glasses at zero temperature.
//!
//! The ground-state energy is half the minimum of the convex functional
//! `P(phi) = int xi'' phi + 1/phi + h^2 phi(0)` over non-negative,
//! non-increasing, concave `phi` on `[0, 1]`. Its concave dual is an obstacle
//! problem for a convex `eta >= xi`; a candidate `phi` is certified by
//! building the formal conjugate `eta` (with `eta'' = 1/phi^2`) and checking
//! the obstacle condition together with the duality gap.
//!
//! Modules:
//! - [`model`]: mixtures `xi`, their derivatives and the sign structure of `d`.
//! - [`order_param`]: order parameters as structured ansatz or dense grid.
//! - [`functionals`]: primal, dual and finite-temperature functionals and certificates.
//! - [`onersb`]: closed-form one-step RSB machinery at zero field.
//! - [`solver`]: grid, structured-ansatz and finite-temperature minimizers.

pub mod error;
pub mod functionals;
pub mod isotonic;
pub mod model;
pub mod onersb;
pub mod order_param;
pub mod quad;
pub mod roots;
pub mod solver;

pub use error::{Error, Result};
pub use functionals::{
    cs_energy, dual_energy, duality_gap, formal_conjugate, natural_bc_check, obstacle_check,
    primal_energy, BcReport, DualCertificate, FiniteBetaMeasure, GapReport, PhiRef,
};
pub use model::{
    dfrak, eval_model, sign_intervals, truncate_series, MixedModel, SeriesRule, Sign, SignInterval,
    SignProfile, Term,
};
pub use onersb::{
    a_of_y, classify, classify_2p, criteria, rs_check, solve_master, z_sign_changes, Class,
    Classification, CriteriaReport, OneRsbSolution, ZReport,
};
pub use order_param::{to_grid, to_measure, validate, GridFunction, MeasureA, OrderParamAnsatz};
pub use solver::{
    ansatz_minimize, finite_beta_minimize, grid_minimize, moderate_deviation_report, sweep_2p,
    FiniteBetaResult, SolveResult,
};

/// Positivity floor for order parameters.
pub const PHI_FLOOR: f64 = 1e-8;

/// Scale-relative obstacle tolerance: a certificate is feasible when its
/// margin is at least `-OBSTACLE_REL_TOL * (1 + xi(1))`.
pub const OBSTACLE_REL_TOL: f64 = 1e-9;

pub fn obstacle_tolerance(model: &MixedModel) -> f64 {
    OBSTACLE_REL_TOL * (1.0 + model.xi(1.0))
}
