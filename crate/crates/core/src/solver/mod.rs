//! Minimizers: the dense grid oracle, the structured ansatz driven by the
//! sign profile of `d`, and the finite-temperature functional.

mod ansatz;
mod cone;
mod finite_beta;
mod grid;
mod report;
mod sweep;

pub use ansatz::{ansatz_minimize, AnsatzFamily, Block, MULTI_STARTS};
pub use finite_beta::{finite_beta_minimize, finite_beta_minimize_from, FiniteBetaResult};
pub use grid::{grid_minimize, grid_minimize_with, RampObjective, MAX_ITER, MIN_GRID};
pub use report::{moderate_deviation_report, MdReport, Polynomial, SUP_WINDOW};
pub use sweep::{family, sweep_2p, sweep_pair, Boundary, SweepRow, SweepTable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    duality_gap, formal_conjugate, natural_bc_check, obstacle_check, primal_energy, BcReport,
    DualCertificate,
};
use crate::model::MixedModel;
use crate::order_param::{to_grid, GridFunction, OrderParamAnsatz, DEFAULT_GRID};
use crate::obstacle_tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Grid,
    Ansatz,
}

/// A minimizer together with its formal-conjugate certificate.
#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub method: Method,
    pub field: f64,
    #[serde(rename = "P")]
    pub p_value: f64,
    #[serde(rename = "D")]
    pub d_value: f64,
    #[serde(rename = "GSE")]
    pub gse: f64,
    pub gap: f64,
    pub obstacle_margin: f64,
    pub argmin: f64,
    pub certified: bool,
    #[serde(rename = "bc_residuals")]
    pub bc: BcReport,
    pub iterations: usize,
    pub ansatz: Option<OrderParamAnsatz>,
    /// Atoms of `dm` on the grid: `(knot, mass)`.
    pub kinks: Vec<(f64, f64)>,
    pub phi: GridFunction,
    #[serde(skip)]
    pub certificate: DualCertificate,
}

impl SolveResult {
    pub fn from_grid(
        model: &MixedModel,
        field: f64,
        phi: GridFunction,
        kinks: Vec<(f64, f64)>,
        iterations: usize,
        method: Method,
    ) -> Result<Self> {
        let r = duality_gap(&phi, model, field)?;
        let (margin, argmin) = obstacle_check(&r.cert, model, true);
        Ok(Self {
            method,
            field,
            p_value: r.p_value,
            d_value: r.d_value,
            gse: 0.5 * r.p_value,
            gap: r.gap,
            obstacle_margin: margin,
            argmin,
            certified: margin >= -obstacle_tolerance(model),
            bc: natural_bc_check(&r.cert),
            iterations,
            ansatz: None,
            kinks,
            phi,
            certificate: r.cert,
        })
    }

    pub fn from_ansatz(model: &MixedModel, field: f64, ansatz: OrderParamAnsatz, iterations: usize) -> Result<Self> {
        let p_value = primal_energy(&ansatz, model, field)?;
        let cert = formal_conjugate(&ansatz, model, field)?;
        let d_value = cert.dual_value();
        let (margin, argmin) = obstacle_check(&cert, model, true);
        let phi = to_grid(&ansatz, model, DEFAULT_GRID)?;
        Ok(Self {
            method: Method::Ansatz,
            field,
            p_value,
            d_value,
            gse: 0.5 * p_value,
            gap: p_value - d_value,
            obstacle_margin: margin,
            argmin,
            certified: margin >= -obstacle_tolerance(model),
            bc: natural_bc_check(&cert),
            iterations,
            kinks: ansatz.atoms.clone(),
            ansatz: Some(ansatz),
            phi,
            certificate: cert,
        })
    }
}

/// Method selection for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Auto,
    Grid,
    Ansatz,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub method: MethodChoice,
    pub cells: usize,
    pub tol: f64,
    pub seed: u64,
    /// Grid size of the cross-check run (`0` disables it).
    pub check_cells: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: MethodChoice::Auto,
            cells: DEFAULT_GRID,
            tol: 1e-12,
            seed: 0,
            check_cells: MIN_GRID,
        }
    }
}

/// Result of [`solve`], with the reduced-grid cross-check when it ran.
#[derive(Debug, Clone, Serialize)]
pub struct Solved {
    #[serde(flatten)]
    pub result: SolveResult,
    pub cross_check: Option<CrossCheck>,
    /// Why the structured ansatz was not used, if it was skipped or failed.
    pub fallback: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrossCheck {
    pub cells: usize,
    #[serde(rename = "GSE")]
    pub gse: f64,
    pub difference: f64,
}

/// Solve with automatic method selection: the ansatz at zero field, the
/// grid otherwise, when the reduction is inconclusive, or when only the grid
/// minimizer is certified.
pub fn solve(model: &MixedModel, field: f64, opts: SolveOptions) -> Result<Solved> {
    let structured = |fallback: &mut Option<String>| -> Result<Option<SolveResult>> {
        if field != 0.0 {
            *fallback = Some("structured ansatz requires zero field".into());
            return Ok(None);
        }
        let profile = model.sign_intervals(1e-4, 1e-12)?;
        match ansatz_minimize(model, &profile, field, opts.seed) {
            Ok(r) => Ok(Some(r)),
            Err(e @ Error::Inconclusive { .. }) => {
                *fallback = Some(e.to_string());
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };
    let mut fallback = None;
    let result = match opts.method {
        MethodChoice::Grid => grid_minimize(model, field, opts.cells, opts.tol)?,
        MethodChoice::Ansatz => {
            if field != 0.0 {
                return Err(Error::InvalidArgument("the ansatz method requires h = 0".into()));
            }
            let profile = model.sign_intervals(1e-4, 1e-12)?;
            ansatz_minimize(model, &profile, field, opts.seed)?
        }
        MethodChoice::Auto => match structured(&mut fallback)? {
            Some(r) if r.certified => r,
            Some(r) => {
                let g = grid_minimize(model, field, opts.cells, opts.tol)?;
                if g.certified {
                    fallback = Some(format!(
                        "ansatz certificate infeasible (obstacle margin {:e} at t = {})",
                        r.obstacle_margin, r.argmin
                    ));
                    g
                } else {
                    r
                }
            }
            None => grid_minimize(model, field, opts.cells, opts.tol)?,
        },
    };
    let cross_check = if opts.check_cells >= MIN_GRID && result.method == Method::Ansatz {
        let g = grid_minimize(model, field, opts.check_cells, opts.tol)?;
        Some(CrossCheck {
            cells: opts.check_cells,
            gse: g.gse,
            difference: result.gse - g.gse,
        })
    } else {
        None
    };
    Ok(Solved {
        result,
        cross_check,
        fallback,
    })
}
