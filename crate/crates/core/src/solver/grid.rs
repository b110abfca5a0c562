//! Dense-grid minimization of the discretized primal functional.

use crate::error::{Error, Result};
use crate::functionals::{grid_primal, inv_linear_grad, XiWeights};
use crate::model::MixedModel;
use crate::onersb::solve_master;
use crate::order_param::GridFunction;
use crate::PHI_FLOOR;

use super::cone::{Cone, End, Face};
use super::{Method, SolveResult};

/// Default iteration cap.
pub const MAX_ITER: usize = 200_000;

/// Smallest accepted grid.
pub const MIN_GRID: usize = 500;

/// The discretized primal in the ramp parametrization
/// `phi(t) = c + sum_j rho_j (1 - max(t_j, t))`, knots `t_j = j/G`, `j < G`.
#[derive(Debug, Clone)]
pub struct RampObjective {
    weights: XiWeights,
    field: f64,
    cells: usize,
}

impl RampObjective {
    pub fn new(model: &MixedModel, field: f64, cells: usize) -> Self {
        Self {
            weights: XiWeights::new(model, cells),
            field,
            cells,
        }
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn phi(&self, c: f64, rho: &[f64]) -> Vec<f64> {
        let g = self.cells;
        assert_eq!(rho.len(), g);
        let h = 1.0 / g as f64;
        // phi_i = c + (1 - t_i) sum_{j <= i} rho_j + sum_{j > i} rho_j (1 - t_j)
        let mut tail = vec![0.0; g + 2];
        for j in (0..g).rev() {
            tail[j] = tail[j + 1] + rho[j] * (1.0 - j as f64 * h);
        }
        let mut prefix = 0.0;
        (0..=g)
            .map(|i| {
                if i < g {
                    prefix += rho[i];
                }
                c + (1.0 - i as f64 * h) * prefix + tail[(i + 1).min(g)]
            })
            .collect()
    }

    pub fn value(&self, c: f64, rho: &[f64]) -> f64 {
        grid_primal(&self.weights, &self.phi(c, rho), self.field)
    }

    /// `(dP/dc, dP/drho)`.
    pub fn gradient(&self, c: f64, rho: &[f64]) -> (f64, Vec<f64>) {
        let phi = self.phi(c, rho);
        let g = self.cells;
        let h = 1.0 / g as f64;
        let mut gp = self.weights.weights.clone();
        gp[0] += self.field * self.field;
        for i in 0..g {
            let (ga, gb) = inv_linear_grad(phi[i], phi[i + 1]);
            gp[i] += h * ga;
            gp[i + 1] += h * gb;
        }
        let dc: f64 = gp.iter().sum();
        let mut suffix = vec![0.0; g + 2];
        for i in (0..=g).rev() {
            suffix[i] = suffix[i + 1] + gp[i] * (1.0 - i as f64 * h);
        }
        let mut prefix = 0.0;
        let drho = (0..g)
            .map(|j| {
                prefix += gp[j];
                (1.0 - j as f64 * h) * prefix + suffix[j + 1]
            })
            .collect();
        (dc, drho)
    }
}

/// Minimize the exact primal of piecewise-linear `phi` on `G` uniform cells
/// over the cone. `tol` bounds the relative objective error.
pub fn grid_minimize(model: &MixedModel, field: f64, cells: usize, tol: f64) -> Result<SolveResult> {
    grid_minimize_with(model, field, cells, tol, MAX_ITER)
}

pub fn grid_minimize_with(
    model: &MixedModel,
    field: f64,
    cells: usize,
    tol: f64,
    max_iter: usize,
) -> Result<SolveResult> {
    if cells < MIN_GRID {
        return Err(Error::InvalidArgument(format!("grid size {cells} below {MIN_GRID}")));
    }
    if !(field >= 0.0 && field.is_finite()) {
        return Err(Error::InvalidArgument(format!("field {field} must be >= 0")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let h = 1.0 / cells as f64;
    let mut w = XiWeights::new(model, cells).weights;
    w[0] += field * field;
    let (m0, c0) = if field == 0.0 {
        let s = solve_master(model)?;
        (s.m, s.c)
    } else {
        let c = 1.0 / (model.d1(1.0) + field * field).sqrt();
        (0.5 * c, c)
    };
    let start: Vec<f64> = (0..=cells).map(|i| c0 + m0 * (1.0 - i as f64 * h)).collect();
    let end = End::Free { floor: PHI_FLOOR };
    let cone = Cone {
        h,
        weights: &w,
        end,
        tol,
        max_iter,
    };
    let sol = cone.solve(Face::from_nodes(&start, h, end))?;
    let phi = GridFunction::from_values(sol.psi)?;
    let kinks = sol.kinks.iter().map(|&(j, r)| (j as f64 * h, r)).collect();
    SolveResult::from_grid(model, field, phi, kinks, sol.iterations, Method::Grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order_param::OrderParamAnsatz;
    use crate::quad;
    use rand::{Rng, SeedableRng};

    #[test]
    fn sk_optimum() {
        let r = grid_minimize(&MixedModel::sk(), 0.0, 1000, 1e-12).unwrap();
        let c = 0.5f64.sqrt();
        assert!(r.phi.values.iter().all(|v| (v - c).abs() < 1e-4));
        assert!((r.gse - 2f64.sqrt()).abs() < 1e-6);
        assert!(r.gap < 1e-8 && r.obstacle_margin >= -1e-9);
    }

    #[test]
    fn frsb_profile_is_contact_phi() {
        let m = MixedModel::two_plus_p(14.0 / 15.0, 4).unwrap();
        let r = grid_minimize(&m, 0.0, 1000, 1e-12).unwrap();
        for (t, v) in r.phi.t.iter().zip(&r.phi.values) {
            if (0.05..=0.95).contains(t) {
                assert!((v - m.contact_phi(*t)).abs() < 1e-3);
            }
        }
        let oracle = quad::integrate(|t| m.d2(t).sqrt(), 0.0, 1.0, 1e-15).0;
        assert!((r.gse - oracle).abs() < 1e-5, "{} vs {}", r.gse, oracle);
    }

    #[test]
    fn pure_four_is_one_step() {
        let m = MixedModel::pure(4).unwrap();
        let r = grid_minimize(&m, 0.0, 1000, 1e-12).unwrap();
        let total: f64 = r.kinks.iter().map(|k| k.1).sum();
        let away: f64 = r.kinks.iter().filter(|k| k.0 > 0.0).map(|k| k.1).sum();
        assert!(away < 1e-3 * total);
        let s = solve_master(&m).unwrap();
        let p = crate::functionals::primal_energy(&OrderParamAnsatz::one_rsb(s.m, s.c), &m, 0.0).unwrap();
        assert!((r.p_value - p).abs() < 1e-9);
    }

    #[test]
    fn field_shifts_energy_up() {
        let m = MixedModel::two_plus_p(0.5, 3).unwrap();
        let r0 = grid_minimize(&m, 0.0, 500, 1e-12).unwrap();
        let r1 = grid_minimize(&m, 0.5, 500, 1e-12).unwrap();
        assert!(r1.gse > r0.gse);
        assert!(r1.gap.abs() < 1e-8 && r1.obstacle_margin > -1e-7, "{} {} {:?}", r1.gap, r1.obstacle_margin, r1.bc);
    }

    #[test]
    fn gradient_matches_differences() {
        let m = MixedModel::two_plus_p(0.6, 4).unwrap();
        let obj = RampObjective::new(&m, 0.3, 500);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let c = rng.gen_range(0.2..1.0);
            let rho: Vec<f64> = (0..500).map(|_| if rng.gen_bool(0.05) { rng.gen_range(0.0..0.3) } else { 0.0 }).collect();
            let (dc, drho) = obj.gradient(c, &rho);
            let e = 1e-6;
            let fd = (obj.value(c + e, &rho) - obj.value(c - e, &rho)) / (2.0 * e);
            assert!((dc - fd).abs() <= 1e-6 * fd.abs().max(1e-3));
            for j in [0, 17, 250, 499] {
                let mut a = rho.clone();
                let mut b = rho.clone();
                a[j] += e;
                b[j] -= e;
                let fd = (obj.value(c, &a) - obj.value(c, &b)) / (2.0 * e);
                assert!((drho[j] - fd).abs() <= 1e-6 * fd.abs().max(1e-3), "{j}");
            }
        }
    }

    #[test]
    fn degenerate_kink_drop() {
        let m = MixedModel::new(vec![
            crate::model::Term { p: 2, beta_sq: 0.6310779310593532 },
            crate::model::Term { p: 8, beta_sq: 0.1212763956346953 },
        ])
        .unwrap();
        let r = grid_minimize_with(&m, 0.0, 500, 1e-12, 1000).unwrap();
        assert!(r.gap.abs() < 1e-8 && r.obstacle_margin > -1e-9, "{} {}", r.gap, r.obstacle_margin);
    }

    #[test]
    fn rejects_small_grids() {
        assert!(matches!(grid_minimize(&MixedModel::sk(), 0.0, 100, 1e-12), Err(Error::InvalidArgument(_))));
    }
}
