//! Moderate-deviation comparison of a finite-temperature minimizer with the
//! ground-state minimizer.

use serde::{Deserialize, Serialize};

use crate::quad::GaussLegendre;

use super::{FiniteBetaResult, SolveResult};

/// Window of `t` on which `beta mu[0, t]` is compared with `m(t)`.
pub const SUP_WINDOW: (f64, f64) = (0.05, 0.75);

/// Half-width excluded around atoms of `dm`.
const ATOM_GUARD: f64 = 0.02;

/// Test function `sum_k a_k t^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, a| acc * t + a)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial(self.0.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdReport {
    pub beta: f64,
    /// `beta [f(1) - int f dmu_beta]`.
    pub lhs: f64,
    /// `int f' dnu = f'(0) phi(0) + int f'' phi`.
    pub rhs: f64,
    pub sup_distance: f64,
    pub beta_one_minus_q_star: f64,
    pub atom_estimate: f64,
    /// `nu({1}) = phi(1)`.
    pub c: f64,
    pub beta_mass_at_zero: f64,
    /// `nu([0, 1)) = phi(0) - phi(1)`.
    pub density_mass: f64,
    /// `|beta (1 - q*) - c| <= 0.1 c`.
    pub atom_converged: bool,
    /// `|atom_estimate - c| <= 0.1 c`.
    pub atom_estimate_converged: bool,
}

/// `m(t) = -phi'(t+)` from a grid function.
fn m_of(gs: &SolveResult, t: f64) -> f64 {
    let phi = &gs.phi;
    let h = phi.step();
    let i = ((t / h).floor() as usize).min(phi.cells() - 1);
    (phi.values[i] - phi.values[i + 1]) / h
}

pub fn moderate_deviation_report(fb: &FiniteBetaResult, gs: &SolveResult, f: &Polynomial) -> MdReport {
    let mu = &fb.mu;
    let beta = mu.beta;
    let lhs = beta * (f.eval(1.0) - mu.expect(|t| f.eval(t)));

    let phi = &gs.phi;
    let df = f.derivative();
    let d2f = df.derivative();
    let gl = GaussLegendre::new(d2f.degree() / 2 + 2);
    let rhs = df.eval(0.0) * phi.values[0]
        + gl.integrate_composite(|t| d2f.eval(t) * phi.interpolate(t), 0.0, 1.0, phi.cells());

    let c = *phi.values.last().expect("non-empty");
    let density_mass = phi.values[0] - c;
    let total: f64 = gs.kinks.iter().map(|k| k.1).sum();
    let atoms: Vec<f64> = gs
        .kinks
        .iter()
        .filter(|k| k.1 > 1e-2 * total.max(1e-12))
        .map(|k| k.0)
        .collect();
    let sup_distance = mu
        .t
        .iter()
        .zip(&fb.rescaled_density)
        .filter(|(t, _)| (SUP_WINDOW.0..=SUP_WINDOW.1).contains(*t))
        .filter(|(t, _)| atoms.iter().all(|a| (*t - a).abs() > ATOM_GUARD))
        .map(|(&t, &d)| (d - m_of(gs, t)).abs())
        .fold(0.0, f64::max);
    MdReport {
        beta,
        lhs,
        rhs,
        sup_distance,
        beta_one_minus_q_star: fb.beta_one_minus_q_star,
        atom_estimate: fb.atom_estimate,
        c,
        beta_mass_at_zero: fb.beta_mass_at_zero,
        density_mass,
        atom_converged: (fb.beta_one_minus_q_star - c).abs() <= 0.1 * c,
        atom_estimate_converged: (fb.atom_estimate - c).abs() <= 0.1 * c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MixedModel;
    use crate::solver::{finite_beta_minimize, grid_minimize};

    #[test]
    fn polynomial_calculus() {
        let p = Polynomial(vec![1.0, -2.0, 0.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 24.0);
        assert_eq!(p.derivative(), Polynomial(vec![-2.0, 0.0, 9.0]));
        assert_eq!(Polynomial(vec![5.0]).derivative().eval(0.3), 0.0);
    }

    #[test]
    fn sk_total_mass() {
        let sk = MixedModel::sk();
        let gs = grid_minimize(&sk, 0.0, 500, 1e-12).unwrap();
        let fb = finite_beta_minimize(&sk, 128.0, 0.0, 4096).unwrap();
        let r = moderate_deviation_report(&fb, &gs, &Polynomial(vec![0.0, 1.0]));
        let c = 0.5f64.sqrt();
        assert!((r.rhs - c).abs() < 1e-6);
        assert!((r.lhs - c).abs() < 0.1 * c, "{}", r.lhs);
        let r = moderate_deviation_report(&fb, &gs, &Polynomial(vec![2.5]));
        assert!(r.lhs.abs() < 1e-9 && r.rhs.abs() < 1e-12);
    }
}
