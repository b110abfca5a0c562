//! Finite-temperature Crisanti-Sommers minimization over discrete measures
//! supported on `{t_0, ..., t_{G-1}}`.
//!
//! With `psi_i = mu_hat(t_i)` the functional is the cone objective of
//! [`super::cone`]: `psi` is concave, non-increasing, `psi_{G-1} = h` and
//! every slope is `>= -1` (the cdf stays below one).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{cs_energy, FiniteBetaMeasure};
use crate::isotonic::project_cdf;
use crate::model::MixedModel;
use crate::onersb::solve_master;

use super::cone::{Cone, End, Face};
use super::MAX_ITER;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteBetaResult {
    pub mu: FiniteBetaMeasure,
    /// `P` at the minimizer.
    pub cs_value: f64,
    /// `P / beta`.
    pub free_energy: f64,
    /// `beta mu[0, t_i]`.
    pub rescaled_density: Vec<f64>,
    pub q_star: f64,
    pub beta_one_minus_q_star: f64,
    /// `inf { t : mu[0, t] >= 1/2 }`.
    pub q_beta: f64,
    /// `beta E[1 - Y | Y >= q_beta]`.
    pub atom_estimate: f64,
    pub beta_mass_at_zero: f64,
    pub iterations: usize,
}

/// Start from the zero-temperature one-step profile: `beta F = m` below
/// `1 - c/beta`, full mass above.
fn warm_start(model: &MixedModel, beta: f64, field: f64, cells: usize) -> Result<Vec<f64>> {
    let (m, c) = if field == 0.0 {
        let s = solve_master(model)?;
        (s.m, s.c)
    } else {
        let c = 1.0 / (model.d1(1.0) + field * field).sqrt();
        (0.5 * c, c)
    };
    let h = 1.0 / cells as f64;
    let cut = 1.0 - c / beta;
    Ok((0..=cells)
        .map(|i| {
            let t = i as f64 * h;
            if t < cut && i + 1 < cells {
                (m / beta).min(1.0)
            } else {
                1.0
            }
        })
        .collect())
}

pub fn finite_beta_minimize(model: &MixedModel, beta: f64, field: f64, cells: usize) -> Result<FiniteBetaResult> {
    check(beta, field, cells)?;
    let start = warm_start(model, beta, field, cells)?;
    finite_beta_minimize_from(model, beta, field, &start)
}

fn check(beta: f64, field: f64, cells: usize) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta = {beta} must be positive")));
    }
    if !(field >= 0.0 && field.is_finite()) {
        return Err(Error::InvalidArgument(format!("field {field} must be >= 0")));
    }
    if cells < 4 {
        return Err(Error::InvalidArgument("need at least four cells".into()));
    }
    Ok(())
}

/// Minimize from the cdf `start` (length `G + 1`; projected onto the
/// admissible set first).
pub fn finite_beta_minimize_from(model: &MixedModel, beta: f64, field: f64, start: &[f64]) -> Result<FiniteBetaResult> {
    let cells = start.len().saturating_sub(1);
    check(beta, field, cells)?;
    let g = cells;
    let h = 1.0 / g as f64;
    let mut cdf = start.to_vec();
    project_cdf(&mut cdf);
    cdf[g - 1] = 1.0;
    cdf[g] = 1.0;

    // nodes 0..=G-1; psi_{G-1} = h
    let n = g - 1;
    let dxi: Vec<f64> = (0..g).map(|i| model.xi((i + 1) as f64 * h) - model.xi(i as f64 * h)).collect();
    let b2 = beta * beta;
    let mut w = vec![0.0; n + 1];
    for i in 0..=n {
        let prev = if i > 0 { dxi[i - 1] } else { 0.0 };
        let cur = if i < n { dxi[i] } else { 0.0 };
        w[i] = b2 * (cur - prev) / h;
    }
    w[0] += field * field;
    let mut psi = vec![0.0; n + 1];
    psi[n] = h;
    for i in (0..n).rev() {
        psi[i] = psi[i + 1] + h * cdf[i];
    }
    let end = End::Fixed { value: h };
    let cone = Cone {
        h,
        weights: &w,
        end,
        tol: 1e-13,
        max_iter: MAX_ITER,
    };
    let sol = cone.solve(Face::from_nodes(&psi, h, end))?;
    let mut cdf: Vec<f64> = (0..n).map(|i| ((sol.psi[i] - sol.psi[i + 1]) / h).clamp(0.0, 1.0)).collect();
    for i in 1..n {
        cdf[i] = cdf[i].max(cdf[i - 1]);
    }
    cdf.extend([1.0, 1.0]);
    let mu = FiniteBetaMeasure::new(cdf, beta, field)?;
    let cs_value = cs_energy(&mu, model)?;
    let q_star = mu.q_star();
    let q_idx = mu.cdf.iter().position(|&f| f >= 0.5).expect("cdf ends at 1");
    let q_beta = mu.t[q_idx];
    let masses = mu.masses();
    let (num, den) = masses
        .iter()
        .zip(&mu.t)
        .skip(q_idx)
        .fold((0.0, 0.0), |(a, b), (m, t)| (a + m * (1.0 - t), b + m));
    Ok(FiniteBetaResult {
        cs_value,
        free_energy: cs_value / beta,
        rescaled_density: mu.cdf.iter().map(|f| beta * f).collect(),
        q_star,
        beta_one_minus_q_star: beta * (1.0 - q_star),
        q_beta,
        atom_estimate: beta * num / den,
        beta_mass_at_zero: beta * masses[0],
        iterations: sol.iterations,
        mu,
    })
}
