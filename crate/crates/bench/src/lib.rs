//! Fixtures shared by the benchmarks.

use sphgse::model::{MixedModel, Term};

pub fn two_plus_four(mu: f64) -> MixedModel {
    MixedModel::two_plus_p(mu, 4).expect("valid family")
}

/// `d` changes sign four times on `(0, 1)` for this mixture.
pub fn four_roots() -> MixedModel {
    MixedModel::new(vec![
        Term { p: 2, beta_sq: 300.0 / 601.0 },
        Term { p: 4, beta_sq: 200.0 / 601.0 },
        Term { p: 15, beta_sq: 100.0 / 601.0 },
        Term { p: 60, beta_sq: 1.0 / 601.0 },
    ])
    .expect("valid mixture")
}

pub fn mu_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / n as f64).collect()
}
