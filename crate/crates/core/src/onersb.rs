//! One-step RSB at zero field: the master equation, the replicon and
//! pure-like criteria, the Z-polynomial root bound and classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{formal_conjugate, inv_sq_linear_moment, obstacle_check, primal_energy};
use crate::model::MixedModel;
use crate::order_param::OrderParamAnsatz;
use crate::roots::{bisect, newton_bisect};
use crate::obstacle_tolerance;

const SERIES_RADIUS: f64 = 0.05;

/// `a(y) = (y log y - (y - 1)) / (y - 1)^2`.
pub fn a_of_y(y: f64) -> Result<f64> {
    if !(y > 1.0) {
        return Err(Error::Domain(y));
    }
    Ok(a_unchecked(y))
}

fn a_unchecked(y: f64) -> f64 {
    let e = y - 1.0;
    if e < SERIES_RADIUS {
        let mut s = 0.0;
        let mut pw = 1.0;
        for k in 1..40 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            s += sign * pw / (k * (k + 1)) as f64;
            pw *= e;
        }
        s
    } else {
        (y * y.ln() - e) / (e * e)
    }
}

/// `a'(y) = (2(y - 1) - (y + 1) log y) / (y - 1)^3`.
pub fn a_prime(y: f64) -> f64 {
    let e = y - 1.0;
    if e < SERIES_RADIUS {
        let mut s = 0.0;
        let mut pw = 1.0;
        for k in 2..41 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            s += sign * (k - 1) as f64 * pw / (k * (k + 1)) as f64;
            pw *= e;
        }
        s
    } else {
        (2.0 * e - (y + 1.0) * y.ln()) / (e * e * e)
    }
}

/// Solution of the 1RSB fixed-point system
/// `xi(1) = R(0)`, `1/xi'(1) = c (c + m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneRsbSolution {
    pub y: f64,
    pub m: f64,
    pub c: f64,
    pub converged: bool,
    /// Set for the SK case, where `y = 1` and `m = 0`.
    pub degenerate: bool,
    /// `a(y) - xi(1)/xi'(1)`.
    pub master_residual: f64,
    /// Residuals of the two fixed-point equations.
    pub fp_residuals: [f64; 2],
}

impl OneRsbSolution {
    pub fn ansatz(&self) -> OrderParamAnsatz {
        OrderParamAnsatz::one_rsb(self.m, self.c)
    }
}

fn fp_residuals(model: &MixedModel, m: f64, c: f64) -> [f64; 2] {
    let r0 = inv_sq_linear_moment(c, c + m);
    [model.xi(1.0) - r0, 1.0 / model.d1(1.0) - c * (c + m)]
}

pub fn solve_master(model: &MixedModel) -> Result<OneRsbSolution> {
    let xi1 = model.xi(1.0);
    let dxi1 = model.d1(1.0);
    let target = xi1 / dxi1;
    if target >= 0.5 - 1e-14 {
        let c = 1.0 / dxi1.sqrt();
        return Ok(OneRsbSolution {
            y: 1.0,
            m: 0.0,
            c,
            converged: true,
            degenerate: true,
            master_residual: 0.5 - target,
            fp_residuals: fp_residuals(model, 0.0, c),
        });
    }
    let lo = 1.0 + 1e-12;
    let mut hi = 2.0;
    let mut doublings = 0;
    while a_unchecked(hi) >= target {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::NonConvergence {
                what: "master equation bracket".into(),
                iterations: doublings,
            });
        }
    }
    let y = newton_bisect(|y| (a_unchecked(y) - target, a_prime(y)), lo, hi, 1e-15, 500)
        .or_else(|_| bisect(|y| a_unchecked(y) - target, lo, hi, 1e-15 * hi))?;
    let c = 1.0 / (y * dxi1).sqrt();
    let m = c * (y - 1.0);
    let residual = a_unchecked(y) - target;
    Ok(OneRsbSolution {
        y,
        m,
        c,
        converged: residual.abs() < 1e-13,
        degenerate: false,
        master_residual: residual,
        fp_residuals: fp_residuals(model, m, c),
    })
}

/// The two necessary conditions for 1RSB optimality and their encodings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    /// `eta''(0) - xi''(0) = 1/(m + c)^2 - xi''(0)`
    pub replicon: f64,
    /// `eta''(1) - xi''(1) = 1/c^2 - xi''(1)`
    pub purelike_margin: f64,
    /// Only reported when `xi(1) = 1`.
    pub aba: Option<f64>,
    pub y_lower: f64,
    /// `xi'(1)/xi''(0)`, absent (infinite) when `xi''(0) = 0`.
    pub y_upper: Option<f64>,
    pub replicon_nonneg: bool,
    pub purelike_or_critical: bool,
}

/// `log(v2/v1) - (v2 - v1)(v2 - v1 + v1^2) / (v2 v1^2)` with
/// `v1 = xi'(1)`, `v2 = xi''(1)`, for models normalized to `xi(1) = 1`.
pub fn aba(nu1: f64, nu2: f64) -> f64 {
    (nu2 / nu1).ln() - (nu2 - nu1) * (nu2 - nu1 + nu1 * nu1) / (nu2 * nu1 * nu1)
}

const FLAG_REL_TOL: f64 = 1e-12;

pub fn criteria(model: &MixedModel, sol: &OneRsbSolution) -> CriteriaReport {
    let (m, c, y) = (sol.m, sol.c, sol.y);
    let d = model.derivatives(1.0);
    let xi2_0 = model.d2(0.0);
    let y_lower = d[2] / d[1];
    let y_upper = (xi2_0 > 0.0).then(|| d[1] / xi2_0);
    let aba_value = ((d[0] - 1.0).abs() < 1e-12).then(|| aba(d[1], d[2]));
    CriteriaReport {
        replicon: 1.0 / ((m + c) * (m + c)) - xi2_0,
        purelike_margin: 1.0 / (c * c) - d[2],
        aba: aba_value,
        y_lower,
        y_upper,
        replicon_nonneg: y_upper.map_or(true, |u| y <= u * (1.0 + FLAG_REL_TOL)),
        purelike_or_critical: y >= y_lower * (1.0 - FLAG_REL_TOL),
    }
}

/// Monomial expansion of `Z(t) = 1 - C (x - t)^2 xi''(t)` for a 2+p model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZReport {
    /// `(degree, coefficient)`, ascending, same degrees combined.
    pub coefficients: Vec<(u32, f64)>,
    pub sign_changes: usize,
    /// Roots of `Z` in `(0, 1)`.
    pub roots: Vec<f64>,
    /// SK: `y = 1` and `Z` is not defined.
    pub degenerate: bool,
}

impl ZReport {
    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().map(|&(k, a)| a * t.powi(k as i32)).sum()
    }
}

pub fn z_sign_changes(model: &MixedModel, sol: &OneRsbSolution) -> Result<ZReport> {
    if model.is_pure_two() || sol.degenerate {
        return Ok(ZReport {
            coefficients: vec![],
            sign_changes: 0,
            roots: vec![],
            degenerate: true,
        });
    }
    let (w2, p, wp) = model
        .two_plus_p_parts()
        .ok_or_else(|| Error::Shape("Z expansion needs a model on degrees {2, p}".into()))?;
    let y = sol.y;
    let cc = (y - 1.0) * (y - 1.0) / (model.d1(1.0) * y);
    let x = y / (y - 1.0);
    let k = (p * (p - 1)) as f64 * wp;
    let raw = [
        (0, 1.0 - 2.0 * w2 * cc * x * x),
        (1, 4.0 * w2 * cc * x),
        (2, -2.0 * w2 * cc),
        (p - 2, -cc * k * x * x),
        (p - 1, 2.0 * cc * k * x),
        (p, -cc * k),
    ];
    let mut coefficients: Vec<(u32, f64)> = Vec::new();
    for (deg, a) in raw {
        match coefficients.iter_mut().find(|e| e.0 == deg) {
            Some(e) => e.1 += a,
            None => coefficients.push((deg, a)),
        }
    }
    coefficients.sort_by_key(|e| e.0);
    let signs: Vec<f64> = coefficients
        .iter()
        .map(|e| e.1)
        .filter(|a| *a != 0.0)
        .map(f64::signum)
        .collect();
    let sign_changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let mut report = ZReport {
        coefficients,
        sign_changes,
        roots: vec![],
        degenerate: false,
    };
    let n = 4000;
    let mut prev = (1e-9, report.eval(1e-9));
    for i in 1..=n {
        let t = (i as f64 / n as f64).min(1.0 - 1e-9);
        let v = report.eval(t);
        if v == 0.0 {
            report.roots.push(t);
        } else if prev.1 != 0.0 && v.signum() != prev.1.signum() {
            report.roots.push(bisect(|s| report.eval(s), prev.0, t, 1e-14)?);
        }
        prev = (t, v);
    }
    Ok(report)
}

/// Optimizer class at zero field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Class {
    SkRs,
    OneRsb,
    NotOneRsb,
    /// Not 1RSB and `d <= 0` on all of `[0, 1]`.
    FrsbCandidate,
}

impl Class {
    pub fn as_str(self) -> &'static str {
        match self {
            Class::SkRs => "SK_RS",
            Class::OneRsb => "ONE_RSB",
            Class::NotOneRsb => "NOT_ONE_RSB",
            Class::FrsbCandidate => "FRSB_CANDIDATE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: Class,
    pub y: f64,
    pub m: f64,
    pub c: f64,
    pub replicon: f64,
    pub purelike_margin: f64,
    pub aba: Option<f64>,
    pub obstacle_margin: f64,
    pub argmin: f64,
    /// Failing necessary conditions, by name.
    pub failing: Vec<String>,
    /// `1/2 P` of the 1RSB candidate.
    pub candidate_gse: f64,
}

/// At zero field only the SK model (any weight) is replica symmetric.
pub fn rs_check(model: &MixedModel) -> bool {
    model.is_pure_two()
}

fn sk_classification(model: &MixedModel) -> Classification {
    let c = 1.0 / model.d1(1.0).sqrt();
    let crit = criteria(model, &solve_master(model).expect("SK is closed form"));
    Classification {
        class: Class::SkRs,
        y: 1.0,
        m: 0.0,
        c,
        replicon: crit.replicon,
        purelike_margin: crit.purelike_margin,
        aba: crit.aba,
        obstacle_margin: 0.0,
        argmin: 0.0,
        failing: vec![],
        candidate_gse: 0.5 * (model.d1(1.0) * c + 1.0 / c),
    }
}

fn all_nonpositive(model: &MixedModel) -> bool {
    model
        .sign_intervals(1e-4, 1e-10)
        .map(|p| p.is_all_nonpositive())
        .unwrap_or(false)
}

fn build(model: &MixedModel, sol: &OneRsbSolution, decide: impl Fn(&CriteriaReport, f64) -> bool) -> Result<Classification> {
    let crit = criteria(model, sol);
    let ansatz = sol.ansatz();
    let cert = formal_conjugate(&ansatz, model, 0.0)?;
    let (margin, argmin) = obstacle_check(&cert, model, true);
    let mut failing = Vec::new();
    if !crit.replicon_nonneg {
        failing.push("replicon".to_string());
    }
    if !crit.purelike_or_critical {
        failing.push("purelike".to_string());
    }
    if margin < -obstacle_tolerance(model) {
        failing.push("obstacle".to_string());
    }
    let class = if decide(&crit, margin) {
        Class::OneRsb
    } else if all_nonpositive(model) {
        Class::FrsbCandidate
    } else {
        Class::NotOneRsb
    };
    Ok(Classification {
        class,
        y: sol.y,
        m: sol.m,
        c: sol.c,
        replicon: crit.replicon,
        purelike_margin: crit.purelike_margin,
        aba: crit.aba,
        obstacle_margin: margin,
        argmin,
        failing,
        candidate_gse: 0.5 * primal_energy(&ansatz, model, 0.0)?,
    })
}

/// 2+p models: 1RSB iff the replicon and pure-like conditions both hold.
pub fn classify_2p(model: &MixedModel) -> Result<Classification> {
    if model.is_pure_two() {
        return Ok(sk_classification(model));
    }
    if model.two_plus_p_parts().is_none() {
        return Err(Error::Shape("classify_2p needs a model on degrees {2, p}".into()));
    }
    let sol = solve_master(model)?;
    build(model, &sol, |crit, _| crit.replicon_nonneg && crit.purelike_or_critical)
}

/// General models: the 1RSB candidate is optimal iff its formal conjugate
/// clears the obstacle.
pub fn classify(model: &MixedModel) -> Result<Classification> {
    if model.is_pure_two() {
        return Ok(sk_classification(model));
    }
    if model.two_plus_p_parts().is_some() {
        return classify_2p(model);
    }
    let sol = solve_master(model)?;
    build(model, &sol, |_, margin| margin >= -obstacle_tolerance(model))
}
