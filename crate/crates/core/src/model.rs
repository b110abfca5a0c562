//! Mixed p-spin models `xi(t) = sum_p beta_p^2 t^p` and the structure
//! function `d(t) = ((xi'')^{-1/2})''` whose sign pattern drives the
//! ansatz construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::bisect;

/// Largest argument accepted by [`MixedModel::eval`].
pub const DOMAIN_SLACK: f64 = 0.5;

/// One monomial `beta_sq * t^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub p: u32,
    pub beta_sq: f64,
}

#[derive(Deserialize)]
struct RawModel {
    #[serde(default)]
    label: Option<String>,
    terms: Vec<Term>,
}

/// A mixture with non-negative weights and distinct degrees `p >= 2`.
///
/// Terms are kept sorted by degree. Construction goes through
/// [`MixedModel::new`], so every value of this type satisfies the model
/// invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct MixedModel {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    terms: Vec<Term>,
}

impl TryFrom<RawModel> for MixedModel {
    type Error = Error;
    fn try_from(raw: RawModel) -> Result<Self> {
        let m = MixedModel::new(raw.terms)?;
        Ok(match raw.label {
            Some(l) => m.with_label(l),
            None => m,
        })
    }
}

impl MixedModel {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        let mut terms: Vec<Term> = terms;
        for t in &terms {
            if t.p < 2 {
                return Err(Error::InvalidModel(format!("degree {} < 2", t.p)));
            }
            if !t.beta_sq.is_finite() || t.beta_sq < 0.0 {
                return Err(Error::InvalidModel(format!(
                    "weight {} of degree {} is not a finite non-negative number",
                    t.beta_sq, t.p
                )));
            }
        }
        terms.sort_by_key(|t| t.p);
        if terms.windows(2).any(|w| w[0].p == w[1].p) {
            return Err(Error::InvalidModel("repeated degree".into()));
        }
        terms.retain(|t| t.beta_sq > 0.0);
        if terms.is_empty() {
            return Err(Error::InvalidModel("all weights are zero".into()));
        }
        Ok(Self { label: None, terms })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// `xi(t) = t^p`.
    pub fn pure(p: u32) -> Result<Self> {
        Ok(Self::new(vec![Term { p, beta_sq: 1.0 }])?.with_label(format!("pure-{p}")))
    }

    /// The SK model `xi(t) = t^2`.
    pub fn sk() -> Self {
        Self::pure(2).expect("valid").with_label("SK")
    }

    /// The 2+p family `mu t^2 + (1 - mu) t^p`.
    pub fn two_plus_p(mu: f64, p: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) || p < 3 {
            return Err(Error::InvalidModel(format!(
                "2+p family needs mu in [0,1] and p >= 3 (got mu = {mu}, p = {p})"
            )));
        }
        Ok(Self::new(vec![
            Term { p: 2, beta_sq: mu },
            Term { p, beta_sq: 1.0 - mu },
        ])?
        .with_label(format!("2+{p} mu={mu}")))
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.last().map(|t| t.p).unwrap_or(2)
    }

    /// Weight of the `t^p` term, zero if absent.
    pub fn weight(&self, p: u32) -> f64 {
        self.terms
            .iter()
            .find(|t| t.p == p)
            .map(|t| t.beta_sq)
            .unwrap_or(0.0)
    }

    /// Multiply every weight by `factor` (i.e. `lambda^2`).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let m = Self::new(
            self.terms
                .iter()
                .map(|t| Term {
                    p: t.p,
                    beta_sq: t.beta_sq * factor,
                })
                .collect(),
        )?;
        Ok(match &self.label {
            Some(l) => m.with_label(format!("{l} x{factor}")),
            None => m,
        })
    }

    /// Checked evaluation of the `order`-th derivative.
    pub fn eval(&self, t: f64, order: u32) -> Result<f64> {
        if order > 4 {
            return Err(Error::Order(order));
        }
        if !(0.0..=1.0 + DOMAIN_SLACK).contains(&t) {
            return Err(Error::Domain(t));
        }
        Ok(self.derivative(t, order))
    }

    /// Unchecked derivative of any order, for hot loops. `t >= 0` assumed.
    #[inline]
    pub fn derivative(&self, t: f64, order: u32) -> f64 {
        self.terms
            .iter()
            .filter(|term| term.p >= order)
            .map(|term| {
                let falling: f64 = (0..order).map(|k| (term.p - k) as f64).product();
                let e = term.p - order;
                let power = if e == 0 { 1.0 } else { t.powi(e as i32) };
                term.beta_sq * falling * power
            })
            .sum()
    }

    #[inline]
    pub fn xi(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }
    #[inline]
    pub fn d1(&self, t: f64) -> f64 {
        self.derivative(t, 1)
    }
    #[inline]
    pub fn d2(&self, t: f64) -> f64 {
        self.derivative(t, 2)
    }

    /// `xi, xi', ..., xi''''` at `t` in one pass.
    pub fn derivatives(&self, t: f64) -> [f64; 5] {
        let mut out = [0.0; 5];
        for term in &self.terms {
            let p = term.p as i32;
            let mut coef = term.beta_sq;
            for (k, slot) in out.iter_mut().enumerate() {
                let k = k as i32;
                if k > p {
                    break;
                }
                let e = p - k;
                *slot += coef * if e == 0 { 1.0 } else { t.powi(e) };
                coef *= (p - k) as f64;
            }
        }
        out
    }

    /// `(xi'')^{-1/2}`, the order parameter on a contact interval.
    pub fn contact_phi(&self, t: f64) -> f64 {
        1.0 / self.d2(t).sqrt()
    }

    /// Derivative of [`Self::contact_phi`]: `-xi''' / (2 xi''^{3/2})`.
    pub fn contact_phi_slope(&self, t: f64) -> f64 {
        let d = self.derivatives(t);
        -0.5 * d[3] / d[2].powf(1.5)
    }

    /// Structure function `d(t) = (3/4) xi''^{-5/2} xi'''^2 - (1/2) xi''^{-3/2} xi''''`.
    pub fn dfrak(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0 + DOMAIN_SLACK).contains(&t) {
            return Err(Error::Domain(t));
        }
        let d = self.derivatives(t);
        if d[2] <= 0.0 {
            return Err(Error::Singularity(t));
        }
        Ok(dfrak_from(&d))
    }

    /// True when the model is `beta^2 t^2` for some weight.
    pub fn is_pure_two(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].p == 2
    }

    /// For models supported on degrees `{2, p}` (either weight may vanish)
    /// returns `(w2, p, wp)`. Pure-2 models have no well-defined partner
    /// degree and return `None`.
    pub fn two_plus_p_parts(&self) -> Option<(f64, u32, f64)> {
        match self.terms.as_slice() {
            [a] if a.p >= 3 => Some((0.0, a.p, a.beta_sq)),
            [a, b] if a.p == 2 => Some((a.beta_sq, b.p, b.beta_sq)),
            _ => None,
        }
    }

    /// Grid scan plus bisection decomposition of `[0, 1]` by the sign of `d`.
    pub fn sign_intervals(&self, resolution: f64, refine_tol: f64) -> Result<SignProfile> {
        sign_intervals(self, resolution, refine_tol)
    }
}

#[inline]
fn dfrak_from(d: &[f64; 5]) -> f64 {
    let x2 = d[2];
    0.75 * d[3] * d[3] / (x2 * x2 * x2.sqrt()) - 0.5 * d[4] / (x2 * x2.sqrt())
}

fn dfrak_with_scale(d: &[f64; 5]) -> (f64, f64) {
    let x2 = d[2];
    let a = 0.75 * d[3] * d[3] / (x2 * x2 * x2.sqrt());
    let b = 0.5 * d[4] / (x2 * x2.sqrt());
    (a - b, a.abs() + b.abs())
}

/// Evaluate the `order`-th derivative of `model` at `t` (checked).
pub fn eval_model(model: &MixedModel, t: f64, order: u32) -> Result<f64> {
    model.eval(t, order)
}

/// See [`MixedModel::dfrak`].
pub fn dfrak(model: &MixedModel, t: f64) -> Result<f64> {
    model.dfrak(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    /// Negative and zero intervals both belong to the set `{d <= 0}`.
    pub fn is_nonpositive(self) -> bool {
        matches!(self, Sign::Negative | Sign::Zero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignInterval {
    pub left: f64,
    pub right: f64,
    pub sign: Sign,
}

/// Partition of `[0, 1]` into maximal intervals of constant sign of `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignProfile {
    pub boundaries: Vec<f64>,
    pub intervals: Vec<SignInterval>,
    pub resolution: f64,
}

impl SignProfile {
    pub fn is_all_nonpositive(&self) -> bool {
        self.intervals.iter().all(|i| i.sign.is_nonpositive())
    }

    pub fn is_all_positive(&self) -> bool {
        self.intervals.iter().all(|i| i.sign == Sign::Positive)
    }

    pub fn signs(&self) -> Vec<Sign> {
        self.intervals.iter().map(|i| i.sign).collect()
    }
}

pub fn sign_intervals(model: &MixedModel, resolution: f64, refine_tol: f64) -> Result<SignProfile> {
    if !(resolution > 0.0 && resolution <= 1e-3) {
        return Err(Error::InvalidArgument(format!(
            "resolution must lie in (0, 1e-3], got {resolution}"
        )));
    }
    if !(refine_tol > 0.0 && refine_tol <= resolution) {
        return Err(Error::InvalidArgument(format!(
            "refine_tol must lie in (0, resolution], got {refine_tol}"
        )));
    }
    let n = (1.0 / resolution).ceil() as usize;
    let start = if model.d2(0.0) > 0.0 { 0 } else { 1 };
    let ts: Vec<f64> = (start..=n).map(|k| (k as f64 / n as f64).min(1.0)).collect();
    // (value, size of the two terms it is the difference of)
    let sampled: Vec<(f64, f64)> = ts.iter().map(|&t| dfrak_with_scale(&model.derivatives(t))).collect();
    let values: Vec<f64> = sampled.iter().map(|v| v.0).collect();
    let classify_at = |i: usize| {
        let (v, scale) = sampled[i];
        if v.abs() <= 1e-12 * scale {
            Sign::Zero
        } else if v < 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    };

    // runs of equal sign: (first sample, last sample, sign)
    let mut runs: Vec<(usize, usize, Sign)> = Vec::new();
    for i in 0..values.len() {
        let s = classify_at(i);
        match runs.last_mut() {
            Some(r) if r.2 == s => r.1 = i,
            _ => runs.push((i, i, s)),
        }
    }
    // short zero runs between non-zero runs are sampled roots, not zero intervals
    let mut merged: Vec<(usize, usize, Sign)> = Vec::new();
    let mut k = 0;
    while k < runs.len() {
        let r = runs[k];
        let short_zero = r.2 == Sign::Zero && r.1 - r.0 < 2 && runs.len() > 1;
        if short_zero && k == 0 {
            let next = runs[1];
            merged.push((r.0, next.1, next.2));
            k += 2;
            continue;
        }
        if short_zero && k + 1 == runs.len() {
            merged.last_mut().expect("k > 0").1 = r.1;
            k += 1;
            continue;
        }
        if short_zero {
            let next = runs[k + 1];
            let prev = merged.last_mut().expect("k > 0");
            if prev.2 == next.2 {
                prev.1 = next.1;
            } else {
                // give the zero samples to the left run; the bisection below
                // lands on the sampled root
                prev.1 = r.1;
                merged.push(next);
            }
            k += 2;
            continue;
        }
        match merged.last_mut() {
            Some(prev) if prev.2 == r.2 => prev.1 = r.1,
            _ => merged.push(r),
        }
        k += 1;
    }

    let f = |t: f64| dfrak_from(&model.derivatives(t));
    let mut boundaries = Vec::with_capacity(merged.len().saturating_sub(1));
    for w in merged.windows(2) {
        let (lo, hi) = (ts[w[0].1], ts[w[1].0]);
        let root = if w[0].2 != Sign::Zero && w[1].2 != Sign::Zero {
            let (flo, scale) = dfrak_with_scale(&model.derivatives(lo));
            if flo.abs() <= 1e-12 * scale {
                lo
            } else {
                bisect(f, lo, hi, refine_tol)?
            }
        } else {
            0.5 * (lo + hi)
        };
        boundaries.push(root);
    }
    let mut intervals = Vec::with_capacity(merged.len());
    let mut left = 0.0;
    for (i, r) in merged.iter().enumerate() {
        let right = boundaries.get(i).copied().unwrap_or(1.0);
        intervals.push(SignInterval {
            left,
            right,
            sign: r.2,
        });
        left = right;
    }
    Ok(SignProfile {
        boundaries,
        intervals,
        resolution,
    })
}

/// Analytic mixtures admitted through polynomial truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesRule {
    /// `sinh(t) - t = sum_{k >= 1} t^{2k+1} / (2k+1)!`.
    SinhMinusLinear,
    /// `t^p`.
    Pure(u32),
    /// `mu t^2 + (1 - mu) t^p`.
    TwoPlusP { mu: f64, p: u32 },
}

/// Default ceiling on the degree produced by [`truncate_series`].
pub const MAX_SERIES_DEGREE: u32 = 400;

/// Truncate `rule` to a polynomial whose dropped tail weighs less than
/// `tail_bound` on `[0, 1]`.
pub fn truncate_series(rule: SeriesRule, tail_bound: f64) -> Result<MixedModel> {
    truncate_series_with_limit(rule, tail_bound, MAX_SERIES_DEGREE)
}

pub fn truncate_series_with_limit(rule: SeriesRule, tail_bound: f64, max_degree: u32) -> Result<MixedModel> {
    if !(tail_bound > 0.0) {
        return Err(Error::InvalidArgument("tail_bound must be positive".into()));
    }
    match rule {
        SeriesRule::Pure(p) => MixedModel::pure(p),
        SeriesRule::TwoPlusP { mu, p } => MixedModel::two_plus_p(mu, p),
        SeriesRule::SinhMinusLinear => {
            // coefficient of t^{2k+1} is 1/(2k+1)!; the tail after degree
            // 2K+1 is bounded by twice its first term (ratio <= 1/(2K+2)(2K+3) < 1/2)
            let mut terms = Vec::new();
            let mut coef = 1.0f64; // 1/1!
            let mut deg = 1u32;
            loop {
                coef /= ((deg + 1) * (deg + 2)) as f64;
                deg += 2;
                if deg > max_degree {
                    return Err(Error::InvalidArgument(format!(
                        "tail bound {tail_bound:e} not reachable below degree {max_degree}"
                    )));
                }
                if coef == 0.0 {
                    break;
                }
                terms.push(Term { p: deg, beta_sq: coef });
                let next = coef / ((deg + 1) * (deg + 2)) as f64;
                if 2.0 * next < tail_bound {
                    break;
                }
            }
            Ok(MixedModel::new(terms)?.with_label(format!(
                "sinh(t) - t truncated at degree {deg} (linear term of sinh removed)"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn four_roots_model() -> MixedModel {
        MixedModel::new(vec![
            Term { p: 2, beta_sq: 300.0 / 601.0 },
            Term { p: 4, beta_sq: 200.0 / 601.0 },
            Term { p: 15, beta_sq: 100.0 / 601.0 },
            Term { p: 60, beta_sq: 1.0 / 601.0 },
        ])
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let sk = MixedModel::sk();
        assert_eq!(sk.eval(1.0, 1).unwrap(), 2.0);
        assert_eq!(sk.eval(0.5, 0).unwrap(), 0.25);
        let m = MixedModel::two_plus_p(14.0 / 15.0, 4).unwrap();
        assert!((m.eval(1.0, 2).unwrap() - 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn eval_errors() {
        let sk = MixedModel::sk();
        assert_eq!(sk.eval(-0.1, 0), Err(Error::Domain(-0.1)));
        assert_eq!(sk.eval(0.5, 5), Err(Error::Order(5)));
    }

    #[test]
    fn model_validation() {
        assert!(MixedModel::new(vec![Term { p: 1, beta_sq: 1.0 }]).is_err());
        assert!(MixedModel::new(vec![Term { p: 3, beta_sq: -1.0 }]).is_err());
        assert!(MixedModel::new(vec![Term { p: 3, beta_sq: 0.0 }]).is_err());
        assert!(MixedModel::new(vec![
            Term { p: 3, beta_sq: 1.0 },
            Term { p: 3, beta_sq: 1.0 }
        ])
        .is_err());
        let m: MixedModel =
            serde_json::from_str(r#"{"label":"x","terms":[{"p":4,"beta_sq":0.5},{"p":2,"beta_sq":0.5}]}"#)
                .unwrap();
        assert_eq!(m.terms()[0].p, 2);
        assert_eq!(m.label(), Some("x"));
        assert!(serde_json::from_str::<MixedModel>(r#"{"terms":[{"p":1,"beta_sq":1}]}"#).is_err());
    }

    #[test]
    fn derivatives_at_zero() {
        let m = four_roots_model();
        assert_eq!(m.d1(0.0), 0.0);
        assert!((m.d2(0.0) - 600.0 / 601.0).abs() < 1e-15);
        assert_eq!(MixedModel::pure(3).unwrap().d2(0.0), 0.0);
    }

    #[test]
    fn dfrak_closed_forms() {
        assert_eq!(MixedModel::sk().dfrak(0.3).unwrap(), 0.0);
        let m = MixedModel::two_plus_p(14.0 / 15.0, 4).unwrap();
        for &t in &[0.1, 0.5, 0.9, 1.0] {
            let expect = 1.5 * 15f64.sqrt() * (6.0 * t * t - 7.0) * (3.0 * t * t + 7.0).powf(-2.5);
            let got = m.dfrak(t).unwrap();
            assert!((got - expect).abs() < 1e-13 * expect.abs().max(1.0), "{t}: {got} vs {expect}");
        }
        assert!(m.dfrak(1.0).unwrap() < 0.0);
        assert!(matches!(MixedModel::pure(3).unwrap().dfrak(0.0), Err(Error::Singularity(_))));
    }

    #[test]
    fn dfrak_of_sinh_is_positive() {
        let m = truncate_series(SeriesRule::SinhMinusLinear, 1e-30).unwrap();
        let d = m.dfrak(0.5).unwrap();
        // (xi'')^{-1/2} = sinh^{-1/2}, whose second derivative is (cosh^2 + 2) / (4 sinh^{5/2})
        let (s, c) = (0.5f64.sinh(), 0.5f64.cosh());
        let expect = (c * c + 2.0) / (4.0 * s.powf(2.5));
        assert!(d > 0.0);
        assert!((d - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn sign_profile_examples() {
        let p = MixedModel::sk().sign_intervals(1e-4, 1e-12).unwrap();
        assert_eq!(p.intervals.len(), 1);
        assert_eq!(p.intervals[0].sign, Sign::Zero);

        let p = MixedModel::two_plus_p(14.0 / 15.0, 4)
            .unwrap()
            .sign_intervals(1e-4, 1e-12)
            .unwrap();
        assert_eq!(p.signs(), vec![Sign::Negative]);

        let p = four_roots_model().sign_intervals(1e-4, 1e-12).unwrap();
        assert_eq!(p.boundaries.len(), 4);
        assert_eq!(
            p.signs(),
            vec![Sign::Negative, Sign::Positive, Sign::Negative, Sign::Positive, Sign::Negative]
        );
        assert!(p.boundaries[0] > 0.0 && *p.boundaries.last().unwrap() < 1.0);
    }

    #[test]
    fn sign_profile_boundaries_are_roots() {
        let m = four_roots_model();
        let tol = 1e-12;
        let p = m.sign_intervals(1e-4, tol).unwrap();
        for &r in &p.boundaries {
            let h = 1e-6;
            let slope = (m.dfrak(r + h).unwrap() - m.dfrak(r - h).unwrap()).abs() / (2.0 * h);
            assert!(m.dfrak(r).unwrap().abs() < 10.0 * slope * tol + 1e-14, "root {r}");
        }
        // the 2+4 family has its single root at t^2 = mu / (12 (1 - mu))
        let mu = 0.7;
        let p = MixedModel::two_plus_p(mu, 4).unwrap().sign_intervals(1e-4, 1e-13).unwrap();
        assert_eq!(p.boundaries.len(), 1);
        assert!((p.boundaries[0] - (mu / (12.0 * (1.0 - mu)) as f64).sqrt()).abs() < 1e-12);
        assert_eq!(p.signs(), vec![Sign::Negative, Sign::Positive]);
    }

    #[test]
    fn sign_profile_tiles_unit_interval() {
        let p = four_roots_model().sign_intervals(1e-4, 1e-12).unwrap();
        assert_eq!(p.intervals[0].left, 0.0);
        assert_eq!(p.intervals.last().unwrap().right, 1.0);
        for w in p.intervals.windows(2) {
            assert_eq!(w[0].right, w[1].left);
            assert_ne!(w[0].sign, w[1].sign);
        }
        let m = four_roots_model();
        for i in &p.intervals {
            let mid = 0.5 * (i.left + i.right);
            let s = m.dfrak(mid).unwrap();
            assert_eq!(s < 0.0, i.sign == Sign::Negative);
        }
    }

    #[test]
    fn pure_p_profile_starts_after_singularity() {
        let p = MixedModel::pure(3).unwrap().sign_intervals(1e-4, 1e-12).unwrap();
        // (t^{-1/2})'' > 0
        assert_eq!(p.signs(), vec![Sign::Positive]);
    }

    #[test]
    fn bad_resolution_is_rejected() {
        assert!(MixedModel::sk().sign_intervals(1e-2, 1e-3).is_err());
        assert!(MixedModel::sk().sign_intervals(1e-4, 1e-3).is_err());
    }

    #[test]
    fn sinh_truncation_degree() {
        // Independent oracle: the smallest odd degree D with sum_{k > D} 1/k! (odd k)
        // below the bound, summed directly in log space.
        let bound = 1e-30f64;
        let lnfact = |n: u32| (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
        let tail = |d: u32| {
            (1..40)
                .map(|j| (-lnfact(d + 2 * j)).exp())
                .sum::<f64>()
        };
        let m = truncate_series(SeriesRule::SinhMinusLinear, bound).unwrap();
        let deg = m.max_degree();
        assert!(tail(deg) < bound);
        assert!(tail(deg - 2) >= bound / 2.0);
        assert_eq!(m.terms()[0].p, 3);
        assert!((m.xi(1.0) - (1f64.sinh() - 1.0)).abs() < 1e-15);
        assert!(matches!(
            truncate_series_with_limit(SeriesRule::SinhMinusLinear, 1e-30, 11),
            Err(Error::InvalidArgument(_))
        ));
        let m = truncate_series(SeriesRule::Pure(3), 1.0).unwrap();
        assert_eq!(m.terms(), &[Term { p: 3, beta_sq: 1.0 }]);
        let m = truncate_series(SeriesRule::TwoPlusP { mu: 0.7, p: 4 }, 1.0).unwrap();
        assert_eq!(m.terms().len(), 2);
    }

    #[test]
    fn two_plus_p_parts() {
        assert_eq!(MixedModel::pure(4).unwrap().two_plus_p_parts(), Some((0.0, 4, 1.0)));
        assert_eq!(MixedModel::two_plus_p(0.3, 5).unwrap().two_plus_p_parts(), Some((0.3, 5, 0.7)));
        assert_eq!(MixedModel::sk().two_plus_p_parts(), None);
        assert_eq!(four_roots_model().two_plus_p_parts(), None);
    }

    fn arb_model() -> impl Strategy<Value = MixedModel> {
        proptest::collection::btree_map(2u32..12, 0.01f64..2.0, 1..4).prop_map(|m| {
            MixedModel::new(m.into_iter().map(|(p, w)| Term { p, beta_sq: w }).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn finite_differences_match_next_order(m in arb_model(), t in 0.05f64..1.0) {
            let h = 1e-5;
            for k in 0..4u32 {
                let fd = (m.derivative(t + h, k) - m.derivative(t - h, k)) / (2.0 * h);
                let exact = m.derivative(t, k + 1);
                let scale = exact.abs().max(1e-3 * m.derivative(1.0, k + 1)).max(1e-12);
                prop_assert!((fd - exact).abs() / scale < 1e-6, "k={} fd={} exact={}", k, fd, exact);
            }
        }

        #[test]
        fn scaling_laws(m in arb_model(), t in 0.05f64..1.0, lam in 0.3f64..3.0) {
            let s = m.scaled(lam * lam).unwrap();
            for k in 0..=4u32 {
                let a = s.derivative(t, k);
                let b = lam * lam * m.derivative(t, k);
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
            }
            let (a, b) = (s.dfrak(t).unwrap(), m.dfrak(t).unwrap() / lam);
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-12));
        }

        #[test]
        fn second_derivative_dominates_first(m in arb_model()) {
            let (d1, d2) = (m.d1(1.0), m.d2(1.0));
            if m.is_pure_two() {
                prop_assert!((d2 - d1).abs() < 1e-12 * d1);
            } else {
                prop_assert!(d2 > d1);
            }
        }
    }

    #[test]
    fn sign_profile_is_scale_invariant() {
        let m = four_roots_model();
        let a = m.sign_intervals(1e-4, 1e-11).unwrap();
        let b = m.scaled(3.7).unwrap().sign_intervals(1e-4, 1e-11).unwrap();
        assert_eq!(a.signs(), b.signs());
        for (x, y) in a.boundaries.iter().zip(&b.boundaries) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
