//! Order parameters `phi` (non-negative, non-increasing, concave on `[0, 1]`)
//! and the measures `nu = m(t) dt + c delta_1` they correspond to through
//! `phi(t) = nu[t, 1]`.
//!
//! Two representations are supported. [`OrderParamAnsatz`] stores the
//! structure of `dm = -phi''` directly: atoms plus segments on which the
//! density equals `-d`, so that `phi = (xi'')^{-1/2} + affine` there.
//! [`GridFunction`] stores nodal values on a uniform grid and is read as the
//! piecewise-linear interpolant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MixedModel;
use crate::quad;

/// Default grid size.
pub const DEFAULT_GRID: usize = 2000;

/// Atoms and contact segments of `dm` plus the mass `c = phi(1)` at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderParamAnsatz {
    pub c: f64,
    #[serde(default)]
    pub atoms: Vec<(f64, f64)>,
    #[serde(default)]
    pub frsb_segments: Vec<(f64, f64)>,
}

// Segment with the endpoint data of g = (xi'')^{-1/2} cached.
#[derive(Debug, Clone, Copy)]
struct SegData {
    a: f64,
    b: f64,
    g_b: f64,
    gp_a: f64,
    gp_b: f64,
}

impl SegData {
    fn new(model: &MixedModel, a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            g_b: model.contact_phi(b),
            gp_a: model.contact_phi_slope(a),
            gp_b: model.contact_phi_slope(b),
        }
    }

    // int_a^{min(t, b)} (-d) for t >= a
    fn density_mass(&self, model: &MixedModel, t: f64) -> f64 {
        if t <= self.a {
            0.0
        } else if t >= self.b {
            self.gp_a - self.gp_b
        } else {
            self.gp_a - model.contact_phi_slope(t)
        }
    }

    // int_t^1 density_mass(s) ds
    fn tail(&self, model: &MixedModel, t: f64) -> f64 {
        let full = self.gp_a - self.gp_b;
        if t >= self.b {
            (1.0 - t) * full
        } else {
            let t = t.max(self.a);
            (self.b - t) * self.gp_a - (self.g_b - model.contact_phi(t)) + (1.0 - self.b) * full
        }
    }
}

/// An ansatz bound to its model, with segment data precomputed.
#[derive(Debug, Clone)]
pub struct AnsatzView<'a> {
    pub ansatz: &'a OrderParamAnsatz,
    pub model: &'a MixedModel,
    segs: Vec<SegData>,
}

impl<'a> AnsatzView<'a> {
    pub fn value(&self, t: f64) -> f64 {
        let mut v = self.ansatz.c;
        for &(q, m) in &self.ansatz.atoms {
            v += m * (1.0 - q.max(t));
        }
        for s in &self.segs {
            v += s.tail(self.model, t);
        }
        v
    }

    /// Density `m(t) = -phi'(t^+)`.
    pub fn density(&self, t: f64) -> f64 {
        let mut v = 0.0;
        for &(q, m) in &self.ansatz.atoms {
            if q <= t {
                v += m;
            }
        }
        for s in &self.segs {
            v += s.density_mass(self.model, t);
        }
        v
    }

    /// Sorted breakpoints of the piecewise structure, including 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0, 1.0];
        pts.extend(self.ansatz.atoms.iter().map(|a| a.0));
        for s in &self.segs {
            pts.push(s.a);
            pts.push(s.b);
        }
        pts.retain(|t| (0.0..=1.0).contains(t));
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        pts
    }

    /// Segment covering the open piece `(lo, hi)`, if any.
    pub fn segment_on(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let mid = 0.5 * (lo + hi);
        self.segs
            .iter()
            .find(|s| s.a <= mid && mid <= s.b)
            .map(|s| (s.a, s.b))
    }
}

impl OrderParamAnsatz {
    pub fn constant(c: f64) -> Self {
        Self {
            c,
            atoms: vec![],
            frsb_segments: vec![],
        }
    }

    /// `phi(t) = m (1 - t) + c`, a single atom of `dm` at zero.
    pub fn one_rsb(m: f64, c: f64) -> Self {
        Self {
            c,
            atoms: if m > 0.0 { vec![(0.0, m)] } else { vec![] },
            frsb_segments: vec![],
        }
    }

    /// `phi = (xi'')^{-1/2}` on all of `[0, 1]`; requires `xi''(0) > 0`.
    pub fn full_contact(model: &MixedModel) -> Result<Self> {
        if model.d2(0.0) <= 0.0 {
            return Err(Error::InvalidOrderParam(
                "a contact segment cannot start where xi'' vanishes".into(),
            ));
        }
        let m0 = -model.contact_phi_slope(0.0);
        Ok(Self {
            c: model.contact_phi(1.0),
            atoms: if m0 > 0.0 { vec![(0.0, m0)] } else { vec![] },
            frsb_segments: vec![(0.0, 1.0)],
        })
    }

    pub fn view<'a>(&'a self, model: &'a MixedModel) -> AnsatzView<'a> {
        AnsatzView {
            ansatz: self,
            model,
            segs: self
                .frsb_segments
                .iter()
                .map(|&(a, b)| SegData::new(model, a, b))
                .collect(),
        }
    }

    pub fn value(&self, model: &MixedModel, t: f64) -> f64 {
        self.view(model).value(t)
    }

    /// `phi(0) - c`, the mass of `m(t) dt`.
    pub fn density_mass(&self, model: &MixedModel) -> f64 {
        self.value(model, 0.0) - self.c
    }

    /// Check the structural invariants; segments must sit where `d <= 0`.
    pub fn validate(&self, model: &MixedModel) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidOrderParam(m));
        if !(self.c.is_finite() && self.c > 0.0) {
            return bad(format!("c = {} must be positive", self.c));
        }
        for (i, &(q, m)) in self.atoms.iter().enumerate() {
            if !(0.0..1.0).contains(&q) {
                return bad(format!("atom {i} at {q} outside [0, 1)"));
            }
            if !(m.is_finite() && m > 0.0) {
                return bad(format!("atom {i} has mass {m}"));
            }
            if i > 0 && self.atoms[i - 1].0 >= q {
                return bad("atom locations must be strictly increasing".into());
            }
        }
        let mut segs = self.frsb_segments.clone();
        segs.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (i, &(a, b)) in segs.iter().enumerate() {
            if !(0.0 <= a && a < b && b <= 1.0) {
                return bad(format!("segment ({a}, {b}) is not a sub-interval of [0, 1]"));
            }
            if i > 0 && segs[i - 1].1 > a {
                return bad("segments overlap".into());
            }
            if model.d2(a) <= 0.0 {
                return bad(format!("segment starts at {a} where xi'' = 0"));
            }
            let scale = 1.0 + model.dfrak(a).map(f64::abs).unwrap_or(0.0);
            for t in [a, 0.5 * (a + b), b] {
                let d = model.dfrak(t)?;
                if d > 1e-9 * scale {
                    return bad(format!("d({t}) = {d:e} > 0 inside segment ({a}, {b})"));
                }
            }
        }
        Ok(())
    }
}

/// Nodal values on the uniform grid `t_i = i / G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn uniform_grid(cells: usize) -> Vec<f64> {
        (0..=cells).map(|i| i as f64 / cells as f64).collect()
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidOrderParam("grid needs at least two nodes".into()));
        }
        Ok(Self {
            t: Self::uniform_grid(values.len() - 1),
            values,
        })
    }

    pub fn from_fn(cells: usize, f: impl Fn(f64) -> f64) -> Self {
        let t = Self::uniform_grid(cells);
        let values = t.iter().map(|&x| f(x)).collect();
        Self { t, values }
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    /// Piecewise-linear interpolation.
    pub fn interpolate(&self, x: f64) -> f64 {
        let g = self.cells();
        let pos = (x.clamp(0.0, 1.0) * g as f64).min(g as f64);
        let i = (pos.floor() as usize).min(g - 1);
        let w = pos - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    pub fn min_value(&self) -> (f64, usize) {
        self.values
            .iter()
            .enumerate()
            .fold((f64::INFINITY, 0), |acc, (i, &v)| if v < acc.0 { (v, i) } else { acc })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,phi\n");
        for (t, v) in self.t.iter().zip(&self.values) {
            s.push_str(&format!("{t},{v}\n"));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut t = Vec::new();
        let mut values = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with('t')) {
                continue;
            }
            let mut it = line.split(',');
            let parse = |x: Option<&str>| -> Result<f64> {
                x.and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| Error::InvalidOrderParam(format!("bad CSV line {}", n + 1)))
            };
            t.push(parse(it.next())?);
            values.push(parse(it.next())?);
        }
        let g = Self::from_values(values)?;
        let uniform = t
            .iter()
            .zip(&g.t)
            .all(|(a, b)| (a - b).abs() < 1e-9);
        if !uniform {
            return Err(Error::InvalidOrderParam("CSV grid is not uniform on [0, 1]".into()));
        }
        Ok(g)
    }
}

/// Sample an ansatz on a uniform grid with `cells >= 100` intervals.
pub fn to_grid(ansatz: &OrderParamAnsatz, model: &MixedModel, cells: usize) -> Result<GridFunction> {
    if cells < 100 {
        return Err(Error::InvalidArgument(format!("grid size {cells} < 100")));
    }
    ansatz.validate(model)?;
    let view = ansatz.view(model);
    let g = GridFunction::from_fn(cells, |t| view.value(t));
    let (min, at) = g.min_value();
    if min <= 0.0 {
        return Err(Error::Positivity { min, at: g.t[at] });
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NonPositive,
    Increasing,
    NotConcave,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub index: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

const CONE_TOL: f64 = 1e-12;

/// List every violated cone condition of a grid function.
pub fn validate(phi: &GridFunction) -> ValidationReport {
    let v = &phi.values;
    let mut out = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        if !(x > 0.0) {
            out.push(Violation {
                kind: ViolationKind::NonPositive,
                index: i,
                magnitude: -x,
            });
        }
    }
    for i in 0..v.len() - 1 {
        let inc = v[i + 1] - v[i];
        if inc > CONE_TOL {
            out.push(Violation {
                kind: ViolationKind::Increasing,
                index: i,
                magnitude: inc,
            });
        }
    }
    for i in 1..v.len() - 1 {
        let d2 = v[i + 1] - 2.0 * v[i] + v[i - 1];
        if d2 > CONE_TOL {
            out.push(Violation {
                kind: ViolationKind::NotConcave,
                index: i,
                magnitude: d2,
            });
        }
    }
    ValidationReport { violations: out }
}

/// Density part of a measure in `A`.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    /// `m` constant on each grid cell.
    Cells { edges: Vec<f64>, values: Vec<f64> },
    /// Atoms of `dm` and segments carrying density `-d` of `model`, kept
    /// as the generating ansatz.
    Structured {
        ansatz: OrderParamAnsatz,
        model: MixedModel,
    },
}

/// `nu = m(t) dt + c delta_1` with `m >= 0` non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureA {
    pub atom_at_one: f64,
    pub density: Density,
}

impl MeasureA {
    /// `m(t)`, right-continuous.
    pub fn m(&self, t: f64) -> f64 {
        match &self.density {
            Density::Cells { edges, values } => {
                let g = values.len();
                let i = edges[1..].partition_point(|&e| e <= t).min(g - 1);
                values[i]
            }
            Density::Structured { ansatz, model } => ansatz.view(model).density(t),
        }
    }

    /// Edges of the pieces on which `m` is smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.density {
            Density::Cells { edges, .. } => edges.clone(),
            Density::Structured { ansatz, model } => ansatz.view(model).breakpoints(),
        }
    }

    /// `nu[s, 1] = c + int_s^1 m`, integrating `m` numerically piece by piece.
    pub fn tail_mass(&self, s: f64) -> f64 {
        let pts = self.breakpoints();
        let mut total = self.atom_at_one;
        for w in pts.windows(2) {
            let (lo, hi) = (w[0].max(s), w[1]);
            if hi <= lo {
                continue;
            }
            total += match &self.density {
                Density::Cells { .. } => self.m(0.5 * (lo + hi)) * (hi - lo),
                Density::Structured { ansatz, model } => {
                    let view = ansatz.view(model);
                    quad::integrate(|x| view.density(x), lo, hi, 1e-13).0
                }
            };
        }
        total
    }

    /// `nu[0, 1]`.
    pub fn total_mass(&self) -> f64 {
        self.tail_mass(0.0)
    }

    /// Jumps of `m`, i.e. atoms of `dm`. On grids, consecutive jumps larger
    /// than `threshold` are merged into one atom located at their
    /// mass-weighted mean, which recovers an atom lying inside a cell exactly.
    pub fn dm_atoms(&self, threshold: f64) -> Vec<(f64, f64)> {
        match &self.density {
            Density::Structured { ansatz, .. } => ansatz.atoms.clone(),
            Density::Cells { edges, values } => {
                let mut out: Vec<(f64, f64)> = Vec::new();
                let mut last_idx = usize::MAX;
                for k in 0..values.len() {
                    let jump = if k == 0 { values[0] } else { values[k] - values[k - 1] };
                    if jump > threshold {
                        let t = edges[k];
                        if last_idx != usize::MAX && last_idx + 1 == k {
                            let a = out.last_mut().expect("previous atom");
                            let mass = a.1 + jump;
                            a.0 = (a.0 * a.1 + t * jump) / mass;
                            a.1 = mass;
                        } else {
                            out.push((t, jump));
                        }
                        last_idx = k;
                    }
                }
                out
            }
        }
    }
}

/// Input to [`to_measure`].
pub enum PhiInput<'a> {
    Grid(&'a GridFunction),
    Ansatz(&'a OrderParamAnsatz, &'a MixedModel),
}

/// The measure `nu` with `nu[t, 1] = phi(t)`.
pub fn to_measure(phi: PhiInput<'_>) -> Result<MeasureA> {
    match phi {
        PhiInput::Grid(g) => {
            let report = validate(g);
            if !report.is_valid() {
                return Err(Error::InvalidOrderParam(format!(
                    "{} cone violations",
                    report.violations.len()
                )));
            }
            let h = g.step();
            let values = g
                .values
                .windows(2)
                .map(|w| ((w[0] - w[1]) / h).max(0.0))
                .collect();
            Ok(MeasureA {
                atom_at_one: *g.values.last().expect("non-empty"),
                density: Density::Cells {
                    edges: g.t.clone(),
                    values,
                },
            })
        }
        PhiInput::Ansatz(a, model) => {
            a.validate(model)?;
            Ok(MeasureA {
                atom_at_one: a.c,
                density: Density::Structured {
                    ansatz: a.clone(),
                    model: model.clone(),
                },
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Term;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model_24(mu: f64) -> MixedModel {
        MixedModel::two_plus_p(mu, 4).unwrap()
    }

    #[test]
    fn constant_and_linear_grids() {
        let sk = MixedModel::sk();
        let g = to_grid(&OrderParamAnsatz::constant(1.0), &sk, 100).unwrap();
        assert!(g.values.iter().all(|&v| v == 1.0));
        let g = to_grid(&OrderParamAnsatz::one_rsb(1.0, 0.5), &sk, 100).unwrap();
        for (t, v) in g.t.iter().zip(&g.values) {
            assert!((v - (0.5 + (1.0 - t))).abs() < 1e-15);
        }
        assert!(to_grid(&OrderParamAnsatz::constant(1.0), &sk, 50).is_err());
    }

    #[test]
    fn full_contact_grid_matches_closed_form() {
        let m = model_24(14.0 / 15.0);
        let a = OrderParamAnsatz::full_contact(&m).unwrap();
        let g = to_grid(&a, &m, 1000).unwrap();
        for (t, v) in g.t.iter().zip(&g.values) {
            let expect = (28.0 / 15.0 + 12.0 / 15.0 * t * t).powf(-0.5);
            assert!((v - expect).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn segment_tail_matches_quadrature_of_density() {
        // oracle: phi(t) = c + int_t^1 int_0^s m, with m from adaptive
        // quadrature of -d rather than the closed-form slopes
        let m = MixedModel::new(vec![
            Term { p: 2, beta_sq: 1.0 },
            Term { p: 4, beta_sq: 0.05 },
        ])
        .unwrap();
        let prof = m.sign_intervals(1e-4, 1e-13).unwrap();
        let seg = prof.intervals[0];
        assert!(seg.sign.is_nonpositive());
        let (a, b) = (0.1, seg.right.min(0.9));
        let ans = OrderParamAnsatz {
            c: 0.7,
            atoms: vec![(0.0, 0.2), (a, 0.1)],
            frsb_segments: vec![(a, b)],
        };
        ans.validate(&m).unwrap();
        let dens = |s: f64| {
            let mut v = 0.2;
            if s >= a {
                v += 0.1;
                v += quad::integrate(|x| -m.dfrak(x).unwrap(), a, s.min(b), 1e-14).0;
            }
            v
        };
        let view = ans.view(&m);
        for &t in &[0.0, 0.05, 0.1, 0.3, 0.6, 0.95] {
            let oracle = 0.7
                + [t, a, b, 1.0]
                    .windows(2)
                    .filter(|w| w[1] > w[0].max(t))
                    .map(|w| quad::integrate(dens, w[0].max(t), w[1], 1e-13).0)
                    .sum::<f64>();
            assert!((view.value(t) - oracle).abs() < 1e-10, "t={t}: {} vs {oracle}", view.value(t));
        }
    }

    #[test]
    fn validate_examples() {
        let g = GridFunction::from_fn(200, |_| 1.0);
        assert!(validate(&g).is_valid());
        let g = GridFunction::from_fn(200, |t| t);
        let r = validate(&g);
        assert_eq!(r.count(ViolationKind::Increasing), 200);
        assert_eq!(r.count(ViolationKind::NonPositive), 1);
        let m = model_24(14.0 / 15.0);
        let g = GridFunction::from_fn(2000, |t| m.contact_phi(t));
        assert!(validate(&g).is_valid());
    }

    #[test]
    fn ansatz_validation_rejects_bad_segments() {
        let m = model_24(0.7);
        // d > 0 near t = 1 for mu = 0.7
        let a = OrderParamAnsatz {
            c: 0.5,
            atoms: vec![(0.0, 0.5)],
            frsb_segments: vec![(0.6, 0.9)],
        };
        assert!(a.validate(&m).is_err());
        let a = OrderParamAnsatz {
            c: 0.5,
            atoms: vec![(0.3, 0.5), (0.1, 0.2)],
            frsb_segments: vec![],
        };
        assert!(a.validate(&m).is_err());
        assert!(OrderParamAnsatz::constant(0.0).validate(&m).is_err());
        assert!(OrderParamAnsatz::full_contact(&MixedModel::pure(3).unwrap()).is_err());
    }

    #[test]
    fn measure_of_simple_grids() {
        let g = GridFunction::from_fn(100, |_| 0.8);
        let nu = to_measure(PhiInput::Grid(&g)).unwrap();
        assert_eq!(nu.atom_at_one, 0.8);
        assert!(nu.dm_atoms(1e-12).is_empty());
        let g = GridFunction::from_fn(100, |t| 0.3 * (1.0 - t) + 0.5);
        let nu = to_measure(PhiInput::Grid(&g)).unwrap();
        assert!((nu.m(0.4) - 0.3).abs() < 1e-12);
        let atoms = nu.dm_atoms(1e-9);
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].0, 0.0);
        assert!((atoms[0].1 - 0.3).abs() < 1e-12);
        assert!((nu.total_mass() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn round_trip_recovers_atoms() {
        let sk = MixedModel::sk();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let k = rng.gen_range(1..4);
            let mut qs: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..0.95)).collect();
            qs.sort_by(f64::total_cmp);
            qs.dedup_by(|a, b| (*a - *b).abs() < 0.02);
            let atoms: Vec<(f64, f64)> = qs.iter().map(|&q| (q, rng.gen_range(0.1..2.0))).collect();
            let a = OrderParamAnsatz {
                c: rng.gen_range(0.1..1.0),
                atoms: atoms.clone(),
                frsb_segments: vec![],
            };
            let g = to_grid(&a, &sk, 1000).unwrap();
            assert!((g.values[0] - a.value(&sk, 0.0)).abs() < 1e-10);
            let nu = to_measure(PhiInput::Grid(&g)).unwrap();
            let got = nu.dm_atoms(1e-9);
            assert_eq!(got.len(), atoms.len());
            for (x, y) in got.iter().zip(&atoms) {
                assert!((x.0 - y.0).abs() <= 1e-3);
                assert!((x.1 - y.1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn random_ansatz_grids_are_concave() {
        let m = model_24(0.9);
        let prof = m.sign_intervals(1e-4, 1e-12).unwrap();
        let neg_right = prof.intervals[0].right;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a0 = rng.gen_range(0.0..neg_right * 0.5);
            let b0 = rng.gen_range(a0 + 1e-3..neg_right);
            let ans = OrderParamAnsatz {
                c: rng.gen_range(0.05..2.0),
                atoms: vec![(0.0, rng.gen_range(0.01..1.0)), (b0, rng.gen_range(0.01..1.0))],
                frsb_segments: if rng.gen_bool(0.5) { vec![(a0, b0)] } else { vec![] },
            };
            let g = to_grid(&ans, &m, 100).unwrap();
            assert!(validate(&g).is_valid());
        }
    }

    #[test]
    fn csv_round_trip() {
        let g = GridFunction::from_fn(100, |t| 2.0 - t * t);
        let back = GridFunction::from_csv(&g.to_csv()).unwrap();
        assert_eq!(back, g);
        assert!(GridFunction::from_csv("t,phi\n0,1\n0.7,1\n1,1\n").is_err());
    }

    #[test]
    fn ansatz_json_schema() {
        let a: OrderParamAnsatz =
            serde_json::from_str(r#"{"c": 0.5, "atoms": [[0.0, 1.0]], "frsb_segments": []}"#).unwrap();
        assert_eq!(a, OrderParamAnsatz::one_rsb(1.0, 0.5));
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"c":0.5,"atoms":[[0.0,1.0]],"frsb_segments":[]}"#);
    }
}
