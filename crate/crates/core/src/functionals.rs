//! Primal, dual, ground-state and finite-temperature functionals, together
//! with the formal-conjugate dual certificate.
//!
//! Grid functions are read as their piecewise-linear interpolants and every
//! cell integral is evaluated in closed form, so the discrete primal value is
//! the exact value of `P` on the interpolant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MixedModel;
use crate::order_param::{AnsatzView, GridFunction, MeasureA, OrderParamAnsatz};
use crate::quad::{self, GaussLegendre};
use crate::{obstacle_tolerance, PHI_FLOOR};

// ---------------------------------------------------------------------------
// Closed-form integrals over a cell on which the integrand's denominator is
// linear: l(v) = a + (b - a) v, v in [0, 1], a, b > 0.

const SERIES_CUTOFF: f64 = 0.1;
const SERIES_TERMS: usize = 24;

/// `int_0^1 dv / l(v)`.
#[inline]
pub fn inv_linear(a: f64, b: f64) -> f64 {
    let x = (b - a) / a;
    if x.abs() < SERIES_CUTOFF {
        let mut s = 0.0;
        let mut pw = 1.0;
        for k in 0..SERIES_TERMS {
            s += pw / (k + 1) as f64;
            pw *= -x;
        }
        s / a
    } else {
        x.ln_1p() / (a * x)
    }
}

/// `int_0^1 v dv / l(v)`.
#[inline]
pub fn inv_linear_moment(a: f64, b: f64) -> f64 {
    let x = (b - a) / a;
    if x.abs() < SERIES_CUTOFF {
        let mut s = 0.0;
        let mut pw = 1.0;
        for k in 0..SERIES_TERMS {
            s += pw / (k + 2) as f64;
            pw *= -x;
        }
        s / a
    } else {
        (1.0 - x.ln_1p() / x) / (a * x)
    }
}

/// `int_0^1 v dv / l(v)^2`.
#[inline]
pub fn inv_sq_linear_moment(a: f64, b: f64) -> f64 {
    let x = (b - a) / a;
    if x.abs() < SERIES_CUTOFF {
        let mut s = 0.0;
        let mut pw = 1.0;
        for k in 0..SERIES_TERMS {
            s += pw * (k + 1) as f64 / (k + 2) as f64;
            pw *= -x;
        }
        s / (a * a)
    } else {
        (x.ln_1p() - x / (1.0 + x)) / (a * a * x * x)
    }
}

/// Partial derivatives of [`inv_linear`] with respect to `a` and `b`.
#[inline]
pub fn inv_linear_grad(a: f64, b: f64) -> (f64, f64) {
    let k1 = inv_sq_linear_moment(a, b);
    (-(1.0 / (a * b) - k1), -k1)
}

// ---------------------------------------------------------------------------

/// Nodal weights `W_i` with `int_0^1 xi'' phi = sum_i W_i phi_i` for every
/// piecewise-linear `phi` on the uniform grid.
#[derive(Debug, Clone)]
pub struct XiWeights {
    pub weights: Vec<f64>,
}

impl XiWeights {
    pub fn new(model: &MixedModel, cells: usize) -> Self {
        let n_nodes = (model.max_degree() as usize / 2 + 2).max(4);
        let gl = GaussLegendre::new(n_nodes);
        let h = 1.0 / cells as f64;
        let mut weights = vec![0.0; cells + 1];
        for i in 0..cells {
            let a = i as f64 * h;
            let b = if i + 1 == cells { 1.0 } else { (i + 1) as f64 * h };
            let left = gl.integrate(|t| model.d2(t) * (b - t), a, b) / (b - a);
            let right = gl.integrate(|t| model.d2(t) * (t - a), a, b) / (b - a);
            weights[i] += left;
            weights[i + 1] += right;
        }
        Self { weights }
    }

    pub fn dot(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Borrowed order parameter in either representation.
#[derive(Debug, Clone, Copy)]
pub enum PhiRef<'a> {
    Grid(&'a GridFunction),
    Ansatz(&'a OrderParamAnsatz),
}

impl<'a> From<&'a GridFunction> for PhiRef<'a> {
    fn from(g: &'a GridFunction) -> Self {
        PhiRef::Grid(g)
    }
}

impl<'a> From<&'a OrderParamAnsatz> for PhiRef<'a> {
    fn from(a: &'a OrderParamAnsatz) -> Self {
        PhiRef::Ansatz(a)
    }
}

fn check_grid_positive(g: &GridFunction) -> Result<()> {
    let (min, at) = g.min_value();
    if !(min >= PHI_FLOOR) {
        return Err(Error::Positivity { min, at: g.t[at] });
    }
    Ok(())
}

fn check_ansatz(a: &OrderParamAnsatz, model: &MixedModel) -> Result<()> {
    a.validate(model)?;
    if a.c < PHI_FLOOR {
        return Err(Error::Positivity { min: a.c, at: 1.0 });
    }
    Ok(())
}

/// `int_0^1 1/phi` for a grid function (exact on the interpolant).
pub fn grid_inv_integral(values: &[f64]) -> f64 {
    let h = 1.0 / (values.len() - 1) as f64;
    values.windows(2).map(|w| inv_linear(w[0], w[1])).sum::<f64>() * h
}

/// Discrete primal value for grid data with precomputed weights.
pub fn grid_primal(weights: &XiWeights, values: &[f64], field: f64) -> f64 {
    weights.dot(values) + grid_inv_integral(values) + field * field * values[0]
}

/// How the curved (contact-segment) pieces of an ansatz are integrated.
#[derive(Debug, Clone, Copy)]
pub enum PieceRule<'g> {
    Adaptive(f64),
    /// Fixed composite Gauss-Legendre; smooth in the ansatz parameters.
    Fixed(&'g GaussLegendre),
}

/// `(int xi'' phi, int 1/phi)` for an ansatz.
pub fn ansatz_integrals(view: &AnsatzView<'_>, rule: PieceRule<'_>) -> (f64, f64) {
    let model = view.model;
    let pts = view.breakpoints();
    let mut lin = 0.0;
    let mut inv = 0.0;
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let (plo, phi_hi) = (view.value(lo), view.value(hi));
        let seg = view.segment_on(lo, hi);
        // affine part: phi minus the contact profile on segment pieces
        let (alo, ahi) = match seg {
            Some(_) => (plo - model.contact_phi(lo), phi_hi - model.contact_phi(hi)),
            None => (plo, phi_hi),
        };
        let slope = (ahi - alo) / (hi - lo);
        lin += model.d1(hi) * ahi - model.d1(lo) * alo - slope * (model.xi(hi) - model.xi(lo));
        match seg {
            None => inv += (hi - lo) * inv_linear(plo, phi_hi),
            Some(_) => {
                let sqrt_xi2 = |t: f64| model.d2(t).sqrt();
                let inv_phi = |t: f64| 1.0 / view.value(t);
                match rule {
                    PieceRule::Adaptive(tol) => {
                        lin += quad::integrate(sqrt_xi2, lo, hi, tol).0;
                        inv += quad::integrate(inv_phi, lo, hi, tol).0;
                    }
                    PieceRule::Fixed(gl) => {
                        let pieces = ((hi - lo) / 0.05).ceil() as usize;
                        lin += gl.integrate_composite(sqrt_xi2, lo, hi, pieces);
                        inv += gl.integrate_composite(inv_phi, lo, hi, pieces);
                    }
                }
            }
        }
    }
    (lin, inv)
}

/// `P(phi) = int_0^1 (xi'' phi + 1/phi) dx + h^2 phi(0)`.
pub fn primal_energy<'a>(phi: impl Into<PhiRef<'a>>, model: &MixedModel, field: f64) -> Result<f64> {
    match phi.into() {
        PhiRef::Grid(g) => {
            check_grid_positive(g)?;
            let w = XiWeights::new(model, g.cells());
            Ok(grid_primal(&w, &g.values, field))
        }
        PhiRef::Ansatz(a) => {
            check_ansatz(a, model)?;
            let view = a.view(model);
            let (lin, inv) = ansatz_integrals(&view, PieceRule::Adaptive(1e-13));
            Ok(lin + inv + field * field * view.value(0.0))
        }
    }
}

/// `GS(nu) = int xi''(s) nu[s,1] + 1/nu[s,1] ds + h^2 nu[0,1]`, evaluated
/// directly from the measure.
pub fn gs_energy(nu: &MeasureA, model: &MixedModel, field: f64) -> Result<f64> {
    let total = nu.total_mass();
    if !(total > 0.0) {
        return Err(Error::InvalidOrderParam("GS is infinite on the zero measure".into()));
    }
    let v: f64 = nu
        .breakpoints()
        .windows(2)
        .map(|w| {
            quad::integrate(
                |s| {
                    let tail = nu.tail_mass(s);
                    model.d2(s) * tail + 1.0 / tail
                },
                w[0],
                w[1],
                1e-12,
            )
            .0
        })
        .sum();
    Ok(v + field * field * total)
}

// ---------------------------------------------------------------------------

/// Boundary data of a certificate: membership conditions and natural
/// boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResiduals {
    /// `eta'(0) - (xi'(0) - h^2)`
    pub eta_prime_zero: f64,
    /// `eta(1) - xi(1)`
    pub eta_one: f64,
    /// `eta'(1) - xi'(1)`
    pub eta_prime_one: f64,
    /// `eta(0) - xi(0)`
    pub eta_zero: f64,
}

/// Formal conjugate `eta` of an order parameter, sampled on a uniform grid.
///
/// `eta(t) = xi(1) - int_t^1 int_0^s phi^{-2} + h^2 (1 - t)`, so `eta'' = 1/phi^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub field: f64,
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_prime: Vec<f64>,
    pub eta_second: Vec<f64>,
    /// Right derivative of `phi` at zero.
    pub phi_slope_zero: f64,
    /// `int_0^1 1/phi`.
    pub inv_phi_integral: f64,
    pub obstacle_margin: f64,
    pub argmin: f64,
    pub residuals: BoundaryResiduals,
}

fn finish_certificate(
    model: &MixedModel,
    field: f64,
    phi: Vec<f64>,
    cell_inv_sq: Vec<f64>,
    cell_inv_sq_moment: Vec<f64>,
    phi_slope_zero: f64,
    inv_phi_integral: f64,
) -> DualCertificate {
    let cells = phi.len() - 1;
    let h = 1.0 / cells as f64;
    let t = GridFunction::uniform_grid(cells);
    let mut j = vec![0.0; cells + 1];
    for i in 0..cells {
        j[i + 1] = j[i] + cell_inv_sq[i];
    }
    let mut r = vec![0.0; cells + 1];
    for i in (0..cells).rev() {
        r[i] = r[i + 1] + h * j[i] + cell_inv_sq_moment[i];
    }
    let f2 = field * field;
    let xi1 = model.xi(1.0);
    let eta: Vec<f64> = (0..=cells).map(|i| xi1 - r[i] + f2 * (1.0 - t[i])).collect();
    let eta_prime: Vec<f64> = j.iter().map(|x| x - f2).collect();
    let eta_second = phi.iter().map(|p| 1.0 / (p * p)).collect();
    let (margin, at) = (0..=cells)
        .map(|i| (eta[i] - model.xi(t[i]), t[i]))
        .fold((f64::INFINITY, 0.0), |acc, x| if x.0 < acc.0 { x } else { acc });
    let residuals = BoundaryResiduals {
        eta_prime_zero: eta_prime[0] - (model.d1(0.0) - f2),
        eta_one: eta[cells] - xi1,
        eta_prime_one: eta_prime[cells] - model.d1(1.0),
        eta_zero: eta[0] - model.xi(0.0),
    };
    DualCertificate {
        field,
        t,
        phi,
        eta,
        eta_prime,
        eta_second,
        phi_slope_zero,
        inv_phi_integral,
        obstacle_margin: margin,
        argmin: at,
        residuals,
    }
}

/// Grid size used when an ansatz is certified.
pub const CERT_GRID: usize = 2000;

/// Build the formal conjugate of `phi`. Ansatz inputs are sampled on a grid
/// of [`CERT_GRID`] cells.
pub fn formal_conjugate<'a>(phi: impl Into<PhiRef<'a>>, model: &MixedModel, field: f64) -> Result<DualCertificate> {
    formal_conjugate_on(phi, model, field, CERT_GRID)
}

pub fn formal_conjugate_on<'a>(
    phi: impl Into<PhiRef<'a>>,
    model: &MixedModel,
    field: f64,
    ansatz_cells: usize,
) -> Result<DualCertificate> {
    match phi.into() {
        PhiRef::Grid(g) => {
            check_grid_positive(g)?;
            let h = g.step();
            let v = &g.values;
            let inv_sq: Vec<f64> = v.windows(2).map(|w| h / (w[0] * w[1])).collect();
            let moment: Vec<f64> = v
                .windows(2)
                .map(|w| h * h * (1.0 / (w[0] * w[1]) - inv_sq_linear_moment(w[0], w[1])))
                .collect();
            let slope0 = (v[1] - v[0]) / h;
            Ok(finish_certificate(
                model,
                field,
                v.clone(),
                inv_sq,
                moment,
                slope0,
                grid_inv_integral(v),
            ))
        }
        PhiRef::Ansatz(a) => {
            check_ansatz(a, model)?;
            let view = a.view(model);
            let cells = ansatz_cells.max(100);
            let h = 1.0 / cells as f64;
            let t = GridFunction::uniform_grid(cells);
            let phi: Vec<f64> = t.iter().map(|&x| view.value(x)).collect();
            let pts = view.breakpoints();
            let mut inv_sq = Vec::with_capacity(cells);
            let mut moment = Vec::with_capacity(cells);
            for i in 0..cells {
                let (lo, hi) = (t[i], t[i + 1]);
                let curved = view.segment_on(lo, hi).is_some()
                    || pts.iter().any(|&p| p > lo && p < hi);
                if curved {
                    let tol = 1e-15;
                    inv_sq.push(quad::integrate(|s| view.value(s).powi(-2), lo, hi, tol).0);
                    moment.push(quad::integrate(|s| (hi - s) * view.value(s).powi(-2), lo, hi, tol).0);
                } else {
                    let (pa, pb) = (phi[i], phi[i + 1]);
                    inv_sq.push(h / (pa * pb));
                    moment.push(h * h * (1.0 / (pa * pb) - inv_sq_linear_moment(pa, pb)));
                }
            }
            let (_, inv) = ansatz_integrals(&view, PieceRule::Adaptive(1e-13));
            Ok(finish_certificate(model, field, phi, inv_sq, moment, -view.density(0.0), inv))
        }
    }
}

impl DualCertificate {
    pub fn cells(&self) -> usize {
        self.t.len() - 1
    }

    /// Cubic Hermite interpolation of `eta` from nodal values and slopes.
    pub fn eta_at(&self, x: f64) -> f64 {
        let g = self.cells();
        let h = 1.0 / g as f64;
        let pos = x.clamp(0.0, 1.0) * g as f64;
        let i = (pos.floor() as usize).min(g - 1);
        let s = pos - i as f64;
        let (y0, y1) = (self.eta[i], self.eta[i + 1]);
        let (d0, d1) = (self.eta_prime[i] * h, self.eta_prime[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1
    }

    /// `D(eta) = 2 int sqrt(eta'') = 2 int 1/phi`.
    pub fn dual_value(&self) -> f64 {
        2.0 * self.inv_phi_integral
    }

    /// Feasible for the obstacle problem within the scale-relative tolerance.
    pub fn is_feasible(&self, model: &MixedModel) -> bool {
        self.obstacle_margin >= -obstacle_tolerance(model)
    }

    /// Rows `t, phi, eta, xi, eta - xi, d` for plotting.
    pub fn plot_csv(&self, model: &MixedModel) -> String {
        let mut s = String::from("t,phi,eta,xi,eta_minus_xi,dfrak\n");
        for i in 0..self.t.len() {
            let t = self.t[i];
            let xi = model.xi(t);
            let d = model
                .dfrak(t)
                .map(|v| v.to_string())
                .unwrap_or_else(|_| "nan".into());
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                t,
                self.phi[i],
                self.eta[i],
                xi,
                self.eta[i] - xi,
                d
            ));
        }
        s
    }
}

/// `D(eta) = 2 int_0^1 sqrt(eta'')`.
pub fn dual_energy(cert: &DualCertificate) -> f64 {
    cert.dual_value()
}

/// Minimum of `eta - xi`, optionally refined by ternary search around the
/// grid minimizer. Returns `(margin, argmin)`.
pub fn obstacle_check(cert: &DualCertificate, model: &MixedModel, refine: bool) -> (f64, f64) {
    let (i_min, margin) = cert
        .t
        .iter()
        .enumerate()
        .map(|(i, &t)| (i, cert.eta[i] - model.xi(t)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    if !refine {
        return (margin, cert.t[i_min]);
    }
    let g = cert.cells();
    let gap = |x: f64| cert.eta_at(x) - model.xi(x);
    let mut lo = cert.t[i_min.saturating_sub(1)];
    let mut hi = cert.t[(i_min + 1).min(g)];
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if gap(m1) < gap(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let x = 0.5 * (lo + hi);
    let v = gap(x);
    if v < margin {
        (v, x)
    } else {
        (margin, cert.t[i_min])
    }
}

/// Natural boundary condition residuals of a candidate optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcReport {
    /// `|eta'(1) - xi'(1)|`
    pub right: f64,
    /// `min(|eta(0) - xi(0)|, |phi'(0)|)`
    pub left: f64,
}

impl BcReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.right <= tol && self.left <= tol
    }
}

pub fn natural_bc_check(cert: &DualCertificate) -> BcReport {
    BcReport {
        right: cert.residuals.eta_prime_one.abs(),
        left: cert.residuals.eta_zero.abs().min(cert.phi_slope_zero.abs()),
    }
}

/// Primal value, dual value of the formal conjugate, and their difference.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub gap: f64,
    pub p_value: f64,
    pub d_value: f64,
    pub cert: DualCertificate,
}

pub fn duality_gap<'a>(phi: impl Into<PhiRef<'a>>, model: &MixedModel, field: f64) -> Result<GapReport> {
    let phi = phi.into();
    let p_value = primal_energy(phi, model, field)?;
    let cert = formal_conjugate(phi, model, field)?;
    let d_value = dual_energy(&cert);
    Ok(GapReport {
        gap: p_value - d_value,
        p_value,
        d_value,
        cert,
    })
}

/// JSON view of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub gap: f64,
    pub obstacle_margin: f64,
    pub argmin: f64,
    pub bc_residuals: BcSummary,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "GSE")]
    pub gse: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcSummary {
    pub eta_prime_zero: f64,
    pub eta_one: f64,
    pub eta_prime_one: f64,
    pub eta_zero: f64,
    pub phi_slope_zero: f64,
    pub natural_right: f64,
    pub natural_left: f64,
}

impl GapReport {
    pub fn summary(&self, model: &MixedModel) -> CertificateSummary {
        let (margin, argmin) = obstacle_check(&self.cert, model, true);
        let bc = natural_bc_check(&self.cert);
        let r = self.cert.residuals;
        CertificateSummary {
            gap: self.gap,
            obstacle_margin: margin,
            argmin,
            bc_residuals: BcSummary {
                eta_prime_zero: r.eta_prime_zero,
                eta_one: r.eta_one,
                eta_prime_one: r.eta_prime_one,
                eta_zero: r.eta_zero,
                phi_slope_zero: self.cert.phi_slope_zero,
                natural_right: bc.right,
                natural_left: bc.left,
            },
            p: self.p_value,
            d: self.d_value,
            gse: 0.5 * self.p_value,
            certified: margin >= -obstacle_tolerance(model),
        }
    }
}

// ---------------------------------------------------------------------------
// Finite temperature.

/// Cumulative distribution `F_i = mu[0, t_i]` of a probability measure with
/// atoms on the uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteBetaMeasure {
    pub t: Vec<f64>,
    pub cdf: Vec<f64>,
    pub beta: f64,
    pub field: f64,
}

/// Values within this distance of 1 are treated as full mass.
pub const CDF_ONE_TOL: f64 = 1e-12;

impl FiniteBetaMeasure {
    pub fn new(cdf: Vec<f64>, beta: f64, field: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidArgument(format!("beta = {beta} must be positive")));
        }
        if field < 0.0 {
            return Err(Error::InvalidArgument("field must be non-negative".into()));
        }
        if cdf.len() < 3 {
            return Err(Error::Support("need at least two cells".into()));
        }
        let mut cdf = cdf;
        for i in 0..cdf.len() {
            if !(cdf[i] >= 0.0 && cdf[i] <= 1.0 + CDF_ONE_TOL) {
                return Err(Error::Support(format!("cdf[{i}] = {} outside [0, 1]", cdf[i])));
            }
            if i > 0 && cdf[i] < cdf[i - 1] - 1e-15 {
                return Err(Error::Support(format!("cdf decreases at index {i}")));
            }
            if cdf[i] >= 1.0 - CDF_ONE_TOL {
                cdf[i] = 1.0;
            }
        }
        let g = cdf.len() - 1;
        if cdf[g] != 1.0 {
            return Err(Error::Support("cdf must end at 1".into()));
        }
        if cdf[g - 1] != 1.0 {
            return Err(Error::Support("mass at t = 1: the support must stay inside [0, 1)".into()));
        }
        Ok(Self {
            t: GridFunction::uniform_grid(g),
            cdf,
            beta,
            field,
        })
    }

    pub fn cells(&self) -> usize {
        self.cdf.len() - 1
    }

    /// Index of `q* = sup supp mu`.
    pub fn q_star_index(&self) -> usize {
        self.cdf.iter().position(|&f| f == 1.0).expect("validated")
    }

    pub fn q_star(&self) -> f64 {
        self.t[self.q_star_index()]
    }

    /// Atom masses `mu({t_i})`.
    pub fn masses(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.cdf.len());
        let mut prev = 0.0;
        for &f in &self.cdf {
            out.push(f - prev);
            prev = f;
        }
        out
    }

    /// `mu_hat(t_i) = int_{t_i}^1 mu[0, s] ds` (piecewise linear in between).
    pub fn mu_hat(&self) -> Vec<f64> {
        let g = self.cells();
        let h = 1.0 / g as f64;
        let mut out = vec![0.0; g + 1];
        for i in (0..g).rev() {
            out[i] = out[i + 1] + h * self.cdf[i];
        }
        out
    }

    /// `int f dmu`.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.masses().iter().zip(&self.t).map(|(m, &t)| m * f(t)).sum()
    }
}

/// Crisanti-Sommers functional through the `q* < 1` form
/// `1/2 (beta^2 int xi' mu[0,s] + h^2 mu_hat(0) + int_0^{q*} 1/mu_hat + log(1 - q*))`.
pub fn cs_energy(mu: &FiniteBetaMeasure, model: &MixedModel) -> Result<f64> {
    let g = mu.cells();
    let h = 1.0 / g as f64;
    let k = mu.q_star_index();
    if k >= g {
        return Err(Error::Support("q* = 1".into()));
    }
    let hat = mu.mu_hat();
    let drift: f64 = (0..g)
        .map(|i| mu.cdf[i] * (model.xi(mu.t[i + 1]) - model.xi(mu.t[i])))
        .sum();
    let entropy: f64 = (0..k).map(|i| h * inv_linear(hat[i], hat[i + 1])).sum::<f64>() + (1.0 - mu.t[k]).ln();
    let b2 = mu.beta * mu.beta;
    Ok(0.5 * (b2 * drift + mu.field * mu.field * hat[0] + entropy))
}

/// The same functional in its original form
/// `1/2 (beta^2 int xi'' mu_hat + int (1/mu_hat - 1/(1-s)) + h^2 mu_hat(0))`,
/// integrated cell by cell with adaptive quadrature.
pub fn cs_energy_direct(mu: &FiniteBetaMeasure, model: &MixedModel) -> Result<f64> {
    let g = mu.cells();
    let h = 1.0 / g as f64;
    let k = mu.q_star_index();
    if k >= g {
        return Err(Error::Support("q* = 1".into()));
    }
    let hat = mu.mu_hat();
    let mut drift = 0.0;
    let mut entropy = 0.0;
    for i in 0..g {
        let (a, b) = (mu.t[i], mu.t[i + 1]);
        let (ha, hb) = (hat[i], hat[i + 1]);
        let lin = move |s: f64| ha + (hb - ha) * (s - a) / h;
        drift += quad::integrate(|s| model.d2(s) * lin(s), a, b, 1e-16).0;
        if i < k {
            entropy += quad::integrate(|s| 1.0 / lin(s) - 1.0 / (1.0 - s), a, b, 1e-16).0;
        }
    }
    let b2 = mu.beta * mu.beta;
    Ok(0.5 * (b2 * drift + entropy + mu.field * mu.field * hat[0]))
}
