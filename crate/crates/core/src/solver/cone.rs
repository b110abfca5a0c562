//! Active-set Newton method for
//! `F(psi) = sum_i w_i psi_i + h sum_i I(psi_i, psi_{i+1})`, `I(a, b) = int_0^1 dv/(a + (b-a) v)`,
//! over concave, non-increasing, piecewise-linear `psi` on a uniform grid.
//!
//! Feasible points are `psi = end + sum_j rho_j (T - max(t_j, t))` with
//! `rho >= 0`; the active set is the set of knots carrying a kink. On a fixed
//! active set `psi` is parametrized by its values at the kinks, which makes
//! the reduced Hessian tridiagonal.

use crate::error::{Error, Result};
use crate::functionals::{inv_linear, inv_linear_grad};
use crate::quad::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum End {
    /// `psi_n = c` free with `c >= floor`.
    Free { floor: f64 },
    /// `psi_n` fixed and every slope `>= -1`.
    Fixed { value: f64 },
}

pub(crate) struct Cone<'a> {
    pub h: f64,
    pub weights: &'a [f64],
    pub end: End,
    pub tol: f64,
    pub max_iter: usize,
}

/// Kink structure: breakpoint node indices `bp` (first 0, last `n`) and the
/// values there. `flat`: zero slope on the first piece (no kink at 0).
/// `tied`: last slope pinned at `-1`.
#[derive(Debug, Clone)]
pub(crate) struct Face {
    pub bp: Vec<usize>,
    pub v: Vec<f64>,
    pub flat: bool,
    pub tied: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct ConeSolution {
    pub psi: Vec<f64>,
    /// `(node, rho)` for every kink, including node 0.
    pub kinks: Vec<(usize, f64)>,
    pub iterations: usize,
}

impl Face {
    /// Face of a (numerically) concave nodal vector.
    pub fn from_nodes(psi: &[f64], h: f64, end: End) -> Self {
        let n = psi.len() - 1;
        let slope = |i: usize| (psi[i + 1] - psi[i]) / h;
        let scale = psi.iter().fold(0.0f64, |a, b| a.max(b.abs())) / h;
        let eps = 1e-13 * scale.max(1.0);
        let mut bp = vec![0];
        for j in 1..n {
            if slope(j - 1) - slope(j) > eps {
                bp.push(j);
            }
        }
        bp.push(n);
        let mut v: Vec<f64> = bp.iter().map(|&i| psi[i]).collect();
        let k = bp.len() - 1;
        let first = (v[1] - v[0]) / (bp[1] as f64 * h);
        let flat = first > -eps;
        if flat {
            v[0] = v[1];
        }
        let mut tied = false;
        if let End::Fixed { value } = end {
            v[k] = value;
            let len = (bp[k] - bp[k - 1]) as f64 * h;
            if (v[k] - v[k - 1]) / len < -1.0 + 1e-12 {
                tied = true;
                v[k - 1] = value + len;
                if k == 1 {
                    return Face { bp, v, flat: false, tied };
                }
            }
        }
        Face { bp, v, flat, tied }
    }
}

const HESS_NODES: usize = 8;

impl<'a> Cone<'a> {
    fn n(&self) -> usize {
        self.weights.len() - 1
    }

    fn value(&self, psi: &[f64]) -> f64 {
        let lin: f64 = self.weights.iter().zip(psi).map(|(w, p)| w * p).sum();
        let inv: f64 = psi.windows(2).map(|w| inv_linear(w[0], w[1])).sum();
        lin + self.h * inv
    }

    fn node_gradient(&self, psi: &[f64]) -> Vec<f64> {
        let mut g = self.weights.to_vec();
        for i in 0..psi.len() - 1 {
            let (ga, gb) = inv_linear_grad(psi[i], psi[i + 1]);
            g[i] += self.h * ga;
            g[i + 1] += self.h * gb;
        }
        g
    }

    fn node_hessian(&self, psi: &[f64], gl: &GaussLegendre) -> (Vec<f64>, Vec<f64>) {
        let n = psi.len() - 1;
        let mut diag = vec![0.0; n + 1];
        let mut off = vec![0.0; n];
        for i in 0..n {
            let (a, b) = (psi[i], psi[i + 1]);
            let (mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0);
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                let v = 0.5 * (x + 1.0);
                let l = a + (b - a) * v;
                let k = 2.0 * 0.5 * w / (l * l * l);
                haa += k * (1.0 - v) * (1.0 - v);
                hab += k * v * (1.0 - v);
                hbb += k * v * v;
            }
            diag[i] += self.h * haa;
            diag[i + 1] += self.h * hbb;
            off[i] += self.h * hab;
        }
        (diag, off)
    }

    // Free-variable index of every breakpoint value; `None` means determined
    // by the end condition.
    fn vars(&self, face: &Face) -> (Vec<Option<usize>>, usize) {
        let k = face.bp.len() - 1;
        let mut vars = vec![None; k + 1];
        let mut next = 0;
        for idx in 0..=k {
            let fixed = match idx {
                _ if idx == k => matches!(self.end, End::Fixed { .. }),
                _ if idx == k - 1 && face.tied => true,
                _ => false,
            };
            if idx == 0 && face.flat {
                continue;
            }
            if !fixed {
                vars[idx] = Some(next);
                next += 1;
            }
        }
        if face.flat {
            vars[0] = vars[1];
        }
        (vars, next)
    }

    fn apply(&self, face: &Face, vars: &[Option<usize>], x: &[f64]) -> Vec<f64> {
        let k = face.bp.len() - 1;
        let h = self.h;
        let mut v = face.v.clone();
        for idx in 0..=k {
            if let Some(p) = vars[idx] {
                v[idx] = x[p];
            }
        }
        if let End::Fixed { value } = self.end {
            v[k] = value;
            if face.tied {
                v[k - 1] = value + (face.bp[k] - face.bp[k - 1]) as f64 * h;
            }
        }
        if face.flat {
            v[0] = v[1];
        }
        v
    }

    fn nodes(&self, face: &Face, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut psi = vec![0.0; n + 1];
        for s in 0..face.bp.len() - 1 {
            let (i0, i1) = (face.bp[s], face.bp[s + 1]);
            let len = (i1 - i0) as f64;
            for i in i0..=i1 {
                let th = (i - i0) as f64 / len;
                psi[i] = (1.0 - th) * v[s] + th * v[s + 1];
            }
        }
        psi
    }

    // Constraint values (must stay >= 0) of a breakpoint vector, tagged by
    // what activating them means.
    fn constraints(&self, face: &Face, v: &[f64]) -> Vec<(Activation, f64)> {
        let k = face.bp.len() - 1;
        let h = self.h;
        let sig: Vec<f64> = (0..k)
            .map(|s| (v[s + 1] - v[s]) / ((face.bp[s + 1] - face.bp[s]) as f64 * h))
            .collect();
        let mut out = Vec::with_capacity(k + 2);
        for s in 1..k {
            out.push((Activation::DropKink(s), sig[s - 1] - sig[s]));
        }
        if !face.flat {
            out.push((Activation::Flatten, -sig[0]));
        }
        match self.end {
            End::Free { floor } => out.push((Activation::Floor, v[k] - floor)),
            End::Fixed { .. } => {
                if !face.tied {
                    out.push((Activation::Tie, sig[k - 1] + 1.0));
                }
            }
        }
        out
    }

    /// Derivatives of `F` along every ray `T - max(t_j, t)`, `j = 0..n-1`.
    fn ray_derivatives(&self, g: &[f64]) -> Vec<f64> {
        let n = self.n();
        let h = self.h;
        let t_end = n as f64 * h;
        let mut suffix = vec![0.0; n + 2];
        for i in (0..=n).rev() {
            suffix[i] = suffix[i + 1] + g[i] * (t_end - i as f64 * h);
        }
        let mut prefix = 0.0;
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            prefix += g[j];
            out.push((t_end - j as f64 * h) * prefix + suffix[j + 1]);
        }
        out
    }

    pub fn solve(&self, mut face: Face) -> Result<ConeSolution> {
        let n = self.n();
        let gl = GaussLegendre::new(HESS_NODES);
        let mut iterations = 0;
        loop {
            // Newton on the current face
            let mut prev_dec = f64::INFINITY;
            let psi = loop {
                iterations += 1;
                if iterations > self.max_iter {
                    return Err(Error::NonConvergence {
                        what: "cone minimization".into(),
                        iterations,
                    });
                }
                let psi = self.nodes(&face, &face.v);
                let f0 = self.value(&psi);
                let scale = f0.abs().max(1.0);
                let (vars, m) = self.vars(&face);
                if m == 0 {
                    break psi;
                }
                let g = self.node_gradient(&psi);
                let (td, to) = self.node_hessian(&psi, &gl);
                let (gx, hd, ho) = reduce(&face, &vars, m, &g, &td, &to);
                let d = solve_tridiagonal(&hd, &ho, &gx.iter().map(|x| -x).collect::<Vec<_>>());
                let dec: f64 = -gx.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
                let tiny = dec < 1e-10 * scale;
                if !(dec > (self.tol * scale).powi(2)) || (tiny && dec > 0.25 * prev_dec) {
                    break psi;
                }
                prev_dec = dec;
                let mut x0 = vec![0.0; m];
                for (idx, var) in vars.iter().enumerate() {
                    if let Some(p) = var {
                        x0[*p] = face.v[idx];
                    }
                }
                let at = |alpha: f64| -> Vec<f64> {
                    let x: Vec<f64> = x0.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
                    self.apply(&face, &vars, &x)
                };
                // ratio test
                let c0 = self.constraints(&face, &face.v);
                let c1 = self.constraints(&face, &at(1.0));
                let mut alpha_max = f64::INFINITY;
                let mut blocker = None;
                for ((act, a), (_, b)) in c0.iter().zip(&c1) {
                    let delta = b - a;
                    if delta < 0.0 {
                        let r = a.max(0.0) / -delta;
                        if r < alpha_max {
                            alpha_max = r;
                            blocker = Some(*act);
                        }
                    }
                }
                let mut alpha = alpha_max.min(1.0);
                let mut hit = alpha_max <= 1.0;
                if hit && blocker == Some(Activation::Floor) {
                    alpha *= 0.9;
                    hit = false;
                }
                let mut accepted = None;
                if hit && alpha < 1e-10 {
                    // degenerate: the blocking constraint is already active to rounding
                    accepted = Some(at(alpha));
                }
                for trial in 0..80 {
                    if accepted.is_some() {
                        break;
                    }
                    let first = trial == 0;
                    let v = at(alpha);
                    let f = self.value(&self.nodes(&face, &v));
                    if f <= f0 - 1e-4 * alpha * dec || (hit && f <= f0) || (tiny && first && f <= f0 + 1e-12 * scale) {
                        accepted = Some(v);
                        break;
                    }
                    alpha *= 0.5;
                    hit = false;
                }
                let Some(v) = accepted else { break psi };
                face.v = v;
                if hit {
                    prev_dec = f64::INFINITY;
                    match blocker.expect("blocking constraint") {
                        Activation::DropKink(s) => {
                            face.bp.remove(s);
                            face.v.remove(s);
                            if face.flat && s == 1 {
                                face.v[0] = face.v[1];
                            }
                        }
                        Activation::Flatten => {
                            face.flat = true;
                            face.v[0] = face.v[1];
                        }
                        Activation::Tie => {
                            face.tied = true;
                            let k = face.bp.len() - 1;
                            face.v[k - 1] = face.v[k] + (face.bp[k] - face.bp[k - 1]) as f64 * self.h;
                            if k == 1 {
                                face.flat = false;
                            }
                        }
                        Activation::Floor => {}
                    }
                }
            };

            // optimality across faces
            let f0 = self.value(&psi);
            let tol = 0.1 * self.tol * f0.abs().max(1.0);
            let g = self.node_gradient(&psi);
            let lam = self.ray_derivatives(&g);
            let k = face.bp.len() - 1;
            let mut active = vec![false; n];
            if !face.flat {
                active[0] = true;
            }
            for s in 1..k {
                active[face.bp[s]] = true;
            }
            let nu = if face.tied {
                let (sum, cnt) = (0..n)
                    .filter(|&j| active[j])
                    .fold((0.0, 0usize), |acc, j| (acc.0 + lam[j], acc.1 + 1));
                -sum / cnt.max(1) as f64
            } else {
                0.0
            };
            if face.tied && nu < -tol {
                face.tied = false;
                continue;
            }
            let viol: Vec<f64> = (0..n).map(|j| if active[j] { 0.0 } else { lam[j] + nu }).collect();
            let mut added = Vec::new();
            let mut j = 0;
            while j < n {
                if viol[j] < -tol {
                    let start = j;
                    while j < n && viol[j] < -tol {
                        j += 1;
                    }
                    for i in start..j {
                        let left = if i > start { viol[i - 1] } else { f64::INFINITY };
                        let right = if i + 1 < j { viol[i + 1] } else { f64::INFINITY };
                        if viol[i] <= left && viol[i] <= right {
                            added.push(i);
                        }
                    }
                } else {
                    j += 1;
                }
            }
            if added.is_empty() {
                let kinks = kinks_of(&face, &psi, self.h);
                return Ok(ConeSolution {
                    psi,
                    kinks,
                    iterations,
                });
            }
            for &j in &added {
                if j == 0 {
                    face.flat = false;
                } else {
                    let pos = face.bp.partition_point(|&b| b < j);
                    face.bp.insert(pos, j);
                    face.v.insert(pos, psi[j]);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Activation {
    DropKink(usize),
    Flatten,
    Tie,
    Floor,
}

fn kinks_of(face: &Face, psi: &[f64], h: f64) -> Vec<(usize, f64)> {
    let slope = |i: usize| (psi[i + 1] - psi[i]) / h;
    let mut out = Vec::new();
    if !face.flat {
        out.push((0, -slope(0)));
    }
    for &j in &face.bp[1..face.bp.len() - 1] {
        out.push((j, slope(j - 1) - slope(j)));
    }
    out
}

// Reduced gradient and tridiagonal Hessian in the free breakpoint values.
fn reduce(
    face: &Face,
    vars: &[Option<usize>],
    m: usize,
    g: &[f64],
    td: &[f64],
    to: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0; m];
    let mut hd = vec![0.0; m];
    let mut ho = vec![0.0; m.saturating_sub(1)];
    let n = g.len() - 1;
    // (var, weight) pairs per node, at most two
    let mut rows: Vec<[(usize, f64); 2]> = Vec::with_capacity(n + 1);
    let none = (usize::MAX, 0.0);
    let mut s = 0;
    for i in 0..=n {
        while s + 1 < face.bp.len() - 1 && face.bp[s + 1] <= i {
            s += 1;
        }
        let (i0, i1) = (face.bp[s], face.bp[s + 1]);
        let th = (i - i0) as f64 / (i1 - i0) as f64;
        let mut row = [none, none];
        let mut put = |var: Option<usize>, w: f64| {
            if let (Some(p), true) = (var, w != 0.0) {
                if row[0].0 == p {
                    row[0].1 += w;
                } else if row[0].0 == usize::MAX {
                    row[0] = (p, w);
                } else if row[1].0 == p {
                    row[1].1 += w;
                } else {
                    row[1] = (p, w);
                }
            }
        };
        put(vars[s], 1.0 - th);
        put(vars[s + 1], th);
        rows.push(row);
    }
    let add = |p: usize, q: usize, val: f64, hd: &mut Vec<f64>, ho: &mut Vec<f64>| {
        if p == q {
            hd[p] += val;
        } else {
            let lo = p.min(q);
            debug_assert_eq!(p.max(q), lo + 1);
            ho[lo] += val;
        }
    };
    for i in 0..=n {
        for &(p, wp) in &rows[i] {
            if p == usize::MAX {
                continue;
            }
            gx[p] += wp * g[i];
            for &(q, wq) in &rows[i] {
                if q == usize::MAX || q < p {
                    continue;
                }
                add(p, q, wp * wq * td[i], &mut hd, &mut ho);
            }
            if i < n {
                for &(q, wq) in &rows[i + 1] {
                    if q == usize::MAX {
                        continue;
                    }
                    let val = wp * wq * to[i];
                    add(p, q, if p == q { 2.0 * val } else { val }, &mut hd, &mut ho);
                }
            }
        }
    }
    (gx, hd, ho)
}

/// Solve a symmetric tridiagonal system (diagonal `d`, off-diagonal `e`).
pub(crate) fn solve_tridiagonal(d: &[f64], e: &[f64], b: &[f64]) -> Vec<f64> {
    let m = d.len();
    let mut c = vec![0.0; m];
    let mut x = b.to_vec();
    let mut piv = d[0];
    x[0] /= piv;
    for i in 1..m {
        c[i - 1] = e[i - 1] / piv;
        piv = d[i] - e[i - 1] * c[i - 1];
        x[i] = (x[i] - e[i - 1] * x[i - 1]) / piv;
    }
    for i in (0..m - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}
