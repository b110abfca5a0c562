//! Classification sweeps over two-term families `mu t^p1 + (1 - mu) t^p2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::duality_gap;
use crate::model::{MixedModel, Term};
use crate::obstacle_tolerance;
use crate::onersb::{classify, criteria, solve_master, Class, CriteriaReport};

use super::grid_minimize;

/// Bisection width for located boundaries.
const BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub mu: f64,
    pub y: f64,
    pub m: f64,
    pub c: f64,
    pub replicon: f64,
    pub purelike_margin: f64,
    pub aba: Option<f64>,
    pub gse: f64,
    pub gap: f64,
    pub obstacle_margin: f64,
    pub certified: bool,
    pub class: Class,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Boundary {
    /// `purelike`, `replicon` or `class`.
    pub kind: String,
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable {
    pub low: u32,
    pub high: u32,
    pub rows: Vec<SweepRow>,
    pub boundaries: Vec<Boundary>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("mu,y,m,c,replicon,purelike_margin,gse,gap,obstacle_margin,class\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.mu,
                r.y,
                r.m,
                r.c,
                r.replicon,
                r.purelike_margin,
                r.gse,
                r.gap,
                r.obstacle_margin,
                r.class.as_str()
            ));
        }
        s
    }
}

pub fn family(low: u32, high: u32, mu: f64) -> Result<MixedModel> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::InvalidArgument(format!("mu = {mu} outside [0, 1)")));
    }
    Ok(MixedModel::new(vec![
        Term { p: low, beta_sq: mu },
        Term { p: high, beta_sq: 1.0 - mu },
    ])?
    .with_label(format!("{low}+{high} mu={mu}")))
}

fn flags(low: u32, high: u32, mu: f64) -> Result<CriteriaReport> {
    let m = family(low, high, mu)?;
    Ok(criteria(&m, &solve_master(&m)?))
}

fn row(low: u32, high: u32, mu: f64, cells: usize) -> Result<SweepRow> {
    let model = family(low, high, mu)?;
    let cl = classify(&model)?;
    let (gse, gap, obstacle_margin) = match cl.class {
        Class::OneRsb | Class::SkRs => {
            let r = duality_gap(&solve_master(&model)?.ansatz(), &model, 0.0)?;
            (cl.candidate_gse, r.gap, cl.obstacle_margin)
        }
        _ => {
            let g = grid_minimize(&model, 0.0, cells, 1e-12)?;
            (g.gse, g.gap, g.obstacle_margin)
        }
    };
    Ok(SweepRow {
        mu,
        y: cl.y,
        m: cl.m,
        c: cl.c,
        replicon: cl.replicon,
        purelike_margin: cl.purelike_margin,
        aba: cl.aba,
        gse,
        gap,
        obstacle_margin,
        certified: obstacle_margin >= -obstacle_tolerance(&model),
        class: cl.class,
    })
}

fn bisect_flag<T: PartialEq>(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<T>) -> Result<(f64, f64)> {
    let left = f(lo)?;
    while hi - lo > BOUNDARY_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? == left {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Sweep `mu t^low + (1 - mu) t^high` over `mu_grid`, locating every flag
/// or class change between consecutive grid values.
pub fn sweep_pair(low: u32, high: u32, mu_grid: &[f64], cells: usize) -> Result<SweepTable> {
    if low >= high || low < 2 {
        return Err(Error::InvalidArgument(format!("need 2 <= p1 < p2 (got {low}, {high})")));
    }
    let mut grid = mu_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&mu| row(low, high, mu, cells))
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (fa, fb) = (flags(low, high, a.mu)?, flags(low, high, b.mu)?);
        if fa.purelike_or_critical != fb.purelike_or_critical {
            jobs.push(("purelike", a.mu, b.mu));
        }
        if fa.replicon_nonneg != fb.replicon_nonneg {
            jobs.push(("replicon", a.mu, b.mu));
        }
        if a.class != b.class {
            jobs.push(("class", a.mu, b.mu));
        }
    }
    let boundaries = jobs
        .par_iter()
        .map(|&(kind, lo, hi)| {
            let (lo, hi) = match kind {
                "purelike" => bisect_flag(lo, hi, |mu| Ok(flags(low, high, mu)?.purelike_or_critical))?,
                "replicon" => bisect_flag(lo, hi, |mu| Ok(flags(low, high, mu)?.replicon_nonneg))?,
                _ => bisect_flag(lo, hi, |mu| Ok(classify(&family(low, high, mu)?)?.class))?,
            };
            Ok(Boundary {
                kind: kind.to_string(),
                mu_lo: lo,
                mu_hi: hi,
                mu: 0.5 * (lo + hi),
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepTable {
        low,
        high,
        rows,
        boundaries,
    })
}

/// The `mu t^2 + (1 - mu) t^p` family.
pub fn sweep_2p(p: u32, mu_grid: &[f64], cells: usize) -> Result<SweepTable> {
    if p < 3 {
        return Err(Error::InvalidArgument(format!("p = {p} must be >= 3")));
    }
    sweep_pair(2, p, mu_grid, cells)
}
