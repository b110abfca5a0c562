use proptest::prelude::*;

use sphgse::functionals::cs_energy_direct;
use sphgse::model::Term;
use sphgse::order_param::validate;
use sphgse::solver::{grid_minimize, RampObjective};
use sphgse::{
    cs_energy, duality_gap, primal_energy, to_grid, FiniteBetaMeasure, GridFunction, MixedModel,
    OrderParamAnsatz, Sign,
};

fn model() -> impl Strategy<Value = MixedModel> {
    prop::collection::btree_map(2u32..=10, 0.05f64..2.0, 1..=3)
        .prop_map(|m| MixedModel::new(m.into_iter().map(|(p, beta_sq)| Term { p, beta_sq }).collect()).unwrap())
}

fn ansatz() -> impl Strategy<Value = OrderParamAnsatz> {
    (0.05f64..2.0, prop::collection::btree_map(0u32..1000, 0.01f64..2.0, 0..4)).prop_map(|(c, atoms)| {
        OrderParamAnsatz {
            c,
            atoms: atoms.into_iter().map(|(q, m)| (q as f64 / 1000.0, m)).collect(),
            frsb_segments: vec![],
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ansatz_grid_is_in_the_cone(m in model(), a in ansatz()) {
        let g = to_grid(&a, &m, 600).unwrap();
        prop_assert!(validate(&g).is_valid());
        let pa = primal_energy(&a, &m, 0.0).unwrap();
        let pg = primal_energy(&g, &m, 0.0).unwrap();
        prop_assert!((pa - pg).abs() < 1e-2 * pa.abs().max(1.0), "{} vs {}", pa, pg);
    }

    #[test]
    fn feasible_certificates_bound_from_below(m in model(), a in ansatz(), h in 0.0f64..1.0) {
        let r = duality_gap(&a, &m, h).unwrap();
        if r.cert.obstacle_margin >= 0.0 {
            prop_assert!(r.gap >= -1e-9 * r.p_value.abs().max(1.0));
        }
        prop_assert!((r.p_value - r.d_value - r.gap).abs() < 1e-12 * r.p_value.abs().max(1.0));
    }

    #[test]
    fn grid_minimizer_beats_feasible_points(m in model(), a in ansatz()) {
        let best = grid_minimize(&m, 0.0, 500, 1e-12).unwrap();
        let g = to_grid(&a, &m, 500).unwrap();
        prop_assert!(best.p_value <= primal_energy(&g, &m, 0.0).unwrap() + 1e-10);
        prop_assert!(best.obstacle_margin >= -1e-6 * (1.0 + m.xi(1.0)));
    }

    #[test]
    fn gse_scales_linearly(m in model(), lambda in 0.3f64..3.0) {
        let a = grid_minimize(&m, 0.0, 500, 1e-12).unwrap().gse;
        let b = grid_minimize(&m.scaled(lambda * lambda).unwrap(), 0.0, 500, 1e-12).unwrap().gse;
        prop_assert!((b - lambda * a).abs() < 1e-8 * lambda * a, "{} vs {}", b, lambda * a);
    }

    #[test]
    fn field_raises_energy(m in model(), h in 0.05f64..1.0) {
        let a = grid_minimize(&m, 0.0, 500, 1e-12).unwrap().gse;
        let b = grid_minimize(&m, h, 500, 1e-12).unwrap().gse;
        prop_assert!(b > a);
    }

    #[test]
    fn sign_profile_is_consistent(m in model()) {
        let prof = m.sign_intervals(1e-4, 1e-12).unwrap();
        prop_assert!(prof.boundaries.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(prof.boundaries.iter().all(|&b| b > 0.0 && b < 1.0));
        prop_assert_eq!(prof.intervals.len(), prof.boundaries.len() + 1);
        prop_assert!(prof.intervals.windows(2).all(|w| w[0].sign != w[1].sign));
        for iv in &prof.intervals {
            if iv.sign == Sign::Zero {
                continue;
            }
            let mid = 0.5 * (iv.left + iv.right);
            if m.d2(mid) > 0.0 {
                let d = m.dfrak(mid).unwrap();
                prop_assert_eq!(d > 0.0, iv.sign == Sign::Positive, "d({}) = {}", mid, d);
            }
        }
    }

    #[test]
    fn cs_energy_forms_agree(m in model(), beta in 0.5f64..20.0, h in 0.0f64..1.0,
                             raw in prop::collection::vec(0.0f64..1.0, 63)) {
        let mut cdf = raw;
        cdf.sort_by(f64::total_cmp);
        cdf.push(1.0);
        cdf.push(1.0);
        let mu = FiniteBetaMeasure::new(cdf, beta, h).unwrap();
        let a = cs_energy(&mu, &m).unwrap();
        let b = cs_energy_direct(&mu, &m).unwrap();
        prop_assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn ramp_gradient_is_a_descent_direction(m in model(), c in 0.1f64..2.0,
                                            rho in prop::collection::vec(0.0f64..0.01, 500)) {
        let obj = RampObjective::new(&m, 0.0, 500);
        let (dc, drho) = obj.gradient(c, &rho);
        let norm2 = dc * dc + drho.iter().map(|g| g * g).sum::<f64>();
        prop_assume!(norm2 > 1e-12);
        let step = 1e-6 / norm2.sqrt();
        let c2 = c - step * dc;
        let rho2: Vec<f64> = rho.iter().zip(&drho).map(|(r, g)| r - step * g).collect();
        prop_assume!(c2 > 0.0);
        prop_assert!(obj.value(c2, &rho2) < obj.value(c, &rho));
    }
}

#[test]
fn grid_csv_round_trip() {
    let g = GridFunction::from_fn(500, |t| 1.0 + 0.5 * (1.0 - t * t));
    let back = GridFunction::from_csv(&g.to_csv()).unwrap();
    assert_eq!(g, back);
}
