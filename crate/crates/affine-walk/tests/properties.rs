use affine_walk::estimates::{estimate_rank2, estimate_weighted};
use affine_walk::exppoly::{h_poly, int, rat, ExpPoly};
use affine_walk::fourier_kernel::{density_contour, QuadratureConfig};
use affine_walk::phase::{dphi_check, random_deltas, LogSumExp, PhaseProblem};
use affine_walk::radial_dp::{density_dp, RadialChain};
use affine_walk::root_system::{AmbientVector, RootSystem};
use affine_walk::special_fn::{SphericalF0, WalkParams};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn small_poly(rank: usize, terms: &[(Vec<i64>, i64)]) -> ExpPoly {
    let mut p = ExpPoly::zero(rank);
    for (k, c) in terms {
        p = &p + &ExpPoly::exp_weight(rank, k).scale(&int(*c));
    }
    p
}

fn terms_strategy(rank: usize) -> impl Strategy<Value = Vec<(Vec<i64>, i64)>> {
    prop::collection::vec((prop::collection::vec(-3i64..=3, rank), -5i64..=5), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairing_is_weyl_invariant(
        a in prop::collection::vec(-2.0f64..2.0, 3),
        b in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let rs = RootSystem::new(3).unwrap();
        let (u, v) = (AmbientVector::from_weight_coords(&rs, &a), AmbientVector::from_weight_coords(&rs, &b));
        let base = u.dot(&v);
        for w in rs.weyl_group() {
            let d = u.permuted(&w).dot(&v.permuted(&w));
            prop_assert!((d - base).abs() < 1e-12 * (1.0 + base.abs()));
        }
    }

    #[test]
    fn pi_is_skew_invariant(x in prop::collection::vec(-4.0f64..4.0, 3)) {
        let rs = RootSystem::new(3).unwrap();
        let z = AmbientVector::from_weight_coords(&rs, &x);
        let base = rs.pi_f64(&x);
        prop_assume!(rs.positive_roots().iter().all(|a| a.pair_f64(&x).abs() > 0.05));
        for w in rs.weyl_group() {
            let v = rs.pi_f64(&z.permuted(&w).weight_coords()) * w.sign() as f64;
            prop_assert!((v - base).abs() <= 1e-12 * base.abs());
        }
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(
        a in terms_strategy(2),
        b in terms_strategy(2),
        z in prop::collection::vec(-0.7f64..0.7, 2),
    ) {
        let (p, q) = (small_poly(2, &a), small_poly(2, &b));
        let prod = (&p * &q).eval_real(&z);
        let sum = (&p + &q).eval_real(&z);
        let (pv, qv) = (p.eval_real(&z), q.eval_real(&z));
        prop_assert!((prod - pv * qv).abs() < 1e-9 * (1.0 + (pv * qv).abs()));
        prop_assert!((sum - pv - qv).abs() < 1e-9 * (1.0 + pv.abs() + qv.abs()));
    }

    #[test]
    fn pi_partial_is_order_independent(a in terms_strategy(2), rot in 0usize..3) {
        let rs = RootSystem::new(2).unwrap();
        let p = small_poly(2, &a);
        let mut order = rs.positive_roots();
        order.rotate_left(rot);
        prop_assert_eq!(p.pi_partial(&rs), p.pi_partial_ordered(&order));
    }

    #[test]
    fn phase_round_trip(d in prop::collection::vec(0.0f64..1.0, 2), scale in 0.0f64..0.995) {
        let p = WalkParams::distinguished(2, 2).unwrap();
        let norm = d[0] + d[1];
        prop_assume!(norm > 1e-9);
        let delta: Vec<f64> = d.iter().map(|v| v / norm * scale).collect();
        let sol = PhaseProblem::new(&p, &delta).unwrap().solve().unwrap();
        let back = LogSumExp::new(&p).log_gradient(&sol.s_root);
        for k in 0..2 {
            prop_assert!((back[k] - delta[k]).abs() < 1e-12, "{:?} {:?}", back, delta);
        }
    }

    #[test]
    fn diagonal_delta_has_diagonal_saddle(t in 0.0f64..0.4995) {
        let p = WalkParams::distinguished(2, 3).unwrap();
        let sol = PhaseProblem::new(&p, &[t, t]).unwrap().solve().unwrap();
        prop_assert!((sol.s_weight[0] - sol.s_weight[1]).abs() < 1e-9 * (1.0 + sol.s_weight[0].abs()));
    }
}

#[test]
fn dphi_matches_minus_s_on_random_deltas() {
    let p = WalkParams::distinguished(2, 2).unwrap();
    for d in random_deltas(2, 50, 0.95, 42) {
        let prob = PhaseProblem::new(&p, &d).unwrap();
        assert!(dphi_check(&prob).unwrap() <= 1e-5, "{d:?}");
    }
}

fn ratio_table(chain: &RadialChain) -> Vec<([i64; 2], f64)> {
    let p0 = chain.density(&[0, 0]).unwrap();
    let mut out = Vec::new();
    for a in 0..=4i64 {
        for b in 0..=4 - a {
            out.push((
                [a, b],
                (chain.density(&[a, b]).unwrap() / &p0).to_f64().unwrap(),
            ));
        }
    }
    out
}

#[test]
fn density_ratio_approaches_spherical_function() {
    let p = WalkParams::distinguished(2, 2).unwrap();
    let f0 = SphericalF0::new(p.root_system(), 2);
    let mut chain = RadialChain::new(&p, 400).unwrap();
    let mut tables = Vec::new();
    for n in [100, 200, 400] {
        while chain.time() < n {
            chain.step().unwrap();
        }
        tables.push(ratio_table(&chain));
    }
    let err = |t: &[([i64; 2], f64)]| {
        t.iter()
            .map(|(x, r)| (r / f0.value(x) - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let raw: Vec<f64> = tables.iter().map(|t| err(t)).collect();
    assert!(raw[1] < 0.65 * raw[0] && raw[2] < 0.65 * raw[1], "{raw:?}");
    let combine = |w: [f64; 3]| -> Vec<([i64; 2], f64)> {
        (0..tables[0].len())
            .map(|i| {
                (
                    tables[0][i].0,
                    w[0] * tables[0][i].1 + w[1] * tables[1][i].1 + w[2] * tables[2][i].1,
                )
            })
            .collect()
    };
    let two = err(&combine([0.0, -1.0, 2.0]));
    let three = err(&combine([1.0 / 3.0, -2.0, 8.0 / 3.0]));
    assert!(two < 0.25 * raw[2] && three < two, "{two} {three}");
}

#[test]
fn weighted_dp_matches_contour() {
    let p = WalkParams::weighted(2, rat(1, 3)).unwrap();
    let cfg = QuadratureConfig::default();
    for (n, x) in [(4u64, [1i64, 0]), (6, [2, 1]), (10, [3, 3]), (12, [0, 5])] {
        let exact = density_dp(&p, n as usize, &x).unwrap().to_f64().unwrap();
        let four = density_contour(&p, n, &x, &cfg).unwrap().value();
        assert!(
            (four - exact).abs() < 1e-6 * exact,
            "{n} {x:?} {four} {exact}"
        );
    }
}

#[test]
fn weighted_estimate_is_finite() {
    let p = WalkParams::weighted(2, rat(1, 3)).unwrap();
    let f0 = SphericalF0::new(p.root_system(), 2);
    let e = estimate_weighted(&p, &f0, 20, &[2, 3], 0.3, 0.0).unwrap();
    assert!(e.log_value.is_finite());
}

#[test]
fn estimate_is_continuous_along_rays() {
    let p = WalkParams::distinguished(2, 2).unwrap();
    let n = 200;
    for dir in [[1i64, 0], [0, 1], [1, 1], [2, 1]] {
        let step = dir[0] + dir[1];
        let vals: Vec<f64> = (0..)
            .map(|k| [dir[0] * k, dir[1] * k])
            .take_while(|x| x[0] + x[1] <= n as i64 - 5)
            .map(|x| estimate_rank2(&p, n, &x).unwrap().log_value)
            .collect();
        for (k, w) in vals.windows(3).enumerate().skip(2) {
            let d2 = w[2] - 2.0 * w[1] + w[0];
            assert!(d2.abs() < 0.5 * (step * step) as f64, "{dir:?} k={k}: {d2}");
        }
    }
}

#[test]
fn h_at_zero_counts_neighbours() {
    for r in 1..=4 {
        let rs = RootSystem::new(r).unwrap();
        let z = vec![Complex64::new(0.0, 0.0); r];
        let v = h_poly(&rs).eval_complex(&z).re;
        assert_eq!(v, (2f64.powi(r as i32 + 1)) - 2.0);
    }
}
