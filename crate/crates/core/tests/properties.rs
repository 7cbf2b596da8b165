use dphase::exponents::{is_valid, revalidate, derive};
use dphase::gehring::{gehring_constants, iteration_constant};
use dphase::grid::{Grid, GridFunction};
use dphase::harness::model_residual;
use dphase::io::{read_dpgrid, write_dpgrid};
use dphase::maximal::{hl, maximal_function, MaximalSpec};
use dphase::meanpoly::{fit, sample};
use dphase::report::{to_json_string, Report};
use dphase::suites::{holder_triple_error, random_configs, random_disc_mask};
use dphase::whitney::{cover, partition_of_unity, verify_cover, verify_partition};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn line(values: Vec<f64>) -> GridFunction {
    let g = Grid::cube(1, 0.0, 1.0, values.len());
    GridFunction::new(g, 1, values).unwrap()
}

fn samples(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn maximal_is_sublinear(a in samples(40), b in samples(40)) {
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (ma, mb, ms) = (hl(&line(a)), hl(&line(b)), hl(&line(sum)));
        for i in 0..40 {
            prop_assert!(ms.values[i] <= ma.values[i] + mb.values[i] + 1e-12);
        }
    }

    #[test]
    fn maximal_dominates_and_is_monotone(a in samples(40), bump in prop::collection::vec(0.0f64..5.0, 40)) {
        let big: Vec<f64> = a.iter().zip(&bump).map(|(x, d)| x.abs() + d).collect();
        let ma = hl(&line(a.clone()));
        let mb = hl(&line(big));
        for i in 0..40 {
            prop_assert!(ma.values[i] >= a[i].abs() - 1e-12);
            prop_assert!(mb.values[i] >= ma.values[i] - 1e-12);
        }
    }

    #[test]
    fn maximal_homogeneous_under_powers_of_two(a in samples(40), k in -4i32..4) {
        let c = 2f64.powi(k);
        let f = line(a);
        let spec = MaximalSpec::fractional(0.5);
        let m1 = maximal_function(&f, &spec).unwrap();
        let m2 = maximal_function(&f.map(|v| -c * v), &spec).unwrap();
        for (x, y) in m1.values.iter().zip(&m2.values) {
            prop_assert_eq!((c * x).to_bits(), y.to_bits());
        }
    }

    #[test]
    fn mean_polynomial_is_linear(a in samples(64), b in samples(64), s in -3.0f64..3.0) {
        let g = Grid::cube(1, -1.0, 1.0, 64);
        let eta = g.sample(|x| 1.0 - 0.5 * x[0] * x[0]).unwrap();
        let mask = g.ball_mask(&[0.0], 0.8);
        let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
        let f = |v: Vec<f64>| fit(&GridFunction::new(g.clone(), 1, v).unwrap(), &mask, &eta, 3, &[0.1]).unwrap();
        let (pa, pb, pc) = (f(a), f(b), f(combo));
        for (sigma, c) in &pc.coeffs {
            let want = pa.coeffs[sigma][0] + s * pb.coeffs[sigma][0];
            prop_assert!((c[0] - want).abs() <= 1e-9 * (1.0 + want.abs()), "{:?}: {} vs {}", sigma, c[0], want);
        }
    }

    #[test]
    fn mean_polynomial_is_idempotent(a in samples(64), m in 1usize..4) {
        let g = Grid::cube(1, -1.0, 1.0, 64);
        let eta = g.sample(|_| 1.0).unwrap();
        let mask = g.ball_mask(&[0.0], 0.9);
        let p = fit(&GridFunction::new(g.clone(), 1, a).unwrap(), &mask, &eta, m, &[0.0]).unwrap();
        let q = fit(&sample(&p, &g, 1), &mask, &eta, m, &[0.0]).unwrap();
        for (sigma, c) in &p.coeffs {
            prop_assert!((c[0] - q.coeffs[sigma][0]).abs() <= 1e-10 * (1.0 + c[0].abs()));
        }
    }

    #[test]
    fn dpgrid_round_trip(vals in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 30)) {
        let g = Grid::new(vec![5, 6], vec![-0.3, 1.7], 0.125).unwrap();
        let u = GridFunction::new(g, 1, vals).unwrap();
        let mut buf = Vec::new();
        write_dpgrid(&mut buf, &u).unwrap();
        let back = read_dpgrid(&buf[..]).unwrap();
        prop_assert_eq!(back.grid, u.grid);
        for (x, y) in back.values.iter().zip(&u.values) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn report_floats_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        // serde_json's default float parser is not correctly rounded, so read the token with std
        let s = to_json_string(&vec![v]).unwrap();
        let token = s.trim().trim_start_matches('[').trim_end_matches(']');
        prop_assert_eq!(token.parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn certificate_invariants(n in 1usize..4, a in 0.01f64..50.0, kappa in 0.01f64..0.99, eps0 in 1e-6f64..2.0) {
        let c = gehring_constants(n, a, kappa, eps0).unwrap();
        prop_assert!(c.absorption <= 0.5 + 1e-15);
        prop_assert!(c.eps_max <= eps0);
        prop_assert!(c.eps_max <= (1.0 - kappa) / c.c_star * (1.0 + 1e-15));
        prop_assert!(c.d > kappa && c.d < 1.0);
    }

    #[test]
    fn iteration_constant_grows_with_both_arguments(tau in 0.05f64..0.8, gamma in 0.0f64..2.0) {
        let base = iteration_constant(tau, gamma).unwrap();
        prop_assert!(iteration_constant(tau + 0.1, gamma).unwrap() > base);
        prop_assert!(iteration_constant(tau, gamma + 0.1).unwrap() > base);
    }

    #[test]
    fn derived_exponents_revalidate(seed in any::<u64>()) {
        for cfg in random_configs(5, seed) {
            prop_assert!(is_valid(&cfg));
            let d = derive(&cfg).unwrap();
            prop_assert!(revalidate(&cfg, &d).iter().all(|c| c.pass()));
            prop_assert!(holder_triple_error(&cfg, &d) <= 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn residual_is_linear_in_test_function(s in -4.0f64..4.0, shift in -0.3f64..0.3) {
        let g = Grid::cube(2, -1.0, 1.0, 32);
        let u = g.sample(|x| (1.3 * x[0]).sin() * (0.9 * x[1]).cos()).unwrap();
        let a = g.sample(|x| (x[0] * x[0] + x[1] * x[1]).sqrt().sqrt()).unwrap();
        let bump = |c: f64| move |x: &[f64]| {
            let r2 = (x[0] - c).powi(2) + x[1] * x[1];
            if r2 < 0.25 { (0.25 - r2).powi(3) } else { 0.0 }
        };
        let p1 = g.sample(bump(shift)).unwrap();
        let p2 = g.sample(bump(-0.2)).unwrap();
        let comb = p1.zip(&p2, |x, y| x + s * y);
        let r = |phi: &GridFunction| model_residual(&u, &a, 2.0, 2.2, 1, phi).unwrap();
        let (r1, r2, rc) = (r(&p1), r(&p2), r(&comb));
        prop_assert!((rc - (r1 + s * r2)).abs() <= 1e-10 * (1.0 + r1.abs() + (s * r2).abs()));
    }

    #[test]
    fn whitney_cover_on_random_masks(seed in any::<u64>()) {
        let g = Grid::cube(2, -1.0, 1.0, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = random_disc_mask(&g, &mut rng);
        prop_assume!(mask.iter().any(|&b| b));
        let cov = cover(&g, &mask, f64::INFINITY);
        let rep = verify_cover(&g, &mask, &cov);
        prop_assert!(rep.w1 && rep.w3 && rep.w5);
        prop_assert!(rep.neighbors_symmetric);
        let pou = partition_of_unity(&g, &mask, &cov).unwrap();
        let prep = verify_partition(&g, &mask, &pou, 1);
        prop_assert!(prep.sum_error <= 1e-10);
        prop_assert!(prep.upper);
        prop_assert_eq!(cov, cover(&g, &mask, f64::INFINITY));
    }
}

#[test]
fn report_json_is_deterministic() {
    let build = || {
        let mut r = Report::new("det", serde_json::json!({"seed": 1}));
        r.at_most("a", 0.1 + 0.2, 0.3, 1e-15);
        r.constant("x", 1.0 / 3.0);
        r.to_json().unwrap()
    };
    assert_eq!(build(), build());
}
