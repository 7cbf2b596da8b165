//! Library outputs against closed forms and brute-force computations that
//! share no code with the implementation.

use dphase::exponents::{delta_hat, derive, riesz_gap, ExponentConfig};
use dphase::gehring::{gehring_constants, gehring_verify, iteration_constant, GehringInput, PremiseMode};
use dphase::grid::{Grid, MultiIndex};
use dphase::maximal::hl;
use dphase::meanpoly::fit;
use dphase::numeric::unit_ball_volume;
use dphase::potentials::riesz_potential;
use dphase::whitney::lens_volume;
use std::f64::consts::PI;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn gehring_certificate_for_unit_data() {
    let c = gehring_constants(1, 1.0, 0.5, 0.5).unwrap();
    assert_eq!(c.d, 0.75);
    assert_eq!(c.c1, 10.0);
    assert_eq!(c.c_star, 1000.0);
    assert_eq!(c.eps_max, 5e-4);
    // theta_g = 5^(-4/3), so A theta_g^d + 1/4 = 1/5 + 1/4
    assert!((c.theta_g - 5f64.powf(-4.0 / 3.0)).abs() < 1e-15);
    assert!((c.absorption - 0.45).abs() < 1e-15);
}

#[test]
fn iteration_constant_closed_forms() {
    // sum tau^i = 1/(1-tau); sum tau^i (i+1)(i+2) = 2/(1-tau)^3
    for tau in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let g0 = iteration_constant(tau, 0.0).unwrap();
        let g1 = iteration_constant(tau, 1.0).unwrap();
        assert!(rel(g0, 1.0 / (1.0 - tau)) < 1e-12, "tau={tau}: {g0}");
        assert!(rel(g1, 2.0 / (1.0 - tau).powi(3)) < 1e-12, "tau={tau}: {g1}");
    }
    assert!((iteration_constant(0.5, 0.0).unwrap() - 2.0).abs() < 1e-12);
    assert!((iteration_constant(0.5, 1.0).unwrap() - 16.0).abs() < 1e-12);
    assert!(iteration_constant(1.0, 0.0).is_err());
}

#[test]
fn model_exponents_are_rational() {
    // n=2, p=2, q=2.2, alpha=1/2: p_hat = q_hat = 22/21 and delta_hat = 11/21
    let (p_hat, q_hat, dh) = delta_hat(2, 2.0, 2.2, 0.5);
    assert!((p_hat - 22.0 / 21.0).abs() < 1e-15);
    assert!((q_hat - 22.0 / 21.0).abs() < 1e-15);
    assert!((dh - 11.0 / 21.0).abs() < 1e-15);
    let d = derive(&ExponentConfig::model(2, 1, 2.0, 2.2, 0.5)).unwrap();
    assert_eq!(d.gamma(0, 0), 4.0);
    assert_eq!(d.gamma(0, 1), 2.0);
    assert!(d.d0() < 1.0 && d.d0() > 0.999);
}

#[test]
fn riesz_gap_identities() {
    let g = riesz_gap(2.0, 2.5, 3, 0.5).unwrap();
    assert!((g.beta - (3.0 * (0.5 - 0.4) + 1.0)).abs() < 1e-15);
    assert!(rel(g.sobolev_pair.0, g.sobolev_pair.1) < 1e-14);
    assert!((g.excess_pair.0 - g.excess_pair.1).abs() < 1e-14);
}

#[test]
fn ball_and_lens_volumes() {
    assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
    assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
    assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    // two unit discs at distance 1
    assert!((lens_volume(2, 1.0, 1.0, 1.0) - (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0)).abs() < 1e-12);
    // two unit balls at distance 1: pi (4r + d)(2r - d)^2 / 12
    assert!((lens_volume(3, 1.0, 1.0, 1.0) - 5.0 * PI / 12.0).abs() < 1e-12);
    // disjoint and nested
    assert_eq!(lens_volume(2, 1.0, 1.0, 2.5), 0.0);
    assert!((lens_volume(2, 1.0, 0.25, 0.1) - PI / 16.0).abs() < 1e-12);
}

/// Largest average of |f| over runs of consecutive cells containing `k`.
fn interval_sup(f: &[f64], k: usize) -> f64 {
    let mut best = 0.0f64;
    for i in 0..=k {
        let mut s = 0.0;
        for j in i..f.len() {
            s += f[j].abs();
            if j >= k {
                best = best.max(s / (j + 1 - i) as f64);
            }
        }
    }
    best
}

#[test]
fn maximal_function_bounded_by_interval_brute_force() {
    let g = Grid::cube(1, -4.0, 4.0, 128);
    let f = g.sample(|x| if x[0].abs() <= 1.0 { 1.0 } else { 0.0 }).unwrap();
    let m = hl(&f);
    for k in 0..g.npoints() {
        let brute = interval_sup(&f.values, k);
        assert!(m.values[k] <= brute + 1e-12, "cell {k}: {} > {brute}", m.values[k]);
        assert!(m.values[k] >= f.values[k].abs() - 1e-12);
    }
    // continuous value 2/(x+1) = 1/2 at x = 3
    let at3 = m.values[g.nearest(&[3.0])];
    assert!((at3 - 0.5).abs() <= 2.0 * g.spacing, "{at3}");
}

#[test]
fn square_mean_is_midpoint_rule() {
    // mean of x^2 over N midpoints of [-1,1] is 1/3 - h^2/12
    let g = Grid::cube(1, -1.0, 1.0, 1024);
    let u = g.sample(|x| x[0] * x[0]).unwrap();
    let eta = g.sample(|_| 1.0).unwrap();
    let p = fit(&u, &vec![true; g.npoints()], &eta, 1, &[0.0]).unwrap();
    let c = p.coeffs[&MultiIndex(vec![0])][0];
    let h = g.spacing;
    assert!((c - (1.0 / 3.0 - h * h / 12.0)).abs() < 1e-14, "{c}");
    assert!((c - 1.0 / 3.0).abs() < 1e-6);
}

#[test]
fn linear_fit_reproduces_affine_data() {
    let g = Grid::cube(2, -1.0, 1.0, 48);
    let u = g.sample(|x| 0.3 - 1.5 * x[0] + 2.0 * x[1]).unwrap();
    let eta = g.sample(|x| 1.0 + 0.1 * x[0]).unwrap();
    let x0 = [0.2, -0.1];
    let p = fit(&u, &g.ball_mask(&[0.1, 0.0], 0.6), &eta, 2, &x0).unwrap();
    let val = 0.3 - 1.5 * x0[0] + 2.0 * x0[1];
    assert!((p.coeffs[&MultiIndex(vec![0, 0])][0] - val).abs() < 1e-12);
    assert!((p.coeffs[&MultiIndex(vec![1, 0])][0] + 1.5).abs() < 1e-10);
    assert!((p.coeffs[&MultiIndex(vec![0, 1])][0] - 2.0).abs() < 1e-10);
}

#[test]
fn riesz_potential_of_one_at_origin() {
    // int_{-1}^{1} |y|^(-1/2) dy = 4
    let g = Grid::cube(1, -1.0, 1.0, 256);
    let ones = g.sample(|_| 1.0).unwrap();
    let i = riesz_potential(&ones, 0.5, &vec![true; g.npoints()]).unwrap();
    let mid = 0.5 * (i.values[127] + i.values[128]);
    assert!(rel(mid, 4.0) < 0.01, "{mid}");
    // at x = 1/2: int |x-y|^(-1/2) = 2 (sqrt(3/2) + sqrt(1/2))
    let x = g.nearest(&[0.5 - 0.5 * g.spacing]);
    let exact = 2.0 * ((1.5f64).sqrt() + (0.5f64).sqrt());
    let at = riesz_potential(&ones, 0.5, &vec![true; g.npoints()]).unwrap().values[x];
    assert!(rel(at, exact) < 0.02, "{at} vs {exact}");
}

#[test]
fn gehring_scan_is_scale_invariant() {
    let g = Grid::cube(2, -1.0, 1.0, 64);
    let f1 = g.sample(|x| 1.0 / (x[0] * x[0] + x[1] * x[1]).sqrt().max(1e-3)).unwrap();
    let f1s = f1.map(|v| 7.0 * v);
    let f2 = g.zeros(1);
    let c = [0.0, 0.0];
    let mk = |f: &dphase::grid::GridFunction| {
        let inp = GehringInput {
            f1: f,
            f2: &f2,
            kappa: 0.5,
            a: 3.375,
            theta_rh: 0.5,
            eps0: 0.5,
            r0: 1.0 / 6.0,
            omega: (&c, 1.0),
            mode: PremiseMode::AllBalls,
            pairs: None,
        };
        gehring_verify(&inp, None).unwrap()
    };
    let a = mk(&f1);
    let b = mk(&f1s);
    assert_eq!(a.pairs.len(), b.pairs.len());
    assert_eq!(a.conclusion_constants, b.conclusion_constants);
    assert!(rel(a.a_measured, b.a_measured) < 1e-12);
    for (p, q) in a.pairs.iter().zip(&b.pairs) {
        assert_eq!(p.premise, q.premise);
        assert!(rel(q.lhs / q.rhs, p.lhs / p.rhs) < 1e-12);
    }
}
