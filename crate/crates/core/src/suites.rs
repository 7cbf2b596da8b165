//! Named verification suites. Each one builds its inputs from the seed,
//! runs the module checks and returns a [`Report`].

use crate::corpus::{bump_corpus, fourier_corpus};
use crate::error::{Error, Result};
use crate::exponents::{derive, is_valid, revalidate, riesz_gap, ExponentConfig};
use crate::gehring::{gehring_constants, gehring_verify, iteration_constant, GehringInput, PremiseMode};
use crate::grid::{integrate_mask, partial_derivative, weighted_average_mask, DerivativeCache, Grid, MultiIndex};
use crate::harness::{caccioppoli_with, model_data_2d, model_residual, reverse_holder_with, scan_fields, self_improve, structure_checks, ScanParams};
use crate::maximal::{composition_report, hl, maximal_function, sandwich_report, MaximalSpec};
use crate::meanpoly::{fit, fit_cached, moment_residual, radial_cutoff_field, sample};
use crate::potentials::{riesz_potential, sobolev_poincare_report, SpParams};
use crate::report::Report;
use crate::truncation::{model_case, run_case, CaseReport};
use crate::weights::{double_phase_value, estimate_seminorm, regularize};
use crate::whitney::{cover, overlap_cap, partition_of_unity, verify_cover, verify_partition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub const SUITES: [&str; 12] = [
    "grid",
    "weights",
    "exponents",
    "maximal",
    "potentials",
    "sobolev_poincare",
    "meanpoly",
    "whitney",
    "truncation",
    "gehring",
    "pipeline",
    "all",
];

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides the default cells per axis of the main 2D grids.
    pub grid_size: Option<usize>,
    pub exponents: Option<ExponentConfig>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: crate::corpus::DEFAULT_SEED, grid_size: None, exponents: None }
    }
}

impl SuiteConfig {
    fn cells_2d(&self, default: usize) -> usize {
        self.grid_size.unwrap_or(default)
    }

    fn echo(&self) -> serde_json::Value {
        json!({
            "seed": self.seed,
            "grid_size": self.grid_size,
            "exponents": self.exponents.as_ref().map(crate::report::to_value),
        })
    }
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<Report> {
    match name {
        "grid" => grid_suite(cfg),
        "weights" => weights_suite(cfg),
        "exponents" => exponents_suite(cfg),
        "maximal" => maximal_suite(cfg),
        "potentials" => potentials_suite(cfg),
        "sobolev_poincare" => sobolev_poincare_suite(cfg),
        "meanpoly" => meanpoly_suite(cfg),
        "whitney" => whitney_suite(cfg),
        "truncation" => truncation_suite(cfg),
        "gehring" => gehring_suite(cfg),
        "pipeline" => pipeline_suite(cfg),
        "all" => {
            let mut rep = Report::new("all", cfg.echo());
            for s in SUITES.iter().filter(|s| **s != "all" && **s != "sobolev_poincare") {
                rep.absorb(run_suite(s, cfg)?);
            }
            Ok(rep)
        }
        other => Err(Error::Domain(format!("unknown suite '{other}'; expected one of {}", SUITES.join(", ")))),
    }
}

fn grid_suite(cfg: &SuiteConfig) -> Result<Report> {
    let mut rep = Report::new("grid", cfg.echo());
    let g = Grid::cube(2, -1.0, 1.0, cfg.cells_2d(128));
    let plane = g.sample(|x| 3.0 * x[0] - 2.0 * x[1] + 0.5)?;
    let dx = partial_derivative(&plane, &MultiIndex(vec![1, 0]))?;
    let err = dx.values.iter().map(|v| (v - 3.0).abs()).fold(0.0, f64::max);
    rep.at_most("linear_derivative_exact", err, 1e-12, 0.0);
    let quad = g.sample(|x| x[0] * x[0])?;
    let dxx = partial_derivative(&quad, &MultiIndex(vec![2, 0]))?;
    let s = g.shape3();
    let mut interior = 0.0f64;
    for p in 0..g.npoints() {
        let ijk = g.unravel(p);
        if ijk[0] >= 2 && ijk[0] + 2 < s[0] {
            interior = interior.max((dxx.values[p] - 2.0).abs());
        }
    }
    rep.at_most("quadratic_second_derivative_interior", interior, 1e-9, 0.0);

    let wide = Grid::cube(2, -1.5, 1.5, cfg.cells_2d(128));
    let disc = wide.ball_mask(&[0.0, 0.0], 1.0);
    let ones = wide.sample(|_| 1.0)?;
    let area = integrate_mask(&ones, &disc, None)?[0];
    rep.close("unit_disc_area", area, std::f64::consts::PI, 8.0 * wide.spacing);

    let eta = radial_cutoff_field(&g, &[0.0, 0.0], 0.8, 0.5);
    let mask = g.ball_mask(&[0.0, 0.0], 0.8);
    let c = g.sample(|_| 1.75)?;
    let avg = weighted_average_mask(&c, &mask, &eta)?[0];
    rep.close("weighted_average_of_constant", avg, 1.75, 1e-12);

    let f = g.sample(|x| (x[0] * 2.1).sin() * x[1].exp())?;
    let mut buf = Vec::new();
    crate::io::write_dpgrid(&mut buf, &f)?;
    let back = crate::io::read_dpgrid(&mut buf.as_slice())?;
    let same = back.grid == f.grid && back.values.iter().zip(&f.values).all(|(a, b)| a.to_bits() == b.to_bits());
    rep.holds("dpgrid_round_trip_bitwise", same);
    Ok(rep)
}

fn weights_suite(cfg: &SuiteConfig) -> Result<Report> {
    let mut rep = Report::new("weights", cfg.echo());
    let alpha = 0.5;
    let g1 = Grid::cube(1, -1.0, 1.0, 256);
    let all1 = vec![true; g1.npoints()];
    let c = g1.sample(|_| 2.5)?;
    rep.close("constant_seminorm_is_one", estimate_seminorm(&c, alpha, &all1)?.estimate, 1.0, 0.0);
    let pw = g1.sample(|x| x[0].abs().powf(alpha))?;
    let sp = estimate_seminorm(&pw, alpha, &all1)?;
    rep.at_most("power_weight_seminorm", sp.estimate, 1.0 + 1e-6, 0.0);
    let step = g1.sample(|x| if x[0] > 0.0 { 1.0 } else { 0.0 })?;
    rep.holds("step_weight_diverges", estimate_seminorm(&step, alpha, &all1)?.diverging);

    let g2 = Grid::cube(2, -1.0, 1.0, 48);
    let all2 = vec![true; g2.npoints()];
    let raw = g2.sample(|x| ((x[0] - 0.2).powi(2) + x[1] * x[1]).sqrt().powf(alpha) + 0.3 * (x[0] * 3.0).sin().abs())?;
    let sn = estimate_seminorm(&raw, alpha, &all2)?;
    let reg = regularize(&raw, alpha)?;
    let below = reg.values.iter().zip(&raw.values).all(|(r, a)| r <= a);
    rep.holds("regularized_below_original", below);
    let comparable = raw.values.iter().zip(&reg.values).map(|(a, r)| if *a > 0.0 { a / r.max(f64::MIN_POSITIVE) } else { 0.0 }).fold(0.0, f64::max);
    rep.at_most("original_below_seminorm_times_regularized", comparable, sn.estimate, 1e-9);
    let reg_sn = estimate_seminorm(&reg, alpha, &all2)?;
    rep.at_most("regularized_seminorm", reg_sn.estimate, 2f64.powf(alpha), 1e-6);
    let twice = regularize(&reg, alpha)?;
    let idem = twice.values.iter().zip(&reg.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    rep.at_most("regularize_idempotent", idem, 1e-10, 0.0);
    let pw2 = g2.sample(|x| (x[0] * x[0] + x[1] * x[1]).sqrt().powf(alpha))?;
    let reg_pw = regularize(&pw2, alpha)?;
    let gap = reg_pw.values.iter().zip(&pw2.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    rep.at_most("power_weight_is_its_own_regularization", gap, 1e-10, 0.0);

    rep.close("double_phase_example", double_phase_value(2.0, 1.0, 2.0, 3.0, 3.0), 12.0, 1e-12);
    rep.close("double_phase_at_zero", double_phase_value(0.0, 0.7, 2.0, 2.2, 2.2), 0.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut convex_excess = 0.0f64;
    let mut monotone = true;
    for _ in 0..2000 {
        let a = rng.gen_range(0.0..2.0);
        let gp = rng.gen_range(1.0..4.0);
        let gq = gp + rng.gen_range(0.0..2.0);
        let z1: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let z2: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let nrm = |z: &[f64]| z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = |z: &[f64]| double_phase_value(nrm(z), a, gp, gq, 2.2);
        let mid: Vec<f64> = z1.iter().zip(&z2).map(|(x, y)| 0.5 * (x + y)).collect();
        convex_excess = convex_excess.max(h(&mid) - 0.5 * (h(&z1) + h(&z2)));
        let (s, t) = (nrm(&z1), nrm(&z2));
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        monotone &= double_phase_value(lo, a, gp, gq, 2.2) <= double_phase_value(hi, a, gp, gq, 2.2);
    }
    rep.at_most("double_phase_midpoint_convex", convex_excess, 1e-9, 0.0);
    rep.holds("double_phase_monotone", monotone);
    Ok(rep)
}

/// Random admissible model configurations.
pub fn random_configs(count: usize, seed: u64) -> Vec<ExponentConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(1..=6usize);
        let m = rng.gen_range(1..=3usize);
        let alpha = rng.gen_range(0.05..1.0);
        let p = rng.gen_range(1.1..4.0);
        let q = p * (1.0 + rng.gen_range(0.0..1.0) * alpha / n as f64);
        let c = ExponentConfig::model(n, m, p, q, alpha);
        if is_valid(&c) {
            out.push(c);
        }
    }
    out
}

fn exponents_suite(cfg: &SuiteConfig) -> Result<Report> {
    let mut rep = Report::new("exponents", cfg.echo());
    let base = cfg.exponents.clone().unwrap_or_else(|| ExponentConfig::model(2, 1, 2.0, 2.2, 0.5));
    let d = derive(&base)?;
    let slack = revalidate(&base, &d);
    let min_slack = slack.iter().filter(|c| c.strict).map(|c| c.slack).fold(f64::INFINITY, f64::min);
    rep.holds("default_config_revalidates", slack.iter().all(|c| c.pass()));
    rep.constant("default_min_strict_slack", min_slack);
    rep.constant("default_derived", &d);

    let g62 = riesz_gap(2.0, 3.0, 6, 0.5)?;
    rep.close("riesz_gap_example_beta", g62.beta, 2.0, 1e-15);
    rep.close("riesz_gap_example_sobolev", g62.sobolev_pair.0, 6.0, 1e-14);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst_i = 0.0f64;
    let mut worst_ii = 0.0f64;
    let mut ranges = true;
    let mut tested = 0;
    while tested < 1000 {
        let n = rng.gen_range(2..=8usize);
        let nf = n as f64;
        let p = rng.gen_range(1.0..nf - 0.2);
        let alpha = rng.gen_range(0.05..1.0);
        let q = p + rng.gen_range(0.0..1.0) * (p * alpha / nf).min(nf - 0.1 - p).max(0.0);
        if q >= nf {
            continue;
        }
        let gap = riesz_gap(p, q, n, alpha)?;
        let (a, b) = gap.sobolev_pair;
        worst_i = worst_i.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        let (c, e) = gap.excess_pair;
        worst_ii = worst_ii.max((c - e).abs() / (1.0 + alpha / q + gap.beta));
        ranges &= gap.beta >= 1.0 && gap.beta < nf / p;
        tested += 1;
    }
    rep.at_most("riesz_gap_sobolev_identity", worst_i, 1e-14, 0.0);
    rep.at_most("riesz_gap_excess_identity", worst_ii, 1e-14, 0.0);
    rep.holds("riesz_gap_range", ranges);

    let configs = random_configs(1000, cfg.seed ^ 0xC0F);
    let mut triple = 0.0f64;
    let mut failures = 0usize;
    let mut min_slack = f64::INFINITY;
    for c in &configs {
        match derive(c) {
            Ok(d) => {
                let checks = revalidate(c, &d);
                if !checks.iter().all(|k| k.pass()) {
                    failures += 1;
                }
                min_slack = min_slack.min(checks.iter().filter(|k| k.strict).map(|k| k.slack).fold(f64::INFINITY, f64::min));
                triple = triple.max(holder_triple_error(c, &d));
            }
            Err(_) => failures += 1,
        }
    }
    rep.at_most("holder_triples", triple, 1e-14, 0.0);
    rep.at_most("random_configs_revalidate_failures", failures as f64, 0.0, 0.0);
    rep.push("random_configs_min_strict_slack", min_slack > 0.0, min_slack, 0.0, 0.0);
    Ok(rep)
}

/// max over r, l < m of |1/s_hat + 1/gamma + 1/r' - 1| and |1/t_hat + 1/gamma - 1|.
pub fn holder_triple_error(c: &ExponentConfig, d: &crate::exponents::DerivedExponents) -> f64 {
    let mut worst = 0.0f64;
    for r in [crate::exponents::P, crate::exponents::Q] {
        let rv = c.r(r);
        let rc = 1.0 - 1.0 / rv;
        for l in 0..=c.m {
            let g = d.gammas.gamma[r][l];
            let s = d.gammas.s_hat[r][l];
            let t = d.gammas.t_hat[r][l];
            worst = worst.max((1.0 / s + 1.0 / g + rc - 1.0).abs());
            worst = worst.max((1.0 / t + 1.0 / g - 1.0).abs());
        }
    }
    worst
}

fn maximal_suite(cfg: &SuiteConfig) -> Result<Report> {
    let mut rep = Report::new("maximal", cfg.echo());
    let g1 = Grid::cube(1, -4.0, 4.0, 256);
    let ind = g1.sample(|x| if x[0].abs() <= 1.0 { 1.0 } else { 0.0 })?;
    let m = hl(&ind);
    let at3 = m.values[g1.nearest(&[3.0])];
    rep.close("indicator_at_three", at3, 0.5, 2.0 * g1.spacing);

    let g2 = Grid::cube(2, -1.0, 1.0, cfg.cells_2d(64));
    let mut worst_sandwich = 0.0f64;
    let mut sandwich_ok = true;
    let mut sandwich_tol = 0.0f64;
    let mut comp = 0.0f64;
    let mut comp_bound = 0.0f64;
    let mut comp_ok = true;
    for b in bump_corpus(2, 6, 0.5, cfg.seed) {
        let f = g2.sample(|x| b.eval(x))?;
        let s = sandwich_report(&f);
        sandwich_ok &= s.pass;
        sandwich_tol = s.tolerance;
        worst_sandwich = worst_sandwich.max(s.upper_ratio);
        let c = composition_report(&f, 1.0)?;
        comp_ok &= c.pass;
        comp = comp.max(c.ratio.sup);
        comp_bound = c.bound;
    }
    rep.push("sandwich_on_corpus", sandwich_ok, worst_sandwich, 4.0, sandwich_tol);
    rep.push("composition_on_corpus", comp_ok, comp, comp_bound, 0.0);

    let f = g2.sample(|x| (x[0] * 2.0).cos() + x[1])?;
    let base = maximal_function(&f, &MaximalSpec::hardy_littlewood())?;
    let scaled = maximal_function(&f.map(|v| -2.0 * v), &MaximalSpec::hardy_littlewood())?;
    let homog = base.values.iter().zip(&scaled.values).all(|(a, b)| (2.0 * a).to_bits() == b.to_bits());
    rep.holds("homogeneity_power_of_two_bitwise", homog);
    let general = maximal_function(&f.map(|v| 2.5 * v), &MaximalSpec::hardy_littlewood())?;
    let rel = base.values.iter().zip(&general.values).map(|(a, b)| (2.5 * a - b).abs() / b.abs().max(1e-300)).fold(0.0, f64::max);
    rep.at_most("homogeneity_general_factor", rel, 1e-12, 0.0);
    let ones = g2.sample(|_| 1.0)?;
    let m1 = hl(&ones);
    rep.close("constant_is_fixed", m1.values.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max), 0.0, 1e-12);
    Ok(rep)
}

fn sp_corpus_constant(cells: usize, count: usize, seed: u64, constant_weight: bool) -> Result<(Vec<crate::potentials::SobolevPoincareReport>, f64)> {
    let alpha = 0.5;
    let g = Grid::cube(2, -1.0, 1.0, cells);
    let a = if constant_weight {
        g.sample(|_| 1.0)?
    } else {
        regularize(&g.sample(|x| (x[0] * x[0] + x[1] * x[1]).sqrt().powf(alpha))?, alpha)?
    };
    let sp = SpParams { p: 2.0, q: 2.2, alpha, order: 1, r: 2.2 };
    let eta = g.sample(|_| 1.0)?;
    let center = [0.0, 0.0];
    let mut reps = Vec::new();
    for t in fourier_corpus(2, count, 4, seed) {
        let u = g.sample(|x| t.eval(x))?;
        reps.push(sobolev_poincare_report(&u, &a, &sp, (&center, 0.75), &eta)?);
    }
    let c = reps.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok((reps, c))
}

fn sobolev_poincare_checks(rep: &mut Report, cfg: &SuiteConfig) -> Result<()> {
    let cells = cfg.cells_2d(128);
    let (coarse, c_coarse) = sp_corpus_constant(cells / 2, 50, cfg.seed, false)?;
    let (fine, c_fine) = sp_corpus_constant(cells, 50, cfg.seed, false)?;
    rep.holds("sp_corpus_holds_with_recorded_constant", fine.iter().all(|r| r.holds_with(c_fine, false)) && coarse.iter().all(|r| r.holds_with(c_coarse, false)));
    rep.constant("sp_constant_coarse", c_coarse);
    rep.constant("sp_constant_fine", c_fine);
    rep.close("sp_constant_refinement", c_fine / c_coarse, 1.0, 0.2);

    let g = Grid::cube(2, -1.0, 1.0, cells);
    let alpha = 0.5;
    let a = regularize(&g.sample(|x| (x[0] * x[0] + x[1] * x[1]).sqrt().powf(alpha))?, alpha)?;
    let sp = SpParams { p: 2.0, q: 2.2, alpha, order: 1, r: 2.2 };
    let eta = g.sample(|_| 1.0)?;
    let t = &fourier_corpus(2, 1, 4, cfg.seed)[0];
    let u = g.sample(|x| t.eval(x))?;
    let r1 = sobolev_poincare_report(&u, &a, &sp, (&[0.0, 0.0], 0.75), &eta)?;
    let r2 = sobolev_poincare_report(&u.map(|v| 2.0 * v), &a, &sp, (&[0.0, 0.0], 0.75), &eta)?;
    rep.close("sp_homogeneity_ratio", r2.ratio, r1.ratio, 1e-12 * r1.ratio.abs());

    let (flat, c_flat) = sp_corpus_constant(cells, 50, cfg.seed, true)?;
    let c = 2.0 * c_flat;
    let unchanged = flat.iter().all(|r| r.holds_with(c, false) == r.holds_with(c, true));
    rep.holds("sp_flat_weight_verdict_without_radius_term", unchanged);
    Ok(())
}

fn sobolev_poincare_suite(cfg: &SuiteConfig) -> Result<Report> {
    let mut rep = Report::new("sobolev_poincare", cfg.echo());
    sobolev_poincare_checks(&mut rep, cfg)?;
    Ok(rep)
}

fn potentials_suite(cfg: &SuiteConfig) -> Result<Report> {
    let mut rep = Report::new("potentials", cfg.echo());
    let g1 = Grid::cube(1, -1.0, 1.0, 256);
    let ones = g1.sample(|_| 1.0)?;
    let mask = vec![true; g1.npoints()];
    let i = riesz_potential(&ones, 0.5, &mask)?;
    // closed form at the origin: 2 * int_0^1 y^(-1/2) dy = 4; sample the two middle cells
    let mid = 0.5 * (i.values[127] + i.values[128]);
    rep.close("riesz_one_dimensional_constant", mid, 4.0, 0.04);
    let scaled = riesz_potential(&ones.map(|v| 3.0 * v), 0.5, &mask)?;
    let hom = i.values.iter().zip(&scaled.values).map(|(a, b)| (3.0 * a - b).abs() / b.abs().max(1e-300)).fold(0.0, f64::max);
    rep.at_most("riesz_homogeneity", hom, 1e-14, 0.0);
    sobolev_poincare_checks(&mut rep, cfg)?;
    Ok(rep)
}

fn meanpoly_suite(cfg: &SuiteConfig) -> Result<Report> {
    let mut rep = Report::new("meanpoly", cfg.echo());
    let mut worst_moment = 0.0f64;
    let mut worst_idem = 0.0f64;
    for n in [1usize, 2] {
        let g = if n == 1 { Grid::cube(1, -1.0, 1.0, 256) } else { Grid::cube(2, -1.0, 1.0, cfg.cells_2d(128)) };
        let center = vec![0.1; n];
        let mask = g.ball_mask(&center, 0.7);
        let eta = radial_cutoff_field(&g, &center, 0.7, 0.5);
        let corpus = fourier_corpus(n, 20, 4, cfg.seed);
        for m in 1..=3usize {
            for t in &corpus {
                let u = g.sample(|x| t.eval(x))?;
                let cache = DerivativeCache::new(&u, (m - 1) as u32)?;
                let p = fit_cached(&cache, &mask, &eta, m, &center)?;
                worst_moment = worst_moment.max(moment_residual(&cache, &p, &mask, &eta)?);
            }
            let t = &corpus[0];
            let u = g.sample(|x| t.eval(x))?;
            let p = fit(&u, &mask, &eta, m, &center)?;
            let pu = sample(&p, &g, 1);
            let q = fit(&pu, &mask, &eta, m, &center)?;
            for (sigma, a) in &p.coeffs {
                let b = &q.coeffs[sigma];
                worst_idem = worst_idem.max((a[0] - b[0]).abs());
            }
        }
    }
    rep.at_most("moment_matching_corpus", worst_moment, 1e-8, 0.0);
    rep.at_most("idempotence_on_polynomials", worst_idem, 1e-12, 0.0);
    // midpoint quadrature of x^2 is low by h^2/12, so this needs h < 3.4e-3
    let g = Grid::cube(1, -1.0, 1.0, 1024);
    let u = g.sample(|x| x[0] * x[0])?;
    let mask = vec![true; g.npoints()];
    let eta = g.sample(|_| 1.0)?;
    let p = fit(&u, &mask, &eta, 2, &[0.0])?;
    rep.close("square_on_interval_constant", p.coeffs[&MultiIndex(vec![0])][0], 1.0 / 3.0, 1e-6);
    rep.close("square_on_interval_slope", p.coeffs[&MultiIndex(vec![1])][0], 0.0, 1e-6);
    Ok(rep)
}

/// Union of one to four random discs in [-0.6, 0.6]^2.
pub fn random_disc_mask(grid: &Grid, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let k = rng.gen_range(1..=4);
    let discs: Vec<([f64; 2], f64)> = (0..k).map(|_| ([rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)], rng.gen_range(0.1..0.4))).collect();
    (0..grid.npoints())
        .map(|p| {
            let c = grid.center(p);
            discs.iter().any(|(z, r)| (c[0] - z[0]).powi(2) + (c[1] - z[1]).powi(2) < r * r)
        })
        .collect()
}

fn whitney_suite(cfg: &SuiteConfig) -> Result<Report> {
    let mut rep = Report::new("whitney", cfg.echo());
    let g = Grid::cube(2, -1.0, 1.0, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut w1, mut w3, mut w5) = (true, true, true);
    let mut overlap = 0usize;
    let mut sum_err = 0.0f64;
    for _ in 0..10 {
        let mask = random_disc_mask(&g, &mut rng);
        let cov = cover(&g, &mask, 1.0);
        let r = verify_cover(&g, &mask, &cov);
        w1 &= r.w1;
        w3 &= r.w3;
        w5 &= r.w5;
        overlap = overlap.max(r.w6_overlap);
        let pou = partition_of_unity(&g, &mask, &cov)?;
        let sums = pou.sum_at();
        for (p, &inside) in mask.iter().enumerate() {
            if inside {
                sum_err = sum_err.max((sums[p] - 1.0).abs());
            }
        }
    }
    rep.holds("w1_random_masks", w1);
    rep.holds("w3_random_masks", w3);
    rep.holds("w5_random_masks", w5);
    rep.at_most("w6_overlap", overlap as f64, overlap_cap(2) as f64, 0.0);
    rep.at_most("partition_sums_to_one", sum_err, 1e-10, 0.0);

    // (P2) constants on one fixed mask at two resolutions
    let shape = |c: &[f64]| ((c[0] - 0.2).powi(2) + (c[1] + 0.1).powi(2)).sqrt() < 0.5 || ((c[0] + 0.4).powi(2) + (c[1] - 0.3).powi(2)).sqrt() < 0.3;
    let mut consts = Vec::new();
    for cells in [64usize, 128] {
        let g = Grid::cube(2, -1.0, 1.0, cells);
        let mask: Vec<bool> = (0..g.npoints()).map(|p| shape(&g.center(p))).collect();
        let cov = cover(&g, &mask, 1.0);
        let cr = verify_cover(&g, &mask, &cov);
        rep.holds(format!("cover_{cells}"), cr.all_pass(overlap_cap(2)));
        let pou = partition_of_unity(&g, &mask, &cov)?;
        let pr = verify_partition(&g, &mask, &pou, 2);
        rep.holds(format!("partition_bounds_{cells}"), pr.upper && pr.bump_lower);
        consts.push(pr.derivative_constants);
    }
    for l in 1..consts[0].len() {
        rep.close(format!("p2_constant_order_{l}_refinement"), consts[1][l] / consts[0][l], 1.0, 0.2);
    }
    rep.constant("p2_constants", &consts);
    Ok(rep)
}

/// Criterion-level verdicts on a pair of truncation runs (coarse, fine).
pub fn truncation_checks(rep: &mut Report, coarse: &CaseReport, fine: &CaseReport) {
    for (tag, c) in [("coarse", coarse), ("fine", fine)] {
        let exact = c.levels.iter().chain(&c.sub_floor).all(|l| l.consistency.exact_on_good);
        rep.holds(format!("bitwise_on_good_set_{tag}"), exact);
        rep.holds(format!("identity_above_sup_{tag}"), c.identity_above_sup);
        rep.holds(format!("bad_set_in_4r_{tag}"), c.levels.iter().all(|l| l.contained));
        let finite = c.levels.iter().chain(&c.sub_floor).all(|l| l.bounds.finite());
        rep.holds(format!("derivative_bounds_finite_{tag}"), finite);
        let c1 = c.levels[0].bounds.max_c1();
        let c2 = c.levels[0].bounds.max_c2();
        let drift1 = c.levels.iter().map(|l| l.bounds.max_c1()).fold(0.0, f64::max);
        let drift2 = c.levels.iter().map(|l| l.bounds.max_c2()).fold(0.0, f64::max);
        rep.at_most(format!("lambda_robust_c1_{tag}"), drift1, c1, 0.25);
        rep.at_most(format!("lambda_robust_c2_{tag}"), drift2, c2, 0.25);
        let gluing = c.sub_floor.iter().map(|l| l.consistency.gluing_error.max(l.consistency.partition_error)).fold(0.0, f64::max);
        rep.at_most(format!("gluing_consistency_{tag}"), gluing, 1e-10, 0.0);
        let dfd = c.sub_floor.iter().map(|l| l.consistency.derivative_error).fold(0.0, f64::max);
        rep.at_most(format!("glued_derivatives_{tag}"), dfd, 1e-8, 0.0);
    }
    for (a, b) in coarse.levels.iter().zip(&fine.levels) {
        rep.holds(format!("campanato_finite_{}", a.factor), a.campanato.is_finite() && b.campanato.is_finite());
        rep.close(format!("campanato_refinement_{}", a.factor), b.campanato / a.campanato, 1.0, 0.2);
    }
}

fn truncation_suite(cfg: &SuiteConfig) -> Result<Report> {
    let mut rep = Report::new("truncation", cfg.echo());
    let coarse = run_case(&model_case(256)?)?;
    let fine = run_case(&model_case(512)?)?;
    truncation_checks(&mut rep, &coarse, &fine);
    rep.constant("coarse", &coarse);
    rep.constant("fine", &fine);
    Ok(rep)
}

fn gehring_suite(cfg: &SuiteConfig) -> Result<Report> {
    let mut rep = Report::new("gehring", cfg.echo());
    let cert = gehring_constants(1, 1.0, 0.5, 0.5)?;
    rep.close("certificate_d", cert.d, 0.75, 0.0);
    rep.close("certificate_c1", cert.c1, 10.0, 0.0);
    rep.close("certificate_c_star", cert.c_star, 1000.0, 0.0);
    rep.close("certificate_eps_max", cert.eps_max, 5e-4, 0.0);
    rep.close("iteration_constant_gamma_0", iteration_constant(0.5, 0.0)?, 2.0, 1e-12);
    rep.close("iteration_constant_gamma_1", iteration_constant(0.5, 1.0)?, 16.0, 1e-12);
    let sweep: Vec<f64> = (0..20).map(|k| gehring_constants(1, 1.0, 0.5, 0.05 + 0.05 * k as f64).map(|c| c.c_star)).collect::<Result<_>>()?;
    rep.holds("c_star_monotone_in_eps0", sweep.windows(2).all(|w| w[1] >= w[0]));

    let g = Grid::cube(2, -1.0, 1.0, cfg.cells_2d(128));
    let f1 = g.sample(|x| 1.0 / (x[0] * x[0] + x[1] * x[1]).sqrt())?;
    let f2 = g.sample(|_| 1e-3)?;
    let a_analytic = 27.0 / 8.0;
    let inp = GehringInput {
        f1: &f1,
        f2: &f2,
        kappa: 0.5,
        a: a_analytic,
        theta_rh: 0.5,
        eps0: 0.5,
        r0: 0.25,
        omega: (&[0.0, 0.0], 1.0),
        mode: PremiseMode::AllBalls,
        pairs: None,
    };
    let scan = gehring_verify(&inp, None)?;
    // |x|^-1 lies in L^t for t < 2
    rep.at_most("singular_weight_integrable_at_1_plus_2eps", 1.0 + 2.0 * scan.eps_max, 2.0, 0.0);
    rep.at_least("premise_fraction", scan.premise_pass_fraction, 0.95);
    rep.at_most("measured_a", scan.a_measured, 2.0 * a_analytic, 0.0);
    rep.holds("conclusion_on_premise_pairs", scan.conclusion_on_premise_pairs);
    rep.constant("eps_max", scan.eps_max);
    rep.constant("pairs", scan.pairs.len());
    Ok(rep)
}

fn pipeline_suite(cfg: &SuiteConfig) -> Result<Report> {
    let mut rep = Report::new("pipeline", cfg.echo());
    let ec = ExponentConfig::model(2, 1, 2.0, 2.2, 0.5);
    let d = derive(&ec)?;
    let cells = cfg.cells_2d(128);
    let (u, w) = model_data_2d(cells, &ec)?;
    let params = ScanParams::unit(2, d.d0(), cfg.seed);

    let st = structure_checks(&w.a, ec.p, ec.q, 4, 10_000, cfg.seed);
    rep.at_most("structure_coercivity", st.coercivity_gap, 1e-12, 0.0);
    rep.at_most("structure_growth", st.growth_excess, 1e-12, 0.0);

    let g = &u.grid;
    let phi = g.sample(|x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 < 0.5 {
            (0.5 - r2).powi(3)
        } else {
            0.0
        }
    })?;
    let lin = g.sample(|x| 1.5 * x[0] - 0.5 * x[1])?;
    let res = model_residual(&lin, &w.a, ec.p, ec.q, 1, &phi)?;
    rep.at_most("residual_linear", res.abs(), 1e-8 * phi.max_abs(), 0.0);
    let kink = g.sample(|x| x[0].abs())?;
    let bump = g.sample(|x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 < 0.25 {
            (0.25 - r2).powi(2)
        } else {
            0.0
        }
    })?;
    let zero_a = g.zeros(1);
    let res_kink = model_residual(&kink, &zero_a, 2.0, 2.0, 1, &bump)?;
    rep.at_least("residual_kink_nonzero", res_kink.abs(), 1e-4);

    let coarse_u = model_data_2d(cells / 2, &ec)?;
    let coarse_fields = scan_fields(&coarse_u.0, &coarse_u.1, &ec, &d, &params)?;
    let fields = scan_fields(&u, &w, &ec, &d, &params)?;
    let cac_c = caccioppoli_with(&coarse_u.0, &coarse_u.1, &ec, &d, &params, &coarse_fields)?;
    let cac = caccioppoli_with(&u, &w, &ec, &d, &params, &fields)?;
    rep.holds("caccioppoli_finite", cac.status == crate::report::Status::Pass);
    rep.close("caccioppoli_refinement", cac.constant / cac_c.constant, 1.0, 0.25);
    let rh_c = reverse_holder_with(&coarse_u.0.grid, &ec, &d, &params, &coarse_fields)?;
    let rh = reverse_holder_with(g, &ec, &d, &params, &fields)?;
    rep.holds("reverse_holder_finite", rh.status == crate::report::Status::Pass);
    rep.close("reverse_holder_refinement", rh.constant / rh_c.constant, 1.0, 0.25);
    rep.constant("caccioppoli_constant", cac.constant);
    rep.constant("caccioppoli_aggregates", &cac.aggregates);
    rep.constant("reverse_holder_constant", rh.constant);

    let si = self_improve(&u, &w, &ec, &d, &params, None)?;
    rep.holds("self_improve_all_stages", si.stages.iter().all(|s| s.pass) && si.halted_at.is_none());
    let eps = si.chain.as_ref().map(|c| c.eps_max).unwrap_or(0.0);
    rep.push("self_improve_eps_positive", eps > 0.0, eps, 0.0, 0.0);
    let kappa = 1.0 - 1e-9;
    let si1 = self_improve(&u, &w, &ec, &d, &params, Some(kappa))?;
    let eps1 = si1.chain.as_ref().map(|c| c.eps_max).unwrap_or(f64::NAN);
    let expected = si1.certificate.as_ref().map(|c| ((1.0 - kappa) / c.c_star).min(c.eps0)).unwrap_or(f64::NAN);
    rep.close("kappa_to_one_formula", eps1, expected, 1e-15);
    rep.at_most("kappa_to_one_eps_small", eps1, 1e-9, 0.0);
    rep.constant("self_improve", &si);
    rep.constant("self_improve_kappa_near_one", &si1);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_an_input_error() {
        assert!(matches!(run_suite("nope", &SuiteConfig::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn random_configs_are_valid() {
        assert!(random_configs(20, 1).iter().all(is_valid));
    }
}
