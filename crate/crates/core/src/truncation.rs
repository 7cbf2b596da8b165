//! Lipschitz truncation: the functions g and G, the level floor, good sets
//! E(lambda), the glued function v_lambda and the measured bounds it obeys.

use crate::error::{Error, Result};
use crate::exponents::{DerivedExponents, ExponentConfig, P, Q};
use crate::grid::{dist, DerivativeCache, Grid, GridFunction, MultiIndex};
use crate::maximal::{fractional, hl, iterated_plain};
use crate::meanpoly::{fit_cached, radial_cutoff_field, MVPolynomial};
use crate::numeric::pairwise_sum;
use crate::weights::{double_phase_field, Weight};
use crate::whitney::{cover, partition_of_unity, PartitionOfUnity, WhitneyCover};
use rayon::prelude::*;
use serde::Serialize;

/// Ball B_R(center) on which the truncation is built.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationSetup {
    pub center: Vec<f64>,
    pub big_r: f64,
    /// Integrability exponent delta in [(1 + delta_0)/2, 1).
    pub delta: f64,
}

impl TruncationSetup {
    /// delta = (1+d0)/2 + 0.9 (1 - (1+d0)/2).
    pub fn default_delta(d0: f64) -> f64 {
        let d1 = 0.5 * (1.0 + d0);
        d1 + 0.9 * (1.0 - d1)
    }
}

/// Optional data fields; absent fields are zero.
#[derive(Clone, Debug, Default)]
pub struct DataFields {
    /// g[r][l], l < m.
    pub g: [Vec<Option<GridFunction>>; 2],
    /// h[r][l], l <= m.
    pub h: [Vec<Option<GridFunction>>; 2],
    pub f_p: Option<GridFunction>,
    pub f_q: Option<GridFunction>,
}

#[derive(Clone, Debug)]
pub struct Assembled {
    pub psi: GridFunction,
    pub g: GridFunction,
    pub big_g: GridFunction,
    pub f0: GridFunction,
    pub f: GridFunction,
    /// |D^l u| for l = 0..=m.
    pub dnorm: Vec<GridFunction>,
    /// H_l(x, D^l u) for l = 0..=m.
    pub h_l: Vec<GridFunction>,
}

fn add_into(acc: &mut [f64], f: &GridFunction, pow: f64) {
    for (a, v) in acc.iter_mut().zip(&f.values) {
        if *v > 0.0 {
            *a += v.powf(pow);
        }
    }
}

fn power(f: &GridFunction, e: f64) -> GridFunction {
    f.map(|v| if v > 0.0 { v.powf(e) } else { 0.0 })
}

/// Cutoff equal to 1 on B_{2R} and vanishing outside B_{3R}.
pub fn outer_cutoff(grid: &Grid, setup: &TruncationSetup) -> GridFunction {
    radial_cutoff_field(grid, &setup.center, 3.0 * setup.big_r, 2.0 / 3.0)
}

/// Cutoff equal to 1 on B_R and vanishing outside B_{2R}.
pub fn inner_cutoff(grid: &Grid, setup: &TruncationSetup) -> GridFunction {
    radial_cutoff_field(grid, &setup.center, 2.0 * setup.big_r, 0.5)
}

/// Build F_0, g, G = M(g)^(1/delta_0) and F from u and the weight. With
/// `psi = None` the outer cutoff of `setup` is used.
pub fn assemble_g(
    u: &GridFunction,
    weight: &Weight,
    cfg: &ExponentConfig,
    derived: &DerivedExponents,
    data: &DataFields,
    setup: &TruncationSetup,
    psi: Option<GridFunction>,
) -> Result<Assembled> {
    let grid = &u.grid;
    let m = cfg.m;
    let d0 = derived.d0();
    if derived.delta0.beta.len() != m + 1 {
        return Err(Error::Precondition("derived exponents do not match the order m".into()));
    }
    let psi = psi.unwrap_or_else(|| outer_cutoff(grid, setup));
    let cache = DerivativeCache::new(u, m as u32)?;
    let dnorm: Vec<GridFunction> = (0..=m).map(|l| cache.norm(l as u32)).collect();
    let h_l: Vec<GridFunction> = (0..=m)
        .map(|l| double_phase_field(&dnorm[l], &weight.a, derived.gamma(P, l), derived.gamma(Q, l), cfg.q))
        .collect();
    let np = grid.npoints();

    let mut f0 = vec![0.0; np];
    for r in [P, Q] {
        for l in 0..m {
            if let Some(Some(gf)) = data.g[r].get(l) {
                add_into(&mut f0, gf, derived.gammas.s_hat[r][l]);
            }
        }
        for l in 0..=m {
            if let Some(Some(hf)) = data.h[r].get(l) {
                add_into(&mut f0, hf, derived.gammas.t_hat[r][l]);
            }
        }
    }
    let frac_terms: Vec<GridFunction> = (0..=m)
        .map(|l| {
            let inner = iterated_plain(&dnorm[l].scale_by(&psi), 2 * l + 1);
            fractional(&inner, derived.delta0.beta[l]).map(|mb| power(&mb, derived.gamma(Q, l)))
        })
        .collect::<Result<_>>()?;
    for t in &frac_terms {
        for (a, v) in f0.iter_mut().zip(&t.values) {
            *a += v;
        }
    }
    let f0 = GridFunction::new(grid.clone(), 1, f0)?;

    let mut g = vec![0.0; np];
    for l in 0..=m {
        let inner = power(&h_l[l], d0).scale_by(&psi);
        let ml = iterated_plain(&inner, 2 * l + 1);
        for (a, v) in g.iter_mut().zip(&ml.values) {
            *a += v;
        }
    }
    for ((a, f), s) in g.iter_mut().zip(&f0.values).zip(&psi.values) {
        *a = (*a + f.powf(d0)) * s;
    }
    let g = GridFunction::new(grid.clone(), 1, g)?;
    let big_g = power(&hl(&g), 1.0 / d0);

    let mut f = f0.values.iter().map(|v| v + 1.0).collect::<Vec<_>>();
    if let Some(fp) = &data.f_p {
        add_into(&mut f, fp, 1.0);
    }
    if let Some(fq) = &data.f_q {
        for ((a, v), w) in f.iter_mut().zip(&fq.values).zip(&weight.a.values) {
            *a += w * v;
        }
    }
    for l in 0..m {
        let ml = iterated_plain(&power(&h_l[l], d0), 2 * l + 1);
        add_into(&mut f, &ml, 1.0 / d0);
    }
    let f = GridFunction::new(grid.clone(), 1, f)?;
    Ok(Assembled { psi, g, big_g, f0, f, dnorm, h_l })
}

fn ball_mean(f: &GridFunction, cells: &[usize], pow: f64) -> f64 {
    if cells.is_empty() {
        return 0.0;
    }
    let v: Vec<f64> = cells.iter().map(|&p| if pow == 1.0 { f.values[p] } else { f.values[p].max(0.0).powf(pow) }).collect();
    pairwise_sum(&v) / cells.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GBoundReport {
    pub lhs: f64,
    pub rhs: f64,
    /// lhs / rhs: the constant needed in avg G^delta <= c avg (H_m^delta + F^delta).
    pub constant: f64,
}

pub fn g_bound_report(asm: &Assembled, setup: &TruncationSetup) -> GBoundReport {
    let cells = asm.g.grid.ball_cells(&setup.center, 3.0 * setup.big_r);
    let d = setup.delta;
    let lhs = ball_mean(&asm.big_g, &cells, d);
    let hm = asm.h_l.last().expect("order m term");
    let rhs = ball_mean(hm, &cells, d) + ball_mean(&asm.f, &cells, d);
    GBoundReport { lhs, rhs, constant: if rhs > 0.0 { lhs / rhs } else { 0.0 } }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaFloor {
    pub lambda0: f64,
    pub mean_g_delta: f64,
}

/// Lambda_0 = 6^n (avg_{B_3R} G^delta)^(1/delta) + 6^n.
pub fn lambda_floor(big_g: &GridFunction, setup: &TruncationSetup) -> LambdaFloor {
    let n = big_g.n() as i32;
    let cells = big_g.grid.ball_cells(&setup.center, 3.0 * setup.big_r);
    let mean = ball_mean(big_g, &cells, setup.delta);
    let six = 6f64.powi(n);
    LambdaFloor { lambda0: six * mean.powf(1.0 / setup.delta) + six, mean_g_delta: mean }
}

/// {G > lambda} lies inside B_{4R}.
pub fn bad_set_contained(big_g: &GridFunction, lambda: f64, setup: &TruncationSetup) -> bool {
    (0..big_g.npoints())
        .all(|p| big_g.values[p] <= lambda || dist(&big_g.grid.center(p), &setup.center) < 4.0 * setup.big_r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSet {
    #[serde(skip)]
    pub good: Vec<bool>,
    pub lambda: f64,
    pub requested: f64,
    /// k in lambda (1 + 2^-40 k); 0 when unperturbed.
    pub perturbation: u32,
    /// Fraction of cells with a face neighbour on the other side of the level.
    pub boundary_fraction: f64,
    /// The same fraction on the stride-2 sub-lattice.
    pub coarse_fraction: f64,
    pub shrinks: bool,
}

fn straddle_fraction(f: &GridFunction, lambda: f64, stride: usize) -> f64 {
    let g = &f.grid;
    let s = g.shape3();
    let n = g.n();
    let mut total = 0usize;
    let mut hit = 0usize;
    for i in (0..s[0]).step_by(stride) {
        for j in (0..s[1]).step_by(if n >= 2 { stride } else { 1 }) {
            for k in (0..s[2]).step_by(if n >= 3 { stride } else { 1 }) {
                total += 1;
                let here = f.values[g.ravel([i, j, k])] <= lambda;
                let ijk = [i, j, k];
                let mut straddles = false;
                for a in 0..n {
                    if ijk[a] + stride < s[a] {
                        let mut o = ijk;
                        o[a] += stride;
                        if (f.values[g.ravel(o)] <= lambda) != here {
                            straddles = true;
                        }
                    }
                }
                if straddles {
                    hit += 1;
                }
            }
        }
    }
    hit as f64 / total.max(1) as f64
}

/// Good set {G <= lambda}. The straddling-cell fraction must shrink from the
/// stride-2 sub-lattice to the full lattice (ratio below 0.75, or no
/// boundary at all); otherwise lambda is nudged by 2^-40 k, k = 1..8, and the
/// level with the smallest fraction is used.
pub fn level_set(big_g: &GridFunction, lambda: f64) -> Result<LevelSet> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("level must be positive, got {lambda}")));
    }
    let eval = |lam: f64, k: u32| {
        let fine = straddle_fraction(big_g, lam, 1);
        let coarse = straddle_fraction(big_g, lam, 2);
        let shrinks = fine == 0.0 || fine < 0.75 * coarse;
        (lam, k, fine, coarse, shrinks)
    };
    let mut best = eval(lambda, 0);
    if !best.4 {
        for k in 1..=8u32 {
            let cand = eval(lambda * (1.0 + 2f64.powi(-40) * k as f64), k);
            if cand.2 < best.2 {
                best = cand;
            }
        }
    }
    let (lam, k, fine, coarse, shrinks) = best;
    Ok(LevelSet {
        good: big_g.values.iter().map(|&v| v <= lam).collect(),
        lambda: lam,
        requested: lambda,
        perturbation: k,
        boundary_fraction: fine,
        coarse_fraction: coarse,
        shrinks,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    /// v_lambda = v bitwise on the good set.
    pub exact_on_good: bool,
    /// max over bad cells of |sum_{j in A_i} psi_j - 1|.
    pub partition_error: f64,
    /// max over bad cells of |v_lambda - sum_{j in A_i} P_j psi_j|.
    pub gluing_error: f64,
    /// max over orders and interior bad cells of the difference between the
    /// lattice derivatives of v_lambda and of sum_j P_j psi_j.
    pub derivative_error: f64,
    /// v_lambda vanishes outside B_{4R}.
    pub support_ok: bool,
}

#[derive(Clone, Debug)]
pub struct TruncationResult {
    pub lambda: f64,
    pub m: usize,
    pub setup: TruncationSetup,
    pub global_poly: MVPolynomial,
    pub v: GridFunction,
    pub v_lambda: GridFunction,
    pub good: Vec<bool>,
    pub cover: WhitneyCover,
    pub pou: PartitionOfUnity,
    pub local_polys: Vec<MVPolynomial>,
    /// Balls j with the cell centre inside B_j, per cell.
    pub near: Vec<Vec<usize>>,
    pub v_cache: DerivativeCache,
    pub vl_cache: DerivativeCache,
    pub consistency: ConsistencyReport,
}

impl TruncationResult {
    /// sum_j P_j(x) psi_j(x) over the balls listed for cell `p` (x near p).
    pub fn glued(&self, p: usize, x: &[f64]) -> f64 {
        self.near[p].iter().map(|&j| self.local_polys[j].evaluate(x)[0] * self.pou.psi(j, x)).sum()
    }

    /// |D^k (sum_j P_j psi_j)| at the centre of cell `p` by nested central
    /// differences with step min r_j / 32 over the balls near p.
    pub fn glued_derivative_norm(&self, p: usize, k: usize) -> f64 {
        let g = &self.v.grid;
        let x = g.center(p);
        if self.near[p].is_empty() {
            return 0.0;
        }
        let step = self.near[p].iter().map(|&j| self.pou.balls[j].radius).fold(f64::INFINITY, f64::min) / 32.0;
        let n = g.n();
        let mut s2 = 0.0;
        for sigma in MultiIndex::of_order(n, k as u32) {
            let d = nested_difference(&|y: &[f64]| self.glued(p, y), &x, &sigma, step);
            s2 += d * d;
        }
        s2.sqrt()
    }
}

fn central_weights(k: usize) -> Vec<(f64, f64)> {
    let mut c = 1.0;
    let mut out = Vec::with_capacity(k + 1);
    for j in 0..=k {
        if j > 0 {
            c = c * (k + 1 - j) as f64 / j as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        out.push((k as f64 / 2.0 - j as f64, sign * c));
    }
    out
}

/// Tensor central difference approximating d_sigma f(x).
pub fn nested_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], sigma: &MultiIndex, step: f64) -> f64 {
    let n = x.len();
    let ws: Vec<Vec<(f64, f64)>> = sigma.0.iter().map(|&k| central_weights(k as usize)).collect();
    let mut idx = vec![0usize; n];
    let mut acc = 0.0;
    let mut y = x.to_vec();
    loop {
        let mut w = 1.0;
        for a in 0..n {
            let (off, wt) = ws[a][idx[a]];
            y[a] = x[a] + off * step;
            w *= wt;
        }
        acc += w * f(&y);
        let mut a = 0;
        while a < n {
            idx[a] += 1;
            if idx[a] < ws[a].len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
        if a == n {
            break;
        }
    }
    acc / step.powi(sigma.order() as i32)
}

/// v = (u - P) eta, P the eta-weighted mean-value polynomial on B_{2R}.
pub fn localized(u: &GridFunction, m: usize, setup: &TruncationSetup) -> Result<(MVPolynomial, GridFunction)> {
    let grid = &u.grid;
    let eta = inner_cutoff(grid, setup);
    let mask = grid.ball_mask(&setup.center, 2.0 * setup.big_r);
    let cache = DerivativeCache::new(u, m.saturating_sub(1) as u32)?;
    let p = fit_cached(&cache, &mask, &eta, m, &setup.center)?;
    let n = grid.n();
    let vals: Vec<f64> = (0..grid.npoints())
        .into_par_iter()
        .map(|i| {
            let e = eta.values[i];
            if e == 0.0 {
                0.0
            } else {
                (u.values[i] - p.evaluate(&grid.center3(i)[..n])[0]) * e
            }
        })
        .collect();
    Ok((p, GridFunction::new(grid.clone(), 1, vals)?))
}

/// The truncated function v_lambda = v - sum_i (v - P_i) psi_i on the grid.
pub fn truncate(u: &GridFunction, m: usize, setup: &TruncationSetup, big_g: &GridFunction, lambda: f64) -> Result<TruncationResult> {
    if u.components != 1 {
        return Err(Error::Domain("truncation expects a scalar field".into()));
    }
    let grid = u.grid.clone();
    let np = grid.npoints();
    let (global_poly, v) = localized(u, m, setup)?;
    let good: Vec<bool> = big_g.values.iter().map(|&g| g <= lambda).collect();
    let bad: Vec<bool> = good.iter().map(|g| !g).collect();
    let cov = cover(&grid, &bad, setup.big_r);
    let pou = partition_of_unity(&grid, &bad, &cov)?;
    let v_cache = DerivativeCache::new(&v, m as u32)?;
    let local_polys: Vec<MVPolynomial> = (0..cov.balls.len())
        .into_par_iter()
        .map(|i| {
            let mut eta = vec![0.0; np];
            let mut mask = vec![false; np];
            for &(p, w) in &pou.samples[i] {
                eta[p] = w;
                mask[p] = true;
            }
            let eta = GridFunction { grid: grid.clone(), components: 1, values: eta };
            fit_cached(&v_cache, &mask, &eta, m, &cov.balls[i].center)
        })
        .collect::<Result<_>>()?;
    let n = grid.n();
    let mut corr = vec![0.0; np];
    for (i, s) in pou.samples.iter().enumerate() {
        for &(p, w) in s {
            let pi = local_polys[i].evaluate(&grid.center3(p)[..n])[0];
            corr[p] += (v.values[p] - pi) * w;
        }
    }
    let vl: Vec<f64> = (0..np).map(|p| if good[p] { v.values[p] } else { v.values[p] - corr[p] }).collect();
    let v_lambda = GridFunction::new(grid.clone(), 1, vl)?;

    let mut near = vec![Vec::new(); np];
    for (j, b) in cov.balls.iter().enumerate() {
        for p in grid.ball_cells(&b.center, b.radius) {
            near[p].push(j);
        }
    }

    // consistency of the two descriptions
    let exact_on_good = (0..np).all(|p| !good[p] || v_lambda.values[p].to_bits() == v.values[p].to_bits());
    let mut partition_error = 0.0f64;
    let mut gluing_error = 0.0f64;
    let mut glued = vec![0.0; np];
    let mut psum = vec![0.0; np];
    for (j, s) in pou.samples.iter().enumerate() {
        for &(p, w) in s {
            glued[p] += local_polys[j].evaluate(&grid.center3(p)[..n])[0] * w;
            psum[p] += w;
        }
    }
    for p in 0..np {
        if bad[p] {
            partition_error = partition_error.max((psum[p] - 1.0).abs());
            gluing_error = gluing_error.max((v_lambda.values[p] - glued[p]).abs());
        }
    }
    let vl_cache = DerivativeCache::new(&v_lambda, m as u32)?;
    let glued_f = GridFunction { grid: grid.clone(), components: 1, values: glued };
    let g_cache = DerivativeCache::new(&glued_f, m as u32)?;
    let s3 = grid.shape3();
    let mut derivative_error = 0.0f64;
    for (sigma, f) in vl_cache.indices.iter().zip(&vl_cache.fields) {
        let reach = sigma.order() as isize;
        let other = g_cache.get(sigma);
        for p in 0..np {
            let ijk = grid.unravel(p);
            let mut inside = true;
            'outer: for a in 0..n {
                for o in -reach..=reach {
                    let c = ijk[a] as isize + o;
                    if c < 0 || c >= s3[a] as isize {
                        inside = false;
                        break 'outer;
                    }
                    let mut q = ijk;
                    q[a] = c as usize;
                    if !bad[grid.ravel(q)] {
                        inside = false;
                        break 'outer;
                    }
                }
            }
            if inside {
                derivative_error = derivative_error.max((f.values[p] - other.values[p]).abs());
            }
        }
    }
    let support_ok = (0..np).all(|p| v_lambda.values[p] == 0.0 || dist(&grid.center(p), &setup.center) < 4.0 * setup.big_r);
    Ok(TruncationResult {
        lambda,
        m,
        setup: setup.clone(),
        global_poly,
        v,
        v_lambda,
        good,
        cover: cov,
        pou,
        local_polys,
        near,
        v_cache,
        vl_cache,
        consistency: ConsistencyReport { exact_on_good, partition_error, gluing_error, derivative_error, support_ok },
    })
}

/// Constant tables indexed [l][k], k <= l <= m.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeBounds {
    pub c1: Vec<Vec<f64>>,
    pub c2: Vec<Vec<f64>>,
}

impl DerivativeBounds {
    pub fn max_c1(&self) -> f64 {
        self.c1.iter().flatten().fold(0.0, |a: f64, &b| a.max(b))
    }
    pub fn max_c2(&self) -> f64 {
        self.c2.iter().flatten().fold(0.0, |a: f64, &b| a.max(b))
    }
    pub fn finite(&self) -> bool {
        self.c1.iter().chain(&self.c2).flatten().all(|v| v.is_finite())
    }
}

/// c1(l,k) = sup_{E^c} |D^k v_lambda| / (R^{l-k} lambda^{1/gamma_{p,l}}) and
/// c2(l,k) = sup_{E^c cap B_2R} a^{1/q} |D^k v_lambda| / (R^{l-k} lambda^{1/gamma_{q,l}}).
pub fn derivative_bounds_report(res: &TruncationResult, a: &GridFunction, cfg: &ExponentConfig, derived: &DerivedExponents) -> DerivativeBounds {
    let m = res.m;
    let grid = &res.v.grid;
    let bad: Vec<usize> = (0..grid.npoints()).filter(|&p| !res.good[p]).collect();
    // sup over bad cells of |D^k v_lambda| and of a^{1/q}|D^k v_lambda| on B_2R
    let sups: Vec<(f64, f64)> = (0..=m)
        .map(|k| {
            bad.par_iter()
                .map(|&p| {
                    let d = res.glued_derivative_norm(p, k);
                    let in2r = dist(&grid.center(p), &res.setup.center) < 2.0 * res.setup.big_r;
                    let aw = if in2r && a.values[p] > 0.0 { a.values[p].powf(1.0 / cfg.q) * d } else { 0.0 };
                    (d, aw)
                })
                .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)))
        })
        .collect();
    let r = res.setup.big_r;
    let lam = res.lambda;
    let mut c1 = Vec::new();
    let mut c2 = Vec::new();
    for l in 0..=m {
        let mut r1 = Vec::new();
        let mut r2 = Vec::new();
        for k in 0..=l {
            let scale = r.powi(l as i32 - k as i32);
            r1.push(sups[k].0 / (scale * lam.powf(1.0 / derived.gamma(P, l))));
            r2.push(sups[k].1 / (scale * lam.powf(1.0 / derived.gamma(Q, l))));
        }
        c1.push(r1);
        c2.push(r2);
    }
    DerivativeBounds { c1, c2 }
}

/// Max over balls and l <= m of avg_{3/4 B_i} |D^l v - D^l P_i| / (r_i^{m-l} lambda^{1/p}).
pub fn oscillation_report(res: &TruncationResult, p: f64) -> f64 {
    let grid = &res.v.grid;
    let n = grid.n();
    let m = res.m;
    (0..res.cover.balls.len())
        .into_par_iter()
        .map(|i| {
            let b = &res.cover.balls[i];
            let cells: Vec<usize> = res.pou.samples[i].iter().map(|&(c, _)| c).collect();
            let mut worst = 0.0f64;
            for l in 0..=m {
                let sigmas = MultiIndex::of_order(n, l as u32);
                let derivs: Vec<MVPolynomial> = sigmas.iter().map(|s| res.local_polys[i].differentiate(s)).collect();
                let vals: Vec<f64> = cells
                    .iter()
                    .map(|&c| {
                        let x = &grid.center3(c)[..n];
                        let mut s2 = 0.0;
                        for (s, dp) in sigmas.iter().zip(&derivs) {
                            let d = res.v_cache.get(s).values[c] - dp.evaluate(x)[0];
                            s2 += d * d;
                        }
                        s2.sqrt()
                    })
                    .collect();
                if vals.is_empty() {
                    continue;
                }
                let avg = pairwise_sum(&vals) / vals.len() as f64;
                worst = worst.max(avg / (b.radius.powi((m - l) as i32) * res.lambda.powf(1.0 / p)));
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferReport {
    /// sup over (i, j in A_i, sigma, l) of |d_sigma P_j - d_sigma Q_i| / (r_i^{l-k} T_{l,i}).
    pub constant: f64,
    pub pairs: usize,
    /// Pairs skipped because both sides vanished.
    pub exact_pairs: usize,
}

/// Compare P_j (j in A_i) with Q_i on 3/4 B_i. Q_i is the psi_i-weighted fit on
/// B_i, which coincides with P_i since psi_i vanishes outside 3/4 B_i.
pub fn polynomial_transfer_report(res: &TruncationResult) -> TransferReport {
    let grid = &res.v.grid;
    let n = grid.n();
    let m = res.m;
    let k_balls = res.cover.balls.len();
    // avg_{B_j} |D^l v|
    let avg_dl: Vec<Vec<f64>> = (0..k_balls)
        .into_par_iter()
        .map(|j| {
            let b = &res.cover.balls[j];
            let mut cells = grid.ball_cells(&b.center, b.radius);
            if cells.is_empty() {
                cells.push(b.index);
            }
            (0..=m)
                .map(|l| {
                    let norm = res.v_cache.norm(l as u32);
                    let v: Vec<f64> = cells.iter().map(|&c| norm.values[c]).collect();
                    pairwise_sum(&v) / v.len() as f64
                })
                .collect()
        })
        .collect();
    let per: Vec<(f64, usize, usize)> = (0..k_balls)
        .into_par_iter()
        .map(|i| {
            let bi = &res.cover.balls[i];
            let t: Vec<f64> = (0..=m).map(|l| res.cover.neighbors[i].iter().map(|&j| avg_dl[j][l]).fold(0.0, f64::max)).collect();
            // ball-relative sample points in 3/4 B_i
            let per_axis = 8usize;
            let mut pts = Vec::new();
            let ext = |used: bool| if used { per_axis } else { 1 };
            for a in 0..ext(true) {
                for b in 0..ext(n >= 2) {
                    for c in 0..ext(n >= 3) {
                        let tt = [a, b, c];
                        let x: Vec<f64> = (0..n)
                            .map(|ax| bi.center[ax] + 0.75 * bi.radius * (2.0 * (tt[ax] as f64 + 0.5) / per_axis as f64 - 1.0))
                            .collect();
                        if dist(&x, &bi.center) < 0.75 * bi.radius {
                            pts.push(x);
                        }
                    }
                }
            }
            let mut worst = 0.0f64;
            let mut pairs = 0;
            let mut exact = 0;
            for &j in &res.cover.neighbors[i] {
                for k in 0..m {
                    for sigma in MultiIndex::of_order(n, k as u32) {
                        let dj = res.local_polys[j].differentiate(&sigma);
                        let di = res.local_polys[i].differentiate(&sigma);
                        let diff = pts.iter().map(|x| (dj.evaluate(x)[0] - di.evaluate(x)[0]).abs()).fold(0.0, f64::max);
                        for l in 0..=m {
                            pairs += 1;
                            let den = bi.radius.powi(l as i32 - k as i32) * t[l];
                            if den == 0.0 {
                                if diff == 0.0 {
                                    exact += 1;
                                } else {
                                    worst = f64::INFINITY;
                                }
                                continue;
                            }
                            worst = worst.max(diff / den);
                        }
                    }
                }
            }
            (worst, pairs, exact)
        })
        .collect();
    TransferReport {
        constant: per.iter().map(|p| p.0).fold(0.0, f64::max),
        pairs: per.iter().map(|p| p.1).sum(),
        exact_pairs: per.iter().map(|p| p.2).sum(),
    }
}

/// Max over test balls B(z, r) and l <= m-1 of avg |D^l v_lambda - (D^l v_lambda)_B| / r
/// divided by R^{m-l-1} lambda^{1/p}. Centres z lie on the lattice of spacing
/// R/8 around the centre (inside B_{4R}) and r = R 2^-1..2^-4, so the family
/// does not depend on the grid; balls holding fewer than 3 cells are skipped.
pub fn admissibility_report(res: &TruncationResult, p: f64) -> f64 {
    let grid = &res.v.grid;
    let n = grid.n();
    let m = res.m;
    let big_r = res.setup.big_r;
    let spacing = big_r / 8.0;
    let k = 32i64;
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut idx = vec![-k; n];
    loop {
        let z: Vec<f64> = (0..n).map(|a| res.setup.center[a] + idx[a] as f64 * spacing).collect();
        if dist(&z, &res.setup.center) < 4.0 * big_r {
            centers.push(z);
        }
        let mut a = 0;
        while a < n {
            idx[a] += 1;
            if idx[a] <= k {
                break;
            }
            idx[a] = -k;
            a += 1;
        }
        if a == n {
            break;
        }
    }
    let fields: Vec<Vec<&GridFunction>> = (0..m)
        .map(|l| MultiIndex::of_order(n, l as u32).into_iter().map(|s| res.vl_cache.get(&s)).collect())
        .collect();
    centers
        .par_iter()
        .map(|z| {
            let mut worst = 0.0f64;
            for e in 1..=4 {
                let r = big_r * 0.5f64.powi(e);
                let cells = grid.ball_cells(z, r);
                if cells.len() < 3 {
                    continue;
                }
                for l in 0..m {
                    let comps = &fields[l];
                    let means: Vec<f64> = comps
                        .iter()
                        .map(|f| pairwise_sum(&cells.iter().map(|&q| f.values[q]).collect::<Vec<_>>()) / cells.len() as f64)
                        .collect();
                    let dev: Vec<f64> = cells
                        .iter()
                        .map(|&q| comps.iter().zip(&means).map(|(f, mu)| (f.values[q] - mu).powi(2)).sum::<f64>().sqrt())
                        .collect();
                    let osc = pairwise_sum(&dev) / cells.len() as f64 / r;
                    let rhs = big_r.powi(m as i32 - l as i32 - 1) * res.lambda.powf(1.0 / p);
                    worst = worst.max(osc / rhs);
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// The smallness radius R_0 < 1/2 of the exponent window: the largest R with
/// R^e (||M^{2l+1}|D^l u|||_{L^{gamma_p d0}}^{1-gamma_p/gamma_q} + 1) <= 1 for all l.
pub fn smallness_radius(dnorm: &[GridFunction], cfg: &ExponentConfig, derived: &DerivedExponents) -> f64 {
    let n = cfg.n as f64;
    let d0 = derived.d0();
    let mut r0 = 0.5f64;
    for (l, dl) in dnorm.iter().enumerate() {
        let gp = derived.gamma(P, l);
        let gq = derived.gamma(Q, l);
        let e = cfg.alpha / cfg.q - n * (1.0 / (gp * d0) - 1.0 / (gq * d0));
        let ml = iterated_plain(dl, 2 * l + 1);
        let s = gp * d0;
        let vals: Vec<f64> = ml.values.iter().map(|v| v.powf(s)).collect();
        let norm = (pairwise_sum(&vals) * ml.grid.cell_volume()).powf(1.0 / s);
        let k = norm.powf(1.0 - gp / gq) + 1.0;
        if e > 0.0 {
            r0 = r0.min(k.powf(-1.0 / e));
        }
    }
    r0
}

/// Test problem: smooth u on [-1, 1], a = 1, and a concentrated datum
/// h_{p,m} with h^t = (|x - x0|^2 + w^2)^(-s/2) that drives G above the floor.
#[derive(Clone, Debug)]
pub struct ModelCase {
    pub cfg: ExponentConfig,
    pub derived: DerivedExponents,
    pub setup: TruncationSetup,
    pub u: GridFunction,
    pub weight: Weight,
    pub data: DataFields,
}

pub fn model_case(cells: usize) -> Result<ModelCase> {
    let cfg = ExponentConfig::model(1, 2, 2.0, 2.2, 0.5);
    let derived = crate::exponents::derive(&cfg)?;
    let setup = TruncationSetup { center: vec![0.0], big_r: 0.25, delta: TruncationSetup::default_delta(derived.d0()) };
    let grid = Grid::cube(1, -1.0, 1.0, cells);
    let u = grid.sample(|x| 0.05 * (2.0 * x[0]).sin() + 0.02 * (3.0 * x[0] + 0.5).cos())?;
    let weight = Weight::constant(&grid, 1.0, cfg.alpha);
    let m = cfg.m;
    let t = derived.gammas.t_hat[P][m];
    let (x0, w, s) = (0.0371, 0.002, 0.85);
    let h = grid.sample(|x| ((x[0] - x0).powi(2) + w * w).powf(-0.5 * s / t))?;
    let mut data = DataFields::default();
    data.h[P] = vec![None; m + 1];
    data.h[P][m] = Some(h);
    Ok(ModelCase { cfg, derived, setup, u, weight, data })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelReport {
    pub factor: f64,
    pub lambda: f64,
    pub level: LevelSet,
    pub bad_cells: usize,
    pub balls: usize,
    pub contained: bool,
    pub consistency: ConsistencyReport,
    pub bounds: DerivativeBounds,
    pub oscillation: f64,
    pub transfer: TransferReport,
    pub campanato: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub cells: usize,
    pub lambda0: LambdaFloor,
    pub sup_g: f64,
    pub g_bound: GBoundReport,
    pub smallness_radius: f64,
    pub levels: Vec<LevelReport>,
    /// Levels below the floor (fractions of sup G) with larger bad sets.
    pub sub_floor: Vec<LevelReport>,
    /// lambda above sup G leaves v unchanged bitwise.
    pub identity_above_sup: bool,
}

pub const LEVEL_FACTORS: [f64; 3] = [1.1, 2.0, 4.0];
pub const SUB_FLOOR_FRACTIONS: [f64; 2] = [0.1, 0.3];

pub fn level_report(case: &ModelCase, big_g: &GridFunction, factor: f64, lambda: f64) -> Result<LevelReport> {
    truncate_and_report(case, big_g, factor, lambda).map(|(rep, _)| rep)
}

/// Truncate at `lambda` and measure every bound; also returns v_lambda.
pub fn truncate_and_report(case: &ModelCase, big_g: &GridFunction, factor: f64, lambda: f64) -> Result<(LevelReport, GridFunction)> {
    let ls = level_set(big_g, lambda)?;
    let res = truncate(&case.u, case.cfg.m, &case.setup, big_g, ls.lambda)?;
    let p = case.cfg.p;
    let rep = LevelReport {
        factor,
        lambda: ls.lambda,
        bad_cells: res.good.iter().filter(|g| !**g).count(),
        balls: res.cover.balls.len(),
        contained: bad_set_contained(big_g, ls.lambda, &case.setup),
        consistency: res.consistency.clone(),
        bounds: derivative_bounds_report(&res, &case.weight.a, &case.cfg, &case.derived),
        oscillation: oscillation_report(&res, p),
        transfer: polynomial_transfer_report(&res),
        campanato: admissibility_report(&res, p),
        level: ls,
    };
    Ok((rep, res.v_lambda))
}

pub fn run_case(case: &ModelCase) -> Result<CaseReport> {
    let asm = assemble_g(&case.u, &case.weight, &case.cfg, &case.derived, &case.data, &case.setup, None)?;
    let lf = lambda_floor(&asm.big_g, &case.setup);
    let levels = LEVEL_FACTORS
        .iter()
        .map(|&k| level_report(case, &asm.big_g, k, k * lf.lambda0))
        .collect::<Result<Vec<_>>>()?;
    let sup_g = asm.big_g.max_abs();
    let sub_floor = SUB_FLOOR_FRACTIONS
        .iter()
        .map(|&k| level_report(case, &asm.big_g, k, k * sup_g))
        .collect::<Result<Vec<_>>>()?;
    let top = truncate(&case.u, case.cfg.m, &case.setup, &asm.big_g, sup_g)?;
    let identity_above_sup = top.v.values.iter().zip(&top.v_lambda.values).all(|(a, b)| a.to_bits() == b.to_bits());
    Ok(CaseReport {
        cells: case.u.grid.npoints(),
        g_bound: g_bound_report(&asm, &case.setup),
        smallness_radius: smallness_radius(&asm.dnorm, &case.cfg, &case.derived),
        lambda0: lf,
        sup_g,
        levels,
        sub_floor,
        identity_above_sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::derive;

    fn setup1() -> (ExponentConfig, DerivedExponents, TruncationSetup) {
        let cfg = ExponentConfig::model(1, 2, 2.0, 2.2, 0.5);
        let d = derive(&cfg).unwrap();
        let s = TruncationSetup { center: vec![0.0], big_r: 0.2, delta: TruncationSetup::default_delta(d.d0()) };
        (cfg, d, s)
    }

    #[test]
    fn zero_input_gives_zero_g() {
        let (cfg, d, s) = setup1();
        let g = Grid::cube(1, -1.0, 1.0, 128);
        let u = g.zeros(1);
        let w = Weight::constant(&g, 1.0, 0.5);
        let asm = assemble_g(&u, &w, &cfg, &d, &DataFields::default(), &s, None).unwrap();
        assert!(asm.g.values.iter().all(|&v| v == 0.0));
        assert!(asm.big_g.values.iter().all(|&v| v == 0.0));
        assert_eq!(lambda_floor(&asm.big_g, &s).lambda0, 6.0);
    }

    #[test]
    fn high_level_leaves_v_untouched() {
        let (cfg, d, s) = setup1();
        let g = Grid::cube(1, -1.0, 1.0, 128);
        let u = g.sample(|x| (2.0 * x[0]).sin()).unwrap();
        let w = Weight::constant(&g, 1.0, 0.5);
        let asm = assemble_g(&u, &w, &cfg, &d, &DataFields::default(), &s, None).unwrap();
        let top = asm.big_g.max_abs() * 1.01 + 1.0;
        let res = truncate(&u, 2, &s, &asm.big_g, top).unwrap();
        assert!(res.cover.balls.is_empty());
        assert!(res.v.values.iter().zip(&res.v_lambda.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn level_set_extremes() {
        let g = Grid::cube(2, 0.0, 1.0, 16);
        let f = g.sample(|x| x[0] + x[1]).unwrap();
        assert!(level_set(&f, 10.0).unwrap().good.iter().all(|&b| b));
        assert!(level_set(&f, 1e-6).unwrap().good.iter().all(|&b| !b));
    }
}
