//! Weighted mean-value polynomials: the unique polynomial P of degree below m
//! whose eta-weighted averages of every derivative up to order m - 1 match
//! those of u.

use crate::error::{Error, Result};
use crate::grid::{weighted_average_mask, DerivativeCache, Grid, GridFunction, MultiIndex};
use crate::maximal::{iterated_maximal, ratio_sup, RatioSup};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// P(x) = sum over |sigma| < m of a_sigma (x - x0)^sigma, vector-valued.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MVPolynomial {
    pub center: Vec<f64>,
    /// Coefficients are stored for every |sigma| <= m - 1.
    pub m: usize,
    pub components: usize,
    pub coeffs: BTreeMap<MultiIndex, Vec<f64>>,
}

impl MVPolynomial {
    pub fn zero(n: usize, m: usize, components: usize, center: &[f64]) -> Self {
        let coeffs = if m == 0 {
            BTreeMap::new()
        } else {
            MultiIndex::up_to(n, m as u32 - 1).into_iter().map(|s| (s, vec![0.0; components])).collect()
        };
        MVPolynomial { center: center.to_vec(), m, components, coeffs }
    }

    pub fn n(&self) -> usize {
        self.center.len()
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        for (sigma, a) in &self.coeffs {
            let mono = sigma.pow(&d);
            for (o, c) in out.iter_mut().zip(a) {
                *o += c * mono;
            }
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.components];
        self.eval_into(x, &mut out);
        out
    }

    /// d_sigma P; the zero polynomial once |sigma| >= m.
    pub fn differentiate(&self, sigma: &MultiIndex) -> MVPolynomial {
        let mut out = MVPolynomial::zero(self.n(), self.m, self.components, &self.center);
        if sigma.order() as usize >= self.m {
            return out;
        }
        for (nu, b) in out.coeffs.iter_mut() {
            let tau = nu.plus(sigma);
            if let Some(a) = self.coeffs.get(&tau) {
                let f = tau.falling_ratio(sigma);
                for (bi, ai) in b.iter_mut().zip(a) {
                    *bi = ai * f;
                }
            }
        }
        out
    }

    /// Same polynomial expanded around a new centre (Taylor shift).
    pub fn recenter(&self, x1: &[f64]) -> MVPolynomial {
        let mut out = MVPolynomial::zero(self.n(), self.m, self.components, x1);
        let keys: Vec<MultiIndex> = out.coeffs.keys().cloned().collect();
        for nu in keys {
            let v = self.differentiate(&nu).evaluate(x1);
            let f = nu.factorial();
            out.coeffs.insert(nu, v.into_iter().map(|c| c / f).collect());
        }
        out
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.values().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Sample P at the cell centres of `grid`.
pub fn sample(p: &MVPolynomial, grid: &Grid, components: usize) -> GridFunction {
    let n = grid.n();
    let mut values = vec![0.0; grid.npoints() * components];
    values.par_chunks_mut(components).enumerate().for_each(|(i, out)| {
        p.eval_into(&grid.center3(i)[..n], out);
    });
    GridFunction { grid: grid.clone(), components, values }
}

/// Weighted averages of the monomials (x - x0)^nu, |nu| <= m - 1.
fn monomial_moments(grid: &Grid, mask: &[bool], eta: &GridFunction, m: usize, x0: &[f64]) -> Result<BTreeMap<MultiIndex, f64>> {
    let n = grid.n();
    let mut out = BTreeMap::new();
    if m == 0 {
        return Ok(out);
    }
    for nu in MultiIndex::up_to(n, m as u32 - 1) {
        let f = grid.sample(|x| {
            let d: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
            nu.pow(&d)
        })?;
        out.insert(nu, weighted_average_mask(&f, mask, eta)?[0]);
    }
    Ok(out)
}

/// Fit from precomputed derivative fields (order >= m - 1).
pub fn fit_cached(cache: &DerivativeCache, mask: &[bool], eta: &GridFunction, m: usize, x0: &[f64]) -> Result<MVPolynomial> {
    let u = &cache.fields[0];
    let n = u.n();
    let k = u.components;
    let mut poly = MVPolynomial::zero(n, m, k, x0);
    if m == 0 {
        return Ok(poly);
    }
    let moments = monomial_moments(&u.grid, mask, eta, m, x0)?;
    // decreasing |sigma|, lexicographic within an order
    for ord in (0..m as u32).rev() {
        for sigma in MultiIndex::of_order(n, ord) {
            let mut target = weighted_average_mask(cache.get(&sigma), mask, eta)?;
            for (tau, a_tau) in poly.coeffs.iter() {
                if tau.order() <= ord || !tau.dominates(&sigma) {
                    continue;
                }
                let nu = tau.minus(&sigma)?;
                let w = tau.falling_ratio(&sigma) * moments[&nu];
                for (t, a) in target.iter_mut().zip(a_tau) {
                    *t -= a * w;
                }
            }
            let f = sigma.factorial();
            poly.coeffs.insert(sigma, target.into_iter().map(|t| t / f).collect());
        }
    }
    Ok(poly)
}

/// Mean-value polynomial of u on the mask with weight eta, degree <= m - 1.
pub fn fit(u: &GridFunction, mask: &[bool], eta: &GridFunction, m: usize, x0: &[f64]) -> Result<MVPolynomial> {
    let cache = DerivativeCache::new(u, m.saturating_sub(1) as u32)?;
    fit_cached(&cache, mask, eta, m, x0)
}

/// max over |sigma| < m of |(d_sigma u - d_sigma P)_{B,eta}|.
pub fn moment_residual(cache: &DerivativeCache, p: &MVPolynomial, mask: &[bool], eta: &GridFunction) -> Result<f64> {
    let u = &cache.fields[0];
    let n = u.n();
    let mut worst = 0.0f64;
    if p.m == 0 {
        return Ok(0.0);
    }
    for sigma in MultiIndex::up_to(n, p.m as u32 - 1) {
        let dp = sample(&p.differentiate(&sigma), &u.grid, u.components);
        let diff = cache.get(&sigma).zip(&dp, |a, b| a - b);
        for v in weighted_average_mask(&diff, mask, eta)? {
            worst = worst.max(v.abs());
        }
    }
    Ok(worst)
}

/// |D^l P(x)| over all multi-indices of order l and all components.
pub fn derivative_norm_at(p: &MVPolynomial, l: usize, x: &[f64]) -> f64 {
    let mut s = 0.0;
    for sigma in MultiIndex::of_order(p.n(), l as u32) {
        for v in p.differentiate(&sigma).evaluate(x) {
            s += v * v;
        }
    }
    s.sqrt()
}

/// |(D^l u)_{B,eta}|.
fn averaged_derivative_norm(cache: &DerivativeCache, l: usize, mask: &[bool], eta: &GridFunction) -> Result<f64> {
    let n = cache.fields[0].n();
    let mut s = 0.0;
    for sigma in MultiIndex::of_order(n, l as u32) {
        for v in weighted_average_mask(cache.get(&sigma), mask, eta)? {
            s += v * v;
        }
    }
    Ok(s.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientBounds {
    /// Per order l: sup |D^l P| / sum_mu R^{mu-l} |(D^mu u)_{B,eta}|.
    pub ratios: Vec<f64>,
    pub aux_center: Vec<f64>,
    pub aux_radius: f64,
}

/// Bound |D^l P| on B and on an auxiliary ball meeting B of radius at most 4R.
pub fn coefficient_bounds_report(
    p: &MVPolynomial,
    cache: &DerivativeCache,
    ball: (&[f64], f64),
    eta: &GridFunction,
    aux: (&[f64], f64),
) -> Result<CoefficientBounds> {
    let (center, radius) = ball;
    let (ac, ar) = aux;
    let gap = crate::grid::dist(center, ac);
    if gap >= radius + ar || ar > 4.0 * radius {
        return Err(Error::Precondition("auxiliary ball must meet B and have radius <= 4R".into()));
    }
    let grid = &cache.fields[0].grid;
    let mask = grid.ball_mask(center, radius);
    let aux_mask = grid.ball_mask(ac, ar);
    let avg: Vec<f64> = (0..p.m).map(|mu| averaged_derivative_norm(cache, mu, &mask, eta)).collect::<Result<_>>()?;
    let pts: Vec<usize> = (0..grid.npoints()).filter(|&i| mask[i] || aux_mask[i]).collect();
    let mut ratios = Vec::with_capacity(p.m);
    for l in 0..p.m {
        let den: f64 = (l..p.m).map(|mu| radius.powi((mu - l) as i32) * avg[mu]).sum();
        let sup = pts
            .par_iter()
            .map(|&i| derivative_norm_at(p, l, &grid.center(i)))
            .reduce(|| 0.0, f64::max);
        ratios.push(if den > 0.0 { sup / den } else if sup == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(CoefficientBounds { ratios, aux_center: ac.to_vec(), aux_radius: ar })
}

/// Cap on R^l sup|D^l eta| accepted by the integration-by-parts report.
pub fn cutoff_derivative_cap(l: usize) -> f64 {
    100.0 * 8f64.powi(l as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrationByPartsReport {
    /// R^l sup_B |D^l eta|
    pub cutoff_bounds: Vec<f64>,
    /// sup_B |D^l P| / avg_B |D^l u|
    pub ratios: Vec<f64>,
}

pub fn integration_by_parts_report(
    p: &MVPolynomial,
    cache: &DerivativeCache,
    ball: (&[f64], f64),
    eta: &GridFunction,
) -> Result<IntegrationByPartsReport> {
    let (center, radius) = ball;
    let grid = &cache.fields[0].grid;
    let mask = grid.ball_mask(center, radius);
    let ec = DerivativeCache::new(eta, p.m as u32)?;
    let mut cutoff_bounds = Vec::new();
    for l in 0..p.m {
        let d = ec.norm(l as u32);
        let sup = (0..grid.npoints()).filter(|&i| mask[i]).map(|i| d.values[i]).fold(0.0, f64::max);
        cutoff_bounds.push(sup * radius.powi(l as i32));
    }
    if let Some((l, v)) = cutoff_bounds
        .iter()
        .enumerate()
        .filter(|(l, &v)| v > cutoff_derivative_cap(*l))
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
    {
        return Err(Error::Precondition(format!("cutoff derivative of order {l} too large: {v}")));
    }
    let mut ratios = Vec::new();
    for l in 0..p.m {
        let avg = crate::grid::mean_mask(&cache.norm(l as u32), &mask, None)?[0];
        let sup = (0..grid.npoints())
            .into_par_iter()
            .filter(|&i| mask[i])
            .map(|i| derivative_norm_at(p, l, &grid.center(i)))
            .reduce(|| 0.0, f64::max);
        ratios.push(if avg > 0.0 { sup / avg } else if sup == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(IntegrationByPartsReport { cutoff_bounds, ratios })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelBoundReport {
    pub order: usize,
    pub ratio: RatioSup,
}

/// sum_k |D^k u - D^k P| / R^{l-k} against M_B^{2l+1}(|D^l u|) on B, with P
/// the mean-value polynomial of degree l - 1.
pub fn kernel_bound_report(u: &GridFunction, ball: (&[f64], f64), eta: &GridFunction, l: usize) -> Result<KernelBoundReport> {
    let (center, radius) = ball;
    let mask = u.grid.ball_mask(center, radius);
    let cache = DerivativeCache::new(u, l as u32)?;
    let p = fit_cached(&cache, &mask, eta, l, center)?;
    let np = u.npoints();
    let mut lhs = vec![0.0; np];
    for k in 0..=l {
        let w = radius.powi((l - k) as i32);
        let dpk: Vec<MVPolynomial> = MultiIndex::of_order(u.n(), k as u32).iter().map(|s| p.differentiate(s)).collect();
        let sigmas = MultiIndex::of_order(u.n(), k as u32);
        let fields: Vec<&GridFunction> = sigmas.iter().map(|s| cache.get(s)).collect();
        lhs.par_iter_mut().enumerate().for_each(|(i, acc)| {
            if !mask[i] {
                return;
            }
            let x = u.grid.center(i);
            let mut s = 0.0;
            for (f, dp) in fields.iter().zip(&dpk) {
                let pv = dp.evaluate(&x);
                for c in 0..u.components {
                    let d = f.values[i * u.components + c] - pv[c];
                    s += d * d;
                }
            }
            *acc += s.sqrt() / w;
        });
    }
    let dl = cache.norm(l as u32);
    let m = iterated_maximal(&dl, &mask, 2 * l + 1)?;
    Ok(KernelBoundReport { order: l, ratio: ratio_sup(&lhs, &m.values, Some(&mask)) })
}

/// Smooth cutoff equal to 1 on B(c, inner R) and 0 outside B(c, R).
pub fn radial_cutoff_field(grid: &Grid, center: &[f64], radius: f64, inner: f64) -> GridFunction {
    grid.sample(|x| crate::numeric::radial_cutoff(crate::grid::dist(x, center) / radius, inner, 1.0))
        .expect("cutoff is finite")
}
