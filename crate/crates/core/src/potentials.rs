//! Riesz potentials restricted to a ball and the Sobolev-Poincare checks that
//! rest on them.

use crate::error::{Error, Result};
use crate::exponents::{riesz_gap, sobolev_exponent};
use crate::grid::{mean_mask, Grid, GridFunction};
use crate::maximal::{ratio_sup, RatioSup};
use crate::meanpoly;
use crate::numeric::pairwise_sum;
use rayon::prelude::*;
use serde::Serialize;

/// Integral of |y|^{gamma-n} over the unit cell [-1/2, 1/2]^n.
///
/// The integral over Q equals the integral over Q \ Q/2 divided by
/// 1 - 2^{-gamma}; the annulus is integrated by the midpoint rule with 64
/// sub-cells per axis.
pub fn self_cell_integral(n: usize, gamma: f64) -> f64 {
    if n == 1 {
        return 2.0 * 0.5f64.powf(gamma) / gamma;
    }
    const SUB: usize = 64;
    let w = 1.0 / SUB as f64;
    let mut terms = Vec::with_capacity(SUB.pow(n as u32));
    let ext = |used: bool| if used { SUB } else { 1 };
    for i in 0..SUB {
        for j in 0..ext(n >= 2) {
            for k in 0..ext(n >= 3) {
                let c = [(i as f64 + 0.5) * w - 0.5, (j as f64 + 0.5) * w - 0.5, (k as f64 + 0.5) * w - 0.5];
                let c = &c[..n];
                if c.iter().all(|v| v.abs() < 0.25) {
                    continue;
                }
                let r2: f64 = c.iter().map(|v| v * v).sum();
                terms.push(r2.powf(0.5 * (gamma - n as f64)));
            }
        }
    }
    let annulus = pairwise_sum(&terms) * w.powi(n as i32);
    annulus / (1.0 - 2f64.powf(-gamma))
}

/// Kernel weights h^n |d h|^{gamma-n} indexed by absolute lattice offset;
/// the zero offset carries the exact self-cell integral.
struct Kernel {
    ext: [usize; 3],
    vals: Vec<f64>,
}

impl Kernel {
    fn new(grid: &Grid, gamma: f64) -> Self {
        let n = grid.n();
        let h = grid.spacing;
        let s = grid.shape3();
        let hn = grid.cell_volume();
        let mut vals: Vec<f64> = (0..s[0] * s[1] * s[2])
            .map(|i| {
                let (a, b, c) = (i / (s[1] * s[2]), (i / s[2]) % s[1], i % s[2]);
                let d2 = (a * a + b * b + c * c) as f64;
                if d2 == 0.0 {
                    0.0
                } else {
                    hn * (d2.sqrt() * h).powf(gamma - n as f64)
                }
            })
            .collect();
        vals[0] = h.powf(gamma) * self_cell_integral(n, gamma);
        Kernel { ext: s, vals }
    }

    #[inline]
    fn get(&self, x: [usize; 3], y: [usize; 3]) -> f64 {
        let a = x[0].abs_diff(y[0]);
        let b = x[1].abs_diff(y[1]);
        let c = x[2].abs_diff(y[2]);
        self.vals[(a * self.ext[1] + b) * self.ext[2] + c]
    }
}

/// I_gamma f(x) = sum over cells y of B of |f(y)| h^n |x - y|^{gamma-n},
/// evaluated at every grid point.
pub fn riesz_potential(f: &GridFunction, gamma: f64, mask: &[bool]) -> Result<GridFunction> {
    let n = f.n() as f64;
    if !(gamma > 0.0 && gamma < n) {
        return Err(Error::Domain(format!("gamma must lie in (0, {n}), got {gamma}")));
    }
    let g = &f.grid;
    let kernel = Kernel::new(g, gamma);
    let fabs = if f.components == 1 { f.map(f64::abs) } else { f.pointwise_norm() };
    let src: Vec<(usize, [usize; 3])> = (0..g.npoints())
        .filter(|&i| mask[i] && fabs.values[i] != 0.0)
        .map(|i| (i, g.unravel(i)))
        .collect();
    let values = (0..g.npoints())
        .into_par_iter()
        .map(|x| {
            let cx = g.unravel(x);
            let terms: Vec<f64> = src.iter().map(|&(y, cy)| fabs.values[y] * kernel.get(cx, cy)).collect();
            pairwise_sum(&terms)
        })
        .collect();
    Ok(GridFunction { grid: g.clone(), components: 1, values })
}

fn lp_norm(values: &[f64], mask: &[bool], r: f64, vol: f64) -> f64 {
    let terms: Vec<f64> = values.iter().zip(mask).filter(|(_, &m)| m).map(|(v, _)| v.abs().powf(r)).collect();
    (pairwise_sum(&terms) * vol).powf(1.0 / r)
}

fn avg_norm(values: &[f64], mask: &[bool], r: f64) -> f64 {
    let terms: Vec<f64> = values.iter().zip(mask).filter(|(_, &m)| m).map(|(v, _)| v.abs().powf(r)).collect();
    if terms.is_empty() {
        return 0.0;
    }
    (pairwise_sum(&terms) / terms.len() as f64).powf(1.0 / r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrongTypeReport {
    pub r: f64,
    pub gamma: f64,
    pub target: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// ||I_gamma f||_{L^{nr/(n-gamma r)}(B)} / ||f||_{L^r(B)}.
pub fn strong_type_report(f: &GridFunction, r: f64, gamma: f64, mask: &[bool]) -> Result<StrongTypeReport> {
    let n = f.n() as f64;
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::Domain(format!("r must lie in (1, inf), got {r}")));
    }
    if gamma >= n / r {
        return Err(Error::Domain(format!("gamma {gamma} must be below n/r = {}", n / r)));
    }
    let target = n * r / (n - gamma * r);
    let ig = riesz_potential(f, gamma, mask)?;
    let vol = f.grid.cell_volume();
    let lhs = lp_norm(&ig.values, mask, target, vol);
    let fabs = f.pointwise_norm();
    let rhs = lp_norm(&fabs.values, mask, r, vol);
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(StrongTypeReport { r, gamma, target, lhs, rhs, ratio })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedSplitReport {
    pub beta: f64,
    pub radius_power: f64,
    pub ratio: RatioSup,
    pub reference: f64,
}

/// a^{1/q} I_1 f <= c I_1(a^{1/q} f) + c R^{1 + alpha/q - beta} I_beta f on B.
#[allow(clippy::too_many_arguments)]
pub fn weighted_split_check(
    f: &GridFunction,
    a: &GridFunction,
    seminorm: f64,
    p: f64,
    q: f64,
    alpha: f64,
    ball: (&[f64], f64),
) -> Result<WeightedSplitReport> {
    let n = f.n();
    if q / p > 1.0 + alpha / n as f64 {
        return Err(Error::Precondition(format!("q/p = {} exceeds 1 + alpha/n", q / p)));
    }
    let gap = riesz_gap(p, q, n, alpha)?;
    let (center, radius) = ball;
    let mask = f.grid.ball_mask(center, radius);
    let aq = a.map(|v| v.max(0.0).powf(1.0 / q));
    let fabs = f.pointwise_norm();
    let lhs = riesz_potential(&fabs, 1.0, &mask)?.zip(&aq, |i, w| w * i);
    let first = riesz_potential(&fabs.zip(&aq, |v, w| v * w), 1.0, &mask)?;
    let radius_power = 1.0 + alpha / q - gap.beta;
    let second = if gap.beta < n as f64 {
        riesz_potential(&fabs, gap.beta, &mask)?
    } else {
        return Err(Error::Domain(format!("beta_pq = {} is not below n", gap.beta)));
    };
    let rp = radius.powf(radius_power);
    let den: Vec<f64> = first.values.iter().zip(&second.values).map(|(x, y)| x + rp * y).collect();
    let reference = seminorm.powf(1.0 / q) * 1f64.max(2f64.powf(radius_power));
    Ok(WeightedSplitReport { beta: gap.beta, radius_power, ratio: ratio_sup(&lhs.values, &den, Some(&mask)), reference })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointwiseRieszReport {
    pub mean_residual: f64,
    pub ratio: RatioSup,
}

/// sup_B |u| / I_1(|Du|) for u with vanishing eta-average.
pub fn pointwise_riesz_bound_check(u: &GridFunction, ball: (&[f64], f64), eta: &GridFunction) -> Result<PointwiseRieszReport> {
    let (center, radius) = ball;
    let mask = u.grid.ball_mask(center, radius);
    crate::maximal::check_cutoff_mass(eta, &mask)?;
    let avg = crate::grid::weighted_average_mask(u, &mask, eta)?;
    let scale = u.max_abs() + 1.0;
    let mean_residual = avg.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale;
    if mean_residual > 1e-8 {
        return Err(Error::Precondition(format!("weighted mean does not vanish: {mean_residual:e}")));
    }
    let du = crate::grid::derivative_norm(u, 1)?;
    let i1 = riesz_potential(&du, 1.0, &mask)?;
    let num = u.pointwise_norm().values;
    Ok(PointwiseRieszReport { mean_residual, ratio: ratio_sup(&num, &i1.values, Some(&mask)) })
}

/// Which exponent the left-hand side uses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpExponent {
    pub r: f64,
    /// Upper end of the admissible range, (q_l)^*.
    pub r_max: f64,
    /// Whether r_max itself is admissible (l q < n).
    pub closed: bool,
    /// Auxiliary s in (p, q) with (s_l)^* = r, when one is needed.
    pub s_aux: Option<f64>,
}

/// Validate the target exponent and solve for the auxiliary s when l p < n
/// and r exceeds (p_l)^*.
pub fn sp_exponent(n: usize, l: usize, p: f64, q: f64, r: f64) -> Result<SpExponent> {
    let r_max = sobolev_exponent(q, l, n);
    let closed = (l as f64) * q < n as f64;
    let ok = r >= 1.0 && if closed { r <= r_max } else { r < r_max };
    if !ok {
        return Err(Error::Domain(format!("target exponent {r} outside [1, {r_max}{}", if closed { "]" } else { ")" })));
    }
    let nf = n as f64;
    let lf = l as f64;
    let s_aux = if lf * p < nf && r > sobolev_exponent(p, l, n) && r.is_finite() {
        // nr/(n + l r) inverts t -> nt/(n - l t)
        let s = nf * r / (nf + lf * r);
        Some(s)
    } else {
        None
    };
    Ok(SpExponent { r, r_max, closed, s_aux })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SobolevPoincareReport {
    pub exponent: SpExponent,
    pub lhs: f64,
    /// (avg a |D^l u|^q)^{1/q}
    pub rhs_weighted: f64,
    /// R^{alpha/q} (avg |D^l u|^p)^{1/p}
    pub rhs_radius: f64,
    pub ratio: f64,
}

impl SobolevPoincareReport {
    pub fn rhs(&self) -> f64 {
        self.rhs_weighted + self.rhs_radius
    }

    pub fn holds_with(&self, c: f64, drop_radius_term: bool) -> bool {
        let rhs = if drop_radius_term { self.rhs_weighted } else { self.rhs() };
        self.lhs <= c * rhs
    }
}

/// Parameters of the double-phase Sobolev-Poincare check.
#[derive(Clone, Debug, PartialEq)]
pub struct SpParams {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub order: usize,
    pub r: f64,
}

/// (avg_B a^{r/q} |(u - P)/R^l|^r)^{1/r} against the two right-hand terms,
/// where P is the eta-weighted mean-value polynomial of degree l - 1.
pub fn sobolev_poincare_report(
    u: &GridFunction,
    a: &GridFunction,
    sp: &SpParams,
    ball: (&[f64], f64),
    eta: &GridFunction,
) -> Result<SobolevPoincareReport> {
    let (center, radius) = ball;
    let exponent = sp_exponent(u.n(), sp.order, sp.p, sp.q, sp.r)?;
    let mask = u.grid.ball_mask(center, radius);
    if !mask.iter().any(|&b| b) {
        return Err(Error::EmptyRegion);
    }
    let poly = meanpoly::fit(u, &mask, eta, sp.order, center)?;
    let w = u.zip(&meanpoly::sample(&poly, &u.grid, u.components), |a, b| a - b);
    let rl = radius.powi(sp.order as i32);
    let wn = w.pointwise_norm();
    let lhs_field: Vec<f64> = wn
        .values
        .iter()
        .zip(&a.values)
        .map(|(v, av)| av.max(0.0).powf(1.0 / sp.q) * v / rl)
        .collect();
    let lhs = avg_norm(&lhs_field, &mask, sp.r);
    let dl = crate::grid::derivative_norm(u, sp.order as u32)?;
    let weighted: Vec<f64> = dl.values.iter().zip(&a.values).map(|(d, av)| av.max(0.0).powf(1.0 / sp.q) * d).collect();
    let rhs_weighted = avg_norm(&weighted, &mask, sp.q);
    let rhs_radius = radius.powf(sp.alpha / sp.q) * avg_norm(&dl.values, &mask, sp.p);
    let rhs = rhs_weighted + rhs_radius;
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(SobolevPoincareReport { exponent, lhs, rhs_weighted, rhs_radius, ratio })
}

/// Plain average of |f|^r over the mask, raised to 1/r.
pub fn average_norm(f: &GridFunction, mask: &[bool], r: f64) -> Result<f64> {
    Ok(mean_mask(&f.pointwise_norm(), mask, Some(r))?[0].powf(1.0 / r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_cell_closed_form_in_one_dimension() {
        let g = 0.5;
        assert!((self_cell_integral(1, g) - 2.0 * 0.5f64.sqrt() / 0.5).abs() < 1e-15);
    }

    #[test]
    fn self_cell_two_dimensional_against_polar_bound() {
        // the unit square lies between the discs of radius 1/2 and 1/sqrt(2)
        let gamma = 1.0;
        let j = self_cell_integral(2, gamma);
        let inner = 2.0 * std::f64::consts::PI * 0.5;
        let outer = 2.0 * std::f64::consts::PI * 0.5f64.sqrt();
        assert!(j > inner && j < outer, "{j}");
    }

    #[test]
    fn one_dimensional_potential_of_one() {
        let g = Grid::cube(1, -1.0, 1.0, 255);
        let f = g.sample(|_| 1.0).unwrap();
        let mask = vec![true; g.npoints()];
        let i = riesz_potential(&f, 0.5, &mask).unwrap();
        let mid = g.nearest(&[0.0]);
        assert!((i.values[mid] - 4.0).abs() < 0.04, "{}", i.values[mid]);
    }

    #[test]
    fn sp_exponent_branches() {
        let e = sp_exponent(2, 1, 2.0, 2.2, 2.2).unwrap();
        assert!(e.s_aux.is_none() && !e.closed);
        let e = sp_exponent(3, 1, 1.5, 2.0, 5.0).unwrap();
        let s = e.s_aux.unwrap();
        assert!((sobolev_exponent(s, 1, 3) - 5.0).abs() < 1e-12);
        assert!(sp_exponent(3, 1, 1.5, 2.0, 6.5).is_err());
    }
}
