//! Sampled functions on uniform cell-centred lattices, multi-indices, finite
//! differences and midpoint quadrature.

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Geometry of a uniform lattice: `dims[i]` cells of width `spacing` along
/// axis `i`, starting at `origin`. Samples live at cell centres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dims: Vec<usize>,
    pub origin: Vec<f64>,
    pub spacing: f64,
}

impl Grid {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, spacing: f64) -> Result<Self> {
        let n = dims.len();
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidGrid(format!("dimension {n} not in 1..=3")));
        }
        if origin.len() != n {
            return Err(Error::InvalidGrid("origin length differs from dims".into()));
        }
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidGrid("every axis needs at least 2 cells".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing {spacing} must be positive")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Grid { dims, origin, spacing })
    }

    /// The cube `[lo, hi]^n` split into `cells` cells per axis.
    pub fn cube(n: usize, lo: f64, hi: f64, cells: usize) -> Self {
        Grid::new(vec![cells; n], vec![lo; n], (hi - lo) / cells as f64)
            .expect("valid cube grid")
    }

    /// Axis-aligned box with per-axis resolution; the cell width must agree
    /// across axes.
    pub fn from_box(lo: &[f64], hi: &[f64], res: &[usize]) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != res.len() {
            return Err(Error::InvalidGrid("box and resolution lengths differ".into()));
        }
        let h0 = (hi[0] - lo[0]) / res[0] as f64;
        for i in 1..lo.len() {
            let hi_ = (hi[i] - lo[i]) / res[i] as f64;
            if (hi_ - h0).abs() > 1e-12 * h0.abs().max(1.0) {
                return Err(Error::InvalidGrid("cells must be cubes".into()));
            }
        }
        Grid::new(res.to_vec(), lo.to_vec(), h0)
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn npoints(&self) -> usize {
        self.dims.iter().product()
    }

    /// Extents padded to three axes with trailing ones.
    pub fn shape3(&self) -> [usize; 3] {
        let mut s = [1usize; 3];
        for (i, &d) in self.dims.iter().enumerate() {
            s[i] = d;
        }
        s
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.n() as i32)
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let s = self.shape3();
        [idx / (s[1] * s[2]), (idx / s[2]) % s[1], idx % s[2]]
    }

    pub fn ravel(&self, ijk: [usize; 3]) -> usize {
        let s = self.shape3();
        (ijk[0] * s[1] + ijk[1]) * s[2] + ijk[2]
    }

    /// Cell centre of flat index `idx`, padded with zeros to three axes.
    pub fn center3(&self, idx: usize) -> [f64; 3] {
        let ijk = self.unravel(idx);
        let mut x = [0.0; 3];
        for a in 0..self.n() {
            x[a] = self.origin[a] + (ijk[a] as f64 + 0.5) * self.spacing;
        }
        x
    }

    pub fn center(&self, idx: usize) -> Vec<f64> {
        self.center3(idx)[..self.n()].to_vec()
    }

    /// Upper corner of the box.
    pub fn upper(&self) -> Vec<f64> {
        (0..self.n())
            .map(|a| self.origin[a] + self.dims[a] as f64 * self.spacing)
            .collect()
    }

    /// Flat index of the cell whose centre is nearest to `x`.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let mut ijk = [0usize; 3];
        for a in 0..self.n() {
            let t = ((x[a] - self.origin[a]) / self.spacing - 0.5).round();
            ijk[a] = t.clamp(0.0, (self.dims[a] - 1) as f64) as usize;
        }
        self.ravel(ijk)
    }

    /// Cells whose centre lies strictly inside the ball.
    pub fn ball_mask(&self, center: &[f64], radius: f64) -> Vec<bool> {
        let r2 = radius * radius;
        (0..self.npoints())
            .map(|i| dist2(&self.center3(i), center) < r2)
            .collect()
    }

    /// Flat indices of the cells whose centre lies strictly inside the ball,
    /// in increasing order.
    pub fn ball_cells(&self, center: &[f64], radius: f64) -> Vec<usize> {
        let s = self.shape3();
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for a in 0..self.n() {
            let l = ((center[a] - radius - self.origin[a]) / self.spacing - 0.5).floor();
            let u = ((center[a] + radius - self.origin[a]) / self.spacing - 0.5).ceil();
            if u < 0.0 || l > (s[a] - 1) as f64 {
                return Vec::new();
            }
            lo[a] = l.max(0.0) as usize;
            hi[a] = (u as usize).min(s[a] - 1);
        }
        let r2 = radius * radius;
        let mut out = Vec::new();
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    let p = self.ravel([i, j, k]);
                    if dist2(&self.center3(p)[..self.n()], center) < r2 {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    /// Same geometry refined by a factor 2 per axis.
    pub fn refined(&self) -> Grid {
        Grid {
            dims: self.dims.iter().map(|d| 2 * d).collect(),
            origin: self.origin.clone(),
            spacing: self.spacing / 2.0,
        }
    }

    /// Sample a scalar function at cell centres.
    pub fn sample<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> Result<GridFunction> {
        let n = self.n();
        let values: Vec<f64> = (0..self.npoints())
            .into_par_iter()
            .map(|i| f(&self.center3(i)[..n]))
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { coord: self.center(i), value: values[i] });
        }
        Ok(GridFunction { grid: self.clone(), components: 1, values })
    }

    /// Sample a vector-valued function with `k` components.
    pub fn sample_vec<F: Fn(&[f64], &mut [f64]) + Sync>(&self, k: usize, f: F) -> Result<GridFunction> {
        let n = self.n();
        let mut values = vec![0.0; self.npoints() * k];
        values.par_chunks_mut(k).enumerate().for_each(|(i, out)| f(&self.center3(i)[..n], out));
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { coord: self.center(i / k), value: values[i] });
        }
        Ok(GridFunction { grid: self.clone(), components: k, values })
    }

    /// Zero-filled function.
    pub fn zeros(&self, k: usize) -> GridFunction {
        GridFunction { grid: self.clone(), components: k, values: vec![0.0; self.npoints() * k] }
    }
}

pub(crate) fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    dist2(x, y).sqrt()
}

/// A sampled scalar or vector field. Values are point-major, component fastest,
/// row-major over axes.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub components: usize,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 {
            return Err(Error::InvalidGrid("components must be >= 1".into()));
        }
        if values.len() != grid.npoints() * components {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.npoints() * components,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { coord: grid.center(i / components), value: values[i] });
        }
        Ok(GridFunction { grid, components, values })
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn npoints(&self) -> usize {
        self.grid.npoints()
    }

    pub fn at(&self, idx: usize, c: usize) -> f64 {
        self.values[idx * self.components + c]
    }

    /// Euclidean norm of the component vector at each point.
    pub fn pointwise_norm(&self) -> GridFunction {
        let k = self.components;
        let values = if k == 1 {
            self.values.iter().map(|v| v.abs()).collect()
        } else {
            self.values.chunks(k).map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
        };
        GridFunction { grid: self.grid.clone(), components: 1, values }
    }

    /// Apply `f` to every sample.
    pub fn map<F: Fn(f64) -> f64 + Sync + Send>(&self, f: F) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            components: self.components,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip<F: Fn(f64, f64) -> f64 + Sync + Send>(&self, other: &GridFunction, f: F) -> GridFunction {
        assert_eq!(self.values.len(), other.values.len(), "shape mismatch");
        GridFunction {
            grid: self.grid.clone(),
            components: self.components,
            values: self.values.par_iter().zip(other.values.par_iter()).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Multiply every component by a scalar field.
    pub fn scale_by(&self, s: &GridFunction) -> GridFunction {
        let k = self.components;
        let mut values = self.values.clone();
        values.par_chunks_mut(k).enumerate().for_each(|(i, c)| {
            for v in c.iter_mut() {
                *v *= s.values[i];
            }
        });
        GridFunction { grid: self.grid.clone(), components: k, values }
    }

    /// Zero outside the mask.
    pub fn restrict(&self, mask: &[bool]) -> GridFunction {
        let k = self.components;
        let mut values = self.values.clone();
        for (i, c) in values.chunks_mut(k).enumerate() {
            if !mask[i] {
                c.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        GridFunction { grid: self.grid.clone(), components: k, values }
    }

    /// Extract one component as a scalar function.
    pub fn component(&self, c: usize) -> GridFunction {
        let values = self.values.iter().skip(c).step_by(self.components).copied().collect();
        GridFunction { grid: self.grid.clone(), components: 1, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Subsets of the grid box.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Mask(Vec<bool>),
}

impl Region {
    pub fn ball(center: &[f64], radius: f64) -> Region {
        Region::Ball { center: center.to_vec(), radius }
    }

    /// Per-cell membership on `grid`; a cell belongs iff its centre is strictly inside.
    pub fn mask(&self, grid: &Grid) -> Vec<bool> {
        match self {
            Region::Ball { center, radius } => grid.ball_mask(center, *radius),
            Region::Box { lo, hi } => (0..grid.npoints())
                .map(|i| {
                    let x = grid.center3(i);
                    (0..grid.n()).all(|a| x[a] > lo[a] && x[a] < hi[a])
                })
                .collect(),
            Region::Mask(m) => {
                assert_eq!(m.len(), grid.npoints(), "mask length differs from grid");
                m.clone()
            }
        }
    }
}

/// Multi-index sigma = (sigma_1, ..., sigma_n).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, axis: usize) -> Self {
        let mut v = vec![0; n];
        v[axis] = 1;
        MultiIndex(v)
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// sigma! = sigma_1! ... sigma_n!
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&s| (1..=s as u64).product::<u64>() as f64).product()
    }

    /// x^sigma
    pub fn pow(&self, x: &[f64]) -> f64 {
        let mut p = 1.0;
        for (&s, &xi) in self.0.iter().zip(x) {
            p *= xi.powi(s as i32);
        }
        p
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    /// tau - sigma, defined when tau >= sigma.
    pub fn minus(&self, sigma: &MultiIndex) -> Result<MultiIndex> {
        if !self.dominates(sigma) {
            return Err(Error::MultiIndexOrder { tau: self.0.clone(), sigma: sigma.0.clone() });
        }
        Ok(MultiIndex(self.0.iter().zip(&sigma.0).map(|(a, b)| a - b).collect()))
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// tau! / (tau - sigma)! for tau >= sigma.
    pub fn falling_ratio(&self, sigma: &MultiIndex) -> f64 {
        let mut r = 1.0;
        for (&t, &s) in self.0.iter().zip(&sigma.0) {
            for k in (t - s + 1)..=t {
                r *= k as f64;
            }
        }
        r
    }

    /// All multi-indices of order exactly `k` in `n` variables, lexicographic.
    pub fn of_order(n: usize, k: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            let n = cur.len();
            if i == n - 1 {
                cur[i] = left;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for v in 0..=left {
                cur[i] = v;
                rec(i + 1, left - v, cur, out);
            }
        }
        rec(0, k, &mut cur, &mut out);
        out.sort();
        out
    }

    /// All multi-indices with order <= k, grouped by increasing order.
    pub fn up_to(n: usize, k: u32) -> Vec<MultiIndex> {
        (0..=k).flat_map(|j| MultiIndex::of_order(n, j)).collect()
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

/// Build a grid function by sampling on the box `lo..hi` with `res` cells per axis.
pub fn create_grid<F: Fn(&[f64]) -> f64 + Sync>(lo: &[f64], hi: &[f64], res: &[usize], sampler: F) -> Result<GridFunction> {
    Grid::from_box(lo, hi, res)?.sample(sampler)
}

/// Second-order first derivative along `axis`, one-sided three-point at the ends.
fn diff_axis(u: &GridFunction, axis: usize) -> Result<GridFunction> {
    let g = &u.grid;
    let d = g.dims[axis];
    if d < 3 {
        return Err(Error::Stencil { axis, needed: 3, have: d });
    }
    let s = g.shape3();
    let stride = match axis {
        0 => s[1] * s[2],
        1 => s[2],
        _ => 1,
    } * u.components;
    let k = u.components;
    let inv = 1.0 / g.spacing;
    let mut out = vec![0.0; u.values.len()];
    out.par_chunks_mut(k).enumerate().for_each(|(p, o)| {
        let ijk = g.unravel(p);
        let i = ijk[axis];
        let base = p * k;
        for c in 0..k {
            let at = |off: isize| u.values[(base as isize + off * stride as isize) as usize + c];
            o[c] = if i == 0 {
                (-1.5 * at(0) + 2.0 * at(1) - 0.5 * at(2)) * inv
            } else if i == d - 1 {
                (1.5 * at(0) - 2.0 * at(-1) + 0.5 * at(-2)) * inv
            } else {
                0.5 * (at(1) - at(-1)) * inv
            };
        }
    });
    Ok(GridFunction { grid: g.clone(), components: k, values: out })
}

/// Partial derivative d_sigma u, applying the axis operators in axis order.
pub fn partial_derivative(u: &GridFunction, sigma: &MultiIndex) -> Result<GridFunction> {
    if sigma.n() != u.n() {
        return Err(Error::Domain("multi-index length differs from grid dimension".into()));
    }
    let mut cur = u.clone();
    for (axis, &s) in sigma.0.iter().enumerate() {
        for _ in 0..s {
            cur = diff_axis(&cur, axis)?;
        }
    }
    Ok(cur)
}

/// All partial derivatives of order up to `m`, computed once and shared.
#[derive(Clone, Debug)]
pub struct DerivativeCache {
    pub order: u32,
    pub indices: Vec<MultiIndex>,
    pub fields: Vec<GridFunction>,
}

impl DerivativeCache {
    pub fn new(u: &GridFunction, m: u32) -> Result<Self> {
        let n = u.n();
        let indices = MultiIndex::up_to(n, m);
        let mut fields: Vec<GridFunction> = Vec::with_capacity(indices.len());
        for sigma in &indices {
            if sigma.order() == 0 {
                fields.push(u.clone());
                continue;
            }
            let last = (0..n).rev().find(|&a| sigma.0[a] > 0).unwrap();
            let mut parent = sigma.clone();
            parent.0[last] -= 1;
            let pi = indices.iter().position(|t| *t == parent).unwrap();
            let f = diff_axis(&fields[pi], last)?;
            fields.push(f);
        }
        Ok(DerivativeCache { order: m, indices, fields })
    }

    pub fn get(&self, sigma: &MultiIndex) -> &GridFunction {
        let i = self.indices.iter().position(|t| t == sigma).expect("multi-index outside cache");
        &self.fields[i]
    }

    /// |D^l u| over all multi-indices of order l and all components.
    pub fn norm(&self, l: u32) -> GridFunction {
        let first = &self.fields[0];
        let np = first.npoints();
        let k = first.components;
        let sel: Vec<&GridFunction> =
            self.indices.iter().zip(&self.fields).filter(|(s, _)| s.order() == l).map(|(_, f)| f).collect();
        let values = (0..np)
            .into_par_iter()
            .map(|p| {
                let mut s = 0.0;
                for f in &sel {
                    for c in 0..k {
                        let v = f.values[p * k + c];
                        s += v * v;
                    }
                }
                s.sqrt()
            })
            .collect();
        GridFunction { grid: first.grid.clone(), components: 1, values }
    }
}

/// Pointwise Euclidean norm of the full derivative array of order `l`.
pub fn derivative_norm(u: &GridFunction, l: u32) -> Result<GridFunction> {
    let n = u.n();
    let mut acc = vec![0.0; u.npoints()];
    for sigma in MultiIndex::of_order(n, l) {
        let d = partial_derivative(u, &sigma)?;
        for (p, a) in acc.iter_mut().enumerate() {
            for c in 0..u.components {
                let v = d.values[p * u.components + c];
                *a += v * v;
            }
        }
    }
    Ok(GridFunction { grid: u.grid.clone(), components: 1, values: acc.into_iter().map(f64::sqrt).collect() })
}

fn masked_points(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}

/// Midpoint quadrature of `u` (or `|u|^power`) over the mask, per component.
pub fn integrate_mask(u: &GridFunction, mask: &[bool], power: Option<f64>) -> Result<Vec<f64>> {
    let pts = masked_points(mask);
    if pts.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let k = u.components;
    let vol = u.grid.cell_volume();
    Ok((0..k)
        .map(|c| {
            let terms: Vec<f64> = pts
                .iter()
                .map(|&p| {
                    let v = u.values[p * k + c];
                    match power {
                        Some(e) => v.abs().powf(e),
                        None => v,
                    }
                })
                .collect();
            pairwise_sum(&terms) * vol
        })
        .collect())
}

pub fn integrate(u: &GridFunction, region: &Region, power: Option<f64>) -> Result<Vec<f64>> {
    integrate_mask(u, &region.mask(&u.grid), power)
}

/// Average over the mask: integral divided by (cell count x cell volume).
pub fn mean_mask(u: &GridFunction, mask: &[bool], power: Option<f64>) -> Result<Vec<f64>> {
    let count = mask.iter().filter(|&&b| b).count();
    let ints = integrate_mask(u, mask, power)?;
    let meas = count as f64 * u.grid.cell_volume();
    Ok(ints.into_iter().map(|v| v / meas).collect())
}

/// Scalar average of a scalar function.
pub fn mean_scalar(u: &GridFunction, mask: &[bool]) -> Result<f64> {
    Ok(mean_mask(u, mask, None)?[0])
}

/// Weighted average of `u` with weight `eta` over the mask.
pub fn weighted_average_mask(u: &GridFunction, mask: &[bool], eta: &GridFunction) -> Result<Vec<f64>> {
    let pts = masked_points(mask);
    if pts.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let wsum = pairwise_sum(&pts.iter().map(|&p| eta.values[p].abs()).collect::<Vec<_>>());
    if wsum == 0.0 {
        return Err(Error::DegenerateWeight);
    }
    let k = u.components;
    Ok((0..k)
        .map(|c| {
            let terms: Vec<f64> = pts.iter().map(|&p| u.values[p * k + c] * eta.values[p]).collect();
            pairwise_sum(&terms) / wsum
        })
        .collect())
}

pub fn weighted_average(u: &GridFunction, region: &Region, eta: &GridFunction) -> Result<Vec<f64>> {
    weighted_average_mask(u, &region.mask(&u.grid), eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_centres_on_unit_interval() {
        let u = create_grid(&[0.0], &[1.0], &[4], |x| x[0]).unwrap();
        assert_eq!(u.values, vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn zero_sampler_gives_zero_function() {
        let u = create_grid(&[0.0, 0.0], &[1.0, 1.0], &[3, 3], |_| 0.0).unwrap();
        assert!(u.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn singular_sampler_is_rejected_at_the_offending_cell() {
        let err = create_grid(&[-1.0], &[1.0], &[3], |x| 1.0 / x[0]).unwrap_err();
        match err {
            Error::NonFinite { coord, .. } => assert_eq!(coord, vec![0.0]),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn linear_derivative_is_exact() {
        let u = create_grid(&[0.0], &[1.0], &[10], |x| 3.0 * x[0] - 1.0).unwrap();
        let d = partial_derivative(&u, &MultiIndex(vec![1])).unwrap();
        assert!(d.values.iter().all(|&v| (v - 3.0).abs() < 1e-12));
        let c = create_grid(&[0.0, 0.0], &[1.0, 1.2], &[5, 6], |_| 2.5).unwrap();
        let d = partial_derivative(&c, &MultiIndex(vec![1, 1])).unwrap();
        assert!(d.values.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn second_derivative_converges_at_second_order() {
        // oracle: d^2/dx^2 sin(x) = -sin(x)
        let err = |cells: usize| {
            let u = create_grid(&[0.0], &[2.0], &[cells], |x| x[0].sin()).unwrap();
            let d = partial_derivative(&u, &MultiIndex(vec![2])).unwrap();
            let g = &u.grid;
            // interior points only; boundary rows are first order after composition
            (4..cells - 4).map(|i| (d.values[i] + g.center(i)[0].sin()).abs()).fold(0.0, f64::max)
        };
        let ratio = err(64) / err(128);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
        let q = create_grid(&[0.0], &[1.0], &[16], |x| x[0] * x[0]).unwrap();
        let d = partial_derivative(&q, &MultiIndex(vec![2])).unwrap();
        assert!(d.values.iter().all(|&v| (v - 2.0).abs() < 1e-10));
    }

    #[test]
    fn gradient_norm_of_plane() {
        let u = create_grid(&[0.0, 0.0], &[1.0, 1.0], &[8, 8], |x| x[0] + 2.0 * x[1]).unwrap();
        let g = derivative_norm(&u, 1).unwrap();
        assert!(g.values.iter().all(|&v| (v - 5f64.sqrt()).abs() < 1e-10));
        let x = create_grid(&[0.0, 0.0], &[1.0, 1.0], &[8, 8], |x| x[0]).unwrap();
        assert!(derivative_norm(&x, 1).unwrap().values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn unit_disc_area_converges() {
        let g = Grid::cube(2, -1.5, 1.5, 128);
        let one = g.sample(|_| 1.0).unwrap();
        let a = integrate(&one, &Region::ball(&[0.0, 0.0], 1.0), None).unwrap()[0];
        assert!((a - std::f64::consts::PI).abs() / std::f64::consts::PI < 0.02);
        let g2 = g.refined();
        let one2 = g2.sample(|_| 1.0).unwrap();
        let a2 = integrate(&one2, &Region::ball(&[0.0, 0.0], 1.0), None).unwrap()[0];
        assert!((a2 - std::f64::consts::PI).abs() < (a - std::f64::consts::PI).abs() + 1e-3);
    }

    #[test]
    fn weighted_average_examples() {
        let g = Grid::cube(1, -1.0, 1.0, 200);
        let u = g.sample(|x| x[0]).unwrap();
        let eta = g.sample(|x| if x[0] > 0.0 { 1.0 } else { 0.0 }).unwrap();
        let all = vec![true; g.npoints()];
        let v = weighted_average_mask(&u, &all, &eta).unwrap()[0];
        assert!((v - 0.5).abs() < 1e-3);
        let zero = g.zeros(1);
        assert!(matches!(weighted_average_mask(&u, &all, &zero), Err(Error::DegenerateWeight)));
        let c = g.sample(|_| 7.25).unwrap();
        assert_eq!(weighted_average_mask(&c, &all, &eta).unwrap()[0], 7.25);
    }

    #[test]
    fn multiindex_examples() {
        assert_eq!(MultiIndex(vec![2, 1]).factorial(), 2.0);
        assert_eq!(MultiIndex(vec![1, 2]).pow(&[2.0, 3.0]), 18.0);
        assert_eq!(MultiIndex(vec![1, 1]).minus(&MultiIndex(vec![0, 1])).unwrap(), MultiIndex(vec![1, 0]));
        assert!(MultiIndex(vec![0, 1]).minus(&MultiIndex(vec![1, 0])).is_err());
        assert_eq!(MultiIndex::of_order(2, 2).len(), 3);
        assert_eq!(MultiIndex::up_to(3, 2).len(), 10);
    }
}
