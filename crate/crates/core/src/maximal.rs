//! Centered and uncentered (fractional) maximal operators on a discrete ball
//! family, plus the measured checks built on them.
//!
//! Balls are centred at lattice points with radii `h/2` and `h 2^{k/4}`.
//! A cell belongs to `B(c, rho)` iff its centre is strictly inside; `f` is
//! extended by zero outside the grid, so every average divides by the full
//! lattice count of the ball. Sums use row prefix sums along the last axis and
//! the uncentered supremum uses per-row sparse tables, so one radius costs
//! O(N rho^{n-1}).

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::numeric::pairwise_sum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Centered,
    Uncentered,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaximalSpec {
    pub beta: f64,
    pub mode: Mode,
    /// f is replaced by f chi_B before the supremum.
    pub restriction: Option<Vec<bool>>,
    pub iterations: usize,
}

impl MaximalSpec {
    pub fn hardy_littlewood() -> Self {
        MaximalSpec { beta: 0.0, mode: Mode::Uncentered, restriction: None, iterations: 1 }
    }

    pub fn fractional(beta: f64) -> Self {
        MaximalSpec { beta, ..Self::hardy_littlewood() }
    }
}

/// Longest distance between two cell centres of the grid.
pub fn grid_diameter(grid: &Grid) -> f64 {
    let s: f64 = grid.dims.iter().map(|&d| ((d - 1) as f64).powi(2)).sum();
    s.sqrt() * grid.spacing
}

/// Radii `h/2, h, h 2^{1/4}, ...` up to the first one exceeding `max_radius`.
pub fn radius_family(h: f64, max_radius: f64) -> Vec<f64> {
    let mut out = vec![0.5 * h];
    let mut k = 0;
    loop {
        let r = h * 2f64.powf(k as f64 / 4.0);
        out.push(r);
        if r > max_radius {
            break;
        }
        k += 1;
    }
    out
}

/// Half-widths of the rows of a lattice ball of radius `rho` (in cells).
struct BallRows {
    /// Row offsets along the first n-1 axes (unused axes are 0).
    offsets: Vec<([isize; 2], usize)>,
    count: usize,
}

impl BallRows {
    fn new(n: usize, rho_cells: f64) -> Self {
        let r2 = rho_cells * rho_cells;
        let big = rho_cells.ceil() as isize;
        let range = |used: bool| if used { -big..=big } else { 0..=0 };
        let mut offsets = Vec::new();
        let mut count = 0;
        for d0 in range(n >= 2) {
            for d1 in range(n >= 3) {
                let dd = (d0 * d0 + d1 * d1) as f64;
                if dd >= r2 {
                    continue;
                }
                let mut w = (r2 - dd).sqrt().floor() as isize;
                while w >= 0 && dd + (w * w) as f64 >= r2 {
                    w -= 1;
                }
                if w < 0 {
                    continue;
                }
                offsets.push(([d0, d1], w as usize));
                count += 2 * w as usize + 1;
            }
        }
        BallRows { offsets, count }
    }
}

/// Lattice point count of the open ball of radius `rho_cells` in dimension n.
pub fn lattice_count(n: usize, rho_cells: f64) -> usize {
    BallRows::new(n, rho_cells).count
}

/// Row geometry: rows run along the last axis and are contiguous.
struct Rows {
    n: usize,
    len: usize,
    /// extents of the row-index axes (unused = 1)
    ext: [usize; 2],
}

impl Rows {
    fn new(grid: &Grid) -> Self {
        let n = grid.n();
        let len = grid.dims[n - 1];
        let mut ext = [1usize; 2];
        for a in 0..n - 1 {
            ext[a] = grid.dims[a];
        }
        Rows { n, len, ext }
    }

    fn count(&self) -> usize {
        self.ext[0] * self.ext[1]
    }

    fn split(&self, p: usize) -> ([usize; 2], usize) {
        let r = p / self.len;
        ([r / self.ext[1], r % self.ext[1]], p % self.len)
    }

    fn shifted(&self, rc: [usize; 2], d: [isize; 2]) -> Option<usize> {
        let a = rc[0] as isize + d[0];
        let b = rc[1] as isize + d[1];
        if a < 0 || b < 0 || a >= self.ext[0] as isize || b >= self.ext[1] as isize {
            return None;
        }
        Some(a as usize * self.ext[1] + b as usize)
    }
}

struct Prefix {
    len: usize,
    data: Vec<f64>,
}

impl Prefix {
    fn new(rows: &Rows, g: &[f64]) -> Self {
        let len = rows.len;
        let mut data = vec![0.0; rows.count() * (len + 1)];
        data.par_chunks_mut(len + 1).enumerate().for_each(|(r, out)| {
            let row = &g[r * len..(r + 1) * len];
            let mut s = 0.0;
            for (k, &v) in row.iter().enumerate() {
                s += v;
                out[k + 1] = s;
            }
        });
        Prefix { len, data }
    }

    #[inline]
    fn range(&self, row: usize, lo: isize, hi: isize) -> f64 {
        let lo = lo.max(0) as usize;
        let hi = (hi + 1).min(self.len as isize);
        if hi <= lo as isize {
            return 0.0;
        }
        let base = row * (self.len + 1);
        self.data[base + hi as usize] - self.data[base + lo]
    }
}

struct SparseMax {
    len: usize,
    levels: Vec<Vec<f64>>,
}

impl SparseMax {
    fn new(rows: &Rows, g: &[f64]) -> Self {
        let len = rows.len;
        let mut levels = vec![g.to_vec()];
        let mut span = 1;
        while 2 * span <= len {
            let prev = levels.last().unwrap();
            let mut next = vec![f64::NEG_INFINITY; g.len()];
            next.par_chunks_mut(len).enumerate().for_each(|(r, out)| {
                let pr = &prev[r * len..(r + 1) * len];
                for k in 0..=len - 2 * span {
                    out[k] = pr[k].max(pr[k + span]);
                }
            });
            levels.push(next);
            span *= 2;
        }
        SparseMax { len, levels }
    }

    #[inline]
    fn range(&self, row: usize, lo: isize, hi: isize) -> f64 {
        let lo = lo.max(0) as usize;
        let hi = hi.min(self.len as isize - 1);
        if hi < lo as isize {
            return f64::NEG_INFINITY;
        }
        let hi = hi as usize;
        let width = hi - lo + 1;
        let lvl = (usize::BITS - 1 - width.leading_zeros()) as usize;
        let base = row * self.len;
        let t = &self.levels[lvl];
        t[base + lo].max(t[base + hi + 1 - (1 << lvl)])
    }
}

/// Sums of `g` over B(c, rho) for every lattice centre c.
fn ball_sums(rows: &Rows, prefix: &Prefix, br: &BallRows, npoints: usize) -> Vec<f64> {
    (0..npoints)
        .into_par_iter()
        .map(|p| {
            let (rc, k) = rows.split(p);
            let k = k as isize;
            let mut s = 0.0;
            for &(d, w) in &br.offsets {
                if let Some(row) = rows.shifted(rc, d) {
                    s += prefix.range(row, k - w as isize, k + w as isize);
                }
            }
            s
        })
        .collect()
}

/// Max of `a` over the centres c with |x - c| < rho.
fn ball_max(rows: &Rows, table: &SparseMax, br: &BallRows, npoints: usize) -> Vec<f64> {
    (0..npoints)
        .into_par_iter()
        .map(|p| {
            let (rc, k) = rows.split(p);
            let k = k as isize;
            let mut m = f64::NEG_INFINITY;
            for &(d, w) in &br.offsets {
                if let Some(row) = rows.shifted(rc, d) {
                    m = m.max(table.range(row, k - w as isize, k + w as isize));
                }
            }
            m
        })
        .collect()
}

/// Core operator on a nonnegative sample vector.
fn maximal_values(grid: &Grid, g: &[f64], beta: f64, mode: Mode) -> Vec<f64> {
    let rows = Rows::new(grid);
    let np = grid.npoints();
    let h = grid.spacing;
    let diam = grid_diameter(grid);
    let max_r = match mode {
        Mode::Centered => 2.0 * diam,
        Mode::Uncentered => diam,
    };
    let prefix = Prefix::new(&rows, g);
    let mut best = vec![0.0f64; np];
    for rho in radius_family(h, max_r) {
        let br = BallRows::new(rows.n, rho / h);
        let scale = rho.powf(beta) / br.count as f64;
        // single-cell balls read the samples directly so M f >= |f| holds exactly
        let mut avg = if br.count == 1 { g.to_vec() } else { ball_sums(&rows, &prefix, &br, np) };
        avg.iter_mut().for_each(|v| *v *= scale);
        let cand = match mode {
            Mode::Centered => avg,
            Mode::Uncentered => ball_max(&rows, &SparseMax::new(&rows, &avg), &br, np),
        };
        best.par_iter_mut().zip(cand.par_iter()).for_each(|(b, &c)| {
            if c > *b {
                *b = c;
            }
        });
    }
    best
}

fn scalar_abs(f: &GridFunction) -> Vec<f64> {
    if f.components == 1 {
        f.values.iter().map(|v| v.abs()).collect()
    } else {
        f.pointwise_norm().values
    }
}

/// Maximal function of |f| (pointwise norm for vector fields).
pub fn maximal_function(f: &GridFunction, spec: &MaximalSpec) -> Result<GridFunction> {
    let n = f.n() as f64;
    if !(spec.beta >= 0.0 && spec.beta < n) {
        return Err(Error::Domain(format!("beta must lie in [0, {n}), got {}", spec.beta)));
    }
    if spec.iterations == 0 {
        return Err(Error::Domain("iterations must be >= 1".into()));
    }
    let mut g = scalar_abs(f);
    for _ in 0..spec.iterations {
        if let Some(mask) = &spec.restriction {
            for (v, &inside) in g.iter_mut().zip(mask) {
                if !inside {
                    *v = 0.0;
                }
            }
        }
        g = maximal_values(&f.grid, &g, spec.beta, spec.mode);
    }
    Ok(GridFunction { grid: f.grid.clone(), components: 1, values: g })
}

/// Uncentered Hardy-Littlewood maximal function.
pub fn hl(f: &GridFunction) -> GridFunction {
    maximal_function(f, &MaximalSpec::hardy_littlewood()).expect("beta = 0 is admissible")
}

/// Centered Hardy-Littlewood maximal function.
pub fn hl_centered(f: &GridFunction) -> GridFunction {
    let spec = MaximalSpec { mode: Mode::Centered, ..MaximalSpec::hardy_littlewood() };
    maximal_function(f, &spec).expect("beta = 0 is admissible")
}

/// Fractional maximal function M_beta.
pub fn fractional(f: &GridFunction, beta: f64) -> Result<GridFunction> {
    maximal_function(f, &MaximalSpec::fractional(beta))
}

/// l-fold iterate of the restricted operator M_B f = M(f chi_B).
pub fn iterated_maximal(f: &GridFunction, mask: &[bool], l: usize) -> Result<GridFunction> {
    let spec = MaximalSpec { restriction: Some(mask.to_vec()), iterations: l, ..MaximalSpec::hardy_littlewood() };
    maximal_function(f, &spec)
}

/// l-fold iterate of the unrestricted operator; l = 0 returns |f|.
pub fn iterated_plain(f: &GridFunction, l: usize) -> GridFunction {
    if l == 0 {
        return GridFunction { grid: f.grid.clone(), components: 1, values: scalar_abs(f) };
    }
    let spec = MaximalSpec { iterations: l, ..MaximalSpec::hardy_littlewood() };
    maximal_function(f, &spec).expect("admissible spec")
}

/// Sup of a pointwise ratio over `mask`, skipping vanishing denominators.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioSup {
    pub sup: f64,
    pub considered: usize,
    pub excluded: usize,
}

impl RatioSup {
    pub fn excluded_fraction(&self) -> f64 {
        let total = self.considered + self.excluded;
        if total == 0 {
            0.0
        } else {
            self.excluded as f64 / total as f64
        }
    }

    /// Too many excluded points (more than 0.1 % of the region) invalidates a report.
    pub fn excluded_ok(&self) -> bool {
        self.excluded_fraction() <= 1e-3
    }
}

/// Points where both numerator and denominator vanish are not counted as excluded.
pub fn ratio_sup(num: &[f64], den: &[f64], mask: Option<&[bool]>) -> RatioSup {
    let mut sup = 0.0f64;
    let mut considered = 0;
    let mut excluded = 0;
    for i in 0..num.len() {
        if let Some(m) = mask {
            if !m[i] {
                continue;
            }
        }
        if den[i] > 0.0 {
            sup = sup.max(num[i].abs() / den[i]);
            considered += 1;
        } else if num[i] != 0.0 {
            excluded += 1;
        } else {
            considered += 1;
        }
    }
    RatioSup { sup, considered, excluded }
}

/// Relative O(h) slack for the upper sandwich: the spacing in units of the
/// half-width of the grid box, i.e. 2 / min(dims).
pub fn sandwich_tolerance(grid: &Grid) -> f64 {
    2.0 / *grid.dims.iter().min().unwrap() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    /// min over points of M f - M^c f (must be >= 0).
    pub lower_gap: f64,
    /// sup of M f / M^c f.
    pub upper_ratio: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// M^c f <= M f <= 2^n M^c f.
pub fn sandwich_report(f: &GridFunction) -> SandwichReport {
    let m = hl(f);
    let mc = hl_centered(f);
    let lower_gap = m.values.iter().zip(&mc.values).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
    let upper_ratio = ratio_sup(&m.values, &mc.values, None).sup;
    let bound = 2f64.powi(f.n() as i32);
    let tolerance = sandwich_tolerance(&f.grid);
    let pass = lower_gap >= 0.0 && upper_ratio <= bound * (1.0 + tolerance);
    SandwichReport { lower_gap, upper_ratio, bound, tolerance, pass }
}

/// c(n, beta) = 2^{2n-beta} (2^{n-beta} + 4^n / (2^beta - 1)).
pub fn composition_constant(n: usize, beta: f64) -> f64 {
    let nf = n as f64;
    2f64.powf(2.0 * nf - beta) * (2f64.powf(nf - beta) + 4f64.powf(nf) / (2f64.powf(beta) - 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionReport {
    pub beta: f64,
    pub ratio: RatioSup,
    pub bound: f64,
    pub pass: bool,
}

/// sup M(M_beta f) / M_beta f against the composition constant.
pub fn composition_report(f: &GridFunction, beta: f64) -> Result<CompositionReport> {
    if !(beta > 0.0 && beta < f.n() as f64) {
        return Err(Error::Domain(format!("beta must lie in (0, n), got {beta}")));
    }
    let mb = fractional(f, beta)?;
    let mmb = hl(&mb);
    let ratio = ratio_sup(&mmb.values, &mb.values, None);
    let bound = composition_constant(f.n(), beta);
    let pass = ratio.sup <= bound && ratio.excluded_ok();
    Ok(CompositionReport { beta, ratio, bound, pass })
}

/// omega(k h) = max over lattice shifts |Delta| <= k h of |g(x + Delta) - g(x)|.
pub fn shift_modulus(g: &GridFunction, max_shift: usize) -> Vec<(f64, f64)> {
    let grid = &g.grid;
    let n = grid.n();
    let s = grid.shape3();
    let mut out = Vec::with_capacity(max_shift);
    let mut running = 0.0f64;
    for k in 1..=max_shift as isize {
        let kk = k * k;
        let km = (k - 1) * (k - 1);
        let mut shifts = Vec::new();
        let r = |used: bool| if used { -k..=k } else { 0..=0 };
        for a in r(true) {
            for b in r(n >= 2) {
                for c in r(n >= 3) {
                    let d2 = a * a + b * b + c * c;
                    if d2 <= kk && d2 > km {
                        shifts.push([a, b, c]);
                    }
                }
            }
        }
        let ring = shifts
            .par_iter()
            .map(|d| {
                let mut m = 0.0f64;
                for p in 0..grid.npoints() {
                    let ijk = grid.unravel(p);
                    let q = [ijk[0] as isize + d[0], ijk[1] as isize + d[1], ijk[2] as isize + d[2]];
                    if (0..3).any(|a| q[a] < 0 || q[a] >= s[a] as isize) {
                        continue;
                    }
                    let qi = grid.ravel([q[0] as usize, q[1] as usize, q[2] as usize]);
                    m = m.max((g.values[qi] - g.values[p]).abs());
                }
                m
            })
            .reduce(|| 0.0, f64::max);
        running = running.max(ring);
        out.push((k as f64 * grid.spacing, running));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub beta: f64,
    /// (shift length, omega)
    pub modulus: Vec<(f64, f64)>,
    pub monotone: bool,
}

/// Empirical continuity modulus of M_beta f.
pub fn continuity_modulus_report(f: &GridFunction, beta: f64, max_shift: usize) -> Result<ContinuityReport> {
    let mb = maximal_function(f, &MaximalSpec::fractional(beta))?;
    let modulus = shift_modulus(&mb, max_shift);
    let monotone = modulus.windows(2).all(|w| w[1].1 >= w[0].1);
    Ok(ContinuityReport { beta, modulus, monotone })
}

/// ||M f||_s / ||f||_s.
pub fn ls_ratio(f: &GridFunction, s: f64) -> f64 {
    let m = hl(f);
    let num: Vec<f64> = m.values.iter().map(|v| v.powf(s)).collect();
    let den: Vec<f64> = scalar_abs(f).iter().map(|v| v.powf(s)).collect();
    let d = pairwise_sum(&den);
    if d == 0.0 {
        return 0.0;
    }
    (pairwise_sum(&num) / d).powf(1.0 / s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HedbergReport {
    pub order: usize,
    pub radius: f64,
    /// Largest |(D^k u)_{B,eta}| over k < l, relative to sup |u| + 1.
    pub moment_residual: f64,
    pub ratio: RatioSup,
}

/// sup_B |u| / (R^l M_B^{2l}(|D^l u|)) for u with vanishing weighted averages
/// of all derivatives of order below l.
pub fn hedberg_report(
    u: &GridFunction,
    l: usize,
    ball: (&[f64], f64),
    eta: &GridFunction,
) -> Result<HedbergReport> {
    use crate::grid::{weighted_average_mask, DerivativeCache};
    let (center, radius) = ball;
    let mask = u.grid.ball_mask(center, radius);
    check_cutoff_mass(eta, &mask)?;
    let cache = DerivativeCache::new(u, l as u32)?;
    let scale = u.max_abs() + 1.0;
    let mut residual = 0.0f64;
    for (sigma, field) in cache.indices.iter().zip(&cache.fields) {
        if (sigma.order() as usize) < l {
            for v in weighted_average_mask(field, &mask, eta)? {
                residual = residual.max(v.abs() / scale);
            }
        }
    }
    if residual > 1e-8 {
        return Err(Error::Precondition(format!("weighted averages below order {l} do not vanish: {residual:e}")));
    }
    let dl = cache.norm(l as u32);
    let m = iterated_maximal(&dl, &mask, 2 * l)?;
    let rl = radius.powi(l as i32);
    let den: Vec<f64> = m.values.iter().map(|v| rl * v).collect();
    let num = u.pointwise_norm().values;
    Ok(HedbergReport { order: l, radius, moment_residual: residual, ratio: ratio_sup(&num, &den, Some(&mask)) })
}

/// 0 <= eta <= 1 and ||eta||_{L^1(B)} >= |B|/2 (measured on the lattice).
pub fn check_cutoff_mass(eta: &GridFunction, mask: &[bool]) -> Result<()> {
    let mut mass = 0.0;
    let mut count = 0usize;
    for (i, &inside) in mask.iter().enumerate() {
        if inside {
            let e = eta.values[i];
            if !(-1e-14..=1.0 + 1e-14).contains(&e) {
                return Err(Error::Precondition(format!("weight value {e} outside [0, 1]")));
            }
            mass += e;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyRegion);
    }
    if mass < 0.5 * count as f64 {
        return Err(Error::Precondition(format!("weight mass {mass} below half the ball ({count} cells)")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedHedbergReport {
    pub order: usize,
    pub beta: f64,
    pub ratio: RatioSup,
}

/// sup_B a^{1/q} M_B^l f / (M_B^l(a^{1/q} f) + M_beta(M^{l-1}(f chi_B))).
pub fn weighted_hedberg_report(
    f: &GridFunction,
    a: &GridFunction,
    q: f64,
    beta: f64,
    l: usize,
    ball: (&[f64], f64),
) -> Result<WeightedHedbergReport> {
    let (center, radius) = ball;
    if radius > 1.0 {
        return Err(Error::Precondition(format!("ball radius {radius} exceeds 1")));
    }
    if l == 0 {
        return Err(Error::Domain("order must be >= 1".into()));
    }
    let mask = f.grid.ball_mask(center, radius);
    let aq = a.map(|v| v.max(0.0).powf(1.0 / q));
    let fabs = GridFunction { grid: f.grid.clone(), components: 1, values: scalar_abs(f) };
    let lhs = iterated_maximal(&fabs, &mask, l)?.zip(&aq, |m, w| w * m);
    let first = iterated_maximal(&fabs.zip(&aq, |v, w| v * w), &mask, l)?;
    let inner = iterated_plain(&fabs.restrict(&mask), l - 1);
    let second = fractional(&inner, beta)?;
    let den: Vec<f64> = first.values.iter().zip(&second.values).map(|(x, y)| x + y).collect();
    Ok(WeightedHedbergReport { order: l, beta, ratio: ratio_sup(&lhs.values, &den, Some(&mask)) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_function_is_fixed() {
        let g = Grid::cube(2, -1.0, 1.0, 24);
        let f = g.sample(|_| 1.0).unwrap();
        let m = hl(&f);
        // interior of the grid: small balls average 1, large balls lose mass outside
        assert!(m.values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn homogeneity_is_bitwise() {
        let g = Grid::cube(1, -1.0, 1.0, 64);
        let f = g.sample(|x| (3.0 * x[0]).sin()).unwrap();
        let m1 = hl(&f);
        let m2 = hl(&f.map(|v| -2.0 * v));
        for (a, b) in m1.values.iter().zip(&m2.values) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(lattice_count(1, 0.5), 1);
        assert_eq!(lattice_count(1, 1.0), 1);
        assert_eq!(lattice_count(2, 2f64.powf(0.25)), 5);
        assert_eq!(lattice_count(2, 2.0 * 2f64.powf(0.25)), 21);
    }

    #[test]
    fn sparse_table_matches_naive() {
        let g = Grid::cube(1, 0.0, 1.0, 37);
        let vals: Vec<f64> = (0..37).map(|i| ((i * 7919) % 37) as f64).collect();
        let rows = Rows::new(&g);
        let t = SparseMax::new(&rows, &vals);
        for lo in 0..37isize {
            for hi in lo..37 {
                let naive = vals[lo as usize..=hi as usize].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(t.range(0, lo, hi), naive);
            }
        }
    }

    #[test]
    fn restricted_dominates_on_ball() {
        let g = Grid::cube(2, -1.0, 1.0, 20);
        let f = g.sample(|x| x[0] * x[1] + 0.3).unwrap();
        let mask = g.ball_mask(&[0.0, 0.0], 0.6);
        let m = iterated_maximal(&f, &mask, 1).unwrap();
        for i in 0..g.npoints() {
            if mask[i] {
                assert!(m.values[i] >= f.values[i].abs());
            }
        }
    }

    #[test]
    fn composition_constant_formula() {
        let c = composition_constant(1, 0.5);
        let expect = 2f64.powf(1.5) * (2f64.powf(0.5) + 4.0 / (2f64.powf(0.5) - 1.0));
        assert!((c - expect).abs() < 1e-12);
    }
}
