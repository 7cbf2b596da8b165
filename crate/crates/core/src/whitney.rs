//! Whitney-type ball covers of a masked open set and the subordinate smooth
//! partition of unity.

use crate::error::{Error, Result};
use crate::grid::{dist, Grid};
use crate::numeric::{radial_cutoff, smooth_step, unit_ball_volume};
use rayon::prelude::*;
use serde::Serialize;

/// Squared Euclidean distance transform (Felzenszwalb-Huttenlocher) of a 1-D
/// sampled function, in place.
fn edt_1d(f: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut d = vec![0.0f64; n];
    let mut k = 0usize;
    let mut first = None;
    for q in 0..n {
        if f[q].is_finite() {
            first = Some(q);
            break;
        }
    }
    let Some(q0) = first else { return };
    v[0] = q0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in q0 + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *out = dq * dq + f[p];
    }
    f.copy_from_slice(&d);
}

/// Euclidean distance from every cell centre to the nearest cell centre
/// outside the mask (infinite when the mask fills the grid).
pub fn distance_to_complement(grid: &Grid, mask: &[bool]) -> Vec<f64> {
    let s = grid.shape3();
    let mut f: Vec<f64> = mask.iter().map(|&m| if m { f64::INFINITY } else { 0.0 }).collect();
    for axis in 0..grid.n() {
        let len = s[axis];
        let stride = match axis {
            0 => s[1] * s[2],
            1 => s[2],
            _ => 1,
        };
        let starts: Vec<usize> = (0..grid.npoints()).filter(|&p| grid.unravel(p)[axis] == 0).collect();
        let lines: Vec<Vec<f64>> = starts
            .par_iter()
            .map(|&st| {
                let mut line: Vec<f64> = (0..len).map(|i| f[st + i * stride]).collect();
                edt_1d(&mut line);
                line
            })
            .collect();
        for (st, line) in starts.iter().zip(lines) {
            for (i, v) in line.into_iter().enumerate() {
                f[st + i * stride] = v;
            }
        }
    }
    f.into_iter().map(|v| v.sqrt() * grid.spacing).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Lattice index of the centre.
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WhitneyCover {
    pub balls: Vec<Ball>,
    pub neighbors: Vec<Vec<usize>>,
    pub max_radius: f64,
}

/// Ratio r / d(x) of the selected radius to the distance to the complement.
pub const RADIUS_FRACTION: f64 = 1.0 / 12.0;

/// Greedy cover: candidates sorted by decreasing distance (ties by lattice
/// index), kept iff their quarter ball misses every kept quarter ball, until
/// the half balls contain every masked cell.
pub fn cover(grid: &Grid, mask: &[bool], max_radius: f64) -> WhitneyCover {
    let d = distance_to_complement(grid, mask);
    let mut cand: Vec<usize> = (0..grid.npoints()).filter(|&i| mask[i]).collect();
    cand.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap().then(a.cmp(&b)));
    let mut covered = vec![false; grid.npoints()];
    let mut remaining = cand.len();
    let mut balls: Vec<Ball> = Vec::new();
    let n = grid.n();
    let h = grid.spacing;
    let s = grid.shape3();
    for &c in &cand {
        if remaining == 0 {
            break;
        }
        let r = (d[c] * RADIUS_FRACTION).min(max_radius);
        let x = grid.center(c);
        if balls.iter().any(|b| dist(&b.center, &x) < 0.25 * (b.radius + r)) {
            continue;
        }
        // mark the masked cells inside the half ball
        let reach = (0.5 * r / h).ceil() as isize;
        let ijk = grid.unravel(c);
        let range = |a: usize| {
            if a < n {
                let lo = (ijk[a] as isize - reach).max(0) as usize;
                let hi = ((ijk[a] as isize + reach) as usize).min(s[a] - 1);
                lo..=hi
            } else {
                0..=0
            }
        };
        for i in range(0) {
            for j in range(1) {
                for k in range(2) {
                    let p = grid.ravel([i, j, k]);
                    if mask[p] && !covered[p] && dist(&grid.center(p), &x) < 0.5 * r {
                        covered[p] = true;
                        remaining -= 1;
                    }
                }
            }
        }
        balls.push(Ball { center: x, radius: r, index: c });
    }
    let neighbors = neighbor_sets(&balls);
    WhitneyCover { balls, neighbors, max_radius }
}

/// A_i = { j : 3/4 B_i meets 3/4 B_j }, sorted.
pub fn neighbor_sets(balls: &[Ball]) -> Vec<Vec<usize>> {
    (0..balls.len())
        .into_par_iter()
        .map(|i| {
            (0..balls.len())
                .filter(|&j| dist(&balls[i].center, &balls[j].center) < 0.75 * (balls[i].radius + balls[j].radius))
                .collect()
        })
        .collect()
}

/// Volume of B(0, a) intersected with B(d e_1, b) in dimension n.
pub fn lens_volume(n: usize, a: f64, b: f64, d: f64) -> f64 {
    use std::f64::consts::PI;
    if d >= a + b {
        return 0.0;
    }
    let small = a.min(b);
    if d <= (a - b).abs() {
        return unit_ball_volume(n) * small.powi(n as i32);
    }
    match n {
        1 => (a.min(d + b) - (-a).max(d - b)).max(0.0),
        2 => {
            let c1 = ((d * d + a * a - b * b) / (2.0 * d * a)).clamp(-1.0, 1.0);
            let c2 = ((d * d + b * b - a * a) / (2.0 * d * b)).clamp(-1.0, 1.0);
            let t = (-d + a + b) * (d + a - b) * (d - a + b) * (d + a + b);
            a * a * c1.acos() + b * b * c2.acos() - 0.5 * t.max(0.0).sqrt()
        }
        _ => {
            let s = a + b - d;
            PI * s * s * (d * d + 2.0 * d * (a + b) - 3.0 * (a - b) * (a - b)) / (12.0 * d)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverReport {
    pub w1: bool,
    pub w2: bool,
    pub w3: bool,
    pub w4: bool,
    pub w5: bool,
    /// max #A_i
    pub w6_overlap: usize,
    /// max over i, j in A_i of max(|B_i|, |B_j|) / |B_i cap 3/4 B_j|
    pub w7_constant: f64,
    pub w7_bound: f64,
    /// Every inclusion B(z, rho/8) in B_i cap 3/4 B_j with rho >= r_i/8 held.
    pub w7_inclusions: bool,
    pub w7_pairs_checked: usize,
    pub neighbors_symmetric: bool,
}

impl CoverReport {
    pub fn all_pass(&self, overlap_cap: usize) -> bool {
        self.w1
            && self.w2
            && self.w3
            && self.w4
            && self.w5
            && self.w6_overlap <= overlap_cap
            && self.w7_constant <= self.w7_bound
            && self.w7_inclusions
            && self.neighbors_symmetric
    }
}

/// Overlap cap asserted for (W6).
pub fn overlap_cap(n: usize) -> usize {
    match n {
        1 => 64,
        2 => 256,
        _ => 1024,
    }
}

/// Check (W1)-(W7) against the mask on the lattice.
pub fn verify_cover(grid: &Grid, mask: &[bool], cov: &WhitneyCover) -> CoverReport {
    let n = grid.n();
    let balls = &cov.balls;
    let pts: Vec<usize> = (0..grid.npoints()).collect();
    let centers: Vec<Vec<f64>> = pts.iter().map(|&p| grid.center(p)).collect();
    let w1 = pts
        .par_iter()
        .filter(|&&p| mask[p])
        .all(|&p| balls.iter().any(|b| dist(&b.center, &centers[p]) < 0.5 * b.radius));
    let w2 = balls.iter().all(|b| b.radius <= cov.max_radius);
    let outside: Vec<usize> = pts.iter().copied().filter(|&p| !mask[p]).collect();
    let w3 = balls.par_iter().all(|b| {
        let inner_clear = outside.iter().all(|&p| dist(&b.center, &centers[p]) >= 8.0 * b.radius);
        let outer_hits = outside.iter().any(|&p| dist(&b.center, &centers[p]) < 16.0 * b.radius);
        inner_clear && outer_hits
    });
    let k = balls.len();
    let mut w4 = true;
    let mut w5 = true;
    for i in 0..k {
        for j in i + 1..k {
            let d = dist(&balls[i].center, &balls[j].center);
            let (ri, rj) = (balls[i].radius, balls[j].radius);
            if d < ri + rj && (ri > 2.0 * rj || rj > 2.0 * ri) {
                w4 = false;
            }
            if d < 0.25 * (ri + rj) {
                w5 = false;
            }
        }
    }
    let w6_overlap = cov.neighbors.iter().map(Vec::len).max().unwrap_or(0);
    let neighbors_symmetric = (0..k).all(|i| cov.neighbors[i].contains(&i) && cov.neighbors[i].iter().all(|&j| cov.neighbors[j].contains(&i)));
    let wn = unit_ball_volume(n);
    let mut w7_constant = 0.0f64;
    let mut w7_inclusions = true;
    let mut pairs = 0;
    for i in 0..k {
        for &j in &cov.neighbors[i] {
            let (ri, rj) = (balls[i].radius, balls[j].radius);
            let d = dist(&balls[i].center, &balls[j].center);
            let inter = lens_volume(n, ri, 0.75 * rj, d);
            let big = wn * ri.max(rj).powi(n as i32);
            w7_constant = w7_constant.max(if inter > 0.0 { big / inter } else { f64::INFINITY });
            if ri.max(0.75 * rj) < d && d < 0.75 * (ri + rj) {
                pairs += 1;
                let t = 0.5 * (d + ri - 0.75 * rj);
                let rho = ri - t;
                // z lies on the segment from x_i to x_j at distance t from x_i
                let zi = t;
                let zj = d - t;
                let ok = rho >= ri / 8.0 && zi + rho / 8.0 <= ri * (1.0 + 1e-12) && zj + rho / 8.0 <= 0.75 * rj * (1.0 + 1e-12);
                w7_inclusions &= ok;
            }
        }
    }
    CoverReport {
        w1,
        w2,
        w3,
        w4,
        w5,
        w6_overlap,
        w7_constant,
        w7_bound: 128f64.powi(n as i32),
        w7_inclusions,
        w7_pairs_checked: pairs,
        neighbors_symmetric,
    }
}

/// Smooth bumps phi_i = 1 on 1/2 B_i, 0 outside 3/4 B_i, normalised by a
/// smooth maximum of their sum and 1.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    pub balls: Vec<Ball>,
    /// j with B_j meeting B_i: every bump that can be nonzero near B_i.
    pub wide: Vec<Vec<usize>>,
    /// Grid samples of psi_i on the cells of 3/4 B_i: (cell, value).
    pub samples: Vec<Vec<(usize, f64)>>,
}

/// Unnormalised bump.
#[inline]
pub fn bump(b: &Ball, x: &[f64]) -> f64 {
    radial_cutoff(dist(x, &b.center) / b.radius, 0.5, 0.75)
}

/// s for s >= 1, 1 for s <= 1/2, smooth in between.
#[inline]
pub fn soft_floor(s: f64) -> f64 {
    s + (1.0 - s) * (1.0 - smooth_step(2.0 * (1.0 - s)))
}

impl PartitionOfUnity {
    /// psi_i(x) for an arbitrary point.
    pub fn psi(&self, i: usize, x: &[f64]) -> f64 {
        let own = bump(&self.balls[i], x);
        if own == 0.0 {
            return 0.0;
        }
        let total: f64 = self.wide[i].iter().map(|&j| bump(&self.balls[j], x)).sum();
        own / soft_floor(total)
    }

    /// Sum of psi_j at grid cell `p` over all balls (uses the samples).
    pub fn sum_at(&self) -> Vec<f64> {
        let np = self.samples.iter().flatten().map(|&(p, _)| p + 1).max().unwrap_or(0);
        let mut out = vec![0.0; np];
        for s in &self.samples {
            for &(p, v) in s {
                out[p] += v;
            }
        }
        out
    }
}

pub fn partition_of_unity(grid: &Grid, mask: &[bool], cov: &WhitneyCover) -> Result<PartitionOfUnity> {
    let balls = cov.balls.clone();
    let k = balls.len();
    let wide: Vec<Vec<usize>> = (0..k)
        .map(|i| (0..k).filter(|&j| dist(&balls[i].center, &balls[j].center) < balls[i].radius + balls[j].radius).collect())
        .collect();
    let pou0 = PartitionOfUnity { balls, wide, samples: Vec::new() };
    let n = grid.n();
    let s = grid.shape3();
    let h = grid.spacing;
    let samples: Vec<Vec<(usize, f64)>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let b = &pou0.balls[i];
            let ijk = grid.unravel(b.index);
            let reach = (0.75 * b.radius / h).ceil() as isize;
            let range = |a: usize| {
                if a < n {
                    let lo = (ijk[a] as isize - reach).max(0) as usize;
                    let hi = ((ijk[a] as isize + reach) as usize).min(s[a] - 1);
                    lo..=hi
                } else {
                    0..=0
                }
            };
            let mut out = Vec::new();
            for a in range(0) {
                for bb in range(1) {
                    for c in range(2) {
                        let p = grid.ravel([a, bb, c]);
                        let v = pou0.psi(i, &grid.center(p));
                        if v > 0.0 {
                            out.push((p, v));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let pou = PartitionOfUnity { samples, ..pou0 };
    let mut hit = vec![false; grid.npoints()];
    for s in &pou.samples {
        for &(p, _) in s {
            hit[p] = true;
        }
    }
    if let Some(p) = (0..grid.npoints()).find(|&p| mask[p] && !hit[p]) {
        return Err(Error::Precondition(format!("masked cell at {:?} is not covered", grid.center(p))));
    }
    Ok(pou)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionReport {
    /// 0 <= psi_i <= chi_{3/4 B_i} at every sample.
    pub upper: bool,
    /// chi_{1/2 B_i} <= phi_i for the unnormalised bumps.
    pub bump_lower: bool,
    /// min of psi_i over the grid cells of 1/2 B_i.
    pub min_on_half_ball: f64,
    /// max over masked cells of |sum_j psi_j - 1|.
    pub sum_error: f64,
    /// max over cells outside every 3/4 B_i of |sum_j psi_j|.
    pub sum_outside: f64,
    /// Per order l: max_i r_i^l sup |D^l psi_i|.
    pub derivative_constants: Vec<f64>,
}

fn central_weights(k: usize) -> Vec<(f64, f64)> {
    // k-th central difference: offsets (k/2 - j), weights (-1)^j C(k, j)
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

/// r_i^l sup |D^l psi_i| over a ball-relative sample lattice (16 points per
/// diameter), differentiating the analytic psi_i with step r_i / 32.
pub fn derivative_constants(pou: &PartitionOfUnity, n: usize, m: usize) -> Vec<f64> {
    use crate::grid::MultiIndex;
    let sigmas: Vec<Vec<MultiIndex>> = (0..=m).map(|l| MultiIndex::of_order(n, l as u32)).collect();
    let per_ball: Vec<Vec<f64>> = (0..pou.balls.len())
        .into_par_iter()
        .map(|i| {
            let b = &pou.balls[i];
            let step = b.radius / 32.0;
            let per = 16usize;
            let mut best = vec![0.0f64; m + 1];
            let ext = |used: bool| if used { per } else { 1 };
            for a in 0..ext(true) {
                for bb in 0..ext(n >= 2) {
                    for c in 0..ext(n >= 3) {
                        let t = [a, bb, c];
                        let x: Vec<f64> = (0..n)
                            .map(|ax| b.center[ax] + 0.75 * b.radius * (2.0 * (t[ax] as f64 + 0.5) / per as f64 - 1.0))
                            .collect();
                        if dist(&x, &b.center) >= 0.75 * b.radius {
                            continue;
                        }
                        for l in 0..=m {
                            let mut s2 = 0.0;
                            for sigma in &sigmas[l] {
                                let ws: Vec<Vec<(f64, f64)>> = sigma.0.iter().map(|&k| central_weights(k as usize)).collect();
                                let mut acc = 0.0;
                                let mut idx = vec![0usize; n];
                                loop {
                                    let mut y = x.clone();
                                    let mut w = 1.0;
                                    for ax in 0..n {
                                        let (off, wt) = ws[ax][idx[ax]];
                                        y[ax] += off * step;
                                        w *= wt;
                                    }
                                    acc += w * pou.psi(i, &y);
                                    let mut ax = 0;
                                    while ax < n {
                                        idx[ax] += 1;
                                        if idx[ax] < ws[ax].len() {
                                            break;
                                        }
                                        idx[ax] = 0;
                                        ax += 1;
                                    }
                                    if ax == n {
                                        break;
                                    }
                                }
                                let d = acc / step.powi(l as i32);
                                s2 += d * d;
                            }
                            best[l] = best[l].max(s2.sqrt() * b.radius.powi(l as i32));
                        }
                    }
                }
            }
            best
        })
        .collect();
    (0..=m).map(|l| per_ball.iter().map(|v| v[l]).fold(0.0, f64::max)).collect()
}

pub fn verify_partition(grid: &Grid, mask: &[bool], pou: &PartitionOfUnity, m: usize) -> PartitionReport {
    let mut upper = true;
    let mut bump_lower = true;
    let mut min_on_half = f64::INFINITY;
    let mut sum = vec![0.0; grid.npoints()];
    let mut touched = vec![false; grid.npoints()];
    for (i, s) in pou.samples.iter().enumerate() {
        let b = &pou.balls[i];
        for &(p, v) in s {
            let x = grid.center(p);
            let r = dist(&x, &b.center);
            if !(0.0..=1.0).contains(&v) || r >= 0.75 * b.radius {
                upper = false;
            }
            sum[p] += v;
            touched[p] = true;
        }
    }
    for b in &pou.balls {
        for p in 0..grid.npoints() {
            let x = grid.center(p);
            if dist(&x, &b.center) < 0.5 * b.radius {
                if bump(b, &x) < 1.0 {
                    bump_lower = false;
                }
            }
        }
    }
    for (i, s) in pou.samples.iter().enumerate() {
        let b = &pou.balls[i];
        for &(p, v) in s {
            if dist(&grid.center(p), &b.center) < 0.5 * b.radius {
                min_on_half = min_on_half.min(v);
            }
        }
    }
    let sum_error = (0..grid.npoints()).filter(|&p| mask[p]).map(|p| (sum[p] - 1.0).abs()).fold(0.0, f64::max);
    let sum_outside = (0..grid.npoints()).filter(|&p| !touched[p]).map(|p| sum[p].abs()).fold(0.0, f64::max);
    PartitionReport {
        upper,
        bump_lower,
        min_on_half_ball: if min_on_half.is_finite() { min_on_half } else { 0.0 },
        sum_error,
        sum_outside,
        derivative_constants: derivative_constants(pou, grid.n(), m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_transform_matches_brute_force() {
        let g = Grid::cube(2, 0.0, 1.0, 17);
        let mask: Vec<bool> = (0..g.npoints()).map(|p| {
            let x = g.center(p);
            (x[0] - 0.4).powi(2) + (x[1] - 0.55).powi(2) < 0.1
        }).collect();
        let d = distance_to_complement(&g, &mask);
        for p in 0..g.npoints() {
            let brute = (0..g.npoints()).filter(|&q| !mask[q]).map(|q| dist(&g.center(p), &g.center(q))).fold(f64::INFINITY, f64::min);
            assert!((d[p] - brute).abs() < 1e-12, "{p}: {} vs {}", d[p], brute);
        }
    }

    #[test]
    fn empty_mask_gives_empty_cover() {
        let g = Grid::cube(2, 0.0, 1.0, 8);
        let c = cover(&g, &vec![false; g.npoints()], 1.0);
        assert!(c.balls.is_empty());
    }

    #[test]
    fn interval_ball_radius_window() {
        let g = Grid::cube(1, -1.0, 2.0, 300);
        let mask: Vec<bool> = (0..g.npoints()).map(|p| { let x = g.center(p)[0]; x > 0.0 && x < 1.0 }).collect();
        let c = cover(&g, &mask, 1.0);
        let first = &c.balls[0];
        assert!((first.center[0] - 0.5).abs() <= g.spacing);
        assert!(first.radius >= 1.0 / 32.0 && first.radius <= 1.0 / 16.0, "{}", first.radius);
        let rep = verify_cover(&g, &mask, &c);
        assert!(rep.all_pass(64), "{rep:?}");
    }

    #[test]
    fn lens_volume_limits() {
        use std::f64::consts::PI;
        assert!((lens_volume(2, 1.0, 1.0, 0.0) - PI).abs() < 1e-12);
        assert_eq!(lens_volume(2, 1.0, 1.0, 2.5), 0.0);
        // two unit discs at distance 1
        let expect = 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0;
        assert!((lens_volume(2, 1.0, 1.0, 1.0) - expect).abs() < 1e-12);
        assert!((lens_volume(1, 1.0, 0.5, 1.2) - 0.3).abs() < 1e-12);
        let v3 = lens_volume(3, 1.0, 1.0, 1.0);
        assert!((v3 - 5.0 * PI / 12.0).abs() < 1e-12);
    }

    #[test]
    fn soft_floor_is_identity_above_one() {
        assert_eq!(soft_floor(1.3), 1.3);
        assert_eq!(soft_floor(0.2), 1.0);
        assert!(soft_floor(0.7) >= 0.7);
    }
}
