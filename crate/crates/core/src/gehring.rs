//! Layer-cake identities, the iteration lemma and Gehring self-improvement with
//! every constant made explicit.

use crate::error::{Error, Result};
use crate::grid::{dist, GridFunction};
use crate::numeric::{gauss5, pairwise_sum, unit_ball_volume};
use rayon::prelude::*;
use serde::Serialize;

/// Level-set quadrature nodes per decade.
const NODES_PER_DECADE: usize = 625;

/// r * int_lo^hi mu^(r-1) dmu, in closed form.
fn power_integral(r: f64, lo: f64, hi: f64) -> f64 {
    hi.powf(r) - lo.powf(r)
}

/// Panel quadrature of r int mu^(r-1) over the node range, keeping only the
/// part below `cut` (or above it), so the indicator never splits a panel.
fn level_quadrature(r: f64, nodes: &[f64], cut: f64, keep_below: bool) -> f64 {
    let mut parts = Vec::with_capacity(nodes.len());
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (a, b) = if keep_below {
            (a, b.min(cut))
        } else {
            (a.max(cut), b)
        };
        if b > a {
            parts.push(gauss5(a, b, |mu| r * mu.powf(r - 1.0)));
        }
    }
    pairwise_sum(&parts)
}

fn log_nodes(lo: f64, hi: f64) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let k = ((decades * NODES_PER_DECADE as f64).ceil() as usize).max(2);
    (0..=k).map(|i| lo * (hi / lo).powf(i as f64 / k as f64)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerCakeReport {
    pub r: f64,
    pub samples: usize,
    pub max_relative_error: f64,
}

/// Compare h(x)^r with its level-set representation at the cells of `mask`.
/// For r > 0: r int_0^inf mu^(r-1) chi_{h > mu} dmu. For r < 0 (cells with
/// h > 0 only): -r int_0^inf mu^(r-1) chi_{h <= mu} dmu.
pub fn layer_cake_check(h: &GridFunction, r: f64, mask: &[bool]) -> Result<LayerCakeReport> {
    if r == 0.0 || !r.is_finite() {
        return Err(Error::Domain(format!("layer-cake exponent must be finite and nonzero, got {r}")));
    }
    let idx: Vec<usize> = (0..h.npoints()).filter(|&p| mask[p] && (r > 0.0 || h.values[p] > 0.0)).collect();
    if idx.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if idx.iter().any(|&p| h.values[p] < 0.0) {
        return Err(Error::Domain("layer-cake needs h >= 0".into()));
    }
    let max = idx.iter().map(|&p| h.values[p]).fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(LayerCakeReport { r, samples: idx.len(), max_relative_error: 0.0 });
    }
    let lo = 1e-8 * max;
    let errs: Vec<f64> = if r > 0.0 {
        let nodes = log_nodes(lo, max);
        idx.par_iter()
            .map(|&p| {
                let v = h.values[p];
                if v == 0.0 {
                    return 0.0;
                }
                let head = if v > lo { power_integral(r, 0.0, lo) } else { power_integral(r, 0.0, v) };
                let q = head + if v > lo { level_quadrature(r, &nodes, v, true) } else { 0.0 };
                (q - v.powf(r)).abs() / v.powf(r)
            })
            .collect()
    } else {
        let min = idx.iter().map(|&p| h.values[p]).fold(f64::INFINITY, f64::min);
        let top = 1e8 * max;
        let nodes = log_nodes(min, top);
        // integrate up to `top`, add the tail top^r in closed form
        idx.par_iter()
            .map(|&p| {
                let v = h.values[p];
                let q = -level_quadrature(r, &nodes, v, false) + top.powf(r);
                (q - v.powf(r)).abs() / v.powf(r)
            })
            .collect()
    };
    Ok(LayerCakeReport { r, samples: idx.len(), max_relative_error: errs.into_iter().fold(0.0, f64::max) })
}

/// sum_i tau^i ((i+1)(i+2))^gamma, summed until the geometric tail bound drops below 1e-14.
pub fn iteration_constant(tau: f64, gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&tau) || gamma < 0.0 {
        return Err(Error::Domain(format!("iteration constant needs tau in [0,1) and gamma >= 0, got ({tau}, {gamma})")));
    }
    if tau == 0.0 {
        return Ok(2f64.powf(gamma));
    }
    let mut terms = Vec::new();
    let mut i = 0u64;
    loop {
        let w = ((i + 1) as f64 * (i + 2) as f64).powf(gamma);
        let t = tau.powi(i as i32) * w;
        terms.push(t);
        // once the ratio of consecutive terms is below 1 the tail is
        // dominated by a geometric series
        let ratio = tau * (((i + 3) as f64) / ((i + 1) as f64)).powf(gamma);
        if ratio < 1.0 && t * ratio / (1.0 - ratio) < 1e-14 {
            break;
        }
        i += 1;
        if i > 10_000_000 {
            return Err(Error::Domain("iteration constant did not converge".into()));
        }
    }
    Ok(pairwise_sum(&terms))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationReport {
    pub premise_pairs: usize,
    pub premise_violations: usize,
    pub worst_premise_excess: f64,
    pub constant: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// None when the premise failed somewhere.
    pub conclusion: Option<bool>,
}

/// Check h(s) <= tau h(t) + C1 + C2/(t-s)^gamma on a `samples` x `samples`
/// grid of pairs s < t in [r0, r1], then assert the conclusion.
pub fn iteration_lemma_check<F: Fn(f64) -> f64>(
    h: F,
    (r0, r1): (f64, f64),
    tau: f64,
    c1: f64,
    c2: f64,
    gamma: f64,
    samples: usize,
) -> Result<IterationReport> {
    if r1 <= r0 {
        return Err(Error::Domain("iteration interval must satisfy R0 < R1".into()));
    }
    let c = iteration_constant(tau, gamma)?;
    let pts: Vec<f64> = (0..samples).map(|i| r0 + (r1 - r0) * i as f64 / (samples - 1) as f64).collect();
    let vals: Vec<f64> = pts.iter().map(|&s| h(s)).collect();
    if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Domain("h must be nonnegative and bounded".into()));
    }
    let mut pairs = 0;
    let mut bad = 0;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..samples {
        for j in i + 1..samples {
            pairs += 1;
            let rhs = tau * vals[j] + c1 + c2 / (pts[j] - pts[i]).powf(gamma);
            let ex = vals[i] - rhs;
            worst = worst.max(ex / rhs.max(f64::MIN_POSITIVE));
            if ex > 1e-12 * rhs.abs() {
                bad += 1;
            }
        }
    }
    let lhs = vals[0];
    let rhs = c1 / (1.0 - tau) + c * c2 / (r1 - r0).powf(gamma);
    Ok(IterationReport {
        premise_pairs: pairs,
        premise_violations: bad,
        worst_premise_excess: worst,
        constant: c,
        lhs,
        rhs,
        conclusion: if bad == 0 { Some(lhs <= rhs * (1.0 + 1e-12)) } else { None },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GehringCertificate {
    pub n: usize,
    pub a: f64,
    pub kappa: f64,
    pub eps0: f64,
    pub d: f64,
    pub theta_g: f64,
    pub c1: f64,
    pub c2: f64,
    pub c_star: f64,
    pub eps_max: f64,
    /// A theta_g^d + 1/4, must not exceed 1/2.
    pub absorption: f64,
}

impl GehringCertificate {
    /// hat c(n, eps) = sum 2^-i ((i+1)(i+2))^(n eps).
    pub fn c_hat(&self, eps: f64) -> f64 {
        iteration_constant(0.5, self.n as f64 * eps).expect("tau = 1/2 is admissible")
    }

    /// Constants (c_f, c_g) of the conclusion
    /// (avg_B f^(1+e))^(1/(1+e)) <= c_f avg_3B f + c_g (avg_3B g^(1+e))^(1/(1+e)).
    pub fn conclusion_constants(&self, eps: f64) -> (f64, f64) {
        let n = self.n as f64;
        let e1 = 1.0 / (1.0 + eps);
        let cf = (3f64.powf(n) * 45f64.powf(n * eps) * self.c_hat(eps)).powf(e1);
        let cg = (3f64.powf(n + 1.0) * 4f64.powf(eps) * self.c2).powf(e1);
        (cf, cg)
    }

    pub fn invariants_hold(&self) -> bool {
        self.d > self.kappa && self.d < 1.0 && self.theta_g > 0.0 && self.theta_g < 1.0 && self.eps_max > 0.0 && self.absorption <= 0.5
    }
}

pub fn gehring_constants(n: usize, a: f64, kappa: f64, eps0: f64) -> Result<GehringCertificate> {
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Domain(format!("kappa must lie in (0,1), got {kappa}")));
    }
    if !(a > 0.0 && a.is_finite()) || !(eps0 > 0.0 && eps0.is_finite()) {
        return Err(Error::Domain(format!("need A > 0 and eps0 > 0, got ({a}, {eps0})")));
    }
    let d = (1.0 + kappa) / 2.0;
    let theta_g = (1.0 / (4.0 * a + 1.0)).powf(1.0 / d);
    let five_n = 5f64.powi(n as i32);
    let c1 = 2.0 * five_n * a;
    let c2 = 2.0 * five_n;
    let c_star = 4.0 * c1 * (4.0 * a + 1.0).powf(1.0 + 2.0 * eps0);
    let eps_max = ((1.0 - kappa) / c_star).min(eps0);
    let cert = GehringCertificate {
        n,
        a,
        kappa,
        eps0,
        d,
        theta_g,
        c1,
        c2,
        c_star,
        eps_max,
        absorption: a * theta_g.powf(d) + 0.25,
    };
    if !cert.invariants_hold() {
        return Err(Error::Infeasible(format!("certificate invariants fail: {cert:?}")));
    }
    Ok(cert)
}

/// Which balls the reverse Hoelder premise is required on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
pub enum PremiseMode {
    /// Every scanned ball.
    #[default]
    AllBalls,
    /// Only balls with avg_3B f <= avg_B f.
    Decaying,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallPair {
    pub center: Vec<f64>,
    pub radius: f64,
    pub required: bool,
    pub avg_f: f64,
    pub avg_f_3r: f64,
    pub rh_term: f64,
    pub avg_g_3r: f64,
    /// Smallest A for which the premise holds on this pair.
    pub a_needed: f64,
    pub premise: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub conclusion: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GehringScanReport {
    pub mode: PremiseMode,
    pub a: f64,
    pub theta_rh: f64,
    pub kappa: f64,
    pub eps: f64,
    pub eps_max: f64,
    pub outside_certificate: bool,
    pub certificate: GehringCertificate,
    pub conclusion_constants: (f64, f64),
    pub pairs: Vec<BallPair>,
    pub premise_pass_fraction: f64,
    pub a_measured: f64,
    /// Conclusion holds on every pair whose premise holds.
    pub conclusion_on_premise_pairs: bool,
    /// Premise holds on every required pair.
    pub premise_all: bool,
}

fn ball_avg(f: &GridFunction, c: &[f64], r: f64, pow: f64) -> f64 {
    let cells = f.grid.ball_cells(c, r);
    if cells.is_empty() {
        return 0.0;
    }
    let vals: Vec<f64> = cells.iter().map(|&p| if pow == 1.0 { f.values[p] } else { f.values[p].powf(pow) }).collect();
    pairwise_sum(&vals) / cells.len() as f64
}

/// Concentric pairs (B_R, B_3R) inside the ball `omega`: centres on the
/// stride-`stride` sub-lattice, radii R0 2^-k down to `min_cells` lattice
/// spacings.
pub fn ball_pairs(f: &GridFunction, omega: (&[f64], f64), r0: f64, stride: usize, min_cells: f64) -> Vec<(Vec<f64>, f64)> {
    let g = &f.grid;
    let (oc, orad) = omega;
    let mut out = Vec::new();
    let s = g.shape3();
    let mut radii = Vec::new();
    let mut r = r0;
    while r >= min_cells * g.spacing {
        radii.push(r);
        r *= 0.5;
    }
    let off = stride / 2;
    for i in (off..s[0]).step_by(stride) {
        for j in (if g.n() >= 2 { off } else { 0 }..s[1]).step_by(if g.n() >= 2 { stride } else { 1 }) {
            for k in (if g.n() >= 3 { off } else { 0 }..s[2]).step_by(if g.n() >= 3 { stride } else { 1 }) {
                let c = g.center(g.ravel([i, j, k]));
                for &r in &radii {
                    if dist(&c, oc) + 3.0 * r < orad {
                        out.push((c.clone(), r));
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct GehringInput<'a> {
    pub f1: &'a GridFunction,
    pub f2: &'a GridFunction,
    pub kappa: f64,
    pub a: f64,
    pub theta_rh: f64,
    pub eps0: f64,
    pub r0: f64,
    pub omega: (&'a [f64], f64),
    pub mode: PremiseMode,
    /// Explicit (centre, R) family; `None` scans `ball_pairs` with stride 8.
    pub pairs: Option<&'a [(Vec<f64>, f64)]>,
}

/// Scan the premise and the conclusion over concentric ball pairs. The tail
/// theta avg_3B f1 is absorbed on decaying balls, so the certificate is built
/// with A/(1-theta) and f2/(1-theta). `eps = None` uses eps_max.
pub fn gehring_verify(inp: &GehringInput, eps: Option<f64>) -> Result<GehringScanReport> {
    if inp.f1.values.iter().chain(&inp.f2.values).any(|&v| v < 0.0) {
        return Err(Error::Domain("f1 and f2 must be nonnegative".into()));
    }
    if !(0.0..1.0).contains(&inp.theta_rh) {
        return Err(Error::Domain("theta must lie in [0,1)".into()));
    }
    let scale = 1.0 / (1.0 - inp.theta_rh);
    let cert = gehring_constants(inp.f1.n(), inp.a * scale, inp.kappa, inp.eps0)?;
    let eps = eps.unwrap_or(cert.eps_max);
    let (cf, cg) = cert.conclusion_constants(eps);
    let pairs = match inp.pairs {
        Some(p) => p.to_vec(),
        None => ball_pairs(inp.f1, inp.omega, inp.r0, 8, 2.0),
    };
    if pairs.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let recs: Vec<BallPair> = pairs
        .par_iter()
        .map(|(c, r)| {
            let f = inp.f1;
            let avg_f = ball_avg(f, c, *r, 1.0);
            let avg_f_3r = ball_avg(f, c, 3.0 * r, 1.0);
            let rh_term = ball_avg(f, c, 3.0 * r, inp.kappa).powf(1.0 / inp.kappa);
            let avg_g_3r = ball_avg(inp.f2, c, 3.0 * r, 1.0);
            let tail = inp.theta_rh * avg_f_3r;
            let a_needed = if rh_term > 0.0 { ((avg_f - avg_g_3r - tail) / rh_term).max(0.0) } else if avg_f <= avg_g_3r + tail { 0.0 } else { f64::INFINITY };
            let required = match inp.mode {
                PremiseMode::AllBalls => true,
                PremiseMode::Decaying => avg_f_3r <= avg_f,
            };
            let premise = avg_f <= inp.a * rh_term + avg_g_3r + tail + 1e-12 * avg_f.abs();
            let e1 = 1.0 + eps;
            let lhs = ball_avg(f, c, *r, e1).powf(1.0 / e1);
            let g_term = (ball_avg(inp.f2, c, 3.0 * r, e1) * scale.powf(e1)).powf(1.0 / e1);
            let rhs = cf * avg_f_3r + cg * g_term;
            BallPair {
                center: c.clone(),
                radius: *r,
                required,
                avg_f,
                avg_f_3r,
                rh_term,
                avg_g_3r,
                a_needed,
                premise,
                lhs,
                rhs,
                conclusion: lhs <= rhs * (1.0 + 1e-12),
            }
        })
        .collect();
    let req: Vec<&BallPair> = recs.iter().filter(|p| p.required).collect();
    let passing = req.iter().filter(|p| p.premise).count();
    let a_measured = req.iter().map(|p| p.a_needed).fold(0.0, f64::max);
    Ok(GehringScanReport {
        mode: inp.mode,
        a: inp.a,
        theta_rh: inp.theta_rh,
        kappa: inp.kappa,
        eps,
        eps_max: cert.eps_max,
        outside_certificate: eps > cert.eps_max,
        conclusion_constants: (cf, cg),
        premise_pass_fraction: if req.is_empty() { 1.0 } else { passing as f64 / req.len() as f64 },
        a_measured,
        conclusion_on_premise_pairs: recs.iter().filter(|p| p.premise).all(|p| p.conclusion),
        premise_all: passing == req.len(),
        certificate: cert,
        pairs: recs,
    })
}

/// Average of f over B(x, rho) with cells weighted by the fraction of a
/// lattice spacing by which they lie inside; continuous in rho.
pub fn smooth_ball_average(f: &GridFunction, x: &[f64], rho: f64) -> f64 {
    let h = f.grid.spacing;
    let cells = f.grid.ball_cells(x, rho + 0.5 * h);
    let mut num = Vec::with_capacity(cells.len());
    let mut den = Vec::with_capacity(cells.len());
    for p in cells {
        let w = ((rho - dist(&f.grid.center(p), x)) / h + 0.5).clamp(0.0, 1.0);
        if w > 0.0 {
            num.push(w * f.values[p]);
            den.push(w);
        }
    }
    let d = pairwise_sum(&den);
    if d == 0.0 {
        let p = f.grid.nearest(x);
        return f.values[p];
    }
    pairwise_sum(&num) / d
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExitRadius {
    pub point: usize,
    pub center: Vec<f64>,
    pub rho: f64,
    /// Psi(x, rho) <= lambda held on the sampled radii above rho.
    pub stays_below: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExitReport {
    pub lambda: f64,
    pub lambda0: f64,
    pub radii: Vec<ExitRadius>,
    /// Indices into `radii` of the Vitali subfamily (disjoint 3-balls).
    pub vitali: Vec<usize>,
    pub vitali_disjoint: bool,
    /// Super-level points inside the union of the 15-balls of the subfamily.
    pub covered_by_15: bool,
}

/// lambda_0 = 15^n / (omega_n (r2 - r1)^n) int_{B_3R} f.
pub fn exit_lambda0(f: &GridFunction, center: &[f64], r1: f64, r2: f64, big_r: f64) -> f64 {
    let n = f.n();
    let cells = f.grid.ball_cells(center, 3.0 * big_r);
    let vals: Vec<f64> = cells.iter().map(|&p| f.values[p]).collect();
    let int = pairwise_sum(&vals) * f.grid.cell_volume();
    15f64.powi(n as i32) / (unit_ball_volume(n) * (r2 - r1).powi(n as i32)) * int
}

/// For every cell of B(center, r1) with f > lambda, the largest
/// rho < (r2 - r1)/15 with Psi(x, rho) = lambda, then a greedy Vitali
/// subfamily (largest radius first) with pairwise disjoint 3-balls.
pub fn exit_radii(f: &GridFunction, lambda: f64, r1: f64, r2: f64, center: &[f64], big_r: f64) -> Result<ExitReport> {
    if !(r1 < r2) {
        return Err(Error::Domain("need r1 < r2".into()));
    }
    let lambda0 = exit_lambda0(f, center, r1, r2, big_r);
    if lambda <= lambda0 {
        return Err(Error::Precondition(format!("lambda {lambda} must exceed lambda_0 = {lambda0}")));
    }
    let top = (r2 - r1) / 15.0;
    let pts: Vec<usize> = f.grid.ball_cells(center, r1).into_iter().filter(|&p| f.values[p] > lambda).collect();
    let radii: Vec<ExitRadius> = pts
        .par_iter()
        .filter_map(|&p| {
            let x = f.grid.center(p);
            let psi = |rho: f64| smooth_ball_average(f, &x, rho);
            // scan downwards for the last crossing
            let steps = 128;
            let mut hi = top;
            let mut lo = None;
            for s in (0..steps).rev() {
                let rho = top * s as f64 / steps as f64;
                if psi(rho) > lambda {
                    lo = Some(rho);
                    break;
                }
                hi = rho;
            }
            let mut lo = lo?;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if psi(mid) > lambda {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let rho = hi;
            let stays_below = (0..64).all(|k| {
                let r = rho + (r2 - r1 - rho) * k as f64 / 64.0;
                psi(r) <= lambda * (1.0 + 1e-12)
            });
            Some(ExitRadius { point: p, center: x, rho, stays_below })
        })
        .collect();
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[b].rho.partial_cmp(&radii[a].rho).unwrap().then(a.cmp(&b)));
    let mut vitali: Vec<usize> = Vec::new();
    for &i in &order {
        if vitali.iter().all(|&j| dist(&radii[i].center, &radii[j].center) >= 3.0 * (radii[i].rho + radii[j].rho)) {
            vitali.push(i);
        }
    }
    let vitali_disjoint = vitali.iter().enumerate().all(|(a, &i)| {
        vitali[a + 1..].iter().all(|&j| dist(&radii[i].center, &radii[j].center) >= 3.0 * (radii[i].rho + radii[j].rho))
    });
    let covered_by_15 = radii
        .iter()
        .all(|e| vitali.iter().any(|&j| dist(&e.center, &radii[j].center) < 15.0 * radii[j].rho));
    Ok(ExitReport { lambda, lambda0, radii, vitali, vitali_disjoint, covered_by_15 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn certificate_example() {
        let c = gehring_constants(1, 1.0, 0.5, 0.5).unwrap();
        assert_eq!(c.d, 0.75);
        assert_eq!(c.c1, 10.0);
        assert_eq!(c.c_star, 1000.0);
        assert_eq!(c.eps_max, 5e-4);
        assert!(c.invariants_hold());
    }

    #[test]
    fn iteration_constants() {
        assert!((iteration_constant(0.5, 0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((iteration_constant(0.5, 1.0).unwrap() - 16.0).abs() < 1e-12);
        assert_eq!(iteration_constant(0.0, 3.0).unwrap(), 8.0);
        assert!(iteration_constant(1.0, 0.0).is_err());
    }

    #[test]
    fn layer_cake_constant() {
        let g = Grid::cube(1, 0.0, 1.0, 4);
        let h = g.sample(|_| 3.0).unwrap();
        let rep = layer_cake_check(&h, 2.0, &vec![true; 4]).unwrap();
        assert!(rep.max_relative_error < 1e-8, "{rep:?}");
        let rep = layer_cake_check(&h, -1.5, &vec![true; 4]).unwrap();
        assert!(rep.max_relative_error < 1e-8, "{rep:?}");
        assert!(layer_cake_check(&h, 0.0, &vec![true; 4]).is_err());
    }

    #[test]
    fn constant_f_needs_no_improvement() {
        let g = Grid::cube(2, -1.0, 1.0, 64);
        let f1 = g.sample(|_| 2.0).unwrap();
        let f2 = g.zeros(1);
        let inp = GehringInput { f1: &f1, f2: &f2, kappa: 0.5, a: 1.0, theta_rh: 0.5, eps0: 0.5, r0: 0.25, omega: (&[0.0, 0.0], 1.0), mode: PremiseMode::AllBalls, pairs: None };
        let rep = gehring_verify(&inp, None).unwrap();
        assert!(rep.premise_all && rep.conclusion_on_premise_pairs);
        for p in &rep.pairs {
            assert!((p.lhs - p.avg_f_3r).abs() < 1e-12);
        }
    }

    #[test]
    fn exit_radius_empty_for_low_function() {
        let g = Grid::cube(1, -1.0, 1.0, 200);
        let f = g.sample(|_| 1.0).unwrap();
        let r = exit_radii(&f, 400.0, 0.1, 0.3, &[0.0], 0.3).unwrap();
        assert!(r.radii.is_empty());
    }
}
