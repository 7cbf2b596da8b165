//! End-to-end checks on the model system: weak-form residuals, structure
//! conditions, Caccioppoli and reverse Hoelder scans, and the chain that
//! turns a measured reverse Hoelder constant into a Gehring certificate.

use crate::error::{Error, Result};
use crate::exponents::{revalidate, DerivedExponents, ExponentConfig, P, Q};
use crate::gehring::{gehring_verify, GehringCertificate, GehringInput, PremiseMode};
use crate::grid::{dist, partial_derivative, DerivativeCache, Grid, GridFunction, MultiIndex};
use crate::meanpoly::fit_cached;
use crate::numeric::pairwise_sum;
use crate::report::Status;
use crate::truncation::{assemble_g, lambda_floor, DataFields, TruncationSetup};
use crate::weights::{double_phase_value, Weight};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Model flux (|xi|^{p-2} + a |xi|^{q-2}) xi, as the scalar factor.
fn flux_factor(norm: f64, a: f64, p: f64, q: f64) -> f64 {
    if norm == 0.0 {
        0.0
    } else {
        norm.powf(p - 2.0) + a * norm.powf(q - 2.0)
    }
}

/// Quadrature of sum_sigma A_sigma(x, D^m u) d_sigma phi over the grid.
/// `phi` has to vanish within m + 1 cells of the boundary.
pub fn model_residual(u: &GridFunction, a: &GridFunction, p: f64, q: f64, m: usize, phi: &GridFunction) -> Result<f64> {
    let grid = &u.grid;
    if phi.grid != *grid || a.grid != *grid {
        return Err(Error::Domain("u, a and phi must share a grid".into()));
    }
    if phi.components != u.components {
        return Err(Error::Domain("phi needs as many components as u".into()));
    }
    let margin = m + 1;
    let s = grid.shape3();
    let n = grid.n();
    let k = u.components;
    for i in 0..grid.npoints() {
        let ijk = grid.unravel(i);
        let near_edge = (0..n).any(|ax| ijk[ax] < margin || ijk[ax] + margin >= s[ax]);
        if near_edge && (0..k).any(|c| phi.values[i * k + c] != 0.0) {
            return Err(Error::Precondition(format!("test function is not zero within {margin} cells of the boundary")));
        }
    }
    let sigmas = MultiIndex::of_order(n, m as u32);
    let du: Vec<GridFunction> = sigmas.iter().map(|sg| partial_derivative(u, sg)).collect::<Result<_>>()?;
    let dphi: Vec<GridFunction> = sigmas.iter().map(|sg| partial_derivative(phi, sg)).collect::<Result<_>>()?;
    let terms: Vec<f64> = (0..grid.npoints())
        .into_par_iter()
        .map(|i| {
            let mut n2 = 0.0;
            for d in &du {
                for c in 0..k {
                    n2 += d.values[i * k + c].powi(2);
                }
            }
            let f = flux_factor(n2.sqrt(), a.values[i], p, q);
            let mut dot = 0.0;
            for (d, e) in du.iter().zip(&dphi) {
                for c in 0..k {
                    dot += d.values[i * k + c] * e.values[i * k + c];
                }
            }
            f * dot
        })
        .collect();
    Ok(pairwise_sum(&terms) * grid.cell_volume())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub samples: usize,
    /// max relative gap in sum A.xi = |xi|^p + a|xi|^q (coercivity with nu = 1).
    pub coercivity_gap: f64,
    /// max of |A| / (|xi|^{p-1} + a^{1/q} (a^{1/q}|xi|)^{q-1}) - 1.
    pub growth_excess: f64,
    pub zero_ok: bool,
    pub pass: bool,
}

/// Coercivity and growth of the model field on random xi and random weight
/// values drawn from `a`.
pub fn structure_checks(a: &GridFunction, p: f64, q: f64, dims: usize, samples: usize, seed: u64) -> StructureReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coercivity_gap = 0.0f64;
    let mut growth_excess = f64::NEG_INFINITY;
    for _ in 0..samples {
        let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
        let xi: Vec<f64> = (0..dims).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
        let ax = a.values[rng.gen_range(0..a.values.len())];
        let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let f = flux_factor(norm, ax, p, q);
        let a_dot: f64 = xi.iter().map(|v| f * v * v).sum();
        let target = norm.powf(p) + ax * norm.powf(q);
        if target > 0.0 {
            coercivity_gap = coercivity_gap.max((a_dot - target).abs() / target);
        }
        let a_norm = f * norm;
        let aq = ax.powf(1.0 / q);
        let bound = norm.powf(p - 1.0) + aq * (aq * norm).powf(q - 1.0);
        if bound > 0.0 {
            growth_excess = growth_excess.max(a_norm / bound - 1.0);
        }
    }
    let zero_ok = flux_factor(0.0, 1.0, p, q) == 0.0;
    let pass = coercivity_gap <= 1e-12 && growth_excess <= 1e-12 && zero_ok;
    StructureReport { samples, coercivity_gap, growth_excess: growth_excess.max(0.0), zero_ok, pass }
}

/// Ball family shared by the scans and the Gehring check: centres on a
/// lattice of spacing `spacing` around the domain centre, radii r0 2^-k down
/// to `min_radius`, with B_3R inside the domain ball.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanParams {
    pub omega_center: Vec<f64>,
    pub omega_radius: f64,
    pub r0: f64,
    pub spacing: f64,
    pub min_radius: f64,
    pub delta: f64,
    pub seed: u64,
}

impl ScanParams {
    /// Unit domain ball at the origin, R0 = 1/4.
    pub fn unit(n: usize, d0: f64, seed: u64) -> Self {
        ScanParams {
            omega_center: vec![0.0; n],
            omega_radius: 1.0,
            r0: 0.25,
            spacing: 0.125,
            min_radius: 0.0625,
            delta: TruncationSetup::default_delta(d0),
            seed,
        }
    }
}

pub fn scan_family(n: usize, params: &ScanParams) -> Vec<(Vec<f64>, f64)> {
    let mut radii = Vec::new();
    let mut r = params.r0;
    while r >= params.min_radius * (1.0 - 1e-12) {
        radii.push(r);
        r *= 0.5;
    }
    let k = (params.omega_radius / params.spacing).ceil() as i64;
    let mut out = Vec::new();
    let mut idx = vec![-k; n];
    loop {
        let z: Vec<f64> = (0..n).map(|a| params.omega_center[a] + idx[a] as f64 * params.spacing).collect();
        let dz = dist(&z, &params.omega_center);
        for &r in &radii {
            if dz + 3.0 * r < params.omega_radius {
                out.push((z.clone(), r));
            }
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
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRecord {
    pub center: Vec<f64>,
    pub radius: f64,
    pub lhs: f64,
    pub rhs_terms: Vec<f64>,
    /// Constant this ball needs; non-finite ratios fail the record.
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanEnvironment {
    pub grid_shape: Vec<usize>,
    pub seed: u64,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub m: usize,
    pub delta0: f64,
    pub delta: f64,
    pub delta_hat: f64,
    pub gamma_p: Vec<f64>,
    pub gamma_q: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub suite: String,
    pub terms: Vec<String>,
    pub records: Vec<ScanRecord>,
    /// Largest per-ball ratio.
    pub constant: f64,
    /// Extra aggregate constants, by name.
    pub aggregates: Vec<(String, f64)>,
    pub environment: ScanEnvironment,
    pub status: Status,
}

/// Fields shared by the scans: H_m, H_m^delta, F^delta (global F, cutoff = 1)
/// and the derivative cache of u.
pub struct ScanFields {
    pub h_m: GridFunction,
    pub h_m_delta: GridFunction,
    pub f_delta: GridFunction,
    pub cache: DerivativeCache,
    pub lambda0: f64,
}

pub fn scan_fields(u: &GridFunction, weight: &Weight, cfg: &ExponentConfig, derived: &DerivedExponents, params: &ScanParams) -> Result<ScanFields> {
    let grid = &u.grid;
    let setup = TruncationSetup { center: params.omega_center.clone(), big_r: params.r0, delta: params.delta };
    let ones = GridFunction { grid: grid.clone(), components: 1, values: vec![1.0; grid.npoints()] };
    let asm = assemble_g(u, weight, cfg, derived, &DataFields::default(), &setup, Some(ones))?;
    let h_m = asm.h_l[cfg.m].clone();
    let d = params.delta;
    let pw = |f: &GridFunction| f.map(|v| if v > 0.0 { v.powf(d) } else { 0.0 });
    let lambda0 = lambda_floor(&asm.big_g, &setup).lambda0;
    Ok(ScanFields {
        h_m_delta: pw(&h_m),
        f_delta: pw(&asm.f),
        h_m,
        cache: DerivativeCache::new(u, cfg.m as u32)?,
        lambda0,
    })
}

fn avg(f: &GridFunction, cells: &[usize], pow: f64) -> f64 {
    if cells.is_empty() {
        return 0.0;
    }
    let v: Vec<f64> = cells.iter().map(|&c| if pow == 1.0 { f.values[c] } else { f.values[c].powf(pow) }).collect();
    pairwise_sum(&v) / v.len() as f64
}

fn ratio_of(excess: f64, den: f64) -> f64 {
    let excess = excess.max(0.0);
    if excess == 0.0 {
        0.0
    } else if den > 0.0 {
        excess / den
    } else {
        f64::INFINITY
    }
}

fn environment(grid: &Grid, cfg: &ExponentConfig, derived: &DerivedExponents, params: &ScanParams) -> ScanEnvironment {
    let s = grid.shape3();
    ScanEnvironment {
        grid_shape: s[..grid.n()].to_vec(),
        seed: params.seed,
        p: cfg.p,
        q: cfg.q,
        alpha: cfg.alpha,
        m: cfg.m,
        delta0: derived.d0(),
        delta: params.delta,
        delta_hat: derived.delta_hat,
        gamma_p: (0..=cfg.m).map(|l| derived.gamma(P, l)).collect(),
        gamma_q: (0..=cfg.m).map(|l| derived.gamma(Q, l)).collect(),
        beta: derived.delta0.beta.clone(),
    }
}

fn finish(suite: &str, terms: &[&str], records: Vec<ScanRecord>, aggregates: Vec<(String, f64)>, env: ScanEnvironment) -> ScanReport {
    let constant = records.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let ok = records.iter().all(|r| r.pass) && aggregates.iter().all(|(_, v)| v.is_finite());
    ScanReport {
        suite: suite.into(),
        terms: terms.iter().map(|t| t.to_string()).collect(),
        records,
        constant,
        aggregates,
        environment: env,
        status: Status::from_bool(ok),
    }
}

/// avg_{B_R} H_m^delta against 1/2 avg_{B_3R} H_m^delta
/// + sum_{l<m} avg_{B_2R} H_m((D^l u - D^l P)/R^{m-l})^delta + avg_{B_3R} F^delta,
/// P the mean-value polynomial of u on B_2R. Also measures
/// sum_l avg_{B_2R} H_m(...) / (avg_{B_2R} H_m^dhat)^{1/dhat}.
pub fn caccioppoli_scan(u: &GridFunction, weight: &Weight, cfg: &ExponentConfig, derived: &DerivedExponents, params: &ScanParams) -> Result<ScanReport> {
    let fields = scan_fields(u, weight, cfg, derived, params)?;
    caccioppoli_with(u, weight, cfg, derived, params, &fields)
}

pub fn caccioppoli_with(
    u: &GridFunction,
    weight: &Weight,
    cfg: &ExponentConfig,
    derived: &DerivedExponents,
    params: &ScanParams,
    fields: &ScanFields,
) -> Result<ScanReport> {
    let grid = &u.grid;
    let n = grid.n();
    let m = cfg.m;
    let family = scan_family(n, params);
    if family.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let d = params.delta;
    let dh = derived.delta_hat;
    let ones = GridFunction { grid: grid.clone(), components: 1, values: vec![1.0; grid.npoints()] };
    let rows: Vec<(ScanRecord, f64)> = family
        .par_iter()
        .map(|(c, r)| {
            let b1 = grid.ball_cells(c, *r);
            let b2 = grid.ball_cells(c, 2.0 * r);
            let b3 = grid.ball_cells(c, 3.0 * r);
            let lhs = avg(&fields.h_m_delta, &b1, 1.0);
            let t1 = 0.5 * avg(&fields.h_m_delta, &b3, 1.0);
            let t3 = avg(&fields.f_delta, &b3, 1.0);
            let mut mask = vec![false; grid.npoints()];
            for &p in &b2 {
                mask[p] = true;
            }
            let poly = fit_cached(&fields.cache, &mask, &ones, m, c)?;
            let mut t2 = 0.0;
            let mut plain = 0.0;
            for l in 0..m {
                let sig = MultiIndex::of_order(n, l as u32);
                let dp: Vec<_> = sig.iter().map(|s| poly.differentiate(s)).collect();
                let scale = r.powi((m - l) as i32);
                let (mut s_d, mut s_1) = (Vec::with_capacity(b2.len()), Vec::with_capacity(b2.len()));
                for &p in &b2 {
                    let x = &grid.center3(p)[..n];
                    let mut n2 = 0.0;
                    for (s, q) in sig.iter().zip(&dp) {
                        n2 += (fields.cache.get(s).values[p] - q.evaluate(x)[0]).powi(2);
                    }
                    let h = double_phase_value(n2.sqrt() / scale, weight.a.values[p], cfg.p, cfg.q, cfg.q);
                    s_d.push(h.powf(d));
                    s_1.push(h);
                }
                if !b2.is_empty() {
                    t2 += pairwise_sum(&s_d) / b2.len() as f64;
                    plain += pairwise_sum(&s_1) / b2.len() as f64;
                }
            }
            let low = avg(&fields.h_m, &b2, dh).powf(1.0 / dh);
            let ratio = ratio_of(lhs - t1, t2 + t3);
            let r410 = ratio_of(plain, low);
            Ok((ScanRecord { center: c.clone(), radius: *r, lhs, rhs_terms: vec![t1, t2, t3], ratio, pass: ratio.is_finite() }, r410))
        })
        .collect::<Result<_>>()?;
    let r410 = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let records = rows.into_iter().map(|r| r.0).collect();
    Ok(finish(
        "caccioppoli",
        &["half_tail", "polynomial_deviation", "data"],
        records,
        vec![("deviation_by_lower_moment".into(), r410)],
        environment(grid, cfg, derived, params),
    ))
}

/// avg_{B_R} H_m^delta against c (avg_{B_3R} H_m^dhat)^{delta/dhat}
/// + c avg_{B_3R} F^delta + 1/2 avg_{B_3R} H_m^delta.
pub fn reverse_holder_scan(u: &GridFunction, weight: &Weight, cfg: &ExponentConfig, derived: &DerivedExponents, params: &ScanParams) -> Result<ScanReport> {
    let fields = scan_fields(u, weight, cfg, derived, params)?;
    reverse_holder_with(&u.grid, cfg, derived, params, &fields)
}

pub fn reverse_holder_with(grid: &Grid, cfg: &ExponentConfig, derived: &DerivedExponents, params: &ScanParams, fields: &ScanFields) -> Result<ScanReport> {
    let family = scan_family(grid.n(), params);
    if family.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let kappa = derived.delta_hat / params.delta;
    let records: Vec<ScanRecord> = family
        .par_iter()
        .map(|(c, r)| {
            let b1 = grid.ball_cells(c, *r);
            let b3 = grid.ball_cells(c, 3.0 * r);
            let lhs = avg(&fields.h_m_delta, &b1, 1.0);
            let t1 = avg(&fields.h_m_delta, &b3, kappa).powf(1.0 / kappa);
            let t2 = avg(&fields.f_delta, &b3, 1.0);
            let t3 = 0.5 * avg(&fields.h_m_delta, &b3, 1.0);
            let ratio = ratio_of(lhs - t3, t1 + t2);
            ScanRecord { center: c.clone(), radius: *r, lhs, rhs_terms: vec![t1, t2, t3], ratio, pass: ratio.is_finite() }
        })
        .collect();
    Ok(finish("reverse_holder", &["lower_moment", "data", "half_tail"], records, Vec::new(), environment(grid, cfg, derived, params)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    pub pass: bool,
}

/// Every number that enters the certified exponent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantChain {
    pub gamma_p: Vec<f64>,
    pub gamma_q: Vec<f64>,
    pub delta0: f64,
    pub delta: f64,
    pub delta_hat: f64,
    pub beta: Vec<f64>,
    pub lambda0: f64,
    pub kappa: f64,
    pub a: f64,
    pub eps0: f64,
    pub eps_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfImproveReport {
    pub stages: Vec<Stage>,
    pub halted_at: Option<String>,
    pub chain: Option<ConstantChain>,
    pub certificate: Option<GehringCertificate>,
    /// 1 + eps_max for f1 = H_m^delta.
    pub improved_exponent: Option<f64>,
    /// delta (1 + eps_max): the integrability gained for H_m itself.
    pub h_m_exponent: Option<f64>,
    /// With beta_src = 1 the target integrability of H_m is exactly 1.
    pub source_mode_target: Option<f64>,
    pub premise_all: bool,
    pub conclusion_all: bool,
    pub balls: usize,
    /// The result is conditional on the constants measured for this data.
    pub conditional_on_measured_constants: bool,
    pub status: Status,
}

impl SelfImproveReport {
    fn halt(stages: Vec<Stage>, name: &str) -> Self {
        SelfImproveReport {
            stages,
            halted_at: Some(name.into()),
            chain: None,
            certificate: None,
            improved_exponent: None,
            h_m_exponent: None,
            source_mode_target: None,
            premise_all: false,
            conclusion_all: false,
            balls: 0,
            conditional_on_measured_constants: true,
            status: Status::Fail,
        }
    }
}

/// Reverse Hoelder scan, then the Gehring certificate with A = the measured
/// constant, kappa = dhat/delta (unless overridden), eps0 = 1/delta0 - 1, and
/// the improved inequality at eps_max on the same balls.
pub fn self_improve(
    u: &GridFunction,
    weight: &Weight,
    cfg: &ExponentConfig,
    derived: &DerivedExponents,
    params: &ScanParams,
    kappa_override: Option<f64>,
) -> Result<SelfImproveReport> {
    let mut stages = Vec::new();
    let exps_ok = revalidate(cfg, derived).iter().all(|c| c.pass());
    stages.push(Stage { name: "exponents".into(), pass: exps_ok });
    if !exps_ok {
        return Ok(SelfImproveReport::halt(stages, "exponents"));
    }
    let fields = scan_fields(u, weight, cfg, derived, params)?;
    let rh = reverse_holder_with(&u.grid, cfg, derived, params, &fields)?;
    let rh_ok = rh.status == Status::Pass;
    stages.push(Stage { name: "reverse_holder".into(), pass: rh_ok });
    if !rh_ok {
        return Ok(SelfImproveReport::halt(stages, "reverse_holder"));
    }
    // any larger A keeps the premise, and the certificate needs A > 0
    let a = rh.constant.max(1.0);
    let kappa = kappa_override.unwrap_or(derived.delta_hat / params.delta);
    let eps0 = 1.0 / derived.d0() - 1.0;
    let f2 = fields.f_delta.map(|v| a * v);
    let family: Vec<(Vec<f64>, f64)> = rh.records.iter().map(|r| (r.center.clone(), r.radius)).collect();
    let inp = GehringInput {
        f1: &fields.h_m_delta,
        f2: &f2,
        kappa,
        a,
        theta_rh: 0.5,
        eps0,
        r0: params.r0,
        omega: (&params.omega_center, params.omega_radius),
        mode: PremiseMode::AllBalls,
        pairs: Some(&family),
    };
    let cert = match crate::gehring::gehring_constants(u.n(), a / 0.5, kappa, eps0) {
        Ok(c) => c,
        Err(_) => {
            stages.push(Stage { name: "certificate".into(), pass: false });
            return Ok(SelfImproveReport::halt(stages, "certificate"));
        }
    };
    let cert_ok = cert.invariants_hold() && cert.eps_max > 0.0;
    stages.push(Stage { name: "certificate".into(), pass: cert_ok });
    if !cert_ok {
        return Ok(SelfImproveReport::halt(stages, "certificate"));
    }
    let scan = gehring_verify(&inp, None)?;
    stages.push(Stage { name: "premise".into(), pass: scan.premise_all });
    if !scan.premise_all {
        return Ok(SelfImproveReport::halt(stages, "premise"));
    }
    stages.push(Stage { name: "conclusion".into(), pass: scan.conclusion_on_premise_pairs });
    let eps_max = scan.eps_max;
    let chain = ConstantChain {
        gamma_p: rh.environment.gamma_p.clone(),
        gamma_q: rh.environment.gamma_q.clone(),
        delta0: derived.d0(),
        delta: params.delta,
        delta_hat: derived.delta_hat,
        beta: derived.delta0.beta.clone(),
        lambda0: fields.lambda0,
        kappa,
        a,
        eps0,
        eps_max,
    };
    let ok = stages.iter().all(|s| s.pass);
    Ok(SelfImproveReport {
        halted_at: if ok { None } else { Some("conclusion".into()) },
        stages,
        chain: Some(chain),
        certificate: Some(scan.certificate.clone()),
        improved_exponent: Some(1.0 + eps_max),
        h_m_exponent: Some(params.delta * (1.0 + eps_max)),
        source_mode_target: if cfg.beta_src == 1.0 { Some(1.0) } else { None },
        premise_all: scan.premise_all,
        conclusion_all: scan.conclusion_on_premise_pairs,
        balls: scan.pairs.len(),
        conditional_on_measured_constants: true,
        status: Status::from_bool(ok),
    })
}

/// 2D model data: a = regularized |x|^alpha, u a smooth trigonometric field.
pub fn model_data_2d(cells: usize, cfg: &ExponentConfig) -> Result<(GridFunction, Weight)> {
    let grid = Grid::cube(2, -1.0, 1.0, cells);
    let raw = grid.sample(|x| (x[0] * x[0] + x[1] * x[1]).sqrt().powf(cfg.alpha))?;
    let a = crate::weights::regularize(&raw, cfg.alpha)?;
    let u = grid.sample(|x| (1.3 * x[0] + 0.4).sin() * (0.9 * x[1] - 0.2).cos() + 0.25 * x[0] * x[1])?;
    Ok((u, Weight::new(a, cfg.alpha)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::derive;

    #[test]
    fn linear_flux_has_zero_residual() {
        let g = Grid::cube(2, 0.0, 1.0, 32);
        let u = g.sample(|x| 2.0 * x[0] - x[1]).unwrap();
        let a = g.sample(|_| 0.7).unwrap();
        let phi = g
            .sample(|x| {
                let r = ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
                if r < 0.3 {
                    (0.09 - r * r).powi(2)
                } else {
                    0.0
                }
            })
            .unwrap();
        let r = model_residual(&u, &a, 2.0, 2.2, 1, &phi).unwrap();
        assert!(r.abs() <= 1e-8 * phi.max_abs(), "{r}");
    }

    #[test]
    fn residual_rejects_boundary_support() {
        let g = Grid::cube(1, 0.0, 1.0, 16);
        let u = g.sample(|x| x[0]).unwrap();
        let a = g.zeros(1);
        let phi = g.sample(|_| 1.0).unwrap();
        assert!(model_residual(&u, &a, 2.0, 2.2, 1, &phi).is_err());
    }

    #[test]
    fn structure_model_field() {
        let g = Grid::cube(1, 0.0, 1.0, 8);
        let a = g.sample(|x| x[0]).unwrap();
        let r = structure_checks(&a, 2.0, 2.2, 4, 2000, 1);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn zero_field_scans_are_trivial() {
        let cfg = ExponentConfig::model(2, 1, 2.0, 2.2, 0.5);
        let d = derive(&cfg).unwrap();
        let g = Grid::cube(2, -1.0, 1.0, 32);
        let u = g.zeros(1);
        let w = Weight::constant(&g, 1.0, 0.5);
        let params = ScanParams::unit(2, d.d0(), 0);
        let c = caccioppoli_scan(&u, &w, &cfg, &d, &params).unwrap();
        assert!(c.records.iter().all(|r| r.lhs == 0.0 && r.ratio == 0.0));
        let rh = reverse_holder_scan(&u, &w, &cfg, &d, &params).unwrap();
        assert_eq!(rh.constant, 0.0);
        assert_eq!(rh.status, Status::Pass);
    }
}
