//! Exponent bookkeeping: validity checks on the parameter block and the
//! constructive choice of the auxiliary exponents used by the truncation and
//! the reverse Hölder scans.
//!
//! Infinite exponents are stored as `f64::INFINITY`; every formula is written
//! in reciprocal form so `1/inf = 0` never produces `inf - inf`.

use crate::error::{Error, Result};
use crate::numeric::recip;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Index of the exponent `r` in the `[r][l]` tables.
pub const P: usize = 0;
pub const Q: usize = 1;

mod inf_serde {
    use super::*;
    use serde::de::Error as _;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Num {
        F(f64),
        S(String),
    }

    fn to_num(x: f64) -> Num {
        if x.is_infinite() {
            Num::S("inf".into())
        } else {
            Num::F(x)
        }
    }

    fn from_num<E: serde::de::Error>(n: Num) -> std::result::Result<f64, E> {
        match n {
            Num::F(x) => Ok(x),
            Num::S(s) if s == "inf" || s == "infinity" || s == "∞" => Ok(f64::INFINITY),
            Num::S(s) => Err(E::custom(format!("expected number or \"inf\", got {s:?}"))),
        }
    }

    pub fn ser<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_num(*x).serialize(s)
    }

    pub fn de<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        from_num(Num::deserialize(d)?)
    }

    pub fn ser_table<S: Serializer>(t: &[Vec<f64>; 2], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<Vec<Num>> = t.iter().map(|row| row.iter().map(|&x| to_num(x)).collect()).collect();
        v.serialize(s)
    }

    pub fn de_table<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<[Vec<f64>; 2], D::Error> {
        let v: Vec<Vec<Num>> = Vec::deserialize(d)?;
        if v.len() != 2 {
            return Err(D::Error::custom("exponent tables are indexed [r][l] with r in {p, q}"));
        }
        let mut out: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for (r, row) in v.into_iter().enumerate() {
            out[r] = row.into_iter().map(from_num).collect::<std::result::Result<_, _>>()?;
        }
        Ok(out)
    }
}

/// Parameter block of the double-phase system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentConfig {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "N", default = "one")]
    pub big_n: usize,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    #[serde(default = "onef")]
    pub a_seminorm: f64,
    #[serde(default = "onef")]
    pub nu: f64,
    #[serde(serialize_with = "inf_serde::ser", deserialize_with = "inf_serde::de", default = "inff")]
    pub beta_src: f64,
    /// `s[r][l]` for `r` in {p, q}, `l` in 0..=m.
    #[serde(serialize_with = "inf_serde::ser_table", deserialize_with = "inf_serde::de_table")]
    pub s: [Vec<f64>; 2],
    #[serde(serialize_with = "inf_serde::ser_table", deserialize_with = "inf_serde::de_table")]
    pub t: [Vec<f64>; 2],
}

fn one() -> usize {
    1
}
fn onef() -> f64 {
    1.0
}
fn inff() -> f64 {
    f64::INFINITY
}

impl ExponentConfig {
    /// Model system: all data exponents infinite (data functions vanish).
    pub fn model(n: usize, m: usize, p: f64, q: f64, alpha: f64) -> Self {
        let inf = vec![f64::INFINITY; m + 1];
        ExponentConfig {
            n,
            m,
            big_n: 1,
            p,
            q,
            alpha,
            a_seminorm: 1.0,
            nu: 1.0,
            beta_src: f64::INFINITY,
            s: [inf.clone(), inf.clone()],
            t: [inf.clone(), inf],
        }
    }

    pub fn r(&self, r: usize) -> f64 {
        if r == P {
            self.p
        } else {
            self.q
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExponentConfig = serde_json::from_str(text)?;
        if c.s[0].len() != c.m + 1 || c.s[1].len() != c.m + 1 || c.t[0].len() != c.m + 1 || c.t[1].len() != c.m + 1 {
            return Err(Error::Domain("s and t need m+1 entries per exponent".into()));
        }
        Ok(c)
    }
}

/// Hölder conjugate on [1, inf].
pub fn holder_conjugate(t: f64) -> Result<f64> {
    if t.is_nan() || t < 1.0 {
        return Err(Error::Domain(format!("Hölder conjugate needs t >= 1, got {t}")));
    }
    Ok(if t == 1.0 {
        f64::INFINITY
    } else if t.is_infinite() {
        1.0
    } else {
        t / (t - 1.0)
    })
}

fn conj_recip(t: f64) -> f64 {
    // 1/t' = 1 - 1/t
    1.0 - recip(t)
}

/// Sobolev exponent nt/(n - l t) when l t < n, infinity otherwise.
pub fn sobolev_exponent(t: f64, l: usize, n: usize) -> f64 {
    let lt = l as f64 * t;
    if lt < n as f64 {
        n as f64 * t / (n as f64 - lt)
    } else {
        f64::INFINITY
    }
}

/// 1 / sobolev_exponent, computed without forming infinity.
pub fn sobolev_recip(t: f64, l: usize, n: usize) -> f64 {
    (recip(t) - l as f64 / n as f64).max(0.0)
}

/// One named inequality with its slack (positive means satisfied).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlackCheck {
    pub name: String,
    pub slack: f64,
    pub strict: bool,
}

impl SlackCheck {
    fn new(name: impl Into<String>, slack: f64, strict: bool) -> Self {
        SlackCheck { name: name.into(), slack, strict }
    }

    pub fn pass(&self) -> bool {
        if self.strict {
            self.slack > 0.0
        } else {
            self.slack >= 0.0
        }
    }
}

fn rname(r: usize) -> &'static str {
    if r == P {
        "p"
    } else {
        "q"
    }
}

/// alpha/q - n (1/(p_l)^* - 1/(q_l)^*).
pub fn sobolev_slack(n: usize, p: f64, q: f64, alpha: f64, l: usize) -> f64 {
    alpha / q - n as f64 * (sobolev_recip(p, l, n) - sobolev_recip(q, l, n))
}

/// Check every standing assumption on the parameter block.
pub fn validate(cfg: &ExponentConfig) -> Vec<SlackCheck> {
    let mut out = Vec::new();
    let (n, m, p, q) = (cfg.n, cfg.m, cfg.p, cfg.q);
    out.push(SlackCheck::new("dimension>=1", n as f64 - 0.5, true));
    out.push(SlackCheck::new("order>=1", m as f64 - 0.5, true));
    out.push(SlackCheck::new("p>1", p - 1.0, true));
    out.push(SlackCheck::new("q>=p", q - p, false));
    out.push(SlackCheck::new("q<inf", if q.is_finite() { 1.0 } else { -1.0 }, true));
    out.push(SlackCheck::new("alpha>0", cfg.alpha, true));
    out.push(SlackCheck::new("a_seminorm>=1", cfg.a_seminorm - 1.0, false));
    out.push(SlackCheck::new("nu>0", cfg.nu, true));
    out.push(SlackCheck::new("beta_src>1", 1.0 - recip(cfg.beta_src), true));
    out.push(SlackCheck::new("q/p<1+alpha/n", 1.0 + cfg.alpha / n as f64 - q / p, true));
    let tables_ok = cfg.s.iter().chain(cfg.t.iter()).all(|row| row.len() == m + 1);
    if !tables_ok {
        out.push(SlackCheck::new("tables_have_m+1_entries", -1.0, true));
        return out;
    }
    for r in [P, Q] {
        let rv = cfg.r(r);
        for l in 0..=m {
            let sob = sobolev_recip(rv, m - l, n);
            if l < m {
                let bound = 1.0 - sob - conj_recip(rv);
                out.push(SlackCheck::new(format!("s_{}_{l}", rname(r)), bound - recip(cfg.s[r][l]), true));
            } else {
                let slack = if cfg.s[r][m].is_infinite() { 1.0 } else { -1.0 };
                out.push(SlackCheck::new(format!("s_{}_{m}=inf", rname(r)), slack, true));
            }
            let bound = 1.0 - sob;
            out.push(SlackCheck::new(format!("t_{}_{l}", rname(r)), bound - recip(cfg.t[r][l]), true));
        }
    }
    for l in 0..=m {
        out.push(SlackCheck::new(format!("sobolev_gap_{l}"), sobolev_slack(n, p, q, cfg.alpha, l), true));
    }
    out
}

pub fn is_valid(cfg: &ExponentConfig) -> bool {
    validate(cfg).iter().all(SlackCheck::pass)
}

/// Auxiliary exponents gamma, s-hat, t-hat (indexed `[r][l]`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gammas {
    pub gamma: [Vec<f64>; 2],
    pub s_hat: [Vec<f64>; 2],
    pub t_hat: [Vec<f64>; 2],
}

fn gamma_constraints(cfg: &ExponentConfig, l: usize, gp: f64, gq: f64) -> Vec<SlackCheck> {
    let mut out = Vec::new();
    for (r, g) in [(P, gp), (Q, gq)] {
        let rv = cfg.r(r);
        let upper = sobolev_recip(rv, cfg.m - l, cfg.n);
        out.push(SlackCheck::new(format!("gamma_{}_{l}>r", rname(r)), g - rv, true));
        out.push(SlackCheck::new(format!("gamma_{}_{l}<sobolev", rname(r)), 1.0 / g - upper, true));
        out.push(SlackCheck::new(
            format!("s_hat_{}_{l}", rname(r)),
            1.0 - 1.0 / g - conj_recip(rv) - recip(cfg.s[r][l]),
            true,
        ));
        out.push(SlackCheck::new(format!("t_hat_{}_{l}", rname(r)), 1.0 - 1.0 / g - recip(cfg.t[r][l]), true));
    }
    out.push(SlackCheck::new(format!("gamma_p_{l}<=gamma_q_{l}"), gq - gp, false));
    out.push(SlackCheck::new(
        format!("gamma_gap_{l}"),
        cfg.alpha / cfg.q - cfg.n as f64 * (1.0 / gp - 1.0 / gq),
        true,
    ));
    out
}

fn first_failure(checks: &[SlackCheck]) -> Option<&SlackCheck> {
    checks.iter().filter(|c| !c.pass()).min_by(|a, b| a.slack.partial_cmp(&b.slack).unwrap())
}

/// Choose gamma in (r, (r_{m-l})^*) for every order below m.
///
/// The initial pick is the geometric midpoint between the largest lower bound
/// and the Sobolev exponent (twice the lower bound when the Sobolev exponent is
/// infinite); both values are then pulled halfway toward r, at most 40 times,
/// until the p/q gap constraint holds.
pub fn select_gammas(cfg: &ExponentConfig) -> Result<Gammas> {
    if let Some(c) = first_failure(&validate(cfg)) {
        return Err(Error::Infeasible(format!("configuration fails {} (slack {:e})", c.name, c.slack)));
    }
    let m = cfg.m;
    let mut gamma: [Vec<f64>; 2] = [vec![0.0; m + 1], vec![0.0; m + 1]];
    let mut s_hat: [Vec<f64>; 2] = [vec![0.0; m + 1], vec![0.0; m + 1]];
    let mut t_hat: [Vec<f64>; 2] = [vec![0.0; m + 1], vec![0.0; m + 1]];
    for l in 0..m {
        let mut pick = [0.0; 2];
        let mut lower = [0.0; 2];
        for r in [P, Q] {
            let rv = cfg.r(r);
            let upper_recip = sobolev_recip(rv, m - l, cfg.n);
            let from_s = 1.0 / rv - recip(cfg.s[r][l]);
            let from_t = 1.0 - recip(cfg.t[r][l]);
            if from_s <= 0.0 || from_t <= 0.0 {
                return Err(Error::Infeasible(format!("no admissible gamma_{}_{l}", rname(r))));
            }
            let lo = rv.max(1.0 / from_s).max(1.0 / from_t);
            if 1.0 / lo <= upper_recip {
                return Err(Error::Infeasible(format!(
                    "gamma_{}_{l}: lower bound {lo} reaches the Sobolev exponent",
                    rname(r)
                )));
            }
            lower[r] = lo;
            pick[r] = if upper_recip == 0.0 { 2.0 * lo } else { (lo / upper_recip).sqrt() };
        }
        if pick[P] > pick[Q] {
            if pick[Q] > lower[P] {
                pick[P] = pick[Q];
            } else {
                pick[Q] = pick[P];
            }
        }
        let mut checks = gamma_constraints(cfg, l, pick[P], pick[Q]);
        let mut tries = 0;
        while first_failure(&checks).is_some() && tries < 40 {
            for r in [P, Q] {
                let rv = cfg.r(r);
                pick[r] = rv + 0.5 * (pick[r] - rv);
            }
            checks = gamma_constraints(cfg, l, pick[P], pick[Q]);
            tries += 1;
        }
        if let Some(c) = first_failure(&checks) {
            return Err(Error::Infeasible(format!("{} violated (slack {:e})", c.name, c.slack)));
        }
        for r in [P, Q] {
            let rv = cfg.r(r);
            gamma[r][l] = pick[r];
            s_hat[r][l] = 1.0 / (1.0 - 1.0 / pick[r] - conj_recip(rv));
            t_hat[r][l] = 1.0 / (1.0 - 1.0 / pick[r]);
        }
    }
    for r in [P, Q] {
        let rv = cfg.r(r);
        gamma[r][m] = rv;
        s_hat[r][m] = f64::INFINITY;
        t_hat[r][m] = holder_conjugate(rv)?;
    }
    Ok(Gammas { gamma, s_hat, t_hat })
}

/// Lower integrability exponent used by the reverse Hölder scan.
///
/// Returns `(p_hat, q_hat, delta_hat)` from the three-branch rule based on
/// p_* = max{1, np/(n+p)} and q_* = max{1, nq/(n+q)}.
pub fn delta_hat(n: usize, p: f64, q: f64, alpha: f64) -> (f64, f64, f64) {
    let nf = n as f64;
    let p_low = (nf * p / (nf + p)).max(1.0);
    let q_low = (nf * q / (nf + q)).max(1.0);
    let (ph, qh) = if p_low > 1.0 {
        (p_low, q_low)
    } else if q_low > 1.0 {
        ((0.5 * (1.0 + p)).min(q_low), q_low)
    } else {
        let ph = 0.5 * (1.0 + p);
        (ph, (0.5 * (1.0 + q)).min((1.0 + alpha / (nf * q)) * ph))
    };
    (ph, qh, (ph / p).max(qh / q))
}

/// delta_0 together with the fractional orders beta_l.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Delta0 {
    pub delta0: f64,
    /// Infimum of the feasible interval found by bisection.
    pub infimum: f64,
    /// Constraint active at the infimum.
    pub binding: String,
    pub beta: Vec<f64>,
}

/// Every constraint on delta_0 evaluated at `d`.
pub fn delta0_constraints(cfg: &ExponentConfig, g: &Gammas, d: f64) -> Vec<SlackCheck> {
    let (n, m) = (cfg.n, cfg.m);
    let mut out = vec![
        SlackCheck::new("delta0>1/p", d - 1.0 / cfg.p, true),
        SlackCheck::new("delta0<1", 1.0 - d, true),
        SlackCheck::new("1/delta0<beta_src", d - recip(cfg.beta_src), true),
    ];
    let (_, _, dh) = delta_hat(n, cfg.p, cfg.q, cfg.alpha);
    out.push(SlackCheck::new("delta0>=delta_hat", d - dh, false));
    for r in [P, Q] {
        let rv = cfg.r(r);
        for l in 0..=m {
            out.push(SlackCheck::new(
                format!("t_hat/delta0<t_{}_{l}", rname(r)),
                d / g.t_hat[r][l] - recip(cfg.t[r][l]),
                true,
            ));
            out.push(SlackCheck::new(
                format!("caccioppoli_{}_{l}", rname(r)),
                2.0 * d - 2.0 + 1.0 / g.gamma[r][l],
                false,
            ));
            if l < m {
                out.push(SlackCheck::new(
                    format!("s_hat/delta0<s_{}_{l}", rname(r)),
                    d * recip(g.s_hat[r][l]) - recip(cfg.s[r][l]),
                    true,
                ));
                out.push(SlackCheck::new(
                    format!("gamma/delta0<sobolev_{}_{l}", rname(r)),
                    d / g.gamma[r][l] - sobolev_recip(rv * d, m - l, n),
                    true,
                ));
            }
        }
    }
    for l in 0..=m {
        out.push(SlackCheck::new(
            format!("delta_gap_{l}"),
            cfg.alpha / cfg.q - n as f64 * (1.0 / (g.gamma[P][l] * d) - d / g.gamma[Q][l]),
            true,
        ));
    }
    out
}

/// beta_l = n (1/(gamma_p d) - d/gamma_q).
pub fn beta_orders(cfg: &ExponentConfig, g: &Gammas, d: f64) -> Vec<f64> {
    (0..=cfg.m)
        .map(|l| cfg.n as f64 * (1.0 / (g.gamma[P][l] * d) - d / g.gamma[Q][l]))
        .collect()
}

/// Pick delta_0 just below 1 (resolution `1e-6`) and locate the infimum of the
/// feasible interval by bisection. Every constraint is monotone in delta_0, so
/// the feasible set is an interval ending at 1.
pub fn select_delta0(cfg: &ExponentConfig, g: &Gammas) -> Result<Delta0> {
    const TOL: f64 = 1e-6;
    let feasible = |d: f64| delta0_constraints(cfg, g, d).iter().all(SlackCheck::pass);
    let top = 1.0 - TOL;
    if !feasible(top) {
        let checks = delta0_constraints(cfg, g, top);
        let c = first_failure(&checks).unwrap();
        return Err(Error::Infeasible(format!("delta0 near 1 violates {} (slack {:e})", c.name, c.slack)));
    }
    let mut lo = 1.0 / cfg.p;
    let mut hi = top;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let binding = first_failure(&delta0_constraints(cfg, g, lo))
        .map(|c| c.name.clone())
        .unwrap_or_else(|| "delta0>1/p".into());
    Ok(Delta0 { delta0: top, infimum: hi, binding, beta: beta_orders(cfg, g, top) })
}

/// Everything derived from a configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedExponents {
    pub gammas: Gammas,
    pub delta0: Delta0,
    pub p_hat: f64,
    pub q_hat: f64,
    pub delta_hat: f64,
}

impl DerivedExponents {
    pub fn gamma(&self, r: usize, l: usize) -> f64 {
        self.gammas.gamma[r][l]
    }
    pub fn d0(&self) -> f64 {
        self.delta0.delta0
    }
}

pub fn derive(cfg: &ExponentConfig) -> Result<DerivedExponents> {
    let gammas = select_gammas(cfg)?;
    let delta0 = select_delta0(cfg, &gammas)?;
    let (p_hat, q_hat, delta_hat) = delta_hat(cfg.n, cfg.p, cfg.q, cfg.alpha);
    Ok(DerivedExponents { gammas, delta0, p_hat, q_hat, delta_hat })
}

/// Re-check every constraint a derived block must satisfy.
pub fn revalidate(cfg: &ExponentConfig, d: &DerivedExponents) -> Vec<SlackCheck> {
    let mut out = Vec::new();
    for l in 0..cfg.m {
        out.extend(gamma_constraints(cfg, l, d.gammas.gamma[P][l], d.gammas.gamma[Q][l]));
    }
    out.extend(delta0_constraints(cfg, &d.gammas, d.d0()));
    for (l, &b) in d.delta0.beta.iter().enumerate() {
        let cap = (cfg.n as f64 / (d.gamma(P, l) * d.d0())).min(cfg.alpha / cfg.q);
        out.push(SlackCheck::new(format!("beta_{l}>0"), b, true));
        out.push(SlackCheck::new(format!("beta_{l}<cap"), cap - b, true));
    }
    out
}

/// beta_pq = n(1/p - 1/q) + 1 together with its two identities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RieszGap {
    pub beta: f64,
    /// np/(n - beta p) and nq/(n - q).
    pub sobolev_pair: (f64, f64),
    /// 1 + alpha/q - beta and (n/q)(1 + alpha/n - q/p).
    pub excess_pair: (f64, f64),
}

pub fn riesz_gap(p: f64, q: f64, n: usize, alpha: f64) -> Result<RieszGap> {
    let nf = n as f64;
    if !(p >= 1.0 && q >= p) {
        return Err(Error::Domain(format!("need 1 <= p <= q, got p={p}, q={q}")));
    }
    if q >= nf {
        return Err(Error::Domain(format!("need q < n, got q={q}, n={n}")));
    }
    let beta = nf * (1.0 / p - 1.0 / q) + 1.0;
    Ok(RieszGap {
        beta,
        sobolev_pair: (nf * p / (nf - beta * p), nf * q / (nf - q)),
        excess_pair: (1.0 + alpha / q - beta, nf / q * (1.0 + alpha / nf - q / p)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_examples() {
        assert_eq!(holder_conjugate(1.0).unwrap(), f64::INFINITY);
        assert_eq!(holder_conjugate(2.0).unwrap(), 2.0);
        assert!((holder_conjugate(4.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(holder_conjugate(f64::INFINITY).unwrap(), 1.0);
        assert!(holder_conjugate(0.5).is_err());
    }

    #[test]
    fn sobolev_examples() {
        assert_eq!(sobolev_exponent(2.0, 1, 4), 4.0);
        assert_eq!(sobolev_exponent(3.0, 1, 3), f64::INFINITY);
        assert_eq!(sobolev_exponent(1.5, 2, 3), f64::INFINITY);
    }

    #[test]
    fn model_config_validates() {
        let cfg = ExponentConfig::model(2, 1, 2.0, 2.2, 0.5);
        assert!(is_valid(&cfg));
        let border = ExponentConfig::model(2, 1, 2.0, 2.5, 0.5);
        let checks = validate(&border);
        let c = checks.iter().find(|c| c.name == "q/p<1+alpha/n").unwrap();
        assert_eq!(c.slack, 0.0);
        assert!(!c.pass());
    }

    #[test]
    fn sobolev_gap_matches_closed_form_below_critical_order() {
        // l q < n: slack equals (n/q)(1 + alpha/n - q/p)
        let (n, p, q, a) = (5usize, 1.5, 1.8, 0.7);
        let lhs = sobolev_slack(n, p, q, a, 2);
        let rhs = n as f64 / q * (1.0 + a / n as f64 - q / p);
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn top_order_gamma_is_r() {
        let cfg = ExponentConfig::model(2, 1, 2.0, 2.2, 0.5);
        let g = select_gammas(&cfg).unwrap();
        assert_eq!(g.gamma[P][1], 2.0);
        assert_eq!(g.t_hat[P][1], 2.0);
        assert_eq!(g.s_hat[P][1], f64::INFINITY);
    }

    #[test]
    fn s_at_lower_bound_is_infeasible() {
        let mut cfg = ExponentConfig::model(3, 1, 2.0, 2.2, 0.5);
        // lower bound 1/(1 - 1/p^* - 1/p'), p^* = 6, p' = 2
        cfg.s[P][0] = 1.0 / (1.0 - 1.0 / 6.0 - 0.5);
        assert!(select_gammas(&cfg).is_err());
    }

    #[test]
    fn equal_exponents_pick_delta0_just_below_one() {
        let cfg = ExponentConfig::model(2, 1, 2.0, 2.0, 0.5);
        let d = derive(&cfg).unwrap();
        assert_eq!(d.d0(), 1.0 - 1e-6);
        assert!(d.delta0.infimum < d.d0());
        assert!(revalidate(&cfg, &d).iter().all(SlackCheck::pass));
    }

    #[test]
    fn riesz_gap_examples() {
        assert_eq!(riesz_gap(2.0, 2.0, 3, 1.0).unwrap().beta, 1.0);
        let g = riesz_gap(2.0, 3.0, 6, 1.0).unwrap();
        assert!((g.beta - 2.0).abs() < 1e-15);
        assert!((g.sobolev_pair.0 - 6.0).abs() < 1e-14 && (g.sobolev_pair.1 - 6.0).abs() < 1e-14);
        assert!(riesz_gap(2.0, 3.0, 3, 1.0).is_err());
    }

    #[test]
    fn config_json_accepts_inf_strings() {
        let text = r#"{"n":2,"m":1,"N":1,"p":2,"q":2.2,"alpha":0.5,"a_seminorm":1,"nu":1,
            "beta_src":"inf","s":[["inf","inf"],["inf","inf"]],"t":[[4,"inf"],["inf","inf"]]}"#;
        let c = ExponentConfig::from_json(text).unwrap();
        assert_eq!(c.t[P][0], 4.0);
        assert!(c.beta_src.is_infinite());
        let back = serde_json::to_string(&c).unwrap();
        assert!(back.contains("\"inf\""));
    }
}
