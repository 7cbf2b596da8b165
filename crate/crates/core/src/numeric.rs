//! Small numerical helpers shared by every module.

use std::f64::consts::PI;

/// Sum in a fixed binary-tree order. The result depends only on the slice,
/// never on how the slice was produced, which keeps parallel callers bitwise
/// reproducible.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Maximum ignoring NaN; `0.0` for an empty slice.
pub fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().filter(|x| !x.is_nan()).fold(0.0, f64::max)
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => {
            // recurrence w_n = 2 pi / n * w_{n-2}
            2.0 * PI / n as f64 * unit_ball_volume(n - 2)
        }
    }
}

/// Reciprocal with `1/inf = 0`.
#[inline]
pub fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// Reciprocal with `1/0 = inf`.
#[inline]
pub fn recip_inf(x: f64) -> f64 {
    if x == 0.0 {
        f64::INFINITY
    } else {
        1.0 / x
    }
}

fn smooth_piece(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// C-infinity step: 1 for `s <= 0`, 0 for `s >= 1`.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let a = smooth_piece(1.0 - s);
    let b = smooth_piece(s);
    a / (a + b)
}

/// Radial cutoff equal to 1 for `t <= inner`, 0 for `t >= outer`.
pub fn radial_cutoff(t: f64, inner: f64, outer: f64) -> f64 {
    smooth_step((t - inner) / (outer - inner))
}

/// Relative change `|a-b| / max(|a|,|b|)`, 0 when both vanish.
pub fn rel_change(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

/// Five-point Gauss-Legendre rule on [-1, 1].
pub const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Integrate `f` over `[a, b]` with the five-point rule.
pub fn gauss5<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut s = 0.0;
    for &(x, w) in GAUSS5.iter() {
        s += w * f(c + hw * x);
    }
    s * hw
}

/// Finite-difference weights (Fornberg) for derivative `order` at `x0` on `nodes`.
pub fn fd_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }

    #[test]
    fn fornberg_central_first_derivative() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 1);
        assert!((w[0] + 0.5).abs() < 1e-15 && w[1].abs() < 1e-15 && (w[2] - 0.5).abs() < 1e-15);
        let w = fd_weights(0.0, &[0.0, 1.0, 2.0], 1);
        assert!((w[0] + 1.5).abs() < 1e-15 && (w[1] - 2.0).abs() < 1e-15 && (w[2] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(-0.1), 1.0);
        assert_eq!(smooth_step(1.2), 0.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-12);
    }
}
