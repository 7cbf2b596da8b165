//! Seeded test functions: truncated Fourier sums and Gaussian bumps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mode {
    pub k: Vec<f64>,
    pub cos: f64,
    pub sin: f64,
}

/// u(x) = sum_j cos_j cos(k_j . x) + sin_j sin(k_j . x).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrigPoly {
    pub modes: Vec<Mode>,
}

impl TrigPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for m in &self.modes {
            let t: f64 = m.k.iter().zip(x).map(|(a, b)| a * b).sum();
            s += m.cos * t.cos() + m.sin * t.sin();
        }
        s
    }

    /// Exact gradient.
    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for m in &self.modes {
            let t: f64 = m.k.iter().zip(x).map(|(a, b)| a * b).sum();
            let d = -m.cos * t.sin() + m.sin * t.cos();
            for (o, k) in out.iter_mut().zip(&m.k) {
                *o += d * k;
            }
        }
    }
}

/// `count` trigonometric polynomials in `n` variables with `modes` terms each.
/// Wave numbers are integers in [-3, 3] (not all zero) scaled by pi/2 and the
/// amplitudes decay like 1/(1 + |k|^2).
pub fn fourier_corpus(n: usize, count: usize, modes: usize, seed: u64) -> Vec<TrigPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let modes = (0..modes)
                .map(|_| {
                    let mut k: Vec<f64> = vec![0.0; n];
                    while k.iter().all(|&v| v == 0.0) {
                        for v in k.iter_mut() {
                            *v = rng.gen_range(-3i32..=3) as f64;
                        }
                    }
                    let k2: f64 = k.iter().map(|v| v * v).sum();
                    let scale = 1.0 / (1.0 + k2);
                    let k = k.into_iter().map(|v| v * std::f64::consts::FRAC_PI_2).collect();
                    Mode { k, cos: rng.gen_range(-1.0..1.0) * scale, sin: rng.gen_range(-1.0..1.0) * scale }
                })
                .collect();
            TrigPoly { modes }
        })
        .collect()
}

/// Positive Gaussian bump amp * exp(-|x - c|^2 / w^2).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub width: f64,
    pub amp: f64,
}

impl Bump {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let d2: f64 = self.center.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        self.amp * (-d2 / (self.width * self.width)).exp()
    }
}

/// Bumps centred in `[-spread, spread]^n` with widths in [0.1, 0.3].
pub fn bump_corpus(n: usize, count: usize, spread: f64, seed: u64) -> Vec<Bump> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xB0B);
    (0..count)
        .map(|_| Bump {
            center: (0..n).map(|_| rng.gen_range(-spread..spread)).collect(),
            width: rng.gen_range(0.1..0.3),
            amp: rng.gen_range(0.5..2.0),
        })
        .collect()
}
