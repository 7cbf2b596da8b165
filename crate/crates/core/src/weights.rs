//! Weights of class Z^alpha: seminorm estimates, infimal-convolution
//! regularization and the double-phase integrand.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use rayon::prelude::*;
use serde::Serialize;

/// Table of `(|d| h)^alpha` for every lattice offset `d` on `grid`.
struct OffsetPow {
    ext: [usize; 3],
    vals: Vec<f64>,
}

impl OffsetPow {
    fn new(grid: &Grid, alpha: f64) -> Self {
        let s = grid.shape3();
        let h = grid.spacing;
        let vals = (0..s[0] * s[1] * s[2])
            .map(|i| {
                let (a, b, c) = (i / (s[1] * s[2]), (i / s[2]) % s[1], i % s[2]);
                let d2 = (a * a + b * b + c * c) as f64;
                (d2.sqrt() * h).powf(alpha)
            })
            .collect();
        OffsetPow { ext: s, vals }
    }

    #[inline]
    fn get(&self, x: [usize; 3], y: [usize; 3]) -> f64 {
        let a = x[0].abs_diff(y[0]);
        let b = x[1].abs_diff(y[1]);
        let c = x[2].abs_diff(y[2]);
        self.vals[(a * self.ext[1] + b) * self.ext[2] + c]
    }
}

fn check_nonnegative(a: &GridFunction) -> Result<()> {
    if a.components != 1 {
        return Err(Error::Domain("weight must be scalar".into()));
    }
    if let Some(i) = a.values.iter().position(|&v| v < 0.0) {
        return Err(Error::Domain(format!("negative weight {} at {:?}", a.values[i], a.grid.center(i))));
    }
    Ok(())
}

/// sup over pairs in `pts` of a(x) / (a(y) + |x-y|^alpha), floored at 1.
fn pair_sup(a: &GridFunction, pts: &[usize], table: &OffsetPow) -> f64 {
    let g = &a.grid;
    let coords: Vec<[usize; 3]> = pts.iter().map(|&p| g.unravel(p)).collect();
    let best = pts
        .par_iter()
        .enumerate()
        .map(|(ix, &px)| {
            let ax = a.values[px];
            if ax == 0.0 {
                return 0.0;
            }
            let cx = coords[ix];
            let mut m = 0.0f64;
            for (iy, &py) in pts.iter().enumerate() {
                let den = a.values[py] + table.get(cx, coords[iy]);
                if den > 0.0 {
                    m = m.max(ax / den);
                }
            }
            m
        })
        .reduce(|| 0.0, f64::max);
    best.max(1.0)
}

/// Seminorm estimate on the full lattice and on a coarser sub-lattice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Seminorm {
    pub estimate: f64,
    pub coarse_estimate: f64,
    /// Number of halvings separating the two lattices.
    pub halvings: u32,
    pub diverging: bool,
}

/// Halvings needed for an h^{-alpha} blow-up to exceed the factor-2 threshold.
pub fn divergence_halvings(alpha: f64) -> u32 {
    (1.0 / alpha).floor() as u32 + 1
}

/// Estimate [a]_alpha over the cells of `mask`.
///
/// The divergence flag compares the estimate with the one obtained on the
/// sub-lattice of stride `2^k`, `k = divergence_halvings(alpha)`, and fires
/// when it grew by more than a factor 2.
pub fn estimate_seminorm(a: &GridFunction, alpha: f64, mask: &[bool]) -> Result<Seminorm> {
    check_nonnegative(a)?;
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let pts: Vec<usize> = (0..a.npoints()).filter(|&i| mask[i]).collect();
    if pts.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let table = OffsetPow::new(&a.grid, alpha);
    let estimate = pair_sup(a, &pts, &table);
    let mut k = divergence_halvings(alpha);
    let min_dim = *a.grid.dims.iter().min().unwrap();
    while k > 0 && min_dim >> k < 2 {
        k -= 1;
    }
    let stride = 1usize << k;
    let n = a.n();
    let coarse: Vec<usize> = pts
        .iter()
        .copied()
        .filter(|&p| {
            let ijk = a.grid.unravel(p);
            (0..n).all(|ax| ijk[ax] % stride == 0)
        })
        .collect();
    let coarse_estimate = if coarse.is_empty() { estimate } else { pair_sup(a, &coarse, &table) };
    Ok(Seminorm { estimate, coarse_estimate, halvings: k, diverging: estimate > 2.0 * coarse_estimate })
}

/// A weight together with its exponent and measured seminorm.
#[derive(Clone, Debug)]
pub struct Weight {
    pub a: GridFunction,
    pub alpha: f64,
    pub seminorm: Seminorm,
}

impl Weight {
    pub fn new(a: GridFunction, alpha: f64) -> Result<Self> {
        let mask = vec![true; a.npoints()];
        let seminorm = estimate_seminorm(&a, alpha, &mask)?;
        Ok(Weight { a, alpha, seminorm })
    }

    /// Constant weight, seminorm 1.
    pub fn constant(grid: &Grid, c: f64, alpha: f64) -> Self {
        let a = grid.sample(|_| c).expect("finite constant");
        let s = Seminorm { estimate: 1.0, coarse_estimate: 1.0, halvings: 0, diverging: false };
        Weight { a, alpha, seminorm: s }
    }
}

/// Infimal convolution a~(x) = min over lattice points y of a(y) + |x-y|^alpha.
pub fn regularize(a: &GridFunction, alpha: f64) -> Result<GridFunction> {
    let s = estimate_seminorm(a, alpha, &vec![true; a.npoints()])?;
    if s.diverging {
        return Err(Error::Precondition(format!(
            "seminorm estimate diverges under refinement ({} vs {})",
            s.estimate, s.coarse_estimate
        )));
    }
    Ok(infimal_convolution(a, alpha))
}

/// The grid minimum without the seminorm gate.
pub fn infimal_convolution(a: &GridFunction, alpha: f64) -> GridFunction {
    let g = &a.grid;
    let table = OffsetPow::new(g, alpha);
    let coords: Vec<[usize; 3]> = (0..g.npoints()).map(|p| g.unravel(p)).collect();
    let values = (0..g.npoints())
        .into_par_iter()
        .map(|x| {
            let cx = coords[x];
            let mut m = a.values[x];
            for (y, &cy) in coords.iter().enumerate() {
                let v = a.values[y] + table.get(cx, cy);
                if v < m {
                    m = v;
                }
            }
            m
        })
        .collect();
    GridFunction { grid: g.clone(), components: 1, values }
}

/// H(x, z) = |z|^{gamma_p} + a(x)^{gamma_q / q} |z|^{gamma_q}.
#[inline]
pub fn double_phase_value(z_norm: f64, a_x: f64, gamma_p: f64, gamma_q: f64, q: f64) -> f64 {
    if z_norm == 0.0 {
        return 0.0;
    }
    let aw = if a_x == 0.0 { 0.0 } else { a_x.powf(gamma_q / q) };
    z_norm.powf(gamma_p) + aw * z_norm.powf(gamma_q)
}

/// H_l evaluated with the exponents of order `l`.
pub fn double_phase(
    z_norm: f64,
    a_x: f64,
    cfg: &crate::exponents::ExponentConfig,
    derived: &crate::exponents::DerivedExponents,
    l: usize,
) -> f64 {
    use crate::exponents::{P, Q};
    double_phase_value(z_norm, a_x, derived.gamma(P, l), derived.gamma(Q, l), cfg.q)
}

/// Pointwise H applied to a norm field.
pub fn double_phase_field(z: &GridFunction, a: &GridFunction, gamma_p: f64, gamma_q: f64, q: f64) -> GridFunction {
    z.zip(a, |zn, ax| double_phase_value(zn, ax, gamma_p, gamma_q, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_weight_has_seminorm_one() {
        let g = Grid::cube(2, -1.0, 1.0, 16);
        let a = g.sample(|_| 3.0).unwrap();
        let s = estimate_seminorm(&a, 0.5, &vec![true; g.npoints()]).unwrap();
        assert_eq!(s.estimate, 1.0);
        assert!(!s.diverging);
        assert_eq!(infimal_convolution(&a, 0.5).values, a.values);
    }

    #[test]
    fn power_weight_is_subadditive() {
        let g = Grid::cube(1, -1.0, 1.0, 256);
        let a = g.sample(|x| x[0].abs().powf(0.5)).unwrap();
        let s = estimate_seminorm(&a, 0.5, &vec![true; g.npoints()]).unwrap();
        assert!(s.estimate <= 1.0 + 1e-6, "{}", s.estimate);
        assert!(!s.diverging);
    }

    #[test]
    fn step_weight_diverges() {
        let g = Grid::cube(1, -1.0, 1.0, 256);
        let a = g.sample(|x| if x[0] > 0.0 { 1.0 } else { 0.0 }).unwrap();
        let s = estimate_seminorm(&a, 0.5, &vec![true; g.npoints()]).unwrap();
        assert!(s.diverging, "{s:?}");
        assert!(regularize(&a, 0.5).is_err());
    }

    #[test]
    fn negative_weight_rejected() {
        let g = Grid::cube(1, -1.0, 1.0, 8);
        let a = g.sample(|x| x[0]).unwrap();
        assert!(estimate_seminorm(&a, 0.5, &vec![true; 8]).is_err());
    }

    #[test]
    fn double_phase_examples() {
        assert_eq!(double_phase_value(0.0, 1.0, 2.0, 3.0, 3.0), 0.0);
        assert_eq!(double_phase_value(2.0, 1.0, 2.0, 3.0, 3.0), 12.0);
        assert_eq!(double_phase_value(2.0, 0.0, 2.0, 3.0, 3.0), 4.0);
    }
}
