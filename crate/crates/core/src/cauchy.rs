//! Solid Cauchy transform
//!
//! ```text
//! (T g)(z) = (1/π) ∬ g(ζ) / (z - ζ) dA(ζ)
//! ```
//!
//! discretised by the midpoint rule on the grid cells of the masked nodes.
//! `T` is a right inverse of `∂/∂z̄`. The singular cell `ζ = z` gets weight
//! zero: `1/ζ` is odd, so its integral over a centred square vanishes.
//!
//! Two evaluation paths share that quadrature: a direct `O(N⁴)` double sum
//! used as a reference, and a zero-padded FFT convolution used by the
//! solver. The transform is evaluated at every node of the grid; the output
//! keeps the mask of the input.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::{ComplexField, Field, GridSpec};
use crate::{Error, Result};

/// Precomputed FFT plan and kernel spectrum for one grid.
pub struct CauchyPlan {
    grid: GridSpec,
    size: usize,
    kernel_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CauchyPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CauchyPlan")
            .field("grid", &self.grid)
            .field("size", &self.size)
            .finish_non_exhaustive()
    }
}

/// Smallest `2^a 3^b 5^c` not below `n`.
fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Quadrature weight of the source at offset `(di, dj)` cells: `h²/(π·w)`.
fn kernel_weight(h: f64, di: i64, dj: i64) -> Complex64 {
    if di == 0 && dj == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        // h² / (π h (di + i dj))
        Complex64::new(di as f64, dj as f64).inv() * (h / PI)
    }
}

fn fft_rows(data: &mut [Complex64], m: usize, fft: &Arc<dyn Fft<f64>>) {
    data.par_chunks_mut(m).for_each_init(
        || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

fn transpose(data: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); m * m];
    out.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = data[j * m + i];
        }
    });
    out
}

fn fft2(data: Vec<Complex64>, m: usize, fft: &Arc<dyn Fft<f64>>) -> Vec<Complex64> {
    let mut data = data;
    fft_rows(&mut data, m, fft);
    let mut t = transpose(&data, m);
    fft_rows(&mut t, m, fft);
    transpose(&t, m)
}

impl CauchyPlan {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.resolution();
        let size = fast_len(2 * n - 1);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let h = grid.spacing();
        let reach = (n - 1) as i64;
        let mut kernel = vec![Complex64::new(0.0, 0.0); size * size];
        for dj in -reach..=reach {
            let row = dj.rem_euclid(size as i64) as usize;
            for di in -reach..=reach {
                let col = di.rem_euclid(size as i64) as usize;
                kernel[row * size + col] = kernel_weight(h, di, dj);
            }
        }
        let kernel_hat = fft2(kernel, size, &forward);
        CauchyPlan {
            grid,
            size,
            kernel_hat,
            forward,
            inverse,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Padded FFT length per axis.
    pub fn padded_size(&self) -> usize {
        self.size
    }

    /// Transform of `g` by FFT convolution.
    pub fn apply(&self, g: &ComplexField) -> Result<ComplexField> {
        if g.grid() != &self.grid {
            return Err(Error::InvalidParameter("field grid does not match the plan".into()));
        }
        if g.masked_count() == 0 {
            return Err(Error::EmptyMask);
        }
        let n = self.grid.resolution();
        let m = self.size;
        let mut padded = vec![Complex64::new(0.0, 0.0); m * m];
        for k in g.masked_indices() {
            let (i, j) = self.grid.ij(k);
            padded[j * m + i] = g.values()[k];
        }
        let mut spec = fft2(padded, m, &self.forward);
        spec.par_iter_mut()
            .zip(self.kernel_hat.par_iter())
            .for_each(|(a, &b)| *a *= b);
        let conv = fft2(spec, m, &self.inverse);
        let scale = 1.0 / (m * m) as f64;
        let mut values = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for i in 0..n {
                values[j * n + i] = conv[j * m + i] * scale;
            }
        }
        Field::from_parts(self.grid, g.margin(), values, g.mask().to_vec())
    }
}

/// Solid Cauchy transform of `g` (fast path).
pub fn cauchy_transform(g: &ComplexField) -> Result<ComplexField> {
    CauchyPlan::new(*g.grid()).apply(g)
}

/// Solid Cauchy transform of `g` by direct summation over the masked sources.
pub fn cauchy_transform_direct(g: &ComplexField) -> Result<ComplexField> {
    if g.masked_count() == 0 {
        return Err(Error::EmptyMask);
    }
    let grid = *g.grid();
    let h = grid.spacing();
    let sources: Vec<(i64, i64, Complex64)> = g
        .masked_indices()
        .map(|k| {
            let (i, j) = grid.ij(k);
            (i as i64, j as i64, g.values()[k])
        })
        .collect();
    let n = grid.resolution();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = ((k % n) as i64, (k / n) as i64);
            sources
                .iter()
                .fold(Complex64::new(0.0, 0.0), |acc, &(si, sj, v)| {
                    acc + v * kernel_weight(h, i - si, j - sj)
                })
        })
        .collect();
    Field::from_parts(grid, g.margin(), values, g.mask().to_vec())
}

/// Adds the constant `b - f(0)`, which moves the value at the origin to `b`
/// without changing `∂f/∂z̄`.
pub fn adjust_value_at_zero(f: &ComplexField, b: Complex64) -> ComplexField {
    let shift = b - f.at_origin();
    let grid = *f.grid();
    let c = grid.center();
    let mut values = f.map(|v| v + shift).into_values();
    // Exact anchoring regardless of rounding in the shift.
    values[grid.index(c, c)] = b;
    Field::from_parts(grid, f.margin(), values, f.mask().to_vec()).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, wirtinger_dzbar};
    use rand::{Rng, SeedableRng};

    fn random_field(n: usize, seed: u64) -> ComplexField {
        let grid = make_grid(1.0, n).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let vals: Vec<Complex64> = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::from_parts(grid, grid.default_margin(), vals, grid.disc_mask(grid.default_margin())).unwrap()
    }

    fn max_diff(a: &ComplexField, b: &ComplexField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn fast_len_is_smooth() {
        assert_eq!(fast_len(513), 540);
        assert_eq!(fast_len(257), 270);
        assert_eq!(fast_len(129), 135);
    }

    #[test]
    fn zero_maps_to_zero() {
        let grid = make_grid(1.0, 33).unwrap();
        let f = cauchy_transform(&ComplexField::sample(grid, |_| Complex64::new(0.0, 0.0))).unwrap();
        assert!(f.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn direct_and_fast_paths_agree() {
        for (n, seed) in [(33, 1), (65, 2)] {
            let g = random_field(n, seed);
            let fast = cauchy_transform(&g).unwrap();
            let direct = cauchy_transform_direct(&g).unwrap();
            let scale = direct.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(max_diff(&fast, &direct) <= 1e-10 * scale);
        }
    }

    #[test]
    fn complex_linearity() {
        let g1 = random_field(33, 3);
        let g2 = random_field(33, 4);
        let a = Complex64::new(0.3, -1.7);
        let lhs = cauchy_transform(&g1.zip_map(&g2, |x, y| a * x + y)).unwrap();
        let t1 = cauchy_transform(&g1).unwrap();
        let t2 = cauchy_transform(&g2).unwrap();
        let rhs = t1.zip_map(&t2, |x, y| a * x + y);
        assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn indicator_of_disc_gives_conjugate() {
        let err = |n: usize| {
            let grid = make_grid(1.0, n).unwrap();
            let f = cauchy_transform(&ComplexField::sample(grid, |_| Complex64::new(1.0, 0.0))).unwrap();
            let mut e: f64 = 0.0;
            for k in 0..grid.len() {
                let (i, j) = grid.ij(k);
                let z = grid.node(i, j);
                if z.norm() <= 0.8 {
                    e = e.max((f.values()[k] - z.conj()).norm());
                }
            }
            e
        };
        let (e65, e129) = (err(65), err(129));
        assert!(e129 <= 0.05, "{e129}");
        assert!(e129 < e65, "{e65} {e129}");
    }

    #[test]
    fn right_inverse_improves_under_refinement() {
        let g = |z: Complex64| Complex64::new((2.0 * z.re).cos(), z.im * z.re);
        let err = |n: usize| {
            let grid = make_grid(1.0, n).unwrap();
            let f = cauchy_transform(&ComplexField::sample(grid, g)).unwrap();
            let d = wirtinger_dzbar(&f).unwrap();
            let mut e: f64 = 0.0;
            for k in d.masked_indices() {
                let (i, j) = grid.ij(k);
                let z = grid.node(i, j);
                if z.norm() <= 0.5 {
                    e = e.max((d.values()[k] - g(z)).norm());
                }
            }
            e
        };
        let (a, b) = (err(65), err(129));
        assert!(b < a, "{a} {b}");
    }

    #[test]
    fn anchoring_keeps_dzbar() {
        let f = random_field(33, 7);
        let b = Complex64::new(0.05, 0.0);
        let shifted = adjust_value_at_zero(&f, b);
        assert_eq!(shifted.at_origin(), b);
        let d0 = wirtinger_dzbar(&f).unwrap();
        let d1 = wirtinger_dzbar(&shifted).unwrap();
        for k in d0.masked_indices() {
            assert!((d0.values()[k] - d1.values()[k]).norm() < 1e-12);
        }
        let same = adjust_value_at_zero(&f, f.at_origin());
        assert_eq!(same, f);
        let zero = ComplexField::sample(*f.grid(), |_| Complex64::new(0.0, 0.0));
        let c = adjust_value_at_zero(&zero, b);
        assert!(c.values().iter().all(|&v| v == b));
    }
}
