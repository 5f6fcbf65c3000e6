//! Uniform Cartesian grids on discs `D_r`, sampled fields with interior
//! masks, and second-order finite-difference operators.
//!
//! A grid with odd resolution `N` has nodes `x_i = (i - c)·h`, `y_j = (j - c)·h`
//! with `c = (N - 1)/2` and `h = 2r/(N - 1)`, so `z = 0` is the node `(c, c)`.
//! Field values are stored row-major: index `j·N + i`, rows of constant `y`.
//!
//! Every field carries values at all `N²` nodes of the bounding square and a
//! mask selecting the nodes that are trusted. Differential operators only
//! produce values on the stencil interior of the input mask (nodes whose four
//! neighbours are masked); everything else is set to zero and unmasked.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Smallest admissible resolution.
pub const MIN_RESOLUTION: usize = 17;

/// Default mask margin, in grid spacings.
pub const DEFAULT_MARGIN_CELLS: f64 = 2.0;

/// Uniform grid on the square `[-r, r]²` circumscribing the disc `D_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    radius: f64,
    resolution: usize,
    spacing: f64,
}

/// Builds a grid on `D_radius` with `resolution` nodes per axis.
pub fn make_grid(radius: f64, resolution: usize) -> Result<GridSpec> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
    }
    if resolution < MIN_RESOLUTION {
        return Err(Error::InvalidGrid(format!(
            "resolution {resolution} is below the minimum {MIN_RESOLUTION}"
        )));
    }
    if resolution % 2 == 0 {
        return Err(Error::InvalidGrid(format!("resolution {resolution} is even")));
    }
    // Keeps N² indices and the binary header's u32 field in range.
    if resolution > 1 << 15 {
        return Err(Error::InvalidGrid(format!("resolution {resolution} is too large")));
    }
    Ok(GridSpec {
        radius,
        resolution,
        spacing: 2.0 * radius / (resolution - 1) as f64,
    })
}

impl GridSpec {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Index of the centre row/column; the node `(center, center)` is `z = 0`.
    pub fn center(&self) -> usize {
        (self.resolution - 1) / 2
    }

    /// Number of nodes, `N²`.
    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        self.resolution == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.resolution + i
    }

    /// Inverse of [`GridSpec::index`].
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.resolution, idx / self.resolution)
    }

    /// Coordinate of the `k`-th grid line.
    pub fn coord(&self, k: usize) -> f64 {
        (k as f64 - self.center() as f64) * self.spacing
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.coord(i), self.coord(j))
    }

    /// Mask of nodes with `|z| ≤ radius - margin`.
    ///
    /// The test is done in index units on `di² + dj²`, so the mask is exactly
    /// invariant under the grid's quarter turns and reflections.
    pub fn disc_mask(&self, margin: f64) -> Vec<bool> {
        let reach = (self.radius - margin) / self.spacing;
        let c = self.center() as i64;
        let mut mask = vec![false; self.len()];
        if reach < 0.0 {
            return mask;
        }
        let limit = reach * reach * (1.0 + 1e-12);
        for j in 0..self.resolution {
            let dj = j as i64 - c;
            for i in 0..self.resolution {
                let di = i as i64 - c;
                mask[self.index(i, j)] = ((di * di + dj * dj) as f64) <= limit;
            }
        }
        mask
    }

    /// Default margin `2h`.
    pub fn default_margin(&self) -> f64 {
        DEFAULT_MARGIN_CELLS * self.spacing
    }
}

/// A sampled function on a disc grid together with its trusted-node mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: GridSpec,
    margin: f64,
    values: Vec<T>,
    mask: Vec<bool>,
}

pub type ComplexField = Field<Complex64>;
pub type RealField = Field<f64>;

impl<T: Copy + Send + Sync> Field<T> {
    /// Samples `f` at every node of the grid; masks the disc `|z| ≤ r - margin`.
    pub fn from_fn<F>(grid: GridSpec, margin: f64, f: F) -> Self
    where
        F: Fn(Complex64) -> T + Sync,
    {
        let n = grid.resolution();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.node(idx % n, idx / n)))
            .collect();
        Field {
            grid,
            margin,
            values,
            mask: grid.disc_mask(margin),
        }
    }

    /// Same as [`Field::from_fn`] with the default `2h` margin.
    pub fn sample<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(Complex64) -> T + Sync,
    {
        Self::from_fn(grid, grid.default_margin(), f)
    }

    pub fn constant(grid: GridSpec, margin: f64, value: T) -> Self {
        Field {
            grid,
            margin,
            values: vec![value; grid.len()],
            mask: grid.disc_mask(margin),
        }
    }

    /// Assembles a field from raw parts; lengths must match the grid.
    pub fn from_parts(grid: GridSpec, margin: f64, values: Vec<T>, mask: Vec<bool>) -> Result<Self> {
        if values.len() != grid.len() || mask.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {} values and {} mask entries",
                grid.len(),
                values.len(),
                mask.len()
            )));
        }
        Ok(Field {
            grid,
            margin,
            values,
            mask,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[self.grid.index(i, j)]
    }

    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        self.mask[self.grid.index(i, j)]
    }

    /// Value at the node `z = 0`.
    pub fn at_origin(&self) -> T {
        let c = self.grid.center();
        self.at(c, c)
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Masked node indices in row-major order.
    pub fn masked_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(k, _)| k)
    }

    /// Replaces the mask, keeping the values.
    pub fn with_mask(mut self, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), self.grid.len(), "mask length mismatch");
        self.mask = mask;
        self
    }

    /// Pointwise map; the mask is preserved.
    pub fn map<U, F>(&self, f: F) -> Field<U>
    where
        U: Copy + Send + Sync,
        F: Fn(T) -> U + Sync,
    {
        Field {
            grid: self.grid,
            margin: self.margin,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
            mask: self.mask.clone(),
        }
    }

    /// Pointwise map that also receives the node position.
    pub fn map_with_node<U, F>(&self, f: F) -> Field<U>
    where
        U: Copy + Send + Sync,
        F: Fn(Complex64, T) -> U + Sync,
    {
        let n = self.grid.resolution();
        let grid = self.grid;
        Field {
            grid,
            margin: self.margin,
            values: self
                .values
                .par_iter()
                .enumerate()
                .map(|(k, &v)| f(grid.node(k % n, k / n), v))
                .collect(),
            mask: self.mask.clone(),
        }
    }

    /// Pointwise combination of two fields on the same grid; masks intersect.
    pub fn zip_map<U, V, F>(&self, other: &Field<U>, f: F) -> Field<V>
    where
        U: Copy + Send + Sync,
        V: Copy + Send + Sync,
        F: Fn(T, U) -> V + Sync,
    {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Field {
            grid: self.grid,
            margin: self.margin,
            values: self
                .values
                .par_iter()
                .zip(other.values.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| a && b)
                .collect(),
        }
    }

    /// Masked nodes whose four axis neighbours are also masked.
    pub fn interior_mask(&self) -> Vec<bool> {
        interior_of(&self.grid, &self.mask)
    }
}

/// Stencil interior of `mask`: masked nodes with all four neighbours masked.
pub fn interior_of(grid: &GridSpec, mask: &[bool]) -> Vec<bool> {
    let n = grid.resolution();
    let mut out = vec![false; grid.len()];
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let k = grid.index(i, j);
            out[k] = mask[k] && mask[k - 1] && mask[k + 1] && mask[k - n] && mask[k + n];
        }
    }
    out
}

/// Applies a five-point stencil `(east, west, north, south, centre) -> value`
/// on the stencil interior of the input mask.
pub fn stencil_map<T, U, F>(field: &Field<T>, f: F) -> Result<Field<U>>
where
    T: Copy + Send + Sync,
    U: Copy + Send + Sync + Default,
    F: Fn(T, T, T, T, T) -> U + Sync,
{
    let grid = field.grid;
    let n = grid.resolution();
    let interior = field.interior_mask();
    if !interior.iter().any(|&m| m) {
        return Err(Error::MaskTooThin);
    }
    let v = &field.values;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if interior[k] {
                f(v[k + 1], v[k - 1], v[k + n], v[k - n], v[k])
            } else {
                U::default()
            }
        })
        .collect();
    Ok(Field {
        grid,
        margin: field.margin,
        values,
        mask: interior,
    })
}

/// Centred first difference in `x`.
pub fn partial_x<T>(field: &Field<T>) -> Result<Field<T>>
where
    T: Copy + Send + Sync + Default + Sub<Output = T> + Mul<f64, Output = T>,
{
    let s = 0.5 / field.grid.spacing();
    stencil_map(field, |e, w, _, _, _| (e - w) * s)
}

/// Centred first difference in `y`.
pub fn partial_y<T>(field: &Field<T>) -> Result<Field<T>>
where
    T: Copy + Send + Sync + Default + Sub<Output = T> + Mul<f64, Output = T>,
{
    let s = 0.5 / field.grid.spacing();
    stencil_map(field, |_, _, n, s_, _| (n - s_) * s)
}

/// Wirtinger derivative `∂f/∂z̄ = (∂x f + i ∂y f)/2` with centred differences.
///
/// Exact on polynomials of degree ≤ 2 in `x, y`.
pub fn wirtinger_dzbar(f: &ComplexField) -> Result<ComplexField> {
    let s = 0.25 / f.grid.spacing();
    stencil_map(f, |e, w, n, so, _| {
        let dx = e - w;
        let dy = n - so;
        Complex64::new(dx.re - dy.im, dx.im + dy.re) * s
    })
}

/// Five-point Laplacian `(u_E + u_W + u_N + u_S - 4u_C)/h²`.
pub fn laplacian5<T>(u: &Field<T>) -> Result<Field<T>>
where
    T: Copy + Send + Sync + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let inv_h2 = 1.0 / (u.grid.spacing() * u.grid.spacing());
    stencil_map(u, |e, w, n, s, c| (e + w + n + s - c * 4.0) * inv_h2)
}

/// Maximum of `|f|` over the mask, scanned in row-major order.
pub fn sup_norm(f: &ComplexField) -> Result<f64> {
    masked_max(f, |v| v.norm())
}

/// Maximum of `key(value)` over the mask; NaN keys propagate.
pub fn masked_max<T, F>(f: &Field<T>, key: F) -> Result<f64>
where
    T: Copy + Send + Sync,
    F: Fn(T) -> f64,
{
    let mut best: Option<f64> = None;
    for k in f.masked_indices() {
        let x = key(f.values[k]);
        best = Some(match best {
            None => x,
            Some(b) if x.is_nan() || x > b => x,
            Some(b) => b,
        });
    }
    best.ok_or(Error::EmptyMask)
}

/// Argmin of `key(value)` over the mask, scanned in row-major order; the
/// first minimiser wins ties.
pub fn masked_argmin<T, F>(f: &Field<T>, key: F) -> Option<(usize, f64)>
where
    T: Copy + Send + Sync,
    F: Fn(usize, T) -> f64,
{
    let mut best: Option<(usize, f64)> = None;
    for k in f.masked_indices() {
        let x = key(k, f.values[k]);
        match best {
            Some((_, b)) if !(x < b) => {}
            _ => best = Some((k, x)),
        }
    }
    best
}

/// Modulus and continuous argument of a nonvanishing complex field.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarField {
    pub rho: RealField,
    pub phi: RealField,
}

impl PolarField {
    /// `ρ·e^{iφ}` on the mask.
    pub fn reconstruct(&self) -> ComplexField {
        self.rho.zip_map(&self.phi, Complex64::from_polar)
    }
}

/// Tolerance of the phase-unwrap consistency check, radians.
pub const UNWRAP_TOLERANCE: f64 = 1e-6;

/// Splits `g = ρ e^{iφ}` with `φ` continuous on the mask.
///
/// The branch is fixed by `arg g(basepoint) ∈ (-π, π]`. Phases are unwrapped
/// along the basepoint's column, then along each row; every pair of adjacent
/// masked nodes is then checked, and a phase jump that disagrees with the
/// local increment signals a zero of `g` enclosed by the mask.
pub fn polar_decompose(g: &ComplexField, basepoint: (usize, usize)) -> Result<PolarField> {
    let grid = *g.grid();
    let n = grid.resolution();
    let (bi, bj) = basepoint;
    if bi >= n || bj >= n || !g.is_masked(bi, bj) {
        return Err(Error::InvalidParameter(format!(
            "basepoint ({bi}, {bj}) is not a masked node"
        )));
    }
    for k in g.masked_indices() {
        let v = g.values[k];
        if !(v.norm() > 0.0) {
            let (i, j) = grid.ij(k);
            return Err(Error::VanishingField { i, j });
        }
    }

    let mask = g.mask();
    let vals = g.values();
    let step = |from: usize, to: usize, phi: &mut [f64], set: &mut [bool]| {
        let inc = (vals[to] * vals[from].conj()).arg();
        phi[to] = phi[from] + inc;
        set[to] = true;
    };

    let mut phi = vec![0.0; grid.len()];
    let mut set = vec![false; grid.len()];
    let b = grid.index(bi, bj);
    phi[b] = vals[b].arg();
    set[b] = true;

    // Column through the basepoint.
    for j in bj + 1..n {
        let (prev, cur) = (grid.index(bi, j - 1), grid.index(bi, j));
        if !mask[cur] {
            break;
        }
        step(prev, cur, &mut phi, &mut set);
    }
    for j in (0..bj).rev() {
        let (prev, cur) = (grid.index(bi, j + 1), grid.index(bi, j));
        if !mask[cur] {
            break;
        }
        step(prev, cur, &mut phi, &mut set);
    }

    // Rows outward from any assigned node; repeat with vertical seeding until
    // every masked node connected to the basepoint is reached.
    loop {
        let mut progressed = false;
        for j in 0..n {
            for i in 0..n {
                let k = grid.index(i, j);
                if !mask[k] || set[k] {
                    continue;
                }
                let seed = [
                    (j > 0).then(|| k - n),
                    (j + 1 < n).then(|| k + n),
                ]
                .into_iter()
                .flatten()
                .find(|&s| set[s]);
                if let Some(s) = seed {
                    step(s, k, &mut phi, &mut set);
                    progressed = true;
                }
            }
            // Sweep each row in both directions from the assigned nodes.
            for i in 1..n {
                let (prev, cur) = (grid.index(i - 1, j), grid.index(i, j));
                if mask[cur] && !set[cur] && set[prev] {
                    step(prev, cur, &mut phi, &mut set);
                    progressed = true;
                }
            }
            for i in (0..n - 1).rev() {
                let (prev, cur) = (grid.index(i + 1, j), grid.index(i, j));
                if mask[cur] && !set[cur] && set[prev] {
                    step(prev, cur, &mut phi, &mut set);
                    progressed = true;
                }
            }
        }
        if !progressed {
            break;
        }
    }
    if let Some(k) = (0..grid.len()).find(|&k| mask[k] && !set[k]) {
        let (i, j) = grid.ij(k);
        return Err(Error::InvalidParameter(format!(
            "mask is disconnected: node ({i}, {j}) unreachable from the basepoint"
        )));
    }

    // Consistency of every horizontal and vertical masked edge.
    for j in 0..n {
        for i in 0..n {
            let k = grid.index(i, j);
            if !mask[k] {
                continue;
            }
            for nb in [(i + 1 < n).then(|| k + 1), (j + 1 < n).then(|| k + n)]
                .into_iter()
                .flatten()
            {
                if !mask[nb] {
                    continue;
                }
                let inc = (vals[nb] * vals[k].conj()).arg();
                let d = phi[nb] - phi[k] - inc;
                if d.abs() > UNWRAP_TOLERANCE {
                    return Err(Error::UnwrapInconsistent {
                        i,
                        j,
                        discrepancy: d,
                    });
                }
            }
        }
    }

    let rho = g.map(|v| v.norm());
    let phi = Field::from_parts(grid, g.margin(), phi, mask.to_vec())?;
    Ok(PolarField { rho, phi })
}

/// Principal value of the argument shifted into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> GridSpec {
        make_grid(1.0, n).unwrap()
    }

    #[test]
    fn spacing_matches_definition() {
        assert_eq!(make_grid(1.0, 257).unwrap().spacing(), 0.0078125);
        assert_eq!(make_grid(2.0, 17).unwrap().spacing(), 0.25);
        let g = make_grid(1.0, 257).unwrap();
        assert_eq!(g.spacing() * 256.0, 2.0);
        assert_eq!(g.node(g.center(), g.center()), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_resolution() {
        assert!(matches!(make_grid(1.0, 16), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(1.0, 15), Err(Error::InvalidGrid(_))));
        assert!(make_grid(0.0, 17).is_err());
        assert!(make_grid(f64::NAN, 17).is_err());
    }

    #[test]
    fn mask_has_quarter_turn_symmetry() {
        let g = unit(33);
        let m = g.disc_mask(g.default_margin());
        let n = g.resolution();
        for j in 0..n {
            for i in 0..n {
                let here = m[g.index(i, j)];
                assert_eq!(here, m[g.index(n - 1 - j, i)]);
                assert_eq!(here, m[g.index(j, i)]);
            }
        }
    }

    #[test]
    fn dzbar_of_conjugate_is_one_and_of_z_is_zero() {
        let g = unit(33);
        let zbar = wirtinger_dzbar(&ComplexField::sample(g, |z| z.conj())).unwrap();
        let z = wirtinger_dzbar(&ComplexField::sample(g, |z| z)).unwrap();
        for k in zbar.masked_indices() {
            assert!((zbar.values()[k] - Complex64::new(1.0, 0.0)).norm() < 1e-13);
            assert!(z.values()[k].norm() < 1e-13);
        }
    }

    #[test]
    fn dzbar_of_conjugate_square_converges_at_second_order() {
        // ∂z̄(z̄²) = 2z̄, and the stencil is exact on quadratics.
        let g = unit(65);
        let d = wirtinger_dzbar(&ComplexField::sample(g, |z| z.conj() * z.conj())).unwrap();
        for k in d.masked_indices() {
            let (i, j) = g.ij(k);
            assert!((d.values()[k] - 2.0 * g.node(i, j).conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn dzbar_smooth_field_error_quarters_under_refinement() {
        let f = |z: Complex64| Complex64::new(z.re.sin() * z.im.cos(), z.re * z.im);
        // ∂x f = cos x cos y + i y, ∂y f = -sin x sin y + i x.
        let exact = |z: Complex64| {
            let fx = Complex64::new(z.re.cos() * z.im.cos(), z.im);
            let fy = Complex64::new(-z.re.sin() * z.im.sin(), z.re);
            (fx + Complex64::i() * fy) * 0.5
        };
        let err = |n: usize| {
            let g = unit(n);
            let d = wirtinger_dzbar(&ComplexField::sample(g, f)).unwrap();
            let mut e: f64 = 0.0;
            for k in d.masked_indices() {
                let (i, j) = g.ij(k);
                e = e.max((d.values()[k] - exact(g.node(i, j))).norm());
            }
            e
        };
        let (e1, e2) = (err(65), err(129));
        let ratio = e1 / e2;
        assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn laplacian_exact_on_quadratics() {
        let g = unit(33);
        let a = laplacian5(&RealField::sample(g, |z| z.norm_sqr())).unwrap();
        let b = laplacian5(&RealField::sample(g, |z| z.re * z.re - z.im * z.im)).unwrap();
        let c = laplacian5(&RealField::sample(g, |z| 3.0 * z.re * z.im + 2.0 * z.re - 0.5)).unwrap();
        for k in a.masked_indices() {
            assert!((a.values()[k] - 4.0).abs() < 1e-9);
            assert!(b.values()[k].abs() < 1e-9);
            assert!(c.values()[k].abs() < 1e-9);
        }
    }

    #[test]
    fn laplacian_of_three_halves_power() {
        // Δ (x+2)^{3/2} = (3/4)(x+2)^{-1/2}; error is h²/12 · u'''' at most.
        let g = unit(129);
        let h = g.spacing();
        let l = laplacian5(&RealField::sample(g, |z| (z.re + 2.0).powf(1.5))).unwrap();
        for k in l.masked_indices() {
            let (i, _) = g.ij(k);
            let x = g.coord(i);
            let exact = 0.75 * (x + 2.0).powf(-0.5);
            assert!((l.values()[k] - exact).abs() < h * h, "{}", l.values()[k] - exact);
        }
    }

    #[test]
    fn thin_mask_is_rejected() {
        let g = unit(17);
        let f = ComplexField::from_fn(g, 0.99, |z| z);
        assert_eq!(f.masked_count(), 1);
        assert!(matches!(wirtinger_dzbar(&f), Err(Error::MaskTooThin)));
    }

    #[test]
    fn polar_of_constant_and_plane_wave() {
        let g = unit(33);
        let c = g.center();
        let p = polar_decompose(&ComplexField::sample(g, |_| Complex64::new(1.0, 0.0)), (c, c)).unwrap();
        for k in p.rho.masked_indices() {
            assert_eq!(p.rho.values()[k], 1.0);
            assert_eq!(p.phi.values()[k], 0.0);
        }
        let g2 = make_grid(2.0, 65).unwrap();
        let wave = ComplexField::sample(g2, |z| Complex64::from_polar(1.0, 2.0 * z.im));
        let p = polar_decompose(&wave, (g2.center(), g2.center())).unwrap();
        for k in p.phi.masked_indices() {
            let (_, j) = g2.ij(k);
            assert!((p.phi.values()[k] - 2.0 * g2.coord(j)).abs() < 1e-12);
            assert!((p.rho.values()[k] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn polar_detects_enclosed_zero() {
        let g = unit(33);
        let c = g.center();
        let f = ComplexField::sample(g, |z| z - Complex64::new(0.1, 0.05));
        assert!(matches!(
            polar_decompose(&f, (c, c)),
            Err(Error::UnwrapInconsistent { .. })
        ));
        let on_node = ComplexField::sample(g, |z| z);
        assert!(matches!(
            polar_decompose(&on_node, (c + 1, c)),
            Err(Error::VanishingField { .. })
        ));
    }

    #[test]
    fn sup_norm_cases() {
        let g = unit(257);
        assert_eq!(sup_norm(&ComplexField::sample(g, |_| Complex64::new(0.0, 0.0))).unwrap(), 0.0);
        let s = sup_norm(&ComplexField::sample(g, |z| z)).unwrap();
        // Outermost masked node sits at |z| = 1 - 2h.
        assert!((s - (1.0 - 2.0 * g.spacing())).abs() < 1e-12, "{s}");
        let empty = ComplexField::from_fn(g, 2.0, |z| z);
        assert!(matches!(sup_norm(&empty), Err(Error::EmptyMask)));
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn polar_roundtrip_is_identity(
                a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.2f64..1.0, phase in -3.0f64..3.0
            ) {
                let g = make_grid(1.0, 33).unwrap();
                let f = ComplexField::sample(g, |z| {
                    Complex64::from_polar(c + 0.1 * (a * z.re).sin(), phase + b * z.re * z.im)
                });
                let p = polar_decompose(&f, (g.center(), g.center())).unwrap();
                let back = p.reconstruct();
                for k in f.masked_indices() {
                    prop_assert!((back.values()[k] - f.values()[k]).norm() < 1e-12);
                }
            }
        }
    }
}
