//! The almost complex structure `J` on `Ω = D₂ × D_{1/10} ⊂ ℂ²`.
//!
//! In real coordinates `(x₁, y₁, x₂, y₂)`
//!
//! ```text
//!     | 0  -1  0   0 |
//! J = | 1   0  0   0 |      λ = -2|z₂|^{1/2}
//!     | 0   λ  0  -1 |
//!     | λ   0  1   0 |
//! ```
//!
//! `J` is only Hölder-1/2 in `z₂`. A graph disc `z ↦ (z, f(z))` is
//! `J`-holomorphic exactly when `∂f/∂z̄ = |f|^{1/2}`; [`reduction_identity`]
//! checks that algebra node by node.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::{self, ComplexField, Field, GridSpec, RealField};
use crate::{Error, Result};

/// Radius of the first factor of `Ω`.
pub const OMEGA_R1: f64 = 2.0;
/// Radius of the second factor of `Ω`.
pub const OMEGA_R2: f64 = 0.1;
/// Slack on the strict inequalities of `Ω` membership.
pub const OMEGA_SLACK: f64 = 1e-12;

/// `λ = -2|z₂|^{1/2}`.
pub fn lambda_val(z2: Complex64) -> f64 {
    -2.0 * z2.norm().sqrt()
}

/// A point `(z₁, z₂)` of `ℂ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl Point {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        Point { z1, z2 }
    }

    pub fn in_omega(&self) -> bool {
        self.z1.norm() < OMEGA_R1 + OMEGA_SLACK && self.z2.norm() < OMEGA_R2 + OMEGA_SLACK
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JMatrix {
    pub entries: [[f64; 4]; 4],
    pub lambda: f64,
    pub hoelder_exponent: f64,
}

impl JMatrix {
    pub fn with_lambda(lambda: f64) -> Self {
        JMatrix {
            entries: [
                [0.0, -1.0, 0.0, 0.0],
                [1.0, 0.0, 0.0, 0.0],
                [0.0, lambda, 0.0, -1.0],
                [lambda, 0.0, 1.0, 0.0],
            ],
            lambda,
            hoelder_exponent: 0.5,
        }
    }

    pub fn apply(&self, v: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(&self.entries) {
            *o = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn square(&self) -> [[f64; 4]; 4] {
        let a = &self.entries;
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = (0..4).map(|k| a[i][k] * a[k][j]).sum();
            }
        }
        out
    }

    /// `max |J² + I|` entrywise.
    pub fn square_defect(&self) -> f64 {
        let s = self.square();
        let mut worst: f64 = 0.0;
        for (i, row) in s.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v + id).abs());
            }
        }
        worst
    }
}

/// The structure at `p`; errors outside `Ω`.
pub fn j_at(p: Point) -> Result<JMatrix> {
    if !p.in_omega() {
        return Err(Error::OutsideDomain(format!("({}, {})", p.z1, p.z2)));
    }
    Ok(JMatrix::with_lambda(lambda_val(p.z2)))
}

/// A map `Z = (Z₁, Z₂)` from a disc grid into `ℂ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscMap {
    pub grid: GridSpec,
    pub z1: ComplexField,
    pub z2: ComplexField,
}

impl DiscMap {
    /// Checks that both components share the grid and that the masked range
    /// lies in `Ω`.
    pub fn new(z1: ComplexField, z2: ComplexField) -> Result<Self> {
        if z1.grid() != z2.grid() {
            return Err(Error::InvalidParameter("components live on different grids".into()));
        }
        let grid = *z1.grid();
        for k in z1.masked_indices().filter(|&k| z2.mask()[k]) {
            let p = Point::new(z1.values()[k], z2.values()[k]);
            if !p.in_omega() {
                let (i, j) = grid.ij(k);
                return Err(Error::OutsideDomain(format!(
                    "node ({i}, {j}) maps to ({}, {})",
                    p.z1, p.z2
                )));
            }
        }
        Ok(DiscMap { grid, z1, z2 })
    }

    /// The standard disc `z ↦ (z, 0)` on the given grid.
    pub fn standard(grid: GridSpec) -> Result<Self> {
        DiscMap::new(
            ComplexField::sample(grid, |z| z),
            ComplexField::sample(grid, |_| Complex64::new(0.0, 0.0)),
        )
    }
}

/// Componentwise `∂Z/∂y - J(Z)·∂Z/∂x` on the stencil interior and the sup of
/// its Euclidean norm.
pub fn jholo_residual(map: &DiscMap) -> Result<([RealField; 4], f64)> {
    let z1x = grid::partial_x(&map.z1)?;
    let z1y = grid::partial_y(&map.z1)?;
    let z2x = grid::partial_x(&map.z2)?;
    let z2y = grid::partial_y(&map.z2)?;
    let dx = z1x.zip_map(&z2x, |a, b| [a.re, a.im, b.re, b.im]);
    let dy = z1y.zip_map(&z2y, |a, b| [a.re, a.im, b.re, b.im]);
    let lam = map.z2.map(lambda_val);
    let r: Field<[f64; 4]> = dx
        .zip_map(&lam, |v, l| JMatrix::with_lambda(l).apply(v))
        .zip_map(&dy, |jv, w| [w[0] - jv[0], w[1] - jv[1], w[2] - jv[2], w[3] - jv[3]]);
    let sup = grid::masked_max(&r, |v| v.iter().map(|x| x * x).sum::<f64>().sqrt())?;
    let comps = [0, 1, 2, 3].map(|c| r.map(move |v| v[c]));
    Ok((comps, sup))
}

/// The graph disc `z ↦ (z, f(z))`; requires `|f| < 1/10` on the mask.
pub fn graph_map(f: &ComplexField) -> Result<DiscMap> {
    let z1 = Field::from_parts(
        *f.grid(),
        f.margin(),
        ComplexField::sample(*f.grid(), |z| z).into_values(),
        f.mask().to_vec(),
    )?;
    DiscMap::new(z1, f.clone())
}

/// Max over interior nodes of `|2·|∂z̄f - |f|^{1/2}| - ‖(R₃, R₄)‖|`, where
/// `R` is the `J`-holomorphy residual of the graph of `f`.
///
/// With `f = u + iv` the last two components are `R₃ = u_y + v_x` and
/// `R₄ = v_y - λ - u_x`, and `∂z̄f - |f|^{1/2} = ½(-R₄ + iR₃)`. Both sides use
/// the same centred differences, so the identity holds to rounding for any `f`.
pub fn reduction_identity(f: &ComplexField) -> Result<f64> {
    let map = graph_map(f)?;
    let ([_, _, r3, r4], _) = jholo_residual(&map)?;
    let (res, _) = crate::dbar::residual_dbar(f)?;
    let rr = r3.zip_map(&r4, |a, b| a.hypot(b));
    let diff = rr.zip_map(&res, |a, b| (a - 2.0 * b).abs());
    grid::masked_max(&diff, |x| x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dbar::profile_exact;
    use crate::grid::make_grid;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn lambda_values() {
        assert_eq!(lambda_val(Complex64::new(0.0, 0.0)), 0.0);
        assert!((lambda_val(Complex64::new(0.04, 0.0)) + 0.4).abs() < 1e-15);
        assert!((lambda_val(Complex64::new(0.0, 0.01)) + 0.2).abs() < 1e-15);
    }

    #[test]
    fn standard_structure_at_zero() {
        let j = j_at(Point::new(Complex64::new(0.3, 0.1), Complex64::new(0.0, 0.0))).unwrap();
        assert_eq!(j.lambda, 0.0);
        assert_eq!(j.apply([1.0, 0.0, 0.0, 0.0]), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(j.apply([0.0, 0.0, 1.0, 0.0]), [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(j.hoelder_exponent, 0.5);
    }

    #[test]
    fn outside_omega_is_rejected() {
        let z = Complex64::new(0.0, 0.0);
        assert!(j_at(Point::new(Complex64::new(2.0, 0.1), z)).is_err());
        assert!(j_at(Point::new(z, Complex64::new(0.0, 0.1 + 1e-9))).is_err());
        assert!(j_at(Point::new(z, Complex64::new(0.0, 0.0999))).is_ok());
    }

    #[test]
    fn lambda_entry_is_half_hoelder() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..10_000 {
            let mut pick = || Complex64::from_polar(rng.gen_range(0.0..0.1), rng.gen_range(0.0..6.3));
            let (p, q) = (pick(), pick());
            assert!((lambda_val(p) - lambda_val(q)).abs() <= 2.0 * (p - q).norm().sqrt() + 1e-15);
        }
    }

    proptest! {
        #[test]
        fn j_squares_to_minus_identity(r in 0.0..0.1f64, t in 0.0..6.3f64) {
            let p = Point::new(Complex64::new(0.5, -0.2), Complex64::from_polar(r, t));
            prop_assert!(j_at(p).unwrap().square_defect() <= 1e-14);
        }
    }

    #[test]
    fn standard_disc_is_exactly_holomorphic() {
        let map = DiscMap::standard(make_grid(2.0, 65).unwrap()).unwrap();
        let (comps, sup) = jholo_residual(&map).unwrap();
        assert_eq!(sup, 0.0);
        for c in &comps {
            assert!(c.masked_indices().all(|k| c.values()[k] == 0.0));
        }
    }

    #[test]
    fn antiholomorphic_first_component() {
        let g = make_grid(1.0, 33).unwrap();
        let map = DiscMap::new(
            ComplexField::sample(g, |z| z.conj()),
            ComplexField::sample(g, |_| Complex64::new(0.0, 0.0)),
        )
        .unwrap();
        let (comps, sup) = jholo_residual(&map).unwrap();
        assert!((sup - 2.0).abs() < 1e-12);
        let k = g.index(g.center(), g.center());
        assert!((comps[1].values()[k] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn graph_of_profile() {
        let g = make_grid(1.0, 129).unwrap();
        let f = profile_exact(0.9, g);
        let map = graph_map(&f).unwrap();
        let (comps, sup) = jholo_residual(&map).unwrap();
        assert!(sup <= 2.0 * g.spacing(), "{sup}");
        for c in &comps[..2] {
            assert!(c.masked_indices().all(|k| c.values()[k] == 0.0));
        }
        assert!(reduction_identity(&f).unwrap() <= 1e-10);
    }

    #[test]
    fn graph_range_violation() {
        let g = make_grid(1.0, 33).unwrap();
        let f = ComplexField::sample(g, |_| Complex64::new(0.2, 0.0));
        assert!(matches!(graph_map(&f), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn reduction_identity_on_zero_and_random() {
        let g = make_grid(1.0, 65).unwrap();
        let zero = ComplexField::sample(g, |_| Complex64::new(0.0, 0.0));
        assert_eq!(reduction_identity(&zero).unwrap(), 0.0);
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let values = (0..g.len())
            .map(|_| Complex64::from_polar(rng.gen_range(0.0..0.099), rng.gen_range(0.0..6.3)))
            .collect();
        let f = Field::from_parts(g, g.default_margin(), values, g.disc_mask(g.default_margin())).unwrap();
        assert!(reduction_identity(&f).unwrap() <= 1e-10);
    }
}
