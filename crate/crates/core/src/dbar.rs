//! The nonlinear equation `∂f/∂z̄ = |f|^{1/2}` with a prescribed value
//! `f(0) = b`.
//!
//! [`picard_solve`] rewrites the equation as the fixed point
//!
//! ```text
//! f = T(|f|^{1/2}) + (b - T(|f|^{1/2})(0))
//! ```
//!
//! with `T` the solid Cauchy transform, and iterates it with relaxation. The
//! right-hand side is not Lipschitz at `f = 0`, so the square root is
//! regularized as `(|f|² + ε²)^{1/4}` and `ε` is driven to zero over a
//! geometric continuation schedule; the final stage always runs at `ε = 0`
//! and the reported residual is the unregularized one.
//!
//! A run that stalls is returned with `converged = false`. Only NaNs are
//! errors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cauchy::{adjust_value_at_zero, CauchyPlan};
use crate::grid::{self, ComplexField, Field, GridSpec, RealField};
use crate::{Error, Result};

/// One solve of `∂f/∂z̄ = |f|^{1/2}` on a disc grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbarProblem {
    pub grid: GridSpec,
    /// Prescribed value at the origin.
    pub b: Complex64,
    /// Initial regularization `ε₀`.
    pub epsilon: f64,
    /// Relaxation `θ ∈ (0, 1]`.
    pub theta: f64,
    /// Sup-norm update tolerance per stage.
    pub tol: f64,
    /// Iteration cap per continuation stage.
    pub max_iter: usize,
    /// Number of stages: `ε₀, ε₀/10, …` followed by a final `ε = 0` stage.
    pub continuation_steps: usize,
    /// Degree of the holomorphic normalisation: 0 fixes only `f(0) = b`,
    /// 1 additionally removes the `z` term so that `∂f/∂z(0) = 0`.
    #[serde(default)]
    pub holomorphic_degree: u32,
}

impl DbarProblem {
    /// Default solver settings for the given grid and anchor.
    pub fn new(grid: GridSpec, b: Complex64) -> Self {
        DbarProblem {
            grid,
            b,
            epsilon: 1e-2,
            theta: 0.5,
            tol: 1e-8,
            max_iter: 500,
            continuation_steps: 8,
            holomorphic_degree: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        // Re-run the grid constructor's checks; deserialised grids bypass it.
        let g = grid::make_grid(self.grid.radius(), self.grid.resolution())?;
        if g != self.grid {
            return bad("grid spacing is inconsistent with radius and resolution".into());
        }
        if !(self.b.re.is_finite() && self.b.im.is_finite()) {
            return bad(format!("b must be finite, got {}", self.b));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be >= 0, got {}", self.epsilon));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad(format!("theta must lie in (0, 1], got {}", self.theta));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        if self.continuation_steps == 0 {
            return bad("continuation_steps must be positive".into());
        }
        if self.holomorphic_degree > 1 {
            return bad(format!(
                "holomorphic_degree {} unsupported (0 or 1)",
                self.holomorphic_degree
            ));
        }
        Ok(())
    }

    /// The `ε` value of every stage; the last one is always zero.
    pub fn epsilon_schedule(&self) -> Vec<f64> {
        let mut eps: Vec<f64> = (0..self.continuation_steps.saturating_sub(1))
            .map(|k| self.epsilon * 10f64.powi(-(k as i32)))
            .take_while(|&e| e > 0.0)
            .collect();
        eps.push(0.0);
        eps
    }
}

/// Result of [`picard_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct DbarSolution {
    pub problem: DbarProblem,
    pub f: ComplexField,
    /// Sup over the stencil interior of `|∂z̄f - |f|^{1/2}|`, at `ε = 0`.
    pub residual_sup: f64,
    /// Sup of `|f|` over the mask.
    pub sup_f: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Sup-norm size of every update, in iteration order.
    pub update_history: Vec<f64>,
}

impl DbarSolution {
    /// Wraps a field that did not come out of the solver (an exact family
    /// member, a rescaled or decoded solution), recomputing the residual and
    /// the sup norm.
    pub fn from_field(problem: DbarProblem, f: ComplexField, converged: bool) -> Result<Self> {
        if f.grid() != &problem.grid {
            return Err(Error::InvalidParameter("field is on a different grid than the problem".into()));
        }
        let (_, residual_sup) = residual_dbar(&f)?;
        let sup_f = grid::sup_norm(&f)?;
        Ok(DbarSolution {
            problem,
            f,
            residual_sup,
            sup_f,
            converged,
            iterations: 0,
            update_history: Vec::new(),
        })
    }

    /// Default acceptance gate on the residual, `5h`.
    pub fn residual_gate(&self) -> f64 {
        RESIDUAL_GATE_CELLS * self.problem.grid.spacing()
    }

    /// Converged with the residual below the gate.
    pub fn passes_gate(&self) -> bool {
        self.converged && self.residual_sup <= self.residual_gate()
    }
}

/// Residual gate in units of the grid spacing.
pub const RESIDUAL_GATE_CELLS: f64 = 5.0;

/// Pointwise `(|f|² + ε²)^{1/4}`; equals `|f|^{1/2}` at `ε = 0`.
pub fn rhs_sqrt(f: &ComplexField, epsilon: f64) -> RealField {
    let e2 = epsilon * epsilon;
    f.map(move |v| {
        if e2 == 0.0 {
            v.norm().sqrt()
        } else {
            (v.norm_sqr() + e2).sqrt().sqrt()
        }
    })
}

/// `|∂z̄f - |f|^{1/2}|` on the stencil interior and its supremum.
pub fn residual_dbar(f: &ComplexField) -> Result<(RealField, f64)> {
    let d = grid::wirtinger_dzbar(f)?;
    let r = d.zip_map(f, |dz, v| (dz - v.norm().sqrt()).norm());
    let sup = grid::masked_max(&r, |x| x)?;
    Ok((r, sup))
}

/// `f(z) = max(x - c, 0)²`, an exact solution that vanishes on `x ≤ c`.
pub fn profile_exact(c: f64, grid: GridSpec) -> ComplexField {
    ComplexField::sample(grid, move |z| {
        let t = (z.re - c).max(0.0);
        Complex64::new(t * t, 0.0)
    })
}

/// Solves `p` starting from the constant `b`.
pub fn picard_solve(p: &DbarProblem) -> Result<DbarSolution> {
    p.validate()?;
    let start = ComplexField::sample(p.grid, |_| p.b);
    picard_solve_from(p, start)
}

fn check_finite(f: &ComplexField, what: &str) -> Result<()> {
    if f.values().iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite(what.into()));
    }
    Ok(())
}

/// Width of the source taper outside `D_r`, in grid cells.
pub const TAPER_CELLS: usize = 8;

/// `C^∞` step: 1 on `t ≤ 0`, 0 on `t ≥ 1`.
fn smooth_step_down(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let psi = |s: f64| (-1.0 / s).exp();
    let a = psi(1.0 - t);
    a / (a + psi(t))
}

/// Internal solver grid: the problem grid padded by [`TAPER_CELLS`] nodes on
/// every side.
///
/// The midpoint-rule transform of a source with a jump at the disc edge is
/// not a right inverse of the centred `∂z̄` within a few cells of the jump.
/// The solver therefore multiplies the source by a smooth cut-off that is 1
/// on `D_r` and vanishes at `|z| = r + TAPER_CELLS·h`; the fixed point then
/// satisfies the equation on all of `D_r`.
struct SolverDomain {
    inner: GridSpec,
    outer: GridSpec,
    taper: Vec<f64>,
    support: Vec<bool>,
    plan: CauchyPlan,
}

impl SolverDomain {
    fn new(inner: GridSpec) -> Result<Self> {
        let h = inner.spacing();
        let r = inner.radius();
        let band = TAPER_CELLS as f64 * h;
        let outer = grid::make_grid(r + band, inner.resolution() + 2 * TAPER_CELLS)?;
        let taper: Vec<f64> = (0..outer.len())
            .map(|k| {
                let (i, j) = outer.ij(k);
                smooth_step_down((outer.node(i, j).norm() - r) / band)
            })
            .collect();
        let support = taper.iter().map(|&t| t > 0.0).collect();
        Ok(SolverDomain {
            inner,
            outer,
            taper,
            support,
            plan: CauchyPlan::new(outer),
        })
    }

    /// Pads an inner field by copying the nearest inner node.
    fn extend(&self, f: &ComplexField) -> Result<ComplexField> {
        let n = self.inner.resolution() as i64;
        let pad = TAPER_CELLS as i64;
        let values = (0..self.outer.len())
            .map(|k| {
                let (i, j) = self.outer.ij(k);
                let ii = (i as i64 - pad).clamp(0, n - 1) as usize;
                let jj = (j as i64 - pad).clamp(0, n - 1) as usize;
                f.at(ii, jj)
            })
            .collect();
        Field::from_parts(self.outer, 0.0, values, self.support.clone())
    }

    /// Restricts an outer field to the problem grid with the default mask.
    fn restrict(&self, f: &ComplexField) -> Result<ComplexField> {
        let n = self.inner.resolution();
        let mut values = Vec::with_capacity(self.inner.len());
        for j in 0..n {
            for i in 0..n {
                values.push(f.at(i + TAPER_CELLS, j + TAPER_CELLS));
            }
        }
        let margin = self.inner.default_margin();
        Field::from_parts(self.inner, margin, values, self.inner.disc_mask(margin))
    }

    /// One application of the fixed-point map at regularization `eps`.
    fn picard_map(&self, f: &ComplexField, eps: f64, p: &DbarProblem) -> Result<ComplexField> {
        let root = rhs_sqrt(f, eps);
        let values = root
            .values()
            .iter()
            .zip(&self.taper)
            .map(|(&v, &t)| Complex64::new(v * t, 0.0))
            .collect();
        let g = Field::from_parts(self.outer, 0.0, values, self.support.clone())?;
        let t = self.plan.apply(&g)?;
        let t = if p.holomorphic_degree == 1 {
            // ∂z = (∂x - i ∂y)/2 at the origin; subtracting a·z is exact for the stencil.
            let c = self.outer.center();
            let h = self.outer.spacing();
            let fx = (t.at(c + 1, c) - t.at(c - 1, c)) / (2.0 * h);
            let fy = (t.at(c, c + 1) - t.at(c, c - 1)) / (2.0 * h);
            let a = (fx - Complex64::i() * fy) * 0.5;
            t.map_with_node(move |z, v| v - a * z)
        } else {
            t
        };
        Ok(adjust_value_at_zero(&t, p.b))
    }
}

/// Solves `p` from a given initial field (same grid as the problem).
pub fn picard_solve_from(p: &DbarProblem, start: ComplexField) -> Result<DbarSolution> {
    p.validate()?;
    if start.grid() != &p.grid {
        return Err(Error::InvalidParameter("initial field is on a different grid".into()));
    }
    check_finite(&start, "initial field")?;
    let dom = SolverDomain::new(p.grid)?;
    let origin = dom.outer.index(dom.outer.center(), dom.outer.center());
    let mut f = dom.extend(&start)?;
    let mut history = Vec::new();
    let mut converged = false;

    // A start that is already a fixed point of the unregularized map (f ≡ 0
    // for b = 0) is kept as is; continuation would only move it away.
    let stages = {
        let probe = dom.picard_map(&f, 0.0, p)?;
        check_finite(&probe, "iterate")?;
        if masked_update(&f, &probe) <= p.tol && f.at_origin() == p.b {
            vec![0.0]
        } else {
            p.epsilon_schedule()
        }
    };

    for (s, &eps) in stages.iter().enumerate() {
        let last = s + 1 == stages.len();
        let mut stage_converged = false;
        for _ in 0..p.max_iter {
            let t = dom.picard_map(&f, eps, p)?;
            let mut values = f.zip_map(&t, |a, b| a * (1.0 - p.theta) + b * p.theta).into_values();
            values[origin] = p.b;
            let next = Field::from_parts(dom.outer, 0.0, values, dom.support.clone())?;
            check_finite(&next, "iterate")?;
            let update = masked_update(&f, &next);
            history.push(update);
            f = next;
            if update <= p.tol {
                stage_converged = true;
                break;
            }
        }
        if last {
            converged = stage_converged;
        }
    }

    let f = dom.restrict(&f)?;
    let (_, residual_sup) = residual_dbar(&f)?;
    let sup_f = grid::sup_norm(&f)?;
    Ok(DbarSolution {
        problem: *p,
        f,
        residual_sup,
        sup_f,
        converged,
        iterations: history.len(),
        update_history: history,
    })
}

fn masked_update(a: &ComplexField, b: &ComplexField) -> f64 {
    a.masked_indices()
        .map(|k| (a.values()[k] - b.values()[k]).norm())
        .fold(0.0, f64::max)
}

/// Resamples `f` from `D_r` onto the unit disc as `F(w) = r⁻² f(rw)`.
///
/// If `f` solves the equation on `D_r` then `F` solves it on `D₁`. The target
/// grid has the same resolution and the default margin; values are obtained
/// by bilinear interpolation.
pub fn rescale_solution(f: &ComplexField, r: f64) -> Result<ComplexField> {
    let src = *f.grid();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale radius must be positive, got {r}")));
    }
    if r > src.radius() * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "scale radius {r} exceeds the field's disc radius {}",
            src.radius()
        )));
    }
    let target = grid::make_grid(1.0, src.resolution())?;
    let n = src.resolution();
    let h = src.spacing();
    let c = src.center() as f64;
    let scale = 1.0 / (r * r);
    let vals = f.values();
    let lookup = |p: Complex64| -> Complex64 {
        let u = (p.re / h + c).clamp(0.0, (n - 1) as f64);
        let v = (p.im / h + c).clamp(0.0, (n - 1) as f64);
        let i0 = (u.floor() as usize).min(n - 2);
        let j0 = (v.floor() as usize).min(n - 2);
        let (tx, ty) = (u - i0 as f64, v - j0 as f64);
        let at = |i: usize, j: usize| vals[j * n + i];
        at(i0, j0) * ((1.0 - tx) * (1.0 - ty))
            + at(i0 + 1, j0) * (tx * (1.0 - ty))
            + at(i0, j0 + 1) * ((1.0 - tx) * ty)
            + at(i0 + 1, j0 + 1) * (tx * ty)
    };
    Ok(ComplexField::sample(target, |w| lookup(w * r) * scale))
}
