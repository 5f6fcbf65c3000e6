//! Royden–Kobayashi pseudo-norm estimates on `(Ω, J)` for the tangent
//! vector `(1, 0)`.
//!
//! At the origin the disc `z ↦ (z, 0)` on `D₂` is `J`-holomorphic, so the
//! norm is at most `1/2`. At `(0, b)` with `b ≠ 0` a graph disc
//! `z ↦ (z, f(z))` on `D_r` needs `∂f/∂z̄ = |f|^{1/2}`, `f(0) = b` and
//! `|f| < 1/10`; [`radius_scan`] searches for the largest such `r`. A failed
//! solve is evidence rather than proof, so every lower bound derived from the
//! scan is flagged empirical.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acs::{jholo_residual, DiscMap, Point, OMEGA_R1, OMEGA_R2};
use crate::certify::{theorem2_chain, CertificateReport};
use crate::dbar::{picard_solve, rescale_solution, DbarProblem, DbarSolution};
use crate::grid::{make_grid, ComplexField};
use crate::{Error, Result};

/// Upper bound at the origin from the disc `z ↦ (z, 0)` on `D₂`.
pub const ORIGIN_UPPER_BOUND: f64 = 0.5;

/// Resolution of the certified origin witness.
pub const WITNESS_RESOLUTION: usize = 129;

/// Default scan radii: 16 geometric steps from 0.25 to 2.
pub fn default_radii() -> Vec<f64> {
    let (lo, hi, n) = (0.25f64, 2.0f64, 16);
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// Default anchors of the semicontinuity report: `{5·10⁻², 10⁻², 10⁻³} × {1, i}`.
pub fn default_b_list() -> Vec<Complex64> {
    let mut out = Vec::new();
    for m in [5e-2, 1e-2, 1e-3] {
        out.push(Complex64::new(m, 0.0));
        out.push(Complex64::new(0.0, m));
    }
    out
}

/// Moduli of the sweep that probes `sup|f| ≥ 1/10` on `D₁`.
pub const THEOREM2_SWEEP_MODULI: [f64; 4] = [1e-3, 1e-2, 5e-2, 1e-1];

/// `|b| ∈ THEOREM2_SWEEP_MODULI` in the two phases `1` and `i`.
pub fn theorem2_sweep_anchors() -> Vec<Complex64> {
    let mut out = Vec::new();
    for m in THEOREM2_SWEEP_MODULI {
        out.push(Complex64::new(m, 0.0));
        out.push(Complex64::new(0.0, m));
    }
    out
}

/// The certified bound at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginBound {
    pub bound: f64,
    /// Radius of the witness disc.
    pub radius: f64,
    /// Sup of the witness's `J`-holomorphy residual over interior nodes.
    pub residual_sup: f64,
    pub certified: bool,
    #[serde(skip)]
    pub witness: Option<DiscMap>,
}

/// `1/2`, witnessed by `z ↦ (z, 0)` on `D₂` with zero residual.
pub fn upper_bound_origin() -> Result<OriginBound> {
    let grid = make_grid(OMEGA_R1, WITNESS_RESOLUTION)?;
    let map = DiscMap::standard(grid)?;
    let (_, residual_sup) = jholo_residual(&map)?;
    Ok(OriginBound {
        bound: 1.0 / grid.radius(),
        radius: grid.radius(),
        residual_sup,
        certified: residual_sup == 0.0,
        witness: Some(map),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledWitness {
    pub t: f64,
    pub bound: f64,
    pub residual_sup: f64,
}

/// The disc `z ↦ (tz, 0)` on `D₁`, with derivative `t·(1, 0)` at the origin,
/// bounds the norm by `1/t`.
pub fn scaled_witness_bound(t: f64) -> Result<ScaledWitness> {
    if !(t > 0.0 && t <= OMEGA_R1) {
        return Err(Error::InvalidParameter(format!("scale must lie in (0, 2], got {t}")));
    }
    let grid = make_grid(1.0, WITNESS_RESOLUTION)?;
    let map = DiscMap::new(
        ComplexField::sample(grid, |z| z * t),
        ComplexField::sample(grid, |_| Complex64::new(0.0, 0.0)),
    )?;
    let (_, residual_sup) = jholo_residual(&map)?;
    Ok(ScaledWitness {
        t,
        bound: 1.0 / t,
        residual_sup,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureMode {
    SupBoundViolated,
    NonConvergence,
    None,
}

/// Outcome of one graph-disc solve on `D_r` with `f(0) = b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityRecord {
    pub radius: f64,
    pub b: Complex64,
    pub feasible: bool,
    pub converged: bool,
    pub residual_sup: f64,
    pub residual_gate: f64,
    pub sup_f: f64,
    pub iterations: usize,
    pub failure_mode: FailureMode,
    /// Certificate chain on the solution rescaled to `D₁`.
    pub theorem2: Option<CertificateReport>,
    /// Why the chain was not attached, if it was not.
    pub theorem2_note: Option<String>,
    #[serde(skip)]
    pub solution: Option<DbarSolution>,
}

impl FeasibilityRecord {
    /// Converged with the residual below the gate.
    pub fn certified(&self) -> bool {
        self.converged && self.residual_sup <= self.residual_gate
    }
}

fn check_anchor(b: Complex64) -> Result<()> {
    if !(b.re.is_finite() && b.im.is_finite()) {
        return Err(Error::NonFinite("anchor b".into()));
    }
    if b.norm() == 0.0 {
        return Err(Error::InvalidParameter("anchor b must be nonzero".into()));
    }
    if !Point::new(Complex64::new(0.0, 0.0), b).in_omega() {
        return Err(Error::OutsideDomain(format!("anchor {b} is not in D_(1/10)")));
    }
    Ok(())
}

/// Attempts the graph disc on `D_r` through `(0, b)`. `template` supplies
/// the resolution and solver settings; its radius and anchor are replaced.
pub fn graph_feasibility(r: f64, b: Complex64, template: &DbarProblem) -> Result<FeasibilityRecord> {
    check_anchor(b)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let grid = make_grid(r, template.grid.resolution())?;
    let problem = DbarProblem { grid, b, ..*template };
    let sol = picard_solve(&problem)?;
    let failure_mode = if !sol.passes_gate() {
        FailureMode::NonConvergence
    } else if sol.sup_f >= OMEGA_R2 {
        FailureMode::SupBoundViolated
    } else {
        FailureMode::None
    };

    let (theorem2, theorem2_note) = match chain_on_unit_disc(&sol) {
        Ok(rep) => (Some(rep), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(FeasibilityRecord {
        radius: r,
        b,
        feasible: failure_mode == FailureMode::None,
        converged: sol.converged,
        residual_sup: sol.residual_sup,
        residual_gate: sol.residual_gate(),
        sup_f: sol.sup_f,
        iterations: sol.iterations,
        failure_mode,
        theorem2,
        theorem2_note,
        solution: Some(sol),
    })
}

/// `F(w) = r⁻² f(rw)` on `D₁`, then the certificate chain.
fn chain_on_unit_disc(sol: &DbarSolution) -> Result<CertificateReport> {
    let r = sol.problem.grid.radius();
    let unit = if (r - 1.0).abs() <= 1e-12 {
        sol.clone()
    } else {
        let f = rescale_solution(&sol.f, r)?;
        let grid = *f.grid();
        let problem = DbarProblem {
            grid,
            b: sol.problem.b / (r * r),
            ..sol.problem
        };
        DbarSolution::from_field(problem, f, sol.converged)?
    };
    theorem2_chain(&unit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrEstimate {
    pub basepoint: Point,
    /// Tangent vector in real coordinates `(x₁, y₁, x₂, y₂)`.
    pub vector: [f64; 4],
    pub upper_bound: f64,
    pub records: Vec<FeasibilityRecord>,
    /// Largest feasible radius; the smallest scanned radius when none is
    /// feasible (see `none_feasible`).
    pub a_observed: f64,
    pub none_feasible: bool,
    pub feasible_count: usize,
    /// `1/a_observed`.
    pub lower_bound: f64,
    pub empirical: bool,
    /// No radius beyond a certified sup-bound violation is feasible.
    pub scan_consistent: bool,
}

/// Runs [`graph_feasibility`] at every radius, in parallel; records are kept
/// in the order of `radii`.
pub fn radius_scan(b: Complex64, radii: &[f64], template: &DbarProblem) -> Result<KrEstimate> {
    if radii.is_empty() {
        return Err(Error::InvalidParameter("radius list is empty".into()));
    }
    check_anchor(b)?;
    let records = radii
        .par_iter()
        .map(|&r| graph_feasibility(r, b, template))
        .collect::<Result<Vec<_>>>()?;

    let feasible: Vec<f64> = records.iter().filter(|r| r.feasible).map(|r| r.radius).collect();
    let none_feasible = feasible.is_empty();
    let a_observed = if none_feasible {
        radii.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        feasible.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };

    let mut order: Vec<&FeasibilityRecord> = records.iter().collect();
    order.sort_by(|a, b| a.radius.total_cmp(&b.radius));
    let first_violation = order
        .iter()
        .find(|r| r.failure_mode == FailureMode::SupBoundViolated && r.certified())
        .map(|r| r.radius);
    let scan_consistent = match first_violation {
        Some(r0) => order.iter().all(|r| r.radius <= r0 || !r.feasible),
        None => true,
    };

    Ok(KrEstimate {
        basepoint: Point::new(Complex64::new(0.0, 0.0), b),
        vector: [1.0, 0.0, 0.0, 0.0],
        upper_bound: ORIGIN_UPPER_BOUND,
        feasible_count: feasible.len(),
        records,
        a_observed,
        none_feasible,
        lower_bound: 1.0 / a_observed,
        empirical: true,
        scan_consistent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UscRow {
    pub b: Complex64,
    pub a_observed: f64,
    pub none_feasible: bool,
    pub lower_bound: f64,
    /// `lower_bound - origin_upper_bound`.
    pub gap: f64,
}

/// Norm at `((0,0),(1,0))` against the empirical lower bounds at
/// `((0,b),(1,0))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UscReport {
    pub origin_upper_bound: f64,
    pub origin_witness_residual: f64,
    pub rows: Vec<UscRow>,
    /// Every row has a strictly positive gap (false for an empty table).
    pub gap_positive: bool,
    pub empirical: bool,
    #[serde(skip)]
    pub estimates: Vec<KrEstimate>,
}

impl UscReport {
    /// Summary table: the origin row (upper bound) followed by one row per
    /// anchor (empirical lower bound and gap to the origin value). Without
    /// anchors there is nothing to compare and only the header is written.
    pub fn table_csv(&self) -> String {
        let mut s = String::from("b_re,b_im,kind,bound,gap\n");
        if self.rows.is_empty() {
            return s;
        }
        s.push_str(&format!("{:.17e},{:.17e},upper,{:.17e},\n", 0.0, 0.0, self.origin_upper_bound));
        for r in &self.rows {
            s.push_str(&format!(
                "{:.17e},{:.17e},lower,{:.17e},{:.17e}\n",
                r.b.re, r.b.im, r.lower_bound, r.gap
            ));
        }
        s
    }

    /// `b_re,b_im,r,feasible,sup_f,residual` for every scanned record.
    pub fn csv(&self) -> String {
        let mut s = String::from("b_re,b_im,r,feasible,sup_f,residual\n");
        for est in &self.estimates {
            for r in &est.records {
                s.push_str(&format!(
                    "{:.17e},{:.17e},{:.17e},{},{:.17e},{:.17e}\n",
                    r.b.re, r.b.im, r.radius, r.feasible, r.sup_f, r.residual_sup
                ));
            }
        }
        s
    }
}

pub fn usc_report(b_list: &[Complex64], radii: &[f64], template: &DbarProblem) -> Result<UscReport> {
    for &b in b_list {
        check_anchor(b)?;
    }
    let origin = upper_bound_origin()?;
    let estimates = b_list
        .iter()
        .map(|&b| radius_scan(b, radii, template))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<UscRow> = estimates
        .iter()
        .map(|e| UscRow {
            b: e.basepoint.z2,
            a_observed: e.a_observed,
            none_feasible: e.none_feasible,
            lower_bound: e.lower_bound,
            gap: e.lower_bound - origin.bound,
        })
        .collect();
    Ok(UscReport {
        origin_upper_bound: origin.bound,
        origin_witness_residual: origin.residual_sup,
        gap_positive: !rows.is_empty() && rows.iter().all(|r| r.gap > 0.0),
        rows,
        empirical: true,
        estimates,
    })
}

/// Solves on `D₁` for every anchor of [`theorem2_sweep_anchors`].
pub fn theorem2_sweep(template: &DbarProblem) -> Result<Vec<FeasibilityRecord>> {
    theorem2_sweep_anchors()
        .par_iter()
        .map(|&b| graph_feasibility(1.0, b, template))
        .collect()
}
