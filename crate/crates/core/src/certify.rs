//! Discrete certificates for the inequalities behind the sup-norm bound.
//!
//! * [`lemma1_check`]: `Δ(|h|^{3/4}) ≥ (3/4)|h|^{-1/4}` wherever `h` solves
//!   the equation and does not vanish.
//! * [`eq_chain_check`]: the polar-form identities for `g = h^{1/2} = ρe^{iφ}`,
//!   from `g_z̄ = ½(ḡ/g)^{1/2}` down to
//!   `ρ_x² + ρ_y² + 2ρΔρ = 1 + 3ρ²|∇φ|² ≥ 1`.
//! * [`lemma2_check`]: hypotheses, conclusion and maximum-principle structure
//!   for nonnegative `u` with `Δu ≥ 1` on `{u ≠ 0}`.
//! * [`theorem2_chain`]: the composition of the above on a solver output.
//!
//! Every report carries the minimum slack and the node where it is attained.
//! Minima are taken by row-major scans, first minimiser wins.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dbar::{residual_dbar, DbarSolution, RESIDUAL_GATE_CELLS};
use crate::grid::{self, polar_decompose, ComplexField, Field, RealField};
use crate::{Error, Result};

/// Default threshold below which a field counts as vanishing.
pub const DEFAULT_DELTA0: f64 = 1e-3;

/// Default multiplier of the `h²`-scaled inequality tolerances.
pub const DEFAULT_KAPPA: f64 = 10.0;

/// Slack allowed on the sup-norm bound `sup|f| ≥ 1/10` for discrete solutions.
pub const THEOREM2_TOLERANCE: f64 = 0.02;

/// The lower bound on `sup|f|` for solutions with `f(0) ≠ 0`.
pub const SUP_BOUND: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Lemma1,
    EqChain,
    Lemma2,
    Theorem2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Hypotheses hold and the conclusion holds within tolerance.
    Holds,
    /// Hypotheses hold but the conclusion fails beyond tolerance.
    Violated,
    /// The hypotheses could not be verified on this input.
    HypothesisFailed,
    /// The premise of the conclusion is absent (e.g. `u(0) = 0`).
    NotTriggered,
    /// The input is outside the statement's scope (e.g. `f(0) = 0`).
    NotApplicable,
}

/// A grid node, by index and position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
}

impl Witness {
    fn at<T>(f: &Field<T>, k: usize) -> Self
    where
        T: Copy + Send + Sync,
    {
        let (i, j) = f.grid().ij(k);
        let z = f.grid().node(i, j);
        Witness { i, j, x: z.re, y: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub kind: CertificateKind,
    pub hypothesis_ok: bool,
    pub verdict: Verdict,
    /// Minimum over the checked nodes of `LHS - RHS`.
    pub min_slack: f64,
    pub witness: Option<Witness>,
    pub checked_nodes: usize,
    pub tolerance_used: f64,
    /// Named auxiliary quantities (identity violations, chain constants, …).
    pub details: BTreeMap<String, f64>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Holds | Verdict::NotTriggered)
    }
}

/// Per-node tolerance `κ·h²·|Δ²u|`, where `Δ²u` is the five-point Laplacian
/// of the five-point Laplacian. Nodes too close to the mask edge for `Δ²u`
/// take the largest value found in their 3×3 neighbourhood, or the global
/// maximum when there is none. A rounding floor proportional to
/// `sup|u|/h²` is added so that exact quadratics are not flagged.
fn fd_tolerance(u: &RealField, lap: &RealField, kappa: f64) -> Vec<f64> {
    let grid = *lap.grid();
    let h2 = grid.spacing() * grid.spacing();
    let scale = u.values().iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 256.0 * f64::EPSILON * scale / h2;
    let n = grid.resolution();
    let bi = match grid::laplacian5(lap) {
        Ok(b) => b,
        Err(_) => return vec![floor; grid.len()],
    };
    let global = grid::masked_max(&bi, f64::abs).unwrap_or(0.0);
    (0..grid.len())
        .map(|k| {
            let local = if bi.mask()[k] {
                bi.values()[k].abs()
            } else {
                let (i, j) = grid.ij(k);
                let mut m: Option<f64> = None;
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let (ii, jj) = (i as i64 + di, j as i64 + dj);
                        if ii < 0 || jj < 0 || ii >= n as i64 || jj >= n as i64 {
                            continue;
                        }
                        let q = grid.index(ii as usize, jj as usize);
                        if bi.mask()[q] {
                            m = Some(m.map_or(bi.values()[q].abs(), |x: f64| x.max(bi.values()[q].abs())));
                        }
                    }
                }
                m.unwrap_or(global)
            };
            kappa * h2 * local + floor
        })
        .collect()
}

/// Options of [`lemma1_check_with`].
#[derive(Debug, Clone)]
pub struct Lemma1Options {
    pub delta0: f64,
    pub kappa: f64,
    /// Residual threshold of the "is a solution" gate; `None` means `5h`.
    pub residual_gate: Option<f64>,
    /// Further restriction of the checked nodes.
    pub region: Option<Vec<bool>>,
}

impl Default for Lemma1Options {
    fn default() -> Self {
        Lemma1Options {
            delta0: DEFAULT_DELTA0,
            kappa: DEFAULT_KAPPA,
            residual_gate: None,
            region: None,
        }
    }
}

/// `Δ(|h|^{3/4}) - (3/4)|h|^{-1/4} ≥ 0` on nodes where `|h| > delta0`.
pub fn lemma1_check(h: &ComplexField, delta0: f64) -> Result<CertificateReport> {
    lemma1_check_with(
        h,
        &Lemma1Options {
            delta0,
            ..Lemma1Options::default()
        },
    )
}

pub fn lemma1_check_with(h: &ComplexField, opts: &Lemma1Options) -> Result<CertificateReport> {
    let grid = *h.grid();
    let n = grid.resolution();
    let modulus = h.map(|v| v.norm());
    let u = modulus.map(|m| m.powf(0.75));
    let lap = grid::laplacian5(&u)?;
    let (residual, _) = residual_dbar(h)?;

    let nonvanishing = |k: usize| modulus.values()[k] > opts.delta0;
    let eligible: Vec<bool> = (0..grid.len())
        .map(|k| {
            lap.mask()[k]
                && nonvanishing(k)
                && nonvanishing(k + 1)
                && nonvanishing(k - 1)
                && nonvanishing(k + n)
                && nonvanishing(k - n)
                && opts.region.as_ref().is_none_or(|r| r[k])
        })
        .collect();
    let checked = eligible.iter().filter(|&&e| e).count();
    if checked == 0 {
        return Err(Error::NoEligibleNodes);
    }

    let gate = opts
        .residual_gate
        .unwrap_or(RESIDUAL_GATE_CELLS * grid.spacing());
    let residual_max = (0..grid.len())
        .filter(|&k| eligible[k])
        .map(|k| residual.values()[k])
        .fold(0.0, f64::max);
    let hypothesis_ok = residual_max <= gate;

    let tol = fd_tolerance(&u, &lap, opts.kappa);
    let slack = lap.zip_map(&modulus, |l, m| l - 0.75 * m.powf(-0.25));
    let slack = slack.with_mask(eligible.clone());
    let (wk, min_slack) = grid::masked_argmin(&slack, |_, s| s).expect("nonempty");
    let violated = (0..grid.len()).any(|k| eligible[k] && slack.values()[k] + tol[k] < 0.0);
    let worst_normalized = (0..grid.len())
        .filter(|&k| eligible[k])
        .map(|k| slack.values()[k] + tol[k])
        .fold(f64::INFINITY, f64::min);

    let verdict = if !hypothesis_ok {
        Verdict::HypothesisFailed
    } else if violated {
        Verdict::Violated
    } else {
        Verdict::Holds
    };
    let mut details = BTreeMap::new();
    details.insert("residual_max".into(), residual_max);
    details.insert("residual_gate".into(), gate);
    details.insert("min_slack_plus_tolerance".into(), worst_normalized);
    Ok(CertificateReport {
        kind: CertificateKind::Lemma1,
        hypothesis_ok,
        verdict,
        min_slack,
        witness: Some(Witness::at(&slack, wk)),
        checked_nodes: checked,
        tolerance_used: tol[wk],
        details,
    })
}

/// A square root `h^{1/2}` of a nonvanishing field, continuous on the mask
/// and fixed by the principal root at the origin.
pub fn sqrt_branch(h: &ComplexField) -> Result<ComplexField> {
    let c = h.grid().center();
    let polar = polar_decompose(h, (c, c))?;
    Ok(polar
        .rho
        .zip_map(&polar.phi, |r, p| Complex64::from_polar(r.sqrt(), 0.5 * p)))
}

/// Options of [`eq_chain_check_with`].
#[derive(Debug, Clone)]
pub struct EqChainOptions {
    /// Tolerance multiplier `κ` of `κ·h`.
    pub kappa: f64,
    pub region: Option<Vec<bool>>,
}

impl Default for EqChainOptions {
    fn default() -> Self {
        EqChainOptions {
            kappa: DEFAULT_KAPPA,
            region: None,
        }
    }
}

/// Polar identity chain for a nonvanishing `g = h^{1/2}`.
pub fn eq_chain_check(g: &ComplexField) -> Result<CertificateReport> {
    eq_chain_check_with(g, &EqChainOptions::default())
}

pub fn eq_chain_check_with(g: &ComplexField, opts: &EqChainOptions) -> Result<CertificateReport> {
    let grid = *g.grid();
    let c = grid.center();
    let polar = polar_decompose(g, (c, c))?;
    let (rho, phi) = (&polar.rho, &polar.phi);
    let rx = grid::partial_x(rho)?;
    let ry = grid::partial_y(rho)?;
    let px = grid::partial_x(phi)?;
    let py = grid::partial_y(phi)?;
    let lap = grid::laplacian5(rho)?;
    let gz = grid::wirtinger_dzbar(g)?;

    let checked_mask: Vec<bool> = (0..grid.len())
        .map(|k| lap.mask()[k] && opts.region.as_ref().is_none_or(|r| r[k]))
        .collect();
    let checked = checked_mask.iter().filter(|&&m| m).count();
    if checked == 0 {
        return Err(Error::NoEligibleNodes);
    }

    let mut worst = [0.0f64; 5];
    let mut min8 = f64::INFINITY;
    let mut wk = 0;
    for k in (0..grid.len()).filter(|&k| checked_mask[k]) {
        let (r, p) = (rho.values()[k], phi.values()[k]);
        let (rx, ry) = (rx.values()[k], ry.values()[k]);
        let (px, py) = (px.values()[k], py.values()[k]);
        let grad_phi2 = px * px + py * py;
        let cross = ry * px - rx * py;

        let e1 = (gz.values()[k] - Complex64::from_polar(0.5, -p)).norm();
        let e3 = (rx - r * py - (2.0 * p).cos()).abs();
        let e3p = (ry + r * px + (2.0 * p).sin()).abs();
        let e7 = (rx * rx + ry * ry + r * r * grad_phi2 + 2.0 * r * cross - 1.0).abs();
        let lhs8 = rx * rx + ry * ry + 2.0 * r * lap.values()[k];
        let e8 = (lhs8 - 1.0 - 3.0 * r * r * grad_phi2).abs();
        for (w, e) in worst.iter_mut().zip([e1, e3, e3p, e7, e8]) {
            *w = w.max(e);
        }
        let s8 = lhs8 - 1.0;
        if s8 < min8 {
            min8 = s8;
            wk = k;
        }
    }
    let tol = opts.kappa * grid.spacing();
    let worst_violation = worst.iter().copied().fold(0.0, f64::max);
    let verdict = if worst_violation > tol {
        Verdict::HypothesisFailed
    } else if min8 < -tol {
        Verdict::Violated
    } else {
        Verdict::Holds
    };
    let mut details = BTreeMap::new();
    for (name, w) in ["eq1", "eq3", "eq3_prime", "eq7", "eq8_identity"].iter().zip(worst) {
        details.insert(format!("violation_{name}"), w);
    }
    details.insert("worst_violation".into(), worst_violation);
    Ok(CertificateReport {
        kind: CertificateKind::EqChain,
        hypothesis_ok: worst_violation <= tol,
        verdict,
        min_slack: min8,
        witness: Some(Witness::at(rho, wk)),
        checked_nodes: checked,
        tolerance_used: tol,
        details,
    })
}

/// Options of [`lemma2_check_with`].
#[derive(Debug, Clone)]
pub struct Lemma2Options {
    pub delta0: f64,
    pub kappa: f64,
    /// Tolerance on nonnegativity of `u`.
    pub negativity_tol: f64,
}

impl Default for Lemma2Options {
    fn default() -> Self {
        Lemma2Options {
            delta0: DEFAULT_DELTA0,
            kappa: DEFAULT_KAPPA,
            negativity_tol: 1e-12,
        }
    }
}

pub fn lemma2_check(u: &RealField) -> Result<CertificateReport> {
    lemma2_check_with(u, &Lemma2Options::default())
}

/// Hypotheses, conclusion `sup u > 1/4` and the maximum-principle structure
/// for `v = u - ¼|z|²` on the support `{u > delta0}`.
///
/// The supremum is taken over all grid nodes of the closed disc `|z| ≤ r`
/// with finite values; the differential hypotheses over the stencil interior
/// of the mask.
pub fn lemma2_check_with(u: &RealField, opts: &Lemma2Options) -> Result<CertificateReport> {
    let grid = *u.grid();
    let n = grid.resolution();
    if let Some(k) = u.masked_indices().find(|&k| !(u.values()[k] >= -opts.negativity_tol)) {
        let (i, j) = grid.ij(k);
        return Err(Error::InvalidParameter(format!(
            "u is negative ({}) at node ({i}, {j})",
            u.values()[k]
        )));
    }
    let lap = grid::laplacian5(u)?;
    let tol = fd_tolerance(u, &lap, opts.kappa);
    let interior = lap.mask();
    let support: Vec<bool> = (0..grid.len())
        .map(|k| interior[k] && u.values()[k] > opts.delta0)
        .collect();

    // Subharmonicity everywhere, Δu ≥ 1 on the support.
    let mut sub_min = f64::INFINITY;
    let mut sub_ok = true;
    let mut supp_min = f64::INFINITY;
    let mut supp_ok = true;
    let mut wk = None;
    for k in (0..grid.len()).filter(|&k| interior[k]) {
        let l = lap.values()[k];
        sub_min = sub_min.min(l);
        sub_ok &= l >= -tol[k];
        if support[k] {
            let s = l - 1.0;
            if s < supp_min {
                supp_min = s;
                wk = Some(k);
            }
            supp_ok &= s >= -tol[k];
        }
    }
    let hypothesis_ok = sub_ok && supp_ok;

    let disc = grid.disc_mask(0.0);
    let sup_u = (0..grid.len())
        .filter(|&k| (disc[k] || u.mask()[k]) && u.values()[k].is_finite())
        .map(|k| u.values()[k])
        .fold(f64::NEG_INFINITY, f64::max);
    let conclusion_slack = sup_u - 0.25;
    let u0 = u.at_origin();
    let triggered = u0 > 0.0;

    // v = u - ¼|z|² on the support and on its discrete boundary.
    let v = |k: usize| {
        let (i, j) = grid.ij(k);
        u.values()[k] - 0.25 * grid.node(i, j).norm_sqr()
    };
    let mut v_in = f64::NEG_INFINITY;
    let mut v_bd = f64::NEG_INFINITY;
    let mut v_lap_min = f64::INFINITY;
    for k in (0..grid.len()).filter(|&k| support[k]) {
        v_in = v_in.max(v(k));
        v_lap_min = v_lap_min.min(lap.values()[k] - 1.0);
        for q in [k + 1, k - 1, k + n, k - n] {
            if !support[q] {
                v_bd = v_bd.max(v(q));
            }
        }
    }
    let concl_tol = opts.kappa * grid.spacing() * grid.spacing();

    let mut details = BTreeMap::new();
    details.insert("subharmonic_min_laplacian".into(), sub_min);
    details.insert("support_min_laplacian_minus_one".into(), supp_min);
    details.insert("sup_u".into(), sup_u);
    details.insert("u_origin".into(), u0);
    details.insert("conclusion_slack".into(), conclusion_slack);
    details.insert("support_nodes".into(), support.iter().filter(|&&s| s).count() as f64);
    if v_in.is_finite() {
        details.insert("v_origin".into(), v(grid.index(grid.center(), grid.center())));
        details.insert("v_max_support".into(), v_in);
        details.insert("v_min_laplacian".into(), v_lap_min);
    }
    if v_bd.is_finite() {
        details.insert("v_max_boundary".into(), v_bd);
        // Discrete maximum principle: max over the support is attained on its boundary.
        details.insert(
            "max_principle_consistent".into(),
            f64::from(u8::from(v_in <= v_bd + concl_tol || v_lap_min < 0.0)),
        );
    }

    let verdict = if !hypothesis_ok {
        Verdict::HypothesisFailed
    } else if !triggered {
        Verdict::NotTriggered
    } else if conclusion_slack > -concl_tol {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    let (min_slack, witness, tolerance_used) = if triggered {
        let k = (0..grid.len())
            .filter(|&k| (disc[k] || u.mask()[k]) && u.values()[k].is_finite())
            .fold(None, |best: Option<usize>, k| match best {
                Some(b) if u.values()[b] >= u.values()[k] => Some(b),
                _ => Some(k),
            });
        (conclusion_slack, k.map(|k| Witness::at(u, k)), concl_tol)
    } else {
        let k = wk.unwrap_or_else(|| grid.index(grid.center(), grid.center()));
        (sub_min, Some(Witness::at(u, k)), tol[k])
    };
    Ok(CertificateReport {
        kind: CertificateKind::Lemma2,
        hypothesis_ok,
        verdict,
        min_slack,
        witness,
        checked_nodes: interior.iter().filter(|&&m| m).count(),
        tolerance_used,
        details,
    })
}

/// Composes the lemmas on a solver output on the unit disc: if
/// `sup|f| < 1/10` the first lemma gives `Δ(|f|^{3/4}) ≥ (3/4)·10^{1/4} ≥ 1`
/// off the zero set, the second then forces `sup|f|^{3/4} ≥ 1/4`, a
/// contradiction; so `sup|f| ≥ 1/10` must hold. The verdict is checked
/// against the solution's own `sup_f` with slack [`THEOREM2_TOLERANCE`].
pub fn theorem2_chain(sol: &DbarSolution) -> Result<CertificateReport> {
    let grid = sol.f.grid();
    if (grid.radius() - 1.0).abs() > 1e-12 {
        return Err(Error::GateFailure(format!(
            "solution lives on D_{}; rescale to the unit disc first",
            grid.radius()
        )));
    }
    if !sol.converged {
        return Err(Error::GateFailure("solution did not converge".into()));
    }
    if sol.residual_sup > sol.residual_gate() {
        return Err(Error::GateFailure(format!(
            "residual {:.3e} exceeds the gate {:.3e}",
            sol.residual_sup,
            sol.residual_gate()
        )));
    }
    let f0 = sol.f.at_origin();
    let mut details = BTreeMap::new();
    details.insert("sup_f".into(), sol.sup_f);
    details.insert("f0_abs".into(), f0.norm());
    details.insert("residual_sup".into(), sol.residual_sup);
    let lemma1_constant = 0.75 * 10f64.powf(0.25);
    details.insert("lemma1_lower_constant".into(), lemma1_constant);
    details.insert("implied_sup_bound".into(), 0.25f64.powf(4.0 / 3.0));

    if f0.norm() == 0.0 {
        return Ok(CertificateReport {
            kind: CertificateKind::Theorem2,
            hypothesis_ok: false,
            verdict: Verdict::NotApplicable,
            min_slack: sol.sup_f - SUP_BOUND,
            witness: None,
            checked_nodes: sol.f.masked_count(),
            tolerance_used: THEOREM2_TOLERANCE,
            details,
        });
    }

    if let Ok(l1) = lemma1_check(&sol.f, DEFAULT_DELTA0) {
        details.insert("lemma1_min_slack".into(), l1.min_slack);
        details.insert("lemma1_holds".into(), f64::from(u8::from(l1.verdict == Verdict::Holds)));
    }
    let u = sol.f.map(|v| v.norm().powf(0.75));
    if let Ok(l2) = lemma2_check(&u) {
        if let Some(&s) = l2.details.get("conclusion_slack") {
            details.insert("lemma2_conclusion_slack".into(), s);
        }
    }

    let slack = sol.sup_f - SUP_BOUND;
    let k = sol
        .f
        .masked_indices()
        .fold(None, |best: Option<usize>, k| match best {
            Some(b) if sol.f.values()[b].norm() >= sol.f.values()[k].norm() => Some(b),
            _ => Some(k),
        });
    Ok(CertificateReport {
        kind: CertificateKind::Theorem2,
        hypothesis_ok: true,
        verdict: if slack >= -THEOREM2_TOLERANCE {
            Verdict::Holds
        } else {
            Verdict::Violated
        },
        min_slack: slack,
        witness: k.map(|k| Witness::at(&sol.f, k)),
        checked_nodes: sol.f.masked_count(),
        tolerance_used: THEOREM2_TOLERANCE,
        details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dbar::{picard_solve, profile_exact, DbarProblem};
    use crate::grid::make_grid;

    fn half_plane(grid: &grid::GridSpec, x_min: f64) -> Vec<bool> {
        (0..grid.len())
            .map(|k| {
                let (i, _) = grid.ij(k);
                grid.coord(i) > x_min
            })
            .collect()
    }

    #[test]
    fn lemma1_is_sharp_on_the_profile() {
        let g = make_grid(1.0, 129).unwrap();
        let h = g.spacing();
        let f = profile_exact(-1.0, g);
        let r = lemma1_check_with(
            &f,
            &Lemma1Options {
                region: Some(half_plane(&g, -0.5)),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.min_slack.abs() <= 10.0 * h * h, "{}", r.min_slack);
    }

    #[test]
    fn lemma1_gate_rejects_constants() {
        let g = make_grid(1.0, 65).unwrap();
        let f = ComplexField::sample(g, |_| Complex64::new(0.05, 0.0));
        let r = lemma1_check(&f, DEFAULT_DELTA0).unwrap();
        assert!(!r.hypothesis_ok);
        assert_eq!(r.verdict, Verdict::HypothesisFailed);
        // The inequality itself fails too: Δ const = 0 < RHS.
        assert!(r.min_slack < 0.0);
    }

    #[test]
    fn lemma1_without_eligible_nodes() {
        let g = make_grid(1.0, 33).unwrap();
        let f = ComplexField::sample(g, |_| Complex64::new(0.0, 0.0));
        assert!(matches!(lemma1_check(&f, DEFAULT_DELTA0), Err(Error::NoEligibleNodes)));
    }

    #[test]
    fn eq_chain_on_linear_branch() {
        let g = make_grid(1.0, 129).unwrap();
        let branch = ComplexField::sample(g, |z| Complex64::new(z.re + 1.0, 0.0));
        let r = eq_chain_check_with(
            &branch,
            &EqChainOptions {
                region: Some(half_plane(&g, -0.5)),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.details["worst_violation"] < 1e-12);
        assert!(r.min_slack.abs() < 1e-12);
    }

    #[test]
    fn eq_chain_flags_constant_unit_field() {
        let g = make_grid(1.0, 33).unwrap();
        let branch = ComplexField::sample(g, |_| Complex64::from_polar(1.0, 0.7));
        let r = eq_chain_check(&branch).unwrap();
        assert!((r.details["violation_eq1"] - 0.5).abs() < 1e-12);
        assert!(!r.hypothesis_ok);
    }

    #[test]
    fn lemma2_on_paraboloid() {
        let g = make_grid(1.0, 129).unwrap();
        let h = g.spacing();
        let u = RealField::sample(g, |z| 0.25 * z.norm_sqr() + 0.01);
        let r = lemma2_check(&u).unwrap();
        assert!(r.hypothesis_ok);
        assert_eq!(r.verdict, Verdict::Holds);
        assert!((r.min_slack - 0.01).abs() <= 10.0 * h * h);
        assert_eq!(r.details["max_principle_consistent"], 1.0);
        assert!(r.details["v_max_boundary"] > 0.0);
    }

    #[test]
    fn lemma2_zero_is_not_triggered() {
        let g = make_grid(1.0, 33).unwrap();
        let r = lemma2_check(&RealField::sample(g, |_| 0.0)).unwrap();
        assert!(r.hypothesis_ok);
        assert_eq!(r.verdict, Verdict::NotTriggered);
        assert!(r.min_slack.is_finite());
    }

    #[test]
    fn lemma2_rejects_negative_input() {
        let g = make_grid(1.0, 33).unwrap();
        assert!(lemma2_check(&RealField::sample(g, |z| z.re)).is_err());
    }

    #[test]
    fn lemma2_detects_weak_laplacian() {
        let g = make_grid(1.0, 33).unwrap();
        let r = lemma2_check(&RealField::sample(g, |z| 0.1 * z.norm_sqr() + 0.01)).unwrap();
        assert!(!r.hypothesis_ok);
        assert_eq!(r.verdict, Verdict::HypothesisFailed);
    }

    #[test]
    fn chain_on_profile_with_zero_at_origin() {
        let g = make_grid(1.0, 129).unwrap();
        let sol = DbarSolution::from_field(DbarProblem::new(g, Complex64::new(0.0, 0.0)), profile_exact(0.0, g), true)
            .unwrap();
        let r = theorem2_chain(&sol).unwrap();
        assert_eq!(r.verdict, Verdict::NotApplicable);
    }

    #[test]
    fn chain_on_solver_output() {
        let g = make_grid(1.0, 65).unwrap();
        let sol = picard_solve(&DbarProblem::new(g, Complex64::new(0.05, 0.0))).unwrap();
        assert!(sol.converged);
        let r = theorem2_chain(&sol).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.details["sup_f"], sol.sup_f);
        assert!(r.min_slack >= -THEOREM2_TOLERANCE);
    }

    #[test]
    fn chain_rejects_other_discs_and_gate_failures() {
        let g = make_grid(0.5, 65).unwrap();
        let sol = picard_solve(&DbarProblem::new(g, Complex64::new(0.05, 0.0))).unwrap();
        assert!(matches!(theorem2_chain(&sol), Err(Error::GateFailure(_))));
        let g = make_grid(1.0, 65).unwrap();
        let not_solution =
            DbarSolution::from_field(DbarProblem::new(g, Complex64::new(0.05, 0.0)), ComplexField::sample(g, |_| Complex64::new(0.05, 0.0)), true)
                .unwrap();
        assert!(matches!(theorem2_chain(&not_solution), Err(Error::GateFailure(_))));
    }
}
