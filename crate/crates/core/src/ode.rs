//! The scalar model `g' = |g|^{1/2}`.
//!
//! From `g(0) = g₀ > 0` the forward solution is unique and equals
//! `(x/2 + √g₀)²`, so `g(1) = ¼ + √g₀ + g₀ > ¼`. From `g(0) = 0` uniqueness
//! fails: every `g_c = ((x - c)₊/2)²`, `c ≥ 0`, is a solution.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How a trajectory was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OdeMethod {
    Exact,
    Rk4,
    Family { c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeTrajectory {
    pub xs: Vec<f64>,
    pub gs: Vec<f64>,
    pub g0: f64,
    pub method: OdeMethod,
}

impl OdeTrajectory {
    /// Value at the last sample.
    pub fn end_value(&self) -> f64 {
        *self.gs.last().expect("trajectories are nonempty")
    }

    /// `x,g` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,g\n");
        for (x, g) in self.xs.iter().zip(&self.gs) {
            writeln!(s, "{x:.17e},{g:.17e}").expect("writing to a string");
        }
        s
    }
}

fn rhs(g: f64) -> f64 {
    g.abs().sqrt()
}

/// `(x/2 + √g₀)²`.
pub fn exact_forward(g0: f64, x: f64) -> Result<f64> {
    if !(g0 >= 0.0 && x >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exact_forward needs g0 >= 0 and x >= 0, got g0={g0}, x={x}"
        )));
    }
    let t = 0.5 * x + g0.sqrt();
    Ok(t * t)
}

/// Samples of the closed form at `steps + 1` equispaced points of `[0, 1]`.
pub fn exact_trajectory(g0: f64, steps: usize) -> Result<OdeTrajectory> {
    let xs = samples(steps);
    let gs = xs.iter().map(|&x| exact_forward(g0, x)).collect::<Result<_>>()?;
    Ok(OdeTrajectory {
        xs,
        gs,
        g0,
        method: OdeMethod::Exact,
    })
}

fn samples(steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| k as f64 / steps as f64).collect()
}

/// Minimum number of RK4 steps.
pub const MIN_STEPS: usize = 10;

/// Classical RK4 on `[0, 1]` with the unregularized right-hand side.
pub fn rk4_integrate(g0: f64, steps: usize) -> Result<OdeTrajectory> {
    if steps < MIN_STEPS {
        return Err(Error::InvalidParameter(format!(
            "rk4 needs at least {MIN_STEPS} steps, got {steps}"
        )));
    }
    if !g0.is_finite() {
        return Err(Error::NonFinite("g0".into()));
    }
    let h = 1.0 / steps as f64;
    let mut gs = Vec::with_capacity(steps + 1);
    let mut g = g0;
    gs.push(g);
    for _ in 0..steps {
        let k1 = rhs(g);
        let k2 = rhs(g + 0.5 * h * k1);
        let k3 = rhs(g + 0.5 * h * k2);
        let k4 = rhs(g + h * k3);
        g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        gs.push(g);
    }
    Ok(OdeTrajectory {
        xs: samples(steps),
        gs,
        g0,
        method: OdeMethod::Rk4,
    })
}

/// `g_c(x) = 0` for `x ≤ c` and `((x - c)/2)²` beyond.
pub fn nonuniq_family(c: f64, x: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::InvalidParameter(format!("family parameter must be >= 0, got {c}")));
    }
    let t = (x - c).max(0.0) * 0.5;
    Ok(t * t)
}

/// Samples of `g_c` on `[-1, 1]`.
pub fn family_trajectory(c: f64, steps: usize) -> Result<OdeTrajectory> {
    let xs: Vec<f64> = (0..=steps).map(|k| -1.0 + 2.0 * k as f64 / steps as f64).collect();
    let gs = xs.iter().map(|&x| nonuniq_family(c, x)).collect::<Result<_>>()?;
    Ok(OdeTrajectory {
        xs,
        gs,
        g0: 0.0,
        method: OdeMethod::Family { c },
    })
}

/// Largest centred-difference residual `|g' - |g|^{1/2}|` of `g_c` over the
/// sample points of `[-1, 1]` at least one step away from `x = c`.
pub fn family_fd_residual(c: f64, step: f64) -> Result<f64> {
    let n = (2.0 / step).round() as usize;
    let mut worst: f64 = 0.0;
    for k in 1..n {
        let x = -1.0 + k as f64 * step;
        if (x - c).abs() < step {
            continue;
        }
        let d = (nonuniq_family(c, x + step)? - nonuniq_family(c, x - step)?) / (2.0 * step);
        worst = worst.max((d - rhs(nonuniq_family(c, x)?)).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub holds: bool,
    /// `g(1) - ¼`.
    pub slack: f64,
    /// `√g₀ + g₀`, the closed form of the slack.
    pub closed_form: f64,
}

/// Checks `g(1) > ¼` for the forward solution from `g₀ > 0`.
pub fn lower_bound_check(g0: f64) -> Result<LowerBound> {
    if !(g0 > 0.0 && g0.is_finite()) {
        return Err(Error::InvalidParameter(format!("lower_bound_check needs g0 > 0, got {g0}")));
    }
    let slack = exact_forward(g0, 1.0)? - 0.25;
    Ok(LowerBound {
        holds: slack > 0.0,
        slack,
        closed_form: g0.sqrt() + g0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        assert!((exact_forward(0.01, 1.0).unwrap() - 0.36).abs() < 1e-15);
        assert_eq!(exact_forward(0.0, 1.0).unwrap(), 0.25);
        assert_eq!(exact_forward(0.25, 1.0).unwrap(), 1.0);
        assert!(exact_forward(-1.0, 1.0).is_err());
        assert!(exact_forward(1.0, -0.5).is_err());
    }

    #[test]
    fn rk4_matches_closed_form() {
        for (g0, want) in [(0.01, 0.36), (1.0, 2.25)] {
            let t = rk4_integrate(g0, 1000).unwrap();
            assert!((t.end_value() - want).abs() <= 1e-6);
            for (x, g) in t.xs.iter().zip(&t.gs) {
                assert!((g - exact_forward(g0, *x).unwrap()).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn rk4_from_zero_selects_a_solution() {
        let t = rk4_integrate(0.0, 1000).unwrap();
        let end = t.end_value();
        assert!((0.0..=0.25).contains(&end));
        assert!(rk4_integrate(0.1, 9).is_err());
    }

    #[test]
    fn family_values() {
        assert_eq!(nonuniq_family(0.5, 0.5).unwrap(), 0.0);
        assert_eq!(nonuniq_family(0.5, 1.0).unwrap(), 0.0625);
        assert!(nonuniq_family(-0.1, 1.0).is_err());
        let d = nonuniq_family(0.0, 1.0).unwrap() - nonuniq_family(0.9, 1.0).unwrap();
        assert!((d - 0.2475).abs() < 1e-15);
        assert_eq!(nonuniq_family(0.0, 0.0).unwrap(), nonuniq_family(0.9, 0.0).unwrap());
    }

    #[test]
    fn family_solves_the_equation() {
        let step = 1e-3;
        for c in [0.0, 0.3, 0.9] {
            assert!(family_fd_residual(c, step).unwrap() <= 2.0 * step);
        }
    }

    #[test]
    fn lower_bound_values() {
        let r = lower_bound_check(0.01).unwrap();
        assert!(r.holds);
        assert!((r.slack - 0.11).abs() < 1e-12);
        assert!((lower_bound_check(1.0).unwrap().slack - 2.0).abs() < 1e-12);
        assert!(lower_bound_check(0.0).is_err());
        assert!(lower_bound_check(1e-12).unwrap().slack > 0.0);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let t = exact_trajectory(0.01, 10).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("x,g\n"));
        assert_eq!(csv.lines().count(), 12);
    }

    proptest! {
        #[test]
        fn slack_matches_closed_form(g0 in 1e-9..100.0f64) {
            let r = lower_bound_check(g0).unwrap();
            prop_assert!(r.holds);
            prop_assert!((r.slack - r.closed_form).abs() <= 1e-12 * (1.0 + r.closed_form));
        }
    }
}
