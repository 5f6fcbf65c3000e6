//! The invariant suite run by `dbarlab selftest` and by the acceptance test
//! target. Every check is deterministic: random inputs come from seeded
//! generators, reductions are sequential, and wall-clock times are kept out
//! of the serialized results.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::acs::{graph_map, j_at, jholo_residual, reduction_identity, DiscMap, Point};
use crate::cauchy::{cauchy_transform, cauchy_transform_direct};
use crate::certify::{eq_chain_check, lemma1_check_with, lemma2_check, Lemma1Options, Verdict};
use crate::dbar::{profile_exact, residual_dbar, DbarProblem};
use crate::grid::{make_grid, ComplexField, Field, GridSpec, RealField};
use crate::kr::{default_radii, theorem2_sweep, upper_bound_origin, usc_report, ORIGIN_UPPER_BOUND};
use crate::ode::{exact_forward, family_fd_residual, lower_bound_check, rk4_integrate};
use crate::Result;

/// Knobs of the suite; the defaults are the acceptance settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Resolution of the sup-bound sweep on the unit disc.
    pub sweep_resolution: usize,
    /// Resolution of the radius scan.
    pub scan_resolution: usize,
    /// Number of structure samples for `J² = -I`.
    pub j_samples: usize,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            seed: 20_240_601,
            sweep_resolution: 257,
            scan_resolution: 129,
            j_samples: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    /// Measured quantities and the thresholds they were held to.
    pub values: BTreeMap<String, f64>,
    pub note: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionResult {
    fn new(id: u32, name: &str) -> Self {
        CriterionResult {
            id,
            name: name.into(),
            passed: false,
            values: BTreeMap::new(),
            note: String::new(),
            elapsed: Duration::ZERO,
        }
    }

    fn set(&mut self, key: &str, v: f64) {
        self.values.insert(key.into(), v);
    }

    /// One table line: `PASS  3 lemma1_sharpness  min_slack=… `.
    pub fn line(&self) -> String {
        let vals: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
        format!(
            "{} {:>2} {:<24} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            vals.join(" ")
        )
    }
}

fn timed(mut f: impl FnMut() -> Result<CriterionResult>) -> Result<CriterionResult> {
    let t = Instant::now();
    let mut r = f()?;
    r.elapsed = t.elapsed();
    Ok(r)
}

/// Random masked field with `sup|f| < 1/10`: independent node values when
/// `rough`, otherwise a random trigonometric sum.
fn random_small_field(grid: GridSpec, rng: &mut StdRng, rough: bool) -> ComplexField {
    let margin = grid.default_margin();
    if rough {
        let values = (0..grid.len())
            .map(|_| Complex64::from_polar(rng.gen_range(0.0..0.099), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        return Field::from_parts(grid, margin, values, grid.disc_mask(margin)).expect("matching sizes");
    }
    let terms: Vec<(f64, f64, f64, Complex64)> = (0..6)
        .map(|_| {
            (
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
                Complex64::from_polar(rng.gen_range(0.0..0.016), rng.gen_range(0.0..std::f64::consts::TAU)),
            )
        })
        .collect();
    ComplexField::from_fn(grid, margin, move |z| {
        terms
            .iter()
            .map(|&(kx, ky, p, a)| a * (kx * z.re + ky * z.im + p).cos())
            .sum()
    })
}

/// Reduction of graph discs to the scalar equation, on 20 random fields.
pub fn criterion_1(opts: &SelftestOptions) -> Result<CriterionResult> {
    timed(|| {
        let mut r = CriterionResult::new(1, "reduction_identity");
        let grid = make_grid(1.0, 129)?;
        let mut rng = StdRng::seed_from_u64(opts.seed);
        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let f = random_small_field(grid, &mut rng, k % 2 == 1);
            worst = worst.max(reduction_identity(&f)?);
        }
        r.set("max_discrepancy", worst);
        r.set("tolerance", 1e-10);
        r.passed = worst <= 1e-10;
        Ok(r)
    })
    .map(|mut r| {
        let secs = r.elapsed.as_secs_f64();
        if secs >= 10.0 {
            r.passed = false;
            r.note = format!("runtime {secs:.1}s exceeds 10s");
        }
        r
    })
}

/// Residual of `max(x - c, 0)²` on nodes at least three spacings from the
/// line `x = c`, and its scaling between the two resolutions.
fn profile_far_residual(c: f64, n: usize) -> Result<(f64, f64)> {
    let grid = make_grid(1.0, n)?;
    let h = grid.spacing();
    let (res, _) = residual_dbar(&profile_exact(c, grid))?;
    let sup = res
        .masked_indices()
        .filter(|&k| (grid.coord(grid.ij(k).0) - c).abs() >= 3.0 * h - 1e-12)
        .map(|k| res.values()[k])
        .fold(0.0, f64::max);
    Ok((sup, h))
}

/// Residual across the transition line for grid-aligned `c`, where it is
/// exactly `h/4` at the node on the line.
fn profile_band_residual(c: f64, n: usize) -> Result<f64> {
    let grid = make_grid(1.0, n)?;
    let (_, sup) = residual_dbar(&profile_exact(c, grid))?;
    Ok(sup)
}

/// Exact family: residual `≤ 2h` away from the transition line, halving
/// from N=129 to N=257 (or rounding-level on both grids).
pub fn criterion_2(_opts: &SelftestOptions) -> Result<CriterionResult> {
    timed(|| {
        let mut r = CriterionResult::new(2, "exact_family_residual");
        let mut ok = true;
        for (tag, c) in [("m0.5", -0.5), ("0", 0.0), ("0.3", 0.3)] {
            let (s1, h1) = profile_far_residual(c, 129)?;
            let (s2, h2) = profile_far_residual(c, 257)?;
            let bound_ok = s1 <= 2.0 * h1 && s2 <= 2.0 * h2;
            let rounding = s1 <= 1e-12 && s2 <= 1e-12;
            let ratio = if s1 > 0.0 { s2 / s1 } else { 0.0 };
            let halves = rounding || (0.375..=0.625).contains(&ratio);
            r.set(&format!("c{tag}_sup_129"), s1);
            r.set(&format!("c{tag}_sup_257"), s2);
            ok &= bound_ok && halves;
        }
        // The transition band carries the O(h) part of the error.
        for (tag, c) in [("m0.5", -0.5), ("0", 0.0)] {
            let b1 = profile_band_residual(c, 129)?;
            let b2 = profile_band_residual(c, 257)?;
            r.set(&format!("band_c{tag}_ratio"), b2 / b1);
            ok &= (0.375..=0.625).contains(&(b2 / b1));
        }
        r.passed = ok;
        r.note = "off the line the residual is rounding-level; halving is checked on the transition band".into();
        Ok(r)
    })
}

fn half_plane(grid: &GridSpec, x_min: f64) -> Vec<bool> {
    (0..grid.len()).map(|k| grid.coord(grid.ij(k).0) > x_min).collect()
}

/// Sharpness of the first lemma on `(x + 1)²`.
pub fn criterion_3(_opts: &SelftestOptions) -> Result<CriterionResult> {
    timed(|| {
        let mut r = CriterionResult::new(3, "lemma1_sharpness");
        let grid = make_grid(1.0, 257)?;
        let h = grid.spacing();
        let rep = lemma1_check_with(
            &profile_exact(-1.0, grid),
            &Lemma1Options {
                region: Some(half_plane(&grid, -0.5)),
                ..Default::default()
            },
        )?;
        r.set("min_slack", rep.min_slack);
        r.set("tolerance", 10.0 * h * h);
        r.passed = rep.min_slack.abs() <= 10.0 * h * h;
        Ok(r)
    })
}

/// Polar identities on the branch `g = x + 1`.
pub fn criterion_4(_opts: &SelftestOptions) -> Result<CriterionResult> {
    timed(|| {
        let mut r = CriterionResult::new(4, "identity_chain");
        let grid = make_grid(1.0, 257)?;
        let h = grid.spacing();
        let g = ComplexField::sample(grid, |z| Complex64::new(z.re + 1.0, 0.0));
        let rep = eq_chain_check(&g)?;
        let worst = rep.details["worst_violation"];
        r.set("worst_violation", worst);
        r.set("slack8", rep.min_slack);
        r.set("tolerance", 10.0 * h);
        r.passed = worst <= 10.0 * h && rep.min_slack >= -10.0 * h;
        Ok(r)
    })
}

/// Second lemma on a paraboloid and on zero.
pub fn criterion_5(_opts: &SelftestOptions) -> Result<CriterionResult> {
    timed(|| {
        let mut r = CriterionResult::new(5, "lemma2");
        let grid = make_grid(1.0, 257)?;
        let h = grid.spacing();
        let u = RealField::sample(grid, |z| 0.25 * z.norm_sqr() + 0.01);
        let rep = lemma2_check(&u)?;
        let zero = lemma2_check(&RealField::sample(grid, |_| 0.0))?;
        r.set("conclusion_slack", rep.min_slack);
        r.set("tolerance", 10.0 * h * h);
        r.passed = rep.hypothesis_ok
            && rep.verdict == Verdict::Holds
            && (rep.min_slack - 0.01).abs() <= 10.0 * h * h
            && zero.verdict == Verdict::NotTriggered;
        r.note = format!("zero field verdict: {:?}", zero.verdict);
        Ok(r)
    })
}

/// No certified solution on `D₁` has `sup|f| < 1/10 - 0.02`.
pub fn criterion_6(opts: &SelftestOptions) -> Result<CriterionResult> {
    timed(|| {
        let mut r = CriterionResult::new(6, "sup_bound_sweep");
        let template = DbarProblem::new(make_grid(1.0, opts.sweep_resolution)?, Complex64::new(0.05, 0.0));
        let records = theorem2_sweep(&template)?;
        let certified = records.iter().filter(|x| x.certified()).count();
        let offenders = records
            .iter()
            .filter(|x| x.certified() && x.sup_f < 0.1 - 0.02)
            .count();
        let min_sup = records
            .iter()
            .filter(|x| x.certified())
            .map(|x| x.sup_f)
            .fold(f64::INFINITY, f64::min);
        r.set("records", records.len() as f64);
        r.set("certified", certified as f64);
        r.set("offenders", offenders as f64);
        if min_sup.is_finite() {
            r.set("min_certified_sup_f", min_sup);
        }
        r.passed = offenders == 0;
        Ok(r)
    })
    .map(|mut r| {
        let secs = r.elapsed.as_secs_f64();
        if secs >= 1800.0 {
            r.passed = false;
            r.note = format!("runtime {secs:.1}s exceeds 30 min");
        }
        r
    })
}

fn conj_error(n: usize) -> Result<f64> {
    let grid = make_grid(1.0, n)?;
    let t = cauchy_transform(&ComplexField::sample(grid, |_| Complex64::new(1.0, 0.0)))?;
    let mut e: f64 = 0.0;
    for k in 0..grid.len() {
        let (i, j) = grid.ij(k);
        let z = grid.node(i, j);
        if z.norm() <= 0.8 {
            e = e.max((t.values()[k] - z.conj()).norm());
        }
    }
    Ok(e)
}

/// Transform of the disc indicator, and agreement of the two paths.
pub fn criterion_7(opts: &SelftestOptions) -> Result<CriterionResult> {
    timed(|| {
        let mut r = CriterionResult::new(7, "cauchy_transform");
        let errs = [conj_error(65)?, conj_error(129)?, conj_error(257)?];
        let grid = make_grid(1.0, 65)?;
        let mut rng = StdRng::seed_from_u64(opts.seed ^ 7);
        let g = random_small_field(grid, &mut rng, true).map(|v| v * 10.0);
        let fast = cauchy_transform(&g)?;
        let direct = cauchy_transform_direct(&g)?;
        let diff = fast
            .values()
            .iter()
            .zip(direct.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        r.set("conj_err_65", errs[0]);
        r.set("conj_err_129", errs[1]);
        r.set("conj_err_257", errs[2]);
        r.set("fast_vs_direct_65", diff);
        r.passed = errs[1] <= 0.05 && errs[2] < errs[1] && errs[1] < errs[0] && diff <= 1e-10;
        Ok(r)
    })
}

/// The scalar model.
pub fn criterion_8(_opts: &SelftestOptions) -> Result<CriterionResult> {
    timed(|| {
        let mut r = CriterionResult::new(8, "ode");
        let mut ok = true;
        for g0 in [0.01, 1.0] {
            let err = (rk4_integrate(g0, 1000)?.end_value() - exact_forward(g0, 1.0)?).abs();
            let lb = lower_bound_check(g0)?;
            let slack_err = (lb.slack - (g0.sqrt() + g0)).abs();
            r.set(&format!("rk4_err_g0_{g0}"), err);
            r.set(&format!("slack_err_g0_{g0}"), slack_err);
            ok &= err <= 1e-6 && slack_err <= 1e-12 && lb.holds;
        }
        let step = 1e-3;
        for c in [0.0, 0.3, 0.9] {
            let res = family_fd_residual(c, step)?;
            r.set(&format!("family_residual_c{c}"), res);
            ok &= res <= 2.0 * step;
        }
        r.passed = ok;
        Ok(r)
    })
}

/// `J² = -I`, the exact origin witness and the bound it certifies.
pub fn criterion_9(opts: &SelftestOptions) -> Result<CriterionResult> {
    timed(|| {
        let mut r = CriterionResult::new(9, "structure_checks");
        let mut rng = StdRng::seed_from_u64(opts.seed ^ 9);
        let mut worst: f64 = 0.0;
        for _ in 0..opts.j_samples {
            let z1 = Complex64::from_polar(2.0 * rng.gen::<f64>().sqrt() * 0.999_999, rng.gen_range(0.0..std::f64::consts::TAU));
            let z2 = Complex64::from_polar(0.1 * rng.gen::<f64>().sqrt() * 0.999_999, rng.gen_range(0.0..std::f64::consts::TAU));
            worst = worst.max(j_at(Point::new(z1, z2))?.square_defect());
        }
        let standard = DiscMap::standard(make_grid(1.0, 129)?)?;
        let (_, std_res) = jholo_residual(&standard)?;
        let origin = upper_bound_origin()?;
        r.set("j_square_defect", worst);
        r.set("standard_disc_residual", std_res);
        r.set("origin_bound", origin.bound);
        r.set("origin_witness_residual", origin.residual_sup);
        r.passed = worst <= 1e-14
            && std_res == 0.0
            && origin.bound == ORIGIN_UPPER_BOUND
            && origin.certified;
        // The zero graph reduces to the same standard disc.
        let zero = ComplexField::sample(make_grid(1.0, 33)?, |_| Complex64::new(0.0, 0.0));
        let (_, zr) = jholo_residual(&graph_map(&zero)?)?;
        r.passed &= zr == 0.0;
        Ok(r)
    })
}

/// Strict gap between the origin bound and the scanned lower bound at `b = 0.05`.
pub fn criterion_10(opts: &SelftestOptions) -> Result<CriterionResult> {
    timed(|| {
        let mut r = CriterionResult::new(10, "usc_gap");
        let template = DbarProblem::new(make_grid(1.0, opts.scan_resolution)?, Complex64::new(0.05, 0.0));
        let rep = usc_report(&[Complex64::new(0.05, 0.0)], &default_radii(), &template)?;
        let est = &rep.estimates[0];
        r.set("a_observed", est.a_observed);
        r.set("lower_bound", est.lower_bound);
        r.set("origin_upper_bound", rep.origin_upper_bound);
        r.set("feasible_count", est.feasible_count as f64);
        r.passed = est.a_observed < 2.0
            && est.lower_bound > 0.5
            && rep.gap_positive
            && rep.empirical
            && est.empirical
            && est.scan_consistent;
        r.note = if est.none_feasible {
            "no scanned radius admits a graph disc; a_observed is the smallest scanned radius".into()
        } else {
            String::new()
        };
        Ok(r)
    })
}

/// Criteria 1 to 10, in order.
pub fn run_all(opts: &SelftestOptions) -> Result<Vec<CriterionResult>> {
    let checks: [fn(&SelftestOptions) -> Result<CriterionResult>; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    checks.iter().map(|c| c(opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass() {
        let opts = SelftestOptions {
            j_samples: 10_000,
            ..Default::default()
        };
        for c in [criterion_1, criterion_3, criterion_4, criterion_5, criterion_8, criterion_9] {
            let r = c(&opts).unwrap();
            assert!(r.passed, "{}", r.line());
        }
    }

    #[test]
    fn random_fields_are_small() {
        let grid = make_grid(1.0, 65).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        for rough in [true, false] {
            let f = random_small_field(grid, &mut rng, rough);
            assert!(crate::grid::sup_norm(&f).unwrap() < 0.1);
        }
    }

    #[test]
    fn line_format() {
        let mut r = CriterionResult::new(3, "x");
        r.passed = true;
        r.set("a", 1.0);
        assert_eq!(r.line(), "PASS  3 x                        a=1.000000e0");
    }
}
