use std::path::Path;

use anyhow::{Context, Result};
use dbarlab::acs::DiscMap;
use dbarlab::certify::{
    eq_chain_check, lemma1_check_with, lemma2_check_with, sqrt_branch, CertificateReport, Lemma1Options,
    Lemma2Options,
};
use dbarlab::dbar::{picard_solve, residual_dbar};
use dbarlab::grid::sup_norm;
use dbarlab::io::{encode_field, encode_real_field, pgm_heatmap, read_field};
use dbarlab::kr::{upper_bound_origin, usc_report};
use dbarlab::ode::{exact_forward, exact_trajectory, family_trajectory, lower_bound_check, rk4_integrate};
use dbarlab::selftest::{run_all, SelftestOptions};
use serde_json::{json, Value};

use crate::config::{CertifyConfig, KrScanConfig, OdeConfig, SolveConfig};
use crate::record::{Run, RunRecord};

pub fn solve_dbar(cfg: &SolveConfig, out: &Path) -> Result<RunRecord> {
    let problem = cfg.problem()?;
    let sol = picard_solve(&problem)?;
    let (residual, _) = residual_dbar(&sol.f)?;
    let mut run = Run::start(out, "solve-dbar", cfg)?;
    run.write("solution.bin", &encode_field(&sol.f))?;
    run.write("modulus.pgm", &pgm_heatmap(&sol.f.map(|v| v.norm())))?;
    run.write("residual.pgm", &pgm_heatmap(&residual))?;
    run.write("residual.bin", &encode_real_field(&residual))?;
    run.finish(json!({
        "residual_sup": sol.residual_sup,
        "residual_gate": sol.residual_gate(),
        "sup_f": sol.sup_f,
        "converged": sol.converged,
        "iterations": sol.iterations,
        "passes_gate": sol.passes_gate(),
    }))
}

fn report_or_error(r: dbarlab::Result<CertificateReport>) -> Value {
    match r {
        Ok(rep) => serde_json::to_value(rep).expect("reports serialize"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn certify(cfg: &CertifyConfig, solution: &Path, out: &Path) -> Result<RunRecord> {
    cfg.validate()?;
    let f = read_field(solution).with_context(|| format!("reading solution {}", solution.display()))?;
    let lemma1 = lemma1_check_with(
        &f,
        &Lemma1Options {
            delta0: cfg.delta0,
            kappa: cfg.kappa,
            ..Default::default()
        },
    );
    let chain = sqrt_branch(&f).and_then(|g| eq_chain_check(&g));
    let u = f.map(|v| v.norm().powf(0.75));
    let lemma2 = lemma2_check_with(
        &u,
        &Lemma2Options {
            delta0: cfg.delta0,
            kappa: cfg.kappa,
            ..Default::default()
        },
    );
    let (_, residual_sup) = residual_dbar(&f)?;
    let min_slack = lemma1.as_ref().ok().map(|r| r.min_slack);
    let lemma2_verdict = lemma2.as_ref().ok().map(|r| r.verdict);
    let doc = json!({
        "lemma1": report_or_error(lemma1),
        "eq_chain": report_or_error(chain),
        "lemma2": report_or_error(lemma2),
    });
    let mut run = Run::start(out, "certify", &json!({ "config": cfg, "solution": solution }))?;
    run.write_json("certificates.json", &doc)?;
    run.finish(json!({
        "residual_sup": residual_sup,
        "sup_f": sup_norm(&f)?,
        "min_slack": min_slack,
        "lemma2_verdict": lemma2_verdict,
    }))
}

fn write_disc_map(run: &mut Run, stem: &str, map: &DiscMap) -> Result<()> {
    run.write(&format!("{stem}_z1.bin"), &encode_field(&map.z1))?;
    run.write(&format!("{stem}_z2.bin"), &encode_field(&map.z2))?;
    run.write_json(
        &format!("{stem}.json"),
        &json!({
            "radius": map.grid.radius(),
            "resolution": map.grid.resolution(),
            "z1": format!("{stem}_z1.bin"),
            "z2": format!("{stem}_z2.bin"),
        }),
    )
}

pub fn kr_scan(cfg: &KrScanConfig, out: &Path) -> Result<RunRecord> {
    let template = cfg.template()?;
    let report = usc_report(&cfg.b_list, &cfg.radii, &template)?;
    let origin = upper_bound_origin()?;
    let mut run = Run::start(out, "kr-scan", cfg)?;
    if let Some(w) = &origin.witness {
        write_disc_map(&mut run, "origin_witness", w)?;
    }
    run.write_json("usc_report.json", &report)?;
    run.write_json("scan.json", &report.estimates)?;
    run.write("usc_table.csv", report.table_csv().as_bytes())?;
    run.write("scan_records.csv", report.csv().as_bytes())?;
    if cfg.heatmaps {
        for (bi, est) in report.estimates.iter().enumerate() {
            for (ri, rec) in est.records.iter().enumerate() {
                if let Some(sol) = &rec.solution {
                    run.write(&format!("heatmap_b{bi}_r{ri:02}.pgm"), &pgm_heatmap(&sol.f.map(|v| v.norm())))?;
                }
            }
        }
    }
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| json!({ "b": r.b, "a_observed": r.a_observed, "lower_bound": r.lower_bound, "gap": r.gap }))
        .collect();
    run.finish(json!({
        "origin_upper_bound": report.origin_upper_bound,
        "gap_positive": report.gap_positive,
        "empirical": report.empirical,
        "a_observed": report.rows.iter().map(|r| r.a_observed).collect::<Vec<_>>(),
        "rows": rows,
    }))
}

pub fn ode(cfg: &OdeConfig, out: &Path) -> Result<RunRecord> {
    cfg.validate()?;
    let rk4 = rk4_integrate(cfg.g0, cfg.steps)?;
    let exact = exact_trajectory(cfg.g0, cfg.steps)?;
    let mut run = Run::start(out, "ode", cfg)?;
    run.write("rk4.csv", rk4.to_csv().as_bytes())?;
    run.write("exact.csv", exact.to_csv().as_bytes())?;
    for (k, &c) in cfg.family_c.iter().enumerate() {
        let t = family_trajectory(c, cfg.family_samples)?;
        run.write(&format!("family_{k}.csv"), t.to_csv().as_bytes())?;
    }
    let exact_end = exact_forward(cfg.g0, 1.0)?;
    let lower = if cfg.g0 > 0.0 { Some(lower_bound_check(cfg.g0)?) } else { None };
    run.finish(json!({
        "g0": cfg.g0,
        "rk4_g1": rk4.end_value(),
        "exact_g1": exact_end,
        "rk4_error": (rk4.end_value() - exact_end).abs(),
        "lower_bound": lower,
    }))
}

/// Runs the suite, prints the table and reports whether every check passed.
pub fn selftest(cfg: &SelftestOptions, out: &Path) -> Result<(RunRecord, bool)> {
    let results = run_all(cfg)?;
    for r in &results {
        println!("{}", r.line());
    }
    let all = results.iter().all(|r| r.passed);
    println!("{}", if all { "ALL PASS" } else { "SOME FAILED" });
    let mut run = Run::start(out, "selftest", cfg)?;
    run.write_json("selftest.json", &results)?;
    let record = run.finish(json!({ "all_passed": all, "criteria": results }))?;
    Ok((record, all))
}
