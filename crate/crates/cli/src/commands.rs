//! Scenario execution for each subcommand.

use std::path::PathBuf;

use clap::ValueEnum;
use ehcr_core::rates::{conventional_rates, delay_s1, delay_sf1, s1_rates, s2_rates, sf1_rates};
use ehcr_core::sim::{estimate_boundary, run, SimError};
use ehcr_core::solver::{
    conventional_point, optimize_s1, optimize_s1_delay, optimize_sf1, optimize_sf_delay,
    region_point, s2_point, RegionPoint, SolveResult, SolverError, SolverOptions,
};
use ehcr_core::validation::run_criterion;
use ehcr_core::{SuccessProbs, Traffic};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, Curve, Scenario, SweepAxis};
use crate::output::{render_csv, render_svg, sig12, write_file, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Service rates and delays of a fixed policy.
    Rates,
    /// Optimal policies at one primary arrival rate.
    Optimize,
    /// Stability-region curves over a sweep.
    Region,
    /// Delay-constrained secondary throughput over a sweep.
    Delay,
    /// Slot-level simulation of a fixed policy.
    Simulate,
    /// Acceptance suite.
    Validate,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("infeasible scenario: {0}")]
    Infeasible(String),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Infeasible(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    /// Machine-readable record for stderr.
    pub fn record(&self) -> serde_json::Value {
        let kind = match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Infeasible(_) => "infeasible",
            CliError::Validation(_) => "validation",
        };
        let mut v = serde_json::json!({
            "error": kind,
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Config(c) = self {
            v["key"] = serde_json::json!(c.key);
            v["line"] = serde_json::json!(c.line);
            v["column"] = serde_json::json!(c.column);
        }
        v
    }
}

fn config_error(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config(ConfigError {
        key: Some(key.into()),
        line: None,
        column: None,
        message: message.into(),
    })
}

struct Emitter<'a> {
    scenario: &'a Scenario,
    written: Vec<PathBuf>,
}

impl Emitter<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path =
            write_file(&self.scenario.out_dir, name, contents).map_err(|source| CliError::Io {
                path: self.scenario.out_dir.join(name),
                source,
            })?;
        self.written.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, rows: &[Row]) -> Result<(), CliError> {
        self.write(name, &render_csv(rows))
    }

    fn svg(
        &mut self,
        name: &str,
        title: &str,
        x: &str,
        series: &[(String, Vec<Row>)],
    ) -> Result<(), CliError> {
        if !self.scenario.svg {
            return Ok(());
        }
        let axis = self.scenario.sweep.axis;
        let pts: Vec<(String, Vec<(f64, f64)>)> = series
            .iter()
            .map(|(n, rows)| {
                let p = rows
                    .iter()
                    .map(|r| (sweep_x(axis, r), r.lambda_s_max))
                    .collect();
                (n.clone(), p)
            })
            .collect();
        self.write(name, &render_svg(title, x, &pts))
    }
}

fn sweep_x(axis: SweepAxis, r: &Row) -> f64 {
    match axis {
        SweepAxis::LambdaP => r.lambda_p,
        SweepAxis::LambdaE => r.lambda_e,
    }
}

fn region_row(p: &RegionPoint, confidence: f64, lambda_e: f64) -> Row {
    Row {
        lambda_p: p.lambda_p,
        lambda_s_max: p.lambda_s_max,
        winning_system: p.system.name().into(),
        policy: p.policy,
        mu_p: p.mu_p,
        mu_s: p.mu_s,
        delay: p.delay,
        confidence,
        lambda_e,
    }
}

fn solve_row(r: &SolveResult, lambda_p: f64, delay: f64, lambda_e: f64) -> Row {
    Row {
        lambda_p,
        lambda_s_max: r.best_value,
        winning_system: r.system.name().into(),
        policy: r.best_policy,
        mu_p: r.mu_p,
        mu_s: r.best_value,
        delay,
        confidence: r.tolerance,
        lambda_e,
    }
}

/// Sweep cells as `(lambda_p, traffic)` pairs in grid order.
fn cells(s: &Scenario) -> Vec<(f64, Traffic)> {
    s.sweep
        .values
        .iter()
        .map(|&v| match s.sweep.axis {
            SweepAxis::LambdaP => (v, s.traffic.with_lambda_p(v)),
            SweepAxis::LambdaE => (
                s.traffic.lambda_p,
                Traffic {
                    lambda_e: v,
                    ..s.traffic
                },
            ),
        })
        .collect()
}

fn x_label(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::LambdaP => "lambda_p",
        SweepAxis::LambdaE => "lambda_e",
    }
}

fn curve_point(
    curve: Curve,
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p: f64,
    opts: &SolverOptions,
) -> Option<Row> {
    let random = || opts.clone().without_sensing();
    let (point, confidence) = match curve {
        Curve::S => (
            region_point(probs, traffic, lambda_p, false, opts),
            opts.tol,
        ),
        Curve::Sf => (region_point(probs, traffic, lambda_p, true, opts), opts.tol),
        Curve::SR => (
            region_point(probs, traffic, lambda_p, false, &random()),
            opts.tol,
        ),
        Curve::SRf => (
            region_point(probs, traffic, lambda_p, true, &random()),
            opts.tol,
        ),
        Curve::S2 => (s2_point(probs, traffic, lambda_p), 0.0),
        Curve::Conventional => (conventional_point(probs, traffic, lambda_p), 0.0),
    };
    point.map(|p| region_row(&p, confidence, traffic.lambda_e))
}

pub struct Report {
    pub written: Vec<PathBuf>,
    /// Printed to stdout.
    pub summary: serde_json::Value,
}

pub fn execute(command: Command, s: &Scenario) -> Result<Report, CliError> {
    let mut e = Emitter {
        scenario: s,
        written: Vec::new(),
    };
    let summary = match command {
        Command::Rates => rates(s, &mut e)?,
        Command::Optimize => optimize(s, &mut e)?,
        Command::Region => region(s, &mut e)?,
        Command::Delay => delay(s, &mut e)?,
        Command::Simulate => simulate(s, &mut e)?,
        Command::Validate => validate(s, &mut e)?,
    };
    Ok(Report {
        written: e.written,
        summary,
    })
}

fn rates(s: &Scenario, e: &mut Emitter) -> Result<serde_json::Value, CliError> {
    s.policy
        .validate()
        .map_err(|err| config_error("policy", err.to_string()))?;
    let (probs, t, policy) = (&s.probs, &s.traffic, &s.policy);
    let mut rows = Vec::new();
    let mut problems = Vec::new();
    let mut push = |system: &str,
                    r: Result<ehcr_core::ServiceRates, ehcr_core::RateError>,
                    delay: f64| match r {
        Ok(r) => rows.push(Row {
            lambda_p: t.lambda_p,
            lambda_s_max: r.mu_s,
            winning_system: system.into(),
            policy: *policy,
            mu_p: r.mu_p,
            mu_s: r.mu_s,
            delay,
            confidence: 0.0,
            lambda_e: t.lambda_e,
        }),
        Err(err) => problems.push(format!("{system}: {err}")),
    };
    push(
        "S1",
        s1_rates(policy, probs, t),
        delay_s1(policy, probs, t).d_p,
    );
    push(
        "S1f",
        sf1_rates(policy, probs, t),
        delay_sf1(policy, probs, t).d_p,
    );
    push("S2", s2_rates(policy, probs, t), f64::INFINITY);
    let conv = conventional_rates(probs, t);
    let conv_delay = conv.as_ref().map_or(f64::INFINITY, |r| {
        ehcr_core::rates::s1_delay_value(t.lambda_p, r.mu_p).d_p
    });
    let conventional = ehcr_core::AccessPolicy::conventional();
    match conv {
        Ok(r) => rows.push(Row {
            lambda_p: t.lambda_p,
            lambda_s_max: r.mu_s,
            winning_system: "conventional".into(),
            policy: conventional,
            mu_p: r.mu_p,
            mu_s: r.mu_s,
            delay: conv_delay,
            confidence: 0.0,
            lambda_e: t.lambda_e,
        }),
        Err(err) => problems.push(format!("conventional: {err}")),
    }
    if rows.is_empty() {
        return Err(CliError::Infeasible(problems.join("; ")));
    }
    e.csv("rates.csv", &rows)?;
    Ok(serde_json::json!({ "rows": rows, "unavailable": problems }))
}

fn optimize(s: &Scenario, e: &mut Emitter) -> Result<serde_json::Value, CliError> {
    let (probs, t, opts) = (&s.probs, &s.traffic, &s.solver);
    let l = t.lambda_p;
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    match optimize_s1(probs, t, l, opts) {
        Ok(r) => rows.push(solve_row(
            &r,
            l,
            delay_s1(&r.best_policy, probs, t).d_p,
            t.lambda_e,
        )),
        Err(err) => errors.push(("S1", err)),
    }
    match optimize_sf1(probs, t, l, opts) {
        Ok(r) => rows.push(solve_row(
            &r,
            l,
            delay_sf1(&r.best_policy, probs, t).d_p,
            t.lambda_e,
        )),
        Err(err) => errors.push(("S1f", err)),
    }
    if let Some(p) = s2_point(probs, t, l) {
        rows.push(region_row(&p, 0.0, t.lambda_e));
    }
    if let Some(p) = conventional_point(probs, t, l) {
        rows.push(region_row(&p, 0.0, t.lambda_e));
    }
    let problems: Vec<String> = errors
        .iter()
        .map(|(n, err)| format!("{n}: {err}"))
        .collect();
    if errors
        .iter()
        .any(|(_, err)| !matches!(err, SolverError::Infeasible(_)))
    {
        return Err(config_error("solver", problems.join("; ")));
    }
    if rows.is_empty() {
        return Err(CliError::Infeasible(problems.join("; ")));
    }
    e.csv("optimize.csv", &rows)?;
    Ok(serde_json::json!({ "rows": rows, "unavailable": problems }))
}

fn region(s: &Scenario, e: &mut Emitter) -> Result<serde_json::Value, CliError> {
    let cells = cells(s);
    let mut series = Vec::new();
    for &curve in &s.curves {
        let rows: Vec<Row> = cells
            .par_iter()
            .map(|(l, t)| curve_point(curve, &s.probs, t, *l, &s.solver))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();
        e.csv(&format!("region_{}.csv", curve.name()), &rows)?;
        series.push((curve.name().to_string(), rows));
    }
    if series.iter().all(|(_, rows)| rows.is_empty()) {
        return Err(CliError::Infeasible(
            "no sweep point is feasible for any curve".into(),
        ));
    }
    let axis = s.sweep.axis;
    e.svg(
        "region.svg",
        "Maximum stable secondary rate",
        x_label(axis),
        &series,
    )?;
    Ok(serde_json::json!({
        "curves": series.iter().map(|(n, rows)| serde_json::json!({"curve": n, "points": rows.len()})).collect::<Vec<_>>()
    }))
}

fn delay(s: &Scenario, e: &mut Emitter) -> Result<serde_json::Value, CliError> {
    let cells = cells(s);
    let mut series = Vec::new();
    for &d in &s.delays {
        for feedback in [false, true] {
            let rows: Vec<Row> = cells
                .par_iter()
                .map(|(l, t)| {
                    let r = if feedback {
                        optimize_sf_delay(&s.probs, t, *l, d, &s.solver)
                    } else {
                        optimize_s1_delay(&s.probs, t, *l, d, &s.solver)
                    };
                    r.ok().map(|r| {
                        let achieved = if feedback {
                            delay_sf1(&r.best_policy, &s.probs, t).d_p
                        } else {
                            delay_s1(&r.best_policy, &s.probs, t).d_p
                        };
                        solve_row(&r, *l, achieved, t.lambda_e)
                    })
                })
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect();
            let name = format!("{}_D{}", if feedback { "Sf" } else { "S" }, sig12(d));
            e.csv(&format!("delay_{name}.csv"), &rows)?;
            series.push((name, rows));
        }
    }
    if series.iter().all(|(_, rows)| rows.is_empty()) {
        return Err(CliError::Infeasible(
            "no sweep point meets any delay bound".into(),
        ));
    }
    e.svg(
        "delay.svg",
        "Delay-constrained secondary rate",
        x_label(s.sweep.axis),
        &series,
    )?;
    Ok(serde_json::json!({
        "curves": series.iter().map(|(n, rows)| serde_json::json!({"curve": n, "points": rows.len()})).collect::<Vec<_>>()
    }))
}

#[derive(Serialize)]
struct SimOutput<'a> {
    config: &'a ehcr_core::SimConfig,
    policy: &'a ehcr_core::AccessPolicy,
    traffic: &'a Traffic,
    report: &'a ehcr_core::SimReport,
    boundary: Option<ehcr_core::BoundaryEstimate>,
}

fn sim_error(err: SimError) -> CliError {
    match err {
        SimError::Config(m) => config_error("sim", m),
        SimError::Rate(r) => config_error("policy", r.to_string()),
        SimError::Probs(m) => config_error("probs", m),
    }
}

fn simulate(s: &Scenario, e: &mut Emitter) -> Result<serde_json::Value, CliError> {
    let report = run(&s.sim, &s.policy, &s.probs, &s.traffic).map_err(sim_error)?;
    for w in &report.warnings {
        eprintln!("{}", serde_json::json!({ "warning": w }));
    }
    let boundary = match s.boundary {
        Some(axis) => Some(
            estimate_boundary(&s.sim, &s.probs, &s.traffic, &s.policy, axis).map_err(sim_error)?,
        ),
        None => None,
    };
    let row = Row {
        lambda_p: s.traffic.lambda_p,
        lambda_s_max: boundary.as_ref().map_or(report.mu_s.mean, |b| b.boundary),
        winning_system: "simulation".into(),
        policy: s.policy,
        mu_p: report.mu_p.mean,
        mu_s: report.mu_s.mean,
        delay: report.mean_delay_p.mean,
        confidence: report.mu_s.half_width,
        lambda_e: s.traffic.lambda_e,
    };
    e.csv("simulate.csv", std::slice::from_ref(&row))?;
    let out = SimOutput {
        config: &s.sim,
        policy: &s.policy,
        traffic: &s.traffic,
        report: &report,
        boundary,
    };
    let json = serde_json::to_value(&out).expect("serializable report");
    e.write("simulate.json", &format!("{json:#}\n"))?;
    Ok(json)
}

fn validate(s: &Scenario, e: &mut Emitter) -> Result<serde_json::Value, CliError> {
    let opts = s.validation;
    let mut reports = Vec::new();
    for &id in &s.criteria {
        let r = run_criterion(id, &opts).expect("criteria are checked at parse time");
        println!("{r}");
        reports.push(r);
    }
    let json = serde_json::to_value(&reports).expect("serializable reports");
    e.write("validate.json", &format!("{json:#}\n"))?;
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("AC-{}", r.id))
        .collect();
    if failed.is_empty() {
        Ok(serde_json::json!({ "passed": reports.len() }))
    } else {
        Err(CliError::Validation(format!(
            "failed: {}",
            failed.join(", ")
        )))
    }
}
