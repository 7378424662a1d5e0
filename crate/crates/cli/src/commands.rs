use std::fs;
use std::path::Path;
use std::thread;

use anyhow::{bail, Context};
use hilmod_core::fredholm::verify_index_formula;
use hilmod_core::scenarios::{
    build_counterexample, counterexample_diagnostics, random_scenario, run_scenario,
};
use hilmod_core::{AdjointableOperator, Report, Scenario};
use serde::Serialize;

use crate::args::{CounterexampleArgs, Format, IndexArgs, RunArgs, VerifyArgs};
use crate::output::{divergence_csv, emit, json, reports_csv, DivergenceRow};
use crate::Outcome;

fn outcome(passed: bool) -> Outcome {
    if passed {
        Outcome::Passed
    } else {
        Outcome::Failed
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Runs scenarios on up to `threads` workers; results come back in input order.
fn run_all(scenarios: &[Scenario], threads: usize) -> Vec<hilmod_core::Result<Report>> {
    let chunk = scenarios.len().div_ceil(threads.max(1)).max(1);
    thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(run_scenario).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("scenario worker panicked"))
            .collect()
    })
}

fn report_failures(reports: &[Report]) {
    for r in reports.iter().filter(|r| !r.passed) {
        for flag in &r.flags {
            eprintln!("{} seed {}: {flag}", r.kind, r.seed);
        }
    }
}

pub fn verify(a: &VerifyArgs) -> anyhow::Result<Outcome> {
    let tol = a.tolerances.resolve()?;
    let kind = a.suite.kind();
    let scenarios: Vec<Scenario> = a
        .seeds
        .0
        .iter()
        .map(|&seed| {
            let mut s = random_scenario(kind, seed, &a.shape, &a.dims);
            s.tolerances = tol;
            s.samples = a.samples as usize;
            s
        })
        .collect();
    let threads = match a.threads {
        Some(t) => t as usize,
        None => thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let reports = run_all(&scenarios, threads)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    report_failures(&reports);

    let render = |rs: &[Report]| match a.format {
        Format::Json => json(rs),
        Format::Csv => reports_csv(rs),
    };
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let ext = match a.format {
            Format::Json => "json",
            Format::Csv => "csv",
        };
        for r in &reports {
            let text = match a.format {
                Format::Json => json(r)?,
                Format::Csv => reports_csv(std::slice::from_ref(r))?,
            };
            emit(Some(&dir.join(format!("report-{}.{ext}", r.seed))), &text)?;
        }
    } else {
        emit(a.out.as_deref(), &render(&reports)?)?;
    }
    Ok(outcome(reports.iter().all(|r| r.passed)))
}

pub fn run(a: &RunArgs) -> anyhow::Result<Outcome> {
    let scenario: Scenario = serde_json::from_str(&read(&a.scenario)?)
        .with_context(|| format!("parsing {}", a.scenario.display()))?;
    let report = run_scenario(&scenario)?;
    report_failures(std::slice::from_ref(&report));
    emit(a.out.as_deref(), &json(&report)?)?;
    Ok(outcome(report.passed))
}

pub fn counterexample(a: &CounterexampleArgs) -> anyhow::Result<Outcome> {
    let tol = a.tolerances.resolve()?;
    let mut rows = Vec::with_capacity(a.sizes.0.len());
    let mut passed = true;
    for &n in &a.sizes.0 {
        let n = usize::try_from(n)?;
        if n == 0 {
            bail!("truncation sizes must be positive");
        }
        let d = counterexample_diagnostics(&build_counterexample(n)?, &tol)?;
        let mut fail = |what: &str, value: f64| {
            passed = false;
            eprintln!("n = {n}: {what} ({value:e})");
        };
        let norm_error = (d.inv_sqrt_norm - n as f64).abs();
        if norm_error > 1e-9 * n as f64 {
            fail("norm of (T*T)^(-1/2) differs from n", norm_error);
        }
        let tail_error = d.tail_norms.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max);
        if tail_error > 1e-10 {
            fail("tail norm differs from 1", tail_error);
        }
        if d.isometry_defect > tol.invariant_abs {
            fail("f is not isometric", d.isometry_defect);
        }
        if d.unit_defect > tol.invariant_abs {
            fail("<f(1), f(1)> differs from 1", d.unit_defect);
        }
        rows.push(DivergenceRow::from(&d));
    }
    let text = match a.format {
        Format::Csv => divergence_csv(&rows)?,
        Format::Json => json(&rows)?,
    };
    emit(a.out.as_deref(), &text)?;
    Ok(outcome(passed))
}

#[derive(Serialize)]
struct IndexOutput {
    #[serde(flatten)]
    report: hilmod_core::IndexReport,
    passed: bool,
}

pub fn index(a: &IndexArgs) -> anyhow::Result<Outcome> {
    let tol = a.tolerances.resolve()?;
    let op: AdjointableOperator = serde_json::from_str(&read(&a.operator)?)
        .with_context(|| format!("parsing {}", a.operator.display()))?;
    let report = verify_index_formula(&op, &tol);
    for flag in &report.flags {
        eprintln!("{flag}");
    }
    let passed = report.passed();
    emit(a.out.as_deref(), &json(&IndexOutput { report, passed })?)?;
    Ok(outcome(passed))
}
