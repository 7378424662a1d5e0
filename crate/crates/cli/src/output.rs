use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use hilmod_core::scenarios::CounterexampleDiagnostics;
use hilmod_core::Report;
use serde::Serialize;

/// Writes `text` to `path`, or to standard output when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn joined<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

/// One row per report; list-valued fields are `;`-separated.
pub fn reports_csv(reports: &[Report]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "seed",
        "kind",
        "shape",
        "dims",
        "samples",
        "passed",
        "index_decomp",
        "index_kernels",
        "max_residual",
        "flags",
    ])?;
    for r in reports {
        let max_residual = r.residuals.values().copied().fold(0.0, f64::max);
        w.write_record([
            r.seed.to_string(),
            r.kind.clone(),
            joined(r.shape.block_dims()),
            joined(&r.dims),
            r.samples.to_string(),
            r.passed.to_string(),
            r.index_decomp.as_deref().map(joined).unwrap_or_default(),
            r.index_kernels.as_deref().map(joined).unwrap_or_default(),
            format!("{max_residual:e}"),
            r.flags.join(" | "),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
pub struct DivergenceRow {
    pub n: usize,
    pub inv_sqrt_norm: f64,
    pub tail_norm_min: f64,
    pub tail_norm_max: f64,
}

impl From<&CounterexampleDiagnostics> for DivergenceRow {
    fn from(d: &CounterexampleDiagnostics) -> Self {
        Self {
            n: d.n,
            inv_sqrt_norm: d.inv_sqrt_norm,
            tail_norm_min: d.tail_norm_min(),
            tail_norm_max: d.tail_norm_max(),
        }
    }
}

pub fn divergence_csv(rows: &[DivergenceRow]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "inv_sqrt_norm", "tail_norm_min", "tail_norm_max"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            format!("{:.12}", r.inv_sqrt_norm),
            format!("{:.12}", r.tail_norm_min),
            format!("{:.12}", r.tail_norm_max),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
