use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hilmod_core::{AlgebraShape, ScenarioKind, Tolerances};

#[derive(Parser, Debug)]
#[command(name = "hilmod", version, about = "Numerical checks for Hilbert modules over finite-dimensional C*-algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a suite over a range of seeds and write one report per seed.
    Verify(VerifyArgs),
    /// Execute a scenario file and write its report.
    Run(RunArgs),
    /// Emit the divergence table of the truncated diagonal operator.
    Counterexample(CounterexampleArgs),
    /// Compute and cross-check the index of a serialized operator.
    Index(IndexArgs),
}

/// Suite names; each also accepts its scenario `kind` string.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    #[value(alias = "duality_suite")]
    Duality,
    #[value(alias = "isometry_suite")]
    Isometry,
    #[value(alias = "theorem10")]
    Polar,
    #[value(alias = "lemma12")]
    Complement,
    #[value(alias = "fredholm_cross_check")]
    Fredholm,
    Counterexample,
}

impl Suite {
    pub fn kind(self) -> ScenarioKind {
        match self {
            Suite::Duality => ScenarioKind::Duality,
            Suite::Isometry => ScenarioKind::SharpIsometry,
            Suite::Polar => ScenarioKind::PolarIsomorphism,
            Suite::Complement => ScenarioKind::ComplementDecomposition,
            Suite::Fredholm => ScenarioKind::IndexCrossCheck,
            Suite::Counterexample => ScenarioKind::Counterexample,
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct ToleranceArgs {
    /// Relative singular-value cutoff.
    #[arg(long)]
    pub rank_rel: Option<f64>,
    /// Absolute bound for property residuals.
    #[arg(long)]
    pub invariant_abs: Option<f64>,
    /// Relative Hermiticity bound.
    #[arg(long)]
    pub herm_sym: Option<f64>,
}

impl ToleranceArgs {
    pub fn resolve(&self) -> anyhow::Result<Tolerances> {
        let d = Tolerances::default();
        let tol = Tolerances {
            rank_rel: self.rank_rel.unwrap_or(d.rank_rel),
            invariant_abs: self.invariant_abs.unwrap_or(d.invariant_abs),
            herm_sym: self.herm_sym.unwrap_or(d.herm_sym),
        };
        tol.validate()?;
        Ok(tol)
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Block sizes of the algebra, e.g. `1,2,2` for C ⊕ M2 ⊕ M2.
    #[arg(long, default_value = "1", value_parser = parse_shape)]
    pub shape: AlgebraShape,
    /// Seeds: integers and inclusive ranges `a..b`, comma separated.
    #[arg(long, default_value = "0", value_parser = parse_int_set)]
    pub seeds: IntSet,
    /// Suite dimensions (ambient ranks, or `n` for the counterexample).
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    /// Random instances per seed.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    /// Write all reports to this file.
    #[arg(long, conflicts_with = "out_dir")]
    pub out: Option<PathBuf>,
    /// Write `report-<seed>.<ext>` files into this directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Scenario JSON file.
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CounterexampleArgs {
    /// Truncation sizes: integers and inclusive ranges `a..b`, comma separated.
    #[arg(long = "n", value_parser = parse_int_set)]
    pub sizes: IntSet,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct IndexArgs {
    /// Operator JSON file.
    pub operator: PathBuf,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_shape(s: &str) -> Result<AlgebraShape, String> {
    let dims = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    AlgebraShape::new(dims).map_err(|e| e.to_string())
}

/// A list of integers given as `3`, `0..99` (inclusive) or comma-separated
/// mixtures, in the order given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntSet(pub Vec<u64>);

pub fn parse_int_set(s: &str) -> Result<IntSet, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let a: u64 = a.trim().parse().map_err(|e| format!("`{part}`: {e}"))?;
            let b: u64 = b.trim().parse().map_err(|e| format!("`{part}`: {e}"))?;
            if a > b {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|e| format!("`{part}`: {e}"))?);
        }
    }
    if out.is_empty() {
        return Err("empty set".into());
    }
    Ok(IntSet(out))
}
