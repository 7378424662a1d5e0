//! The truncated counterexample study, seeded random instances, and
//! reusable scenario definitions with their reports.
//!
//! A [`Scenario`] names a suite, a seed, an algebra shape and suite-specific
//! dimensions; [`run_scenario`] turns it into a [`Report`] deterministically.
//! Mathematical failures never abort a run: they become flags on the report.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{ginibre, AlgebraElement, AlgebraShape, MatrixOverA};
use crate::duality::{
    bidual_inner, dot, dual_inner, dual_to_bidual, hat, restrict_to_module, BidualElement,
    DualElement,
};
use crate::error::{Error, Result};
use crate::fredholm::{
    alternative_thresholds, k0_class, mf_decompose_with_threshold, verify_index_formula,
};
use crate::linalg::{ComplexMatrix, Tolerances};
use crate::module::{
    inner, random_frame, submodule_from_generators, HilbertModule, Submodule,
};
use crate::operator::{
    banach_dual, complement_decomposition, dual_polar_isomorphism, image,
    inclusion_sharp_pair, kernel, sharp, AdjointableOperator,
};

/// Version of the scenario and report JSON layout.
pub const SCHEMA: u32 = 1;

/// Largest truncation for which a counterexample run also builds the full
/// dual-module isomorphism (its cost grows like `n⁵`).
pub const COUNTEREXAMPLE_POLAR_MAX: usize = 16;

/// The suites a scenario can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioKind {
    /// Embeddings into the dual and bidual and their inner products.
    Duality,
    /// The sharp of an inclusion and its inverse.
    SharpIsometry,
    /// The isomorphism `M′ ≅ N′` induced by an injective operator with dense range.
    PolarIsomorphism,
    /// `L = K^⊥⊥ ⊕ K^⊥` and `(Im F)^⊥ = Ker F*`.
    ComplementDecomposition,
    /// Index from a decomposition against index from kernels.
    IndexCrossCheck,
    /// The truncated diagonal operator with weights `1/i`.
    Counterexample,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::Duality,
        ScenarioKind::SharpIsometry,
        ScenarioKind::PolarIsomorphism,
        ScenarioKind::ComplementDecomposition,
        ScenarioKind::IndexCrossCheck,
        ScenarioKind::Counterexample,
    ];

    /// The identifier used in scenario files.
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Duality => "duality_suite",
            ScenarioKind::SharpIsometry => "isometry_suite",
            ScenarioKind::PolarIsomorphism => "theorem10",
            ScenarioKind::ComplementDecomposition => "lemma12",
            ScenarioKind::IndexCrossCheck => "fredholm_cross_check",
            ScenarioKind::Counterexample => "counterexample",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }

    /// Dimensions used when a scenario leaves them empty.
    pub fn default_dims(self) -> Vec<usize> {
        match self {
            ScenarioKind::IndexCrossCheck => vec![3, 2],
            ScenarioKind::Counterexample => vec![8],
            _ => vec![3],
        }
    }

    fn dims_arity(self) -> usize {
        match self {
            ScenarioKind::IndexCrossCheck => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[cfg(feature = "serde")]
fn default_schema() -> u32 {
    SCHEMA
}

#[cfg(feature = "serde")]
fn default_samples() -> usize {
    1
}

/// One reproducible run of a suite.
///
/// `dims` is `[k]` (ambient rank of the random modules) for every kind except
/// `fredholm_cross_check`, which takes `[source rank, target rank]`, and
/// `counterexample`, which takes `[n]` and ignores `shape`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Scenario {
    #[cfg_attr(feature = "serde", serde(default = "default_schema"))]
    pub schema: u32,
    pub kind: String,
    pub seed: u64,
    pub shape: AlgebraShape,
    #[cfg_attr(feature = "serde", serde(default))]
    pub dims: Vec<usize>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub tolerances: Tolerances,
    #[cfg_attr(feature = "serde", serde(default = "default_samples"))]
    pub samples: usize,
}

/// Outcome of a scenario. Inputs are echoed so that any failure can be
/// reproduced from the report alone; `index_*` describe the first sample.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Report {
    pub schema: u32,
    pub kind: String,
    pub seed: u64,
    pub shape: AlgebraShape,
    pub dims: Vec<usize>,
    pub tolerances: Tolerances,
    pub samples: usize,
    pub index_decomp: Option<Vec<i64>>,
    pub index_kernels: Option<Vec<i64>>,
    /// Worst value of each checked identity over all samples.
    pub residuals: BTreeMap<String, f64>,
    /// Reported quantities that are not residuals (norms, condition numbers).
    pub values: BTreeMap<String, f64>,
    pub flags: Vec<String>,
    pub passed: bool,
}

/// A scenario with default tolerances; empty `dims` select the kind's defaults.
pub fn random_scenario(kind: ScenarioKind, seed: u64, shape: &AlgebraShape, dims: &[usize]) -> Scenario {
    Scenario {
        schema: SCHEMA,
        kind: kind.name().to_string(),
        seed,
        shape: shape.clone(),
        dims: if dims.is_empty() { kind.default_dims() } else { dims.to_vec() },
        tolerances: Tolerances::default(),
        samples: 1,
    }
}

/// Runs a scenario. Errors are reserved for malformed scenarios; every
/// mathematical failure is reported as a flag.
pub fn run_scenario(s: &Scenario) -> Result<Report> {
    let kind = ScenarioKind::parse(&s.kind)?;
    if s.schema != SCHEMA {
        return Err(Error::Invalid(format!("unsupported schema {}", s.schema)));
    }
    s.tolerances.validate()?;
    let dims = if s.dims.is_empty() { kind.default_dims() } else { s.dims.clone() };
    if dims.len() != kind.dims_arity() || dims.contains(&0) {
        return Err(Error::Invalid(format!(
            "{} expects {} positive dimension(s), got {:?}",
            kind,
            kind.dims_arity(),
            dims
        )));
    }
    if s.samples == 0 {
        return Err(Error::Invalid("samples must be positive".into()));
    }

    let mut run = Run {
        tol: s.tolerances,
        rng: ChaCha8Rng::seed_from_u64(s.seed),
        residuals: BTreeMap::new(),
        values: BTreeMap::new(),
        flags: Vec::new(),
        index_decomp: None,
        index_kernels: None,
    };
    let samples = if kind == ScenarioKind::Counterexample { 1 } else { s.samples };
    for sample in 0..samples {
        let outcome = match kind {
            ScenarioKind::Duality => run.duality(&s.shape, dims[0]),
            ScenarioKind::SharpIsometry => run.sharp_isometry(&s.shape, dims[0]),
            ScenarioKind::PolarIsomorphism => run.polar(&s.shape, dims[0]),
            ScenarioKind::ComplementDecomposition => run.complement(&s.shape, dims[0]),
            ScenarioKind::IndexCrossCheck => run.index(&s.shape, dims[0], dims[1]),
            ScenarioKind::Counterexample => run.counterexample(dims[0]),
        };
        if let Err(err) = outcome {
            run.flags.push(format!("sample {sample}: {err}"));
        }
    }
    let bound = s.tolerances.invariant_abs;
    for (name, value) in &run.residuals {
        if value.is_nan() || *value > bound {
            run.flags.push(format!("residual {name} = {value:e} exceeds {bound:e}"));
        }
    }
    let passed = run.flags.is_empty();
    Ok(Report {
        schema: SCHEMA,
        kind: kind.name().to_string(),
        seed: s.seed,
        shape: s.shape.clone(),
        dims,
        tolerances: s.tolerances,
        samples,
        index_decomp: run.index_decomp,
        index_kernels: run.index_kernels,
        residuals: run.residuals,
        values: run.values,
        flags: run.flags,
        passed,
    })
}

struct Run {
    tol: Tolerances,
    rng: ChaCha8Rng,
    residuals: BTreeMap<String, f64>,
    values: BTreeMap<String, f64>,
    flags: Vec<String>,
    index_decomp: Option<Vec<i64>>,
    index_kernels: Option<Vec<i64>>,
}

impl Run {
    /// Keeps the worst value seen for `name`; NaN always wins.
    fn record(&mut self, name: &str, value: f64) {
        let slot = self.residuals.entry(name.to_string()).or_insert(0.0);
        if value.is_nan() || value > *slot {
            *slot = value;
        }
    }

    fn value(&mut self, name: &str, value: f64) {
        let slot = self.values.entry(name.to_string()).or_insert(value);
        if value > *slot {
            *slot = value;
        }
    }

    fn duality(&mut self, shape: &AlgebraShape, k: usize) -> Result<()> {
        let m = nonzero_module(shape, k, &mut self.rng);
        let x = m.random_element(&mut self.rng);
        let y = m.random_element(&mut self.rng);
        let f = DualElement::from_riesz(m.random_element(&mut self.rng));
        let a = AlgebraElement::random_with(shape, &mut self.rng);
        let big = BidualElement::from_riesz(m.random_element(&mut self.rng));

        let (dx, dy) = (dot(&x)?, dot(&y)?);
        self.record("embedding_restriction", restrict_to_module(&dx)?.riesz().distance(&x)?);
        self.record("dot_evaluation", dx.eval(&hat(&y))?.distance(&inner(&y, &x)?)?);
        self.record(
            "bidual_inner_extension",
            bidual_inner(&dx, &dy)?.distance(&inner(&x, &y)?)?,
        );
        let phi = dual_to_bidual(&f)?;
        self.record(
            "restriction_after_lift",
            restrict_to_module(&phi)?.riesz().distance(f.riesz())?,
        );
        self.record("lift_isometry", (phi.op_norm()? - f.op_norm()?).abs());
        self.record("hat_isometry", (hat(&x).op_norm()? - x.norm()).abs());
        self.record("norm_coincidence", (f.op_norm()? - f.inner_norm()?).abs());
        self.record(
            "dual_pairing",
            f.eval(&x)?.distance(&dual_inner(&hat(&x), &f)?)?,
        );
        self.record(
            "conjugate_linearity",
            f.eval(&x.act(&a)?)?.distance(&a.adjoint().mul(&f.eval(&x)?)?)?,
        );
        let xx = bidual_inner(&big, &big)?;
        let negativity = xx
            .min_eigenvalue(&self.tol)
            .map_or(f64::INFINITY, |l| (-l).max(0.0));
        self.record("bidual_positivity", negativity);
        self.record(
            "bidual_norm_coincidence",
            (num_traits::Float::sqrt(xx.norm()) - restrict_to_module(&big)?.op_norm()?).abs(),
        );
        Ok(())
    }

    fn sharp_isometry(&mut self, shape: &AlgebraShape, k: usize) -> Result<()> {
        let l = nonzero_module(shape, k, &mut self.rng);
        let sub = Submodule::random_with(&l, &mut self.rng)?;
        let pair = inclusion_sharp_pair(&sub)?;
        self.record("left_inverse", pair.left_inverse_defect()?);
        self.record("right_inverse", pair.right_inverse_defect()?);
        self.record("inverse_range", pair.range_defect);
        self.record("double_complement", pair.double_complement.distance(&sub)?);
        let m = pair.double_complement.as_module().random_element(&mut self.rng);
        self.record("isometry", pair.isometry_defect(&m)?);

        let j = AdjointableOperator::inclusion(&sub);
        let j_sharp = sharp(&j)?;
        let x = sub.as_module().random_element(&mut self.rng);
        let y = l.random_element(&mut self.rng);
        self.record(
            "sharp_formula",
            hat(&j_sharp.apply(&y)?)
                .eval(&x)?
                .distance(&inner(&j.apply(&x)?, &y)?)?,
        );
        self.record("sharp_of_inclusion", j_sharp.apply(&j.apply(&x)?)?.distance(&x)?);
        Ok(())
    }

    fn polar(&mut self, shape: &AlgebraShape, k: usize) -> Result<()> {
        let t = random_polar_instance(shape, k, &mut self.rng)?;
        self.record("banach_dual_diagram", banach_dual(&t)?.distance(&t.adjoint())?);
        let out = dual_polar_isomorphism(&t, &self.tol)?;
        let (vv, ww) = out.iso.unitary_defects()?;
        self.record("unitary_source", vv);
        self.record("unitary_target", ww);
        self.record("landing", out.landing_defect);
        let x = t.source().random_element(&mut self.rng);
        let y = t.source().random_element(&mut self.rng);
        let lhs = inner(&out.iso.apply(&x)?, &out.iso.apply(&y)?)?;
        self.record("inner_product_preservation", lhs.distance(&inner(&x, &y)?)?);
        self.value("condition", out.condition);
        Ok(())
    }

    fn complement(&mut self, shape: &AlgebraShape, k: usize) -> Result<()> {
        let l = nonzero_module(shape, k, &mut self.rng);
        let sub = Submodule::random_with(&l, &mut self.rng)?;
        let d = complement_decomposition(&sub, &self.tol)?;
        self.record("rr_star_identity", d.rr_star_defect()?);
        self.record("idempotence", d.idempotence_defect()?);
        self.record("kernel_is_complement", d.kernel_defect()?);
        self.record("complementary_sum", d.sum_defect()?);
        self.record("double_complement", d.double_complement.distance(&sub)?);

        let f = random_operator(shape, k, k, &mut self.rng)?;
        let coker = image(&f, &self.tol)?.orthogonal_complement()?;
        self.record(
            "cokernel_is_adjoint_kernel",
            coker.distance(&kernel(&f.adjoint(), &self.tol)?)?,
        );
        Ok(())
    }

    fn index(&mut self, shape: &AlgebraShape, ks: usize, kt: usize) -> Result<()> {
        let f = random_fredholm_operator(shape, ks, kt, &mut self.rng)?;
        let report = verify_index_formula(&f, &self.tol);
        if self.index_decomp.is_none() && self.index_kernels.is_none() {
            self.index_decomp = report.index_decomp.as_ref().map(|c| c.ranks().to_vec());
            self.index_kernels = report.index_kernels.as_ref().map(|c| c.ranks().to_vec());
        }
        for (name, value) in &report.residuals {
            self.record(name, *value);
        }
        // Residual flags are re-derived from the merged table at the end.
        self.flags
            .extend(report.flags.into_iter().filter(|f| !f.starts_with("residual ")));

        let whole = k0_class(f.source(), &self.tol)?.checked_sub(&k0_class(f.target(), &self.tol)?)?;
        let thresholds = alternative_thresholds(&f, &self.tol)?;
        self.value("alternative_decompositions", thresholds.len() as f64);
        for t in thresholds {
            let data = mf_decompose_with_threshold(&f, t, &self.tol)?;
            let valid = data.validate(&f, &self.tol).is_ok();
            self.record("alternative.invalid", if valid { 0.0 } else { 1.0 });
            self.record("alternative.index_gap", if data.index == whole { 0.0 } else { 1.0 });
        }
        Ok(())
    }

    fn counterexample(&mut self, n: usize) -> Result<()> {
        let inst = build_counterexample(n)?;
        let d = counterexample_diagnostics(&inst, &self.tol)?;
        self.value("n", n as f64);
        self.value("inv_sqrt_norm", d.inv_sqrt_norm);
        self.value("tail_norm_min", d.tail_norm_min());
        self.value("tail_norm_max", d.tail_norm_max());
        self.record("inv_sqrt_norm_relative_error", (d.inv_sqrt_norm - n as f64).abs() / n as f64);
        self.record(
            "tail_norm_error",
            d.tail_norms.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max),
        );
        self.record("singular_values", d.singular_value_error);
        self.record("isometry", d.isometry_defect);
        self.record("unit_inner_product", d.unit_defect);
        if n <= COUNTEREXAMPLE_POLAR_MAX {
            let out = dual_polar_isomorphism(&inst.op, &self.tol)?;
            let (vv, ww) = out.iso.unitary_defects()?;
            self.record("polar_unitary_source", vv);
            self.record("polar_unitary_target", ww);
            self.value("condition", out.condition);
        }
        Ok(())
    }
}

/// Random module in `A^k` with at least one nonzero block.
fn nonzero_module<R: Rng + ?Sized>(shape: &AlgebraShape, k: usize, rng: &mut R) -> HilbertModule {
    loop {
        let m = HilbertModule::random_with(shape, k, rng);
        if !m.is_zero() {
            return m;
        }
    }
}

/// Random operator between random modules of ambient ranks `ks` and `kt`.
pub fn random_operator<R: Rng + ?Sized>(
    shape: &AlgebraShape,
    ks: usize,
    kt: usize,
    rng: &mut R,
) -> Result<AdjointableOperator> {
    let m = HilbertModule::random_with(shape, ks, rng);
    let n = HilbertModule::random_with(shape, kt, rng);
    AdjointableOperator::new(&m, &n, MatrixOverA::random_with(shape, kt, ks, rng))
}

/// `T: M → N` between random modules with equal block ranks, invertible
/// block by block (a Gaussian core between orthonormal module bases).
pub fn random_polar_instance<R: Rng + ?Sized>(
    shape: &AlgebraShape,
    k: usize,
    rng: &mut R,
) -> Result<AdjointableOperator> {
    let m = nonzero_module(shape, k, rng);
    let n = HilbertModule::random_with_ranks(shape, k, &m.block_ranks(), rng);
    let mut blocks = Vec::with_capacity(shape.num_blocks());
    for i in 0..shape.num_blocks() {
        let (bm, bn) = (m.range_basis(i)?, n.range_basis(i)?);
        let core = ginibre(bn.cols(), bm.cols(), rng);
        blocks.push(&(&bn * &core) * &bm.adjoint());
    }
    AdjointableOperator::new(&m, &n, MatrixOverA::from_blocks(shape, k, k, blocks)?)
}

/// Bands for planted singular values: each clears the rank cutoff and its
/// neighbours by far more than the factor-10 separation.
const LARGE_BAND: (f64, f64) = (1.0, 2.0);
const SMALL_BAND: (f64, f64) = (1e-5, 2e-5);

/// Random operator between random modules of ambient ranks `ks` and `kt`
/// whose singular values are planted in `[1, 2]`, `[1e-5, 2e-5]` or at 0.
/// When the modules allow it, at least one value lands in each nonzero band.
pub fn random_fredholm_operator<R: Rng + ?Sized>(
    shape: &AlgebraShape,
    ks: usize,
    kt: usize,
    rng: &mut R,
) -> Result<AdjointableOperator> {
    let pairs = |m: &HilbertModule, n: &HilbertModule| -> usize {
        m.block_ranks()
            .iter()
            .zip(n.block_ranks())
            .map(|(a, b)| (*a).min(b))
            .sum()
    };
    let (mut m, mut n) = (
        HilbertModule::random_with(shape, ks, rng),
        HilbertModule::random_with(shape, kt, rng),
    );
    for _ in 0..256 {
        if pairs(&m, &n) >= 2 {
            break;
        }
        m = HilbertModule::random_with(shape, ks, rng);
        n = HilbertModule::random_with(shape, kt, rng);
    }
    let mut planted = 0usize;
    let mut blocks = Vec::with_capacity(shape.num_blocks());
    for i in 0..shape.num_blocks() {
        let (bm, bn) = (m.range_basis(i)?, n.range_basis(i)?);
        let (dm, dn) = (bm.cols(), bn.cols());
        let mut core = ComplexMatrix::zeros(dn, dm);
        for j in 0..dm.min(dn) {
            let band = match planted {
                0 => 0,
                1 => 1,
                _ => rng.random_range(0..3),
            };
            planted += 1;
            core[(j, j)] = match band {
                0 => rng.random_range(LARGE_BAND.0..LARGE_BAND.1),
                1 => rng.random_range(SMALL_BAND.0..SMALL_BAND.1),
                _ => 0.0,
            }
            .into();
        }
        let (wm, wn) = (random_frame(dm, dm, rng), random_frame(dn, dn, rng));
        let core = &(&wn * &core) * &wm.adjoint();
        blocks.push(&(&bn * &core) * &bm.adjoint());
    }
    AdjointableOperator::new(&m, &n, MatrixOverA::from_blocks(shape, kt, ks, blocks)?)
}

/// The diagonal operator `a ↦ (λ₁δ₁a, …, λₙδₙa)` with `λᵢ = 1/i`, from
/// `A = ℂⁿ` into the submodule of `Aⁿ` generated by `eᵢ·δᵢ`, where `δᵢ` is
/// the `i`-th minimal projection of `A`.
#[derive(Clone, Debug)]
pub struct CounterexampleInstance {
    pub n: usize,
    pub shape: AlgebraShape,
    pub lambdas: Vec<f64>,
    pub submodule: Submodule,
    pub op: AdjointableOperator,
}

pub fn build_counterexample(n: usize) -> Result<CounterexampleInstance> {
    if n == 0 {
        return Err(Error::Invalid("truncation size must be positive".into()));
    }
    let shape = AlgebraShape::commutative(n)?;
    let source = HilbertModule::free(&shape, 1);
    let ambient = HilbertModule::free(&shape, n);
    let gens = (0..n)
        .map(|i| ambient.generator(i).act(&AlgebraElement::block_unit(&shape, i)))
        .collect::<Result<Vec<_>>>()?;
    let submodule = submodule_from_generators(&ambient, &gens, &Tolerances::default())?;
    let lambdas: Vec<f64> = (1..=n).map(|i| 1.0 / i as f64).collect();
    let entries: Vec<AlgebraElement> = lambdas
        .iter()
        .enumerate()
        .map(|(i, &l)| AlgebraElement::block_unit(&shape, i).scale(l.into()))
        .collect();
    let mat = MatrixOverA::from_entries(&shape, n, 1, &entries)?;
    let op = AdjointableOperator::new(&source, &submodule.as_module(), mat)?;
    Ok(CounterexampleInstance {
        n,
        shape,
        lambdas,
        submodule,
        op,
    })
}

/// Divergence signatures of a truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct CounterexampleDiagnostics {
    pub n: usize,
    /// `‖(T*T)^{-1/2}‖`.
    pub inv_sqrt_norm: f64,
    /// `‖f(1) − P_m f(1)‖` for `m = 0, …, n−1`, where `f = T(T*T)^{-1/2}` and
    /// `P_m` keeps the first `m` coordinates.
    pub tail_norms: Vec<f64>,
    /// `‖f*f − id‖`.
    pub isometry_defect: f64,
    /// `‖⟨f(1), f(1)⟩ − 1‖`.
    pub unit_defect: f64,
    /// Largest deviation of the singular values of `T` from `λᵢ`.
    pub singular_value_error: f64,
}

impl CounterexampleDiagnostics {
    pub fn tail_norm_min(&self) -> f64 {
        self.tail_norms.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn tail_norm_max(&self) -> f64 {
        self.tail_norms.iter().copied().fold(0.0, f64::max)
    }
}

pub fn counterexample_diagnostics(
    inst: &CounterexampleInstance,
    tol: &Tolerances,
) -> Result<CounterexampleDiagnostics> {
    let t = &inst.op;
    let inv_sqrt = t.adjoint().compose(t)?.psd_sqrt(tol)?.psd_pinv(tol)?;
    let f = t.compose(&inv_sqrt)?;
    let one = t.source().generator(0);
    let f_one = f.apply(&one)?;
    let zero = AlgebraElement::zero(&inst.shape);
    let mut tail = f_one.vec().clone();
    let mut tail_norms = Vec::with_capacity(inst.n);
    for m in 0..inst.n {
        if m > 0 {
            tail.set_entry(m - 1, 0, &zero)?;
        }
        tail_norms.push(tail.norm());
    }
    let mut sigma: Vec<f64> = t.singular_values()?.into_iter().flatten().collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    let singular_value_error = if sigma.len() == inst.n {
        sigma
            .iter()
            .zip(&inst.lambdas)
            .map(|(s, l)| (s - l).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(CounterexampleDiagnostics {
        n: inst.n,
        inv_sqrt_norm: inv_sqrt.norm(),
        tail_norms,
        isometry_defect: f.unitary_defects()?.0,
        unit_defect: inner(&f_one, &f_one)?.distance(&AlgebraElement::one(&inst.shape))?,
        singular_value_error,
    })
}
