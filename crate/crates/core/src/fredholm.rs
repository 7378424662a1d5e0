//! K₀ bookkeeping and the Mishchenko–Fomenko calculus for operators between
//! finitely generated modules: decompositions `M = M₀ ⊕ M₁`, `N = N₀ ⊕ N₁`
//! in which the operator is block diagonal with an invertible corner, the
//! index computed from such a decomposition, the index computed from kernel
//! and cokernel, and a cross-check of the two.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use crate::algebra::{AlgebraShape, MatrixOverA};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Tolerances, SEPARATION};
use crate::module::{projection_onto, span_in, HilbertModule, Submodule};
use crate::operator::{image, kernel, kernel_with_cutoff, polar_isometry, AdjointableOperator};

/// An element of `K₀(A) ≅ ℤ^s`, one minimal-projection count per block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct K0Class {
    shape: AlgebraShape,
    ranks: Vec<i64>,
}

impl K0Class {
    pub fn new(shape: &AlgebraShape, ranks: Vec<i64>) -> Result<Self> {
        if ranks.len() != shape.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "{} ranks for {} blocks",
                ranks.len(),
                shape.num_blocks()
            )));
        }
        Ok(Self {
            shape: shape.clone(),
            ranks,
        })
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        Self {
            shape: shape.clone(),
            ranks: alloc::vec![0; shape.num_blocks()],
        }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn ranks(&self) -> &[i64] {
        &self.ranks
    }

    pub fn is_zero(&self) -> bool {
        self.ranks.iter().all(|&r| r == 0)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.shape.ensure_same(&other.shape)?;
        let ranks = self.ranks.iter().zip(&other.ranks).map(|(a, b)| a + b).collect();
        Ok(Self {
            shape: self.shape.clone(),
            ranks,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-other)
    }
}

impl Add for &K0Class {
    type Output = K0Class;

    /// Panics when the shapes differ; use [`K0Class::checked_add`] otherwise.
    fn add(self, rhs: &K0Class) -> K0Class {
        self.checked_add(rhs).expect("K0 classes over different algebras")
    }
}

impl Sub for &K0Class {
    type Output = K0Class;

    fn sub(self, rhs: &K0Class) -> K0Class {
        self.checked_sub(rhs).expect("K0 classes over different algebras")
    }
}

impl Neg for &K0Class {
    type Output = K0Class;

    fn neg(self) -> K0Class {
        K0Class {
            shape: self.shape.clone(),
            ranks: self.ranks.iter().map(|r| -r).collect(),
        }
    }
}

impl fmt::Display for K0Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, r) in self.ranks.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str(")")
    }
}

/// Block ranks of the projection, each read off its singular values with one
/// cutoff for the whole module.
pub fn k0_class(m: &HilbertModule, tol: &Tolerances) -> Result<K0Class> {
    let svds = m
        .projection()
        .blocks()
        .iter()
        .map(linalg::svd)
        .collect::<Result<Vec<_>>>()?;
    let sigma_max = svds
        .iter()
        .filter_map(|s| s.sigma.first().copied())
        .fold(0.0, f64::max);
    let cutoff = tol.rank_rel * sigma_max;
    let mut ranks = Vec::with_capacity(svds.len());
    for s in &svds {
        if let Some(value) = linalg::ambiguous_value(&s.sigma, cutoff) {
            return Err(Error::ToleranceAmbiguity { value, cutoff });
        }
        ranks.push(linalg::rank_above(&s.sigma, cutoff) as i64);
    }
    K0Class::new(m.shape(), ranks)
}

/// A decomposition `M = M₀ ⊕ M₁`, `N = N₀ ⊕ N₁` with `F = F₀ ⊕ F₁` and
/// `F₀: M₀ → N₀` invertible. `M₀ ⊥ M₁` always; `N₀, N₁` need only be
/// complementary.
#[derive(Clone, Debug)]
pub struct FredholmData {
    pub m0: Submodule,
    pub m1: Submodule,
    pub n0: Submodule,
    pub n1: Submodule,
    pub f0: AdjointableOperator,
    pub f1: AdjointableOperator,
    /// `[M₁] − [N₁]`.
    pub index: K0Class,
}

fn scale_of(f: &AdjointableOperator) -> f64 {
    let n = f.norm();
    if n > 0.0 {
        n
    } else {
        1.0
    }
}

fn complement_in(ambient: &HilbertModule, p: &MatrixOverA) -> Result<MatrixOverA> {
    ambient.projection().sub(p)
}

impl FredholmData {
    /// Assembles a decomposition from its parts, computing the index.
    pub fn from_parts(
        m0: Submodule,
        m1: Submodule,
        n0: Submodule,
        n1: Submodule,
        f0: AdjointableOperator,
        f1: AdjointableOperator,
        tol: &Tolerances,
    ) -> Result<Self> {
        let index = k0_class(&m1.as_module(), tol)?.checked_sub(&k0_class(&n1.as_module(), tol)?)?;
        Ok(Self {
            m0,
            m1,
            n0,
            n1,
            f0,
            f1,
            index,
        })
    }

    pub fn source(&self) -> &HilbertModule {
        self.m0.ambient()
    }

    pub fn target(&self) -> &HilbertModule {
        self.n0.ambient()
    }

    /// `F₀ P_{M₀} + F₁ P_{M₁}` as a map `M → N`.
    pub fn operator(&self) -> Result<AdjointableOperator> {
        let mat = self
            .f0
            .matrix()
            .mul(self.m0.projection())?
            .add(&self.f1.matrix().mul(self.m1.projection())?)?;
        AdjointableOperator::new(self.source(), self.target(), mat)
    }

    /// Every structural identity of the decomposition relative to `f`, as a
    /// named residual; relative ones are divided by `‖f‖`.
    pub fn residuals(&self, f: &AdjointableOperator, tol: &Tolerances) -> Result<BTreeMap<String, f64>> {
        let (m, n) = (self.source(), self.target());
        let pm0 = self.m0.projection();
        let pm1 = self.m1.projection();
        let pn0 = self.n0.projection();
        let pn1 = self.n1.projection();
        let scale = scale_of(f);
        let mut out = BTreeMap::new();
        out.insert(
            "source_split".to_string(),
            pm0.add(pm1)?.distance(m.projection())?,
        );
        out.insert("source_orthogonality".to_string(), pm0.mul(pm1)?.norm());
        let both = span_in(n, &pn0.hstack(pn1)?, tol)?;
        out.insert(
            "target_span".to_string(),
            both.distance(&Submodule::whole(n))?,
        );
        let rank_gap = k0_class(&self.n0.as_module(), tol)?
            .checked_add(&k0_class(&self.n1.as_module(), tol)?)?
            .checked_sub(&k0_class(n, tol)?)?;
        out.insert(
            "target_rank_excess".to_string(),
            rank_gap.ranks().iter().map(|r| r.unsigned_abs()).max().unwrap_or(0) as f64,
        );
        let fm = f.matrix();
        let leak0 = complement_in(n, pn0)?.mul(fm)?.mul(pm0)?.norm();
        let leak1 = complement_in(n, pn1)?.mul(fm)?.mul(pm1)?.norm();
        out.insert("off_diagonal".to_string(), leak0.max(leak1) / scale);
        out.insert(
            "reconstruction".to_string(),
            self.operator()?.distance(f)? / scale,
        );
        Ok(out)
    }

    /// `σ_min(F₀) / ‖F‖` together with whether `F₀` is square block by block.
    pub fn corner_gap(&self, f: &AdjointableOperator, tol: &Tolerances) -> Result<(f64, bool)> {
        let square = k0_class(&self.m0.as_module(), tol)? == k0_class(&self.n0.as_module(), tol)?;
        let sigma_min = self
            .f0
            .singular_values()?
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min);
        Ok((if sigma_min.is_finite() { sigma_min / scale_of(f) } else { 1.0 }, square))
    }

    /// Checks every invariant against `f`.
    pub fn validate(&self, f: &AdjointableOperator, tol: &Tolerances) -> Result<()> {
        for (name, value) in self.residuals(f, tol)? {
            if value > tol.invariant_abs {
                return Err(Error::PreconditionFailed(format!("{name} residual {value:e}")));
            }
        }
        let (gap, square) = self.corner_gap(f, tol)?;
        if !square || gap <= tol.rank_rel {
            return Err(Error::PreconditionFailed("F0 is not an isomorphism".into()));
        }
        Ok(())
    }
}

/// Decomposition at the rank cutoff `rank_rel · ‖F‖`.
pub fn mf_decompose(f: &AdjointableOperator, tol: &Tolerances) -> Result<FredholmData> {
    mf_decompose_with_threshold(f, tol.rank_rel * f.norm(), tol)
}

/// Decomposition with `M₀` spanned by the right singular vectors whose
/// singular value exceeds `threshold`. Fails with `ToleranceAmbiguity` when a
/// singular value lies within a factor 10 of the threshold.
pub fn mf_decompose_with_threshold(
    f: &AdjointableOperator,
    threshold: f64,
    tol: &Tolerances,
) -> Result<FredholmData> {
    let (m, n) = (f.source(), f.target());
    let svds = f.restricted_svds()?;
    for (_, s) in &svds {
        if let Some(value) = linalg::ambiguous_value(&s.sigma, threshold) {
            return Err(Error::ToleranceAmbiguity {
                value,
                cutoff: threshold,
            });
        }
    }
    let (km, kn) = (m.ambient_rank(), n.ambient_rank());
    let mut m0 = Vec::with_capacity(svds.len());
    let mut m1 = Vec::with_capacity(svds.len());
    let mut n0 = Vec::with_capacity(svds.len());
    for (i, (basis, s)) in svds.iter().enumerate() {
        let r = linalg::rank_above(&s.sigma, threshold);
        let lead: Vec<usize> = (0..r).collect();
        let rest: Vec<usize> = (r..basis.cols()).collect();
        let top = basis * &s.v.select_columns(&lead);
        m0.push(projection_onto(&top));
        m1.push(projection_onto(&(basis * &s.v.select_columns(&rest))));
        let inv = ComplexMatrix::from_real_diag(&s.sigma[..r].iter().map(|x| 1.0 / x).collect::<Vec<_>>());
        n0.push(projection_onto(&(&(f.matrix().block(i) * &top) * &inv)));
    }
    let m0 = Submodule::from_projection(m, MatrixOverA::from_blocks(m.shape(), km, km, m0)?, tol)?;
    let m1 = Submodule::from_projection(m, MatrixOverA::from_blocks(m.shape(), km, km, m1)?, tol)?;
    let n0 = Submodule::from_projection(n, MatrixOverA::from_blocks(n.shape(), kn, kn, n0)?, tol)?;
    let n1 = n0.orthogonal_complement()?;
    let f0 = f.between(&m0.as_module(), &n0.as_module())?;
    let f1 = f.between(&m1.as_module(), &n1.as_module())?;
    FredholmData::from_parts(m0, m1, n0, n1, f0, f1, tol)
}

/// Replaces `N₁` by `N₀^⊥` and `F₁` by `(1 − P)F₁` with
/// `P = F₀(F₀*F₀)⁻¹F₀*`, the orthogonal projection onto `N₀`.
pub fn orthogonalize_target(data: &FredholmData, tol: &Tolerances) -> Result<FredholmData> {
    let n = data.target();
    // F₀(F₀*F₀)⁻¹F₀* = (F₀F₀⁺)(F₀F₀⁺)*, grouped so that no intermediate
    // product carries the square of the condition number.
    let range = data.f0.compose(&data.f0.pinv(tol)?)?;
    let p = range.matrix().mul(&range.matrix().adjoint())?;
    let n1 = Submodule::from_projection(n, complement_in(n, &p)?, tol)?;
    let f1 = AdjointableOperator::new(
        &data.m1.as_module(),
        &n1.as_module(),
        n1.projection().mul(data.f1.matrix())?,
    )?;
    FredholmData::from_parts(
        data.m0.clone(),
        data.m1.clone(),
        data.n0.clone(),
        n1,
        data.f0.clone(),
        f1,
        tol,
    )
}

/// `[Ker F] − [Ker F*]`.
pub fn index_via_kernels(f: &AdjointableOperator, tol: &Tolerances) -> Result<K0Class> {
    let ker = k0_class(&kernel(f, tol)?.as_module(), tol)?;
    let coker = k0_class(&kernel(&f.adjoint(), tol)?.as_module(), tol)?;
    ker.checked_sub(&coker)
}

/// Thresholds giving valid decompositions other than the default: one above
/// the whole spectrum, and the geometric mean of every pair of consecutive
/// singular values (above the rank cutoff, with the cutoff itself appended)
/// whose ratio is at least `SEPARATION²`.
pub fn alternative_thresholds(f: &AdjointableOperator, tol: &Tolerances) -> Result<Vec<f64>> {
    let sigma_max = f.norm();
    let cutoff = tol.rank_rel * sigma_max;
    let mut values: Vec<f64> = f
        .singular_values()?
        .into_iter()
        .flatten()
        .filter(|&s| s > cutoff)
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    if cutoff > 0.0 {
        values.push(cutoff);
    }
    let mut out = alloc::vec![SEPARATION * SEPARATION * sigma_max.max(f64::MIN_POSITIVE)];
    for pair in values.windows(2) {
        if pair[0] >= SEPARATION * SEPARATION * pair[1] {
            out.push(num_traits::Float::sqrt(pair[0] * pair[1]));
        }
    }
    Ok(out)
}

/// Output of [`verify_index_formula`].
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndexReport {
    pub index_decomp: Option<K0Class>,
    pub index_kernels: Option<K0Class>,
    pub residuals: BTreeMap<String, f64>,
    pub flags: Vec<String>,
}

impl IndexReport {
    pub fn passed(&self) -> bool {
        self.flags.is_empty()
    }
}

fn flag_for(err: &Error) -> String {
    match err {
        Error::ToleranceAmbiguity { .. } => format!("ToleranceAmbiguity: {err}"),
        other => format!("Error: {other}"),
    }
}

/// Runs both index computations and every intermediate step of the
/// argument linking them, recording each identity as a residual. Nothing is
/// thrown: failures become flags.
pub fn verify_index_formula(f: &AdjointableOperator, tol: &Tolerances) -> IndexReport {
    let mut report = IndexReport {
        index_decomp: None,
        index_kernels: None,
        residuals: BTreeMap::new(),
        flags: Vec::new(),
    };
    if let Err(err) = run_index_checks(f, tol, &mut report) {
        report.flags.push(flag_for(&err));
    }
    for (name, value) in &report.residuals {
        if value.is_nan() || *value > tol.invariant_abs {
            report.flags.push(format!("residual {name} = {value:e} exceeds {:e}", tol.invariant_abs));
        }
    }
    if let (Some(a), Some(b)) = (&report.index_decomp, &report.index_kernels) {
        if a != b {
            report.flags.push(format!("index mismatch: decomposition {a}, kernels {b}"));
        }
    }
    report
}

fn containment(inner: &MatrixOverA, outer: &MatrixOverA) -> Result<f64> {
    outer.mul(inner)?.distance(inner)
}

fn run_index_checks(f: &AdjointableOperator, tol: &Tolerances, report: &mut IndexReport) -> Result<()> {
    let (m, n) = (f.source(), f.target());
    let scale = scale_of(f);
    let res = &mut report.residuals;

    let data = mf_decompose(f, tol)?;
    report.index_decomp = Some(data.index.clone());
    for (name, value) in data.residuals(f, tol)? {
        res.insert(format!("decomposition.{name}"), value);
    }
    let (gap, square) = data.corner_gap(f, tol)?;
    if !square || gap <= tol.rank_rel {
        return Err(Error::PreconditionFailed("F0 is not an isomorphism".into()));
    }

    let orth = orthogonalize_target(&data, tol)?;
    res.insert(
        "orthogonalized.target_orthogonality".into(),
        orth.n0.projection().mul(orth.n1.projection())?.norm(),
    );
    res.insert(
        "orthogonalized.index_change".into(),
        if orth.index == data.index { 0.0 } else { 1.0 },
    );
    let f_tilde = orth.operator()?;

    let ker = kernel(f, tol)?;
    let ker_tilde = kernel(&f_tilde, tol)?;
    res.insert("orthogonalized.kernel_change".into(), ker.distance(&ker_tilde)?);
    let im = image(f, tol)?;
    res.insert(
        "orthogonalized.image_change".into(),
        im.distance(&image(&f_tilde, tol)?)?,
    );

    let coker = im.orthogonal_complement()?;
    let ker_adj = kernel(&f.adjoint(), tol)?;
    res.insert("cokernel_is_adjoint_kernel".into(), coker.distance(&ker_adj)?);
    res.insert(
        "kernel_in_m1".into(),
        containment(ker.projection(), orth.m1.projection())?,
    );
    res.insert(
        "cokernel_in_n1".into(),
        containment(coker.projection(), orth.n1.projection())?,
    );

    // M₁ = Ker F₁ ⊕ M₂ and N₁ = (Im F)^⊥ ⊕ N₂, with F₁: M₂ → N₂ injective and dense.
    let ker_f1 = kernel_with_cutoff(&orth.f1, tol.rank_rel * f.norm(), tol)?;
    let ker_f1_full = Submodule::from_projection(m, ker_f1.projection().clone(), tol)?;
    res.insert("kernel_f1_is_kernel".into(), ker_f1_full.distance(&ker)?);
    let m2 = Submodule::from_projection(m, orth.m1.projection().sub(ker.projection())?, tol)?;
    let n2 = Submodule::from_projection(n, orth.n1.projection().sub(coker.projection())?, tol)?;
    let (m2_mod, n2_mod) = (m2.as_module(), n2.as_module());
    let f2 = f_tilde.between(&m2_mod, &n2_mod)?;
    let iso = polar_isometry(&f2, tol)?;
    let (d1, d2) = iso.unitary_defects()?;
    res.insert("m2_isometric_to_n2".into(), d1.max(d2));
    res.insert(
        "m2_n2_image_closure".into(),
        iso.target().projection().distance(n2.projection())?,
    );
    let class_gap = k0_class(&m2_mod, tol)?.checked_sub(&k0_class(&n2_mod, tol)?)?;
    res.insert(
        "m2_n2_class_gap".into(),
        class_gap.ranks().iter().map(|r| r.unsigned_abs()).max().unwrap_or(0) as f64,
    );

    // F̃ = F₀ ⊕ F₂ ⊕ 0 on M₀ ⊕ M₂ ⊕ Ker F → N₀ ⊕ N₂ ⊕ (Im F)^⊥.
    let three_block = orth
        .n0
        .projection()
        .mul(f_tilde.matrix())?
        .mul(orth.m0.projection())?
        .add(&n2.projection().mul(f_tilde.matrix())?.mul(m2.projection())?)?;
    res.insert(
        "three_block_form".into(),
        three_block.distance(f_tilde.matrix())? / scale,
    );

    let kernels = index_via_kernels(f, tol)?;
    let arithmetic = k0_class(&ker.as_module(), tol)?
        .checked_add(&k0_class(&m2_mod, tol)?)?
        .checked_sub(&k0_class(&n2_mod, tol)?)?
        .checked_sub(&k0_class(&coker.as_module(), tol)?)?;
    res.insert(
        "index_arithmetic".into(),
        if arithmetic == data.index { 0.0 } else { 1.0 },
    );
    let whole = k0_class(m, tol)?.checked_sub(&k0_class(n, tol)?)?;
    res.insert(
        "index_is_m_minus_n".into(),
        if whole == data.index { 0.0 } else { 1.0 },
    );
    report.index_kernels = Some(kernels);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraElement;
    use crate::linalg::C64;
    use crate::module::direct_sum;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn shape(d: &[usize]) -> AlgebraShape {
        AlgebraShape::new(d.to_vec()).unwrap()
    }

    fn class(s: &AlgebraShape, r: &[i64]) -> K0Class {
        K0Class::new(s, r.to_vec()).unwrap()
    }

    #[test]
    fn k0_examples() {
        let s = shape(&[1, 2]);
        assert_eq!(k0_class(&HilbertModule::free(&s, 1), &tol()).unwrap(), class(&s, &[1, 2]));
        assert!(k0_class(&HilbertModule::zero(&s), &tol()).unwrap().is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            let a = HilbertModule::random_with(&s, 2, &mut rng);
            let b = HilbertModule::random_with(&s, 3, &mut rng);
            let sum = k0_class(&direct_sum(&a, &b).unwrap(), &tol()).unwrap();
            let parts = &k0_class(&a, &tol()).unwrap() + &k0_class(&b, &tol()).unwrap();
            assert_eq!(sum, parts);
        }
    }

    #[test]
    fn k0_arithmetic_and_display() {
        let s = shape(&[1, 2]);
        let a = class(&s, &[1, 2]);
        let b = class(&s, &[3, 0]);
        assert_eq!((&a - &b).ranks(), &[-2, 2]);
        assert_eq!(alloc::format!("{}", &a - &b), "(-2, 2)");
        assert!(K0Class::new(&s, vec![1]).is_err());
        assert!(a.checked_add(&K0Class::zero(&shape(&[1]))).is_err());
    }

    #[test]
    fn identity_decomposes_trivially() {
        let s = shape(&[1, 2]);
        let m = HilbertModule::free(&s, 2);
        let id = AdjointableOperator::identity(&m);
        let data = mf_decompose(&id, &tol()).unwrap();
        assert!(data.m1.as_module().is_zero() && data.n1.as_module().is_zero());
        assert!(data.index.is_zero());
        data.validate(&id, &tol()).unwrap();
        let report = verify_index_formula(&id, &tol());
        assert!(report.passed(), "{:?}", report.flags);
        assert!(report.residuals.values().all(|&v| v < 1e-12), "{:?}", report.residuals);
    }

    #[test]
    fn zero_operator_index() {
        let s = shape(&[1, 2]);
        let m = HilbertModule::free(&s, 2);
        let n = HilbertModule::free(&s, 3);
        let zero = AdjointableOperator::zero(&m, &n);
        let data = mf_decompose(&zero, &tol()).unwrap();
        assert_eq!(data.index, class(&s, &[-1, -2]));
        assert_eq!(index_via_kernels(&zero, &tol()).unwrap(), data.index);
        assert!(verify_index_formula(&zero, &tol()).passed());
    }

    #[test]
    fn row_operator_index() {
        let s = shape(&[1, 2]);
        let m = HilbertModule::free(&s, 2);
        let n = HilbertModule::free(&s, 1);
        let one = AlgebraElement::one(&s);
        let zero = AlgebraElement::zero(&s);
        let mat = MatrixOverA::from_entries(&s, 1, 2, &[one, zero]).unwrap();
        let f = AdjointableOperator::new(&m, &n, mat).unwrap();
        assert_eq!(mf_decompose(&f, &tol()).unwrap().index, class(&s, &[1, 2]));
        assert_eq!(index_via_kernels(&f, &tol()).unwrap(), class(&s, &[1, 2]));
        let report = verify_index_formula(&f, &tol());
        assert!(report.passed(), "{:?}", report.flags);
    }

    #[test]
    fn random_operators_agree() {
        let s = shape(&[1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let m = HilbertModule::random_with(&s, 3, &mut rng);
            let n = HilbertModule::random_with(&s, 2, &mut rng);
            let f = AdjointableOperator::new(&m, &n, MatrixOverA::random_with(&s, 2, 3, &mut rng))
                .unwrap();
            let report = verify_index_formula(&f, &tol());
            assert!(report.passed(), "{:?} {:?}", report.flags, report.residuals);
            let whole = &k0_class(&m, &tol()).unwrap() - &k0_class(&n, &tol()).unwrap();
            assert_eq!(report.index_kernels.unwrap(), whole);
        }
    }

    #[test]
    fn near_cutoff_value_is_flagged() {
        let s = shape(&[1]);
        let m = HilbertModule::free(&s, 2);
        let mut mat = MatrixOverA::identity(&s, 2);
        mat.set_entry(1, 1, &AlgebraElement::scalar(&s, C64::new(5e-10, 0.0))).unwrap();
        let f = AdjointableOperator::new(&m, &m, mat).unwrap();
        let report = verify_index_formula(&f, &tol());
        assert!(report.flags.iter().any(|x| x.starts_with("ToleranceAmbiguity")));
    }

    /// `F = F₀ ⊕ F₁` built from a skewed target decomposition
    /// `N₁ = {y + Ay : y ∈ N₀^⊥}`.
    fn skewed_instance(seed: u64) -> (AdjointableOperator, FredholmData) {
        let s = shape(&[2]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = 3;
        let m = HilbertModule::free(&s, k);
        let n = HilbertModule::free(&s, k);
        let m0 = Submodule::random_with(&m, &mut rng).unwrap();
        let m1 = m0.orthogonal_complement().unwrap();
        let ranks = k0_class(&m0.as_module(), &tol()).unwrap();
        let frame = crate::module::random_frame(2 * k, ranks.ranks()[0] as usize, &mut rng);
        let pn0 = MatrixOverA::from_blocks(&s, k, k, vec![projection_onto(&frame)]).unwrap();
        let n0 = Submodule::from_projection(&n, pn0, &tol()).unwrap();
        let perp = n0.orthogonal_complement().unwrap();
        let a = n0
            .projection()
            .mul(&MatrixOverA::random_with(&s, k, k, &mut rng))
            .unwrap()
            .mul(perp.projection())
            .unwrap();
        let graph = perp.projection().add(&a).unwrap();
        let n1 = span_in(&n, &graph, &tol()).unwrap();
        let g = MatrixOverA::random_with(&s, k, k, &mut rng);
        let f0 = AdjointableOperator::new(&m0.as_module(), &n0.as_module(), g.clone()).unwrap();
        let f1_raw = graph.mul(&MatrixOverA::random_with(&s, k, k, &mut rng)).unwrap();
        let f1 = AdjointableOperator::new(&m1.as_module(), &n1.as_module(), f1_raw).unwrap();
        let data = FredholmData::from_parts(m0, m1, n0, n1, f0, f1, &tol()).unwrap();
        (data.operator().unwrap(), data)
    }

    #[test]
    fn orthogonalization_of_skewed_data() {
        for seed in 0..5 {
            let (f, data) = skewed_instance(seed);
            data.validate(&f, &tol()).unwrap();
            let orth = orthogonalize_target(&data, &tol()).unwrap();
            assert!(orth.n0.projection().mul(orth.n1.projection()).unwrap().norm() < 1e-9);
            assert_eq!(orth.index, data.index);
            let ft = orth.operator().unwrap();
            assert!(kernel(&ft, &tol()).unwrap().distance(&kernel(&f, &tol()).unwrap()).unwrap() < 1e-8);
            assert!(image(&ft, &tol()).unwrap().distance(&image(&f, &tol()).unwrap()).unwrap() < 1e-8);
            assert_eq!(data.index, index_via_kernels(&f, &tol()).unwrap());
        }
    }

    #[test]
    fn orthogonalization_keeps_orthogonal_data() {
        let s = shape(&[1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = HilbertModule::random_with(&s, 3, &mut rng);
        let n = HilbertModule::random_with(&s, 3, &mut rng);
        let f = AdjointableOperator::new(&m, &n, MatrixOverA::random_with(&s, 3, 3, &mut rng)).unwrap();
        let data = mf_decompose(&f, &tol()).unwrap();
        let orth = orthogonalize_target(&data, &tol()).unwrap();
        assert!(orth.n1.distance(&data.n1).unwrap() < 1e-9);
        assert!(orth.f1.distance(&data.f1).unwrap() < 1e-9);
    }

    #[test]
    fn alternative_thresholds_give_same_index() {
        let s = shape(&[1]);
        let m = HilbertModule::free(&s, 3);
        let diag = [1.0, 1e-5, 0.0];
        let entries: Vec<AlgebraElement> = (0..9)
            .map(|e| {
                let (r, c) = (e / 3, e % 3);
                let v = if r == c { diag[r] } else { 0.0 };
                AlgebraElement::scalar(&s, C64::new(v, 0.0))
            })
            .collect();
        let f = AdjointableOperator::new(&m, &m, MatrixOverA::from_entries(&s, 3, 3, &entries).unwrap())
            .unwrap();
        let thresholds = alternative_thresholds(&f, &tol()).unwrap();
        assert_eq!(thresholds.len(), 3);
        let mut m0_ranks = Vec::new();
        for t in thresholds {
            let data = mf_decompose_with_threshold(&f, t, &tol()).unwrap();
            data.validate(&f, &tol()).unwrap();
            assert!(data.index.is_zero());
            m0_ranks.push(k0_class(&data.m0.as_module(), &tol()).unwrap().ranks()[0]);
        }
        assert_eq!(m0_ranks, vec![0, 1, 2]);
    }
}
