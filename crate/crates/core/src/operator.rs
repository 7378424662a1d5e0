//! Adjointable operators between Hilbert modules and the constructions built
//! from them: Banach duals, sharps of inclusions, kernels and images, the
//! isometric isomorphism `M′ ≅ N′` induced by an operator with trivial kernels
//! and dense range, and the orthogonal decomposition attached to a submodule.
//!
//! Dual modules are carried in Riesz coordinates (see [`crate::duality`]), so
//! an operator `N′ → M′` is stored as a matrix acting `N → M`.

use alloc::vec::Vec;

use crate::algebra::MatrixOverA;
use crate::duality::{dual_inner, hat, riesz_from_evaluations, DualElement};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Svd, Tolerances, C64};
use crate::module::{inner, projection_onto, span_in, HilbertModule, ModuleElement, Submodule};

/// An `A`-linear map between two modules, stored as a matrix over `A`
/// compressed to `P_target · mat · P_source`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointableOperator {
    source: HilbertModule,
    target: HilbertModule,
    mat: MatrixOverA,
}

impl AdjointableOperator {
    pub fn new(source: &HilbertModule, target: &HilbertModule, mat: MatrixOverA) -> Result<Self> {
        if mat.shape() != source.shape() || mat.shape() != target.shape() {
            return Err(Error::ShapeMismatch("operator over a different algebra".into()));
        }
        if mat.rows() != target.ambient_rank() || mat.cols() != source.ambient_rank() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{}x{} matrix for a map A^{} -> A^{}",
                mat.rows(),
                mat.cols(),
                source.ambient_rank(),
                target.ambient_rank()
            )));
        }
        let mat = target.projection().mul(&mat)?.mul(source.projection())?;
        Ok(Self {
            source: source.clone(),
            target: target.clone(),
            mat,
        })
    }

    pub fn identity(m: &HilbertModule) -> Self {
        Self {
            source: m.clone(),
            target: m.clone(),
            mat: m.projection().clone(),
        }
    }

    pub fn zero(source: &HilbertModule, target: &HilbertModule) -> Self {
        Self {
            source: source.clone(),
            target: target.clone(),
            mat: MatrixOverA::zeros(source.shape(), target.ambient_rank(), source.ambient_rank()),
        }
    }

    /// The inclusion `J: K → L` of a submodule.
    pub fn inclusion(k: &Submodule) -> Self {
        Self {
            source: k.as_module(),
            target: k.ambient().clone(),
            mat: k.projection().clone(),
        }
    }

    /// Matrix of an `A`-linear map given pointwise: column `j` is the image of
    /// the generator `P_source e_j`.
    pub fn from_module_map(
        source: &HilbertModule,
        target: &HilbertModule,
        f: impl Fn(&ModuleElement) -> Result<ModuleElement>,
    ) -> Result<Self> {
        let k = source.ambient_rank();
        let mut mat = MatrixOverA::zeros(source.shape(), target.ambient_rank(), 0);
        for j in 0..k {
            let image = f(&source.generator(j))?;
            if image.module() != target {
                return Err(Error::ParentMismatch);
            }
            mat = mat.hstack(image.vec())?;
        }
        Self::new(source, target, mat)
    }

    pub fn source(&self) -> &HilbertModule {
        &self.source
    }

    pub fn target(&self) -> &HilbertModule {
        &self.target
    }

    pub fn matrix(&self) -> &MatrixOverA {
        &self.mat
    }

    pub fn apply(&self, x: &ModuleElement) -> Result<ModuleElement> {
        if x.module() != &self.source {
            return Err(Error::ParentMismatch);
        }
        self.target.project(&self.mat.mul(x.vec())?)
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &AdjointableOperator) -> Result<AdjointableOperator> {
        if first.target != self.source
            && !first.target.same_as(&self.source, &Tolerances::default())
        {
            return Err(Error::ParentMismatch);
        }
        Self::new(&first.source, &self.target, self.mat.mul(&first.mat)?)
    }

    pub fn adjoint(&self) -> AdjointableOperator {
        Self {
            source: self.target.clone(),
            target: self.source.clone(),
            mat: self.mat.adjoint(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn add(&self, other: &AdjointableOperator) -> Result<AdjointableOperator> {
        Self::new(&self.source, &self.target, self.mat.add(&other.mat)?)
    }

    pub fn sub(&self, other: &AdjointableOperator) -> Result<AdjointableOperator> {
        Self::new(&self.source, &self.target, self.mat.sub(&other.mat)?)
    }

    /// Operator-norm distance of the underlying matrices.
    pub fn distance(&self, other: &AdjointableOperator) -> Result<f64> {
        self.mat.distance(&other.mat)
    }

    /// The same matrix, viewed between other modules (compressed again).
    pub fn between(&self, source: &HilbertModule, target: &HilbertModule) -> Result<Self> {
        Self::new(source, target, self.mat.clone())
    }

    /// `‖V*V − id_source‖` and `‖VV* − id_target‖`.
    pub fn unitary_defects(&self) -> Result<(f64, f64)> {
        let vv = self.mat.adjoint().mul(&self.mat)?;
        let ww = self.mat.mul(&self.mat.adjoint())?;
        Ok((
            vv.distance(self.source.projection())?,
            ww.distance(self.target.projection())?,
        ))
    }

    /// Per-block SVD of the operator restricted to the source range, with the
    /// orthonormal basis of that range it was computed in.
    pub(crate) fn restricted_svds(&self) -> Result<Vec<(ComplexMatrix, Svd)>> {
        (0..self.source.shape().num_blocks())
            .map(|i| {
                let basis = self.source.range_basis(i)?;
                let svd = linalg::svd_full(&(self.mat.block(i) * &basis))?;
                Ok((basis, svd))
            })
            .collect()
    }

    /// All singular values of the restricted operator, block by block.
    pub fn singular_values(&self) -> Result<Vec<Vec<f64>>> {
        Ok(self
            .restricted_svds()?
            .into_iter()
            .map(|(_, s)| s.sigma)
            .collect())
    }

    /// Applies a positive-semidefinite matrix function block by block, in the
    /// coordinates of an orthonormal basis of the module, so that directions
    /// outside the module never enter the spectrum.
    fn map_blocks_psd(
        &self,
        tol: &Tolerances,
        f: fn(&ComplexMatrix, &Tolerances) -> Result<ComplexMatrix>,
    ) -> Result<Self> {
        if self.source != self.target {
            return Err(Error::ShapeMismatch("functional calculus needs an endomorphism".into()));
        }
        let k = self.mat.rows();
        let mat = self.mat.map_blocks(k, k, |i, b| {
            let basis = self.source.range_basis(i)?;
            let restricted = &(&basis.adjoint() * b) * &basis;
            Ok(&(&basis * &f(&restricted, tol)?) * &basis.adjoint())
        })?;
        Self::new(&self.source, &self.target, mat)
    }

    /// `(T*T)^{1/2}`, read off the SVD of `T` rather than formed from `T*T`,
    /// so singular values down to the rank cutoff keep full relative accuracy.
    pub fn modulus(&self) -> Result<Self> {
        let k = self.source.ambient_rank();
        let mut blocks = Vec::with_capacity(self.mat.blocks().len());
        for (basis, s) in self.restricted_svds()? {
            let v = &basis * &s.v;
            let mut scaled = v.clone();
            for (j, &sigma) in s.sigma.iter().enumerate() {
                for i in 0..scaled.rows() {
                    scaled[(i, j)] *= sigma;
                }
            }
            for j in s.sigma.len()..scaled.cols() {
                for i in 0..scaled.rows() {
                    scaled[(i, j)] = C64::new(0.0, 0.0);
                }
            }
            blocks.push(&scaled * &v.adjoint());
        }
        let mat = MatrixOverA::from_blocks(self.source.shape(), k, k, blocks)?;
        Self::new(&self.source, &self.source, mat)
    }

    /// Moore–Penrose inverse `N → M`, with singular values at or below
    /// `rank_rel·‖T‖` treated as zero.
    pub fn pinv(&self, tol: &Tolerances) -> Result<Self> {
        let cutoff = tol.rank_rel * self.norm();
        let (ks, kt) = (self.source.ambient_rank(), self.target.ambient_rank());
        let mut blocks = Vec::with_capacity(self.mat.blocks().len());
        for (i, (basis, s)) in self.restricted_svds()?.into_iter().enumerate() {
            let v = &basis * &s.v;
            let mut out = ComplexMatrix::zeros(v.rows(), self.mat.block(i).rows());
            for (j, &sigma) in s.sigma.iter().enumerate() {
                if sigma <= cutoff || sigma == 0.0 {
                    continue;
                }
                let u = self.mat.block(i) * &v.select_columns(&[j]);
                let scale = C64::new(1.0 / (sigma * sigma), 0.0);
                out = &out + &(&v.select_columns(&[j]) * &u.adjoint()).scale(scale);
            }
            blocks.push(out);
        }
        let mat = MatrixOverA::from_blocks(self.source.shape(), ks, kt, blocks)?;
        Self::new(&self.target, &self.source, mat)
    }

    /// Square root of a positive endomorphism.
    pub fn psd_sqrt(&self, tol: &Tolerances) -> Result<Self> {
        self.map_blocks_psd(tol, linalg::psd_sqrt)
    }

    /// Moore–Penrose inverse of a positive endomorphism.
    pub fn psd_pinv(&self, tol: &Tolerances) -> Result<Self> {
        self.map_blocks_psd(tol, linalg::psd_pinv)
    }
}

/// `T′: N′ → M′, f ↦ f ∘ T`, in Riesz coordinates.
///
/// Each column is obtained by evaluating `m ↦ f(Tm)` and recovering its Riesz
/// vector, so agreement with `T*` is a checked property.
pub fn banach_dual(t: &AdjointableOperator) -> Result<AdjointableOperator> {
    AdjointableOperator::from_module_map(&t.target, &t.source, |n| {
        Ok(banach_dual_apply(t, &hat(n))?.riesz().clone())
    })
}

/// `T′ f = f ∘ T` for a single functional.
pub fn banach_dual_apply(t: &AdjointableOperator, f: &DualElement) -> Result<DualElement> {
    if f.module() != &t.target {
        return Err(Error::ParentMismatch);
    }
    let riesz = riesz_from_evaluations(&t.source, |m| f.eval(&t.apply(m)?))?;
    Ok(DualElement::from_riesz(riesz))
}

/// `T^#: M → K′`, `(T^# m)(k) = ⟨Tk, m⟩`, for `T: K → M`.
pub fn sharp(t: &AdjointableOperator) -> Result<AdjointableOperator> {
    AdjointableOperator::from_module_map(&t.target, &t.source, |m| {
        riesz_from_evaluations(&t.source, |k| inner(&t.apply(k)?, m))
    })
}

/// `J^#` for the inclusion `J: K → L` and its inverse `Q: K′ → L`, both
/// restricted to `K^⊥⊥`.
#[derive(Clone, Debug)]
pub struct SharpPair {
    /// `J^#: K^⊥⊥ → K′`.
    pub sharp: AdjointableOperator,
    /// `Q: K′ → K^⊥⊥`, with `⟨m, Qτ⟩ = ⟨J^# m, τ⟩′`.
    pub inverse: AdjointableOperator,
    pub double_complement: Submodule,
    /// `‖P_{K^⊥⊥} Q − Q‖` before `Q` is viewed as landing in `K^⊥⊥`.
    pub range_defect: f64,
}

impl SharpPair {
    /// `‖Q∘J^# − id‖` on `K^⊥⊥`.
    pub fn left_inverse_defect(&self) -> Result<f64> {
        let qj = self.inverse.compose(&self.sharp)?;
        qj.distance(&AdjointableOperator::identity(self.sharp.source()))
    }

    /// `‖J^#∘Q − id‖` on `K′`.
    pub fn right_inverse_defect(&self) -> Result<f64> {
        let jq = self.sharp.compose(&self.inverse)?;
        jq.distance(&AdjointableOperator::identity(self.inverse.source()))
    }

    /// `‖⟨J^# m, J^# m⟩′ − ⟨m, m⟩‖` for one `m ∈ K^⊥⊥`.
    pub fn isometry_defect(&self, m: &ModuleElement) -> Result<f64> {
        let jm = hat(&self.sharp.apply(m)?);
        dual_inner(&jm, &jm)?.distance(&inner(m, m)?)
    }
}

/// Builds `J^#` and `Q` for `K ⊆ L` by the evaluation formulas.
///
/// A proper submodule with `K^⊥ = 0` does not exist in finite dimensions, so
/// the pair is built on `K^⊥⊥`, where the two maps are mutually inverse.
pub fn inclusion_sharp_pair(k: &Submodule) -> Result<SharpPair> {
    let l = k.ambient();
    let k_mod = k.as_module();
    let j = AdjointableOperator::inclusion(k);
    let j_sharp = sharp(&j)?;
    let q = AdjointableOperator::from_module_map(&k_mod, l, |tau| {
        let tau = hat(tau);
        riesz_from_evaluations(l, |m| dual_inner(&hat(&j_sharp.apply(m)?), &tau))
    })?;
    let kbb = k.orthogonal_complement()?.orthogonal_complement()?;
    let kbb_mod = kbb.as_module();
    let range_defect = kbb.projection().mul(q.matrix())?.distance(q.matrix())?;
    Ok(SharpPair {
        sharp: j_sharp.between(&kbb_mod, &k_mod)?,
        inverse: q.between(&k_mod, &kbb_mod)?,
        double_complement: kbb,
        range_defect,
    })
}

/// `{x ∈ M : Tx = 0}`: right singular vectors of the restricted operator whose
/// singular value is at most `rank_rel·‖T‖`.
pub fn kernel(t: &AdjointableOperator, tol: &Tolerances) -> Result<Submodule> {
    kernel_with_cutoff(t, tol.rank_rel * t.norm(), tol)
}

/// [`kernel`] with an explicit singular-value cutoff, for pieces of a larger
/// operator whose own norm is no meaningful scale.
pub fn kernel_with_cutoff(t: &AdjointableOperator, cutoff: f64, tol: &Tolerances) -> Result<Submodule> {
    let svds = t.restricted_svds()?;
    for (_, s) in &svds {
        if let Some(value) = linalg::ambiguous_value(&s.sigma, cutoff) {
            return Err(Error::ToleranceAmbiguity { value, cutoff });
        }
    }
    let k = t.source.ambient_rank();
    let blocks = svds
        .iter()
        .map(|(basis, s)| {
            let rank = linalg::rank_above(&s.sigma, cutoff);
            let idx: Vec<usize> = (rank..basis.cols()).collect();
            projection_onto(&(basis * &s.v.select_columns(&idx)))
        })
        .collect();
    let proj = MatrixOverA::from_blocks(t.source.shape(), k, k, blocks)?;
    Submodule::from_projection(&t.source, proj, tol)
}

/// The span of `T(M)` inside the target.
pub fn image(t: &AdjointableOperator, tol: &Tolerances) -> Result<Submodule> {
    span_in(&t.target, &t.mat, tol)
}

/// Output of [`dual_polar_isomorphism`].
#[derive(Clone, Debug)]
pub struct PolarIsomorphism {
    /// The isometric isomorphism `M′ → N′`, in Riesz coordinates `M → N`.
    pub iso: AdjointableOperator,
    /// `S = ((T′)*T′)^{1/2}` on `N′`, computed as the modulus of `T′`.
    pub s: AdjointableOperator,
    /// The closure of `S(N′)`.
    pub range_of_s: Submodule,
    /// `σ_max(S) / σ_min(S)` on `N′`.
    pub condition: f64,
    /// How far the constructed map leaves `N` before it is viewed as a map into `N`.
    pub landing_defect: f64,
}

fn require(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::PreconditionFailed(what.into()))
    }
}

/// For `T: M → N` with `Ker T = 0`, `Ker T′ = 0` and `T(M)^⊥⊥ = N`, builds the
/// isometric isomorphism `(J^#)^{-1} ∘ U^#: M′ → N′`, where
/// `S = ((T′)*T′)^{1/2}`, `K` is the closure of `S(N′)` with inclusion `J`,
/// and `U: K → M′` is determined by `U(Sf) = T′f`.
///
/// `U` is defined on all of `K` at once; in finite dimensions the range of `S`
/// is already closed.
pub fn dual_polar_isomorphism(
    t: &AdjointableOperator,
    tol: &Tolerances,
) -> Result<PolarIsomorphism> {
    let (m, n) = (&t.source, &t.target);
    require(kernel(t, tol)?.as_module().is_zero(), "T has a nonzero kernel")?;
    let t_dual = banach_dual(t)?;
    require(kernel(&t_dual, tol)?.as_module().is_zero(), "T' has a nonzero kernel")?;
    let dense = image(t, tol)?
        .orthogonal_complement()?
        .orthogonal_complement()?
        .distance(&Submodule::whole(n))?;
    require(dense <= tol.invariant_abs, "the range of T is not dense in N")?;

    let s = t_dual.modulus()?;
    let sigma: Vec<f64> = s.singular_values()?.into_iter().flatten().collect();
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let sigma_min = sigma.iter().copied().fold(f64::INFINITY, f64::min);
    let cutoff = tol.rank_rel * sigma_max;
    if sigma_min.is_finite() && sigma_min <= cutoff {
        return Err(Error::IllConditioned { sigma_min, cutoff });
    }
    let condition = if sigma_min.is_finite() { sigma_max / sigma_min } else { 1.0 };

    let range_of_s = image(&s, tol)?;
    let k_mod = range_of_s.as_module();
    let s_pinv = s.psd_pinv(tol)?;
    let u = AdjointableOperator::from_module_map(&k_mod, m, |x| {
        let f = s_pinv.apply(&x.reparent(n, tol)?)?;
        t_dual.apply(&f)
    })?;
    let u_sharp = sharp(&u)?;
    let pair = inclusion_sharp_pair(&range_of_s)?;
    let raw = pair.inverse.matrix().mul(u_sharp.matrix())?;
    let landing_defect = n.projection().mul(&raw)?.distance(&raw)?;
    let iso = AdjointableOperator::new(m, n, raw)?;
    Ok(PolarIsomorphism {
        iso,
        s,
        range_of_s,
        condition,
        landing_defect,
    })
}

/// For injective `T: M → L`, the isometry `T (T*T)^{-1/2}` onto `T(M)^⊥⊥`,
/// with `(T*T)^{1/2}` taken as [`AdjointableOperator::modulus`].
pub fn polar_isometry(t: &AdjointableOperator, tol: &Tolerances) -> Result<AdjointableOperator> {
    require(kernel(t, tol)?.as_module().is_zero(), "T has a nonzero kernel")?;
    let root = t.modulus()?;
    let u = t.compose(&root.psd_pinv(tol)?)?;
    let closure = image(t, tol)?.orthogonal_complement()?.orthogonal_complement()?;
    u.between(&t.source, &closure.as_module())
}

/// `L = K^⊥⊥ ⊕ K^⊥` realized through `R = i′: L′ → K′`.
#[derive(Clone, Debug)]
pub struct ComplementDecomposition {
    pub r: AdjointableOperator,
    pub r_star: AdjointableOperator,
    /// Range of `R*R`, which is `K^⊥⊥`.
    pub double_complement: Submodule,
    /// `Ker R`.
    pub kernel_of_r: Submodule,
    /// `K^⊥` computed directly from `K`.
    pub complement: Submodule,
}

impl ComplementDecomposition {
    /// `‖RR* − id_{K′}‖`.
    pub fn rr_star_defect(&self) -> Result<f64> {
        let rr = self.r.compose(&self.r_star)?;
        rr.distance(&AdjointableOperator::identity(self.r.target()))
    }

    /// `‖(R*R)² − R*R‖`.
    pub fn idempotence_defect(&self) -> Result<f64> {
        let p = self.r_star.compose(&self.r)?;
        p.compose(&p)?.distance(&p)
    }

    /// `‖P_{Ker R} − P_{K^⊥}‖`.
    pub fn kernel_defect(&self) -> Result<f64> {
        self.kernel_of_r.distance(&self.complement)
    }

    /// `‖P_{K^⊥⊥} + P_{K^⊥} − P_L‖`.
    pub fn sum_defect(&self) -> Result<f64> {
        self.double_complement
            .projection()
            .add(self.complement.projection())?
            .distance(self.complement.ambient().projection())
    }
}

pub fn complement_decomposition(
    k: &Submodule,
    tol: &Tolerances,
) -> Result<ComplementDecomposition> {
    let i = AdjointableOperator::inclusion(k);
    let r = banach_dual(&i)?;
    let r_star = r.adjoint();
    let rsr = r_star.compose(&r)?;
    let double_complement = Submodule::from_projection(k.ambient(), rsr.matrix().clone(), tol)?;
    Ok(ComplementDecomposition {
        kernel_of_r: kernel(&r, tol)?,
        complement: k.orthogonal_complement()?,
        double_complement,
        r,
        r_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraElement, AlgebraShape};
    use crate::linalg::C64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn shape(d: &[usize]) -> AlgebraShape {
        AlgebraShape::new(d.to_vec()).unwrap()
    }

    fn random_op(
        s: &AlgebraShape,
        ks: usize,
        kt: usize,
        rng: &mut ChaCha8Rng,
    ) -> AdjointableOperator {
        let m = HilbertModule::random_with(s, ks, rng);
        let n = HilbertModule::random_with(s, kt, rng);
        let mat = MatrixOverA::random_with(s, kt, ks, rng);
        AdjointableOperator::new(&m, &n, mat).unwrap()
    }

    #[test]
    fn adjoint_of_identity_and_involution() {
        let s = shape(&[1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = HilbertModule::random_with(&s, 2, &mut rng);
        let id = AdjointableOperator::identity(&m);
        assert_eq!(id.adjoint(), id);
        let t = random_op(&s, 2, 3, &mut rng);
        assert_eq!(t.adjoint().adjoint(), t);
    }

    #[test]
    fn adjoint_defining_property() {
        let s = shape(&[2, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_op(&s, 3, 2, &mut rng);
        let ta = t.adjoint();
        for _ in 0..50 {
            let x = t.source().random_element(&mut rng);
            let y = t.target().random_element(&mut rng);
            let lhs = inner(&t.apply(&x).unwrap(), &y).unwrap();
            let rhs = inner(&x, &ta.apply(&y).unwrap()).unwrap();
            assert!(lhs.distance(&rhs).unwrap() < 1e-10);
        }
    }

    #[test]
    fn operators_are_a_linear() {
        let s = shape(&[2]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_op(&s, 2, 2, &mut rng);
        let x = t.source().random_element(&mut rng);
        let a = AlgebraElement::random_with(&s, &mut rng);
        let lhs = t.apply(&x.act(&a).unwrap()).unwrap();
        let rhs = t.apply(&x).unwrap().act(&a).unwrap();
        assert!(lhs.distance(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn banach_dual_matches_diagram() {
        let s = shape(&[1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_op(&s, 3, 2, &mut rng);
        let td = banach_dual(&t).unwrap();
        assert!(td.distance(&t.adjoint()).unwrap() < 1e-10);
        let n = t.target().random_element(&mut rng);
        let via_dual = banach_dual_apply(&t, &hat(&n)).unwrap();
        let via_adjoint = hat(&t.adjoint().apply(&n).unwrap());
        assert!(via_dual.riesz().distance(via_adjoint.riesz()).unwrap() < 1e-10);
        let m = HilbertModule::free(&s, 2);
        let id = AdjointableOperator::identity(&m);
        assert!(banach_dual(&id).unwrap().distance(&id).unwrap() < 1e-12);
    }

    #[test]
    fn sharp_defining_formula() {
        let s = shape(&[1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = random_op(&s, 2, 3, &mut rng);
        let ts = sharp(&t).unwrap();
        for _ in 0..10 {
            let m = t.target().random_element(&mut rng);
            let k = t.source().random_element(&mut rng);
            let lhs = hat(&ts.apply(&m).unwrap()).eval(&k).unwrap();
            let rhs = inner(&t.apply(&k).unwrap(), &m).unwrap();
            assert!(lhs.distance(&rhs).unwrap() < 1e-10);
        }
        let zero = AdjointableOperator::zero(t.source(), t.target());
        assert_eq!(sharp(&zero).unwrap().norm(), 0.0);
    }

    #[test]
    fn sharp_of_inclusion_is_hat() {
        let s = shape(&[2]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = HilbertModule::free(&s, 3);
        let k = Submodule::random_with(&l, &mut rng).unwrap();
        let j = AdjointableOperator::inclusion(&k);
        let js = sharp(&j).unwrap();
        let x = k.as_module().random_element(&mut rng);
        let back = js.apply(&j.apply(&x).unwrap()).unwrap();
        assert!(back.distance(&x).unwrap() < 1e-10);
    }

    #[test]
    fn sharp_pair_inverts() {
        let s = shape(&[2]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let l = HilbertModule::free(&s, 3);
            let k = Submodule::random_with(&l, &mut rng).unwrap();
            let pair = inclusion_sharp_pair(&k).unwrap();
            assert!(pair.left_inverse_defect().unwrap() < 1e-9);
            assert!(pair.right_inverse_defect().unwrap() < 1e-9);
            assert!(pair.range_defect < 1e-9);
            let kbb = pair.double_complement.as_module();
            for _ in 0..10 {
                let m = kbb.random_element(&mut rng);
                assert!(pair.isometry_defect(&m).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn sharp_pair_on_whole_module() {
        let s = shape(&[1, 2]);
        let l = HilbertModule::free(&s, 2);
        let pair = inclusion_sharp_pair(&Submodule::whole(&l)).unwrap();
        let id = AdjointableOperator::identity(&l);
        assert!(pair.sharp.distance(&id).unwrap() < 1e-12);
        assert!(pair.inverse.distance(&id).unwrap() < 1e-12);
    }

    #[test]
    fn kernel_and_image_edge_cases() {
        let s = shape(&[1, 2]);
        let m = HilbertModule::free(&s, 2);
        let n = HilbertModule::free(&s, 3);
        let zero = AdjointableOperator::zero(&m, &n);
        assert!(kernel(&zero, &tol()).unwrap().distance(&Submodule::whole(&m)).unwrap() < 1e-12);
        assert!(image(&zero, &tol()).unwrap().as_module().is_zero());
        let id = AdjointableOperator::identity(&m);
        assert!(kernel(&id, &tol()).unwrap().as_module().is_zero());
        assert!(image(&id, &tol()).unwrap().distance(&Submodule::whole(&m)).unwrap() < 1e-12);
    }

    #[test]
    fn cokernel_is_kernel_of_adjoint() {
        let s = shape(&[1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let t = random_op(&s, 3, 3, &mut rng);
            let coker = image(&t, &tol()).unwrap().orthogonal_complement().unwrap();
            let kstar = kernel(&t.adjoint(), &tol()).unwrap();
            assert!(coker.distance(&kstar).unwrap() < 1e-8);
        }
    }

    #[test]
    fn polar_isomorphism_for_unitary() {
        let s = shape(&[2]);
        let m = HilbertModule::free(&s, 2);
        let id = AdjointableOperator::identity(&m);
        let out = dual_polar_isomorphism(&id, &tol()).unwrap();
        assert!(out.iso.distance(&id).unwrap() < 1e-10);
        assert!((out.condition - 1.0).abs() < 1e-10);
    }

    #[test]
    fn polar_isomorphism_is_unitary() {
        let s = shape(&[1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = HilbertModule::free(&s, 2);
        for _ in 0..5 {
            let mat = MatrixOverA::random_with(&s, 2, 2, &mut rng);
            let t = AdjointableOperator::new(&m, &m, mat).unwrap();
            let out = dual_polar_isomorphism(&t, &tol()).unwrap();
            let (a, b) = out.iso.unitary_defects().unwrap();
            assert!(a < 1e-8 && b < 1e-8, "{a} {b}");
            assert!(out.landing_defect < 1e-8);
        }
    }

    #[test]
    fn polar_isomorphism_preconditions() {
        let s = shape(&[1]);
        let m = HilbertModule::free(&s, 2);
        let n = HilbertModule::free(&s, 3);
        let mat = MatrixOverA::random(&s, 3, 2, 1);
        let t = AdjointableOperator::new(&m, &n, mat).unwrap();
        assert!(matches!(
            dual_polar_isomorphism(&t, &tol()),
            Err(Error::PreconditionFailed(_))
        ));
        let zero = AdjointableOperator::zero(&m, &m);
        assert!(matches!(
            dual_polar_isomorphism(&zero, &tol()),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn polar_isometry_onto_closure() {
        let s = shape(&[1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = HilbertModule::free(&s, 2);
        let l = HilbertModule::free(&s, 4);
        let t = AdjointableOperator::new(&m, &l, MatrixOverA::random_with(&s, 4, 2, &mut rng))
            .unwrap();
        let u = polar_isometry(&t, &tol()).unwrap();
        let (a, b) = u.unitary_defects().unwrap();
        assert!(a < 1e-8 && b < 1e-8);
    }

    #[test]
    fn complement_decomposition_examples() {
        let s = shape(&[1, 2]);
        let l = HilbertModule::free(&s, 2);
        let whole = complement_decomposition(&Submodule::whole(&l), &tol()).unwrap();
        assert!(whole.r.distance(&AdjointableOperator::identity(&l)).unwrap() < 1e-12);
        let zero = complement_decomposition(&Submodule::zero(&l), &tol()).unwrap();
        assert_eq!(zero.r.norm(), 0.0);
        assert!(zero.complement.distance(&Submodule::whole(&l)).unwrap() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..5 {
            let k = Submodule::random_with(&l, &mut rng).unwrap();
            let d = complement_decomposition(&k, &tol()).unwrap();
            assert!(d.rr_star_defect().unwrap() < 1e-9);
            assert!(d.idempotence_defect().unwrap() < 1e-9);
            assert!(d.kernel_defect().unwrap() < 1e-8);
            assert!(d.sum_defect().unwrap() < 1e-8);
        }
    }

    #[test]
    fn kernel_reports_ambiguity() {
        let s = shape(&[1]);
        let m = HilbertModule::free(&s, 2);
        let mut mat = MatrixOverA::identity(&s, 2);
        let tiny = AlgebraElement::scalar(&s, C64::new(3e-10, 0.0));
        mat.set_entry(1, 1, &tiny).unwrap();
        let t = AdjointableOperator::new(&m, &m, mat).unwrap();
        assert!(matches!(kernel(&t, &tol()), Err(Error::ToleranceAmbiguity { .. })));
    }
}
