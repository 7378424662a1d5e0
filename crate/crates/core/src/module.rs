//! Finitely generated projective Hilbert modules over `A`.
//!
//! A module is the range of a projection `P` on the free module `A^k`; its
//! elements are `k × 1` columns over `A` fixed by `P`. Submodules are carried by
//! their own projections, so complements and decompositions are projection
//! algebra.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{ginibre, AlgebraElement, AlgebraShape, MatrixOverA};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Tolerances, C64};

/// Eigenvalues of a projection must sit this close to 0 or 1.
const PROJECTION_SLACK: f64 = 1e-6;

/// Orthonormal basis of the range of a (near-)projection block.
pub fn range_basis(block: &ComplexMatrix) -> Result<ComplexMatrix> {
    let loose = Tolerances {
        herm_sym: f64::INFINITY,
        ..Tolerances::default()
    };
    let eig = linalg::herm_eig(&block.hermitian_part(), &loose)?;
    let mut deviation: f64 = 0.0;
    let mut rank = 0;
    for &l in &eig.values {
        let target = if l > 0.5 { 1.0 } else { 0.0 };
        deviation = deviation.max((l - target).abs());
        if l > 0.5 {
            rank += 1;
        }
    }
    if deviation > PROJECTION_SLACK {
        return Err(Error::NotProjection { deviation });
    }
    let cols: Vec<usize> = (0..rank).collect();
    Ok(eig.vectors.select_columns(&cols))
}

pub(crate) fn projection_onto(basis: &ComplexMatrix) -> ComplexMatrix {
    basis * &basis.adjoint()
}

/// Re-symmetrizes a projection and rounds its spectrum to `{0, 1}`.
pub fn canonical_projection(p: &MatrixOverA) -> Result<MatrixOverA> {
    if p.rows() != p.cols() {
        return Err(Error::ShapeMismatch("a projection must be square".into()));
    }
    p.map_blocks(p.rows(), p.cols(), |_, b| Ok(projection_onto(&range_basis(b)?)))
}

fn check_projection(p: &MatrixOverA, tol: &Tolerances) -> Result<()> {
    let defect = p.hermitian_defect();
    if defect > tol.invariant_abs {
        return Err(Error::NotHermitian {
            defect,
            bound: tol.invariant_abs,
        });
    }
    let idem = p.mul(p)?.distance(p)?;
    if idem > tol.invariant_abs {
        return Err(Error::NotProjection { deviation: idem });
    }
    Ok(())
}

/// The range of a projection on `A^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertModule {
    shape: AlgebraShape,
    ambient_rank: usize,
    proj: MatrixOverA,
}

impl HilbertModule {
    /// The free module `A^k`.
    pub fn free(shape: &AlgebraShape, k: usize) -> Self {
        Self {
            shape: shape.clone(),
            ambient_rank: k,
            proj: MatrixOverA::identity(shape, k),
        }
    }

    /// The zero module, with ambient rank 0.
    pub fn zero(shape: &AlgebraShape) -> Self {
        Self::free(shape, 0)
    }

    pub fn from_projection(proj: MatrixOverA, tol: &Tolerances) -> Result<Self> {
        check_projection(&proj, tol)?;
        Ok(Self {
            shape: proj.shape().clone(),
            ambient_rank: proj.rows(),
            proj: canonical_projection(&proj)?,
        })
    }

    /// Assumes `proj` is already canonical.
    pub(crate) fn from_canonical(proj: MatrixOverA) -> Self {
        Self {
            shape: proj.shape().clone(),
            ambient_rank: proj.rows(),
            proj,
        }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn projection(&self) -> &MatrixOverA {
        &self.proj
    }

    /// Orthonormal basis for block `i` of the range.
    pub fn range_basis(&self, i: usize) -> Result<ComplexMatrix> {
        range_basis(self.proj.block(i))
    }

    /// Complex dimension of each block of the range.
    pub fn block_ranks(&self) -> Vec<usize> {
        self.proj
            .blocks()
            .iter()
            .map(|b| num_traits::Float::round(b.trace().re).max(0.0) as usize)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.block_ranks().iter().all(|&r| r == 0)
    }

    /// Wraps `vec`, requiring that it already lies in the module.
    pub fn element(&self, vec: MatrixOverA, tol: &Tolerances) -> Result<ModuleElement> {
        self.check_vec(&vec)?;
        let defect = self.proj.mul(&vec)?.distance(&vec)?;
        if defect > tol.invariant_abs * (1.0 + vec.norm()) {
            return Err(Error::NotInModule { defect });
        }
        Ok(ModuleElement {
            module: self.clone(),
            vec,
        })
    }

    /// Orthogonal projection of an ambient column onto the module.
    pub fn project(&self, vec: &MatrixOverA) -> Result<ModuleElement> {
        self.check_vec(vec)?;
        Ok(ModuleElement {
            module: self.clone(),
            vec: self.proj.mul(vec)?,
        })
    }

    fn check_vec(&self, vec: &MatrixOverA) -> Result<()> {
        if vec.shape() != &self.shape || vec.rows() != self.ambient_rank || vec.cols() != 1 {
            return Err(Error::ShapeMismatch(format!(
                "expected a {}x1 column over the module's algebra",
                self.ambient_rank
            )));
        }
        Ok(())
    }

    pub fn zero_element(&self) -> ModuleElement {
        ModuleElement {
            module: self.clone(),
            vec: MatrixOverA::zeros(&self.shape, self.ambient_rank, 1),
        }
    }

    /// `P e_j`: the image of the `j`-th standard generator of `A^k`.
    pub fn generator(&self, j: usize) -> ModuleElement {
        let e = MatrixOverA::unit_column(&self.shape, self.ambient_rank, j);
        self.project(&e).expect("unit column has the ambient shape")
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> ModuleElement {
        let v = MatrixOverA::random_with(&self.shape, self.ambient_rank, 1, rng);
        self.project(&v).expect("random column has the ambient shape")
    }

    /// Random module in `A^k` whose block ranks are drawn uniformly.
    pub fn random_with<R: Rng + ?Sized>(shape: &AlgebraShape, k: usize, rng: &mut R) -> Self {
        let ranks: Vec<usize> = shape
            .block_dims()
            .iter()
            .map(|&n| rng.random_range(0..=k * n))
            .collect();
        Self::random_with_ranks(shape, k, &ranks, rng)
    }

    /// Random module in `A^k` with prescribed block ranks.
    pub fn random_with_ranks<R: Rng + ?Sized>(
        shape: &AlgebraShape,
        k: usize,
        ranks: &[usize],
        rng: &mut R,
    ) -> Self {
        let blocks = shape
            .block_dims()
            .iter()
            .zip(ranks)
            .map(|(&n, &r)| projection_onto(&random_frame(k * n, r, rng)))
            .collect();
        let proj = MatrixOverA::from_blocks(shape, k, k, blocks).expect("block sizes match");
        Self::from_canonical(proj)
    }

    pub fn random(shape: &AlgebraShape, k: usize, seed: u64) -> Self {
        Self::random_with(shape, k, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Whether `other` has the same ambient data up to `tol`.
    pub fn same_as(&self, other: &Self, tol: &Tolerances) -> bool {
        self.shape == other.shape
            && self.ambient_rank == other.ambient_rank
            && self
                .proj
                .distance(&other.proj)
                .is_ok_and(|d| d <= tol.invariant_abs)
    }

    /// The submodule occupying the whole module.
    pub fn as_submodule(&self) -> Submodule {
        Submodule {
            ambient: self.clone(),
            proj: self.proj.clone(),
        }
    }
}

/// `r` random orthonormal columns in `C^dim`.
pub(crate) fn random_frame<R: Rng + ?Sized>(dim: usize, r: usize, rng: &mut R) -> ComplexMatrix {
    if r == 0 {
        return ComplexMatrix::zeros(dim, 0);
    }
    let g = ginibre(dim, r, rng);
    let s = linalg::svd(&g).expect("Jacobi converges on Gaussian input");
    let cols: Vec<usize> = (0..r).collect();
    s.u.select_columns(&cols)
}

/// Direct sum of two modules over the same algebra.
pub fn direct_sum(m: &HilbertModule, n: &HilbertModule) -> Result<HilbertModule> {
    Ok(HilbertModule::from_canonical(m.proj.direct_sum(&n.proj)?))
}

/// A column over `A` lying in a specific module.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleElement {
    module: HilbertModule,
    vec: MatrixOverA,
}

impl ModuleElement {
    pub fn module(&self) -> &HilbertModule {
        &self.module
    }

    pub fn vec(&self) -> &MatrixOverA {
        &self.vec
    }

    pub fn into_vec(self) -> MatrixOverA {
        self.vec
    }

    /// The same column, viewed as an element of another module containing it.
    pub fn reparent(&self, module: &HilbertModule, tol: &Tolerances) -> Result<ModuleElement> {
        module.element(self.vec.clone(), tol)
    }

    fn ensure_same_module(&self, other: &Self) -> Result<()> {
        if self.module != other.module {
            return Err(Error::ParentMismatch);
        }
        Ok(())
    }

    /// Right action `x·a`.
    pub fn act(&self, a: &AlgebraElement) -> Result<ModuleElement> {
        Ok(ModuleElement {
            module: self.module.clone(),
            vec: self.vec.mul_right(a)?,
        })
    }

    pub fn add(&self, other: &Self) -> Result<ModuleElement> {
        self.ensure_same_module(other)?;
        Ok(ModuleElement {
            module: self.module.clone(),
            vec: self.vec.add(&other.vec)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<ModuleElement> {
        self.ensure_same_module(other)?;
        Ok(ModuleElement {
            module: self.module.clone(),
            vec: self.vec.sub(&other.vec)?,
        })
    }

    pub fn scale(&self, c: C64) -> ModuleElement {
        ModuleElement {
            module: self.module.clone(),
            vec: self.vec.scale(c),
        }
    }

    /// `‖x‖ = ‖⟨x, x⟩‖^{1/2}`, which is the C*-norm of the column.
    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }

    /// Distance in the module norm.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.vec.distance(&other.vec)
    }
}

/// `⟨x, y⟩ = Σ_j x_j* y_j`: conjugate-linear in `x`, `A`-linear in `y`.
pub fn inner(x: &ModuleElement, y: &ModuleElement) -> Result<AlgebraElement> {
    x.ensure_same_module(y)?;
    let m = x.vec.adjoint().mul(&y.vec)?;
    Ok(m.entry(0, 0))
}

/// A submodule `K` of a module `L`, carried by its orthogonal projection.
#[derive(Clone, Debug, PartialEq)]
pub struct Submodule {
    ambient: HilbertModule,
    proj: MatrixOverA,
}

impl Submodule {
    pub fn from_projection(
        ambient: &HilbertModule,
        proj: MatrixOverA,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_projection(&proj, tol)?;
        if proj.shape() != ambient.shape() || proj.rows() != ambient.ambient_rank() {
            return Err(Error::ShapeMismatch("projection does not fit the ambient module".into()));
        }
        let proj = canonical_projection(&proj)?;
        let outside = ambient.proj.mul(&proj)?.distance(&proj)?;
        if outside > tol.invariant_abs {
            return Err(Error::NotInModule { defect: outside });
        }
        Ok(Self {
            ambient: ambient.clone(),
            proj,
        })
    }

    pub fn whole(ambient: &HilbertModule) -> Self {
        ambient.as_submodule()
    }

    pub fn zero(ambient: &HilbertModule) -> Self {
        let k = ambient.ambient_rank();
        Self {
            ambient: ambient.clone(),
            proj: MatrixOverA::zeros(ambient.shape(), k, k),
        }
    }

    pub fn ambient(&self) -> &HilbertModule {
        &self.ambient
    }

    pub fn projection(&self) -> &MatrixOverA {
        &self.proj
    }

    /// The submodule as a module in its own right (same ambient free module).
    pub fn as_module(&self) -> HilbertModule {
        HilbertModule::from_canonical(self.proj.clone())
    }

    /// `K^⊥` inside the ambient module: projection `P_L − P_K`.
    pub fn orthogonal_complement(&self) -> Result<Submodule> {
        Ok(Self {
            ambient: self.ambient.clone(),
            proj: canonical_projection(&self.ambient.proj.sub(&self.proj)?)?,
        })
    }

    /// Operator-norm distance between the two projections.
    pub fn distance(&self, other: &Submodule) -> Result<f64> {
        self.proj.distance(&other.proj)
    }

    /// Random submodule of `ambient` with block ranks drawn uniformly.
    pub fn random_with<R: Rng + ?Sized>(ambient: &HilbertModule, rng: &mut R) -> Result<Self> {
        let ranks = ambient.block_ranks();
        let mut blocks = Vec::with_capacity(ranks.len());
        for (i, &d) in ranks.iter().enumerate() {
            let basis = ambient.range_basis(i)?;
            let r = rng.random_range(0..=d);
            let frame = random_frame(d, r, rng);
            blocks.push(projection_onto(&(&basis * &frame)));
        }
        let k = ambient.ambient_rank();
        Ok(Self {
            ambient: ambient.clone(),
            proj: MatrixOverA::from_blocks(ambient.shape(), k, k, blocks)?,
        })
    }
}

/// Orthogonal projections onto the column spans of each block of `cols`,
/// with one rank cutoff `rank_rel · max σ` shared by all blocks.
pub(crate) fn column_span(cols: &MatrixOverA, tol: &Tolerances) -> Result<MatrixOverA> {
    let svds = cols
        .blocks()
        .iter()
        .map(linalg::svd)
        .collect::<Result<Vec<_>>>()?;
    let sigma_max = svds
        .iter()
        .filter_map(|s| s.sigma.first().copied())
        .fold(0.0, f64::max);
    let cutoff = tol.rank_rel * sigma_max;
    for s in &svds {
        if let Some(value) = linalg::ambiguous_value(&s.sigma, cutoff) {
            return Err(Error::ToleranceAmbiguity { value, cutoff });
        }
    }
    let k = cols.rows();
    let blocks = svds
        .iter()
        .map(|s| {
            let r = linalg::rank_above(&s.sigma, cutoff);
            let idx: Vec<usize> = (0..r).collect();
            projection_onto(&s.u.select_columns(&idx))
        })
        .collect();
    MatrixOverA::from_blocks(cols.shape(), k, k, blocks)
}

/// The closed `A`-linear span of `gens` inside `ambient`.
pub fn submodule_from_generators(
    ambient: &HilbertModule,
    gens: &[ModuleElement],
    tol: &Tolerances,
) -> Result<Submodule> {
    if gens.is_empty() {
        return Err(Error::Invalid("at least one generator is required".into()));
    }
    if gens.iter().any(|g| g.module != *ambient) {
        return Err(Error::ParentMismatch);
    }
    let mut stacked = gens[0].vec.clone();
    for g in &gens[1..] {
        stacked = stacked.hstack(&g.vec)?;
    }
    span_in(ambient, &stacked, tol)
}

/// Span of the columns of a `k × g` matrix lying in `ambient`.
pub(crate) fn span_in(
    ambient: &HilbertModule,
    cols: &MatrixOverA,
    tol: &Tolerances,
) -> Result<Submodule> {
    let proj = column_span(cols, tol)?;
    let outside = ambient.proj.mul(&proj)?.distance(&proj)?;
    if outside > tol.invariant_abs {
        return Err(Error::NotInModule { defect: outside });
    }
    Ok(Submodule {
        ambient: ambient.clone(),
        proj,
    })
}
