//! Dual and bidual modules through Riesz vectors.
//!
//! A functional `f ∈ M′` is stored as the vector `r` with `f(m) = ⟨m, r⟩`; an
//! element `X ∈ M′′` as the vector `s` with `X(f) = ⟨f, ŝ⟩′`. Finitely
//! generated modules over a finite-dimensional C*-algebra are self-dual, so
//! these representations are total. The maps below are nevertheless computed
//! from evaluation tables ([`riesz_from_evaluations`]), so each identity they
//! satisfy is checked rather than assumed.

use crate::algebra::{AlgebraElement, MatrixOverA};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::module::{inner, HilbertModule, ModuleElement};

/// A bounded conjugate-`A`-linear functional `M → A`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualElement {
    riesz: ModuleElement,
}

/// A bounded conjugate-`A`-linear functional `M′ → A`.
#[derive(Clone, Debug, PartialEq)]
pub struct BidualElement {
    riesz: ModuleElement,
}

/// Largest singular value over the blocks of a column: the exact supremum of
/// `‖⟨m, r⟩‖` over the unit ball of the module.
fn functional_norm(r: &ModuleElement) -> Result<f64> {
    let mut best: f64 = 0.0;
    for b in r.vec().blocks() {
        let s = linalg::svd(b)?;
        best = best.max(s.sigma.first().copied().unwrap_or(0.0));
    }
    Ok(best)
}

impl DualElement {
    pub fn from_riesz(riesz: ModuleElement) -> Self {
        Self { riesz }
    }

    pub fn module(&self) -> &HilbertModule {
        self.riesz.module()
    }

    pub fn riesz(&self) -> &ModuleElement {
        &self.riesz
    }

    /// `f(m) = ⟨m, r⟩`.
    pub fn eval(&self, m: &ModuleElement) -> Result<AlgebraElement> {
        inner(m, &self.riesz)
    }

    /// `(f·a)(m) = f(m)·a`.
    pub fn act(&self, a: &AlgebraElement) -> Result<DualElement> {
        Ok(Self {
            riesz: self.riesz.act(a)?,
        })
    }

    /// `sup_{‖m‖ ≤ 1} ‖f(m)‖`.
    pub fn op_norm(&self) -> Result<f64> {
        functional_norm(&self.riesz)
    }

    /// `‖⟨f, f⟩′‖^{1/2}`.
    pub fn inner_norm(&self) -> Result<f64> {
        Ok(num_traits::Float::sqrt(dual_inner(self, self)?.norm()))
    }
}

impl BidualElement {
    pub fn from_riesz(riesz: ModuleElement) -> Self {
        Self { riesz }
    }

    pub fn module(&self) -> &HilbertModule {
        self.riesz.module()
    }

    pub fn riesz(&self) -> &ModuleElement {
        &self.riesz
    }

    /// `X(f) = ⟨f, ŝ⟩′`.
    pub fn eval(&self, f: &DualElement) -> Result<AlgebraElement> {
        inner(&f.riesz, &self.riesz)
    }

    /// `sup_{‖f‖ ≤ 1} ‖X(f)‖`.
    pub fn op_norm(&self) -> Result<f64> {
        functional_norm(&self.riesz)
    }
}

/// Recovers the Riesz vector of a conjugate-`A`-linear functional on `module`
/// from its values on the projected matrix units `P(e_j ⊗ E_{a0})`.
///
/// In block `i`, `f(P u)` for `u = e_j ⊗ E_{a0}` has first row equal to row
/// `j·n_i + a` of the Riesz vector.
pub fn riesz_from_evaluations(
    module: &HilbertModule,
    f: impl Fn(&ModuleElement) -> Result<AlgebraElement>,
) -> Result<ModuleElement> {
    let shape = module.shape();
    let k = module.ambient_rank();
    let mut blocks = alloc::vec::Vec::with_capacity(shape.num_blocks());
    for (i, &n) in shape.block_dims().iter().enumerate() {
        let mut r = ComplexMatrix::zeros(k * n, n);
        for j in 0..k {
            for a in 0..n {
                let mut u = MatrixOverA::zeros(shape, k, 1);
                u.set_entry(j, 0, &AlgebraElement::matrix_unit(shape, i, a, 0))?;
                let value = f(&module.project(&u)?)?;
                if value.shape() != shape {
                    return Err(Error::ShapeMismatch("functional value in a different algebra".into()));
                }
                for c in 0..n {
                    r[(j * n + a, c)] = value.block(i)[(0, c)];
                }
            }
        }
        blocks.push(r);
    }
    let raw = MatrixOverA::from_blocks(shape, k, 1, blocks)?;
    module.project(&raw)
}

/// Bidual element determined by its values on `M′`; only values on `M̂` are
/// consulted, which suffices because `M̂ = M′` here.
pub fn bidual_from_evaluations(
    module: &HilbertModule,
    x: impl Fn(&DualElement) -> Result<AlgebraElement>,
) -> Result<BidualElement> {
    let riesz = riesz_from_evaluations(module, |m| x(&hat(m)))?;
    Ok(BidualElement { riesz })
}

/// `m̂ = ⟨·, m⟩`.
pub fn hat(m: &ModuleElement) -> DualElement {
    DualElement { riesz: m.clone() }
}

/// `ṁ(f) = f(m)*`.
pub fn dot(m: &ModuleElement) -> Result<BidualElement> {
    bidual_from_evaluations(m.module(), |f| Ok(f.eval(m)?.adjoint()))
}

/// The canonical embedding `M → M′′`, identical to [`dot`].
pub fn bidual_embedding(m: &ModuleElement) -> Result<BidualElement> {
    dot(m)
}

/// `X ↦ X̃`, the restriction of `X` to `M̂ ⊆ M′`: `X̃(m) = X(m̂)`.
pub fn restrict_to_module(x: &BidualElement) -> Result<DualElement> {
    let riesz = riesz_from_evaluations(x.module(), |m| x.eval(&hat(m)))?;
    Ok(DualElement { riesz })
}

/// The inner product on `M′`, `⟨f, g⟩′ = ⟨r_f, r_g⟩`.
pub fn dual_inner(f: &DualElement, g: &DualElement) -> Result<AlgebraElement> {
    inner(&f.riesz, &g.riesz)
}

/// The inner product on `M′′`: `⟨X, Y⟩′′ = Y(X̃)`.
pub fn bidual_inner(x: &BidualElement, y: &BidualElement) -> Result<AlgebraElement> {
    if x.module() != y.module() {
        return Err(Error::ParentMismatch);
    }
    y.eval(&restrict_to_module(x)?)
}

/// `f ↦ ⟨·, f⟩′`, a map `M′ → M′′` inverse to restriction.
pub fn dual_to_bidual(f: &DualElement) -> Result<BidualElement> {
    bidual_from_evaluations(f.module(), |g| dual_inner(g, f))
}
