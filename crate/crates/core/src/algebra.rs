//! The finite-dimensional C*-algebra `A = M_{n_1}(C) ⊕ … ⊕ M_{n_s}(C)`,
//! its elements, and matrices over it.
//!
//! A commutative algebra is simply `s` blocks of dimension 1.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Tolerances, C64};

/// Block dimensions `(n_1, …, n_s)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraShape {
    block_dims: Vec<usize>,
}

impl AlgebraShape {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::Invalid("an algebra needs at least one block".into()));
        }
        if block_dims.contains(&0) {
            return Err(Error::Invalid("block dimensions must be positive".into()));
        }
        Ok(Self { block_dims })
    }

    /// `n` one-dimensional blocks: the algebra of functions on `n` points.
    pub fn commutative(n: usize) -> Result<Self> {
        Self::new(alloc::vec![1; n])
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Size of the canonical faithful representation, `Σ n_i`.
    pub fn faithful_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub(crate) fn ensure_same(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch(format!(
                "algebra {:?} vs {:?}",
                self.block_dims, other.block_dims
            )));
        }
        Ok(())
    }
}

fn standard_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

pub(crate) fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| standard_complex_gaussian(rng))
}

/// An element of `A`, stored block by block.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    shape: AlgebraShape,
    blocks: Vec<ComplexMatrix>,
}

impl AlgebraElement {
    pub fn from_blocks(shape: &AlgebraShape, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "{} blocks for an algebra with {}",
                blocks.len(),
                shape.num_blocks()
            )));
        }
        for (b, &n) in blocks.iter().zip(shape.block_dims()) {
            if b.rows() != n || b.cols() != n {
                return Err(Error::ShapeMismatch(format!(
                    "block of size {}x{} where {n}x{n} expected",
                    b.rows(),
                    b.cols()
                )));
            }
            if !b.is_finite() {
                return Err(Error::Invalid("non-finite algebra element".into()));
            }
        }
        Ok(Self {
            shape: shape.clone(),
            blocks,
        })
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        Self::map_dims(shape, |n| ComplexMatrix::zeros(n, n))
    }

    pub fn one(shape: &AlgebraShape) -> Self {
        Self::map_dims(shape, ComplexMatrix::identity)
    }

    /// The central projection onto block `i` (the unit of that summand).
    pub fn block_unit(shape: &AlgebraShape, i: usize) -> Self {
        let mut e = Self::zero(shape);
        e.blocks[i] = ComplexMatrix::identity(shape.block_dims[i]);
        e
    }

    /// The matrix unit `E_{ab}` inside block `i`.
    pub fn matrix_unit(shape: &AlgebraShape, i: usize, a: usize, b: usize) -> Self {
        let mut e = Self::zero(shape);
        e.blocks[i][(a, b)] = C64::new(1.0, 0.0);
        e
    }

    pub fn scalar(shape: &AlgebraShape, c: C64) -> Self {
        Self::one(shape).scale(c)
    }

    fn map_dims(shape: &AlgebraShape, mut f: impl FnMut(usize) -> ComplexMatrix) -> Self {
        Self {
            shape: shape.clone(),
            blocks: shape.block_dims.iter().map(|&n| f(n)).collect(),
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix,
    ) -> Result<Self> {
        self.shape.ensure_same(&other.shape)?;
        Ok(Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &ComplexMatrix {
        &self.blocks[i]
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(ComplexMatrix::adjoint).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(|b| b.scale(c)).collect(),
        }
    }

    /// C*-norm: the largest spectral norm over the blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(ComplexMatrix::spectral_norm).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: &Tolerances) -> bool {
        let scale = self.blocks.iter().map(|b| b.frobenius_norm()).fold(0.0, f64::max);
        self.blocks
            .iter()
            .all(|b| b.hermitian_defect() <= tol.herm_sym * scale)
    }

    /// Hermitian within `herm_sym`, and no eigenvalue below `-herm_sym·‖a‖`.
    pub fn is_positive(&self, tol: &Tolerances) -> bool {
        self.min_eigenvalue(tol)
            .is_some_and(|min| min >= -tol.herm_sym * self.norm())
    }

    /// Smallest eigenvalue over all blocks, `None` when not Hermitian.
    pub fn min_eigenvalue(&self, tol: &Tolerances) -> Option<f64> {
        if !self.is_hermitian(tol) {
            return None;
        }
        let mut min = f64::INFINITY;
        for b in &self.blocks {
            let sym = b.hermitian_part();
            let eig = linalg::herm_eig(&sym, tol).ok()?;
            if let Some(&l) = eig.values.last() {
                min = min.min(l);
            }
        }
        Some(min)
    }

    fn require_positive(&self, tol: &Tolerances) -> Result<()> {
        if !self.is_hermitian(tol) {
            return Err(Error::NotHermitian {
                defect: self.blocks.iter().map(|b| b.hermitian_defect()).fold(0.0, f64::max),
                bound: tol.herm_sym * self.norm(),
            });
        }
        if !self.is_positive(tol) {
            return Err(Error::NotPositive {
                min_eigenvalue: self.min_eigenvalue(tol).unwrap_or(f64::NAN),
                bound: -tol.herm_sym * self.norm(),
            });
        }
        Ok(())
    }

    fn map_positive(
        &self,
        tol: &Tolerances,
        f: impl Fn(&ComplexMatrix, &Tolerances) -> Result<ComplexMatrix>,
    ) -> Result<Self> {
        self.require_positive(tol)?;
        // Positivity is judged against the global norm; per-block checks in
        // the kernels only need to see the symmetrized block.
        let loose = Tolerances {
            herm_sym: f64::INFINITY,
            ..*tol
        };
        let blocks = self
            .blocks
            .iter()
            .map(|b| f(&b.hermitian_part(), &loose))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            shape: self.shape.clone(),
            blocks,
        })
    }

    pub fn sqrt_pos(&self, tol: &Tolerances) -> Result<Self> {
        self.map_positive(tol, linalg::psd_sqrt)
    }

    pub fn pinv_pos(&self, tol: &Tolerances) -> Result<Self> {
        self.map_positive(tol, linalg::psd_pinv)
    }

    pub fn random(shape: &AlgebraShape, seed: u64) -> Self {
        Self::random_with(shape, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Ginibre element: i.i.d. standard complex Gaussian entries, block by block.
    pub fn random_with<R: Rng + ?Sized>(shape: &AlgebraShape, rng: &mut R) -> Self {
        Self {
            shape: shape.clone(),
            blocks: shape.block_dims.iter().map(|&n| ginibre(n, n, rng)).collect(),
        }
    }

    /// Block-diagonal matrix of size `Σ n_i`.
    pub fn to_faithful(&self) -> ComplexMatrix {
        let d = self.shape.faithful_dim();
        let mut out = ComplexMatrix::zeros(d, d);
        let mut offset = 0;
        for b in &self.blocks {
            out.set_submatrix(offset, offset, b);
            offset += b.rows();
        }
        out
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }
}

/// An `r × c` matrix with entries in `A`.
///
/// Stored as one complex matrix per block: block `i` is `(r·n_i) × (c·n_i)`,
/// and entry `(j, l)` occupies rows `j·n_i..(j+1)·n_i`, columns
/// `l·n_i..(l+1)·n_i` of it.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixOverA {
    shape: AlgebraShape,
    rows: usize,
    cols: usize,
    blocks: Vec<ComplexMatrix>,
}

impl MatrixOverA {
    pub fn from_blocks(
        shape: &AlgebraShape,
        rows: usize,
        cols: usize,
        blocks: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "{} blocks for an algebra with {}",
                blocks.len(),
                shape.num_blocks()
            )));
        }
        for (b, &n) in blocks.iter().zip(shape.block_dims()) {
            if b.rows() != rows * n || b.cols() != cols * n {
                return Err(Error::ShapeMismatch(format!(
                    "block of size {}x{} where {}x{} expected",
                    b.rows(),
                    b.cols(),
                    rows * n,
                    cols * n
                )));
            }
            if !b.is_finite() {
                return Err(Error::Invalid("non-finite matrix entry".into()));
            }
        }
        Ok(Self {
            shape: shape.clone(),
            rows,
            cols,
            blocks,
        })
    }

    pub fn zeros(shape: &AlgebraShape, rows: usize, cols: usize) -> Self {
        Self::map_dims(shape, rows, cols, |n| ComplexMatrix::zeros(rows * n, cols * n))
    }

    pub fn identity(shape: &AlgebraShape, k: usize) -> Self {
        Self::map_dims(shape, k, k, |n| ComplexMatrix::identity(k * n))
    }

    fn map_dims(
        shape: &AlgebraShape,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize) -> ComplexMatrix,
    ) -> Self {
        Self {
            shape: shape.clone(),
            rows,
            cols,
            blocks: shape.block_dims.iter().map(|&n| f(n)).collect(),
        }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_entries(
        shape: &AlgebraShape,
        rows: usize,
        cols: usize,
        entries: &[AlgebraElement],
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let mut out = Self::zeros(shape, rows, cols);
        for j in 0..rows {
            for l in 0..cols {
                out.set_entry(j, l, &entries[j * cols + l])?;
            }
        }
        Ok(out)
    }

    pub fn entry(&self, j: usize, l: usize) -> AlgebraElement {
        let blocks = self
            .shape
            .block_dims
            .iter()
            .zip(&self.blocks)
            .map(|(&n, b)| b.submatrix(j * n, l * n, n, n))
            .collect();
        AlgebraElement {
            shape: self.shape.clone(),
            blocks,
        }
    }

    pub fn set_entry(&mut self, j: usize, l: usize, a: &AlgebraElement) -> Result<()> {
        self.shape.ensure_same(&a.shape)?;
        for (i, &n) in self.shape.block_dims.iter().enumerate() {
            self.blocks[i].set_submatrix(j * n, l * n, &a.blocks[i]);
        }
        Ok(())
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &ComplexMatrix {
        &self.blocks[i]
    }

    /// Applies a per-block map that preserves the block layout.
    pub fn map_blocks(
        &self,
        rows: usize,
        cols: usize,
        f: impl Fn(usize, &ComplexMatrix) -> Result<ComplexMatrix>,
    ) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| f(i, b))
            .collect::<Result<Vec<_>>>()?;
        Self::from_blocks(&self.shape, rows, cols, blocks)
    }

    fn ensure_dims(&self, other: &Self, rows: usize, cols: usize, what: &str) -> Result<()> {
        self.shape.ensure_same(&other.shape)?;
        if other.rows != rows || other.cols != cols {
            return Err(Error::ShapeMismatch(format!(
                "{what}: {}x{} matrix where {rows}x{cols} expected",
                other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ensure_dims(other, self.rows, self.cols, "sum")?;
        self.map_blocks(self.rows, self.cols, |i, b| Ok(b + &other.blocks[i]))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.ensure_dims(other, self.rows, self.cols, "difference")?;
        self.map_blocks(self.rows, self.cols, |i, b| Ok(b - &other.blocks[i]))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.ensure_dims(other, self.cols, other.cols, "product")?;
        self.map_blocks(self.rows, other.cols, |i, b| Ok(b * &other.blocks[i]))
    }

    pub fn adjoint(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            rows: self.cols,
            cols: self.rows,
            blocks: self.blocks.iter().map(ComplexMatrix::adjoint).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            shape: self.shape.clone(),
            rows: self.rows,
            cols: self.cols,
            blocks: self.blocks.iter().map(|b| b.scale(c)).collect(),
        }
    }

    /// Right multiplication of every entry by `a`.
    pub fn mul_right(&self, a: &AlgebraElement) -> Result<Self> {
        self.shape.ensure_same(&a.shape)?;
        self.map_blocks(self.rows, self.cols, |i, b| Ok(b * &a.blocks[i].kron_identity(self.cols)))
    }

    /// Left multiplication of every entry by `a`.
    pub fn mul_left(&self, a: &AlgebraElement) -> Result<Self> {
        self.shape.ensure_same(&a.shape)?;
        self.map_blocks(self.rows, self.cols, |i, b| Ok(&a.blocks[i].kron_identity(self.rows) * b))
    }

    /// C*-norm as an operator on `A^cols → A^rows`.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(ComplexMatrix::spectral_norm).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// Block-diagonal sum `[[self, 0], [0, other]]`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.shape.ensure_same(&other.shape)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| ComplexMatrix::block_diag(a, b))
            .collect();
        Ok(Self {
            shape: self.shape.clone(),
            rows: self.rows + other.rows,
            cols: self.cols + other.cols,
            blocks,
        })
    }

    /// Column concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        self.shape.ensure_same(&other.shape)?;
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch("hstack row counts differ".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .zip(&self.shape.block_dims)
            .map(|((a, b), &n)| ComplexMatrix::hstack(self.rows * n, &[a, b]))
            .collect();
        Ok(Self {
            shape: self.shape.clone(),
            rows: self.rows,
            cols: self.cols + other.cols,
            blocks,
        })
    }

    /// Column `l` as an `r × 1` matrix.
    pub fn column(&self, l: usize) -> Self {
        let blocks = self
            .blocks
            .iter()
            .zip(&self.shape.block_dims)
            .map(|(b, &n)| b.submatrix(0, l * n, self.rows * n, n))
            .collect();
        Self {
            shape: self.shape.clone(),
            rows: self.rows,
            cols: 1,
            blocks,
        }
    }

    /// The standard basis vector `e_j` of `A^k` as a `k × 1` matrix.
    pub fn unit_column(shape: &AlgebraShape, k: usize, j: usize) -> Self {
        let mut out = Self::zeros(shape, k, 1);
        out.set_entry(j, 0, &AlgebraElement::one(shape))
            .expect("shape matches by construction");
        out
    }

    pub fn random(shape: &AlgebraShape, rows: usize, cols: usize, seed: u64) -> Self {
        Self::random_with(shape, rows, cols, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn random_with<R: Rng + ?Sized>(
        shape: &AlgebraShape,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Self {
        Self::map_dims(shape, rows, cols, |n| ginibre(rows * n, cols * n, rng))
    }

    /// The `(r·N) × (c·N)` complex matrix, `N = Σ n_i`, whose `(j, l)` tile is
    /// the block-diagonal faithful image of entry `(j, l)`.
    pub fn to_faithful(&self) -> ComplexMatrix {
        let d = self.shape.faithful_dim();
        let mut out = ComplexMatrix::zeros(self.rows * d, self.cols * d);
        for j in 0..self.rows {
            for l in 0..self.cols {
                out.set_submatrix(j * d, l * d, &self.entry(j, l).to_faithful());
            }
        }
        out
    }

    /// Largest per-block Frobenius defect of `m − m*`, relative scale ignored.
    pub fn hermitian_defect(&self) -> f64 {
        self.blocks.iter().map(|b| b.hermitian_defect()).fold(0.0, f64::max)
    }

    /// Checks that the faithful image commutes with right multiplication by
    /// every central block unit, i.e. that the matrix is an `A`-module map.
    pub fn commutes_with_right_action(&self, tol: &Tolerances) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let f = self.to_faithful();
        (0..self.shape.num_blocks()).all(|i| {
            let e = AlgebraElement::block_unit(&self.shape, i)
                .to_faithful()
                .kron_identity(self.rows);
            (&(&f * &e) - &(&e * &f)).max_abs() <= tol.invariant_abs
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(ComplexMatrix::max_abs).fold(0.0, f64::max)
    }
}
