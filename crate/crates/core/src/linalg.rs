//! Dense complex-matrix kernels.
//!
//! Hermitian eigendecomposition uses cyclic two-sided Jacobi rotations and the
//! SVD uses one-sided (Hestenes) Jacobi. Both are deterministic, accurate at
//! the small dimensions this crate works with, and need nothing beyond `alloc`.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Sweep cap for both Jacobi iterations.
pub const MAX_SWEEPS: usize = 100;

/// Factor by which every singular value must clear a rank cutoff.
pub const SEPARATION: f64 = 10.0;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Numerical thresholds shared by every operation.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rel: f64,
    /// Absolute bound used when checking invariants.
    pub invariant_abs: f64,
    /// Relative bound on the anti-Hermitian part of "Hermitian" inputs.
    pub herm_sym: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            invariant_abs: 1e-8,
            herm_sym: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [self.rank_rel, self.invariant_abs, self.herm_sym];
        if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Invalid("tolerances must be finite and nonnegative".into()));
        }
        if self.rank_rel >= 1.0 {
            return Err(Error::Invalid("rank_rel must be below 1".into()));
        }
        Ok(())
    }
}

/// Dense row-major complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(*d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        // Jacobi does not fail on finite input in practice; fall back to the
        // Frobenius bound if it ever does.
        match svd(self) {
            Ok(s) => s.sigma.first().copied().unwrap_or(0.0),
            Err(_) => self.frobenius_norm(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `(m + m*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Frobenius norm of `m - m*`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])])
    }

    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(row0 + i, col0 + j)])
    }

    pub fn set_submatrix(&mut self, row0: usize, col0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(row0 + i, col0 + j)] = block[(i, j)];
            }
        }
    }

    /// Horizontal concatenation. All parts must share a row count.
    pub fn hstack(rows: usize, parts: &[&Self]) -> Self {
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut c0 = 0;
        for p in parts {
            assert_eq!(p.rows, rows, "hstack row mismatch");
            out.set_submatrix(0, c0, p);
            c0 += p.cols;
        }
        out
    }

    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let mut out = Self::zeros(a.rows + b.rows, a.cols + b.cols);
        out.set_submatrix(0, 0, a);
        out.set_submatrix(a.rows, a.cols, b);
        out
    }

    /// `I_k ⊗ self`.
    pub fn kron_identity(&self, k: usize) -> Self {
        let mut out = Self::zeros(k * self.rows, k * self.cols);
        for t in 0..k {
            out.set_submatrix(t * self.rows, t * self.cols, self);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn col_dot(&self, p: usize, q: usize) -> C64 {
        let mut acc = ZERO;
        for i in 0..self.rows {
            acc += self[(i, p)].conj() * self[(i, q)];
        }
        acc
    }

    fn col_norm_sqr(&self, p: usize) -> f64 {
        (0..self.rows).map(|i| self[(i, p)].norm_sqr()).sum()
    }

    /// Replaces columns `p`, `q` by `c·a_p − s·w̄·a_q` and `s·w·a_p + c·a_q`.
    fn rotate_columns(&mut self, p: usize, q: usize, c: f64, s: f64, w: C64) {
        for i in 0..self.rows {
            let ap = self[(i, p)];
            let aq = self[(i, q)];
            self[(i, p)] = ap * c - w.conj() * aq * s;
            self[(i, q)] = w * ap * s + aq * c;
        }
    }

    /// Left multiplication by the adjoint of the rotation used in `rotate_columns`.
    fn rotate_rows(&mut self, p: usize, q: usize, c: f64, s: f64, w: C64) {
        for j in 0..self.cols {
            let ap = self[(p, j)];
            let aq = self[(q, j)];
            self[(p, j)] = ap * c - w * aq * s;
            self[(q, j)] = w.conj() * ap * s + aq * c;
        }
    }
}

impl core::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols, "matrix sum dimension mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols, "matrix difference dimension mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Rotation angle for the Hermitian 2×2 problem `[[app, |apq|], [|apq|, aqq]]`.
fn jacobi_angle(app: f64, aqq: f64, apq_abs: f64) -> (f64, f64) {
    let tau = (aqq - app) / (2.0 * apq_abs);
    let t = if tau >= 0.0 {
        1.0 / (tau + Float::hypot(1.0, tau))
    } else {
        -1.0 / (-tau + Float::hypot(1.0, tau))
    };
    let c = 1.0 / Float::hypot(1.0, t);
    (c, t * c)
}

/// Rotates `v` so its first non-negligible coordinate is real and positive.
fn normalize_phase(v: &mut ComplexMatrix, col: usize) {
    let scale = (0..v.rows).map(|i| v[(i, col)].norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(i) = (0..v.rows).find(|&i| v[(i, col)].norm() > 1e-8 * scale) {
        let z = v[(i, col)];
        let phase = z.conj() / z.norm();
        for r in 0..v.rows {
            v[(r, col)] *= phase;
        }
    }
}

fn lexicographic(v: &ComplexMatrix, a: usize, b: usize) -> Ordering {
    for i in 0..v.rows {
        let (x, y) = (v[(i, a)], v[(i, b)]);
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Eigenvalues in descending order with matching unitary eigenvector columns.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermEig {
    /// `V diag(f(λ)) V*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let d = f(lambda);
            if d == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = v[(i, k)] * d;
                for j in 0..n {
                    out[(i, j)] += vi * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

fn check_hermitian(m: &ComplexMatrix, tol: &Tolerances) -> Result<()> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "expected a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let bound = tol.herm_sym * m.frobenius_norm();
    let defect = m.hermitian_defect();
    if defect > bound {
        return Err(Error::NotHermitian { defect, bound });
    }
    Ok(())
}

/// Hermitian eigendecomposition by cyclic Jacobi.
///
/// Ties between equal eigenvalues are broken by lexicographic order of the
/// phase-normalized eigenvectors, so the output is reproducible.
pub fn herm_eig(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermEig> {
    check_hermitian(m, tol)?;
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a[(p, q)].norm_sqr();
                }
            }
        }
        if off.sqrt() <= f64::EPSILON * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g <= 1e-3 * f64::EPSILON * scale {
                    continue;
                }
                let w = apq / g;
                let (c, s) = jacobi_angle(a[(p, p)].re, a[(q, q)].re, g);
                a.rotate_columns(p, q, c, s, w);
                a.rotate_rows(p, q, c, s, w);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                v.rotate_columns(p, q, c, s, w);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    for k in 0..n {
        normalize_phase(&mut v, k);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        a[(y, y)]
            .re
            .total_cmp(&a[(x, x)].re)
            .then_with(|| lexicographic(&v, x, y))
    });
    Ok(HermEig {
        values: order.iter().map(|&k| a[(k, k)].re).collect(),
        vectors: v.select_columns(&order),
    })
}

/// Singular value decomposition `m = U diag(σ) V*` with σ descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, n) = (self.u.rows, self.v.rows);
        let mut out = ComplexMatrix::zeros(m, n);
        for (k, &s) in self.sigma.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            for i in 0..m {
                let ui = self.u[(i, k)] * s;
                for j in 0..n {
                    out[(i, j)] += ui * self.v[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// One-sided Jacobi on a tall matrix: returns `(U thin, σ, V square)`.
fn jacobi_svd_tall(m: &ComplexMatrix) -> Result<Svd> {
    let (rows, n) = (m.rows, m.cols);
    debug_assert!(rows >= n);
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let threshold = Float::sqrt(rows.max(1) as f64) * f64::EPSILON;

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = a.col_norm_sqr(p);
                let beta = a.col_norm_sqr(q);
                let gamma = a.col_dot(p, q);
                let g = gamma.norm();
                if g == 0.0 || g <= threshold * Float::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let w = gamma / g;
                let (c, s) = jacobi_angle(alpha, beta, g);
                a.rotate_columns(p, q, c, s, w);
                v.rotate_columns(p, q, c, s, w);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let norms: Vec<f64> = (0..n).map(|j| Float::sqrt(a.col_norm_sqr(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sigma: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let negligible = (rows.max(n) as f64) * f64::EPSILON * sigma_max;

    let mut u = ComplexMatrix::zeros(rows, n);
    let mut good = 0;
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        if s > negligible && s > 0.0 {
            for i in 0..rows {
                u[(i, dst)] = a[(i, src)] / s;
            }
            good = dst + 1;
        }
    }
    let u = orthonormal_completion(&u.submatrix(0, 0, rows, good), n);
    Ok(Svd {
        u,
        sigma,
        v: v.select_columns(&order),
    })
}

/// Extends orthonormal columns `q` to `target` orthonormal columns by
/// Gram–Schmidt against the standard basis, always taking the unit vector with
/// the largest residual.
pub fn orthonormal_completion(q: &ComplexMatrix, target: usize) -> ComplexMatrix {
    let rows = q.rows;
    assert!(target <= rows, "cannot complete beyond the ambient dimension");
    let mut basis: Vec<Vec<C64>> = (0..q.cols).map(|j| q.column(j)).collect();
    while basis.len() < target {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for k in 0..rows {
            let mut r = vec![ZERO; rows];
            r[k] = ONE;
            // two passes of classical Gram–Schmidt
            for _ in 0..2 {
                for b in &basis {
                    let proj: C64 = b.iter().zip(&r).map(|(x, y)| x.conj() * y).sum();
                    for (ri, bi) in r.iter_mut().zip(b) {
                        *ri -= bi * proj;
                    }
                }
            }
            let norm = Float::sqrt(r.iter().map(|z| z.norm_sqr()).sum::<f64>());
            if best.as_ref().is_none_or(|(n, _)| norm > *n) {
                best = Some((norm, r));
            }
        }
        let (norm, mut r) = best.expect("ambient dimension exhausted");
        for z in &mut r {
            *z /= norm;
        }
        basis.push(r);
    }
    ComplexMatrix::from_fn(rows, target, |i, j| basis[j][i])
}

/// Thin SVD: for an `m×n` input, `U` is `m×p`, `V` is `n×p`, `p = min(m, n)`,
/// except that the longer side is returned square when it is already computed.
pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    if m.rows >= m.cols {
        let s = jacobi_svd_tall(m)?;
        Ok(s)
    } else {
        let s = jacobi_svd_tall(&m.adjoint())?;
        Ok(Svd {
            u: s.v,
            sigma: s.sigma,
            v: s.u,
        })
    }
}

/// SVD with square unitary `U` (`m×m`) and `V` (`n×n`).
pub fn svd_full(m: &ComplexMatrix) -> Result<Svd> {
    let s = svd(m)?;
    Ok(Svd {
        u: orthonormal_completion(&s.u, m.rows),
        v: orthonormal_completion(&s.v, m.cols),
        sigma: s.sigma,
    })
}

/// Number of singular values strictly above `rank_rel · σ_max`.
pub fn numeric_rank(m: &ComplexMatrix, tol: &Tolerances) -> Result<usize> {
    let s = svd(m)?;
    Ok(rank_above(&s.sigma, tol.rank_rel * s.sigma.first().copied().unwrap_or(0.0)))
}

pub fn rank_above(sigma: &[f64], cutoff: f64) -> usize {
    sigma.iter().filter(|&&s| s > cutoff).count()
}

/// First value lying within a factor [`SEPARATION`] of `cutoff`, if any.
pub fn ambiguous_value(values: &[f64], cutoff: f64) -> Option<f64> {
    if cutoff <= 0.0 {
        return None;
    }
    values
        .iter()
        .copied()
        .find(|&s| s > cutoff / SEPARATION && s <= cutoff * SEPARATION)
}

fn psd_eig(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermEig> {
    let eig = herm_eig(m, tol)?;
    let scale = eig.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let bound = -tol.herm_sym * scale;
    if let Some(&min) = eig.values.last() {
        if min < bound {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
                bound,
            });
        }
    }
    Ok(eig)
}

/// Square root of a positive semidefinite matrix; round-off negatives are clamped to 0.
pub fn psd_sqrt(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = psd_eig(m, tol)?;
    Ok(eig.reconstruct_with(|l| Float::sqrt(l.max(0.0))))
}

/// Moore–Penrose inverse of a positive semidefinite matrix.
pub fn psd_pinv(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = psd_eig(m, tol)?;
    let cutoff = tol.rank_rel * eig.values.first().copied().unwrap_or(0.0).max(0.0);
    Ok(eig.reconstruct_with(|l| if l > cutoff && l > 0.0 { 1.0 / l } else { 0.0 }))
}

/// Moore–Penrose inverse; singular values at or below the rank cutoff are treated as zero.
pub fn pinv(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let s = svd(m)?;
    let cutoff = tol.rank_rel * s.sigma.first().copied().unwrap_or(0.0);
    let mut out = ComplexMatrix::zeros(m.cols, m.rows);
    for (k, &sv) in s.sigma.iter().enumerate() {
        if sv <= cutoff || sv == 0.0 {
            continue;
        }
        for i in 0..m.cols {
            let vi = s.v[(i, k)] / sv;
            for j in 0..m.rows {
                out[(i, j)] += vi * s.u[(j, k)].conj();
            }
        }
    }
    Ok(out)
}
