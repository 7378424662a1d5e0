//! Hilbert modules over finite-dimensional C*-algebras.
//!
//! The algebra is always a finite direct sum of full matrix algebras
//! `M_{n_1}(C) ⊕ … ⊕ M_{n_s}(C)`. Every finitely generated Hilbert module over
//! such an algebra is the range of a projection on a free module `A^k`, and is
//! self-dual, so duals and biduals are carried by Riesz vectors and every map
//! in the dual-module calculus becomes a matrix over `A`.
//!
//! The crate is `no_std` (with `alloc`). File formats, the CLI and all IO live
//! in the `hilmod` companion crate.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod duality;
mod error;
pub mod fredholm;
pub mod linalg;
pub mod module;
pub mod operator;
pub mod scenarios;
#[cfg(feature = "serde")]
mod wire;

pub use algebra::{AlgebraElement, AlgebraShape, MatrixOverA};
pub use duality::{BidualElement, DualElement};
pub use error::{Error, Result};
pub use fredholm::{FredholmData, IndexReport, K0Class};
pub use linalg::{ComplexMatrix, Tolerances, C64};
pub use module::{HilbertModule, ModuleElement, Submodule};
pub use operator::AdjointableOperator;
pub use scenarios::{Report, Scenario, ScenarioKind};
