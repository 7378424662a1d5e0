//! Serde representations.
//!
//! Complex numbers are `[re, im]` pairs, blocks are row-major arrays of such
//! pairs, and shapes are plain arrays of block sizes. Everything read back is
//! re-validated through the public constructors.

use alloc::vec::Vec;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{AlgebraElement, AlgebraShape, MatrixOverA};
use crate::fredholm::K0Class;
use crate::linalg::{ComplexMatrix, Tolerances, C64};
use crate::module::{HilbertModule, ModuleElement};
use crate::operator::AdjointableOperator;

type Block = Vec<[f64; 2]>;

fn encode_block(m: &ComplexMatrix) -> Block {
    m.data().iter().map(|z| [z.re, z.im]).collect()
}

fn decode_block<E: serde::de::Error>(rows: usize, cols: usize, b: &Block) -> Result<ComplexMatrix, E> {
    let data = b.iter().map(|&[re, im]| C64::new(re, im)).collect();
    ComplexMatrix::new(rows, cols, data).map_err(E::custom)
}

impl Serialize for AlgebraShape {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.block_dims().serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraShape {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let dims = Vec::<usize>::deserialize(d)?;
        AlgebraShape::new(dims).map_err(D::Error::custom)
    }
}

impl Serialize for AlgebraElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let blocks: Vec<Block> = self.blocks().iter().map(encode_block).collect();
        blocks.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<Block>::deserialize(d)?;
        let mut dims = Vec::with_capacity(raw.len());
        let mut blocks = Vec::with_capacity(raw.len());
        for b in &raw {
            let n = b.len().isqrt();
            if n * n != b.len() {
                return Err(D::Error::custom("algebra block is not square"));
            }
            dims.push(n);
            blocks.push(decode_block(n, n, b)?);
        }
        let shape = AlgebraShape::new(dims).map_err(D::Error::custom)?;
        AlgebraElement::from_blocks(&shape, blocks).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    shape: AlgebraShape,
    rows: usize,
    cols: usize,
    blocks: Vec<Block>,
}

impl Serialize for MatrixOverA {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawMatrix {
            shape: self.shape().clone(),
            rows: self.rows(),
            cols: self.cols(),
            blocks: self.blocks().iter().map(encode_block).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixOverA {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawMatrix::deserialize(d)?;
        if raw.blocks.len() != raw.shape.num_blocks() {
            return Err(D::Error::custom("block count does not match the shape"));
        }
        let blocks = raw
            .shape
            .block_dims()
            .iter()
            .zip(&raw.blocks)
            .map(|(&n, b)| decode_block(raw.rows * n, raw.cols * n, b))
            .collect::<Result<Vec<_>, _>>()?;
        MatrixOverA::from_blocks(&raw.shape, raw.rows, raw.cols, blocks).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct RawModule {
    shape: AlgebraShape,
    ambient_rank: usize,
    projection: Vec<Block>,
}

impl Serialize for HilbertModule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawModule {
            shape: self.shape().clone(),
            ambient_rank: self.ambient_rank(),
            projection: self.projection().blocks().iter().map(encode_block).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HilbertModule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawModule::deserialize(d)?;
        let k = raw.ambient_rank;
        if raw.projection.len() != raw.shape.num_blocks() {
            return Err(D::Error::custom("block count does not match the shape"));
        }
        let blocks = raw
            .shape
            .block_dims()
            .iter()
            .zip(&raw.projection)
            .map(|(&n, b)| decode_block(k * n, k * n, b))
            .collect::<Result<Vec<_>, _>>()?;
        let proj = MatrixOverA::from_blocks(&raw.shape, k, k, blocks).map_err(D::Error::custom)?;
        HilbertModule::from_projection(proj, &Tolerances::default()).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct RawElement {
    module: HilbertModule,
    vec: MatrixOverA,
}

impl Serialize for ModuleElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawElement {
            module: self.module().clone(),
            vec: self.vec().clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModuleElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawElement::deserialize(d)?;
        raw.module
            .element(raw.vec, &Tolerances::default())
            .map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct RawOperator {
    source: HilbertModule,
    target: HilbertModule,
    mat: MatrixOverA,
}

impl Serialize for AdjointableOperator {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawOperator {
            source: self.source().clone(),
            target: self.target().clone(),
            mat: self.matrix().clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AdjointableOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawOperator::deserialize(d)?;
        AdjointableOperator::new(&raw.source, &raw.target, raw.mat).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct RawClass {
    shape: AlgebraShape,
    ranks: Vec<i64>,
}

impl Serialize for K0Class {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawClass {
            shape: self.shape().clone(),
            ranks: self.ranks().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for K0Class {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawClass::deserialize(d)?;
        K0Class::new(&raw.shape, raw.ranks).map_err(D::Error::custom)
    }
}
