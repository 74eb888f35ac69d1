//! Quantization, rate estimation, and rate-distortion-optimized transform
//! selection per block.
//!
//! Distortion is the summed squared error between transform coefficients and
//! their quantized reconstruction, which by orthonormality equals the
//! pixel-domain summed squared error. The Lagrangian uses the VVC-style
//! multiplier law, which is calibrated for exactly this distortion scale.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::bank::{side_bits_for, Transform, TransformBank};
use crate::{Error, Result};

/// Uniform scalar quantizer with step `2^((qp-4)/6)`.
#[derive(Clone, Copy, Debug)]
pub struct QuantizerSpec {
    qp: i32,
    step: f64,
}

impl QuantizerSpec {
    pub fn new(qp: i32) -> Result<Self> {
        if !(0..=51).contains(&qp) {
            return Err(Error::QpOutOfRange(qp));
        }
        Ok(QuantizerSpec {
            qp,
            step: ((qp - 4) as f64 / 6.0).exp2(),
        })
    }

    pub fn qp(self) -> i32 {
        self.qp
    }

    pub fn step(self) -> f64 {
        self.step
    }
}

/// Lagrange multiplier `0.57 * 2^((qp-12)/3)`.
pub fn lambda_from_qp(qp: i32) -> Result<f64> {
    if !(0..=51).contains(&qp) {
        return Err(Error::QpOutOfRange(qp));
    }
    Ok(0.57 * ((qp - 12) as f64 / 3.0).exp2())
}

/// Quantize coefficients: `round(c / step)` with halves away from zero.
pub fn quantize(coeffs: &[f64], spec: QuantizerSpec) -> Vec<i32> {
    coeffs.iter().map(|c| (c / spec.step).round() as i32).collect()
}

/// Reconstruction `index * step`.
pub fn dequantize(indices: &[i32], spec: QuantizerSpec) -> Vec<f64> {
    indices.iter().map(|&i| i as f64 * spec.step).collect()
}

/// Rate model: block length times the order-0 empirical entropy of the index
/// values within the block, plus `ceil(log2 l)` fixed-length index bits for a
/// bank of `l` candidates.
pub fn rate_estimate(indices: &[i32], l: usize) -> f64 {
    entropy_bits(indices) + side_bits_for(l) as f64
}

/// `len * H0(empirical distribution)` in bits. The accumulation order is
/// fixed by value so the result is bit-reproducible.
pub fn entropy_bits(indices: &[i32]) -> f64 {
    if indices.is_empty() {
        return 0.0;
    }
    let mut counts: BTreeMap<i32, u32> = BTreeMap::new();
    for &v in indices {
        *counts.entry(v).or_insert(0) += 1;
    }
    let n = indices.len() as f64;
    let h0: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    n * h0
}

/// Outcome of RDOT selection for one block.
#[derive(Clone, Debug)]
pub struct CodedBlock {
    /// Block side.
    pub n: usize,
    /// Ordinal of the winning transform within its bank.
    pub transform: usize,
    /// Quantized coefficient indices in the transform's canonical order.
    pub indices: Vec<i32>,
    /// Estimated rate in bits (coefficient entropy plus index side bits).
    pub rate_bits: f64,
    /// Transform-domain summed squared quantization error; equals the
    /// pixel-domain summed squared error by orthonormality.
    pub distortion: f64,
    /// Lagrangian cost `distortion + lambda * rate_bits`.
    pub cost: f64,
}

/// Evaluate one candidate transform on a block signal.
pub fn evaluate_candidate(
    member: &Transform,
    f: &[f64],
    spec: QuantizerSpec,
    lambda: f64,
    side_bits: f64,
) -> Result<CodedBlock> {
    let coeffs = member.forward(f)?;
    let indices = quantize(&coeffs, spec);
    let mut distortion = 0.0;
    for (c, &i) in coeffs.iter().zip(&indices) {
        let e = c - i as f64 * spec.step;
        distortion += e * e;
    }
    let rate_bits = entropy_bits(&indices) + side_bits;
    Ok(CodedBlock {
        n: member.n(),
        transform: member.id.ordinal,
        indices,
        rate_bits,
        distortion,
        cost: distortion + lambda * rate_bits,
    })
}

/// RDOT selection: evaluate every bank member on the block and return the
/// minimizer of `D + lambda * R`, breaking ties by lowest ordinal.
pub fn rdot_select(
    block: &[f64],
    bank: &TransformBank,
    spec: QuantizerSpec,
    lambda: f64,
) -> Result<CodedBlock> {
    rdot_select_restricted(block, bank, spec, lambda, None)
}

/// RDOT selection over an ordinal subset of the bank (`None` = full bank).
/// The side-bit cost reflects the restricted candidate count.
pub fn rdot_select_restricted(
    block: &[f64],
    bank: &TransformBank,
    spec: QuantizerSpec,
    lambda: f64,
    subset: Option<&[usize]>,
) -> Result<CodedBlock> {
    let ordinals: Vec<usize> = match subset {
        Some(s) => s.to_vec(),
        None => (0..bank.len()).collect(),
    };
    if ordinals.is_empty() {
        return Err(Error::EmptyBank);
    }
    let side = side_bits_for(ordinals.len()) as f64;
    let mut best: Option<CodedBlock> = None;
    for &ord in &ordinals {
        let cand = evaluate_candidate(bank.member(ord)?, block, spec, lambda, side)?;
        let better = match &best {
            None => true,
            Some(b) => cand.cost < b.cost,
        };
        if better {
            best = Some(cand);
        }
    }
    Ok(best.unwrap())
}

/// Batched RDOT selection over many same-size blocks (one per column).
/// Evaluates each bank member against the whole batch with one matrix
/// product, which is how the experiment runner keeps large banks affordable.
pub fn rdot_select_batch(
    blocks: &DMatrix<f64>,
    bank: &TransformBank,
    spec: QuantizerSpec,
    lambda: f64,
    subset: Option<&[usize]>,
) -> Result<Vec<CodedBlock>> {
    let ordinals: Vec<usize> = match subset {
        Some(s) => s.to_vec(),
        None => (0..bank.len()).collect(),
    };
    if ordinals.is_empty() {
        return Err(Error::EmptyBank);
    }
    let m = blocks.ncols();
    let n2 = blocks.nrows();
    let side = side_bits_for(ordinals.len()) as f64;
    let mut best: Vec<Option<CodedBlock>> = vec![None; m];
    let mut indices = vec![0i32; n2];
    for &ord in &ordinals {
        let member = bank.member(ord)?;
        let coeffs = member.forward_batch(blocks);
        for col in 0..m {
            let c = coeffs.column(col);
            let mut distortion = 0.0;
            for (i, v) in c.iter().enumerate() {
                let q = (v / spec.step).round();
                indices[i] = q as i32;
                let e = v - q * spec.step;
                distortion += e * e;
            }
            let rate_bits = entropy_bits(&indices) + side;
            let cost = distortion + lambda * rate_bits;
            let better = match &best[col] {
                None => true,
                Some(b) => cost < b.cost,
            };
            if better {
                best[col] = Some(CodedBlock {
                    n: member.n(),
                    transform: ord,
                    indices: indices.clone(),
                    rate_bits,
                    distortion,
                    cost,
                });
            }
        }
    }
    Ok(best.into_iter().map(Option::unwrap).collect())
}

/// Reconstruct a block: inverse transform of the dequantized indices.
pub fn decode_block(cb: &CodedBlock, bank: &TransformBank, spec: QuantizerSpec) -> Result<Vec<f64>> {
    let member = bank.member(cb.transform)?;
    member.inverse(&dequantize(&cb.indices, spec))
}
