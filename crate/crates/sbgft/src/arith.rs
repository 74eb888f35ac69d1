//! Order-0 adaptive arithmetic coding of quantized coefficient indices.
//!
//! A carry-less range coder drives a single adaptive frequency model over
//! zigzag-mapped indices. Small magnitudes get dedicated symbols; rare large
//! values escape to a raw 32-bit encoding. The model persists across blocks
//! within one stream, so measured lengths track the order-0 entropy of the
//! whole index stream.

use crate::{Error, Result};

const RANGE_TOP: u32 = 1 << 24;
const RANGE_BOTTOM: u32 = 1 << 16;

/// Zigzag symbols 0..ESC map |small| indices; ESC precedes a raw u32.
const ESC: u32 = 256;
const ALPHABET: usize = ESC as usize + 1;
const INCREMENT: u32 = 32;
/// Halve the model when totals approach the coder's precision floor.
const MAX_TOTAL: u32 = RANGE_BOTTOM - 512;

fn zigzag(v: i32) -> u32 {
    ((v << 1) ^ (v >> 31)) as u32
}

fn unzigzag(z: u32) -> i32 {
    ((z >> 1) as i32) ^ -((z & 1) as i32)
}

struct RangeEncoder {
    low: u32,
    range: u32,
    out: Vec<u8>,
}

impl RangeEncoder {
    fn new() -> Self {
        RangeEncoder {
            low: 0,
            range: u32::MAX,
            out: Vec::new(),
        }
    }

    fn encode(&mut self, cum: u32, freq: u32, total: u32) {
        debug_assert!(freq > 0 && cum + freq <= total && total <= RANGE_BOTTOM);
        let r = self.range / total;
        self.low = self.low.wrapping_add(r * cum);
        self.range = r * freq;
        self.normalize();
    }

    fn normalize(&mut self) {
        loop {
            if (self.low ^ self.low.wrapping_add(self.range)) < RANGE_TOP {
                // top byte settled
            } else if self.range < RANGE_BOTTOM {
                // underflow: clamp the range so the top byte settles
                self.range = self.low.wrapping_neg() & (RANGE_BOTTOM - 1);
            } else {
                break;
            }
            self.out.push((self.low >> 24) as u8);
            self.low <<= 8;
            self.range <<= 8;
        }
    }

    fn finish(mut self) -> Vec<u8> {
        for _ in 0..4 {
            self.out.push((self.low >> 24) as u8);
            self.low <<= 8;
        }
        self.out
    }
}

struct RangeDecoder<'a> {
    low: u32,
    range: u32,
    code: u32,
    input: &'a [u8],
    pos: usize,
}

impl<'a> RangeDecoder<'a> {
    fn new(input: &'a [u8]) -> Self {
        let mut d = RangeDecoder {
            low: 0,
            range: u32::MAX,
            code: 0,
            input,
            pos: 0,
        };
        for _ in 0..4 {
            d.code = (d.code << 8) | d.next_byte();
        }
        d
    }

    fn next_byte(&mut self) -> u32 {
        let b = self.input.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b as u32
    }

    /// Cumulative frequency the encoder saw for the current symbol.
    fn decode_target(&self, total: u32) -> u32 {
        let r = self.range / total;
        ((self.code.wrapping_sub(self.low)) / r).min(total - 1)
    }

    fn consume(&mut self, cum: u32, freq: u32, total: u32) {
        let r = self.range / total;
        self.low = self.low.wrapping_add(r * cum);
        self.range = r * freq;
        loop {
            if (self.low ^ self.low.wrapping_add(self.range)) < RANGE_TOP {
            } else if self.range < RANGE_BOTTOM {
                self.range = self.low.wrapping_neg() & (RANGE_BOTTOM - 1);
            } else {
                break;
            }
            self.code = (self.code << 8) | self.next_byte();
            self.low <<= 8;
            self.range <<= 8;
        }
    }
}

/// Adaptive frequency table with Fenwick-tree cumulative sums.
struct AdaptiveModel {
    tree: Vec<u32>,
    freq: Vec<u32>,
    total: u32,
}

impl AdaptiveModel {
    fn new(symbols: usize) -> Self {
        let mut m = AdaptiveModel {
            tree: vec![0; symbols + 1],
            freq: vec![0; symbols],
            total: 0,
        };
        for s in 0..symbols {
            m.add(s, 1);
        }
        m
    }

    fn add(&mut self, symbol: usize, delta: u32) {
        self.freq[symbol] += delta;
        self.total += delta;
        let mut i = symbol + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of frequencies of symbols strictly below `symbol`.
    fn cum(&self, symbol: usize) -> u32 {
        let mut s = 0;
        let mut i = symbol;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Symbol whose cumulative interval contains `target`.
    fn find(&self, target: u32) -> (usize, u32) {
        let mut idx = 0usize;
        let mut rem = target;
        let mut mask = self.tree.len().next_power_of_two() >> 1;
        while mask > 0 {
            let next = idx + mask;
            if next < self.tree.len() && self.tree[next] <= rem {
                rem -= self.tree[next];
                idx = next;
            }
            mask >>= 1;
        }
        (idx, target - rem) // (symbol, cum below it)
    }

    fn update(&mut self, symbol: usize) {
        self.add(symbol, INCREMENT);
        if self.total > MAX_TOTAL {
            let freqs: Vec<u32> = self.freq.iter().map(|&f| (f + 1) / 2).collect();
            self.tree.iter_mut().for_each(|t| *t = 0);
            self.freq.iter_mut().for_each(|f| *f = 0);
            self.total = 0;
            for (s, f) in freqs.into_iter().enumerate() {
                self.add(s, f);
            }
        }
    }
}

/// Streaming encoder for index sequences; the adaptive model spans the whole
/// stream.
pub struct IndexEncoder {
    rc: RangeEncoder,
    model: AdaptiveModel,
}

impl IndexEncoder {
    pub fn new() -> Self {
        IndexEncoder {
            rc: RangeEncoder::new(),
            model: AdaptiveModel::new(ALPHABET),
        }
    }

    pub fn push(&mut self, indices: &[i32]) {
        for &v in indices {
            let z = zigzag(v);
            if z < ESC {
                self.encode_symbol(z as usize);
            } else {
                self.encode_symbol(ESC as usize);
                // raw 32-bit payload through a uniform byte model
                for shift in [24, 16, 8, 0] {
                    let byte = ((z >> shift) & 0xFF) as u32;
                    self.rc.encode(byte, 1, 256);
                }
            }
        }
    }

    fn encode_symbol(&mut self, s: usize) {
        let cum = self.model.cum(s);
        self.rc.encode(cum, self.model.freq[s], self.model.total);
        self.model.update(s);
    }

    pub fn finish(self) -> Vec<u8> {
        self.rc.finish()
    }
}

impl Default for IndexEncoder {
    fn default() -> Self {
        Self::new()
    }
}

/// Streaming decoder mirroring [`IndexEncoder`].
pub struct IndexDecoder<'a> {
    rc: RangeDecoder<'a>,
    model: AdaptiveModel,
}

impl<'a> IndexDecoder<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        IndexDecoder {
            rc: RangeDecoder::new(bytes),
            model: AdaptiveModel::new(ALPHABET),
        }
    }

    pub fn next_indices(&mut self, count: usize) -> Result<Vec<i32>> {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let s = self.decode_symbol()?;
            if (s as u32) < ESC {
                out.push(unzigzag(s as u32));
            } else {
                let mut z = 0u32;
                for _ in 0..4 {
                    let byte = self.rc.decode_target(256);
                    self.rc.consume(byte, 1, 256);
                    z = (z << 8) | byte;
                }
                out.push(unzigzag(z));
            }
        }
        Ok(out)
    }

    fn decode_symbol(&mut self) -> Result<usize> {
        let target = self.rc.decode_target(self.model.total);
        let (s, cum) = self.model.find(target);
        if s >= ALPHABET {
            return Err(Error::CorruptStream("symbol out of range".into()));
        }
        self.rc.consume(cum, self.model.freq[s], self.model.total);
        self.model.update(s);
        Ok(s)
    }
}

/// One-shot encode of an index stream.
pub fn arithmetic_encode(indices: &[i32]) -> Vec<u8> {
    let mut enc = IndexEncoder::new();
    enc.push(indices);
    enc.finish()
}

/// One-shot decode; `count` must match the encoded symbol count.
pub fn arithmetic_decode(bytes: &[u8], count: usize) -> Result<Vec<i32>> {
    IndexDecoder::new(bytes).next_indices(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zigzag_roundtrip() {
        for v in [-1000, -2, -1, 0, 1, 2, 1000, i32::MIN, i32::MAX] {
            assert_eq!(unzigzag(zigzag(v)), v);
        }
    }

    #[test]
    fn all_zero_stream_compresses_hard() {
        let indices = vec![0i32; 4096];
        let bytes = arithmetic_encode(&indices);
        assert!(bytes.len() <= 64, "got {} bytes", bytes.len());
        assert_eq!(arithmetic_decode(&bytes, 4096).unwrap(), indices);
    }

    #[test]
    fn bernoulli_half_costs_about_one_bit() {
        let mut state = 0x12345u64;
        let indices: Vec<i32> = (0..16384)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 62) & 1) as i32
            })
            .collect();
        let bytes = arithmetic_encode(&indices);
        let bits = bytes.len() as f64 * 8.0;
        let per_symbol = bits / indices.len() as f64;
        assert!(
            (per_symbol - 1.0).abs() < 0.02,
            "measured {per_symbol} bits/symbol"
        );
        assert_eq!(arithmetic_decode(&bytes, indices.len()).unwrap(), indices);
    }

    #[test]
    fn skewed_stationary_source_tracks_entropy() {
        // p = (0.875, 0.0625, 0.0625) over {0, 1, -1}
        let mut state = 99u64;
        let indices: Vec<i32> = (0..32768)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(7);
                match (state >> 59) & 15 {
                    0 => 1,
                    1 => -1,
                    _ => 0,
                }
            })
            .collect();
        let n = indices.len() as f64;
        let mut counts = std::collections::HashMap::new();
        for &v in &indices {
            *counts.entry(v).or_insert(0u32) += 1;
        }
        let entropy: f64 = counts
            .values()
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum();
        let bytes = arithmetic_encode(&indices);
        let bits = bytes.len() as f64 * 8.0;
        // within 2% of the stream's order-0 entropy plus model overhead
        assert!(bits <= 1.02 * entropy * n + 256.0, "bits {bits} vs H {}", entropy * n);
        assert!(bits >= 0.98 * entropy * n, "suspiciously short: {bits}");
        assert_eq!(arithmetic_decode(&bytes, indices.len()).unwrap(), indices);
    }

    #[test]
    fn escape_path_roundtrips() {
        let indices = vec![0, 1, -1, 5000, -123456, i32::MAX, i32::MIN, 2, 0];
        let bytes = arithmetic_encode(&indices);
        assert_eq!(arithmetic_decode(&bytes, indices.len()).unwrap(), indices);
    }

    #[test]
    fn streaming_blocks_match_oneshot() {
        let a = vec![1i32, 0, 0, -2, 3];
        let b = vec![0i32; 16];
        let c = vec![-7i32, 7, 0, 1];
        let mut enc = IndexEncoder::new();
        enc.push(&a);
        enc.push(&b);
        enc.push(&c);
        let bytes = enc.finish();
        let mut dec = IndexDecoder::new(&bytes);
        assert_eq!(dec.next_indices(a.len()).unwrap(), a);
        assert_eq!(dec.next_indices(b.len()).unwrap(), b);
        assert_eq!(dec.next_indices(c.len()).unwrap(), c);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn random_indices_roundtrip(values in proptest::collection::vec(-1000i32..1000, 0..600)) {
            let bytes = arithmetic_encode(&values);
            prop_assert_eq!(arithmetic_decode(&bytes, values.len()).unwrap(), values);
        }
    }
}
