//! Counter-based random number generation.
//!
//! Every random draw in the crate is a pure function of
//! `(seed, stream, tag, counter)`, where `stream` is typically a path index
//! and `tag` separates usage domains (step noise, initial-state rejection
//! sampling, oracle sampling). Ensembles are therefore reproducible and
//! order-independent under any parallel schedule: no generator state is
//! ever shared or advanced across workers.
//!
//! The block function is Philox-4x64-10, matching NumPy's `Philox` bit
//! generator word for word, which gives us externally generated known-answer
//! vectors.

use std::f64::consts::TAU;

const MULT_HI: u64 = 0xD2E7_470E_E14C_6C93;
const MULT_LO: u64 = 0xCA5A_8263_9512_1157;
const WEYL_0: u64 = 0x9E37_79B9_7F4A_7C15;
const WEYL_1: u64 = 0xBB67_AE85_84CA_A73B;

/// One Philox-4x64-10 block: 256-bit counter + 128-bit key -> 256 bits out.
pub fn philox4x64(mut ctr: [u64; 4], mut key: [u64; 2]) -> [u64; 4] {
    for _ in 0..10 {
        let prod0 = (MULT_HI as u128) * (ctr[0] as u128);
        let prod1 = (MULT_LO as u128) * (ctr[2] as u128);
        let (hi0, lo0) = ((prod0 >> 64) as u64, prod0 as u64);
        let (hi1, lo1) = ((prod1 >> 64) as u64, prod1 as u64);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
        key[0] = key[0].wrapping_add(WEYL_0);
        key[1] = key[1].wrapping_add(WEYL_1);
    }
    ctr
}

/// Usage-domain tags keeping independent draws on disjoint counters.
pub mod tag {
    /// Per-step driving noise of the Euler scheme.
    pub const STEP_NOISE: u64 = 1;
    /// Rejection attempts for initial states.
    pub const INIT: u64 = 2;
    /// Reference-distribution (oracle) sampling in verifiers.
    pub const ORACLE: u64 = 3;
    /// Plain gamma sampling through `GammaSource`.
    pub const SAMPLE: u64 = 4;
}

/// Stateless keyed generator: draws are addressed, never sequenced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: [u64; 2],
    tag: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64, tag: u64) -> Self {
        Self {
            key: [seed, stream],
            tag,
        }
    }

    fn block(&self, ctr: u64, block: u64) -> [u64; 4] {
        philox4x64([ctr, block, self.tag, 0], self.key)
    }

    /// Fill `out` with independent standard normals addressed by `ctr`.
    ///
    /// Each 256-bit block yields four deviates via two Box-Muller pairs, so
    /// the draw at a given `(ctr, index)` never depends on `out.len()`
    /// rounding — only on the block index.
    pub fn standard_normals(&self, ctr: u64, out: &mut [f64]) {
        let mut i = 0;
        let mut block = 0u64;
        while i < out.len() {
            let words = self.block(ctr, block);
            let (z0, z1) = box_muller(words[0], words[1]);
            out[i] = z0;
            i += 1;
            if i < out.len() {
                out[i] = z1;
                i += 1;
            }
            if i < out.len() {
                let (z2, z3) = box_muller(words[2], words[3]);
                out[i] = z2;
                i += 1;
                if i < out.len() {
                    out[i] = z3;
                    i += 1;
                }
            }
            block += 1;
        }
    }

    /// A single uniform in (0, 1) addressed by `ctr`.
    pub fn uniform(&self, ctr: u64) -> f64 {
        to_unit(self.block(ctr, 0)[0])
    }
}

/// Map a u64 to the open interval (0, 1): 53-bit mantissa, half-step offset.
#[inline]
fn to_unit(word: u64) -> f64 {
    ((word >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

#[inline]
fn box_muller(w0: u64, w1: u64) -> (f64, f64) {
    let u1 = to_unit(w0);
    let u2 = to_unit(w1);
    let radius = (-2.0 * u1.ln()).sqrt();
    let (sin, cos) = (TAU * u2).sin_cos();
    (radius * cos, radius * sin)
}
