//! Seeded pseudo-random number generation.
//!
//! Everything random in this crate draws from a splitmix64 generator so
//! that a run is reproducible bit-for-bit from its seed, independent of
//! platform and of any external crate's stream stability guarantees.

/// splitmix64 (Steele, Lea, Flood 2014). Constants are the reference ones.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n). Modulo bias is negligible at the sizes
    /// used here (n far below 2^32).
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.next_index(i + 1);
            slice.swap(i, j);
        }
    }

    /// Standard normal via Box–Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = (1.0 - self.next_f64()).max(f64::MIN_POSITIVE);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Derive an independent generator for a named purpose.
///
/// Streams with distinct tags never overlap in practice; this is what keeps
/// e.g. the CNN weight initialization identical whether or not an MLP head
/// is also being initialized from the same run seed.
pub fn stream(seed: u64, tag: u64) -> SplitMix64 {
    let mut mixer = SplitMix64::new(seed ^ tag.wrapping_mul(GOLDEN_GAMMA));
    let state = mixer.next_u64();
    SplitMix64::new(state)
}

/// Stream tags used across the crate. Kept in one place so no two callers
/// accidentally share a stream.
pub mod tags {
    pub const CNN_INIT: u64 = 1;
    pub const MLP_INIT: u64 = 2;
    pub const EPOCH_SHUFFLE: u64 = 3;
    pub const SPLIT: u64 = 4;
    pub const ADASYN: u64 = 5;
    pub const SYNTH_GEN: u64 = 6;
    pub const MLP_SHUFFLE: u64 = 7;
}
