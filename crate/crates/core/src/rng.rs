//! Counter-based deterministic randomness.
//!
//! Every random draw in the crate is `mix(key, counter)` for a 64-bit key
//! and an incrementing counter, with SplitMix64's finalizer as the mixing
//! function. Keys are derived from a corpus seed and stable string ids, so
//! results depend only on the inputs and never on evaluation order, thread
//! count or platform.

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// 64-bit FNV-1a over the bytes of `s`.
pub fn fnv1a64(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Child seed for a string id, e.g. a page id under a corpus seed.
pub fn derive_seed(parent: u64, id: &str) -> u64 {
    mix64(parent ^ mix64(fnv1a64(id)))
}

/// Child seed for a numbered stream under `parent`.
pub fn derive_stream(parent: u64, stream: u64) -> u64 {
    mix64(parent.wrapping_add(GOLDEN.wrapping_mul(stream.wrapping_add(1))))
}

/// Stream of values `mix64(key + GOLDEN * (counter + 1))`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    /// Generator positioned at an arbitrary counter value.
    pub fn at(key: u64, counter: u64) -> Self {
        Self { key, counter }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(GOLDEN.wrapping_mul(self.counter)))
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi]`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Integer in `0..n` by multiply-high; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    /// Pair of independent standard normal deviates (Box-Muller).
    pub fn normal_pair(&mut self) -> (f64, f64) {
        // 1 - u lies in (0, 1], keeping ln finite
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        (r * libm::cos(theta), r * libm::sin(theta))
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
