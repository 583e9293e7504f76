//! Seeded randomness shared by splitting, negative sampling and example
//! selection.
//!
//! Everything random in this crate is driven by SplitMix64 so that a seed
//! reproduces the same split, negatives and example picks in any language
//! that implements the same generator.

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform index in `0..bound` by modulo reduction. `bound` must be > 0.
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        (self.next_u64() % bound as u64) as usize
    }

    /// Fisher–Yates shuffle, walking from the last element down to index 1.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// Picks `count` distinct positions of `0..len` by a partial
    /// Fisher–Yates pass. Returns fewer when `len < count`.
    pub fn choose_indices(&mut self, len: usize, count: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..len).collect();
        let take = count.min(len);
        for i in 0..take {
            let j = i + self.below(len - i);
            pool.swap(i, j);
        }
        pool.truncate(take);
        pool
    }
}

/// 64-bit FNV-1a, used to derive per-sample seeds from identifiers.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

/// Mixes a run seed with a sample key into an independent stream seed.
pub fn derive_seed(seed: u64, key: &str) -> u64 {
    SplitMix64::new(seed ^ fnv1a(key.as_bytes())).next_u64()
}
