//! Deterministic random streams.
//!
//! A stream is identified by `(seed, stream_id)` and backed by ChaCha8, whose
//! 64-bit stream parameter gives independent keystreams for the same key.
//! Splitting derives a child id from the parent id alone, never from the
//! parent's position, so per-robot streams do not depend on draw order.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A reproducible random-number stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            inner,
        }
    }

    /// The root stream for a run.
    pub fn root(seed: u64) -> Self {
        RngStream::new(seed, 0)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh child stream. Depends only on `(seed, stream_id, child_id)`.
    pub fn split(&self, child_id: u64) -> RngStream {
        let id = splitmix64(self.stream_id ^ splitmix64(child_id.wrapping_add(0xA076_1D64_78BD_642F)));
        RngStream::new(self.seed, id)
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on `(0, 1]`, safe to pass to `ln`.
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Free-function form of [`RngStream::split`].
pub fn split_stream(parent: &RngStream, child_id: u64) -> RngStream {
    parent.split(child_id)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(mut s: RngStream, n: usize) -> Vec<u64> {
        (0..n).map(|_| s.next_u64()).collect()
    }

    fn differing_fraction(a: &[u64], b: &[u64]) -> f64 {
        a.iter().zip(b).filter(|(x, y)| x != y).count() as f64 / a.len() as f64
    }

    #[test]
    fn split_is_reproducible() {
        let s = RngStream::root(42);
        assert_eq!(draws(s.split(1), 100), draws(split_stream(&s, 1), 100));
    }

    #[test]
    fn split_does_not_depend_on_parent_position() {
        let s = RngStream::root(42);
        let mut advanced = s.clone();
        for _ in 0..17 {
            advanced.next_u64();
        }
        assert_eq!(draws(s.split(3), 50), draws(advanced.split(3), 50));
    }

    #[test]
    fn sibling_streams_differ() {
        let s = RngStream::root(7);
        let a = draws(s.split(1), 10_000);
        let b = draws(s.split(2), 10_000);
        assert!(differing_fraction(&a, &b) >= 0.99);
    }

    #[test]
    fn nested_streams_differ() {
        let s = RngStream::root(7);
        let a = draws(s.split(1).split(1), 10_000);
        let b = draws(s.split(2).split(1), 10_000);
        assert!(differing_fraction(&a, &b) >= 0.99);
    }

    #[test]
    fn seeds_differ() {
        let a = draws(RngStream::root(1), 1000);
        let b = draws(RngStream::root(2), 1000);
        assert!(differing_fraction(&a, &b) >= 0.99);
    }

    #[test]
    fn uniform_ranges() {
        let mut s = RngStream::root(3);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
            let v = s.uniform_open0();
            assert!(v > 0.0 && v <= 1.0);
        }
    }
}
