//! Project-wide seeded random number generator.
//!
//! [`Rng`] wraps ChaCha20 (a counter-based stream cipher generator) seeded
//! through `rand_chacha`'s portable `seed_from_u64` expansion. Identical seeds
//! give identical streams on every platform. Independent sub-streams for
//! trials and sweep points are derived with [`Rng::derive`], which mixes the
//! parent seed with a path of integers through SplitMix64.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::{Matrix, Real};

#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha20Rng,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Independent generator for the sub-stream identified by `path`.
    pub fn derive(seed: u64, path: &[u64]) -> Self {
        let s = path
            .iter()
            .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)));
        Self::new(s)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits, uniform on [0, 1)
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        rand::Rng::random_range(&mut self.inner, 0..n)
    }

    /// Matrix of independent standard normal draws, filled row by row.
    pub fn normal_matrix<T: Real>(&mut self, rows: usize, cols: usize) -> Matrix<T> {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = T::lit(self.normal());
            }
        }
        m
    }

    /// `amount` distinct indices drawn uniformly from `0..length`, in draw order.
    pub fn sample_indices(&mut self, length: usize, amount: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.inner, length, amount).into_vec()
    }

    /// Uniformly random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(v.as_mut_slice(), &mut self.inner);
        v
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_seeds_give_equal_streams() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..1_000_000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn stream_is_pinned() {
        // Frozen outputs; a change here silently changes every experiment.
        let mut r = Rng::new(0);
        assert_eq!(r.next_u64(), 449479075714955186);
        assert_eq!(r.next_u64(), 18115028555707261608);
        assert_eq!(Rng::derive(7, &[0, 35]).next_u64(), 7331507371239387328);
        let mut r = Rng::new(1);
        assert_eq!(r.normal(), 0.3230998759408632);
        assert_eq!(r.permutation(6), [0, 2, 4, 1, 3, 5]);
    }

    #[test]
    fn derived_streams_differ() {
        let mut a = Rng::derive(7, &[0, 35]);
        let mut b = Rng::derive(7, &[1, 35]);
        let mut c = Rng::derive(7, &[0, 35]);
        let x = a.next_u64();
        assert_ne!(x, b.next_u64());
        assert_eq!(x, c.next_u64());
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = Rng::new(3);
        let mean = (0..10_000)
            .map(|_| r.uniform())
            .inspect(|u| assert!((0.0..1.0).contains(u)))
            .sum::<f64>()
            / 1e4;
        assert!((mean - 0.5).abs() < 0.02);
    }
}
