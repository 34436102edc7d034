//! Seeded randomness.
//!
//! Every random draw in the crate comes from [`seeded`], a ChaCha8 stream
//! generator keyed by a 64-bit seed, so results are reproducible across
//! platforms. Permutations use an explicit Fisher–Yates shuffle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// In-place Fisher–Yates shuffle: for `i` from the back, swap `v[i]` with a
/// uniformly chosen `v[j]`, `j <= i`.
pub fn fisher_yates<T, R: Rng + ?Sized>(v: &mut [T], rng: &mut R) {
    for i in (1..v.len()).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
}

/// A uniformly random permutation of `0..n`.
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    fisher_yates(&mut v, rng);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_permutation() {
        let a = random_permutation(20, &mut seeded(7));
        let b = random_permutation(20, &mut seeded(7));
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
        assert_ne!(a, random_permutation(20, &mut seeded(8)));
    }

    #[test]
    fn shuffle_is_roughly_uniform() {
        let mut rng = seeded(1);
        let mut first = [0usize; 3];
        for _ in 0..30_000 {
            first[random_permutation(3, &mut rng)[0]] += 1;
        }
        for c in first {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.02, "{first:?}");
        }
    }
}
