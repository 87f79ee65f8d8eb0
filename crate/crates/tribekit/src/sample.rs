//! Deterministic subsampling of enumerations.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// At most `n` items of `all`: evenly spaced through the enumeration, or the
/// first `n` after a shuffle fixed by `seed`.
pub fn sample<T: Clone>(all: &[T], n: usize, seed: Option<u64>) -> Vec<T> {
    match seed {
        Some(s) => {
            let mut v = all.to_vec();
            v.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
            v.truncate(n);
            v
        }
        None if all.len() <= n => all.to_vec(),
        None => (0..n).map(|i| all[i * all.len() / n].clone()).collect(),
    }
}

/// `TRIBEKIT_SEED`, if set to an integer.
pub fn seed_from_env() -> Option<u64> {
    std::env::var("TRIBEKIT_SEED").ok()?.trim().parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_shuffling_are_deterministic() {
        let all: Vec<u32> = (0..10).collect();
        assert_eq!(sample(&all, 5, None), vec![0, 2, 4, 6, 8]);
        assert_eq!(sample(&all, 20, None), all);
        let a = sample(&all, 4, Some(3));
        assert_eq!(a, sample(&all, 4, Some(3)));
        assert_eq!(a.len(), 4);
    }
}
