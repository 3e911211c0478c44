use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Train, development and test portions of a data set.
#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub dev: Vec<T>,
    pub test: Vec<T>,
}

/// Seeded shuffle by item, then cut. The train and dev sizes are the floors
/// of `n · fraction`; test takes the rest. Items keep their shuffled order.
pub fn split_dataset<T: Clone>(items: &[T], train: f64, dev: f64, seed: u64) -> Result<Split<T>> {
    if !(train > 0.0 && dev >= 0.0 && train + dev <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fractions must satisfy 0 < train, 0 <= dev, train + dev <= 1; got {train}, {dev}"
        )));
    }
    let n = items.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (n as f64 * train).floor() as usize;
    let n_dev = ((n as f64 * dev).floor() as usize).min(n - n_train);
    let pick = |ix: &[usize]| ix.iter().map(|&i| items[i].clone()).collect::<Vec<_>>();
    Ok(Split {
        train: pick(&order[..n_train]),
        dev: pick(&order[n_train..n_train + n_dev]),
        test: pick(&order[n_train + n_dev..]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighty_ten_ten() {
        let items: Vec<u32> = (0..5000).collect();
        let s = split_dataset(&items, 0.8, 0.1, 42).unwrap();
        assert_eq!((s.train.len(), s.dev.len(), s.test.len()), (4000, 500, 500));
        let mut all: Vec<u32> = s
            .train
            .iter()
            .chain(&s.dev)
            .chain(&s.test)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, items);
        assert_eq!(s, split_dataset(&items, 0.8, 0.1, 42).unwrap());
        assert_ne!(s.train, split_dataset(&items, 0.8, 0.1, 43).unwrap().train);
    }

    #[test]
    fn rejects_bad_fractions() {
        assert!(split_dataset(&[1, 2], 0.9, 0.2, 0).is_err());
        assert!(split_dataset(&[1, 2], 0.0, 0.5, 0).is_err());
    }
}
