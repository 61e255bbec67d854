//! Seeded low-discrepancy sampling of coordinate boxes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Van der Corput radical inverse of `k` in base `b`.
fn radical_inverse(mut k: u64, b: u64) -> f64 {
    let (mut inv, mut scale) = (0.0, 1.0 / b as f64);
    while k > 0 {
        inv += (k % b) as f64 * scale;
        k /= b;
        scale /= b as f64;
    }
    inv
}

/// `count` Halton points in the box, shifted by a seeded random rotation
/// (Cranley–Patterson) so different seeds give different but equally
/// well spread samples.
pub fn halton_box(ranges: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(
        ranges.len() <= PRIMES.len(),
        "at most {} dimensions",
        PRIMES.len()
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = ranges.iter().map(|_| rng.random::<f64>()).collect();
    (1..=count as u64)
        .map(|k| {
            ranges
                .iter()
                .zip(PRIMES)
                .zip(&shift)
                .map(|((&(lo, hi), p), s)| {
                    let u = (radical_inverse(k, p) + s).fract();
                    lo + (hi - lo) * u
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_two_sequence() {
        let v: Vec<f64> = (1..5).map(|k| radical_inverse(k, 2)).collect();
        assert_eq!(v, [0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn points_stay_in_box_and_depend_on_seed() {
        let ranges = [(0.3, 2.8), (0.0, 6.0), (-1.0, 1.0)];
        let a = halton_box(&ranges, 200, 1);
        assert!(a
            .iter()
            .all(|p| p.iter().zip(&ranges).all(|(x, r)| *x >= r.0 && *x < r.1)));
        assert_eq!(a, halton_box(&ranges, 200, 1));
        assert_ne!(a, halton_box(&ranges, 200, 2));
    }
}
