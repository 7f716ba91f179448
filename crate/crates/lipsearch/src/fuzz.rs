//! Seeded random landscape generation for fuzz suites.
//!
//! Every generator takes a [`ChaCha8Rng`] positioned by [`case_rng`], so a
//! (seed, case index) pair fully determines the output no matter how cases
//! are batched or parallelized.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::index::QualityIndex;
use crate::piecewise::Pl;
use crate::rational::{self, ratio, Rat};

/// The generator for one fuzz case: `seed` selects the suite, `case` the
/// independent stream within it.
pub fn case_rng(seed: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case);
    rng
}

/// A random valid landscape with Lipschitz constant 1: a bounded-slope walk
/// on a rational grid, lifted by a random tent so the quality standard is
/// attained somewhere.
pub fn random_index(rng: &mut ChaCha8Rng) -> QualityIndex {
    let den: i64 = *[24, 60, 120, 240].choose(rng).unwrap();
    let interior = rng.gen_range(0..=6usize);
    let mut cuts = BTreeSet::new();
    while cuts.len() < interior {
        cuts.insert(rng.gen_range(1..den));
    }
    let mut xs = vec![0i64];
    xs.extend(cuts.iter().copied());
    xs.push(den);

    let mut level = rng.gen_range(0..=den);
    let mut pts = vec![(ratio(0, 1), ratio(level, den))];
    for pair in xs.windows(2) {
        let span = pair[1] - pair[0];
        level = rng.gen_range((level - span).max(0)..=(level + span).min(den));
        pts.push((ratio(pair[1], den), ratio(level, den)));
    }
    let walk = Pl::new(pts);

    let peak = ratio(rng.gen_range(0..=den), den);
    let tent = Pl::cone(&peak, &rational::from_int(1), &rational::from_int(-1));
    let lifted = walk.max_with(&tent);
    QualityIndex::new(rational::from_int(1), lifted.into_points())
        .expect("the lifted walk keeps slopes within the Lipschitz bound and attains 1")
}

/// A random search cost in (0, 1/2], on a grid fine enough to exercise
/// budgets from one search up to a dozen.
pub fn random_cost(rng: &mut ChaCha8Rng) -> Rat {
    ratio(rng.gen_range(1..=120), 240)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_case_reproduce_the_same_landscape() {
        let a = random_index(&mut case_rng(42, 7));
        let b = random_index(&mut case_rng(42, 7));
        assert_eq!(a.to_json().to_string(), b.to_json().to_string());
    }

    #[test]
    fn different_cases_are_independent_streams() {
        let a = random_index(&mut case_rng(42, 0));
        let b = random_index(&mut case_rng(42, 1));
        assert_ne!(a.to_json().to_string(), b.to_json().to_string());
    }

    #[test]
    fn generated_landscapes_stay_within_bounds() {
        for case in 0..50 {
            let mut rng = case_rng(7, case);
            let q = random_index(&mut rng);
            for i in 0..=20 {
                let v = q.evaluate(&ratio(i, 20));
                assert!(v >= ratio(0, 1) && v <= ratio(1, 1));
            }
            assert_eq!(q.max_value(), ratio(1, 1));
            let c = random_cost(&mut rng);
            assert!(c > ratio(0, 1) && c <= ratio(1, 2));
        }
    }
}
