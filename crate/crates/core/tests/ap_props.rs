//! Average precision against a brute-force oracle, plus invariances.

use appeval::clsmetrics::average_precision;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// For each positive, precision among all items scoring at least as high,
/// averaged over positives. Quadratic, written straight from the definition.
fn brute_force_ap(items: &[(f64, bool)]) -> f64 {
    let mut sorted = items.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let n_pos = sorted.iter().filter(|x| x.1).count();
    let mut sum = 0.0;
    for &(s, is_pos) in &sorted {
        if !is_pos {
            continue;
        }
        let admitted: Vec<&(f64, bool)> = sorted.iter().filter(|x| x.0 >= s).collect();
        let tp = admitted.iter().filter(|x| x.1).count();
        sum += tp as f64 / admitted.len() as f64;
    }
    sum / n_pos as f64
}

#[test]
fn matches_brute_force_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    for trial in 0..1000 {
        let n = rng.random_range(1..200);
        // coarse scores on half the trials so ties are common
        let coarse = trial % 2 == 0;
        let mut items: Vec<(f64, bool)> = (0..n)
            .map(|_| {
                let s: f64 = rng.random();
                (if coarse { (s * 10.0).floor() / 10.0 } else { s }, rng.random_bool(0.3))
            })
            .collect();
        if !items.iter().any(|x| x.1) {
            items[0].1 = true;
        }
        let ap = average_precision(&items).unwrap();
        assert_eq!(ap, brute_force_ap(&items), "trial {trial}");
    }
}

fn arb_items() -> impl Strategy<Value = Vec<(f64, bool)>> {
    prop::collection::vec(((0u32..50).prop_map(|s| s as f64 / 50.0), any::<bool>()), 1..80)
        .prop_filter("needs a positive", |v| v.iter().any(|x| x.1))
}

proptest! {
    #[test]
    fn invariant_under_monotone_transform(items in arb_items()) {
        let t: Vec<(f64, bool)> = items.iter().map(|&(s, y)| ((3.0 * s).exp() + 7.0, y)).collect();
        prop_assert_eq!(average_precision(&items).unwrap(), average_precision(&t).unwrap());
    }

    #[test]
    fn invariant_under_permutation(items in arb_items(), seed in any::<u64>()) {
        let mut shuffled = items.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        prop_assert_eq!(average_precision(&items).unwrap(), average_precision(&shuffled).unwrap());
    }

    #[test]
    fn invariant_under_duplication(items in arb_items(), k in 2usize..5) {
        let dup: Vec<(f64, bool)> = items.iter().flat_map(|x| std::iter::repeat_n(*x, k)).collect();
        let a = average_precision(&items).unwrap();
        let b = average_precision(&dup).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn lies_in_unit_interval(items in arb_items()) {
        let ap = average_precision(&items).unwrap();
        prop_assert!(ap > 0.0 && ap <= 1.0);
    }
}
