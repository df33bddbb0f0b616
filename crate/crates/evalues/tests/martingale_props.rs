//! Structural invariants of the betting machinery: equivalence of the two
//! trajectory recursions, mixture identities, reordering identities, and
//! sequential monotonicity of the catalog.

use evalues::catalog::{
    block_product_trajectory, merge_block_product, merge_mean, merge_product, merge_u_statistic,
};
use evalues::martingale::{
    convex_combine, evaluate_additive, evaluate_martingale, exceed_and_stop, GamblingSystem,
    StakeFunction,
};
use evalues::reorder::{apply_reading_strategy, evaluate_reordered, ReadingStrategy};
use evalues::EVector;
use proptest::prelude::*;

fn hash_prefix(prefix: &[f64], salt: u64) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for &v in prefix {
        h ^= v.to_bits();
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A deterministic prefix-keyed system with dyadic bets (multiples of 1/64),
/// so that both trajectory recursions stay exact in floating point.
fn dyadic_system(salt: u64) -> GamblingSystem {
    GamblingSystem::new(move |prefix: &[f64]| (hash_prefix(prefix, salt) % 65) as f64 / 64.0)
}

/// Arbitrary-real bets for the tolerance-based comparison.
fn real_system(salt: u64) -> GamblingSystem {
    GamblingSystem::new(move |prefix: &[f64]| {
        (hash_prefix(prefix, salt) % 10_000) as f64 / 9_999.0
    })
}

fn dyadic_evector() -> impl Strategy<Value = EVector> {
    prop::collection::vec(0u32..=32, 1..=6)
        .prop_map(|raw| EVector::new(raw.into_iter().map(|i| i as f64 / 8.0).collect()).unwrap())
}

proptest! {
    /// The additive form with t = S_k * s reproduces the multiplicative
    /// trajectory bit for bit on dyadic inputs, where both recursions are
    /// exact.
    #[test]
    fn additive_equals_multiplicative_exactly(e in dyadic_evector(), salt in 0u64..1000) {
        let s = dyadic_system(salt);
        let multiplicative = evaluate_martingale(&s, 1.0, &e).unwrap();
        let additive = evaluate_additive(&s.to_additive(1.0), 1.0, &e).unwrap();
        prop_assert_eq!(multiplicative, additive);
    }

    /// With arbitrary real bets the two recursions agree to rounding.
    #[test]
    fn additive_equals_multiplicative_to_tolerance(e in dyadic_evector(), salt in 0u64..1000) {
        let s = real_system(salt);
        let multiplicative = evaluate_martingale(&s, 0.875, &e).unwrap();
        let additive = evaluate_additive(&s.to_additive(0.875), 0.875, &e).unwrap();
        for (a, b) in multiplicative.capitals().iter().zip(additive.capitals()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    /// Capital can never go negative when bets stay in [0, 1].
    #[test]
    fn trajectories_are_nonnegative(e in dyadic_evector(), salt in 0u64..1000, c in 0u32..=16) {
        let s = real_system(salt);
        let t = evaluate_martingale(&s, c as f64 / 16.0, &e).unwrap();
        prop_assert!(t.capitals().iter().all(|&v| v >= 0.0));
    }

    /// A reading strategy realizes a permutation, and running the bets
    /// along the revealed order equals running them over the reordered
    /// vector.
    #[test]
    fn reordering_identity(e in dyadic_evector(), salt in 0u64..1000) {
        let k = e.len();
        let pi = ReadingStrategy::from_remaining_rule(k, move |prefix, remaining| {
            hash_prefix(prefix, salt) as usize % remaining.len()
        });
        let (reordered, order) = apply_reading_strategy(&pi, &e).unwrap();
        let mut seen = order.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..k).collect::<Vec<_>>());

        let s = dyadic_system(salt.wrapping_add(1));
        let direct = evaluate_reordered(&s, &pi, 1.0, &e).unwrap();
        let via_reorder = evaluate_martingale(&s, 1.0, &reordered).unwrap();
        prop_assert_eq!(direct, via_reorder);
    }

    /// U-statistics are symmetric in their inputs.
    #[test]
    fn u_statistic_is_symmetric(
        raw in prop::collection::vec(0.0f64..4.0, 2..6),
        n in 0usize..4,
        swap in (0usize..6, 0usize..6),
    ) {
        let n = n.min(raw.len());
        let mut permuted = raw.clone();
        permuted.swap(swap.0 % raw.len(), swap.1 % raw.len());
        let a = merge_u_statistic(n, &raw).unwrap();
        let b = merge_u_statistic(n, &permuted).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn u_statistic_boundary_identities() {
    let e = [0.3, 2.0, 1.4, 0.0, 0.9];
    assert_eq!(merge_u_statistic(0, &e).unwrap(), 1.0);
    assert!((merge_u_statistic(1, &e).unwrap() - merge_mean(&e)).abs() < 1e-15);
    assert!((merge_u_statistic(5, &e).unwrap() - merge_product(&e)).abs() < 1e-15);
}

#[test]
fn mixture_trajectory_is_weighted_sum() {
    let components = vec![
        (0.25, GamblingSystem::product(), 1.0),
        (0.5, GamblingSystem::constant(0.5), 0.75),
        (0.25, GamblingSystem::never(), 1.0),
    ];
    let mix = convex_combine(components.clone()).unwrap();
    let e = EVector::new(vec![2.0, 0.5, 1.5]).unwrap();
    let mixed = mix.evaluate(&e).unwrap();
    for k in 0..=e.len() {
        let expected: f64 = components
            .iter()
            .map(|(w, s, c)| w * evaluate_martingale(s, *c, &e).unwrap().capitals()[k])
            .sum();
        assert_eq!(mixed.capitals()[k], expected);
    }
}

#[test]
fn mixture_has_an_additive_representation() {
    // A convex combination of test martingales is again a test martingale:
    // running the summed stakes from the summed capital reproduces the
    // weighted trajectory.
    let mix = convex_combine(vec![
        (0.3, GamblingSystem::product(), 1.0),
        (0.7, GamblingSystem::constant(0.25), 0.5),
    ])
    .unwrap();
    let e = EVector::new(vec![1.5, 0.0, 2.5, 1.0]).unwrap();
    let direct = mix.evaluate(&e).unwrap();
    let additive = evaluate_additive(&mix.stake(), mix.initial_capital(), &e).unwrap();
    for (a, b) in direct.capitals().iter().zip(additive.capitals()) {
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn uniform_subset_product_mixture_is_the_u_statistic() {
    // U_n is the uniform convex combination of all n-subset products.
    let k = 5usize;
    let n = 2usize;
    let mut components = Vec::new();
    let mut subsets = Vec::new();
    for mask in 0u32..(1 << k) {
        if mask.count_ones() as usize == n {
            let steps: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
            subsets.push(steps);
        }
    }
    let weight = 1.0 / subsets.len() as f64;
    for steps in &subsets {
        components.push((weight, GamblingSystem::subset_product(steps), 1.0));
    }
    let mix = convex_combine(components).unwrap();
    for trial in 0..25 {
        let values: Vec<f64> = (0..k)
            .map(|i| (hash_prefix(&[trial as f64], i as u64) % 33) as f64 / 8.0)
            .collect();
        let e = EVector::new(values.clone()).unwrap();
        let mixed = mix.merge(&e).unwrap();
        let direct = merge_u_statistic(n, &values).unwrap();
        assert!(
            (mixed - direct).abs() <= 1e-12 * direct.abs().max(1.0),
            "mixture {mixed} vs U_n {direct}"
        );
    }
}

#[test]
fn block_product_trajectory_ends_at_the_merge() {
    let e = [0.5, 2.5, 1.0, 0.0, 3.0, 1.5];
    for breaks in [vec![], vec![2], vec![1, 4], vec![1, 2, 3, 4, 5]] {
        let trajectory = block_product_trajectory(&breaks, &e).unwrap();
        let merged = merge_block_product(&breaks, &e).unwrap();
        assert_eq!(trajectory.capitals()[0], 1.0);
        assert!((trajectory.final_value() - merged).abs() <= 1e-12 * merged.max(1.0));
    }
}

#[test]
fn block_product_trajectory_is_a_martingale_path() {
    // The closed form must satisfy the additive recursion with the stake
    // t = (product of completed block means) / current block length.
    let e = [0.5, 2.5, 1.0, 0.0, 3.0, 1.5];
    let breaks = vec![2, 4];
    let trajectory = block_product_trajectory(&breaks, &e).unwrap();
    let boundaries = [0usize, 2, 4, 6];
    for k in 0..e.len() {
        let block = boundaries.iter().rposition(|&b| b <= k).unwrap();
        let (start, end) = (boundaries[block], boundaries[block + 1]);
        let mut completed = 1.0;
        for b in 0..block {
            let slice = &e[boundaries[b]..boundaries[b + 1]];
            completed *= slice.iter().sum::<f64>() / slice.len() as f64;
        }
        let stake = completed / (end - start) as f64;
        let expected = trajectory.capitals()[k] + stake * (e[k] - 1.0);
        assert!((trajectory.capitals()[k + 1] - expected).abs() <= 1e-12);
    }
}

#[test]
fn catalog_is_sequentially_monotone() {
    // For a fixed prefix and all-ones tail, each catalog merging function
    // is nondecreasing in the varied coordinate.
    let prefix = [0.7, 1.3];
    let tail_len = 2;
    let functions: Vec<(&str, Box<dyn Fn(&[f64]) -> f64>)> = vec![
        ("product", Box::new(|e: &[f64]| merge_product(e))),
        ("mean", Box::new(|e: &[f64]| merge_mean(e))),
        ("u2", Box::new(|e: &[f64]| merge_u_statistic(2, e).unwrap())),
        (
            "block",
            Box::new(|e: &[f64]| merge_block_product(&[2], e).unwrap()),
        ),
        (
            "exceed_and_stop",
            Box::new(|e: &[f64]| {
                let system = exceed_and_stop(&GamblingSystem::product(), 0.4).unwrap();
                evaluate_martingale(&system, 1.0, &EVector::from_slice(e).unwrap())
                    .unwrap()
                    .final_value()
            }),
        ),
    ];
    for (name, f) in &functions {
        let mut previous = f64::NEG_INFINITY;
        for i in 0..=32 {
            let x = i as f64 * 0.25;
            let mut e = prefix.to_vec();
            e.push(x);
            e.extend(std::iter::repeat(1.0).take(tail_len));
            let value = f(&e);
            assert!(
                value >= previous - 1e-12,
                "{name} decreased at x = {x}: {value} < {previous}"
            );
            previous = value;
        }
    }
}

#[test]
fn stake_feasibility_is_checked_at_evaluation() {
    // A stake that is fine on one input can be infeasible on another.
    let t = StakeFunction::constant(0.8);
    let ok = evaluate_additive(&t, 1.0, &EVector::new(vec![0.5, 0.5]).unwrap());
    assert!(ok.is_ok());
    let bad = evaluate_additive(&t, 1.0, &EVector::new(vec![0.0, 0.0]).unwrap());
    assert!(bad.is_err());
}
