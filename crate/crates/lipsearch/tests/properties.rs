//! Cross-module invariants exercised on randomized histories, windows, and
//! adversarial runs.

use proptest::prelude::*;

use lipsearch::adversary::run_adversarial;
use lipsearch::fuzz::{case_rng, random_index};
use lipsearch::policy::{act, ball_partition, max_searches, root_guarantee, stop_threshold};
use lipsearch::rational::{from_int, parse_rat, ratio};
use lipsearch::sim::{simulate, LeftToRight, ScriptRule, ScriptedPolicy};
use lipsearch::{History, Observation, PolicyAction, Rat};

use rand::Rng;

fn rat(s: &str) -> Rat {
    parse_rat(s).unwrap()
}

/// A consistent history sampled by reading a random landscape at a few
/// random locations; consistency and feasibility come for free because the
/// landscape itself witnesses them.
fn sample_history(seed: u64, cost: Rat) -> History {
    let mut rng = case_rng(seed, 0);
    let index = random_index(&mut rng);
    let count = rng.gen_range(1..=4usize);
    let mut cuts: Vec<i64> = (0..count).map(|_| rng.gen_range(0..=48i64)).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let obs = cuts
        .into_iter()
        .map(|k| {
            let x = ratio(k, 48);
            let z = index.evaluate(&x);
            Observation::new(x, z)
        })
        .collect();
    History::new(cost, from_int(1), obs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn window_shrinks_under_any_feasible_observation(
        seed in 0..400u64,
        loc in 0..=40i64,
        mix in 0..=4i64,
    ) {
        let h = sample_history(seed, rat("0.3"));
        let before = h.search_window().unwrap();
        let x = ratio(loc, 40);
        let lo = h.lower_envelope(&x).unwrap();
        let hi = h.upper_envelope(&x).unwrap_or(from_int(1)).min(from_int(1));
        prop_assume!(lo <= hi);
        let z = &lo + (&hi - &lo) * ratio(mix, 4);
        let next = h.with_observation(x, z).unwrap();
        let after = next.search_window().unwrap();
        prop_assert!(after.subset_of(&before));
        prop_assert!(after.measure() <= before.measure());
    }

    #[test]
    fn canonical_index_lies_between_the_envelopes(
        seed in 0..400u64,
        loc in 0..=24i64,
    ) {
        let h = sample_history(seed, rat("0.3"));
        let q = h.canonical_index().unwrap();
        let x = ratio(loc, 24);
        let value = q.evaluate(&x);
        prop_assert!(h.lower_envelope(&x).unwrap() <= value);
        if let Some(upper) = h.upper_envelope(&x) {
            prop_assert!(value <= upper);
        }
    }

    #[test]
    fn phi_strictly_decreases_in_the_window_length(
        num_c in 1..=120i64,
        la in 1..=48i64,
        lb in 1..=48i64,
    ) {
        let c = ratio(num_c, 240);
        let (la, lb) = (la.min(lb), la.max(lb));
        prop_assume!(la < lb);
        let (la, lb) = (ratio(la, 48), ratio(lb, 48));
        prop_assume!(max_searches(&c, &la).unwrap() >= 1);
        prop_assume!(max_searches(&c, &lb).unwrap() >= 1);
        let (pa, pb) = (stop_threshold(&c, &la).unwrap(), stop_threshold(&c, &lb).unwrap());
        prop_assert!(pa > pb, "phi({la}) = {pa} !> phi({lb}) = {pb} at c = {c}");
    }

    #[test]
    fn phi_is_continuous_across_count_breakpoints(num_c in 1..=40i64, n in 1..=4i64) {
        // At l = n(n+1)c the count steps from n to n+1 and both Eq. 2
        // branches evaluate to 1 - nc.
        let c = ratio(num_c, 240);
        let l = from_int(n * (n + 1)) * &c;
        prop_assume!(l <= from_int(1));
        prop_assert_eq!(max_searches(&c, &l).unwrap(), (n + 1) as u32);
        prop_assert_eq!(stop_threshold(&c, &l).unwrap(), from_int(1) - from_int(n) * &c);
    }

    #[test]
    fn ball_partition_tiles_the_ordered_window(num_c in 1..=60i64, num_l in 1..=48i64) {
        let c = ratio(num_c, 240);
        let l = ratio(num_l, 48);
        prop_assume!(max_searches(&c, &l).unwrap() >= 1);
        let n = max_searches(&c, &l).unwrap() as usize;
        let p = ball_partition(&c, &l).unwrap();

        prop_assert!(p.base_diameter >= from_int(0));
        prop_assert!(p.base_diameter < from_int(2) * &c);
        prop_assert_eq!(p.diameters.len(), n);
        let mut expected: Vec<Rat> = (0..n)
            .map(|i| &p.base_diameter + from_int(2 * i as i64) * &c)
            .collect();
        expected.reverse();
        prop_assert_eq!(&p.diameters, &expected);
        let total: Rat = p.diameters.iter().fold(from_int(0), |acc, d| acc + d);
        prop_assert_eq!(total, l.clone());

        // Largest-first tiling of [1-l, 1]: each center sits half a diameter
        // past the previous ball's right edge.
        let mut edge = from_int(1) - &l;
        for (center, diameter) in p.centers.iter().zip(&p.diameters) {
            prop_assert_eq!(center.clone(), &edge + diameter / from_int(2));
            edge += diameter;
        }
        prop_assert_eq!(edge, from_int(1));

        // The Eq. 2 bar and the first search location restated as ball
        // geometry.
        let largest = &p.diameters[0];
        prop_assert_eq!(
            stop_threshold(&c, &l).unwrap(),
            from_int(1) - largest / from_int(2)
        );
        prop_assert_eq!(
            &p.centers[0],
            &(from_int(2) - &l - stop_threshold(&c, &l).unwrap())
        );
    }

    #[test]
    fn act_searches_half_the_largest_ball_past_the_left_edge(num_l in 1..=31i64) {
        // A cheap search keeps the bar above the observation that carved the
        // window, so the policy keeps going and its location is pinned by
        // the ball geometry.
        let c = ratio(1, 100);
        let l = ratio(num_l, 32);
        // One observation whose exclusion ball covers [0, 1-l): it sits a
        // quarter of the gap in, so the ball strictly overshoots the left
        // edge and leaves no isolated boundary point.
        let x1 = (from_int(1) - &l) / from_int(4);
        let h = History::new(
            rat("0.01"),
            from_int(1),
            vec![Observation::new(x1.clone(), from_int(1) - (from_int(1) - &l) + &x1)],
        )
        .unwrap();
        let window = h.search_window().unwrap();
        prop_assert_eq!(window.intervals(), &[(from_int(1) - &l, from_int(1))]);
        prop_assume!(h.best_quality() < stop_threshold(&c, &l).unwrap() - &c);
        let p = ball_partition(&c, &l).unwrap();
        let expected = from_int(1) - &l + &p.diameters[0] / from_int(2);
        prop_assert_eq!(act(&h).unwrap(), PolicyAction::Search(expected));
    }

    #[test]
    fn simulated_payoffs_respect_the_root_guarantee(seed in 0..300u64, pick in 0..3usize) {
        let c = [rat("0.1"), rat("0.3"), rat("0.45")][pick].clone();
        let mut rng = case_rng(seed, 7);
        let index = random_index(&mut rng);
        let trace = simulate(&LeftToRight, &index, &c, 64).unwrap();
        prop_assert!(trace.terminal.payoff >= root_guarantee(&c).unwrap());
    }

    #[test]
    fn mid_cost_runs_search_once_or_twice(seed in 0..300u64, pick in 0..4usize) {
        // Claim 1 range: c strictly between 1/4 and 1/2.
        let c = [ratio(11, 40), ratio(3, 10), ratio(3, 8), ratio(19, 40)][pick].clone();
        let mut rng = case_rng(seed, 11);
        let index = random_index(&mut rng);
        let trace = simulate(&LeftToRight, &index, &c, 64).unwrap();
        prop_assert!(trace.terminal.searches_paid >= 1);
        prop_assert!(trace.terminal.searches_paid <= 2);
    }
}

#[test]
fn consistency_exactly_when_pairwise_lipschitz_and_nonempty_window() {
    for seed in 0..40u64 {
        let h = sample_history(seed, rat("0.3"));
        assert!(h.canonical_index().is_ok());
    }

    // Pairwise violation: a quality jump steeper than the locations allow.
    let steep = History::new(
        rat("0.3"),
        from_int(1),
        vec![
            Observation::new(rat("0.2"), rat("0.9")),
            Observation::new(rat("0.3"), rat("0.2")),
        ],
    )
    .unwrap();
    assert!(steep.pairwise_consistent().is_err());
    assert!(steep.canonical_index().is_err());

    // Nonempty-window violation: two lukewarm observations whose exclusion
    // balls jointly cover [0,1].
    let hopeless = History::new(
        rat("0.3"),
        from_int(1),
        vec![
            Observation::new(rat("0.25"), rat("0.4")),
            Observation::new(rat("0.75"), rat("0.4")),
        ],
    )
    .unwrap();
    assert!(hopeless.pairwise_consistent().is_ok());
    assert!(hopeless.window().is_empty());
    assert!(hopeless.canonical_index().is_err());
}

#[test]
fn boundary_observation_leaves_an_isolated_point() {
    let h = History::new(
        rat("0.3"),
        from_int(1),
        vec![Observation::new(rat("0.4"), rat("0.6"))],
    )
    .unwrap();
    let w = h.search_window().unwrap();
    assert_eq!(
        w.intervals(),
        &[(from_int(0), from_int(0)), (rat("0.8"), from_int(1))]
    );
    assert_eq!(w.measure(), rat("0.2"));
}

#[test]
fn adversary_caps_every_policy_and_is_tight_for_the_builtin() {
    // Costs spanning search budgets N(c,1) = 2..=5.
    let costs = [ratio(3, 10), ratio(1, 10), ratio(1, 15), ratio(1, 25)];
    for (i, c) in costs.iter().enumerate() {
        let cap = root_guarantee(c).unwrap();
        let n = max_searches(c, &from_int(1)).unwrap() as usize;
        assert_eq!(n, i + 2);

        let outcome = run_adversarial(&LeftToRight, c, 64).unwrap();
        assert_eq!(outcome.trace.terminal.payoff, cap);
        assert!(outcome.trace.terminal.searches_paid <= n);
        assert!(outcome.trace.terminal.searches_paid >= 1);
        for step in &outcome.trace.steps {
            assert_eq!(outcome.witness.evaluate(&step.x), step.z);
        }
        assert_eq!(outcome.witness.max_value(), from_int(1));

        // Replaying the witness through the simulator reproduces the run.
        let replay = simulate(&LeftToRight, &outcome.witness, c, 64).unwrap();
        assert_eq!(replay, outcome.trace);

        // Baselines: greedy bisection with a budget, and a right-edge probe.
        let greedy = ScriptedPolicy::new(vec![
            ScriptRule::SearchAtFraction { min_measure: from_int(0), fraction: ratio(1, 2) };
            6
        ])
        .unwrap();
        let edge = ScriptedPolicy::new(vec![
            ScriptRule::StopIfBestGeq(rat("0.9")),
            ScriptRule::SearchAtFraction { min_measure: from_int(0), fraction: from_int(1) },
            ScriptRule::SearchAtFraction { min_measure: from_int(0), fraction: ratio(1, 4) },
        ])
        .unwrap();
        for policy in [&greedy, &edge] {
            let run = run_adversarial(policy, c, 64).unwrap();
            assert!(run.trace.terminal.payoff <= cap);
        }

        // Randomized scripts: random stop bars, guards, and probe fractions.
        for case in 0..25u64 {
            let mut rng = case_rng(904, case * costs.len() as u64 + i as u64);
            let mut rules = Vec::new();
            for _ in 0..rng.gen_range(1..=5usize) {
                if rng.gen_bool(0.3) {
                    rules.push(ScriptRule::StopIfBestGeq(ratio(rng.gen_range(0..=20), 20)));
                } else {
                    rules.push(ScriptRule::SearchAtFraction {
                        min_measure: ratio(rng.gen_range(0..=8), 8),
                        fraction: ratio(rng.gen_range(0..=12), 12),
                    });
                }
            }
            let policy = ScriptedPolicy::new(rules).unwrap();
            let run = run_adversarial(&policy, c, 64).unwrap();
            assert!(
                run.trace.terminal.payoff <= cap,
                "script beat the adversary at c = {c}, case {case}"
            );
        }
    }
}

#[test]
fn two_period_boundaries_are_mirror_symmetric() {
    let c = rat("0.3");
    for k in 0..=60i64 {
        let x = ratio(k, 60);
        let mirrored = from_int(1) - &x;
        assert_eq!(
            lipsearch::two_period::m_curve(&x, &c).unwrap(),
            lipsearch::two_period::m_curve(&mirrored, &c).unwrap()
        );
        assert_eq!(
            lipsearch::two_period::bifurcation_bound(&x),
            lipsearch::two_period::bifurcation_bound(&mirrored)
        );
    }
}
