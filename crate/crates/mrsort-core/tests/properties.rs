//! Cross-module properties: the assignment rule against a direct rule
//! enumeration, degenerate criterion equivalences, and feasibility of
//! ground-truth parameters inside the learning program.

use mrsort_core::datagen::{generate_instance, GenConfig};
use mrsort_core::mip::{
    build_p_category, build_two_category, embed_model_solution, normalize, DirectionKnowledge,
    MipConfig,
};
use mrsort_core::model::{
    Alternative, ApprovedSet, CriterionSpec, Direction, LearningSet, MrSortModel,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent evaluation of the sorting rule: scan every category and check
/// its two coalition conditions directly, with virtual all-pass/none-pass
/// levels at the ends. Returns the category and asserts uniqueness.
fn assign_by_rule_enumeration(model: &MrSortModel, evals: &[f64]) -> usize {
    let approves = |set: &ApprovedSet, v: f64| match *set {
        ApprovedSet::GainAtLeast { threshold } => v >= threshold,
        ApprovedSet::CostAtMost { threshold } => v <= threshold,
        ApprovedSet::PeakInterval { lo, hi } => lo <= v && v <= hi,
        ApprovedSet::ValleyComplement { lo, hi } => v <= lo || v >= hi,
    };
    let coalition = |level: usize| -> f64 {
        (0..model.n())
            .filter(|&i| approves(&model.approved[i][level - 1], evals[i]))
            .map(|i| model.weights[i])
            .sum()
    };
    let mut found = None;
    for cat in 1..=model.p {
        let reaches_lower = cat == 1 || coalition(cat - 1) >= model.lambda;
        let fails_upper = cat == model.p || coalition(cat) < model.lambda;
        if reaches_lower && fails_upper {
            assert!(found.is_none(), "assignment rule matched two categories");
            found = Some(cat);
        }
    }
    found.expect("assignment rule matched no category")
}

#[test]
fn assign_agrees_with_rule_enumeration() {
    for seed in 0..50u64 {
        let cfg = GenConfig::new(3, 3, 3, 6, 20, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = generate_instance(&cfg, &mut rng).unwrap();
        for alt in inst.learn.alternatives.iter().chain(&inst.test.alternatives) {
            assert_eq!(
                inst.model.assign(alt).unwrap(),
                assign_by_rule_enumeration(&inst.model, &alt.evals),
            );
        }
    }
}

#[test]
fn gain_and_cost_are_degenerate_peaks() {
    // Replacing a gain threshold by an interval reaching the scale top (and
    // a cost threshold by one reaching the scale bottom) never changes any
    // assignment.
    for seed in 0..30u64 {
        let cfg = GenConfig::new(4, 2, 2, 8, 50, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let inst = generate_instance(&cfg, &mut rng).unwrap();
        let mut peaked = inst.model.clone();
        for (i, sets) in peaked.approved.iter_mut().enumerate() {
            let (lo, hi) = (
                peaked.criteria[i].scale_min,
                peaked.criteria[i].scale_max,
            );
            for set in sets.iter_mut() {
                *set = match *set {
                    ApprovedSet::GainAtLeast { threshold } => {
                        ApprovedSet::PeakInterval { lo: threshold, hi }
                    }
                    ApprovedSet::CostAtMost { threshold } => {
                        ApprovedSet::PeakInterval { lo, hi: threshold }
                    }
                    other => other,
                };
            }
        }
        for alt in inst.learn.alternatives.iter().chain(&inst.test.alternatives) {
            assert_eq!(inst.model.assign(alt).unwrap(), peaked.assign(alt).unwrap());
        }
    }
}

#[test]
fn rescaling_weights_and_threshold_preserves_assignments() {
    // The coalition comparison only depends on the ratio of total weight to
    // the threshold.
    for seed in 0..20u64 {
        let cfg = GenConfig::new(3, 1, 2, 8, 40, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let inst = generate_instance(&cfg, &mut rng).unwrap();
        for factor in [0.25, 2.0, 7.5] {
            let scaled = MrSortModel::new_unchecked(
                inst.model.criteria.clone(),
                inst.model.weights.iter().map(|w| w * factor).collect(),
                inst.model.lambda * factor,
                inst.model.p,
                inst.model.approved.clone(),
            );
            for alt in &inst.test.alternatives {
                assert_eq!(inst.model.assign(alt).unwrap(), scaled.assign(alt).unwrap());
            }
        }
    }
}

/// Smallest strict-side margin of a consistent instance: how far below the
/// threshold the failing coalitions sit. The program needs this to exceed
/// its epsilon for the truth to be exactly feasible.
fn min_strict_margin(model: &MrSortModel, ls: &LearningSet) -> f64 {
    let mut margin = f64::INFINITY;
    for (alt, &cat) in ls.alternatives.iter().zip(&ls.categories) {
        if cat < model.p {
            let coalition = model.coalition_weight(cat, &alt.evals);
            margin = margin.min(model.lambda - coalition);
        }
    }
    margin
}

#[test]
fn ground_truth_is_feasible_with_full_objective() {
    // Big-M sufficiency: embedding the generating model into the program
    // satisfies every constraint and restores the whole learning set.
    let cfg_eps = MipConfig::default().epsilon;
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < 25 {
        seed += 1;
        let n = 1 + (seed as usize % 4);
        let q = seed as usize % (n + 1);
        let p = if seed % 4 == 0 { 3 } else { 2 };
        let size = if p == 2 { 30 } else { 30 - (30 % p) };
        let cfg = GenConfig::new(n, q, p, size, 0, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
        let Ok(inst) = generate_instance(&cfg, &mut rng) else {
            continue;
        };
        // Skip knife-edge draws whose threshold margin is below the strict
        // separation the program enforces.
        if min_strict_margin(&inst.model, &inst.learn) < 2.0 * cfg_eps {
            continue;
        }
        let problem = build_p_category(&inst.learn, &inst.knowledge, p, &MipConfig::default())
            .unwrap();
        let values = embed_model_solution(&problem, &inst.model, &inst.learn).unwrap();
        problem.check_feasible(&values, 1e-9).unwrap();
        assert_eq!(problem.objective_value(&values), inst.learn.len() as f64);
        checked += 1;
    }
}

#[test]
fn transforms_round_trip_frontier_positions() {
    let specs = vec![
        CriterionSpec::new(0, "age", 0.0, 105.0, Direction::Cost).unwrap(),
        CriterionSpec::new(1, "glycemia", 0.5, 3.8, Direction::Unknown).unwrap(),
        CriterionSpec::new(2, "flag", 0.0, 1.0, Direction::Cost).unwrap(),
    ];
    let ls = LearningSet::new(
        vec![
            Alternative::new("a", vec![30.0, 1.18, 0.0]),
            Alternative::new("b", vec![72.9, 0.93, 1.0]),
        ],
        vec![1, 2],
    )
    .unwrap();
    let (_, transforms) = normalize(&ls, &specs).unwrap();
    for (t, frontier) in transforms.iter().zip([72.9, 1.18, 1.0]) {
        assert!((t.invert(t.apply(frontier)) - frontier).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn peak_membership_is_an_interval(
        lo in 0.0..0.5f64,
        width in 0.0..0.5f64,
        xs in proptest::collection::vec(0.0..1.0f64, 3),
    ) {
        // Quasi-concave membership: a value between two approved values is
        // approved.
        let set = ApprovedSet::PeakInterval { lo, hi: lo + width };
        let mut xs = xs.clone();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if set.approves(xs[0]) && set.approves(xs[2]) {
            prop_assert!(set.approves(xs[1]));
        }
        // And the valley complement is its mirror image.
        let valley = ApprovedSet::ValleyComplement { lo, hi: lo + width };
        for &x in &xs {
            prop_assert_eq!(set.approves(x) || valley.approves(x), true);
        }
    }

    #[test]
    fn two_category_program_counts_follow_the_inventory(
        n in 1usize..5,
        m in 2usize..12,
    ) {
        let alternatives = (0..m)
            .map(|j| Alternative::new(format!("a{j}"), vec![0.5; n]))
            .collect();
        let categories = (0..m).map(|j| 1 + j % 2).collect();
        let ls = LearningSet::new(alternatives, categories).unwrap();
        let pb = build_two_category(&ls, &DirectionKnowledge::all_unknown(n), &MipConfig::default())
            .unwrap();
        prop_assert_eq!(pb.num_vars(), 5 * n * m + 2 * n + m + 2 * n + 1);
    }
}

#[test]
fn interpretation_covers_all_six_cases() {
    use mrsort_core::mip::{VarSymbol};
    use mrsort_core::solve::{interpret, MipSolution, SolveStatus};

    // One criterion, data spanning [0.3, 0.7].
    let ls = LearningSet::new(
        vec![
            Alternative::new("a", vec![0.3]),
            Alternative::new("b", vec![0.7]),
        ],
        vec![1, 2],
    )
    .unwrap();
    let pb = build_two_category(&ls, &DirectionKnowledge::all_unknown(1), &MipConfig::default())
        .unwrap();

    // Reference reading of an interval against the data range, in exact
    // tenths (data spans tenths 3..7): non-strict comparisons for the peaked
    // reading, strict ones for the valley reading.
    let expect = |peaked: bool, lo_tenths: i32, hi_tenths: i32| -> Direction {
        if peaked {
            if lo_tenths <= 3 {
                Direction::Cost
            } else if hi_tenths >= 7 {
                Direction::Gain
            } else {
                Direction::SinglePeaked
            }
        } else if lo_tenths < 3 {
            Direction::Gain
        } else if hi_tenths > 7 {
            Direction::Cost
        } else {
            Direction::SingleValley
        }
    };

    let mut seen = std::collections::BTreeSet::new();
    for sigma in [0.0, 1.0] {
        for lo_tenths in 0..=10 {
            for hi_tenths in lo_tenths..=10 {
                let (lo, hi) = (lo_tenths as f64 / 10.0, hi_tenths as f64 / 10.0);
                let mut values = vec![0.0; pb.num_vars()];
                values[pb.var(VarSymbol::Sigma, None, Some(0), None).0] = sigma;
                values[pb.var(VarSymbol::Mid, Some(1), Some(0), None).0] = (lo + hi) / 2.0;
                values[pb.var(VarSymbol::HalfWidth, Some(1), Some(0), None).0] = (hi - lo) / 2.0;
                values[pb.var(VarSymbol::Weight, None, Some(0), None).0] = 1.0;
                values[pb.var(VarSymbol::Lambda, None, None, None).0] = 0.5;
                let sol = MipSolution {
                    status: SolveStatus::Optimal,
                    values,
                    objective: 0.0,
                    solve_seconds: 0.0,
                };
                let model = interpret(&pb, &sol, &pb.meta.data_min, &pb.meta.data_max).unwrap();
                let expected = expect(sigma == 1.0, lo_tenths, hi_tenths);
                assert_eq!(
                    model.criteria[0].direction, expected,
                    "sigma={sigma} interval=[{lo},{hi}]"
                );
                seen.insert((sigma as u8, format!("{:?}", expected)));
            }
        }
    }
    // Every one of the six (reading, outcome) combinations occurs.
    assert_eq!(seen.len(), 6);
}
