//! Construction of the inverse MR-Sort program.
//!
//! For every criterion `i` and level `h` the approved values are encoded by
//! an interval with midpoint `b_bot` and half-width `b`, plus a shared
//! per-criterion binary `sigma` choosing between the peaked reading
//! (approve inside the interval) and the valley reading (approve outside).
//! Gain and cost criteria are the special cases where the interval sticks to
//! one end of the data range, which is how known directions are enforced.

use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{ApprovedSet, Direction, LearningSet, MrSortModel};

use super::{
    BuildError, Cmp, CriterionTransform, DirectionKnowledge, MipConfig, MipMeta, MipProblem,
    VarId, VarKind, VarSymbol, VarTag,
};

const NORMALIZED_TOL: f64 = 1e-9;

fn validate_inputs(
    ls: &LearningSet,
    dk: &DirectionKnowledge,
    p: usize,
) -> Result<usize, BuildError> {
    if p < 2 {
        return Err(BuildError::BadCategoryCount { p });
    }
    if ls.is_empty() {
        return Err(BuildError::EmptyLearningSet);
    }
    let n = ls.alternatives[0].evals.len();
    if dk.len() != n {
        return Err(BuildError::LengthMismatch {
            expected: n,
            got: dk.len(),
        });
    }
    for (j, alt) in ls.alternatives.iter().enumerate() {
        if alt.evals.len() != n {
            return Err(BuildError::LengthMismatch {
                expected: n,
                got: alt.evals.len(),
            });
        }
        for (i, &v) in alt.evals.iter().enumerate() {
            if !v.is_finite() || v < -NORMALIZED_TOL || v > 1.0 + NORMALIZED_TOL {
                return Err(BuildError::NotNormalized {
                    example: j,
                    criterion: i,
                    value: v,
                });
            }
        }
    }
    for &c in &ls.categories {
        if c == 0 || c > p {
            return Err(BuildError::CategoryOutOfRange { category: c, p });
        }
    }
    Ok(n)
}

/// Builds the two-category program. The learning set must use exactly two
/// distinct categories (1 and 2) and normalized evaluations.
pub fn build_two_category(
    ls: &LearningSet,
    dk: &DirectionKnowledge,
    cfg: &MipConfig,
) -> Result<MipProblem, BuildError> {
    let distinct = ls.distinct_categories();
    if distinct.len() != 2 {
        return Err(BuildError::NotTwoCategories {
            found: distinct.len(),
        });
    }
    build_p_category(ls, dk, 2, cfg)
}

/// Builds the general `p`-category program. Membership variables and
/// profiles are indexed by level `h ∈ 1..p`; the direction binary `sigma`
/// is shared across levels, and interval-nesting constraints keep the
/// approved sets embedded (shrinking as the level grows).
pub fn build_p_category(
    ls: &LearningSet,
    dk: &DirectionKnowledge,
    p: usize,
    cfg: &MipConfig,
) -> Result<MipProblem, BuildError> {
    let n = validate_inputs(ls, dk, p)?;
    let m = ls.len();
    let levels = p - 1;

    let data_min: Vec<f64> = (0..n)
        .map(|i| {
            ls.alternatives
                .iter()
                .map(|a| a.evals[i])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let data_max: Vec<f64> = (0..n)
        .map(|i| {
            ls.alternatives
                .iter()
                .map(|a| a.evals[i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let meta = MipMeta {
        n,
        num_examples: m,
        p,
        epsilon: cfg.epsilon,
        big_m_membership: cfg.big_m_membership,
        big_m_assignment: cfg.big_m_assignment,
        transforms: (0..n)
            .map(|i| CriterionTransform::identity(alloc::format!("c{i}")))
            .collect(),
        data_min: data_min.clone(),
        data_max: data_max.clone(),
        categories: ls.categories.clone(),
    };
    let mut pb = MipProblem::new(meta);

    let unit = VarKind::Continuous { lo: 0.0, hi: 1.0 };

    // Variables, ordered by (symbol, level, criterion, example).
    for h in 1..=levels {
        for i in 0..n {
            for j in 0..m {
                pb.add_var(
                    VarTag::new(VarSymbol::AlphaPlus).level(h).criterion(i).example(j),
                    unit,
                );
            }
        }
    }
    for h in 1..=levels {
        for i in 0..n {
            for j in 0..m {
                pb.add_var(
                    VarTag::new(VarSymbol::AlphaMinus).level(h).criterion(i).example(j),
                    unit,
                );
            }
        }
    }
    for h in 1..=levels {
        for i in 0..n {
            for j in 0..m {
                pb.add_var(
                    VarTag::new(VarSymbol::Beta).level(h).criterion(i).example(j),
                    VarKind::Binary,
                );
            }
        }
    }
    for i in 0..n {
        pb.add_var(VarTag::new(VarSymbol::Sigma).criterion(i), VarKind::Binary);
    }
    for j in 0..m {
        pb.add_var(VarTag::new(VarSymbol::Gamma).example(j), VarKind::Binary);
    }
    for h in 1..=levels {
        for i in 0..n {
            for j in 0..m {
                pb.add_var(
                    VarTag::new(VarSymbol::Delta).level(h).criterion(i).example(j),
                    VarKind::Binary,
                );
            }
        }
    }
    for h in 1..=levels {
        for i in 0..n {
            for j in 0..m {
                pb.add_var(
                    VarTag::new(VarSymbol::Share).level(h).criterion(i).example(j),
                    unit,
                );
            }
        }
    }
    for h in 1..=levels {
        for i in 0..n {
            pb.add_var(VarTag::new(VarSymbol::Mid).level(h).criterion(i), unit);
        }
    }
    for h in 1..=levels {
        for i in 0..n {
            pb.add_var(VarTag::new(VarSymbol::HalfWidth).level(h).criterion(i), unit);
        }
    }
    for i in 0..n {
        pb.add_var(VarTag::new(VarSymbol::Weight).criterion(i), unit);
    }
    pb.add_var(
        VarTag::new(VarSymbol::Lambda),
        VarKind::Continuous { lo: 0.5, hi: 1.0 },
    );

    let var = |pb: &MipProblem, s: VarSymbol, h: Option<usize>, i: Option<usize>, j: Option<usize>| {
        pb.var(s, h, i, j)
    };
    let m_mem = cfg.big_m_membership;
    let m_asg = cfg.big_m_assignment;
    let eps = cfg.epsilon;
    let lambda = var(&pb, VarSymbol::Lambda, None, None, None);

    // Absolute-value split: b_bot - a = alpha_p - alpha_m, with beta forcing
    // at least one part to zero.
    for h in 1..=levels {
        for i in 0..n {
            for j in 0..m {
                let ap = var(&pb, VarSymbol::AlphaPlus, Some(h), Some(i), Some(j));
                let am = var(&pb, VarSymbol::AlphaMinus, Some(h), Some(i), Some(j));
                let beta = var(&pb, VarSymbol::Beta, Some(h), Some(i), Some(j));
                let mid = var(&pb, VarSymbol::Mid, Some(h), Some(i), None);
                let a = ls.alternatives[j].evals[i];
                pb.add_constraint(
                    alloc::format!("abs_split_h{h}_i{i}_j{j}"),
                    alloc::vec![(ap, 1.0), (am, -1.0), (mid, -1.0)],
                    Cmp::Eq,
                    -a,
                );
                pb.add_constraint(
                    alloc::format!("abs_pos_h{h}_i{i}_j{j}"),
                    alloc::vec![(ap, 1.0), (beta, -m_mem)],
                    Cmp::Le,
                    0.0,
                );
                pb.add_constraint(
                    alloc::format!("abs_neg_h{h}_i{i}_j{j}"),
                    alloc::vec![(am, 1.0), (beta, m_mem)],
                    Cmp::Le,
                    m_mem,
                );
            }
        }
    }

    // Membership definition. With sigma = 0 (valley) the first pair is
    // active: delta = 1 iff |alpha| >= b. With sigma = 1 (peaked) the second
    // pair is active: delta = 1 iff |alpha| <= b. Strictness of the
    // complements is realized through epsilon.
    for h in 1..=levels {
        for i in 0..n {
            for j in 0..m {
                let ap = var(&pb, VarSymbol::AlphaPlus, Some(h), Some(i), Some(j));
                let am = var(&pb, VarSymbol::AlphaMinus, Some(h), Some(i), Some(j));
                let delta = var(&pb, VarSymbol::Delta, Some(h), Some(i), Some(j));
                let sigma = var(&pb, VarSymbol::Sigma, None, Some(i), None);
                let half = var(&pb, VarSymbol::HalfWidth, Some(h), Some(i), None);
                pb.add_constraint(
                    alloc::format!("sv_in_h{h}_i{i}_j{j}"),
                    alloc::vec![
                        (sigma, -m_mem),
                        (delta, m_mem),
                        (ap, -1.0),
                        (am, -1.0),
                        (half, 1.0),
                    ],
                    Cmp::Le,
                    m_mem,
                );
                pb.add_constraint(
                    alloc::format!("sv_out_h{h}_i{i}_j{j}"),
                    alloc::vec![
                        (ap, 1.0),
                        (am, 1.0),
                        (half, -1.0),
                        (delta, -m_mem),
                        (sigma, -m_mem),
                    ],
                    Cmp::Le,
                    -eps,
                );
                pb.add_constraint(
                    alloc::format!("sp_in_h{h}_i{i}_j{j}"),
                    alloc::vec![
                        (sigma, m_mem),
                        (delta, m_mem),
                        (ap, 1.0),
                        (am, 1.0),
                        (half, -1.0),
                    ],
                    Cmp::Le,
                    2.0 * m_mem,
                );
                pb.add_constraint(
                    alloc::format!("sp_out_h{h}_i{i}_j{j}"),
                    alloc::vec![
                        (half, 1.0),
                        (ap, -1.0),
                        (am, -1.0),
                        (delta, -m_mem),
                        (sigma, m_mem),
                    ],
                    Cmp::Le,
                    m_mem - eps,
                );
            }
        }
    }

    // Interval endpoints stay on the normalized scale.
    for h in 1..=levels {
        for i in 0..n {
            let mid = var(&pb, VarSymbol::Mid, Some(h), Some(i), None);
            let half = var(&pb, VarSymbol::HalfWidth, Some(h), Some(i), None);
            pb.add_constraint(
                alloc::format!("profile_lo_h{h}_i{i}"),
                alloc::vec![(mid, 1.0), (half, -1.0)],
                Cmp::Ge,
                0.0,
            );
            pb.add_constraint(
                alloc::format!("profile_hi_h{h}_i{i}"),
                alloc::vec![(mid, 1.0), (half, 1.0)],
                Cmp::Le,
                1.0,
            );
        }
    }

    // Share coupling: c = delta * w, linearized.
    for h in 1..=levels {
        for i in 0..n {
            for j in 0..m {
                let share = var(&pb, VarSymbol::Share, Some(h), Some(i), Some(j));
                let delta = var(&pb, VarSymbol::Delta, Some(h), Some(i), Some(j));
                let weight = var(&pb, VarSymbol::Weight, None, Some(i), None);
                pb.add_constraint(
                    alloc::format!("share_le_delta_h{h}_i{i}_j{j}"),
                    alloc::vec![(share, 1.0), (delta, -1.0)],
                    Cmp::Le,
                    0.0,
                );
                pb.add_constraint(
                    alloc::format!("share_ge_active_h{h}_i{i}_j{j}"),
                    alloc::vec![(delta, 1.0), (weight, 1.0), (share, -1.0)],
                    Cmp::Le,
                    1.0,
                );
                pb.add_constraint(
                    alloc::format!("share_le_weight_h{h}_i{i}_j{j}"),
                    alloc::vec![(share, 1.0), (weight, -1.0)],
                    Cmp::Le,
                    0.0,
                );
                pb.add_constraint(
                    alloc::format!("share_nonneg_h{h}_i{i}_j{j}"),
                    alloc::vec![(share, 1.0)],
                    Cmp::Ge,
                    0.0,
                );
            }
        }
    }

    // Weights form a unit simplex.
    pb.add_constraint(
        String::from("weight_sum"),
        (0..n)
            .map(|i| (var(&pb, VarSymbol::Weight, None, Some(i), None), 1.0))
            .collect(),
        Cmp::Eq,
        1.0,
    );

    // Assignment restoration. An example in the top category must reach the
    // top level; one in the bottom category must fail level 1; one in a
    // middle category must reach its lower frontier and fail its upper one.
    for (j, &cat) in ls.categories.iter().enumerate() {
        let gamma = var(&pb, VarSymbol::Gamma, None, None, Some(j));
        let reach = |pb: &mut MipProblem, h: usize| {
            let mut terms: Vec<(VarId, f64)> = (0..n)
                .map(|i| (pb.var(VarSymbol::Share, Some(h), Some(i), Some(j)), 1.0))
                .collect();
            terms.push((lambda, -1.0));
            terms.push((gamma, -m_asg));
            pb.add_constraint(
                alloc::format!("assign_up_h{h}_j{j}"),
                terms,
                Cmp::Ge,
                -m_asg,
            );
        };
        let fail = |pb: &mut MipProblem, h: usize| {
            let mut terms: Vec<(VarId, f64)> = (0..n)
                .map(|i| (pb.var(VarSymbol::Share, Some(h), Some(i), Some(j)), 1.0))
                .collect();
            terms.push((lambda, -1.0));
            terms.push((gamma, m_asg));
            pb.add_constraint(
                alloc::format!("assign_down_h{h}_j{j}"),
                terms,
                Cmp::Le,
                m_asg - eps,
            );
        };
        if cat == p {
            reach(&mut pb, p - 1);
        } else if cat == 1 {
            fail(&mut pb, 1);
        } else {
            reach(&mut pb, cat - 1);
            fail(&mut pb, cat);
        }
    }

    // Embedded approved sets across levels. Peaked intervals must shrink,
    // valley intervals must grow; each family is gated on sigma.
    for h in 1..levels {
        for i in 0..n {
            let sigma = var(&pb, VarSymbol::Sigma, None, Some(i), None);
            let mid_lo = var(&pb, VarSymbol::Mid, Some(h), Some(i), None);
            let half_lo = var(&pb, VarSymbol::HalfWidth, Some(h), Some(i), None);
            let mid_hi = var(&pb, VarSymbol::Mid, Some(h + 1), Some(i), None);
            let half_hi = var(&pb, VarSymbol::HalfWidth, Some(h + 1), Some(i), None);
            pb.add_constraint(
                alloc::format!("nest_sp_lo_h{h}_i{i}"),
                alloc::vec![
                    (mid_lo, 1.0),
                    (half_lo, -1.0),
                    (mid_hi, -1.0),
                    (half_hi, 1.0),
                    (sigma, m_asg),
                ],
                Cmp::Le,
                m_asg,
            );
            pb.add_constraint(
                alloc::format!("nest_sp_hi_h{h}_i{i}"),
                alloc::vec![
                    (mid_hi, 1.0),
                    (half_hi, 1.0),
                    (mid_lo, -1.0),
                    (half_lo, -1.0),
                    (sigma, m_asg),
                ],
                Cmp::Le,
                m_asg,
            );
            pb.add_constraint(
                alloc::format!("nest_sv_lo_h{h}_i{i}"),
                alloc::vec![
                    (mid_hi, 1.0),
                    (half_hi, -1.0),
                    (mid_lo, -1.0),
                    (half_lo, 1.0),
                    (sigma, -m_asg),
                ],
                Cmp::Le,
                0.0,
            );
            pb.add_constraint(
                alloc::format!("nest_sv_hi_h{h}_i{i}"),
                alloc::vec![
                    (mid_lo, 1.0),
                    (half_lo, 1.0),
                    (mid_hi, -1.0),
                    (half_hi, -1.0),
                    (sigma, -m_asg),
                ],
                Cmp::Le,
                0.0,
            );
        }
    }

    // Known directions. Gain and cost criteria are peaked intervals pinned
    // to the corresponding end of the data range, so their thresholds stay
    // free while the shape is fixed.
    for i in 0..n {
        let sigma = var(&pb, VarSymbol::Sigma, None, Some(i), None);
        match dk.get(i) {
            Direction::Unknown => {}
            Direction::SinglePeaked => {
                pb.add_constraint(
                    alloc::format!("sigma_fix_i{i}"),
                    alloc::vec![(sigma, 1.0)],
                    Cmp::Eq,
                    1.0,
                );
            }
            Direction::SingleValley => {
                pb.add_constraint(
                    alloc::format!("sigma_fix_i{i}"),
                    alloc::vec![(sigma, 1.0)],
                    Cmp::Eq,
                    0.0,
                );
            }
            Direction::Gain => {
                pb.add_constraint(
                    alloc::format!("sigma_fix_i{i}"),
                    alloc::vec![(sigma, 1.0)],
                    Cmp::Eq,
                    1.0,
                );
                for h in 1..=levels {
                    let mid = var(&pb, VarSymbol::Mid, Some(h), Some(i), None);
                    let half = var(&pb, VarSymbol::HalfWidth, Some(h), Some(i), None);
                    pb.add_constraint(
                        alloc::format!("dir_gain_h{h}_i{i}"),
                        alloc::vec![(mid, 1.0), (half, 1.0)],
                        Cmp::Ge,
                        data_max[i],
                    );
                }
            }
            Direction::Cost => {
                pb.add_constraint(
                    alloc::format!("sigma_fix_i{i}"),
                    alloc::vec![(sigma, 1.0)],
                    Cmp::Eq,
                    1.0,
                );
                for h in 1..=levels {
                    let mid = var(&pb, VarSymbol::Mid, Some(h), Some(i), None);
                    let half = var(&pb, VarSymbol::HalfWidth, Some(h), Some(i), None);
                    pb.add_constraint(
                        alloc::format!("dir_cost_h{h}_i{i}"),
                        alloc::vec![(mid, 1.0), (half, -1.0)],
                        Cmp::Le,
                        data_min[i],
                    );
                }
            }
        }
    }

    // Maximize the number of restored examples.
    pb.objective = (0..m)
        .map(|j| (pb.var(VarSymbol::Gamma, None, None, Some(j)), 1.0))
        .collect();

    Ok(pb)
}

/// Translates a ground-truth model (normalized units) into a full variable
/// assignment of `problem`. Used to certify that known-good parameters are
/// feasible, and as the reference semantics of the encoding.
pub fn embed_model_solution(
    problem: &MipProblem,
    truth: &MrSortModel,
    ls: &LearningSet,
) -> Result<Vec<f64>, BuildError> {
    let n = problem.meta.n;
    let p = problem.meta.p;
    let m = problem.meta.num_examples;
    if truth.n() != n || truth.p != p || ls.len() != m {
        return Err(BuildError::LengthMismatch {
            expected: n,
            got: truth.n(),
        });
    }
    let mut values = alloc::vec![0.0; problem.num_vars()];
    let set = |tag: VarTag, v: f64, values: &mut Vec<f64>| {
        let id = problem.lookup(tag).expect("tag declared");
        values[id.0] = v;
    };

    set(VarTag::new(VarSymbol::Lambda), truth.lambda, &mut values);
    for i in 0..n {
        set(
            VarTag::new(VarSymbol::Weight).criterion(i),
            truth.weights[i],
            &mut values,
        );
    }

    for i in 0..n {
        let sets = &truth.approved[i];
        let sigma = match sets[0].direction() {
            Direction::SingleValley => 0.0,
            _ => 1.0,
        };
        set(VarTag::new(VarSymbol::Sigma).criterion(i), sigma, &mut values);

        // Monotone kinds extend to a shared far endpoint so the intervals
        // still nest across levels.
        let gain_hi = sets
            .iter()
            .filter_map(|s| match *s {
                ApprovedSet::GainAtLeast { threshold } => Some(threshold),
                _ => None,
            })
            .fold(problem.meta.data_max[i], f64::max);
        let cost_lo = sets
            .iter()
            .filter_map(|s| match *s {
                ApprovedSet::CostAtMost { threshold } => Some(threshold),
                _ => None,
            })
            .fold(problem.meta.data_min[i], f64::min);

        for (level, aset) in sets.iter().enumerate() {
            let h = level + 1;
            let (lo, hi) = match *aset {
                ApprovedSet::GainAtLeast { threshold } => (threshold, gain_hi),
                ApprovedSet::CostAtMost { threshold } => (cost_lo, threshold),
                ApprovedSet::PeakInterval { lo, hi }
                | ApprovedSet::ValleyComplement { lo, hi } => (lo, hi),
            };
            let mid = (lo + hi) / 2.0;
            let half = (hi - lo) / 2.0;
            set(VarTag::new(VarSymbol::Mid).level(h).criterion(i), mid, &mut values);
            set(
                VarTag::new(VarSymbol::HalfWidth).level(h).criterion(i),
                half,
                &mut values,
            );

            for (j, alt) in ls.alternatives.iter().enumerate() {
                let d = mid - alt.evals[i];
                let (ap, am, beta) = if d > 0.0 {
                    (d, 0.0, 1.0)
                } else {
                    (0.0, -d, 0.0)
                };
                // Boundary-inclusive membership, robust to the rounding of
                // the midpoint/half-width arithmetic.
                let member = if sigma == 1.0 {
                    d.abs() <= half + 1e-9
                } else {
                    d.abs() >= half - 1e-9
                };
                set(
                    VarTag::new(VarSymbol::AlphaPlus).level(h).criterion(i).example(j),
                    ap,
                    &mut values,
                );
                set(
                    VarTag::new(VarSymbol::AlphaMinus).level(h).criterion(i).example(j),
                    am,
                    &mut values,
                );
                set(
                    VarTag::new(VarSymbol::Beta).level(h).criterion(i).example(j),
                    beta,
                    &mut values,
                );
                set(
                    VarTag::new(VarSymbol::Delta).level(h).criterion(i).example(j),
                    if member { 1.0 } else { 0.0 },
                    &mut values,
                );
                set(
                    VarTag::new(VarSymbol::Share).level(h).criterion(i).example(j),
                    if member { truth.weights[i] } else { 0.0 },
                    &mut values,
                );
            }
        }
    }

    // Restoration flags follow from the embedded memberships.
    for (j, &cat) in ls.categories.iter().enumerate() {
        let mut reached = 0;
        for h in 1..p {
            let coalition: f64 = (0..n)
                .map(|i| values[problem.var(VarSymbol::Share, Some(h), Some(i), Some(j)).0])
                .sum();
            if coalition >= truth.lambda {
                reached = h;
            } else {
                break;
            }
        }
        set(
            VarTag::new(VarSymbol::Gamma).example(j),
            if reached + 1 == cat { 1.0 } else { 0.0 },
            &mut values,
        );
    }
    Ok(values)
}
