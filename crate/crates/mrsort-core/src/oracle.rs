//! Exhaustive grid search certifying optimal restoration on tiny instances.
//!
//! The oracle enumerates every model whose approved-set endpoints, weights
//! and majority threshold lie on a fixed grid, evaluates memberships with the
//! core model operations, and returns the best number of restored examples
//! together with one witness model. It is deliberately capped to tiny
//! two-category instances; its purpose is to cross-check the exact solver on
//! inputs whose data and generating parameters live on the same grid.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use thiserror::Error;

use crate::mip::DirectionKnowledge;
use crate::model::{ApprovedSet, CriterionSpec, Direction, LearningSet, MrSortModel};

/// Size caps keeping the enumeration tractable.
pub const MAX_CRITERIA: usize = 3;
pub const MAX_EXAMPLES: usize = 12;
pub const MIN_GRID_STEP: f64 = 0.1 - 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance exceeds oracle caps: {criteria} criteria, {examples} examples")]
    CapsExceeded { criteria: usize, examples: usize },
    #[error("grid step {step} must be at least 0.1 and divide the unit interval")]
    BadGrid { step: f64 },
    #[error("oracle handles exactly two categories")]
    NotTwoCategories,
    #[error("evaluation {value} is not on the normalized scale")]
    NotNormalized { value: f64 },
}

/// Certified optimum and one model achieving it.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub best_objective: usize,
    pub witness: MrSortModel,
}

fn grid_points(step: f64) -> Option<Vec<f64>> {
    if !(step >= MIN_GRID_STEP) {
        return None;
    }
    let cells = crate::util::unit_grid_cells(step)?;
    Some((0..=cells).map(|k| k as f64 / cells as f64).collect())
}

fn candidate_sets(direction: Direction, grid: &[f64]) -> Vec<ApprovedSet> {
    let mut out = Vec::new();
    let gains = grid
        .iter()
        .map(|&t| ApprovedSet::GainAtLeast { threshold: t });
    let costs = grid.iter().map(|&t| ApprovedSet::CostAtMost { threshold: t });
    let peaks = grid.iter().enumerate().flat_map(|(a, &lo)| {
        grid[a..]
            .iter()
            .map(move |&hi| ApprovedSet::PeakInterval { lo, hi })
    });
    let valleys = grid.iter().enumerate().flat_map(|(a, &lo)| {
        grid[a..]
            .iter()
            .map(move |&hi| ApprovedSet::ValleyComplement { lo, hi })
    });
    match direction {
        Direction::Gain => out.extend(gains),
        Direction::Cost => out.extend(costs),
        Direction::SinglePeaked => out.extend(peaks),
        Direction::SingleValley => out.extend(valleys),
        Direction::Unknown => {
            out.extend(gains);
            out.extend(costs);
            out.extend(peaks);
            out.extend(valleys);
        }
    }
    out
}

/// All weight vectors on the simplex grid (`cells` parts of `1/cells`) and
/// thresholds on the grid intersected with `[0.5, 1]`, reduced to the
/// distinct coalition-sufficiency patterns they induce. Keys are bitmaps
/// over the `2^n` criterion subsets.
fn sufficiency_families(n: usize, grid: &[f64]) -> BTreeMap<u32, (Vec<f64>, f64)> {
    let cells = grid.len() - 1;
    let mut families = BTreeMap::new();
    let mut weights = alloc::vec![0usize; n];
    enumerate_compositions(cells, n, 0, &mut weights, &mut |parts| {
        let w: Vec<f64> = parts.iter().map(|&k| k as f64 / cells as f64).collect();
        for &lambda in grid.iter().filter(|&&l| l >= 0.5) {
            let mut mask = 0u32;
            for subset in 0..(1u32 << n) {
                let total: f64 = (0..n)
                    .filter(|&i| subset & (1 << i) != 0)
                    .map(|i| w[i])
                    .sum();
                if total >= lambda {
                    mask |= 1 << subset;
                }
            }
            families.entry(mask).or_insert_with(|| (w.clone(), lambda));
        }
    });
    families
}

fn enumerate_compositions(
    remaining: usize,
    parts: usize,
    idx: usize,
    scratch: &mut [usize],
    visit: &mut impl FnMut(&[usize]),
) {
    if idx == parts - 1 {
        scratch[idx] = remaining;
        visit(scratch);
        return;
    }
    for k in 0..=remaining {
        scratch[idx] = k;
        enumerate_compositions(remaining - k, parts, idx + 1, scratch, visit);
    }
}

struct Candidate {
    set: ApprovedSet,
    /// Bit j set when example j is approved.
    members: u16,
}

/// Exhaustively maximizes the number of restored examples over the grid
/// hypothesis space and returns a certified optimum with a witness.
///
/// Evaluations must be normalized to `[0, 1]`; categories must be 1 or 2.
pub fn brute_force_oracle(
    ls: &LearningSet,
    dk: &DirectionKnowledge,
    grid_step: f64,
) -> Result<OracleResult, OracleError> {
    let m = ls.len();
    let n = if m > 0 { ls.alternatives[0].evals.len() } else { 0 };
    if n == 0 || n > MAX_CRITERIA || m == 0 || m > MAX_EXAMPLES {
        return Err(OracleError::CapsExceeded {
            criteria: n,
            examples: m,
        });
    }
    let grid = grid_points(grid_step).ok_or(OracleError::BadGrid { step: grid_step })?;
    if ls.categories.iter().any(|&c| c != 1 && c != 2) {
        return Err(OracleError::NotTwoCategories);
    }
    for alt in &ls.alternatives {
        for &v in &alt.evals {
            if !((-1e-9..=1.0 + 1e-9).contains(&v)) {
                return Err(OracleError::NotNormalized { value: v });
            }
        }
    }

    // Candidate approved sets per criterion, deduplicated by the membership
    // pattern they induce on the examples.
    let candidates: Vec<Vec<Candidate>> = (0..n)
        .map(|i| {
            let mut seen = BTreeMap::new();
            for set in candidate_sets(dk.get(i), &grid) {
                let mut members = 0u16;
                for (j, alt) in ls.alternatives.iter().enumerate() {
                    if set.approves(alt.evals[i]) {
                        members |= 1 << j;
                    }
                }
                seen.entry(members).or_insert(set);
            }
            seen.into_iter()
                .map(|(members, set)| Candidate { set, members })
                .collect()
        })
        .collect();

    let families = sufficiency_families(n, &grid);
    let want_top: u16 = ls
        .categories
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c == 2)
        .fold(0, |acc, (j, _)| acc | (1 << j));

    let mut best: Option<(usize, Vec<usize>, u32)> = None;
    let mut choice = alloc::vec![0usize; n];
    // subset_of[j] accumulates, per example, the subset of criteria approving
    // it under the current partial choice.
    let mut subsets = alloc::vec![alloc::vec![0u32; m]; n + 1];

    fn descend(
        depth: usize,
        n: usize,
        m: usize,
        candidates: &[Vec<Candidate>],
        families: &BTreeMap<u32, (Vec<f64>, f64)>,
        want_top: u16,
        choice: &mut Vec<usize>,
        subsets: &mut Vec<Vec<u32>>,
        best: &mut Option<(usize, Vec<usize>, u32)>,
    ) {
        if depth == n {
            for (&family, _) in families {
                let mut correct = 0usize;
                for j in 0..m {
                    let sufficient = family & (1 << subsets[n][j]) != 0;
                    let wants_top = want_top & (1 << j) != 0;
                    if sufficient == wants_top {
                        correct += 1;
                    }
                }
                if best.as_ref().map_or(true, |(b, _, _)| correct > *b) {
                    *best = Some((correct, choice.clone(), family));
                }
            }
            return;
        }
        for (k, cand) in candidates[depth].iter().enumerate() {
            choice[depth] = k;
            for j in 0..m {
                let bit = ((cand.members >> j) & 1) as u32;
                subsets[depth + 1][j] = subsets[depth][j] | (bit << depth);
            }
            descend(
                depth + 1,
                n,
                m,
                candidates,
                families,
                want_top,
                choice,
                subsets,
                best,
            );
        }
    }
    descend(
        0,
        n,
        m,
        &candidates,
        &families,
        want_top,
        &mut choice,
        &mut subsets,
        &mut best,
    );

    let (best_objective, choice, family) = best.expect("at least one candidate model");
    let (weights, lambda) = families.get(&family).expect("family has witness").clone();
    let mut specs = Vec::with_capacity(n);
    let mut approved = Vec::with_capacity(n);
    for i in 0..n {
        let set = candidates[i][choice[i]].set;
        specs.push(
            CriterionSpec::new(i, alloc::format!("c{i}"), 0.0, 1.0, set.direction())
                .expect("unit scale"),
        );
        approved.push(alloc::vec![set]);
    }
    let witness = MrSortModel::new(specs, weights, lambda, 2, approved)
        .expect("grid witness satisfies model invariants");
    Ok(OracleResult {
        best_objective,
        witness,
    })
}
