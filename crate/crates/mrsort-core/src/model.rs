//! MR-Sort model representation and forward assignment.
//!
//! An [`MrSortModel`] sorts alternatives into `p` ordered categories
//! (`1` = worst, `p` = best). Each criterion `i` carries, for every category
//! level `h ∈ 1..p`, a set of *approved* values [`ApprovedSet`]. An
//! alternative reaches level `h` when the total weight of criteria approving
//! it at that level meets the majority threshold `lambda`; it is assigned to
//! the highest level it reaches, plus one.

use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

/// Preference type of a criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Higher values are preferred.
    Gain,
    /// Lower values are preferred.
    Cost,
    /// Values near a peak are preferred; approved values form an interval.
    SinglePeaked,
    /// Values far from a nadir are preferred; approved values are the
    /// complement of an interval.
    SingleValley,
    /// Direction not known yet. Only valid as learning input, never inside a
    /// learned model.
    Unknown,
}

impl Direction {
    /// True for the two monotone types.
    pub fn is_monotone(self) -> bool {
        matches!(self, Direction::Gain | Direction::Cost)
    }
}

/// Identity and scale of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSpec {
    pub id: usize,
    pub name: String,
    pub scale_min: f64,
    pub scale_max: f64,
    pub direction: Direction,
}

impl CriterionSpec {
    pub fn new(
        id: usize,
        name: impl Into<String>,
        scale_min: f64,
        scale_max: f64,
        direction: Direction,
    ) -> Result<Self, ModelError> {
        if !scale_min.is_finite() || !scale_max.is_finite() || scale_min > scale_max {
            return Err(ModelError::BadScale {
                criterion: id,
                min: scale_min,
                max: scale_max,
            });
        }
        Ok(Self {
            id,
            name: name.into(),
            scale_min,
            scale_max,
            direction,
        })
    }

    /// Scale with `min == max` (a constant data column). Such criteria are
    /// carried along but can never discriminate.
    pub fn is_degenerate(&self) -> bool {
        self.scale_max == self.scale_min
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.scale_min && value <= self.scale_max
    }
}

/// The approved values of one criterion at one category level.
///
/// Membership is boundary-inclusive for all four kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ApprovedSet {
    /// `value >= threshold` is approved.
    GainAtLeast { threshold: f64 },
    /// `value <= threshold` is approved.
    CostAtMost { threshold: f64 },
    /// `lo <= value <= hi` is approved.
    PeakInterval { lo: f64, hi: f64 },
    /// `value <= lo` or `value >= hi` is approved.
    ValleyComplement { lo: f64, hi: f64 },
}

impl ApprovedSet {
    /// Boundary-inclusive membership test.
    pub fn approves(&self, value: f64) -> bool {
        match *self {
            ApprovedSet::GainAtLeast { threshold } => value >= threshold,
            ApprovedSet::CostAtMost { threshold } => value <= threshold,
            ApprovedSet::PeakInterval { lo, hi } => value >= lo && value <= hi,
            ApprovedSet::ValleyComplement { lo, hi } => value <= lo || value >= hi,
        }
    }

    /// The criterion type this set shape corresponds to.
    pub fn direction(&self) -> Direction {
        match self {
            ApprovedSet::GainAtLeast { .. } => Direction::Gain,
            ApprovedSet::CostAtMost { .. } => Direction::Cost,
            ApprovedSet::PeakInterval { .. } => Direction::SinglePeaked,
            ApprovedSet::ValleyComplement { .. } => Direction::SingleValley,
        }
    }

    /// Distance of `value` to the interval midpoint, paired with the interval
    /// half-width. A single-peaked criterion approves `value` iff the distance
    /// is at most the half-width; a single-valley criterion iff the distance
    /// is at least the half-width. Undefined for the two monotone kinds.
    pub fn reencode_distance(&self, value: f64) -> Result<(f64, f64), ModelError> {
        match *self {
            ApprovedSet::PeakInterval { lo, hi } | ApprovedSet::ValleyComplement { lo, hi } => {
                let midpoint = (lo + hi) / 2.0;
                Ok(((value - midpoint).abs(), (hi - lo) / 2.0))
            }
            _ => Err(ModelError::NotIntervalKind),
        }
    }

    /// The approved region as up to two closed intervals over
    /// `[scale_min, scale_max]`, for set-containment checks.
    fn as_intervals(&self, scale_min: f64, scale_max: f64) -> [Option<(f64, f64)>; 2] {
        match *self {
            ApprovedSet::GainAtLeast { threshold } => [Some((threshold, scale_max)), None],
            ApprovedSet::CostAtMost { threshold } => [Some((scale_min, threshold)), None],
            ApprovedSet::PeakInterval { lo, hi } => [Some((lo, hi)), None],
            ApprovedSet::ValleyComplement { lo, hi } => {
                [Some((scale_min, lo)), Some((hi, scale_max))]
            }
        }
    }

    /// Whether `self` contains `other` as a subset of approved values over
    /// the given scale.
    pub fn contains_set(&self, other: &ApprovedSet, scale_min: f64, scale_max: f64) -> bool {
        let inner = other.as_intervals(scale_min, scale_max);
        let outer = self.as_intervals(scale_min, scale_max);
        inner.iter().flatten().all(|&(lo, hi)| {
            if lo > hi {
                return true; // empty piece
            }
            outer
                .iter()
                .flatten()
                .any(|&(olo, ohi)| olo <= lo && hi <= ohi)
        })
    }

    fn check_within_scale(&self, spec: &CriterionSpec) -> Result<(), ModelError> {
        let ok = match *self {
            ApprovedSet::GainAtLeast { threshold } | ApprovedSet::CostAtMost { threshold } => {
                threshold.is_finite() && spec.contains(threshold)
            }
            ApprovedSet::PeakInterval { lo, hi } | ApprovedSet::ValleyComplement { lo, hi } => {
                lo.is_finite()
                    && hi.is_finite()
                    && lo <= hi
                    && spec.contains(lo)
                    && spec.contains(hi)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::ApprovedSetOutOfScale { criterion: spec.id })
        }
    }
}

/// One alternative: an identifier and one evaluation per criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Alternative {
    pub id: String,
    pub evals: Vec<f64>,
}

impl Alternative {
    pub fn new(id: impl Into<String>, evals: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            evals,
        }
    }
}

/// Assignment examples: alternatives paired with their desired categories.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningSet {
    pub alternatives: Vec<Alternative>,
    /// Desired category per alternative, in `1..=p`.
    pub categories: Vec<usize>,
}

impl LearningSet {
    pub fn new(alternatives: Vec<Alternative>, categories: Vec<usize>) -> Result<Self, ModelError> {
        if alternatives.len() != categories.len() {
            return Err(ModelError::LengthMismatch {
                expected: alternatives.len(),
                got: categories.len(),
            });
        }
        if let Some(&c) = categories.iter().find(|&&c| c == 0) {
            return Err(ModelError::BadCategory { category: c });
        }
        Ok(Self {
            alternatives,
            categories,
        })
    }

    pub fn len(&self) -> usize {
        self.alternatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alternatives.is_empty()
    }

    /// Sorted list of the categories that actually occur.
    pub fn distinct_categories(&self) -> Vec<usize> {
        let mut cats = self.categories.clone();
        cats.sort_unstable();
        cats.dedup();
        cats
    }
}

/// Tolerance on the weight normalization check.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A complete MR-Sort model.
#[derive(Debug, Clone, PartialEq)]
pub struct MrSortModel {
    pub criteria: Vec<CriterionSpec>,
    /// Nonnegative, summing to 1.
    pub weights: Vec<f64>,
    /// Majority threshold in `[0.5, 1]`.
    pub lambda: f64,
    /// Number of categories, at least 2.
    pub p: usize,
    /// `approved[i][h-1]` is the approved set of criterion `i` at level `h`,
    /// `h ∈ 1..p`. Sets shrink (or stay equal) as `h` grows.
    pub approved: Vec<Vec<ApprovedSet>>,
}

impl MrSortModel {
    pub fn new(
        criteria: Vec<CriterionSpec>,
        weights: Vec<f64>,
        lambda: f64,
        p: usize,
        approved: Vec<Vec<ApprovedSet>>,
    ) -> Result<Self, ModelError> {
        let model = Self::new_unchecked(criteria, weights, lambda, p, approved);
        model.validate()?;
        Ok(model)
    }

    /// Builds the model without validating invariants. Useful when assembling
    /// candidate models whose validity is established by construction.
    pub fn new_unchecked(
        criteria: Vec<CriterionSpec>,
        weights: Vec<f64>,
        lambda: f64,
        p: usize,
        approved: Vec<Vec<ApprovedSet>>,
    ) -> Self {
        Self {
            criteria,
            weights,
            lambda,
            p,
            approved,
        }
    }

    pub fn n(&self) -> usize {
        self.criteria.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.n();
        if self.p < 2 {
            return Err(ModelError::BadCategoryCount { p: self.p });
        }
        if self.weights.len() != n || self.approved.len() != n {
            return Err(ModelError::LengthMismatch {
                expected: n,
                got: self.weights.len().min(self.approved.len()),
            });
        }
        if self.weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(ModelError::BadWeights {
                sum: self.weights.iter().sum(),
            });
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(ModelError::BadWeights { sum });
        }
        if !(self.lambda >= 0.5 && self.lambda <= 1.0) {
            return Err(ModelError::BadLambda {
                lambda: self.lambda,
            });
        }
        for (i, (spec, sets)) in self.criteria.iter().zip(&self.approved).enumerate() {
            if spec.direction == Direction::Unknown {
                return Err(ModelError::UnknownDirectionInModel { criterion: i });
            }
            if sets.len() != self.p - 1 {
                return Err(ModelError::LengthMismatch {
                    expected: self.p - 1,
                    got: sets.len(),
                });
            }
            for set in sets {
                set.check_within_scale(spec)?;
            }
            // Approved sets must shrink as the level grows.
            for h in 1..sets.len() {
                if !sets[h - 1].contains_set(&sets[h], spec.scale_min, spec.scale_max) {
                    return Err(ModelError::NotNested {
                        criterion: i,
                        level: h + 1,
                    });
                }
            }
        }
        Ok(())
    }

    fn check_alternative(&self, alt: &Alternative) -> Result<(), ModelError> {
        if alt.evals.len() != self.n() {
            return Err(ModelError::LengthMismatch {
                expected: self.n(),
                got: alt.evals.len(),
            });
        }
        for (spec, &v) in self.criteria.iter().zip(&alt.evals) {
            if !v.is_finite() || !spec.contains(v) {
                return Err(ModelError::EvalOutOfScale {
                    criterion: spec.id,
                    value: v,
                });
            }
        }
        Ok(())
    }

    /// Membership of `value` in the approved set of `criterion` at `level`
    /// (`1..=p-1`).
    pub fn is_approved(
        &self,
        criterion: usize,
        level: usize,
        value: f64,
    ) -> Result<bool, ModelError> {
        let sets = self
            .approved
            .get(criterion)
            .ok_or(ModelError::CriterionIndex { index: criterion })?;
        if level == 0 || level > self.p - 1 {
            return Err(ModelError::LevelIndex { level, p: self.p });
        }
        Ok(sets[level - 1].approves(value))
    }

    /// Total weight of the criteria approving `evals` at `level` (`1..=p-1`).
    pub fn coalition_weight(&self, level: usize, evals: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(evals)
            .zip(self.approved.iter())
            .filter(|((_, &v), sets)| sets[level - 1].approves(v))
            .map(|((&w, _), _)| w)
            .sum()
    }

    /// Assigns `alt` to a category in `1..=p`: the highest level whose
    /// approving coalition meets `lambda`, plus one. Level 0 counts as always
    /// met and level `p` as never met, so the result is total; nesting of the
    /// approved sets makes it unique.
    pub fn assign(&self, alt: &Alternative) -> Result<usize, ModelError> {
        self.check_alternative(alt)?;
        let mut reached = 0;
        for level in 1..self.p {
            if self.coalition_weight(level, &alt.evals) >= self.lambda {
                reached = level;
            } else {
                break;
            }
        }
        Ok(reached + 1)
    }

    /// Fraction of the learning set restored to its desired category.
    pub fn restoration_rate(&self, ls: &LearningSet) -> Result<f64, ModelError> {
        if ls.is_empty() {
            return Err(ModelError::EmptyLearningSet);
        }
        let mut correct = 0usize;
        for (alt, &cat) in ls.alternatives.iter().zip(&ls.categories) {
            if self.assign(alt)? == cat {
                correct += 1;
            }
        }
        Ok(correct as f64 / ls.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("criterion index {index} out of range")]
    CriterionIndex { index: usize },
    #[error("level {level} out of range for {p} categories")]
    LevelIndex { level: usize, p: usize },
    #[error("criterion {criterion} scale [{min}, {max}] is invalid")]
    BadScale { criterion: usize, min: f64, max: f64 },
    #[error("approved set of criterion {criterion} outside its scale")]
    ApprovedSetOutOfScale { criterion: usize },
    #[error("weights must be nonnegative and sum to 1, got sum {sum}")]
    BadWeights { sum: f64 },
    #[error("majority threshold {lambda} outside [0.5, 1]")]
    BadLambda { lambda: f64 },
    #[error("category count {p} must be at least 2")]
    BadCategoryCount { p: usize },
    #[error("category {category} outside the valid range")]
    BadCategory { category: usize },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("criterion {criterion} has unknown direction inside a model")]
    UnknownDirectionInModel { criterion: usize },
    #[error("approved sets of criterion {criterion} not nested at level {level}")]
    NotNested { criterion: usize, level: usize },
    #[error("evaluation {value} outside the scale of criterion {criterion}")]
    EvalOutOfScale { criterion: usize, value: f64 },
    #[error("distance re-encoding is only defined for interval kinds")]
    NotIntervalKind,
    #[error("empty learning set")]
    EmptyLearningSet,
}
