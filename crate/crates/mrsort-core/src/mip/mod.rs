//! Solver-agnostic mixed-integer program for the inverse MR-Sort problem.
//!
//! Given a set of assignment examples and per-criterion knowledge about
//! preference directions, [`build_two_category`] and [`build_p_category`]
//! emit a [`MipProblem`] whose optimal solutions maximize the number of
//! correctly restored examples. Every criterion is modelled through the
//! midpoint/half-width encoding of an interval of approved values, so a
//! single constraint system covers gain, cost, single-peaked and
//! single-valley criteria; a binary per criterion selects between the
//! peaked and valley reading of the interval.
//!
//! Building happens on evaluations normalized to `[0, 1]` (see
//! [`normalize`]); the inverse transforms are carried in the problem metadata
//! so solutions can be mapped back to original units.

mod build;
mod lp;

pub use build::{build_p_category, build_two_category, embed_model_solution};
pub use lp::write_lp;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

use crate::model::{Alternative, CriterionSpec, Direction, LearningSet};

/// Handle of one decision variable inside a [`MipProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Which quantity a variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarSymbol {
    /// Positive part of `mid - eval`.
    AlphaPlus,
    /// Negative part of `mid - eval`.
    AlphaMinus,
    /// Sign selector making one of the two parts zero.
    Beta,
    /// 1 when the criterion reads its interval as approved (peaked), 0 when
    /// it approves the complement (valley).
    Sigma,
    /// 1 when the example is restored to its desired category.
    Gamma,
    /// 1 when the evaluation is approved at the level.
    Delta,
    /// Weight contributed by the criterion when it approves (`delta * w`).
    Share,
    /// Interval midpoint.
    Mid,
    /// Interval half-width.
    HalfWidth,
    /// Criterion weight.
    Weight,
    /// Majority threshold.
    Lambda,
}

impl VarSymbol {
    fn base_name(self) -> &'static str {
        match self {
            VarSymbol::AlphaPlus => "alpha_p",
            VarSymbol::AlphaMinus => "alpha_m",
            VarSymbol::Beta => "beta",
            VarSymbol::Sigma => "sigma",
            VarSymbol::Gamma => "gamma",
            VarSymbol::Delta => "delta",
            VarSymbol::Share => "c",
            VarSymbol::Mid => "b_bot",
            VarSymbol::HalfWidth => "b",
            VarSymbol::Weight => "w",
            VarSymbol::Lambda => "lambda",
        }
    }
}

/// Structured variable name: symbol plus the level/criterion/example indices
/// that apply to it. Levels are 1-based, criteria and examples 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarTag {
    pub symbol: VarSymbol,
    pub level: Option<usize>,
    pub criterion: Option<usize>,
    pub example: Option<usize>,
}

impl VarTag {
    fn new(symbol: VarSymbol) -> Self {
        Self {
            symbol,
            level: None,
            criterion: None,
            example: None,
        }
    }

    fn level(mut self, h: usize) -> Self {
        self.level = Some(h);
        self
    }

    fn criterion(mut self, i: usize) -> Self {
        self.criterion = Some(i);
        self
    }

    fn example(mut self, j: usize) -> Self {
        self.example = Some(j);
        self
    }

    /// Deterministic textual name, also used in LP exports and solution
    /// files.
    pub fn name(&self) -> String {
        let mut s = String::from(self.symbol.base_name());
        if let Some(h) = self.level {
            s.push_str(&alloc::format!("_h{h}"));
        }
        if let Some(i) = self.criterion {
            s.push_str(&alloc::format!("_i{i}"));
        }
        if let Some(j) = self.example {
            s.push_str(&alloc::format!("_j{j}"));
        }
        s
    }
}

/// Domain of one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarKind {
    Continuous { lo: f64, hi: f64 },
    Binary,
}

impl VarKind {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            VarKind::Continuous { lo, hi } => (lo, hi),
            VarKind::Binary => (0.0, 1.0),
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, VarKind::Binary)
    }
}

/// One declared decision variable.
#[derive(Debug, Clone, PartialEq)]
pub struct VarRef {
    pub id: VarId,
    pub kind: VarKind,
    pub tag: VarTag,
}

/// Comparator of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

/// `sum(coeff * var) cmp rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

impl Constraint {
    fn evaluate(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(VarId(id), coeff)| coeff * values[id])
            .sum()
    }

    /// Amount by which `values` violates this constraint (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.evaluate(values);
        match self.cmp {
            Cmp::Le => (lhs - self.rhs).max(0.0),
            Cmp::Ge => (self.rhs - lhs).max(0.0),
            Cmp::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Objective sense; the inverse problem always maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjSense {
    Maximize,
    Minimize,
}

/// Invertible affine map from original criterion units to `[0, 1]`.
///
/// A zero `scale` marks a degenerate criterion (constant data column): its
/// evaluations all map to 0.5 and the inverse map returns the constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionTransform {
    pub name: String,
    pub offset: f64,
    pub scale: f64,
}

impl CriterionTransform {
    pub fn identity(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            offset: 0.0,
            scale: 1.0,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.scale == 0.0
    }

    pub fn apply(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            0.5
        } else {
            (x - self.offset) / self.scale
        }
    }

    pub fn invert(&self, y: f64) -> f64 {
        if self.is_degenerate() {
            self.offset
        } else {
            self.offset + y * self.scale
        }
    }
}

/// Per-criterion knowledge about the preference direction, as provided with
/// the learning set. `Unknown` entries leave the direction to the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionKnowledge {
    directions: Vec<Direction>,
}

impl DirectionKnowledge {
    pub fn new(directions: Vec<Direction>) -> Self {
        Self { directions }
    }

    /// All criteria known to be gain criteria.
    pub fn all_gain(n: usize) -> Self {
        Self {
            directions: alloc::vec![Direction::Gain; n],
        }
    }

    /// No criterion direction known.
    pub fn all_unknown(n: usize) -> Self {
        Self {
            directions: alloc::vec![Direction::Unknown; n],
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn get(&self, i: usize) -> Direction {
        self.directions[i]
    }

    /// Number of criteria with unknown direction.
    pub fn unknown_count(&self) -> usize {
        self.directions
            .iter()
            .filter(|&&d| d == Direction::Unknown)
            .count()
    }

    /// True at positions whose direction is unknown.
    pub fn unknown_mask(&self) -> Vec<bool> {
        self.directions
            .iter()
            .map(|&d| d == Direction::Unknown)
            .collect()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }
}

/// Tunables of the program construction. Defaults follow the normalized
/// `[0, 1]` scale: the membership big-M covers the worst slack of the
/// absolute-value and approval constraints, the assignment big-M covers
/// majority comparisons, and epsilon realizes strict inequalities well below
/// the data resolution but well above solver tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct MipConfig {
    pub epsilon: f64,
    pub big_m_membership: f64,
    pub big_m_assignment: f64,
}

impl Default for MipConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            big_m_membership: 3.0,
            big_m_assignment: 2.0,
        }
    }
}

/// Construction facts carried alongside the variables and constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct MipMeta {
    pub n: usize,
    pub num_examples: usize,
    pub p: usize,
    pub epsilon: f64,
    pub big_m_membership: f64,
    pub big_m_assignment: f64,
    /// Unit transforms, one per criterion (identity unless set after
    /// normalization).
    pub transforms: Vec<CriterionTransform>,
    /// Per-criterion minimum evaluation over the examples (normalized units).
    pub data_min: Vec<f64>,
    /// Per-criterion maximum evaluation over the examples (normalized units).
    pub data_max: Vec<f64>,
    /// Desired category per example.
    pub categories: Vec<usize>,
}

/// A complete mixed-integer program: variables, linear constraints and a
/// linear objective.
#[derive(Debug, Clone, PartialEq)]
pub struct MipProblem {
    vars: Vec<VarRef>,
    constraints: Vec<Constraint>,
    objective: Vec<(VarId, f64)>,
    sense: ObjSense,
    index: BTreeMap<VarTag, VarId>,
    pub meta: MipMeta,
}

impl MipProblem {
    fn new(meta: MipMeta) -> Self {
        Self {
            vars: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            sense: ObjSense::Maximize,
            index: BTreeMap::new(),
            meta,
        }
    }

    fn add_var(&mut self, tag: VarTag, kind: VarKind) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(VarRef { id, kind, tag });
        let previous = self.index.insert(tag, id);
        debug_assert!(previous.is_none(), "duplicate variable tag");
        id
    }

    fn add_constraint(
        &mut self,
        name: String,
        terms: Vec<(VarId, f64)>,
        cmp: Cmp,
        rhs: f64,
    ) {
        self.constraints.push(Constraint {
            name,
            terms,
            cmp,
            rhs,
        });
    }

    pub fn vars(&self) -> &[VarRef] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn sense(&self) -> ObjSense {
        self.sense
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Looks a variable up by its structured name.
    pub fn lookup(&self, tag: VarTag) -> Option<VarId> {
        self.index.get(&tag).copied()
    }

    /// Variable id for `symbol` at the given indices; panics when absent.
    /// Levels are 1-based; pass `None` for indices the symbol does not carry.
    pub fn var(
        &self,
        symbol: VarSymbol,
        level: Option<usize>,
        criterion: Option<usize>,
        example: Option<usize>,
    ) -> VarId {
        let tag = VarTag {
            symbol,
            level,
            criterion,
            example,
        };
        self.lookup(tag)
            .unwrap_or_else(|| panic!("variable {} not declared", tag.name()))
    }

    /// Count of variables with the given symbol.
    pub fn count_symbol(&self, symbol: VarSymbol) -> usize {
        self.vars.iter().filter(|v| v.tag.symbol == symbol).count()
    }

    /// Installs the unit transforms recorded during normalization so
    /// solutions can be reported in original units.
    pub fn set_transforms(&mut self, transforms: Vec<CriterionTransform>) -> Result<(), BuildError> {
        if transforms.len() != self.meta.n {
            return Err(BuildError::LengthMismatch {
                expected: self.meta.n,
                got: transforms.len(),
            });
        }
        self.meta.transforms = transforms;
        Ok(())
    }

    /// Objective value of an assignment.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .iter()
            .map(|&(VarId(id), coeff)| coeff * values[id])
            .sum()
    }

    /// Largest constraint or bound violation of `values`, with the name of
    /// the worst offender.
    pub fn max_violation(&self, values: &[f64]) -> (f64, String) {
        let mut worst = (0.0f64, String::new());
        for v in &self.vars {
            let (lo, hi) = v.kind.bounds();
            let x = values[v.id.0];
            let viol = (lo - x).max(x - hi).max(0.0);
            if viol > worst.0 {
                worst = (viol, v.tag.name());
            }
        }
        for c in &self.constraints {
            let viol = c.violation(values);
            if viol > worst.0 {
                worst = (viol, c.name.clone());
            }
        }
        worst
    }

    /// Checks that `values` satisfies every bound and constraint within
    /// `tol`.
    pub fn check_feasible(&self, values: &[f64], tol: f64) -> Result<(), BuildError> {
        let (viol, name) = self.max_violation(values);
        if viol > tol {
            Err(BuildError::InfeasibleAssignment {
                constraint: name,
                violation: viol,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("learning set is empty")]
    EmptyLearningSet,
    #[error("expected exactly 2 distinct categories, found {found}")]
    NotTwoCategories { found: usize },
    #[error("category {category} outside 1..={p}")]
    CategoryOutOfRange { category: usize, p: usize },
    #[error("category count {p} must be at least 2")]
    BadCategoryCount { p: usize },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("evaluation {value} of example {example} on criterion {criterion} is not normalized")]
    NotNormalized {
        example: usize,
        criterion: usize,
        value: f64,
    },
    #[error("assignment violates constraint {constraint} by {violation}")]
    InfeasibleAssignment { constraint: String, violation: f64 },
}

/// Affine-maps each criterion's evaluations onto `[0, 1]` using the criterion
/// scales, and returns the inverse transforms. Criteria whose scale is a
/// single point map to the constant 0.5 and are flagged degenerate on their
/// transform.
pub fn normalize(
    ls: &LearningSet,
    specs: &[CriterionSpec],
) -> Result<(LearningSet, Vec<CriterionTransform>), BuildError> {
    let transforms: Vec<CriterionTransform> = specs
        .iter()
        .map(|s| CriterionTransform {
            name: s.name.clone(),
            offset: s.scale_min,
            scale: s.scale_max - s.scale_min,
        })
        .collect();
    let mut alternatives = Vec::with_capacity(ls.len());
    for alt in &ls.alternatives {
        if alt.evals.len() != specs.len() {
            return Err(BuildError::LengthMismatch {
                expected: specs.len(),
                got: alt.evals.len(),
            });
        }
        let evals = alt
            .evals
            .iter()
            .zip(&transforms)
            .map(|(&v, t)| t.apply(v))
            .collect();
        alternatives.push(Alternative::new(alt.id.clone(), evals));
    }
    let normalized = LearningSet {
        alternatives,
        categories: ls.categories.clone(),
    };
    Ok((normalized, transforms))
}
