//! Backend contract, solution interpretation, and the learning pipeline.
//!
//! A [`SolverBackend`] turns a [`MipProblem`] into a [`MipSolution`];
//! [`interpret`] reads the optimal variable values back into an
//! [`MrSortModel`], deciding for every criterion whether the learned interval
//! means a gain, cost, single-peaked or single-valley criterion; [`learn`]
//! chains normalization, construction, solving and interpretation.

use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

use crate::mip::{
    build_p_category, build_two_category, normalize, BuildError, DirectionKnowledge, MipConfig,
    MipProblem, VarId, VarSymbol,
};
use crate::model::{
    ApprovedSet, CriterionSpec, Direction, LearningSet, ModelError, MrSortModel,
};

/// Solver values within this distance of 0 or 1 are snapped; anything else
/// on a binary variable makes the solution numerically unsound.
pub const BINARY_TOL: f64 = 1e-6;

/// Approved sets are widened by this much (normalized units) when a solution
/// is read back, so that memberships that are tight in the solver's own
/// tolerance stay inside after the round trip to original units. It sits well
/// below the epsilon used for strict inequalities, so non-members stay out.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

/// Tolerance on the case comparisons against the data range, absorbing
/// solver feasibility noise: the non-strict peaked cases fire up to this far
/// past the bound, the strict valley cases require at least this much slack.
const CASE_TOL: f64 = 1e-6;

/// Outcome of a backend run.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Optimal,
    /// Stopped with a feasible incumbent and a known optimality gap.
    Feasible { gap: f64 },
    Infeasible,
    /// Hit the time limit; carries the incumbent objective when one exists.
    Timeout { best_objective: Option<f64> },
}

impl SolveStatus {
    /// True when the solution carries a usable variable assignment.
    pub fn has_values(&self) -> bool {
        matches!(
            self,
            SolveStatus::Optimal
                | SolveStatus::Feasible { .. }
                | SolveStatus::Timeout {
                    best_objective: Some(_)
                }
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible { .. } => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Timeout {
                best_objective: Some(_),
            } => "feasible",
            SolveStatus::Timeout {
                best_objective: None,
            } => "timeout",
        }
    }
}

/// Variable assignment returned by a backend, indexed by [`VarId`].
#[derive(Debug, Clone, PartialEq)]
pub struct MipSolution {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    pub solve_seconds: f64,
}

impl MipSolution {
    pub fn value(&self, id: VarId) -> f64 {
        self.values[id.0]
    }

    /// Snaps binary variables to exact 0/1 and checks that the objective
    /// matches the restoration flags.
    pub fn snap_binaries(&mut self, problem: &MipProblem) -> Result<(), SolveError> {
        if self.values.len() != problem.num_vars() {
            return Err(SolveError::BadSolutionShape {
                expected: problem.num_vars(),
                got: self.values.len(),
            });
        }
        for var in problem.vars() {
            if !var.kind.is_binary() {
                continue;
            }
            let v = self.values[var.id.0];
            if v.abs() <= BINARY_TOL {
                self.values[var.id.0] = 0.0;
            } else if (v - 1.0).abs() <= BINARY_TOL {
                self.values[var.id.0] = 1.0;
            } else {
                return Err(SolveError::UnsoundBinary {
                    name: var.tag.name(),
                    value: v,
                });
            }
        }
        let gamma_sum = problem.objective_value(&self.values);
        if (gamma_sum - self.objective).abs() > BINARY_TOL {
            return Err(SolveError::ObjectiveMismatch {
                objective: self.objective,
                gamma_sum,
            });
        }
        self.objective = gamma_sum;
        Ok(())
    }

    /// Restoration flag per example.
    pub fn restored_flags(&self, problem: &MipProblem) -> Vec<bool> {
        (0..problem.meta.num_examples)
            .map(|j| self.value(problem.var(VarSymbol::Gamma, None, None, Some(j))) > 0.5)
            .collect()
    }
}

/// Limits handed to a backend for one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveLimits {
    pub time_limit_seconds: Option<f64>,
    pub threads: u32,
}

impl Default for SolveLimits {
    fn default() -> Self {
        Self {
            time_limit_seconds: None,
            threads: 1,
        }
    }
}

/// A mixed-integer solver able to process the programs built here.
pub trait SolverBackend {
    fn solve(&self, problem: &MipProblem, limits: &SolveLimits) -> Result<MipSolution, SolveError>;
}

/// What the solver run looked like, independent of the learned model.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub status: SolveStatus,
    /// Number of restored examples (the objective), when a solution exists.
    pub objective: Option<f64>,
    /// Restoration rate on the learning set, `objective / |examples|`.
    pub restoration_rate: Option<f64>,
    pub solve_seconds: f64,
    pub num_vars: usize,
    pub num_constraints: usize,
    /// Per-example restoration flags.
    pub restored: Option<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("solver backend failed: {message}")]
    Backend { message: String },
    #[error("program reported infeasible; the relaxed restoration flags should make it always feasible")]
    Infeasible,
    #[error("solver hit the time limit without an incumbent")]
    TimeoutWithoutIncumbent { diagnostics: Diagnostics },
    #[error("binary variable {name} has fractional value {value}")]
    UnsoundBinary { name: String, value: f64 },
    #[error("objective {objective} does not match restoration flags summing to {gamma_sum}")]
    ObjectiveMismatch { objective: f64, gamma_sum: f64 },
    #[error("solution has {got} values for {expected} variables")]
    BadSolutionShape { expected: usize, got: usize },
    #[error("solution status carries no variable values")]
    NoValues,
}

fn widen(set: ApprovedSet, margin: f64) -> ApprovedSet {
    match set {
        ApprovedSet::GainAtLeast { threshold } => ApprovedSet::GainAtLeast {
            threshold: (threshold - margin).max(0.0),
        },
        ApprovedSet::CostAtMost { threshold } => ApprovedSet::CostAtMost {
            threshold: (threshold + margin).min(1.0),
        },
        ApprovedSet::PeakInterval { lo, hi } => ApprovedSet::PeakInterval {
            lo: (lo - margin).max(0.0),
            hi: (hi + margin).min(1.0),
        },
        ApprovedSet::ValleyComplement { lo, hi } => {
            let (lo, hi) = (lo + margin, hi - margin);
            if lo > hi {
                let mid = (lo + hi) / 2.0;
                ApprovedSet::ValleyComplement { lo: mid, hi: mid }
            } else {
                ApprovedSet::ValleyComplement { lo, hi }
            }
        }
    }
}

fn denormalize(set: ApprovedSet, t: &crate::mip::CriterionTransform) -> ApprovedSet {
    match set {
        ApprovedSet::GainAtLeast { threshold } => ApprovedSet::GainAtLeast {
            threshold: t.invert(threshold),
        },
        ApprovedSet::CostAtMost { threshold } => ApprovedSet::CostAtMost {
            threshold: t.invert(threshold),
        },
        ApprovedSet::PeakInterval { lo, hi } => ApprovedSet::PeakInterval {
            lo: t.invert(lo),
            hi: t.invert(hi),
        },
        ApprovedSet::ValleyComplement { lo, hi } => ApprovedSet::ValleyComplement {
            lo: t.invert(lo),
            hi: t.invert(hi),
        },
    }
}

/// Reads an optimal (or incumbent) solution back into an MR-Sort model.
///
/// For every criterion and level the solved interval `[mid - half, mid + half]`
/// is classified against the per-criterion data range: a peaked interval
/// reaching below the data is a cost criterion, one reaching above is a gain
/// criterion, anything else a genuine single-peaked criterion; mirrored rules
/// (with strict comparisons) apply to the valley reading. Frontiers are then
/// mapped back to original units through the stored transforms.
pub fn interpret(
    problem: &MipProblem,
    sol: &MipSolution,
    data_min: &[f64],
    data_max: &[f64],
) -> Result<MrSortModel, SolveError> {
    if !sol.status.has_values() {
        return match sol.status {
            SolveStatus::Infeasible => Err(SolveError::Infeasible),
            _ => Err(SolveError::NoValues),
        };
    }
    let mut sol = sol.clone();
    sol.snap_binaries(problem)?;

    let n = problem.meta.n;
    let p = problem.meta.p;
    if data_min.len() != n || data_max.len() != n {
        return Err(SolveError::Build(BuildError::LengthMismatch {
            expected: n,
            got: data_min.len().min(data_max.len()),
        }));
    }

    let mut criteria = Vec::with_capacity(n);
    let mut approved = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);

    for i in 0..n {
        let sigma = sol.value(problem.var(VarSymbol::Sigma, None, Some(i), None));
        let peaked = sigma == 1.0;

        // Interval endpoints per level, with embedding violations within
        // solver tolerance snapped away so the final model nests exactly.
        let mut endpoints: Vec<(f64, f64)> = Vec::with_capacity(p - 1);
        for h in 1..p {
            let mid = sol.value(problem.var(VarSymbol::Mid, Some(h), Some(i), None));
            let half = sol.value(problem.var(VarSymbol::HalfWidth, Some(h), Some(i), None));
            let (mut lo, mut hi) = (mid - half, mid + half);
            if let Some(&(prev_lo, prev_hi)) = endpoints.last() {
                if peaked {
                    if lo < prev_lo && prev_lo - lo <= CASE_TOL {
                        lo = prev_lo;
                    }
                    if hi > prev_hi && hi - prev_hi <= CASE_TOL {
                        hi = prev_hi;
                    }
                } else {
                    if lo > prev_lo && lo - prev_lo <= CASE_TOL {
                        lo = prev_lo;
                    }
                    if hi < prev_hi && prev_hi - hi <= CASE_TOL {
                        hi = prev_hi;
                    }
                }
            }
            endpoints.push((lo, hi.max(lo)));
        }

        let mut level_sets: Vec<ApprovedSet> = Vec::with_capacity(p - 1);
        for &(lo, hi) in &endpoints {
            let set = if peaked {
                if lo <= data_min[i] + CASE_TOL {
                    ApprovedSet::CostAtMost { threshold: hi }
                } else if hi >= data_max[i] - CASE_TOL {
                    ApprovedSet::GainAtLeast { threshold: lo }
                } else {
                    ApprovedSet::PeakInterval { lo, hi }
                }
            } else if lo < data_min[i] - CASE_TOL {
                ApprovedSet::GainAtLeast { threshold: hi }
            } else if hi > data_max[i] + CASE_TOL {
                ApprovedSet::CostAtMost { threshold: lo }
            } else {
                ApprovedSet::ValleyComplement { lo, hi }
            };
            // A monotone reading extends the set beyond the solved interval;
            // when that breaks the embedding with the level below, fall back
            // to the plain interval form, which is equivalent on the data.
            if let Some(prev) = level_sets.last() {
                if !prev.contains_set(&set, 0.0, 1.0) {
                    let raw = if peaked {
                        ApprovedSet::PeakInterval { lo, hi }
                    } else {
                        ApprovedSet::ValleyComplement { lo, hi }
                    };
                    level_sets.push(raw);
                    continue;
                }
            }
            level_sets.push(set);
        }

        let direction = if level_sets.iter().all(|s| s.direction() == Direction::Gain) {
            Direction::Gain
        } else if level_sets.iter().all(|s| s.direction() == Direction::Cost) {
            Direction::Cost
        } else if peaked {
            Direction::SinglePeaked
        } else {
            Direction::SingleValley
        };

        let transform = &problem.meta.transforms[i];
        let sets: Vec<ApprovedSet> = level_sets
            .into_iter()
            .map(|s| denormalize(widen(s, BOUNDARY_MARGIN), transform))
            .collect();

        criteria.push(CriterionSpec::new(
            i,
            transform.name.clone(),
            transform.invert(0.0),
            transform.invert(1.0),
            direction,
        )?);
        approved.push(sets);
        weights.push(
            sol.value(problem.var(VarSymbol::Weight, None, Some(i), None))
                .max(0.0),
        );
    }

    // Solver values satisfy the simplex and threshold rows only within the
    // solver's own tolerance; renormalize before validating.
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        for w in &mut weights {
            *w /= total;
        }
    }
    let lambda = sol
        .value(problem.var(VarSymbol::Lambda, None, None, None))
        .clamp(0.5, 1.0);
    Ok(MrSortModel::new(criteria, weights, lambda, p, approved)?)
}

/// End-to-end learning: normalize, build, solve, interpret.
///
/// `specs` provides names and scales for the criteria of `ls` (original
/// units). A timeout with an incumbent still yields a model, with the status
/// reported in the diagnostics; a timeout without incumbent is an error
/// carrying the partial diagnostics.
pub fn learn(
    specs: &[CriterionSpec],
    ls: &LearningSet,
    dk: &DirectionKnowledge,
    p: usize,
    backend: &dyn SolverBackend,
    limits: &SolveLimits,
    cfg: &MipConfig,
) -> Result<(MrSortModel, Diagnostics), SolveError> {
    let (nls, transforms) = normalize(ls, specs)?;
    let mut problem = if p == 2 {
        build_two_category(&nls, dk, cfg)?
    } else {
        build_p_category(&nls, dk, p, cfg)?
    };
    problem.set_transforms(transforms)?;

    let mut sol = backend.solve(&problem, limits)?;
    let mut diagnostics = Diagnostics {
        status: sol.status.clone(),
        objective: None,
        restoration_rate: None,
        solve_seconds: sol.solve_seconds,
        num_vars: problem.num_vars(),
        num_constraints: problem.constraints().len(),
        restored: None,
    };
    match &sol.status {
        SolveStatus::Infeasible => return Err(SolveError::Infeasible),
        SolveStatus::Timeout {
            best_objective: None,
        } => return Err(SolveError::TimeoutWithoutIncumbent { diagnostics }),
        _ => {}
    }
    sol.snap_binaries(&problem)?;
    diagnostics.objective = Some(sol.objective);
    diagnostics.restoration_rate = Some(sol.objective / problem.meta.num_examples as f64);
    diagnostics.restored = Some(sol.restored_flags(&problem));

    let model = interpret(&problem, &sol, &problem.meta.data_min, &problem.meta.data_max)?;
    Ok((model, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::{build_two_category, embed_model_solution, MipConfig};
    use crate::model::{Alternative, LearningSet};
    use alloc::vec;

    fn problem_for(evals: Vec<(f64, usize)>, dk: DirectionKnowledge) -> (MipProblem, LearningSet) {
        let alternatives = evals
            .iter()
            .enumerate()
            .map(|(j, &(v, _))| Alternative::new(alloc::format!("a{j}"), vec![v]))
            .collect();
        let categories = evals.iter().map(|&(_, c)| c).collect();
        let ls = LearningSet::new(alternatives, categories).unwrap();
        let pb = build_two_category(&ls, &dk, &MipConfig::default()).unwrap();
        (pb, ls)
    }

    fn solution_from_values(values: Vec<f64>, objective: f64) -> MipSolution {
        MipSolution {
            status: SolveStatus::Optimal,
            values,
            objective,
            solve_seconds: 0.0,
        }
    }

    /// Hand-build a solution: one criterion, peaked interval [0.3, 0.7].
    fn peaked_solution(problem: &MipProblem, ls: &LearningSet) -> MipSolution {
        let truth = MrSortModel::new(
            vec![CriterionSpec::new(0, "c0", 0.0, 1.0, Direction::SinglePeaked).unwrap()],
            vec![1.0],
            1.0,
            2,
            vec![vec![ApprovedSet::PeakInterval { lo: 0.3, hi: 0.7 }]],
        )
        .unwrap();
        let values = embed_model_solution(problem, &truth, ls).unwrap();
        let objective = problem.objective_value(&values);
        solution_from_values(values, objective)
    }

    #[test]
    fn interpret_reads_single_peaked_interval() {
        let (pb, ls) = problem_for(
            vec![(0.1, 1), (0.5, 2), (0.9, 1)],
            DirectionKnowledge::all_unknown(1),
        );
        let sol = peaked_solution(&pb, &ls);
        let model = interpret(&pb, &sol, &pb.meta.data_min, &pb.meta.data_max).unwrap();
        assert_eq!(model.criteria[0].direction, Direction::SinglePeaked);
        match model.approved[0][0] {
            ApprovedSet::PeakInterval { lo, hi } => {
                assert!((lo - 0.3).abs() < 1e-4);
                assert!((hi - 0.7).abs() < 1e-4);
            }
            ref other => panic!("expected peak interval, got {other:?}"),
        }
        // The interpreted model restores the learning set exactly.
        assert_eq!(model.restoration_rate(&ls).unwrap(), 1.0);
    }

    #[test]
    fn interpret_collapses_interval_touching_data_max_to_gain() {
        // Interval [0.5, 1.0] over data within [0.1, 0.9]: reaches above the
        // data, so it means a plain gain criterion with threshold 0.5.
        let (pb, ls) = problem_for(
            vec![(0.1, 1), (0.9, 2)],
            DirectionKnowledge::all_unknown(1),
        );
        let truth = MrSortModel::new(
            vec![CriterionSpec::new(0, "c0", 0.0, 1.0, Direction::SinglePeaked).unwrap()],
            vec![1.0],
            1.0,
            2,
            vec![vec![ApprovedSet::PeakInterval { lo: 0.5, hi: 1.0 }]],
        )
        .unwrap();
        let values = embed_model_solution(&pb, &truth, &ls).unwrap();
        let objective = pb.objective_value(&values);
        let sol = solution_from_values(values, objective);
        let model = interpret(&pb, &sol, &pb.meta.data_min, &pb.meta.data_max).unwrap();
        assert_eq!(model.criteria[0].direction, Direction::Gain);
        assert!(matches!(
            model.approved[0][0],
            ApprovedSet::GainAtLeast { .. }
        ));
    }

    #[test]
    fn interpret_valley_reaching_below_data_is_gain() {
        // Valley reading with the excluded interval hanging below the data:
        // only the upper branch ever approves, i.e. a gain criterion whose
        // minimal approved value is the upper interval end.
        let (pb, ls) = problem_for(
            vec![(0.2, 1), (0.8, 2)],
            DirectionKnowledge::all_unknown(1),
        );
        let mut values = vec![0.0; pb.num_vars()];
        let set_tag = |pb: &MipProblem, sym, h: Option<usize>, i: Option<usize>, j: Option<usize>, v: f64, values: &mut Vec<f64>| {
            values[pb.var(sym, h, i, j).0] = v;
        };
        // sigma = 0 (valley), interval [0.1, 0.5]: 0.1 < data_min = 0.2.
        set_tag(&pb, VarSymbol::Sigma, None, Some(0), None, 0.0, &mut values);
        set_tag(&pb, VarSymbol::Mid, Some(1), Some(0), None, 0.3, &mut values);
        set_tag(&pb, VarSymbol::HalfWidth, Some(1), Some(0), None, 0.2, &mut values);
        set_tag(&pb, VarSymbol::Weight, None, Some(0), None, 1.0, &mut values);
        values[pb.var(VarSymbol::Lambda, None, None, None).0] = 1.0;
        // memberships: |0.3-0.2| = 0.1 < 0.2 -> not approved; |0.3-0.8| = 0.5 >= 0.2 -> approved
        set_tag(&pb, VarSymbol::AlphaPlus, Some(1), Some(0), Some(0), 0.1, &mut values);
        set_tag(&pb, VarSymbol::Beta, Some(1), Some(0), Some(0), 1.0, &mut values);
        set_tag(&pb, VarSymbol::AlphaMinus, Some(1), Some(0), Some(1), 0.5, &mut values);
        set_tag(&pb, VarSymbol::Delta, Some(1), Some(0), Some(1), 1.0, &mut values);
        set_tag(&pb, VarSymbol::Share, Some(1), Some(0), Some(1), 1.0, &mut values);
        set_tag(&pb, VarSymbol::Gamma, None, None, Some(0), 1.0, &mut values);
        set_tag(&pb, VarSymbol::Gamma, None, None, Some(1), 1.0, &mut values);
        pb.check_feasible(&values, 1e-9).unwrap();

        let sol = solution_from_values(values, 2.0);
        let model = interpret(&pb, &sol, &pb.meta.data_min, &pb.meta.data_max).unwrap();
        assert_eq!(model.criteria[0].direction, Direction::Gain);
        match model.approved[0][0] {
            ApprovedSet::GainAtLeast { threshold } => assert!((threshold - 0.5).abs() < 1e-4),
            ref other => panic!("expected gain, got {other:?}"),
        }
    }

    #[test]
    fn interpret_rejects_fractional_binaries() {
        let (pb, ls) = problem_for(
            vec![(0.1, 1), (0.9, 2)],
            DirectionKnowledge::all_unknown(1),
        );
        let mut sol = peaked_solution(&pb, &ls);
        let sigma = pb.var(VarSymbol::Sigma, None, Some(0), None);
        sol.values[sigma.0] = 0.4;
        assert!(matches!(
            interpret(&pb, &sol, &pb.meta.data_min, &pb.meta.data_max),
            Err(SolveError::UnsoundBinary { .. })
        ));
    }

    #[test]
    fn interpret_requires_values() {
        let (pb, _ls) = problem_for(
            vec![(0.1, 1), (0.9, 2)],
            DirectionKnowledge::all_unknown(1),
        );
        let sol = MipSolution {
            status: SolveStatus::Infeasible,
            values: vec![],
            objective: 0.0,
            solve_seconds: 0.0,
        };
        assert!(matches!(
            interpret(&pb, &sol, &pb.meta.data_min, &pb.meta.data_max),
            Err(SolveError::Infeasible)
        ));
        let sol = MipSolution {
            status: SolveStatus::Timeout {
                best_objective: None,
            },
            values: vec![],
            objective: 0.0,
            solve_seconds: 0.0,
        };
        assert!(matches!(
            interpret(&pb, &sol, &pb.meta.data_min, &pb.meta.data_max),
            Err(SolveError::NoValues)
        ));
    }
}
