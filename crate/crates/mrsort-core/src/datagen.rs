//! Seeded generation of ground-truth models and synthetic example sets.
//!
//! Evaluations and profile endpoints live on a fixed grid (tenths by
//! default) so that brute-force certification over the same grid always
//! covers the generating model. Weight vectors are uniform on the simplex;
//! the majority threshold is drawn uniformly and clamped into `[0.5, 1]` to
//! keep the ground truth inside the hypothesis space of the learner.

use alloc::vec::Vec;
use rand::Rng;
use thiserror::Error;

use crate::mip::DirectionKnowledge;
use crate::model::{
    Alternative, ApprovedSet, CriterionSpec, Direction, LearningSet, MrSortModel,
};

/// Knobs of one synthetic experiment cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    /// Criteria count.
    pub n: usize,
    /// How many criteria get a random type and an unknown declared direction.
    pub q: usize,
    /// Categories.
    pub p: usize,
    /// Learning-set size; must be divisible by `p` for balance.
    pub learn_size: usize,
    /// Held-out set size.
    pub test_size: usize,
    /// Evaluation/profile grid step.
    pub grid: f64,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(n: usize, q: usize, p: usize, learn_size: usize, test_size: usize, seed: u64) -> Self {
        Self {
            n,
            q,
            p,
            learn_size,
            test_size,
            grid: 0.1,
            seed,
        }
    }

    fn validate(&self) -> Result<usize, GenError> {
        if self.n == 0 || self.q > self.n || self.p < 2 {
            return Err(GenError::BadConfig);
        }
        if self.learn_size == 0 || self.learn_size % self.p != 0 {
            return Err(GenError::BadConfig);
        }
        crate::util::unit_grid_cells(self.grid).ok_or(GenError::BadConfig)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generation config")]
    BadConfig,
    #[error("could not draw a balanced example set within the rejection budget")]
    Unbalanceable,
    #[error("could not draw nested profiles within the retry budget")]
    ProfileGeneration,
}

/// Uniform draw from the weight simplex: sorts `n - 1` uniforms and takes
/// successive differences of `(0, u_1, ..., u_{n-1}, 1)`.
pub fn sample_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![1.0];
    }
    let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.0..1.0)).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut weights = Vec::with_capacity(n);
    let mut prev = 0.0;
    for &c in &cuts {
        weights.push(c - prev);
        prev = c;
    }
    weights.push(1.0 - prev);
    weights
}

fn grid_value<R: Rng + ?Sized>(cells: usize, rng: &mut R) -> f64 {
    rng.gen_range(0..=cells) as f64 / cells as f64
}

/// `count` distinct interior grid points, ascending.
fn distinct_interior<R: Rng + ?Sized>(
    cells: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>, GenError> {
    if count > cells - 1 {
        return Err(GenError::ProfileGeneration);
    }
    let mut picks: Vec<usize> = Vec::with_capacity(count);
    for _ in 0..1000 {
        let k = rng.gen_range(1..cells);
        if !picks.contains(&k) {
            picks.push(k);
            if picks.len() == count {
                picks.sort_unstable();
                return Ok(picks.into_iter().map(|k| k as f64 / cells as f64).collect());
            }
        }
    }
    Err(GenError::ProfileGeneration)
}

/// Nested closed intervals on the interior grid, outermost first. Endpoints
/// prefer to move strictly inward at each step when the grid leaves room.
fn nested_intervals<R: Rng + ?Sized>(
    cells: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>, GenError> {
    for _ in 0..100 {
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(count);
        let mut lo = 1usize;
        let mut hi = cells - 1;
        let mut ok = true;
        for level in 0..count {
            if lo >= hi {
                ok = false;
                break;
            }
            let (a, b) = if level == 0 {
                let a = rng.gen_range(lo..hi);
                let b = rng.gen_range(a + 1..=hi);
                (a, b)
            } else {
                let a = rng.gen_range(lo..hi);
                let b = rng.gen_range(a + 1..=hi);
                (a.max(lo), b.min(hi))
            };
            out.push((a, b));
            lo = a;
            hi = b;
        }
        if ok {
            return Ok(out
                .into_iter()
                .map(|(a, b)| (a as f64 / cells as f64, b as f64 / cells as f64))
                .collect());
        }
    }
    Err(GenError::ProfileGeneration)
}

fn profile_sets<R: Rng + ?Sized>(
    direction: Direction,
    levels: usize,
    cells: usize,
    rng: &mut R,
) -> Result<Vec<ApprovedSet>, GenError> {
    match direction {
        Direction::Gain => {
            let thresholds = distinct_interior(cells, levels, rng)?;
            Ok(thresholds
                .into_iter()
                .map(|threshold| ApprovedSet::GainAtLeast { threshold })
                .collect())
        }
        Direction::Cost => {
            let mut thresholds = distinct_interior(cells, levels, rng)?;
            thresholds.reverse();
            Ok(thresholds
                .into_iter()
                .map(|threshold| ApprovedSet::CostAtMost { threshold })
                .collect())
        }
        Direction::SinglePeaked => {
            let intervals = nested_intervals(cells, levels, rng)?;
            Ok(intervals
                .into_iter()
                .map(|(lo, hi)| ApprovedSet::PeakInterval { lo, hi })
                .collect())
        }
        Direction::SingleValley => {
            // Approved sets shrink with the level, so the excluded interval
            // grows: innermost interval first.
            let mut intervals = nested_intervals(cells, levels, rng)?;
            intervals.reverse();
            Ok(intervals
                .into_iter()
                .map(|(lo, hi)| ApprovedSet::ValleyComplement { lo, hi })
                .collect())
        }
        Direction::Unknown => Err(GenError::BadConfig),
    }
}

/// Draws a ground-truth model plus the direction knowledge handed to the
/// learner: `q` randomly chosen criteria get a uniformly random type and are
/// reported unknown, the rest are gain criteria and reported as such.
pub fn sample_model<R: Rng + ?Sized>(
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<(MrSortModel, DirectionKnowledge), GenError> {
    let cells = cfg.validate()?;
    let levels = cfg.p - 1;

    // Fisher-Yates prefix to pick the unknown criteria.
    let mut order: Vec<usize> = (0..cfg.n).collect();
    for i in 0..cfg.q {
        let k = rng.gen_range(i..cfg.n);
        order.swap(i, k);
    }
    let mut unknown = alloc::vec![false; cfg.n];
    for &i in &order[..cfg.q] {
        unknown[i] = true;
    }

    let mut criteria = Vec::with_capacity(cfg.n);
    let mut approved = Vec::with_capacity(cfg.n);
    let mut knowledge = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let direction = if unknown[i] {
            match rng.gen_range(0..4) {
                0 => Direction::Gain,
                1 => Direction::Cost,
                2 => Direction::SinglePeaked,
                _ => Direction::SingleValley,
            }
        } else {
            Direction::Gain
        };
        knowledge.push(if unknown[i] {
            Direction::Unknown
        } else {
            Direction::Gain
        });
        criteria.push(
            CriterionSpec::new(i, alloc::format!("c{i}"), 0.0, 1.0, direction)
                .expect("unit scale"),
        );
        approved.push(profile_sets(direction, levels, cells, rng)?);
    }

    let weights = sample_weights(cfg.n, rng);
    let lambda = rng.gen_range(0.0..1.0f64).max(0.5);
    let model = MrSortModel::new(criteria, weights, lambda, cfg.p, approved)
        .expect("generated parameters satisfy the model invariants");
    Ok((model, DirectionKnowledge::new(knowledge)))
}

fn random_alternative<R: Rng + ?Sized>(
    id: usize,
    n: usize,
    cells: usize,
    rng: &mut R,
) -> Alternative {
    Alternative::new(
        alloc::format!("a{id}"),
        (0..n).map(|_| grid_value(cells, rng)).collect(),
    )
}

/// Rejection budget multiplier for balanced sampling.
const BALANCE_BUDGET_PER_EXAMPLE: usize = 10_000;

/// Draws grid alternatives i.i.d., assigns them with the model, and keeps
/// them until every category holds exactly `size / p` examples. Fails when
/// the rejection budget is exhausted, signalling a model whose categories
/// are too unbalanced to sample.
pub fn sample_balanced_set<R: Rng + ?Sized>(
    model: &MrSortModel,
    size: usize,
    grid: f64,
    rng: &mut R,
) -> Result<LearningSet, GenError> {
    let p = model.p;
    if size == 0 || size % p != 0 {
        return Err(GenError::BadConfig);
    }
    let cells = crate::util::unit_grid_cells(grid).ok_or(GenError::BadConfig)?;
    let per_category = size / p;
    let mut counts = alloc::vec![0usize; p];
    let mut alternatives = Vec::with_capacity(size);
    let mut categories = Vec::with_capacity(size);
    let mut drawn = 0usize;
    let budget = size * BALANCE_BUDGET_PER_EXAMPLE;
    while alternatives.len() < size {
        if drawn >= budget {
            return Err(GenError::Unbalanceable);
        }
        let alt = random_alternative(drawn, model.n(), cells, rng);
        drawn += 1;
        let cat = model.assign(&alt).expect("grid evaluation is on scale");
        if counts[cat - 1] < per_category {
            counts[cat - 1] += 1;
            alternatives.push(Alternative::new(
                alloc::format!("a{}", alternatives.len()),
                alt.evals,
            ));
            categories.push(cat);
        }
    }
    Ok(LearningSet::new(alternatives, categories).expect("lengths match"))
}

/// Plain i.i.d. grid alternatives with their model assignments; used for
/// held-out sets. The step must divide the unit interval.
pub fn sample_uniform_set<R: Rng + ?Sized>(
    model: &MrSortModel,
    size: usize,
    grid: f64,
    rng: &mut R,
) -> LearningSet {
    let cells = crate::util::unit_grid_cells(grid).expect("grid step divides the unit interval");
    let mut alternatives = Vec::with_capacity(size);
    let mut categories = Vec::with_capacity(size);
    for j in 0..size {
        let alt = random_alternative(j, model.n(), cells, rng);
        let cat = model.assign(&alt).expect("grid evaluation is on scale");
        alternatives.push(alt);
        categories.push(cat);
    }
    LearningSet::new(alternatives, categories).expect("lengths match")
}

/// A ground-truth model with its learning and test sets.
#[derive(Debug, Clone)]
pub struct Instance {
    pub model: MrSortModel,
    pub knowledge: DirectionKnowledge,
    pub learn: LearningSet,
    pub test: LearningSet,
}

/// Budget of model redraws when balanced sampling keeps failing.
const MODEL_REDRAW_BUDGET: usize = 50;

/// Generates a full instance, redrawing the model when a balanced learning
/// set cannot be sampled from it.
pub fn generate_instance<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Result<Instance, GenError> {
    cfg.validate()?;
    for _ in 0..MODEL_REDRAW_BUDGET {
        let (model, knowledge) = sample_model(cfg, rng)?;
        match sample_balanced_set(&model, cfg.learn_size, cfg.grid, rng) {
            Ok(learn) => {
                let test = sample_uniform_set(&model, cfg.test_size, cfg.grid, rng);
                return Ok(Instance {
                    model,
                    knowledge,
                    learn,
                    test,
                });
            }
            Err(GenError::Unbalanceable) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GenError::Unbalanceable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weights_for_one_criterion() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_weights(1, &mut rng), alloc::vec![1.0]);
    }

    #[test]
    fn weights_are_simplex_differences() {
        // With a single cut u, the weights are (u, 1 - u).
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = sample_weights(2, &mut rng);
        assert_eq!(w.len(), 2);
        assert!((w[0] + w[1] - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn weights_have_uniform_marginals() {
        // Monte-Carlo check of the simplex-uniform property: each coordinate
        // of a 3-weight draw has mean 1/3.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut sums = [0.0f64; 3];
        let draws = 10_000;
        for _ in 0..draws {
            let w = sample_weights(3, &mut rng);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (s, &x) in sums.iter_mut().zip(&w) {
                *s += x;
            }
        }
        for s in sums {
            assert!((s / draws as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn q_zero_means_all_known_gain() {
        let cfg = GenConfig::new(4, 0, 2, 8, 0, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (model, dk) = sample_model(&cfg, &mut rng).unwrap();
        assert!(model
            .criteria
            .iter()
            .all(|c| c.direction == Direction::Gain));
        assert_eq!(dk.unknown_count(), 0);
        assert!(dk.directions().iter().all(|&d| d == Direction::Gain));
    }

    #[test]
    fn q_full_means_all_unknown() {
        let cfg = GenConfig::new(4, 4, 2, 8, 0, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (model, dk) = sample_model(&cfg, &mut rng).unwrap();
        assert_eq!(dk.unknown_count(), 4);
        assert!(model
            .criteria
            .iter()
            .all(|c| c.direction != Direction::Unknown));
    }

    #[test]
    fn generated_models_are_valid_across_seeds() {
        for seed in 0..1000 {
            let cfg = GenConfig::new(3, 2, if seed % 3 == 0 { 3 } else { 2 }, 6, 0, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (model, dk) = sample_model(&cfg, &mut rng).unwrap();
            model.validate().unwrap();
            assert_eq!(dk.len(), 3);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GenConfig::new(3, 1, 2, 12, 6, 99);
        let mut rng_a = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut rng_b = ChaCha8Rng::seed_from_u64(cfg.seed);
        let a = generate_instance(&cfg, &mut rng_a).unwrap();
        let b = generate_instance(&cfg, &mut rng_b).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.learn, b.learn);
        assert_eq!(a.test, b.test);
    }

    #[test]
    fn balanced_sets_are_balanced_and_consistent() {
        let cfg = GenConfig::new(3, 1, 2, 20, 0, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let inst = generate_instance(&cfg, &mut rng).unwrap();
        let mut counts = [0usize; 2];
        for &c in &inst.learn.categories {
            counts[c - 1] += 1;
        }
        assert_eq!(counts, [10, 10]);
        // Every example re-assigned by the model lands in its recorded
        // category.
        for (alt, &cat) in inst.learn.alternatives.iter().zip(&inst.learn.categories) {
            assert_eq!(inst.model.assign(alt).unwrap(), cat);
        }
    }

    #[test]
    fn everything_stays_on_the_grid() {
        let cfg = GenConfig::new(3, 3, 3, 12, 5, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let inst = generate_instance(&cfg, &mut rng).unwrap();
        let on_grid = |x: f64| (x * 10.0 - (x * 10.0).round()).abs() < 1e-9;
        for alt in inst
            .learn
            .alternatives
            .iter()
            .chain(inst.test.alternatives.iter())
        {
            assert!(alt.evals.iter().all(|&v| on_grid(v)));
        }
        for sets in &inst.model.approved {
            for set in sets {
                match *set {
                    ApprovedSet::GainAtLeast { threshold }
                    | ApprovedSet::CostAtMost { threshold } => assert!(on_grid(threshold)),
                    ApprovedSet::PeakInterval { lo, hi }
                    | ApprovedSet::ValleyComplement { lo, hi } => {
                        assert!(on_grid(lo) && on_grid(hi));
                        assert!(lo < hi && lo > 0.0 && hi < 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn unbalanceable_models_are_reported() {
        // A model that assigns everything to category 2: threshold at 0 with
        // lambda 0.5 approves every grid value.
        let model = MrSortModel::new(
            alloc::vec![CriterionSpec::new(0, "c0", 0.0, 1.0, Direction::Gain).unwrap()],
            alloc::vec![1.0],
            0.5,
            2,
            alloc::vec![alloc::vec![ApprovedSet::GainAtLeast { threshold: 0.0 }]],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // Keep the budget small by asking for a tiny set.
        assert_eq!(
            sample_balanced_set(&model, 2, 0.1, &mut rng),
            Err(GenError::Unbalanceable)
        );
    }

    #[test]
    fn config_invariants_are_checked() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_model(&GenConfig::new(2, 3, 2, 4, 0, 0), &mut rng).is_err());
        assert!(sample_model(&GenConfig::new(2, 0, 2, 5, 0, 0), &mut rng).is_err());
        assert!(sample_model(&GenConfig::new(0, 0, 2, 4, 0, 0), &mut rng).is_err());
    }
}
