//! Evaluation metrics and experiment aggregation.
//!
//! * restoration rate (CA): fraction of the learning set restored — reported
//!   by the solver diagnostics and recomputable from any model.
//! * generalization accuracy (CAg): agreement of two models on held-out
//!   alternatives.
//! * direction restoration (PDR): fraction of unknown-direction criteria
//!   whose learned type matches the generating type.
//!
//! [`ExperimentReport`] collects per-replica records and derives the
//! aggregates used in the experiment tables: medians over terminated
//! replicas, termination counts, and PDR bucketed by the weight of the
//! unknown criterion.

use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

use crate::model::{Alternative, Direction, ModelError, MrSortModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("models do not share a criteria schema")]
    SchemaMismatch,
    #[error("direction restoration is undefined without unknown criteria")]
    NoUnknownCriteria,
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Classification accuracy in generalization: the fraction of `test`
/// alternatives assigned to the same category by both models. Symmetric in
/// the two models.
pub fn cag(
    model_a: &MrSortModel,
    model_b: &MrSortModel,
    test: &[Alternative],
) -> Result<f64, MetricsError> {
    if model_a.n() != model_b.n() || model_a.p != model_b.p {
        return Err(MetricsError::SchemaMismatch);
    }
    for (a, b) in model_a.criteria.iter().zip(&model_b.criteria) {
        if (a.scale_min - b.scale_min).abs() > 1e-9 || (a.scale_max - b.scale_max).abs() > 1e-9 {
            return Err(MetricsError::SchemaMismatch);
        }
    }
    if test.is_empty() {
        return Err(MetricsError::LengthMismatch {
            expected: 1,
            got: 0,
        });
    }
    let mut agree = 0usize;
    for alt in test {
        if model_a.assign(alt)? == model_b.assign(alt)? {
            agree += 1;
        }
    }
    Ok(agree as f64 / test.len() as f64)
}

/// Preference-direction restoration rate over the criteria marked unknown.
pub fn pdr(
    true_directions: &[Direction],
    learned_directions: &[Direction],
    unknown_mask: &[bool],
) -> Result<f64, MetricsError> {
    if true_directions.len() != learned_directions.len()
        || true_directions.len() != unknown_mask.len()
    {
        return Err(MetricsError::LengthMismatch {
            expected: true_directions.len(),
            got: learned_directions.len().min(unknown_mask.len()),
        });
    }
    let mut total = 0usize;
    let mut correct = 0usize;
    for ((&truth, &learned), &unknown) in true_directions
        .iter()
        .zip(learned_directions)
        .zip(unknown_mask)
    {
        if unknown {
            total += 1;
            if truth == learned {
                correct += 1;
            }
        }
    }
    if total == 0 {
        return Err(MetricsError::NoUnknownCriteria);
    }
    Ok(correct as f64 / total as f64)
}

/// Median of a sample; averages the two middle values on even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

/// Importance bucket of a weight: low `[0, 1/2n]`, medium `(1/2n, 2/n)`,
/// high `[2/n, 1]`.
pub fn weight_bucket(weight: f64, n: usize) -> usize {
    let n = n as f64;
    if weight <= 1.0 / (2.0 * n) {
        0
    } else if weight < 2.0 / n {
        1
    } else {
        2
    }
}

/// One replica of one experiment cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaRecord {
    pub n: usize,
    pub q: usize,
    pub seed: u64,
    /// Solver outcome label: `optimal`, `feasible`, `timeout` or `error`.
    pub status: String,
    pub wall_time_s: f64,
    pub ca: Option<f64>,
    pub cag: Option<f64>,
    pub pdr: Option<f64>,
    /// True weight of the unknown criterion, recorded when exactly one
    /// criterion is unknown.
    pub unknown_weight: Option<f64>,
}

impl ReplicaRecord {
    pub const CSV_HEADER: &'static str = "n,q,seed,status,wall_time_s,ca,cag,pdr";

    /// Whether the solver proved optimality within its limits.
    pub fn terminated(&self) -> bool {
        self.status == "optimal"
    }

    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| alloc::format!("{x}")).unwrap_or_default();
        alloc::format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.q,
            self.seed,
            self.status,
            self.wall_time_s,
            opt(self.ca),
            opt(self.cag),
            opt(self.pdr),
        )
    }
}

/// Aggregates of one `(n, q)` cell, over terminated replicas only, mirroring
/// how timing tables report medians next to termination counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CellAggregate {
    pub n: usize,
    pub q: usize,
    pub replicas: usize,
    pub terminated: usize,
    pub median_time_s: Option<f64>,
    pub mean_ca: Option<f64>,
    pub mean_cag: Option<f64>,
    pub mean_pdr: Option<f64>,
}

/// All replica records of an experiment sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentReport {
    pub records: Vec<ReplicaRecord>,
}

impl ExperimentReport {
    pub fn push(&mut self, record: ReplicaRecord) {
        self.records.push(record);
    }

    /// Distinct `(n, q)` cells in insertion order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for r in &self.records {
            if !cells.contains(&(r.n, r.q)) {
                cells.push((r.n, r.q));
            }
        }
        cells
    }

    pub fn aggregate_cell(&self, n: usize, q: usize) -> CellAggregate {
        let in_cell: Vec<&ReplicaRecord> = self
            .records
            .iter()
            .filter(|r| r.n == n && r.q == q)
            .collect();
        let terminated: Vec<&&ReplicaRecord> =
            in_cell.iter().filter(|r| r.terminated()).collect();
        let times: Vec<f64> = terminated.iter().map(|r| r.wall_time_s).collect();
        CellAggregate {
            n,
            q,
            replicas: in_cell.len(),
            terminated: terminated.len(),
            median_time_s: median(&times),
            mean_ca: mean(terminated.iter().filter_map(|r| r.ca)),
            mean_cag: mean(terminated.iter().filter_map(|r| r.cag)),
            mean_pdr: mean(terminated.iter().filter_map(|r| r.pdr)),
        }
    }

    pub fn aggregates(&self) -> Vec<CellAggregate> {
        self.cells()
            .into_iter()
            .map(|(n, q)| self.aggregate_cell(n, q))
            .collect()
    }

    /// Mean PDR of terminated single-unknown replicas, bucketed by the true
    /// weight of the unknown criterion.
    pub fn pdr_by_weight_bucket(&self) -> [Option<f64>; 3] {
        let mut out = [None, None, None];
        for bucket in 0..3 {
            out[bucket] = mean(
                self.records
                    .iter()
                    .filter(|r| r.terminated() && r.q == 1)
                    .filter_map(|r| match (r.unknown_weight, r.pdr) {
                        (Some(w), Some(p)) if weight_bucket(w, r.n) == bucket => Some(p),
                        _ => None,
                    }),
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(ReplicaRecord::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.to_csv_row());
            out.push('\n');
        }
        out
    }
}
