//! Prediction quality against oracle labels: exact-match accuracy and
//! geometric-mean normalized performance (optimal cost / predicted cost).

use serde::{Deserialize, Serialize};

use crate::cost;
use crate::error::{Error, Result};
use crate::labels::LabelTable;
use crate::mem::{self, Case2Query};
use crate::oracle::{self, Case1Query};
use crate::sched;
use crate::types::{GemmWorkload, Platform};

/// Aggregate evaluation results.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub count: usize,
    pub accuracy: f64,
    pub geomean: f64,
    pub infeasible_rate: f64,
    /// Per-sample optimal/predicted cost ratios, in query order.
    #[serde(skip)]
    pub ratios: Vec<f64>,
}

/// Exact-match fraction.
pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    if predictions.len() != labels.len() || predictions.is_empty() {
        return Err(Error::Shape(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let matches = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(matches as f64 / predictions.len() as f64)
}

/// Geometric mean: exp of the mean log, accumulated in sample order.
pub fn geomean(ratios: &[f64]) -> f64 {
    let sum: f64 = ratios.iter().map(|r| r.ln()).sum();
    (sum / ratios.len() as f64).exp()
}

/// The queries an evaluation batch was scored against.
pub enum QueryBatch<'a> {
    Case1(&'a [Case1Query]),
    Case2(&'a [Case2Query]),
    Case3 { queries: &'a [Vec<GemmWorkload>], platform: &'a Platform },
}

impl QueryBatch<'_> {
    fn len(&self) -> usize {
        match self {
            QueryBatch::Case1(q) => q.len(),
            QueryBatch::Case2(q) => q.len(),
            QueryBatch::Case3 { queries, .. } => queries.len(),
        }
    }
}

/// Scores predictions by cost ratio to the optimum: runtime for case 1,
/// total runtime (compute + stalls) for case 2, critical path for case 3.
///
/// Labels are re-checked against a fresh oracle run; a label whose cost is
/// not optimal fails the evaluation (stale dataset). Predictions violating
/// a query constraint (MAC cap, capacity budget) are still cost-scored and
/// counted in `infeasible_rate`.
pub fn normalized_performance(
    batch: &QueryBatch,
    predictions: &[usize],
    labels: &[usize],
    table: &LabelTable,
) -> Result<EvalReport> {
    let count = batch.len();
    if predictions.len() != count || labels.len() != count || count == 0 {
        return Err(Error::Shape(format!(
            "{count} queries, {} predictions, {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut ratios = Vec::with_capacity(count);
    let mut infeasible = 0usize;
    for i in 0..count {
        let entry = |id: usize| {
            table.lookup(id).ok_or_else(|| Error::Data {
                line: None,
                msg: format!("id {id} out of range for a {}-entry table", table.len()),
            })
        };
        let (opt_cost, pred_cost, pred_feasible) = match batch {
            QueryBatch::Case1(queries) => {
                let q = &queries[i];
                let run = |id: usize| -> Result<u64> {
                    let cfg = entry(id)?.as_array().ok_or_else(|| Error::Data {
                        line: None,
                        msg: format!("entry {id} is not an array config"),
                    })?;
                    Ok(cost::compute_runtime(q.workload, cfg.shape(), cfg.dataflow))
                };
                let label_cost = run(labels[i])?;
                let opt_id = oracle::best_array_config(q, table)?;
                if run(opt_id)? != label_cost {
                    return Err(stale_label(i, labels[i], opt_id));
                }
                let feasible =
                    entry(predictions[i])?.as_array().unwrap().shape().macs() <= 1 << q.mac_exp;
                (label_cost, run(predictions[i])?, feasible)
            }
            QueryBatch::Case2(queries) => {
                let q = &queries[i];
                let run = |id: usize| -> Result<(u64, u64)> {
                    let sizes = entry(id)?.as_buffers().ok_or_else(|| Error::Data {
                        line: None,
                        msg: format!("entry {id} is not a buffer sizing"),
                    })?;
                    let r = mem::total_stalls(q, *sizes);
                    Ok((r.total_runtime, sizes.total_kb()))
                };
                let (label_cost, label_kb) = run(labels[i])?;
                let opt_id = oracle::best_buffer_sizes(q, table)?;
                let (opt_cost, opt_kb) = run(opt_id)?;
                if (opt_cost, opt_kb) != (label_cost, label_kb) {
                    return Err(stale_label(i, labels[i], opt_id));
                }
                let (pred_cost, pred_kb) = run(predictions[i])?;
                (label_cost, pred_cost, pred_kb <= q.budget_kb)
            }
            QueryBatch::Case3 { queries, platform } => {
                let workloads = &queries[i];
                let run = |id: usize| -> Result<sched::ScheduleCost> {
                    let s = entry(id)?.as_schedule().ok_or_else(|| Error::Data {
                        line: None,
                        msg: format!("entry {id} is not a schedule"),
                    })?;
                    sched::schedule_cost(workloads, platform, s)
                };
                let label_cost = run(labels[i])?;
                let opt_id = oracle::best_schedule(workloads, platform, table)?;
                let opt = run(opt_id)?;
                if (opt.critical_path, opt.cumulative)
                    != (label_cost.critical_path, label_cost.cumulative)
                {
                    return Err(stale_label(i, labels[i], opt_id));
                }
                (label_cost.critical_path, run(predictions[i])?.critical_path, true)
            }
        };
        if !pred_feasible {
            infeasible += 1;
        }
        ratios.push(opt_cost as f64 / pred_cost as f64);
    }
    Ok(EvalReport {
        count,
        accuracy: accuracy(predictions, labels)?,
        geomean: geomean(&ratios),
        infeasible_rate: infeasible as f64 / count as f64,
        ratios,
    })
}

fn stale_label(index: usize, label: usize, optimal: usize) -> Error {
    Error::Data {
        line: None,
        msg: format!(
            "sample {index}: label {label} is not cost-optimal (oracle found {optimal}); \
             the dataset is stale for this table"
        ),
    }
}
