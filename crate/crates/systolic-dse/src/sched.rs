//! Runtime model for assigning GEMM workloads to heterogeneous compute
//! units, one workload per unit, with a per-unit dataflow choice.

use crate::cost;
use crate::error::{Error, Result};
use crate::types::{ComputeUnit, Dataflow, GemmWorkload, Platform, Schedule};

/// Cost of one complete schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleCost {
    pub per_workload_cycles: Vec<u64>,
    /// Runtime of the slowest workload; the primary objective.
    pub critical_path: u64,
    /// Sum over all workloads; the tie-breaking objective.
    pub cumulative: u64,
}

/// Cycles one workload takes on one unit. A distributed unit splits the M
/// dimension into `count` chunks of `ceil(M / count)` run in parallel on
/// identical sub-arrays; the last chunk is charged the full chunk size.
pub fn unit_runtime(w: GemmWorkload, u: ComputeUnit, d: Dataflow) -> u64 {
    if u.count == 1 {
        return cost::compute_runtime(w, u.shape, d);
    }
    let chunk = GemmWorkload {
        m: w.m.div_ceil(u.count),
        ..w
    };
    cost::compute_runtime(chunk, u.shape, d)
}

/// Evaluates one schedule: workload `i` runs on unit `assignment[i]` with
/// that unit's dataflow.
pub fn schedule_cost(
    workloads: &[GemmWorkload],
    platform: &Platform,
    s: &Schedule,
) -> Result<ScheduleCost> {
    let x = platform.x();
    if workloads.len() != x || s.assignment.len() != x || s.dataflows.len() != x {
        return Err(Error::Shape(format!(
            "{} workloads, {} units, {} assignments, {} dataflows",
            workloads.len(),
            x,
            s.assignment.len(),
            s.dataflows.len()
        )));
    }
    let per_workload_cycles: Vec<u64> = workloads
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let unit = s.assignment[i];
            unit_runtime(w, platform.units[unit], s.dataflows[unit])
        })
        .collect();
    let critical_path = *per_workload_cycles.iter().max().expect("x >= 1");
    let cumulative = per_workload_cycles.iter().sum();
    Ok(ScheduleCost {
        per_workload_cycles,
        critical_path,
        cumulative,
    })
}
