//! Stall model for the three SRAM operand buffers behind a shared,
//! bandwidth-limited external interface.
//!
//! Per operand, with `L = ceil(demand / bandwidth)` cycles to transfer one
//! fold's demand and `n = floor(capacity / demand)` whole demands the
//! buffer can hold:
//!
//! - `n >= 2` (double-buffered): the first fill costs `L`, later folds
//!   overlap with compute and only stall when the transfer outlasts the
//!   fold: `L + (fold_count - 1) * max(0, L - fold_cycles)`.
//! - `n == 1` (serialized): every fold waits for a full transfer:
//!   `fold_count * L`.
//! - `n == 0` (undersized): each fold refetches `ceil(demand / capacity)`
//!   times: `fold_count * L * ceil(demand / capacity)`.
//!
//! The output buffer drain is modeled symmetrically to the input fills.

use crate::cost;
use crate::types::{ArrayConfig, GemmWorkload};

pub const KB: u64 = 1024;

/// One case-2 query: a workload on a fixed array, a shared interface
/// bandwidth in bytes/cycle, and a total capacity budget in KB.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Case2Query {
    pub workload: GemmWorkload,
    pub array: ArrayConfig,
    pub bandwidth: u64,
    pub budget_kb: u64,
}

/// Per-buffer and total stall cycles for one buffer sizing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StallReport {
    pub ifmap_stalls: u64,
    pub filter_stalls: u64,
    pub ofmap_stalls: u64,
    pub total_stalls: u64,
    pub total_runtime: u64,
}

/// Stall cycles one operand contributes over the whole run.
pub fn operand_stalls(
    demand_bytes: u64,
    capacity_bytes: u64,
    bandwidth: u64,
    fold_cycles: u64,
    fold_count: u64,
) -> u64 {
    debug_assert!(demand_bytes >= 1 && capacity_bytes >= 1 && bandwidth >= 1 && fold_count >= 1);
    let transfer = demand_bytes.div_ceil(bandwidth);
    match capacity_bytes / demand_bytes {
        0 => fold_count * transfer * demand_bytes.div_ceil(capacity_bytes),
        1 => fold_count * transfer,
        _ => transfer + (fold_count - 1) * transfer.saturating_sub(fold_cycles),
    }
}

/// Evaluates one buffer sizing against a query: per-operand stalls plus
/// the resulting total runtime (compute + stalls).
pub fn total_stalls(q: &Case2Query, buffers: crate::types::BufferSizes) -> StallReport {
    let plan = cost::fold_geometry(q.workload, q.array.shape(), q.array.dataflow);
    let stalls_for = |demand: u64, capacity_kb: u64| {
        operand_stalls(demand, capacity_kb * KB, q.bandwidth, plan.fold_cycles, plan.fold_count)
    };
    let ifmap_stalls = stalls_for(plan.ifmap_bytes, buffers.ifmap_kb);
    let filter_stalls = stalls_for(plan.filter_bytes, buffers.filter_kb);
    let ofmap_stalls = stalls_for(plan.ofmap_bytes, buffers.ofmap_kb);
    let total = ifmap_stalls + filter_stalls + ofmap_stalls;
    StallReport {
        ifmap_stalls,
        filter_stalls,
        ofmap_stalls,
        total_stalls: total,
        total_runtime: plan.fold_count * plan.fold_cycles + total,
    }
}
