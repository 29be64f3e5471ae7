//! Exhaustive-search label generators: ground truth the recommender
//! learns to predict.
//!
//! Every call scans its entire label table fresh; nothing is memoized.
//! Ties resolve to the smallest id, which together with the fixed table
//! orderings makes labels reproducible everywhere.

use crate::cost;
use crate::error::{Error, Result};
use crate::labels::{CaseId, LabelTable};
use crate::mem::{self, Case2Query};
use crate::sched;
use crate::types::{GemmWorkload, Platform, DATAFLOWS};

/// One case-1 query: a workload plus the MAC budget exponent
/// (at most 2^mac_exp MAC units).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Case1Query {
    pub workload: GemmWorkload,
    pub mac_exp: u32,
}

fn expect_case(table: &LabelTable, case: CaseId) -> Result<()> {
    if table.case != case {
        return Err(Error::Param(format!(
            "expected a case-{case} label table, got case {}",
            table.case
        )));
    }
    Ok(())
}

/// Fastest feasible array/dataflow configuration: minimizes compute
/// runtime among entries with at most 2^mac_exp MACs.
pub fn best_array_config(q: &Case1Query, table: &LabelTable) -> Result<usize> {
    expect_case(table, CaseId::Case1)?;
    let cap = 1u64 << q.mac_exp;
    let mut best: Option<(u64, usize)> = None;
    for (id, entry) in table.entries.iter().enumerate() {
        let cfg = entry
            .as_array()
            .ok_or_else(|| Error::Param(format!("entry {id} is not an array config")))?;
        if cfg.shape().macs() > cap {
            continue;
        }
        let runtime = cost::compute_runtime(q.workload, cfg.shape(), cfg.dataflow);
        if best.map_or(true, |(b, _)| runtime < b) {
            best = Some((runtime, id));
        }
    }
    best.map(|(_, id)| id).ok_or_else(|| {
        Error::Infeasible(format!(
            "no array configuration fits {} MAC units",
            1u64 << q.mac_exp
        ))
    })
}

/// Cheapest feasible buffer sizing: minimizes (total stalls, total KB, id)
/// lexicographically among entries within the capacity budget.
pub fn best_buffer_sizes(q: &Case2Query, table: &LabelTable) -> Result<usize> {
    expect_case(table, CaseId::Case2)?;
    let plan = cost::fold_geometry(q.workload, q.array.shape(), q.array.dataflow);
    let mut best: Option<(u64, u64, usize)> = None;
    for (id, entry) in table.entries.iter().enumerate() {
        let sizes = entry
            .as_buffers()
            .ok_or_else(|| Error::Param(format!("entry {id} is not a buffer sizing")))?;
        if sizes.total_kb() > q.budget_kb {
            continue;
        }
        let stalls = mem::operand_stalls(
            plan.ifmap_bytes,
            sizes.ifmap_kb * mem::KB,
            q.bandwidth,
            plan.fold_cycles,
            plan.fold_count,
        ) + mem::operand_stalls(
            plan.filter_bytes,
            sizes.filter_kb * mem::KB,
            q.bandwidth,
            plan.fold_cycles,
            plan.fold_count,
        ) + mem::operand_stalls(
            plan.ofmap_bytes,
            sizes.ofmap_kb * mem::KB,
            q.bandwidth,
            plan.fold_cycles,
            plan.fold_count,
        );
        let key = (stalls, sizes.total_kb());
        if best.map_or(true, |(bs, bk, _)| key < (bs, bk)) {
            best = Some((key.0, key.1, id));
        }
    }
    best.map(|(_, _, id)| id).ok_or_else(|| {
        Error::Infeasible(format!("no buffer sizing fits within {} KB", q.budget_kb))
    })
}

/// Best schedule: minimizes (critical path, cumulative runtime, id)
/// lexicographically over all 3^x * x! table entries.
pub fn best_schedule(
    workloads: &[GemmWorkload],
    platform: &Platform,
    table: &LabelTable,
) -> Result<usize> {
    expect_case(table, CaseId::Case3)?;
    let x = platform.x();
    if workloads.len() != x {
        return Err(Error::Shape(format!(
            "{} workloads for a {x}-unit platform",
            workloads.len()
        )));
    }
    // All (workload, unit, dataflow) runtimes, computed once per call.
    let runtime = |w: usize, u: usize, d: usize| -> u64 {
        sched::unit_runtime(workloads[w], platform.units[u], DATAFLOWS[d])
    };
    let mut cycles = vec![0u64; x * x * 3];
    for w in 0..x {
        for u in 0..x {
            for d in 0..3 {
                cycles[(w * x + u) * 3 + d] = runtime(w, u, d);
            }
        }
    }
    let mut best: Option<(u64, u64, usize)> = None;
    for (id, entry) in table.entries.iter().enumerate() {
        let s = entry
            .as_schedule()
            .ok_or_else(|| Error::Param(format!("entry {id} is not a schedule")))?;
        let mut critical = 0u64;
        let mut cumulative = 0u64;
        for (w, &u) in s.assignment.iter().enumerate() {
            let c = cycles[(w * x + u) * 3 + s.dataflows[u].code() as usize];
            critical = critical.max(c);
            cumulative += c;
        }
        if best.map_or(true, |(bc, bs, _)| (critical, cumulative) < (bc, bs)) {
            best = Some((critical, cumulative, id));
        }
    }
    Ok(best.expect("case-3 tables are never empty").2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ArrayConfig, ArrayShape, ComputeUnit, Dataflow};

    fn w(m: u64, n: u64, k: u64) -> GemmWorkload {
        GemmWorkload::new(m, n, k).unwrap()
    }

    fn default_case1() -> LabelTable {
        LabelTable::case1(4, 18).unwrap()
    }

    #[test]
    fn case1_small_cap_picks_ws() {
        let table = default_case1();
        let q = Case1Query { workload: w(1000, 32, 32), mac_exp: 8 };
        let id = best_array_config(&q, &table).unwrap();
        let cfg = table.entries[id].as_array().unwrap();
        assert_eq!((cfg.rows, cfg.cols, cfg.dataflow), (16, 16, Dataflow::WeightStationary));
        assert_eq!(cost::compute_runtime(q.workload, cfg.shape(), cfg.dataflow), 4184);
    }

    #[test]
    fn case1_all_dataflow_tie_resolves_to_os() {
        // m = n = k makes all three dataflows cost-identical on a square
        // array, and mac_exp 8 leaves 16x16 as the only feasible shape
        let table = default_case1();
        let q = Case1Query { workload: w(32, 32, 32), mac_exp: 8 };
        let id = best_array_config(&q, &table).unwrap();
        assert_eq!(table.entries[id].as_array().unwrap().dataflow, Dataflow::OutputStationary);
    }

    #[test]
    fn case1_beats_every_feasible_entry() {
        let table = default_case1();
        let q = Case1Query { workload: w(32, 32, 16), mac_exp: 10 };
        let id = best_array_config(&q, &table).unwrap();
        let best_cfg = table.entries[id].as_array().unwrap();
        let best_rt = cost::compute_runtime(q.workload, best_cfg.shape(), best_cfg.dataflow);
        for entry in &table.entries {
            let cfg = entry.as_array().unwrap();
            if cfg.shape().macs() <= 1 << q.mac_exp {
                assert!(cost::compute_runtime(q.workload, cfg.shape(), cfg.dataflow) >= best_rt);
            }
        }
    }

    #[test]
    fn case1_cap_below_table_minimum_is_infeasible() {
        let table = default_case1();
        let q = Case1Query { workload: w(8, 8, 8), mac_exp: 7 };
        assert!(matches!(best_array_config(&q, &table), Err(Error::Infeasible(_))));
    }

    fn case2_query() -> Case2Query {
        Case2Query {
            workload: w(32, 32, 16),
            array: ArrayConfig::new(ArrayShape::new(32, 32).unwrap(), Dataflow::OutputStationary),
            bandwidth: 50,
            budget_kb: 3000,
        }
    }

    #[test]
    fn case2_uniform_stalls_pick_smallest_capacity() {
        // every sizing double-buffers this tiny workload, so stalls tie at
        // 43 across the whole grid and the 300 KB entry wins
        let table = LabelTable::case2(100, 1000, 100).unwrap();
        let id = best_buffer_sizes(&case2_query(), &table).unwrap();
        assert_eq!(id, 0);
        assert_eq!(table.entries[0].as_buffers().unwrap().total_kb(), 300);
    }

    #[test]
    fn case2_budget_below_grid_minimum_is_infeasible() {
        let table = LabelTable::case2(100, 1000, 100).unwrap();
        let q = Case2Query { budget_kb: 299, ..case2_query() };
        assert!(matches!(best_buffer_sizes(&q, &table), Err(Error::Infeasible(_))));
        let q = Case2Query { budget_kb: 300, ..case2_query() };
        assert_eq!(best_buffer_sizes(&q, &table).unwrap(), 0);
    }

    #[test]
    fn case2_no_feasible_entry_beats_returned_one() {
        let table = LabelTable::case2(100, 1000, 100).unwrap();
        let q = Case2Query {
            workload: w(4000, 700, 90),
            bandwidth: 3,
            budget_kb: 1400,
            ..case2_query()
        };
        let id = best_buffer_sizes(&q, &table).unwrap();
        let best = mem::total_stalls(&q, *table.entries[id].as_buffers().unwrap());
        let best_kb = table.entries[id].as_buffers().unwrap().total_kb();
        for entry in &table.entries {
            let sizes = entry.as_buffers().unwrap();
            if sizes.total_kb() > q.budget_kb {
                continue;
            }
            let r = mem::total_stalls(&q, *sizes);
            assert!((r.total_stalls, sizes.total_kb()) >= (best.total_stalls, best_kb));
        }
    }

    fn two_unit_platform() -> Platform {
        Platform::new(vec![
            ComputeUnit::monolithic(ArrayShape::new(32, 32).unwrap()),
            ComputeUnit::monolithic(ArrayShape::new(16, 16).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn case3_enumerated_optimum() {
        // identity assignment with WS on both units: the large workload
        // fits the 32x32 array in one fold (critical path 1094)
        let platform = two_unit_platform();
        let table = LabelTable::case3(&platform).unwrap();
        let workloads = [w(1000, 32, 32), w(32, 32, 16)];
        let id = best_schedule(&workloads, &platform, &table).unwrap();
        assert_eq!(id, 4);
        let s = table.entries[id].as_schedule().unwrap();
        assert_eq!(s.assignment, vec![0, 1]);
        assert_eq!(s.dataflows, vec![Dataflow::WeightStationary; 2]);
        let cost = sched::schedule_cost(&workloads, &platform, s).unwrap();
        assert_eq!(cost.critical_path, 1094);
        assert_eq!(cost.cumulative, 1250);
    }

    #[test]
    fn case3_symmetric_instance_resolves_to_smallest_id() {
        let platform = Platform::new(vec![
            ComputeUnit::monolithic(ArrayShape::new(16, 16).unwrap());
            2
        ])
        .unwrap();
        let table = LabelTable::case3(&platform).unwrap();
        let workloads = [w(32, 32, 16), w(32, 32, 16)];
        let id = best_schedule(&workloads, &platform, &table).unwrap();
        // WS/WS at the identity permutation is the first entry reaching
        // the minimal (critical, cumulative) pair
        assert_eq!(id, 4);
    }

    #[test]
    fn case3_rescan_confirms_optimality() {
        let platform = two_unit_platform();
        let table = LabelTable::case3(&platform).unwrap();
        let workloads = [w(777, 450, 33), w(5, 900, 120)];
        let id = best_schedule(&workloads, &platform, &table).unwrap();
        let s = table.entries[id].as_schedule().unwrap();
        let best = sched::schedule_cost(&workloads, &platform, s).unwrap();
        for entry in &table.entries {
            let c = sched::schedule_cost(&workloads, &platform, entry.as_schedule().unwrap())
                .unwrap();
            assert!((c.critical_path, c.cumulative) >= (best.critical_path, best.cumulative));
        }
    }

    #[test]
    fn case3_length_mismatch_is_rejected() {
        let platform = two_unit_platform();
        let table = LabelTable::case3(&platform).unwrap();
        assert!(matches!(
            best_schedule(&[w(1, 1, 1)], &platform, &table),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn wrong_table_case_is_rejected() {
        let q = Case1Query { workload: w(1, 1, 1), mac_exp: 10 };
        let case2 = LabelTable::case2(100, 200, 100).unwrap();
        assert!(best_array_config(&q, &case2).is_err());
    }

    #[test]
    fn oracle_is_deterministic() {
        let table = default_case1();
        let q = Case1Query { workload: w(977, 4411, 63), mac_exp: 14 };
        let a = best_array_config(&q, &table).unwrap();
        let b = best_array_config(&q, &table).unwrap();
        assert_eq!(a, b);
    }
}
