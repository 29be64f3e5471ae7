//! Compute-only runtime and utilization model for a monolithic systolic
//! array running one GEMM under a chosen dataflow.
//!
//! Each dataflow maps two workload dimensions spatially and streams the
//! third temporally:
//!
//! | dataflow | rows | cols | temporal | per-fold demand (ifmap, filter, ofmap) |
//! |----------|------|------|----------|----------------------------------------|
//! | OS       | M    | N    | K        | (R*K, K*C, R*C)                        |
//! | WS       | K    | N    | M        | (M*R, R*C, M*C)                        |
//! | IS       | K    | M    | N        | (R*C, R*N, C*N)                        |
//!
//! A fold is one pass of the array over a spatial tile; it costs the fill
//! and skew term `2R + C - 2` plus the temporal dimension. Partial folds
//! are charged the full fold, so runtime is an exact product of two
//! integers. Operand demands count one byte per element.

use crate::types::{ArrayShape, Dataflow, GemmWorkload};

/// Fold structure of one (workload, shape, dataflow) mapping: how many
/// passes the array makes, how long each takes, and the per-fold operand
/// traffic in bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FoldPlan {
    pub fold_count: u64,
    pub fold_cycles: u64,
    pub ifmap_bytes: u64,
    pub filter_bytes: u64,
    pub ofmap_bytes: u64,
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Decomposes the mapping into folds.
pub fn fold_geometry(w: GemmWorkload, s: ArrayShape, d: Dataflow) -> FoldPlan {
    let (r, c) = (s.rows, s.cols);
    let fill = 2 * r + c - 2;
    match d {
        Dataflow::OutputStationary => FoldPlan {
            fold_count: ceil_div(w.m, r) * ceil_div(w.n, c),
            fold_cycles: fill + w.k,
            ifmap_bytes: r * w.k,
            filter_bytes: w.k * c,
            ofmap_bytes: r * c,
        },
        Dataflow::WeightStationary => FoldPlan {
            fold_count: ceil_div(w.k, r) * ceil_div(w.n, c),
            fold_cycles: fill + w.m,
            ifmap_bytes: w.m * r,
            filter_bytes: r * c,
            ofmap_bytes: w.m * c,
        },
        Dataflow::InputStationary => FoldPlan {
            fold_count: ceil_div(w.k, r) * ceil_div(w.m, c),
            fold_cycles: fill + w.n,
            ifmap_bytes: r * c,
            filter_bytes: r * w.n,
            ofmap_bytes: c * w.n,
        },
    }
}

/// Total compute cycles, stalls ignored.
pub fn compute_runtime(w: GemmWorkload, s: ArrayShape, d: Dataflow) -> u64 {
    let plan = fold_geometry(w, s, d);
    plan.fold_count * plan.fold_cycles
}

/// Fraction of MAC slots doing useful work across the spatial tiling.
/// 1.0 exactly when both spatially mapped dimensions divide the array.
pub fn mapping_utilization(w: GemmWorkload, s: ArrayShape, d: Dataflow) -> f64 {
    let (r, c) = (s.rows, s.cols);
    let (rows_dim, cols_dim) = match d {
        Dataflow::OutputStationary => (w.m, w.n),
        Dataflow::WeightStationary => (w.k, w.n),
        Dataflow::InputStationary => (w.k, w.m),
    };
    let used = (rows_dim * cols_dim) as f64;
    let allocated = (ceil_div(rows_dim, r) * r * ceil_div(cols_dim, c) * c) as f64;
    used / allocated
}
