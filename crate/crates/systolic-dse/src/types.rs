//! Domain types shared by every stage of the pipeline.
//!
//! All types validate their invariants at construction and are immutable
//! afterwards, so values can be shared freely across threads.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One GEMM instance: C[m x n] = A[m x k] * B[k x n].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GemmWorkload {
    pub m: u64,
    pub n: u64,
    pub k: u64,
}

impl GemmWorkload {
    pub fn new(m: u64, n: u64, k: u64) -> Result<Self> {
        if m < 1 || n < 1 || k < 1 {
            return Err(Error::Param(format!(
                "workload dimensions must be >= 1, got ({m}, {n}, {k})"
            )));
        }
        Ok(Self { m, n, k })
    }
}

impl fmt::Display for GemmWorkload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.m, self.n, self.k)
    }
}

/// Mapping strategy: which operand stays resident in the array.
///
/// The numeric codes 0/1/2 (OS/WS/IS) are fixed and used wherever a
/// dataflow is serialized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dataflow {
    OutputStationary,
    WeightStationary,
    InputStationary,
}

pub const DATAFLOWS: [Dataflow; 3] = [
    Dataflow::OutputStationary,
    Dataflow::WeightStationary,
    Dataflow::InputStationary,
];

impl Dataflow {
    pub fn code(self) -> u8 {
        match self {
            Dataflow::OutputStationary => 0,
            Dataflow::WeightStationary => 1,
            Dataflow::InputStationary => 2,
        }
    }

    pub fn from_code(code: u64) -> Result<Self> {
        match code {
            0 => Ok(Dataflow::OutputStationary),
            1 => Ok(Dataflow::WeightStationary),
            2 => Ok(Dataflow::InputStationary),
            other => Err(Error::Param(format!("unknown dataflow code {other}"))),
        }
    }
}

impl fmt::Display for Dataflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dataflow::OutputStationary => "OS",
            Dataflow::WeightStationary => "WS",
            Dataflow::InputStationary => "IS",
        })
    }
}

impl FromStr for Dataflow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "OS" | "os" | "0" => Ok(Dataflow::OutputStationary),
            "WS" | "ws" | "1" => Ok(Dataflow::WeightStationary),
            "IS" | "is" | "2" => Ok(Dataflow::InputStationary),
            other => Err(Error::Param(format!("unknown dataflow {other:?}"))),
        }
    }
}

impl Serialize for Dataflow {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.code())
    }
}

impl<'de> Deserialize<'de> for Dataflow {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let code = u64::deserialize(deserializer)?;
        Dataflow::from_code(code).map_err(D::Error::custom)
    }
}

/// Systolic array dimensions. Rows and cols are exact powers of two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArrayShape {
    pub rows: u64,
    pub cols: u64,
}

impl ArrayShape {
    pub fn new(rows: u64, cols: u64) -> Result<Self> {
        if rows < 1 || !rows.is_power_of_two() || cols < 1 || !cols.is_power_of_two() {
            return Err(Error::Param(format!(
                "array dimensions must be powers of two, got {rows}x{cols}"
            )));
        }
        Ok(Self { rows, cols })
    }

    pub fn macs(&self) -> u64 {
        self.rows * self.cols
    }

    /// log2 of rows; exact because rows is a power of two.
    pub fn row_exp(&self) -> u32 {
        self.rows.trailing_zeros()
    }

    pub fn col_exp(&self) -> u32 {
        self.cols.trailing_zeros()
    }
}

impl fmt::Display for ArrayShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// Array shape plus mapping strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub rows: u64,
    pub cols: u64,
    pub dataflow: Dataflow,
}

impl ArrayConfig {
    pub fn new(shape: ArrayShape, dataflow: Dataflow) -> Self {
        Self { rows: shape.rows, cols: shape.cols, dataflow }
    }

    pub fn shape(&self) -> ArrayShape {
        ArrayShape { rows: self.rows, cols: self.cols }
    }
}

impl fmt::Display for ArrayConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} {}", self.rows, self.cols, self.dataflow)
    }
}

/// Capacities of the three operand buffers, in kilobytes (1 KB = 1024 B).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BufferSizes {
    pub ifmap_kb: u64,
    pub filter_kb: u64,
    pub ofmap_kb: u64,
}

impl BufferSizes {
    pub fn new(ifmap_kb: u64, filter_kb: u64, ofmap_kb: u64) -> Result<Self> {
        if ifmap_kb < 1 || filter_kb < 1 || ofmap_kb < 1 {
            return Err(Error::Param(format!(
                "buffer sizes must be >= 1 KB, got ({ifmap_kb}, {filter_kb}, {ofmap_kb})"
            )));
        }
        Ok(Self { ifmap_kb, filter_kb, ofmap_kb })
    }

    pub fn total_kb(&self) -> u64 {
        self.ifmap_kb + self.filter_kb + self.ofmap_kb
    }
}

impl fmt::Display for BufferSizes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ifmap={}KB filter={}KB ofmap={}KB",
            self.ifmap_kb, self.filter_kb, self.ofmap_kb
        )
    }
}

/// One compute unit: either a monolithic array (`count` = 1) or a
/// distributed collection of `count` identical sub-arrays.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ComputeUnit {
    pub count: u64,
    pub shape: ArrayShape,
}

impl ComputeUnit {
    pub fn new(count: u64, shape: ArrayShape) -> Result<Self> {
        if count < 1 {
            return Err(Error::Param(format!("unit count must be >= 1, got {count}")));
        }
        Ok(Self { count, shape })
    }

    pub fn monolithic(shape: ArrayShape) -> Self {
        Self { count: 1, shape }
    }
}

// Wire form is flat: {"count": 1, "rows": 128, "cols": 128}.
#[derive(Serialize, Deserialize)]
struct ComputeUnitRepr {
    count: u64,
    rows: u64,
    cols: u64,
}

impl Serialize for ComputeUnit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ComputeUnitRepr { count: self.count, rows: self.shape.rows, cols: self.shape.cols }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComputeUnit {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ComputeUnitRepr::deserialize(deserializer)?;
        let shape = ArrayShape::new(repr.rows, repr.cols).map_err(D::Error::custom)?;
        ComputeUnit::new(repr.count, shape).map_err(D::Error::custom)
    }
}

/// A fixed, ordered collection of compute units. The unit order is
/// significant: schedule ids are defined relative to it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Platform {
    pub units: Vec<ComputeUnit>,
}

impl Platform {
    pub fn new(units: Vec<ComputeUnit>) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::Param("platform needs at least one compute unit".into()));
        }
        Ok(Self { units })
    }

    /// Number of compute units (and of workloads per scheduling query).
    pub fn x(&self) -> usize {
        self.units.len()
    }

    /// Four monolithic units heterogeneous in both size and aspect ratio.
    pub fn default_four_units() -> Self {
        let shapes = [(128, 128), (32, 32), (256, 16), (16, 256)];
        Self {
            units: shapes
                .iter()
                .map(|&(r, c)| ComputeUnit::monolithic(ArrayShape::new(r, c).unwrap()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("platform serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Platform = serde_json::from_str(text)
            .map_err(|e| Error::Data { line: None, msg: format!("bad platform JSON: {e}") })?;
        if p.units.is_empty() {
            return Err(Error::Param("platform needs at least one compute unit".into()));
        }
        Ok(p)
    }
}

/// An assignment of workloads to units plus a dataflow choice per unit.
///
/// `assignment[i]` is the unit index workload `i` runs on and is a
/// permutation of `0..x`; `dataflows[u]` is the dataflow unit `u` uses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schedule {
    pub assignment: Vec<usize>,
    pub dataflows: Vec<Dataflow>,
}

impl Schedule {
    pub fn new(assignment: Vec<usize>, dataflows: Vec<Dataflow>) -> Result<Self> {
        let x = assignment.len();
        if dataflows.len() != x {
            return Err(Error::Shape(format!(
                "schedule has {x} assignments but {} dataflows",
                dataflows.len()
            )));
        }
        let mut seen = vec![false; x];
        for &u in &assignment {
            if u >= x || seen[u] {
                return Err(Error::Param(format!(
                    "assignment {assignment:?} is not a permutation of 0..{x}"
                )));
            }
            seen[u] = true;
        }
        Ok(Self { assignment, dataflows })
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dfs: Vec<String> = self.dataflows.iter().map(|d| d.to_string()).collect();
        write!(f, "assignment={:?} dataflows=[{}]", self.assignment, dfs.join(","))
    }
}
