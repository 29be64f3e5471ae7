//! Deterministic enumeration of the three output label spaces.
//!
//! Each case study quantizes its candidate configurations into an ordered
//! table; the position of an entry is its label id. The orderings below are
//! fixed so that ids are stable across runs and machines:
//!
//! - case 1: (row exponent asc, col exponent asc, dataflow asc)
//! - case 2: lexicographic over (ifmap, filter, ofmap) sizes
//! - case 3: id = perm_rank * 3^x + sum_i code(dataflow_i) * 3^i, with
//!   permutations ranked lexicographically

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ArrayConfig, ArrayShape, BufferSizes, Platform, Schedule, DATAFLOWS};

/// Which case study a table (or dataset) belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum CaseId {
    Case1,
    Case2,
    Case3,
}

impl CaseId {
    pub fn number(self) -> u8 {
        match self {
            CaseId::Case1 => 1,
            CaseId::Case2 => 2,
            CaseId::Case3 => 3,
        }
    }
}

impl From<CaseId> for u8 {
    fn from(c: CaseId) -> u8 {
        c.number()
    }
}

impl TryFrom<u8> for CaseId {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(CaseId::Case1),
            2 => Ok(CaseId::Case2),
            3 => Ok(CaseId::Case3),
            other => Err(Error::Param(format!("unknown case id {other}"))),
        }
    }
}

impl std::fmt::Display for CaseId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Parameters a table was generated from; regeneration from identical
/// parameters yields an identical table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableParams {
    Case1 { min_exp: u32, max_mac_exp: u32 },
    Case2 { min_kb: u64, max_kb: u64, step_kb: u64 },
    Case3 { platform: Platform },
}

/// One enumerated configuration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelEntry {
    Array(ArrayConfig),
    Buffers(BufferSizes),
    Schedule(Schedule),
}

impl LabelEntry {
    pub fn as_array(&self) -> Option<&ArrayConfig> {
        match self {
            LabelEntry::Array(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_buffers(&self) -> Option<&BufferSizes> {
        match self {
            LabelEntry::Buffers(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_schedule(&self) -> Option<&Schedule> {
        match self {
            LabelEntry::Schedule(s) => Some(s),
            _ => None,
        }
    }
}

impl std::fmt::Display for LabelEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabelEntry::Array(c) => write!(f, "{c}"),
            LabelEntry::Buffers(b) => write!(f, "{b}"),
            LabelEntry::Schedule(s) => write!(f, "{s}"),
        }
    }
}

/// A deterministic, bijective enumeration of one output space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelTable {
    pub case: CaseId,
    pub params: TableParams,
    pub entries: Vec<LabelEntry>,
}

impl LabelTable {
    /// All array configs with `rows = 2^a`, `cols = 2^b`, `a, b >= min_exp`,
    /// `a + b <= max_mac_exp`, crossed with the three dataflows.
    pub fn case1(min_exp: u32, max_mac_exp: u32) -> Result<Self> {
        if min_exp < 1 {
            return Err(Error::Param(format!("min_exp must be >= 1, got {min_exp}")));
        }
        if 2 * min_exp > max_mac_exp {
            return Err(Error::Param(format!(
                "2*min_exp ({}) exceeds max_mac_exp ({max_mac_exp})",
                2 * min_exp
            )));
        }
        let mut entries = Vec::new();
        for a in min_exp..=max_mac_exp - min_exp {
            for b in min_exp..=max_mac_exp - a {
                let shape = ArrayShape::new(1 << a, 1 << b)?;
                for df in DATAFLOWS {
                    entries.push(LabelEntry::Array(ArrayConfig::new(shape, df)));
                }
            }
        }
        Ok(Self {
            case: CaseId::Case1,
            params: TableParams::Case1 { min_exp, max_mac_exp },
            entries,
        })
    }

    /// The Cartesian cube of buffer sizes `{min..max step}` for
    /// (ifmap, filter, ofmap), ifmap outermost.
    pub fn case2(min_kb: u64, max_kb: u64, step_kb: u64) -> Result<Self> {
        if min_kb < 1 {
            return Err(Error::Param(format!("min_kb must be >= 1, got {min_kb}")));
        }
        if max_kb < min_kb {
            return Err(Error::Param(format!("max_kb ({max_kb}) below min_kb ({min_kb})")));
        }
        if step_kb < 1 || (max_kb - min_kb) % step_kb != 0 {
            return Err(Error::Param(format!(
                "step_kb ({step_kb}) must divide max_kb - min_kb ({})",
                max_kb - min_kb
            )));
        }
        let sizes: Vec<u64> = (min_kb..=max_kb).step_by(step_kb as usize).collect();
        let mut entries = Vec::with_capacity(sizes.len().pow(3));
        for &ifmap in &sizes {
            for &filter in &sizes {
                for &ofmap in &sizes {
                    entries.push(LabelEntry::Buffers(BufferSizes::new(ifmap, filter, ofmap)?));
                }
            }
        }
        Ok(Self {
            case: CaseId::Case2,
            params: TableParams::Case2 { min_kb, max_kb, step_kb },
            entries,
        })
    }

    /// All (assignment permutation, per-unit dataflow tuple) pairs:
    /// 3^x * x! entries.
    pub fn case3(platform: &Platform) -> Result<Self> {
        let x = platform.x();
        let combos = 3u64.pow(x as u32);
        let mut entries = Vec::new();
        for perm in lexicographic_permutations(x) {
            for t in 0..combos {
                let dataflows = dataflow_tuple(t, x);
                entries.push(LabelEntry::Schedule(Schedule::new(perm.clone(), dataflows)?));
            }
        }
        Ok(Self {
            case: CaseId::Case3,
            params: TableParams::Case3 { platform: platform.clone() },
            entries,
        })
    }

    pub fn from_params(params: &TableParams) -> Result<Self> {
        match params {
            TableParams::Case1 { min_exp, max_mac_exp } => Self::case1(*min_exp, *max_mac_exp),
            TableParams::Case2 { min_kb, max_kb, step_kb } => {
                Self::case2(*min_kb, *max_kb, *step_kb)
            }
            TableParams::Case3 { platform } => Self::case3(platform),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, id: usize) -> Option<&LabelEntry> {
        self.entries.get(id)
    }

    /// Reverse lookup: the id of an entry, if present.
    pub fn id_of(&self, entry: &LabelEntry) -> Option<usize> {
        self.entries.iter().position(|e| e == entry)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("label table serialization cannot fail")
    }

    /// Parses a table and checks it against regeneration from its own
    /// parameters, rejecting hand-edited or corrupted files.
    pub fn from_json(text: &str) -> Result<Self> {
        let table: LabelTable = serde_json::from_str(text)
            .map_err(|e| Error::Data { line: None, msg: format!("bad label table JSON: {e}") })?;
        let regen = Self::from_params(&table.params)?;
        if regen.case != table.case {
            return Err(Error::Data {
                line: None,
                msg: format!(
                    "label table params belong to case {}, file claims case {}",
                    regen.case, table.case
                ),
            });
        }
        if regen.entries != table.entries {
            return Err(Error::Data {
                line: None,
                msg: "label table entries do not match regeneration from params".into(),
            });
        }
        Ok(table)
    }
}

/// Permutations of `0..x` in lexicographic order.
fn lexicographic_permutations(x: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(x);
    let mut used = vec![false; x];
    fn rec(x: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == x {
            out.push(current.clone());
            return;
        }
        for i in 0..x {
            if !used[i] {
                used[i] = true;
                current.push(i);
                rec(x, current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(x, &mut current, &mut used, &mut out);
    out
}

/// Decodes the dataflow tuple whose id-contribution is `t`: unit `i` takes
/// digit `i` of `t` in base 3, unit 0 being the least significant.
fn dataflow_tuple(t: u64, x: usize) -> Vec<crate::types::Dataflow> {
    (0..x)
        .map(|i| {
            let code = (t / 3u64.pow(i as u32)) % 3;
            crate::types::Dataflow::from_code(code).unwrap()
        })
        .collect()
}
