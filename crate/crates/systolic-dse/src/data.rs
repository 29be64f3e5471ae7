//! Workload sampling, dataset generation, CSV persistence, and feature
//! encoding.
//!
//! Generation is deterministic in (case, count, seed, params) and
//! independent of the number of worker threads: record `i` draws from its
//! own ChaCha stream `i` of the seeded generator, so records can be
//! produced in any order and are emitted sorted by index.
//!
//! CSV schemas (exact headers, LF line endings, UTF-8):
//!
//! - case 1: `m,n,k,mac_exp,label`
//! - case 2: `m,n,k,rows,cols,dataflow,bw,budget_kb,label`
//! - case 3: `m0,n0,k0,m1,n1,k1,...,label` (3 columns per workload)

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{CaseId, LabelTable, TableParams};
use crate::mem::Case2Query;
use crate::oracle::{self, Case1Query};
use crate::types::{ArrayConfig, GemmWorkload, Platform};

/// Upper bounds for uniform workload-dimension sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingRanges {
    pub m_max: u64,
    pub n_max: u64,
    pub k_max: u64,
}

impl Default for SamplingRanges {
    fn default() -> Self {
        Self { m_max: 100_000, n_max: 10_000, k_max: 1_000 }
    }
}

/// Draws one workload: each dimension uniform on 1..=max.
pub fn sample_workload<R: Rng>(rng: &mut R, ranges: &SamplingRanges) -> GemmWorkload {
    GemmWorkload {
        m: rng.gen_range(1..=ranges.m_max),
        n: rng.gen_range(1..=ranges.n_max),
        k: rng.gen_range(1..=ranges.k_max),
    }
}

/// Case-1 query sampling: workload plus a MAC budget exponent.
#[derive(Clone, Debug)]
pub struct Case1Params {
    pub ranges: SamplingRanges,
    pub mac_exp_min: u32,
    pub mac_exp_max: u32,
}

impl Default for Case1Params {
    fn default() -> Self {
        Self { ranges: SamplingRanges::default(), mac_exp_min: 8, mac_exp_max: 18 }
    }
}

/// Case-2 query sampling: workload, an array config drawn uniformly from a
/// case-1 table, shared bandwidth, and a total-capacity budget.
#[derive(Clone, Debug)]
pub struct Case2Params {
    pub ranges: SamplingRanges,
    pub array_table: LabelTable,
    pub bw_min: u64,
    pub bw_max: u64,
    pub budget_min_kb: u64,
    pub budget_max_kb: u64,
    pub budget_step_kb: u64,
}

impl Case2Params {
    pub fn with_defaults(array_table: LabelTable) -> Self {
        Self {
            ranges: SamplingRanges::default(),
            array_table,
            bw_min: 1,
            bw_max: 100,
            budget_min_kb: 300,
            budget_max_kb: 3000,
            budget_step_kb: 100,
        }
    }
}

impl Default for Case2Params {
    fn default() -> Self {
        Self::with_defaults(LabelTable::case1(4, 18).expect("default case-1 bounds are valid"))
    }
}

/// Case-3 query sampling: one workload per platform unit.
#[derive(Clone, Debug)]
pub struct Case3Params {
    pub ranges: SamplingRanges,
    pub platform: Platform,
}

impl Default for Case3Params {
    fn default() -> Self {
        Self { ranges: SamplingRanges::default(), platform: Platform::default_four_units() }
    }
}

#[derive(Clone, Debug)]
pub enum GenParams {
    Case1(Case1Params),
    Case2(Case2Params),
    Case3(Case3Params),
}

impl GenParams {
    pub fn case(&self) -> CaseId {
        match self {
            GenParams::Case1(_) => CaseId::Case1,
            GenParams::Case2(_) => CaseId::Case2,
            GenParams::Case3(_) => CaseId::Case3,
        }
    }

    pub fn num_features(&self) -> usize {
        match self {
            GenParams::Case1(_) => 4,
            GenParams::Case2(_) => 8,
            GenParams::Case3(p) => 3 * p.platform.x(),
        }
    }
}

/// Raw input features plus the oracle's label id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetRecord {
    pub features: Vec<u64>,
    pub label: usize,
}

/// An in-memory labeled dataset for one case study.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub case: CaseId,
    pub num_features: usize,
    pub records: Vec<DatasetRecord>,
    /// Queries discarded and redrawn because the oracle found no feasible
    /// entry.
    pub skipped: u64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn header(&self) -> String {
        header_for(self.case, self.num_features)
    }

    pub fn labels(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn case1_queries(&self) -> Result<Vec<Case1Query>> {
        self.expect_schema(CaseId::Case1, 4)?;
        self.records
            .iter()
            .map(|r| {
                Ok(Case1Query {
                    workload: GemmWorkload::new(r.features[0], r.features[1], r.features[2])?,
                    mac_exp: r.features[3] as u32,
                })
            })
            .collect()
    }

    pub fn case2_queries(&self) -> Result<Vec<Case2Query>> {
        self.expect_schema(CaseId::Case2, 8)?;
        self.records
            .iter()
            .map(|r| {
                let shape = crate::types::ArrayShape::new(r.features[3], r.features[4])?;
                let dataflow = crate::types::Dataflow::from_code(r.features[5])?;
                Ok(Case2Query {
                    workload: GemmWorkload::new(r.features[0], r.features[1], r.features[2])?,
                    array: ArrayConfig::new(shape, dataflow),
                    bandwidth: r.features[6],
                    budget_kb: r.features[7],
                })
            })
            .collect()
    }

    pub fn case3_queries(&self) -> Result<Vec<Vec<GemmWorkload>>> {
        if self.case != CaseId::Case3 || self.num_features % 3 != 0 {
            return Err(Error::Shape(format!(
                "expected a case-3 dataset with 3x feature columns, got case {} with {}",
                self.case, self.num_features
            )));
        }
        self.records
            .iter()
            .map(|r| {
                r.features
                    .chunks_exact(3)
                    .map(|c| GemmWorkload::new(c[0], c[1], c[2]))
                    .collect()
            })
            .collect()
    }

    fn expect_schema(&self, case: CaseId, num_features: usize) -> Result<()> {
        if self.case != case || self.num_features != num_features {
            return Err(Error::Shape(format!(
                "expected case {case} with {num_features} features, got case {} with {}",
                self.case, self.num_features
            )));
        }
        Ok(())
    }
}

fn header_for(case: CaseId, num_features: usize) -> String {
    match case {
        CaseId::Case1 => "m,n,k,mac_exp,label".to_string(),
        CaseId::Case2 => "m,n,k,rows,cols,dataflow,bw,budget_kb,label".to_string(),
        CaseId::Case3 => {
            let mut cols: Vec<String> = Vec::new();
            for i in 0..num_features / 3 {
                cols.push(format!("m{i}"));
                cols.push(format!("n{i}"));
                cols.push(format!("k{i}"));
            }
            cols.push("label".to_string());
            cols.join(",")
        }
    }
}

/// RNG for record `index`: an independent stream of the seeded generator.
fn record_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

const MAX_RESAMPLE_ATTEMPTS: u64 = 10_000;

fn gen_record(
    params: &GenParams,
    table: &LabelTable,
    rng: &mut ChaCha8Rng,
) -> Result<(DatasetRecord, u64)> {
    let mut skips = 0;
    loop {
        let (features, labeled) = match params {
            GenParams::Case1(p) => {
                let workload = sample_workload(rng, &p.ranges);
                let mac_exp = rng.gen_range(p.mac_exp_min..=p.mac_exp_max);
                let q = Case1Query { workload, mac_exp };
                (
                    vec![workload.m, workload.n, workload.k, mac_exp as u64],
                    oracle::best_array_config(&q, table),
                )
            }
            GenParams::Case2(p) => {
                let workload = sample_workload(rng, &p.ranges);
                let pick = rng.gen_range(0..p.array_table.len());
                let array = *p.array_table.entries[pick]
                    .as_array()
                    .expect("case-2 params carry a case-1 table");
                let bandwidth = rng.gen_range(p.bw_min..=p.bw_max);
                let steps = (p.budget_max_kb - p.budget_min_kb) / p.budget_step_kb;
                let budget_kb = p.budget_min_kb + p.budget_step_kb * rng.gen_range(0..=steps);
                let q = Case2Query { workload, array, bandwidth, budget_kb };
                (
                    vec![
                        workload.m,
                        workload.n,
                        workload.k,
                        array.rows,
                        array.cols,
                        array.dataflow.code() as u64,
                        bandwidth,
                        budget_kb,
                    ],
                    oracle::best_buffer_sizes(&q, table),
                )
            }
            GenParams::Case3(p) => {
                let workloads: Vec<GemmWorkload> =
                    (0..p.platform.x()).map(|_| sample_workload(rng, &p.ranges)).collect();
                let features =
                    workloads.iter().flat_map(|w| [w.m, w.n, w.k]).collect::<Vec<u64>>();
                (features, oracle::best_schedule(&workloads, &p.platform, table))
            }
        };
        match labeled {
            Ok(label) => return Ok((DatasetRecord { features, label }, skips)),
            Err(Error::Infeasible(_)) if skips < MAX_RESAMPLE_ATTEMPTS => skips += 1,
            Err(e) => return Err(e),
        }
    }
}

/// Generates the records for an index range of a dataset. Results depend
/// only on (seed, index), never on the range split or thread count.
pub fn generate_records(
    range: std::ops::Range<u64>,
    seed: u64,
    params: &GenParams,
    table: &LabelTable,
) -> Result<(Vec<DatasetRecord>, u64)> {
    if params.case() != table.case {
        return Err(Error::Param(format!(
            "sampling params are for case {} but the table is case {}",
            params.case(),
            table.case
        )));
    }
    let results: Vec<(DatasetRecord, u64)> = range
        .into_par_iter()
        .map(|i| gen_record(params, table, &mut record_rng(seed, i)))
        .collect::<Result<_>>()?;
    let skipped = results.iter().map(|(_, s)| s).sum();
    Ok((results.into_iter().map(|(r, _)| r).collect(), skipped))
}

/// Generates `count` labeled records. Infeasible queries are skipped and
/// redrawn; the skip count is reported on the dataset.
pub fn generate_dataset(
    count: usize,
    seed: u64,
    params: &GenParams,
    table: &LabelTable,
) -> Result<Dataset> {
    let (records, skipped) = generate_records(0..count as u64, seed, params, table)?;
    Ok(Dataset {
        case: params.case(),
        num_features: params.num_features(),
        records,
        skipped,
    })
}

/// Serializes a dataset as CSV (header row, LF endings).
pub fn write_csv_to<W: Write>(ds: &Dataset, mut out: W) -> Result<()> {
    writeln!(out, "{}", ds.header())?;
    let mut line = String::new();
    for r in &ds.records {
        line.clear();
        for f in &r.features {
            line.push_str(&f.to_string());
            line.push(',');
        }
        line.push_str(&r.label.to_string());
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut buf = std::io::BufWriter::new(file);
    write_csv_to(ds, &mut buf)?;
    buf.flush()?;
    Ok(())
}

pub fn csv_bytes(ds: &Dataset) -> Vec<u8> {
    let mut out = Vec::new();
    write_csv_to(ds, &mut out).expect("writing to a Vec cannot fail");
    out
}

/// Parses and validates a dataset CSV. `num_classes`, when given, bounds
/// the label column. Line numbers in errors are 1-based and count the
/// header.
pub fn read_csv_from<R: std::io::BufRead>(
    input: R,
    case: CaseId,
    num_classes: Option<usize>,
) -> Result<Dataset> {
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => {
            return Err(Error::Data { line: Some(1), msg: "empty file, expected a header".into() })
        }
    };
    let num_features = validate_header(&header, case)?;
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i as u64 + 2;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut fields = Vec::with_capacity(num_features + 1);
        for field in line.split(',') {
            let v: u64 = field.trim().parse().map_err(|_| Error::Data {
                line: Some(line_no),
                msg: format!("malformed integer field {field:?}"),
            })?;
            fields.push(v);
        }
        if fields.len() != num_features + 1 {
            return Err(Error::Data {
                line: Some(line_no),
                msg: format!("expected {} columns, found {}", num_features + 1, fields.len()),
            });
        }
        let label = fields.pop().unwrap() as usize;
        if let Some(n) = num_classes {
            if label >= n {
                return Err(Error::Data {
                    line: Some(line_no),
                    msg: format!("label {label} out of range for a {n}-entry table"),
                });
            }
        }
        records.push(DatasetRecord { features: fields, label });
    }
    Ok(Dataset { case, num_features, records, skipped: 0 })
}

pub fn read_csv(path: &Path, case: CaseId, num_classes: Option<usize>) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_csv_from(std::io::BufReader::new(file), case, num_classes)
}

/// Determines the case study from a CSV header line.
pub fn infer_case(header: &str) -> Result<CaseId> {
    for case in [CaseId::Case1, CaseId::Case2, CaseId::Case3] {
        if validate_header(header, case).is_ok() {
            return Ok(case);
        }
    }
    Err(Error::Data { line: Some(1), msg: format!("unrecognized header {header:?}") })
}

/// Determines a CSV file's case from its header line alone.
pub fn peek_case(path: &Path) -> Result<CaseId> {
    use std::io::BufRead;
    let file = std::fs::File::open(path)?;
    let mut header = String::new();
    std::io::BufReader::new(file).read_line(&mut header)?;
    infer_case(header.trim_end_matches(['\r', '\n']))
}

/// Reads a dataset, determining its case from the header.
pub fn read_csv_auto(path: &Path) -> Result<(CaseId, Dataset)> {
    let text = std::fs::read_to_string(path)?;
    let header = text.lines().next().unwrap_or("");
    let case = infer_case(header)?;
    let ds = read_csv_from(std::io::Cursor::new(text.as_bytes()), case, None)?;
    Ok((case, ds))
}

fn validate_header(header: &str, case: CaseId) -> Result<usize> {
    let num_features = match case {
        CaseId::Case1 => 4,
        CaseId::Case2 => 8,
        CaseId::Case3 => {
            let cols = header.split(',').count();
            if cols < 4 || (cols - 1) % 3 != 0 {
                return Err(Error::Data {
                    line: Some(1),
                    msg: format!("case-3 header needs 3x+1 columns, got {cols}"),
                });
            }
            cols - 1
        }
    };
    let expected = header_for(case, num_features);
    if header != expected {
        return Err(Error::Data {
            line: Some(1),
            msg: format!("expected header {expected:?}, got {header:?}"),
        });
    }
    Ok(num_features)
}

// ---------------------------------------------------------------------------
// Feature encoding
// ---------------------------------------------------------------------------

/// How one raw integer feature maps to a bucket id in `[0, vocab)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EncoderRule {
    /// Logarithmic bucketing for multi-decade magnitudes:
    /// `bucket = min(B-1, floor(B * ln(v) / ln(vmax+1)))` for `v in [1, vmax]`.
    LogBucket { vmax: u64, buckets: usize },
    /// Dense small ranges: `bucket = v - min` for `v in [min, min+vocab)`.
    Offset { min: u64, vocab: usize },
    /// Power-of-two features keyed by exponent: `bucket = log2(v) - min_exp`.
    PowerOfTwoExp { min_exp: u32, vocab: usize },
}

impl EncoderRule {
    pub fn vocab(&self) -> usize {
        match self {
            EncoderRule::LogBucket { buckets, .. } => *buckets,
            EncoderRule::Offset { vocab, .. } => *vocab,
            EncoderRule::PowerOfTwoExp { vocab, .. } => *vocab,
        }
    }

    pub fn encode(&self, v: u64) -> Result<usize> {
        match *self {
            EncoderRule::LogBucket { vmax, buckets } => {
                if v < 1 || v > vmax {
                    return Err(Error::Encoding(format!("value {v} outside [1, {vmax}]")));
                }
                let b = buckets as f64 * (v as f64).ln() / ((vmax + 1) as f64).ln();
                Ok((b as usize).min(buckets - 1))
            }
            EncoderRule::Offset { min, vocab } => {
                if v < min || v >= min + vocab as u64 {
                    return Err(Error::Encoding(format!(
                        "value {v} outside [{min}, {})",
                        min + vocab as u64
                    )));
                }
                Ok((v - min) as usize)
            }
            EncoderRule::PowerOfTwoExp { min_exp, vocab } => {
                if !v.is_power_of_two() {
                    return Err(Error::Encoding(format!("value {v} is not a power of two")));
                }
                let e = v.trailing_zeros();
                if e < min_exp || e >= min_exp + vocab as u32 {
                    return Err(Error::Encoding(format!(
                        "exponent {e} outside [{min_exp}, {})",
                        min_exp + vocab as u32
                    )));
                }
                Ok((e - min_exp) as usize)
            }
        }
    }
}

/// Per-feature encoding rules for one case's input schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub rules: Vec<EncoderRule>,
}

pub const DEFAULT_LOG_BUCKETS: usize = 1024;

impl EncoderSpec {
    pub fn num_features(&self) -> usize {
        self.rules.len()
    }

    pub fn encode(&self, features: &[u64]) -> Result<Vec<usize>> {
        if features.len() != self.rules.len() {
            return Err(Error::Shape(format!(
                "{} features for a {}-rule encoder",
                features.len(),
                self.rules.len()
            )));
        }
        features.iter().zip(&self.rules).map(|(&v, rule)| rule.encode(v)).collect()
    }

    fn log_rules(ranges: &SamplingRanges) -> [EncoderRule; 3] {
        [
            EncoderRule::LogBucket { vmax: ranges.m_max, buckets: DEFAULT_LOG_BUCKETS },
            EncoderRule::LogBucket { vmax: ranges.n_max, buckets: DEFAULT_LOG_BUCKETS },
            EncoderRule::LogBucket { vmax: ranges.k_max, buckets: DEFAULT_LOG_BUCKETS },
        ]
    }

    pub fn case1_default(p: &Case1Params) -> Self {
        let mut rules = Self::log_rules(&p.ranges).to_vec();
        rules.push(EncoderRule::Offset {
            min: p.mac_exp_min as u64,
            vocab: (p.mac_exp_max - p.mac_exp_min + 1) as usize,
        });
        Self { rules }
    }

    pub fn case2_default(p: &Case2Params) -> Result<Self> {
        let TableParams::Case1 { min_exp, max_mac_exp } = p.array_table.params else {
            return Err(Error::Param("case-2 params need a case-1 array table".into()));
        };
        let exp_vocab = (max_mac_exp - 2 * min_exp + 1) as usize;
        let mut rules = Self::log_rules(&p.ranges).to_vec();
        rules.extend([
            EncoderRule::PowerOfTwoExp { min_exp, vocab: exp_vocab },
            EncoderRule::PowerOfTwoExp { min_exp, vocab: exp_vocab },
            EncoderRule::Offset { min: 0, vocab: 3 },
            EncoderRule::LogBucket { vmax: p.bw_max, buckets: DEFAULT_LOG_BUCKETS },
            EncoderRule::LogBucket { vmax: p.budget_max_kb, buckets: DEFAULT_LOG_BUCKETS },
        ]);
        Ok(Self { rules })
    }

    pub fn case3_default(p: &Case3Params) -> Self {
        let mut rules = Vec::with_capacity(3 * p.platform.x());
        for _ in 0..p.platform.x() {
            rules.extend(Self::log_rules(&p.ranges));
        }
        Self { rules }
    }

    pub fn default_for(params: &GenParams) -> Result<Self> {
        Ok(match params {
            GenParams::Case1(p) => Self::case1_default(p),
            GenParams::Case2(p) => Self::case2_default(p)?,
            GenParams::Case3(p) => Self::case3_default(p),
        })
    }
}
