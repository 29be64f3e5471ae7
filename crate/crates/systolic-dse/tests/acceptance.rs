//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured numbers (run with `--nocapture` to see them).
//!
//! The learning criteria (6 and 7) generate 200k-point datasets and train
//! to the stated budgets; expect the suite to take some minutes.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use systolic_dse::cost;
use systolic_dse::data::{
    self, Case1Params, Case2Params, Case3Params, EncoderRule, EncoderSpec, GenParams,
};
use systolic_dse::labels::{CaseId, LabelTable, TableParams};
use systolic_dse::mem::{self, Case2Query};
use systolic_dse::metrics::{self, QueryBatch};
use systolic_dse::model::{init_model, ModelSpec, TrainConfig};
use systolic_dse::oracle::{self, Case1Query};
use systolic_dse::sched;
use systolic_dse::stats;
use systolic_dse::types::{
    ArrayShape, ComputeUnit, Dataflow, GemmWorkload, Platform, DATAFLOWS,
};

fn w(m: u64, n: u64, k: u64) -> GemmWorkload {
    GemmWorkload::new(m, n, k).unwrap()
}

#[test]
fn criterion_01_label_space_counts() {
    let started = Instant::now();
    assert_eq!(LabelTable::case2(100, 1000, 100).unwrap().len(), 1000);
    assert_eq!(LabelTable::case3(&Platform::default_four_units()).unwrap().len(), 1944);
    for x in 1..=5usize {
        let units =
            vec![ComputeUnit::monolithic(ArrayShape::new(16, 16).unwrap()); x];
        let table = LabelTable::case3(&Platform::new(units).unwrap()).unwrap();
        let expected = 3u64.pow(x as u32) * (1..=x as u64).product::<u64>();
        assert_eq!(table.len() as u64, expected, "case-3 count law at x={x}");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    println!(
        "criterion 1 PASS: case-2=1000, case-3 default=1944, 3^x*x! for x=1..5, in {elapsed:?}"
    );
}

#[test]
fn criterion_02_oracle_optimality_against_independent_rescan() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let queries = 1000;

    // case 1: minimize (runtime, id) among entries under the MAC cap
    let table1 = LabelTable::case1(4, 18).unwrap();
    for _ in 0..queries {
        let q = Case1Query {
            workload: w(
                rng.gen_range(1..=100_000),
                rng.gen_range(1..=10_000),
                rng.gen_range(1..=1_000),
            ),
            mac_exp: rng.gen_range(8..=18),
        };
        let got = oracle::best_array_config(&q, &table1).unwrap();
        let mut best: Option<(u64, usize)> = None;
        for (id, entry) in table1.entries.iter().enumerate() {
            let cfg = entry.as_array().unwrap();
            if cfg.rows * cfg.cols > 1u64 << q.mac_exp {
                continue;
            }
            let rt = cost::compute_runtime(q.workload, cfg.shape(), cfg.dataflow);
            match best {
                None => best = Some((rt, id)),
                Some((brt, _)) if rt < brt => best = Some((rt, id)),
                _ => {}
            }
        }
        assert_eq!(got, best.unwrap().1, "case-1 oracle disagrees with rescan for {q:?}");
    }

    // case 2: minimize (stalls, total KB, id) within the budget
    let table2 = LabelTable::case2(100, 1000, 100).unwrap();
    let array_table = LabelTable::case1(4, 18).unwrap();
    for _ in 0..queries {
        let pick = rng.gen_range(0..array_table.len());
        let q = Case2Query {
            workload: w(
                rng.gen_range(1..=100_000),
                rng.gen_range(1..=10_000),
                rng.gen_range(1..=1_000),
            ),
            array: *array_table.entries[pick].as_array().unwrap(),
            bandwidth: rng.gen_range(1..=100),
            budget_kb: 300 + 100 * rng.gen_range(0..=27),
        };
        let got = oracle::best_buffer_sizes(&q, &table2).unwrap();
        let mut best: Option<(u64, u64, usize)> = None;
        for (id, entry) in table2.entries.iter().enumerate() {
            let sizes = entry.as_buffers().unwrap();
            if sizes.total_kb() > q.budget_kb {
                continue;
            }
            let stalls = mem::total_stalls(&q, *sizes).total_stalls;
            let better = match best {
                None => true,
                Some((bs, bk, _)) => {
                    stalls < bs || (stalls == bs && sizes.total_kb() < bk)
                }
            };
            if better {
                best = Some((stalls, sizes.total_kb(), id));
            }
        }
        assert_eq!(got, best.unwrap().2, "case-2 oracle disagrees with rescan for {q:?}");
    }

    // case 3: minimize (critical path, cumulative, id)
    let platform = Platform::default_four_units();
    let table3 = LabelTable::case3(&platform).unwrap();
    for _ in 0..queries {
        let workloads: Vec<GemmWorkload> = (0..4)
            .map(|_| {
                w(
                    rng.gen_range(1..=100_000),
                    rng.gen_range(1..=10_000),
                    rng.gen_range(1..=1_000),
                )
            })
            .collect();
        let got = oracle::best_schedule(&workloads, &platform, &table3).unwrap();
        let mut best: Option<(u64, u64, usize)> = None;
        for (id, entry) in table3.entries.iter().enumerate() {
            let c =
                sched::schedule_cost(&workloads, &platform, entry.as_schedule().unwrap()).unwrap();
            let better = match best {
                None => true,
                Some((bc, bs, _)) => {
                    c.critical_path < bc || (c.critical_path == bc && c.cumulative < bs)
                }
            };
            if better {
                best = Some((c.critical_path, c.cumulative, id));
            }
        }
        assert_eq!(got, best.unwrap().2, "case-3 oracle disagrees with rescan");
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}, budget 5 min");
    println!(
        "criterion 2 PASS: 1000 queries per case, zero rescan violations, in {elapsed:?}"
    );
}

#[test]
fn criterion_03_cost_model_sanity() {
    // worked examples, exact integer equality
    let s32 = ArrayShape::new(32, 32).unwrap();
    let s16 = ArrayShape::new(16, 16).unwrap();
    use Dataflow::*;
    let plan = cost::fold_geometry(w(32, 32, 16), s32, OutputStationary);
    assert_eq!(
        (plan.fold_count, plan.fold_cycles, plan.ifmap_bytes, plan.filter_bytes, plan.ofmap_bytes),
        (1, 110, 512, 512, 1024)
    );
    assert_eq!(cost::fold_geometry(w(64, 64, 16), s32, OutputStationary).fold_count, 4);
    assert_eq!(cost::fold_geometry(w(10, 32, 32), s32, WeightStationary).fold_cycles, 104);
    assert_eq!(cost::compute_runtime(w(32, 32, 16), s32, OutputStationary), 110);
    assert_eq!(cost::compute_runtime(w(64, 64, 16), s32, OutputStationary), 440);
    assert_eq!(cost::compute_runtime(w(1000, 32, 32), s16, WeightStationary), 4184);
    assert_eq!(mem::operand_stalls(512, 102_400, 50, 110, 1), 11);
    assert_eq!(mem::operand_stalls(512, 102_400, 1, 110, 4), 1718);
    assert_eq!(mem::operand_stalls(60_000, 102_400, 100, 110, 2), 1200);
    let q = Case2Query {
        workload: w(32, 32, 16),
        array: systolic_dse::types::ArrayConfig::new(s32, OutputStationary),
        bandwidth: 50,
        budget_kb: 3000,
    };
    let r = mem::total_stalls(&q, systolic_dse::types::BufferSizes::new(100, 100, 100).unwrap());
    assert_eq!(
        (r.ifmap_stalls, r.filter_stalls, r.ofmap_stalls, r.total_stalls, r.total_runtime),
        (11, 11, 21, 43, 153)
    );
    assert_eq!(sched::unit_runtime(w(32, 32, 16), ComputeUnit::monolithic(s32), OutputStationary), 110);
    assert_eq!(
        sched::unit_runtime(
            w(32, 32, 16),
            ComputeUnit::new(4, ArrayShape::new(8, 8).unwrap()).unwrap(),
            OutputStationary
        ),
        152
    );
    assert_eq!(sched::unit_runtime(w(1, 1, 1), ComputeUnit::monolithic(s16), OutputStationary), 47);

    // randomized monotonicity sweeps, zero violations allowed
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let sweep = 10_000;
    for _ in 0..sweep {
        let wl = w(
            rng.gen_range(1..=100_000),
            rng.gen_range(1..=10_000),
            rng.gen_range(1..=1_000),
        );
        let shape =
            ArrayShape::new(1 << rng.gen_range(2..=10), 1 << rng.gen_range(2..=10)).unwrap();
        let df = DATAFLOWS[rng.gen_range(0..3)];
        let base = cost::compute_runtime(wl, shape, df);
        let bump = rng.gen_range(1..=1000);
        assert!(cost::compute_runtime(w(wl.m + bump, wl.n, wl.k), shape, df) >= base);
        assert!(cost::compute_runtime(w(wl.m, wl.n + bump, wl.k), shape, df) >= base);
        assert!(cost::compute_runtime(w(wl.m, wl.n, wl.k + bump), shape, df) >= base);
    }
    for _ in 0..sweep {
        let demand = rng.gen_range(1..=2_000_000u64);
        let capacity = rng.gen_range(1..=2_000_000u64);
        let bandwidth = rng.gen_range(1..=100u64);
        let fold_cycles = rng.gen_range(1..=100_000u64);
        let fold_count = rng.gen_range(1..=10_000u64);
        let base = mem::operand_stalls(demand, capacity, bandwidth, fold_cycles, fold_count);
        let cap_bump = rng.gen_range(1..=1_000_000u64);
        let bw_bump = rng.gen_range(1..=100u64);
        assert!(
            mem::operand_stalls(demand, capacity + cap_bump, bandwidth, fold_cycles, fold_count)
                <= base,
            "stalls must not grow with capacity"
        );
        assert!(
            mem::operand_stalls(demand, capacity, bandwidth + bw_bump, fold_cycles, fold_count)
                <= base,
            "stalls must not grow with bandwidth"
        );
    }
    println!(
        "criterion 3 PASS: worked examples exact, {sweep}-point monotonicity sweeps clean"
    );
}

#[test]
fn criterion_04_gradient_check_twenty_models() {
    let started = Instant::now();
    const STEP: f64 = 1e-6;
    const TOLERANCE: f64 = 1e-4;
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(404 + seed);
        let features = rng.gen_range(1..=3usize);
        let vocab = rng.gen_range(2..=8usize);
        let spec = ModelSpec {
            encoder: EncoderSpec {
                rules: (0..features).map(|_| EncoderRule::Offset { min: 0, vocab }).collect(),
            },
            embedding_dim: rng.gen_range(1..=4),
            hidden_units: rng.gen_range(1..=16),
            num_classes: rng.gen_range(2..=10),
            baseline_mode: false,
            case: CaseId::Case1,
            table_params: TableParams::Case1 { min_exp: 4, max_mac_exp: 18 },
        };
        let model = init_model(&spec, seed).unwrap();
        let batch_data: Vec<Vec<usize>> = (0..4)
            .map(|_| (0..features).map(|_| rng.gen_range(0..vocab)).collect())
            .collect();
        let batch: Vec<&[usize]> = batch_data.iter().map(|b| b.as_slice()).collect();
        let labels: Vec<usize> =
            (0..4).map(|_| rng.gen_range(0..spec.num_classes)).collect();
        let (_, grads) = model.loss_and_grad(&batch, &labels).unwrap();
        let loss_of = |m: &systolic_dse::model::RecommenderModel| {
            m.loss_and_grad(&batch, &labels).unwrap().0
        };

        // every parameter tensor, every entry
        let tensors: Vec<(Vec<f64>, Box<dyn Fn(&mut systolic_dse::model::RecommenderModel) -> &mut [f64]>)> = {
            let mut list: Vec<(Vec<f64>, Box<dyn Fn(&mut systolic_dse::model::RecommenderModel) -> &mut [f64]>)> = Vec::new();
            for f in 0..features {
                let g = grads.embeddings[f].as_slice().unwrap().to_vec();
                list.push((g, Box::new(move |m| m.embeddings[f].as_slice_mut().unwrap())));
            }
            list.push((
                grads.hidden_w.as_slice().unwrap().to_vec(),
                Box::new(|m| m.hidden_w.as_slice_mut().unwrap()),
            ));
            list.push((
                grads.hidden_b.as_slice().unwrap().to_vec(),
                Box::new(|m| m.hidden_b.as_slice_mut().unwrap()),
            ));
            list.push((
                grads.output_w.as_slice().unwrap().to_vec(),
                Box::new(|m| m.output_w.as_slice_mut().unwrap()),
            ));
            list.push((
                grads.output_b.as_slice().unwrap().to_vec(),
                Box::new(|m| m.output_b.as_slice_mut().unwrap()),
            ));
            list
        };
        for (analytic, access) in tensors {
            for idx in 0..analytic.len() {
                let mut probe = model.clone();
                let base = access(&mut probe)[idx];
                access(&mut probe)[idx] = base + STEP;
                let plus = loss_of(&probe);
                access(&mut probe)[idx] = base - STEP;
                let minus = loss_of(&probe);
                let numeric = (plus - minus) / (2.0 * STEP);
                let denom = analytic[idx].abs().max(numeric.abs()).max(1.0);
                let rel = (analytic[idx] - numeric).abs() / denom;
                worst = worst.max(rel);
                assert!(
                    rel < TOLERANCE,
                    "model {seed} parameter {idx}: analytic {} vs numeric {numeric} (rel {rel})",
                    analytic[idx]
                );
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 1 min");
    println!(
        "criterion 4 PASS: 20 models, all gradients within 1e-4 (worst {worst:.2e}), in {elapsed:?}"
    );
}

#[test]
fn criterion_05_generation_and_training_determinism() {
    // gen: byte-identical across runs and across 1 vs 8 threads
    let cases: Vec<(GenParams, LabelTable)> = vec![
        (GenParams::Case1(Case1Params::default()), LabelTable::case1(4, 18).unwrap()),
        (
            GenParams::Case2(Case2Params::default()),
            LabelTable::case2(100, 1000, 100).unwrap(),
        ),
        (
            GenParams::Case3(Case3Params::default()),
            LabelTable::case3(&Platform::default_four_units()).unwrap(),
        ),
    ];
    let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool8 = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    for (params, table) in &cases {
        let a = data::generate_dataset(1000, 55, params, table).unwrap();
        let b = data::generate_dataset(1000, 55, params, table).unwrap();
        let t1 = pool1.install(|| data::generate_dataset(1000, 55, params, table)).unwrap();
        let t8 = pool8.install(|| data::generate_dataset(1000, 55, params, table)).unwrap();
        let bytes = data::csv_bytes(&a);
        assert_eq!(bytes, data::csv_bytes(&b), "case {} rerun differs", params.case());
        assert_eq!(bytes, data::csv_bytes(&t1), "case {} 1-thread differs", params.case());
        assert_eq!(bytes, data::csv_bytes(&t8), "case {} 8-thread differs", params.case());
    }

    // train: byte-identical checkpoints for a fixed seed
    let (params, table) = &cases[0];
    let ds = data::generate_dataset(3000, 56, params, table).unwrap();
    let gen_params = GenParams::Case1(Case1Params::default());
    let spec = ModelSpec {
        encoder: EncoderSpec::default_for(&gen_params).unwrap(),
        embedding_dim: 16,
        hidden_units: 256,
        num_classes: table.len(),
        baseline_mode: false,
        case: CaseId::Case1,
        table_params: table.params.clone(),
    };
    let cfg = TrainConfig { epochs: 3, seed: 5, ..TrainConfig::default() };
    let dir = tempfile::tempdir().unwrap();
    let mut checkpoints = Vec::new();
    for run in 0..2 {
        let mut model = init_model(&spec, 5).unwrap();
        model.train(&ds, &cfg).unwrap();
        let path = dir.path().join(format!("run{run}.bin"));
        model.save_checkpoint(&path).unwrap();
        checkpoints.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(checkpoints[0], checkpoints[1], "training reruns must match byte for byte");
    println!("criterion 5 PASS: gen byte-identical across reruns and 1/8 threads, train reruns byte-identical");
}

fn learning_spec(
    case: CaseId,
    gen_params: &GenParams,
    table: &LabelTable,
    baseline: bool,
) -> ModelSpec {
    ModelSpec {
        encoder: EncoderSpec::default_for(gen_params).unwrap(),
        embedding_dim: 16,
        hidden_units: 256,
        num_classes: table.len(),
        baseline_mode: baseline,
        case,
        table_params: table.params.clone(),
    }
}

#[test]
fn criterion_06_desk_scale_learning_case1() {
    let started = Instant::now();
    let params = GenParams::Case1(Case1Params::default());
    let table = LabelTable::case1(4, 18).unwrap();
    let train_ds = data::generate_dataset(200_000, 61, &params, &table).unwrap();
    let heldout = data::generate_dataset(10_000, 62, &params, &table).unwrap();
    let cfg = TrainConfig { epochs: 15, seed: 6, ..TrainConfig::default() };

    let spec = learning_spec(CaseId::Case1, &params, &table, false);
    let mut model = init_model(&spec, 6).unwrap();
    let report = model.train(&train_ds, &cfg).unwrap();
    let val_acc = report.epochs.last().unwrap().validation_accuracy;
    assert!(val_acc >= 0.70, "validation accuracy {val_acc} below 0.70");

    let predictions = model.predict_all(&heldout).unwrap();
    let queries = heldout.case1_queries().unwrap();
    let eval = metrics::normalized_performance(
        &QueryBatch::Case1(&queries),
        &predictions,
        &heldout.labels(),
        &table,
    )
    .unwrap();
    assert!(eval.geomean >= 0.95, "geomean {} below 0.95", eval.geomean);

    let baseline_spec = learning_spec(CaseId::Case1, &params, &table, true);
    let mut baseline = init_model(&baseline_spec, 6).unwrap();
    let baseline_report = baseline.train(&train_ds, &cfg).unwrap();
    let baseline_val = baseline_report.epochs.last().unwrap().validation_accuracy;
    assert!(
        val_acc > baseline_val,
        "embedding model ({val_acc}) must beat the raw-feature baseline ({baseline_val})"
    );

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 7200.0, "took {elapsed:?}, budget 2 h");
    println!(
        "criterion 6 PASS: val_acc {val_acc:.4} (>=0.70), geomean {:.5} (>=0.95), baseline {baseline_val:.4}, in {elapsed:?}",
        eval.geomean
    );
}

#[test]
fn criterion_07_desk_scale_learning_case3() {
    let started = Instant::now();
    let case3 = Case3Params::default();
    let platform = case3.platform.clone();
    let params = GenParams::Case3(case3);
    let table = LabelTable::case3(&platform).unwrap();
    let train_ds = data::generate_dataset(200_000, 71, &params, &table).unwrap();
    let heldout = data::generate_dataset(10_000, 72, &params, &table).unwrap();
    let cfg = TrainConfig { epochs: 15, seed: 7, ..TrainConfig::default() };

    let spec = learning_spec(CaseId::Case3, &params, &table, false);
    let mut model = init_model(&spec, 7).unwrap();
    let report = model.train(&train_ds, &cfg).unwrap();
    let val_acc = report.epochs.last().unwrap().validation_accuracy;

    let predictions = model.predict_all(&heldout).unwrap();
    let queries = heldout.case3_queries().unwrap();
    let eval = metrics::normalized_performance(
        &QueryBatch::Case3 { queries: &queries, platform: &platform },
        &predictions,
        &heldout.labels(),
        &table,
    )
    .unwrap();
    assert!(eval.geomean >= 0.90, "critical-path geomean {} below 0.90", eval.geomean);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 7200.0, "took {elapsed:?}, budget 2 h");
    println!(
        "criterion 7 PASS: geomean {:.5} (>=0.90), val_acc {val_acc:.4}, in {elapsed:?}",
        eval.geomean
    );
}

#[test]
fn criterion_08_case2_head_heavy_distribution() {
    let params = GenParams::Case2(Case2Params::default());
    let table = LabelTable::case2(100, 1000, 100).unwrap();
    let ds = data::generate_dataset(100_000, 81, &params, &table).unwrap();
    let histogram = stats::class_histogram(&ds).unwrap();
    let top10: f64 = histogram.iter().take(10).map(|(_, f)| f).sum();
    assert!(top10 > 0.5, "top-10 classes cover {top10}, expected > 0.5");
    println!(
        "criterion 8 PASS: top-10 of {} classes cover {:.1}% of 100k case-2 samples",
        histogram.len(),
        top10 * 100.0
    );
}

#[test]
fn criterion_09_pca_matches_dense_eigensolver() {
    // rank-1 fixture: the component recovers the generating direction
    let features: Vec<Vec<f64>> = (1..=60).map(|t| vec![t as f64, t as f64]).collect();
    let labels: Vec<usize> = (0..60).map(|i| i % 2).collect();
    let r = stats::top2_pca(&features, &labels, (0, 1)).unwrap();
    let direction = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
    let cos: f64 = r.components[0].iter().zip(&direction).map(|(a, b)| a * b).sum();
    assert!(cos.abs() >= 1.0 - 1e-6, "|cos| = {}", cos.abs());

    // random 5-d data: components match nalgebra's symmetric eigensolver
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let features: Vec<Vec<f64>> = (0..400)
        .map(|_| {
            // correlated features so the spectrum has clear leading directions
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            vec![
                3.0 * a + 0.1 * b,
                a - b + rng.gen_range(-0.2..0.2),
                b + rng.gen_range(-0.1..0.1),
                0.5 * a + 2.0 * b,
                rng.gen_range(-0.3..0.3),
            ]
        })
        .collect();
    let labels: Vec<usize> = (0..400).map(|i| i % 2).collect();
    let r = stats::top2_pca(&features, &labels, (0, 1)).unwrap();

    // independent covariance of the standardized data + dense solve
    let n = features.len();
    let dim = 5;
    let standardized: Vec<Vec<f64>> = features
        .iter()
        .map(|row| {
            row.iter()
                .zip(r.mean.iter().zip(&r.scale))
                .map(|(v, (m, s))| (v - m) / s)
                .collect()
        })
        .collect();
    let mut cov = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for row in &standardized {
        for a in 0..dim {
            for b in 0..dim {
                cov[(a, b)] += row[a] * row[b];
            }
        }
    }
    cov /= (n - 1) as f64;
    let eigen = nalgebra::SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].partial_cmp(&eigen.eigenvalues[a]).unwrap());
    for (c, &col) in r.components.iter().zip(order.iter().take(2)) {
        let reference: Vec<f64> = eigen.eigenvectors.column(col).iter().cloned().collect();
        let dot: f64 = c.iter().zip(&reference).map(|(a, b)| a * b).sum();
        let sign = if dot < 0.0 { -1.0 } else { 1.0 };
        for (a, b) in c.iter().zip(&reference) {
            assert!(
                (a - sign * b).abs() < 1e-6,
                "component entry {a} vs dense {b} (sign {sign})"
            );
        }
    }
    println!("criterion 9 PASS: rank-1 direction exact, 5-d components match dense eigensolver");
}

#[test]
fn criterion_10_metric_identities() {
    // predictions equal to labels: accuracy 1.0, geomean 1.0 within 1e-12
    let table1 = LabelTable::case1(4, 18).unwrap();
    let params1 = GenParams::Case1(Case1Params::default());
    let ds1 = data::generate_dataset(200, 101, &params1, &table1).unwrap();
    let queries1 = ds1.case1_queries().unwrap();
    let labels1 = ds1.labels();
    let r1 = metrics::normalized_performance(
        &QueryBatch::Case1(&queries1),
        &labels1,
        &labels1,
        &table1,
    )
    .unwrap();
    assert_eq!(r1.accuracy, 1.0);
    assert!((r1.geomean - 1.0).abs() <= 1e-12);

    let table2 = LabelTable::case2(100, 1000, 100).unwrap();
    let params2 = GenParams::Case2(Case2Params::default());
    let ds2 = data::generate_dataset(200, 102, &params2, &table2).unwrap();
    let queries2 = ds2.case2_queries().unwrap();
    let labels2 = ds2.labels();
    let r2 = metrics::normalized_performance(
        &QueryBatch::Case2(&queries2),
        &labels2,
        &labels2,
        &table2,
    )
    .unwrap();
    assert_eq!(r2.accuracy, 1.0);
    assert!((r2.geomean - 1.0).abs() <= 1e-12);

    let case3 = Case3Params::default();
    let platform = case3.platform.clone();
    let table3 = LabelTable::case3(&platform).unwrap();
    let ds3 = data::generate_dataset(200, 103, &GenParams::Case3(case3), &table3).unwrap();
    let queries3 = ds3.case3_queries().unwrap();
    let labels3 = ds3.labels();
    let r3 = metrics::normalized_performance(
        &QueryBatch::Case3 { queries: &queries3, platform: &platform },
        &labels3,
        &labels3,
        &table3,
    )
    .unwrap();
    assert_eq!(r3.accuracy, 1.0);
    assert!((r3.geomean - 1.0).abs() <= 1e-12);

    // the worked misprediction ratio: (16,16,WS) optimal vs (16,16,OS)
    let queries = [Case1Query { workload: w(1000, 32, 32), mac_exp: 8 }];
    let label = oracle::best_array_config(&queries[0], &table1).unwrap();
    let prediction = label - 1;
    let r = metrics::normalized_performance(
        &QueryBatch::Case1(&queries),
        &[prediction],
        &[label],
        &table1,
    )
    .unwrap();
    assert!((r.ratios[0] - 0.4257).abs() < 1e-4, "worked ratio {}", r.ratios[0]);
    println!(
        "criterion 10 PASS: identity metrics exact for all cases, worked ratio {:.6}",
        r.ratios[0]
    );
}
