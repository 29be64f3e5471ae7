//! The learned recommender: one embedding table per input feature feeding
//! a one-hidden-layer MLP with a softmax head, trained with Adam on
//! categorical cross-entropy. In baseline mode the embeddings are skipped
//! and the MLP sees standardized raw features instead.
//!
//! Everything is double precision and seeded: the same (spec, data,
//! config, seed) produces a byte-identical checkpoint.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::distributions::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, EncoderSpec};
use crate::error::{Error, Result};
use crate::labels::{CaseId, TableParams};

/// Architecture and featurization of one recommender.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub encoder: EncoderSpec,
    pub embedding_dim: usize,
    pub hidden_units: usize,
    pub num_classes: usize,
    /// Skip the embeddings and feed standardized raw features to the MLP.
    pub baseline_mode: bool,
    /// Which case study the model serves, with the label-table parameters
    /// needed to decode predicted ids back into configurations.
    pub case: CaseId,
    pub table_params: TableParams,
}

pub const DEFAULT_EMBEDDING_DIM: usize = 16;
pub const DEFAULT_HIDDEN_UNITS: usize = 256;

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::Param(format!("need >= 2 classes, got {}", self.num_classes)));
        }
        if self.embedding_dim < 1 || self.hidden_units < 1 {
            return Err(Error::Param("embedding_dim and hidden_units must be >= 1".into()));
        }
        if self.encoder.num_features() == 0 {
            return Err(Error::Param("encoder has no feature rules".into()));
        }
        Ok(())
    }

    pub fn num_features(&self) -> usize {
        self.encoder.num_features()
    }

    /// Width of the MLP input: concatenated embeddings, or the raw
    /// feature count in baseline mode.
    pub fn input_dim(&self) -> usize {
        if self.baseline_mode {
            self.num_features()
        } else {
            self.num_features() * self.embedding_dim
        }
    }
}

/// Training hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 15,
            batch_size: 256,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::Param("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Param("batch_size must be >= 1".into()));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Param(format!(
                "validation_fraction must be in (0, 1), got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

/// Per-epoch training metrics.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EpochStats {
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
}

/// Everything `train` measured.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean loss over the training split before any update; close to
    /// ln(num_classes) at a fresh initialization.
    pub initial_train_loss: f64,
    pub epochs: Vec<EpochStats>,
    pub train_size: usize,
    pub validation_size: usize,
}

/// Gradients for every parameter tensor. Embedding rows no batch sample
/// touched are exactly zero.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub embeddings: Vec<Array2<f64>>,
    pub hidden_w: Array2<f64>,
    pub hidden_b: Array1<f64>,
    pub output_w: Array2<f64>,
    pub output_b: Array1<f64>,
}

/// A recommender with its parameters and (in baseline mode) the feature
/// standardization fitted on the training split.
#[derive(Clone, Debug, PartialEq)]
pub struct RecommenderModel {
    pub spec: ModelSpec,
    /// One `vocab x embedding_dim` table per feature; empty in baseline mode.
    pub embeddings: Vec<Array2<f64>>,
    pub hidden_w: Array2<f64>,
    pub hidden_b: Array1<f64>,
    pub output_w: Array2<f64>,
    pub output_b: Array1<f64>,
    pub norm_mean: Array1<f64>,
    pub norm_scale: Array1<f64>,
}

fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Initializes a model from a seed: Glorot-uniform dense weights,
/// Uniform(-0.05, 0.05) embeddings, zero biases.
pub fn init_model(spec: &ModelSpec, seed: u64) -> Result<RecommenderModel> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let emb_dist = Uniform::new(-0.05, 0.05);
    let embeddings: Vec<Array2<f64>> = if spec.baseline_mode {
        Vec::new()
    } else {
        spec.encoder
            .rules
            .iter()
            .map(|rule| {
                Array2::from_shape_simple_fn((rule.vocab(), spec.embedding_dim), || {
                    rng.sample(emb_dist)
                })
            })
            .collect()
    };
    let (input_dim, hidden, classes) = (spec.input_dim(), spec.hidden_units, spec.num_classes);
    let hb = glorot_bound(input_dim, hidden);
    let hidden_dist = Uniform::new(-hb, hb);
    let hidden_w = Array2::from_shape_simple_fn((input_dim, hidden), || rng.sample(hidden_dist));
    let ob = glorot_bound(hidden, classes);
    let output_dist = Uniform::new(-ob, ob);
    let output_w = Array2::from_shape_simple_fn((hidden, classes), || rng.sample(output_dist));
    Ok(RecommenderModel {
        spec: spec.clone(),
        embeddings,
        hidden_w,
        hidden_b: Array1::zeros(hidden),
        output_w,
        output_b: Array1::zeros(classes),
        norm_mean: Array1::zeros(spec.num_features()),
        norm_scale: Array1::ones(spec.num_features()),
    })
}

impl RecommenderModel {
    /// Validates bucket ids and gathers the concatenated embedding row.
    fn assemble_row(&self, buckets: &[usize], out: &mut [f64]) -> Result<()> {
        let d = self.spec.embedding_dim;
        if buckets.len() != self.spec.num_features() {
            return Err(Error::Shape(format!(
                "{} buckets for a {}-feature model",
                buckets.len(),
                self.spec.num_features()
            )));
        }
        for (f, (&b, table)) in buckets.iter().zip(&self.embeddings).enumerate() {
            if b >= table.nrows() {
                return Err(Error::Encoding(format!(
                    "bucket {b} out of range for feature {f} (vocab {})",
                    table.nrows()
                )));
            }
            out[f * d..(f + 1) * d].copy_from_slice(table.row(b).to_slice().unwrap());
        }
        Ok(())
    }

    fn assemble_batch(&self, batch: &[&[usize]]) -> Result<Array2<f64>> {
        let mut x = Array2::zeros((batch.len(), self.spec.input_dim()));
        for (s, buckets) in batch.iter().enumerate() {
            self.assemble_row(buckets, x.row_mut(s).into_slice().unwrap())?;
        }
        Ok(x)
    }

    fn standardize_row(&self, raw: &[u64], out: &mut [f64]) {
        for (f, o) in out.iter_mut().enumerate() {
            *o = (raw[f] as f64 - self.norm_mean[f]) / self.norm_scale[f];
        }
    }

    /// MLP core on an assembled input batch: returns pre-activations,
    /// hidden activations, and softmax probabilities.
    fn dense_forward(&self, x: &Array2<f64>) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
        let mut z1 = x.dot(&self.hidden_w);
        z1 += &self.hidden_b;
        let a1 = z1.mapv(|v| v.max(0.0));
        let mut logits = a1.dot(&self.output_w);
        logits += &self.output_b;
        let probs = softmax_rows(&logits);
        (z1, a1, probs)
    }

    /// Class probabilities for one already-encoded input (embedding mode).
    pub fn forward_encoded(&self, buckets: &[usize]) -> Result<Vec<f64>> {
        if self.spec.baseline_mode {
            return Err(Error::Shape("baseline models take raw features, not buckets".into()));
        }
        let x = self.assemble_batch(&[buckets])?;
        let (_, _, probs) = self.dense_forward(&x);
        Ok(probs.row(0).to_vec())
    }

    /// Class probabilities for one raw input: encodes (or standardizes)
    /// and runs the MLP.
    pub fn forward(&self, raw: &[u64]) -> Result<Vec<f64>> {
        if self.spec.baseline_mode {
            if raw.len() != self.spec.num_features() {
                return Err(Error::Shape(format!(
                    "{} features for a {}-feature model",
                    raw.len(),
                    self.spec.num_features()
                )));
            }
            let mut x = Array2::zeros((1, self.spec.input_dim()));
            self.standardize_row(raw, x.row_mut(0).into_slice().unwrap());
            let (_, _, probs) = self.dense_forward(&x);
            Ok(probs.row(0).to_vec())
        } else {
            let buckets = self.spec.encoder.encode(raw)?;
            self.forward_encoded(&buckets)
        }
    }

    /// Predicted label id: argmax of `forward`, ties to the smallest id.
    pub fn predict(&self, raw: &[u64]) -> Result<usize> {
        Ok(argmax(&self.forward(raw)?))
    }

    /// Mean cross-entropy over a batch plus gradients for every parameter
    /// tensor (embedding mode).
    pub fn loss_and_grad(
        &self,
        batch: &[&[usize]],
        labels: &[usize],
    ) -> Result<(f64, Gradients)> {
        let x = self.assemble_batch(batch)?;
        let (loss, grads, _) = self.dense_loss_and_grad(&x, labels, Some(batch))?;
        Ok((loss, grads))
    }

    /// Shared backward pass. `buckets`, when present, routes input
    /// gradients into the embedding tables.
    fn dense_loss_and_grad(
        &self,
        x: &Array2<f64>,
        labels: &[usize],
        buckets: Option<&[&[usize]]>,
    ) -> Result<(f64, Gradients, usize)> {
        let batch = x.nrows();
        if batch == 0 || labels.len() != batch {
            return Err(Error::Shape(format!(
                "batch of {batch} inputs with {} labels",
                labels.len()
            )));
        }
        let (z1, a1, probs) = self.dense_forward(x);
        let mut loss = 0.0;
        let mut correct = 0;
        let mut dlogits = probs;
        for (s, &y) in labels.iter().enumerate() {
            if y >= self.spec.num_classes {
                return Err(Error::Shape(format!(
                    "label {y} out of range for {} classes",
                    self.spec.num_classes
                )));
            }
            let row = dlogits.row(s);
            loss -= row[y].max(f64::MIN_POSITIVE).ln();
            if argmax(row.to_slice().unwrap()) == y {
                correct += 1;
            }
            dlogits[(s, y)] -= 1.0;
        }
        loss /= batch as f64;
        dlogits /= batch as f64;

        let output_w_grad = a1.t().dot(&dlogits);
        let output_b_grad = dlogits.sum_axis(Axis(0));
        let da1 = dlogits.dot(&self.output_w.t());
        let mut dz1 = da1;
        dz1.zip_mut_with(&z1, |g, &z| {
            if z <= 0.0 {
                *g = 0.0;
            }
        });
        let hidden_w_grad = x.t().dot(&dz1);
        let hidden_b_grad = dz1.sum_axis(Axis(0));

        let mut emb_grads: Vec<Array2<f64>> =
            self.embeddings.iter().map(|t| Array2::zeros(t.raw_dim())).collect();
        if let Some(buckets) = buckets {
            let d = self.spec.embedding_dim;
            let dx = dz1.dot(&self.hidden_w.t());
            for (s, sample) in buckets.iter().enumerate() {
                for (f, &b) in sample.iter().enumerate() {
                    let mut row = emb_grads[f].row_mut(b);
                    let src = dx.row(s);
                    for (dst, j) in row.iter_mut().zip(f * d..(f + 1) * d) {
                        *dst += src[j];
                    }
                }
            }
        }
        Ok((
            loss,
            Gradients {
                embeddings: emb_grads,
                hidden_w: hidden_w_grad,
                hidden_b: hidden_b_grad,
                output_w: output_w_grad,
                output_b: output_b_grad,
            },
            correct,
        ))
    }

    /// Trains in place; the report carries per-epoch loss and accuracy.
    pub fn train(&mut self, ds: &Dataset, cfg: &TrainConfig) -> Result<TrainReport> {
        cfg.validate()?;
        if ds.num_features != self.spec.num_features() {
            return Err(Error::Shape(format!(
                "dataset has {} features, model expects {}",
                ds.num_features,
                self.spec.num_features()
            )));
        }
        if ds.is_empty() {
            return Err(Error::Data { line: None, msg: "cannot train on an empty dataset".into() });
        }
        let n = ds.len();
        let labels = ds.labels();
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.spec.num_classes) {
            return Err(Error::Data {
                line: None,
                msg: format!("label {bad} out of range for {} classes", self.spec.num_classes),
            });
        }

        // seeded split: validation is the first slice after one shuffle
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut order: Vec<usize> = (0..n).collect();
        shuffle(&mut order, &mut rng);
        let val_size = ((n as f64 * cfg.validation_fraction) as usize).clamp(1, n - 1);
        let (val_idx, train_idx) = order.split_at(val_size);
        let mut train_idx = train_idx.to_vec();

        let inputs = self.prepare_inputs(ds, &train_idx)?;

        let initial_train_loss = self.mean_loss(&inputs, &train_idx, &labels)?;
        let mut adam = AdamState::new(self);
        let mut report = TrainReport {
            initial_train_loss,
            epochs: Vec::with_capacity(cfg.epochs),
            train_size: train_idx.len(),
            validation_size: val_size,
        };

        for _ in 0..cfg.epochs {
            shuffle(&mut train_idx, &mut rng);
            let mut loss_sum = 0.0;
            let mut correct = 0usize;
            for chunk in train_idx.chunks(cfg.batch_size) {
                let batch_labels: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
                let (loss, grads, batch_correct) = match &inputs {
                    Inputs::Buckets(all) => {
                        let batch: Vec<&[usize]> =
                            chunk.iter().map(|&i| all[i].as_slice()).collect();
                        let x = self.assemble_batch(&batch)?;
                        self.dense_loss_and_grad(&x, &batch_labels, Some(&batch))?
                    }
                    Inputs::Dense(all) => {
                        let x = select_rows(all, chunk);
                        self.dense_loss_and_grad(&x, &batch_labels, None)?
                    }
                };
                loss_sum += loss * chunk.len() as f64;
                correct += batch_correct;
                adam.step(self, &grads, cfg);
            }
            let val_correct = self.count_correct(&inputs, val_idx, &labels)?;
            report.epochs.push(EpochStats {
                train_loss: loss_sum / train_idx.len() as f64,
                train_accuracy: correct as f64 / train_idx.len() as f64,
                validation_accuracy: val_correct as f64 / val_size as f64,
            });
        }
        Ok(report)
    }

    /// Encodes the whole dataset once. Baseline mode also fits the
    /// standardization on the training split.
    fn prepare_inputs(&mut self, ds: &Dataset, train_idx: &[usize]) -> Result<Inputs> {
        if self.spec.baseline_mode {
            let f = self.spec.num_features();
            let mut mean = Array1::zeros(f);
            for &i in train_idx {
                for (m, &v) in mean.iter_mut().zip(&ds.records[i].features) {
                    *m += v as f64;
                }
            }
            mean /= train_idx.len() as f64;
            let mut var = Array1::<f64>::zeros(f);
            for &i in train_idx {
                for (s, (&v, m)) in var.iter_mut().zip(ds.records[i].features.iter().zip(&mean)) {
                    *s += (v as f64 - m) * (v as f64 - m);
                }
            }
            var /= train_idx.len() as f64;
            self.norm_mean = mean;
            self.norm_scale = var.mapv(|v| if v > 0.0 { v.sqrt() } else { 1.0 });

            let mut x = Array2::zeros((ds.len(), f));
            for (s, r) in ds.records.iter().enumerate() {
                self.standardize_row(&r.features, x.row_mut(s).into_slice().unwrap());
            }
            Ok(Inputs::Dense(x))
        } else {
            let encoded: Vec<Vec<usize>> = ds
                .records
                .iter()
                .map(|r| self.spec.encoder.encode(&r.features))
                .collect::<Result<_>>()?;
            Ok(Inputs::Buckets(encoded))
        }
    }

    fn forward_rows(&self, inputs: &Inputs, idx: &[usize]) -> Result<Array2<f64>> {
        let x = match inputs {
            Inputs::Buckets(all) => {
                let batch: Vec<&[usize]> = idx.iter().map(|&i| all[i].as_slice()).collect();
                self.assemble_batch(&batch)?
            }
            Inputs::Dense(all) => select_rows(all, idx),
        };
        Ok(self.dense_forward(&x).2)
    }

    fn mean_loss(&self, inputs: &Inputs, idx: &[usize], labels: &[usize]) -> Result<f64> {
        let mut sum = 0.0;
        for chunk in idx.chunks(EVAL_BATCH) {
            let probs = self.forward_rows(inputs, chunk)?;
            for (row, &i) in probs.rows().into_iter().zip(chunk) {
                sum -= row[labels[i]].max(f64::MIN_POSITIVE).ln();
            }
        }
        Ok(sum / idx.len() as f64)
    }

    fn count_correct(&self, inputs: &Inputs, idx: &[usize], labels: &[usize]) -> Result<usize> {
        let mut correct = 0;
        for chunk in idx.chunks(EVAL_BATCH) {
            let probs = self.forward_rows(inputs, chunk)?;
            for (row, &i) in probs.rows().into_iter().zip(chunk) {
                if argmax(row.to_slice().unwrap()) == labels[i] {
                    correct += 1;
                }
            }
        }
        Ok(correct)
    }

    /// Batch prediction over raw feature rows.
    pub fn predict_all(&self, ds: &Dataset) -> Result<Vec<usize>> {
        ds.records.iter().map(|r| self.predict(&r.features)).collect()
    }
}

const EVAL_BATCH: usize = 1024;

enum Inputs {
    Buckets(Vec<Vec<usize>>),
    Dense(Array2<f64>),
}

fn select_rows(all: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    let mut x = Array2::zeros((idx.len(), all.ncols()));
    for (dst, &i) in idx.iter().enumerate() {
        x.row_mut(dst).assign(&all.row(i));
    }
    x
}

fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// First index of the maximum: ties resolve to the smallest id.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Fisher-Yates with the shared training RNG.
fn shuffle<R: Rng>(idx: &mut [usize], rng: &mut R) {
    for i in (1..idx.len()).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
}

/// Adam moment estimates, one pair per parameter tensor.
struct AdamState {
    t: u64,
    m_emb: Vec<Array2<f64>>,
    v_emb: Vec<Array2<f64>>,
    m_hw: Array2<f64>,
    v_hw: Array2<f64>,
    m_hb: Array1<f64>,
    v_hb: Array1<f64>,
    m_ow: Array2<f64>,
    v_ow: Array2<f64>,
    m_ob: Array1<f64>,
    v_ob: Array1<f64>,
}

impl AdamState {
    fn new(model: &RecommenderModel) -> Self {
        Self {
            t: 0,
            m_emb: model.embeddings.iter().map(|e| Array2::zeros(e.raw_dim())).collect(),
            v_emb: model.embeddings.iter().map(|e| Array2::zeros(e.raw_dim())).collect(),
            m_hw: Array2::zeros(model.hidden_w.raw_dim()),
            v_hw: Array2::zeros(model.hidden_w.raw_dim()),
            m_hb: Array1::zeros(model.hidden_b.raw_dim()),
            v_hb: Array1::zeros(model.hidden_b.raw_dim()),
            m_ow: Array2::zeros(model.output_w.raw_dim()),
            v_ow: Array2::zeros(model.output_w.raw_dim()),
            m_ob: Array1::zeros(model.output_b.raw_dim()),
            v_ob: Array1::zeros(model.output_b.raw_dim()),
        }
    }

    fn step(&mut self, model: &mut RecommenderModel, grads: &Gradients, cfg: &TrainConfig) {
        self.t += 1;
        let bias1 = 1.0 - cfg.adam_beta1.powi(self.t as i32);
        let bias2 = 1.0 - cfg.adam_beta2.powi(self.t as i32);
        let update = |param: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = cfg.adam_beta1 * *m + (1.0 - cfg.adam_beta1) * g;
            *v = cfg.adam_beta2 * *v + (1.0 - cfg.adam_beta2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            *param -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
        };
        for ((table, grad), (m, v)) in model
            .embeddings
            .iter_mut()
            .zip(&grads.embeddings)
            .zip(self.m_emb.iter_mut().zip(self.v_emb.iter_mut()))
        {
            for ((p, &g), (m, v)) in
                table.iter_mut().zip(grad.iter()).zip(m.iter_mut().zip(v.iter_mut()))
            {
                update(p, g, m, v);
            }
        }
        for ((p, &g), (m, v)) in model
            .hidden_w
            .iter_mut()
            .zip(grads.hidden_w.iter())
            .zip(self.m_hw.iter_mut().zip(self.v_hw.iter_mut()))
        {
            update(p, g, m, v);
        }
        for ((p, &g), (m, v)) in model
            .hidden_b
            .iter_mut()
            .zip(grads.hidden_b.iter())
            .zip(self.m_hb.iter_mut().zip(self.v_hb.iter_mut()))
        {
            update(p, g, m, v);
        }
        for ((p, &g), (m, v)) in model
            .output_w
            .iter_mut()
            .zip(grads.output_w.iter())
            .zip(self.m_ow.iter_mut().zip(self.v_ow.iter_mut()))
        {
            update(p, g, m, v);
        }
        for ((p, &g), (m, v)) in model
            .output_b
            .iter_mut()
            .zip(grads.output_b.iter())
            .zip(self.m_ob.iter_mut().zip(self.v_ob.iter_mut()))
        {
            update(p, g, m, v);
        }
    }
}

// ---------------------------------------------------------------------------
// Checkpointing
// ---------------------------------------------------------------------------

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TensorInfo {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    format_version: u32,
    spec: ModelSpec,
    tensors: Vec<TensorInfo>,
}

impl RecommenderModel {
    fn tensor_list(&self) -> Vec<(String, Vec<usize>, Vec<f64>)> {
        let mut tensors = Vec::new();
        for (f, e) in self.embeddings.iter().enumerate() {
            tensors.push((
                format!("embedding.{f}"),
                vec![e.nrows(), e.ncols()],
                e.iter().cloned().collect(),
            ));
        }
        tensors.push((
            "hidden.weight".into(),
            vec![self.hidden_w.nrows(), self.hidden_w.ncols()],
            self.hidden_w.iter().cloned().collect(),
        ));
        tensors.push(("hidden.bias".into(), vec![self.hidden_b.len()], self.hidden_b.to_vec()));
        tensors.push((
            "output.weight".into(),
            vec![self.output_w.nrows(), self.output_w.ncols()],
            self.output_w.iter().cloned().collect(),
        ));
        tensors.push(("output.bias".into(), vec![self.output_b.len()], self.output_b.to_vec()));
        tensors.push(("norm.mean".into(), vec![self.norm_mean.len()], self.norm_mean.to_vec()));
        tensors.push(("norm.scale".into(), vec![self.norm_scale.len()], self.norm_scale.to_vec()));
        tensors
    }

    /// Writes the checkpoint: one line of header JSON, then every tensor
    /// as little-endian f64 in declared order.
    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        let tensors = self.tensor_list();
        let header = CheckpointHeader {
            format_version: CHECKPOINT_VERSION,
            spec: self.spec.clone(),
            tensors: tensors
                .iter()
                .map(|(name, shape, _)| TensorInfo { name: name.clone(), shape: shape.clone() })
                .collect(),
        };
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        serde_json::to_writer(&mut out, &header)
            .map_err(|e| Error::Checkpoint(format!("cannot encode header: {e}")))?;
        out.write_all(b"\n")?;
        for (_, _, values) in &tensors {
            for v in values {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Reads a checkpoint back; fails on version mismatch, truncation,
/// trailing bytes, shape inconsistency, or non-finite values.
pub fn load_checkpoint(path: &Path) -> Result<RecommenderModel> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Checkpoint("missing header line".into()))?;
    let header: CheckpointHeader = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
    if header.format_version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "format version {} unsupported (expected {CHECKPOINT_VERSION})",
            header.format_version
        )));
    }
    header.spec.validate()?;

    let body = &bytes[newline + 1..];
    let total: usize = header.tensors.iter().map(|t| t.shape.iter().product::<usize>()).sum();
    if body.len() != total * 8 {
        return Err(Error::Checkpoint(format!(
            "expected {} tensor bytes, found {}",
            total * 8,
            body.len()
        )));
    }
    let mut values = Vec::with_capacity(total);
    for chunk in body.chunks_exact(8) {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::Checkpoint("non-finite parameter value".into()));
        }
        values.push(v);
    }

    let mut offset = 0;
    let mut take = |shape: &[usize]| {
        let len: usize = shape.iter().product();
        let slice = values[offset..offset + len].to_vec();
        offset += len;
        slice
    };

    let spec = header.spec;
    let expected_embeddings = if spec.baseline_mode { 0 } else { spec.num_features() };
    let expected_names: Vec<String> = (0..expected_embeddings)
        .map(|f| format!("embedding.{f}"))
        .chain(
            ["hidden.weight", "hidden.bias", "output.weight", "output.bias", "norm.mean", "norm.scale"]
                .iter()
                .map(|s| s.to_string()),
        )
        .collect();
    let actual_names: Vec<&String> = header.tensors.iter().map(|t| &t.name).collect();
    if actual_names.len() != expected_names.len()
        || actual_names.iter().zip(&expected_names).any(|(a, b)| *a != b)
    {
        return Err(Error::Checkpoint(format!("unexpected tensor list {actual_names:?}")));
    }

    let mut embeddings = Vec::with_capacity(expected_embeddings);
    for (f, info) in header.tensors[..expected_embeddings].iter().enumerate() {
        let rule_vocab = spec.encoder.rules[f].vocab();
        if info.shape != [rule_vocab, spec.embedding_dim] {
            return Err(Error::Checkpoint(format!(
                "embedding.{f} shape {:?} does not match spec ({rule_vocab}, {})",
                info.shape, spec.embedding_dim
            )));
        }
        let data = take(&info.shape);
        embeddings.push(
            Array2::from_shape_vec((info.shape[0], info.shape[1]), data)
                .expect("length checked above"),
        );
    }
    let dense_shapes: Vec<Vec<usize>> = vec![
        vec![spec.input_dim(), spec.hidden_units],
        vec![spec.hidden_units],
        vec![spec.hidden_units, spec.num_classes],
        vec![spec.num_classes],
        vec![spec.num_features()],
        vec![spec.num_features()],
    ];
    for (info, expected) in header.tensors[expected_embeddings..].iter().zip(&dense_shapes) {
        if &info.shape != expected {
            return Err(Error::Checkpoint(format!(
                "{} shape {:?} does not match spec {expected:?}",
                info.name, info.shape
            )));
        }
    }
    let hidden_w = Array2::from_shape_vec(
        (spec.input_dim(), spec.hidden_units),
        take(&dense_shapes[0]),
    )
    .unwrap();
    let hidden_b = Array1::from_vec(take(&dense_shapes[1]));
    let output_w = Array2::from_shape_vec(
        (spec.hidden_units, spec.num_classes),
        take(&dense_shapes[2]),
    )
    .unwrap();
    let output_b = Array1::from_vec(take(&dense_shapes[3]));
    let norm_mean = Array1::from_vec(take(&dense_shapes[4]));
    let norm_scale = Array1::from_vec(take(&dense_shapes[5]));
    Ok(RecommenderModel {
        spec,
        embeddings,
        hidden_w,
        hidden_b,
        output_w,
        output_b,
        norm_mean,
        norm_scale,
    })
}
