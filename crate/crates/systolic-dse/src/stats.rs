//! Dataset statistics: class frequency histograms and two-component PCA
//! for eyeballing class separability.

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Relative label frequencies, most frequent first (ties by label id).
pub fn class_histogram(ds: &Dataset) -> Result<Vec<(usize, f64)>> {
    if ds.is_empty() {
        return Err(Error::Data { line: None, msg: "empty dataset".into() });
    }
    let mut counts: std::collections::BTreeMap<usize, u64> = std::collections::BTreeMap::new();
    for r in &ds.records {
        *counts.entry(r.label).or_insert(0) += 1;
    }
    let total = ds.len() as f64;
    let mut freqs: Vec<(usize, f64)> =
        counts.into_iter().map(|(label, c)| (label, c as f64 / total)).collect();
    freqs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(freqs)
}

/// Top-two principal components of the selected classes' points, plus
/// their 2-D projections.
#[derive(Clone, Debug)]
pub struct PcaResult {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub components: [Vec<f64>; 2],
    /// (pc1, pc2, class) per projected point.
    pub projections: Vec<(f64, f64, usize)>,
}

const PCA_TOLERANCE: f64 = 1e-9;
const PCA_MAX_ITERS: usize = 1000;

/// Standardizes the points of the two selected classes, extracts the top
/// two principal components by power iteration with deflation, and
/// projects the points onto them.
pub fn top2_pca(
    features: &[Vec<f64>],
    labels: &[usize],
    classes: (usize, usize),
) -> Result<PcaResult> {
    if features.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let selected: Vec<usize> = (0..features.len())
        .filter(|&i| labels[i] == classes.0 || labels[i] == classes.1)
        .collect();
    for class in [classes.0, classes.1] {
        let count = selected.iter().filter(|&&i| labels[i] == class).count();
        if count < 3 {
            return Err(Error::Data {
                line: None,
                msg: format!("class {class} has {count} points, need at least 3"),
            });
        }
    }
    let dim = features[selected[0]].len();
    if dim < 2 {
        return Err(Error::Data { line: None, msg: format!("{dim} feature dimensions, need >= 2") });
    }
    if selected.iter().any(|&i| features[i].len() != dim) {
        return Err(Error::Shape("ragged feature rows".into()));
    }

    let n = selected.len();
    let mut mean = vec![0.0; dim];
    for &i in &selected {
        for (m, v) in mean.iter_mut().zip(&features[i]) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut scale = vec![0.0; dim];
    for &i in &selected {
        for (s, (v, m)) in scale.iter_mut().zip(features[i].iter().zip(&mean)) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut scale {
        *s = (*s / n as f64).sqrt();
        if *s == 0.0 {
            *s = 1.0; // zero-variance features pass through unscaled
        }
    }

    let standardized: Vec<Vec<f64>> = selected
        .iter()
        .map(|&i| {
            features[i]
                .iter()
                .zip(mean.iter().zip(&scale))
                .map(|(v, (m, s))| (v - m) / s)
                .collect()
        })
        .collect();

    // covariance of the standardized points
    let mut cov = vec![vec![0.0; dim]; dim];
    for row in &standardized {
        for a in 0..dim {
            for b in a..dim {
                cov[a][b] += row[a] * row[b];
            }
        }
    }
    let denom = (n - 1).max(1) as f64;
    for a in 0..dim {
        for b in a..dim {
            cov[a][b] /= denom;
            cov[b][a] = cov[a][b];
        }
    }

    let first = dominant_eigenvector(&cov, None);
    let lambda = rayleigh(&cov, &first);
    deflate(&mut cov, &first, lambda);
    let second = dominant_eigenvector(&cov, Some(&first));

    let components = [fix_sign(first), fix_sign(second)];
    let projections = standardized
        .iter()
        .zip(&selected)
        .map(|(row, &i)| (dot(row, &components[0]), dot(row, &components[1]), labels[i]))
        .collect();

    Ok(PcaResult { mean, scale, components, projections })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn rayleigh(m: &[Vec<f64>], v: &[f64]) -> f64 {
    dot(&mat_vec(m, v), v)
}

fn deflate(m: &mut [Vec<f64>], v: &[f64], lambda: f64) {
    for a in 0..v.len() {
        for b in 0..v.len() {
            m[a][b] -= lambda * v[a] * v[b];
        }
    }
}

/// Power iteration on a symmetric PSD matrix. Re-orthogonalizes against
/// `against` each step so the deflated solve stays in the complement of
/// the first component. Falls back to a deterministic basis direction on
/// a (numerically) zero matrix.
fn dominant_eigenvector(m: &[Vec<f64>], against: Option<&[f64]>) -> Vec<f64> {
    let dim = m.len();
    // deterministic start with distinct entries so no single orthogonal
    // subspace traps the iteration
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 / (i + 1) as f64).collect();
    if let Some(prev) = against {
        orthogonalize(&mut v, prev);
    }
    let len = norm(&v);
    for x in &mut v {
        *x /= len;
    }
    for _ in 0..PCA_MAX_ITERS {
        let mut next = mat_vec(m, &v);
        if let Some(prev) = against {
            orthogonalize(&mut next, prev);
        }
        let len = norm(&next);
        if len < PCA_TOLERANCE {
            return fallback_direction(dim, against);
        }
        for x in &mut next {
            *x /= len;
        }
        let delta: f64 =
            v.iter().zip(&next).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        v = next;
        if delta < PCA_TOLERANCE {
            break;
        }
    }
    v
}

fn orthogonalize(v: &mut [f64], against: &[f64]) {
    let proj = dot(v, against);
    for (x, a) in v.iter_mut().zip(against) {
        *x -= proj * a;
    }
}

/// Unit vector orthogonal to `against` (or plain e_0), for degenerate
/// inputs with no remaining variance.
fn fallback_direction(dim: usize, against: Option<&[f64]>) -> Vec<f64> {
    let Some(prev) = against else {
        let mut e = vec![0.0; dim];
        e[0] = 1.0;
        return e;
    };
    // basis vector least aligned with the previous component
    let pivot = prev
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut e = vec![0.0; dim];
    e[pivot] = 1.0;
    orthogonalize(&mut e, prev);
    let len = norm(&e);
    for x in &mut e {
        *x /= len;
    }
    e
}

/// Sign convention: the largest-magnitude entry is positive.
fn fix_sign(mut v: Vec<f64>) -> Vec<f64> {
    let pivot = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    if v[pivot] < 0.0 {
        for x in &mut v {
            *x = -*x;
        }
    }
    v
}
