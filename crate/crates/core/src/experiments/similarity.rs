use serde::{Deserialize, Serialize};

use super::metrics::pearson;
use crate::filtering::SignalBatch;
use crate::graphs::{Graph, SpectralDecomposition};

pub const HISTOGRAM_BINS: usize = 32;
const EPS: f64 = 1e-12;

/// Structural and signal-level comparisons between a source and a target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityFeatures {
    pub spectral_distance: f64,
    pub degree_correlation: f64,
    pub clustering_similarity: f64,
    pub path_length_similarity: f64,
    pub density_similarity: f64,
    pub signal_correlation: f64,
    pub spectral_similarity: f64,
    pub moment_similarity: f64,
    /// Names of correlation features that were undefined and set to 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

impl SimilarityFeatures {
    pub const NAMES: [&'static str; 8] = [
        "spectral_distance",
        "degree_correlation",
        "clustering_similarity",
        "path_length_similarity",
        "density_similarity",
        "signal_correlation",
        "spectral_similarity",
        "moment_similarity",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.spectral_distance,
            self.degree_correlation,
            self.clustering_similarity,
            self.path_length_similarity,
            self.density_similarity,
            self.signal_correlation,
            self.spectral_similarity,
            self.moment_similarity,
        ]
    }
}

/// Piecewise-linear resampling of a sequence to `len` points.
pub fn resample(values: &[f64], len: usize) -> Vec<f64> {
    let n = values.len();
    if n == 0 || len == 0 {
        return Vec::new();
    }
    if n == 1 || len == 1 {
        return vec![values[0]; len];
    }
    (0..len)
        .map(|i| {
            let pos = i as f64 * (n - 1) as f64 / (len - 1) as f64;
            let lo = (pos.floor() as usize).min(n - 2);
            let frac = pos - lo as f64;
            values[lo] * (1.0 - frac) + values[lo + 1] * frac
        })
        .collect()
}

/// `1 - |a - b| / max(a, b, ε)`; equals 1 for equal inputs.
pub fn ratio_similarity(a: f64, b: f64) -> f64 {
    1.0 - (a - b).abs() / a.abs().max(b.abs()).max(EPS)
}

fn histogram(values: &[f64], upper: f64) -> Vec<f64> {
    let mut h = vec![0.0; HISTOGRAM_BINS];
    for &v in values {
        let bin = ((v / upper) * HISTOGRAM_BINS as f64).floor();
        let bin = (bin.max(0.0) as usize).min(HISTOGRAM_BINS - 1);
        h[bin] += 1.0;
    }
    h
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}

fn moments(values: &[f64]) -> [f64; 3] {
    let n = values.len() as f64;
    let mut m = [0.0; 3];
    for &v in values {
        m[0] += v;
        m[1] += v * v;
        m[2] += v * v * v;
    }
    m.map(|x| x / n)
}

/// Mean over signals of the squared spectral coefficients, in eigenvalue order.
pub fn spectral_energy(decomp: &SpectralDecomposition, signals: &SignalBatch) -> Vec<f64> {
    let mut energy = vec![0.0; decomp.num_nodes()];
    for col in signals.columns() {
        for (e, c) in energy.iter_mut().zip(decomp.analysis(col)) {
            *e += c * c;
        }
    }
    let s = signals.num_signals().max(1) as f64;
    energy.iter_mut().for_each(|e| *e /= s);
    energy
}

/// Sorted-eigenvalue L2 distance after resampling to the longer length.
pub fn spectral_distance(source: &[f64], target: &[f64]) -> f64 {
    let len = source.len().max(target.len());
    resample(source, len)
        .iter()
        .zip(resample(target, len))
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub fn similarity_features(
    source: (&Graph, &SpectralDecomposition, &SignalBatch),
    target: (&Graph, &SpectralDecomposition, &SignalBatch),
) -> SimilarityFeatures {
    let (gs, ds, xs) = source;
    let (gt, dt, xt) = target;
    let mut undefined = Vec::new();
    let mut correlation = |name: &str, a: Vec<f64>, b: Vec<f64>| {
        let len = a.len().max(b.len());
        pearson(&resample(&a, len), &resample(&b, len)).unwrap_or_else(|| {
            undefined.push(name.to_string());
            0.0
        })
    };

    let sorted_degrees = |g: &Graph| {
        let mut d: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
        d.sort_by(f64::total_cmp);
        d
    };
    let degree_correlation = correlation("degree_correlation", sorted_degrees(gs), sorted_degrees(gt));
    let signal_correlation =
        correlation("signal_correlation", spectral_energy(ds, xs), spectral_energy(dt, xt));

    let (ls, lt) = (ds.eigenvalues(), dt.eigenvalues());
    let upper = ds.largest_eigenvalue().max(dt.largest_eigenvalue()).max(EPS);
    let (ms, mt) = (moments(ls), moments(lt));
    let moment_similarity = (0..3).map(|i| ratio_similarity(ms[i], mt[i])).sum::<f64>() / 3.0;

    SimilarityFeatures {
        spectral_distance: spectral_distance(ls, lt),
        degree_correlation,
        clustering_similarity: ratio_similarity(gs.global_clustering(), gt.global_clustering()),
        path_length_similarity: ratio_similarity(gs.average_path_length(), gt.average_path_length()),
        density_similarity: ratio_similarity(gs.density(), gt.density()),
        signal_correlation,
        spectral_similarity: cosine(&histogram(ls, upper), &histogram(lt, upper)),
        moment_similarity,
        undefined,
    }
}
