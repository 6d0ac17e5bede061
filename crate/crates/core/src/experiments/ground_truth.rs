use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, streams};
use rand::Rng;

/// Points of the grid used for normalization and peak counting.
pub const GROUND_TRUTH_GRID: usize = 512;
const MAX_ATTEMPTS: u64 = 100;

/// One Gaussian bump; `width` is the standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    MaxOne,
}

/// Normalized sum of Gaussian bumps on `[0, λ_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthFilter {
    pub peaks: Vec<Peak>,
    pub normalization: Normalization,
    pub lambda_max: f64,
    /// Multiplier applied to the raw sum.
    pub scale: f64,
}

fn raw_sum(peaks: &[Peak], lambda: f64) -> f64 {
    peaks
        .iter()
        .map(|p| {
            let d = (lambda - p.center) / p.width;
            p.height * (-0.5 * d * d).exp()
        })
        .sum()
}

/// `points` equally spaced values covering `[0, lambda_max]`.
pub fn uniform_grid(lambda_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| lambda_max * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Strict local maxima of a sampled curve, endpoints included.
pub fn count_local_maxima(values: &[f64]) -> usize {
    let n = values.len();
    if n < 2 {
        return n;
    }
    (0..n)
        .filter(|&i| {
            let left = i == 0 || values[i] > values[i - 1];
            let right = i == n - 1 || values[i] > values[i + 1];
            left && right
        })
        .count()
}

impl GroundTruthFilter {
    pub fn new(peaks: Vec<Peak>, lambda_max: f64) -> Result<Self> {
        if peaks.is_empty() {
            return Err(Error::param("ground truth needs at least one peak"));
        }
        if !(lambda_max.is_finite() && lambda_max > 0.0) {
            return Err(Error::param("lambda_max must be positive"));
        }
        if peaks
            .iter()
            .any(|p| !(p.width > 0.0 && p.height > 0.0 && p.center.is_finite()))
        {
            return Err(Error::param("peaks need finite centers and positive widths and heights"));
        }
        let max = uniform_grid(lambda_max, GROUND_TRUTH_GRID)
            .into_iter()
            .map(|l| raw_sum(&peaks, l))
            .fold(0.0, f64::max);
        Ok(GroundTruthFilter {
            peaks,
            normalization: Normalization::MaxOne,
            lambda_max,
            scale: 1.0 / max,
        })
    }

    pub fn num_peaks(&self) -> usize {
        self.peaks.len()
    }

    pub fn eval_one(&self, lambda: f64) -> f64 {
        self.scale * raw_sum(&self.peaks, lambda)
    }

    pub fn eval(&self, lambdas: &[f64]) -> Vec<f64> {
        lambdas.iter().map(|&l| self.eval_one(l)).collect()
    }

    pub fn min_separation(&self) -> f64 {
        let mut c: Vec<f64> = self.peaks.iter().map(|p| p.center).collect();
        c.sort_by(f64::total_cmp);
        c.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

/// Random multi-peak target with the default minimum separation `λ_max / (2P)`.
pub fn make_ground_truth(num_peaks: usize, lambda_max: f64, seed: u64) -> Result<GroundTruthFilter> {
    make_ground_truth_separated(num_peaks, lambda_max, seed, lambda_max / (2.0 * num_peaks.max(1) as f64))
}

/// Random multi-peak target whose centers are at least `min_separation` apart
/// and whose grid response shows exactly `num_peaks` local maxima.
pub fn make_ground_truth_separated(
    num_peaks: usize,
    lambda_max: f64,
    seed: u64,
    min_separation: f64,
) -> Result<GroundTruthFilter> {
    if !(1..=4).contains(&num_peaks) {
        return Err(Error::param(format!("num_peaks must be in 1..=4, got {num_peaks}")));
    }
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return Err(Error::param("lambda_max must be positive"));
    }
    let base = derive_seed(seed, streams::GROUND_TRUTH);
    let slot = lambda_max / num_peaks as f64;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng_from_seed(derive_seed(base, attempt));
        let peaks: Vec<Peak> = (0..num_peaks)
            .map(|k| Peak {
                center: (k as f64 + rng.random::<f64>()) * slot,
                width: rng.random_range(lambda_max / 20.0..=lambda_max / 8.0),
                height: rng.random_range(0.5..=1.0),
            })
            .collect();
        let gt = GroundTruthFilter::new(peaks, lambda_max)?;
        if num_peaks > 1 && gt.min_separation() < min_separation {
            continue;
        }
        let grid = gt.eval(&uniform_grid(lambda_max, GROUND_TRUTH_GRID));
        if count_local_maxima(&grid) == num_peaks {
            return Ok(gt);
        }
    }
    Err(Error::degenerate(format!(
        "no {num_peaks}-peak target with separation {min_separation} after {MAX_ATTEMPTS} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_peak_normalized() {
        for seed in 0..20 {
            let gt = make_ground_truth(1, 2.0, seed).unwrap();
            let grid = gt.eval(&uniform_grid(2.0, GROUND_TRUTH_GRID));
            let max = grid.iter().cloned().fold(0.0, f64::max);
            assert!((max - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn peak_counts_and_ranges() {
        for p in 1..=4 {
            for seed in 0..25 {
                let gt = make_ground_truth(p, 3.0, seed).unwrap();
                let grid = gt.eval(&uniform_grid(3.0, GROUND_TRUTH_GRID));
                assert_eq!(count_local_maxima(&grid), p);
                for peak in &gt.peaks {
                    assert!((0.0..=3.0).contains(&peak.center));
                    assert!(peak.width >= 3.0 / 20.0 && peak.width <= 3.0 / 8.0);
                    assert!(peak.height >= 0.5 && peak.height <= 1.0);
                }
                if p > 1 {
                    assert!(gt.min_separation() >= 3.0 / (2.0 * p as f64));
                }
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(make_ground_truth(3, 2.0, 9).unwrap(), make_ground_truth(3, 2.0, 9).unwrap());
        assert_ne!(make_ground_truth(3, 2.0, 9).unwrap(), make_ground_truth(3, 2.0, 10).unwrap());
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(matches!(make_ground_truth(0, 2.0, 0), Err(Error::Parameter(_))));
        assert!(matches!(make_ground_truth(5, 2.0, 0), Err(Error::Parameter(_))));
        assert!(matches!(
            make_ground_truth_separated(2, 2.0, 0, 5.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn local_maxima_scan() {
        assert_eq!(count_local_maxima(&[0.0, 1.0, 0.0, 2.0, 1.0]), 2);
        assert_eq!(count_local_maxima(&[3.0, 2.0, 1.0]), 1);
        assert_eq!(count_local_maxima(&[1.0, 1.0, 1.0]), 0);
    }
}
