use crate::error::{Error, Result};
use crate::filtering::SignalBatch;

/// Mean over signals of the squared vertex-domain error, `(1/S) Σ_i ‖ŷ_i - y_i‖²`.
pub fn mse(predicted: &SignalBatch, target: &SignalBatch) -> Result<f64> {
    if predicted.num_nodes() != target.num_nodes()
        || predicted.num_signals() != target.num_signals()
    {
        return Err(Error::contract(format!(
            "batch shapes differ: {}x{} vs {}x{}",
            predicted.num_nodes(),
            predicted.num_signals(),
            target.num_nodes(),
            target.num_signals()
        )));
    }
    if target.num_signals() == 0 {
        return Err(Error::contract("mse of an empty batch"));
    }
    let total: f64 = predicted
        .as_column_major()
        .iter()
        .zip(target.as_column_major())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(total / target.num_signals() as f64)
}

/// Mean squared gap between two responses sampled at the same eigenvalues.
pub fn spectral_discrepancy(response: &[f64], reference: &[f64]) -> Result<f64> {
    if response.len() != reference.len() {
        return Err(Error::contract(format!(
            "responses have {} and {} samples",
            response.len(),
            reference.len()
        )));
    }
    if response.is_empty() {
        return Err(Error::contract("empty responses"));
    }
    let total: f64 = response
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(total / response.len() as f64)
}

/// Fractional reduction `(before - after) / before`.
pub fn improvement(before: f64, after: f64) -> Result<f64> {
    if !(before > 0.0) {
        return Err(Error::degenerate(format!(
            "improvement needs a positive baseline error, got {before}"
        )));
    }
    Ok((before - after) / before)
}

/// Sample mean and standard error (`std / sqrt(n)`, with `n - 1` in the variance).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Pearson correlation, or `None` when either sequence is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n != b.len() || n < 2 {
        return None;
    }
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let flat = |ss: f64, v: &[f64]| {
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        ss <= n as f64 * (1e-12 * scale).powi(2)
    };
    if flat(saa, a) || flat(sbb, b) {
        return None;
    }
    let denom = (saa * sbb).sqrt();
    Some((sab / denom).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn random_batch(n: usize, s: usize, seed: u64) -> SignalBatch {
        let mut rng = rng_from_seed(seed);
        let v = (0..n * s).map(|_| rng.random_range(-2.0..2.0)).collect();
        SignalBatch::from_column_major(n, s, v).unwrap()
    }

    #[test]
    fn mse_cases() {
        let y = random_batch(4, 1, 1);
        assert_eq!(mse(&y, &y).unwrap(), 0.0);
        let shifted: Vec<f64> = y.as_column_major().iter().map(|v| v + 1.0).collect();
        let yhat = SignalBatch::from_column_major(4, 1, shifted).unwrap();
        assert!((mse(&yhat, &y).unwrap() - 4.0).abs() < 1e-12);
        assert!(matches!(mse(&y, &random_batch(4, 2, 0)), Err(Error::Contract(_))));
    }

    #[test]
    fn mse_matches_double_loop() {
        for seed in 0..10 {
            let a = random_batch(7, 5, seed);
            let b = random_batch(7, 5, seed + 100);
            let mut total = 0.0;
            for s in 0..5 {
                let mut col = 0.0;
                for i in 0..7 {
                    col += (a.get(i, s) - b.get(i, s)).powi(2);
                }
                total += col;
            }
            assert!((mse(&a, &b).unwrap() - total / 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn discrepancy_cases() {
        let a = [0.1, 0.5, 0.9];
        assert_eq!(spectral_discrepancy(&a, &a).unwrap(), 0.0);
        let b: Vec<f64> = a.iter().map(|v| v + 1.0).collect();
        assert!((spectral_discrepancy(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!(spectral_discrepancy(&a, &b[..2]).is_err());
        let mut rng = rng_from_seed(3);
        let x: Vec<f64> = (0..20).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..20).map(|_| rng.random()).collect();
        let mut naive = 0.0;
        for j in 0..20 {
            naive += (x[j] - y[j]) * (x[j] - y[j]);
        }
        assert!((spectral_discrepancy(&x, &y).unwrap() - naive / 20.0).abs() < 1e-12);
    }

    #[test]
    fn improvement_cases() {
        assert_eq!(improvement(1.0, 0.5).unwrap(), 0.5);
        assert_eq!(improvement(0.3, 0.3).unwrap(), 0.0);
        assert!(matches!(improvement(0.0, 0.1), Err(Error::Degenerate(_))));
    }

    #[test]
    fn pearson_cases() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_none());
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
    }
}
