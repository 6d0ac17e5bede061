use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::training::SupervisedDataset;

/// Fixed dilations of the Mexican-hat prototype `λ e^{-λ}`, each atom scaled
/// to peak at 1 at its own scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MexicanHatBank {
    pub scales: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

pub fn mexican_hat_atom(lambda: f64, scale: f64) -> f64 {
    let r = lambda / scale;
    r * (1.0 - r).exp()
}

impl MexicanHatBank {
    /// `k` scales log-spaced between `λ_max / 8` and `3 λ_max / 4`, equal
    /// amplitudes `1 / k`.
    pub fn fixed(k: usize, lambda_max: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("need at least one scale"));
        }
        let (lo, hi) = (lambda_max / 8.0, 0.75 * lambda_max);
        let scales = if k == 1 {
            vec![(lo * hi).sqrt()]
        } else {
            (0..k)
                .map(|i| lo * (hi / lo).powf(i as f64 / (k - 1) as f64))
                .collect()
        };
        Ok(MexicanHatBank {
            scales,
            amplitudes: vec![1.0 / k as f64; k],
        })
    }

    pub fn num_atoms(&self) -> usize {
        self.scales.len()
    }

    pub fn eval(&self, lambdas: &[f64]) -> Vec<f64> {
        lambdas
            .iter()
            .map(|&l| {
                self.scales
                    .iter()
                    .zip(&self.amplitudes)
                    .map(|(&s, &a)| a * mexican_hat_atom(l, s))
                    .sum()
            })
            .collect()
    }

    /// Same atoms with amplitudes chosen by least squares on a dataset.
    pub fn fitted(k: usize, dataset: &SupervisedDataset) -> Result<Self> {
        let mut bank = MexicanHatBank::fixed(k, dataset.lambda_max())?;
        let lambdas = dataset.eigenvalues();
        let atoms: Vec<Vec<f64>> = bank
            .scales
            .iter()
            .map(|&s| lambdas.iter().map(|&l| mexican_hat_atom(l, s)).collect())
            .collect();
        // normal equations: M_kl = Σ_ij φ_k φ_l x̂², b_k = Σ_ij φ_k x̂ ŷ
        let mut gram = vec![vec![0.0; k]; k];
        let mut rhs = vec![0.0; k];
        for (x, y) in dataset.spectral_pairs() {
            for j in 0..lambdas.len() {
                let xx = x[j] * x[j];
                for a in 0..k {
                    rhs[a] += atoms[a][j] * x[j] * y[j];
                    for b in 0..k {
                        gram[a][b] += atoms[a][j] * atoms[b][j] * xx;
                    }
                }
            }
        }
        bank.amplitudes = solve_symmetric(gram, rhs)?;
        Ok(bank)
    }
}

/// Gaussian elimination with partial pivoting and a small ridge.
fn solve_symmetric(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    let trace: f64 = (0..n).map(|i| a[i][i]).sum();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += 1e-12 * trace.max(1e-300);
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("nonempty range");
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::degenerate("singular least-squares system"));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}
