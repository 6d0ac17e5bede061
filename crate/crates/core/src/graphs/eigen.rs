use std::ops::{Index, IndexMut};

use super::laplacian::{LaplacianOperator, DEFAULT_DENSE_THRESHOLD};
use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver for a symmetric matrix.
///
/// Returns eigenvalues in ascending order and, when requested, the matching
/// orthonormal eigenvectors as columns.
pub fn jacobi_eigen(a: &DenseMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<DenseMatrix>)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::contract("Jacobi eigensolver needs a square matrix"));
    }
    let mut m = a.clone();
    let mut v = want_vectors.then(|| DenseMatrix::identity(n));
    let scale = a.frobenius_norm();
    if !scale.is_finite() {
        return Err(Error::numeric("matrix has non-finite entries"));
    }
    let target = (f64::EPSILON * scale).powi(2);

    let mut converged = n < 2 || scale == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)] * m[(p, q)])
            .sum();
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = m[(r, p)];
                    let arq = m[(r, q)];
                    m[(r, p)] = c * arp - s * arq;
                    m[(r, q)] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = m[(p, r)];
                    let aqr = m[(q, r)];
                    m[(p, r)] = c * apr - s * aqr;
                    m[(q, r)] = s * apr + c * aqr;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                if let Some(v) = v.as_mut() {
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = c * vrp - s * vrq;
                        v[(r, q)] = s * vrp + c * vrq;
                    }
                }
            }
        }
    }
    if !converged {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)] * m[(p, q)])
            .sum();
        // the stopping target sits at roundoff level; anything near it is fine
        if off.sqrt() > 1e-12 * scale {
            return Err(Error::numeric(format!(
                "Jacobi eigensolver did not converge (off-diagonal norm {})",
                off.sqrt()
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = v.map(|v| {
        let mut sorted = DenseMatrix::zeros(n, n);
        for (new_c, &old_c) in order.iter().enumerate() {
            for r in 0..n {
                sorted[(r, new_c)] = v[(r, old_c)];
            }
        }
        sorted
    });
    Ok((values, vectors))
}

/// Eigenpairs of a Laplacian: `L = U diag(lambda) U^T`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DenseMatrix,
}

impl SpectralDecomposition {
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: DenseMatrix) -> Result<Self> {
        let n = eigenvalues.len();
        if eigenvectors.rows() != n || eigenvectors.cols() != n {
            return Err(Error::contract("eigenvector matrix must be N x N"));
        }
        Ok(SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Columns are eigenvectors.
    pub fn eigenvectors(&self) -> &DenseMatrix {
        &self.eigenvectors
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Spectral coefficients `U^T x`.
    pub fn analysis(&self, x: &[f64]) -> Vec<f64> {
        let n = self.num_nodes();
        let mut out = vec![0.0; n];
        for (r, &xr) in x.iter().enumerate().take(n) {
            let row = self.eigenvectors.row(r);
            for (o, u) in out.iter_mut().zip(row) {
                *o += u * xr;
            }
        }
        out
    }

    /// Vertex-domain signal `U c`.
    pub fn synthesis(&self, coeffs: &[f64]) -> Vec<f64> {
        (0..self.num_nodes())
            .map(|r| {
                self.eigenvectors
                    .row(r)
                    .iter()
                    .zip(coeffs)
                    .map(|(u, c)| u * c)
                    .sum()
            })
            .collect()
    }

    /// `max |U^T U - I|`
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.num_nodes();
        let utu = self.eigenvectors.transpose().matmul(&self.eigenvectors);
        utu.max_abs_diff(&DenseMatrix::identity(n))
    }

    /// `||U Lambda U^T - L||_F / max(||L||_F, 1)`
    pub fn reconstruction_error(&self, l: &DenseMatrix) -> f64 {
        let n = self.num_nodes();
        let mut scaled = self.eigenvectors.clone();
        for r in 0..n {
            for c in 0..n {
                scaled[(r, c)] *= self.eigenvalues[c];
            }
        }
        let recon = scaled.matmul(&self.eigenvectors.transpose());
        recon.sub(l).frobenius_norm() / l.frobenius_norm().max(1.0)
    }
}

pub fn decompose(lap: &LaplacianOperator) -> Result<SpectralDecomposition> {
    decompose_with_threshold(lap, DEFAULT_DENSE_THRESHOLD)
}

pub fn decompose_with_threshold(
    lap: &LaplacianOperator,
    threshold: usize,
) -> Result<SpectralDecomposition> {
    let n = lap.num_nodes();
    if n > threshold {
        return Err(Error::Capability(format!(
            "dense eigendecomposition limited to {threshold} nodes (graph has {n}); \
             use Chebyshev filtering instead"
        )));
    }
    let (values, vectors) = jacobi_eigen(&lap.to_dense(), true)?;
    SpectralDecomposition::from_parts(values, vectors.expect("vectors requested"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_laplacian, generate_graph, Graph, GraphFamily, LaplacianKind};

    #[test]
    fn analytic_spectra() {
        let p2 = Graph::from_pairs(2, &[(0, 1)]).unwrap();
        let d = decompose(&build_laplacian(&p2, LaplacianKind::Combinatorial).unwrap()).unwrap();
        assert!((d.eigenvalues()[0]).abs() < 1e-14);
        assert!((d.eigenvalues()[1] - 2.0).abs() < 1e-14);

        let k4 = Graph::from_pairs(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let d = decompose(&build_laplacian(&k4, LaplacianKind::Combinatorial).unwrap()).unwrap();
        for (got, want) in d.eigenvalues().iter().zip([0.0, 4.0, 4.0, 4.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn er_reconstruction() {
        let g = generate_graph(&GraphFamily::ErdosRenyi { n: 32, p: 0.3 }, 9).unwrap();
        let lap = build_laplacian(&g, LaplacianKind::Combinatorial).unwrap();
        let d = decompose(&lap).unwrap();
        assert!(d.reconstruction_error(&lap.to_dense()) < 1e-10);
        assert!(d.orthonormality_error() < 1e-8);
        assert!(d.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn zero_multiplicity_counts_components() {
        let g = Graph::from_pairs(7, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        let d = decompose(&build_laplacian(&g, LaplacianKind::Combinatorial).unwrap()).unwrap();
        let zeros = d.eigenvalues().iter().filter(|l| l.abs() < 1e-8).count();
        assert_eq!(zeros, g.num_components());
        assert_eq!(zeros, 4);
    }

    #[test]
    fn threshold_is_enforced() {
        let g = generate_graph(&GraphFamily::Grid2D { rows: 3, cols: 3 }, 0).unwrap();
        let lap = build_laplacian(&g, LaplacianKind::Combinatorial).unwrap();
        assert!(matches!(decompose_with_threshold(&lap, 8), Err(Error::Capability(_))));
    }

    #[test]
    fn analysis_synthesis_round_trip() {
        let g = generate_graph(&GraphFamily::WattsStrogatz { n: 20, k: 4, beta: 0.3 }, 2).unwrap();
        let d = decompose(&build_laplacian(&g, LaplacianKind::Normalized).unwrap()).unwrap();
        let x: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin()).collect();
        let back = d.synthesis(&d.analysis(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
