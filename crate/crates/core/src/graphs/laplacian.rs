use rand::Rng;
use serde::{Deserialize, Serialize};

use super::eigen::{jacobi_eigen, DenseMatrix};
use super::Graph;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, streams};

/// Graphs up to this many nodes get exact dense spectra.
pub const DEFAULT_DENSE_THRESHOLD: usize = 512;

/// Multiplier applied to power-iteration estimates of the largest eigenvalue.
pub const LAMBDA_MAX_SAFETY: f64 = 1.01;

const EXACT_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianKind {
    /// `D - W`
    Combinatorial,
    /// `I - D^{-1/2} W D^{-1/2}`
    Normalized,
}

/// Anything that can multiply a vector by a symmetric N x N matrix.
pub trait SpectralOperator {
    fn dim(&self) -> usize;
    /// `y <- A x`
    fn matvec(&self, x: &[f64], y: &mut [f64]);
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[k])] = self.values[k];
            }
        }
        m
    }
}

impl SpectralOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }
}

/// How `lambda_max` was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMaxSource {
    DenseEigensolver,
    PowerIteration,
    /// Power iteration did not converge; a Gershgorin-type bound is used.
    ConservativeBound,
    /// Graph without edges.
    Trivial,
}

#[derive(Clone, Debug)]
pub struct LaplacianOptions {
    pub dense_threshold: usize,
    pub power_tol: f64,
    pub power_max_iters: usize,
}

impl Default for LaplacianOptions {
    fn default() -> Self {
        LaplacianOptions {
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            power_tol: 1e-10,
            power_max_iters: 20_000,
        }
    }
}

/// Sparse graph Laplacian plus an upper bound on its spectrum.
#[derive(Clone, Debug)]
pub struct LaplacianOperator {
    graph: Graph,
    kind: LaplacianKind,
    lambda_max: f64,
    lambda_max_source: LambdaMaxSource,
    matrix: CsrMatrix,
}

impl LaplacianOperator {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn kind(&self) -> LaplacianKind {
        self.kind
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    /// Upper bound on the largest eigenvalue.
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn lambda_max_source(&self) -> LambdaMaxSource {
        self.lambda_max_source
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.matrix.to_dense()
    }

    /// Copy of this operator with a caller-provided spectral bound.
    pub fn with_lambda_max(&self, lambda_max: f64) -> Self {
        LaplacianOperator {
            lambda_max,
            ..self.clone()
        }
    }

    /// Gershgorin-type bound: `2 max_i d_i` (combinatorial) or `2` (normalized).
    pub fn conservative_bound(&self) -> f64 {
        match self.kind {
            LaplacianKind::Combinatorial => {
                2.0 * self
                    .graph
                    .weighted_degrees()
                    .into_iter()
                    .fold(0.0, f64::max)
            }
            LaplacianKind::Normalized => 2.0,
        }
    }
}

impl SpectralOperator for LaplacianOperator {
    fn dim(&self) -> usize {
        self.matrix.n
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.matvec(x, y)
    }
}

pub fn build_laplacian(g: &Graph, kind: LaplacianKind) -> Result<LaplacianOperator> {
    build_laplacian_with(g, kind, &LaplacianOptions::default())
}

pub fn build_laplacian_with(
    g: &Graph,
    kind: LaplacianKind,
    opts: &LaplacianOptions,
) -> Result<LaplacianOperator> {
    let n = g.num_nodes();
    let deg = g.weighted_degrees();
    if kind == LaplacianKind::Normalized {
        if let Some(i) = deg.iter().position(|&d| d <= 0.0) {
            return Err(Error::degenerate(format!(
                "node {i} is isolated; the normalized Laplacian is undefined"
            )));
        }
    }
    let mut rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let d = match kind {
                LaplacianKind::Combinatorial => deg[i],
                LaplacianKind::Normalized => 1.0,
            };
            vec![(i, d)]
        })
        .collect();
    for e in g.edges() {
        let w = match kind {
            LaplacianKind::Combinatorial => -e.weight,
            LaplacianKind::Normalized => -e.weight / (deg[e.u] * deg[e.v]).sqrt(),
        };
        rows[e.u].push((e.v, w));
        rows[e.v].push((e.u, w));
    }
    let mut lap = LaplacianOperator {
        graph: g.clone(),
        kind,
        lambda_max: 0.0,
        lambda_max_source: LambdaMaxSource::Trivial,
        matrix: CsrMatrix::from_rows(rows),
    };
    if g.num_edges() == 0 {
        return Ok(lap);
    }
    let (value, source) = if n <= opts.dense_threshold {
        let (vals, _) = jacobi_eigen(&lap.to_dense(), false)?;
        let top = vals.into_iter().fold(f64::NEG_INFINITY, f64::max);
        // roundoff slack keeps the bound at or above the true eigenvalue
        (top * (1.0 + EXACT_SLACK), LambdaMaxSource::DenseEigensolver)
    } else {
        let est = estimate_lambda_max(&lap, opts.power_tol, opts.power_max_iters)?;
        let source = if est.converged {
            LambdaMaxSource::PowerIteration
        } else {
            LambdaMaxSource::ConservativeBound
        };
        (est.value, source)
    };
    lap.lambda_max = match kind {
        LaplacianKind::Normalized => value.min(2.0),
        LaplacianKind::Combinatorial => value,
    };
    lap.lambda_max_source = source;
    Ok(lap)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaMaxEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Power-iteration upper bound on the largest Laplacian eigenvalue.
///
/// The Rayleigh quotient is multiplied by [`LAMBDA_MAX_SAFETY`] and capped by
/// the operator's conservative bound. When the iteration does not settle
/// within `max_iters`, the conservative bound itself is returned with
/// `converged = false`.
pub fn estimate_lambda_max(
    lap: &LaplacianOperator,
    tol: f64,
    max_iters: usize,
) -> Result<LambdaMaxEstimate> {
    if lap.graph.num_edges() == 0 {
        return Err(Error::degenerate("lambda_max estimate needs at least one edge"));
    }
    let n = lap.num_nodes();
    let bound = lap.conservative_bound();
    let deflate = lap.kind == LaplacianKind::Combinatorial;
    let mut rng = rng_from_seed(derive_seed(0, streams::POWER_ITERATION));
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut w = vec![0.0; n];

    let remove_mean = |x: &mut [f64]| {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|xi| *xi -= mean);
    };
    let normalize = |x: &mut [f64]| -> f64 {
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|a| *a /= norm);
        }
        norm
    };
    if deflate {
        remove_mean(&mut v);
    }
    normalize(&mut v);

    let mut prev = f64::NAN;
    for it in 1..=max_iters {
        lap.matvec(&v, &mut w);
        if deflate {
            remove_mean(&mut w);
        }
        let rq: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        if normalize(&mut w) == 0.0 {
            break;
        }
        std::mem::swap(&mut v, &mut w);
        if (rq - prev).abs() <= tol * rq.abs() {
            return Ok(LambdaMaxEstimate {
                value: (rq * LAMBDA_MAX_SAFETY).min(bound),
                converged: true,
                iterations: it,
            });
        }
        prev = rq;
    }
    log::warn!("power iteration did not converge in {max_iters} iterations; using bound {bound}");
    Ok(LambdaMaxEstimate {
        value: bound,
        converged: false,
        iterations: max_iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{decompose, generate_graph, GraphFamily};

    fn p2() -> Graph {
        Graph::from_pairs(2, &[(0, 1)]).unwrap()
    }

    fn k4() -> Graph {
        Graph::from_pairs(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn p2_matrices() {
        let expected = [[1.0, -1.0], [-1.0, 1.0]];
        for kind in [LaplacianKind::Combinatorial, LaplacianKind::Normalized] {
            let lap = build_laplacian(&p2(), kind).unwrap();
            let d = lap.to_dense();
            for (r, row) in expected.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    assert_eq!(d[(r, c)], *v);
                }
            }
        }
        let norm = build_laplacian(&p2(), LaplacianKind::Normalized).unwrap();
        assert_eq!(norm.lambda_max(), 2.0);
    }

    #[test]
    fn combinatorial_rows_sum_to_zero() {
        let g = generate_graph(&GraphFamily::ErdosRenyi { n: 32, p: 0.3 }, 4).unwrap();
        let lap = build_laplacian(&g, LaplacianKind::Combinatorial).unwrap();
        let mut y = vec![0.0; 32];
        lap.matvec(&vec![1.0; 32], &mut y);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn normalized_rejects_isolated_node() {
        let g = Graph::from_pairs(3, &[(0, 1)]).unwrap();
        assert!(matches!(
            build_laplacian(&g, LaplacianKind::Normalized),
            Err(Error::Degenerate(_))
        ));
        assert!(build_laplacian(&g, LaplacianKind::Combinatorial).is_ok());
    }

    #[test]
    fn power_iteration_on_small_graphs() {
        let p = build_laplacian(&p2(), LaplacianKind::Combinatorial).unwrap();
        let est = estimate_lambda_max(&p, 1e-12, 1000).unwrap();
        assert!(est.converged);
        assert!((2.0..=2.02).contains(&est.value), "{}", est.value);

        let k = build_laplacian(&k4(), LaplacianKind::Combinatorial).unwrap();
        let est = estimate_lambda_max(&k, 1e-12, 1000).unwrap();
        assert!((4.0..=4.04).contains(&est.value), "{}", est.value);
    }

    #[test]
    fn power_iteration_brackets_dense_lambda_max() {
        for seed in 0..5 {
            let g = generate_graph(&GraphFamily::ErdosRenyi { n: 64, p: 0.2 }, seed).unwrap();
            let lap = build_laplacian(&g, LaplacianKind::Combinatorial).unwrap();
            let exact = *decompose(&lap).unwrap().eigenvalues().last().unwrap();
            let est = estimate_lambda_max(&lap, 1e-10, 20_000).unwrap();
            assert!(est.converged);
            assert!(est.value >= exact && est.value <= 1.01 * exact, "{} vs {}", est.value, exact);
        }
    }

    #[test]
    fn non_convergence_falls_back_to_bound() {
        let g = generate_graph(&GraphFamily::ErdosRenyi { n: 40, p: 0.3 }, 1).unwrap();
        let lap = build_laplacian(&g, LaplacianKind::Combinatorial).unwrap();
        let est = estimate_lambda_max(&lap, 0.0, 3).unwrap();
        assert!(!est.converged);
        assert_eq!(est.value, lap.conservative_bound());
        assert!(est.value >= lap.lambda_max());
    }

    #[test]
    fn large_graph_uses_power_iteration() {
        let g = generate_graph(&GraphFamily::Grid2D { rows: 8, cols: 8 }, 0).unwrap();
        let opts = LaplacianOptions {
            dense_threshold: 16,
            ..Default::default()
        };
        let lap = build_laplacian_with(&g, LaplacianKind::Combinatorial, &opts).unwrap();
        assert_eq!(lap.lambda_max_source(), LambdaMaxSource::PowerIteration);
        // grid spectrum: 4 sin^2(pi i / 16) + 4 sin^2(pi j / 16), max at i = j = 7
        let exact = 8.0 * (7.0 * std::f64::consts::PI / 16.0).sin().powi(2);
        assert!(lap.lambda_max() >= exact && lap.lambda_max() <= 1.01 * exact);
    }
}
