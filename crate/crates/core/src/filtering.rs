//! Applying spectral filters to node signals.
//!
//! Two routes compute `G(L) x`: exactly through a [`SpectralDecomposition`], or
//! through a truncated Chebyshev expansion on the scaled Laplacian
//! `(2/λ_max) L - I`, which needs only sparse matrix-vector products.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{decompose, LaplacianOperator, SpectralDecomposition, SpectralOperator};
use crate::kernel::ShapedFilterBank;

pub const DEFAULT_CHEBYSHEV_DEGREE: usize = 64;
pub const CHEBYSHEV_FORMAT_VERSION: u32 = 1;

/// `N x S` matrix of graph signals; each column is one signal.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalBatch {
    num_nodes: usize,
    num_signals: usize,
    // column-major
    values: Vec<f64>,
}

impl SignalBatch {
    pub fn zeros(num_nodes: usize, num_signals: usize) -> Self {
        SignalBatch {
            num_nodes,
            num_signals,
            values: vec![0.0; num_nodes * num_signals],
        }
    }

    pub fn from_columns(num_nodes: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        let num_signals = columns.len();
        let mut values = Vec::with_capacity(num_nodes * num_signals);
        for (s, col) in columns.into_iter().enumerate() {
            if col.len() != num_nodes {
                return Err(Error::contract(format!(
                    "signal {s} has {} entries, expected {num_nodes}",
                    col.len()
                )));
            }
            values.extend(col);
        }
        SignalBatch::from_column_major(num_nodes, num_signals, values)
    }

    pub fn from_column_major(num_nodes: usize, num_signals: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != num_nodes * num_signals {
            return Err(Error::contract("signal buffer has the wrong length"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("signal batch has non-finite entries"));
        }
        Ok(SignalBatch {
            num_nodes,
            num_signals,
            values,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_signals(&self) -> usize {
        self.num_signals
    }

    pub fn column(&self, s: usize) -> &[f64] {
        &self.values[s * self.num_nodes..(s + 1) * self.num_nodes]
    }

    pub fn column_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.values[s * self.num_nodes..(s + 1) * self.num_nodes]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.num_nodes.max(1)).take(self.num_signals)
    }

    pub fn get(&self, node: usize, signal: usize) -> f64 {
        self.values[signal * self.num_nodes + node]
    }

    pub fn as_column_major(&self) -> &[f64] {
        &self.values
    }

    /// Columns `indices` as a new batch.
    pub fn select(&self, indices: &[usize]) -> SignalBatch {
        let mut values = Vec::with_capacity(indices.len() * self.num_nodes);
        for &i in indices {
            values.extend_from_slice(self.column(i));
        }
        SignalBatch {
            num_nodes: self.num_nodes,
            num_signals: indices.len(),
            values,
        }
    }

    /// `a * self + b * other`
    pub fn linear_combination(&self, a: f64, other: &SignalBatch, b: f64) -> Result<SignalBatch> {
        if self.num_nodes != other.num_nodes || self.num_signals != other.num_signals {
            return Err(Error::contract("batches differ in shape"));
        }
        Ok(SignalBatch {
            num_nodes: self.num_nodes,
            num_signals: self.num_signals,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Apply a node relabeling: row `i` moves to row `perm[i]`.
    pub fn permuted_rows(&self, perm: &[usize]) -> SignalBatch {
        let mut out = SignalBatch::zeros(self.num_nodes, self.num_signals);
        for s in 0..self.num_signals {
            for (i, &p) in perm.iter().enumerate() {
                out.values[s * self.num_nodes + p] = self.get(i, s);
            }
        }
        out
    }
}

/// `U diag(response) U^T x`, column by column.
pub fn apply_exact(
    decomp: &SpectralDecomposition,
    response: &[f64],
    x: &SignalBatch,
) -> Result<SignalBatch> {
    let n = decomp.num_nodes();
    if response.len() != n {
        return Err(Error::contract(format!(
            "response has {} entries for {n} eigenvalues",
            response.len()
        )));
    }
    if x.num_nodes() != n {
        return Err(Error::contract(format!(
            "signals have {} nodes, decomposition has {n}",
            x.num_nodes()
        )));
    }
    let mut out = SignalBatch::zeros(n, x.num_signals());
    for s in 0..x.num_signals() {
        let mut coeffs = decomp.analysis(x.column(s));
        coeffs.iter_mut().zip(response).for_each(|(c, g)| *c *= g);
        out.column_mut(s).copy_from_slice(&decomp.synthesis(&coeffs));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    #[default]
    None,
    Jackson,
}

/// Jackson kernel weight `g_r` for a degree-`R` expansion.
pub fn jackson_weight(r: usize, degree: usize) -> Result<f64> {
    if r > degree {
        return Err(Error::contract(format!("Jackson index {r} exceeds degree {degree}")));
    }
    let rp1 = (degree + 1) as f64;
    let phase = PI * r as f64 / rp1;
    let cot = (PI / rp1).cos() / (PI / rp1).sin();
    Ok(((rp1 - r as f64) * phase.cos() + phase.sin() * cot) / rp1)
}

/// Truncated Chebyshev expansion of a spectral response on `[0, λ_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChebyshevFilter {
    pub version: u32,
    pub lambda_max: f64,
    pub damping: Damping,
    /// `c_0 .. c_R`, already multiplied by damping weights when damped.
    pub coefficients: Vec<f64>,
}

impl ChebyshevFilter {
    pub fn new(coefficients: Vec<f64>, lambda_max: f64, damping: Damping) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(Error::param("Chebyshev degree must be at least 1"));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::numeric("non-finite Chebyshev coefficient"));
        }
        if !(lambda_max.is_finite() && lambda_max > 0.0) {
            return Err(Error::param(format!("lambda_max must be positive, got {lambda_max}")));
        }
        Ok(ChebyshevFilter {
            version: CHEBYSHEV_FORMAT_VERSION,
            lambda_max,
            damping,
            coefficients,
        })
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Scalar response of the expansion at λ (Clenshaw recurrence).
    pub fn eval(&self, lambda: f64) -> f64 {
        let t = 2.0 * lambda / self.lambda_max - 1.0;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coefficients.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        self.coefficients[0] + t * b1 - b2
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("filter serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ChebyshevFilter =
            serde_json::from_str(text).map_err(|e| Error::param(format!("filter JSON: {e}")))?;
        if f.version != CHEBYSHEV_FORMAT_VERSION {
            return Err(Error::param(format!("unsupported filter version {}", f.version)));
        }
        ChebyshevFilter::new(f.coefficients, f.lambda_max, f.damping)
    }
}

/// Project a response onto Chebyshev polynomials with `num_quadrature`
/// Gauss-Chebyshev nodes (default `4 (R + 1)`).
pub fn project_chebyshev(
    response: impl Fn(f64) -> f64,
    lambda_max: f64,
    degree: usize,
    num_quadrature: Option<usize>,
    damping: Damping,
) -> Result<ChebyshevFilter> {
    if degree < 1 {
        return Err(Error::param("Chebyshev degree must be at least 1"));
    }
    let m = num_quadrature.unwrap_or(4 * (degree + 1));
    if m < degree + 1 {
        return Err(Error::param(format!(
            "{m} quadrature nodes cannot resolve degree {degree}"
        )));
    }
    let thetas: Vec<f64> = (0..m).map(|q| PI * (q as f64 + 0.5) / m as f64).collect();
    let samples: Vec<f64> = thetas
        .iter()
        .map(|th| response((th.cos() + 1.0) * lambda_max / 2.0))
        .collect();
    let mut coefficients: Vec<f64> = (0..=degree)
        .map(|r| {
            let scale = if r == 0 { 1.0 } else { 2.0 } / m as f64;
            scale
                * samples
                    .iter()
                    .zip(&thetas)
                    .map(|(f, th)| f * (r as f64 * th).cos())
                    .sum::<f64>()
        })
        .collect();
    if damping == Damping::Jackson {
        for (r, c) in coefficients.iter_mut().enumerate() {
            *c *= jackson_weight(r, degree)?;
        }
    }
    ChebyshevFilter::new(coefficients, lambda_max, damping)
}

/// Work accounting for one Chebyshev application.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChebyshevStats {
    pub matvecs: usize,
    /// Auxiliary vectors of length N held during the recurrence.
    pub work_vectors: usize,
    pub work_vector_len: usize,
}

/// `Σ_r c_r T_r(L̃) x` through the three-term recurrence, `R` matvecs per column.
pub fn apply_chebyshev_op<O: SpectralOperator + ?Sized>(
    f: &ChebyshevFilter,
    op: &O,
    x: &SignalBatch,
) -> Result<(SignalBatch, ChebyshevStats)> {
    let n = op.dim();
    if x.num_nodes() != n {
        return Err(Error::contract(format!(
            "signals have {} nodes, operator has {n}",
            x.num_nodes()
        )));
    }
    let scale = 2.0 / f.lambda_max;
    let c = &f.coefficients;
    let mut out = SignalBatch::zeros(n, x.num_signals());
    let mut t_prev = vec![0.0; n];
    let mut t_cur = vec![0.0; n];
    let mut t_next = vec![0.0; n];
    let mut matvecs = 0;
    for s in 0..x.num_signals() {
        let y = out.column_mut(s);
        t_prev.copy_from_slice(x.column(s));
        for (yi, ti) in y.iter_mut().zip(&t_prev) {
            *yi = c[0] * ti;
        }
        op.matvec(&t_prev, &mut t_cur);
        matvecs += 1;
        for ((ti, &xi), yi) in t_cur.iter_mut().zip(&t_prev).zip(y.iter_mut()) {
            *ti = scale * *ti - xi;
            *yi += c[1] * *ti;
        }
        for &cr in &c[2..] {
            op.matvec(&t_cur, &mut t_next);
            matvecs += 1;
            for (((tn, &tc), &tp), yi) in t_next
                .iter_mut()
                .zip(&t_cur)
                .zip(&t_prev)
                .zip(y.iter_mut())
            {
                *tn = 2.0 * (scale * *tn - tc) - tp;
                *yi += cr * *tn;
            }
            std::mem::swap(&mut t_prev, &mut t_cur);
            std::mem::swap(&mut t_cur, &mut t_next);
        }
    }
    Ok((
        out,
        ChebyshevStats {
            matvecs,
            work_vectors: 3,
            work_vector_len: n,
        },
    ))
}

pub fn apply_chebyshev(
    f: &ChebyshevFilter,
    lap: &LaplacianOperator,
    x: &SignalBatch,
) -> Result<SignalBatch> {
    if f.lambda_max < lap.lambda_max() * (1.0 - 1e-12) {
        log::warn!(
            "filter lambda_max {} is below the Laplacian bound {}",
            f.lambda_max,
            lap.lambda_max()
        );
    }
    apply_chebyshev_op(f, lap, x).map(|(y, _)| y)
}

/// True when the filter's domain misses part of the actual spectrum.
pub fn spectrum_exceeds_filter(f: &ChebyshevFilter, decomp: &SpectralDecomposition) -> bool {
    decomp.largest_eigenvalue() > f.lambda_max * (1.0 + 1e-12)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FilterMode {
    Exact,
    Chebyshev { degree: usize, damping: Damping },
}

/// Degree suggested for a bank: `max(64, ceil(8 λ_max max_k sqrt(γ_k)))`.
pub fn recommended_degree(bank: &ShapedFilterBank, lambda_max: f64) -> usize {
    let widest = bank
        .components
        .iter()
        .map(|c| c.bandwidth().sqrt())
        .fold(0.0, f64::max);
    DEFAULT_CHEBYSHEV_DEGREE.max((8.0 * lambda_max * widest).ceil() as usize)
}

/// Chebyshev projection of a bank's total response on `[0, λ_max]`.
pub fn bank_to_chebyshev(
    bank: &ShapedFilterBank,
    lambda_max: f64,
    degree: usize,
    damping: Damping,
) -> Result<ChebyshevFilter> {
    if degree < 1 {
        return Err(Error::param("Chebyshev degree must be at least 1"));
    }
    // evaluate the whole quadrature grid in one batched pass
    let m = 4 * (degree + 1);
    let nodes: Vec<f64> = (0..m)
        .map(|q| ((PI * (q as f64 + 0.5) / m as f64).cos() + 1.0) * lambda_max / 2.0)
        .collect();
    let values = bank.eval(&nodes);
    let lookup = |lambda: f64| -> f64 {
        let q = nodes
            .iter()
            .position(|&l| l == lambda)
            .expect("quadrature node");
        values[q]
    };
    project_chebyshev(lookup, lambda_max, degree, Some(m), damping)
}

/// Filter a batch with a bank's total response, projected once regardless of K.
pub fn filter_bank_apply(
    bank: &ShapedFilterBank,
    lap: &LaplacianOperator,
    x: &SignalBatch,
    mode: FilterMode,
) -> Result<SignalBatch> {
    filter_bank_apply_with(bank, lap, None, x, mode)
}

/// As [`filter_bank_apply`], reusing a decomposition for the exact route.
pub fn filter_bank_apply_with(
    bank: &ShapedFilterBank,
    lap: &LaplacianOperator,
    decomp: Option<&SpectralDecomposition>,
    x: &SignalBatch,
    mode: FilterMode,
) -> Result<SignalBatch> {
    match mode {
        FilterMode::Exact => {
            let owned;
            let d = match decomp {
                Some(d) => d,
                None => {
                    owned = decompose(lap)?;
                    &owned
                }
            };
            apply_exact(d, &bank.eval(d.eigenvalues()), x)
        }
        FilterMode::Chebyshev { degree, damping } => {
            let f = bank_to_chebyshev(bank, lap.lambda_max(), degree, damping)?;
            apply_chebyshev(&f, lap, x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_laplacian, generate_graph, GraphFamily, LaplacianKind};
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    fn setup(seed: u64) -> (LaplacianOperator, SpectralDecomposition, SignalBatch) {
        let g = generate_graph(&GraphFamily::ErdosRenyi { n: 32, p: 0.3 }, seed).unwrap();
        let lap = build_laplacian(&g, LaplacianKind::Combinatorial).unwrap();
        let d = decompose(&lap).unwrap();
        let mut rng = rng_from_seed(seed + 100);
        let cols = (0..3)
            .map(|_| (0..32).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        (lap, d, SignalBatch::from_columns(32, cols).unwrap())
    }

    fn rel_err(a: &SignalBatch, b: &SignalBatch) -> f64 {
        a.linear_combination(1.0, b, -1.0).unwrap().frobenius_norm() / b.frobenius_norm()
    }

    fn apply_dense(lap: &LaplacianOperator, x: &SignalBatch) -> SignalBatch {
        let mut out = SignalBatch::zeros(x.num_nodes(), x.num_signals());
        for s in 0..x.num_signals() {
            lap.matvec(x.column(s), out.column_mut(s));
        }
        out
    }

    #[test]
    fn exact_identity_and_laplacian() {
        let (lap, d, x) = setup(1);
        let y = apply_exact(&d, &vec![1.0; 32], &x).unwrap();
        assert!(y.linear_combination(1.0, &x, -1.0).unwrap().frobenius_norm() < 1e-10);
        let y = apply_exact(&d, d.eigenvalues(), &x).unwrap();
        let lx = apply_dense(&lap, &x);
        assert!(y.linear_combination(1.0, &lx, -1.0).unwrap().frobenius_norm() < 1e-9);
    }

    #[test]
    fn exact_projector_is_idempotent() {
        let (_, d, x) = setup(2);
        let target = d.eigenvalues()[17];
        let resp: Vec<f64> = d
            .eigenvalues()
            .iter()
            .map(|&l| if (l - target).abs() < 1e-8 { 1.0 } else { 0.0 })
            .collect();
        let once = apply_exact(&d, &resp, &x).unwrap();
        let twice = apply_exact(&d, &resp, &once).unwrap();
        assert!(once.linear_combination(1.0, &twice, -1.0).unwrap().frobenius_norm() < 1e-9);
        // the output lies in the eigenspace: L y = λ y
        let lap_y = apply_exact(&d, d.eigenvalues(), &once).unwrap();
        assert!(lap_y.linear_combination(1.0, &once, -target).unwrap().frobenius_norm() < 1e-9);
    }

    #[test]
    fn exact_checks_dimensions() {
        let (_, d, x) = setup(3);
        assert!(apply_exact(&d, &[1.0; 5], &x).is_err());
        let small = SignalBatch::zeros(5, 1);
        assert!(apply_exact(&d, &vec![1.0; 32], &small).is_err());
    }

    #[test]
    fn projection_of_simple_responses() {
        let f = project_chebyshev(|_| 1.0, 3.0, 10, None, Damping::None).unwrap();
        assert!((f.coefficients[0] - 1.0).abs() < 1e-12);
        assert!(f.coefficients[1..].iter().all(|c| c.abs() < 1e-12));

        let f = project_chebyshev(|l| l, 2.0, 10, None, Damping::None).unwrap();
        assert!((f.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((f.coefficients[1] - 1.0).abs() < 1e-12);
        assert!(f.coefficients[2..].iter().all(|c| c.abs() < 1e-12));

        assert!(project_chebyshev(|l| l, 2.0, 0, None, Damping::None).is_err());
        assert!(project_chebyshev(|l| l, 2.0, 8, Some(5), Damping::None).is_err());
    }

    #[test]
    fn gaussian_bump_projection_accuracy() {
        let bump = |l: f64| (-3.0 * (l - 1.2) * (l - 1.2)).exp();
        let f = project_chebyshev(bump, 4.0, 64, None, Damping::None).unwrap();
        let err = (0..=1000)
            .map(|i| {
                let l = 4.0 * i as f64 / 1000.0;
                (f.eval(l) - bump(l)).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn jackson_weights() {
        for degree in [1, 2, 7, 64] {
            assert!((jackson_weight(0, degree).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(jackson_weight(1, 1).unwrap().abs() < 1e-12);
        for degree in 1..=256 {
            let w: Vec<f64> = (0..=degree).map(|r| jackson_weight(r, degree).unwrap()).collect();
            assert!(w.windows(2).all(|p| p[1] <= p[0] + 1e-12), "degree {degree}");
        }
        assert!(jackson_weight(5, 4).is_err());
    }

    #[test]
    fn chebyshev_identity_and_degree_one() {
        let (lap, _, x) = setup(4);
        let mut coeffs = vec![0.0; 9];
        coeffs[0] = 1.0;
        let f = ChebyshevFilter::new(coeffs, lap.lambda_max(), Damping::None).unwrap();
        assert_eq!(apply_chebyshev(&f, &lap, &x).unwrap(), x);

        let f = project_chebyshev(|l| l, lap.lambda_max(), 5, None, Damping::None).unwrap();
        let y = apply_chebyshev(&f, &lap, &x).unwrap();
        let lx = apply_dense(&lap, &x);
        assert!(y.linear_combination(1.0, &lx, -1.0).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn chebyshev_counts_matvecs() {
        let (lap, _, x) = setup(5);
        for degree in [1, 2, 17] {
            let f = project_chebyshev(|l| (-l).exp(), lap.lambda_max(), degree, None, Damping::None)
                .unwrap();
            let (_, stats) = apply_chebyshev_op(&f, &lap, &x).unwrap();
            assert_eq!(stats.matvecs, degree * x.num_signals());
            assert_eq!(stats.work_vectors, 3);
        }
    }

    #[test]
    fn polynomial_responses_are_reproduced() {
        let (lap, d, x) = setup(6);
        let poly = |l: f64| 0.5 - 0.3 * l + 0.02 * l * l - 0.001 * l * l * l;
        let f = project_chebyshev(poly, lap.lambda_max(), 3, None, Damping::None).unwrap();
        let cheb = apply_chebyshev(&f, &lap, &x).unwrap();
        let resp: Vec<f64> = d.eigenvalues().iter().map(|&l| poly(l)).collect();
        let exact = apply_exact(&d, &resp, &x).unwrap();
        assert!(cheb.linear_combination(1.0, &exact, -1.0).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn bank_cross_path_and_linearity() {
        let (lap, d, x) = setup(7);
        let mut bank = crate::kernel::init_bank(
            3,
            lap.lambda_max(),
            7,
            &crate::kernel::DEFAULT_LAYER_SIZES,
            crate::kernel::Activation::Tanh,
        )
        .unwrap();
        let cheb = FilterMode::Chebyshev { degree: 64, damping: Damping::None };
        let a = filter_bank_apply_with(&bank, &lap, Some(&d), &x, FilterMode::Exact).unwrap();
        let b = filter_bank_apply(&bank, &lap, &x, cheb).unwrap();
        assert!(rel_err(&b, &a) < 1e-6);

        for c in &mut bank.components {
            c.amplitude *= 2.0;
        }
        for mode in [FilterMode::Exact, cheb] {
            let before = filter_bank_apply_with(&bank, &lap, Some(&d), &x, mode).unwrap();
            let mut doubled = bank.clone();
            for c in &mut doubled.components {
                c.amplitude *= 2.0;
            }
            let after = filter_bank_apply_with(&doubled, &lap, Some(&d), &x, mode).unwrap();
            let twice = before.linear_combination(2.0, &before, 0.0).unwrap();
            assert!(rel_err(&after, &twice) < 1e-14);
        }

        for c in &mut bank.components {
            c.amplitude = 0.0;
        }
        let zero = filter_bank_apply(&bank, &lap, &x, cheb).unwrap();
        assert_eq!(zero.frobenius_norm(), 0.0);
    }

    #[test]
    fn damped_filter_matches_its_own_response() {
        let (lap, d, x) = setup(8);
        let step = |l: f64| if l < 8.0 { 1.0 } else { 0.0 };
        let f = project_chebyshev(step, lap.lambda_max(), 40, None, Damping::Jackson).unwrap();
        let damped: Vec<f64> = d.eigenvalues().iter().map(|&l| f.eval(l)).collect();
        let exact = apply_exact(&d, &damped, &x).unwrap();
        let cheb = apply_chebyshev(&f, &lap, &x).unwrap();
        assert!(rel_err(&cheb, &exact) < 1e-10);
        // Jackson damping keeps the step response free of overshoot
        let grid_max = (0..=400)
            .map(|i| f.eval(lap.lambda_max() * i as f64 / 400.0))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(grid_max <= 1.0 + 1e-9);
    }

    #[test]
    fn lambda_bound_violation_detected() {
        let (lap, d, _) = setup(9);
        let f = project_chebyshev(|l| l, lap.lambda_max() * 0.5, 3, None, Damping::None).unwrap();
        assert!(spectrum_exceeds_filter(&f, &d));
        let f = project_chebyshev(|l| l, lap.lambda_max(), 3, None, Damping::None).unwrap();
        assert!(!spectrum_exceeds_filter(&f, &d));
    }

    #[test]
    fn filter_json_round_trip() {
        let f = project_chebyshev(|l| (-l).exp(), 3.5, 12, None, Damping::Jackson).unwrap();
        let back = ChebyshevFilter::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        assert!(f.to_json().contains("\"damping\": \"jackson\""));
    }
}
