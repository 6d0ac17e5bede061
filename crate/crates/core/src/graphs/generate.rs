use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Edge, Graph};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, streams};

/// Synthetic graph generator with its parameters.
///
/// Serialized internally tagged, e.g. `{"family": "erdos_renyi", "n": 32, "p": 0.3}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphFamily {
    ErdosRenyi {
        n: usize,
        p: f64,
    },
    /// Preferential attachment from a complete seed graph on `m + 1` nodes.
    BarabasiAlbert {
        n: usize,
        m: usize,
    },
    /// Ring lattice with `k` nearest neighbours, each edge rewired with probability `beta`.
    WattsStrogatz {
        n: usize,
        k: usize,
        beta: f64,
    },
    /// 4-neighbour lattice.
    #[serde(rename = "grid2d")]
    Grid2D {
        rows: usize,
        cols: usize,
    },
    StochasticBlockModel {
        n: usize,
        /// Defaults to two blocks of (nearly) equal size.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        block_sizes: Option<Vec<usize>>,
        #[serde(default = "default_p_in")]
        p_in: f64,
        #[serde(default = "default_p_out")]
        p_out: f64,
    },
}

fn default_p_in() -> f64 {
    0.3
}

fn default_p_out() -> f64 {
    0.05
}

impl GraphFamily {
    pub fn num_nodes(&self) -> usize {
        match *self {
            GraphFamily::ErdosRenyi { n, .. }
            | GraphFamily::BarabasiAlbert { n, .. }
            | GraphFamily::WattsStrogatz { n, .. }
            | GraphFamily::StochasticBlockModel { n, .. } => n,
            GraphFamily::Grid2D { rows, cols } => rows * cols,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GraphFamily::ErdosRenyi { .. } => "erdos_renyi",
            GraphFamily::BarabasiAlbert { .. } => "barabasi_albert",
            GraphFamily::WattsStrogatz { .. } => "watts_strogatz",
            GraphFamily::Grid2D { .. } => "grid2d",
            GraphFamily::StochasticBlockModel { .. } => "stochastic_block_model",
        }
    }

    /// SBM with two equal blocks, `p_in = 0.3`, `p_out = 0.05`.
    pub fn default_sbm(n: usize) -> Self {
        GraphFamily::StochasticBlockModel {
            n,
            block_sizes: None,
            p_in: default_p_in(),
            p_out: default_p_out(),
        }
    }

    pub(crate) fn name_and_params(&self) -> (&'static str, serde_json::Value) {
        let mut value = serde_json::to_value(self).expect("family serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("family");
        }
        (self.name(), value)
    }

    pub(crate) fn from_name_and_params(name: &str, params: &serde_json::Value) -> Option<Self> {
        let mut obj = params.as_object()?.clone();
        obj.insert("family".into(), serde_json::Value::String(name.into()));
        serde_json::from_value(serde_json::Value::Object(obj)).ok()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_nodes();
        if n < 2 {
            return Err(Error::param(format!("graph needs at least 2 nodes, got {n}")));
        }
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::param(format!("{name} = {p} is not a probability")))
            }
        };
        match self {
            GraphFamily::ErdosRenyi { p, .. } => prob("p", *p),
            GraphFamily::BarabasiAlbert { m, .. } => {
                if *m >= 1 && *m < n {
                    Ok(())
                } else {
                    Err(Error::param(format!("BA requires 1 <= m < n, got m = {m}, n = {n}")))
                }
            }
            GraphFamily::WattsStrogatz { k, beta, .. } => {
                if k % 2 != 0 || *k >= n {
                    return Err(Error::param(format!(
                        "WS requires even k < n, got k = {k}, n = {n}"
                    )));
                }
                prob("beta", *beta)
            }
            GraphFamily::Grid2D { .. } => Ok(()),
            GraphFamily::StochasticBlockModel {
                block_sizes,
                p_in,
                p_out,
                ..
            } => {
                prob("p_in", *p_in)?;
                prob("p_out", *p_out)?;
                if p_in <= p_out {
                    return Err(Error::param(format!(
                        "SBM requires p_in > p_out, got {p_in} <= {p_out}"
                    )));
                }
                if let Some(sizes) = block_sizes {
                    if sizes.iter().any(|&s| s == 0) || sizes.iter().sum::<usize>() != n {
                        return Err(Error::param(format!(
                            "SBM block sizes {sizes:?} must be positive and sum to {n}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Sample a graph. The result is a pure function of `(family, seed)`.
///
/// Disconnected samples are returned as drawn; no component is extracted.
pub fn generate_graph(family: &GraphFamily, seed: u64) -> Result<Graph> {
    family.validate()?;
    let mut rng = rng_from_seed(derive_seed(seed, streams::GRAPH));
    let n = family.num_nodes();
    let pairs: Vec<(usize, usize)> = match *family {
        GraphFamily::ErdosRenyi { p, .. } => {
            let mut out = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random::<f64>() < p {
                        out.push((u, v));
                    }
                }
            }
            out
        }
        GraphFamily::BarabasiAlbert { m, .. } => barabasi_albert(n, m, &mut rng),
        GraphFamily::WattsStrogatz { k, beta, .. } => watts_strogatz(n, k, beta, &mut rng),
        GraphFamily::Grid2D { rows, cols } => {
            let mut out = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let u = r * cols + c;
                    if c + 1 < cols {
                        out.push((u, u + 1));
                    }
                    if r + 1 < rows {
                        out.push((u, u + cols));
                    }
                }
            }
            out
        }
        GraphFamily::StochasticBlockModel {
            ref block_sizes,
            p_in,
            p_out,
            ..
        } => {
            let sizes = block_sizes.clone().unwrap_or_else(|| vec![n / 2, n - n / 2]);
            let block: Vec<usize> = sizes
                .iter()
                .enumerate()
                .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
                .collect();
            let mut out = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    let p = if block[u] == block[v] { p_in } else { p_out };
                    if rng.random::<f64>() < p {
                        out.push((u, v));
                    }
                }
            }
            out
        }
    };
    Graph::new(
        n,
        pairs.into_iter().map(|(u, v)| Edge { u, v, weight: 1.0 }),
    )
}

fn barabasi_albert(n: usize, m: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    // each node appears once per incident edge
    let mut endpoints = Vec::new();
    for u in 0..=m {
        for v in u + 1..=m {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut chosen = Vec::with_capacity(m);
    for v in m + 1..n {
        chosen.clear();
        while chosen.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        chosen.sort_unstable();
        for &t in &chosen {
            edges.push((t, v));
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    edges
}

fn watts_strogatz(n: usize, k: usize, beta: f64, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let mut edges = BTreeSet::new();
    let mut degree = vec![0usize; n];
    for j in 1..=k / 2 {
        for u in 0..n {
            edges.insert(key(u, (u + j) % n));
        }
    }
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            if rng.random::<f64>() >= beta {
                continue;
            }
            let old = (u + j) % n;
            if !edges.contains(&key(u, old)) || degree[u] >= n - 1 {
                continue;
            }
            let mut w = rng.random_range(0..n);
            while w == u || edges.contains(&key(u, w)) {
                w = rng.random_range(0..n);
            }
            edges.remove(&key(u, old));
            degree[old] -= 1;
            edges.insert(key(u, w));
            degree[w] += 1;
        }
    }
    edges.into_iter().collect()
}
