//! Graphs, their Laplacians, and dense spectral decompositions.

mod eigen;
mod generate;
mod laplacian;

pub use eigen::{decompose, decompose_with_threshold, jacobi_eigen, DenseMatrix, SpectralDecomposition};
pub use generate::{generate_graph, GraphFamily};
pub use laplacian::{
    build_laplacian, build_laplacian_with, estimate_lambda_max, CsrMatrix, LambdaMaxEstimate,
    LambdaMaxSource,
    LaplacianKind, LaplacianOperator, LaplacianOptions, SpectralOperator, DEFAULT_DENSE_THRESHOLD,
    LAMBDA_MAX_SAFETY,
};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Weighted undirected simple graph.
///
/// Edges are stored canonically: `u < v`, sorted by `(u, v)`, no duplicates.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::param("graph must have at least one node"));
        }
        let mut canon = Vec::new();
        for e in edges {
            if e.u >= num_nodes || e.v >= num_nodes {
                return Err(Error::param(format!(
                    "edge ({}, {}) out of range for {} nodes",
                    e.u, e.v, num_nodes
                )));
            }
            if e.u == e.v {
                return Err(Error::param(format!("self-loop at node {}", e.u)));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::param(format!(
                    "edge ({}, {}) has non-positive weight {}",
                    e.u, e.v, e.weight
                )));
            }
            let (u, v) = if e.u < e.v { (e.u, e.v) } else { (e.v, e.u) };
            canon.push(Edge { u, v, weight: e.weight });
        }
        canon.sort_by(|a, b| (a.u, a.v).cmp(&(b.u, b.v)));
        if let Some(w) = canon.windows(2).find(|w| (w[0].u, w[0].v) == (w[1].u, w[1].v)) {
            return Err(Error::param(format!("duplicate edge ({}, {})", w[0].u, w[0].v)));
        }
        Ok(Graph { num_nodes, edges: canon })
    }

    /// Unit-weight graph from index pairs.
    pub fn from_pairs(num_nodes: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Graph::new(
            num_nodes,
            pairs.iter().map(|&(u, v)| Edge { u, v, weight: 1.0 }),
        )
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Number of incident edges per node.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_nodes];
        for e in &self.edges {
            d[e.u] += 1;
            d[e.v] += 1;
        }
        d
    }

    /// Sum of incident edge weights per node.
    pub fn weighted_degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.num_nodes];
        for e in &self.edges {
            d[e.u] += e.weight;
            d[e.v] += e.weight;
        }
        d
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Component label per node, labels numbered by first appearance.
    pub fn component_labels(&self) -> (usize, Vec<usize>) {
        let adj = self.neighbors();
        let mut label = vec![usize::MAX; self.num_nodes];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.num_nodes {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    pub fn num_components(&self) -> usize {
        self.component_labels().0
    }

    /// Edge density `|E| / (N choose 2)`.
    pub fn density(&self) -> f64 {
        let n = self.num_nodes as f64;
        if self.num_nodes < 2 {
            return 0.0;
        }
        self.edges.len() as f64 / (n * (n - 1.0) / 2.0)
    }

    /// Global clustering coefficient (transitivity): 3 x triangles / connected triples.
    pub fn global_clustering(&self) -> f64 {
        let adj = self.neighbors();
        let mut closed = 0usize;
        let mut triples = 0usize;
        for (u, nb) in adj.iter().enumerate() {
            let d = nb.len();
            triples += d * d.saturating_sub(1) / 2;
            for (i, &a) in nb.iter().enumerate() {
                for &b in &nb[i + 1..] {
                    if adj[a].binary_search(&b).is_ok() {
                        closed += 1;
                    }
                }
            }
            let _ = u;
        }
        if triples == 0 {
            0.0
        } else {
            closed as f64 / triples as f64
        }
    }

    /// Mean shortest-path length (hop count) over the largest connected component.
    pub fn average_path_length(&self) -> f64 {
        let (count, labels) = self.component_labels();
        let mut sizes = vec![0usize; count];
        for &l in &labels {
            sizes[l] += 1;
        }
        let (biggest, &size) = sizes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("at least one component");
        if size < 2 {
            return 0.0;
        }
        let adj = self.neighbors();
        let mut total = 0usize;
        let mut dist = vec![usize::MAX; self.num_nodes];
        let mut queue = VecDeque::new();
        for src in (0..self.num_nodes).filter(|&v| labels[v] == biggest) {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[src] = 0;
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        total += dist[v];
                        queue.push_back(v);
                    }
                }
            }
        }
        total as f64 / (size * (size - 1)) as f64
    }

    /// Relabel nodes: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.num_nodes {
            return Err(Error::contract("permutation length differs from node count"));
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::contract("not a permutation"));
            }
        }
        Graph::new(
            self.num_nodes,
            self.edges.iter().map(|e| Edge {
                u: perm[e.u],
                v: perm[e.v],
                weight: e.weight,
            }),
        )
    }
}

/// On-disk graph document: `{"n", "edges": [[u, v, w], ...], "family", "params", "seed"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub family: String,
    pub params: serde_json::Value,
    pub seed: u64,
}

impl GraphDocument {
    pub fn new(graph: &Graph, family: &GraphFamily, seed: u64) -> Self {
        let (name, params) = family.name_and_params();
        GraphDocument {
            n: graph.num_nodes(),
            edges: graph.edges().iter().map(|e| (e.u, e.v, e.weight)).collect(),
            family: name.to_string(),
            params,
            seed,
        }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        Graph::new(
            self.n,
            self.edges.iter().map(|&(u, v, weight)| Edge { u, v, weight }),
        )
    }

    /// Generator parameters, when the family is one of the built-in generators.
    pub fn graph_family(&self) -> Option<GraphFamily> {
        GraphFamily::from_name_and_params(&self.family, &self.params)
    }
}
