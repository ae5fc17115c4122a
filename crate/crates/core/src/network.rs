//! Sensor-network topology and convex combining weights.
//!
//! Nodes form an undirected, connected graph. Each node combines its own and
//! its neighbors' intermediate estimates with Metropolis weights, which are
//! symmetric, nonnegative, and column-stochastic.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Generation attempts before giving up on a connected random graph.
const MAX_RETRIES: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("n_nodes must be at least 1")]
    EmptyNetwork,
    #[error("connect_radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("no connected graph found in {MAX_RETRIES} attempts (n_nodes={n_nodes}, connect_radius={radius})")]
    RetriesExhausted { n_nodes: usize, radius: f64 },
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    EdgeOutOfRange(usize, usize, usize),
    #[error("self-loop edge ({0}, {0}) is not allowed")]
    SelfLoop(usize),
    #[error("edge list does not describe a connected graph")]
    Disconnected,
}

/// Undirected graph over `n_nodes` sensors. Self-loops are never stored; the
/// neighborhood of a node always includes the node itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    n_nodes: usize,
    adj: Vec<bool>,
}

impl Topology {
    /// Builds a topology from an explicit list of undirected edges.
    /// Duplicate edges and either orientation are accepted.
    pub fn from_edges(n_nodes: usize, edges: &[(usize, usize)]) -> Result<Self, NetworkError> {
        if n_nodes == 0 {
            return Err(NetworkError::EmptyNetwork);
        }
        let mut adj = vec![false; n_nodes * n_nodes];
        for &(k, l) in edges {
            if k >= n_nodes || l >= n_nodes {
                return Err(NetworkError::EdgeOutOfRange(k, l, n_nodes));
            }
            if k == l {
                return Err(NetworkError::SelfLoop(k));
            }
            adj[k * n_nodes + l] = true;
            adj[l * n_nodes + k] = true;
        }
        let t = Self { n_nodes, adj };
        if !t.is_connected() {
            return Err(NetworkError::Disconnected);
        }
        Ok(t)
    }

    /// Random geometric graph: nodes are placed uniformly on the unit square
    /// and linked when within `radius` of each other. Placement is redrawn
    /// until the graph is connected. Deterministic for a given seed.
    pub fn random_geometric(
        n_nodes: usize,
        radius: f64,
        seed: u64,
    ) -> Result<Self, NetworkError> {
        if n_nodes == 0 {
            return Err(NetworkError::EmptyNetwork);
        }
        if !(radius > 0.0) {
            return Err(NetworkError::NonPositiveRadius(radius));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..MAX_RETRIES {
            let pts: Vec<(f64, f64)> = (0..n_nodes)
                .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
                .collect();
            let mut adj = vec![false; n_nodes * n_nodes];
            for k in 0..n_nodes {
                for l in (k + 1)..n_nodes {
                    let (dx, dy) = (pts[k].0 - pts[l].0, pts[k].1 - pts[l].1);
                    if dx.hypot(dy) <= radius {
                        adj[k * n_nodes + l] = true;
                        adj[l * n_nodes + k] = true;
                    }
                }
            }
            let t = Self { n_nodes, adj };
            if t.is_connected() {
                return Ok(t);
            }
        }
        Err(NetworkError::RetriesExhausted { n_nodes, radius })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn is_adjacent(&self, k: usize, l: usize) -> bool {
        k != l && self.adj[k * self.n_nodes + l]
    }

    /// Nodes whose estimates node `k` combines: `k` itself plus its linked
    /// neighbors, in ascending order.
    pub fn neighborhood(&self, k: usize) -> Vec<usize> {
        (0..self.n_nodes)
            .filter(|&l| l == k || self.is_adjacent(k, l))
            .collect()
    }

    /// Self-inclusive neighborhood size |N_k| = degree + 1.
    pub fn neighborhood_size(&self, k: usize) -> usize {
        1 + (0..self.n_nodes).filter(|&l| self.is_adjacent(k, l)).count()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for k in 0..self.n_nodes {
            for l in (k + 1)..self.n_nodes {
                if self.is_adjacent(k, l) {
                    out.push((k, l));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_nodes];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..self.n_nodes {
                if self.is_adjacent(u, v) && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Adjacency matrix as CSV (0/1 entries, one row per node).
    pub fn adjacency_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("node");
        for l in 0..self.n_nodes {
            out.push_str(&format!(",{l}"));
        }
        out.push('\n');
        for k in 0..self.n_nodes {
            out.push_str(&k.to_string());
            for l in 0..self.n_nodes {
                out.push_str(if self.is_adjacent(k, l) { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }
}

/// Combining weights a_lk: the weight node k applies to node l's intermediate
/// estimate. Stored row l, column k, so each column k sums to one over the
/// neighborhood N_k.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerMatrix {
    n_nodes: usize,
    weights: Vec<f64>,
}

impl CombinerMatrix {
    pub fn from_weights(n_nodes: usize, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), n_nodes * n_nodes);
        Self { n_nodes, weights }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn get(&self, l: usize, k: usize) -> f64 {
        self.weights[l * self.n_nodes + k]
    }

    /// Column k: weights over source nodes for destination k.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n_nodes).map(|l| self.get(l, k)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("source_node");
        for k in 0..self.n_nodes {
            out.push_str(&format!(",to_{k}"));
        }
        out.push('\n');
        for l in 0..self.n_nodes {
            out.push_str(&l.to_string());
            for k in 0..self.n_nodes {
                out.push_str(&format!(",{:.12}", self.get(l, k)));
            }
            out.push('\n');
        }
        out
    }
}

/// Metropolis rule: a_lk = 1/max(|N_k|, |N_l|) for linked k != l, with the
/// self-weight absorbing the remainder of the column. Neighborhood sizes are
/// self-inclusive.
pub fn metropolis_weights(topology: &Topology) -> CombinerMatrix {
    let n = topology.n_nodes();
    let sizes: Vec<usize> = (0..n).map(|k| topology.neighborhood_size(k)).collect();
    let mut w = vec![0.0; n * n];
    for k in 0..n {
        let mut off_sum = 0.0;
        for l in 0..n {
            if topology.is_adjacent(k, l) {
                let a = 1.0 / sizes[k].max(sizes[l]) as f64;
                w[l * n + k] = a;
                off_sum += a;
            }
        }
        w[k * n + k] = 1.0 - off_sum;
    }
    CombinerMatrix::from_weights(n, w)
}

/// Result of checking a combiner matrix against a topology.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub violations: Vec<String>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

const COLUMN_SUM_TOL: f64 = 1e-12;

/// Checks nonnegativity, the sparsity pattern (weight only within the
/// neighborhood), and column sums. Reports every violation found.
pub fn validate_combiner(matrix: &CombinerMatrix, topology: &Topology) -> ValidityReport {
    let mut violations = Vec::new();
    let n = topology.n_nodes();
    if matrix.n_nodes() != n {
        violations.push(format!(
            "size mismatch: combiner is {}x{0}, topology has {} nodes",
            matrix.n_nodes(),
            n
        ));
        return ValidityReport { violations };
    }
    for k in 0..n {
        let mut sum = 0.0;
        for l in 0..n {
            let a = matrix.get(l, k);
            if a < 0.0 {
                violations.push(format!("negative weight a[{l},{k}] = {a}"));
            }
            if a != 0.0 && l != k && !topology.is_adjacent(k, l) {
                violations.push(format!("weight a[{l},{k}] = {a} on a non-edge"));
            }
            sum += a;
        }
        if (sum - 1.0).abs() > COLUMN_SUM_TOL {
            violations.push(format!("column {k} sums to {sum}, expected 1"));
        }
    }
    ValidityReport { violations }
}

/// Topology, Metropolis combiner, and precomputed neighbor lists bundled for
/// the protocol drivers. Immutable after construction; safe to share across
/// parallel experiment workers.
#[derive(Debug, Clone)]
pub struct DiffusionNetwork {
    pub topology: Topology,
    pub combiner: CombinerMatrix,
    pub neighbors: Vec<Vec<usize>>,
}

impl DiffusionNetwork {
    pub fn new(topology: Topology) -> Self {
        let combiner = metropolis_weights(&topology);
        let neighbors = (0..topology.n_nodes())
            .map(|k| topology.neighborhood(k))
            .collect();
        Self {
            topology,
            combiner,
            neighbors,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.topology.n_nodes()
    }
}
