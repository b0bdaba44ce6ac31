//! The generator/load node graph and its spectral operators.
//!
//! Each node of the transformed graph is a single generator or a single
//! load, so `n_nodes = |gens| + |loads|`. Nodes sharing a bus form a
//! clique; an in-service branch (i, j) connects every node on bus i with
//! every node on bus j. Buses hosting neither a generator nor a load are
//! eliminated by star-mesh reduction on impedance magnitudes: removing a
//! junction joins each pair of its neighbours with the series sum of the
//! two branch |Z| values, and parallel connections combine reciprocally
//! (1/|Z_eq| = sum 1/|Z_m|), matching the admittance reading of the edge
//! weights. Intra-bus clique edges take the largest weight incident to
//! their bus (1.0 when the bus has no in-service branch).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::case::GridCase;
use crate::mat::Mat;
use crate::{GridError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Gen,
    Load,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub kind: NodeKind,
    /// Index into the case's gen or load list.
    pub source_id: usize,
    /// Internal bus index.
    pub bus: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedGraph {
    /// Generators first (gen order), then loads (load order).
    pub nodes: Vec<GraphNode>,
    /// Undirected weighted edges (u < v), sorted.
    pub edges: Vec<(usize, usize, f64)>,
    /// Symmetric weighted adjacency, zero diagonal.
    pub adjacency: Mat,
    /// 2 L_norm / lambda_max - I, spectral radius <= 1.
    pub scaled_laplacian: Mat,
    /// Whether the transformed graph is a single component.
    pub connected: bool,
}

impl TransformedGraph {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// GCN propagation matrix D^{-1/2} (A + I) D^{-1/2}.
    pub fn gcn_norm_adjacency(&self) -> Mat {
        let n = self.n_nodes();
        let mut a = self.adjacency.clone();
        for i in 0..n {
            a[(i, i)] += 1.0;
        }
        normalize_symmetric(&a)
    }

    /// Edge list with self-loops, for attention layers.
    pub fn edges_with_self_loops(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self.edges.iter().map(|&(u, v, _)| (u, v)).collect();
        e.extend((0..self.n_nodes()).map(|i| (i, i)));
        e
    }
}

/// Edge weight exp(-k ln|Z|); k = 0 gives the binary adjacency, k = 1
/// the admittance magnitude 1/|Z|.
pub fn edge_weight(z_abs: f64, k: f64) -> Result<f64> {
    if z_abs <= 0.0 || !z_abs.is_finite() {
        return Err(GridError::NonPositiveImpedance(z_abs));
    }
    Ok((-k * z_abs.ln()).exp())
}

/// Transformed graph with binary (unit) edge weights.
pub fn transform_graph(case: &GridCase) -> Result<TransformedGraph> {
    transform_graph_weighted(case, 0.0)
}

/// Transformed graph with impedance-based edge weights of exponent `k`.
pub fn transform_graph_weighted(case: &GridCase, k: f64) -> Result<TransformedGraph> {
    if case.n_gens() + case.n_loads() == 0 {
        return Err(GridError::EmptyGrid("no generators or loads"));
    }

    let mut nodes = Vec::with_capacity(case.n_gens() + case.n_loads());
    for (i, g) in case.gens.iter().enumerate() {
        nodes.push(GraphNode { kind: NodeKind::Gen, source_id: i, bus: g.bus });
    }
    for (i, l) in case.loads.iter().enumerate() {
        nodes.push(GraphNode { kind: NodeKind::Load, source_id: i, bus: l.bus });
    }

    let mut nodes_on_bus = vec![Vec::new(); case.n_buses()];
    for (idx, node) in nodes.iter().enumerate() {
        nodes_on_bus[node.bus].push(idx);
    }

    let bus_z = reduced_bus_impedances(case, &nodes_on_bus);

    let n = nodes.len();
    let mut adjacency = Mat::zeros(n, n);
    let mut bus_max_weight = vec![0.0f64; case.n_buses()];
    for (&(bi, bj), &z) in &bus_z {
        let w = edge_weight(z, k)?;
        bus_max_weight[bi] = bus_max_weight[bi].max(w);
        bus_max_weight[bj] = bus_max_weight[bj].max(w);
        for &u in &nodes_on_bus[bi] {
            for &v in &nodes_on_bus[bj] {
                adjacency[(u, v)] = w;
                adjacency[(v, u)] = w;
            }
        }
    }
    // Intra-bus cliques; isolated buses fall back to unit weight.
    for members in &nodes_on_bus {
        for (a, &u) in members.iter().enumerate() {
            for &v in &members[a + 1..] {
                let bus = nodes[u].bus;
                let w = if bus_max_weight[bus] > 0.0 { bus_max_weight[bus] } else { 1.0 };
                adjacency[(u, v)] = w;
                adjacency[(v, u)] = w;
            }
        }
    }

    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if adjacency[(u, v)] > 0.0 {
                edges.push((u, v, adjacency[(u, v)]));
            }
        }
    }

    let connected = graph_connected(n, &edges);
    let scaled_laplacian = scaled_laplacian(&adjacency);

    Ok(TransformedGraph { nodes, edges, adjacency, scaled_laplacian, connected })
}

/// Bus-pair |Z| map over in-service branches, with junction buses
/// (no generator, no load) eliminated by star-mesh reduction.
fn reduced_bus_impedances(
    case: &GridCase,
    nodes_on_bus: &[Vec<usize>],
) -> BTreeMap<(usize, usize), f64> {
    let parallel = |map: &mut BTreeMap<(usize, usize), f64>, i: usize, j: usize, z: f64| {
        if i == j {
            return;
        }
        let key = (i.min(j), i.max(j));
        match map.get_mut(&key) {
            Some(existing) => *existing = 1.0 / (1.0 / *existing + 1.0 / z),
            None => {
                map.insert(key, z);
            }
        }
    };

    let mut zmap = BTreeMap::new();
    for br in case.branches.iter().filter(|b| b.status) {
        parallel(&mut zmap, br.from, br.to, br.z_abs());
    }

    let junctions: Vec<usize> = (0..case.n_buses())
        .filter(|&b| nodes_on_bus[b].is_empty())
        .collect();
    for &j in &junctions {
        let incident: Vec<(usize, f64)> = zmap
            .iter()
            .filter_map(|(&(a, b), &z)| {
                if a == j {
                    Some((b, z))
                } else if b == j {
                    Some((a, z))
                } else {
                    None
                }
            })
            .collect();
        zmap.retain(|&(a, b), _| a != j && b != j);
        for (p, &(u, zu)) in incident.iter().enumerate() {
            for &(v, zv) in &incident[p + 1..] {
                parallel(&mut zmap, u, v, zu + zv);
            }
        }
    }
    zmap
}

fn graph_connected(n: usize, edges: &[(usize, usize, f64)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v, _) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

/// D^{-1/2} A D^{-1/2} with degree-zero rows given a unit self-loop first.
fn normalize_symmetric(a: &Mat) -> Mat {
    assert!(a.is_square());
    let n = a.n_rows;
    let mut a = a.clone();
    for i in 0..n {
        if a.row(i).iter().sum::<f64>() == 0.0 {
            a[(i, i)] = 1.0;
        }
    }
    let deg: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum::<f64>()).collect();
    let dis: Vec<f64> = deg.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = dis[i] * a[(i, j)] * dis[j];
        }
    }
    out
}

/// Normalized Laplacian I - D^{-1/2} A D^{-1/2}.
pub fn normalized_laplacian(adjacency: &Mat) -> Mat {
    assert!(adjacency.is_square());
    let n = adjacency.n_rows;
    let norm = normalize_symmetric(adjacency);
    let mut lap = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            lap[(i, j)] = if i == j { 1.0 - norm[(i, j)] } else { -norm[(i, j)] };
        }
    }
    lap
}

/// Scaled normalized Laplacian 2 L / lambda_max - I; lambda_max comes
/// from power iteration (falling back to the spectral bound 2 when it
/// stagnates).
pub fn scaled_laplacian(adjacency: &Mat) -> Mat {
    let n = adjacency.n_rows;
    let lap = normalized_laplacian(adjacency);

    let lambda_max = power_iteration_sym(&lap);
    let mut out = Mat::zeros(n, n);
    if lambda_max < 1e-9 {
        // L is numerically zero (all-self-loop graph); 2 L / x - I -> -I.
        for i in 0..n {
            out[(i, i)] = -1.0;
        }
        return out;
    }
    // Tiny inflation keeps the spectrum inside [-1, 1] when the power
    // iteration slightly underestimates.
    let scale = 2.0 / (lambda_max * (1.0 + 1e-7));
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = scale * lap[(i, j)] - if i == j { 1.0 } else { 0.0 };
        }
    }
    out
}

fn power_iteration_sym(m: &Mat) -> f64 {
    let n = m.n_rows;
    if n == 0 {
        return 0.0;
    }
    // Deterministic, non-degenerate start vector.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 / (i + 1) as f64).collect();
    let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm0);

    let mut lambda = 0.0;
    for _ in 0..300 {
        let w = m.matvec(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let rayleigh: f64 = next
            .iter()
            .zip(m.matvec(&next))
            .map(|(a, b)| a * b)
            .sum();
        if (rayleigh - lambda).abs() <= 1e-13 * rayleigh.abs().max(1.0) {
            return rayleigh;
        }
        lambda = rayleigh;
        v = next;
    }
    // Stagnant iteration: use the universal bound for normalized Laplacians.
    2.0
}
