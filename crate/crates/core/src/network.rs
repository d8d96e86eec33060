//! Rooted radial networks and their path matrices.
//!
//! Buses are indexed from 0 internally; bus 0 is the root and the DC slack.
//! File formats use 1-based indices and are converted on load.
//!
//! For a radial network the DC shift-factor matrix is the path matrix `A`:
//! row `e` has a one in column `n` exactly when edge `e` lies on the path from
//! the root to bus `n`, so `(A c)_e` is the total withdrawal downstream of `e`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("network must have at least one bus and exactly n_buses - 1 edges (got {edges} edges for {buses} buses)")]
    BadEdgeCount { buses: usize, edges: usize },
    #[error("edge {edge} closes a cycle")]
    CycleDetected { edge: usize },
    #[error("buses {unreachable:?} are not connected to the root")]
    Disconnected { unreachable: Vec<usize> },
    #[error("the root bus carries a withdrawal request (demand {demand})")]
    RootHasRequest { demand: f64 },
    #[error("edge {edge} references bus {bus}, outside 1..={n_buses}")]
    BusOutOfRange { edge: usize, bus: usize, n_buses: usize },
    #[error("{field} has length {got}, expected {expected}")]
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid value for {field}[{index}]: {value}")]
    InvalidValue {
        field: &'static str,
        index: usize,
        value: f64,
    },
    #[error("line {edge} has lower limit {lower} above upper limit {upper}")]
    LimitOrder { edge: usize, lower: f64, upper: f64 },
    #[error("edge index {0} out of range")]
    IndexOutOfRange(usize),
}

/// Unvalidated network description, 1-based as in input files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub n_buses: usize,
    pub edges: Vec<(usize, usize)>,
    pub line_upper: Vec<f64>,
    pub line_lower: Vec<f64>,
    pub withdrawal_cap: Vec<f64>,
    pub demand: Vec<f64>,
}

/// A validated radial network rooted at bus 0.
///
/// Edges keep their input order but are oriented parent -> child.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialNetwork {
    n_buses: usize,
    edges: Vec<(usize, usize)>,
    line_upper: Vec<f64>,
    line_lower: Vec<f64>,
    withdrawal_cap: Vec<f64>,
    demand: Vec<f64>,
    parent: Vec<Option<usize>>,
    parent_edge: Vec<Option<usize>>,
    depth: Vec<usize>,
}

impl RadialNetwork {
    /// Validates a 1-based description and builds the rooted tree.
    pub fn new(spec: NetworkSpec) -> Result<Self, NetworkError> {
        validate_radial(spec)
    }

    pub fn n_buses(&self) -> usize {
        self.n_buses
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as 0-based `(parent, child)` pairs in input order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn line_upper(&self) -> &[f64] {
        &self.line_upper
    }

    pub fn line_lower(&self) -> &[f64] {
        &self.line_lower
    }

    pub fn withdrawal_cap(&self) -> &[f64] {
        &self.withdrawal_cap
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    pub fn parent(&self, bus: usize) -> Option<usize> {
        self.parent[bus]
    }

    pub fn depth(&self, bus: usize) -> usize {
        self.depth[bus]
    }

    /// Buses with a positive request.
    pub fn request_set(&self) -> Vec<usize> {
        (0..self.n_buses).filter(|&i| self.demand[i] > 0.0).collect()
    }

    pub fn is_requesting(&self, bus: usize) -> bool {
        self.demand[bus] > 0.0
    }

    /// Edges on the path from the root to `bus`, nearest the root first.
    pub fn root_path_edges(&self, bus: usize) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.depth[bus]);
        let mut n = bus;
        while let Some(e) = self.parent_edge[n] {
            path.push(e);
            n = self.edges[e].0;
        }
        path.reverse();
        path
    }

    /// Converts back to the 1-based file description.
    pub fn to_spec(&self) -> NetworkSpec {
        NetworkSpec {
            n_buses: self.n_buses,
            edges: self.edges.iter().map(|&(p, c)| (p + 1, c + 1)).collect(),
            line_upper: self.line_upper.clone(),
            line_lower: self.line_lower.clone(),
            withdrawal_cap: self.withdrawal_cap.clone(),
            demand: self.demand.clone(),
        }
    }

    /// Same topology with a different demand vector.
    pub fn with_demand(&self, demand: Vec<f64>) -> Result<Self, NetworkError> {
        let mut spec = self.to_spec();
        spec.demand = demand;
        Self::new(spec)
    }

    /// Same topology with different line limits.
    pub fn with_line_limits(&self, upper: Vec<f64>, lower: Vec<f64>) -> Result<Self, NetworkError> {
        let mut spec = self.to_spec();
        spec.line_upper = upper;
        spec.line_lower = lower;
        Self::new(spec)
    }
}

fn check_len(field: &'static str, v: &[f64], expected: usize) -> Result<(), NetworkError> {
    if v.len() != expected {
        return Err(NetworkError::DimensionMismatch {
            field,
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

/// Checks the radial-tree invariants and caches parent/depth arrays.
pub fn validate_radial(spec: NetworkSpec) -> Result<RadialNetwork, NetworkError> {
    let n = spec.n_buses;
    if n == 0 {
        return Err(NetworkError::BadEdgeCount {
            buses: 0,
            edges: spec.edges.len(),
        });
    }
    let mut uf: Vec<usize> = (0..n).collect();
    for (e, &(a, b)) in spec.edges.iter().enumerate() {
        for bus in [a, b] {
            if bus == 0 || bus > n {
                return Err(NetworkError::BusOutOfRange {
                    edge: e + 1,
                    bus,
                    n_buses: n,
                });
            }
        }
        let (ra, rb) = (find(&mut uf, a - 1), find(&mut uf, b - 1));
        if ra == rb {
            return Err(NetworkError::CycleDetected { edge: e + 1 });
        }
        uf[ra] = rb;
    }
    let root = find(&mut uf, 0);
    let unreachable: Vec<usize> = (0..n).filter(|&i| find(&mut uf, i) != root).map(|i| i + 1).collect();
    if !unreachable.is_empty() {
        return Err(NetworkError::Disconnected { unreachable });
    }
    // acyclic and connected already implies n - 1 edges
    if spec.edges.len() + 1 != n {
        return Err(NetworkError::BadEdgeCount {
            buses: n,
            edges: spec.edges.len(),
        });
    }

    let m = n - 1;
    check_len("line_upper", &spec.line_upper, m)?;
    check_len("line_lower", &spec.line_lower, m)?;
    check_len("withdrawal_cap", &spec.withdrawal_cap, n)?;
    check_len("demand", &spec.demand, n)?;
    for e in 0..m {
        let (lo, up) = (spec.line_lower[e], spec.line_upper[e]);
        if lo.is_nan() || lo == f64::INFINITY {
            return Err(NetworkError::InvalidValue {
                field: "line_lower",
                index: e,
                value: lo,
            });
        }
        if up.is_nan() || up == f64::NEG_INFINITY {
            return Err(NetworkError::InvalidValue {
                field: "line_upper",
                index: e,
                value: up,
            });
        }
        if lo > up {
            return Err(NetworkError::LimitOrder {
                edge: e + 1,
                lower: lo,
                upper: up,
            });
        }
    }
    for (i, &q) in spec.withdrawal_cap.iter().enumerate() {
        if q.is_nan() || q < 0.0 {
            return Err(NetworkError::InvalidValue {
                field: "withdrawal_cap",
                index: i,
                value: q,
            });
        }
    }
    for (i, &d) in spec.demand.iter().enumerate() {
        if !d.is_finite() || d < 0.0 {
            return Err(NetworkError::InvalidValue {
                field: "demand",
                index: i,
                value: d,
            });
        }
    }
    if spec.demand[0] > 0.0 {
        return Err(NetworkError::RootHasRequest {
            demand: spec.demand[0],
        });
    }

    // orient edges away from the root
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(a, b)) in spec.edges.iter().enumerate() {
        adj[a - 1].push((b - 1, e));
        adj[b - 1].push((a - 1, e));
    }
    let mut parent = vec![None; n];
    let mut parent_edge = vec![None; n];
    let mut depth = vec![0; n];
    let mut edges = vec![(0, 0); m];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &(v, e) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                parent_edge[v] = Some(e);
                depth[v] = depth[u] + 1;
                edges[e] = (u, v);
                queue.push_back(v);
            }
        }
    }

    Ok(RadialNetwork {
        n_buses: n,
        edges,
        line_upper: spec.line_upper,
        line_lower: spec.line_lower,
        withdrawal_cap: spec.withdrawal_cap,
        demand: spec.demand,
        parent,
        parent_edge,
        depth,
    })
}

/// The (N-1) x N 0/1 path matrix; rows follow edge input order.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrix {
    n_edges: usize,
    n_buses: usize,
    entries: Vec<bool>,
}

impl PathMatrix {
    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn n_buses(&self) -> usize {
        self.n_buses
    }

    pub fn contains(&self, edge: usize, bus: usize) -> bool {
        self.entries[edge * self.n_buses + bus]
    }

    /// Buses downstream of `edge`.
    pub fn downstream(&self, edge: usize) -> Vec<usize> {
        (0..self.n_buses).filter(|&n| self.contains(edge, n)).collect()
    }

    /// Edge flows `A c`.
    pub fn flows(&self, c: &[f64]) -> Vec<f64> {
        assert_eq!(c.len(), self.n_buses);
        (0..self.n_edges)
            .map(|e| (0..self.n_buses).filter(|&n| self.contains(e, n)).map(|n| c[n]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n_edges, self.n_buses);
        for e in 0..self.n_edges {
            for n in 0..self.n_buses {
                if self.contains(e, n) {
                    m.set(e, n, 1.0);
                }
            }
        }
        m
    }

    /// Whether `s` is exactly this path matrix.
    pub fn matches(&self, s: &DenseMatrix) -> bool {
        s.nrows() == self.n_edges
            && s.ncols() == self.n_buses
            && (0..self.n_edges).all(|e| {
                (0..self.n_buses).all(|n| s.get(e, n) == if self.contains(e, n) { 1.0 } else { 0.0 })
            })
    }
}

pub fn build_path_matrix(net: &RadialNetwork) -> PathMatrix {
    let (m, n) = (net.n_edges(), net.n_buses());
    let mut entries = vec![false; m * n];
    for bus in 0..n {
        for e in net.root_path_edges(bus) {
            entries[e * n + bus] = true;
        }
    }
    PathMatrix {
        n_edges: m,
        n_buses: n,
        entries,
    }
}

/// The set of buses whose root path crosses `edge`.
pub fn downstream_set(net: &RadialNetwork, edge: usize) -> Result<Vec<usize>, NetworkError> {
    if edge >= net.n_edges() {
        return Err(NetworkError::IndexOutOfRange(edge));
    }
    let child = net.edges()[edge].1;
    let mut out = vec![child];
    let mut stack = vec![child];
    while let Some(u) = stack.pop() {
        for v in 0..net.n_buses() {
            if net.parent(v) == Some(u) {
                out.push(v);
                stack.push(v);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn spec(n: usize, edges: &[(usize, usize)]) -> NetworkSpec {
        NetworkSpec {
            n_buses: n,
            edges: edges.to_vec(),
            line_upper: vec![10.0; edges.len()],
            line_lower: vec![-10.0; edges.len()],
            withdrawal_cap: vec![f64::INFINITY; n],
            demand: vec![0.0; n],
        }
    }

    fn net(n: usize, edges: &[(usize, usize)]) -> RadialNetwork {
        RadialNetwork::new(spec(n, edges)).unwrap()
    }

    fn dense_rows(a: &PathMatrix) -> Vec<Vec<u8>> {
        (0..a.n_edges())
            .map(|e| (0..a.n_buses()).map(|n| a.contains(e, n) as u8).collect())
            .collect()
    }

    #[test]
    fn path_graph_is_valid() {
        let net = net(3, &[(1, 2), (2, 3)]);
        assert_eq!(net.depth(2), 2);
        assert_eq!(net.parent(2), Some(1));
    }

    #[test]
    fn cycle_is_rejected() {
        let err = RadialNetwork::new(spec(3, &[(1, 2), (2, 3), (3, 1)])).unwrap_err();
        assert!(matches!(err, NetworkError::CycleDetected { edge: 3 }));
    }

    #[test]
    fn two_components_are_rejected() {
        let err = RadialNetwork::new(spec(4, &[(1, 2), (3, 4)])).unwrap_err();
        assert_eq!(err, NetworkError::Disconnected { unreachable: vec![3, 4] });
    }

    #[test]
    fn root_request_is_rejected() {
        let mut s = spec(2, &[(1, 2)]);
        s.demand = vec![1.0, 0.0];
        assert!(matches!(RadialNetwork::new(s), Err(NetworkError::RootHasRequest { .. })));
    }

    #[test]
    fn bad_limits_rejected() {
        let mut s = spec(2, &[(1, 2)]);
        s.line_lower = vec![20.0];
        assert!(matches!(RadialNetwork::new(s), Err(NetworkError::LimitOrder { edge: 1, .. })));
        let mut s = spec(2, &[(1, 2)]);
        s.withdrawal_cap = vec![0.0, -1.0];
        assert!(matches!(RadialNetwork::new(s), Err(NetworkError::InvalidValue { .. })));
        let mut s = spec(2, &[(1, 3)]);
        s.demand = vec![0.0, 0.0];
        assert!(matches!(RadialNetwork::new(s), Err(NetworkError::BusOutOfRange { bus: 3, .. })));
    }

    #[test]
    fn child_to_parent_edges_are_reoriented() {
        let net = net(3, &[(2, 1), (3, 2)]);
        assert_eq!(net.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(dense_rows(&build_path_matrix(&net)), vec![vec![0, 1, 1], vec![0, 0, 1]]);
    }

    #[test]
    fn path_matrices_of_small_trees() {
        assert_eq!(
            dense_rows(&build_path_matrix(&net(3, &[(1, 2), (2, 3)]))),
            vec![vec![0, 1, 1], vec![0, 0, 1]]
        );
        assert_eq!(
            dense_rows(&build_path_matrix(&net(3, &[(1, 2), (1, 3)]))),
            vec![vec![0, 1, 0], vec![0, 0, 1]]
        );
        assert_eq!(
            dense_rows(&build_path_matrix(&net(4, &[(1, 2), (2, 3), (2, 4)]))),
            vec![vec![0, 1, 1, 1], vec![0, 0, 1, 0], vec![0, 0, 0, 1]]
        );
    }

    #[test]
    fn downstream_sets() {
        let p = net(3, &[(1, 2), (2, 3)]);
        assert_eq!(downstream_set(&p, 0).unwrap(), vec![1, 2]);
        assert_eq!(downstream_set(&p, 1).unwrap(), vec![2]);
        let t = net(4, &[(1, 2), (2, 3), (2, 4)]);
        assert_eq!(downstream_set(&t, 1).unwrap(), vec![2]);
        assert_eq!(downstream_set(&t, 3), Err(NetworkError::IndexOutOfRange(3)));
    }

    #[test]
    fn single_bus_network() {
        let n = net(1, &[]);
        let a = build_path_matrix(&n);
        assert_eq!(a.n_edges(), 0);
        assert!(n.root_path_edges(0).is_empty());
    }
}
