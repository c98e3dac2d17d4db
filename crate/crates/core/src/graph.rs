//! Graphs, transition matrices and n-step transition probabilities.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on row sums accepted by [`TransitionMatrix::validate_stochastic`].
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// A directed edge with a nonnegative weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// How edge weights of a [`Graph`] turn into transition probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Weights are divided by the outgoing weight of their source vertex.
    #[default]
    Adjacency,
    /// Weights already are probabilities and are only validated.
    Stochastic,
}

/// A finite directed weighted graph.
///
/// Unoriented edges are represented as two opposite directed edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    vertices: usize,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(vertices: usize, edges: Vec<Edge>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut out_weight = vec![0.0; vertices];
        for e in &edges {
            for vertex in [e.from, e.to] {
                if vertex >= vertices {
                    return Err(Error::VertexOutOfRange { vertex, size: vertices });
                }
            }
            if !e.weight.is_finite() {
                return Err(Error::NonFiniteEntry { row: e.from, col: e.to });
            }
            if e.weight < 0.0 {
                return Err(Error::NegativeEntry { row: e.from, col: e.to });
            }
            if !seen.insert((e.from, e.to)) {
                return Err(Error::DuplicateEdge { from: e.from, to: e.to });
            }
            out_weight[e.from] += e.weight;
        }
        if let Some(v) = out_weight.iter().position(|&w| w <= 0.0) {
            return Err(Error::ZeroRow(v));
        }
        Ok(Self { vertices, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Dense weight matrix.
    pub fn weight_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.vertices, self.vertices);
        for e in &self.edges {
            a[(e.from, e.to)] = e.weight;
        }
        a
    }

    pub fn to_transition(&self, mode: WeightMode) -> Result<TransitionMatrix> {
        let a = self.weight_matrix();
        match mode {
            WeightMode::Adjacency => TransitionMatrix::from_adjacency(&a),
            WeightMode::Stochastic => TransitionMatrix::validate_stochastic(&a),
        }
    }
}

/// Dense row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    p: DMatrix<f64>,
}

impl TransitionMatrix {
    /// Accepts `raw` iff it is square, nonnegative and every row sums to one
    /// within [`ROW_SUM_TOLERANCE`]. Rows are then renormalized by their
    /// computed sums.
    pub fn validate_stochastic(raw: &DMatrix<f64>) -> Result<Self> {
        check_square(raw)?;
        check_entries(raw)?;
        for (i, row) in raw.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowSumViolation { row: i, sum });
            }
        }
        Ok(Self { p: renormalized(raw.clone()) })
    }

    /// Unbiased walk on a weighted graph: `p(v, v') = A(v, v') / sum_u A(v, u)`.
    pub fn from_adjacency(a: &DMatrix<f64>) -> Result<Self> {
        check_square(a)?;
        check_entries(a)?;
        let mut p = a.clone();
        for (i, mut row) in p.row_iter_mut().enumerate() {
            let sum: f64 = row.iter().sum();
            if sum <= 0.0 {
                return Err(Error::ZeroRow(i));
            }
            row /= sum;
        }
        Ok(Self { p: renormalized(p) })
    }

    /// Convenience constructor from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::validate_stochastic(&rows_to_matrix(rows)?)
    }

    /// [`TransitionMatrix::from_adjacency`] on nested rows.
    pub fn from_adjacency_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_adjacency(&rows_to_matrix(rows)?)
    }

    pub fn size(&self) -> usize {
        self.p.nrows()
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.p[(from, to)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.size() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, size: self.size() })
        }
    }

    /// One step of the walk applied to a row vector: returns `x P`.
    pub fn step_row(&self, x: &DVector<f64>) -> DVector<f64> {
        self.p.tr_mul(x)
    }

    /// One step applied to a column vector: returns `P x`.
    pub fn step_column(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.p * x
    }

    /// Row `va` of `P^m` for `m = 0..=n`.
    pub fn power_rows(&self, va: usize, n: usize) -> Vec<DVector<f64>> {
        let mut rows = Vec::with_capacity(n + 1);
        let mut x = unit(self.size(), va);
        for _ in 0..n {
            let next = self.step_row(&x);
            rows.push(x);
            x = next;
        }
        rows.push(x);
        rows
    }

    /// Distribution of the walker after `n` steps from `va` (row `va` of `P^n`).
    pub fn distribution_after(&self, va: usize, n: usize) -> DVector<f64> {
        let mut x = unit(self.size(), va);
        for _ in 0..n {
            x = self.step_row(&x);
        }
        x
    }

    /// `<va| P^n |vb>`.
    pub fn n_step_probability(&self, va: usize, vb: usize, n: usize) -> Result<f64> {
        self.check_vertex(va)?;
        self.check_vertex(vb)?;
        Ok(self.distribution_after(va, n)[vb])
    }

    /// True iff the digraph of strictly positive entries is strongly connected.
    pub fn strongly_connected(&self) -> bool {
        let n = self.size();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for w in 0..n {
                    let p = if forward { self.p[(u, w)] } else { self.p[(w, u)] };
                    if p > 0.0 && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    /// Positive entries as `(from, to, probability)`, row-major.
    pub fn positive_entries(&self) -> Vec<Edge> {
        let n = self.size();
        let mut edges = Vec::new();
        for from in 0..n {
            for to in 0..n {
                let weight = self.p[(from, to)];
                if weight > 0.0 {
                    edges.push(Edge { from, to, weight });
                }
            }
        }
        edges
    }
}

/// Which paths enter an average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    /// Paths must end at the given vertex; averages are unnormalized.
    Fixed(usize),
    /// Final vertex unconstrained.
    Free,
}

impl Endpoint {
    /// The column vector `|vb>` or `|1>`.
    pub fn vector(&self, size: usize) -> DVector<f64> {
        match *self {
            Endpoint::Fixed(vb) => unit(size, vb),
            Endpoint::Free => DVector::from_element(size, 1.0),
        }
    }

    pub fn check(&self, p: &TransitionMatrix) -> Result<()> {
        match *self {
            Endpoint::Fixed(vb) => p.check_vertex(vb),
            Endpoint::Free => Ok(()),
        }
    }
}

/// Initial vertex, horizon and endpoint condition of a path ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub start: usize,
    pub horizon: usize,
    pub endpoint: Endpoint,
}

impl EnsembleSpec {
    pub fn free(start: usize, horizon: usize) -> Self {
        Self { start, horizon, endpoint: Endpoint::Free }
    }

    pub fn fixed(start: usize, end: usize, horizon: usize) -> Self {
        Self { start, horizon, endpoint: Endpoint::Fixed(end) }
    }

    pub fn check(&self, p: &TransitionMatrix) -> Result<()> {
        p.check_vertex(self.start)?;
        self.endpoint.check(p)
    }
}

pub(crate) fn unit(size: usize, v: usize) -> DVector<f64> {
    let mut x = DVector::zeros(size);
    x[v] = 1.0;
    x
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::NotSquare { rows: 0, cols: 0 });
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare { rows: n, cols: bad.len() });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn check_square(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() == 0 || a.nrows() != a.ncols() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(())
}

fn check_entries(a: &DMatrix<f64>) -> Result<()> {
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let x = a[(i, j)];
            if !x.is_finite() {
                return Err(Error::NonFiniteEntry { row: i, col: j });
            }
            if x < 0.0 {
                return Err(Error::NegativeEntry { row: i, col: j });
            }
        }
    }
    Ok(())
}

// Divides each row by its computed sum until the row is a fixed point of the
// operation, so re-validating an already normalized matrix is the identity.
fn renormalized(mut p: DMatrix<f64>) -> DMatrix<f64> {
    for mut row in p.row_iter_mut() {
        for _ in 0..16 {
            let sum: f64 = row.iter().sum();
            if sum == 1.0 {
                break;
            }
            let next = row.map(|x| x / sum);
            if next == row {
                break;
            }
            row.copy_from(&next);
        }
    }
    p
}
