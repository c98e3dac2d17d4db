//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use localtime::TransitionMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every path of `n` steps from `va` with its weight and visit counts.
pub struct Enumeration {
    pub paths: Vec<(Vec<usize>, f64)>,
    pub size: usize,
}

impl Enumeration {
    pub fn new(p: &TransitionMatrix, va: usize, n: usize) -> Self {
        let size = p.size();
        let mut paths = vec![(vec![va], 1.0)];
        for _ in 0..n {
            let mut next = Vec::with_capacity(paths.len() * size);
            for (path, w) in &paths {
                let last = *path.last().unwrap();
                for v in 0..size {
                    let q = p.get(last, v);
                    if q > 0.0 {
                        let mut ext = path.clone();
                        ext.push(v);
                        next.push((ext, w * q));
                    }
                }
            }
            paths = next;
        }
        Self { paths, size }
    }

    fn visits(path: &[usize], v: usize) -> usize {
        path[1..].iter().filter(|&&x| x == v).count()
    }

    /// Unnormalized sum of `f(path)` over paths ending at `vb` (all paths
    /// when `vb` is `None`).
    pub fn sum(&self, vb: Option<usize>, f: impl Fn(&[usize]) -> f64) -> f64 {
        self.paths
            .iter()
            .filter(|(path, _)| vb.is_none_or(|b| *path.last().unwrap() == b))
            .map(|(path, w)| w * f(path))
            .sum()
    }

    pub fn mean(&self, vb: Option<usize>, v1: usize) -> f64 {
        self.sum(vb, |p| Self::visits(p, v1) as f64)
    }

    pub fn correlation(&self, vb: Option<usize>, v1: usize, v2: usize) -> f64 {
        self.sum(vb, |p| (Self::visits(p, v1) * Self::visits(p, v2)) as f64)
    }

    pub fn distribution(&self, vb: Option<usize>, v: usize, l: usize) -> f64 {
        self.sum(vb, |p| f64::from(u8::from(Self::visits(p, v) == l)))
    }

    pub fn normalization(&self, vb: Option<usize>) -> f64 {
        self.sum(vb, |_| 1.0)
    }
}

/// Solves `a x = b` by Gauss-Jordan elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

/// `<va| (M - zI)^-1 |vb>` for an arbitrary square `m`, by elimination.
pub fn resolvent_of(m: &[Vec<f64>], z: f64, va: usize, vb: usize) -> f64 {
    let n = m.len();
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m[i][j] - if i == j { z } else { 0.0 }).collect())
        .collect();
    let mut rhs = vec![0.0; n];
    rhs[vb] = 1.0;
    solve(a, rhs)[va]
}

pub fn rows(p: &TransitionMatrix) -> Vec<Vec<f64>> {
    (0..p.size()).map(|i| (0..p.size()).map(|j| p.get(i, j)).collect()).collect()
}

pub fn complete(n: usize) -> TransitionMatrix {
    let a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
    TransitionMatrix::from_adjacency_rows(&a).unwrap()
}

pub fn cycle(n: usize) -> TransitionMatrix {
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if (i + 1) % n == j || (j + 1) % n == i { 1.0 } else { 0.0 }).collect())
        .collect();
    TransitionMatrix::from_adjacency_rows(&a).unwrap()
}

/// Random strongly connected chain: a random Hamiltonian cycle plus random
/// extra edges (self-loops included), weights in `[0.1, 1]`.
pub fn random_strongly_connected(rng: &mut ChaCha8Rng, size: usize) -> TransitionMatrix {
    let mut order: Vec<usize> = (0..size).collect();
    for i in (1..size).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut a = vec![vec![0.0; size]; size];
    for k in 0..size {
        a[order[k]][order[(k + 1) % size]] = rng.random_range(0.1..1.0);
    }
    for row in a.iter_mut() {
        for w in row.iter_mut() {
            if *w == 0.0 && rng.random_bool(0.35) {
                *w = rng.random_range(0.1..1.0);
            }
        }
    }
    TransitionMatrix::from_adjacency_rows(&a).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small graphs used for exhaustive checks.
pub fn small_graphs() -> Vec<(&'static str, TransitionMatrix)> {
    let mut r = rng(2024);
    let mut v = vec![
        ("self-loop", TransitionMatrix::from_rows(&[vec![1.0]]).unwrap()),
        ("two-cycle", TransitionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()),
        ("lazy pair", TransitionMatrix::from_rows(&[vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap()),
        ("triangle", complete(3)),
        ("cycle4", cycle(4)),
        ("complete4", complete(4)),
        (
            "directed with sink-like vertex",
            TransitionMatrix::from_rows(&[
                vec![0.0, 0.5, 0.5, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.2, 0.8],
                vec![1.0, 0.0, 0.0, 0.0],
            ])
            .unwrap(),
        ),
        (
            "reducible",
            TransitionMatrix::from_rows(&[vec![0.5, 0.5, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.25, 0.75]]).unwrap(),
        ),
    ];
    v.push(("random3", random_strongly_connected(&mut r, 3)));
    v.push(("random4", random_strongly_connected(&mut r, 4)));
    v
}
