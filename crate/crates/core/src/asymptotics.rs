//! Stationary distributions and large-time limits of local-time averages.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::graph::{Endpoint, TransitionMatrix};
use crate::zdomain::{self, NumericResolvent};
use crate::{Error, Result};

/// Distances `z - 1` used by [`final_value`]: `2^-4, 2^-6, ..., 2^-20`.
pub const EPSILON_LADDER: [f64; 9] = [
    1.0 / 16.0,
    1.0 / 64.0,
    1.0 / 256.0,
    1.0 / 1024.0,
    1.0 / 4096.0,
    1.0 / 16384.0,
    1.0 / 65536.0,
    1.0 / 262144.0,
    1.0 / 1048576.0,
];

/// Agreement required between the last two extrapolated estimates.
pub const EXTRAPOLATION_TOLERANCE: f64 = 1e-7;

/// Left eigenvector of `P` at eigenvalue 1, normalized to sum 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
}

impl StationaryDistribution {
    pub fn get(&self, v: usize) -> f64 {
        self.pi[v]
    }
}

/// Solves `(P^T - I) pi = 0` with the last equation replaced by `sum pi = 1`.
///
/// For a strongly connected chain the null space is one-dimensional, so the
/// replaced system is nonsingular. Periodic chains are fine.
pub fn invariant_distribution(p: &TransitionMatrix) -> Result<StationaryDistribution> {
    if !p.strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let n = p.size();
    let mut a = p.matrix().transpose() - DMatrix::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let pi = a.lu().solve(&rhs).ok_or(Error::SingularSystem { z: 1.0 })?;
    Ok(StationaryDistribution { pi: pi.iter().copied().collect() })
}

/// Max-norm distance between `(1-z) R(z)` and the Perron projection
/// `|1><pi|` at `z = 1 + eps`.
pub fn perron_limit_residual(p: &TransitionMatrix, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 0.5], got {eps}")));
    }
    let pi = invariant_distribution(p)?;
    let z = 1.0 + eps;
    let r = NumericResolvent::new(p, z)?;
    let n = p.size();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            worst = worst.max(((1.0 - z) * r.element(a, b) - pi.get(b)).abs());
        }
    }
    Ok(worst)
}

/// `lim f_n / n^k` from the z-transform `F`, as the Richardson-extrapolated
/// limit of `(z-1)^(k+1) / k! * F(z)` along [`EPSILON_LADDER`].
///
/// The limit must exist; if the last two diagonal entries of the Richardson
/// table disagree by more than [`EXTRAPOLATION_TOLERANCE`] (relative to the
/// magnitude when it exceeds one) the extrapolation is reported as diverged.
pub fn final_value<F>(f: F, k: u32) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let factorial: f64 = (1..=k).map(f64::from).product();
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(EPSILON_LADDER.len());
    for (j, &eps) in EPSILON_LADDER.iter().enumerate() {
        let g = eps.powi(k as i32 + 1) / factorial * f(1.0 + eps)?;
        let mut row = vec![g];
        for i in 1..=j {
            // successive eps shrink by 4, errors assumed to be a power series in eps
            let q = 4f64.powi(i as i32);
            let prev = &table[j - 1];
            row.push(row[i - 1] + (row[i - 1] - prev[i - 1]) / (q - 1.0));
        }
        table.push(row);
    }
    let last = table.len() - 1;
    let best = table[last][last];
    let previous = table[last - 1][last - 1];
    if !best.is_finite() || (best - previous).abs() > EXTRAPOLATION_TOLERANCE * best.abs().max(1.0) {
        return Err(Error::ExtrapolationDiverged(previous, best));
    }
    Ok(best)
}

/// `lim <L(v1)>* / n`, which equals `pi(v1)` for any starting vertex.
pub fn limiting_local_time_fraction(p: &TransitionMatrix, v1: usize) -> Result<f64> {
    p.check_vertex(v1)?;
    Ok(invariant_distribution(p)?.get(v1))
}

/// `lim <L(v1) L(v2)>* / n^2 = pi(v1) pi(v2)`.
pub fn limiting_pair_fraction(p: &TransitionMatrix, v1: usize, v2: usize) -> Result<f64> {
    p.check_vertex(v1)?;
    p.check_vertex(v2)?;
    let pi = invariant_distribution(p)?;
    Ok(pi.get(v1) * pi.get(v2))
}

/// `lim <L(v1)>* / n` through [`final_value`] on the z-domain mean.
pub fn extrapolated_fraction(p: &TransitionMatrix, va: usize, v1: usize) -> Result<f64> {
    final_value(
        |z| Ok(zdomain::mean_with(&NumericResolvent::new(p, z)?, va, Endpoint::Free, v1)?),
        1,
    )
}

/// `lim <L(v1) L(v2)>* / n^2` through [`final_value`] on the z-domain
/// correlation.
pub fn extrapolated_pair_fraction(p: &TransitionMatrix, va: usize, v1: usize, v2: usize) -> Result<f64> {
    final_value(
        |z| {
            zdomain::correlation_with(&NumericResolvent::new(p, z)?, va, Endpoint::Free, v1, v2)
        },
        2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> TransitionMatrix {
        TransitionMatrix::from_adjacency(&DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 }))
            .unwrap()
    }

    fn star(n: usize) -> TransitionMatrix {
        TransitionMatrix::from_adjacency(&DMatrix::from_fn(n + 1, n + 1, |i, j| {
            if (i == 0) != (j == 0) { 1.0 } else { 0.0 }
        }))
        .unwrap()
    }

    #[test]
    fn complete_graph_is_uniform() {
        let pi = invariant_distribution(&complete(5)).unwrap();
        for &x in &pi.pi {
            assert!((x - 0.2).abs() < 1e-14);
        }
    }

    #[test]
    fn star_graph_distribution() {
        for n in [1, 2, 5] {
            let pi = invariant_distribution(&star(n)).unwrap();
            assert!((pi.get(0) - 0.5).abs() < 1e-14);
            for v in 1..=n {
                assert!((pi.get(v) - 0.5 / n as f64).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn degree_formula_on_undirected_graph() {
        // triangle with a pendant vertex: degrees 2, 2, 3, 1
        let edges = [(0, 1), (1, 2), (0, 2), (2, 3)];
        let a = DMatrix::from_fn(4, 4, |i, j| {
            if edges.contains(&(i, j)) || edges.contains(&(j, i)) { 1.0 } else { 0.0 }
        });
        let pi = invariant_distribution(&TransitionMatrix::from_adjacency(&a).unwrap()).unwrap();
        for (v, d) in [2.0, 2.0, 3.0, 1.0].iter().enumerate() {
            assert!((pi.get(v) - d / 8.0).abs() < 1e-14);
        }
    }

    #[test]
    fn reducible_chain_rejected() {
        let p = TransitionMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(invariant_distribution(&p).unwrap_err(), Error::NotStronglyConnected);
        assert_eq!(perron_limit_residual(&p, 0.1).unwrap_err(), Error::NotStronglyConnected);
        assert_eq!(limiting_local_time_fraction(&p, 0).unwrap_err(), Error::NotStronglyConnected);
    }

    #[test]
    fn single_vertex_residual_vanishes() {
        let p = TransitionMatrix::from_rows(&[vec![1.0]]).unwrap();
        for eps in [0.5, 1e-3, 1e-6] {
            assert!(perron_limit_residual(&p, eps).unwrap() < 1e-9);
        }
    }

    #[test]
    fn constant_sequence_final_value() {
        let c = 2.5;
        let v = final_value(|z| Ok(c * z / (z - 1.0)), 0).unwrap();
        assert!((v - c).abs() < 1e-12);
    }

    #[test]
    fn oscillating_transform_diverges() {
        // (z-1) F(z) = sin(1/(z-1)) has no limit at z -> 1
        let r = final_value(|z| Ok((1.0 / (z - 1.0)).sin() / (z - 1.0)), 0);
        assert!(matches!(r, Err(Error::ExtrapolationDiverged(..))));
    }

    #[test]
    fn limiting_fractions() {
        assert!((limiting_local_time_fraction(&star(5), 3).unwrap() - 0.1).abs() < 1e-14);
        assert!((limiting_local_time_fraction(&complete(4), 1).unwrap() - 0.25).abs() < 1e-14);
        assert!((limiting_pair_fraction(&complete(2), 0, 1).unwrap() - 0.25).abs() < 1e-14);
        assert!((limiting_pair_fraction(&star(3), 0, 2).unwrap() - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn extrapolation_matches_stationary_values() {
        let p = complete(4);
        assert!((extrapolated_fraction(&p, 0, 1).unwrap() - 0.25).abs() < 1e-6);
        let s = star(5);
        assert!((extrapolated_fraction(&s, 2, 0).unwrap() - 0.5).abs() < 1e-6);
        assert!((extrapolated_pair_fraction(&s, 0, 0, 3).unwrap() - 0.05).abs() < 1e-6);
    }
}
