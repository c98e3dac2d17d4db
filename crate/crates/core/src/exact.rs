//! Exact time-domain local-time statistics.
//!
//! Means and correlations are sums of matrix-power products over visit
//! times; the one-point distribution comes from an augmented chain on
//! `(vertex, visit count)` states. Averages with a fixed endpoint are
//! unnormalized: their total mass is `P^n[va, vb]`.

use nalgebra::DVector;
use serde::Serialize;

use crate::graph::{unit, Endpoint, EnsembleSpec, TransitionMatrix};
use crate::{Error, Result};

/// Visit counts of one path. The starting vertex is not counted, so the
/// counts always add up to the horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalTimeProfile {
    pub horizon: usize,
    pub counts: Vec<usize>,
}

impl LocalTimeProfile {
    /// Profile of `path = (v0, v1, ..., vn)` on `size` vertices.
    pub fn from_path(path: &[usize], size: usize) -> Self {
        let mut counts = vec![0; size];
        for &v in path.iter().skip(1) {
            counts[v] += 1;
        }
        Self { horizon: path.len().saturating_sub(1), counts }
    }
}

/// Mass of the local time at one vertex over `l = 0..=lmax`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionTable {
    pub vertex: usize,
    pub horizon: usize,
    pub endpoint: Endpoint,
    pub mass: Vec<f64>,
    /// True when `lmax < horizon`: the last bucket then holds every count
    /// `>= lmax`.
    pub saturated: bool,
}

impl DistributionTable {
    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.mass.iter().enumerate().map(|(l, m)| l as f64 * m).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.mass.iter().enumerate().map(|(l, m)| (l * l) as f64 * m).sum()
    }
}

/// `<1>` for the ensemble: `P^n[va, vb]` for a fixed endpoint, 1 otherwise.
pub fn normalization(p: &TransitionMatrix, spec: &EnsembleSpec) -> Result<f64> {
    spec.check(p)?;
    Ok(match spec.endpoint {
        Endpoint::Fixed(vb) => p.distribution_after(spec.start, spec.horizon)[vb],
        Endpoint::Free => 1.0,
    })
}

/// Divides an unnormalized fixed-endpoint average by `<1>`.
pub fn normalize(p: &TransitionMatrix, spec: &EnsembleSpec, value: f64) -> Result<f64> {
    let z = normalization(p, spec)?;
    match spec.endpoint {
        Endpoint::Fixed(vb) if z == 0.0 => Err(Error::UnreachableEndpoint(vb)),
        _ => Ok(value / z),
    }
}

/// `P^k |e>` for `k = 0..=n`, where `|e>` is `|vb>` or `|1>`.
fn backward_vectors(p: &TransitionMatrix, endpoint: Endpoint, n: usize) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(n + 1);
    let mut x = endpoint.vector(p.size());
    for _ in 0..n {
        let next = p.step_column(&x);
        out.push(x);
        x = next;
    }
    out.push(x);
    out
}

/// Mean local time at `v1`: `sum_{m=1}^n P^m[va, v1] <v1| P^(n-m) |e>`.
pub fn mean_local_time(p: &TransitionMatrix, spec: &EnsembleSpec, v1: usize) -> Result<f64> {
    spec.check(p)?;
    p.check_vertex(v1)?;
    let n = spec.horizon;
    let fwd = p.power_rows(spec.start, n);
    let bwd = backward_vectors(p, spec.endpoint, n);
    Ok((1..=n).map(|m| fwd[m][v1] * bwd[n - m][v1]).sum())
}

/// `<L(v1)>*`, equal to `sum_{m=1}^n P^m[va, v1]`.
pub fn mean_local_time_free(p: &TransitionMatrix, va: usize, v1: usize, n: usize) -> Result<f64> {
    mean_local_time(p, &EnsembleSpec::free(va, n), v1)
}

/// Unnormalized `<L(v1)>` over paths ending at `vb`.
pub fn mean_local_time_fixed(p: &TransitionMatrix, va: usize, vb: usize, v1: usize, n: usize) -> Result<f64> {
    mean_local_time(p, &EnsembleSpec::fixed(va, vb, n), v1)
}

/// `<L(v1) L(v2)>`, summed over ordered pairs of visit times `(m, m')`.
///
/// The sum splits into `m < m'`, `m' < m` and the diagonal `m = m'`, which
/// only contributes when `v1 == v2`.
pub fn correlation(p: &TransitionMatrix, spec: &EnsembleSpec, v1: usize, v2: usize) -> Result<f64> {
    spec.check(p)?;
    p.check_vertex(v1)?;
    p.check_vertex(v2)?;
    let n = spec.horizon;
    let fwd = p.power_rows(spec.start, n);
    let bwd = backward_vectors(p, spec.endpoint, n);
    let from_v1 = p.power_rows(v1, n);
    let from_v2 = p.power_rows(v2, n);

    let ordered = |first: usize, second: usize, from_first: &[DVector<f64>]| -> f64 {
        (1..n)
            .map(|m| {
                let tail: f64 = (m + 1..=n)
                    .map(|m2| from_first[m2 - m][second] * bwd[n - m2][second])
                    .sum();
                fwd[m][first] * tail
            })
            .sum()
    };

    let mut total = ordered(v1, v2, &from_v1) + ordered(v2, v1, &from_v2);
    if v1 == v2 {
        total += (1..=n).map(|m| fwd[m][v1] * bwd[n - m][v1]).sum::<f64>();
    }
    Ok(total)
}

pub fn correlation_free(p: &TransitionMatrix, va: usize, v1: usize, v2: usize, n: usize) -> Result<f64> {
    correlation(p, &EnsembleSpec::free(va, n), v1, v2)
}

pub fn correlation_fixed(
    p: &TransitionMatrix,
    va: usize,
    vb: usize,
    v1: usize,
    v2: usize,
    n: usize,
) -> Result<f64> {
    correlation(p, &EnsembleSpec::fixed(va, vb, n), v1, v2)
}

/// Weight of paths that never enter `v` during steps `1..=n`:
/// `<va| (P with column v zeroed)^n |e>`.
pub fn zero_visit_probability(p: &TransitionMatrix, spec: &EnsembleSpec, v: usize) -> Result<f64> {
    spec.check(p)?;
    p.check_vertex(v)?;
    let mut x = unit(p.size(), spec.start);
    for _ in 0..spec.horizon {
        x = p.step_row(&x);
        x[v] = 0.0;
    }
    Ok(x.dot(&spec.endpoint.vector(p.size())))
}

/// Zero-visit weights for every horizon `0..=n` in one pass.
pub fn zero_visit_sequence(p: &TransitionMatrix, spec: &EnsembleSpec, v: usize) -> Result<Vec<f64>> {
    spec.check(p)?;
    p.check_vertex(v)?;
    let e = spec.endpoint.vector(p.size());
    let mut x = unit(p.size(), spec.start);
    let mut out = Vec::with_capacity(spec.horizon + 1);
    out.push(x.dot(&e));
    for _ in 0..spec.horizon {
        x = p.step_row(&x);
        x[v] = 0.0;
        out.push(x.dot(&e));
    }
    Ok(out)
}

/// Distribution of `L(v)` from the chain on `(vertex, min(count, lmax))`.
pub fn local_time_distribution(
    p: &TransitionMatrix,
    spec: &EnsembleSpec,
    v: usize,
    lmax: usize,
) -> Result<DistributionTable> {
    spec.check(p)?;
    p.check_vertex(v)?;
    let size = p.size();
    // state[c][u]: weight of being at u having visited v c times
    let mut state = vec![DVector::zeros(size); lmax + 1];
    state[0][spec.start] = 1.0;
    for _ in 0..spec.horizon {
        let mut next = vec![DVector::zeros(size); lmax + 1];
        for (c, x) in state.iter().enumerate() {
            if x.iter().all(|&w| w == 0.0) {
                continue;
            }
            let mut y = p.step_row(x);
            let arrived = y[v];
            y[v] = 0.0;
            next[c] += y;
            next[(c + 1).min(lmax)][v] += arrived;
        }
        state = next;
    }
    let e = spec.endpoint.vector(size);
    Ok(DistributionTable {
        vertex: v,
        horizon: spec.horizon,
        endpoint: spec.endpoint,
        mass: state.iter().map(|x| x.dot(&e)).collect(),
        saturated: lmax < spec.horizon,
    })
}
