//! Analytic results for the complete graph, the star graph and the discrete
//! line, plus constructors for their transition matrices.

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;

use crate::graph::TransitionMatrix;
use crate::zseries::ZSeries;
use crate::{Error, Result};

/// Unbiased walk on the complete graph `K_n` (no self-loops).
pub fn complete_transition(n: usize) -> Result<TransitionMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument("complete graph needs at least 2 vertices".into()));
    }
    TransitionMatrix::from_adjacency(&DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 }))
}

/// `R = -((N-1) I + J/(z-1)) / (1 + z(N-1))`.
pub fn complete_resolvent(n: usize, z: f64, va: usize, vb: usize) -> Result<f64> {
    check_complete(n, z)?;
    if va >= n || vb >= n {
        return Err(Error::VertexOutOfRange { vertex: va.max(vb), size: n });
    }
    let nm1 = (n - 1) as f64;
    let diag = if va == vb { nm1 } else { 0.0 };
    Ok(-(diag + 1.0 / (z - 1.0)) / (1.0 + z * nm1))
}

/// Mean local time on the complete graph `K_N` after `n` steps, free
/// endpoint:
///
/// `(1/N) (n + 1/N - (-1)^n / (N (N-1)^n))` at any vertex other than the
/// start; at the start the same expression evaluated at `n - 1` (zero for
/// `n = 0`).
pub fn complete_mean_local_time(n_vertices: usize, n: usize, at_start: bool) -> Result<f64> {
    if n_vertices < 2 {
        return Err(Error::InvalidArgument("complete graph needs at least 2 vertices".into()));
    }
    let steps = if at_start {
        match n.checked_sub(1) {
            Some(m) => m,
            None => return Ok(0.0),
        }
    } else {
        n
    };
    let big_n = n_vertices as f64;
    let decay = (-1.0 / (big_n - 1.0)).powi(steps as i32);
    Ok((steps as f64 + (1.0 - decay) / big_n) / big_n)
}

/// Star graph with `n` peripheral vertices `1..=n` around the center `0`.
pub fn star_transition(n: usize) -> Result<TransitionMatrix> {
    if n < 1 {
        return Err(Error::InvalidArgument("star graph needs at least 1 peripheral vertex".into()));
    }
    TransitionMatrix::from_adjacency(&DMatrix::from_fn(n + 1, n + 1, |i, j| {
        if (i == 0) != (j == 0) {
            1.0
        } else {
            0.0
        }
    }))
}

/// Vertex classes of the star graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarVertex {
    Center,
    Peripheral,
}

/// Ordered pair of star-graph vertices up to symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarPair {
    CenterCenter,
    CenterPeripheral,
    PeripheralCenter,
    SamePeripheral,
    DistinctPeripherals,
}

impl StarPair {
    pub fn of(a: usize, b: usize) -> Self {
        match (a, b) {
            (0, 0) => StarPair::CenterCenter,
            (0, _) => StarPair::CenterPeripheral,
            (_, 0) => StarPair::PeripheralCenter,
            (a, b) if a == b => StarPair::SamePeripheral,
            _ => StarPair::DistinctPeripherals,
        }
    }
}

/// Element of `R = -I/z + P/(1-z^2) + P^2/(z(1-z^2))`, which follows from
/// `P^3 = P`.
pub fn star_resolvent_element(n: usize, z: f64, pair: StarPair) -> Result<f64> {
    if n < 1 || !(z > 1.0) {
        return Err(Error::InvalidArgument(format!("star resolvent needs n >= 1 and z > 1 (n = {n}, z = {z})")));
    }
    let inv_n = 1.0 / n as f64;
    let (id, p1, p2) = match pair {
        StarPair::CenterCenter => (1.0, 0.0, 1.0),
        StarPair::CenterPeripheral => (0.0, inv_n, 0.0),
        StarPair::PeripheralCenter => (0.0, 1.0, 0.0),
        StarPair::SamePeripheral => (1.0, 0.0, inv_n),
        StarPair::DistinctPeripherals => (0.0, 0.0, inv_n),
    };
    let d = 1.0 - z * z;
    Ok(-id / z + p1 / d + p2 / (z * d))
}

/// Full star-graph resolvent, indexed like [`star_transition`].
pub fn star_resolvent(n: usize, z: f64) -> Result<DMatrix<f64>> {
    let mut r = DMatrix::zeros(n + 1, n + 1);
    for a in 0..=n {
        for b in 0..=n {
            r[(a, b)] = star_resolvent_element(n, z, StarPair::of(a, b))?;
        }
    }
    Ok(r)
}

/// `lim <L(v1)>*/n` on the star graph: 1/2 at the center, `1/(2n)` elsewhere.
pub fn star_limiting_fraction(n: usize, vertex: StarVertex) -> f64 {
    match vertex {
        StarVertex::Center => 0.5,
        StarVertex::Peripheral => 0.5 / n as f64,
    }
}

/// Window `[-radius, radius]` of the discrete line.
///
/// Interior vertices step left or right with probability 1/2; the two end
/// vertices reflect. A walk of `n` steps from `va` never touches an end when
/// `radius > n + |va|`, and reaches one at most at its final step when
/// `radius == n + |va|`, so time-domain quantities are exact in both cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineWindow {
    radius: usize,
}

impl LineWindow {
    pub fn new(radius: usize) -> Self {
        Self { radius }
    }

    /// Smallest window that is exact for `n` steps from `va`.
    pub fn covering(n: usize, va: i64) -> Self {
        Self { radius: n + va.unsigned_abs() as usize }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn size(&self) -> usize {
        2 * self.radius + 1
    }

    /// Matrix index of line coordinate `x`.
    pub fn index(&self, x: i64) -> Result<usize> {
        let i = x + self.radius as i64;
        if i < 0 || i >= self.size() as i64 {
            return Err(Error::VertexOutOfRange { vertex: i.max(0) as usize, size: self.size() });
        }
        Ok(i as usize)
    }

    pub fn coordinate(&self, index: usize) -> i64 {
        index as i64 - self.radius as i64
    }

    /// Errors unless `n` steps from `va` stay clear of the reflecting ends.
    pub fn check_exact(&self, n: usize, va: i64) -> Result<()> {
        if self.radius < n + va.unsigned_abs() as usize {
            return Err(Error::InvalidArgument(format!(
                "window radius {} too small for {n} steps from {va}",
                self.radius
            )));
        }
        Ok(())
    }

    pub fn transition(&self) -> TransitionMatrix {
        let size = self.size();
        let mut p = DMatrix::zeros(size, size);
        if size == 1 {
            p[(0, 0)] = 1.0;
        } else {
            for i in 0..size {
                match i {
                    0 => p[(0, 1)] = 1.0,
                    _ if i == size - 1 => p[(i, i - 1)] = 1.0,
                    _ => {
                        p[(i, i - 1)] = 0.5;
                        p[(i, i + 1)] = 0.5;
                    }
                }
            }
        }
        TransitionMatrix::validate_stochastic(&p).expect("line window rows are stochastic")
    }
}

/// `<va| R |v> = -(z - sqrt(z^2-1))^|va-v| / sqrt(z^2-1)` on the infinite line.
pub fn line_resolvent(z: f64, delta: i64) -> Result<f64> {
    if !(z > 1.0) {
        return Err(Error::InvalidArgument(format!("line resolvent needs z > 1, got {z}")));
    }
    let s = (z * z - 1.0).sqrt();
    Ok(-(z - s).powi(delta.unsigned_abs() as i32) / s)
}

/// `C(2m, m) / 4^m`; exact integer arithmetic up to `m = 30`, log-gamma above.
pub fn central_binomial_ratio(m: u64) -> f64 {
    if m <= 30 {
        let mut c: u128 = 1;
        for k in 0..m as u128 {
            c = c * (2 * m as u128 - k) / (k + 1);
        }
        c as f64 / 4f64.powi(m as i32)
    } else {
        let m = m as f64;
        (ln_gamma(2.0 * m + 1.0) - 2.0 * ln_gamma(m + 1.0) - m * 4f64.ln()).exp()
    }
}

/// Probability that a walk on the line does not revisit its start during
/// steps `1..=n`: `C(2m, m) / 4^m` with `m = floor(n/2)`.
pub fn line_zero_visit(n: usize) -> f64 {
    central_binomial_ratio((n / 2) as u64)
}

/// `<d(l, L(va))>*_z = sqrt(z+1)/sqrt(z-1) (1 - sqrt(z^2-1)/z)^l`.
pub fn line_distribution_z(l: u32, z: f64) -> Result<f64> {
    if !(z > 1.0) {
        return Err(Error::InvalidArgument(format!("line distribution needs z > 1, got {z}")));
    }
    let base = 1.0 - (z * z - 1.0).sqrt() / z;
    Ok(((z + 1.0) / (z - 1.0)).sqrt() * base.powi(l as i32))
}

/// [`line_distribution_z`] as a series in `w = 1/z`:
/// `sqrt((1+w)/(1-w)) (1 - sqrt(1-w^2))^l`.
pub fn line_distribution_series(l: u32, order: usize) -> Result<ZSeries> {
    let o = order as i64;
    let root = ZSeries::with_order(0, vec![1.0, 0.0, -1.0], o).sqrt()?;
    let prefactor = ZSeries::with_order(0, vec![1.0, 1.0], o).div(&root)?;
    if l == 0 {
        return Ok(prefactor);
    }
    let gap = &ZSeries::constant(1.0, o) - &root;
    Ok(&prefactor * &gap.pow(l))
}

fn check_complete(n: usize, z: f64) -> Result<()> {
    if n < 2 || !(z > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "complete resolvent needs n >= 2 and z > 1 (n = {n}, z = {z})"
        )));
    }
    Ok(())
}
