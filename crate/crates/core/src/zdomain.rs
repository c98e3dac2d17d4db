//! z-domain averages built from the free resolvent `R = (P - zI)^-1`.
//!
//! Each formula is written once against [`ResolventAlgebra`] and evaluated
//! by two backends:
//!
//! * [`NumericResolvent`]: real `z > 1`, one LU factorization of `P - zI`;
//! * [`SeriesResolvent`]: truncated series in `w = 1/z`, whose coefficient
//!   of `w^n` is the time-domain average at horizon `n`.
//!
//! With `RP` standing for the bracket `<a|RP|b>`:
//!
//! ```text
//! <L(v1)>_z      =  z RP(va,v1) R(v1,vb)
//! <L(v1)>*_z     =  z/(1-z) RP(va,v1)
//! <L1 L2>_z      = -z^2 RP(va,v1) R(v1,v2) R(v2,vb) - z RP(va,v2) RP(v2,v1) R(v1,vb)
//! <L1 L2>*_z     =  z^2/(z-1) RP(va,v1) R(v1,v2) + z/(z-1) RP(va,v2) RP(v2,v1)
//! <d(l,L(v))>_z  =  RP(va,v) R(v,vb) RP(v,v)^(l-1) / (z^l R(v,v)^(l+1))        l >= 1
//!                = -z R(va,vb) + RP(va,v) R(v,vb) / R(v,v)                      l = 0
//! ```
//!
//! The `l = 0` line is the one-point formula with its two `delta(l,0)` terms
//! combined through `RP = I + zR`. No bracket `RP(v,v)` is ever divided by,
//! so vertices that cannot return to themselves are handled too.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::graph::{Endpoint, TransitionMatrix};
use crate::zseries::ZSeries;
use crate::{Error, Result};

/// Smallest admissible magnitude of the one-point deformation denominator.
pub const DENOMINATOR_EPS: f64 = 1e-13;

/// Number of trapezoid nodes used by [`verify_appendix_integral`].
pub const QUADRATURE_NODES: usize = 4096;

/// Scalar algebra over which the z-domain formulas are assembled.
pub trait ResolventAlgebra {
    type Value: Clone;

    /// `<a| R |e>` with `|e>` either `|vb>` or `|1>`.
    fn r(&self, a: usize, e: Endpoint) -> Self::Value;
    /// `<a| R P |b>`.
    fn rp(&self, a: usize, b: usize) -> Self::Value;
    fn mul(&self, x: &Self::Value, y: &Self::Value) -> Self::Value;
    fn add(&self, x: &Self::Value, y: &Self::Value) -> Self::Value;
    fn scale(&self, x: &Self::Value, c: f64) -> Self::Value;
    fn div(&self, x: &Self::Value, y: &Self::Value) -> Result<Self::Value>;
    fn pow(&self, x: &Self::Value, k: u32) -> Self::Value;
    /// `z^k x`.
    fn z_power(&self, x: &Self::Value, k: i32) -> Self::Value;
    /// `z / (z - 1)`.
    fn free_factor(&self) -> Self::Value;
    fn size(&self) -> usize;
}

/// Resolvent at a fixed real `z > 1`.
#[derive(Debug, Clone)]
pub struct NumericResolvent {
    z: f64,
    r: DMatrix<f64>,
    rp: DMatrix<f64>,
}

impl NumericResolvent {
    pub fn new(p: &TransitionMatrix, z: f64) -> Result<Self> {
        if !(z > 1.0) || !z.is_finite() {
            return Err(Error::SingularSystem { z });
        }
        let n = p.size();
        let shifted = p.matrix() - DMatrix::identity(n, n) * z;
        let lu = shifted.lu();
        let r = lu
            .solve(&DMatrix::identity(n, n))
            .ok_or(Error::SingularSystem { z })?;
        let rp = &r * p.matrix();
        Ok(Self { z, r, rp })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn element(&self, a: usize, b: usize) -> f64 {
        self.r[(a, b)]
    }

    /// `<v| R_U |.>` for the one-point source `U = u |v><v|`:
    /// `R + (1-e^u) RP|v><v|R / (1 - (1-e^u) <v|RP|v>)`.
    pub fn deformed_element(&self, v: usize, u: f64, a: usize, b: usize) -> Result<f64> {
        let g = 1.0 - u.exp();
        let den = 1.0 - g * self.rp[(v, v)];
        if den.abs() <= DENOMINATOR_EPS {
            return Err(Error::DenominatorVanishes(den));
        }
        Ok(self.r[(a, b)] + g * self.rp[(a, v)] * self.r[(v, b)] / den)
    }
}

impl ResolventAlgebra for NumericResolvent {
    type Value = f64;

    fn r(&self, a: usize, e: Endpoint) -> f64 {
        match e {
            Endpoint::Fixed(b) => self.r[(a, b)],
            Endpoint::Free => self.r.row(a).sum(),
        }
    }

    fn rp(&self, a: usize, b: usize) -> f64 {
        self.rp[(a, b)]
    }

    fn mul(&self, x: &f64, y: &f64) -> f64 {
        x * y
    }

    fn add(&self, x: &f64, y: &f64) -> f64 {
        x + y
    }

    fn scale(&self, x: &f64, c: f64) -> f64 {
        x * c
    }

    fn div(&self, x: &f64, y: &f64) -> Result<f64> {
        if *y == 0.0 {
            return Err(Error::SingularSystem { z: self.z });
        }
        Ok(x / y)
    }

    fn pow(&self, x: &f64, k: u32) -> f64 {
        x.powi(k as i32)
    }

    fn z_power(&self, x: &f64, k: i32) -> f64 {
        x * self.z.powi(k)
    }

    fn free_factor(&self) -> f64 {
        self.z / (self.z - 1.0)
    }

    fn size(&self) -> usize {
        self.r.nrows()
    }
}

/// Resolvent brackets as series in `w`, computed from matrix powers:
/// `R = -sum_m P^m w^(m+1)` and `RP = -sum_{k>=1} P^k w^k`.
#[derive(Debug)]
pub struct SeriesResolvent<'a> {
    p: &'a TransitionMatrix,
    // internal order; two above the requested one so that the z factors in
    // every formula still leave the requested coefficients known
    order: usize,
    rows: Vec<OnceLock<Vec<DVector<f64>>>>,
}

impl<'a> SeriesResolvent<'a> {
    /// Brackets good for coefficients up to `w^order`.
    pub fn new(p: &'a TransitionMatrix, order: usize) -> Self {
        Self {
            p,
            order: order + 2,
            rows: (0..p.size()).map(|_| OnceLock::new()).collect(),
        }
    }

    fn rows(&self, a: usize) -> &[DVector<f64>] {
        self.rows[a].get_or_init(|| self.p.power_rows(a, self.order))
    }

    fn order(&self) -> i64 {
        self.order as i64
    }
}

impl ResolventAlgebra for SeriesResolvent<'_> {
    type Value = ZSeries;

    fn r(&self, a: usize, e: Endpoint) -> ZSeries {
        let rows = &self.rows(a)[..self.order];
        let coeffs = match e {
            Endpoint::Fixed(b) => rows.iter().map(|x| -x[b]).collect(),
            Endpoint::Free => rows.iter().map(|x| -x.sum()).collect(),
        };
        ZSeries::with_order(1, coeffs, self.order())
    }

    fn rp(&self, a: usize, b: usize) -> ZSeries {
        let coeffs = self.rows(a)[1..].iter().map(|x| -x[b]).collect();
        ZSeries::with_order(1, coeffs, self.order())
    }

    fn mul(&self, x: &ZSeries, y: &ZSeries) -> ZSeries {
        x * y
    }

    fn add(&self, x: &ZSeries, y: &ZSeries) -> ZSeries {
        x + y
    }

    fn scale(&self, x: &ZSeries, c: f64) -> ZSeries {
        x.scale(c)
    }

    fn div(&self, x: &ZSeries, y: &ZSeries) -> Result<ZSeries> {
        x.div(y)
    }

    fn pow(&self, x: &ZSeries, k: u32) -> ZSeries {
        x.pow(k)
    }

    fn z_power(&self, x: &ZSeries, k: i32) -> ZSeries {
        x.shift(-(k as i64))
    }

    fn free_factor(&self) -> ZSeries {
        // z/(z-1) = 1/(1-w)
        ZSeries::geometric(self.order() + 2)
    }

    fn size(&self) -> usize {
        self.p.size()
    }
}

fn check(alg: &impl ResolventAlgebra, vertices: &[usize], e: Endpoint) -> Result<()> {
    let size = alg.size();
    let endpoint = match e {
        Endpoint::Fixed(vb) => Some(vb),
        Endpoint::Free => None,
    };
    for &v in vertices.iter().chain(endpoint.iter()) {
        if v >= size {
            return Err(Error::VertexOutOfRange { vertex: v, size });
        }
    }
    Ok(())
}

/// Mean local time at `v1`.
pub fn mean_with<A: ResolventAlgebra>(alg: &A, va: usize, e: Endpoint, v1: usize) -> Result<A::Value> {
    check(alg, &[va, v1], e)?;
    let rp = alg.rp(va, v1);
    Ok(match e {
        Endpoint::Fixed(_) => alg.z_power(&alg.mul(&rp, &alg.r(v1, e)), 1),
        // z/(1-z) = -z/(z-1)
        Endpoint::Free => alg.scale(&alg.mul(&alg.free_factor(), &rp), -1.0),
    })
}

/// Correlation `<L(v1) L(v2)>`.
pub fn correlation_with<A: ResolventAlgebra>(
    alg: &A,
    va: usize,
    e: Endpoint,
    v1: usize,
    v2: usize,
) -> Result<A::Value> {
    check(alg, &[va, v1, v2], e)?;
    let first = alg.mul(&alg.rp(va, v1), &alg.r(v1, Endpoint::Fixed(v2)));
    let second = alg.mul(&alg.rp(va, v2), &alg.rp(v2, v1));
    Ok(match e {
        Endpoint::Fixed(_) => {
            let a = alg.z_power(&alg.mul(&first, &alg.r(v2, e)), 2);
            let b = alg.z_power(&alg.mul(&second, &alg.r(v1, e)), 1);
            alg.scale(&alg.add(&a, &b), -1.0)
        }
        Endpoint::Free => {
            let ff = alg.free_factor();
            let a = alg.z_power(&alg.mul(&ff, &first), 1);
            alg.add(&a, &alg.mul(&ff, &second))
        }
    })
}

/// Unnormalized probability that `L(v) = l`.
pub fn distribution_with<A: ResolventAlgebra>(
    alg: &A,
    va: usize,
    e: Endpoint,
    v: usize,
    l: u32,
) -> Result<A::Value> {
    check(alg, &[va, v], e)?;
    let rvv = alg.r(v, Endpoint::Fixed(v));
    let entering = alg.mul(&alg.rp(va, v), &alg.r(v, e));
    if l == 0 {
        let direct = alg.scale(&alg.z_power(&alg.r(va, e), 1), -1.0);
        return Ok(alg.add(&direct, &alg.div(&entering, &rvv)?));
    }
    let num = if l == 1 {
        entering
    } else {
        alg.mul(&entering, &alg.pow(&alg.rp(v, v), l - 1))
    };
    let den = alg.z_power(&alg.pow(&rvv, l + 1), l as i32);
    alg.div(&num, &den)
}

/// Distribution of the local time at the starting vertex, free endpoint:
/// `RP(va,va)^l / ((1-z) z^l R(va,va)^(l+1))`.
pub fn origin_distribution_with<A: ResolventAlgebra>(alg: &A, va: usize, l: u32) -> Result<A::Value> {
    check(alg, &[va], Endpoint::Free)?;
    // 1/(1-z) = -z^-1 * z/(z-1)
    let inv_one_minus_z = alg.scale(&alg.z_power(&alg.free_factor(), -1), -1.0);
    let num = if l == 0 {
        inv_one_minus_z
    } else {
        alg.mul(&alg.pow(&alg.rp(va, va), l), &inv_one_minus_z)
    };
    let den = alg.z_power(&alg.pow(&alg.r(va, Endpoint::Fixed(va)), l + 1), l as i32);
    alg.div(&num, &den)
}

/// Evaluation mode of the z-domain formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Numeric { z: f64 },
    /// Series in `w` known up to `w^order`.
    Series { order: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZValue {
    Numeric(f64),
    Series(ZSeries),
}

impl ZValue {
    pub fn as_numeric(&self) -> Option<f64> {
        match self {
            ZValue::Numeric(x) => Some(*x),
            ZValue::Series(_) => None,
        }
    }

    pub fn as_series(&self) -> Option<&ZSeries> {
        match self {
            ZValue::Series(s) => Some(s),
            ZValue::Numeric(_) => None,
        }
    }
}

fn dispatch(
    p: &TransitionMatrix,
    mode: Mode,
    numeric: impl FnOnce(&NumericResolvent) -> Result<f64>,
    series: impl FnOnce(&SeriesResolvent<'_>) -> Result<ZSeries>,
) -> Result<ZValue> {
    match mode {
        Mode::Numeric { z } => Ok(ZValue::Numeric(numeric(&NumericResolvent::new(p, z)?)?)),
        Mode::Series { order } => {
            let s = series(&SeriesResolvent::new(p, order))?;
            Ok(ZValue::Series(s.truncate(order as i64)))
        }
    }
}

pub fn mean_z(p: &TransitionMatrix, va: usize, e: Endpoint, v1: usize, mode: Mode) -> Result<ZValue> {
    dispatch(p, mode, |a| mean_with(a, va, e, v1), |a| mean_with(a, va, e, v1))
}

pub fn correlation_z(
    p: &TransitionMatrix,
    va: usize,
    e: Endpoint,
    v1: usize,
    v2: usize,
    mode: Mode,
) -> Result<ZValue> {
    dispatch(
        p,
        mode,
        |a| correlation_with(a, va, e, v1, v2),
        |a| correlation_with(a, va, e, v1, v2),
    )
}

pub fn distribution_z(
    p: &TransitionMatrix,
    va: usize,
    e: Endpoint,
    v: usize,
    l: u32,
    mode: Mode,
) -> Result<ZValue> {
    dispatch(
        p,
        mode,
        |a| distribution_with(a, va, e, v, l),
        |a| distribution_with(a, va, e, v, l),
    )
}

/// `<va| R |vb>` at real `z > 1`.
pub fn resolvent_element(p: &TransitionMatrix, z: f64, va: usize, vb: usize) -> Result<f64> {
    p.check_vertex(va)?;
    p.check_vertex(vb)?;
    Ok(NumericResolvent::new(p, z)?.element(va, vb))
}

/// Element of `(P e^U - zI)^-1` for `U = u |v><v|` via the rank-one update of
/// the free resolvent.
pub fn deformed_resolvent_element(
    p: &TransitionMatrix,
    z: f64,
    v: usize,
    u: f64,
    va: usize,
    vb: usize,
) -> Result<f64> {
    for x in [v, va, vb] {
        p.check_vertex(x)?;
    }
    NumericResolvent::new(p, z)?.deformed_element(v, u, va, vb)
}

/// Same element by factorizing `P e^U - zI` directly.
pub fn deformed_resolvent_direct(
    p: &TransitionMatrix,
    z: f64,
    v: usize,
    u: f64,
    va: usize,
    vb: usize,
) -> Result<f64> {
    for x in [v, va, vb] {
        p.check_vertex(x)?;
    }
    let n = p.size();
    let mut m = p.matrix().clone();
    m.column_mut(v).scale_mut(u.exp());
    m -= DMatrix::identity(n, n) * z;
    let mut rhs = DVector::zeros(n);
    rhs[vb] = 1.0;
    let x = m.lu().solve(&rhs).ok_or(Error::SingularSystem { z })?;
    Ok(x[va])
}

/// z-transform of the zero-visit weight, `-z <va| (P_v - zI)^-1 |e>` with
/// `P_v` the matrix `P` whose column `v` is zeroed.
pub fn zero_visit_z(p: &TransitionMatrix, z: f64, va: usize, e: Endpoint, v: usize) -> Result<f64> {
    p.check_vertex(va)?;
    p.check_vertex(v)?;
    e.check(p)?;
    if !(z > 1.0) {
        return Err(Error::SingularSystem { z });
    }
    let n = p.size();
    let mut m = p.matrix().clone();
    m.column_mut(v).fill(0.0);
    m -= DMatrix::identity(n, n) * z;
    let x = m
        .lu()
        .solve(&e.vector(n))
        .ok_or(Error::SingularSystem { z })?;
    Ok(-z * x[va])
}

/// Trapezoidal quadrature of
/// `(1/2pi) int_0^2pi e^(i phi l) / (1 - alpha (1 - e^(-i phi))) dphi`
/// next to its closed form `-alpha^l / (alpha - 1)^(l+1)` (zero for `l < 0`).
/// Requires `alpha < 1/2`.
pub fn verify_appendix_integral(alpha: f64, l: i32) -> Result<(f64, f64)> {
    if !(alpha < 0.5) {
        return Err(Error::InvalidArgument(format!("alpha must be below 1/2, got {alpha}")));
    }
    let nodes = QUADRATURE_NODES;
    let sum: Complex64 = (0..nodes)
        .map(|j| {
            let phi = 2.0 * PI * j as f64 / nodes as f64;
            let num = Complex64::from_polar(1.0, phi * l as f64);
            let den = 1.0 - alpha * (1.0 - Complex64::from_polar(1.0, -phi));
            num / den
        })
        .sum();
    let numeric = sum.re / nodes as f64;
    let closed = if l >= 0 {
        -alpha.powi(l) / (alpha - 1.0).powi(l + 1)
    } else {
        0.0
    };
    Ok((numeric, closed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> TransitionMatrix {
        TransitionMatrix::from_adjacency(&DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 }))
            .unwrap()
    }

    #[test]
    fn self_loop_resolvent() {
        let p = TransitionMatrix::from_rows(&[vec![1.0]]).unwrap();
        assert!((resolvent_element(&p, 2.0, 0, 0).unwrap() + 1.0).abs() < 1e-15);
        for u in [-1.5, -0.2, 0.3] {
            let d = deformed_resolvent_element(&p, 2.0, 0, u, 0, 0).unwrap();
            assert!((d - 1.0 / (u.exp() - 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn z_at_most_one_is_rejected() {
        let p = complete(3);
        assert!(matches!(resolvent_element(&p, 1.0, 0, 0), Err(Error::SingularSystem { .. })));
        assert!(matches!(resolvent_element(&p, 0.5, 0, 0), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn identity_deformation() {
        let p = complete(4);
        for (a, b) in [(0, 0), (1, 3), (2, 1)] {
            let d = deformed_resolvent_element(&p, 1.7, 2, 0.0, a, b).unwrap();
            assert_eq!(d, resolvent_element(&p, 1.7, a, b).unwrap());
        }
    }

    #[test]
    fn deformation_pole_reported() {
        // single vertex: RP = 1/(1-z); den = 1 - (1-e^u)/(1-z) = 0 at e^u = z
        let p = TransitionMatrix::from_rows(&[vec![1.0]]).unwrap();
        let z: f64 = 1.5;
        assert!(matches!(
            deformed_resolvent_element(&p, z, 0, z.ln(), 0, 0),
            Err(Error::DenominatorVanishes(_))
        ));
    }

    #[test]
    fn zero_coefficient_of_mean_and_correlation() {
        let p = complete(3);
        let m = mean_z(&p, 0, Endpoint::Free, 1, Mode::Series { order: 6 }).unwrap();
        assert_eq!(m.as_series().unwrap().coefficient(0).unwrap(), 0.0);
        let c = correlation_z(&p, 0, Endpoint::Fixed(2), 1, 1, Mode::Series { order: 6 }).unwrap();
        assert_eq!(c.as_series().unwrap().coefficient(0).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_second_moment() {
        let p = TransitionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let c = correlation_z(&p, 0, Endpoint::Free, 0, 0, Mode::Series { order: 4 }).unwrap();
        assert!((c.as_series().unwrap().coefficient(4).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn appendix_integral_examples() {
        let (q, c) = verify_appendix_integral(0.0, 0).unwrap();
        assert!((q - 1.0).abs() < 1e-14 && (c - 1.0).abs() < 1e-15);
        let (q, c) = verify_appendix_integral(0.3, -1).unwrap();
        assert!(q.abs() < 1e-14 && c == 0.0);
        let (q, c) = verify_appendix_integral(0.3, 2).unwrap();
        assert!((c - 0.09 / 0.343).abs() < 1e-15);
        assert!((q - c).abs() < 1e-12);
        assert!(verify_appendix_integral(0.5, 1).is_err());
    }
}
