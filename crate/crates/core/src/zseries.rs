//! Truncated formal power series in `w = 1/z`.
//!
//! A z-transform `F(z) = sum_n f_n z^-n` is a power series in `w` whose
//! coefficient of `w^n` is the time-domain value `f_n`. Each series carries
//! an explicit truncation order: coefficients above it are unknown, and
//! reading one is an error rather than a silent zero. Every operation
//! propagates the order conservatively.

use std::ops::{Add, Mul, Neg, Sub};

use crate::graph::TransitionMatrix;
use crate::{Error, Result};

/// Leading coefficients below this magnitude are dropped when the valuation
/// is re-tightened.
pub const TIGHTNESS_EPS: f64 = 1e-13;

const ORDER_CAP: i64 = i64::MAX / 4;

#[derive(Debug, Clone, PartialEq)]
pub struct ZSeries {
    // Zero series: `coeffs` is empty and `valuation == order + 1`.
    valuation: i64,
    coeffs: Vec<f64>,
    order: i64,
}

impl ZSeries {
    /// Series whose coefficients start at `w^valuation`; the order is the
    /// exponent of the last supplied coefficient.
    pub fn new(valuation: i64, coeffs: Vec<f64>) -> Self {
        let order = valuation + coeffs.len() as i64 - 1;
        Self::with_order(valuation, coeffs, order)
    }

    /// Series with coefficients starting at `w^valuation`, known up to
    /// `w^order`. Missing coefficients below the order are zero; extra ones
    /// are discarded.
    pub fn with_order(valuation: i64, mut coeffs: Vec<f64>, order: i64) -> Self {
        let len = (order - valuation + 1).max(0) as usize;
        coeffs.resize(len, 0.0);
        Self::tightened(valuation, coeffs, order)
    }

    pub fn zero(order: i64) -> Self {
        Self { valuation: order + 1, coeffs: Vec::new(), order }
    }

    pub fn constant(c: f64, order: i64) -> Self {
        Self::monomial(c, 0, order)
    }

    /// `c * w^k`.
    pub fn monomial(c: f64, k: i64, order: i64) -> Self {
        Self::with_order(k, vec![c], order)
    }

    /// `1 / (1 - w) = 1 + w + w^2 + ...`
    pub fn geometric(order: i64) -> Self {
        Self::with_order(0, vec![1.0; (order + 1).max(0) as usize], order)
    }

    /// Lowest exponent with a nonzero coefficient, `None` for the zero series.
    pub fn valuation(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.valuation)
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Stored coefficients, the first one belonging to `w^valuation`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `w^n`.
    pub fn coefficient(&self, n: i64) -> Result<f64> {
        if n > self.order {
            return Err(Error::TruncationExceeded { requested: n, order: self.order });
        }
        Ok(self.raw(n))
    }

    /// Coefficients of `w^from ..= w^to`.
    pub fn coefficients(&self, from: i64, to: i64) -> Result<Vec<f64>> {
        (from..=to).map(|n| self.coefficient(n)).collect()
    }

    /// Sum of the known terms at `w` (Horner).
    pub fn evaluate(&self, w: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let poly = self.coeffs.iter().rev().fold(0.0, |acc, c| acc * w + c);
        poly * w.powi(self.valuation as i32)
    }

    /// Forgets every coefficient above `w^order`.
    pub fn truncate(&self, order: i64) -> Self {
        if order >= self.order {
            return self.clone();
        }
        let len = (order - self.valuation + 1).max(0) as usize;
        let coeffs = self.coeffs.iter().take(len).copied().collect();
        Self::tightened(self.valuation, coeffs, order)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::tightened(self.valuation, self.coeffs.iter().map(|x| x * c).collect(), self.order)
    }

    /// Multiplication by `w^k`; `shift(-1)` multiplies by `z`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            valuation: self.valuation.saturating_add(k),
            coeffs: self.coeffs.clone(),
            order: self.order.saturating_add(k).min(ORDER_CAP),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let lead = self.lead().min(other.lead());
        if lead > order {
            return Self::zero(order);
        }
        let coeffs = (lead..=order).map(|e| self.raw(e) + other.raw(e)).collect();
        Self::tightened(lead, coeffs, order)
    }

    /// Cauchy product.
    pub fn mul(&self, other: &Self) -> Self {
        let lead = self.lead().saturating_add(other.lead());
        let order = self
            .order
            .saturating_add(other.lead())
            .min(other.order.saturating_add(self.lead()))
            .min(ORDER_CAP);
        if self.is_zero() || other.is_zero() || lead > order {
            return Self::zero(order);
        }
        let len = (order - lead + 1) as usize;
        let (a, b) = (&self.coeffs, &other.coeffs);
        let coeffs = (0..len)
            .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
            .collect();
        Self::tightened(lead, coeffs, order)
    }

    /// Long division against the divisor's leading coefficient.
    pub fn div(&self, divisor: &Self) -> Result<Self> {
        if divisor.is_zero() {
            return Err(Error::DivisionByZeroSeries);
        }
        let lb = divisor.valuation;
        let lead = self.lead() - lb;
        let order = self.order.min(divisor.order.saturating_add(self.lead()) - lb) - lb;
        if self.is_zero() || lead > order {
            return Ok(Self::zero(order));
        }
        let len = (order - lead + 1) as usize;
        let (a, b) = (&self.coeffs, &divisor.coeffs);
        let mut q: Vec<f64> = Vec::with_capacity(len);
        for k in 0..len {
            let acc: f64 = (1..=k).map(|j| b[j] * q[k - j]).sum();
            q.push((a[k] - acc) / b[0]);
        }
        Ok(Self::tightened(lead, q, order))
    }

    /// `k`-th power; `k = 0` gives the constant 1 with the same relative
    /// precision as `self`.
    pub fn pow(&self, k: u32) -> Self {
        if k == 0 {
            return Self::constant(1.0, self.order - self.lead());
        }
        let mut result: Option<Self> = None;
        let mut base = self.clone();
        let mut e = k;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.mul(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        result.expect("k > 0")
    }

    /// Square root of a series with even valuation and positive leading
    /// coefficient.
    pub fn sqrt(&self) -> Result<Self> {
        if self.is_zero() {
            return Ok(Self::zero(self.order));
        }
        if self.valuation % 2 != 0 || self.coeffs[0] <= 0.0 {
            return Err(Error::InvalidArgument(
                "square root needs even valuation and positive leading coefficient".into(),
            ));
        }
        let lead = self.valuation / 2;
        let order = self.order - lead;
        let len = (order - lead + 1) as usize;
        let a = &self.coeffs;
        let mut s: Vec<f64> = Vec::with_capacity(len);
        s.push(a[0].sqrt());
        for k in 1..len {
            let acc: f64 = (1..k).map(|j| s[j] * s[k - j]).sum();
            s.push((a[k] - acc) / (2.0 * s[0]));
        }
        Ok(Self::tightened(lead, s, order))
    }

    // Exponent of the first coefficient that may be nonzero.
    fn lead(&self) -> i64 {
        self.valuation
    }

    fn raw(&self, e: i64) -> f64 {
        if e < self.valuation {
            return 0.0;
        }
        self.coeffs.get((e - self.valuation) as usize).copied().unwrap_or(0.0)
    }

    fn tightened(valuation: i64, coeffs: Vec<f64>, order: i64) -> Self {
        match coeffs.iter().position(|c| c.abs() >= TIGHTNESS_EPS) {
            None => Self::zero(order),
            Some(skip) => Self {
                valuation: valuation + skip as i64,
                coeffs: coeffs[skip..].to_vec(),
                order,
            },
        }
    }
}

impl Add for &ZSeries {
    type Output = ZSeries;
    fn add(self, rhs: &ZSeries) -> ZSeries {
        ZSeries::add(self, rhs)
    }
}

impl Sub for &ZSeries {
    type Output = ZSeries;
    fn sub(self, rhs: &ZSeries) -> ZSeries {
        ZSeries::add(self, &rhs.scale(-1.0))
    }
}

impl Mul for &ZSeries {
    type Output = ZSeries;
    fn mul(self, rhs: &ZSeries) -> ZSeries {
        ZSeries::mul(self, rhs)
    }
}

impl Neg for &ZSeries {
    type Output = ZSeries;
    fn neg(self) -> ZSeries {
        self.scale(-1.0)
    }
}

/// Series of the resolvent element `<va| (P - zI)^-1 |vb>`:
/// `-sum_{m>=0} P^m[va, vb] w^(m+1)`, known up to `w^order`.
pub fn resolvent_element(p: &TransitionMatrix, va: usize, vb: usize, order: usize) -> Result<ZSeries> {
    p.check_vertex(va)?;
    p.check_vertex(vb)?;
    if order == 0 {
        return Err(Error::InvalidArgument("resolvent series needs order >= 1".into()));
    }
    let coeffs = p.power_rows(va, order - 1).iter().map(|row| -row[vb]).collect();
    Ok(ZSeries::with_order(1, coeffs, order as i64))
}
