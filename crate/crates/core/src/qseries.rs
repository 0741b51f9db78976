//! Exact truncated power series on the quarter-integer exponent lattice.
//!
//! Series are polynomials in `t^{1/4}` with big-rational coefficients and
//! an explicit truncation order.  The quarter lattice exists so that
//! `theta2 = 2 t^{1/4} (1 + t^2 + t^6 + ...)` is representable exactly;
//! everything else lives on integer exponents.  All arithmetic is exact:
//! no floats touch the coefficients, and mixed-order operations truncate
//! to the smaller order rather than extrapolate.
//!
//! The headline identity checked here relates the generating function of
//! partitions into distinct parts,
//!
//! ```text
//! P(t) = prod_{j>=1} (1 + t^{2j}),
//! ```
//!
//! to the three theta constants:
//!
//! ```text
//! P(t)^24 = (1 / 256 t^2) * (theta2/theta3)^8 * (theta3/theta4)^4.
//! ```
//!
//! Coefficient comparison is exact through the requested order; an
//! independent floating-point evaluation of both sides backs the exact
//! route at sample points inside the unit disc.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exponents are stored as integer multiples of `1/4`.
pub type Quarter = i64;

/// A truncated series `sum c_e t^{e/4}` with exact coefficients.
///
/// `order4` is the largest retained exponent in quarter units: terms with
/// exponent beyond it are unknown, not zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    order4: Quarter,
    coeffs: BTreeMap<Quarter, BigRational>,
}

/// Which theta constant to expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaKind {
    Two,
    Three,
    Four,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl QSeries {
    /// The zero series truncated at `order4` quarter units.
    pub fn zero(order4: Quarter) -> Self {
        Self {
            order4,
            coeffs: BTreeMap::new(),
        }
    }

    /// The constant series `1`.
    pub fn one(order4: Quarter) -> Self {
        let mut s = Self::zero(order4);
        s.set(0, BigRational::one());
        s
    }

    /// A single term `c t^{exp4/4}`.
    pub fn monomial(coeff: BigRational, exp4: Quarter, order4: Quarter) -> Self {
        let mut s = Self::zero(order4);
        s.set(exp4, coeff);
        s
    }

    fn set(&mut self, exp4: Quarter, coeff: BigRational) {
        if exp4 > self.order4 || coeff.is_zero() {
            self.coeffs.remove(&exp4);
        } else {
            self.coeffs.insert(exp4, coeff);
        }
    }

    /// Truncation order in quarter units.
    pub fn order4(&self) -> Quarter {
        self.order4
    }

    /// Coefficient of `t^{exp4/4}` (zero if absent).
    pub fn coeff(&self, exp4: Quarter) -> BigRational {
        self.coeffs.get(&exp4).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Iterate `(exponent in quarter units, coefficient)` in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (Quarter, &BigRational)> {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    /// Smallest exponent with a nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<Quarter> {
        self.coeffs.keys().next().copied()
    }

    /// Drop terms beyond `order4` and lower the stated order.
    pub fn truncate(&self, order4: Quarter) -> Self {
        let order4 = order4.min(self.order4);
        Self {
            order4,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&e, _)| e <= order4)
                .map(|(&e, c)| (e, c.clone()))
                .collect(),
        }
    }

    /// Shift every exponent by `delta4` quarter units (multiplication or
    /// division by a pure power of `t`).  The order shifts along.
    pub fn shift(&self, delta4: Quarter) -> Self {
        Self {
            order4: self.order4 + delta4,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&e, c)| (e + delta4, c.clone()))
                .collect(),
        }
    }

    /// Multiply every coefficient by an exact rational.
    pub fn scale(&self, factor: &BigRational) -> Self {
        if factor.is_zero() {
            return Self::zero(self.order4);
        }
        Self {
            order4: self.order4,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&e, c)| (e, c * factor))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order4 = self.order4.min(other.order4);
        let mut out = Self::zero(order4);
        for (&e, c) in self.coeffs.iter().chain(other.coeffs.iter()) {
            if e <= order4 {
                let cur = out.coeff(e);
                out.set(e, cur + c);
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order4 = self.order4.min(other.order4);
        let mut acc: BTreeMap<Quarter, BigRational> = BTreeMap::new();
        for (&ea, ca) in &self.coeffs {
            for (&eb, cb) in &other.coeffs {
                let e = ea + eb;
                if e > order4 {
                    break; // eb ascending: later terms only grow
                }
                let entry = acc.entry(e).or_insert_with(BigRational::zero);
                *entry += ca * cb;
            }
        }
        let mut out = Self::zero(order4);
        for (e, c) in acc {
            out.set(e, c);
        }
        out
    }

    /// Exact division.  The denominator must have a nonzero constant term
    /// (valuation zero); factor pure `t` powers off with [`shift`] first.
    pub fn div(&self, den: &Self) -> Result<Self> {
        match den.valuation() {
            Some(0) => {}
            _ => {
                return Err(Error::Structural(
                    "series division needs a denominator with nonzero constant term".into(),
                ))
            }
        }
        let order4 = self.order4.min(den.order4);
        let b0 = den.coeff(0);
        let mut q = Self::zero(order4);
        // Long division: q_e = (a_e - sum_{0 < f <= e} b_f q_{e-f}) / b_0.
        for e in 0..=order4 {
            let mut acc = self.coeff(e);
            if e >= 1 {
                for (&f, bf) in den.coeffs.range(1..=e) {
                    let qe = q.coeff(e - f);
                    if !qe.is_zero() {
                        acc -= bf * &qe;
                    }
                }
            }
            if !acc.is_zero() {
                q.set(e, acc / &b0);
            }
        }
        Ok(q)
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::one(self.order4);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Largest absolute coefficient (exact).
    pub fn max_abs_coeff(&self) -> BigRational {
        self.coeffs
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// Evaluate the truncated series at a real point `t > 0`.
    pub fn eval_f64(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "series evaluation needs t > 0, got {t}"
            )));
        }
        let quarter_root = t.powf(0.25);
        let mut total = 0.0;
        for (&e, c) in &self.coeffs {
            let cf = c
                .to_f64()
                .ok_or_else(|| Error::Structural("coefficient exceeds f64 range".into()))?;
            total += cf * quarter_root.powi(e as i32);
        }
        Ok(total)
    }
}

/// `prod_{j>=1} (1 + t^{2j})` truncated at `t^order`: the generating
/// function whose `t^{2k}` coefficient counts partitions of `k` into
/// distinct parts.
pub fn poincare_series(order: u32) -> QSeries {
    let order4 = 4 * order as Quarter;
    let mut acc = QSeries::one(order4);
    let mut j = 1 as Quarter;
    while 8 * j <= order4 {
        let mut factor = QSeries::one(order4);
        factor.set(8 * j, BigRational::one());
        acc = acc.mul(&factor);
        j += 1;
    }
    acc
}

/// Count partitions of `k` into distinct positive parts by direct
/// enumeration.  Deliberately naive: this is the oracle the series
/// expansion is checked against, so it shares no code with it.
pub fn distinct_partition_count(k: u32) -> u64 {
    fn count(remaining: u32, min_part: u32) -> u64 {
        if remaining == 0 {
            return 1;
        }
        let mut total = 0;
        let mut part = min_part;
        while part <= remaining {
            total += count(remaining - part, part + 1);
            part += 1;
        }
        total
    }
    count(k, 1)
}

/// Expansion of a theta constant in the nome `t`, truncated at `t^order`.
///
/// ```text
/// theta2 = 2 t^{1/4} sum_{m>=0} t^{m(m+1)}
/// theta3 = 1 + 2 sum_{m>=1} t^{m^2}
/// theta4 = 1 + 2 sum_{m>=1} (-1)^m t^{m^2}
/// ```
pub fn theta_series(which: ThetaKind, order: u32) -> QSeries {
    let order4 = 4 * order as Quarter;
    let mut s = QSeries::zero(order4);
    match which {
        ThetaKind::Two => {
            // exponent (m + 1/2)^2 = m(m+1) + 1/4, i.e. 4m(m+1) + 1 quarters
            let mut m = 0 as Quarter;
            loop {
                let e = 4 * m * (m + 1) + 1;
                if e > order4 {
                    break;
                }
                s.set(e, rat(2));
                m += 1;
            }
        }
        ThetaKind::Three | ThetaKind::Four => {
            s.set(0, BigRational::one());
            let mut m = 1 as Quarter;
            loop {
                let e = 4 * m * m;
                if e > order4 {
                    break;
                }
                let sign = match which {
                    ThetaKind::Four if m % 2 == 1 => -2,
                    _ => 2,
                };
                s.set(e, rat(sign));
                m += 1;
            }
        }
    }
    s
}

/// Left-hand side `P(t)^24` as an exact series through `t^order`.
pub fn identity_lhs(order: u32) -> QSeries {
    poincare_series(order).pow(24)
}

/// Right-hand side `(1/256 t^2) (theta2/theta3)^8 (theta3/theta4)^4` as an
/// exact series through `t^order`.
///
/// `theta2^8` has valuation exactly `t^2`, so the `1/256 t^2` prefactor is
/// applied as an exponent shift before the remaining divisions, both of
/// which then see unit constant terms.
pub fn identity_rhs(order: u32) -> QSeries {
    // Two extra orders cover the validity lost to the t^{-2} shift.
    let work = order + 2;
    let t2 = theta_series(ThetaKind::Two, work);
    let t3 = theta_series(ThetaKind::Three, work);
    let t4 = theta_series(ThetaKind::Four, work);
    let numerator = t2.pow(8).shift(-8).scale(&BigRational::new(
        BigInt::from(1),
        BigInt::from(256),
    ));
    let den = t3.pow(4).mul(&t4.pow(4));
    numerator
        .div(&den)
        .expect("theta3^4 theta4^4 has unit constant term")
        .truncate(4 * order as Quarter)
}

/// Exact coefficient comparison of the two sides through `t^order`.
/// Returns the largest absolute coefficient difference; the identity holds
/// iff this is exactly zero.
pub fn verify_theta_identity(order: u32) -> BigRational {
    let lhs = identity_lhs(order);
    let rhs = identity_rhs(order);
    lhs.sub(&rhs).max_abs_coeff()
}

/// Independent floating-point check of the identity at a point
/// `0 < t < 1`: both sides are evaluated by direct convergent summation
/// (no truncated series involved) and the relative difference returned.
pub fn theta_identity_float_check(t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "float check needs 0 < t < 1, got {t}"
        )));
    }
    let tiny = 1e-18;

    let mut lhs = 1.0_f64;
    let mut j = 1;
    loop {
        let term = t.powi(2 * j);
        if term < tiny {
            break;
        }
        lhs *= 1.0 + term;
        j += 1;
    }
    let lhs = lhs.powi(24);

    let mut theta2 = 0.0_f64;
    let mut m = 0;
    loop {
        let term = t.powf((m as f64 + 0.5) * (m as f64 + 0.5));
        if term < tiny {
            break;
        }
        theta2 += 2.0 * term;
        m += 1;
    }
    let mut theta3 = 1.0_f64;
    let mut theta4 = 1.0_f64;
    let mut m = 1;
    loop {
        let term = t.powi(m * m);
        if term < tiny {
            break;
        }
        theta3 += 2.0 * term;
        theta4 += if m % 2 == 1 { -2.0 * term } else { 2.0 * term };
        m += 1;
    }

    let rhs = theta2.powi(8) / (256.0 * t * t * theta3.powi(4) * theta4.powi(4));
    Ok((lhs - rhs).abs() / rhs.abs())
}
