//! Coordinate conventions on flat phase space `R^{2n}`.
//!
//! A point carries the ordered coordinates `(q^1..q^n, p^1..p^n)`.  The
//! complexification is `z^j = (q^j + i p^j) / sqrt(2)`, under which the
//! Euclidean and symplectic pairings combine into one Hermitian pairing:
//! `herm(u, v) = euclid(u, v) + (i/2) sympl(u, v)`.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A point of `R^{2n}` split into position and momentum coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    q: Array1<f64>,
    p: Array1<f64>,
}

/// A point of `C^n` in the coordinates `z = (q + ip) / sqrt(2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoint {
    z: Array1<C64>,
}

/// The three pairings of two phase points.
///
/// `euclid` is half the ordinary dot product (the factor matches the
/// normalisation of `z`), `sympl` is the symplectic area, and `herm` is
/// the Hermitian pairing of the complexified points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pairings {
    pub euclid: f64,
    pub sympl: f64,
    pub herm: C64,
}

impl PhasePoint {
    /// Build a point from position and momentum vectors of equal length.
    pub fn from_qp(q: Array1<f64>, p: Array1<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                context: "PhasePoint::from_qp",
                left: q.len(),
                right: p.len(),
            });
        }
        if q.iter().chain(p.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "phase point coordinates must be finite".into(),
            ));
        }
        Ok(Self { q, p })
    }

    /// Build a point from the flat layout `(q^1..q^n, p^1..p^n)`.
    pub fn from_flat(flat: Array1<f64>) -> Result<Self> {
        if flat.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "flat phase-space vector must have even length, got {}",
                flat.len()
            )));
        }
        let n = flat.len() / 2;
        let q = flat.slice(ndarray::s![..n]).to_owned();
        let p = flat.slice(ndarray::s![n..]).to_owned();
        Self::from_qp(q, p)
    }

    /// Number of degrees of freedom `n`.
    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &Array1<f64> {
        &self.q
    }

    pub fn p(&self) -> &Array1<f64> {
        &self.p
    }

    /// The flat layout `(q^1..q^n, p^1..p^n)`.
    pub fn flat(&self) -> Array1<f64> {
        let mut out = Array1::zeros(2 * self.n());
        for j in 0..self.n() {
            out[j] = self.q[j];
            out[self.n() + j] = self.p[j];
        }
        out
    }
}

impl ComplexPoint {
    pub fn new(z: Array1<C64>) -> Result<Self> {
        if z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "complex point coordinates must be finite".into(),
            ));
        }
        Ok(Self { z })
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &Array1<C64> {
        &self.z
    }
}

/// `z = (q + ip) / sqrt(2)`.
pub fn complexify(u: &PhasePoint) -> ComplexPoint {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let z = Array1::from_iter(
        u.q.iter()
            .zip(u.p.iter())
            .map(|(&q, &p)| C64::new(q * inv_sqrt2, p * inv_sqrt2)),
    );
    ComplexPoint { z }
}

/// Inverse of [`complexify`]: `q = sqrt(2) Re z`, `p = sqrt(2) Im z`.
pub fn decomplexify(w: &ComplexPoint) -> PhasePoint {
    let sqrt2 = std::f64::consts::SQRT_2;
    let q = Array1::from_iter(w.z.iter().map(|v| v.re * sqrt2));
    let p = Array1::from_iter(w.z.iter().map(|v| v.im * sqrt2));
    PhasePoint { q, p }
}

/// Euclidean, symplectic and Hermitian pairings of two points.
pub fn pairings(u: &PhasePoint, v: &PhasePoint) -> Result<Pairings> {
    if u.n() != v.n() {
        return Err(Error::DimensionMismatch {
            context: "pairings",
            left: u.n(),
            right: v.n(),
        });
    }
    let mut euclid = 0.0;
    let mut sympl = 0.0;
    for j in 0..u.n() {
        euclid += 0.5 * (u.q[j] * v.q[j] + u.p[j] * v.p[j]);
        sympl += u.q[j] * v.p[j] - u.p[j] * v.q[j];
    }
    let zu = complexify(u);
    let zv = complexify(v);
    let herm = zu
        .z
        .iter()
        .zip(zv.z.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(Pairings { euclid, sympl, herm })
}
