//! Truncated power series `a₁z + a₂z² + … + a_D z^D` with `a₀ = 0`, their
//! composition and the inversion of near-identity maps.
//!
//! Inversion solves `Z₁(φ(z)) = z` by Newton's method on series,
//! `φ ← φ - (Z₁∘φ - id)/(Z₁'∘φ)`, which doubles the number of correct
//! coefficients per step.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default truncation degree.
pub const DEFAULT_DEGREE: usize = 32;

/// Origin-preserving truncated power series; `coefficients[k]` is `a_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct PowerSeries {
    coefficients: Vec<Complex64>,
}

impl TryFrom<Vec<Complex64>> for PowerSeries {
    type Error = Error;

    fn try_from(c: Vec<Complex64>) -> Result<Self> {
        PowerSeries::new(c)
    }
}

impl From<PowerSeries> for Vec<Complex64> {
    fn from(s: PowerSeries) -> Self {
        s.coefficients
    }
}

impl PowerSeries {
    /// Series with coefficients `a₁, a₂, …`; rejects non-finite entries.
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite("power series coefficient".into()));
        }
        Ok(PowerSeries { coefficients })
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self> {
        Self::new(coefficients.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn identity() -> Self {
        PowerSeries {
            coefficients: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Highest stored degree.
    pub fn degree(&self) -> usize {
        self.coefficients.len()
    }

    /// Coefficient of `z^k`; zero beyond the stored degree and at `k = 0`.
    pub fn coeff(&self, k: usize) -> Complex64 {
        if k == 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coefficients.get(k - 1).copied().unwrap_or_default()
    }

    pub fn truncate(&self, d: usize) -> Self {
        let mut c: Vec<Complex64> = (1..=d).map(|k| self.coeff(k)).collect();
        while c.len() > 1 && c.last() == Some(&Complex64::new(0.0, 0.0)) {
            c.pop();
        }
        PowerSeries { coefficients: c }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| (acc + a) * z)
    }

    /// Largest coefficient distance to `other` through degree `d`.
    pub fn distance(&self, other: &PowerSeries, d: usize) -> f64 {
        (1..=d)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }
}

/// Dense coefficients `c₀..c_d` of a full (not origin-preserving) series.
type Dense = Vec<Complex64>;

fn dense(s: &PowerSeries, d: usize) -> Dense {
    (0..=d).map(|k| s.coeff(k)).collect()
}

fn mul(a: &[Complex64], b: &[Complex64], d: usize) -> Dense {
    let mut out = vec![Complex64::new(0.0, 0.0); d + 1];
    for (i, &x) in a.iter().enumerate().take(d + 1) {
        if x == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(d + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `f ∘ g` for dense `f` (any constant term) and origin-preserving `g`.
fn compose_dense(f: &[Complex64], g: &[Complex64], d: usize) -> Dense {
    // Horner: f(g) = c₀ + g(c₁ + g(c₂ + …)).
    let mut acc = vec![Complex64::new(0.0, 0.0); d + 1];
    for &c in f.iter().take(d + 1).rev() {
        acc = mul(&acc, g, d);
        acc[0] += c;
    }
    acc
}

/// `1/a` to degree `d`; requires `a₀ ≠ 0`.
fn reciprocal(a: &[Complex64], d: usize) -> Dense {
    let mut out = vec![Complex64::new(0.0, 0.0); d + 1];
    out[0] = a[0].inv();
    for k in 1..=d {
        let s: Complex64 = (1..=k.min(a.len() - 1)).map(|j| a[j] * out[k - j]).sum();
        out[k] = -s * out[0];
    }
    out
}

fn derivative(a: &[Complex64]) -> Dense {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

fn to_series(d: &[Complex64]) -> PowerSeries {
    let mut c = d[1..].to_vec();
    while c.len() > 1 && c.last() == Some(&Complex64::new(0.0, 0.0)) {
        c.pop();
    }
    PowerSeries { coefficients: c }
}

/// `f ∘ g` truncated to degree `d`.
pub fn compose(f: &PowerSeries, g: &PowerSeries, d: usize) -> PowerSeries {
    to_series(&compose_dense(&dense(f, d), &dense(g, d), d))
}

/// `φ` with `Z₁(φ(z)) = z + O(z^{d+1})`.
pub fn invert_near_identity(z1: &PowerSeries, d: usize) -> Result<PowerSeries> {
    let a1 = z1.coeff(1);
    if a1 == Complex64::new(0.0, 0.0) {
        return Err(Error::NotInvertible);
    }
    if d == 0 {
        return Ok(PowerSeries::identity().truncate(0));
    }
    let f = dense(z1, d);
    let df = derivative(&f);
    let mut phi = vec![Complex64::new(0.0, 0.0); d + 1];
    phi[1] = a1.inv();
    let mut correct = 1;
    while correct < d {
        correct = (2 * correct).min(d);
        let val = compose_dense(&f, &phi, correct);
        let slope = compose_dense(&df, &phi, correct);
        let mut err = val;
        err[1] -= Complex64::new(1.0, 0.0);
        let step = mul(&err, &reciprocal(&slope, correct), correct);
        for (p, s) in phi.iter_mut().zip(&step) {
            *p -= s;
        }
    }
    Ok(to_series(&phi))
}
