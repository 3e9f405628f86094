//! Dense polynomials with complex coefficients.

use num_complex::Complex64;
use std::ops::{Neg, Sub};

/// Polynomial stored as ascending coefficients. The zero polynomial is the
/// empty list; otherwise the last coefficient is nonzero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// `c * z^n`
    pub fn monomial(c: Complex64, n: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = c;
        Poly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^i`, zero past the degree.
    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Evaluates `P(z) / |z|^n` where `n` is the degree, without forming
    /// `|z|^n`. Returns the normalized value and `n * ln|z|`. Used when
    /// `P(z)` itself would overflow.
    pub fn eval_normalized(&self, z: Complex64) -> (Complex64, f64) {
        let Some(n) = self.degree() else {
            return (Complex64::new(0.0, 0.0), 0.0);
        };
        let r = z.norm();
        if r == 0.0 {
            return (self.coeff(0), 0.0);
        }
        let u = z / r;
        let inv = 1.0 / r;
        // Horner in u where each step down in degree picks up a factor 1/r:
        // sum_i c_i u^i r^(i-n)
        let mut acc = Complex64::new(0.0, 0.0);
        let mut scale = 1.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * u + c * scale;
            scale *= inv;
        }
        (acc, n as f64 * r.ln())
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// `sum |c_i| r^i`, an upper bound for `|P(z)|` on `|z| <= r`.
    pub fn abs_bound(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Cauchy bound `1 + max_{i<n} |c_i / c_n|`: every root lies in the
    /// closed disk of this radius. Zero for constants.
    pub fn cauchy_root_bound(&self) -> f64 {
        match self.degree() {
            None | Some(0) => 0.0,
            Some(n) => {
                let lead = self.coeffs[n].norm();
                1.0 + self.coeffs[..n]
                    .iter()
                    .map(|c| c.norm() / lead)
                    .fold(0.0, f64::max)
            }
        }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }
}
