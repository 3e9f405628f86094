//! Exponential polynomials `f(z) = sum_j Q_j(z) exp(b_j z^d + P_j(z))`.
//!
//! Values of `f` reach `exp(|z|^d)`, so besides plain double evaluation
//! every quantity is available in log form: the summand with the largest
//! exponent is factored out and the remaining summands enter only through
//! exponent differences, whose real parts are non-positive.

use crate::error::{Error, Result};
use crate::logc::LogComplex;
use crate::poly::Poly;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest exponent real part accepted by [`ExpPoly::eval_direct`].
pub const DIRECT_EXP_LIMIT: f64 = 700.0;

/// Relative width under which two exponent real parts count as a tie in
/// [`ExpPoly::dominant_index`].
pub const TIE_REL_TOL: f64 = 1e-12;

/// Correction factors `1 + sum` smaller than this in modulus are reported
/// as [`Error::ZeroValue`].
pub const ZERO_TOL: f64 = 1e-15;

/// One summand `Q(z) exp(b z^d + P(z))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPolyTerm {
    pub q: Poly,
    pub b: Complex64,
    pub p: Poly,
}

impl ExpPolyTerm {
    pub fn new(q: Poly, b: Complex64, p: Poly) -> Self {
        ExpPolyTerm { q, b, p }
    }
}

#[derive(Debug, Clone)]
pub struct ExpPoly {
    d: u32,
    terms: Vec<ExpPolyTerm>,
    // b_j z^d + P_j(z)
    exponents: Vec<Poly>,
    // prefactors of exp(w_j) in f' and f''
    first: Vec<Poly>,
    second: Vec<Poly>,
}

impl PartialEq for ExpPoly {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.terms == other.terms
    }
}

impl ExpPoly {
    /// Validates `d >= 1`, at least one term, `Q_j != 0`, `b_j != 0`,
    /// `deg P_j < d`, and pairwise distinct `b_j`.
    pub fn new(d: u32, terms: Vec<ExpPolyTerm>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDefinition("d must be a positive integer".into()));
        }
        if terms.is_empty() {
            return Err(Error::InvalidDefinition("at least one term is required".into()));
        }
        for (j, t) in terms.iter().enumerate() {
            if t.q.is_zero() {
                return Err(Error::InvalidDefinition(format!("term {j}: Q is identically zero")));
            }
            if !(t.b.re.is_finite() && t.b.im.is_finite()) || t.b == Complex64::new(0.0, 0.0) {
                return Err(Error::InvalidDefinition(format!("term {j}: b must be finite and nonzero")));
            }
            if let Some(deg) = t.p.degree() {
                if deg >= d as usize {
                    return Err(Error::InvalidDefinition(format!(
                        "term {j}: deg(P) = {deg} must be below d = {d}"
                    )));
                }
            }
            let finite = |p: &Poly| p.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite());
            if !finite(&t.q) || !finite(&t.p) {
                return Err(Error::InvalidDefinition(format!("term {j}: non-finite coefficient")));
            }
            if terms[..j].iter().any(|s| s.b == t.b) {
                return Err(Error::InvalidDefinition(format!("term {j}: duplicate b")));
            }
        }
        let exponents: Vec<Poly> = terms
            .iter()
            .map(|t| Poly::monomial(t.b, d as usize).add(&t.p))
            .collect();
        // (Q e^W)' = (Q' + Q W') e^W
        let first: Vec<Poly> = terms
            .iter()
            .zip(&exponents)
            .map(|(t, w)| t.q.derivative().add(&t.q.mul(&w.derivative())))
            .collect();
        let second: Vec<Poly> = first
            .iter()
            .zip(&exponents)
            .map(|(r, w)| r.derivative().add(&r.mul(&w.derivative())))
            .collect();
        Ok(ExpPoly { d, terms, exponents, first, second })
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn terms(&self) -> &[ExpPolyTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `nu = d - 5/2`.
    pub fn nu(&self) -> f64 {
        self.d as f64 - 2.5
    }

    pub fn max_abs_b(&self) -> f64 {
        self.terms.iter().map(|t| t.b.norm()).fold(0.0, f64::max)
    }

    pub fn min_abs_b(&self) -> f64 {
        self.terms.iter().map(|t| t.b.norm()).fold(f64::INFINITY, f64::min)
    }

    /// The exponent polynomial `b_j z^d + P_j(z)`.
    pub fn exponent(&self, j: usize) -> &Poly {
        &self.exponents[j]
    }

    /// Prefactor of `exp(w_j)` in the `order`-th derivative (0, 1 or 2).
    pub fn prefactor(&self, j: usize, order: u8) -> &Poly {
        match order {
            0 => &self.terms[j].q,
            1 => &self.first[j],
            _ => &self.second[j],
        }
    }

    /// Exact summation in double arithmetic.
    pub fn eval_direct(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, w) in self.terms.iter().zip(&self.exponents) {
            let w = w.eval(z);
            if !(w.re <= DIRECT_EXP_LIMIT) {
                return Err(Error::Overflow(w.re));
            }
            acc += t.q.eval(z) * w.exp();
        }
        Ok(acc)
    }

    /// Direct evaluation of `f'` (`order = 1`) or `f''` (`order = 2`).
    pub fn eval_deriv_direct(&self, z: Complex64, order: u8) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.terms.len() {
            let w = self.exponents[j].eval(z);
            if !(w.re <= DIRECT_EXP_LIMIT) {
                return Err(Error::Overflow(w.re));
            }
            acc += self.prefactor(j, order).eval(z) * w.exp();
        }
        Ok(acc)
    }

    /// `f(z)` in log form.
    pub fn eval_log(&self, z: Complex64) -> Result<LogComplex> {
        self.log_sum(z, 0)
    }

    /// `f'(z)` or `f''(z)` in log form, from the exact differentiated
    /// prefactors.
    pub fn eval_deriv_log(&self, z: Complex64, order: u8) -> Result<LogComplex> {
        if !(order == 1 || order == 2) {
            return Err(Error::InvalidParam(format!("derivative order {order} (expected 1 or 2)")));
        }
        self.log_sum(z, order)
    }

    // Sum of prefactor_j(z) exp(w_j(z)). The factored-out summand maximizes
    // Re(w_j) + ln|prefactor_j(z)| so every ratio has modulus <= 1.
    fn log_sum(&self, z: Complex64, order: u8) -> Result<LogComplex> {
        // w_j + ln prefactor_j for the summands with nonzero prefactor
        let mut s: Vec<Complex64> = Vec::with_capacity(self.terms.len());
        for j in 0..self.terms.len() {
            let w = self.exponents[j].eval(z);
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(Error::Overflow(w.re));
            }
            let q = self.prefactor(j, order).eval(z);
            if q.re == 0.0 && q.im == 0.0 {
                continue;
            }
            s.push(Complex64::new(w.re + q.norm().ln(), w.im + q.arg()));
        }
        let Some(m) = (0..s.len()).reduce(|a, b| if s[b].re > s[a].re { b } else { a }) else {
            return Err(Error::ZeroValue);
        };
        let sm = s[m];
        let mut corr = Complex64::new(1.0, 0.0);
        for (j, v) in s.iter().enumerate() {
            if j != m {
                corr += (v - sm).exp();
            }
        }
        let cn = corr.norm();
        if cn < ZERO_TOL {
            return Err(Error::ZeroValue);
        }
        Ok(LogComplex::new(sm.re + cn.ln(), sm.im + corr.arg()))
    }

    /// Index of the summand with the largest `Re(b_j z^d + P_j(z))`.
    /// Values within [`TIE_REL_TOL`] (relative to the largest magnitude,
    /// floored at 1) of the maximum are ties, resolved by smallest index.
    pub fn dominant_index(&self, z: Complex64) -> usize {
        let res: Vec<f64> = self.exponents.iter().map(|w| w.eval(z).re).collect();
        let max = res.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = res.iter().map(|r| r.abs()).fold(1.0, f64::max);
        res.iter()
            .position(|&r| r >= max - TIE_REL_TOL * scale)
            .unwrap_or(0)
    }

    /// `|f(z) / (Q_m(z) exp(w_m(z))) - 1|` for the dominant index `m`,
    /// computed from exponent differences only.
    pub fn approx_error(&self, z: Complex64) -> Result<f64> {
        let m = self.dominant_index(z);
        let qm = self.terms[m].q.eval(z);
        if qm.norm() < 1e-300 {
            return Err(Error::DegenerateQ(qm.norm()));
        }
        let wm = self.exponents[m].eval(z);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, (t, w)) in self.terms.iter().zip(&self.exponents).enumerate() {
            if j == m {
                continue;
            }
            acc += t.q.eval(z) / qm * (w.eval(z) - wm).exp();
        }
        Ok(acc.norm())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let def: FunctionDef =
            serde_json::from_str(text).map_err(|e| Error::InvalidDefinition(e.to_string()))?;
        def.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&FunctionDef::from(self)).expect("definition serializes")
    }
}

/// On-disk function definition, coefficients in ascending degree as
/// `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionDef {
    pub d: u32,
    pub terms: Vec<TermDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermDef {
    #[serde(rename = "Q")]
    pub q: Vec<[f64; 2]>,
    pub b: [f64; 2],
    #[serde(rename = "P", default)]
    pub p: Vec<[f64; 2]>,
}

fn to_poly(cs: &[[f64; 2]]) -> Poly {
    Poly::new(cs.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
}

fn from_poly(p: &Poly) -> Vec<[f64; 2]> {
    p.coeffs().iter().map(|c| [c.re, c.im]).collect()
}

impl TryFrom<FunctionDef> for ExpPoly {
    type Error = Error;
    fn try_from(def: FunctionDef) -> Result<Self> {
        let terms = def
            .terms
            .iter()
            .map(|t| ExpPolyTerm::new(to_poly(&t.q), Complex64::new(t.b[0], t.b[1]), to_poly(&t.p)))
            .collect();
        ExpPoly::new(def.d, terms)
    }
}

impl From<&ExpPoly> for FunctionDef {
    fn from(f: &ExpPoly) -> Self {
        FunctionDef {
            d: f.d,
            terms: f
                .terms
                .iter()
                .map(|t| TermDef { q: from_poly(&t.q), b: [t.b.re, t.b.im], p: from_poly(&t.p) })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn direct_values() {
        let f = library::cosh_cube();
        assert!((f.eval_direct(c(0.0, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        let v = f.eval_direct(c(2.0, 0.0)).unwrap();
        let oracle = 8f64.exp() + (-8f64).exp();
        assert!((v.re - oracle).abs() <= 1e-12 * oracle && v.im.abs() < 1e-12 * oracle);
        let s = library::sin_z();
        let v = s.eval_direct(c(PI / 2.0, 0.0)).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(f.eval_direct(c(9.0, 0.0)), Err(Error::Overflow(_))));
    }

    #[test]
    fn log_values() {
        let single = library::exp_cube();
        let l = single.eval_log(c(1.0, 0.0)).unwrap();
        assert!((l.logmod() - 1.0).abs() < 1e-15 && l.phase().abs() < 1e-15);

        let f = library::cosh_cube();
        let l = f.eval_log(c(2.0, 0.0)).unwrap();
        let oracle = (8f64.exp() + (-8f64).exp()).ln();
        assert!((l.logmod() - oracle).abs() < 1e-14);
        assert!((l.logmod() - 8.000000112535).abs() < 1e-11);

        // direct evaluation overflows at z = 9; log form does not
        assert!(f.eval_direct(c(9.0, 0.0)).is_err());
        let l = f.eval_log(c(9.0, 0.0)).unwrap();
        assert_eq!(l.logmod(), 729.0);
        assert_eq!(l.phase(), 0.0);
    }

    #[test]
    fn derivative_values() {
        let single = library::exp_cube();
        let l = single.eval_deriv_log(c(1.0, 0.0), 1).unwrap();
        assert!((l.logmod() - (1.0 + 3f64.ln())).abs() < 1e-14);
        let f = library::cosh_cube();
        let l = f.eval_deriv_log(c(2.0, 0.0), 1).unwrap();
        let oracle = 12.0 * (8f64.exp() - (-8f64).exp());
        assert!((l.to_complex().re - oracle).abs() <= 1e-10 * oracle);
        assert!(f.eval_deriv_log(c(2.0, 0.0), 3).is_err());
        // f'(0) = 0 for e^{z^3}
        assert_eq!(single.eval_deriv_log(c(0.0, 0.0), 1), Err(Error::ZeroValue));
    }

    #[test]
    fn zero_value_detected() {
        // sin(z^3) vanishes at the origin
        let s = library::sin_z3();
        assert_eq!(s.eval_log(c(0.0, 0.0)), Err(Error::ZeroValue));
    }

    #[test]
    fn dominant_index_examples() {
        let f = library::cosh_cube();
        assert_eq!(f.dominant_index(c(2.0, 0.0)), 0);
        assert_eq!(f.dominant_index(Complex64::from_polar(2.0, PI / 3.0)), 1);
        assert_eq!(f.dominant_index(Complex64::from_polar(2.0, PI / 6.0)), 0);
    }

    #[test]
    fn approx_error_examples() {
        assert_eq!(library::exp_cube().approx_error(c(3.0, 1.0)).unwrap(), 0.0);
        let f = library::cosh_cube();
        let e = f.approx_error(c(2.0, 0.0)).unwrap();
        assert!((e - (-16f64).exp()).abs() < 1e-20);
        assert!((e - 1.1254e-7).abs() < 1e-11);
        let e = f.approx_error(Complex64::from_polar(2.0, PI / 6.0)).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
        // Q_m(0) = 0 for Q = z
        let g = ExpPoly::new(
            3,
            vec![
                ExpPolyTerm::new(Poly::monomial(c(1.0, 0.0), 1), c(1.0, 0.0), Poly::zero()),
                ExpPolyTerm::new(Poly::constant(c(1.0, 0.0)), c(-1.0, 0.0), Poly::zero()),
            ],
        )
        .unwrap();
        assert!(matches!(g.approx_error(c(0.0, 0.0)), Err(Error::DegenerateQ(_))));
    }

    #[test]
    fn parser_rejections() {
        let ok = r#"{"d":3,"terms":[{"Q":[[1,0]],"b":[1,0],"P":[]},{"Q":[[1,0]],"b":[-1,0],"P":[[0,0],[0,1]]}]}"#;
        assert!(ExpPoly::from_json(ok).is_ok());
        let deg_p = r#"{"d":3,"terms":[{"Q":[[1,0]],"b":[1,0],"P":[[0,0],[0,0],[0,0],[1,0]]}]}"#;
        let zero_b = r#"{"d":3,"terms":[{"Q":[[1,0]],"b":[0,0],"P":[]}]}"#;
        let zero_q = r#"{"d":3,"terms":[{"Q":[[0,0]],"b":[1,0],"P":[]}]}"#;
        let dup = r#"{"d":3,"terms":[{"Q":[[1,0]],"b":[1,0]},{"Q":[[2,0]],"b":[1,0]}]}"#;
        for bad in [deg_p, zero_b, zero_q, dup, "{", r#"{"d":0,"terms":[]}"#] {
            assert!(matches!(ExpPoly::from_json(bad), Err(Error::InvalidDefinition(_))), "{bad}");
        }
    }

    #[test]
    fn json_round_trip() {
        let f = library::example_h();
        assert_eq!(ExpPoly::from_json(&f.to_json()).unwrap(), f);
    }
}
