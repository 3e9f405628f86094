//! Magnitudes too large for `f64`, stored as `exp^(depth)(value)`.
//!
//! Canonical form: at depth 0 `value` is any finite real not above
//! [`LIFT`]; at depth `k >= 1` it lies in `(ln LIFT, LIFT]`. Lifting
//! replaces `(k, v)` with `(k + 1, ln v)` when `v > LIFT`; lowering replaces
//! `(k, v)` with `(k - 1, e^v)` when `k >= 1` and `v <= ln LIFT`.
//!
//! With those ranges a number of depth `k + 1` exceeds every number of
//! depth `k`, so canonical values compare lexicographically on
//! `(depth, value)`.

use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;

pub const LIFT: f64 = 1e300;

fn ln_lift() -> f64 {
    LIFT.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TowerMag {
    depth: u32,
    value: f64,
}

impl TowerMag {
    /// Canonicalizes `exp^(depth)(value)`. `value` must be finite.
    pub fn new(depth: u32, value: f64) -> Self {
        assert!(value.is_finite(), "non-finite tower value {value}");
        let mut t = TowerMag { depth, value };
        while t.value > LIFT {
            t.value = t.value.ln();
            t.depth += 1;
        }
        while t.depth > 0 && t.value <= ln_lift() {
            t.value = t.value.exp();
            t.depth -= 1;
        }
        t
    }

    pub fn from_f64(x: f64) -> Self {
        TowerMag::new(0, x)
    }

    /// The number `e^l`.
    pub fn from_log(l: f64) -> Self {
        TowerMag::new(1, l)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// The value as `f64`, `None` past [`LIFT`].
    pub fn to_f64(&self) -> Option<f64> {
        (self.depth == 0).then_some(self.value)
    }

    /// Natural logarithm as `f64`, `None` at depth 2 and beyond.
    pub fn ln_f64(&self) -> Option<f64> {
        match self.depth {
            0 => Some(self.value.ln()),
            1 => Some(self.value),
            _ => None,
        }
    }

    pub fn exp(&self) -> Self {
        TowerMag::new(self.depth + 1, self.value)
    }

    /// Natural logarithm; needs a positive number.
    pub fn ln(&self) -> Self {
        match self.depth {
            0 => TowerMag::new(0, self.value.ln()),
            k => TowerMag::new(k - 1, self.value),
        }
    }

    /// `x^alpha` for `alpha > 0`. At depth 2 the exponent moves the
    /// innermost value by `ln alpha`; deeper, that shift is below `f64`
    /// resolution and the number is returned unchanged.
    pub fn pow(&self, alpha: f64) -> Self {
        match self.depth {
            0 => {
                let p = self.value.powf(alpha);
                if p.is_finite() {
                    TowerMag::new(0, p)
                } else {
                    TowerMag::new(1, alpha * self.value.ln())
                }
            }
            1 => TowerMag::new(1, alpha * self.value),
            2 => TowerMag::new(2, self.value + alpha.ln()),
            _ => *self,
        }
    }

    /// `c * x` for `c > 0`, with the same resolution caveat as [`pow`](Self::pow)
    /// from depth 2 on.
    pub fn scale(&self, c: f64) -> Self {
        match self.depth {
            0 => {
                let p = self.value * c;
                if p.is_finite() {
                    TowerMag::new(0, p)
                } else {
                    TowerMag::new(1, self.value.ln() + c.ln())
                }
            }
            1 => TowerMag::new(1, self.value + c.ln()),
            _ => *self,
        }
    }
}

impl fmt::Display for TowerMag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.depth == 0 {
            write!(f, "{}", self.value)
        } else {
            write!(f, "exp^{}({})", self.depth, self.value)
        }
    }
}

/// Lexicographic on the canonical `(depth, value)`.
pub fn tower_compare(a: &TowerMag, b: &TowerMag) -> Ordering {
    a.depth.cmp(&b.depth).then(a.value.total_cmp(&b.value))
}

impl PartialOrd for TowerMag {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(tower_compare(self, other))
    }
}

/// `k`-fold iterate of `E_alpha(x) = exp(x^alpha)`.
pub fn iterate_e_alpha(x: f64, alpha: f64, k: u32) -> TowerMag {
    let mut t = TowerMag::from_f64(x);
    for _ in 0..k {
        t = t.pow(alpha).exp();
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnsetRow {
    pub x: f64,
    pub lhs: TowerMag,
    pub rhs: TowerMag,
    pub holds: bool,
}

/// Compares `E_alpha^k(x)` with `E_beta^(k-2)(x)` on the grid `xs`. Returns
/// the rows and the smallest grid point from which the inequality holds at
/// every larger grid point.
pub fn e_alpha_onset(xs: &[f64], alpha: f64, beta: f64, k: u32) -> (Vec<OnsetRow>, Option<f64>) {
    let rows: Vec<OnsetRow> = xs
        .iter()
        .map(|&x| {
            let lhs = iterate_e_alpha(x, alpha, k);
            let rhs = iterate_e_alpha(x, beta, k.saturating_sub(2));
            OnsetRow { x, lhs, rhs, holds: tower_compare(&lhs, &rhs) != Ordering::Less }
        })
        .collect();
    let mut onset = None;
    for row in rows.iter().rev() {
        if row.holds {
            onset = Some(row.x);
        } else {
            break;
        }
    }
    (rows, onset)
}
