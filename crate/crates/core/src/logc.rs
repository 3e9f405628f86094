//! Complex numbers stored as `(ln|w|, arg w)`.

use num_complex::Complex64;
use std::f64::consts::PI;

/// A complex value in polar log form. `Zero` is kept apart because its
/// log-modulus is not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogComplex {
    Zero,
    NonZero { logmod: f64, phase: f64 },
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_phase(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

impl LogComplex {
    pub fn new(logmod: f64, phase: f64) -> Self {
        LogComplex::NonZero { logmod, phase: wrap_phase(phase) }
    }

    pub fn from_complex(w: Complex64) -> Self {
        if w.re == 0.0 && w.im == 0.0 {
            LogComplex::Zero
        } else {
            LogComplex::new(w.norm().ln(), w.arg())
        }
    }

    /// Back to rectangular form; overflows to infinity past `logmod ~ 709`.
    pub fn to_complex(self) -> Complex64 {
        match self {
            LogComplex::Zero => Complex64::new(0.0, 0.0),
            LogComplex::NonZero { logmod, phase } => Complex64::from_polar(logmod.exp(), phase),
        }
    }

    /// `ln|w|`, `-inf` for zero.
    pub fn logmod(self) -> f64 {
        match self {
            LogComplex::Zero => f64::NEG_INFINITY,
            LogComplex::NonZero { logmod, .. } => logmod,
        }
    }

    pub fn phase(self) -> f64 {
        match self {
            LogComplex::Zero => 0.0,
            LogComplex::NonZero { phase, .. } => phase,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, LogComplex::Zero)
    }
}

impl std::ops::Mul for LogComplex {
    type Output = LogComplex;

    fn mul(self, other: LogComplex) -> LogComplex {
        match (self, other) {
            (LogComplex::NonZero { logmod: a, phase: p }, LogComplex::NonZero { logmod: b, phase: q }) => {
                LogComplex::new(a + b, p + q)
            }
            _ => LogComplex::Zero,
        }
    }
}
