//! Seeded sampling: ChaCha8 uniforms and the R2 low-discrepancy sequence
//! with a random Cranley-Patterson shift.

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// `1/g` and `1/g^2` for the plastic number `g`, the R2 increments.
const R2_A1: f64 = 0.754_877_666_246_692_8;
const R2_A2: f64 = 0.569_840_290_998_053_3;

pub struct Uniform {
    rng: ChaCha8Rng,
}

impl Uniform {
    pub fn new(seed: u64) -> Self {
        Uniform { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Area-uniform point of `{r_lo <= |z| <= r_hi}`.
    pub fn annulus_point(&mut self, r_lo: f64, r_hi: f64) -> Complex64 {
        let (u, v) = (self.next_f64(), self.next_f64());
        annulus_map(u, v, r_lo, r_hi)
    }
}

/// Maps the unit square onto the annulus, uniformly in area.
pub fn annulus_map(u: f64, v: f64, r_lo: f64, r_hi: f64) -> Complex64 {
    let r = (r_lo * r_lo + u * (r_hi * r_hi - r_lo * r_lo)).sqrt();
    Complex64::from_polar(r, 2.0 * PI * v)
}

/// Points `frac(shift + n (a1, a2))`, `n = 0, 1, ...`.
pub struct R2Sequence {
    shift: (f64, f64),
    n: u64,
}

impl R2Sequence {
    pub fn new(seed: u64) -> Self {
        let mut u = Uniform::new(seed);
        R2Sequence { shift: (u.next_f64(), u.next_f64()), n: 0 }
    }

    /// The `i`-th point, independent of iteration state.
    pub fn point(&self, i: u64) -> (f64, f64) {
        let i = i as f64;
        ((self.shift.0 + i * R2_A1).fract(), (self.shift.1 + i * R2_A2).fract())
    }
}

impl Iterator for R2Sequence {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        let p = self.point(self.n);
        self.n += 1;
        Some(p)
    }
}
