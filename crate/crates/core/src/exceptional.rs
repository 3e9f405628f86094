//! The exceptional sets `E_l = ∪_{j≠k} P_{j,k}^{-1}(U_l)` where
//! `P_{j,k} = (b_j - b_k) z^d + (P_j - P_k)` and
//! `U_l = {w : |Re w| < l |w|^{ν/d}}`, `ν = d - 5/2`.
//!
//! Outside `E_1` a single summand of `f` dominates. `E_2` is a thickening
//! of `E_1` of finite measure; near infinity it is a union of thin spokes
//! around the directions where `Re P_{j,k}` vanishes.

use crate::error::{Error, Result};
use crate::expoly::ExpPoly;
use crate::poly::Poly;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Radius beyond which the distance bound is used for the cubic test
/// functions; certified empirically by the test suite.
pub const DEFAULT_VALIDITY_RADIUS: f64 = 50.0;

/// Samples per ring in [`ExceptionalSets::dist_to_e1_measured`].
pub const RING_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct PairPoly {
    pub j: usize,
    pub k: usize,
    pub poly: Poly,
}

/// `P_{j,k}` for `j != k`.
pub fn pair_poly(f: &ExpPoly, j: usize, k: usize) -> Result<PairPoly> {
    let n = f.len();
    if j == k || j >= n || k >= n {
        return Err(Error::InvalidParam(format!("pair ({j}, {k}) for {n} terms")));
    }
    Ok(PairPoly { j, k, poly: f.exponent(j) - f.exponent(k) })
}

/// Pair polynomials of `f` with the exponent `ν/d` precomputed; the
/// membership tests below run in inner loops.
#[derive(Debug, Clone)]
pub struct ExceptionalSets {
    pairs: Vec<PairPoly>,
    expo: f64,
    c1: f64,
    validity_radius: f64,
}

impl ExceptionalSets {
    pub fn new(f: &ExpPoly) -> Self {
        let n = f.len();
        let mut pairs = Vec::new();
        for j in 0..n {
            for k in j + 1..n {
                pairs.push(pair_poly(f, j, k).expect("valid pair"));
            }
        }
        let d = f.degree();
        let expo = f.nu() / d as f64;
        let mut min_diff = f64::INFINITY;
        for p in &pairs {
            min_diff = min_diff.min((f.terms()[p.j].b - f.terms()[p.k].b).norm());
        }
        let c1 = if pairs.is_empty() { f64::INFINITY } else { min_diff.powf(expo - 1.0) / (25.0 * d as f64) };
        ExceptionalSets { pairs, expo, c1, validity_radius: DEFAULT_VALIDITY_RADIUS }
    }

    pub fn with_validity_radius(mut self, r: f64) -> Self {
        self.validity_radius = r;
        self
    }

    pub fn validity_radius(&self) -> f64 {
        self.validity_radius
    }

    pub fn pairs(&self) -> &[PairPoly] {
        &self.pairs
    }

    /// `ν/d`.
    pub fn exponent(&self) -> f64 {
        self.expo
    }

    /// `C_1 = min_{l≠n} |b_l - b_n|^{ν/d - 1} / (25 d)`; infinite for one term.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// A concrete radius containing every zero of every `P_{j,k}`:
    /// one plus the largest Cauchy root bound.
    pub fn r0(&self) -> f64 {
        1.0 + self.pairs.iter().map(|p| p.poly.cauchy_root_bound()).fold(0.0, f64::max)
    }

    /// `|Re w| - level |w|^{ν/d}` for `w = P(z)`; negative means member.
    /// Falls back to the normalized polynomial when `P(z)` overflows.
    #[inline]
    fn margin(&self, p: &Poly, z: Complex64, level: f64) -> f64 {
        let w = p.eval(z);
        if w.re.is_finite() && w.im.is_finite() {
            let m = w.norm();
            if m == 0.0 {
                return f64::NEG_INFINITY;
            }
            w.re.abs() - level * (self.expo * m.ln()).exp()
        } else {
            // w = ŵ e^{ls}: compare ln|Re ŵ| with ln(level) + (s-1) ls + s ln|ŵ|
            let (wn, ls) = p.eval_normalized(z);
            let m = wn.norm();
            if m == 0.0 {
                return f64::NEG_INFINITY;
            }
            wn.re.abs().ln() - (level.ln() + (self.expo - 1.0) * ls + self.expo * m.ln())
        }
    }

    fn min_margin(&self, z: Complex64, level: f64) -> f64 {
        self.pairs
            .iter()
            .map(|p| self.margin(&p.poly, z, level))
            .fold(f64::INFINITY, f64::min)
    }

    /// Membership in `E_level`, `level` being 1 or 2. Zeros of `P_{j,k}`
    /// are members.
    pub fn contains(&self, z: Complex64, level: u8) -> bool {
        let l = level as f64;
        self.pairs.iter().any(|p| self.margin(&p.poly, z, l) < 0.0)
    }

    /// `C_1 |z|^{-3/2}`, a lower bound for `dist(z, E_1)` when `z ∉ E_2`
    /// and `|z|` is past the validity radius.
    pub fn dist_to_e1_lower(&self, z: Complex64) -> Result<f64> {
        if self.contains(z, 2) {
            return Err(Error::NotApplicable);
        }
        Ok(self.c1 * z.norm().powf(-1.5))
    }

    /// Smallest ring radius `k * step <= max_radius` with one of
    /// [`RING_SAMPLES`] points in `E_1`; `max_radius` if none. Zero for
    /// `z ∈ E_1`.
    pub fn dist_to_e1_measured(&self, z: Complex64, step: f64, max_radius: f64) -> f64 {
        if self.contains(z, 1) {
            return 0.0;
        }
        let dirs = ring_dirs();
        let mut k = 1usize;
        loop {
            let r = k as f64 * step;
            if r > max_radius {
                return max_radius;
            }
            if dirs.iter().any(|u| self.contains(z + u * r, 1)) {
                return r;
            }
            k += 1;
        }
    }

    /// Measure of `E_2 ∩ {r_min <= |z| <= r_max}`: midpoint rule over `nr`
    /// radial bands; on each mid-radius circle the angular measure is
    /// bracketed on `ntheta` samples and refined by bisection at every
    /// sign change of `Re P_{j,k}` and of the membership margin.
    pub fn e2_measure(&self, r_min: f64, r_max: f64, nr: usize, ntheta: usize) -> Result<f64> {
        if !(r_min > 0.0 && r_max > r_min) {
            return Err(Error::InvalidParam(format!("annulus [{r_min}, {r_max}]")));
        }
        if nr < 16 || ntheta < 16 {
            return Err(Error::InvalidParam("nr and ntheta must be at least 16".into()));
        }
        if self.pairs.is_empty() {
            return Ok(0.0);
        }
        let dr = (r_max - r_min) / nr as f64;
        let band = |i: usize| {
            let r = r_min + (i as f64 + 0.5) * dr;
            r * dr * self.circle_measure(r, ntheta, 2.0)
        };
        #[cfg(feature = "parallel")]
        let bands: Vec<f64> = {
            use rayon::prelude::*;
            (0..nr).into_par_iter().map(band).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let bands: Vec<f64> = (0..nr).map(band).collect();
        Ok(bands.iter().sum())
    }

    /// Angular measure of `E_level` on the circle `|z| = r`.
    pub fn circle_measure(&self, r: f64, ntheta: usize, level: f64) -> f64 {
        let at = |t: f64| Complex64::from_polar(r, t);
        let step = 2.0 * PI / ntheta as f64;
        let mut points: Vec<f64> = (0..=ntheta).map(|i| i as f64 * step).collect();
        for p in &self.pairs {
            let re = |t: f64| p.poly.eval(at(t)).re;
            let mut prev = re(0.0);
            for i in 1..=ntheta {
                let (a, b) = ((i - 1) as f64 * step, i as f64 * step);
                let cur = re(b);
                if prev == 0.0 {
                    points.push(a);
                } else if prev.signum() != cur.signum() {
                    points.push(bisect(re, a, b, prev));
                }
                prev = cur;
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let g = |t: f64| self.min_margin(at(t), level);
        let mut total = 0.0;
        let mut ga = g(points[0]);
        for w in points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let gb = g(b);
            match (ga < 0.0, gb < 0.0) {
                (true, true) => total += b - a,
                (true, false) => total += bisect(g, a, b, ga) - a,
                (false, true) => total += b - bisect(g, a, b, ga),
                (false, false) => {}
            }
            ga = gb;
        }
        total
    }
}

// 60 halvings of an interval below 2π reach double resolution.
fn bisect(h: impl Fn(f64) -> f64, mut a: f64, mut b: f64, ha: f64) -> f64 {
    let neg = ha < 0.0;
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (h(m) < 0.0) == neg {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn ring_dirs() -> [Complex64; RING_SAMPLES] {
    let mut out = [Complex64::new(0.0, 0.0); RING_SAMPLES];
    for (i, u) in out.iter_mut().enumerate() {
        *u = Complex64::from_polar(1.0, 2.0 * PI * i as f64 / RING_SAMPLES as f64);
    }
    out
}

/// Membership of `z` in `E_level`.
pub fn in_e(f: &ExpPoly, z: Complex64, level: u8) -> bool {
    ExceptionalSets::new(f).contains(z, level)
}

/// See [`ExceptionalSets::dist_to_e1_lower`].
pub fn dist_to_e1_lower(f: &ExpPoly, z: Complex64) -> Result<f64> {
    ExceptionalSets::new(f).dist_to_e1_lower(z)
}

/// See [`ExceptionalSets::dist_to_e1_measured`].
pub fn dist_to_e1_measured(f: &ExpPoly, z: Complex64, step: f64, max_radius: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::InvalidParam(format!("step = {step}")));
    }
    Ok(ExceptionalSets::new(f).dist_to_e1_measured(z, step, max_radius))
}

/// See [`ExceptionalSets::e2_measure`].
pub fn e2_measure(f: &ExpPoly, r_min: f64, r_max: f64, nr: usize, ntheta: usize) -> Result<f64> {
    ExceptionalSets::new(f).e2_measure(r_min, r_max, nr, ntheta)
}

/// One CSV row `r_lo,r_hi,nr,ntheta,measure`.
/// `r0` is [`ExceptionalSets::r0`], so readers can see whether the annulus
/// lies outside every zero of the pair polynomials.
pub fn e2_csv_row(r_lo: f64, r_hi: f64, nr: usize, ntheta: usize, measure: f64, r0: f64) -> String {
    format!("{r_lo},{r_hi},{nr},{ntheta},{measure:.12e},{r0}")
}

pub const E2_CSV_HEADER: &str = "r_lo,r_hi,nr,ntheta,measure,r0";
