//! Square grid on an annulus with side lengths adapted to `|z|^{-(d-1)}`,
//! the good-square filter, and the density and measure bounds assembled
//! on it.
//!
//! The tiling has far too many squares to list (about `10^10` for
//! `{10 <= |z| <= 20}` at the default `sigma`), so [`Tiling`] is an
//! implicit quadtree: base squares of side `s0` on a grid anchored at
//! `(-r_hi, -r_hi)`, each split until the upper side bound holds. Squares
//! are addressed by integer coordinates at their level, and edges are
//! computed from those integers, so neighbouring squares share edges
//! exactly.

use crate::error::{Error, Result};
use crate::exceptional::ExceptionalSets;
use crate::expoly::ExpPoly;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;

const MAX_LEVEL: u32 = 48;
/// Grid points per side in [`square_density_bound`].
pub const DENSITY_GRID: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareTile {
    pub center: Complex64,
    pub side: f64,
    pub level: u32,
    /// Integer corner coordinates at `level`.
    pub ix: i64,
    pub iy: i64,
}

impl SquareTile {
    pub fn x_range(&self) -> (f64, f64) {
        (self.center.re - self.side / 2.0, self.center.re + self.side / 2.0)
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.center.im - self.side / 2.0, self.center.im + self.side / 2.0)
    }

    /// `min_{z in S} |z|`.
    pub fn min_abs(&self) -> f64 {
        let (x0, x1) = self.x_range();
        let (y0, y1) = self.y_range();
        let dx = if x0 > 0.0 { x0 } else if x1 < 0.0 { -x1 } else { 0.0 };
        let dy = if y0 > 0.0 { y0 } else if y1 < 0.0 { -y1 } else { 0.0 };
        dx.hypot(dy)
    }

    /// `max_{z in S} |z|`.
    pub fn max_abs(&self) -> f64 {
        let (x0, x1) = self.x_range();
        let (y0, y1) = self.y_range();
        x0.abs().max(x1.abs()).hypot(y0.abs().max(y1.abs()))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let (x0, x1) = self.x_range();
        let (y0, y1) = self.y_range();
        z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    /// The 16 points dividing the boundary into quarter-sides, then the
    /// center.
    pub fn boundary_samples(&self) -> [Complex64; 17] {
        let (x0, _) = self.x_range();
        let (y0, _) = self.y_range();
        let s = self.side;
        let mut out = [self.center; 17];
        for k in 0..4 {
            let t = k as f64 * s / 4.0;
            out[4 * k] = Complex64::new(x0 + t, y0);
            out[4 * k + 1] = Complex64::new(x0 + s, y0 + t);
            out[4 * k + 2] = Complex64::new(x0 + s - t, y0 + s);
            out[4 * k + 3] = Complex64::new(x0, y0 + s - t);
        }
        out
    }
}

/// `1 / (4 d max|b_j|)`, the open upper end for `sigma`.
pub fn sigma_upper(f: &ExpPoly) -> f64 {
    1.0 / (4.0 * f.degree() as f64 * f.max_abs_b())
}

/// `1 / (8 d max|b_j|)`.
pub fn default_sigma(f: &ExpPoly) -> f64 {
    sigma_upper(f) / 2.0
}

/// `sigma / (4 sqrt2 min|z|^{d-1}) <= side <= sigma / (sqrt2 max|z|^{d-1})`.
pub fn side_bounds(d: u32, sigma: f64, t: &SquareTile) -> (f64, f64) {
    let e = d as i32 - 1;
    (sigma / (4.0 * SQRT_2 * t.min_abs().powi(e)), sigma / (SQRT_2 * t.max_abs().powi(e)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tiling {
    d: u32,
    sigma: f64,
    r_lo: f64,
    r_hi: f64,
    base_side: f64,
}

impl Tiling {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radii(&self) -> (f64, f64) {
        (self.r_lo, self.r_hi)
    }

    pub fn base_side(&self) -> f64 {
        self.base_side
    }

    fn edge(&self, g: i64, level: u32) -> f64 {
        -self.r_hi + (g as f64 / (1u64 << level) as f64) * self.base_side
    }

    fn tile(&self, ix: i64, iy: i64, level: u32) -> SquareTile {
        let (x0, x1) = (self.edge(ix, level), self.edge(ix + 1, level));
        let (y0, y1) = (self.edge(iy, level), self.edge(iy + 1, level));
        SquareTile {
            center: Complex64::new((x0 + x1) / 2.0, (y0 + y1) / 2.0),
            side: self.base_side / (1u64 << level) as f64,
            level,
            ix,
            iy,
        }
    }

    fn is_leaf(&self, t: &SquareTile) -> bool {
        t.level >= MAX_LEVEL || t.side <= side_bounds(self.d, self.sigma, t).1
    }

    fn meets_annulus(&self, t: &SquareTile) -> bool {
        t.max_abs() >= self.r_lo && t.min_abs() <= self.r_hi
    }

    pub fn side_bounds_ok(&self, t: &SquareTile) -> bool {
        let (lo, hi) = side_bounds(self.d, self.sigma, t);
        lo <= t.side && t.side <= hi
    }

    /// The tile containing `z`; on shared edges the one to the upper right.
    /// `None` when `z` lies in no tile meeting the annulus.
    pub fn locate(&self, z: Complex64) -> Option<SquareTile> {
        let cell = |v: f64, level: u32| {
            let mut g = ((v + self.r_hi) / self.base_side * (1u64 << level) as f64).floor() as i64;
            while v < self.edge(g, level) {
                g -= 1;
            }
            while v >= self.edge(g + 1, level) {
                g += 1;
            }
            g
        };
        let mut level = 0;
        let mut t = self.tile(cell(z.re, 0), cell(z.im, 0), 0);
        while !self.is_leaf(&t) {
            level += 1;
            let ix = 2 * t.ix + i64::from(z.re >= self.edge(2 * t.ix + 1, level));
            let iy = 2 * t.iy + i64::from(z.im >= self.edge(2 * t.iy + 1, level));
            t = self.tile(ix, iy, level);
        }
        self.meets_annulus(&t).then_some(t)
    }

    /// Tiles meeting the rectangle `[x0, x1] x [y0, y1]`, in quadtree order.
    pub fn tiles_in(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<SquareTile> {
        let lo = |v: f64| ((v + self.r_hi) / self.base_side).floor() as i64;
        let mut out = Vec::new();
        let mut stack: Vec<SquareTile> = Vec::new();
        for iy in (lo(y0)..=lo(y1)).rev() {
            for ix in (lo(x0)..=lo(x1)).rev() {
                stack.push(self.tile(ix, iy, 0));
            }
        }
        while let Some(t) = stack.pop() {
            let (tx0, tx1) = t.x_range();
            let (ty0, ty1) = t.y_range();
            if tx1 < x0 || tx0 > x1 || ty1 < y0 || ty0 > y1 || !self.meets_annulus(&t) {
                continue;
            }
            if self.is_leaf(&t) {
                out.push(t);
            } else {
                let l = t.level + 1;
                for (dx, dy) in [(1, 1), (0, 1), (1, 0), (0, 0)] {
                    stack.push(self.tile(2 * t.ix + dx, 2 * t.iy + dy, l));
                }
            }
        }
        out
    }

    /// Annulus area divided by the mean squared side, a rough tile count.
    pub fn approx_count(&self) -> f64 {
        let area = PI * (self.r_hi * self.r_hi - self.r_lo * self.r_lo);
        let e = self.d as i32 - 1;
        let s_lo = self.sigma / (SQRT_2 * self.r_lo.powi(e));
        let s_hi = self.sigma / (SQRT_2 * self.r_hi.powi(e));
        area / (s_lo * s_hi)
    }
}

/// Quadtree tiling of the frame `[-r_hi, r_hi]^2` restricted to tiles
/// meeting `{r_lo <= |z| <= r_hi}`. The base side is twice the lower bound
/// at `|z| = r_lo`.
pub fn build_tiling(f: &ExpPoly, r_lo: f64, r_hi: f64, sigma: f64) -> Result<Tiling> {
    let upper = sigma_upper(f);
    if !(sigma > 0.0 && sigma < upper) {
        return Err(Error::BadSigma { sigma, upper });
    }
    if !(r_lo > 0.0 && r_hi > r_lo && r_hi.is_finite()) {
        return Err(Error::InvalidParam(format!("annulus [{r_lo}, {r_hi}]")));
    }
    let d = f.degree();
    let base_side = sigma / (2.0 * SQRT_2 * r_lo.powi(d as i32 - 1));
    if base_side * 4.0 > r_lo {
        return Err(Error::InvalidParam(format!("r_lo = {r_lo} too small for sigma = {sigma}")));
    }
    Ok(Tiling { d, sigma, r_lo, r_hi, base_side })
}

/// Keeps squares whose sampled distance to `E_1` exceeds
/// `2 sigma / min|z|^{d-1}`.
pub struct GoodSquareTest {
    sets: ExceptionalSets,
    d: u32,
    sigma: f64,
}

impl GoodSquareTest {
    pub fn new(f: &ExpPoly, sigma: f64) -> Self {
        GoodSquareTest { sets: ExceptionalSets::new(f), d: f.degree(), sigma }
    }

    pub fn threshold(&self, t: &SquareTile) -> f64 {
        2.0 * self.sigma / t.min_abs().powi(self.d as i32 - 1)
    }

    /// Smallest ring distance from the 17 samples, less the largest distance
    /// from a point of the square to its nearest sample (`side sqrt2 / 4`).
    /// Capped a little above the threshold.
    pub fn measured_distance(&self, t: &SquareTile) -> f64 {
        let step = t.side / 8.0;
        let cover = t.side * SQRT_2 / 4.0;
        let cap = self.threshold(t) + cover + step;
        let mut best = cap;
        for p in t.boundary_samples() {
            best = best.min(self.sets.dist_to_e1_measured(p, step, best));
            if best == 0.0 {
                break;
            }
        }
        best - cover
    }

    pub fn is_good(&self, t: &SquareTile) -> bool {
        self.measured_distance(t) > self.threshold(t)
    }

    pub fn sets(&self) -> &ExceptionalSets {
        &self.sets
    }
}

pub fn filter_good_squares(f: &ExpPoly, tiles: &[SquareTile], sigma: f64) -> Vec<SquareTile> {
    let test = GoodSquareTest::new(f, sigma);
    tiles.iter().filter(|t| test.is_good(t)).copied().collect()
}

/// `((1 + rho) / (1 - rho))^4`.
pub fn koebe_distortion_factor(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho = {rho} outside (0, 1)")));
    }
    Ok(((1.0 + rho) / (1.0 - rho)).powi(4))
}

/// `(prod_{j=1}^{n} (1 + 2^-j) / (1 - 2^-j))^4`.
pub fn distortion_product(n: u32) -> f64 {
    (1..=n)
        .map(|j| {
            let t = 0.5f64.powi(j as i32);
            (1.0 + t) / (1.0 - t)
        })
        .product::<f64>()
        .powi(4)
}

/// The infinite product, stopped once a factor differs from 1 by less
/// than `1e-15`. Returns the value and the number of factors used.
pub fn distortion_constant_c2() -> (f64, u32) {
    let mut p = 1.0f64;
    let mut j = 0;
    loop {
        j += 1;
        let t = 0.5f64.powi(j);
        let factor = ((1.0 + t) / (1.0 - t)).powi(4);
        p *= factor;
        if factor - 1.0 < 1e-15 || j >= 64 {
            return (p, j as u32);
        }
    }
}

/// `2 C_2^2 exp(-min|z|^alpha / 2) meas(S_0)`.
pub fn nested_measure_bound(s0: &SquareTile, alpha: f64) -> f64 {
    let c2 = distortion_constant_c2().0;
    2.0 * c2 * c2 * (-0.5 * s0.min_abs().powf(alpha)).exp() * s0.area()
}

/// `exp(-r^alpha / 2^{2 + alpha})`.
pub fn annulus_tail_bound(r: f64, alpha: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("r = {r}")));
    }
    Ok((-r.powf(alpha) / 2f64.powf(2.0 + alpha)).exp())
}

/// `(9 pi / 2) s length` for the `s`-neighbourhood of a curve.
pub fn band_measure_bound(length: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < length) {
        return Err(Error::Domain(format!("band width {s} not in (0, {length})")));
    }
    Ok(4.5 * PI * s * length)
}

/// Log of an asymptotic upper estimate for `meas(E_2 ∩ {|z| >= rho})`.
/// On `|z| = t` each `Re P_{j,k}` changes sign `2d` times and
/// `E_2` has angular width about `4 |c|^{ν/d-1} t^{ν-d} / d` at each,
/// `c` the leading coefficient; integrating `t dt` from `rho` gives
/// `16 |c|^{ν/d-1} rho^{-1/2}`. A factor 2 covers the lower-order terms.
pub fn e2_tail_budget_log(f: &ExpPoly, log_rho: f64) -> f64 {
    let s = f.nu() / f.degree() as f64;
    let sets = ExceptionalSets::new(f);
    let k: f64 = sets
        .pairs()
        .iter()
        .map(|p| p.poly.coeffs().last().map_or(0.0, |c| c.norm().powf(s - 1.0)))
        .sum();
    (32.0 * k).ln() - 0.5 * log_rho
}

fn logaddexp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub square: SquareTile,
    pub min_abs_z: f64,
    pub max_abs_z: f64,
    /// Lower bound for `min_S |f'|`: sampled minimum less the Lipschitz slack.
    pub min_abs_fprime_log: f64,
    pub max_abs_fprime_log: f64,
    /// `max|f''| h / min|f'|` from the samples, `h` the grid covering radius.
    pub lipschitz_slack: f64,
    pub meas_fs_lower_log: f64,
    pub boundary_length_upper_log: f64,
    pub band_measure_upper_log: f64,
    pub e2_contrib_log: f64,
    pub koebe_factor: f64,
    pub density_upper_log: f64,
    /// `exp(density_upper_log)`; underflows to 0 far out.
    pub density_upper: f64,
    pub paper_bound: f64,
}

pub const DENSITY_CSV_HEADER: &str = "center_re,center_im,side,level,min_abs_z,max_abs_z,min_abs_fprime_log,max_abs_fprime_log,lipschitz_slack,meas_fs_lower_log,boundary_length_upper_log,band_measure_upper_log,e2_contrib_log,koebe_factor,density_upper_log,density_upper,paper_bound";

impl DensityReport {
    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.square.center.re,
            self.square.center.im,
            self.square.side,
            self.square.level,
            self.min_abs_z,
            self.max_abs_z,
            self.min_abs_fprime_log,
            self.max_abs_fprime_log,
            self.lipschitz_slack,
            self.meas_fs_lower_log,
            self.boundary_length_upper_log,
            self.band_measure_upper_log,
            self.e2_contrib_log,
            self.koebe_factor,
            self.density_upper_log,
            self.density_upper,
            self.paper_bound
        );
        s
    }
}

struct Extremes {
    min: f64,
    max: f64,
}

fn log_extremes(f: &ExpPoly, t: &SquareTile, order: u8) -> Extremes {
    let n = DENSITY_GRID;
    let (x0, _) = t.x_range();
    let (y0, _) = t.y_range();
    let h = t.side / (n - 1) as f64;
    let mut e = Extremes { min: f64::INFINITY, max: f64::NEG_INFINITY };
    for a in 0..n {
        for b in 0..n {
            let z = Complex64::new(x0 + a as f64 * h, y0 + b as f64 * h);
            let l = match order {
                0 => f.eval_log(z),
                k => f.eval_deriv_log(z, k),
            };
            let v = l.map_or(f64::NEG_INFINITY, |l| l.logmod());
            e.min = e.min.min(v);
            e.max = e.max.max(v);
        }
    }
    e
}

/// Density of the part of `S` not covered by pulled-back good squares of
/// `f(S)`, bounded by
/// `(5/3)^4 (meas(E_2 ∩ f(S)) + band) / meas(f(S))`, where:
/// - `meas(f(S)) >= side^2 min|f'|^2` (f is injective on good squares),
/// - `length(∂f(S)) <= 4 side max|f'|`,
/// - the band is the neighbourhood of `∂f(S)` of width the diagonal of the
///   largest image-scale square, `sigma_upper / min|f|^{d-1}`.
///
/// Extremes of `|f|`, `|f'|` come from a 33x33 grid, widened by the
/// Lipschitz slack from the sampled `|f'|`, `|f''|`.
pub fn square_density_bound(f: &ExpPoly, s: &SquareTile, alpha: f64, e2_budget_log: f64) -> DensityReport {
    let h = s.side / (DENSITY_GRID - 1) as f64 * SQRT_2 / 2.0;
    let f0 = log_extremes(f, s, 0);
    let f1 = log_extremes(f, s, 1);
    let f2 = log_extremes(f, s, 2);
    let shrink = |min: f64, deriv_max: f64| {
        let r = (deriv_max - min).exp() * h;
        if r < 1.0 {
            min + (-r).ln_1p()
        } else {
            f64::NEG_INFINITY
        }
    };
    let lipschitz_slack = (f2.max - f1.min).exp() * h;
    let min_f1 = shrink(f1.min, f2.max);
    let max_f1 = f1.max + ((f2.max - f1.max).exp() * h).ln_1p();
    let min_f0 = shrink(f0.min, max_f1);
    let meas_fs_lower_log = 2.0 * s.side.ln() + 2.0 * min_f1;
    let boundary_length_upper_log = (4.0 * s.side).ln() + max_f1;
    let width_log = sigma_upper(f).ln() - (f.degree() as f64 - 1.0) * min_f0;
    let band_measure_upper_log = if width_log < boundary_length_upper_log {
        (4.5 * PI).ln() + width_log + boundary_length_upper_log
    } else {
        // the band fits in a disk of radius width + length
        PI.ln() + 2.0 * logaddexp(width_log, boundary_length_upper_log)
    };
    let koebe_factor = koebe_distortion_factor(0.25).expect("rho in (0, 1)");
    let density_upper_log =
        koebe_factor.ln() + logaddexp(e2_budget_log, band_measure_upper_log) - meas_fs_lower_log;
    DensityReport {
        square: *s,
        min_abs_z: s.min_abs(),
        max_abs_z: s.max_abs(),
        min_abs_fprime_log: min_f1,
        max_abs_fprime_log: max_f1,
        lipschitz_slack,
        meas_fs_lower_log,
        boundary_length_upper_log,
        band_measure_upper_log,
        e2_contrib_log: e2_budget_log,
        koebe_factor,
        density_upper_log,
        density_upper: density_upper_log.exp(),
        paper_bound: (-0.5 * s.min_abs().powf(alpha)).exp(),
    }
}

/// [`square_density_bound`] with the `E_2` budget taken from
/// [`e2_tail_budget_log`] at the smallest `|f|` on the square.
pub fn square_density_report(f: &ExpPoly, s: &SquareTile, alpha: f64) -> DensityReport {
    let f0 = log_extremes(f, s, 0);
    square_density_bound(f, s, alpha, e2_tail_budget_log(f, f0.min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use crate::sampling::Uniform;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sigma_interval() {
        let f = library::cosh_cube();
        assert_eq!(default_sigma(&f), 1.0 / 24.0);
        assert!(matches!(build_tiling(&f, 10.0, 20.0, 1.0 / 12.0), Err(Error::BadSigma { .. })));
        assert!(matches!(build_tiling(&f, 10.0, 20.0, 0.0), Err(Error::BadSigma { .. })));
    }

    #[test]
    fn tiles_partition_and_bounds() {
        let f = library::cosh_cube();
        let t = build_tiling(&f, 10.0, 20.0, 1.0 / 24.0).unwrap();
        let mut u = Uniform::new(11);
        let lo = 1.0 / 24.0 / (4.0 * SQRT_2 * 400.0);
        let hi = 1.0 / 24.0 / (SQRT_2 * 100.0);
        for _ in 0..2000 {
            let z = u.annulus_point(10.0, 20.0);
            let tile = t.locate(z).expect("covered");
            assert!(tile.contains(z));
            assert!(t.side_bounds_ok(&tile));
            assert!(tile.side >= lo && tile.side <= hi);
            let e = tile.side * 1e-3;
            let near = t.tiles_in(z.re - e, z.re + e, z.im - e, z.im + e);
            let inside = near
                .iter()
                .filter(|n| {
                    let (x0, x1) = n.x_range();
                    let (y0, y1) = n.y_range();
                    z.re > x0 && z.re < x1 && z.im > y0 && z.im < y1
                })
                .count();
            assert!(inside <= 1);
            assert!(near.contains(&tile));
        }
    }

    #[test]
    fn window_listing_matches_locate() {
        let f = library::cosh_cube();
        let t = build_tiling(&f, 10.0, 20.0, 1.0 / 24.0).unwrap();
        let tiles = t.tiles_in(19.99, 20.0, 0.0, 0.001);
        assert!(!tiles.is_empty());
        for tile in &tiles {
            assert_eq!(t.locate(tile.center), Some(*tile));
        }
        let area: f64 = tiles.iter().map(|s| s.area()).sum();
        assert!(area >= 0.01 * 0.001);
    }

    #[test]
    fn good_square_examples() {
        let f = library::cosh_cube();
        let sigma = default_sigma(&f);
        let t = build_tiling(&f, 10.0, 20.0, sigma).unwrap();
        let test = GoodSquareTest::new(&f, sigma);
        let spoke = t.locate(Complex64::from_polar(15.0, PI / 6.0)).unwrap();
        assert!(!test.is_good(&spoke));
        let axis = t.locate(c(15.0, 0.0)).unwrap();
        assert!(test.is_good(&axis));
        assert_eq!(filter_good_squares(&f, &[spoke, axis], sigma), vec![axis]);
    }

    #[test]
    fn koebe_and_c2() {
        assert!((koebe_distortion_factor(0.25).unwrap() - 625.0 / 81.0).abs() < 1e-12);
        assert_eq!(koebe_distortion_factor(0.5).unwrap(), 81.0);
        assert!((koebe_distortion_factor(1e-9).unwrap() - 1.0).abs() < 1e-8);
        assert!(koebe_distortion_factor(1.0).is_err());
        assert_eq!(distortion_product(1), 81.0);
        let (c2, n) = distortion_constant_c2();
        assert!(n <= 60);
        assert!((distortion_product(50) - distortion_product(60)).abs() < 1e-12 * c2);
        assert!((c2 - distortion_product(60)).abs() < 1e-12 * c2);
        assert!(c2 > 81.0);
    }

    #[test]
    fn tail_and_band_examples() {
        let v = annulus_tail_bound(4096.0, 0.25).unwrap();
        assert!((v - (-8.0 / 2f64.powf(2.25)).exp()).abs() < 1e-15);
        assert!((v - 0.186).abs() < 1e-3);
        let incs: Vec<f64> = (0..12).map(|n| annulus_tail_bound(50.0 * 2f64.powi(n), 0.25).unwrap()).collect();
        assert!(incs.windows(2).all(|w| w[1] < w[0]));
        assert!((band_measure_bound(10.0, 1.0).unwrap() - 45.0 * PI).abs() < 1e-12);
        assert!(band_measure_bound(10.0, 1.0).unwrap() >= 20.0 + PI);
        assert!(band_measure_bound(1.0, 1.0).is_err());
    }

    #[test]
    fn nested_bound_examples() {
        let f = library::cosh_cube();
        let t = build_tiling(&f, 12.0, 24.0, default_sigma(&f)).unwrap();
        let s = t.locate(c(12.0 + 1e-9, 1e-9)).unwrap();
        let (c2, _) = distortion_constant_c2();
        let expect = 2.0 * c2 * c2 * (-0.5 * s.min_abs().powf(0.25)).exp() * s.area();
        assert!((nested_measure_bound(&s, 0.25) - expect).abs() <= 1e-12 * expect);
        let ratios: Vec<f64> = [12.0, 24.0, 48.0, 96.0]
            .iter()
            .map(|&r| {
                let t = build_tiling(&f, r, 2.0 * r, default_sigma(&f)).unwrap();
                let s = t.locate(c(r + 1e-9, 1e-9)).unwrap();
                nested_measure_bound(&s, 0.25) / s.area()
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn e2_budget_dominates_measured_tail() {
        let f = library::cosh_cube();
        let sets = ExceptionalSets::new(&f);
        let measured = sets.e2_measure(10.0, 80.0, 64, 512).unwrap();
        let budget = e2_tail_budget_log(&f, 10f64.ln()).exp() - e2_tail_budget_log(&f, 80f64.ln()).exp();
        assert!(measured <= budget, "{measured} > {budget}");
    }

    #[test]
    fn density_reports_on_axis() {
        let f = library::cosh_cube();
        let t = build_tiling(&f, 12.0, 24.0, default_sigma(&f)).unwrap();
        let s = t.locate(c(12.0 + 1e-9, 1e-9)).unwrap();
        let r = square_density_report(&f, &s, 0.25);
        assert!(r.density_upper_log.is_finite() && r.density_upper_log < 0.0);
        assert!(r.lipschitz_slack < 1.0);
        assert!((r.paper_bound - (-0.5 * s.min_abs().powf(0.25)).exp()).abs() < 1e-15);
        assert!((r.koebe_factor - 625.0 / 81.0).abs() < 1e-12);
        assert_eq!(r.csv_row().split(',').count(), DENSITY_CSV_HEADER.split(',').count());
        // a larger |f'| with everything else fixed lowers the bound
        let b1 = square_density_bound(&f, &s, 0.25, -50.0);
        let g = ExpPoly::from_json(
            r#"{"d":3,"terms":[{"Q":[[2,0]],"b":[1,0]},{"Q":[[2,0]],"b":[-1,0]}]}"#,
        )
        .unwrap();
        let b2 = square_density_bound(&g, &s, 0.25, -50.0);
        assert!(b2.min_abs_fprime_log > b1.min_abs_fprime_log);
        assert!(b2.density_upper_log < b1.density_upper_log);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn located_tiles_obey_bounds(r in 10.0f64..20.0, th in 0.0f64..(2.0 * PI)) {
            let f = library::cosh_cube();
            let t = build_tiling(&f, 10.0, 20.0, default_sigma(&f)).unwrap();
            let z = Complex64::from_polar(r, th);
            let tile = t.locate(z).unwrap();
            prop_assert!(tile.contains(z));
            prop_assert!(t.side_bounds_ok(&tile));
        }
    }
}
