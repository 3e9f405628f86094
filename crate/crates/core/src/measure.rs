//! Annulus scans of orbit classes, the wedge `B` on which the
//! two-term function `h(z) = e^{iz} sinh(z^3)` stays small, and the
//! aggregate comparison between finite and infinite non-escaping measure.
//!
//! `ann(r) = {r <= |z| <= 2r}` throughout.

use crate::error::{Error, Result};
use crate::exceptional::ExceptionalSets;
use crate::expoly::ExpPoly;
use crate::grid::annulus_tail_bound;
use crate::library;
use crate::orbit::{ClassifyParams, OrbitClassifier, OrbitTag};
use crate::sampling::{annulus_map, R2Sequence};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{E, PI};

pub const MIN_SCAN_SAMPLES: usize = 1000;

fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusReport {
    pub r: f64,
    pub samples: usize,
    pub seed: u64,
    pub escape_fraction: f64,
    pub nonescape_fraction: f64,
    pub undetermined_fraction: f64,
    pub fast_escape_fraction: f64,
    pub e2_fraction: f64,
    pub area: f64,
    /// Undetermined counted as non-escaping.
    pub nonescape_measure_worst: f64,
    pub nonescape_measure_best: f64,
    /// Binomial standard error of the worst-case fraction.
    pub std_error: f64,
}

pub const ANNULUS_CSV_HEADER: &str = "r,samples,seed,escape_fraction,nonescape_fraction,undetermined_fraction,fast_escape_fraction,e2_fraction,area,nonescape_measure_worst,nonescape_measure_best,std_error";

impl AnnulusReport {
    pub fn worst_fraction(&self) -> f64 {
        self.nonescape_fraction + self.undetermined_fraction
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.r,
            self.samples,
            self.seed,
            self.escape_fraction,
            self.nonescape_fraction,
            self.undetermined_fraction,
            self.fast_escape_fraction,
            self.e2_fraction,
            self.area,
            self.nonescape_measure_worst,
            self.nonescape_measure_best,
            self.std_error
        )
    }
}

/// One classified sample of an annulus scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSample {
    pub z: Complex64,
    pub tag: OrbitTag,
    pub fast_escape: bool,
    pub in_e2: bool,
}

/// Classifies `samples` points of `ann(r)` taken from the seeded R2
/// sequence mapped area-uniformly onto the annulus.
pub fn annulus_samples(f: &ExpPoly, r: f64, samples: usize, p: ClassifyParams, seed: u64) -> Result<Vec<ScanSample>> {
    if samples < MIN_SCAN_SAMPLES {
        return Err(Error::InvalidParam(format!("samples = {samples} below {MIN_SCAN_SAMPLES}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParam(format!("r = {r}")));
    }
    let classifier = OrbitClassifier::new(f, p)?;
    let sets = ExceptionalSets::new(f);
    let seq = R2Sequence::new(seed);
    Ok(map_indexed(samples, |i| {
        let (u, v) = seq.point(i as u64);
        let z = annulus_map(u, v, r, 2.0 * r);
        let o = classifier.classify(z);
        ScanSample { z, tag: o.tag, fast_escape: o.fast_escape, in_e2: sets.contains(z, 2) }
    }))
}

pub fn summarize(r: f64, seed: u64, samples: &[ScanSample]) -> AnnulusReport {
    let n = samples.len();
    let count = |pred: &dyn Fn(&ScanSample) -> bool| samples.iter().filter(|s| pred(s)).count() as f64 / n as f64;
    let escape_fraction = count(&|s| s.tag == OrbitTag::EscapeCertified);
    let nonescape_fraction = count(&|s| s.tag == OrbitTag::NonEscapeObserved);
    let undetermined_fraction = count(&|s| s.tag == OrbitTag::Undetermined);
    let area = 3.0 * PI * r * r;
    let worst = nonescape_fraction + undetermined_fraction;
    AnnulusReport {
        r,
        samples: n,
        seed,
        escape_fraction,
        nonescape_fraction,
        undetermined_fraction,
        fast_escape_fraction: count(&|s| s.fast_escape),
        e2_fraction: count(&|s| s.in_e2),
        area,
        nonescape_measure_worst: worst * area,
        nonescape_measure_best: nonescape_fraction * area,
        std_error: (worst * (1.0 - worst) / n as f64).sqrt(),
    }
}

pub fn annulus_scan(f: &ExpPoly, r: f64, samples: usize, p: ClassifyParams, seed: u64) -> Result<AnnulusReport> {
    Ok(summarize(r, seed, &annulus_samples(f, r, samples, p, seed)?))
}

/// `2 (ln ln R - ln ln r0)`, the area of `B ∩ {r0 <= |z| <= R}`.
pub fn b_measure_closed_form(r0: f64, r_max: f64) -> Result<f64> {
    if !(r0 > E) {
        return Err(Error::Domain(format!("r0 = {r0} must exceed e")));
    }
    if !(r_max >= r0) {
        return Err(Error::Domain(format!("R = {r_max} below r0 = {r0}")));
    }
    Ok(2.0 * (r_max.ln().ln() - r0.ln().ln()))
}

/// Angular width `2 / (r^2 ln r)` of `B` at radius `r`.
pub fn b_width(r: f64) -> f64 {
    2.0 / (r * r * r.ln())
}

/// Midpoint rule in `t = ln r` for `∫ width(r) r dr = ∫ width(r) r^2 dt`.
pub fn b_measure_quadrature(r0: f64, r_max: f64, n: usize) -> f64 {
    let (a, b) = (r0.ln(), r_max.ln());
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| {
            let r = (a + (i as f64 + 0.5) * h).exp();
            b_width(r) * r * r * h
        })
        .sum()
}

/// Area of `B ∩ ann(r)` for `B` starting at `r0`.
pub fn b_measure_in_annulus(r0: f64, r: f64) -> f64 {
    let lo = r.max(r0);
    if lo >= 2.0 * r {
        return 0.0;
    }
    b_measure_closed_form(r0, 2.0 * r).unwrap_or(0.0) - b_measure_closed_form(r0, lo).unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleParams {
    pub r0: f64,
    /// Radius of the disk around the superattracting fixed point 0.
    pub eps: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CounterexampleParams {
    fn default() -> Self {
        CounterexampleParams { r0: 100.0, eps: 0.1, samples: 10_000, seed: 0 }
    }
}

impl CounterexampleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > E) {
            return Err(Error::InvalidParam(format!("r0 = {} must exceed e", self.r0)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParam(format!("eps = {}", self.eps)));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParam("samples must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub r0: f64,
    pub r_max: f64,
    pub samples: usize,
    /// Largest `log|h(z)| + r/4` over the samples; at most 0 when the bound holds.
    pub max_excess: f64,
    pub violations: usize,
    /// Samples with `|h(z)| >= eps`.
    pub outside_eps: usize,
    pub quadrature: f64,
    pub closed_form: f64,
    pub relative_error: f64,
    pub nonescape_fraction: f64,
}

impl CounterexampleReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Point of `B` with `ln ln r` and the angular offset taken from `(u, v)`;
/// `ln ln r` uniform makes the points uniform in area.
pub fn b_point(r0: f64, r_max: f64, u: f64, v: f64) -> Complex64 {
    let (a, b) = (r0.ln().ln(), r_max.ln().ln());
    let r = (a + u * (b - a)).exp().exp();
    let theta = PI / 2.0 + (2.0 * v - 1.0) * b_width(r) / 2.0;
    Complex64::from_polar(r, theta)
}

/// Samples `B ∩ {r0 <= |z| <= R}` for `h`, checks `log|h| <= -r/4` at each
/// point (an exactly vanishing value passes), compares the wedge area with
/// its closed form, and classifies every sample.
pub fn counterexample_check(p: &CounterexampleParams, r_max: f64) -> Result<CounterexampleReport> {
    p.validate()?;
    let closed_form = b_measure_closed_form(p.r0, r_max)?;
    let h = library::example_h();
    let classifier = OrbitClassifier::new(&h, ClassifyParams::for_function(&h))?;
    let seq = R2Sequence::new(p.seed);
    let ln_eps = p.eps.ln();
    let rows = map_indexed(p.samples, |i| {
        let (u, v) = seq.point(i as u64);
        let z = b_point(p.r0, r_max, u, v);
        let logmod = match h.eval_log(z) {
            Ok(l) => l.logmod(),
            Err(_) => f64::NEG_INFINITY,
        };
        let tag = classifier.classify(z).tag;
        (logmod + z.norm() / 4.0, logmod < ln_eps, tag)
    });
    let max_excess = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let violations = rows.iter().filter(|r| r.0 > 0.0).count();
    let outside_eps = rows.iter().filter(|r| !r.1).count();
    let nonescape = rows.iter().filter(|r| r.2 == OrbitTag::NonEscapeObserved).count();
    let quadrature = b_measure_quadrature(p.r0, r_max, 4096);
    Ok(CounterexampleReport {
        r0: p.r0,
        r_max,
        samples: p.samples,
        max_excess,
        violations,
        outside_eps,
        quadrature,
        closed_form,
        relative_error: (quadrature - closed_form).abs() / closed_form,
        nonescape_fraction: nonescape as f64 / p.samples as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeadlineRow {
    pub report: AnnulusReport,
    /// Area of `B ∩ ann(r)` when a wedge is supplied.
    pub wedge_lower: Option<f64>,
    /// Sampled worst-case measure, raised to the wedge bound when larger.
    pub estimate_worst: f64,
    pub estimate_best: f64,
    pub cumulative_worst: f64,
    pub cumulative_best: f64,
    pub tail_bound: f64,
}

pub const HEADLINE_CSV_HEADER: &str =
    "r,nonescape_fraction,undetermined_fraction,wedge_lower,estimate_worst,estimate_best,cumulative_worst,cumulative_best,tail_bound";

impl HeadlineRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.report.r,
            self.report.nonescape_fraction,
            self.report.undetermined_fraction,
            self.wedge_lower.map_or(String::new(), |w| w.to_string()),
            self.estimate_worst,
            self.estimate_best,
            self.cumulative_worst,
            self.cumulative_best,
            self.tail_bound
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadlineOptions {
    pub samples: usize,
    pub seed: u64,
    /// `r0` of a wedge known to lie in the non-escaping set.
    pub wedge_r0: Option<f64>,
}

/// Annulus scans over `radii` with running totals of the estimated
/// non-escaping measure and the tail bound `exp(-r^alpha / 2^{2+alpha})`.
pub fn headline_summary(f: &ExpPoly, radii: &[f64], p: ClassifyParams, opts: HeadlineOptions) -> Result<Vec<HeadlineRow>> {
    let mut rows = Vec::with_capacity(radii.len());
    let (mut cw, mut cb) = (0.0, 0.0);
    for &r in radii {
        let report = annulus_scan(f, r, opts.samples, p, opts.seed)?;
        let wedge_lower = opts.wedge_r0.map(|r0| b_measure_in_annulus(r0, r));
        let w = wedge_lower.unwrap_or(0.0);
        let estimate_worst = report.nonescape_measure_worst.max(w);
        let estimate_best = report.nonescape_measure_best.max(w);
        cw += estimate_worst;
        cb += estimate_best;
        rows.push(HeadlineRow {
            tail_bound: annulus_tail_bound(r, p.alpha)?,
            report,
            wedge_lower,
            estimate_worst,
            estimate_best,
            cumulative_worst: cw,
            cumulative_best: cb,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let v = b_measure_closed_form(E * E, 8f64.exp()).unwrap();
        assert!((v - 2.0 * 4f64.ln()).abs() < 1e-12);
        assert!((b_measure_quadrature(E * E, 8f64.exp(), 4096) - v).abs() < 1e-6 * v);
        assert!(b_measure_closed_form(E * E, E * E * (1.0 + 1e-12)).unwrap() < 1e-10);
        assert!(b_measure_closed_form(2.0, 10.0).is_err());
        let r0 = 100.0;
        let vals: Vec<f64> = (3..8).map(|k| b_measure_closed_form(r0, 2f64.powi(1 << k)).unwrap()).collect();
        let steps: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(steps.iter().all(|s| (s - 2.0 * 2f64.ln()).abs() < 1e-9));
    }

    #[test]
    fn wedge_points_and_bound() {
        let h = library::example_h();
        // on the ray: |h| = e^{-r} |sin r^3|
        let z = Complex64::new(0.0, 100.0);
        assert!(h.eval_log(z).map_or(true, |l| l.logmod() <= -100.0 + 1e-9));
        let r = 100.0;
        let z = Complex64::from_polar(r, PI / 2.0 + 1.0 / (r * r * r.ln()));
        assert!(h.eval_log(z).unwrap().logmod() <= -25.0);
        let p = b_point(100.0, 1e4, 0.3, 0.0);
        let r = p.norm();
        assert!(((p.arg() - PI / 2.0).abs() - b_width(r) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn counterexample_small_run() {
        let p = CounterexampleParams { samples: 500, ..Default::default() };
        let rep = counterexample_check(&p, 1e4).unwrap();
        assert_eq!(rep.violations, 0);
        assert_eq!(rep.outside_eps, 0);
        assert!(rep.relative_error < 0.01);
        assert!(rep.nonescape_fraction >= 0.99);
    }

    #[test]
    fn scans_are_deterministic_and_conserve() {
        let f = library::sin_z3();
        let p = ClassifyParams::for_function(&f);
        let a = annulus_scan(&f, 5.0, 1000, p, 9).unwrap();
        let b = annulus_scan(&f, 5.0, 1000, p, 9).unwrap();
        assert_eq!(a, b);
        let total = a.escape_fraction + a.nonescape_fraction + a.undetermined_fraction;
        assert!((total - 1.0).abs() < 1e-12);
        assert!(annulus_scan(&f, 5.0, 10, p, 9).is_err());
    }

    #[test]
    fn conjugate_halves_agree() {
        let f = library::sin_z3();
        let p = ClassifyParams::for_function(&f);
        let s = annulus_samples(&f, 5.0, 20_000, p, 4).unwrap();
        let frac = |upper: bool| {
            let half: Vec<_> = s.iter().filter(|x| (x.z.im > 0.0) == upper).collect();
            let k = half.iter().filter(|x| x.tag != OrbitTag::EscapeCertified).count() as f64;
            (k / half.len() as f64, half.len() as f64)
        };
        let ((a, na), (b, nb)) = (frac(true), frac(false));
        let pooled = (a * na + b * nb) / (na + nb);
        let sigma = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
        assert!((a - b).abs() <= 3.0 * sigma + 1e-12, "{a} vs {b}");
    }

    #[test]
    fn headline_empty_and_wedge() {
        let h = library::example_h();
        let p = ClassifyParams::for_function(&h);
        let opts = HeadlineOptions { samples: 1000, seed: 0, wedge_r0: Some(100.0) };
        assert!(headline_summary(&h, &[], p, opts).unwrap().is_empty());
        let rows = headline_summary(&h, &[100.0, 200.0], p, opts).unwrap();
        for row in &rows {
            let r = row.report.r;
            let bound = 2.0 * ((2.0 * r).ln().ln() - r.ln().ln());
            assert!(row.estimate_best >= bound * (1.0 - 1e-2));
        }
        assert!(rows[1].cumulative_worst > rows[0].cumulative_worst);
    }

    /// Lower bound for the area of the preimage of `D(k pi, delta)` under `z^2`.
    fn square_preimage_lower(k: i64, delta: f64) -> f64 {
        PI * delta * delta / (2.0 * ((k.abs() as f64) * PI + delta))
    }

    /// The preimage area is the disk integral of `1 / (2|w|)`.
    fn square_preimage_area(k: i64, delta: f64) -> f64 {
        let (n_rho, n_phi) = (200, 400);
        let c = Complex64::new(k as f64 * PI, 0.0);
        let (d_rho, d_phi) = (delta / n_rho as f64, 2.0 * PI / n_phi as f64);
        let mut area = 0.0;
        for i in 0..n_rho {
            let rho = (i as f64 + 0.5) * d_rho;
            for j in 0..n_phi {
                let w = c + Complex64::from_polar(rho, (j as f64 + 0.5) * d_phi);
                area += rho * d_rho * d_phi / (2.0 * w.norm());
            }
        }
        area
    }

    #[test]
    fn square_basin_preimages_have_divergent_total_area() {
        let delta = 0.5;
        for k in [1, -1, 2, 5, 40] {
            let (exact, lower) = (square_preimage_area(k, delta), square_preimage_lower(k, delta));
            assert!(exact >= lower, "k = {k}: {exact} < {lower}");
            assert!(exact <= 1.2 * PI * delta * delta / (2.0 * ((k.abs() as f64) * PI - delta)));
        }
        // terms decay like 1/k, so partial sums keep growing by about ln 10 per decade
        let partial = |n: i64| (1..=n).map(|k| square_preimage_lower(k, delta)).sum::<f64>();
        let step = delta * delta / 2.0 * 10f64.ln();
        assert!(partial(10_000) - partial(1000) > 0.99 * step);
        assert!(partial(100_000) - partial(10_000) > 0.99 * step);
    }
}
