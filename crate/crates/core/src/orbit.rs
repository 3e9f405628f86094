//! Orbit iteration and escape classification.
//!
//! A step `z_k -> z_{k+1}` is certified when `z_k` lies outside `E_1`,
//! `log|z_{k+1}| >= |z_k|^alpha`, and either `|z_k|` is past the escape
//! radius or `log|z_{k+1}|` exceeds the bail-out level (the image is no
//! longer representable). An orbit escapes with certificate after
//! `cert_steps` consecutive certified steps, or at a certified step whose
//! image overflows. For `d < 3` the exceptional sets are not defined and the
//! `E_1` condition is dropped.

use crate::error::{Error, Result};
use crate::exceptional::ExceptionalSets;
use crate::expoly::ExpPoly;
use crate::tower::{tower_compare, TowerMag};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::OnceLock;

pub const DEFAULT_ESCAPE_RADIUS: f64 = 50.0;
pub const DEFAULT_MAX_ITER: usize = 512;
pub const DEFAULT_CERT_STEPS: usize = 3;
pub const DEFAULT_BAIL_LOGMOD: f64 = 690.0;
/// `alpha` for `d < 3`, where `ν <= 0`.
pub const LOW_DEGREE_ALPHA: f64 = 0.25;
/// Orbit indices past `l` checked against the iterated maximum modulus.
pub const FAST_ESCAPE_HORIZON: usize = 8;
/// Circle sampling is used while `max|b| r^d` stays below this.
pub const SAMPLED_SWITCH: f64 = 1e3;
pub const BASE_NTHETA: usize = 65536;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyParams {
    pub alpha: f64,
    pub escape_radius: f64,
    pub max_iter: usize,
    pub cert_steps: usize,
    pub bail_logmod: f64,
}

impl ClassifyParams {
    /// Defaults with `alpha = ν/2`, or [`LOW_DEGREE_ALPHA`] when `d < 3`.
    pub fn for_function(f: &ExpPoly) -> Self {
        let alpha = if f.degree() >= 3 { f.nu() / 2.0 } else { LOW_DEGREE_ALPHA };
        ClassifyParams {
            alpha,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
            max_iter: DEFAULT_MAX_ITER,
            cert_steps: DEFAULT_CERT_STEPS,
            bail_logmod: DEFAULT_BAIL_LOGMOD,
        }
    }

    pub fn validate(&self, f: &ExpPoly) -> Result<()> {
        let upper = if f.degree() >= 3 { f.nu() } else { 1.0 };
        if !(self.alpha > 0.0 && self.alpha < upper) {
            return Err(Error::InvalidParam(format!("alpha = {} outside (0, {upper})", self.alpha)));
        }
        if !(self.escape_radius > 0.0 && self.escape_radius.is_finite()) {
            return Err(Error::InvalidParam(format!("escape radius {}", self.escape_radius)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParam("max_iter must be positive".into()));
        }
        if self.cert_steps < 2 {
            return Err(Error::InvalidParam("cert_steps must be at least 2".into()));
        }
        if !(self.bail_logmod > 0.0 && self.bail_logmod <= 709.0) {
            return Err(Error::InvalidParam(format!("bail_logmod {} outside (0, 709]", self.bail_logmod)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrbitTag {
    EscapeCertified,
    NonEscapeObserved,
    Undetermined,
}

impl OrbitTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrbitTag::EscapeCertified => "EscapeCertified",
            OrbitTag::NonEscapeObserved => "NonEscapeObserved",
            OrbitTag::Undetermined => "Undetermined",
        }
    }
}

/// One certified step: `|z_step| = modulus` and `log|z_{step+1}| = image_logmod`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepCertificate {
    pub step: usize,
    pub modulus: f64,
    pub image_logmod: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitClass {
    pub tag: OrbitTag,
    pub steps: usize,
    pub fast_escape: bool,
    /// `|z|` at the last representable orbit point.
    pub last_modulus: f64,
    pub last_sixsmith: Option<f64>,
    /// The certified run that produced `EscapeCertified`; empty otherwise.
    pub certificates: Vec<StepCertificate>,
}

impl OrbitClass {
    /// Re-checks `log|z_{k+1}| >= |z_k|^alpha` on the stored certificates.
    pub fn certificates_hold(&self, alpha: f64) -> bool {
        self.certificates.iter().all(|c| c.image_logmod >= c.modulus.powf(alpha))
    }
}

/// Orbit point; `z` is `None` once only `log|z|` and `arg z` are known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub step: usize,
    pub z: Option<Complex64>,
    pub logmod: f64,
    pub phase: f64,
}

struct Image {
    /// `+inf` when only `log_tower` is known.
    logmod: f64,
    phase: f64,
    value: Option<Complex64>,
    /// `log|f(z)|` when it is past `f64`.
    log_tower: Option<TowerMag>,
}

impl Image {
    fn magnitude(&self) -> TowerMag {
        match (self.value, self.log_tower) {
            (Some(v), _) => TowerMag::from_f64(v.norm()),
            (None, Some(t)) => t.exp(),
            (None, None) => TowerMag::from_log(self.logmod),
        }
    }
}

pub struct OrbitClassifier {
    f: ExpPoly,
    params: ClassifyParams,
    sets: Option<ExceptionalSets>,
    ladder: OnceLock<Option<Vec<TowerMag>>>,
}

impl OrbitClassifier {
    pub fn new(f: &ExpPoly, params: ClassifyParams) -> Result<Self> {
        params.validate(f)?;
        let sets = (f.degree() >= 3).then(|| ExceptionalSets::new(f));
        Ok(OrbitClassifier { f: f.clone(), params, sets, ladder: OnceLock::new() })
    }

    pub fn params(&self) -> &ClassifyParams {
        &self.params
    }

    pub fn function(&self) -> &ExpPoly {
        &self.f
    }

    pub fn classify(&self, z0: Complex64) -> OrbitClass {
        self.run(z0, None)
    }

    pub fn trace(&self, z0: Complex64) -> (Vec<TracePoint>, OrbitClass) {
        let mut points = Vec::new();
        let class = self.run(z0, Some(&mut points));
        (points, class)
    }

    fn image(&self, z: Complex64) -> Image {
        if let Ok(v) = self.f.eval_direct(z) {
            let m = v.norm();
            if m.is_finite() {
                let logmod = if m == 0.0 { f64::NEG_INFINITY } else { m.ln() };
                return Image { logmod, phase: v.arg(), value: Some(v), log_tower: None };
            }
        }
        match self.f.eval_log(z) {
            Ok(l) => {
                let value = (l.logmod() <= self.params.bail_logmod).then(|| l.to_complex());
                Image { logmod: l.logmod(), phase: l.phase(), value, log_tower: None }
            }
            Err(Error::ZeroValue) => Image {
                logmod: f64::NEG_INFINITY,
                phase: 0.0,
                value: Some(Complex64::new(0.0, 0.0)),
                log_tower: None,
            },
            Err(_) => Image { logmod: f64::INFINITY, phase: 0.0, value: None, log_tower: self.huge_log(z) },
        }
    }

    /// `log|f(z)|` when the exponents themselves overflow: with
    /// `W_j(z) = ŵ_j |z|^d`, the term with the largest `Re ŵ_j = μ > 0`
    /// gives `log|f(z)| = μ |z|^d` up to corrections far below `f64`
    /// resolution. `None` unless `μ` is clearly positive.
    fn huge_log(&self, z: Complex64) -> Option<TowerMag> {
        let mut best: Option<(f64, f64, f64)> = None;
        for j in 0..self.f.len() {
            let (w, ls) = self.f.exponent(j).eval_normalized(z);
            if best.is_none_or(|(mu, _, _)| w.re > mu) {
                best = Some((w.re, w.norm(), ls));
            }
        }
        let (mu, scale, ls) = best?;
        (mu > 1e-12 * scale && ls.is_finite()).then(|| TowerMag::from_log(ls + mu.ln()))
    }

    fn in_e1(&self, z: Complex64) -> bool {
        self.sets.as_ref().is_some_and(|s| s.contains(z, 1))
    }

    fn run(&self, z0: Complex64, mut trace: Option<&mut Vec<TracePoint>>) -> OrbitClass {
        let p = &self.params;
        let tail_start = p.max_iter / 2;
        let mut tail_bounded = true;
        let mut run: Vec<StepCertificate> = Vec::new();
        let mut mags: Vec<TowerMag> = vec![TowerMag::from_f64(z0.norm())];
        let mut z = z0;
        if let Some(t) = trace.as_deref_mut() {
            t.push(TracePoint { step: 0, z: Some(z), logmod: z.norm().ln(), phase: z.arg() });
        }
        let finish = |tag, steps, z: Complex64, run: Vec<StepCertificate>, mags: &[TowerMag]| {
            let fast_escape = tag == OrbitTag::EscapeCertified && self.fast_escape(mags);
            OrbitClass {
                tag,
                steps,
                fast_escape,
                last_modulus: z.norm(),
                last_sixsmith: sixsmith_quantity(&self.f, z).ok(),
                certificates: if tag == OrbitTag::EscapeCertified { run } else { Vec::new() },
            }
        };
        for k in 0..p.max_iter {
            let r = z.norm();
            let img = self.image(z);
            if img.logmod.is_nan() {
                return finish(OrbitTag::Undetermined, k + 1, z, run, &mags);
            }
            let overflow = img.logmod > p.bail_logmod;
            if img.logmod == f64::INFINITY && img.log_tower.is_none() {
                return finish(OrbitTag::Undetermined, k + 1, z, run, &mags);
            }
            let certified = (r >= p.escape_radius || overflow) && img.logmod >= r.powf(p.alpha) && !self.in_e1(z);
            if certified {
                run.push(StepCertificate { step: k, modulus: r, image_logmod: img.logmod });
            } else {
                run.clear();
            }
            mags.push(img.magnitude());
            if let Some(t) = trace.as_deref_mut() {
                t.push(TracePoint { step: k + 1, z: img.value, logmod: img.logmod, phase: img.phase });
            }
            if overflow || img.value.is_none() {
                let tag = if certified { OrbitTag::EscapeCertified } else { OrbitTag::Undetermined };
                return finish(tag, k + 1, z, run, &mags);
            }
            if run.len() >= p.cert_steps {
                let next = img.value.unwrap();
                return finish(OrbitTag::EscapeCertified, k + 1, next, run, &mags);
            }
            let next = img.value.unwrap();
            if k >= tail_start && next.norm() > p.escape_radius {
                tail_bounded = false;
            }
            if (next - z).norm() <= 1e-14 * (1.0 + z.norm()) {
                return finish(OrbitTag::NonEscapeObserved, k + 1, next, run, &mags);
            }
            z = next;
        }
        let tag = if tail_bounded { OrbitTag::NonEscapeObserved } else { OrbitTag::Undetermined };
        finish(tag, p.max_iter, z, run, &mags)
    }

    /// Extends the known orbit magnitudes by `E_alpha` and compares orbit
    /// index `l + i` with `M^i(escape_radius)` for `i = 0..=FAST_ESCAPE_HORIZON`,
    /// `l = cert_steps`. The ladder is an upper envelope.
    fn fast_escape(&self, mags: &[TowerMag]) -> bool {
        let ladder = self
            .ladder
            .get_or_init(|| iterate_max_modulus(&self.f, self.params.escape_radius, FAST_ESCAPE_HORIZON).ok());
        let Some(ladder) = ladder else {
            return false;
        };
        let l = self.params.cert_steps;
        let mut ext: Vec<TowerMag> = mags.to_vec();
        while ext.len() <= l + FAST_ESCAPE_HORIZON {
            let last = *ext.last().unwrap();
            ext.push(last.pow(self.params.alpha).exp());
        }
        (0..=FAST_ESCAPE_HORIZON.min(ladder.len() - 1))
            .all(|i| tower_compare(&ext[l + i], &ladder[i]) != Ordering::Less)
    }
}

/// Classifies one orbit; see the module docs for the certificate.
pub fn classify_orbit(f: &ExpPoly, z0: Complex64, p: ClassifyParams) -> Result<OrbitClass> {
    Ok(OrbitClassifier::new(f, p)?.classify(z0))
}

/// `|z f'(z) / f(z)|`, computed from the log-domain values.
pub fn sixsmith_quantity(f: &ExpPoly, z: Complex64) -> Result<f64> {
    let v = f.eval_log(z)?;
    match f.eval_deriv_log(z, 1) {
        Ok(d) => Ok(z.norm() * (d.logmod() - v.logmod()).exp()),
        Err(Error::ZeroValue) => Ok(0.0),
        Err(e) => Err(e),
    }
}

fn logaddexp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Bounds `(lo, hi)` for `log M(r, f)`. `lo` is the largest sampled
/// `log|f|` on `ntheta` equally spaced points. Every point of the circle
/// lies within arc length `π r / ntheta` of a sample, and `|f'|` is at most
/// `S = sum_j sup|Q_j' + Q_j W_j'| exp(|b_j| r^d + sup|P_j|)` there, so
/// `M <= e^lo + S π r / ntheta`.
pub fn log_max_modulus(f: &ExpPoly, r: f64, ntheta: usize) -> Result<(f64, f64)> {
    if !(r > 0.0 && r.is_finite()) || ntheta == 0 {
        return Err(Error::InvalidParam(format!("r = {r}, ntheta = {ntheta}")));
    }
    let mut lo = f64::NEG_INFINITY;
    for i in 0..ntheta {
        let z = Complex64::from_polar(r, 2.0 * PI * i as f64 / ntheta as f64);
        match f.eval_log(z) {
            Ok(l) => lo = lo.max(l.logmod()),
            Err(Error::ZeroValue) => {}
            Err(e) => return Err(e),
        }
    }
    let rd = r.powi(f.degree() as i32);
    let mut log_s = f64::NEG_INFINITY;
    for (j, t) in f.terms().iter().enumerate() {
        let pre = f.prefactor(j, 1).abs_bound(r);
        if pre > 0.0 {
            log_s = logaddexp(log_s, pre.ln() + t.b.norm() * rd + t.p.abs_bound(r));
        }
    }
    let hi = logaddexp(lo, log_s + (PI * r / ntheta as f64).ln());
    Ok((lo, hi))
}

/// Upper bound for `log M(r, f)` from the coefficients alone:
/// `ln N + max_j (ln sup|Q_j| + |b_j| r^d + sup|P_j|)`, returned as a tower
/// so that it survives `r^d` overflowing. Past depth 0 in `r` the correction
/// to `ln c + d ln r`, `c = max|b_j|`, is below `f64` resolution.
pub fn log_max_modulus_upper(f: &ExpPoly, r: TowerMag) -> TowerMag {
    let d = f.degree() as f64;
    let c = f.max_abs_b();
    let ln_n = (f.len() as f64).ln();
    let Some(rf) = r.to_f64() else {
        return r.pow(d).scale(c);
    };
    let rd = rf.powf(d);
    let direct = f
        .terms()
        .iter()
        .map(|t| t.q.abs_bound(rf).ln() + t.b.norm() * rd + t.p.abs_bound(rf))
        .fold(f64::NEG_INFINITY, f64::max)
        + ln_n;
    if direct.is_finite() {
        return TowerMag::from_f64(direct);
    }
    // ln(c r^d (1 + rho)) with rho bounding the lower-order terms; r > 1 here
    let lr = rf.ln();
    let rho = f
        .terms()
        .iter()
        .map(|t| {
            let p1: f64 = t.p.coeffs().iter().map(|x| x.norm()).sum();
            let q1: f64 = t.q.coeffs().iter().map(|x| x.norm()).sum();
            let lnq = (q1.ln() + t.q.degree().unwrap_or(0) as f64 * lr).max(0.0);
            p1 / rf + (lnq + ln_n) / rd
        })
        .fold(0.0, f64::max)
        / c;
    TowerMag::from_log(c.ln() + d * lr + rho.ln_1p())
}

/// `m_0 = R`, `m_{k+1} >= M(m_k, f)` for `k < n`: an upper envelope of the
/// iterated maximum modulus. Circle sampling with the bound of
/// [`log_max_modulus`] while `max|b| m_k^d <= SAMPLED_SWITCH`, the
/// coefficient bound of [`log_max_modulus_upper`] after.
pub fn iterate_max_modulus(f: &ExpPoly, r: f64, n: usize) -> Result<Vec<TowerMag>> {
    let (lo, _) = log_max_modulus(f, r, BASE_NTHETA)?;
    if !(lo > r.ln()) {
        return Err(Error::BadBase(r));
    }
    let c = f.max_abs_b();
    let d = f.degree() as i32;
    let mut out = vec![TowerMag::from_f64(r)];
    for _ in 0..n {
        let m = *out.last().unwrap();
        let log_m = match m.to_f64() {
            Some(x) if c * x.powi(d) <= SAMPLED_SWITCH => {
                let ntheta = BASE_NTHETA.max((64.0 * d as f64 * c * x.powi(d)).ceil() as usize);
                TowerMag::from_f64(log_max_modulus(f, x, ntheta)?.1)
            }
            _ => log_max_modulus_upper(f, m),
        };
        out.push(log_m.exp());
    }
    Ok(out)
}

pub const TRACE_CSV_HEADER: &str = "step,re,im,logmod,phase,class";

/// One row per orbit point; `re` and `im` are empty once the point is only
/// known through `logmod` and `phase`.
pub fn trace_csv(points: &[TracePoint], class: &OrbitClass) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for p in points {
        let (re, im) = match p.z {
            Some(z) => (z.re.to_string(), z.im.to_string()),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(out, "{},{},{},{},{},{}", p.step, re, im, p.logmod, p.phase, class.tag.as_str());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sin_cube_orbits() {
        let f = library::sin_z3();
        let p = ClassifyParams::for_function(&f);
        assert_eq!(p.alpha, 0.25);
        let k = OrbitClassifier::new(&f, p).unwrap();
        assert_eq!(k.classify(c(0.0, 0.0)).tag, OrbitTag::NonEscapeObserved);
        assert_eq!(k.classify(c(3.0, 0.0)).tag, OrbitTag::NonEscapeObserved);
        let o = k.classify(Complex64::from_polar(3.0, PI / 6.0));
        assert_eq!(o.tag, OrbitTag::EscapeCertified);
        assert!(o.fast_escape);
        assert!(o.certificates_hold(p.alpha));
        // |f(z0)| = sinh 27
        assert!((o.last_modulus - 27f64.sinh()).abs() < 1e-3 * 27f64.sinh());
    }

    #[test]
    fn params_validation() {
        let f = library::sin_z3();
        let mut p = ClassifyParams::for_function(&f);
        p.alpha = 0.5;
        assert!(p.validate(&f).is_err());
        p.alpha = 0.25;
        p.cert_steps = 1;
        assert!(p.validate(&f).is_err());
        let s = library::sin_z();
        assert!(ClassifyParams::for_function(&s).validate(&s).is_ok());
    }

    #[test]
    fn sixsmith_examples() {
        let e = library::exp_cube();
        assert!((sixsmith_quantity(&e, c(2.0, 0.0)).unwrap() - 24.0).abs() < 1e-12);
        let f = library::cosh_cube();
        let q = sixsmith_quantity(&f, c(2.0, 0.0)).unwrap();
        assert!((q - 24.0 * 8f64.tanh()).abs() < 1e-10);
        assert!(q >= 0.5 * 3.0 * 1.0 * 8.0);
        assert_eq!(sixsmith_quantity(&library::sin_z3(), c(0.0, 0.0)), Err(Error::ZeroValue));
    }

    #[test]
    fn max_modulus_examples() {
        let f = library::cosh_cube();
        let (lo, hi) = log_max_modulus(&f, 2.0, 4096).unwrap();
        let exact = 8.0 + (-16f64).exp().ln_1p();
        assert!((lo - exact).abs() < 1e-12);
        assert!(hi >= exact && hi < exact + 0.1);
        let (lo3, _) = log_max_modulus(&f, 3.0, 4096).unwrap();
        assert!(lo3 > hi);
        let (lo, _) = log_max_modulus(&library::exp_cube(), 1.7, 3000).unwrap();
        assert!((lo - 1.7f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn max_modulus_ladder() {
        let f = library::cosh_cube();
        let m = iterate_max_modulus(&f, 2.0, 3).unwrap();
        assert_eq!(m[1].depth(), 0);
        assert!((m[1].value().ln() - 8.0).abs() < 0.01);
        assert_eq!(m[2].depth(), 1);
        assert!((m[2].value() / 2.65e10 - 1.0).abs() < 0.03);
        assert!(m.windows(2).all(|w| tower_compare(&w[1], &w[0]) == Ordering::Greater));
        assert_eq!(iterate_max_modulus(&library::sin_z3(), 0.5, 2), Err(Error::BadBase(0.5)));
    }

    #[test]
    fn upper_bound_across_scales() {
        let f = library::example_h();
        let small = log_max_modulus_upper(&f, TowerMag::from_f64(10.0));
        let (lo, _) = log_max_modulus(&f, 10.0, 1 << 16).unwrap();
        assert!(small.value() >= lo);
        let big = log_max_modulus_upper(&f, TowerMag::from_f64(1e200));
        assert_eq!(big.depth(), 1);
        assert!((big.value() - 600.0 * 10f64.ln()).abs() < 1e-9);
        let deep = log_max_modulus_upper(&f, TowerMag::from_log(1e5));
        assert_eq!(deep, TowerMag::new(1, 3e5));
    }

    #[test]
    fn trace_has_rows() {
        let f = library::sin_z3();
        let k = OrbitClassifier::new(&f, ClassifyParams::for_function(&f)).unwrap();
        let (pts, class) = k.trace(Complex64::from_polar(3.0, PI / 6.0));
        let csv = trace_csv(&pts, &class);
        assert!(csv.starts_with(TRACE_CSV_HEADER));
        assert_eq!(csv.lines().count(), pts.len() + 1);
        assert!(csv.lines().last().unwrap().contains(",,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn odd_and_conjugate_symmetry(x in -4.0f64..4.0, y in -4.0f64..4.0) {
            let f = library::sin_z3();
            let k = OrbitClassifier::new(&f, ClassifyParams::for_function(&f)).unwrap();
            let a = k.classify(c(x, y)).tag;
            prop_assert_eq!(a, k.classify(c(-x, -y)).tag);
            prop_assert_eq!(a, k.classify(c(x, -y)).tag);
        }

        #[test]
        fn certificates_recheck(x in -6.0f64..6.0, y in -6.0f64..6.0) {
            let f = library::cosh_cube();
            let p = ClassifyParams::for_function(&f);
            let o = classify_orbit(&f, c(x, y), p).unwrap();
            if o.tag == OrbitTag::EscapeCertified {
                prop_assert!(!o.certificates.is_empty());
                prop_assert!(o.certificates_hold(p.alpha));
            }
            prop_assert!(!o.fast_escape || o.tag == OrbitTag::EscapeCertified);
        }

        #[test]
        fn max_modulus_brackets_fine_sampling(r in 0.5f64..2.5, n in 64usize..512) {
            let f = library::hemke();
            let (lo, hi) = log_max_modulus(&f, r, n).unwrap();
            let (fine, _) = log_max_modulus(&f, r, 4 * n).unwrap();
            prop_assert!(lo <= fine + 1e-12 && fine <= hi + 1e-12);
        }
    }
}
