//! Desk-scale invariant suites, one per module, sized to finish in seconds.

use crate::exceptional::ExceptionalSets;
use crate::expoly::ExpPoly;
use crate::grid::{self, build_tiling, default_sigma, GoodSquareTest};
use crate::hypotheses::{check_extra_condition, check_hypotheses, Verdict, DEFAULT_ANGLE_TOL, DEFAULT_EXTRA_TOL};
use crate::library;
use crate::measure::{self, annulus_samples, summarize};
use crate::orbit::{self, ClassifyParams, OrbitClassifier, OrbitTag};
use crate::raster::{render_classification, Palette, Viewport};
use crate::sampling::Uniform;
use crate::tower::{tower_compare, TowerMag};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(module: &'static str, name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome { module, name, passed, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("{status} {}::{} {}", self.module, self.name, self.detail)
    }
}

fn disk_point(u: &mut Uniform, radius: f64) -> Complex64 {
    let r = radius * u.next_f64().sqrt();
    Complex64::from_polar(r, 2.0 * PI * u.next_f64())
}

/// Fourth-order five-point difference along the real axis, `h = 1e-3`.
pub fn central_difference(f: &ExpPoly, z: Complex64) -> Option<Complex64> {
    let h = 1e-3;
    let at = |k: f64| f.eval_direct(z + k * h).ok();
    Some((8.0 * (at(1.0)? - at(-1.0)?) - (at(2.0)? - at(-2.0)?)) / (12.0 * h))
}

fn expoly_suite(seed: u64) -> Vec<CheckOutcome> {
    const M: &str = "expoly";
    let fns = [library::sin_z(), library::sin_z3(), library::example_h(), library::hemke(), library::cube_roots()];
    let mut u = Uniform::new(seed);

    let mut worst = 0.0f64;
    let mut worst_deriv = 0.0f64;
    for f in &fns {
        for _ in 0..200 {
            let z = disk_point(&mut u, 2.0);
            if let (Ok(direct), Ok(logv)) = (f.eval_direct(z), f.eval_log(z)) {
                if direct.norm() > 1e-100 {
                    worst = worst.max((logv.to_complex() - direct).norm() / direct.norm());
                }
            }
        }
        for _ in 0..100 {
            let z = disk_point(&mut u, 2.0);
            let Some(fd) = central_difference(f, z) else {
                continue;
            };
            if let Ok(exact) = f.eval_deriv_log(z, 1) {
                let exact = exact.to_complex();
                if exact.norm() > 1e-6 {
                    worst_deriv = worst_deriv.max((fd - exact).norm() / exact.norm());
                }
            }
        }
    }

    let f = library::cube_roots();
    let mut dominant_ok = true;
    for _ in 0..200 {
        let z = disk_point(&mut u, 30.0);
        dominant_ok &= f.dominant_index(z) == f.dominant_index(z);
    }

    let mut extra_sym = true;
    for g in &fns {
        let d = g.degree();
        for k in 0..g.len() {
            for l in 0..g.len() {
                let (tk, tl) = (&g.terms()[k], &g.terms()[l]);
                extra_sym &= check_extra_condition(&tk.p, tk.b, &tl.p, tl.b, d, DEFAULT_EXTRA_TOL)
                    == check_extra_condition(&tl.p, tl.b, &tk.p, tk.b, d, DEFAULT_EXTRA_TOL);
            }
        }
    }

    let strict = check_hypotheses(&library::cube_roots(), DEFAULT_ANGLE_TOL);
    let weak_ok = strict.verdict == Verdict::Theorem1_1
        && strict.d_ok
        && strict.arg_order_ok
        && strict.pi_gap_pairs.iter().all(|p| p.extra_condition_ok);

    vec![
        CheckOutcome::new(M, "log_round_trip", worst <= 1e-9, format!("max rel err {worst:.2e}")),
        CheckOutcome::new(M, "derivative_vs_fd", worst_deriv <= 1e-6, format!("max rel err {worst_deriv:.2e}")),
        CheckOutcome::new(M, "dominant_index_pure", dominant_ok, ""),
        CheckOutcome::new(M, "extra_condition_symmetric", extra_sym, ""),
        CheckOutcome::new(M, "strict_implies_weak", weak_ok, format!("{:?}", strict.verdict)),
    ]
}

fn exceptional_suite(seed: u64) -> Vec<CheckOutcome> {
    const M: &str = "exceptional";
    let f = library::cosh_cube();
    let sets = ExceptionalSets::new(&f);
    let mut u = Uniform::new(seed ^ 0x5e75);

    let (mut nested, mut conj) = (true, true);
    for _ in 0..5000 {
        let z = u.annulus_point(5.0, 200.0);
        if sets.contains(z, 1) {
            nested &= sets.contains(z, 2);
        }
        for level in [1, 2] {
            conj &= sets.contains(z, level) == sets.contains(z.conj(), level);
        }
    }

    let tail: Vec<f64> = [10.0, 20.0, 40.0]
        .iter()
        .map(|&r| sets.e2_measure(r, 2.0 * r, 32, 128).unwrap_or(f64::NAN))
        .collect();
    let tail_ok = tail.windows(2).all(|w| w[1] <= w[0]);

    let (mut tested, mut dist_ok) = (0, true);
    while tested < 40 {
        let z = u.annulus_point(50.0, 200.0);
        if sets.contains(z, 2) {
            continue;
        }
        tested += 1;
        match sets.dist_to_e1_lower(z) {
            Ok(lower) => dist_ok &= sets.dist_to_e1_measured(z, lower / 4.0, 4.0 * lower) >= lower,
            Err(_) => dist_ok = false,
        }
    }

    vec![
        CheckOutcome::new(M, "e1_inside_e2", nested, "5000 points"),
        CheckOutcome::new(M, "conjugation_invariant", conj, ""),
        CheckOutcome::new(M, "e2_tail_non_increasing", tail_ok, format!("{tail:.4?}")),
        CheckOutcome::new(M, "measured_distance_above_lower", dist_ok, format!("{tested} points")),
    ]
}

fn orbit_suite(seed: u64) -> Vec<CheckOutcome> {
    const M: &str = "orbit";
    let mut u = Uniform::new(seed ^ 0x0b17);

    let sample: Vec<TowerMag> = (0..60)
        .map(|_| TowerMag::new((u.next_f64() * 3.0) as u32, u.range(0.0, 1e3)))
        .collect();
    let mut order_ok = true;
    for a in &sample {
        for b in &sample {
            order_ok &= tower_compare(a, b) == tower_compare(b, a).reverse();
            for c in sample.iter().take(15) {
                if tower_compare(a, b).is_le() && tower_compare(b, c).is_le() {
                    order_ok &= tower_compare(a, c).is_le();
                }
            }
        }
    }
    for _ in 0..1000 {
        let (x, y) = (u.range(0.0, 1e6), u.range(0.0, 1e6));
        order_ok &= tower_compare(&TowerMag::from_f64(x), &TowerMag::from_f64(y)) == x.total_cmp(&y);
    }

    let f = library::sin_z3();
    let p = ClassifyParams::for_function(&f);
    let classifier = OrbitClassifier::new(&f, p).expect("default parameters are valid");
    let (mut sym_ok, mut cert_ok, mut escapes) = (true, true, 0);
    for _ in 0..300 {
        let z = disk_point(&mut u, 3.0);
        let c = classifier.classify(z);
        sym_ok &= classifier.classify(-z).tag == c.tag && classifier.classify(z.conj()).tag == c.tag;
        if c.tag == OrbitTag::EscapeCertified {
            escapes += 1;
            cert_ok &= !c.certificates.is_empty() && c.certificates_hold(p.alpha);
        }
    }

    let mut bracket_ok = true;
    for (g, r) in [(library::sin_z3(), 1.5), (library::cosh_cube(), 2.0), (library::example_h(), 2.5)] {
        let n = 4096;
        match (orbit::log_max_modulus(&g, r, n), orbit::log_max_modulus(&g, r, 4 * n)) {
            (Ok((lo, hi)), Ok((fine, _))) => bracket_ok &= lo <= fine && fine <= hi,
            _ => bracket_ok = false,
        }
    }

    vec![
        CheckOutcome::new(M, "tower_total_order", order_ok, ""),
        CheckOutcome::new(M, "classify_symmetries", sym_ok, "odd and conjugate, 300 points"),
        CheckOutcome::new(M, "certificates_recheck", cert_ok, format!("{escapes} escaping orbits")),
        CheckOutcome::new(M, "max_modulus_brackets", bracket_ok, ""),
    ]
}

fn grid_suite(seed: u64) -> Vec<CheckOutcome> {
    const M: &str = "grid";
    let f = library::cosh_cube();
    let sigma = default_sigma(&f);
    let tiling = match build_tiling(&f, 10.0, 20.0, sigma) {
        Ok(t) => t,
        Err(e) => return vec![CheckOutcome::new(M, "build", false, e.to_string())],
    };
    let good = GoodSquareTest::new(&f, sigma);
    let sets = good.sets();
    let mut u = Uniform::new(seed ^ 0x6e1d);

    let (mut cover, mut disjoint, mut bounds, mut sandwich) = (true, true, true, true);
    for _ in 0..2000 {
        let z = u.annulus_point(10.0, 20.0);
        let Some(tile) = tiling.locate(z) else {
            cover = false;
            continue;
        };
        cover &= tile.contains(z);
        bounds &= tiling.side_bounds_ok(&tile);
        let e = tile.side * 1e-3;
        let holders = tiling
            .tiles_in(z.re - e, z.re + e, z.im - e, z.im + e)
            .iter()
            .filter(|n| {
                let ((x0, x1), (y0, y1)) = (n.x_range(), n.y_range());
                z.re > x0 && z.re < x1 && z.im > y0 && z.im < y1
            })
            .count();
        disjoint &= holders <= 1;
        let kept = good.is_good(&tile);
        if !sets.contains(z, 2) {
            sandwich &= kept;
        }
        if kept {
            sandwich &= !sets.contains(z, 1);
        }
    }

    let mut trend = Vec::new();
    for r in [10.0, 15.0, 20.0, 30.0, 40.0] {
        let z = Complex64::new(r + 1e-9, 1e-9);
        let t = build_tiling(&f, r, 2.0 * r, sigma).ok().and_then(|t| t.locate(z));
        trend.push(t.map(|s| grid::square_density_report(&f, &s, 0.25).density_upper_log).unwrap_or(f64::NAN));
    }
    let trend_ok = trend.iter().all(|x| x.is_finite() && *x < 0.0) && trend.windows(2).all(|w| w[1] <= w[0]);

    let ratios: Vec<f64> = [12.0, 24.0, 48.0, 96.0]
        .iter()
        .map(|&r| {
            build_tiling(&f, r, 2.0 * r, sigma)
                .ok()
                .and_then(|t| t.locate(Complex64::new(r + 1e-9, 1e-9)))
                .map(|s| grid::nested_measure_bound(&s, 0.25) / s.area())
                .unwrap_or(f64::NAN)
        })
        .collect();
    let nested_ok = ratios.windows(2).all(|w| w[1] < w[0]);

    vec![
        CheckOutcome::new(M, "tiles_cover", cover, "2000 points"),
        CheckOutcome::new(M, "tiles_disjoint", disjoint, ""),
        CheckOutcome::new(M, "side_bounds", bounds, ""),
        CheckOutcome::new(M, "sandwich", sandwich, ""),
        CheckOutcome::new(M, "density_trend", trend_ok, format!("log bounds {trend:.1?}")),
        CheckOutcome::new(M, "nested_bound_decreasing", nested_ok, format!("{:?}", ratios.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>())),
    ]
}

fn measure_suite(seed: u64) -> Vec<CheckOutcome> {
    const M: &str = "measure";
    let f = library::sin_z3();
    let p = ClassifyParams::for_function(&f);
    let (a, b) = match (measure::annulus_scan(&f, 5.0, 2000, p, seed), measure::annulus_scan(&f, 5.0, 2000, p, seed)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return vec![CheckOutcome::new(M, "scan", false, e.to_string())],
    };
    let total = a.escape_fraction + a.nonescape_fraction + a.undetermined_fraction;

    let mut wedge_err = 0.0f64;
    for (r0, r_max) in [(100.0, 1e4), (20.0, 500.0), (1e3, 1e6)] {
        let exact = measure::b_measure_closed_form(r0, r_max).unwrap_or(f64::NAN);
        let quad = measure::b_measure_quadrature(r0, r_max, 4096);
        wedge_err = wedge_err.max((quad - exact).abs() / exact);
    }

    let sym_ok = match annulus_samples(&f, 5.0, 4000, p, seed) {
        Ok(samples) => {
            let (upper, lower): (Vec<_>, Vec<_>) = samples.into_iter().partition(|s| s.z.im >= 0.0);
            let (ru, rl) = (summarize(5.0, seed, &upper), summarize(5.0, seed, &lower));
            let (pu, pl) = (ru.nonescape_fraction, rl.nonescape_fraction);
            let pooled = (pu * upper.len() as f64 + pl * lower.len() as f64) / (upper.len() + lower.len()) as f64;
            let se = (pooled * (1.0 - pooled) * (1.0 / upper.len() as f64 + 1.0 / lower.len() as f64)).sqrt();
            (pu - pl).abs() <= 3.0 * se.max(1e-12)
        }
        Err(_) => false,
    };

    vec![
        CheckOutcome::new(M, "seeded_determinism", a == b, ""),
        CheckOutcome::new(M, "fractions_sum_to_one", (total - 1.0).abs() < 1e-12, format!("{total}")),
        CheckOutcome::new(M, "wedge_quadrature", wedge_err < 0.01, format!("max rel err {wedge_err:.2e}")),
        CheckOutcome::new(M, "conjugate_halves_agree", sym_ok, ""),
    ]
}

fn raster_suite() -> Vec<CheckOutcome> {
    const M: &str = "raster";
    let f = library::sin_z3();
    let v = Viewport::square(Complex64::new(0.0, 0.0), 4.0, 96);
    let p = ClassifyParams::for_function(&f);
    let (a, b) = match (
        render_classification(&f, &v, p, &Palette::default()),
        render_classification(&f, &v, p, &Palette::default()),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return vec![CheckOutcome::new(M, "render", false, e.to_string())],
    };
    vec![
        CheckOutcome::new(M, "deterministic", a == b, ""),
        CheckOutcome::new(M, "rotation_invariant", a == a.rotated_180(), ""),
        CheckOutcome::new(M, "mirror_invariant", a == a.flipped(), ""),
    ]
}

/// Runs every suite with randomness drawn from `seed`.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    let mut out = expoly_suite(seed);
    out.extend(exceptional_suite(seed));
    out.extend(orbit_suite(seed));
    out.extend(grid_suite(seed));
    out.extend(measure_suite(seed));
    out.extend(raster_suite());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        let failed: Vec<String> = run_all(0).iter().filter(|c| !c.passed).map(|c| c.line()).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }
}
