//! Decides whether an exponential polynomial satisfies the argument
//! conditions on the `b_j` that give a finite-measure complement of
//! `A(f) ∩ J(f)`.
//!
//! Sorted by `arg b_j` in `[0, 2π)`, the weak form asks every circular gap
//! between consecutive arguments to be at most `π`; gaps of exactly `π`
//! additionally need the polynomial condition checked by
//! [`check_extra_condition`]. The strict form asks every gap to be below `π`.

use crate::expoly::ExpPoly;
use crate::poly::Poly;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

pub const DEFAULT_ANGLE_TOL: f64 = 1e-9;
pub const DEFAULT_EXTRA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Strict gaps: all circular gaps below `π`.
    #[serde(rename = "Theorem1.1")]
    Theorem1_1,
    /// Weak gaps, with every `π`-gap pair passing the extra condition.
    #[serde(rename = "Theorem1.3")]
    Theorem1_3,
    Fails,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FailReason {
    RequiresD3,
    ArgumentOrder,
    ExtraCondition,
}

/// Two argument classes separated by exactly `π`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiGapPair {
    /// Term indices sharing the first argument.
    pub first: Vec<usize>,
    /// Term indices sharing the second argument.
    pub second: Vec<usize>,
    /// A witnessing `(k, l)` when the extra condition holds, otherwise the
    /// first members of each class.
    pub pair: (usize, usize),
    pub extra_condition_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub d_ok: bool,
    pub arg_order_ok: bool,
    pub strict_gaps: bool,
    /// `arg b_j` in `[0, 2π)`, in term order.
    pub args: Vec<f64>,
    /// Circular gaps between consecutive distinct arguments.
    pub gaps: Vec<f64>,
    pub pi_gap_pairs: Vec<PiGapPair>,
    pub verdict: Verdict,
    pub reason: Option<FailReason>,
}

impl HypothesisReport {
    pub fn extra_condition_ok(&self) -> Vec<bool> {
        self.pi_gap_pairs.iter().map(|p| p.extra_condition_ok).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn arg_2pi(b: Complex64) -> f64 {
    let a = b.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Checks the argument order and, for `π` gaps, the extra condition on the
/// `P_j`. Arguments within `angle_tol` of each other are equal, and gaps
/// within `angle_tol` of `π` count as exactly `π`.
pub fn check_hypotheses(f: &ExpPoly, angle_tol: f64) -> HypothesisReport {
    let d = f.degree();
    let args: Vec<f64> = f.terms().iter().map(|t| arg_2pi(t.b)).collect();

    let mut order: Vec<usize> = (0..args.len()).collect();
    order.sort_by(|&a, &b| args[a].total_cmp(&args[b]).then(a.cmp(&b)));

    // classes of equal argument, in increasing argument order
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &j in &order {
        match classes.last_mut() {
            Some(cls) if args[j] - args[cls[0]] <= angle_tol => cls.push(j),
            _ => classes.push(vec![j]),
        }
    }
    if classes.len() > 1 {
        let first = args[classes[0][0]];
        let last = args[classes[classes.len() - 1][0]];
        if first + 2.0 * PI - last <= angle_tol {
            let tail = classes.pop().unwrap();
            classes[0].extend(tail);
        }
    }

    let k = classes.len();
    let rep = |c: &Vec<usize>| args[c[0]];
    let gaps: Vec<f64> = (0..k)
        .map(|i| {
            if k == 1 {
                2.0 * PI
            } else if i + 1 < k {
                rep(&classes[i + 1]) - rep(&classes[i])
            } else {
                rep(&classes[0]) + 2.0 * PI - rep(&classes[i])
            }
        })
        .collect();

    let arg_order_ok = gaps.iter().all(|&g| g <= PI + angle_tol);
    let strict_gaps = gaps.iter().all(|&g| g < PI - angle_tol);

    let mut pi_gap_pairs: Vec<PiGapPair> = Vec::new();
    let mut seen: Vec<(usize, usize)> = Vec::new();
    for (i, &g) in gaps.iter().enumerate() {
        if (g - PI).abs() > angle_tol {
            continue;
        }
        let (a, b) = (i, (i + 1) % k);
        let key = (a.min(b), a.max(b));
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let (ca, cb) = (&classes[a], &classes[b]);
        let mut witness = None;
        if d >= 3 {
            'search: for &kk in ca {
                for &ll in cb {
                    let (tk, tl) = (&f.terms()[kk], &f.terms()[ll]);
                    if check_extra_condition(&tk.p, tk.b, &tl.p, tl.b, d, DEFAULT_EXTRA_TOL) {
                        witness = Some((kk, ll));
                        break 'search;
                    }
                }
            }
        }
        pi_gap_pairs.push(PiGapPair {
            first: ca.clone(),
            second: cb.clone(),
            pair: witness.unwrap_or((ca[0], cb[0])),
            extra_condition_ok: witness.is_some(),
        });
    }

    let d_ok = d >= 3;
    let (verdict, reason) = if !d_ok {
        (Verdict::Fails, Some(FailReason::RequiresD3))
    } else if !arg_order_ok {
        (Verdict::Fails, Some(FailReason::ArgumentOrder))
    } else if strict_gaps {
        (Verdict::Theorem1_1, None)
    } else if pi_gap_pairs.iter().all(|p| p.extra_condition_ok) {
        (Verdict::Theorem1_3, None)
    } else {
        (Verdict::Fails, Some(FailReason::ExtraCondition))
    };

    HypothesisReport { d_ok, arg_order_ok, strict_gaps, args, gaps, pi_gap_pairs, verdict, reason }
}

/// Whether `P_k = b_k g + g_k` and `P_l = b_l g + g_l` with `deg g <= d-1`
/// and `deg g_k, deg g_l <= d-3`. Degrees up to `d-3` of `g` can be moved
/// into `g_k, g_l`, so only the coefficients of degree `d-2` and `d-1`
/// constrain: `P_k[i] b_l = P_l[i] b_k` there, to relative tolerance `tol`.
pub fn check_extra_condition(pk: &Poly, bk: Complex64, pl: &Poly, bl: Complex64, d: u32, tol: f64) -> bool {
    let d = d as usize;
    [d.saturating_sub(2), d.saturating_sub(1)].iter().all(|&i| {
        let a = pk.coeff(i) * bl;
        let b = pl.coeff(i) * bk;
        (a - b).norm() <= tol * a.norm().max(b.norm())
    })
}
