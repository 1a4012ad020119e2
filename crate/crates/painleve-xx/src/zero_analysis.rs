//! Location and classification of solution zeros.
//!
//! PII0 solutions cross zero with nonzero slope, so sign-change bisection
//! on s finds them. Second-order solutions touch zero quadratically and
//! never cross, so a sign change on S never fires at a genuine zero;
//! detection instead goes through minima of |S|, i.e. sign changes of
//! S_dot with |S| below tolerance at the crossing.

use serde::{Deserialize, Serialize};

use crate::integrator::{ModelTag, Trajectory};
use crate::ode_models::rhs_xxprime;
use crate::transforms::XxDense;

/// Classification of a located zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroClass {
    /// S touches zero from above: curvature strictly positive.
    IsolatedPositive,
    /// S touches zero from below: curvature strictly negative.
    IsolatedNegative,
    /// s crosses with nonzero slope (PII0 only).
    SignChange,
    /// Zero curvature / slope within tolerance: either the identically-zero
    /// solution nearby or unresolved accuracy. Never a legal isolated zero;
    /// the caller decides by re-running tighter.
    DegenerateFlagged,
}

/// Detection thresholds, each applied after scaling by the trajectory
/// magnitude max(1, sup |S|).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroTols {
    pub tol_zero: f64,
    pub tol_deriv: f64,
    pub tol_class: f64,
}

impl Default for ZeroTols {
    fn default() -> Self {
        Self { tol_zero: 1e-9, tol_deriv: 1e-7, tol_class: 1e-6 }
    }
}

/// A located zero with measured derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroEvent {
    pub location: f64,
    pub model: ModelTag,
    /// |S(a)| (or |s(a)|) as measured on dense output.
    pub value_abs: f64,
    /// |S_dot(a)| as measured; tiny at genuine second-order zeros.
    pub deriv_abs: f64,
    /// S_ddot(a) estimate for second-order-type zeros.
    pub second_derivative: Option<f64>,
    /// s_dot(a) estimate for PII0-type zeros.
    pub first_derivative: Option<f64>,
    pub classification: ZeroClass,
}

impl ZeroEvent {
    /// Curvature at the zero; 0.0 when not applicable.
    pub fn curvature(&self) -> f64 {
        self.second_derivative.unwrap_or(0.0)
    }
}

/// Classify a second-order-type zero by the sign of its curvature.
pub fn classify_zero(event: &ZeroEvent, tol_class: f64) -> ZeroClass {
    match event.model {
        ModelTag::Pii0 => {
            let slope = event.first_derivative.unwrap_or(0.0);
            if slope.abs() > tol_class {
                ZeroClass::SignChange
            } else {
                ZeroClass::DegenerateFlagged
            }
        }
        ModelTag::Xx | ModelTag::XxPrime => {
            let c = event.curvature();
            if c > tol_class {
                ZeroClass::IsolatedPositive
            } else if c < -tol_class {
                ZeroClass::IsolatedNegative
            } else {
                ZeroClass::DegenerateFlagged
            }
        }
    }
}

/// Locate zeros of a trajectory, dispatching on its model.
pub fn locate_zeros(traj: &Trajectory, tols: &ZeroTols) -> Vec<ZeroEvent> {
    match traj.model.tag() {
        ModelTag::Pii0 => locate_zeros_pii0(traj, tols),
        ModelTag::Xx | ModelTag::XxPrime => locate_zeros_xx(traj, tols),
    }
}

fn scan_grid(span: (f64, f64), n: usize) -> Vec<f64> {
    let (a, b) = span;
    (0..=n).map(|i| a + (b - a) * (i as f64) / (n as f64)).collect()
}

fn bisect_scalar(mut lo: f64, mut hi: f64, mut g_lo: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= 1e-13 * 1.0_f64.max(mid.abs()) || mid == lo || mid == hi {
            return mid;
        }
        let g_mid = f(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if g_lo * g_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            g_lo = g_mid;
        }
    }
}

fn locate_zeros_pii0(traj: &Trajectory, tols: &ZeroTols) -> Vec<ZeroEvent> {
    let grid = scan_grid((traj.t_start, traj.t_end), 1024.max(4 * traj.nodes.len()));
    let vals: Vec<f64> = grid.iter().map(|&t| traj.evaluate_dense(t).map(|y| y[0]).unwrap_or(f64::NAN)).collect();
    let scale = vals.iter().fold(1.0_f64, |m, v| m.max(v.abs()));

    if vals.iter().all(|v| v.abs() <= tols.tol_zero * scale) {
        let mid = 0.5 * (traj.t_start + traj.t_end);
        return vec![ZeroEvent {
            location: mid,
            model: ModelTag::Pii0,
            value_abs: vals.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            deriv_abs: 0.0,
            second_derivative: None,
            first_derivative: Some(0.0),
            classification: ZeroClass::DegenerateFlagged,
        }];
    }

    let eval_s = |t: f64| traj.evaluate_dense(t).map(|y| y[0]).unwrap_or(f64::NAN);
    let mut out = Vec::new();
    for w in 0..grid.len() - 1 {
        let (g0, g1) = (vals[w], vals[w + 1]);
        if g0 == 0.0 || g0 * g1 >= 0.0 {
            continue;
        }
        let a = bisect_scalar(grid[w], grid[w + 1], g0, &eval_s);
        let y = match traj.evaluate_dense(a) {
            Ok(y) => y,
            Err(_) => continue,
        };
        let mut ev = ZeroEvent {
            location: a,
            model: ModelTag::Pii0,
            value_abs: y[0].abs(),
            deriv_abs: y[1].abs(),
            second_derivative: None,
            first_derivative: Some(y[1]),
            classification: ZeroClass::DegenerateFlagged,
        };
        ev.classification = classify_zero(&ev, tols.tol_deriv * scale);
        out.push(ev);
    }
    out
}

/// Locate zeros on any dense second-order path (trajectory or squared view).
///
/// Candidates are minima of |S| found through sign changes of S_dot; a
/// candidate is a zero when |S| at the located point is below
/// tol_zero * scale.
pub fn locate_zeros_xx(path: &dyn XxDense, tols: &ZeroTols) -> Vec<ZeroEvent> {
    let span = path.span();
    let grid = scan_grid(span, 2048);
    let states: Vec<_> = grid
        .iter()
        .map(|&t| path.xxprime_at(t).ok())
        .collect();
    let scale = states
        .iter()
        .flatten()
        .fold(1.0_f64, |m, st| m.max(st.s.abs()));

    if states.iter().flatten().all(|st| st.s.abs() <= tols.tol_zero * scale) {
        let mid = 0.5 * (span.0 + span.1);
        return vec![ZeroEvent {
            location: mid,
            model: ModelTag::XxPrime,
            value_abs: states.iter().flatten().fold(0.0_f64, |m, st| m.max(st.s.abs())),
            deriv_abs: 0.0,
            second_derivative: Some(0.0),
            first_derivative: None,
            classification: ZeroClass::DegenerateFlagged,
        }];
    }

    let eval_sdot = |t: f64| path.xxprime_at(t).map(|st| st.s_dot).unwrap_or(f64::NAN);
    let mut out = Vec::new();
    for w in 0..grid.len() - 1 {
        let (Some(st0), Some(st1)) = (&states[w], &states[w + 1]) else { continue };
        let (g0, g1) = (st0.s_dot, st1.s_dot);
        if g0 == 0.0 || g0 * g1 >= 0.0 {
            continue;
        }
        let a = bisect_scalar(grid[w], grid[w + 1], g0, &eval_sdot);
        let Ok(st) = path.xxprime_at(a) else { continue };
        if st.s.abs() > tols.tol_zero * scale {
            continue; // interior extremum of S away from zero
        }
        let mut ev = ZeroEvent {
            location: a,
            model: ModelTag::XxPrime,
            value_abs: st.s.abs(),
            deriv_abs: st.s_dot.abs(),
            second_derivative: Some(st.s_ddot),
            first_derivative: None,
            classification: ZeroClass::DegenerateFlagged,
        };
        ev.classification = classify_zero(&ev, tols.tol_class * scale);
        out.push(ev);
    }
    out
}

/// Estimate of the third derivative at a zero via the third-order right
/// side; vanishes at genuine zeros together with S and S_dot.
pub fn third_derivative_at(path: &dyn XxDense, event: &ZeroEvent) -> Option<f64> {
    let st = path.xxprime_at(event.location).ok()?;
    let (_, _, s_dddot) = rhs_xxprime(st).ok()?;
    Some(s_dddot)
}

/// Result of the flank sign scan around located zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignScanReport {
    pub ok: bool,
    /// Gap (t_left, t_right) where the sign was inconsistent, when any.
    pub offending_gap: Option<(f64, f64)>,
}

/// Check that sign(S) is constant per gap between consecutive zeros and
/// equal across each zero, on 64 dense samples per gap. Samples inside the
/// zero-tolerance band carry no sign vote.
pub fn check_no_sign_change(
    path: &dyn XxDense,
    events: &[ZeroEvent],
    tols: &ZeroTols,
) -> SignScanReport {
    let span = path.span();
    let mut bounds = vec![span.0];
    let mut locs: Vec<f64> = events.iter().map(|e| e.location).collect();
    locs.sort_by(|a, b| {
        if span.0 <= span.1 { a.partial_cmp(b).unwrap() } else { b.partial_cmp(a).unwrap() }
    });
    bounds.extend(locs);
    bounds.push(span.1);

    let scale = {
        let grid = scan_grid(span, 256);
        grid.iter()
            .filter_map(|&t| path.xxprime_at(t).ok())
            .fold(1.0_f64, |m, st| m.max(st.s.abs()))
    };
    let band = tols.tol_zero * scale;

    let mut prev_sign: Option<f64> = None;
    for gap in bounds.windows(2) {
        let (g0, g1) = (gap[0], gap[1]);
        if g0 == g1 {
            continue;
        }
        let mut gap_sign: Option<f64> = None;
        for i in 0..64 {
            let t = g0 + (g1 - g0) * ((i as f64) + 0.5) / 64.0;
            let Ok(st) = path.xxprime_at(t) else { continue };
            if st.s.abs() <= band {
                continue;
            }
            let sg = st.s.signum();
            match gap_sign {
                None => gap_sign = Some(sg),
                Some(prev) if prev != sg => {
                    return SignScanReport { ok: false, offending_gap: Some((g0, g1)) };
                }
                _ => {}
            }
        }
        if let (Some(prev), Some(cur)) = (prev_sign, gap_sign) {
            if prev != cur {
                return SignScanReport { ok: false, offending_gap: Some((g0, g1)) };
            }
        }
        if gap_sign.is_some() {
            prev_sign = gap_sign;
        }
    }
    SignScanReport { ok: true, offending_gap: None }
}
