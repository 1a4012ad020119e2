//! Executable checks of the zero-structure and transform theorems over a
//! fixed fixture set, emitting machine-readable reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, Model, StepStats, ToleranceConfig, Trajectory};
use crate::ode_models::{
    invariant_c, invariant_c_scale, lift_xx_to_xxprime, rhs_pii0, Pii0State, XxPrimeState, XxState,
};
use crate::par::{self, Parallelism};
use crate::transforms::{
    sqrt_negative, sqrt_positive, sqrt_signed, square_state, SquaredView, XxDense,
};
use crate::zero_analysis::{check_no_sign_change, locate_zeros_xx, ZeroClass, ZeroEvent, ZeroTols};

/// Second-order initial data (t0, S, S_dot) for the lifted fixture runs,
/// with the span each one is integrated over. Spans are chosen desk-scale
/// and confirmed blow-up-free; (0, 1, 2) escapes in finite time going
/// forward, so its span runs backward.
#[allow(clippy::type_complexity)]
pub const XXPRIME_FIXTURES: [((f64, f64, f64), (f64, f64)); 4] = [
    ((0.0, 1.0, 0.0), (0.0, 1.0)),
    ((0.0, 1.0, 2.0), (0.0, -1.0)),
    ((-1.0, 0.5, -1.0), (-1.0, 0.0)),
    ((0.0, -1.0, 0.0), (0.0, 1.0)),
];

/// PII0 state at t = -1 on the solution through s(0) = 0, s_dot(0) = 1,
/// frozen from the fixed-step oracle protocol.
pub const PII0_CENTRAL_AT_MINUS_ONE: (f64, f64) = (-1.016228606510028, 1.169503299924042);

/// Build one lifted third-order fixture trajectory.
pub fn xxprime_fixture(index: usize, tol: &ToleranceConfig) -> Result<Trajectory> {
    let ((t0, s, s_dot), span) = XXPRIME_FIXTURES
        .get(index)
        .copied()
        .ok_or_else(|| Error::Usage(format!("no fixture {index}")))?;
    let lifted = lift_xx_to_xxprime(XxState::new(t0, s, s_dot), None)?;
    let out = integrate(Model::XxPrime, [lifted.s, lifted.s_dot, lifted.s_ddot], span, tol, &[])
        .map_err(|e| Error::Usage(format!("fixture {index} failed to integrate: {e}")))?;
    Ok(out.trajectory)
}

/// The PII0 run through s(0) = 0, s_dot(0) = 1 on (-1, 1); its square is
/// the canonical zero-touching second-order path.
pub fn pii0_central_fixture(tol: &ToleranceConfig) -> Result<Trajectory> {
    let (s, s_dot) = PII0_CENTRAL_AT_MINUS_ONE;
    let out = integrate(Model::Pii0, [s, s_dot, 0.0], (-1.0, 1.0), tol, &[])
        .map_err(|e| Error::Usage(format!("central fixture failed to integrate: {e}")))?;
    Ok(out.trajectory)
}

/// Strictly positive third-order run (fixture 0).
pub fn positive_fixture(tol: &ToleranceConfig) -> Result<Trajectory> {
    xxprime_fixture(0, tol)
}

/// Strictly negative third-order run (fixture 3).
pub fn negative_fixture(tol: &ToleranceConfig) -> Result<Trajectory> {
    xxprime_fixture(3, tol)
}

/// Sup-norm residual of a uniformly sampled PII0 path against the PII0
/// equation, using second differences of s, normalized by max(1, sup|rhs|).
pub fn residual_pii0(samples: &[Pii0State]) -> Result<f64> {
    if samples.len() < 8 {
        return Err(Error::Usage("residual needs at least 8 samples".into()));
    }
    let h = samples[1].t - samples[0].t;
    let mut sup_res: f64 = 0.0;
    let mut sup_rhs: f64 = 1.0;
    for w in samples.windows(3) {
        let [l, m, r] = w else { unreachable!() };
        let second_diff = (l.s - 2.0 * m.s + r.s) / (h * h);
        let (_, rhs) = rhs_pii0(*m)?;
        sup_res = sup_res.max((second_diff - rhs).abs());
        sup_rhs = sup_rhs.max(rhs.abs());
    }
    Ok(sup_res / sup_rhs)
}

/// Sup-norm residual of a uniformly sampled third-order path: stored
/// curvature against the central difference of S_dot, normalized.
pub fn residual_xxprime(samples: &[XxPrimeState]) -> Result<f64> {
    if samples.len() < 8 {
        return Err(Error::Usage("residual needs at least 8 samples".into()));
    }
    let h = samples[1].t - samples[0].t;
    let mut sup_res: f64 = 0.0;
    let mut sup_rhs: f64 = 1.0;
    for w in samples.windows(3) {
        let [l, m, r] = w else { unreachable!() };
        let diff = (r.s_dot - l.s_dot) / (2.0 * h);
        sup_res = sup_res.max((diff - m.s_ddot).abs());
        sup_rhs = sup_rhs.max(m.s_ddot.abs());
    }
    Ok(sup_res / sup_rhs)
}

/// One theorem check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    pub theorem: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Report for one suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub rtol: f64,
    pub atol: f64,
    pub cases: Vec<CaseResult>,
    pub stats: StepStats,
    pub overall: bool,
}

struct CaseOutcome {
    measured: f64,
    threshold: f64,
    pass: bool,
    stats: StepStats,
}

impl CaseOutcome {
    fn bound(measured: f64, threshold: f64, stats: StepStats) -> Self {
        Self { measured, threshold, pass: measured.is_finite() && measured <= threshold, stats }
    }

    fn flag(pass: bool, stats: StepStats) -> Self {
        Self { measured: if pass { 1.0 } else { 0.0 }, threshold: 1.0, pass, stats }
    }

    fn failed(msg: &str) -> Self {
        let _ = msg;
        Self { measured: f64::NAN, threshold: 0.0, pass: false, stats: StepStats::default() }
    }
}

type CaseFn = Box<dyn Fn(&ToleranceConfig) -> CaseOutcome + Sync + Send>;

fn case(id: &str, theorem: &str, f: CaseFn) -> (String, String, CaseFn) {
    (id.to_string(), theorem.to_string(), f)
}

fn drift_case(index: usize) -> CaseOutcome {
    let tol = ToleranceConfig::default();
    let traj = match xxprime_fixture(index, &tol) {
        Ok(t) => t,
        Err(_) => return CaseOutcome::failed("fixture"),
    };
    let mut worst: f64 = 0.0;
    for t in traj.sample_times(100) {
        let Ok(st) = traj.xxprime_state_at(t) else {
            return CaseOutcome::failed("dense");
        };
        let c = invariant_c(st).unwrap_or(f64::NAN);
        worst = worst.max(c.abs() / invariant_c_scale(st));
    }
    CaseOutcome::bound(worst, 1e-8, traj.stats)
}

fn conservation_cases() -> Vec<(String, String, CaseFn)> {
    (0..XXPRIME_FIXTURES.len())
        .map(|i| {
            case(
                &format!("conservation-fixture-{i}"),
                "conservation",
                Box::new(move |_| drift_case(i)),
            )
        })
        .collect()
}

fn located_central_zero(view: &SquaredView<'_>) -> Option<ZeroEvent> {
    let events = locate_zeros_xx(view, &ZeroTols::default());
    if events.len() == 1 {
        Some(events[0])
    } else {
        None
    }
}

fn theorems_cases() -> Vec<(String, String, CaseFn)> {
    vec![
        // solutions of the second-order equation satisfy the third-order one
        case(
            "xxp-consistency",
            "X'",
            Box::new(|tol| {
                let init = XxState::new(0.0, 1.0, 0.0);
                let second = match integrate(Model::xx_default(), [1.0, 0.0, 0.0], (0.0, 0.5), tol, &[])
                {
                    Ok(o) => o.trajectory,
                    Err(_) => return CaseOutcome::failed("xx run"),
                };
                let lifted = lift_xx_to_xxprime(init, None).unwrap();
                let third = match integrate(
                    Model::XxPrime,
                    [lifted.s, lifted.s_dot, lifted.s_ddot],
                    (0.0, 0.5),
                    tol,
                    &[],
                ) {
                    Ok(o) => o.trajectory,
                    Err(_) => return CaseOutcome::failed("xxprime run"),
                };
                let mut worst: f64 = 0.0;
                for t in second.sample_times(50) {
                    let (Ok(a), Ok(b)) = (second.evaluate_dense(t), third.evaluate_dense(t)) else {
                        return CaseOutcome::failed("dense");
                    };
                    worst = worst.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs());
                }
                let mut stats = second.stats;
                stats.accepted += third.stats.accepted;
                stats.rejected += third.stats.rejected;
                stats.rhs_evals += third.stats.rhs_evals;
                CaseOutcome::bound(worst, 1e-7, stats)
            }),
        ),
        case(
            "ne-isolated-zero-curvature",
            "ne",
            Box::new(|tol| {
                let Ok(traj) = pii0_central_fixture(tol) else {
                    return CaseOutcome::failed("fixture");
                };
                let view = SquaredView::new(&traj).unwrap();
                let Some(ev) = located_central_zero(&view) else {
                    return CaseOutcome::failed("zero count");
                };
                let pass = ev.deriv_abs <= 1e-7
                    && ev.curvature().abs() >= 1e-6
                    && ev.classification == ZeroClass::IsolatedPositive;
                CaseOutcome { measured: ev.deriv_abs, threshold: 1e-7, pass, stats: traj.stats }
            }),
        ),
        case(
            "nozero-square-direction",
            "nozero",
            Box::new(|tol| {
                // nowhere-zero PII0 run; its square must sit on C = 0
                let Ok(out) = integrate(Model::Pii0, [0.5, 0.0, 0.0], (0.0, 1.0), tol, &[]) else {
                    return CaseOutcome::failed("pii0 run");
                };
                let traj = out.trajectory;
                let mut worst: f64 = 0.0;
                for t in traj.sample_times(100) {
                    let Ok(p) = traj.pii0_state_at(t) else { return CaseOutcome::failed("dense") };
                    let sq = square_state(p).unwrap();
                    worst = worst.max(invariant_c(sq).unwrap().abs());
                }
                CaseOutcome::bound(worst, 1e-9, traj.stats)
            }),
        ),
        case(
            "nozero-root-direction",
            "nozero",
            Box::new(|tol| {
                let Ok(traj) = positive_fixture(tol) else { return CaseOutcome::failed("fixture") };
                let Ok(path) = sqrt_positive(&traj, 2001) else {
                    return CaseOutcome::failed("sqrt");
                };
                match residual_pii0(&path) {
                    Ok(r) => CaseOutcome::bound(r, 1e-4, traj.stats),
                    Err(_) => CaseOutcome::failed("residual"),
                }
            }),
        ),
        case(
            "square-invariant-at-zero",
            "square",
            Box::new(|tol| {
                let Ok(traj) = pii0_central_fixture(tol) else {
                    return CaseOutcome::failed("fixture");
                };
                let view = SquaredView::new(&traj).unwrap();
                let Some(ev) = located_central_zero(&view) else {
                    return CaseOutcome::failed("zero count");
                };
                let mut worst: f64 = 0.0;
                let mut times = traj.sample_times(200);
                times.push(ev.location);
                for t in times {
                    let Ok(st) = view.xxprime_at(t) else { return CaseOutcome::failed("dense") };
                    worst = worst.max(invariant_c(st).unwrap().abs());
                }
                CaseOutcome::bound(worst, 1e-9, traj.stats)
            }),
        ),
        case(
            "square-curvature-is-twice-slope-squared",
            "square",
            Box::new(|tol| {
                let Ok(traj) = pii0_central_fixture(tol) else {
                    return CaseOutcome::failed("fixture");
                };
                let view = SquaredView::new(&traj).unwrap();
                let Some(ev) = located_central_zero(&view) else {
                    return CaseOutcome::failed("zero count");
                };
                let Ok(p) = traj.pii0_state_at(ev.location) else {
                    return CaseOutcome::failed("dense");
                };
                let expected = 2.0 * p.s_dot * p.s_dot;
                let rel = (ev.curvature() - expected).abs() / expected.abs().max(1.0);
                CaseOutcome::bound(rel, 1e-5, traj.stats)
            }),
        ),
        case(
            "notroot-positive-root-rejected",
            "notroot",
            Box::new(|tol| {
                let Ok(traj) = pii0_central_fixture(tol) else {
                    return CaseOutcome::failed("fixture");
                };
                let view = SquaredView::new(&traj).unwrap();
                let fired = matches!(
                    sqrt_positive(&view, 1001),
                    Err(Error::BranchViolation { .. })
                );
                CaseOutcome::flag(fired, traj.stats)
            }),
        ),
        case(
            "root-roundtrip",
            "root",
            Box::new(|tol| {
                let Ok(traj) = pii0_central_fixture(tol) else {
                    return CaseOutcome::failed("fixture");
                };
                let view = SquaredView::new(&traj).unwrap();
                let Some(ev) = located_central_zero(&view) else {
                    return CaseOutcome::failed("zero count");
                };
                let Ok(path) = sqrt_signed(&view, &ev, 1001, false) else {
                    return CaseOutcome::failed("sqrt_signed");
                };
                let mut worst: f64 = 0.0;
                for p in &path {
                    let Ok(orig) = traj.pii0_state_at(p.t) else {
                        return CaseOutcome::failed("dense");
                    };
                    worst = worst.max((p.s - orig.s).abs());
                }
                CaseOutcome::bound(worst, 1e-7, traj.stats)
            }),
        ),
        case(
            "root-slope-at-zero",
            "root",
            Box::new(|tol| {
                let Ok(traj) = pii0_central_fixture(tol) else {
                    return CaseOutcome::failed("fixture");
                };
                let view = SquaredView::new(&traj).unwrap();
                let Some(ev) = located_central_zero(&view) else {
                    return CaseOutcome::failed("zero count");
                };
                let Ok(path) = sqrt_signed(&view, &ev, 101, false) else {
                    return CaseOutcome::failed("sqrt_signed");
                };
                let Some(at_zero) = path.iter().find(|p| p.t == ev.location) else {
                    return CaseOutcome::failed("sample at zero");
                };
                let expected = (ev.curvature() / 2.0).sqrt();
                CaseOutcome::bound((at_zero.s_dot - expected).abs(), 1e-7, traj.stats)
            }),
        ),
        case(
            "no-sign-change-squared",
            "no_sign_change",
            Box::new(|tol| {
                let Ok(traj) = pii0_central_fixture(tol) else {
                    return CaseOutcome::failed("fixture");
                };
                let view = SquaredView::new(&traj).unwrap();
                let tols = ZeroTols::default();
                let events = locate_zeros_xx(&view, &tols);
                let report = check_no_sign_change(&view, &events, &tols);
                CaseOutcome::flag(report.ok, traj.stats)
            }),
        ),
        case(
            "no-sign-change-negative",
            "no_sign_change",
            Box::new(|tol| {
                let Ok(traj) = negative_fixture(tol) else { return CaseOutcome::failed("fixture") };
                let tols = ZeroTols::default();
                let events = locate_zeros_xx(&traj, &tols);
                let report = check_no_sign_change(&traj, &events, &tols);
                CaseOutcome::flag(report.ok && events.is_empty(), traj.stats)
            }),
        ),
    ]
}

fn roundtrip_cases() -> Vec<(String, String, CaseFn)> {
    vec![
        case(
            "square-after-positive-root",
            "nozero",
            Box::new(|tol| {
                let Ok(traj) = positive_fixture(tol) else { return CaseOutcome::failed("fixture") };
                let Ok(path) = sqrt_positive(&traj, 501) else { return CaseOutcome::failed("sqrt") };
                let mut worst: f64 = 0.0;
                for p in &path {
                    let Ok(orig) = traj.xxprime_state_at(p.t) else {
                        return CaseOutcome::failed("dense");
                    };
                    let sq = square_state(*p).unwrap();
                    let scale = orig.s.abs().max(1.0);
                    worst = worst.max((sq.s - orig.s).abs() / scale);
                    let dscale = orig.s_dot.abs().max(1.0);
                    worst = worst.max((sq.s_dot - orig.s_dot).abs() / dscale);
                }
                CaseOutcome::bound(worst, 1e-12, traj.stats)
            }),
        ),
        case(
            "signed-root-roundtrip",
            "root",
            Box::new(|tol| {
                let Ok(traj) = pii0_central_fixture(tol) else {
                    return CaseOutcome::failed("fixture");
                };
                let view = SquaredView::new(&traj).unwrap();
                let Some(ev) = located_central_zero(&view) else {
                    return CaseOutcome::failed("zero count");
                };
                let Ok(path) = sqrt_signed(&view, &ev, 1001, false) else {
                    return CaseOutcome::failed("sqrt_signed");
                };
                let mut worst: f64 = 0.0;
                for p in &path {
                    let Ok(orig) = view.xxprime_at(p.t) else {
                        return CaseOutcome::failed("dense");
                    };
                    worst = worst.max((p.s * p.s - orig.s).abs());
                }
                CaseOutcome::bound(worst, 1e-12, traj.stats)
            }),
        ),
        case(
            "signed-root-mirror",
            "root",
            Box::new(|tol| {
                let Ok(traj) = pii0_central_fixture(tol) else {
                    return CaseOutcome::failed("fixture");
                };
                let view = SquaredView::new(&traj).unwrap();
                let Some(ev) = located_central_zero(&view) else {
                    return CaseOutcome::failed("zero count");
                };
                let (Ok(plain), Ok(mirror)) = (
                    sqrt_signed(&view, &ev, 301, false),
                    sqrt_signed(&view, &ev, 301, true),
                ) else {
                    return CaseOutcome::failed("sqrt_signed");
                };
                let mut worst: f64 = 0.0;
                for (p, m) in plain.iter().zip(&mirror) {
                    worst = worst.max((p.s + m.s).abs()).max((p.s_dot + m.s_dot).abs());
                }
                CaseOutcome::bound(worst, 1e-14, traj.stats)
            }),
        ),
    ]
}

fn negative_branch_cases() -> Vec<(String, String, CaseFn)> {
    vec![
        case(
            "sigma-residual",
            "sigma",
            Box::new(|tol| {
                let Ok(traj) = negative_fixture(tol) else { return CaseOutcome::failed("fixture") };
                let Ok(path) = sqrt_negative(&traj, 501) else {
                    return CaseOutcome::failed("sqrt_negative");
                };
                let worst = path.iter().fold(0.0_f64, |m, s| m.max(s.residual.abs()));
                CaseOutcome::bound(worst, 1e-8, traj.stats)
            }),
        ),
        case(
            "sigma-positive-rejected",
            "sigma",
            Box::new(|tol| {
                let Ok(traj) = positive_fixture(tol) else { return CaseOutcome::failed("fixture") };
                let fired = matches!(
                    sqrt_negative(&traj, 101),
                    Err(Error::BranchViolation { .. })
                );
                CaseOutcome::flag(fired, traj.stats)
            }),
        ),
    ]
}

fn suite_cases(name: &str) -> Result<Vec<(String, String, CaseFn)>> {
    match name {
        "theorems" => Ok(theorems_cases()),
        "conservation" => Ok(conservation_cases()),
        "roundtrip" => Ok(roundtrip_cases()),
        "negative_branch" => Ok(negative_branch_cases()),
        "all" => {
            let mut all = theorems_cases();
            all.extend(conservation_cases());
            all.extend(roundtrip_cases());
            all.extend(negative_branch_cases());
            Ok(all)
        }
        other => Err(Error::Usage(format!(
            "unknown suite '{other}'; expected theorems, conservation, roundtrip, \
             negative_branch or all"
        ))),
    }
}

/// Run a verification suite. Deterministic for a given config; cases are
/// sorted by id so the report is independent of execution order.
pub fn run_suite(name: &str, tol: &ToleranceConfig) -> Result<VerificationReport> {
    run_suite_with(name, tol, Parallelism::Auto)
}

pub fn run_suite_with(
    name: &str,
    tol: &ToleranceConfig,
    mode: Parallelism,
) -> Result<VerificationReport> {
    let cases = suite_cases(name)?;
    let tol = *tol;
    let results: Vec<(CaseResult, StepStats)> = par::map(mode, cases, |(id, theorem, f)| {
        let outcome = f(&tol);
        (
            CaseResult {
                id,
                theorem,
                measured: outcome.measured,
                threshold: outcome.threshold,
                pass: outcome.pass,
            },
            outcome.stats,
        )
    });

    let mut cases: Vec<CaseResult> = Vec::with_capacity(results.len());
    let mut stats = StepStats::default();
    for (c, s) in results {
        stats.accepted += s.accepted;
        stats.rejected += s.rejected;
        stats.rhs_evals += s.rhs_evals;
        cases.push(c);
    }
    cases.sort_by(|a, b| a.id.cmp(&b.id));
    let overall = cases.iter().all(|c| c.pass);
    Ok(VerificationReport {
        suite: name.to_string(),
        rtol: tol.rtol,
        atol: tol.atol,
        cases,
        stats,
        overall,
    })
}
