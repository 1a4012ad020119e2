//! Command-line front end: integration runs, transforms, zero analysis and
//! verification suites, emitting CSV or JSON.
//!
//! Exit codes are stable API: 0 success, 1 verification failure, 2 usage,
//! 3 near-singular start, 4 blow-up truncation (partial output emitted),
//! 5 branch violation.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::integrator::{
    integrate, Direction, EventHit, EventSpec, IntegrateError, Model, ModelTag, Observable,
    ToleranceConfig, Trajectory,
};
use crate::ode_models::{lift_xx_to_xxprime, XxState, DEFAULT_ETA};
use crate::transforms::{
    sqrt_negative, sqrt_positive, sqrt_signed, square_trajectory, SquaredView, XxDense,
};
use crate::verify::run_suite;
use crate::zero_analysis::{locate_zeros_xx, ZeroTols};

pub const FORMAT_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NEAR_SINGULAR: i32 = 3;
pub const EXIT_BLOWUP: i32 = 4;
pub const EXIT_BRANCH_VIOLATION: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrateConfig {
    pub model: ModelTag,
    pub init: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
    pub rtol: f64,
    pub atol: f64,
    pub events: Vec<String>,
    pub samples: usize,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub sddot_at_zero: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformOp {
    Square,
    SqrtPos,
    SqrtSigned,
    SqrtNeg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformConfig {
    pub op: TransformOp,
    pub input: PathBuf,
    pub flip_at: Option<f64>,
    pub negate: bool,
    pub samples: usize,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub suite: String,
    pub rtol: f64,
    pub atol: f64,
    pub out: Option<PathBuf>,
}

/// One parsed invocation; serializes round-trip to a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum RunConfig {
    Integrate(IntegrateConfig),
    Transform(TransformConfig),
    Verify(VerifyConfig),
}

/// Trajectory file exchanged between `integrate` and `transform`: dense
/// coefficients travel with the nodes so transforms can resample freely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDocument {
    pub format_version: u32,
    pub model: ModelTag,
    pub truncated: bool,
    pub trajectory: Trajectory,
    pub events: Vec<EventHit>,
    pub samples: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub struct CliFailure {
    pub exit_code: i32,
    pub message: String,
}

impl CliFailure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { exit_code: EXIT_USAGE, message: msg.into() }
    }
}

impl std::fmt::Display for CliFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

fn parse_event(name: &str) -> Result<EventSpec, CliFailure> {
    let (base, direction) = match name.rsplit_once(':') {
        Some((b, "rising")) => (b, Direction::Rising),
        Some((b, "falling")) => (b, Direction::Falling),
        Some((b, "any")) => (b, Direction::Any),
        Some((_, other)) => {
            return Err(CliFailure::usage(format!("unknown event direction '{other}'")))
        }
        None => (name, Direction::Any),
    };
    let observable = match base {
        "s-crosses-zero" | "S-crosses-zero" => Observable::Value,
        "sdot-crosses-zero" | "Sdot-crosses-zero" => Observable::Derivative,
        other => return Err(CliFailure::usage(format!("unknown event observable '{other}'"))),
    };
    Ok(EventSpec { observable, direction, terminal: false })
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), CliFailure> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliFailure::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| CliFailure::usage(format!("stdout: {e}")))
        }
    }
}

fn csv_header(model: ModelTag) -> &'static str {
    match model {
        ModelTag::Pii0 => "t,s,s_dot",
        ModelTag::Xx => "t,S,S_dot",
        ModelTag::XxPrime => "t,S,S_dot,S_ddot",
    }
}

fn fmt_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.17e}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn sample_rows(traj: &Trajectory, n: usize) -> Result<Vec<Vec<f64>>, Error> {
    let dim = traj.model.dim();
    traj.sample_times(n)
        .into_iter()
        .map(|t| {
            let y = traj.evaluate_dense(t)?;
            let mut row = vec![t];
            row.extend_from_slice(&y[..dim]);
            Ok(row)
        })
        .collect()
}

fn resolve_init(cfg: &IntegrateConfig) -> Result<(Model, [f64; 3]), CliFailure> {
    let model = match cfg.model {
        ModelTag::Pii0 => Model::Pii0,
        ModelTag::Xx => Model::xx_default(),
        ModelTag::XxPrime => Model::XxPrime,
    };
    let init = &cfg.init;
    match cfg.model {
        ModelTag::Pii0 | ModelTag::Xx => {
            if init.len() != 2 {
                return Err(CliFailure::usage(format!(
                    "--init for model {} takes 2 components, got {}",
                    cfg.model,
                    init.len()
                )));
            }
            if cfg.sddot_at_zero.is_some() && cfg.model == ModelTag::Pii0 {
                return Err(CliFailure::usage("--sddot-at-zero only applies to xx/xxprime"));
            }
            if cfg.model == ModelTag::Xx {
                let guard = DEFAULT_ETA * 1.0_f64.max(init[1] * init[1]);
                if init[0].abs() <= guard {
                    return Err(CliFailure {
                        exit_code: EXIT_NEAR_SINGULAR,
                        message: format!(
                            "initial S = {:e} is inside the singular guard band; integrate the \
                             third-order lift instead (--model xxprime with --sddot-at-zero)",
                            init[0]
                        ),
                    });
                }
            }
            Ok((model, [init[0], init[1], 0.0]))
        }
        ModelTag::XxPrime => match init.len() {
            3 => {
                if cfg.sddot_at_zero.is_some() {
                    return Err(CliFailure::usage(
                        "--sddot-at-zero conflicts with a 3-component --init",
                    ));
                }
                Ok((model, [init[0], init[1], init[2]]))
            }
            2 => {
                let lifted = lift_xx_to_xxprime(
                    XxState::new(cfg.t0, init[0], init[1]),
                    cfg.sddot_at_zero,
                )
                .map_err(|e| CliFailure::usage(e.to_string()))?;
                Ok((model, [lifted.s, lifted.s_dot, lifted.s_ddot]))
            }
            n => Err(CliFailure::usage(format!(
                "--init for model xxprime takes 2 (lifted) or 3 components, got {n}"
            ))),
        },
    }
}

pub fn cmd_integrate(cfg: &IntegrateConfig) -> Result<i32, CliFailure> {
    if cfg.samples < 2 {
        return Err(CliFailure::usage("--samples must be at least 2"));
    }
    let (model, init) = resolve_init(cfg)?;
    let tol = ToleranceConfig::with_tolerances(cfg.rtol, cfg.atol);
    let events: Vec<EventSpec> = cfg
        .events
        .iter()
        .map(|e| parse_event(e))
        .collect::<Result<_, _>>()?;

    let (output, truncated) = match integrate(model, init, (cfg.t0, cfg.t1), &tol, &events) {
        Ok(o) => (o, false),
        Err(IntegrateError::StepSizeUnderflow { partial, .. })
        | Err(IntegrateError::MaxStepsExceeded { partial, .. }) => (*partial, true),
        Err(IntegrateError::Model(Error::NearSingular { t, s, .. })) => {
            return Err(CliFailure {
                exit_code: EXIT_NEAR_SINGULAR,
                message: format!(
                    "integration hit the singular guard at t = {t} (S = {s:e}); restart from \
                     the third-order lift"
                ),
            })
        }
        Err(e) => return Err(CliFailure::usage(e.to_string())),
    };

    let traj = output.trajectory;
    let samples =
        sample_rows(&traj, cfg.samples).map_err(|e| CliFailure::usage(e.to_string()))?;

    let content = match cfg.format {
        OutputFormat::Csv => {
            let mut s = String::from(csv_header(cfg.model));
            s.push('\n');
            for row in &samples {
                s.push_str(&fmt_row(row));
                s.push('\n');
            }
            s
        }
        OutputFormat::Json => {
            let doc = TrajectoryDocument {
                format_version: FORMAT_VERSION,
                model: cfg.model,
                truncated,
                trajectory: traj,
                events: output.events,
                samples,
            };
            let mut s = serde_json::to_string_pretty(&doc)
                .map_err(|e| CliFailure::usage(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    write_output(&cfg.out, &content)?;
    Ok(if truncated { EXIT_BLOWUP } else { EXIT_OK })
}

fn read_document(path: &PathBuf) -> Result<TrajectoryDocument, CliFailure> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliFailure::usage(format!("cannot read {}: {e}", path.display())))?;
    let doc: TrajectoryDocument = serde_json::from_str(&text)
        .map_err(|e| CliFailure::usage(format!("{}: not a trajectory file: {e}", path.display())))?;
    if doc.format_version != FORMAT_VERSION {
        return Err(CliFailure::usage(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            doc.format_version
        )));
    }
    Ok(doc)
}

/// Central-difference residual column for a sampled path: row i gets
/// |d2/dt2 estimate - model rhs|; endpoint rows get 0.
fn second_difference_residuals(rows: &[Vec<f64>], rhs: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    let n = rows.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let h = rows[i + 1][0] - rows[i][0];
        let second = (rows[i - 1][1] - 2.0 * rows[i][1] + rows[i + 1][1]) / (h * h);
        out[i] = (second - rhs(rows[i][0], rows[i][1], rows[i][2])).abs();
    }
    out
}

pub fn cmd_transform(cfg: &TransformConfig) -> Result<i32, CliFailure> {
    if cfg.samples < 8 {
        return Err(CliFailure::usage("--samples must be at least 8"));
    }
    let doc = read_document(&cfg.input)?;
    let traj = &doc.trajectory;

    let branch_violation = |e: Error| match e {
        Error::BranchViolation { t, s } => CliFailure {
            exit_code: EXIT_BRANCH_VIOLATION,
            message: format!("branch violation at t = {t}: S = {s:e}"),
        },
        Error::WrongSign { s_ddot } => CliFailure {
            exit_code: EXIT_BRANCH_VIOLATION,
            message: format!(
                "curvature at the zero is {s_ddot:e}; the signed root needs it positive \
                 (use sqrt-neg after negation for the negative case)"
            ),
        },
        other => CliFailure::usage(other.to_string()),
    };

    // rows: t plus output columns, residual appended last
    let (header, rows): (String, Vec<Vec<f64>>) = match cfg.op {
        TransformOp::Square => {
            let path = square_trajectory(traj, cfg.samples)
                .map_err(|e| CliFailure::usage(e.to_string()))?;
            let mut rows: Vec<Vec<f64>> =
                path.iter().map(|p| vec![p.t, p.s, p.s_dot, p.s_ddot]).collect();
            // residual: central difference of S_dot against stored S_ddot
            let n = rows.len();
            let mut res = vec![0.0; n];
            for i in 1..n - 1 {
                let h = rows[i + 1][0] - rows[i][0];
                let diff = (rows[i + 1][2] - rows[i - 1][2]) / (2.0 * h);
                res[i] = (diff - rows[i][3]).abs();
            }
            for (row, r) in rows.iter_mut().zip(res) {
                row.push(r);
            }
            ("t,S,S_dot,S_ddot,residual".into(), rows)
        }
        TransformOp::SqrtPos | TransformOp::SqrtSigned => {
            let path = match cfg.op {
                TransformOp::SqrtPos => {
                    sqrt_positive(traj, cfg.samples).map_err(branch_violation)?
                }
                TransformOp::SqrtSigned => {
                    let squared_view;
                    let source: &dyn crate::transforms::XxDense =
                        if traj.model.tag() == ModelTag::Pii0 {
                            squared_view = SquaredView::new(traj)
                                .map_err(|e| CliFailure::usage(e.to_string()))?;
                            &squared_view
                        } else {
                            traj
                        };
                    let zero = match cfg.flip_at {
                        Some(a) => find_zero_near(source, a)?,
                        None => single_zero(source)?,
                    };
                    sqrt_signed(source, &zero, cfg.samples, cfg.negate).map_err(branch_violation)?
                }
                _ => unreachable!(),
            };
            let mut rows: Vec<Vec<f64>> = path.iter().map(|p| vec![p.t, p.s, p.s_dot]).collect();
            let res = second_difference_residuals(&rows, |t, s, _| 2.0 * s * s * s + t * s);
            for (row, r) in rows.iter_mut().zip(res) {
                row.push(r);
            }
            ("t,s,s_dot,residual".into(), rows)
        }
        TransformOp::SqrtNeg => {
            let path = sqrt_negative(traj, cfg.samples).map_err(branch_violation)?;
            let rows = path
                .iter()
                .map(|p| vec![p.t, p.sigma, p.sigma_dot, p.residual.abs()])
                .collect();
            ("t,s,s_dot,residual".into(), rows)
        }
    };

    let content = match cfg.format {
        OutputFormat::Csv => {
            let mut s = header.clone();
            s.push('\n');
            for row in &rows {
                s.push_str(&fmt_row(row));
                s.push('\n');
            }
            s
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct TransformDocument<'a> {
                format_version: u32,
                op: TransformOp,
                columns: Vec<&'a str>,
                samples: &'a [Vec<f64>],
            }
            let doc = TransformDocument {
                format_version: FORMAT_VERSION,
                op: cfg.op,
                columns: header.split(',').collect(),
                samples: &rows,
            };
            let mut s = serde_json::to_string_pretty(&doc)
                .map_err(|e| CliFailure::usage(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    write_output(&cfg.out, &content)?;
    Ok(EXIT_OK)
}

fn single_zero(source: &dyn XxDense) -> Result<crate::zero_analysis::ZeroEvent, CliFailure> {
    let zeros = locate_zeros_xx(source, &ZeroTols::default());
    match zeros.len() {
        1 => Ok(zeros[0]),
        0 => Err(CliFailure::usage("no zero found; sqrt-signed needs one (or pass --flip-at)")),
        n => Err(CliFailure::usage(format!(
            "{n} zeros found; pass --flip-at to select the flip location"
        ))),
    }
}

fn find_zero_near(
    source: &dyn XxDense,
    a: f64,
) -> Result<crate::zero_analysis::ZeroEvent, CliFailure> {
    let zeros = locate_zeros_xx(source, &ZeroTols::default());
    zeros
        .into_iter()
        .min_by(|x, y| {
            (x.location - a).abs().partial_cmp(&(y.location - a).abs()).unwrap()
        })
        .filter(|z| (z.location - a).abs() <= 1e-3 * 1.0_f64.max(a.abs()))
        .ok_or_else(|| CliFailure::usage(format!("no zero found near --flip-at {a}")))
}

pub fn cmd_verify(cfg: &VerifyConfig) -> Result<i32, CliFailure> {
    let tol = ToleranceConfig::with_tolerances(cfg.rtol, cfg.atol);
    let report = run_suite(&cfg.suite, &tol).map_err(|e| CliFailure::usage(e.to_string()))?;
    let mut content =
        serde_json::to_string_pretty(&report).map_err(|e| CliFailure::usage(e.to_string()))?;
    content.push('\n');
    write_output(&cfg.out, &content)?;
    if report.overall {
        Ok(EXIT_OK)
    } else {
        let failed: Vec<&str> = report
            .cases
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.id.as_str())
            .collect();
        Err(CliFailure {
            exit_code: EXIT_VERIFY_FAILED,
            message: format!("verification failed: {}", failed.join(", ")),
        })
    }
}

/// Execute a parsed invocation, returning the process exit code.
pub fn run(config: &RunConfig) -> Result<i32, CliFailure> {
    match config {
        RunConfig::Integrate(cfg) => cmd_integrate(cfg),
        RunConfig::Transform(cfg) => cmd_transform(cfg),
        RunConfig::Verify(cfg) => cmd_verify(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_round_trips_through_json() {
        let configs = vec![
            RunConfig::Integrate(IntegrateConfig {
                model: ModelTag::XxPrime,
                init: vec![0.0, 0.0],
                t0: 0.5,
                t1: 1.5,
                rtol: 1e-10,
                atol: 1e-10,
                events: vec!["Sdot-crosses-zero".into()],
                samples: 101,
                format: OutputFormat::Json,
                out: Some(PathBuf::from("/tmp/x.json")),
                sddot_at_zero: Some(2.0),
            }),
            RunConfig::Transform(TransformConfig {
                op: TransformOp::SqrtSigned,
                input: PathBuf::from("traj.json"),
                flip_at: Some(0.0),
                negate: true,
                samples: 201,
                format: OutputFormat::Csv,
                out: None,
            }),
            RunConfig::Verify(VerifyConfig {
                suite: "all".into(),
                rtol: 1e-10,
                atol: 1e-10,
                out: None,
            }),
        ];
        for cfg in configs {
            let rendered = serde_json::to_string(&cfg).unwrap();
            let parsed: RunConfig = serde_json::from_str(&rendered).unwrap();
            assert_eq!(parsed, cfg);
        }
    }

    #[test]
    fn event_names_parse() {
        assert!(parse_event("s-crosses-zero").is_ok());
        assert!(parse_event("S-crosses-zero").is_ok());
        assert!(parse_event("Sdot-crosses-zero:rising").is_ok());
        assert!(parse_event("bogus").is_err());
    }
}
