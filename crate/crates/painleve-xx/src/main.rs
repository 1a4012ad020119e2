use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use painleve_xx::cli::{
    self, IntegrateConfig, OutputFormat, RunConfig, TransformConfig, TransformOp, VerifyConfig,
};
use painleve_xx::integrator::ModelTag;

#[derive(Parser)]
#[command(
    name = "painleve-xx",
    about = "Integrate the homogeneous Painlevé II equation, Ince's equation XX and its \
             third-order regularization; transform and verify solutions"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Pii0,
    Xx,
    Xxprime,
}

impl From<ModelArg> for ModelTag {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Pii0 => ModelTag::Pii0,
            ModelArg::Xx => ModelTag::Xx,
            ModelArg::Xxprime => ModelTag::XxPrime,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OpArg {
    Square,
    SqrtPos,
    SqrtSigned,
    SqrtNeg,
}

impl From<OpArg> for TransformOp {
    fn from(op: OpArg) -> Self {
        match op {
            OpArg::Square => TransformOp::Square,
            OpArg::SqrtPos => TransformOp::SqrtPos,
            OpArg::SqrtSigned => TransformOp::SqrtSigned,
            OpArg::SqrtNeg => TransformOp::SqrtNeg,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a model as an initial value problem
    Integrate {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Comma-separated state: s,s_dot (pii0), S,S_dot (xx), or
        /// S,S_dot[,S_ddot] (xxprime; 2 components are lifted)
        #[arg(long)]
        init: String,
        #[arg(long)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-10)]
        atol: f64,
        /// Comma-separated event names: s-crosses-zero, S-crosses-zero,
        /// Sdot-crosses-zero, each optionally :rising/:falling/:any
        #[arg(long, value_delimiter = ',')]
        events: Vec<String>,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Curvature S_ddot(a) when initializing at a zero (S = S_dot = 0)
        #[arg(long)]
        sddot_at_zero: Option<f64>,
    },
    /// Transform a saved trajectory (JSON from `integrate --format json`)
    Transform {
        #[arg(long, value_enum)]
        op: OpArg,
        #[arg(long = "in")]
        input: PathBuf,
        /// Flip location for sqrt-signed (defaults to the single located zero)
        #[arg(long)]
        flip_at: Option<f64>,
        /// Emit the mirrored (globally negated) signed root
        #[arg(long, default_value_t = false)]
        negate: bool,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and emit a JSON report
    Verify {
        /// theorems | conservation | roundtrip | negative_branch | all
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-10)]
        atol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_init(init: &str) -> Result<Vec<f64>, String> {
    init.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad --init component '{p}': {e}")))
        .collect()
}

fn to_config(cmd: Command) -> Result<RunConfig, String> {
    Ok(match cmd {
        Command::Integrate {
            model,
            init,
            t0,
            t1,
            rtol,
            atol,
            events,
            samples,
            format,
            out,
            sddot_at_zero,
        } => RunConfig::Integrate(IntegrateConfig {
            model: model.into(),
            init: parse_init(&init)?,
            t0,
            t1,
            rtol,
            atol,
            events,
            samples,
            format: format.into(),
            out,
            sddot_at_zero,
        }),
        Command::Transform { op, input, flip_at, negate, samples, format, out } => {
            RunConfig::Transform(TransformConfig {
                op: op.into(),
                input,
                flip_at,
                negate,
                samples,
                format: format.into(),
                out,
            })
        }
        Command::Verify { suite, rtol, atol, out } => {
            RunConfig::Verify(VerifyConfig { suite, rtol, atol, out })
        }
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match to_config(args.command) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(cli::EXIT_USAGE as u8);
        }
    };
    match cli::run(&config) {
        Ok(code) => ExitCode::from(code as u8),
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code as u8)
        }
    }
}
