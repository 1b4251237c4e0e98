use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tmsv_cli::commands::{self, AnalyzeInputs, SidebandDepth};
use tmsv_cli::{Format, Report, ScenarioFile};
use tmsv_core::calibration::{SqueezeParams, SWEEP_T_B, SWEEP_T_C};
use tmsv_core::io::{write_atomic, TraceFormat};
use tmsv_core::{Error, Result};

/// Distributed two-mode squeezing: predict, simulate and analyze.
#[derive(Parser)]
#[command(name = "tmsv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Predicted (anti-)squeezing for a scenario.
    Expect {
        #[arg(long)]
        scenario: PathBuf,
        /// Report file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize signal and shot-noise traces for a scenario.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "f32")]
        trace_format: TraceKind,
    },
    /// Recover squeezing from two signal traces and their shot-noise traces.
    Analyze(AnalyzeArgs),
    /// Fit the pump coupling efficiency to a squeezing-vs-power sweep.
    Fit {
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long, default_value_t = SWEEP_T_B)]
        t_b: f64,
        #[arg(long, default_value_t = SWEEP_T_C)]
        t_c: f64,
        /// Nonlinear efficiency, 1/(W cm^2).
        #[arg(long, default_value_t = SqueezeParams::reference().a)]
        a: f64,
        #[arg(long, default_value_t = SqueezeParams::reference().length_cm)]
        length_cm: f64,
        #[arg(long, default_value_t = SqueezeParams::reference().eta_w)]
        eta_w: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sideband power and RF drive for a modulation depth.
    Sideband {
        /// Modulation depth in radians.
        #[arg(long, conflicts_with = "optimize", required_unless_present = "optimize")]
        theta: Option<f64>,
        /// Find the depth maximising this sideband order.
        #[arg(long)]
        optimize: Option<i32>,
        /// Search bracket for --optimize.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [3.0, 7.0])]
        range: Vec<f64>,
        /// Sideband order reported with --theta.
        #[arg(long, default_value_t = 4)]
        order: i32,
        #[arg(long, default_value_t = 5.65)]
        v_pi: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// THD and SFDR of a peak list.
    RfMetrics {
        #[arg(long)]
        peaks: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Detector 1 and detector 2 signal traces.
    #[arg(long, num_args = 2, value_names = ["TRACE_1", "TRACE_2"], required_unless_present = "input")]
    traces: Vec<PathBuf>,
    /// Beam-blocked traces for detectors 1 and 2.
    #[arg(long, num_args = 2, value_names = ["SN_1", "SN_2"], required_unless_present = "input")]
    shot_noise: Vec<PathBuf>,
    /// Directory written by `simulate`; replaces --traces and --shot-noise.
    #[arg(long, conflicts_with_all = ["traces", "shot_noise"])]
    input: Option<PathBuf>,
    /// Scenario supplying default analysis settings.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    max_delay: Option<usize>,
    /// Sample rate for CSV traces without a sidecar, Hz.
    #[arg(long)]
    sample_rate: Option<f64>,
    /// Keep every n-th row of the series CSV.
    #[arg(long, default_value_t = 1)]
    series_stride: usize,
    /// Output directory for report.json and series.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceKind {
    F32,
    Csv,
}

impl From<TraceKind> for TraceFormat {
    fn from(k: TraceKind) -> Self {
        match k {
            TraceKind::F32 => TraceFormat::F32,
            TraceKind::Csv => TraceFormat::Csv,
        }
    }
}

fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<()> {
    let text = report.render(format);
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn analyze(args: &AnalyzeArgs, format: Format) -> Result<()> {
    let mut settings = match &args.scenario {
        Some(p) => ScenarioFile::load(p)?.analysis,
        None => Default::default(),
    };
    let input_paths;
    let (traces, shot_noise) = match &args.input {
        Some(dir) => {
            let sidecar = dir.join("simulation.json");
            let meta: serde_json::Value = tmsv_core::io::read_json(&sidecar)?;
            if args.scenario.is_none() {
                if let Some(a) = meta.get("analysis") {
                    settings = serde_json::from_value(a.clone()).map_err(|e| Error::Format {
                        path: sidecar.display().to_string(),
                        message: e.to_string(),
                    })?;
                }
            }
            let files = meta
                .get("files")
                .and_then(|f| f.as_array())
                .filter(|f| f.len() == 4)
                .ok_or_else(|| Error::Format {
                    path: sidecar.display().to_string(),
                    message: "expected four trace files".into(),
                })?;
            input_paths = files
                .iter()
                .map(|f| f.as_str().map(|s| dir.join(s)))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Format {
                    path: sidecar.display().to_string(),
                    message: "trace file names must be strings".into(),
                })?;
            (
                [&input_paths[0], &input_paths[1]],
                [&input_paths[2], &input_paths[3]],
            )
        }
        None => (
            [&args.traces[0], &args.traces[1]],
            [&args.shot_noise[0], &args.shot_noise[1]],
        ),
    };
    if let Some(w) = args.window {
        settings.window = w;
    }
    if let Some(d) = args.max_delay {
        settings.max_delay = d;
    }
    let inputs = AnalyzeInputs {
        traces: [traces[0].as_path(), traces[1].as_path()],
        shot_noise: [shot_noise[0].as_path(), shot_noise[1].as_path()],
        sample_rate: args.sample_rate,
    };
    let report = commands::analyze(&inputs, &settings, args.out.as_deref(), args.series_stride)?;
    emit(&report, format, None)
}

fn run(cli: Cli) -> Result<()> {
    let format = cli.format;
    match cli.command {
        Command::Expect { scenario, out } => {
            let report = commands::expect(&ScenarioFile::load(&scenario)?)?;
            emit(&report, format, out.as_deref())
        }
        Command::Simulate {
            scenario,
            seed,
            out,
            trace_format,
        } => {
            let report =
                commands::simulate(&ScenarioFile::load(&scenario)?, seed, &out, trace_format.into())?;
            emit(&report, format, None)
        }
        Command::Analyze(args) => analyze(&args, format),
        Command::Fit {
            sweep,
            t_b,
            t_c,
            a,
            length_cm,
            eta_w,
            out,
        } => {
            let params = SqueezeParams {
                a,
                length_cm,
                eta_w,
                ..SqueezeParams::reference()
            };
            emit(&commands::fit(&sweep, t_b, t_c, &params)?, format, out.as_deref())
        }
        Command::Sideband {
            theta,
            optimize,
            range,
            order,
            v_pi,
            out,
        } => {
            let depth = match (theta, optimize) {
                (Some(t), _) => SidebandDepth::Theta(t),
                (None, Some(n)) => SidebandDepth::Optimize {
                    order: n,
                    range: (range[0], range[1]),
                },
                (None, None) => unreachable!("clap requires one of --theta / --optimize"),
            };
            let order = optimize.unwrap_or(order);
            emit(&commands::sideband(depth, v_pi, order)?, format, out.as_deref())
        }
        Command::RfMetrics { peaks, out } => emit(&commands::rf_metrics(&peaks)?, format, out.as_deref()),
    }
}

fn error_json(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            eprintln!("{}", error_json("usage", e.to_string().trim_end()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
