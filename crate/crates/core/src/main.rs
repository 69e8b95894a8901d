use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cremona::cli::commands::{self, CmdError, Options, Outcome, Status};
use cremona::cli::{parse_map, parse_map_raw};
use cremona::dynamics::{RenderMode, RenderParams};

#[derive(Parser)]
#[command(name = "cremona", version, about = "Computations with plane Cremona transformations")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Number of iterates for degree sequences
    #[arg(long, global = true, default_value_t = 10)]
    horizon: usize,
    /// Tolerance for numeric verifications
    #[arg(long, global = true, default_value_t = 1e-6)]
    tolerance: f64,
    /// Seed for randomized numeric steps
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report (or the image, for render) to this file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory with cubic_models.txt, flows.txt and flow_controls.txt
    #[arg(long, global = true)]
    data: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Record,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Escape,
    Orbit,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stratum of a quadratic map, or configuration of a cubic one
    Classify { map: String },
    /// Inverse of a birational map
    Invert { map: String },
    /// Degrees of the iterates
    Degrees { map: String },
    /// Indeterminacy points with base-point orders
    Indpoints { map: String },
    /// Guillot sums over the fixed points
    Guillot { map: String },
    /// Sum of Baum-Bott indices of the associated foliation
    Bb { map: String },
    /// Exceptional configuration of a cubic birational map
    Cubic { map: String },
    /// Verify the flow catalog
    FlowVerify {
        /// Also check that the corrupted control entries fail
        #[arg(long)]
        controls: bool,
    },
    /// Render a real map to a binary pixmap (requires --out)
    Render {
        map: String,
        #[arg(long, default_value_t = 512)]
        width: usize,
        #[arg(long, default_value_t = 512)]
        height: usize,
        /// x0min,x0max,x1min,x1max
        #[arg(long, value_delimiter = ',', default_values_t = [-2.0, 2.0, -2.0, 2.0], allow_negative_numbers = true)]
        window: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Mode::Escape)]
        mode: Mode,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e6)]
        escape_radius: f64,
    },
}

fn run(cli: Cli) -> Result<Outcome, CmdError> {
    let g = &cli.global;
    let mut opt = Options { horizon: g.horizon, tolerance: g.tolerance, data: g.data.clone(), ..Options::default() };
    if let Some(s) = g.seed {
        opt.seed = s;
    }
    match &cli.cmd {
        Cmd::Classify { map } => commands::cmd_classify(&parse_map_raw(map)?, &opt),
        Cmd::Invert { map } => commands::cmd_invert(&parse_map(map)?, &opt),
        Cmd::Degrees { map } => commands::cmd_degrees(&parse_map(map)?, &opt),
        Cmd::Indpoints { map } => commands::cmd_indpoints(&parse_map(map)?, &opt),
        Cmd::Guillot { map } => commands::cmd_guillot(&parse_map(map)?, &opt),
        Cmd::Bb { map } => commands::cmd_bb(&parse_map(map)?, &opt),
        Cmd::Cubic { map } => commands::cmd_cubic(&parse_map(map)?, &opt),
        Cmd::FlowVerify { controls } => commands::cmd_flow_verify(*controls, &opt),
        Cmd::Render { map, width, height, window, mode, max_iter, escape_radius } => {
            let out = g.out.as_ref().ok_or_else(|| CmdError::Usage("render requires --out FILE".into()))?;
            if window.len() != 4 {
                return Err(CmdError::Usage("--window takes four comma-separated numbers".into()));
            }
            let params = RenderParams {
                width: *width,
                height: *height,
                window: (window[0], window[1], window[2], window[3]),
                mode: match mode {
                    Mode::Escape => RenderMode::Escape,
                    Mode::Orbit => RenderMode::Orbit,
                },
                max_iter: *max_iter,
                escape_radius: *escape_radius,
                seed: opt.seed,
                ..RenderParams::default()
            };
            commands::cmd_render(&parse_map(map)?, &params, out).map(|(o, _)| o)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // exit code 2 is reserved for failed verifications
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let format = cli.global.format;
    let out = match cli.cmd {
        Cmd::Render { .. } => None,
        _ => cli.global.out.clone(),
    };
    match run(cli) {
        Ok(o) => {
            let body = match format {
                Format::Text => o.text,
                Format::Record => o.record.to_string(),
            };
            match out {
                Some(p) => {
                    if let Err(e) = std::fs::write(&p, body) {
                        eprintln!("error: {}: {}", p.display(), e);
                        return ExitCode::from(1);
                    }
                }
                None => print!("{}", body),
            }
            match o.status {
                Status::Ok => ExitCode::SUCCESS,
                Status::Failed => ExitCode::from(2),
            }
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}
