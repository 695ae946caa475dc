use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use wm8731_sim::config::{
    AudioSection, ClockSection, ConfigLayer, DelaySection, Experiment, I2cSection, IoSection, RunConfig, SineSection,
    TraceSection,
};
use wm8731_sim::harness::{cmd_decode_trace, cmd_run};
use wm8731_sim::BitLength;

/// Cycle-stepped WM8731 audio interface simulator.
#[derive(Parser)]
#[command(name = "wm8731-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Configure the codec, run an experiment and write WAV/VCD/JSON output.
    Run(RunArgs),
    /// Decode I2C transactions and audio frames from a VCD trace.
    DecodeTrace(DecodeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with the same settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    freq_hz: Option<f64>,
    /// Sine amplitude as a fraction of full scale.
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    delay_s: Option<f64>,
    #[arg(long)]
    mix_gain: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    volume_db: Option<i32>,
    #[arg(long)]
    bit_length: Option<u32>,
    #[arg(long)]
    clk_div: Option<u32>,
    #[arg(long)]
    sclk_hz: Option<u32>,
    /// ADC stimulus WAV (passthrough, delay).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// DAC capture WAV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pin-level VCD trace; enables tracing.
    #[arg(long)]
    vcd: Option<PathBuf>,
    /// JSON summary; printed to stdout when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
}

impl RunArgs {
    fn layer(self) -> ConfigLayer {
        ConfigLayer {
            experiment: self.experiment,
            duration_s: self.duration_s,
            volume_db: self.volume_db,
            clock: ClockSection { divider: self.clk_div },
            audio: AudioSection {
                bit_length: self.bit_length,
            },
            i2c: I2cSection { sclk_hz: self.sclk_hz },
            sine: SineSection {
                freq_hz: self.freq_hz,
                amplitude: self.amplitude,
            },
            delay: DelaySection {
                delay_s: self.delay_s,
                mix_gain: self.mix_gain,
            },
            io: IoSection {
                input: self.input,
                output: self.out,
                vcd: self.vcd,
                summary: self.summary,
            },
            trace: TraceSection::default(),
        }
    }
}

#[derive(Args)]
struct DecodeArgs {
    vcd: PathBuf,
    /// Word length of the audio frames in the trace.
    #[arg(long)]
    bit_length: Option<u32>,
    /// Take the word length from a run config file.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let file = match &args.config {
        Some(path) => ConfigLayer::load(path)?,
        None => ConfigLayer::default(),
    };
    let cfg = RunConfig::from_layer(args.layer().over(file)).context("invalid configuration")?;
    let summary = cmd_run(&cfg)?;
    if cfg.summary.is_none() {
        print!("{}", summary.to_json());
    }
    eprintln!(
        "{}: {} frames, {} ticks ({:.6} s simulated), {} i2c writes, {} nacked",
        summary.experiment,
        summary.frames,
        summary.ticks,
        summary.elapsed_s,
        summary.i2c_transactions,
        summary.nack_count
    );
    Ok(ExitCode::SUCCESS)
}

fn decode(args: DecodeArgs) -> anyhow::Result<ExitCode> {
    let from_file = match &args.config {
        Some(path) => ConfigLayer::load(path)?.audio.bit_length,
        None => None,
    };
    let bits = args.bit_length.or(from_file).unwrap_or(16);
    let bl = BitLength::try_from(bits)?;
    let report = cmd_decode_trace(&args.vcd, bl)?;
    print!("{report}");
    Ok(if report.is_clean() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::DecodeTrace(args) => decode(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
