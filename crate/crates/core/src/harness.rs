//! The `run` and `decode-trace` commands behind the CLI.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::codec::RegisterWrite;
use crate::config::{Experiment, Program, RunConfig, DEFAULT_DURATION_S};
use crate::decode::TraceReport;
use crate::error::ConfigError;
use crate::runtime::{Runtime, RuntimeError};
use crate::serial::BitLength;
use crate::stream::SampleStream;
use crate::trace::TraceBuffer;
use crate::wav::{read_wav, write_wav, WavError};
use crate::waveform::{load_vcd, save_vcd, VcdError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Wav(#[from] WavError),
    #[error(transparent)]
    Vcd(#[from] VcdError),
    #[error("simulation failed: {0}")]
    Runtime(#[from] RuntimeError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Machine-readable record of a run. Holds no paths or wall-clock data, so
/// identical runs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub experiment: &'static str,
    pub bit_length: BitLength,
    pub clk_divider: u32,
    pub bclk_hz: f64,
    pub fs_hz: f64,
    pub nominal_fs_hz: u32,
    pub lrc_period_ticks: u64,
    pub sclk_hz: u32,
    pub volume_db: i8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freq_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_samples: Option<usize>,
    /// Frames run by the program.
    pub frames: u64,
    /// Frames the codec received on DACDAT.
    pub captured_frames: usize,
    pub ticks: u64,
    pub elapsed_s: f64,
    pub i2c_transactions: u64,
    pub nack_count: u64,
    pub rejected_submits: u64,
    pub dac_writes_while_busy: u64,
    pub write_log: Vec<RegisterWrite>,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

pub struct RunOutcome {
    pub summary: RunSummary,
    /// DAC capture; `None` for config-dump.
    pub capture: Option<SampleStream>,
    pub trace: Option<TraceBuffer>,
}

/// Run the configured experiment in memory. `input` is the ADC stimulus
/// for passthrough and delay, already at the link bit length.
pub fn execute(cfg: &RunConfig, input: Option<&SampleStream>) -> Result<RunOutcome, HarnessError> {
    let mut rt = Runtime::new(cfg.sim);
    rt.setup_codec(cfg.volume)?;

    let input_frames = |rt: &Runtime| -> u64 {
        match cfg.duration_s {
            Some(d) => rt.frames_for(d),
            None => input.map_or(0, |s| s.len() as u64),
        }
    };
    if let Some(stim) = input {
        if !matches!(cfg.program, Program::Sine { .. } | Program::ConfigDump) {
            rt.load_stimulus(stim)?;
        }
    }
    let frames = match cfg.program {
        Program::Sine { freq_hz, amplitude } => {
            let frames = rt.frames_for(cfg.duration_s.unwrap_or(DEFAULT_DURATION_S));
            rt.run_sine_frames(freq_hz, amplitude, frames)?;
            frames
        }
        Program::Passthrough => {
            let frames = input_frames(&rt);
            rt.run_passthrough_frames(frames)?;
            frames
        }
        Program::Delay(params) => {
            let frames = input_frames(&rt);
            rt.run_delay_frames(params, frames)?;
            frames
        }
        Program::ConfigDump => 0,
    };
    rt.drain()?;

    let capture = match cfg.experiment {
        Experiment::ConfigDump => None,
        _ => Some(rt.capture()?),
    };
    let sim = rt.sim();
    let rates = sim.rates();
    let i2c = sim.interface().i2c().stats();
    let summary = RunSummary {
        experiment: cfg.experiment.name(),
        bit_length: cfg.sim.word.bit_length(),
        clk_divider: cfg.sim.clock.clk_divider(),
        bclk_hz: rates.bclk_freq_hz,
        fs_hz: rates.fs_hz,
        nominal_fs_hz: rates.nominal_fs_hz(),
        lrc_period_ticks: rates.lrc_period_ticks,
        sclk_hz: cfg.sim.i2c.sclk_freq_hz(),
        volume_db: cfg.volume.db(),
        freq_hz: match cfg.program {
            Program::Sine { freq_hz, .. } => Some(freq_hz),
            _ => None,
        },
        delay_samples: match cfg.program {
            Program::Delay(p) => Some(p.delay_samples()),
            _ => None,
        },
        frames,
        captured_frames: capture.as_ref().map_or(0, |c| c.len()),
        ticks: sim.tick_count(),
        elapsed_s: sim.clock().elapsed_secs(),
        i2c_transactions: i2c.transactions,
        nack_count: i2c.nacked_transactions,
        rejected_submits: i2c.rejected_submits,
        dac_writes_while_busy: sim.interface().stats().dac_writes_while_busy,
        write_log: sim
            .codec()
            .map(|c| c.registers().write_log().to_vec())
            .unwrap_or_default(),
    };
    let mut sim = rt.into_simulator();
    Ok(RunOutcome {
        summary,
        capture,
        trace: sim.take_trace(),
    })
}

/// Read the input, run, and write every requested artifact.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary, HarnessError> {
    let input = match &cfg.input {
        Some(path) if !matches!(cfg.program, Program::Sine { .. } | Program::ConfigDump) => {
            Some(read_wav(path, cfg.sim.word.bit_length())?)
        }
        _ => None,
    };
    let outcome = execute(cfg, input.as_ref())?;
    if let (Some(path), Some(capture)) = (&cfg.output, &outcome.capture) {
        write_wav(capture, path)?;
    }
    if let (Some(path), Some(trace)) = (&cfg.vcd, &outcome.trace) {
        save_vcd(trace, path)?;
    }
    if let Some(path) = &cfg.summary {
        std::fs::write(path, outcome.summary.to_json()).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(outcome.summary)
}

pub fn cmd_decode_trace(vcd: &Path, bit_length: BitLength) -> Result<TraceReport, HarnessError> {
    let trace = load_vcd(vcd)?;
    Ok(TraceReport::from_trace(&trace, bit_length))
}
