//! Run configuration: a TOML file whose keys mirror the CLI flags.
//!
//! ```toml
//! experiment = "delay"
//! duration_s = 0.5
//! volume_db = -6
//!
//! [clock]
//! divider = 6
//! [audio]
//! bit_length = 16
//! [i2c]
//! sclk_hz = 200000
//! [sine]
//! freq_hz = 440.0
//! amplitude = 0.5
//! [delay]
//! delay_s = 0.25
//! mix_gain = 0.5
//! [io]
//! input = "in.wav"
//! output = "out.wav"
//! vcd = "run.vcd"
//! summary = "summary.json"
//! [trace]
//! enable = false
//! ```
//!
//! Every key is optional. Flags override the file, the file overrides the
//! built-in defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::i2c::DEFAULT_SCLK_HZ;
use crate::runtime::{DelayParams, VolumeDb};
use crate::sim::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    #[default]
    Sine,
    Passthrough,
    Delay,
    ConfigDump,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Sine => "sine",
            Experiment::Passthrough => "passthrough",
            Experiment::Delay => "delay",
            Experiment::ConfigDump => "config-dump",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockSection {
    pub divider: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AudioSection {
    pub bit_length: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct I2cSection {
    pub sclk_hz: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineSection {
    pub freq_hz: Option<f64>,
    pub amplitude: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySection {
    pub delay_s: Option<f64>,
    pub mix_gain: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoSection {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub vcd: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    pub enable: Option<bool>,
}

/// A partial configuration. Both the file and the command line produce
/// one; [`ConfigLayer::over`] stacks them.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub experiment: Option<Experiment>,
    pub duration_s: Option<f64>,
    pub volume_db: Option<i32>,
    #[serde(default)]
    pub clock: ClockSection,
    #[serde(default)]
    pub audio: AudioSection,
    #[serde(default)]
    pub i2c: I2cSection,
    #[serde(default)]
    pub sine: SineSection,
    #[serde(default)]
    pub delay: DelaySection,
    #[serde(default)]
    pub io: IoSection,
    #[serde(default)]
    pub trace: TraceSection,
}

impl ConfigLayer {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigLoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigLoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|source| ConfigLoadError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    /// `self` wins wherever it has a value.
    pub fn over(self, base: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            experiment: self.experiment.or(base.experiment),
            duration_s: self.duration_s.or(base.duration_s),
            volume_db: self.volume_db.or(base.volume_db),
            clock: ClockSection {
                divider: self.clock.divider.or(base.clock.divider),
            },
            audio: AudioSection {
                bit_length: self.audio.bit_length.or(base.audio.bit_length),
            },
            i2c: I2cSection {
                sclk_hz: self.i2c.sclk_hz.or(base.i2c.sclk_hz),
            },
            sine: SineSection {
                freq_hz: self.sine.freq_hz.or(base.sine.freq_hz),
                amplitude: self.sine.amplitude.or(base.sine.amplitude),
            },
            delay: DelaySection {
                delay_s: self.delay.delay_s.or(base.delay.delay_s),
                mix_gain: self.delay.mix_gain.or(base.delay.mix_gain),
            },
            io: IoSection {
                input: self.io.input.or(base.io.input),
                output: self.io.output.or(base.io.output),
                vcd: self.io.vcd.or(base.io.vcd),
                summary: self.io.summary.or(base.io.summary),
            },
            trace: TraceSection {
                enable: self.trace.enable.or(base.trace.enable),
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigLoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: toml::de::Error,
    },
}

pub const DEFAULT_DURATION_S: f64 = 0.1;
pub const DEFAULT_FREQ_HZ: f64 = 440.0;
pub const DEFAULT_AMPLITUDE: f64 = 0.5;
pub const DEFAULT_DELAY_S: f64 = 0.25;
pub const DEFAULT_MIX_GAIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Program {
    Sine { freq_hz: f64, amplitude: f64 },
    Passthrough,
    Delay(DelayParams),
    ConfigDump,
}

/// A configuration that passed every check and is ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub sim: SimConfig,
    pub program: Program,
    pub volume: VolumeDb,
    /// `None`: sine runs for the default duration, the input-driven
    /// experiments for the length of the input.
    pub duration_s: Option<f64>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub vcd: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

fn unit_interval(field: &'static str, v: f64) -> Result<f64, ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("{v} is outside [0, 1]")))
    }
}

impl RunConfig {
    pub fn from_layer(layer: ConfigLayer) -> Result<Self, ConfigError> {
        let trace = layer.trace.enable.unwrap_or(false) || layer.io.vcd.is_some();
        let sim = SimConfig::new(
            layer.clock.divider.unwrap_or(crate::clock::DEFAULT_CLK_DIVIDER),
            layer.audio.bit_length.unwrap_or(16),
            layer.i2c.sclk_hz.unwrap_or(DEFAULT_SCLK_HZ),
            trace,
        )?;
        let fs = sim.rates().fs_hz;
        let volume = VolumeDb::new(layer.volume_db.unwrap_or(0))?;
        if let Some(d) = layer.duration_s {
            if !(d.is_finite() && d >= 0.0) {
                return Err(ConfigError::new(
                    "duration_s",
                    format!("{d} must be a non-negative number of seconds"),
                ));
            }
        }

        let experiment = layer.experiment.unwrap_or_default();
        let program = match experiment {
            Experiment::Sine => {
                let freq_hz = layer.sine.freq_hz.unwrap_or(DEFAULT_FREQ_HZ);
                if !(freq_hz >= 0.0 && freq_hz < fs / 2.0) {
                    return Err(ConfigError::new(
                        "sine.freq_hz",
                        format!("{freq_hz} Hz must be in [0, {:.2}) (half the sample rate)", fs / 2.0),
                    ));
                }
                let amplitude = unit_interval("sine.amplitude", layer.sine.amplitude.unwrap_or(DEFAULT_AMPLITUDE))?;
                Program::Sine { freq_hz, amplitude }
            }
            Experiment::Passthrough => Program::Passthrough,
            Experiment::Delay => {
                let delay_s = layer.delay.delay_s.unwrap_or(DEFAULT_DELAY_S);
                if !(delay_s.is_finite() && delay_s >= 0.0) {
                    return Err(ConfigError::new(
                        "delay.delay_s",
                        format!("{delay_s} must be non-negative"),
                    ));
                }
                let gain = unit_interval("delay.mix_gain", layer.delay.mix_gain.unwrap_or(DEFAULT_MIX_GAIN))?;
                let samples = (delay_s * fs).round();
                let buffer = sim.rates().nominal_fs_hz() as usize;
                if samples > buffer as f64 {
                    return Err(ConfigError::new(
                        "delay.delay_s",
                        format!("{delay_s} s is {samples} samples, more than the one-second buffer of {buffer}"),
                    ));
                }
                Program::Delay(DelayParams::with_gain(samples as usize, gain, buffer)?)
            }
            Experiment::ConfigDump => Program::ConfigDump,
        };
        if matches!(experiment, Experiment::Passthrough | Experiment::Delay) && layer.io.input.is_none() {
            return Err(ConfigError::new(
                "io.input",
                format!("{} needs an input WAV (--in)", experiment.name()),
            ));
        }

        Ok(Self {
            experiment,
            sim,
            program,
            volume,
            duration_s: layer.duration_s,
            input: layer.io.input,
            output: layer.io.output,
            vcd: layer.io.vcd,
            summary: layer.io.summary,
        })
    }
}
