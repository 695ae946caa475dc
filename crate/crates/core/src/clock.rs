//! Integer clock division from the 80 MHz system clock.
//!
//! One divided clock drives both the codec master clock (XCLK) and the
//! serial bit clock (BCLK). The codec divides XCLK by `fs_divider` to get
//! its sampling rate, so one LRC frame lasts `clk_divider * fs_divider`
//! system ticks.

use serde::Serialize;

use crate::error::ConfigError;

/// Frequency of the system clock every state machine advances on.
pub const SYSTEM_CLOCK_HZ: u32 = 80_000_000;

pub const DEFAULT_CLK_DIVIDER: u32 = 6;

/// XCLK-to-Fs ratio of the codec in normal (256 fs) mode.
pub const DEFAULT_FS_DIVIDER: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockConfig {
    clk_divider: u32,
    fs_divider: u32,
}

impl ClockConfig {
    /// Odd dividers are rejected: the divided clock must have a 50% duty
    /// cycle in whole system ticks.
    pub fn new(clk_divider: u32, fs_divider: u32) -> Result<Self, ConfigError> {
        if clk_divider < 2 {
            return Err(ConfigError::new(
                "clock.divider",
                format!("must be at least 2, got {clk_divider}"),
            ));
        }
        if !clk_divider.is_multiple_of(2) {
            return Err(ConfigError::new(
                "clock.divider",
                format!("must be even, got {clk_divider}"),
            ));
        }
        if fs_divider == 0 {
            return Err(ConfigError::new("clock.fs_divider", "must be positive"));
        }
        Ok(Self {
            clk_divider,
            fs_divider,
        })
    }

    pub fn clk_divider(&self) -> u32 {
        self.clk_divider
    }

    pub fn fs_divider(&self) -> u32 {
        self.fs_divider
    }

    /// System ticks per half BCLK period.
    pub fn half_period_ticks(&self) -> u32 {
        self.clk_divider / 2
    }

    pub fn rates(&self) -> Rates {
        derive_rates(self)
    }
}

impl Default for ClockConfig {
    fn default() -> Self {
        Self {
            clk_divider: DEFAULT_CLK_DIVIDER,
            fs_divider: DEFAULT_FS_DIVIDER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rates {
    pub bclk_freq_hz: f64,
    pub fs_hz: f64,
    pub lrc_period_ticks: u64,
}

impl Rates {
    /// Integer sampling rate for containers that need one (WAV headers).
    /// Truncates: 80 MHz / 1536 = 52083.33 becomes 52083.
    pub fn nominal_fs_hz(&self) -> u32 {
        (u64::from(SYSTEM_CLOCK_HZ) / self.lrc_period_ticks) as u32
    }

    pub fn lrc_period_secs(&self) -> f64 {
        self.lrc_period_ticks as f64 / f64::from(SYSTEM_CLOCK_HZ)
    }
}

pub fn derive_rates(config: &ClockConfig) -> Rates {
    let bclk_freq_hz = f64::from(SYSTEM_CLOCK_HZ) / f64::from(config.clk_divider);
    Rates {
        bclk_freq_hz,
        fs_hz: bclk_freq_hz / f64::from(config.fs_divider),
        lrc_period_ticks: u64::from(config.clk_divider) * u64::from(config.fs_divider),
    }
}

/// Level and edges of the divided clock for one system tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClockEdge {
    pub level: bool,
    pub rising: bool,
    pub falling: bool,
}

/// Divider producing BCLK (and the identical XCLK).
///
/// Starts low out of reset and first rises `clk_divider / 2` ticks later.
#[derive(Debug, Clone)]
pub struct ClockGen {
    half: u32,
    remaining: u32,
    level: bool,
}

impl ClockGen {
    pub fn new(config: &ClockConfig) -> Self {
        let half = config.half_period_ticks();
        Self {
            half,
            remaining: half,
            level: false,
        }
    }

    pub fn level(&self) -> bool {
        self.level
    }

    /// Advance one system tick.
    pub fn tick(&mut self) -> ClockEdge {
        let mut edge = ClockEdge::default();
        if self.remaining == 0 {
            self.level = !self.level;
            self.remaining = self.half;
            edge.rising = self.level;
            edge.falling = !self.level;
        }
        self.remaining -= 1;
        edge.level = self.level;
        edge
    }
}
