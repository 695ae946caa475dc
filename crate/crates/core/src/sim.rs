//! Discrete-time kernel stepping every state machine once per 80 MHz tick.
//!
//! Each tick runs in a fixed order: clock generator, the FPGA audio
//! interface (I2C master, DAC, ADC), the codec model, then any extra
//! attached devices in attachment order. Every device reads the pin state
//! resolved at the end of the previous tick and updates its own registered
//! outputs; the outputs are resolved and traced once all devices ran.

use thiserror::Error;

use crate::clock::{ClockConfig, ClockGen, Rates, SYSTEM_CLOCK_HZ};
use crate::codec::CodecModel;
use crate::error::ConfigError;
use crate::i2c::I2cConfig;
use crate::pins::{PinDrive, PinState};
use crate::regs::{AudioInterface, RegisterFile};
use crate::serial::{AudioWordConfig, BitLength, FrameTiming};
use crate::trace::TraceBuffer;

/// Something on the far side of the pins, advanced once per system tick.
pub trait Device {
    /// `pins` is the resolved state at the end of the previous tick.
    fn tick(&mut self, tick: u64, pins: &PinState, drive: &mut PinDrive);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("bus contention on sdin at tick {tick}: master and codec both drive the line")]
    Contention { tick: u64 },
    #[error("timed out after {waited} ticks (at tick {tick})")]
    Timeout { tick: u64, waited: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimClock {
    pub tick_count: u64,
    pub system_freq_hz: u32,
}

impl SimClock {
    pub fn elapsed_secs(&self) -> f64 {
        self.tick_count as f64 / f64::from(self.system_freq_hz)
    }
}

impl Default for SimClock {
    fn default() -> Self {
        Self {
            tick_count: 0,
            system_freq_hz: SYSTEM_CLOCK_HZ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimConfig {
    pub clock: ClockConfig,
    pub word: AudioWordConfig,
    pub i2c: I2cConfig,
    pub trace: bool,
}

impl SimConfig {
    pub fn new(clk_divider: u32, bit_length: u32, sclk_hz: u32, trace: bool) -> Result<Self, ConfigError> {
        let clock = ClockConfig::new(clk_divider, crate::clock::DEFAULT_FS_DIVIDER)?;
        let word = AudioWordConfig::new(BitLength::try_from(bit_length)?, &clock)?;
        let i2c = I2cConfig::new(sclk_hz)?;
        Ok(Self {
            clock,
            word,
            i2c,
            trace,
        })
    }

    pub fn rates(&self) -> Rates {
        self.clock.rates()
    }
}

pub struct Simulator {
    config: SimConfig,
    rates: Rates,
    clock: SimClock,
    clockgen: ClockGen,
    iface: AudioInterface,
    codec: Option<CodecModel>,
    devices: Vec<Box<dyn Device>>,
    drive: PinDrive,
    pins: PinState,
    trace: Option<TraceBuffer>,
}

impl Simulator {
    /// FPGA side only; attach a codec with [`Simulator::with_codec`].
    pub fn new(config: SimConfig) -> Self {
        let rates = config.rates();
        let drive = PinDrive::default();
        Self {
            config,
            rates,
            clock: SimClock::default(),
            clockgen: ClockGen::new(&config.clock),
            iface: AudioInterface::new(config.word, config.i2c, rates.lrc_period_ticks),
            codec: None,
            devices: Vec::new(),
            drive,
            pins: drive.resolve().expect("reset drive has no contention"),
            trace: config.trace.then(TraceBuffer::new),
        }
    }

    /// FPGA side plus a codec model sharing the same word length.
    pub fn with_codec(config: SimConfig) -> Self {
        let mut sim = Self::new(config);
        let codec = CodecModel::new(config.word, sim.rates.nominal_fs_hz());
        sim.codec = Some(codec);
        sim
    }

    pub fn attach(&mut self, device: Box<dyn Device>) {
        self.devices.push(device);
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn rates(&self) -> Rates {
        self.rates
    }

    pub fn clock(&self) -> SimClock {
        self.clock
    }

    pub fn tick_count(&self) -> u64 {
        self.clock.tick_count
    }

    pub fn pins(&self) -> &PinState {
        &self.pins
    }

    pub fn interface(&self) -> &AudioInterface {
        &self.iface
    }

    pub fn interface_mut(&mut self) -> &mut AudioInterface {
        &mut self.iface
    }

    pub fn registers(&self) -> &RegisterFile {
        self.iface.registers()
    }

    pub fn codec(&self) -> Option<&CodecModel> {
        self.codec.as_ref()
    }

    pub fn codec_mut(&mut self) -> Option<&mut CodecModel> {
        self.codec.as_mut()
    }

    pub fn trace(&self) -> Option<&TraceBuffer> {
        self.trace.as_ref()
    }

    pub fn take_trace(&mut self) -> Option<TraceBuffer> {
        self.trace.take()
    }

    fn tick_once(&mut self) -> Result<(), SimError> {
        let tick = self.clock.tick_count;
        let bclk = self.clockgen.tick();
        self.drive.bclk = bclk.level;
        self.drive.xclk = bclk.level;

        let timing = FrameTiming {
            tick,
            bclk,
            lrc_period_ticks: self.rates.lrc_period_ticks,
        };
        let prev = self.pins;
        self.iface.tick(&timing, &prev, &mut self.drive);
        if let Some(codec) = self.codec.as_mut() {
            codec.tick(tick, &prev, &mut self.drive);
        }
        for device in &mut self.devices {
            device.tick(tick, &prev, &mut self.drive);
        }

        self.pins = self.drive.resolve().map_err(|_| SimError::Contention { tick })?;
        if let Some(trace) = self.trace.as_mut() {
            trace.record(tick, &self.pins);
        }
        self.clock.tick_count += 1;
        Ok(())
    }

    /// Advance `n` ticks.
    pub fn step(&mut self, n: u64) -> Result<SimClock, SimError> {
        for _ in 0..n {
            self.tick_once()?;
        }
        Ok(self.clock)
    }

    /// Step until `predicate` holds and return the tick count at that point.
    /// The predicate is checked before the first step, so an already-true
    /// condition returns immediately.
    pub fn run_until<F>(&mut self, mut predicate: F, max_ticks: u64) -> Result<u64, SimError>
    where
        F: FnMut(&PinState, &RegisterFile) -> bool,
    {
        let start = self.clock.tick_count;
        loop {
            if predicate(&self.pins, self.iface.registers()) {
                return Ok(self.clock.tick_count);
            }
            let waited = self.clock.tick_count - start;
            if waited >= max_ticks {
                return Err(SimError::Timeout {
                    tick: self.clock.tick_count,
                    waited,
                });
            }
            self.tick_once()?;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pins::Tri;

    #[test]
    fn step_zero_is_identity() {
        let mut sim = Simulator::new(SimConfig::default());
        assert_eq!(sim.step(0).unwrap().tick_count, 0);
    }

    #[test]
    fn one_lrc_period_is_19_2_us() {
        let mut sim = Simulator::new(SimConfig::default());
        let clock = sim.step(1536).unwrap();
        assert_eq!(clock.tick_count, 1536);
        assert!((clock.elapsed_secs() - 19.2e-6).abs() < 1e-15);
    }

    #[test]
    fn elapsed_is_tick_over_frequency() {
        let clock = SimClock {
            tick_count: 80_000_000,
            system_freq_hz: SYSTEM_CLOCK_HZ,
        };
        assert_eq!(clock.elapsed_secs(), 1.0);
    }

    #[test]
    fn run_until_true_returns_now() {
        let mut sim = Simulator::new(SimConfig::default());
        sim.step(7).unwrap();
        assert_eq!(sim.run_until(|_, _| true, 1).unwrap(), 7);
    }

    #[test]
    fn run_until_times_out() {
        let mut sim = Simulator::new(SimConfig::default());
        let err = sim.run_until(|_, _| false, 10).unwrap_err();
        assert_eq!(err, SimError::Timeout { tick: 10, waited: 10 });
        assert_eq!(sim.tick_count(), 10);
    }

    struct Jammer {
        at: u64,
    }

    impl Device for Jammer {
        fn tick(&mut self, tick: u64, _pins: &PinState, drive: &mut PinDrive) {
            if tick == self.at {
                drive.sdin_slave = Some(false);
            }
        }
    }

    #[test]
    fn contention_names_the_tick() {
        let mut sim = Simulator::new(SimConfig::default());
        sim.interface_mut().bus_write(crate::regs::I2C_DATA, 0x1800).unwrap();
        // The master drives SDIN from tick 0 of the transaction.
        sim.attach(Box::new(Jammer { at: 42 }));
        let err = sim.step(100).unwrap_err();
        assert_eq!(err, SimError::Contention { tick: 42 });
    }

    #[test]
    fn trace_starts_at_tick_zero_with_reset_levels() {
        let cfg = SimConfig {
            trace: true,
            ..SimConfig::default()
        };
        let mut sim = Simulator::new(cfg);
        sim.step(20).unwrap();
        let trace = sim.trace().unwrap();
        assert_eq!(trace.value_at(crate::pins::Signal::Sdin, 0), Some(Tri::Z));
        assert_eq!(trace.value_at(crate::pins::Signal::Sclk, 0), Some(Tri::High));
        assert_eq!(
            trace.changes(crate::pins::Signal::Bclk),
            &[
                (0, Tri::Low),
                (3, Tri::High),
                (6, Tri::Low),
                (9, Tri::High),
                (12, Tri::Low),
                (15, Tri::High),
                (18, Tri::Low)
            ]
        );
        assert_eq!(
            trace.changes(crate::pins::Signal::Xclk),
            trace.changes(crate::pins::Signal::Bclk)
        );
    }
}
