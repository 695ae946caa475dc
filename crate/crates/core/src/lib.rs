//! Cycle-stepped model of an FPGA audio interface driving a WM8731 codec.
//!
//! The simulator advances an 80 MHz system tick. Every tick the clock
//! generator, the FPGA-side I2C master and DSP-mode serializers, and the
//! codec model each run once against the pin levels of the previous tick.

pub mod clock;
pub mod codec;
pub mod config;
pub mod decode;
pub mod dft;
pub mod error;
pub mod harness;
pub mod i2c;
pub mod pins;
pub mod regs;
pub mod runtime;
pub mod serial;
pub mod sim;
pub mod stream;
pub mod trace;
pub mod wav;
pub mod waveform;

pub use clock::{derive_rates, ClockConfig, ClockEdge, ClockGen, Rates, SYSTEM_CLOCK_HZ};
pub use codec::{CodecModel, CodecRegisterFile, I2cTransaction, RegisterWrite};
pub use decode::{decode_i2c, I2cMonitor, TraceReport};
pub use error::ConfigError;
pub use i2c::{I2cCommand, I2cConfig, I2cMaster, I2cState};
pub use pins::{PinDrive, PinState, Signal, Tri};
pub use regs::{AudioInterface, BusError, RegisterFile};
pub use runtime::{DelayEffect, DelayParams, Runtime, RuntimeError, Unit, VolumeDb};
pub use serial::{AudioFrame, AudioWordConfig, BitLength, DecodeError, StereoSample};
pub use sim::{Device, SimClock, SimConfig, SimError, Simulator};
pub use stream::{SampleStream, StreamError};
pub use trace::TraceBuffer;
