//! Behavioral stand-in for the WM8731 on the far side of the pins.
//!
//! The model only sees resolved pin levels, one tick late like any external
//! chip would. It acknowledges and stores control writes, drives ADCDAT
//! from a stimulus stream and captures the frames arriving on DACDAT.
//! Register contents are stored but do not change the audio path.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::i2c::{address_byte, I2cCommand, TRANSACTION_BYTES};
use crate::pins::{PinDrive, PinState, Tri};
use crate::serial::{AudioFrame, AudioWordConfig, BitLength, DecodeError, DspFrameDecoder, StereoSample};
use crate::sim::Device;
use crate::stream::SampleStream;

/// Codec register addresses.
pub mod reg {
    pub const LEFT_LINE_IN: u8 = 0x00;
    pub const RIGHT_LINE_IN: u8 = 0x01;
    pub const LEFT_HP_OUT: u8 = 0x02;
    pub const RIGHT_HP_OUT: u8 = 0x03;
    pub const ANALOG_PATH: u8 = 0x04;
    pub const DIGITAL_PATH: u8 = 0x05;
    pub const POWER_DOWN: u8 = 0x06;
    pub const DIGITAL_FORMAT: u8 = 0x07;
    pub const SAMPLING: u8 = 0x08;
    pub const ACTIVE: u8 = 0x09;
    pub const RESET: u8 = 0x0F;
}

pub const CODEC_REG_COUNT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegisterWrite {
    pub reg: u8,
    pub value: u16,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CodecRegisterFile {
    regs: [u16; CODEC_REG_COUNT],
    write_log: Vec<RegisterWrite>,
}

impl CodecRegisterFile {
    pub fn write(&mut self, reg: u8, value: u16) {
        let value = value & 0x1FF;
        self.write_log.push(RegisterWrite { reg, value });
        if reg == reg::RESET {
            self.regs = [0; CODEC_REG_COUNT];
        } else if let Some(slot) = self.regs.get_mut(usize::from(reg)) {
            *slot = value;
        }
    }

    pub fn read(&self, reg: u8) -> Option<u16> {
        self.regs.get(usize::from(reg)).copied()
    }

    pub fn write_log(&self) -> &[RegisterWrite] {
        &self.write_log
    }

    /// Input word length programmed in the digital audio format register.
    pub fn format_bit_length(&self) -> BitLength {
        match (self.regs[usize::from(reg::DIGITAL_FORMAT)] >> 2) & 0b11 {
            0b00 => BitLength::B16,
            0b01 => BitLength::B20,
            0b10 => BitLength::B24,
            _ => BitLength::B32,
        }
    }
}

/// A control-bus transaction as observed on the wires.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct I2cTransaction {
    pub start_tick: u64,
    pub stop_tick: Option<u64>,
    pub addr_byte: u8,
    pub payload: Vec<u8>,
    /// One entry per byte, address byte included: `true` when SDIN read low
    /// during that byte's ack clock.
    pub acks: Vec<bool>,
    pub well_formed: bool,
}

impl I2cTransaction {
    pub fn all_acked(&self) -> bool {
        !self.acks.is_empty() && self.acks.iter().all(|&a| a)
    }

    /// The register write carried by a complete three-byte transaction.
    pub fn command(&self) -> Option<I2cCommand> {
        match self.payload[..] {
            [b1, b2] => Some(I2cCommand::decode([b1, b2])),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SlavePhase {
    Idle,
    Receiving,
    /// Byte complete; the ack clock starts at the next SCLK fall.
    AckPending,
    /// In the ack clock, waiting for the master to release SDIN.
    AckWaitRelease,
    Acking,
    Ignoring,
}

/// Control-port receiver. Pulls SDIN low during ack clocks only once the
/// master has released the line, and lets go at the SCLK fall that ends
/// the ack clock.
#[derive(Debug, Clone)]
pub struct I2cSlave {
    phase: SlavePhase,
    last_sclk: bool,
    last_sdin: bool,
    shift: u8,
    bits: u8,
    bytes: Vec<u8>,
    drive_low: bool,
    commits: u64,
}

impl Default for I2cSlave {
    fn default() -> Self {
        Self {
            phase: SlavePhase::Idle,
            last_sclk: true,
            last_sdin: true,
            shift: 0,
            bits: 0,
            bytes: Vec::with_capacity(TRANSACTION_BYTES),
            drive_low: false,
            commits: 0,
        }
    }
}

impl I2cSlave {
    pub fn commits(&self) -> u64 {
        self.commits
    }

    fn tick(&mut self, pins: &PinState, regs: &mut CodecRegisterFile, drive: &mut PinDrive) {
        let sclk = pins.sclk;
        let sdin = pins.sdin.level();
        let rise = sclk && !self.last_sclk;
        let fall = !sclk && self.last_sclk;
        let held_high = sclk && self.last_sclk;

        if held_high && self.last_sdin && !sdin && !self.drive_low {
            self.phase = SlavePhase::Receiving;
            self.bits = 0;
            self.shift = 0;
            self.bytes.clear();
        } else if held_high && !self.last_sdin && sdin {
            self.phase = SlavePhase::Idle;
            self.drive_low = false;
        } else {
            match self.phase {
                SlavePhase::Receiving if rise => {
                    self.shift = (self.shift << 1) | u8::from(sdin);
                    self.bits += 1;
                    if self.bits == 8 {
                        self.bits = 0;
                        self.bytes.push(self.shift);
                        let addressed = self.bytes[0] == address_byte();
                        self.phase = if addressed && self.bytes.len() <= TRANSACTION_BYTES {
                            SlavePhase::AckPending
                        } else {
                            SlavePhase::Ignoring
                        };
                    }
                }
                SlavePhase::AckPending if fall => self.phase = SlavePhase::AckWaitRelease,
                SlavePhase::AckWaitRelease if !sclk && pins.sdin == Tri::Z => {
                    self.drive_low = true;
                    self.phase = SlavePhase::Acking;
                }
                // The master never released the line: no ack this byte.
                SlavePhase::AckWaitRelease if rise => self.phase = SlavePhase::Acking,
                SlavePhase::Acking if fall => {
                    self.drive_low = false;
                    self.phase = SlavePhase::Receiving;
                    if self.bytes.len() == TRANSACTION_BYTES {
                        let cmd = I2cCommand::decode([self.bytes[1], self.bytes[2]]);
                        regs.write(cmd.reg_addr(), cmd.data());
                        self.commits += 1;
                    }
                }
                _ => {}
            }
        }

        self.last_sclk = sclk;
        self.last_sdin = sdin;
        drive.sdin_slave = self.drive_low.then_some(false);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StimulusError {
    #[error("stimulus is {stimulus}-bit but the serial link carries {link}-bit words")]
    BitLengthMismatch { stimulus: BitLength, link: BitLength },
}

#[derive(Debug, Clone)]
enum AdcTx {
    Idle,
    /// LRC seen; the first bit goes out on the next BCLK fall.
    Armed,
    Shifting {
        word: u64,
        bits_left: u32,
    },
}

/// Serial audio side of the codec.
#[derive(Debug, Clone)]
pub struct AudioFrontend {
    word: AudioWordConfig,
    nominal_rate_hz: u32,
    last_bclk: bool,
    stimulus: VecDeque<StereoSample>,
    exhausted: bool,
    tx: AdcTx,
    adc_dat: bool,
    rx: DspFrameDecoder,
    captured: Vec<AudioFrame>,
    capture_error: Option<DecodeError>,
}

impl AudioFrontend {
    fn new(word: AudioWordConfig, nominal_rate_hz: u32) -> Self {
        Self {
            word,
            nominal_rate_hz,
            last_bclk: false,
            stimulus: VecDeque::new(),
            exhausted: false,
            tx: AdcTx::Idle,
            adc_dat: false,
            rx: DspFrameDecoder::new(word.bit_length()),
            captured: Vec::new(),
            capture_error: None,
        }
    }

    fn tick(&mut self, tick: u64, pins: &PinState, drive: &mut PinDrive) {
        let bl = self.word.bit_length();
        let rise = pins.bclk && !self.last_bclk;
        let fall = !pins.bclk && self.last_bclk;
        self.last_bclk = pins.bclk;

        if rise {
            // `pins` is the state at the end of the previous tick, which is
            // when the edge happened.
            match self.rx.push(tick.saturating_sub(1), pins.dac_lrc, pins.dac_dat) {
                Ok(Some(frame)) => self.captured.push(frame),
                Ok(None) => {}
                Err(e) => {
                    self.capture_error.get_or_insert(e);
                }
            }
            if pins.adc_lrc {
                self.tx = AdcTx::Armed;
            }
        } else if fall {
            match self.tx {
                AdcTx::Armed => {
                    let sample = self.stimulus.pop_front().unwrap_or_else(|| {
                        self.exhausted = true;
                        StereoSample::SILENCE
                    });
                    let bits = 2 * bl.bits();
                    self.adc_dat = (sample.frame_word(bl) >> (bits - 1)) & 1 == 1;
                    self.tx = AdcTx::Shifting {
                        word: sample.frame_word(bl),
                        bits_left: bits - 1,
                    };
                }
                AdcTx::Shifting { word, bits_left } if bits_left > 0 => {
                    self.adc_dat = (word >> (bits_left - 1)) & 1 == 1;
                    self.tx = AdcTx::Shifting {
                        word,
                        bits_left: bits_left - 1,
                    };
                }
                AdcTx::Shifting { .. } => {
                    self.adc_dat = false;
                    self.tx = AdcTx::Idle;
                }
                AdcTx::Idle => {}
            }
        }
        drive.adc_dat = self.adc_dat;
    }
}

/// The codec: control-port slave, register file and audio frontend.
#[derive(Debug, Clone)]
pub struct CodecModel {
    regs: CodecRegisterFile,
    slave: I2cSlave,
    audio: AudioFrontend,
}

impl CodecModel {
    pub fn new(word: AudioWordConfig, nominal_rate_hz: u32) -> Self {
        Self {
            regs: CodecRegisterFile::default(),
            slave: I2cSlave::default(),
            audio: AudioFrontend::new(word, nominal_rate_hz),
        }
    }

    pub fn registers(&self) -> &CodecRegisterFile {
        &self.regs
    }

    pub fn slave(&self) -> &I2cSlave {
        &self.slave
    }

    /// Queue samples for ADCDAT. One sample goes out per ADC frame,
    /// starting with the first LRC pulse the codec sees; once the queue
    /// runs dry the codec sends silence and flags the stimulus exhausted.
    pub fn drive_adc_from(&mut self, stimulus: &SampleStream) -> Result<(), StimulusError> {
        let link = self.audio.word.bit_length();
        if stimulus.bit_length() != link {
            return Err(StimulusError::BitLengthMismatch {
                stimulus: stimulus.bit_length(),
                link,
            });
        }
        self.audio.stimulus.extend(stimulus.samples().iter().copied());
        self.audio.exhausted = false;
        Ok(())
    }

    pub fn stimulus_exhausted(&self) -> bool {
        self.audio.exhausted
    }

    pub fn stimulus_remaining(&self) -> usize {
        self.audio.stimulus.len()
    }

    pub fn captured_frames(&self) -> &[AudioFrame] {
        &self.audio.captured
    }

    /// Every complete frame received on DACDAT so far.
    pub fn capture_dac(&self) -> Result<SampleStream, DecodeError> {
        if let Some(e) = self.audio.capture_error {
            return Err(e);
        }
        let samples = self.audio.captured.iter().map(|f| f.sample).collect();
        Ok(
            SampleStream::new(samples, self.audio.word.bit_length(), self.audio.nominal_rate_hz)
                .expect("decoded words are within the bit length"),
        )
    }

    /// Drop captured frames, e.g. after a setup phase.
    pub fn clear_capture(&mut self) {
        self.audio.captured.clear();
        self.audio.capture_error = None;
    }
}

impl Device for CodecModel {
    fn tick(&mut self, tick: u64, pins: &PinState, drive: &mut PinDrive) {
        self.slave.tick(pins, &mut self.regs, drive);
        self.audio.tick(tick, pins, drive);
    }
}
