//! DSP Mode A serial audio.
//!
//! Each frame starts with LRC high for exactly one BCLK period. The left
//! word follows on the next BCLK cycle, then the right word, both MSB first
//! and two's complement. The FPGA changes its outputs on BCLK falling edges
//! and samples inputs on rising edges.
//!
//! Frames start on the BCLK falling edges where the system tick is a
//! multiple of the LRC period, so enabling a unit always waits for the next
//! period boundary and the cadence stays phase-stable.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::clock::{ClockConfig, ClockEdge};
use crate::error::ConfigError;
use crate::pins::{PinDrive, PinState, Signal};
use crate::regs::RegisterFile;
use crate::trace::TraceBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(into = "u32")]
pub enum BitLength {
    #[default]
    B16,
    B20,
    B24,
    B32,
}

impl BitLength {
    pub const ALL: [BitLength; 4] = [BitLength::B16, BitLength::B20, BitLength::B24, BitLength::B32];

    pub fn bits(self) -> u32 {
        match self {
            BitLength::B16 => 16,
            BitLength::B20 => 20,
            BitLength::B24 => 24,
            BitLength::B32 => 32,
        }
    }

    pub fn min_value(self) -> i32 {
        (i64::MIN >> (64 - self.bits())) as i32
    }

    pub fn max_value(self) -> i32 {
        (i64::MAX >> (64 - self.bits())) as i32
    }

    pub fn contains(self, value: i32) -> bool {
        (self.min_value()..=self.max_value()).contains(&value)
    }

    pub fn mask(self) -> u32 {
        (u64::MAX >> (64 - self.bits())) as u32
    }

    /// Low `bits` of the two's complement representation.
    pub fn to_word(self, value: i32) -> u32 {
        value as u32 & self.mask()
    }

    /// Sign-extend a `bits`-wide word.
    pub fn from_word(self, word: u32) -> i32 {
        let shift = 32 - self.bits();
        ((word << shift) as i32) >> shift
    }

    pub fn saturate(self, value: i64) -> i32 {
        value.clamp(i64::from(self.min_value()), i64::from(self.max_value())) as i32
    }
}

impl TryFrom<u32> for BitLength {
    type Error = ConfigError;

    fn try_from(bits: u32) -> Result<Self, Self::Error> {
        match bits {
            16 => Ok(BitLength::B16),
            20 => Ok(BitLength::B20),
            24 => Ok(BitLength::B24),
            32 => Ok(BitLength::B32),
            _ => Err(ConfigError::new(
                "audio.bit_length",
                format!("must be one of 16, 20, 24, 32; got {bits}"),
            )),
        }
    }
}

impl From<BitLength> for u32 {
    fn from(bl: BitLength) -> u32 {
        bl.bits()
    }
}

impl fmt::Display for BitLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AudioWordConfig {
    bit_length: BitLength,
}

impl AudioWordConfig {
    /// A frame (LRC cycle plus both words) must fit in one LRC period.
    pub fn new(bit_length: BitLength, clock: &ClockConfig) -> Result<Self, ConfigError> {
        let frame_bits = 2 * bit_length.bits() + 1;
        if frame_bits > clock.fs_divider() {
            return Err(ConfigError::new(
                "audio.bit_length",
                format!(
                    "a {bit_length}-bit frame needs {frame_bits} BCLK cycles but the LRC period has {}",
                    clock.fs_divider()
                ),
            ));
        }
        Ok(Self { bit_length })
    }

    pub fn bit_length(&self) -> BitLength {
        self.bit_length
    }

    /// BCLK cycles from the LRC cycle through the last data bit.
    pub fn frame_bits(&self) -> u32 {
        2 * self.bit_length.bits() + 1
    }
}

impl Default for AudioWordConfig {
    fn default() -> Self {
        Self {
            bit_length: BitLength::B16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct StereoSample {
    pub left: i32,
    pub right: i32,
}

impl StereoSample {
    pub const SILENCE: StereoSample = StereoSample { left: 0, right: 0 };

    pub fn new(left: i32, right: i32) -> Self {
        Self { left, right }
    }

    pub fn mono(value: i32) -> Self {
        Self::new(value, value)
    }

    pub fn fits(&self, bit_length: BitLength) -> bool {
        bit_length.contains(self.left) && bit_length.contains(self.right)
    }

    /// Both words concatenated, left in the high half; bit `2 * bits - 1`
    /// goes on the wire first.
    pub fn frame_word(&self, bit_length: BitLength) -> u64 {
        (u64::from(bit_length.to_word(self.left)) << bit_length.bits()) | u64::from(bit_length.to_word(self.right))
    }

    pub fn from_frame_word(word: u64, bit_length: BitLength) -> Self {
        let bits = bit_length.bits();
        Self {
            left: bit_length.from_word((word >> bits) as u32),
            right: bit_length.from_word((word & u64::from(bit_length.mask())) as u32),
        }
    }
}

/// Phase of a serializer or deserializer within a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SerialPhase {
    Idle,
    LrcPulse,
    ShiftLeft,
    ShiftRight,
    WaitNextFrame,
}

/// Per-tick timing shared by the FPGA-side audio units.
#[derive(Debug, Clone, Copy)]
pub struct FrameTiming {
    pub tick: u64,
    pub bclk: ClockEdge,
    pub lrc_period_ticks: u64,
}

impl FrameTiming {
    pub fn frame_start(&self) -> bool {
        self.bclk.falling && self.tick.is_multiple_of(self.lrc_period_ticks)
    }
}

/// FPGA to codec: shifts the latched output registers onto DACDAT.
#[derive(Debug, Clone)]
pub struct DacSerializer {
    word: AudioWordConfig,
    phase: SerialPhase,
    bit_index: u32,
    latched: StereoSample,
    lrc: bool,
    dat: bool,
}

impl DacSerializer {
    pub fn new(word: AudioWordConfig) -> Self {
        Self {
            word,
            phase: SerialPhase::Idle,
            bit_index: 0,
            latched: StereoSample::SILENCE,
            lrc: false,
            dat: false,
        }
    }

    pub fn phase(&self) -> SerialPhase {
        self.phase
    }

    pub fn latched(&self) -> StereoSample {
        self.latched
    }

    pub fn tick(&mut self, timing: &FrameTiming, regs: &mut RegisterFile, drive: &mut PinDrive) {
        let bl = self.word.bit_length;
        if !regs.dac_en {
            self.phase = SerialPhase::Idle;
            self.lrc = false;
            self.dat = false;
            regs.dac_busy = false;
        } else if timing.frame_start() {
            self.latched = StereoSample::new(regs.dac_l, regs.dac_r);
            self.phase = SerialPhase::LrcPulse;
            self.lrc = true;
            self.dat = false;
            regs.dac_busy = true;
            regs.dac_lrc_seen = true;
        } else if timing.bclk.falling {
            let msb = bl.bits() - 1;
            match self.phase {
                SerialPhase::LrcPulse => {
                    self.lrc = false;
                    self.phase = SerialPhase::ShiftLeft;
                    self.bit_index = msb;
                }
                SerialPhase::ShiftLeft if self.bit_index == 0 => {
                    self.phase = SerialPhase::ShiftRight;
                    self.bit_index = msb;
                }
                SerialPhase::ShiftLeft | SerialPhase::ShiftRight if self.bit_index > 0 => {
                    self.bit_index -= 1;
                }
                SerialPhase::ShiftRight => {
                    self.phase = SerialPhase::WaitNextFrame;
                    regs.dac_busy = false;
                }
                _ => {}
            }
            self.dat = match self.phase {
                SerialPhase::ShiftLeft => bl.to_word(self.latched.left) >> self.bit_index & 1 == 1,
                SerialPhase::ShiftRight => bl.to_word(self.latched.right) >> self.bit_index & 1 == 1,
                _ => false,
            };
        }
        drive.dac_lrc = self.lrc;
        drive.dac_dat = self.dat;
    }
}

/// Codec to FPGA: generates ADCLRC and collects ADCDAT into the input
/// registers. Both channels land in the same tick, one BCLK period after
/// the last bit, at which point busy drops.
#[derive(Debug, Clone)]
pub struct AdcDeserializer {
    word: AudioWordConfig,
    phase: SerialPhase,
    bits_left: u32,
    shift: u64,
    commit_pending: bool,
    lrc: bool,
}

impl AdcDeserializer {
    pub fn new(word: AudioWordConfig) -> Self {
        Self {
            word,
            phase: SerialPhase::Idle,
            bits_left: 0,
            shift: 0,
            commit_pending: false,
            lrc: false,
        }
    }

    pub fn phase(&self) -> SerialPhase {
        self.phase
    }

    pub fn tick(&mut self, timing: &FrameTiming, pins: &PinState, regs: &mut RegisterFile, drive: &mut PinDrive) {
        let bl = self.word.bit_length;
        if !regs.adc_en {
            self.phase = SerialPhase::Idle;
            self.lrc = false;
            self.commit_pending = false;
            regs.adc_busy = false;
        } else if timing.frame_start() {
            self.phase = SerialPhase::LrcPulse;
            self.lrc = true;
            self.shift = 0;
            self.bits_left = 2 * bl.bits();
            self.commit_pending = false;
            regs.adc_busy = true;
            regs.adc_lrc_seen = true;
        } else if timing.bclk.falling {
            if self.phase == SerialPhase::LrcPulse {
                self.lrc = false;
                self.phase = SerialPhase::ShiftLeft;
            } else if self.commit_pending {
                let sample = StereoSample::from_frame_word(self.shift, bl);
                regs.adc_l = sample.left;
                regs.adc_r = sample.right;
                regs.adc_busy = false;
                self.commit_pending = false;
                self.phase = SerialPhase::WaitNextFrame;
            }
        } else if timing.bclk.rising
            && matches!(self.phase, SerialPhase::ShiftLeft | SerialPhase::ShiftRight)
            && self.bits_left > 0
        {
            self.shift = (self.shift << 1) | u64::from(pins.adc_dat);
            self.bits_left -= 1;
            if self.bits_left == bl.bits() {
                self.phase = SerialPhase::ShiftRight;
            } else if self.bits_left == 0 {
                self.commit_pending = true;
            }
        }
        drive.adc_lrc = self.lrc;
    }
}

/// A decoded frame. `lrc_tick` is the BCLK rising edge that sampled LRC high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AudioFrame {
    pub lrc_tick: u64,
    pub sample: StereoSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("LRC width violation at tick {tick}: LRC high for more than one BCLK period")]
    LrcWidth { tick: u64 },
    #[error("truncated frame at tick {tick}: {bits} of {expected} data bits before {reason}")]
    Truncated {
        tick: u64,
        bits: u32,
        expected: u32,
        reason: TruncatedBy,
    },
}

impl DecodeError {
    pub fn tick(&self) -> u64 {
        match *self {
            DecodeError::LrcWidth { tick } | DecodeError::Truncated { tick, .. } => tick,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncatedBy {
    Lrc,
    EndOfTrace,
}

impl fmt::Display for TruncatedBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TruncatedBy::Lrc => "the next LRC pulse",
            TruncatedBy::EndOfTrace => "the end of the trace",
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum DecoderState {
    Hunting,
    /// LRC sampled high once; the next sample must be low.
    AfterLrc {
        lrc_tick: u64,
    },
    Collecting {
        lrc_tick: u64,
        word: u64,
        bits: u32,
    },
    /// Waiting for a too-wide LRC pulse to end.
    Resync,
}

/// Streaming DSP Mode A receiver, fed one `(lrc, dat)` sample per BCLK
/// rising edge. Strict about the one-cycle LRC width.
#[derive(Debug, Clone)]
pub struct DspFrameDecoder {
    bit_length: BitLength,
    state: DecoderState,
}

impl DspFrameDecoder {
    pub fn new(bit_length: BitLength) -> Self {
        Self {
            bit_length,
            state: DecoderState::Hunting,
        }
    }

    fn expected_bits(&self) -> u32 {
        2 * self.bit_length.bits()
    }

    pub fn push(&mut self, tick: u64, lrc: bool, dat: bool) -> Result<Option<AudioFrame>, DecodeError> {
        let expected = self.expected_bits();
        match self.state {
            DecoderState::Hunting => {
                if lrc {
                    self.state = DecoderState::AfterLrc { lrc_tick: tick };
                }
                Ok(None)
            }
            DecoderState::Resync => {
                if !lrc {
                    self.state = DecoderState::Hunting;
                }
                Ok(None)
            }
            DecoderState::AfterLrc { lrc_tick } => {
                if lrc {
                    self.state = DecoderState::Resync;
                    return Err(DecodeError::LrcWidth { tick: lrc_tick });
                }
                self.state = DecoderState::Collecting {
                    lrc_tick,
                    word: u64::from(dat),
                    bits: 1,
                };
                Ok(self.finish_if_complete())
            }
            DecoderState::Collecting { lrc_tick, word, bits } => {
                if lrc {
                    self.state = DecoderState::AfterLrc { lrc_tick: tick };
                    return Err(DecodeError::Truncated {
                        tick: lrc_tick,
                        bits,
                        expected,
                        reason: TruncatedBy::Lrc,
                    });
                }
                self.state = DecoderState::Collecting {
                    lrc_tick,
                    word: (word << 1) | u64::from(dat),
                    bits: bits + 1,
                };
                Ok(self.finish_if_complete())
            }
        }
    }

    fn finish_if_complete(&mut self) -> Option<AudioFrame> {
        if let DecoderState::Collecting { lrc_tick, word, bits } = self.state {
            if bits == self.expected_bits() {
                self.state = DecoderState::Hunting;
                return Some(AudioFrame {
                    lrc_tick,
                    sample: StereoSample::from_frame_word(word, self.bit_length),
                });
            }
        }
        None
    }

    /// Report a frame left open when the input ended.
    pub fn finish(&mut self) -> Result<(), DecodeError> {
        let state = std::mem::replace(&mut self.state, DecoderState::Hunting);
        match state {
            DecoderState::AfterLrc { lrc_tick } => Err(DecodeError::Truncated {
                tick: lrc_tick,
                bits: 0,
                expected: self.expected_bits(),
                reason: TruncatedBy::EndOfTrace,
            }),
            DecoderState::Collecting { lrc_tick, bits, .. } => Err(DecodeError::Truncated {
                tick: lrc_tick,
                bits,
                expected: self.expected_bits(),
                reason: TruncatedBy::EndOfTrace,
            }),
            _ => Ok(()),
        }
    }
}

/// Which serial link of the trace to decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AudioLane {
    Dac,
    Adc,
}

impl AudioLane {
    fn signals(self) -> (Signal, Signal) {
        match self {
            AudioLane::Dac => (Signal::DacLrc, Signal::DacDat),
            AudioLane::Adc => (Signal::AdcLrc, Signal::AdcDat),
        }
    }
}

/// Every frame and every framing error found on one lane.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameDecode {
    pub frames: Vec<AudioFrame>,
    pub errors: Vec<DecodeError>,
}

/// Decode a lane, continuing past framing errors.
pub fn decode_lane(trace: &TraceBuffer, lane: AudioLane, bit_length: BitLength) -> FrameDecode {
    let (lrc_sig, dat_sig) = lane.signals();
    let mut decoder = DspFrameDecoder::new(bit_length);
    let mut out = FrameDecode::default();
    let mut prev_bclk = false;
    for (tick, pins) in trace.snapshots() {
        let bclk = pins.bclk;
        if bclk && !prev_bclk {
            let lrc = pins.get(lrc_sig).level();
            let dat = pins.get(dat_sig).level();
            match decoder.push(tick, lrc, dat) {
                Ok(Some(frame)) => out.frames.push(frame),
                Ok(None) => {}
                Err(e) => out.errors.push(e),
            }
        }
        prev_bclk = bclk;
    }
    if let Err(e) = decoder.finish() {
        out.errors.push(e);
    }
    out
}

/// Strict decode: the first framing error aborts.
pub fn decode_frames(
    trace: &TraceBuffer,
    lane: AudioLane,
    bit_length: BitLength,
) -> Result<Vec<AudioFrame>, DecodeError> {
    let decoded = decode_lane(trace, lane, bit_length);
    match decoded.errors.into_iter().min_by_key(DecodeError::tick) {
        Some(e) => Err(e),
        None => Ok(decoded.frames),
    }
}
