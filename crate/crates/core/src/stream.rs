use thiserror::Error;

use crate::serial::{BitLength, StereoSample};

/// Default rate written to WAV headers: floor(80 MHz / 1536).
pub const DEFAULT_NOMINAL_RATE_HZ: u32 = 52_083;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StreamError {
    #[error("sample {index} ({left}, {right}) does not fit in {bit_length} bits")]
    OutOfRange {
        index: usize,
        left: i32,
        right: i32,
        bit_length: BitLength,
    },
    #[error("sample rate must be positive")]
    ZeroRate,
}

/// Stereo samples at a fixed bit depth and nominal rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleStream {
    samples: Vec<StereoSample>,
    bit_length: BitLength,
    nominal_rate_hz: u32,
}

impl SampleStream {
    pub fn new(samples: Vec<StereoSample>, bit_length: BitLength, nominal_rate_hz: u32) -> Result<Self, StreamError> {
        if nominal_rate_hz == 0 {
            return Err(StreamError::ZeroRate);
        }
        if let Some((index, s)) = samples.iter().enumerate().find(|(_, s)| !s.fits(bit_length)) {
            return Err(StreamError::OutOfRange {
                index,
                left: s.left,
                right: s.right,
                bit_length,
            });
        }
        Ok(Self {
            samples,
            bit_length,
            nominal_rate_hz,
        })
    }

    pub fn empty(bit_length: BitLength) -> Self {
        Self {
            samples: Vec::new(),
            bit_length,
            nominal_rate_hz: DEFAULT_NOMINAL_RATE_HZ,
        }
    }

    pub fn samples(&self) -> &[StereoSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<StereoSample> {
        self.samples
    }

    pub fn bit_length(&self) -> BitLength {
        self.bit_length
    }

    pub fn nominal_rate_hz(&self) -> u32 {
        self.nominal_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn channel(&self, channel: Channel) -> impl Iterator<Item = i32> + '_ {
        self.samples.iter().map(move |s| match channel {
            Channel::Left => s.left,
            Channel::Right => s.right,
        })
    }

    /// Re-express every sample at another bit depth: widening shifts left,
    /// narrowing divides and truncates toward zero.
    pub fn convert(&self, to: BitLength) -> SampleStream {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                StereoSample::new(
                    convert_width(s.left, self.bit_length, to),
                    convert_width(s.right, self.bit_length, to),
                )
            })
            .collect();
        SampleStream {
            samples,
            bit_length: to,
            nominal_rate_hz: self.nominal_rate_hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Left,
    Right,
}

/// Width conversion for one sample value.
pub fn convert_width(value: i32, from: BitLength, to: BitLength) -> i32 {
    let (f, t) = (from.bits(), to.bits());
    if t >= f {
        ((i64::from(value)) << (t - f)) as i32
    } else {
        (i64::from(value) / (1i64 << (f - t))) as i32
    }
}
