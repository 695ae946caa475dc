//! PCM WAV import/export for [`SampleStream`]s.
//!
//! Files are 16- or 24-bit integer PCM. A 16-bit stream is written as
//! 16-bit; 20, 24 and 32-bit streams are written as 24-bit (20 shifted up
//! by 4, 32 divided by 256 toward zero).

use std::io::{Read, Seek, Write};
use std::path::Path;

use thiserror::Error;

use crate::serial::{BitLength, StereoSample};
use crate::stream::{convert_width, SampleStream, StreamError};

#[derive(Debug, Error)]
pub enum WavError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: hound::Error,
    },
    #[error("{path}: unsupported format: {reason}")]
    Unsupported { path: String, reason: String },
    #[error("{path}: {source}")]
    Stream {
        path: String,
        #[source]
        source: StreamError,
    },
}

/// Bit depth used in the file for a stream of `bit_length`.
pub fn container_bits(bit_length: BitLength) -> BitLength {
    match bit_length {
        BitLength::B16 => BitLength::B16,
        _ => BitLength::B24,
    }
}

fn spec_for(stream: &SampleStream) -> hound::WavSpec {
    hound::WavSpec {
        channels: 2,
        sample_rate: stream.nominal_rate_hz(),
        bits_per_sample: container_bits(stream.bit_length()).bits() as u16,
        sample_format: hound::SampleFormat::Int,
    }
}

pub fn write_wav_to<W: Write + Seek>(stream: &SampleStream, out: W) -> Result<(), hound::Error> {
    let bl = stream.bit_length();
    let file_bits = container_bits(bl);
    let mut w = hound::WavWriter::new(out, spec_for(stream))?;
    for s in stream.samples() {
        w.write_sample(convert_width(s.left, bl, file_bits))?;
        w.write_sample(convert_width(s.right, bl, file_bits))?;
    }
    w.finalize()
}

pub fn write_wav(stream: &SampleStream, path: &Path) -> Result<(), WavError> {
    let io_err = |source| WavError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(|e| io_err(hound::Error::IoError(e)))?;
    write_wav_to(stream, std::io::BufWriter::new(file)).map_err(io_err)
}

/// Read a 16/24-bit PCM file into a stream at `bit_length`. Mono is
/// duplicated to both channels.
pub fn read_wav_from<R: Read>(input: R, bit_length: BitLength, label: &str) -> Result<SampleStream, WavError> {
    let unsupported = |reason: String| WavError::Unsupported {
        path: label.to_string(),
        reason,
    };
    let reader = hound::WavReader::new(input).map_err(|source| match source {
        hound::Error::Unsupported => unsupported("not integer PCM".into()),
        hound::Error::FormatError(msg) => unsupported(msg.to_string()),
        source => WavError::Io {
            path: label.to_string(),
            source,
        },
    })?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(unsupported("floating-point samples".into()));
    }
    let file_bits = match spec.bits_per_sample {
        16 => BitLength::B16,
        24 => BitLength::B24,
        n => return Err(unsupported(format!("{n}-bit samples (need 16 or 24)"))),
    };
    let channels = usize::from(spec.channels);
    if !(1..=2).contains(&channels) {
        return Err(unsupported(format!("{channels} channels (need 1 or 2)")));
    }

    let raw: Vec<i32> = reader
        .into_samples::<i32>()
        .collect::<Result<_, _>>()
        .map_err(|source| WavError::Io {
            path: label.to_string(),
            source,
        })?;
    let conv = |v: i32| convert_width(v, file_bits, bit_length);
    let samples = raw
        .chunks_exact(channels)
        .map(|c| match c {
            [m] => StereoSample::mono(conv(*m)),
            [l, r] => StereoSample::new(conv(*l), conv(*r)),
            _ => unreachable!(),
        })
        .collect();
    SampleStream::new(samples, bit_length, spec.sample_rate).map_err(|source| WavError::Stream {
        path: label.to_string(),
        source,
    })
}

pub fn read_wav(path: &Path, bit_length: BitLength) -> Result<SampleStream, WavError> {
    let label = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| WavError::Io {
        path: label.clone(),
        source: hound::Error::IoError(e),
    })?;
    read_wav_from(std::io::BufReader::new(file), bit_length, &label)
}
