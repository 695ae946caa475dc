//! Hann-windowed magnitude spectrum for checking captured tones.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::stream::{Channel, SampleStream};

pub const MIN_SAMPLES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("need at least {MIN_SAMPLES} samples for a spectrum, got {0}")]
pub struct TooShort(pub usize);

/// One-sided magnitude spectrum, bins `0..=n/2`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    magnitudes: Vec<f64>,
    bin_hz: f64,
}

impl Spectrum {
    pub fn of(samples: &[f64], rate_hz: f64) -> Result<Self, TooShort> {
        let n = samples.len();
        if n < MIN_SAMPLES {
            return Err(TooShort(n));
        }
        let mut buf: Vec<Complex<f64>> = samples
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let w = 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos();
                Complex::new(x * w, 0.0)
            })
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let magnitudes = buf[..=n / 2].iter().map(|c| c.norm()).collect();
        Ok(Self {
            magnitudes,
            bin_hz: rate_hz / n as f64,
        })
    }

    pub fn from_stream(stream: &SampleStream, channel: Channel) -> Result<Self, TooShort> {
        let x: Vec<f64> = stream.channel(channel).map(f64::from).collect();
        Self::of(&x, f64::from(stream.nominal_rate_hz()))
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn bin_hz(&self) -> f64 {
        self.bin_hz
    }

    pub fn peak_bin(&self) -> usize {
        self.magnitudes
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, &m)| if m > best.1 { (i, m) } else { best })
            .0
    }

    pub fn peak_hz(&self) -> f64 {
        self.peak_bin() as f64 * self.bin_hz
    }

    /// Largest magnitude within `half_width` bins of `freq_hz`, in dB
    /// relative to the peak. `None` if the window lies above Nyquist.
    pub fn level_db_near(&self, freq_hz: f64, half_width: usize) -> Option<f64> {
        let centre = (freq_hz / self.bin_hz).round() as usize;
        let lo = centre.saturating_sub(half_width);
        if lo >= self.magnitudes.len() {
            return None;
        }
        let hi = (centre + half_width).min(self.magnitudes.len() - 1);
        let m = self.magnitudes[lo..=hi].iter().cloned().fold(0.0, f64::max);
        let peak = self.magnitudes[self.peak_bin()];
        Some(20.0 * (m / peak).log10())
    }
}

/// Frequency of the strongest bin, using the stream's nominal rate.
pub fn dominant_frequency(stream: &SampleStream, channel: Channel) -> Result<f64, TooShort> {
    Ok(Spectrum::from_stream(stream, channel)?.peak_hz())
}
