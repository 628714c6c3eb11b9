//! Doppler spectrograms of complex fading series.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::hbs::fading::FadingSeries;

/// STFT configuration: 1024-sample Hann window with 50 % overlap at
/// 30 kHz gives about 29 Hz resolution and 17 ms hop.
#[derive(Debug, Clone, Copy)]
pub struct StftParams {
    pub window: usize,
    pub hop: usize,
}

impl Default for StftParams {
    fn default() -> Self {
        Self {
            window: 1024,
            hop: 512,
        }
    }
}

/// Magnitude short-time Fourier transform, frequency axis centered on
/// 0 Hz (fftshifted to +-fs/2).
#[derive(Debug, Clone)]
pub struct Spectrogram {
    pub freqs_hz: Vec<f64>,
    pub times_s: Vec<f64>,
    /// magnitude[frame][bin], bins ordered like `freqs_hz`
    pub magnitude: Vec<Vec<f64>>,
}

impl Spectrogram {
    /// Index of the 0 Hz bin.
    pub fn dc_bin(&self) -> usize {
        self.freqs_hz.len() / 2
    }

    /// Fraction of total energy within `halfwidth_bins` of 0 Hz.
    pub fn dc_energy_fraction(&self, halfwidth_bins: usize) -> f64 {
        let dc = self.dc_bin();
        let mut total = 0.0;
        let mut near = 0.0;
        for frame in &self.magnitude {
            for (k, m) in frame.iter().enumerate() {
                let e = m * m;
                total += e;
                if k.abs_diff(dc) <= halfwidth_bins {
                    near += e;
                }
            }
        }
        if total > 0.0 {
            near / total
        } else {
            0.0
        }
    }

    /// Frequency of the strongest bin of one frame, optionally
    /// excluding bins within `exclude_dc` of 0 Hz.
    pub fn peak_frequency(&self, frame: usize, exclude_dc: usize) -> f64 {
        let dc = self.dc_bin();
        let row = &self.magnitude[frame];
        let mut best = 0usize;
        let mut best_mag = f64::NEG_INFINITY;
        for (k, m) in row.iter().enumerate() {
            if exclude_dc > 0 && k.abs_diff(dc) < exclude_dc {
                continue;
            }
            if *m > best_mag {
                best_mag = *m;
                best = k;
            }
        }
        self.freqs_hz[best]
    }
}

pub fn doppler_spectrogram(series: &FadingSeries) -> Result<Spectrogram> {
    doppler_spectrogram_with(series, &StftParams::default())
}

pub fn doppler_spectrogram_with(series: &FadingSeries, params: &StftParams) -> Result<Spectrogram> {
    let n = params.window;
    if series.samples.len() < n {
        return Err(Error::SeriesTooShort {
            len: series.samples.len(),
            window: n,
        });
    }
    let hop = params.hop.max(1);
    let fs = series.fs_hz;

    // periodic Hann: integral-bin tones stay confined to the mainlobe
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos())
        .collect();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);

    let mut frames = Vec::new();
    let mut times = Vec::new();
    let mut start = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    while start + n <= series.samples.len() {
        for i in 0..n {
            buf[i] = series.samples[start + i] * window[i];
        }
        fft.process(&mut buf);
        // fftshift
        let mut mag = vec![0.0; n];
        for (k, m) in mag.iter_mut().enumerate() {
            let src = (k + n / 2) % n;
            *m = buf[src].norm();
        }
        frames.push(mag);
        times.push(series.t0_s + (start + n / 2) as f64 / fs);
        start += hop;
    }

    let freqs = (0..n)
        .map(|k| (k as f64 - (n / 2) as f64) * fs / n as f64)
        .collect();

    Ok(Spectrogram {
        freqs_hz: freqs,
        times_s: times,
        magnitude: frames,
    })
}
