//! Dynamic fading synthesis: interpolate point-cloud motion to the
//! sampling grid, rebuild the screen at every sample and evaluate the
//! edge-diffraction field.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::map_range;
use crate::geometry::Point3;
use crate::hbs::edge::{edge_field_with, EdgeParams};
use crate::hbs::screen::{build_screen, rect_screen, ScreenModel};
use crate::hbs::HumanFrame;

/// Sampling rate used by the measurement chain this engine mirrors.
pub const DEFAULT_FS_HZ: f64 = 30_000.0;

/// Uniformly sampled complex channel gain versus time, normalized by
/// the LoS response.
#[derive(Debug, Clone)]
pub struct FadingSeries {
    pub fs_hz: f64,
    pub t0_s: f64,
    pub samples: Vec<Complex64>,
    /// Geometric LoS state per sample (true = unblocked).
    pub lit: Vec<bool>,
    /// Set when frames had inconsistent point counts and were paired
    /// by nearest neighbor.
    pub resampled_points: bool,
    /// Number of samples where the stationary-point search degenerated
    /// and the aperture integral was used.
    pub degenerate_samples: usize,
}

impl FadingSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time_of(&self, i: usize) -> f64 {
        self.t0_s + i as f64 / self.fs_hz
    }
}

/// Align every frame to the first frame's point count by nearest
/// neighbor against the previous aligned frame. Returns the aligned
/// clouds and whether any resampling happened.
fn align_frames(frames: &[HumanFrame]) -> (Vec<Vec<Point3>>, bool) {
    let n0 = frames[0].points.len();
    let mut resampled = false;
    let mut aligned: Vec<Vec<Point3>> = Vec::with_capacity(frames.len());
    aligned.push(frames[0].points.clone());
    for f in &frames[1..] {
        if f.points.len() == n0 {
            aligned.push(f.points.clone());
            continue;
        }
        resampled = true;
        let prev = aligned.last().unwrap();
        let cloud: Vec<Point3> = prev
            .iter()
            .map(|p| {
                *f.points
                    .iter()
                    .min_by(|a, b| p.distance(**a).partial_cmp(&p.distance(**b)).unwrap())
                    .unwrap()
            })
            .collect();
        aligned.push(cloud);
    }
    (aligned, resampled)
}

/// Synthesize the fading series for a moving cloud between fixed
/// antennas with the selected screen model.
pub fn fading_series(
    frames: &[HumanFrame],
    tx: Point3,
    rx: Point3,
    f_hz: f64,
    model: ScreenModel,
    pitch_m: f64,
    fs_hz: f64,
) -> Result<FadingSeries> {
    fading_series_with(
        frames,
        tx,
        rx,
        f_hz,
        model,
        pitch_m,
        fs_hz,
        &EdgeParams::default(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn fading_series_with(
    frames: &[HumanFrame],
    tx: Point3,
    rx: Point3,
    f_hz: f64,
    model: ScreenModel,
    pitch_m: f64,
    fs_hz: f64,
    edge_params: &EdgeParams,
) -> Result<FadingSeries> {
    if frames.len() < 2 {
        return Err(Error::InvalidArgument(
            "fading synthesis needs at least two frames".into(),
        ));
    }
    crate::hbs::validate_frames(frames)?;
    if !(fs_hz > 0.0) {
        return Err(Error::InvalidArgument(
            "sampling rate must be positive".into(),
        ));
    }

    let (aligned, resampled) = align_frames(frames);
    let t0 = frames[0].t_s;
    let t_end = frames.last().unwrap().t_s;
    let n_samples = ((t_end - t0) * fs_hz).floor() as usize + 1;
    let times: Vec<f64> = (0..n_samples).map(|i| t0 + i as f64 / fs_hz).collect();

    // frame index per sample (frames are few, samples are many)
    let frame_times: Vec<f64> = frames.iter().map(|f| f.t_s).collect();

    struct SampleOut {
        gain: Complex64,
        lit: bool,
        degenerate: bool,
    }

    let results: Vec<Result<SampleOut>> = map_range(n_samples, |i| {
        let t = times[i];
        let k = match frame_times.binary_search_by(|ft| ft.partial_cmp(&t).unwrap()) {
            Ok(k) => k.min(frame_times.len() - 2),
            Err(ins) => ins.saturating_sub(1).min(frame_times.len() - 2),
        };
        let alpha = ((t - frame_times[k]) / (frame_times[k + 1] - frame_times[k])).clamp(0.0, 1.0);
        let cloud: Vec<Point3> = aligned[k]
            .iter()
            .zip(&aligned[k + 1])
            .map(|(p0, p1)| *p0 + (*p1 - *p0) * alpha)
            .collect();
        let frame = HumanFrame {
            t_s: t,
            points: cloud,
        };
        let screen = match model {
            ScreenModel::HumanShaped => build_screen(&frame, tx, rx, pitch_m)?,
            ScreenModel::Rectangular => rect_screen(&frame, tx, rx, pitch_m)?,
        };
        let field = edge_field_with(&screen, tx, rx, f_hz, edge_params)?;
        Ok(SampleOut {
            gain: field.gain,
            lit: !field.blocked,
            degenerate: field.degenerate_fallback,
        })
    });

    let mut samples = Vec::with_capacity(n_samples);
    let mut lit = Vec::with_capacity(n_samples);
    let mut degenerate = 0usize;
    for r in results {
        let s = r?;
        samples.push(s.gain);
        lit.push(s.lit);
        if s.degenerate {
            degenerate += 1;
        }
    }

    Ok(FadingSeries {
        fs_hz,
        t0_s: t0,
        samples,
        lit,
        resampled_points: resampled,
        degenerate_samples: degenerate,
    })
}

/// Envelope prediction error statistics, LoS-normalized and restricted
/// to the reference's lit-region samples.
#[derive(Debug, Clone)]
pub struct ErrorStats {
    /// Mean of |pred| - |ref| over lit samples.
    pub bias: f64,
    /// Root-mean-square of the same.
    pub rms: f64,
    /// Empirical CDF of the per-sample errors: (error, F(error)).
    pub cdf: Vec<(f64, f64)>,
    pub lit_samples: usize,
}

pub fn prediction_error(pred: &FadingSeries, reference: &FadingSeries) -> Result<ErrorStats> {
    if pred.len() != reference.len() {
        return Err(Error::LengthMismatch(pred.len(), reference.len()));
    }
    let mut errs: Vec<f64> = Vec::new();
    for i in 0..pred.len() {
        if reference.lit[i] {
            errs.push(pred.samples[i].norm() - reference.samples[i].norm());
        }
    }
    let n = errs.len();
    if n == 0 {
        return Ok(ErrorStats {
            bias: 0.0,
            rms: 0.0,
            cdf: Vec::new(),
            lit_samples: 0,
        });
    }
    let bias = errs.iter().sum::<f64>() / n as f64;
    let rms = (errs.iter().map(|e| e * e).sum::<f64>() / n as f64).sqrt();
    let mut sorted = errs;
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // thin long tables to a manageable size
    let step = (sorted.len() / 512).max(1);
    let cdf = sorted
        .iter()
        .enumerate()
        .filter(|(i, _)| i % step == 0 || *i == sorted.len() - 1)
        .map(|(i, e)| (*e, (i + 1) as f64 / n as f64))
        .collect();
    Ok(ErrorStats {
        bias,
        rms,
        cdf,
        lit_samples: n,
    })
}
