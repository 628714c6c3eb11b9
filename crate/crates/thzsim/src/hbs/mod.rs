//! Human-body-shadowing engine: screens from point clouds, stationary
//! phase knife-edge fields, a physical-optics reference, fading series
//! and Doppler spectrograms.

pub mod edge;
pub mod fading;
pub mod fresnel;
pub mod phantom;
pub mod po;
pub mod screen;
pub mod spectrogram;

pub use edge::{edge_field, find_stationary_points, DiffractionPath, EdgeField, EdgeParams};
pub use fading::{fading_series, prediction_error, ErrorStats, FadingSeries};
pub use fresnel::knife_edge_coeff;
pub use po::{po_field_oracle, PoParams};
pub use screen::{build_screen, rect_screen, ScreenModel, ScreenSilhouette};
pub use spectrogram::{doppler_spectrogram, Spectrogram, StftParams};

use crate::error::{Error, Result};
use crate::geometry::Point3;

/// One timestamped body point cloud.
#[derive(Debug, Clone)]
pub struct HumanFrame {
    pub t_s: f64,
    pub points: Vec<Point3>,
}

/// Check a frame sequence: non-empty frames, strictly increasing
/// timestamps.
pub fn validate_frames(frames: &[HumanFrame]) -> Result<()> {
    for f in frames {
        if f.points.is_empty() {
            return Err(Error::EmptyCloud);
        }
    }
    for w in frames.windows(2) {
        if !(w[1].t_s > w[0].t_s) {
            return Err(Error::NonMonotoneTimestamps);
        }
    }
    Ok(())
}
