//! Plot-ready CSV emitters, JSON envelopes and frame readers. All
//! emitters are deterministic: same data, same bytes.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::hbs::{FadingSeries, HumanFrame, Spectrogram};
use crate::qd::{Cir, Mpc, MpcKind};
use crate::stats::Pdp;

/// One MPC per row: kind, delay_ns, aod_rad, aoa_rad, re, im.
pub fn cir_csv(cir: &Cir) -> String {
    let mut out = String::from("kind,delay_ns,aod_rad,aoa_rad,re_gamma,im_gamma\n");
    for m in &cir.mpcs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            m.kind, m.delay_ns, m.aod_rad, m.aoa_rad, m.amplitude.re, m.amplitude.im
        );
    }
    out
}

/// Versioned JSON envelope for a channel realization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CirEnvelope {
    pub format_version: u32,
    pub preset: String,
    pub seed: u64,
    pub tx: [f64; 3],
    pub rx: [f64; 3],
    pub carrier_hz: f64,
    pub mpcs: Vec<MpcRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MpcRecord {
    pub kind: String,
    pub delay_ns: f64,
    pub aod_rad: f64,
    pub aoa_rad: f64,
    pub re_gamma: f64,
    pub im_gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_id: Option<usize>,
}

pub fn cir_envelope(cir: &Cir) -> CirEnvelope {
    CirEnvelope {
        format_version: 1,
        preset: cir.preset_name.clone(),
        seed: cir.rng_seed,
        tx: [cir.tx.x, cir.tx.y, cir.tx.z],
        rx: [cir.rx.x, cir.rx.y, cir.rx.z],
        carrier_hz: cir.carrier_hz,
        mpcs: cir
            .mpcs
            .iter()
            .map(|m| MpcRecord {
                kind: m.kind.to_string(),
                delay_ns: m.delay_ns,
                aod_rad: m.aod_rad,
                aoa_rad: m.aoa_rad,
                re_gamma: m.amplitude.re,
                im_gamma: m.amplitude.im,
                cluster_id: m.cluster_id,
            })
            .collect(),
    }
}

/// PDP as (delay_ns, power_db) rows, dB relative to the LoS power.
pub fn pdp_csv(pdp: &Pdp) -> String {
    let mut out = String::from("delay_ns,power_db\n");
    for (k, p) in pdp.powers.iter().enumerate() {
        let db = if *p > 0.0 {
            10.0 * (p / pdp.reference_power).log10()
        } else {
            f64::NEG_INFINITY
        };
        if db.is_finite() {
            let _ = writeln!(
                out,
                "{},{}",
                pdp.origin_ns + k as f64 * pdp.bin_width_ns,
                db
            );
        }
    }
    out
}

/// Empirical CDF table (x, F(x)) from raw values.
pub fn cdf_csv(header: &str, values: &[f64]) -> String {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len().max(1);
    let mut out = format!("{header},cdf\n");
    for (i, v) in sorted.iter().enumerate() {
        let _ = writeln!(out, "{},{}", v, (i + 1) as f64 / n as f64);
    }
    out
}

/// Fading series as (t_s, re, im, gain_db, lit_flag) rows.
pub fn fading_csv(series: &FadingSeries) -> String {
    let mut out = String::from("t_s,re,im,gain_db,lit_flag\n");
    for i in 0..series.len() {
        let s = series.samples[i];
        let gain_db = 20.0 * s.norm().max(1e-300).log10();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            series.time_of(i),
            s.re,
            s.im,
            gain_db,
            u8::from(series.lit[i])
        );
    }
    out
}

/// Spectrogram matrix: header row carries frame times, first column
/// the frequency axis, cells the magnitude.
pub fn spectrogram_csv(spec: &Spectrogram) -> String {
    let mut out = String::from("freq_hz");
    for t in &spec.times_s {
        let _ = write!(out, ",{t}");
    }
    out.push('\n');
    for (k, f) in spec.freqs_hz.iter().enumerate() {
        let _ = write!(out, "{f}");
        for frame in &spec.magnitude {
            let _ = write!(out, ",{}", frame[k]);
        }
        out.push('\n');
    }
    out
}

/// Parse point-cloud frames from CSV rows (t_s, point_id, x, y, z).
/// Rows must be grouped by time; point order inside a frame follows
/// the file.
pub fn frames_from_csv(text: &str) -> Result<Vec<HumanFrame>> {
    let mut frames: Vec<HumanFrame> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if lineno == 0 && line.starts_with("t_s") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::InvalidArgument(format!(
                "frame CSV line {}: expected 5 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("line {}: {e}", lineno + 1)))
        };
        let t = parse(fields[0])?;
        let p = Point3::new(parse(fields[2])?, parse(fields[3])?, parse(fields[4])?);
        match frames.last_mut() {
            Some(f) if f.t_s == t => f.points.push(p),
            _ => frames.push(HumanFrame {
                t_s: t,
                points: vec![p],
            }),
        }
    }
    crate::hbs::validate_frames(&frames)?;
    Ok(frames)
}

/// Minimal ASCII PLY vertex reader: `element vertex N` plus x/y/z
/// properties. Anything fancier is rejected.
pub fn points_from_ply(text: &str) -> Result<Vec<Point3>> {
    let mut lines = text.lines();
    let magic = lines.next().unwrap_or_default().trim();
    if magic != "ply" {
        return Err(Error::InvalidArgument("not a PLY file".into()));
    }
    let mut n_vertices: Option<usize> = None;
    let mut in_vertex_element = false;
    let mut xyz_cols: Vec<usize> = Vec::new();
    let mut col = 0usize;
    for line in lines.by_ref() {
        let line = line.trim();
        if line == "end_header" {
            break;
        }
        let mut it = line.split_whitespace();
        match it.next() {
            Some("format") => {
                if it.next() != Some("ascii") {
                    return Err(Error::InvalidArgument("only ascii PLY is supported".into()));
                }
            }
            Some("element") => {
                let name = it.next().unwrap_or_default();
                in_vertex_element = name == "vertex";
                if in_vertex_element {
                    n_vertices = it.next().and_then(|s| s.parse().ok());
                    col = 0;
                }
            }
            Some("property") if in_vertex_element => {
                let _ty = it.next();
                if let Some(name) = it.next() {
                    if name == "x" || name == "y" || name == "z" {
                        xyz_cols.push(col);
                    }
                }
                col += 1;
            }
            _ => {}
        }
    }
    let n = n_vertices
        .ok_or_else(|| Error::InvalidArgument("PLY header has no vertex element".into()))?;
    if xyz_cols.len() != 3 {
        return Err(Error::InvalidArgument(
            "PLY vertex element must carry x, y, z".into(),
        ));
    }
    let mut points = Vec::with_capacity(n);
    for line in lines.take(n) {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("PLY vertex row: {e}")))?;
        points.push(Point3::new(
            vals[xyz_cols[0]],
            vals[xyz_cols[1]],
            vals[xyz_cols[2]],
        ));
    }
    if points.len() != n {
        return Err(Error::InvalidArgument(format!(
            "PLY promised {n} vertices, found {}",
            points.len()
        )));
    }
    Ok(points)
}

/// Load a PLY sequence from a directory (sorted by file name) with
/// timestamps from a fixed frame rate.
pub fn frames_from_ply_dir(dir: &std::path::Path, frame_rate_hz: f64) -> Result<Vec<HumanFrame>> {
    if !(frame_rate_hz > 0.0) {
        return Err(Error::InvalidArgument("frame rate must be positive".into()));
    }
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().map(|e| e == "ply").unwrap_or(false))
        .collect();
    paths.sort();
    let mut frames = Vec::with_capacity(paths.len());
    for (i, p) in paths.iter().enumerate() {
        let points = points_from_ply(&std::fs::read_to_string(p)?)?;
        frames.push(HumanFrame {
            t_s: i as f64 / frame_rate_hz,
            points,
        });
    }
    crate::hbs::validate_frames(&frames)?;
    Ok(frames)
}

/// Serialize a Mpc list back from an envelope (round-trip support).
impl CirEnvelope {
    pub fn to_cir(&self) -> Result<Cir> {
        let mut mpcs = Vec::with_capacity(self.mpcs.len());
        for r in &self.mpcs {
            let kind = match r.kind.as_str() {
                "direct" => MpcKind::Direct,
                "specular" => MpcKind::Specular,
                "random_subpath" => MpcKind::RandomSubpath,
                other => return Err(Error::InvalidArgument(format!("unknown mpc kind {other}"))),
            };
            mpcs.push(Mpc {
                delay_ns: r.delay_ns,
                aod_rad: r.aod_rad,
                aoa_rad: r.aoa_rad,
                amplitude: num_complex::Complex64::new(r.re_gamma, r.im_gamma),
                kind,
                interaction_points: Vec::new(),
                cluster_id: r.cluster_id,
            });
        }
        Ok(Cir {
            mpcs,
            tx: Point3::new(self.tx[0], self.tx[1], self.tx[2]),
            rx: Point3::new(self.rx[0], self.rx[1], self.rx[2]),
            preset_name: self.preset.clone(),
            rng_seed: self.seed,
            carrier_hz: self.carrier_hz,
            cluster_floor_db: -30.0,
        })
    }
}
