//! Stationary-phase edge diffraction over a screen silhouette.
//!
//! The dynamic shadowing channel is a sum of knife-edge contributions
//! from boundary points where the unfolded path length
//! L(s) = |tx - P(s)| + |P(s) - rx| is a local minimum along the
//! outline. Each contribution carries the complex knife-edge
//! coefficient F(nu) with nu derived from the exact excess path, so the
//! built-in Fresnel phase exp(-j pi nu^2 / 2) equals the exact path
//! phase exp(-jk (L - d_los)), plus a stationary-phase amplitude weight
//! sqrt(a / L'') that reduces to plain F(nu) for a straight edge
//! (L'' = a = 1/d1 + 1/d2).

use num_complex::Complex64;

use crate::error::Result;
use crate::geometry::Point3;
use crate::hbs::fresnel::knife_edge_coeff;
use crate::hbs::po::po_field_oracle;
use crate::hbs::screen::ScreenSilhouette;
use crate::wavelength;

/// Tuning knobs for the outline search. Defaults were fixed against
/// the aperture-integration oracle on randomized silhouettes.
#[derive(Debug, Clone, Copy)]
pub struct EdgeParams {
    /// Moving-average window (in outline vertices) applied to vertex
    /// positions before evaluating L(s); suppresses the rasterization
    /// staircase. Must be odd.
    pub position_smooth: usize,
    /// Half-span (in vertices) of the second-difference stencil for
    /// L''(s).
    pub curvature_halfspan: usize,
    /// Local minima closer than this arc distance merge into one
    /// stationary point (the smaller L wins).
    pub merge_radius_m: f64,
    /// Cap on the stationary-phase weight; boundaries flatter than
    /// this (near-circular around the pierce point) count as
    /// degenerate.
    pub weight_cap: f64,
}

impl Default for EdgeParams {
    fn default() -> Self {
        Self {
            position_smooth: 5,
            curvature_halfspan: 6,
            merge_radius_m: 0.05,
            weight_cap: 2.0,
        }
    }
}

/// A stationary point on the silhouette outline.
#[derive(Debug, Clone)]
pub struct DiffractionPath {
    /// Plane coordinates of the boundary point.
    pub point: (f64, f64),
    /// Unfolded length d1 + d2 through the boundary point, m.
    pub unfolded_len_m: f64,
    /// Signed clearance parameter; positive when this edge shadows the
    /// direct ray.
    pub nu: f64,
    /// Complex edge contribution relative to free space (knife-edge
    /// coefficient, curvature weight and lit/shadow sign included; the
    /// LoS term is not part of it).
    pub coeff: Complex64,
    /// Discrete second derivative of L along the boundary, 1/m.
    pub curvature_term: f64,
}

/// Field evaluation result.
#[derive(Debug, Clone)]
pub struct EdgeField {
    /// Complex channel gain normalized by the free-space response.
    pub gain: Complex64,
    /// Geometric LoS state at evaluation.
    pub blocked: bool,
    /// Signed nu of the boundary point closest to the ray (negative:
    /// lit, positive: shadowed).
    pub nu_min: f64,
    /// Set when the stationary-point search degenerated (flat L along
    /// the outline) and the aperture integral was used instead.
    pub degenerate_fallback: bool,
    pub paths: Vec<DiffractionPath>,
}

struct OutlineSample {
    world: Point3,
    plane: (f64, f64),
    length: f64,
    arc: f64,
}

/// Solve a symmetric 3x3 linear system by Gaussian elimination with
/// partial pivoting; None when singular.
#[allow(clippy::needless_range_loop)]
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv =
            (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for c2 in col..3 {
                a[row][c2] -= f * a[col][c2];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for c2 in (row + 1)..3 {
            acc -= a[row][c2] * x[c2];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

fn smooth_loop(points: &[(f64, f64)], window: usize) -> Vec<(f64, f64)> {
    let n = points.len();
    if window <= 1 || n < window * 2 {
        return points.to_vec();
    }
    let half = (window / 2) as i64;
    (0..n as i64)
        .map(|i| {
            let mut su = 0.0;
            let mut sv = 0.0;
            for k in -half..=half {
                let idx = (i + k).rem_euclid(n as i64) as usize;
                su += points[idx].0;
                sv += points[idx].1;
            }
            let w = (2 * half + 1) as f64;
            (su / w, sv / w)
        })
        .collect()
}

fn sample_loop(
    screen: &ScreenSilhouette,
    points: &[(f64, f64)],
    tx: Point3,
    rx: Point3,
) -> Vec<OutlineSample> {
    let n = points.len();
    let mut arc = 0.0;
    (0..n)
        .map(|i| {
            let (u, v) = points[i];
            let prev = points[(i + n - 1) % n];
            if i > 0 {
                arc += ((u - prev.0).powi(2) + (v - prev.1).powi(2)).sqrt();
            }
            let world = screen.plane.origin + screen.basis.u * u + screen.basis.v * v;
            OutlineSample {
                world,
                plane: (u, v),
                length: tx.distance(world) + world.distance(rx),
                arc,
            }
        })
        .collect()
}

/// Stationary points of the unfolded path length along the outline of
/// `screen`, seen from `tx` to `rx` at carrier `f_hz`: the local
/// minima of L, one knife-edge contribution each.
pub fn find_stationary_points(
    screen: &ScreenSilhouette,
    tx: Point3,
    rx: Point3,
    f_hz: f64,
) -> Result<Vec<DiffractionPath>> {
    find_stationary_points_with(screen, tx, rx, f_hz, &EdgeParams::default())
}

pub fn find_stationary_points_with(
    screen: &ScreenSilhouette,
    tx: Point3,
    rx: Point3,
    f_hz: f64,
    params: &EdgeParams,
) -> Result<Vec<DiffractionPath>> {
    // the public decomposition is the minima family; the quadrature
    // corrections from path-length maxima (negative curvature) stay an
    // internal detail of the field assembly
    Ok(stationary_points_full(screen, tx, rx, f_hz, params)?
        .into_iter()
        .filter(|p| p.curvature_term > 0.0)
        .collect())
}

#[allow(clippy::needless_range_loop)]
fn stationary_points_full(
    screen: &ScreenSilhouette,
    tx: Point3,
    rx: Point3,
    f_hz: f64,
    params: &EdgeParams,
) -> Result<Vec<DiffractionPath>> {
    let ((pu, pv), _dn1, _dn2) = screen.pierce_point(tx, rx)?;
    let blocked = screen.blocks_los(tx, rx)?;
    let lambda = wavelength(f_hz);
    let d_los = tx.distance(rx);

    let mut out = Vec::new();
    for bl in &screen.boundary {
        let pts = smooth_loop(&bl.points, params.position_smooth);
        let n = pts.len();
        if n < 4 {
            continue;
        }
        let samples = sample_loop(screen, &pts, tx, rx);
        let total_arc = samples.last().map(|s| s.arc).unwrap_or(0.0) + {
            let last = pts[n - 1];
            let first = pts[0];
            ((first.0 - last.0).powi(2) + (first.1 - last.1).powi(2)).sqrt()
        };

        // local minima of L around the closed chain
        let mut minima: Vec<usize> = (0..n)
            .filter(|&i| {
                let l = samples[i].length;
                let lp = samples[(i + n - 1) % n].length;
                let ln = samples[(i + 1) % n].length;
                l < lp && l <= ln
            })
            .collect();

        // merge minima closer than merge_radius along the arc
        minima.sort_by(|&a, &b| samples[a].length.partial_cmp(&samples[b].length).unwrap());
        let mut kept: Vec<usize> = Vec::new();
        for &i in &minima {
            let too_close = kept.iter().any(|&k| {
                let mut da = (samples[i].arc - samples[k].arc).abs();
                da = da.min(total_arc - da);
                da < params.merge_radius_m
            });
            if !too_close {
                kept.push(i);
            }
        }
        kept.sort();

        // merge minima whose separating barrier is shallower than half
        // a wavelength: coalescing stationary points act as one
        if kept.len() > 1 {
            let barrier = |a: usize, b: usize| -> f64 {
                // max L walking forward from a to b
                let mut m = f64::NEG_INFINITY;
                let mut i = a;
                while i != b {
                    i = (i + 1) % n;
                    m = m.max(samples[i].length);
                }
                m
            };
            let mut merged = vec![false; kept.len()];
            for ki in 0..kept.len() {
                if merged[ki] {
                    continue;
                }
                let kj = (ki + 1) % kept.len();
                if kj == ki || merged[kj] {
                    continue;
                }
                let (a, b) = (kept[ki], kept[kj]);
                let bar = barrier(a, b);
                let la = samples[a].length;
                let lb = samples[b].length;
                if bar - la.max(lb) < lambda / 2.0 {
                    // drop the shallower minimum
                    if la <= lb {
                        merged[kj] = true;
                    } else {
                        merged[ki] = true;
                    }
                }
            }
            kept = kept
                .iter()
                .enumerate()
                .filter(|(i, _)| !merged[*i])
                .map(|(_, &k)| k)
                .collect();
        }

        for &i in &kept {
            let s = &samples[i];
            // a straight edge through this point would have exactly
            // L'' = 1/r1 + 1/r2 (slant distances), the weight baseline
            let base_curvature = 1.0 / tx.distance(s.world) + 1.0 / s.world.distance(rx);

            // least-squares parabola over the stationary zone: the
            // physical width the boundary integral samples, about
            // 1/sqrt(k L''). Averages the rasterization staircase out
            // of both the curvature and the minimum path length.
            let k_wave = std::f64::consts::TAU / lambda;
            let zone = 1.5 / (k_wave * base_curvature).sqrt();
            let vertex_spacing = total_arc / n as f64;
            let half_window = zone.max(3.5 * vertex_spacing).min(total_arc / 4.0);
            let mut sum = [0.0f64; 5]; // ds^0 .. ds^4
            let mut rhs = [0.0f64; 3]; // L * ds^0 .. ds^2
            let mut count = 0usize;
            for j in 0..n {
                let mut ds = samples[j].arc - s.arc;
                if ds > total_arc / 2.0 {
                    ds -= total_arc;
                } else if ds < -total_arc / 2.0 {
                    ds += total_arc;
                }
                if ds.abs() > half_window {
                    continue;
                }
                let l = samples[j].length;
                let mut p = 1.0;
                for m in 0..5 {
                    sum[m] += p;
                    if m < 3 {
                        rhs[m] += l * p;
                    }
                    p *= ds;
                }
                count += 1;
            }
            // solve the 3x3 normal equations for (alpha, beta, gamma/2)
            let fitted = if count >= 5 {
                solve3(
                    [
                        [sum[0], sum[1], sum[2]],
                        [sum[1], sum[2], sum[3]],
                        [sum[2], sum[3], sum[4]],
                    ],
                    rhs,
                )
            } else {
                None
            };
            let (l_min, l2) = match fitted {
                Some([alpha, beta, half_gamma]) if half_gamma > 0.0 => {
                    let gamma = 2.0 * half_gamma;
                    let ds_star = (-beta / gamma).clamp(-half_window, half_window);
                    let lm = alpha + beta * ds_star + half_gamma * ds_star * ds_star;
                    (lm.max(d_los), gamma)
                }
                // fit failure: fall back to the vertex value and the
                // neutral straight-edge weight
                _ => (s.length, base_curvature),
            };

            let delta_l = (l_min - d_los).max(0.0);
            // exact-excess-path Fresnel parameter: pi nu^2/2 = k (L - d)
            let nu_mag = 2.0 * (delta_l / lambda).sqrt();
            // the edge shadows the ray when the material sits between
            // this boundary point and the pierce point: probe the grid
            // a short step toward the pierce point
            let rel = (pu - s.plane.0, pv - s.plane.1);
            let dist = (rel.0 * rel.0 + rel.1 * rel.1).sqrt();
            let shadowing = if dist < screen.pitch_m {
                blocked
            } else {
                let step = (1.5 * screen.pitch_m).min(dist * 0.5);
                let q = (
                    s.plane.0 + rel.0 / dist * step,
                    s.plane.1 + rel.1 / dist * step,
                );
                let (iu, iv) = screen.grid.cell_of(q.0, q.1);
                screen.grid.get(iu, iv)
            };
            let nu = if shadowing { nu_mag } else { -nu_mag };

            let cap2 = params.weight_cap * params.weight_cap;
            let weight = if l2 <= base_curvature / cap2 {
                params.weight_cap
            } else {
                (base_curvature / l2).sqrt().max(0.2)
            };
            let k = knife_edge_coeff(nu_mag) * weight;
            let coeff = if shadowing { k } else { -k };

            out.push(DiffractionPath {
                point: s.plane,
                unfolded_len_m: l_min,
                nu,
                coeff,
                curvature_term: l2,
            });
        }
    }

    // the dominant (nearest) edge must pair consistently with the LoS
    // term: its sign follows the blockage state of the pierce cell
    if let Some(idx) = (0..out.len())
        .filter(|&i| out[i].curvature_term > 0.0)
        .min_by(|&a, &b| {
            out[a]
                .unfolded_len_m
                .partial_cmp(&out[b].unfolded_len_m)
                .unwrap()
        })
    {
        let want_shadow = blocked;
        let is_shadow = out[idx].nu >= 0.0;
        if want_shadow != is_shadow {
            out[idx].nu = -out[idx].nu;
            out[idx].coeff = -out[idx].coeff;
        }
        // flank contributions ride on broad, shallow minima where the
        // quadratic expansion flatters them; amplification beyond the
        // straight-edge value is only trusted for the dominant edge
        for (i, p) in out.iter_mut().enumerate() {
            if i != idx {
                let plain = knife_edge_coeff(p.nu.abs()).norm();
                let mag = p.coeff.norm();
                if mag > plain && plain > 0.0 {
                    p.coeff *= plain / mag;
                }
            }
        }
    }
    Ok(out)
}

/// Channel gain of the screened link, normalized by the free-space
/// response: the LoS term when the ray is clear plus every stationary
/// point's knife-edge contribution. Falls back to the aperture
/// integral (flagged) when the outline yields no usable stationary
/// point.
pub fn edge_field(
    screen: &ScreenSilhouette,
    tx: Point3,
    rx: Point3,
    f_hz: f64,
) -> Result<EdgeField> {
    edge_field_with(screen, tx, rx, f_hz, &EdgeParams::default())
}

pub fn edge_field_with(
    screen: &ScreenSilhouette,
    tx: Point3,
    rx: Point3,
    f_hz: f64,
    params: &EdgeParams,
) -> Result<EdgeField> {
    let blocked = screen.blocks_los(tx, rx)?;
    let paths = stationary_points_full(screen, tx, rx, f_hz, params)?;

    let occupied = screen.grid.occupied_count() > 0;
    // circularly symmetric screens around the ray leave the clearance
    // r(s) constant along the outline up to rasterization noise; the
    // minima are then grid artifacts and the stationary-phase sum is
    // ill-posed
    let ((pu, pv), _, _) = screen.pierce_point(tx, rx)?;
    let all_flat = occupied
        && !screen.boundary.is_empty()
        && screen.boundary.iter().all(|bl| {
            let mut rmin = f64::INFINITY;
            let mut rmax = f64::NEG_INFINITY;
            for &(u, v) in &bl.points {
                let r = ((u - pu).powi(2) + (v - pv).powi(2)).sqrt();
                rmin = rmin.min(r);
                rmax = rmax.max(r);
            }
            rmax - rmin < 3.0 * screen.pitch_m
        });
    let no_points = occupied && paths.is_empty();

    if no_points || all_flat {
        // flat L along the outline (circularly symmetric screen around
        // the ray): the stationary-phase sum is ill-posed, integrate
        // the aperture directly instead
        let po = po_field_oracle(screen, tx, rx, f_hz)?;
        return Ok(EdgeField {
            gain: po.gain,
            blocked,
            nu_min: if blocked { 0.0 } else { f64::NEG_INFINITY },
            degenerate_fallback: true,
            paths,
        });
    }

    let base = if blocked {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(1.0, 0.0)
    };
    let sum: Complex64 = paths.iter().map(|p| p.coeff).sum();
    let nu_min = paths
        .iter()
        .filter(|p| p.curvature_term > 0.0)
        .min_by(|a, b| a.unfolded_len_m.partial_cmp(&b.unfolded_len_m).unwrap())
        .map(|p| p.nu)
        .unwrap_or(f64::NEG_INFINITY);

    Ok(EdgeField {
        gain: base + sum,
        blocked,
        nu_min,
        degenerate_fallback: false,
        paths,
    })
}
