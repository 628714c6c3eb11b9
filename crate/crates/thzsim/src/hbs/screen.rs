//! Human-shaped and rectangular screens built from point-cloud frames.
//!
//! A screen is a plane perpendicular to the LoS through the body
//! centroid, an occupancy grid in the in-plane (u, v) frame, and the
//! rectilinear outline of the occupied cell union as ordered closed
//! chains. The outline is exactly the geometry the physical-optics
//! oracle integrates, so the two field models always see the same
//! quantized silhouette.

use crate::error::{Error, Result};
use crate::geometry::{project_to_plane, Plane, PlaneBasis, Point3};
use crate::hbs::HumanFrame;

/// Boolean occupancy grid over the screen plane. Cell (iu, iv) spans
/// u in [u0 + iu*pitch, u0 + (iu+1)*pitch), same for v.
#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    pub pitch: f64,
    pub u0: f64,
    pub v0: f64,
    pub nu: usize,
    pub nv: usize,
    cells: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(pitch: f64, u0: f64, v0: f64, nu: usize, nv: usize) -> Self {
        Self {
            pitch,
            u0,
            v0,
            nu,
            nv,
            cells: vec![false; nu * nv],
        }
    }

    #[inline]
    pub fn get(&self, iu: i64, iv: i64) -> bool {
        if iu < 0 || iv < 0 || iu >= self.nu as i64 || iv >= self.nv as i64 {
            return false;
        }
        self.cells[iv as usize * self.nu + iu as usize]
    }

    #[inline]
    pub fn set(&mut self, iu: i64, iv: i64, value: bool) {
        if iu >= 0 && iv >= 0 && iu < self.nu as i64 && iv < self.nv as i64 {
            self.cells[iv as usize * self.nu + iu as usize] = value;
        }
    }

    /// Cell index containing plane coordinate (u, v); may be outside
    /// the stored range.
    #[inline]
    pub fn cell_of(&self, u: f64, v: f64) -> (i64, i64) {
        (
            ((u - self.u0) / self.pitch).floor() as i64,
            ((v - self.v0) / self.pitch).floor() as i64,
        )
    }

    /// Center of cell (iu, iv) in plane coordinates.
    #[inline]
    pub fn cell_center(&self, iu: i64, iv: i64) -> (f64, f64) {
        (
            self.u0 + (iu as f64 + 0.5) * self.pitch,
            self.v0 + (iv as f64 + 0.5) * self.pitch,
        )
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }

    /// Indices of all occupied cells, row-major order.
    pub fn occupied_cells(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::with_capacity(self.occupied_count());
        for iv in 0..self.nv as i64 {
            for iu in 0..self.nu as i64 {
                if self.get(iu, iv) {
                    out.push((iu, iv));
                }
            }
        }
        out
    }

    fn transformed<F: Fn(&Self, i64, i64) -> bool>(&self, f: F) -> Self {
        let mut out = Self::new(self.pitch, self.u0, self.v0, self.nu, self.nv);
        for iv in 0..self.nv as i64 {
            for iu in 0..self.nu as i64 {
                out.set(iu, iv, f(self, iu, iv));
            }
        }
        out
    }

    fn dilate(&self) -> Self {
        self.transformed(|g, iu, iv| {
            for dv in -1..=1 {
                for du in -1..=1 {
                    if g.get(iu + du, iv + dv) {
                        return true;
                    }
                }
            }
            false
        })
    }

    fn erode(&self) -> Self {
        self.transformed(|g, iu, iv| {
            for dv in -1..=1 {
                for du in -1..=1 {
                    if !g.get(iu + du, iv + dv) {
                        return false;
                    }
                }
            }
            true
        })
    }

    /// Morphological closing with a 3x3 structuring element.
    pub fn close(&self) -> Self {
        self.dilate().erode()
    }
}

/// One closed chain of the cell-union outline. Vertices are grid
/// corners in (u, v); the occupied region lies to the left of travel,
/// so outer loops run counterclockwise and holes clockwise. The chain
/// is closed implicitly (last vertex connects back to the first).
#[derive(Debug, Clone)]
pub struct BoundaryLoop {
    pub points: Vec<(f64, f64)>,
}

impl BoundaryLoop {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Which rectangle convention a screen was built with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScreenModel {
    HumanShaped,
    Rectangular,
}

/// Screen silhouette: plane + occupancy + outline chains.
#[derive(Debug, Clone)]
pub struct ScreenSilhouette {
    pub plane: Plane,
    pub basis: PlaneBasis,
    pub pitch_m: f64,
    pub grid: OccupancyGrid,
    pub boundary: Vec<BoundaryLoop>,
    pub model: ScreenModel,
}

impl ScreenSilhouette {
    /// Wrap an explicit occupancy mask (used by validation suites and
    /// file-driven scenarios).
    pub fn from_grid(plane: Plane, grid: OccupancyGrid, model: ScreenModel) -> Self {
        let boundary = trace_outline(&grid);
        Self {
            basis: plane.basis(),
            pitch_m: grid.pitch,
            plane,
            grid,
            boundary,
            model,
        }
    }

    /// Occupied silhouette area, m^2.
    pub fn area(&self) -> f64 {
        self.grid.occupied_count() as f64 * self.pitch_m * self.pitch_m
    }

    /// Plane coordinates of a world point.
    pub fn to_plane_coords(&self, p: Point3) -> (f64, f64) {
        let d = p - self.plane.origin;
        (d.dot(self.basis.u), d.dot(self.basis.v))
    }

    /// Where the tx-rx segment pierces the screen plane, in plane
    /// coordinates, plus the perpendicular distances of tx and rx from
    /// the plane. Errors unless the plane is strictly between.
    pub fn pierce_point(&self, tx: Point3, rx: Point3) -> Result<((f64, f64), f64, f64)> {
        let st = self.plane.signed_distance(tx);
        let sr = self.plane.signed_distance(rx);
        if !(st * sr < 0.0) || st.abs() < 1e-12 || sr.abs() < 1e-12 {
            return Err(Error::PlaneNotBetween);
        }
        let t = st / (st - sr);
        let p = tx + (rx - tx) * t;
        Ok((self.to_plane_coords(p), st.abs(), sr.abs()))
    }

    /// LoS blockage by the cell-center rule; a pierce point exactly on
    /// a cell edge counts as blocked if any adjacent cell is occupied.
    pub fn blocks_los(&self, tx: Point3, rx: Point3) -> Result<bool> {
        let ((u, v), _, _) = self.pierce_point(tx, rx)?;
        let fu = (u - self.grid.u0) / self.pitch_m;
        let fv = (v - self.grid.v0) / self.pitch_m;
        let on_edge_u = (fu - fu.round()).abs() < 1e-9;
        let on_edge_v = (fv - fv.round()).abs() < 1e-9;
        let iu = fu.floor() as i64;
        let iv = fv.floor() as i64;
        let mut cand_u = vec![iu];
        let mut cand_v = vec![iv];
        if on_edge_u {
            cand_u.push(fu.round() as i64 - 1);
            cand_u.push(fu.round() as i64);
        }
        if on_edge_v {
            cand_v.push(fv.round() as i64 - 1);
            cand_v.push(fv.round() as i64);
        }
        for &cu in &cand_u {
            for &cv in &cand_v {
                if self.grid.get(cu, cv) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

/// Validate the frame/link geometry and return (plane, unit normal,
/// separation) for a screen through the body centroid.
fn screen_plane(frame: &HumanFrame, tx: Point3, rx: Point3) -> Result<Plane> {
    if frame.points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let d = rx - tx;
    let sep = d.norm();
    if sep < 1e-12 {
        return Err(Error::CoincidentAntennas);
    }
    let n = d * (1.0 / sep);
    let mut centroid = Point3::default();
    for p in &frame.points {
        if !p.is_finite() {
            return Err(Error::NonFinite("point cloud"));
        }
        centroid = centroid + *p;
    }
    centroid = centroid * (1.0 / frame.points.len() as f64);
    let s = (centroid - tx).dot(n);
    if s <= sep * 1e-9 || s >= sep * (1.0 - 1e-9) {
        return Err(Error::CentroidOutsideSlab);
    }
    Plane::new(centroid, n)
}

fn project_cloud(frame: &HumanFrame, plane: &Plane) -> Result<Vec<(f64, f64)>> {
    frame
        .points
        .iter()
        .map(|p| project_to_plane(*p, plane))
        .collect()
}

pub(crate) fn grid_for_extent(pitch: f64, pts: &[(f64, f64)], margin_cells: i64) -> OccupancyGrid {
    let mut umin = f64::INFINITY;
    let mut umax = f64::NEG_INFINITY;
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for &(u, v) in pts {
        umin = umin.min(u);
        umax = umax.max(u);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    // snap the grid origin to pitch multiples so cell classification
    // is stable under small extent changes
    let iu0 = (umin / pitch).floor() as i64 - margin_cells;
    let iv0 = (vmin / pitch).floor() as i64 - margin_cells;
    let iu1 = (umax / pitch).floor() as i64 + margin_cells;
    let iv1 = (vmax / pitch).floor() as i64 + margin_cells;
    OccupancyGrid::new(
        pitch,
        iu0 as f64 * pitch,
        iv0 as f64 * pitch,
        (iu1 - iu0 + 1) as usize,
        (iv1 - iv0 + 1) as usize,
    )
}

/// Build the human-shaped screen: project the cloud onto the plane
/// through the centroid, rasterize, close morphologically, trace the
/// outline.
pub fn build_screen(
    frame: &HumanFrame,
    tx: Point3,
    rx: Point3,
    pitch_m: f64,
) -> Result<ScreenSilhouette> {
    if !(pitch_m > 0.0) || !pitch_m.is_finite() {
        return Err(Error::InvalidArgument("pitch must be positive".into()));
    }
    let plane = screen_plane(frame, tx, rx)?;
    let pts = project_cloud(frame, &plane)?;
    let mut grid = grid_for_extent(pitch_m, &pts, 2);
    for &(u, v) in &pts {
        let (iu, iv) = grid.cell_of(u, v);
        grid.set(iu, iv, true);
    }
    let grid = grid.close();
    Ok(ScreenSilhouette::from_grid(
        plane,
        grid,
        ScreenModel::HumanShaped,
    ))
}

/// Conventional baseline: the axis-aligned bounding rectangle of the
/// projected cloud, on the same plane.
pub fn rect_screen(
    frame: &HumanFrame,
    tx: Point3,
    rx: Point3,
    pitch_m: f64,
) -> Result<ScreenSilhouette> {
    if !(pitch_m > 0.0) || !pitch_m.is_finite() {
        return Err(Error::InvalidArgument("pitch must be positive".into()));
    }
    let plane = screen_plane(frame, tx, rx)?;
    let pts = project_cloud(frame, &plane)?;
    let mut grid = grid_for_extent(pitch_m, &pts, 2);
    let mut iu_min = i64::MAX;
    let mut iu_max = i64::MIN;
    let mut iv_min = i64::MAX;
    let mut iv_max = i64::MIN;
    for &(u, v) in &pts {
        let (iu, iv) = grid.cell_of(u, v);
        iu_min = iu_min.min(iu);
        iu_max = iu_max.max(iu);
        iv_min = iv_min.min(iv);
        iv_max = iv_max.max(iv);
    }
    for iv in iv_min..=iv_max {
        for iu in iu_min..=iu_max {
            grid.set(iu, iv, true);
        }
    }
    Ok(ScreenSilhouette::from_grid(
        plane,
        grid,
        ScreenModel::Rectangular,
    ))
}

/// Trace the rectilinear outline of the occupied cell union. Directed
/// edges keep the occupied region on the left; loops are chained until
/// every edge is consumed and collinear runs are merged into single
/// segments' corner lists kept (one vertex per grid corner) so the
/// diffraction search can sample the outline uniformly.
fn trace_outline(grid: &OccupancyGrid) -> Vec<BoundaryLoop> {
    use std::collections::HashMap;

    // directed edges between grid corners, occupied cell on the left
    let mut outgoing: HashMap<(i64, i64), Vec<(i64, i64)>> = HashMap::new();
    let mut edge_count = 0usize;
    for iv in 0..grid.nv as i64 {
        for iu in 0..grid.nu as i64 {
            if !grid.get(iu, iv) {
                continue;
            }
            if !grid.get(iu, iv - 1) {
                outgoing.entry((iu, iv)).or_default().push((iu + 1, iv));
                edge_count += 1;
            }
            if !grid.get(iu + 1, iv) {
                outgoing
                    .entry((iu + 1, iv))
                    .or_default()
                    .push((iu + 1, iv + 1));
                edge_count += 1;
            }
            if !grid.get(iu, iv + 1) {
                outgoing
                    .entry((iu + 1, iv + 1))
                    .or_default()
                    .push((iu, iv + 1));
                edge_count += 1;
            }
            if !grid.get(iu - 1, iv) {
                outgoing.entry((iu, iv + 1)).or_default().push((iu, iv));
                edge_count += 1;
            }
        }
    }

    let mut loops = Vec::new();
    let mut consumed = 0usize;
    // deterministic start order
    let mut starts: Vec<(i64, i64)> = outgoing.keys().copied().collect();
    starts.sort();

    for start in starts {
        loop {
            let first_next = {
                let Some(v) = outgoing.get_mut(&start) else {
                    break;
                };
                if v.is_empty() {
                    break;
                }
                v.sort();
                v.remove(0)
            };
            consumed += 1;
            let mut corners = vec![start, first_next];
            let mut prev = start;
            let mut cur = first_next;
            while cur != start {
                let dir = (cur.0 - prev.0, cur.1 - prev.1);
                let next = {
                    let v = outgoing
                        .get_mut(&cur)
                        .expect("outline edge chain broke: no outgoing edge");
                    // prefer the tightest left turn so touching corners
                    // (diagonal cell pairs) split into separate loops
                    let left = (-dir.1, dir.0);
                    let straight = dir;
                    let right = (dir.1, -dir.0);
                    let pick = [left, straight, right]
                        .iter()
                        .filter_map(|d| {
                            let cand = (cur.0 + d.0, cur.1 + d.1);
                            v.iter().position(|&e| e == cand)
                        })
                        .next()
                        .expect("outline edge chain broke: dead end");
                    v.remove(pick)
                };
                consumed += 1;
                prev = cur;
                cur = next;
                if cur != start {
                    corners.push(cur);
                }
            }
            loops.push(BoundaryLoop {
                points: corners
                    .into_iter()
                    .map(|(i, j)| {
                        (
                            grid.u0 + i as f64 * grid.pitch,
                            grid.v0 + j as f64 * grid.pitch,
                        )
                    })
                    .collect(),
            });
        }
    }
    debug_assert_eq!(consumed, edge_count);
    loops
}
