//! Abelian flux-charge anyons moving on planar polyline paths.
//!
//! The phase of a closed path splits into a topological part, fixed by the
//! integer windings around the other anyons, and a geometric part, the
//! charge times the external flux through the area the path encloses
//! (counted with winding multiplicity).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::principal_value;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// Charge `q` bound to flux `Φ`, in units where `qΦ` is a phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnyonSpecies {
    charge: f64,
    flux: f64,
}

impl AnyonSpecies {
    pub fn new(charge: f64, flux: f64) -> Result<Self> {
        if !(charge * flux).is_finite() {
            return Err(Error::InvalidField(format!("qΦ must be finite (q = {charge}, Φ = {flux})")));
        }
        Ok(Self { charge, flux })
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn flux(&self) -> f64 {
        self.flux
    }

    /// Phase of one full mutual encirclement, `qΦ`.
    pub fn pair_phase(&self) -> f64 {
        self.charge * self.flux
    }

    /// Exchange (half-encirclement) phase `θ = qΦ/2`.
    pub fn statistics_angle(&self) -> f64 {
        0.5 * self.pair_phase()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarPath {
    vertices: Vec<Point>,
    closed: bool,
}

impl PlanarPath {
    pub fn new(vertices: Vec<Point>, closed: bool) -> Result<Self> {
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidPath("non-finite vertex".into()));
        }
        let min = if closed { 3 } else { 2 };
        if vertices.len() < min {
            return Err(Error::InvalidPath(format!(
                "{} vertices, need at least {min}",
                vertices.len()
            )));
        }
        for (i, w) in vertices.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(Error::InvalidPath(format!("vertices {i} and {} coincide", i + 1)));
            }
        }
        if closed && vertices[0] == vertices[vertices.len() - 1] {
            return Err(Error::InvalidPath(
                "closing vertex repeated; closed paths join the last vertex to the first implicitly".into(),
            ));
        }
        Ok(Self { vertices, closed })
    }

    pub fn closed(vertices: Vec<Point>) -> Result<Self> {
        Self::new(vertices, true)
    }

    /// Axis-aligned rectangle, counter-clockwise from the lower-left corner.
    pub fn rectangle(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        Self::closed(vec![
            Point::new(x_min, y_min),
            Point::new(x_max, y_min),
            Point::new(x_max, y_max),
            Point::new(x_min, y_max),
        ])
    }

    /// Regular `n`-gon inscribed in a circle, counter-clockwise.
    pub fn regular_polygon(center: Point, radius: f64, n: usize) -> Result<Self> {
        let verts = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                Point::new(center.x + radius * a.cos(), center.y + radius * a.sin())
            })
            .collect();
        Self::closed(verts)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// `(x_min, y_min, x_max, y_max)`
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        self.vertices.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), p| (a.min(p.x), b.min(p.y), c.max(p.x), d.max(p.y)),
        )
    }

    /// Bounding-box diagonal; the length scale for on-path tolerances.
    pub fn scale(&self) -> f64 {
        let (a, b, c, d) = self.bounding_box();
        (c - a).hypot(d - b)
    }

    /// Signed shoelace area; positive for counter-clockwise loops.
    pub fn signed_area(&self) -> f64 {
        0.5 * self.segments().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn distance_to(&self, p: Point) -> f64 {
        self.segments()
            .map(|(a, b)| segment_distance(a, b, p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self {
            vertices: v,
            closed: self.closed,
        }
    }

    /// Same loop starting from vertex `k`.
    pub fn cyclic_shift(&self, k: usize) -> Self {
        let mut v = self.vertices.clone();
        let n = v.len();
        v.rotate_left(k % n);
        Self {
            vertices: v,
            closed: self.closed,
        }
    }

    /// Inserts the midpoint of every segment.
    pub fn refined(&self) -> Self {
        let mut v = Vec::with_capacity(2 * self.vertices.len());
        for (a, b) in self.segments() {
            v.push(a);
            v.push(Point::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y)));
        }
        if !self.closed {
            v.push(self.vertices[self.vertices.len() - 1]);
        }
        Self {
            vertices: v,
            closed: self.closed,
        }
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len() as f64;
        let (sx, sy) = self.vertices.iter().fold((0.0, 0.0), |(x, y), p| (x + p.x, y + p.y));
        Point::new(sx / n, sy / n)
    }

    /// Scaled about the vertex centroid by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let c = self.centroid();
        let v = self
            .vertices
            .iter()
            .map(|p| Point::new(c.x + factor * (p.x - c.x), c.y + factor * (p.y - c.y)))
            .collect();
        Self::new(v, self.closed)
    }

    /// Deterministic wobble of every vertex by at most `amplitude`; `variant`
    /// selects the pattern.
    pub fn wobbled(&self, amplitude: f64, variant: usize) -> Result<Self> {
        let v = self
            .vertices
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let a = 1.7 * k as f64 + 2.3 * variant as f64 + 0.4;
                let b = 0.9 * k as f64 * (variant as f64 + 1.0) + 1.1;
                Point::new(p.x + amplitude * a.sin(), p.y + amplitude * b.cos())
            })
            .collect();
        Self::new(v, self.closed)
    }
}

fn segment_distance(a: Point, b: Point, p: Point) -> f64 {
    let ab = b.sub(a);
    let ap = p.sub(a);
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 { (ap.dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    Point::new(ap.x - t * ab.x, ap.y - t * ab.y).norm()
}

/// Relative distance below which a point counts as lying on a path.
pub const ON_PATH_TOL: f64 = 1e-9;
/// Largest allowed distance (in turns) of the summed angle from an integer.
pub const WINDING_RESIDUAL_TOL: f64 = 1e-6;

fn require_closed(path: &PlanarPath) -> Result<()> {
    if path.closed {
        Ok(())
    } else {
        Err(Error::InvalidPath("winding needs a closed path".into()))
    }
}

/// Signed number of turns `path` makes around `point`, from the summed
/// subtended angles of its segments.
pub fn winding_number(path: &PlanarPath, point: Point) -> Result<i64> {
    require_closed(path)?;
    let distance = path.distance_to(point);
    if distance <= ON_PATH_TOL * path.scale() {
        return Err(Error::PointOnPath {
            x: point.x,
            y: point.y,
            distance,
        });
    }
    let total: f64 = path
        .segments()
        .map(|(a, b)| {
            let (u, v) = (a.sub(point), b.sub(point));
            u.cross(v).atan2(u.dot(v))
        })
        .sum();
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() >= WINDING_RESIDUAL_TOL {
        return Err(Error::InvalidPath(format!(
            "summed angle {turns} turns is not an integer around ({}, {})",
            point.x, point.y
        )));
    }
    Ok(rounded as i64)
}

/// Integer crossing-rule winding; agrees with [`winding_number`] off the path.
fn crossing_winding(verts: &[Point], p: Point) -> i64 {
    let n = verts.len();
    let mut wn = 0;
    for i in 0..n {
        let (a, b) = (verts[i], verts[(i + 1) % n]);
        let side = b.sub(a).cross(p.sub(a));
        if a.y <= p.y {
            if b.y > p.y && side > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && side < 0.0 {
            wn -= 1;
        }
    }
    wn
}

pub fn windings(path: &PlanarPath, others: &[Point]) -> Result<Vec<i64>> {
    others.iter().map(|&p| winding_number(path, p)).collect()
}

/// `Σ_j w_j·qΦ` (principal value) for the windings around the other anyons.
pub fn mutual_braid_phase(species: &AnyonSpecies, path: &PlanarPath, others: &[Point]) -> Result<f64> {
    let w = windings(path, others)?;
    Ok(braid_phase_from_windings(species, &w))
}

fn braid_phase_from_windings(species: &AnyonSpecies, windings: &[i64]) -> f64 {
    let net: i64 = windings.iter().sum();
    principal_value(net as f64 * species.pair_phase())
}

/// External `B_z` in flux per unit area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldMap {
    None,
    /// `b` inside the rectangle S, zero outside.
    UniformRegion {
        b: f64,
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },
    Everywhere { b: f64 },
    /// Cell `(i, j)` covers `[x0 + ih, x0 + (i+1)h] × [y0 + jh, y0 + (j+1)h]`;
    /// `values` is row-major with `j` the row.
    Grid {
        nx: usize,
        ny: usize,
        x0: f64,
        y0: f64,
        h: f64,
        values: Vec<f64>,
    },
}

impl FieldMap {
    pub fn validate(&self) -> Result<()> {
        match self {
            FieldMap::None => Ok(()),
            FieldMap::Everywhere { b } if b.is_finite() => Ok(()),
            FieldMap::UniformRegion {
                b,
                x_min,
                y_min,
                x_max,
                y_max,
            } => {
                if ![*b, *x_min, *y_min, *x_max, *y_max].iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidField("non-finite region parameter".into()));
                }
                if x_max <= x_min || y_max <= y_min {
                    return Err(Error::InvalidField("empty region".into()));
                }
                Ok(())
            }
            FieldMap::Grid {
                nx,
                ny,
                x0,
                y0,
                h,
                values,
            } => {
                if *nx == 0 || *ny == 0 || values.len() != nx * ny {
                    return Err(Error::InvalidField(format!(
                        "grid {nx}×{ny} needs {} samples, got {}",
                        nx * ny,
                        values.len()
                    )));
                }
                if !(h.is_finite() && *h > 0.0 && x0.is_finite() && y0.is_finite()) {
                    return Err(Error::InvalidField("grid origin and spacing must be finite, h > 0".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidField("non-finite grid sample".into()));
                }
                Ok(())
            }
            FieldMap::Everywhere { .. } => Err(Error::InvalidField("non-finite field".into())),
        }
    }
}

/// Resolution of the winding-weighted cell quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxQuadrature {
    /// Cells per side of the path bounding box for an everywhere field.
    pub cells_per_side: usize,
    /// Cells across the diagonal of a uniform region S.
    pub cells_per_region_diameter: usize,
}

impl Default for FluxQuadrature {
    fn default() -> Self {
        Self {
            cells_per_side: 400,
            cells_per_region_diameter: 50,
        }
    }
}

impl FluxQuadrature {
    /// Every cell halved in both directions.
    pub fn refined(self) -> Self {
        Self {
            cells_per_side: 2 * self.cells_per_side,
            cells_per_region_diameter: 2 * self.cells_per_region_diameter,
        }
    }
}

/// Rectangle of `nx × ny` cells with a per-cell field value.
struct CellGrid<'a> {
    x0: f64,
    y0: f64,
    hx: f64,
    hy: f64,
    nx: usize,
    ny: usize,
    value: Box<dyn Fn(usize, usize) -> f64 + Sync + 'a>,
}

fn cell_grid<'a>(path: &PlanarPath, field: &'a FieldMap, quad: &FluxQuadrature) -> Option<CellGrid<'a>> {
    match field {
        FieldMap::None => None,
        FieldMap::Everywhere { b } => {
            let (x_min, y_min, x_max, y_max) = path.bounding_box();
            let n = quad.cells_per_side.max(1);
            let b = *b;
            Some(CellGrid {
                x0: x_min,
                y0: y_min,
                hx: (x_max - x_min) / n as f64,
                hy: (y_max - y_min) / n as f64,
                nx: n,
                ny: n,
                value: Box::new(move |_, _| b),
            })
        }
        FieldMap::UniformRegion {
            b,
            x_min,
            y_min,
            x_max,
            y_max,
        } => {
            let (w, h) = (x_max - x_min, y_max - y_min);
            let target = w.hypot(h) / quad.cells_per_region_diameter.max(1) as f64;
            let nx = (w / target).ceil().max(1.0) as usize;
            let ny = (h / target).ceil().max(1.0) as usize;
            let b = *b;
            Some(CellGrid {
                x0: *x_min,
                y0: *y_min,
                hx: w / nx as f64,
                hy: h / ny as f64,
                nx,
                ny,
                value: Box::new(move |_, _| b),
            })
        }
        FieldMap::Grid {
            nx,
            ny,
            x0,
            y0,
            h,
            values,
        } => {
            let nx_ = *nx;
            Some(CellGrid {
                x0: *x0,
                y0: *y0,
                hx: *h,
                hy: *h,
                nx: *nx,
                ny: *ny,
                value: Box::new(move |i, j| values[j * nx_ + i]),
            })
        }
    }
}

/// Sample offsets tried in order when a cell center lies on the path.
const ON_PATH_OFFSETS: [(f64, f64); 4] = [(0.25, 0.25), (-0.25, 0.25), (0.25, -0.25), (-0.25, -0.25)];

/// `Σ_cells w(center)·B_z·area`. A cell whose center lies on the path is
/// sampled at `center + (h_x/4, h_y/4)` instead (then the other quarter
/// offsets), which keeps the sample inside the same cell.
pub fn enclosed_external_flux(path: &PlanarPath, field: &FieldMap, quad: &FluxQuadrature, exec: Exec) -> Result<f64> {
    require_closed(path)?;
    field.validate()?;
    let Some(grid) = cell_grid(path, field, quad) else {
        return Ok(0.0);
    };
    if grid.hx <= 0.0 || grid.hy <= 0.0 {
        return Ok(0.0);
    }
    let verts = path.vertices();
    let (bx0, by0, bx1, by1) = path.bounding_box();
    let tol = ON_PATH_TOL * path.scale();
    let area = grid.hx * grid.hy;
    let rows = exec.map_range(grid.ny, |j| {
        let yc = grid.y0 + (j as f64 + 0.5) * grid.hy;
        if yc + 0.5 * grid.hy < by0 || yc - 0.5 * grid.hy > by1 {
            return Ok(0.0);
        }
        let mut row = 0.0;
        for i in 0..grid.nx {
            let xc = grid.x0 + (i as f64 + 0.5) * grid.hx;
            if xc + 0.5 * grid.hx < bx0 || xc - 0.5 * grid.hx > bx1 {
                continue;
            }
            let mut p = Point::new(xc, yc);
            if path.distance_to(p) <= tol {
                p = ON_PATH_OFFSETS
                    .iter()
                    .map(|(fx, fy)| Point::new(xc + fx * grid.hx, yc + fy * grid.hy))
                    .find(|q| path.distance_to(*q) > tol)
                    .ok_or(Error::PointOnPath {
                        x: xc,
                        y: yc,
                        distance: 0.0,
                    })?;
            }
            let w = crossing_winding(verts, p);
            if w != 0 {
                row += w as f64 * (grid.value)(i, j);
            }
        }
        Ok(row * area)
    });
    rows.into_iter().sum()
}

/// Flux at successively halved cell sizes, `levels` values in total.
pub fn flux_refinement_study(
    path: &PlanarPath,
    field: &FieldMap,
    start: FluxQuadrature,
    levels: usize,
    exec: Exec,
) -> Result<Vec<f64>> {
    let mut quad = start;
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        out.push(enclosed_external_flux(path, field, &quad, exec)?);
        quad = quad.refined();
    }
    Ok(out)
}

/// True when each successive change is no larger than the one before it.
pub fn is_cauchy(sequence: &[f64]) -> bool {
    let diffs: Vec<f64> = sequence.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    diffs.windows(2).all(|d| d[1] <= d[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnyonPhaseReport {
    pub topological: f64,
    pub geometric: f64,
    pub total: f64,
    pub windings: Vec<i64>,
    /// Enclosed external flux before multiplying by the charge.
    pub flux: f64,
}

pub fn total_anyon_phase(
    species: &AnyonSpecies,
    path: &PlanarPath,
    others: &[Point],
    field: &FieldMap,
    quad: &FluxQuadrature,
    exec: Exec,
) -> Result<AnyonPhaseReport> {
    let windings = windings(path, others)?;
    let topological = braid_phase_from_windings(species, &windings);
    let flux = enclosed_external_flux(path, field, quad, exec)?;
    let geometric = principal_value(species.charge() * flux);
    Ok(AnyonPhaseReport {
        topological,
        geometric,
        total: principal_value(topological + geometric),
        windings,
        flux,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationVerdict {
    pub report: AnyonPhaseReport,
    /// Some winding differs from the base path.
    pub topology_changed: bool,
    /// Per-anyon winding change relative to the base path.
    pub winding_delta: Vec<i64>,
    /// `q·(flux − base flux)`, not reduced modulo 2π.
    pub geometric_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessProbe {
    pub base: AnyonPhaseReport,
    pub deformations: Vec<DeformationVerdict>,
    pub max_abs_drift: f64,
    pub threshold: f64,
    /// No topology change and every drift within the threshold.
    pub robust: bool,
}

/// Compares every deformation against the base path. Deformations run in
/// parallel under [`Exec::Parallel`] and come back in input order.
#[allow(clippy::too_many_arguments)]
pub fn deformation_robustness_probe(
    species: &AnyonSpecies,
    base_path: &PlanarPath,
    deformations: &[PlanarPath],
    others: &[Point],
    field: &FieldMap,
    threshold: f64,
    quad: &FluxQuadrature,
    exec: Exec,
) -> Result<RobustnessProbe> {
    let base = total_anyon_phase(species, base_path, others, field, quad, exec)?;
    let verdicts = exec.map(deformations, |path| -> Result<DeformationVerdict> {
        let report = total_anyon_phase(species, path, others, field, quad, exec)?;
        let winding_delta: Vec<i64> = report.windings.iter().zip(&base.windings).map(|(a, b)| a - b).collect();
        Ok(DeformationVerdict {
            topology_changed: winding_delta.iter().any(|&d| d != 0),
            winding_delta,
            geometric_drift: species.charge() * (report.flux - base.flux),
            report,
        })
    });
    let deformations = verdicts.into_iter().collect::<Result<Vec<_>>>()?;
    let max_abs_drift = deformations
        .iter()
        .map(|d| d.geometric_drift.abs())
        .fold(0.0, f64::max);
    let robust = max_abs_drift <= threshold && deformations.iter().all(|d| !d.topology_changed);
    Ok(RobustnessProbe {
        base,
        deformations,
        max_abs_drift,
        threshold,
        robust,
    })
}
