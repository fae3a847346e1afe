//! Snapshot geometry: Earth-centered positions, satellite array frames and the
//! scenario generator.

use alloc::vec::Vec;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::radio::RadioParams;

/// Spherical Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Draws per satellite before the whole layout is restarted.
const PLACEMENT_TRIES: usize = 2_000;
/// Layout restarts before [`generate_scenario`] gives up.
const LAYOUT_RESTARTS: usize = 64;

/// A point in the Earth-centered Cartesian frame, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    pub fn norm(&self) -> f64 {
        self.vector().norm()
    }
}

/// Euclidean distance between two points.
pub fn distance(a: &Position3D, b: &Position3D) -> f64 {
    (a.vector() - b.vector()).norm()
}

/// Orthonormal right-handed triad that orients a satellite's planar array.
/// The array lies in the x-y plane and radiates along `boresight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayFrame {
    pub x_axis: Vector3<f64>,
    pub y_axis: Vector3<f64>,
    pub boresight: Vector3<f64>,
}

impl ArrayFrame {
    /// Nadir-pointing frame with the x-axis along local East at the
    /// sub-satellite point.
    pub fn nadir(position: &Position3D) -> Self {
        let radial = position.vector().normalize();
        let boresight = -radial;
        let pole = Vector3::z();
        let mut east = pole.cross(&radial);
        if east.norm() < 1e-12 {
            // Over a pole East is undefined; any horizontal axis works.
            east = Vector3::y().cross(&radial);
        }
        let x_axis = east.normalize();
        let y_axis = boresight.cross(&x_axis);
        Self {
            x_axis,
            y_axis,
            boresight,
        }
    }

    /// Builds a frame from explicit axes, rejecting anything that is not
    /// orthonormal and right-handed to 1e-9.
    pub fn from_axes(
        x_axis: Vector3<f64>,
        y_axis: Vector3<f64>,
        boresight: Vector3<f64>,
    ) -> Result<Self> {
        let frame = Self {
            x_axis,
            y_axis,
            boresight,
        };
        if frame.orthonormality_error() > 1e-9 {
            return Err(Error::InvalidSpec("array frame is not orthonormal"));
        }
        if (x_axis.cross(&y_axis) - boresight).norm() > 1e-9 {
            return Err(Error::InvalidSpec("array frame is not right-handed"));
        }
        Ok(frame)
    }

    /// Largest deviation of the triad's Gram matrix from identity.
    pub fn orthonormality_error(&self) -> f64 {
        let axes = [self.x_axis, self.y_axis, self.boresight];
        let mut worst: f64 = 0.0;
        for (i, a) in axes.iter().enumerate() {
            for (j, b) in axes.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }

    /// Components of `v` along (x, y, boresight).
    pub fn local(&self, v: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(
            v.dot(&self.x_axis),
            v.dot(&self.y_axis),
            v.dot(&self.boresight),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteState {
    pub id: usize,
    pub position: Position3D,
    pub frame: ArrayFrame,
}

impl SatelliteState {
    /// Satellite with a nadir-pointing array.
    pub fn nadir(id: usize, position: Position3D) -> Self {
        Self {
            id,
            position,
            frame: ArrayFrame::nadir(&position),
        }
    }
}

/// Steering direction cosines `(theta_x, theta_y)` of a user seen from a
/// satellite's array.
///
/// The sat-to-user unit direction is expressed in the array frame, the polar
/// angle is measured from the frame's y-axis and the azimuth in the x-boresight
/// plane from the x-axis. Users exactly in the array plane are accepted; users
/// behind it are rejected.
pub fn upa_angles(sat: &SatelliteState, ue: &Position3D) -> Result<(f64, f64)> {
    let offset = ue.vector() - sat.position.vector();
    let norm = offset.norm();
    if norm == 0.0 {
        return Err(Error::ZeroDistance);
    }
    let d = sat.frame.local(&(offset / norm));
    if d.z < -1e-12 {
        return Err(Error::BehindArray {
            boresight_component: d.z,
        });
    }
    let polar_y = math::acos(d.y);
    let azimuth_x = math::atan2(d.z.max(0.0), d.x);
    Ok((
        math::sin(polar_y) * math::cos(azimuth_x),
        math::cos(polar_y),
    ))
}

/// Elevation of `target` above the local horizon at `observer`, radians.
pub fn elevation(observer: &Position3D, target: &Position3D) -> f64 {
    let up = observer.vector().normalize();
    let los = target.vector() - observer.vector();
    math::asin(los.dot(&up) / los.norm())
}

/// Inputs to [`generate_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub satellites: usize,
    pub cells: usize,
    pub altitude_m: f64,
    pub cell_radius_m: f64,
    /// Minimum angle between any two satellites as seen from the grid center.
    pub min_separation_deg: f64,
    /// Every satellite must clear this elevation for every user.
    pub min_elevation_deg: f64,
    pub radio: RadioParams,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            satellites: 7,
            cells: 7,
            altitude_m: 600e3,
            cell_radius_m: 43.3e3,
            min_separation_deg: 15.0,
            min_elevation_deg: 50.0,
            radio: RadioParams::default(),
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.satellites == 0 {
            return Err(Error::InvalidSpec("satellite count must be at least 1"));
        }
        if self.cells == 0 {
            return Err(Error::InvalidSpec("cell count must be at least 1"));
        }
        if !(self.altitude_m > 0.0 && self.altitude_m.is_finite()) {
            return Err(Error::InvalidSpec("altitude must be positive"));
        }
        if !(self.cell_radius_m > 0.0 && self.cell_radius_m.is_finite()) {
            return Err(Error::InvalidSpec("cell radius must be positive"));
        }
        if !(self.min_separation_deg >= 0.0 && self.min_separation_deg < 180.0) {
            return Err(Error::InvalidSpec(
                "minimum separation must lie in [0, 180) degrees",
            ));
        }
        if !(self.min_elevation_deg >= 0.0 && self.min_elevation_deg < 90.0) {
            return Err(Error::InvalidSpec(
                "minimum elevation must lie in [0, 90) degrees",
            ));
        }
        self.radio.validate()
    }
}

/// Immutable world state of one experiment snapshot. Users are indexed by
/// cell (one user per cell).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub satellites: Vec<SatelliteState>,
    pub ues: Vec<Position3D>,
    pub center: Position3D,
    pub cell_radius_m: f64,
    pub radio: RadioParams,
    pub seed: u64,
}

impl Scenario {
    pub fn satellite_count(&self) -> usize {
        self.satellites.len()
    }

    pub fn ue_count(&self) -> usize {
        self.ues.len()
    }

    pub fn satellite_positions(&self) -> Vec<Position3D> {
        self.satellites.iter().map(|s| s.position).collect()
    }
}

/// East/north offsets (meters) of `count` hexagonal cell centers, nearest
/// rings first, returned in row-major order (north to south, west to east).
/// For seven cells the center cell lands at index 3.
pub fn hex_cell_offsets(count: usize, radius: f64) -> Vec<(f64, f64)> {
    let mut rings: i64 = 0;
    while 1 + 3 * rings * (rings + 1) < count as i64 {
        rings += 1;
    }
    // Pointy-top axial coordinates.
    let mut cells: Vec<(i64, f64, f64, f64)> = Vec::new();
    for q in -rings..=rings {
        for r in -rings..=rings {
            let s = -q - r;
            let ring = q.abs().max(r.abs()).max(s.abs());
            if ring > rings {
                continue;
            }
            let east = math::sqrt(3.0) * radius * (q as f64 + r as f64 / 2.0);
            let north = -1.5 * radius * r as f64;
            let angle = math::atan2(north, east);
            cells.push((ring, angle, east, north));
        }
    }
    cells.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    cells.truncate(count);
    let mut offsets: Vec<(f64, f64)> = cells.into_iter().map(|c| (c.2, c.3)).collect();
    offsets.sort_by(|a, b| {
        // Quantize rows so tiny rounding differences keep a row together.
        let row_a = libm::round(a.1 / (1.5 * radius));
        let row_b = libm::round(b.1 / (1.5 * radius));
        row_b.total_cmp(&row_a).then(a.0.total_cmp(&b.0))
    });
    offsets
}

struct LocalFrame {
    origin: Vector3<f64>,
    up: Vector3<f64>,
    east: Vector3<f64>,
    north: Vector3<f64>,
}

impl LocalFrame {
    /// Grid center on the equator at zero longitude.
    fn grid_center() -> Self {
        Self {
            origin: Vector3::new(EARTH_RADIUS_M, 0.0, 0.0),
            up: Vector3::x(),
            east: Vector3::y(),
            north: Vector3::z(),
        }
    }

    fn surface_point(&self, east: f64, north: f64) -> Position3D {
        let p = self.origin + self.east * east + self.north * north;
        Position3D::from_vector(&(p.normalize() * EARTH_RADIUS_M))
    }

    fn direction(&self, azimuth: f64, elevation: f64) -> Vector3<f64> {
        let horizontal = math::cos(elevation);
        (self.east * math::sin(azimuth) + self.north * math::cos(azimuth)) * horizontal
            + self.up * math::sin(elevation)
    }

    /// Where the ray from the grid center along `dir` meets the orbital shell.
    fn shell_intersection(&self, dir: &Vector3<f64>, shell_radius: f64) -> Position3D {
        let b = self.origin.dot(dir);
        let c = self.origin.norm_squared() - shell_radius * shell_radius;
        let t = -b + math::sqrt(b * b - c);
        Position3D::from_vector(&(self.origin + dir * t))
    }
}

/// Generates one geometric snapshot. Pure function of `(spec, seed)`.
///
/// Users sit at hexagonal cell centers around the grid center. Satellites are
/// drawn uniformly over the sky cap above the minimum elevation, subject to a
/// minimum pairwise angular separation seen from the grid center and to
/// visibility from every user. A single satellite is placed at the zenith.
pub fn generate_scenario(spec: &ScenarioSpec, seed: u64) -> Result<Scenario> {
    spec.validate()?;
    let frame = LocalFrame::grid_center();
    let ues: Vec<Position3D> = hex_cell_offsets(spec.cells, spec.cell_radius_m)
        .into_iter()
        .map(|(e, n)| frame.surface_point(e, n))
        .collect();
    let center = Position3D::from_vector(&frame.origin);
    let shell = EARTH_RADIUS_M + spec.altitude_m;
    let min_el = math::deg_to_rad(spec.min_elevation_deg);
    let min_sep_cos = math::cos(math::deg_to_rad(spec.min_separation_deg));

    let visible_to_all = |p: &Position3D| ues.iter().all(|u| elevation(u, p) > min_el.max(1e-9));

    if spec.satellites == 1 {
        let p = frame.shell_intersection(&frame.up, shell);
        if !visible_to_all(&p) {
            return Err(Error::InvalidSpec(
                "zenith satellite is not visible from every cell",
            ));
        }
        return Ok(Scenario {
            satellites: alloc::vec![SatelliteState::nadir(0, p)],
            ues,
            center,
            cell_radius_m: spec.cell_radius_m,
            radio: spec.radio.clone(),
            seed,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sin_lo = math::sin(min_el);
    for _ in 0..LAYOUT_RESTARTS {
        let mut dirs: Vec<Vector3<f64>> = Vec::with_capacity(spec.satellites);
        let mut positions: Vec<Position3D> = Vec::with_capacity(spec.satellites);
        'place: while positions.len() < spec.satellites {
            for _ in 0..PLACEMENT_TRIES {
                let azimuth = rng.random::<f64>() * math::TAU;
                let sin_el = sin_lo + (1.0 - sin_lo) * rng.random::<f64>();
                let dir = frame.direction(azimuth, math::asin(sin_el));
                if dirs.iter().any(|d| d.dot(&dir) > min_sep_cos) {
                    continue;
                }
                let p = frame.shell_intersection(&dir, shell);
                if !visible_to_all(&p) {
                    continue;
                }
                dirs.push(dir);
                positions.push(p);
                continue 'place;
            }
            break;
        }
        if positions.len() == spec.satellites {
            let satellites = positions
                .into_iter()
                .enumerate()
                .map(|(id, p)| SatelliteState::nadir(id, p))
                .collect();
            return Ok(Scenario {
                satellites,
                ues,
                center,
                cell_radius_m: spec.cell_radius_m,
                radio: spec.radio.clone(),
                seed,
            });
        }
    }
    Err(Error::LayoutExhausted {
        satellites: spec.satellites,
        attempts: LAYOUT_RESTARTS,
    })
}
