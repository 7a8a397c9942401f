//! Scene geometry: the 52-object target grid, observer seats, and angles
//! between gaze rays.
//!
//! Frame: origin at the looker's eye center, +Z horizontal toward the grid
//! center (the looker's resting direction), +Y up, +X to the looker's right.
//! The table surface is the plane `y = -eye_height_cm`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_ROWS: u8 = 4;
pub const N_COLS: u8 = 13;
pub const CENTER_COL: u8 = 7;

pub const DEFAULT_EYE_HEIGHT_CM: f64 = 35.0;
pub const DEFAULT_RADII_CM: [f64; 4] = [29.4, 49.7, 60.6, 96.1];
pub const DEFAULT_COLUMN_STEP_DEG: f64 = 10.0;

/// A point or displacement in centimeters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A unit-length gaze ray direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec3", into = "Vec3")]
pub struct GazeDirection(Vec3);

impl GazeDirection {
    pub const FORWARD: GazeDirection = GazeDirection(Vec3::new(0.0, 0.0, 1.0));

    /// Normalizes `v`. Fails on zero or non-finite input.
    pub fn from_vector(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n <= f64::MIN_POSITIVE {
            return Err(Error::DegenerateGeometry(format!(
                "cannot normalize vector ({}, {}, {})",
                v.x, v.y, v.z
            )));
        }
        Ok(GazeDirection(v * (1.0 / n)))
    }

    /// Direction with the given azimuth (toward +X) and elevation (toward +Y).
    pub fn from_az_el(azimuth_deg: f64, elevation_deg: f64) -> Self {
        let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
        GazeDirection(Vec3::new(
            el.cos() * az.sin(),
            el.sin(),
            el.cos() * az.cos(),
        ))
    }

    pub fn vector(self) -> Vec3 {
        self.0
    }

    /// Azimuth in degrees, in (-180, 180].
    pub fn azimuth_deg(self) -> f64 {
        let az = self.0.x.atan2(self.0.z).to_degrees();
        if az <= -180.0 {
            az + 360.0
        } else {
            az
        }
    }

    /// Elevation in degrees, in [-90, 90].
    pub fn elevation_deg(self) -> f64 {
        self.0.y.clamp(-1.0, 1.0).asin().to_degrees()
    }

    /// Angle to another direction in radians, in [0, pi].
    pub fn angle_to(self, other: GazeDirection) -> f64 {
        self.0.cross(other.0).norm().atan2(self.0.dot(other.0))
    }

    pub fn angle_to_deg(self, other: GazeDirection) -> f64 {
        self.angle_to(other).to_degrees()
    }
}

impl TryFrom<Vec3> for GazeDirection {
    type Error = Error;
    fn try_from(v: Vec3) -> Result<Self> {
        if (v.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::DegenerateGeometry(format!(
                "gaze direction norm {} is not 1",
                v.norm()
            )));
        }
        Ok(GazeDirection(v))
    }
}

impl From<GazeDirection> for Vec3 {
    fn from(g: GazeDirection) -> Vec3 {
        g.0
    }
}

/// Row (1..=4, nearest first) and column (1..=13, looker's left to right).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TargetId {
    pub row: u8,
    pub col: u8,
}

impl TargetId {
    pub fn new(row: u8, col: u8) -> Result<Self> {
        if !(1..=N_ROWS).contains(&row) || !(1..=N_COLS).contains(&col) {
            return Err(Error::InvalidParams(format!(
                "target ({row}, {col}) outside the {N_ROWS}x{N_COLS} grid"
            )));
        }
        Ok(TargetId { row, col })
    }

    /// +1 for columns on the looker's right and the center column, -1 on the left.
    pub fn side_sign(self) -> f64 {
        if self.col < CENTER_COL {
            -1.0
        } else {
            1.0
        }
    }

    /// The same slot reflected across the scene midline.
    pub fn mirrored(self) -> TargetId {
        TargetId {
            row: self.row,
            col: N_COLS + 1 - self.col,
        }
    }
}

impl fmt::Display for TargetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}c{}", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub id: TargetId,
    pub position: Vec3,
}

impl Target {
    pub fn row(&self) -> u8 {
        self.id.row
    }

    pub fn col(&self) -> u8 {
        self.id.col
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetGrid {
    eye_height_cm: f64,
    radii_cm: [f64; 4],
    column_step_deg: f64,
    targets: Vec<Target>,
}

impl TargetGrid {
    pub fn new(eye_height_cm: f64, radii_cm: [f64; 4], column_step_deg: f64) -> Result<Self> {
        if !(eye_height_cm.is_finite() && eye_height_cm > 0.0) {
            return Err(Error::InvalidParams(format!(
                "eye height must be positive, got {eye_height_cm}"
            )));
        }
        if radii_cm.iter().any(|r| !(r.is_finite() && *r > 0.0))
            || radii_cm.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidParams(format!(
                "row radii must be positive and strictly increasing, got {radii_cm:?}"
            )));
        }
        let half_span = column_step_deg * f64::from(CENTER_COL - 1);
        if !(column_step_deg.is_finite() && column_step_deg > 0.0 && half_span < 90.0) {
            return Err(Error::InvalidParams(format!(
                "column step {column_step_deg} deg does not keep the grid in front of the looker"
            )));
        }

        let mut targets = Vec::with_capacity(usize::from(N_ROWS * N_COLS));
        for row in 1..=N_ROWS {
            let radius = radii_cm[usize::from(row - 1)];
            for col in 1..=N_COLS {
                let az = (f64::from(col) - f64::from(CENTER_COL)) * column_step_deg;
                let az = az.to_radians();
                targets.push(Target {
                    id: TargetId { row, col },
                    position: Vec3::new(radius * az.sin(), -eye_height_cm, radius * az.cos()),
                });
            }
        }
        Ok(TargetGrid {
            eye_height_cm,
            radii_cm,
            column_step_deg,
            targets,
        })
    }

    pub fn eye_height_cm(&self) -> f64 {
        self.eye_height_cm
    }

    pub fn radii_cm(&self) -> [f64; 4] {
        self.radii_cm
    }

    pub fn column_step_deg(&self) -> f64 {
        self.column_step_deg
    }

    /// y coordinate of the table surface.
    pub fn table_y(&self) -> f64 {
        -self.eye_height_cm
    }

    /// All targets in row-major order.
    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn target(&self, id: TargetId) -> Result<&Target> {
        TargetId::new(id.row, id.col)?;
        Ok(&self.targets[usize::from(id.row - 1) * usize::from(N_COLS) + usize::from(id.col - 1)])
    }

    /// Azimuth of a column on the table surface, in degrees.
    pub fn column_azimuth_deg(&self, col: u8) -> f64 {
        (f64::from(col) - f64::from(CENTER_COL)) * self.column_step_deg
    }
}

/// The grid with the published layout constants.
pub fn build_grid() -> TargetGrid {
    TargetGrid::new(
        DEFAULT_EYE_HEIGHT_CM,
        DEFAULT_RADII_CM,
        DEFAULT_COLUMN_STEP_DEG,
    )
    .expect("default grid constants are valid")
}

/// Observer seats 1..=4; 1 and 2 on the looker's left, 3 and 4 their mirror images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObserverPosition {
    P1,
    P2,
    P3,
    P4,
}

impl ObserverPosition {
    pub const ALL: [ObserverPosition; 4] = [
        ObserverPosition::P1,
        ObserverPosition::P2,
        ObserverPosition::P3,
        ObserverPosition::P4,
    ];

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(ObserverPosition::P1),
            2 => Ok(ObserverPosition::P2),
            3 => Ok(ObserverPosition::P3),
            4 => Ok(ObserverPosition::P4),
            other => Err(Error::UnknownPosition(other.to_string())),
        }
    }

    pub fn id(self) -> u8 {
        match self {
            ObserverPosition::P1 => 1,
            ObserverPosition::P2 => 2,
            ObserverPosition::P3 => 3,
            ObserverPosition::P4 => 4,
        }
    }

    /// Nominal (distance cm, signed azimuth deg) of the seat from the looker.
    pub fn nominal_polar(self) -> (f64, f64) {
        match self {
            ObserverPosition::P1 => (180.0, -47.7),
            ObserverPosition::P2 => (138.0, -28.6),
            ObserverPosition::P3 => (138.0, 28.6),
            ObserverPosition::P4 => (180.0, 47.7),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneLayout {
    pub grid: TargetGrid,
    pub looker_eye_center: Vec3,
    pub observer_positions: [Vec3; 4],
}

impl SceneLayout {
    pub fn new(grid: TargetGrid) -> Self {
        let observer_positions = ObserverPosition::ALL.map(|p| {
            let (dist, az) = p.nominal_polar();
            let az = az.to_radians();
            // Observers are seated with their eyes at the looker's eye height.
            Vec3::new(dist * az.sin(), 0.0, dist * az.cos())
        });
        SceneLayout {
            grid,
            looker_eye_center: Vec3::ZERO,
            observer_positions,
        }
    }

    pub fn observer(&self, p: ObserverPosition) -> Vec3 {
        self.observer_positions[usize::from(p.id() - 1)]
    }

    /// Serializes to the line-oriented `key value...` text format.
    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let mut s = String::new();
        s.push_str("gazekit-scene\t1\n");
        s.push_str(&format!("eye_height_cm\t{}\n", g.eye_height_cm));
        s.push_str(&format!(
            "radii_cm\t{}\t{}\t{}\t{}\n",
            g.radii_cm[0], g.radii_cm[1], g.radii_cm[2], g.radii_cm[3]
        ));
        s.push_str(&format!("column_step_deg\t{}\n", g.column_step_deg));
        let e = self.looker_eye_center;
        s.push_str(&format!("looker_eye_center\t{}\t{}\t{}\n", e.x, e.y, e.z));
        for p in ObserverPosition::ALL {
            let v = self.observer(p);
            s.push_str(&format!(
                "observer\t{}\t{}\t{}\t{}\n",
                p.id(),
                v.x,
                v.y,
                v.z
            ));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let malformed = |line: usize, message: String| Error::MalformedRecord { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, "gazekit-scene\t1")) => {}
            Some((_, other)) => return Err(Error::UnknownSchemaVersion(other.to_string())),
            None => return Err(Error::UnknownSchemaVersion(String::new())),
        }

        let mut eye_height = None;
        let mut radii = None;
        let mut step = None;
        let mut eye_center = None;
        let mut observers: [Option<Vec3>; 4] = [None; 4];
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let nums = |range: std::ops::Range<usize>| -> Result<Vec<f64>> {
                if fields.len() != range.end {
                    return Err(malformed(
                        n,
                        format!("expected {} fields, found {}", range.end, fields.len()),
                    ));
                }
                fields[range]
                    .iter()
                    .map(|f| {
                        f.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| malformed(n, format!("bad number {f:?}")))
                    })
                    .collect()
            };
            match fields[0] {
                "eye_height_cm" => eye_height = Some(nums(1..2)?[0]),
                "radii_cm" => {
                    let v = nums(1..5)?;
                    radii = Some([v[0], v[1], v[2], v[3]]);
                }
                "column_step_deg" => step = Some(nums(1..2)?[0]),
                "looker_eye_center" => {
                    let v = nums(1..4)?;
                    eye_center = Some(Vec3::new(v[0], v[1], v[2]));
                }
                "observer" => {
                    let v = nums(1..5)?;
                    let p = ObserverPosition::from_id(v[0] as u8)
                        .map_err(|_| malformed(n, format!("bad observer id {}", v[0])))?;
                    observers[usize::from(p.id() - 1)] = Some(Vec3::new(v[1], v[2], v[3]));
                }
                other => return Err(malformed(n, format!("unknown key {other:?}"))),
            }
        }
        let missing = |k: &str| malformed(0, format!("missing key {k}"));
        let grid = TargetGrid::new(
            eye_height.ok_or_else(|| missing("eye_height_cm"))?,
            radii.ok_or_else(|| missing("radii_cm"))?,
            step.ok_or_else(|| missing("column_step_deg"))?,
        )?;
        let mut observer_positions = [Vec3::ZERO; 4];
        for (slot, o) in observer_positions.iter_mut().zip(observers) {
            *slot = o.ok_or_else(|| missing("observer"))?;
        }
        Ok(SceneLayout {
            grid,
            looker_eye_center: eye_center.ok_or_else(|| missing("looker_eye_center"))?,
            observer_positions,
        })
    }
}

impl Default for SceneLayout {
    fn default() -> Self {
        SceneLayout::new(build_grid())
    }
}

/// Unit ray from `eye_center` toward the target.
pub fn gaze_to_target(eye_center: Vec3, target: &Target) -> Result<GazeDirection> {
    gaze_to_point(eye_center, target.position)
}

pub fn gaze_to_point(eye_center: Vec3, point: Vec3) -> Result<GazeDirection> {
    if !eye_center.is_finite() || !point.is_finite() {
        return Err(Error::DegenerateGeometry("non-finite coordinates".into()));
    }
    let d = point - eye_center;
    if d.norm() <= 1e-12 {
        return Err(Error::DegenerateGeometry(
            "eye center coincides with the target".into(),
        ));
    }
    GazeDirection::from_vector(d)
}

/// Angle in degrees between the gaze rays from `eye_center` to `a` and to `b`.
pub fn visual_angle_between(eye_center: Vec3, a: &Target, b: &Target) -> Result<f64> {
    let ga = gaze_to_target(eye_center, a)?;
    let gb = gaze_to_target(eye_center, b)?;
    Ok(ga.angle_to_deg(gb))
}

/// Intersects the ray with the table and returns the nearest target on the
/// table plane, or `None` when the ray does not hit the table in front of
/// the eye. Ties go to the lowest row, then the lowest column.
pub fn snap_to_target(
    direction: GazeDirection,
    eye_center: Vec3,
    grid: &TargetGrid,
) -> Option<&Target> {
    let d = direction.vector();
    let drop = grid.table_y() - eye_center.y;
    if d.y >= 0.0 || drop >= 0.0 {
        return None;
    }
    let t = drop / d.y;
    let hit = eye_center + d * t;
    let mut best: Option<(&Target, f64)> = None;
    for target in grid.targets() {
        let dx = target.position.x - hit.x;
        let dz = target.position.z - hit.z;
        let dist2 = dx * dx + dz * dz;
        if best.is_none_or(|(_, b)| dist2 < b) {
            best = Some((target, dist2));
        }
    }
    best.map(|(t, _)| t)
}
