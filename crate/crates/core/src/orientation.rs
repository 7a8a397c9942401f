//! Unit quaternions for head pose and eye-gaze correction.
//!
//! Euler convention: intrinsic yaw about +Y, then pitch about +X, then roll
//! about +Z. Positive yaw turns the forward axis (+Z) toward +X; positive
//! pitch raises it toward +Y, so a pose `(yaw, pitch, 0)` faces azimuth
//! `yaw` and elevation `pitch`.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GazeDirection, Vec3};

/// Allowed deviation from unit norm for externally supplied quaternions.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

/// Rotation quaternion, scalar first, canonicalized to `w >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct UnitQuaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalizes and canonicalizes arbitrary components.
    pub fn normalized(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n <= f64::MIN_POSITIVE {
            return Err(Error::InvalidParams(format!(
                "cannot normalize quaternion ({w}, {x}, {y}, {z})"
            )));
        }
        Ok(Self::canonical(w / n, x / n, y / n, z / n))
    }

    /// Accepts components whose norm is within `tol` of 1 without rescaling,
    /// so stored values survive a round trip bit-for-bit.
    pub fn from_unit_components(w: f64, x: f64, y: f64, z: f64, tol: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || (n - 1.0).abs() > tol {
            return Err(Error::InvalidParams(format!(
                "quaternion norm {n} is not 1"
            )));
        }
        Ok(Self::canonical(w, x, y, z))
    }

    fn canonical(w: f64, x: f64, y: f64, z: f64) -> Self {
        if w < 0.0 {
            UnitQuaternion {
                w: -w,
                x: -x,
                y: -y,
                z: -z,
            }
        } else {
            UnitQuaternion { w, x, y, z }
        }
    }

    /// Rotation by `angle_rad` about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: Vec3, angle_rad: f64) -> Result<Self> {
        let n = axis.norm();
        if n <= f64::MIN_POSITIVE || !n.is_finite() {
            return Err(Error::InvalidParams("zero rotation axis".into()));
        }
        let (s, c) = (angle_rad / 2.0).sin_cos();
        let a = axis * (s / n);
        Ok(Self::canonical(c, a.x, a.y, a.z))
    }

    fn about_y(rad: f64) -> Self {
        let (s, c) = (rad / 2.0).sin_cos();
        Self::canonical(c, 0.0, s, 0.0)
    }

    fn about_x(rad: f64) -> Self {
        let (s, c) = (rad / 2.0).sin_cos();
        Self::canonical(c, s, 0.0, 0.0)
    }

    fn about_z(rad: f64) -> Self {
        let (s, c) = (rad / 2.0).sin_cos();
        Self::canonical(c, 0.0, 0.0, s)
    }

    pub fn from_euler_deg(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self::about_y(yaw.to_radians())
            * Self::about_x(-pitch.to_radians())
            * Self::about_z(roll.to_radians())
    }

    /// `(yaw, pitch, roll)` in degrees.
    pub fn to_euler_deg(self) -> (f64, f64, f64) {
        let m = self.matrix();
        // m = Ry(yaw) Rx(-pitch) Rz(roll)
        let sin_b = -m[1][2];
        let b = sin_b.clamp(-1.0, 1.0).asin();
        let yaw = m[0][2].atan2(m[2][2]);
        let roll = m[1][0].atan2(m[1][1]);
        (yaw.to_degrees(), -b.to_degrees(), roll.to_degrees())
    }

    pub fn components(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn w(self) -> f64 {
        self.w
    }

    pub fn conjugate(self) -> Self {
        Self::canonical(self.w, -self.x, -self.y, -self.z)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Rotation angle in radians, in [0, pi].
    pub fn angle(self) -> f64 {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        2.0 * v.atan2(self.w.abs())
    }

    /// Angle of the relative rotation between two orientations, radians.
    pub fn angle_to(self, o: Self) -> f64 {
        (self.conjugate() * o).angle()
    }

    pub fn rotate(self, v: Vec3) -> Vec3 {
        let u = Vec3::new(self.x, self.y, self.z);
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }

    /// Row-major rotation matrix.
    pub fn matrix(self) -> [[f64; 3]; 3] {
        let UnitQuaternion { w, x, y, z } = self;
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }

    /// Image of the forward axis +Z.
    pub fn forward(self) -> GazeDirection {
        GazeDirection::from_vector(self.rotate(Vec3::new(0.0, 0.0, 1.0)))
            .expect("rotation preserves length")
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;

    fn mul(self, r: UnitQuaternion) -> UnitQuaternion {
        let (a, b, c, d) = (self.w, self.x, self.y, self.z);
        let (e, f, g, h) = (r.w, r.x, r.y, r.z);
        UnitQuaternion::canonical(
            a * e - b * f - c * g - d * h,
            a * f + b * e + c * h - d * g,
            a * g - b * h + c * e + d * f,
            a * h + b * g - c * f + d * e,
        )
    }
}

impl TryFrom<[f64; 4]> for UnitQuaternion {
    type Error = Error;
    fn try_from(c: [f64; 4]) -> Result<Self> {
        Self::from_unit_components(c[0], c[1], c[2], c[3], UNIT_NORM_TOLERANCE)
    }
}

impl From<UnitQuaternion> for [f64; 4] {
    fn from(q: UnitQuaternion) -> [f64; 4] {
        q.components()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HeadPose {
    pub orientation: UnitQuaternion,
}

impl HeadPose {
    pub const FORWARD: HeadPose = HeadPose {
        orientation: UnitQuaternion::IDENTITY,
    };

    pub fn new(orientation: UnitQuaternion) -> Self {
        HeadPose { orientation }
    }

    pub fn from_euler_deg(yaw: f64, pitch: f64, roll: f64) -> Self {
        HeadPose::new(UnitQuaternion::from_euler_deg(yaw, pitch, roll))
    }

    pub fn euler_deg(self) -> (f64, f64, f64) {
        self.orientation.to_euler_deg()
    }

    /// Direction the face points at.
    pub fn facing(self) -> GazeDirection {
        self.orientation.forward()
    }
}

/// Rotation carried by the eyes, relative to the head frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EyeGazeCorrection {
    pub offset: UnitQuaternion,
}

impl EyeGazeCorrection {
    pub const IDENTITY: EyeGazeCorrection = EyeGazeCorrection {
        offset: UnitQuaternion::IDENTITY,
    };

    pub fn new(offset: UnitQuaternion) -> Self {
        EyeGazeCorrection { offset }
    }
}

/// Final gaze given head pose and eye correction.
pub fn compose(head: HeadPose, corr: EyeGazeCorrection) -> GazeDirection {
    (head.orientation * corr.offset).forward()
}

/// The relative rotation that takes the head's frame to the gaze frame.
pub fn correction_from(head: HeadPose, gaze: GazeDirection) -> EyeGazeCorrection {
    EyeGazeCorrection::new(head.orientation.conjugate() * rotation_to(gaze))
}

/// Zero-roll rotation taking +Z to `gaze`: yaw to the gaze azimuth, then
/// pitch to its elevation. A gaze straight back (-Z) becomes 180 deg about +Y.
pub fn rotation_to(gaze: GazeDirection) -> UnitQuaternion {
    let v = gaze.vector();
    let horizontal = v.x.hypot(v.z);
    let az = v.x.atan2(v.z);
    let el = v.y.atan2(horizontal);
    UnitQuaternion::about_y(az) * UnitQuaternion::about_x(-el)
}

/// Similarity-weighted orientation mean: sign-align every input to the
/// highest-weight quaternion, sum the weighted components, renormalize.
pub fn weighted_average(quats: &[UnitQuaternion], weights: &[f64]) -> Result<UnitQuaternion> {
    if quats.is_empty() {
        return Err(Error::Empty("no quaternions to average"));
    }
    if quats.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} quaternions but {} weights",
            quats.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidWeights(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let mut anchor = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w > weights[anchor] {
            anchor = i;
        }
    }
    if weights[anchor] <= 0.0 {
        return Err(Error::InvalidWeights("all weights are zero".into()));
    }
    let reference = quats[anchor];
    let mut acc = [0.0f64; 4];
    for (q, w) in quats.iter().zip(weights) {
        let s = if q.dot(reference) < 0.0 { -w } else { *w };
        for (a, c) in acc.iter_mut().zip(q.components()) {
            *a += s * c;
        }
    }
    UnitQuaternion::normalized(acc[0], acc[1], acc[2], acc[3])
        .map_err(|_| Error::InvalidWeights("weighted sum vanished".into()))
}
