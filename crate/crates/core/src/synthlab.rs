//! Procedural synthetic lookers.
//!
//! A head is a sphere seen under orthographic projection from the camera
//! (which sits on +Z looking back at the looker). Facial features are
//! painted at fixed spherical coordinates in the head frame, so the image is
//! a smooth, injective function of head pose and eye rotation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::datasets::{Condition, Dataset, Record};
use crate::descriptor::{extract_regions, GrayPatch, PatchBox, RegionSizes};
use crate::error::{Error, Result};
use crate::geometry::{gaze_to_target, GazeDirection, SceneLayout, Target, TargetId, Vec3};
use crate::orientation::{compose, correction_from, EyeGazeCorrection, HeadPose, UnitQuaternion};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intensities {
    pub background: f64,
    pub skin: f64,
    pub hair: f64,
    pub eye_white: f64,
    pub iris: f64,
    pub brow: f64,
    pub nose: f64,
    pub mouth: f64,
    pub sunglasses: f64,
}

impl Default for Intensities {
    fn default() -> Self {
        Intensities {
            background: 0.12,
            skin: 0.72,
            hair: 0.28,
            eye_white: 0.96,
            iris: 0.08,
            brow: 0.3,
            nose: 0.58,
            mouth: 0.4,
            sunglasses: 0.04,
        }
    }
}

/// Geometry of the rendered face. Angles are spherical coordinates in the
/// head frame (azimuth toward the looker's right, elevation up).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureParams {
    pub render_size: usize,
    pub head_radius_px: f64,
    pub eye_azimuth_deg: f64,
    pub eye_elevation_deg: f64,
    pub eye_radius_deg: f64,
    pub iris_radius_deg: f64,
    /// Iris displacement (deg on the head sphere) per degree of eye rotation.
    pub iris_gain: f64,
    /// Shift applied to every facial feature; a nonzero value plants a
    /// systematic appearance asymmetry.
    pub feature_offset_deg: (f64, f64),
    pub intensities: Intensities,
}

impl Default for FeatureParams {
    fn default() -> Self {
        FeatureParams {
            render_size: 96,
            head_radius_px: 36.0,
            eye_azimuth_deg: 20.0,
            eye_elevation_deg: 12.0,
            eye_radius_deg: 9.0,
            iris_radius_deg: 4.0,
            iris_gain: 0.2,
            feature_offset_deg: (0.0, 0.0),
            intensities: Intensities::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookerProfile {
    pub looker_id: String,
    /// Fraction of the target's azimuth and elevation reached by turning the head.
    pub kappa: f64,
    pub features: FeatureParams,
    pub pose_jitter_deg: f64,
    pub pixel_noise: f64,
    pub annotation_noise_deg: f64,
    pub seed: u64,
}

impl LookerProfile {
    pub fn new(looker_id: impl Into<String>, kappa: f64, seed: u64) -> Self {
        LookerProfile {
            looker_id: looker_id.into(),
            kappa,
            features: FeatureParams::default(),
            pose_jitter_deg: 0.0,
            pixel_noise: 0.0,
            annotation_noise_deg: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.looker_id.is_empty()
            || !self
                .looker_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
        {
            return bad(format!(
                "looker id {:?} must be non-empty [A-Za-z0-9_.]",
                self.looker_id
            ));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return bad(format!("kappa {} outside [0, 1]", self.kappa));
        }
        for (name, v) in [
            ("pose jitter", self.pose_jitter_deg),
            ("pixel noise", self.pixel_noise),
            ("annotation noise", self.annotation_noise_deg),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} sigma must be >= 0, got {v}"));
            }
        }
        let f = &self.features;
        if f.render_size < 16
            || !(f.head_radius_px > 4.0 && f.head_radius_px * 2.0 <= f.render_size as f64)
        {
            return bad(format!(
                "head radius {} px does not fit a {} px render",
                f.head_radius_px, f.render_size
            ));
        }
        if !(f.eye_radius_deg > 0.0 && f.iris_radius_deg > 0.0 && f.iris_gain.is_finite()) {
            return bad("eye and iris radii must be positive".into());
        }
        let i = &f.intensities;
        let levels = [
            i.background,
            i.skin,
            i.hair,
            i.eye_white,
            i.iris,
            i.brow,
            i.nose,
            i.mouth,
            i.sunglasses,
        ];
        if levels.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return bad("intensity levels must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// A rendered head image plus the face and eye boxes a tracker would report.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendering {
    pub image: GrayPatch,
    pub face_box: PatchBox,
    pub eye_box: PatchBox,
}

fn unit_from_az_el(az_deg: f64, el_deg: f64) -> Vec3 {
    GazeDirection::from_az_el(az_deg, el_deg).vector()
}

fn local_az_el(p: Vec3) -> (f64, f64) {
    (
        p.x.atan2(p.z).to_degrees(),
        p.y.atan2(p.x.hypot(p.z)).to_degrees(),
    )
}

struct Painter {
    f: FeatureParams,
    eyes: [Vec3; 2],
    irises: [Vec3; 2],
    cos_eye: f64,
    cos_iris: f64,
    cos_glasses: f64,
    nose: Vec3,
    cos_nose: f64,
    eyes_visible: bool,
}

impl Painter {
    fn new(f: FeatureParams, corr: EyeGazeCorrection, eyes_visible: bool) -> Self {
        let (off_az, off_el) = f.feature_offset_deg;
        let (c_yaw, c_pitch, _) = corr.offset.to_euler_deg();
        let eye_el = f.eye_elevation_deg + off_el;
        let eye_az = |side: f64| side * f.eye_azimuth_deg + off_az;
        let eyes = [eye_az(-1.0), eye_az(1.0)].map(|az| unit_from_az_el(az, eye_el));
        let irises = [eye_az(-1.0), eye_az(1.0)]
            .map(|az| unit_from_az_el(az + f.iris_gain * c_yaw, eye_el + f.iris_gain * c_pitch));
        Painter {
            eyes,
            irises,
            cos_eye: f.eye_radius_deg.to_radians().cos(),
            cos_iris: f.iris_radius_deg.to_radians().cos(),
            cos_glasses: (f.eye_radius_deg + 2.0).to_radians().cos(),
            nose: unit_from_az_el(off_az, off_el - 4.0),
            cos_nose: 6f64.to_radians().cos(),
            f,
            eyes_visible,
        }
    }

    /// Albedo at a point on the unit head sphere, head frame.
    fn shade(&self, p: Vec3) -> f64 {
        let i = &self.f.intensities;
        let (off_az, off_el) = self.f.feature_offset_deg;
        if p.y > 40f64.to_radians().sin() || p.z < -0.15 {
            return i.hair;
        }
        for (eye, iris) in self.eyes.iter().zip(&self.irises) {
            let c = p.dot(*eye);
            if !self.eyes_visible {
                if c > self.cos_glasses {
                    return i.sunglasses;
                }
            } else if c > self.cos_eye {
                return if p.dot(*iris) > self.cos_iris {
                    i.iris
                } else {
                    i.eye_white
                };
            }
        }
        let (az, el) = local_az_el(p);
        let (az, el) = (az - off_az, el - off_el);
        let brow_el = self.f.eye_elevation_deg + self.f.eye_radius_deg + 4.0;
        if (az.abs() - self.f.eye_azimuth_deg).abs() < 9.0 && (el - brow_el).abs() < 2.0 {
            return i.brow;
        }
        if p.dot(self.nose) > self.cos_nose {
            return i.nose;
        }
        if az.abs() < 16.0 && (el + 26.0).abs() < 3.0 {
            return i.mouth;
        }
        i.skin
    }
}

const SUBSAMPLES: usize = 2;

/// Renders the full head image without noise.
fn render_clean(
    profile: &LookerProfile,
    head: HeadPose,
    corr: EyeGazeCorrection,
    condition: Condition,
) -> Rendering {
    let f = profile.features;
    let size = f.render_size;
    let c = size as f64 / 2.0;
    let r = f.head_radius_px;
    let inv = head.orientation.conjugate();
    let painter = Painter::new(f, corr, condition == Condition::EyesVisible);
    let step = 1.0 / SUBSAMPLES as f64;

    // Eye box: centered on the projected midpoint of the two eye centers.
    let mid = (painter.eyes[0] + painter.eyes[1]) * 0.5;
    let mid = head.orientation.rotate(mid);
    let (bw, bh) = ((r * 4.0 / 3.0).round() as usize, (r / 3.0).round() as usize);
    let bw = bw.clamp(4, size);
    let bh = bh.clamp(1, size);
    let center_u = c - mid.x * r;
    let center_v = c - mid.y * r;
    let x0 = (center_u - bw as f64 / 2.0)
        .round()
        .clamp(0.0, (size - bw) as f64) as usize;
    let y0 = (center_v - bh as f64 / 2.0)
        .round()
        .clamp(0.0, (size - bh) as f64) as usize;
    let eye_box = PatchBox::new(x0, y0, bw, bh);
    let masked = |px: usize, py: usize| {
        condition == Condition::EyesInvisible
            && (x0..x0 + bw).contains(&px)
            && (y0..y0 + bh).contains(&py)
    };

    let mut pixels = Vec::with_capacity(size * size);
    for py in 0..size {
        for px in 0..size {
            // Opaque sunglasses band over the whole eye box.
            if masked(px, py) {
                pixels.push(f.intensities.sunglasses);
                continue;
            }
            let mut acc = 0.0;
            for sy in 0..SUBSAMPLES {
                for sx in 0..SUBSAMPLES {
                    let u = px as f64 + (sx as f64 + 0.5) * step;
                    let v = py as f64 + (sy as f64 + 0.5) * step;
                    let x = (c - u) / r;
                    let y = (c - v) / r;
                    let r2 = x * x + y * y;
                    acc += if r2 > 1.0 {
                        f.intensities.background
                    } else {
                        let world = Vec3::new(x, y, (1.0 - r2).sqrt());
                        painter.shade(inv.rotate(world))
                    };
                }
            }
            pixels.push(acc / (SUBSAMPLES * SUBSAMPLES) as f64);
        }
    }
    let image = GrayPatch::new(size, size, pixels).expect("albedo levels lie in [0, 1]");
    Rendering {
        face_box: PatchBox::full(&image),
        eye_box,
        image,
    }
}

/// Full-resolution rendering with seeded Gaussian pixel noise.
pub fn render_image(
    profile: &LookerProfile,
    head: HeadPose,
    corr: EyeGazeCorrection,
    condition: Condition,
    noise_seed: u64,
) -> Rendering {
    let mut r = render_clean(profile, head, corr, condition);
    if profile.pixel_noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        let normal = Normal::new(0.0, profile.pixel_noise).expect("sigma validated");
        let noisy: Vec<f64> = r
            .image
            .pixels()
            .iter()
            .map(|p| (p + normal.sample(&mut rng)).clamp(0.0, 1.0))
            .collect();
        r.image = GrayPatch::new(r.image.width(), r.image.height(), noisy).expect("clamped");
    }
    r
}

/// Face and eye patches at canonical sizes, quantized to 8 bits. Noise is
/// seeded from `noise_seed`.
pub fn render_looker_seeded(
    profile: &LookerProfile,
    head: HeadPose,
    corr: EyeGazeCorrection,
    condition: Condition,
    noise_seed: u64,
) -> Result<(GrayPatch, GrayPatch)> {
    profile.validate()?;
    let r = render_image(profile, head, corr, condition, noise_seed);
    let (face, eyes) = extract_regions(&r.image, r.face_box, r.eye_box, RegionSizes::default())?;
    Ok((face.quantized(), eyes.quantized()))
}

/// [`render_looker_seeded`] with the profile's own seed.
pub fn render_looker(
    profile: &LookerProfile,
    head: HeadPose,
    corr: EyeGazeCorrection,
    condition: Condition,
) -> Result<(GrayPatch, GrayPatch)> {
    render_looker_seeded(profile, head, corr, condition, profile.seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: String,
    pub looker_id: String,
    pub block_id: u32,
    pub condition: Condition,
    pub target: TargetId,
    pub face_patch: GrayPatch,
    pub eyes_patch: GrayPatch,
    pub annotated_head_pose: HeadPose,
    pub true_head_pose: HeadPose,
    pub true_gaze: GazeDirection,
    pub eye_center: Vec3,
    pub target_position: Vec3,
}

impl TrialRecord {
    pub fn true_correction(&self) -> EyeGazeCorrection {
        correction_from(self.true_head_pose, self.true_gaze)
    }

    /// The manifest view of this trial (true head pose is not recorded).
    pub fn to_record(&self) -> Record {
        Record {
            trial_id: self.trial_id.clone(),
            looker_id: self.looker_id.clone(),
            block_id: self.block_id,
            condition: self.condition,
            target: self.target,
            face_patch: self.face_patch.clone(),
            eyes_patch: self.eyes_patch.clone(),
            annotated_head_pose: self.annotated_head_pose,
            eye_center: self.eye_center,
            target_position: self.target_position,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub block_id: u32,
    pub trials: Vec<TrialRecord>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

/// Counter-based per-trial seed, so trials can be generated independently.
pub fn trial_seed(profile_seed: u64, block_id: u32, trial_index: u32) -> u64 {
    mix(
        mix(profile_seed, u64::from(block_id)),
        u64::from(trial_index),
    )
}

pub fn trial_id(looker_id: &str, block_id: u32, trial_index: u32) -> String {
    format!("{looker_id}-b{block_id:02}-t{trial_index:02}")
}

/// Position of one trial within a generated dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialKey {
    pub block_id: u32,
    pub trial_index: u32,
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        Normal::new(0.0, sigma)
            .expect("sigma validated")
            .sample(rng)
    }
}

/// Generates one trial. Random draws happen in a fixed order: pose jitter,
/// annotation noise, pixel noise.
pub fn generate_trial(
    profile: &LookerProfile,
    scene: &SceneLayout,
    target: &Target,
    condition: Condition,
    key: TrialKey,
) -> Result<TrialRecord> {
    profile.validate()?;
    if scene.grid.target(target.id)? != target {
        return Err(Error::InvalidParams(format!(
            "target {} is not part of the scene grid",
            target.id
        )));
    }
    let eye_center = scene.looker_eye_center;
    let true_gaze = gaze_to_target(eye_center, target)?;
    let mut rng =
        ChaCha8Rng::seed_from_u64(trial_seed(profile.seed, key.block_id, key.trial_index));

    let k = profile.kappa;
    let yaw = k * true_gaze.azimuth_deg() + gaussian(&mut rng, profile.pose_jitter_deg);
    let pitch = k * true_gaze.elevation_deg() + gaussian(&mut rng, profile.pose_jitter_deg);
    let roll = gaussian(&mut rng, profile.pose_jitter_deg);
    let true_head_pose = HeadPose::from_euler_deg(yaw, pitch, roll);
    let corr = correction_from(true_head_pose, true_gaze);

    let annotated_head_pose = if profile.annotation_noise_deg > 0.0 {
        let s = profile.annotation_noise_deg;
        let (dy, dp, dr) = (
            gaussian(&mut rng, s),
            gaussian(&mut rng, s),
            gaussian(&mut rng, s),
        );
        HeadPose::new(true_head_pose.orientation * UnitQuaternion::from_euler_deg(dy, dp, dr))
    } else {
        true_head_pose
    };

    let noise_seed = rand::Rng::random::<u64>(&mut rng);
    let (face_patch, eyes_patch) =
        render_looker_seeded(profile, true_head_pose, corr, condition, noise_seed)?;
    debug_assert!(compose(true_head_pose, corr).angle_to(true_gaze) < 1e-9);

    Ok(TrialRecord {
        trial_id: trial_id(&profile.looker_id, key.block_id, key.trial_index),
        looker_id: profile.looker_id.clone(),
        block_id: key.block_id,
        condition,
        target: target.id,
        face_patch,
        eyes_patch,
        annotated_head_pose,
        true_head_pose,
        true_gaze,
        eye_center,
        target_position: target.position,
    })
}

/// Blocks `first_block .. first_block + n_blocks`, each visiting every target
/// once in a seeded random order.
pub fn generate_block_range(
    profile: &LookerProfile,
    scene: &SceneLayout,
    first_block: u32,
    n_blocks: u32,
    condition: Condition,
    seed: u64,
) -> Result<Vec<Block>> {
    if n_blocks < 1 {
        return Err(Error::InvalidParams(
            "at least one block is required".into(),
        ));
    }
    profile.validate()?;
    let last = first_block
        .checked_add(n_blocks)
        .ok_or_else(|| Error::InvalidParams("block id overflow".into()))?;
    (first_block..last)
        .map(|block_id| {
            let mut order: Vec<&Target> = scene.grid.targets().iter().collect();
            let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, u64::from(block_id)));
            order.shuffle(&mut rng);
            let trials = order
                .into_iter()
                .enumerate()
                .map(|(i, t)| {
                    let key = TrialKey {
                        block_id,
                        trial_index: i as u32,
                    };
                    generate_trial(profile, scene, t, condition, key)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Block { block_id, trials })
        })
        .collect()
}

/// Blocks `0 .. n_blocks`.
pub fn generate_blocks(
    profile: &LookerProfile,
    scene: &SceneLayout,
    n_blocks: u32,
    condition: Condition,
    seed: u64,
) -> Result<Vec<Block>> {
    generate_block_range(profile, scene, 0, n_blocks, condition, seed)
}

/// Flattens blocks into a manifest-ready dataset.
pub fn blocks_to_dataset(scene: &SceneLayout, blocks: &[Block]) -> Dataset {
    Dataset {
        scene: scene.clone(),
        records: blocks
            .iter()
            .flat_map(|b| b.trials.iter().map(TrialRecord::to_record))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_grid;

    fn flat(
        profile: &LookerProfile,
        head: HeadPose,
        corr: EyeGazeCorrection,
        cond: Condition,
    ) -> GrayPatch {
        render_image(profile, head, corr, cond, 0).image
    }

    #[test]
    fn frontal_face_is_symmetric() {
        let p = LookerProfile::new("S", 0.6, 1);
        let img = flat(
            &p,
            HeadPose::FORWARD,
            EyeGazeCorrection::IDENTITY,
            Condition::EyesVisible,
        );
        let n = img.width();
        for y in 0..img.height() {
            for x in 0..n {
                assert!((img.get(x, y) - img.get(n - 1 - x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deterministic_with_noise() {
        let mut p = LookerProfile::new("S", 0.6, 9);
        p.pixel_noise = 0.05;
        let head = HeadPose::from_euler_deg(12.0, -8.0, 1.0);
        let corr = EyeGazeCorrection::new(UnitQuaternion::from_euler_deg(5.0, -3.0, 0.0));
        let a = render_looker(&p, head, corr, Condition::EyesVisible).unwrap();
        let b = render_looker(&p, head, corr, Condition::EyesVisible).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0.width(), 64);
        assert_eq!((a.1.width(), a.1.height()), (64, 16));
    }

    #[test]
    fn invisible_eyes_are_constant_dark() {
        let p = LookerProfile::new("S", 0.6, 1);
        let head = HeadPose::from_euler_deg(-10.0, -20.0, 0.0);
        let corr = EyeGazeCorrection::new(UnitQuaternion::from_euler_deg(-8.0, -6.0, 0.0));
        let r = render_image(&p, head, corr, Condition::EyesInvisible, 0);
        let dark = p.features.intensities.sunglasses;
        // Both projected eye centers land on sunglasses.
        let painter = Painter::new(p.features, corr, false);
        for eye in painter.eyes {
            let w = head.orientation.rotate(eye);
            let c = r.image.width() as f64 / 2.0;
            let u = (c - w.x * p.features.head_radius_px) as usize;
            let v = (c - w.y * p.features.head_radius_px) as usize;
            assert_eq!(r.image.get(u, v), dark);
        }
        let (_, eyes) = render_looker(&p, head, corr, Condition::EyesInvisible).unwrap();
        let first = eyes.pixels()[0];
        assert!(first < 0.05);
        assert!(eyes.pixels().iter().all(|&v| v == first));
    }

    #[test]
    fn kappa_extremes() {
        let scene = SceneLayout::default();
        let t = *scene.grid.target(TargetId::new(3, 10).unwrap()).unwrap();
        let key = TrialKey {
            block_id: 0,
            trial_index: 0,
        };

        let full = generate_trial(
            &LookerProfile::new("A", 1.0, 3),
            &scene,
            &t,
            Condition::EyesVisible,
            key,
        )
        .unwrap();
        assert!(full.true_correction().offset.angle() < 1e-9);
        assert!(full.true_head_pose.facing().angle_to(full.true_gaze) < 1e-9);

        let none = generate_trial(
            &LookerProfile::new("A", 0.0, 3),
            &scene,
            &t,
            Condition::EyesVisible,
            key,
        )
        .unwrap();
        assert!(none.true_head_pose.orientation.angle() < 1e-12);
        let fwd = compose(HeadPose::FORWARD, none.true_correction());
        assert!(fwd.angle_to(none.true_gaze) < 1e-9);
    }

    #[test]
    fn kappa_split_at_thirty_degrees() {
        let scene = SceneLayout::default();
        let t = *scene.grid.target(TargetId::new(2, 10).unwrap()).unwrap();
        let key = TrialKey {
            block_id: 0,
            trial_index: 0,
        };
        let tr = generate_trial(
            &LookerProfile::new("A", 0.6, 3),
            &scene,
            &t,
            Condition::EyesVisible,
            key,
        )
        .unwrap();
        assert!((tr.true_gaze.azimuth_deg() - 30.0).abs() < 1e-9);
        let (yaw, _, _) = tr.true_head_pose.euler_deg();
        assert!((yaw - 18.0).abs() < 1e-9);
        assert!(compose(tr.true_head_pose, tr.true_correction()).angle_to(tr.true_gaze) < 1e-9);
    }

    #[test]
    fn blocks_cover_grid() {
        let scene = SceneLayout::default();
        let p = LookerProfile::new("A", 0.6, 3);
        let blocks = generate_blocks(&p, &scene, 2, Condition::EyesVisible, 11).unwrap();
        assert_eq!(blocks.len(), 2);
        for b in &blocks {
            let mut ids: Vec<_> = b.trials.iter().map(|t| t.target).collect();
            ids.sort();
            let all: Vec<_> = build_grid().targets().iter().map(|t| t.id).collect();
            assert_eq!(ids, all);
        }
        assert!(generate_blocks(&p, &scene, 0, Condition::EyesVisible, 11).is_err());
    }

    #[test]
    fn profile_validation() {
        let mut p = LookerProfile::new("A", 1.5, 3);
        assert!(p.validate().is_err());
        p.kappa = 0.5;
        p.pixel_noise = -0.1;
        assert!(p.validate().is_err());
        p.pixel_noise = 0.0;
        p.looker_id = "bad id".into();
        assert!(p.validate().is_err());
    }
}
