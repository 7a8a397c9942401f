mod common;

use common::{median, synth};
use gazekit::datasets::Condition;
use gazekit::evalkit::truths_from_dataset;
use gazekit::geometry::SceneLayout;
use gazekit::models::{train_on_dataset, ModelConfig};
use gazekit::orientation::{compose, EyeGazeCorrection, HeadPose};
use gazekit::synthlab::*;

#[test]
fn mirrored_yaw_renders_mirrored_image() {
    let p = LookerProfile::new("M", 0.6, 1);
    let left = render_image(
        &p,
        HeadPose::from_euler_deg(30.0, -10.0, 0.0),
        EyeGazeCorrection::IDENTITY,
        Condition::EyesVisible,
        0,
    );
    let right = render_image(
        &p,
        HeadPose::from_euler_deg(-30.0, -10.0, 0.0),
        EyeGazeCorrection::IDENTITY,
        Condition::EyesVisible,
        0,
    );
    let (w, h) = (left.image.width(), left.image.height());
    // Every pixel of the mirrored image has a match within one pixel.
    for y in 0..h {
        for x in 0..w {
            let a = left.image.get(w - 1 - x, y);
            let mut best = f64::INFINITY;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (xx, yy) = (x as i64 + dx, y as i64 + dy);
                    if (0..w as i64).contains(&xx) && (0..h as i64).contains(&yy) {
                        best = best.min((right.image.get(xx as usize, yy as usize) - a).abs());
                    }
                }
            }
            assert!(best < 1e-9, "pixel ({x},{y}) differs by {best}");
        }
    }
    assert_eq!(left.eye_box.x + left.eye_box.width, w - right.eye_box.x);
}

#[test]
fn labels_are_consistent() {
    let mut p = LookerProfile::new("L", 0.6, 5);
    p.pose_jitter_deg = 3.0;
    p.annotation_noise_deg = 1.0;
    let scene = SceneLayout::default();
    for block in generate_blocks(&p, &scene, 2, Condition::EyesVisible, 5).unwrap() {
        assert_eq!(block.trials.len(), 52);
        for t in &block.trials {
            assert!(compose(t.true_head_pose, t.true_correction()).angle_to(t.true_gaze) < 1e-9);
            let expected = gazekit::geometry::gaze_to_target(
                t.eye_center,
                scene.grid.target(t.target).unwrap(),
            )
            .unwrap();
            assert!(expected.angle_to(t.true_gaze) < 1e-12);
        }
    }
}

#[test]
fn every_block_visits_each_target_once() {
    let p = LookerProfile::new("L", 0.6, 8);
    let scene = SceneLayout::default();
    let blocks = generate_blocks(&p, &scene, 3, Condition::EyesVisible, 8).unwrap();
    for b in &blocks {
        let mut ids: Vec<_> = b.trials.iter().map(|t| t.target).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 52);
    }
    let order = |b: &Block| b.trials.iter().map(|t| t.target).collect::<Vec<_>>();
    assert_ne!(order(&blocks[0]), order(&blocks[1]));
}

#[test]
fn same_seed_same_data_and_block_ranges_agree() {
    let mut p = LookerProfile::new("D", 0.6, 21);
    p.pixel_noise = 0.03;
    p.pose_jitter_deg = 1.0;
    let a = synth(&p, 0, 2, Condition::EyesVisible);
    let b = synth(&p, 0, 2, Condition::EyesVisible);
    assert_eq!(a, b);
    // Generating block 1 alone reproduces it exactly.
    let alone = synth(&p, 1, 1, Condition::EyesVisible);
    assert_eq!(alone.records, a.blocks(&[1]).records);

    p.seed = 22;
    let c = synth(&p, 0, 1, Condition::EyesVisible);
    assert_ne!(c.records[0].face_patch, a.records[0].face_patch);
}

fn heldout_median_error(profile: &LookerProfile, condition: Condition) -> f64 {
    let train = synth(profile, 0, 3, Condition::EyesVisible);
    let test = synth(profile, 3, 1, condition);
    let config = ModelConfig::default();
    let model = train_on_dataset(&train, &config).unwrap();
    let truths = truths_from_dataset(&test).unwrap();
    let errs = test
        .records
        .iter()
        .zip(&truths)
        .map(|(r, t)| {
            let (f, e) = config.describe(&r.face_patch, &r.eyes_patch).unwrap();
            let p = if condition == Condition::EyesVisible {
                model.predict_face_eyes(&f, &e)
            } else {
                model.eyes_invisible_query(&f)
            };
            p.unwrap().direction.angle_to_deg(t.direction)
        })
        .collect();
    median(errs)
}

#[test]
fn difficulty_grows_with_pixel_noise() {
    let mut errs = Vec::new();
    for noise in [0.0, 0.05, 0.15] {
        let mut p = LookerProfile::new("N", 0.6, 13);
        p.pixel_noise = noise;
        errs.push(heldout_median_error(&p, Condition::EyesVisible));
    }
    assert!(errs[0] <= errs[1] && errs[1] <= errs[2], "{errs:?}");
}

#[test]
fn head_only_reading_degrades_as_kappa_drops() {
    let full = heldout_median_error(&LookerProfile::new("K", 1.0, 4), Condition::EyesInvisible);
    let partial = heldout_median_error(&LookerProfile::new("K", 0.6, 4), Condition::EyesInvisible);
    assert!(full < partial, "kappa 1.0: {full}, kappa 0.6: {partial}");
}

#[test]
fn invalid_profiles_rejected() {
    let scene = SceneLayout::default();
    let mut p = LookerProfile::new("bad id", 0.6, 1);
    assert!(generate_blocks(&p, &scene, 1, Condition::EyesVisible, 1).is_err());
    p.looker_id = "ok".into();
    p.kappa = 1.5;
    assert!(generate_blocks(&p, &scene, 1, Condition::EyesVisible, 1).is_err());
    p.kappa = 0.6;
    p.pixel_noise = -0.1;
    assert!(generate_blocks(&p, &scene, 1, Condition::EyesVisible, 1).is_err());
    p.pixel_noise = 0.0;
    assert!(generate_blocks(&p, &scene, 0, Condition::EyesVisible, 1).is_err());
}
