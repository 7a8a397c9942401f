mod common;

use common::{median, normal_equations, synth, Lcg};
use gazekit::datasets::Condition;
use gazekit::descriptor::{HogDescriptor, HogLayout};
use gazekit::evalkit::truths_from_dataset;
use gazekit::geometry::GazeDirection;
use gazekit::models::*;
use gazekit::orientation::{compose, HeadPose};
use gazekit::synthlab::LookerProfile;

fn tiny_layout() -> HogLayout {
    HogLayout {
        cells_x: 2,
        cells_y: 2,
        n_bins: 3,
        block_size: 1,
    }
}

fn random_descriptor(rng: &mut Lcg) -> HogDescriptor {
    let l = tiny_layout();
    HogDescriptor::new(l, (0..l.len()).map(|_| rng.unit()).collect()).unwrap()
}

fn hand_built(n: usize, seed: u64) -> Vec<TrainingExample> {
    let mut rng = Lcg(seed);
    (0..n)
        .map(|i| {
            let head = HeadPose::from_euler_deg(
                rng.range(-40.0, 40.0),
                rng.range(-30.0, 10.0),
                rng.range(-5.0, 5.0),
            );
            let gaze = GazeDirection::from_az_el(rng.range(-60.0, 60.0), rng.range(-50.0, 0.0));
            TrainingExample::new(
                format!("ex{i:03}"),
                "L",
                random_descriptor(&mut rng),
                Some(random_descriptor(&mut rng)),
                head,
                gaze,
            )
        })
        .collect()
}

/// Brute force: sort by distance, weight 1/(d+eps), sign-align and sum.
fn oracle_average(quats: &[[f64; 4]], dists: &[f64], k: usize, eps: f64) -> [f64; 4] {
    let mut idx: Vec<usize> = (0..quats.len()).collect();
    idx.sort_by(|&a, &b| dists[a].partial_cmp(&dists[b]).unwrap().then(a.cmp(&b)));
    let chosen = &idx[..k];
    let anchor = quats[chosen[0]];
    let mut acc = [0.0; 4];
    for &i in chosen {
        let w = 1.0 / (dists[i] + eps);
        let d: f64 = (0..4).map(|j| quats[i][j] * anchor[j]).sum();
        let s = if d < 0.0 { -w } else { w };
        for j in 0..4 {
            acc[j] += s * quats[i][j];
        }
    }
    let n = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut out = acc.map(|v| v / n);
    if out[0] < 0.0 {
        out = out.map(|v| -v);
    }
    out
}

fn euclid(a: &HogDescriptor, b: &HogDescriptor) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn close4(a: [f64; 4], b: [f64; 4], tol: f64) -> bool {
    let d: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let s = if d < 0.0 { -1.0 } else { 1.0 };
    a.iter().zip(&b).all(|(x, y)| (x - s * y).abs() < tol)
}

#[test]
fn three_neighbor_average_matches_brute_force() {
    let examples = hand_built(12, 21);
    let config = ModelConfig {
        k: 3,
        ..ModelConfig::default()
    };
    let model = train(examples.clone(), &config).unwrap();
    let mut rng = Lcg(77);
    for _ in 0..25 {
        let qf = random_descriptor(&mut rng);
        let qe = random_descriptor(&mut rng);
        let p = model.predict_face_eyes(&qf, &qe).unwrap();

        let df: Vec<f64> = examples
            .iter()
            .map(|e| euclid(&e.face_descriptor, &qf))
            .collect();
        let de: Vec<f64> = examples
            .iter()
            .map(|e| euclid(e.eyes_descriptor.as_ref().unwrap(), &qe))
            .collect();
        let heads: Vec<[f64; 4]> = examples
            .iter()
            .map(|e| e.head_pose.orientation.components())
            .collect();
        let corrs: Vec<[f64; 4]> = examples
            .iter()
            .map(|e| e.eye_correction.offset.components())
            .collect();
        let head = oracle_average(&heads, &df, 3, 1e-6);
        let corr = oracle_average(&corrs, &de, 3, 1e-6);
        assert!(close4(
            p.head_estimate.unwrap().orientation.components(),
            head,
            1e-9
        ));
        assert!(close4(
            p.correction_estimate.unwrap().offset.components(),
            corr,
            1e-9
        ));
        assert_eq!(p.face_neighbors.len(), 3);
        for n in &p.face_neighbors {
            assert!((n.weight - 1.0 / (n.distance + 1e-6)).abs() < 1e-12);
        }
    }
}

#[test]
fn face_only_average_matches_brute_force() {
    let examples = hand_built(10, 5);
    let config = ModelConfig {
        k: 3,
        ..ModelConfig::with_variant(ModelVariant::Face)
    };
    let model = train(examples.clone(), &config).unwrap();
    let mut rng = Lcg(8);
    for _ in 0..10 {
        let q = random_descriptor(&mut rng);
        let got = model.predict_face(&q).unwrap().direction.vector();
        let mut d: Vec<(f64, usize)> = examples
            .iter()
            .enumerate()
            .map(|(i, e)| (euclid(&e.face_descriptor, &q), i))
            .collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut acc = [0.0; 3];
        for &(dist, i) in &d[..3] {
            let v = examples[i].gaze.vector().to_array();
            for j in 0..3 {
                acc[j] += v[j] / (dist + 1e-6);
            }
        }
        let n = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
        let g = got.to_array();
        for j in 0..3 {
            assert!((g[j] - acc[j] / n).abs() < 1e-9);
        }
    }
}

#[test]
fn exact_match_dominance_on_synthetic_looker() {
    let profile = LookerProfile::new("A", 0.6, 3);
    let data = synth(&profile, 0, 3, Condition::EyesVisible);
    for k in [1, 3, 5] {
        for variant in [ModelVariant::FaceEyes, ModelVariant::Face] {
            let config = ModelConfig {
                k,
                ..ModelConfig::with_variant(variant)
            };
            let examples = examples_from_dataset(&data, &config).unwrap();
            let model = train(examples.clone(), &config).unwrap();
            for e in examples.iter().step_by(7) {
                let q = Query {
                    face: e.face_descriptor.clone(),
                    eyes: e.eyes_descriptor.clone(),
                    head_pose: None,
                };
                let p = model.predict(&q, true).unwrap();
                assert!(
                    p.direction.angle_to(e.gaze) < 1e-6,
                    "k={k} {variant} {}",
                    e.id
                );
            }
        }
    }
}

#[test]
fn weight_scale_invariance_via_epsilon() {
    // Scaling distances and epsilon together scales every weight by the
    // same constant, so the prediction must not move.
    let examples = hand_built(15, 2);
    let scaled: Vec<TrainingExample> = examples
        .iter()
        .map(|e| {
            let s = |d: &HogDescriptor| {
                HogDescriptor::new(d.layout(), d.values().iter().map(|v| v * 4.0).collect())
                    .unwrap()
            };
            TrainingExample {
                face_descriptor: s(&e.face_descriptor),
                eyes_descriptor: e.eyes_descriptor.as_ref().map(s),
                ..e.clone()
            }
        })
        .collect();
    let a = train(
        examples,
        &ModelConfig {
            epsilon: 1e-3,
            ..ModelConfig::default()
        },
    )
    .unwrap();
    let b = train(
        scaled,
        &ModelConfig {
            epsilon: 4e-3,
            ..ModelConfig::default()
        },
    )
    .unwrap();
    let mut rng = Lcg(4);
    for _ in 0..10 {
        let f = random_descriptor(&mut rng);
        let e = random_descriptor(&mut rng);
        let f4 =
            HogDescriptor::new(f.layout(), f.values().iter().map(|v| v * 4.0).collect()).unwrap();
        let e4 =
            HogDescriptor::new(e.layout(), e.values().iter().map(|v| v * 4.0).collect()).unwrap();
        let pa = a.predict_face_eyes(&f, &e).unwrap();
        let pb = b.predict_face_eyes(&f4, &e4).unwrap();
        assert!(pa.direction.angle_to(pb.direction) < 1e-12);
    }
}

#[test]
fn training_order_does_not_matter() {
    let examples = hand_built(20, 9);
    let mut shuffled = examples.clone();
    shuffled.reverse();
    shuffled.swap(3, 11);
    let a = train(examples, &ModelConfig::default()).unwrap();
    let b = train(shuffled, &ModelConfig::default()).unwrap();
    assert_eq!(a, b);
    let mut rng = Lcg(12);
    for _ in 0..10 {
        let f = random_descriptor(&mut rng);
        let e = random_descriptor(&mut rng);
        assert_eq!(
            a.predict_face_eyes(&f, &e).unwrap(),
            b.predict_face_eyes(&f, &e).unwrap()
        );
    }
}

#[test]
fn face_eyes_direction_is_composed() {
    let examples = hand_built(10, 31);
    let model = train(examples, &ModelConfig::default()).unwrap();
    let mut rng = Lcg(1);
    for _ in 0..10 {
        let p = model
            .predict_face_eyes(&random_descriptor(&mut rng), &random_descriptor(&mut rng))
            .unwrap();
        let c = compose(p.head_estimate.unwrap(), p.correction_estimate.unwrap());
        assert_eq!(c, p.direction);
    }
}

#[test]
fn invisible_query_uses_head_only() {
    let examples = hand_built(10, 41);
    let model = train(examples, &ModelConfig::default()).unwrap();
    let mut rng = Lcg(2);
    let f = random_descriptor(&mut rng);
    let p = model.eyes_invisible_query(&f).unwrap();
    assert_eq!(p.direction, p.head_estimate.unwrap().facing());
    assert!(p.eyes_neighbors.is_empty());
    let visible = model
        .predict_face_eyes(&f, &random_descriptor(&mut rng))
        .unwrap();
    assert_eq!(visible.head_estimate, p.head_estimate);
}

#[test]
fn kinect_linear_recovers_planted_map() {
    let mut rng = Lcg(17);
    let mut poses = Vec::new();
    let mut targets = Vec::new();
    for _ in 0..200 {
        let (y, p, r) = (
            rng.range(-50.0, 50.0),
            rng.range(-40.0, 10.0),
            rng.range(-10.0, 10.0),
        );
        poses.push((y, p, r));
        targets.push((0.8 * y + 1.0, 0.9 * p - 2.0));
    }
    let m = LinearGazeMap::fit(&poses, &targets).unwrap();
    let x: Vec<Vec<f64>> = poses.iter().map(|&(y, p, r)| vec![y, p, r, 1.0]).collect();
    let az: Vec<f64> = targets.iter().map(|t| t.0).collect();
    let el: Vec<f64> = targets.iter().map(|t| t.1).collect();
    let oa = normal_equations(&x, &az);
    let oe = normal_equations(&x, &el);
    for j in 0..3 {
        assert!((m.weights[0][j] - oa[j]).abs() < 1e-6);
        assert!((m.weights[1][j] - oe[j]).abs() < 1e-6);
    }
    assert!((m.intercept[0] - oa[3]).abs() < 1e-6 && (m.intercept[1] - oe[3]).abs() < 1e-6);
    assert!((m.weights[0][0] - 0.8).abs() < 1e-9 && (m.intercept[1] + 2.0).abs() < 1e-9);
}

#[test]
fn kinect_linear_singular_cases() {
    assert!(LinearGazeMap::fit(&[(1.0, 2.0, 0.0); 3], &[(0.0, 0.0); 3]).is_err());
    // Roll is always zero: rank deficient.
    let poses: Vec<_> = (0..10).map(|i| (i as f64, (i * i) as f64, 0.0)).collect();
    let targets = vec![(0.0, 0.0); 10];
    assert!(matches!(
        LinearGazeMap::fit(&poses, &targets),
        Err(gazekit::Error::SingularFit(_))
    ));
}

#[test]
fn mixed_lookers_need_opt_in() {
    let mut examples = hand_built(6, 1);
    examples[0].looker_id = "B".into();
    assert!(train(examples.clone(), &ModelConfig::default()).is_err());
    let config = ModelConfig {
        cross_looker: true,
        ..ModelConfig::default()
    };
    assert_eq!(
        train(examples, &config).unwrap().lookers,
        vec!["B".to_string(), "L".to_string()]
    );
}

#[test]
fn duplicate_ids_rejected() {
    let mut examples = hand_built(4, 1);
    examples[1].id = examples[0].id.clone();
    assert!(train(examples, &ModelConfig::default()).is_err());
}

#[test]
fn json_round_trip_is_bit_exact() {
    let model = train(hand_built(12, 8), &ModelConfig::default()).unwrap();
    let back = TrainedModel::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(model, back);
    let json = model.to_json().unwrap();
    let bad = json
        .replace("\"version\": 1", "\"version\": 9")
        .replace("\"version\":1", "\"version\":9");
    assert_ne!(bad, json);
    assert!(TrainedModel::from_json(&bad).is_err());
}

#[test]
fn median_error_non_increasing_with_training_blocks() {
    let mut profile = LookerProfile::new("A", 0.6, 11);
    profile.pose_jitter_deg = 2.0;
    let train_data = synth(&profile, 0, 3, Condition::EyesVisible);
    let test = synth(&profile, 3, 1, Condition::EyesVisible);
    let truths = truths_from_dataset(&test).unwrap();
    let config = ModelConfig::default();
    let mut medians = Vec::new();
    for n in 1..=3u32 {
        let ids: Vec<u32> = (0..n).collect();
        let model = train_on_dataset(&train_data.blocks(&ids), &config).unwrap();
        let errs: Vec<f64> = test
            .records
            .iter()
            .zip(&truths)
            .map(|(r, t)| {
                let (f, e) = config.describe(&r.face_patch, &r.eyes_patch).unwrap();
                model
                    .predict_face_eyes(&f, &e)
                    .unwrap()
                    .direction
                    .angle_to_deg(t.direction)
            })
            .collect();
        medians.push(median(errs));
    }
    assert!(
        medians[1] <= medians[0] && medians[2] <= medians[1],
        "{medians:?}"
    );
}
