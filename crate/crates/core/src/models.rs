//! Gaze estimators: Appear-Face-Eyes (face kNN -> head pose, eyes kNN ->
//! eye correction), Appear-Face (face kNN -> gaze) and Kinect-Linear
//! (linear map from annotated head pose angles to gaze angles).

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::descriptor::{
    compute_hog, descriptor_distance, resample, GrayPatch, HogDescriptor, HogParams, PatchBox,
    RegionSizes,
};
use crate::error::{Error, Result};
use crate::geometry::GazeDirection;
use crate::orientation::{compose, correction_from, weighted_average, EyeGazeCorrection, HeadPose};

pub const MODEL_FORMAT: &str = "gazekit-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    FaceEyes,
    Face,
    KinectLinear,
}

impl ModelVariant {
    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::FaceEyes => "face-eyes",
            ModelVariant::Face => "face",
            ModelVariant::KinectLinear => "kinect-linear",
        }
    }

    /// Display name used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            ModelVariant::FaceEyes => "Appear-Face-Eyes",
            ModelVariant::Face => "Appear-Face",
            ModelVariant::KinectLinear => "Kinect-Linear",
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "face-eyes" => Ok(ModelVariant::FaceEyes),
            "face" => Ok(ModelVariant::Face),
            "kinect-linear" => Ok(ModelVariant::KinectLinear),
            other => Err(Error::InvalidParams(format!(
                "unknown model variant {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub variant: ModelVariant,
    pub k: usize,
    pub epsilon: f64,
    pub hog: HogParams,
    pub regions: RegionSizes,
    /// Allow training on examples from more than one looker.
    pub cross_looker: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            variant: ModelVariant::FaceEyes,
            k: 5,
            epsilon: 1e-6,
            hog: HogParams::default(),
            regions: RegionSizes::default(),
            cross_looker: false,
        }
    }
}

impl ModelConfig {
    pub fn with_variant(variant: ModelVariant) -> Self {
        ModelConfig {
            variant,
            ..ModelConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParams("k must be >= 1".into()));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidParams(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        self.hog.validate()?;
        self.hog
            .layout_for(self.regions.face.0, self.regions.face.1)?;
        self.hog
            .layout_for(self.regions.eyes.0, self.regions.eyes.1)?;
        Ok(())
    }

    /// Face and eyes descriptors, resampling patches that are not already
    /// at their canonical size.
    pub fn describe(
        &self,
        face: &GrayPatch,
        eyes: &GrayPatch,
    ) -> Result<(HogDescriptor, HogDescriptor)> {
        let canon = |p: &GrayPatch, (w, h): (usize, usize)| -> Result<HogDescriptor> {
            if p.width() == w && p.height() == h {
                compute_hog(p, &self.hog)
            } else {
                compute_hog(&resample(p, PatchBox::full(p), w, h)?, &self.hog)
            }
        };
        Ok((
            canon(face, self.regions.face)?,
            canon(eyes, self.regions.eyes)?,
        ))
    }
}

/// One labeled gaze event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub id: String,
    pub looker_id: String,
    pub face_descriptor: HogDescriptor,
    pub eyes_descriptor: Option<HogDescriptor>,
    pub head_pose: HeadPose,
    pub eye_correction: EyeGazeCorrection,
    pub gaze: GazeDirection,
}

impl TrainingExample {
    /// Derives the eye correction from head pose and gaze.
    pub fn new(
        id: impl Into<String>,
        looker_id: impl Into<String>,
        face_descriptor: HogDescriptor,
        eyes_descriptor: Option<HogDescriptor>,
        head_pose: HeadPose,
        gaze: GazeDirection,
    ) -> Self {
        TrainingExample {
            id: id.into(),
            looker_id: looker_id.into(),
            face_descriptor,
            eyes_descriptor,
            head_pose,
            eye_correction: correction_from(head_pose, gaze),
            gaze,
        }
    }
}

/// Builds training examples from a dataset using annotated head poses.
pub fn examples_from_dataset(
    dataset: &Dataset,
    config: &ModelConfig,
) -> Result<Vec<TrainingExample>> {
    dataset
        .records
        .iter()
        .map(|r| {
            let (face, eyes) = config.describe(&r.face_patch, &r.eyes_patch)?;
            Ok(TrainingExample::new(
                r.trial_id.clone(),
                r.looker_id.clone(),
                face,
                Some(eyes),
                r.annotated_head_pose,
                r.true_gaze()?,
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub index: usize,
    pub example_id: String,
    pub distance: f64,
    pub weight: f64,
}

/// Exact brute-force k-nearest-neighbor index over training examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnIndex {
    examples: Vec<TrainingExample>,
    k: usize,
    epsilon: f64,
}

#[derive(Debug, Clone, Copy)]
enum Channel {
    Face,
    Eyes,
}

impl KnnIndex {
    /// Examples are sorted by id so that input order never matters.
    pub fn new(mut examples: Vec<TrainingExample>, k: usize, epsilon: f64) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::Empty("training set"));
        }
        if k == 0 || k > examples.len() {
            return Err(Error::InvalidParams(format!(
                "k = {k} must be in 1..={}",
                examples.len()
            )));
        }
        examples.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = examples.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::InvalidParams(format!(
                "duplicate training example id {:?}",
                w[0].id
            )));
        }
        let face_layout = examples[0].face_descriptor.layout();
        let eyes_layout = examples[0].eyes_descriptor.as_ref().map(|d| d.layout());
        for e in &examples {
            if e.face_descriptor.layout() != face_layout
                || e.eyes_descriptor.as_ref().map(|d| d.layout()) != eyes_layout
            {
                return Err(Error::LayoutMismatch {
                    expected: format!("face {face_layout}"),
                    found: format!("example {} with face {}", e.id, e.face_descriptor.layout()),
                });
            }
        }
        Ok(KnnIndex {
            examples,
            k,
            epsilon,
        })
    }

    pub fn examples(&self) -> &[TrainingExample] {
        &self.examples
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    fn search(&self, query: &HogDescriptor, channel: Channel) -> Result<Vec<Neighbor>> {
        let mut scored = Vec::with_capacity(self.examples.len());
        for (i, e) in self.examples.iter().enumerate() {
            let d = match channel {
                Channel::Face => &e.face_descriptor,
                Channel::Eyes => e.eyes_descriptor.as_ref().ok_or_else(|| {
                    Error::Prediction(format!("example {} has no eyes descriptor", e.id))
                })?,
            };
            scored.push((descriptor_distance(d, query)?, i));
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(scored
            .into_iter()
            .take(self.k)
            .map(|(distance, index)| Neighbor {
                index,
                example_id: self.examples[index].id.clone(),
                distance,
                weight: 1.0 / (distance + self.epsilon),
            })
            .collect())
    }

    pub fn face_neighbors(&self, query: &HogDescriptor) -> Result<Vec<Neighbor>> {
        self.search(query, Channel::Face)
    }

    pub fn eyes_neighbors(&self, query: &HogDescriptor) -> Result<Vec<Neighbor>> {
        self.search(query, Channel::Eyes)
    }

    fn head_estimate(&self, neighbors: &[Neighbor]) -> Result<HeadPose> {
        let quats: Vec<_> = neighbors
            .iter()
            .map(|n| self.examples[n.index].head_pose.orientation)
            .collect();
        let weights: Vec<_> = neighbors.iter().map(|n| n.weight).collect();
        Ok(HeadPose::new(weighted_average(&quats, &weights)?))
    }

    fn correction_estimate(&self, neighbors: &[Neighbor]) -> Result<EyeGazeCorrection> {
        let quats: Vec<_> = neighbors
            .iter()
            .map(|n| self.examples[n.index].eye_correction.offset)
            .collect();
        let weights: Vec<_> = neighbors.iter().map(|n| n.weight).collect();
        Ok(EyeGazeCorrection::new(weighted_average(&quats, &weights)?))
    }

    fn gaze_estimate(&self, neighbors: &[Neighbor]) -> Result<GazeDirection> {
        let sum = neighbors
            .iter()
            .fold(crate::geometry::Vec3::ZERO, |acc, n| {
                acc + self.examples[n.index].gaze.vector() * n.weight
            });
        if sum.norm() <= 1e-12 {
            return Err(Error::Prediction(
                "neighbor gaze directions cancel out".into(),
            ));
        }
        GazeDirection::from_vector(sum)
    }
}

/// `(azimuth, elevation) = A * (yaw, pitch, roll) + b`, all in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearGazeMap {
    /// Rows: azimuth, elevation. Columns: yaw, pitch, roll.
    pub weights: [[f64; 3]; 2],
    pub intercept: [f64; 2],
}

impl LinearGazeMap {
    /// Least-squares fit through a Householder QR factorization of the
    /// `[yaw pitch roll 1]` design matrix.
    pub fn fit(poses: &[(f64, f64, f64)], targets: &[(f64, f64)]) -> Result<Self> {
        let n = poses.len();
        if n == 0 {
            return Err(Error::Empty("regression samples"));
        }
        if targets.len() != n {
            return Err(Error::InvalidParams(format!(
                "{n} poses but {} targets",
                targets.len()
            )));
        }
        if n < 4 {
            return Err(Error::SingularFit(format!(
                "need at least 4 samples for 4 coefficients, got {n}"
            )));
        }
        let design = DMatrix::from_fn(n, 4, |i, j| match j {
            0 => poses[i].0,
            1 => poses[i].1,
            2 => poses[i].2,
            _ => 1.0,
        });
        let rhs = DMatrix::from_fn(
            n,
            2,
            |i, j| if j == 0 { targets[i].0 } else { targets[i].1 },
        );
        let col_norms: Vec<f64> = (0..4).map(|j| design.column(j).norm()).collect();
        let qr = design.qr();
        let r = qr.r();
        let scale = col_norms.iter().cloned().fold(0.0, f64::max);
        for j in 0..4 {
            if r[(j, j)].abs() <= 1e-9 * scale {
                return Err(Error::SingularFit(format!(
                    "design matrix is rank deficient (pivot {j} = {:e})",
                    r[(j, j)]
                )));
            }
        }
        let qtb = qr.q().transpose() * rhs;
        let coef = r
            .solve_upper_triangular(&qtb)
            .ok_or_else(|| Error::SingularFit("triangular solve failed".into()))?;
        Ok(LinearGazeMap {
            weights: [
                [coef[(0, 0)], coef[(1, 0)], coef[(2, 0)]],
                [coef[(0, 1)], coef[(1, 1)], coef[(2, 1)]],
            ],
            intercept: [coef[(3, 0)], coef[(3, 1)]],
        })
    }

    /// Predicted `(azimuth, elevation)` in degrees.
    pub fn apply(&self, yaw: f64, pitch: f64, roll: f64) -> (f64, f64) {
        let row = |r: usize| {
            let w = self.weights[r];
            w[0] * yaw + w[1] * pitch + w[2] * roll + self.intercept[r]
        };
        (row(0), row(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GazeModel {
    FaceEyes { index: KnnIndex },
    Face { index: KnnIndex },
    KinectLinear { map: LinearGazeMap },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazePrediction {
    pub direction: GazeDirection,
    pub head_estimate: Option<HeadPose>,
    pub correction_estimate: Option<EyeGazeCorrection>,
    pub face_neighbors: Vec<Neighbor>,
    pub eyes_neighbors: Vec<Neighbor>,
}

impl GazePrediction {
    fn direction_only(direction: GazeDirection) -> Self {
        GazePrediction {
            direction,
            head_estimate: None,
            correction_estimate: None,
            face_neighbors: Vec::new(),
            eyes_neighbors: Vec::new(),
        }
    }
}

/// Everything a model may look at for one query.
#[derive(Debug, Clone)]
pub struct Query {
    pub face: HogDescriptor,
    pub eyes: Option<HogDescriptor>,
    pub head_pose: Option<HeadPose>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub version: u32,
    pub config: ModelConfig,
    pub lookers: Vec<String>,
    pub model: GazeModel,
}

/// Trains the variant selected by `config`.
pub fn train(examples: Vec<TrainingExample>, config: &ModelConfig) -> Result<TrainedModel> {
    config.validate()?;
    if examples.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let lookers: Vec<String> = examples
        .iter()
        .map(|e| e.looker_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if lookers.len() > 1 && !config.cross_looker {
        return Err(Error::InvalidParams(format!(
            "training set mixes lookers {lookers:?}; enable cross-looker training to allow this"
        )));
    }
    let model = match config.variant {
        ModelVariant::FaceEyes => {
            if let Some(e) = examples.iter().find(|e| e.eyes_descriptor.is_none()) {
                return Err(Error::InvalidParams(format!(
                    "example {} has no eyes descriptor",
                    e.id
                )));
            }
            GazeModel::FaceEyes {
                index: KnnIndex::new(examples, config.k, config.epsilon)?,
            }
        }
        ModelVariant::Face => GazeModel::Face {
            index: KnnIndex::new(examples, config.k, config.epsilon)?,
        },
        ModelVariant::KinectLinear => {
            let mut sorted = examples;
            sorted.sort_by(|a, b| a.id.cmp(&b.id));
            let poses: Vec<_> = sorted.iter().map(|e| e.head_pose.euler_deg()).collect();
            let targets: Vec<_> = sorted
                .iter()
                .map(|e| (e.gaze.azimuth_deg(), e.gaze.elevation_deg()))
                .collect();
            GazeModel::KinectLinear {
                map: LinearGazeMap::fit(&poses, &targets)?,
            }
        }
    };
    Ok(TrainedModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        config: *config,
        lookers,
        model,
    })
}

/// Convenience: descriptors from the dataset, then [`train`].
pub fn train_on_dataset(dataset: &Dataset, config: &ModelConfig) -> Result<TrainedModel> {
    config.validate()?;
    train(examples_from_dataset(dataset, config)?, config)
}

impl TrainedModel {
    pub fn variant(&self) -> ModelVariant {
        self.config.variant
    }

    pub fn training_size(&self) -> usize {
        match &self.model {
            GazeModel::FaceEyes { index } | GazeModel::Face { index } => index.len(),
            GazeModel::KinectLinear { .. } => 0,
        }
    }

    fn knn(&self, wanted: ModelVariant) -> Result<&KnnIndex> {
        match (&self.model, wanted) {
            (GazeModel::FaceEyes { index }, ModelVariant::FaceEyes)
            | (GazeModel::Face { index }, ModelVariant::Face) => Ok(index),
            _ => Err(Error::Prediction(format!(
                "{} model cannot answer a {} query",
                self.variant(),
                wanted
            ))),
        }
    }

    /// Head pose from face neighbors, eye correction from eyes neighbors.
    pub fn predict_face_eyes(
        &self,
        face: &HogDescriptor,
        eyes: &HogDescriptor,
    ) -> Result<GazePrediction> {
        let index = self.knn(ModelVariant::FaceEyes)?;
        let face_neighbors = index.face_neighbors(face)?;
        let eyes_neighbors = index.eyes_neighbors(eyes)?;
        let head = index.head_estimate(&face_neighbors)?;
        let corr = index.correction_estimate(&eyes_neighbors)?;
        Ok(GazePrediction {
            direction: compose(head, corr),
            head_estimate: Some(head),
            correction_estimate: Some(corr),
            face_neighbors,
            eyes_neighbors,
        })
    }

    /// Head-only prediction for queries whose eyes are hidden.
    pub fn eyes_invisible_query(&self, face: &HogDescriptor) -> Result<GazePrediction> {
        let index = self.knn(ModelVariant::FaceEyes)?;
        let face_neighbors = index.face_neighbors(face)?;
        let head = index.head_estimate(&face_neighbors)?;
        Ok(GazePrediction {
            direction: compose(head, EyeGazeCorrection::IDENTITY),
            head_estimate: Some(head),
            correction_estimate: Some(EyeGazeCorrection::IDENTITY),
            face_neighbors,
            eyes_neighbors: Vec::new(),
        })
    }

    /// Similarity-weighted mean of the neighbors' gaze vectors.
    pub fn predict_face(&self, face: &HogDescriptor) -> Result<GazePrediction> {
        let index = self.knn(ModelVariant::Face)?;
        let face_neighbors = index.face_neighbors(face)?;
        let direction = index.gaze_estimate(&face_neighbors)?;
        Ok(GazePrediction {
            face_neighbors,
            ..GazePrediction::direction_only(direction)
        })
    }

    pub fn predict_kinect_linear(&self, head_pose: HeadPose) -> Result<GazePrediction> {
        let GazeModel::KinectLinear { map } = &self.model else {
            return Err(Error::Prediction(format!(
                "{} model cannot answer a kinect-linear query",
                self.variant()
            )));
        };
        let (yaw, pitch, roll) = head_pose.euler_deg();
        let (az, el) = map.apply(yaw, pitch, roll);
        Ok(GazePrediction::direction_only(GazeDirection::from_az_el(
            az, el,
        )))
    }

    /// Dispatches on the variant. `eyes_visible = false` routes
    /// Appear-Face-Eyes through the head-only pathway.
    pub fn predict(&self, query: &Query, eyes_visible: bool) -> Result<GazePrediction> {
        match self.variant() {
            ModelVariant::FaceEyes if eyes_visible => {
                let eyes = query
                    .eyes
                    .as_ref()
                    .ok_or_else(|| Error::Prediction("query has no eyes descriptor".into()))?;
                self.predict_face_eyes(&query.face, eyes)
            }
            ModelVariant::FaceEyes => self.eyes_invisible_query(&query.face),
            ModelVariant::Face => self.predict_face(&query.face),
            ModelVariant::KinectLinear => {
                let pose = query
                    .head_pose
                    .ok_or_else(|| Error::Prediction("query has no head pose".into()))?;
                self.predict_kinect_linear(pose)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: TrainedModel =
            serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if model.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!(
                "unexpected format {:?}",
                model.format
            )));
        }
        if model.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model version {}",
                model.version
            )));
        }
        model.config.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TrainedModel::from_json(&text)
    }
}
