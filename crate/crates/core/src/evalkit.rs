//! Scoring: exact and one-off target accuracy, per-column row/column
//! accuracy, and signed bias / spread of angular errors.
//!
//! Sign conventions for [`bias_stats`]: a column error is positive when the
//! response lies further toward the periphery than the truth (targets right
//! of center and the center column count as the right side); a row error is
//! positive when the response is below the truth.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::datasets::{Condition, Dataset};
use crate::error::{Error, Result};
use crate::geometry::{
    gaze_to_target, snap_to_target, GazeDirection, ObserverPosition, SceneLayout, TargetId, Vec3,
    N_COLS,
};
use crate::models::{GazePrediction, Query, TrainedModel};

/// Ground truth of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub trial_id: String,
    pub looker_id: String,
    pub target: TargetId,
    pub direction: GazeDirection,
    pub eye_center: Vec3,
}

pub fn truths_from_dataset(dataset: &Dataset) -> Result<Vec<Truth>> {
    dataset
        .records
        .iter()
        .map(|r| {
            Ok(Truth {
                trial_id: r.trial_id.clone(),
                looker_id: r.looker_id.clone(),
                target: r.target,
                direction: r.true_gaze()?,
                eye_center: r.eye_center,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Answer {
    /// Continuous prediction, with the target it snaps to (if any).
    Direction {
        direction: GazeDirection,
        snapped: Option<TargetId>,
    },
    /// Discrete forced-choice response.
    Target { target: TargetId },
    /// The estimator failed on this trial.
    Invalid { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub trial_id: String,
    pub answer: Answer,
}

impl Response {
    pub fn target(trial_id: impl Into<String>, target: TargetId) -> Self {
        Response {
            trial_id: trial_id.into(),
            answer: Answer::Target { target },
        }
    }

    /// Continuous prediction, snapped to the grid from `eye_center`.
    pub fn direction(
        trial_id: impl Into<String>,
        direction: GazeDirection,
        eye_center: Vec3,
        scene: &SceneLayout,
    ) -> Self {
        Response {
            trial_id: trial_id.into(),
            answer: Answer::Direction {
                direction,
                snapped: snap_to_target(direction, eye_center, &scene.grid).map(|t| t.id),
            },
        }
    }

    pub fn invalid(trial_id: impl Into<String>, reason: impl Into<String>) -> Self {
        Response {
            trial_id: trial_id.into(),
            answer: Answer::Invalid {
                reason: reason.into(),
            },
        }
    }

    pub fn predicted_target(&self) -> Option<TargetId> {
        match &self.answer {
            Answer::Direction { snapped, .. } => *snapped,
            Answer::Target { target } => Some(*target),
            Answer::Invalid { .. } => None,
        }
    }

    /// The response as a direction from the trial's eye center.
    pub fn predicted_direction(
        &self,
        truth: &Truth,
        scene: &SceneLayout,
    ) -> Result<Option<GazeDirection>> {
        match &self.answer {
            Answer::Direction { direction, .. } => Ok(Some(*direction)),
            Answer::Target { target } => Ok(Some(gaze_to_target(
                truth.eye_center,
                scene.grid.target(*target)?,
            )?)),
            Answer::Invalid { .. } => Ok(None),
        }
    }

    pub fn is_valid(&self) -> bool {
        !matches!(self.answer, Answer::Invalid { .. })
    }
}

/// Pairs responses with truths by trial id, ordered by trial id.
fn align<'a>(
    responses: &'a [Response],
    truths: &'a [Truth],
) -> Result<Vec<(&'a Response, &'a Truth)>> {
    if responses.is_empty() && truths.is_empty() {
        return Err(Error::Empty("no trials to score"));
    }
    let mut by_id: HashMap<&str, &Truth> = HashMap::with_capacity(truths.len());
    for t in truths {
        if by_id.insert(t.trial_id.as_str(), t).is_some() {
            return Err(Error::UnmatchedTrial(format!(
                "{} (duplicate truth)",
                t.trial_id
            )));
        }
    }
    let mut pairs = Vec::with_capacity(responses.len());
    let mut used = HashMap::with_capacity(responses.len());
    for r in responses {
        let t = by_id
            .get(r.trial_id.as_str())
            .ok_or_else(|| Error::UnmatchedTrial(r.trial_id.clone()))?;
        if used.insert(r.trial_id.as_str(), ()).is_some() {
            return Err(Error::UnmatchedTrial(format!(
                "{} (duplicate response)",
                r.trial_id
            )));
        }
        pairs.push((r, *t));
    }
    if let Some(t) = truths
        .iter()
        .find(|t| !used.contains_key(t.trial_id.as_str()))
    {
        return Err(Error::UnmatchedTrial(format!(
            "{} (no response)",
            t.trial_id
        )));
    }
    pairs.sort_by(|a, b| a.0.trial_id.cmp(&b.0.trial_id));
    Ok(pairs)
}

fn fraction(pairs: &[(&Response, &Truth)], hit: impl Fn(TargetId, TargetId) -> bool) -> f64 {
    let n = pairs
        .iter()
        .filter(|(r, t)| r.predicted_target().is_some_and(|p| hit(p, t.target)))
        .count();
    n as f64 / pairs.len() as f64
}

fn exact(p: TargetId, t: TargetId) -> bool {
    p == t
}

fn one_off(p: TargetId, t: TargetId) -> bool {
    p.row.abs_diff(t.row) <= 1 && p.col.abs_diff(t.col) <= 1
}

/// Fraction of trials with both row and column right.
pub fn exact_accuracy(responses: &[Response], truths: &[Truth]) -> Result<f64> {
    Ok(fraction(&align(responses, truths)?, exact))
}

/// Fraction of trials off by at most one row and at most one column.
pub fn one_off_accuracy(responses: &[Response], truths: &[Truth]) -> Result<f64> {
    Ok(fraction(&align(responses, truths)?, one_off))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasStats {
    pub col_bias_deg: f64,
    pub col_std_deg: f64,
    pub row_bias_deg: f64,
    pub row_std_deg: f64,
    pub n_trials: usize,
}

fn wrap_deg(a: f64) -> f64 {
    let w = (a + 180.0).rem_euclid(360.0) - 180.0;
    if w == -180.0 {
        180.0
    } else {
        w
    }
}

/// Signed `(column, row)` errors in degrees for one trial.
pub fn signed_errors(predicted: GazeDirection, truth: &Truth) -> (f64, f64) {
    let col = wrap_deg(predicted.azimuth_deg() - truth.direction.azimuth_deg())
        * truth.target.side_sign();
    let row = truth.direction.elevation_deg() - predicted.elevation_deg();
    (col, row)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Mean and population standard deviation of the signed errors over all
/// trials that produced an answer.
pub fn bias_stats(
    responses: &[Response],
    truths: &[Truth],
    scene: &SceneLayout,
) -> Result<BiasStats> {
    let pairs = align(responses, truths)?;
    let mut cols = Vec::with_capacity(pairs.len());
    let mut rows = Vec::with_capacity(pairs.len());
    for (r, t) in pairs {
        if let Some(d) = r.predicted_direction(t, scene)? {
            let (c, w) = signed_errors(d, t);
            cols.push(c);
            rows.push(w);
        }
    }
    if cols.is_empty() {
        return Err(Error::Empty("no valid responses for bias statistics"));
    }
    let (col_bias_deg, col_std_deg) = mean_std(&cols);
    let (row_bias_deg, row_std_deg) = mean_std(&rows);
    Ok(BiasStats {
        col_bias_deg,
        col_std_deg,
        row_bias_deg,
        row_std_deg,
        n_trials: cols.len(),
    })
}

/// Where the responses were produced from: the looker-facing camera (models)
/// or one of the four observer seats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Viewpoint {
    Camera,
    Observer(ObserverPosition),
}

impl Viewpoint {
    /// `"camera"` or an observer seat id `"1"`..`"4"`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "camera" {
            return Ok(Viewpoint::Camera);
        }
        let id: u8 = s
            .parse()
            .map_err(|_| Error::UnknownPosition(s.to_string()))?;
        Ok(Viewpoint::Observer(ObserverPosition::from_id(id)?))
    }

    pub fn name(self) -> String {
        match self {
            Viewpoint::Camera => "camera".into(),
            Viewpoint::Observer(p) => format!("position-{}", p.id()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnAccuracy {
    pub col: u8,
    pub n_trials: usize,
    pub row_accuracy: f64,
    pub col_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionAccuracy {
    pub viewpoint: Viewpoint,
    /// One entry per target column that has at least one trial.
    pub columns: Vec<ColumnAccuracy>,
}

/// Per target column: fraction of trials with the right row and fraction
/// with the right column.
pub fn position_accuracy(
    responses: &[Response],
    truths: &[Truth],
    viewpoint: Viewpoint,
) -> Result<PositionAccuracy> {
    let pairs = align(responses, truths)?;
    let mut per_col: BTreeMap<u8, (usize, usize, usize)> = BTreeMap::new();
    for (r, t) in pairs {
        let e = per_col.entry(t.target.col).or_default();
        e.0 += 1;
        if let Some(p) = r.predicted_target() {
            e.1 += usize::from(p.row == t.target.row);
            e.2 += usize::from(p.col == t.target.col);
        }
    }
    debug_assert!(per_col.keys().all(|c| (1..=N_COLS).contains(c)));
    Ok(PositionAccuracy {
        viewpoint,
        columns: per_col
            .into_iter()
            .map(|(col, (n, rows, cols))| ColumnAccuracy {
                col,
                n_trials: n,
                row_accuracy: rows as f64 / n as f64,
                col_accuracy: cols as f64 / n as f64,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub looker_id: String,
    pub n_trials: usize,
    pub n_invalid: usize,
    pub exact_accuracy: f64,
    pub one_off_accuracy: f64,
    pub bias: Option<BiasStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Model or observer label, e.g. `Appear-Face-Eyes`.
    pub source: String,
    pub condition: Condition,
    pub groups: Vec<GroupReport>,
    pub positions: Vec<PositionAccuracy>,
}

impl EvalReport {
    pub fn group(&self, looker_id: &str) -> Option<&GroupReport> {
        self.groups.iter().find(|g| g.looker_id == looker_id)
    }

    /// Plain-text tables: one row per looker with accuracy and the
    /// colBias / colStd / rowBias / rowStd columns, then per-column
    /// accuracy for every viewpoint.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("# accuracy and bias (degrees)\n");
        s.push_str("source\tcondition\tlooker\tn\tinvalid\texact\tone_off\tcolBias\tcolStd\trowBias\trowStd\n");
        for g in &self.groups {
            let _ = write!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{:.4}\t{:.4}",
                self.source,
                self.condition,
                g.looker_id,
                g.n_trials,
                g.n_invalid,
                g.exact_accuracy,
                g.one_off_accuracy
            );
            match g.bias {
                Some(b) => {
                    let _ = writeln!(
                        s,
                        "\t{:.2}\t{:.2}\t{:.2}\t{:.2}",
                        b.col_bias_deg, b.col_std_deg, b.row_bias_deg, b.row_std_deg
                    );
                }
                None => s.push_str("\t-\t-\t-\t-\n"),
            }
        }
        for p in &self.positions {
            let _ = writeln!(s, "\n# per-column accuracy ({})", p.viewpoint.name());
            s.push_str("col\tn\trow_acc\tcol_acc\n");
            for c in &p.columns {
                let _ = writeln!(
                    s,
                    "{}\t{}\t{:.4}\t{:.4}",
                    c.col, c.n_trials, c.row_accuracy, c.col_accuracy
                );
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Aggregates responses into a report, one group per looker.
pub fn score(
    responses: &[Response],
    truths: &[Truth],
    scene: &SceneLayout,
    source: &str,
    condition: Condition,
    viewpoint: Viewpoint,
) -> Result<EvalReport> {
    // Validates the full alignment once up front.
    align(responses, truths)?;
    let response_of: HashMap<&str, &Response> =
        responses.iter().map(|r| (r.trial_id.as_str(), r)).collect();
    let mut lookers: BTreeMap<&str, (Vec<Response>, Vec<Truth>)> = BTreeMap::new();
    for t in truths {
        let e = lookers.entry(t.looker_id.as_str()).or_default();
        e.0.push(response_of[t.trial_id.as_str()].clone());
        e.1.push(t.clone());
    }
    let mut groups = Vec::with_capacity(lookers.len());
    for (looker, (rs, ts)) in lookers {
        let bias = match bias_stats(&rs, &ts, scene) {
            Ok(b) => Some(b),
            Err(Error::Empty(_)) => None,
            Err(e) => return Err(e),
        };
        groups.push(GroupReport {
            looker_id: looker.to_string(),
            n_trials: ts.len(),
            n_invalid: rs.iter().filter(|r| !r.is_valid()).count(),
            exact_accuracy: exact_accuracy(&rs, &ts)?,
            one_off_accuracy: one_off_accuracy(&rs, &ts)?,
            bias,
        });
    }
    Ok(EvalReport {
        source: source.to_string(),
        condition,
        groups,
        positions: vec![position_accuracy(responses, truths, viewpoint)?],
    })
}

/// One model output per trial, kept alongside the response for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPrediction {
    pub response: Response,
    pub prediction: Option<GazePrediction>,
}

/// Predicts every trial from its patches (Kinect-Linear also reads the
/// annotated head pose). Failures become invalid responses.
pub fn predict_dataset(
    model: &TrainedModel,
    dataset: &Dataset,
    condition: Condition,
) -> Result<Vec<TrialPrediction>> {
    let eyes_visible = condition == Condition::EyesVisible;
    let mut out = Vec::with_capacity(dataset.len());
    for r in &dataset.records {
        let attempt = model
            .config
            .describe(&r.face_patch, &r.eyes_patch)
            .and_then(|(face, eyes)| {
                let query = Query {
                    face,
                    eyes: Some(eyes),
                    head_pose: Some(r.annotated_head_pose),
                };
                model.predict(&query, eyes_visible)
            });
        out.push(match attempt {
            Ok(p) => TrialPrediction {
                response: Response::direction(
                    r.trial_id.clone(),
                    p.direction,
                    r.eye_center,
                    &dataset.scene,
                ),
                prediction: Some(p),
            },
            Err(e) => TrialPrediction {
                response: Response::invalid(r.trial_id.clone(), e.to_string()),
                prediction: None,
            },
        });
    }
    Ok(out)
}

/// Predicts and scores a held-out dataset.
pub fn run_evaluation(
    model: &TrainedModel,
    test: &Dataset,
    condition: Condition,
) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::Empty("test dataset"));
    }
    let responses: Vec<Response> = predict_dataset(model, test, condition)?
        .into_iter()
        .map(|p| p.response)
        .collect();
    let truths = truths_from_dataset(test)?;
    score(
        &responses,
        &truths,
        &test.scene,
        model.variant().label(),
        condition,
        Viewpoint::Camera,
    )
}

pub const PREDICTIONS_HEADER: &str =
    "trial_id\tazimuth_deg\televation_deg\tdir_x\tdir_y\tdir_z\tpred_row\tpred_col\tface_neighbors\teyes_neighbors";

fn fmt_neighbors(p: Option<&GazePrediction>, eyes: bool) -> String {
    let Some(p) = p else { return "-".into() };
    let list = if eyes {
        &p.eyes_neighbors
    } else {
        &p.face_neighbors
    };
    if list.is_empty() {
        return "-".into();
    }
    list.iter()
        .map(|n| format!("{}:{}", n.example_id, n.weight))
        .collect::<Vec<_>>()
        .join(",")
}

/// Tab-separated per-trial predictions. Direction components are written
/// with round-trip precision so the file can be re-scored exactly.
pub fn predictions_to_text(predictions: &[TrialPrediction]) -> String {
    let mut s = String::new();
    s.push_str(PREDICTIONS_HEADER);
    s.push('\n');
    for p in predictions {
        let r = &p.response;
        match &r.answer {
            Answer::Direction { direction, snapped } => {
                let v = direction.vector();
                let (row, col) = snapped.map_or(("-".to_string(), "-".to_string()), |t| {
                    (t.row.to_string(), t.col.to_string())
                });
                let _ = writeln!(
                    s,
                    "{}\t{:.4}\t{:.4}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.trial_id,
                    direction.azimuth_deg(),
                    direction.elevation_deg(),
                    v.x,
                    v.y,
                    v.z,
                    row,
                    col,
                    fmt_neighbors(p.prediction.as_ref(), false),
                    fmt_neighbors(p.prediction.as_ref(), true)
                );
            }
            Answer::Target { target } => {
                let _ = writeln!(
                    s,
                    "{}\t-\t-\t-\t-\t-\t{}\t{}\t-\t-",
                    r.trial_id, target.row, target.col
                );
            }
            Answer::Invalid { .. } => {
                let _ = writeln!(s, "{}\t-\t-\t-\t-\t-\t-\t-\t-\t-", r.trial_id);
            }
        }
    }
    s
}

/// Parses a predictions file back into responses.
pub fn responses_from_text(text: &str) -> Result<Vec<Response>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, h)) if h == PREDICTIONS_HEADER => {}
        _ => {
            return Err(Error::MalformedRecord {
                line: 1,
                message: "not a predictions file".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (line, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let f: Vec<&str> = raw.split('\t').collect();
        let bad = |message: String| Error::MalformedRecord { line, message };
        if f.len() != 10 {
            return Err(bad(format!("expected 10 fields, found {}", f.len())));
        }
        let target = match (f[6], f[7]) {
            ("-", "-") => None,
            (r, c) => {
                let row = r.parse().map_err(|_| bad(format!("bad row {r:?}")))?;
                let col = c.parse().map_err(|_| bad(format!("bad col {c:?}")))?;
                Some(TargetId::new(row, col).map_err(|e| bad(e.to_string()))?)
            }
        };
        let answer = if f[3] == "-" {
            match target {
                Some(target) => Answer::Target { target },
                None => Answer::Invalid {
                    reason: "no prediction".into(),
                },
            }
        } else {
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| bad(format!("bad number {s:?}")))
            };
            let v = Vec3::new(num(f[3])?, num(f[4])?, num(f[5])?);
            let direction = GazeDirection::try_from(v).map_err(|e| bad(e.to_string()))?;
            Answer::Direction {
                direction,
                snapped: target,
            }
        };
        out.push(Response {
            trial_id: f[0].to_string(),
            answer,
        });
    }
    Ok(out)
}
