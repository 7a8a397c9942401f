//! Dataset manifests and patch images.
//!
//! A dataset directory holds `scene.txt`, a tab-separated manifest, and one
//! binary PGM per patch under `patches/`. The manifest layout is:
//!
//! ```text
//! gazekit-manifest<TAB>1
//! scene<TAB>scene.txt
//! trial_id<TAB>looker_id<TAB>block_id<TAB>condition<TAB>target_row<TAB>target_col<TAB>face_patch<TAB>eyes_patch<TAB>head_qw<TAB>head_qx<TAB>head_qy<TAB>head_qz<TAB>eye_x<TAB>eye_y<TAB>eye_z<TAB>target_x<TAB>target_y<TAB>target_z
//! <one record per line, same field order>
//! ```
//!
//! Lengths are centimeters in the scene frame, the head pose is a unit
//! quaternion (scalar first), and patch paths are relative to the manifest.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};
use serde::{Deserialize, Serialize};

use crate::descriptor::GrayPatch;
use crate::error::{Error, Result};
use crate::geometry::{gaze_to_point, GazeDirection, SceneLayout, TargetId, Vec3};
use crate::orientation::{HeadPose, UnitQuaternion, UNIT_NORM_TOLERANCE};

pub const MANIFEST_MAGIC: &str = "gazekit-manifest";
pub const MANIFEST_VERSION: u32 = 1;
pub const SCENE_FILE: &str = "scene.txt";
pub const PATCH_DIR: &str = "patches";

pub const COLUMNS: [&str; 18] = [
    "trial_id",
    "looker_id",
    "block_id",
    "condition",
    "target_row",
    "target_col",
    "face_patch",
    "eyes_patch",
    "head_qw",
    "head_qx",
    "head_qy",
    "head_qz",
    "eye_x",
    "eye_y",
    "eye_z",
    "target_x",
    "target_y",
    "target_z",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    EyesVisible,
    EyesInvisible,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::EyesVisible => "eyes-visible",
            Condition::EyesInvisible => "eyes-invisible",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eyes-visible" | "visible" => Ok(Condition::EyesVisible),
            "eyes-invisible" | "invisible" => Ok(Condition::EyesInvisible),
            other => Err(Error::InvalidParams(format!("unknown condition {other:?}"))),
        }
    }
}

/// One trial as stored in a manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub trial_id: String,
    pub looker_id: String,
    pub block_id: u32,
    pub condition: Condition,
    pub target: TargetId,
    pub face_patch: GrayPatch,
    pub eyes_patch: GrayPatch,
    pub annotated_head_pose: HeadPose,
    pub eye_center: Vec3,
    pub target_position: Vec3,
}

impl Record {
    /// Ray from the recorded eye center to the recorded target position.
    pub fn true_gaze(&self) -> Result<GazeDirection> {
        gaze_to_point(self.eye_center, self.target_position)
    }

    fn face_path(&self) -> String {
        format!("{PATCH_DIR}/{}_face.pgm", self.trial_id)
    }

    fn eyes_path(&self) -> String {
        format!("{PATCH_DIR}/{}_eyes.pgm", self.trial_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub scene: SceneLayout,
    pub records: Vec<Record>,
}

impl Dataset {
    pub fn empty(scene: SceneLayout) -> Self {
        Dataset {
            scene,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct looker ids in first-seen order.
    pub fn lookers(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for r in &self.records {
            if !seen.contains(&r.looker_id) {
                seen.push(r.looker_id.clone());
            }
        }
        seen
    }

    pub fn filter(&self, keep: impl Fn(&Record) -> bool) -> Dataset {
        Dataset {
            scene: self.scene.clone(),
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    pub fn blocks(&self, ids: &[u32]) -> Dataset {
        self.filter(|r| ids.contains(&r.block_id))
    }
}

fn valid_trial_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

fn write_pgm(path: &Path, patch: &GrayPatch) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let encoder = PnmEncoder::new(BufWriter::new(file))
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary));
    encoder
        .write_image(
            &patch.to_gray8(),
            patch.width() as u32,
            patch.height() as u32,
            ExtendedColorType::L8,
        )
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}

/// Reads an 8-bit PGM (grayscale) or PPM (RGB, converted by luminance).
pub fn read_patch(path: &Path) -> Result<GrayPatch> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let img_err = |message: String| Error::Image {
        path: path.to_path_buf(),
        message,
    };
    let img = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| img_err(e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(g) => GrayPatch::from_gray8(w, h, g.as_raw()),
        DynamicImage::ImageRgb8(rgb) => GrayPatch::from_rgb8(w, h, rgb.as_raw()),
        other => Err(img_err(format!(
            "unsupported pixel format {:?}",
            other.color()
        ))),
    }
}

fn fmt_record(r: &Record) -> String {
    let q = r.annotated_head_pose.orientation.components();
    let (e, t) = (r.eye_center, r.target_position);
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        r.trial_id,
        r.looker_id,
        r.block_id,
        r.condition,
        r.target.row,
        r.target.col,
        r.face_path(),
        r.eyes_path(),
        q[0],
        q[1],
        q[2],
        q[3],
        e.x,
        e.y,
        e.z,
        t.x,
        t.y,
        t.z
    )
}

/// Manifest text for `dataset` (without writing any patch files).
pub fn manifest_text(dataset: &Dataset) -> String {
    let mut s = format!("{MANIFEST_MAGIC}\t{MANIFEST_VERSION}\nscene\t{SCENE_FILE}\n");
    s.push_str(&COLUMNS.join("\t"));
    s.push('\n');
    for r in &dataset.records {
        s.push_str(&fmt_record(r));
    }
    s
}

/// Writes the manifest at `path`, plus `scene.txt` and patch images next to it.
pub fn write_manifest(dataset: &Dataset, path: &Path) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let dir = if dir.as_os_str().is_empty() {
        Path::new(".")
    } else {
        dir
    };
    let mut ids = HashSet::new();
    for r in &dataset.records {
        if !valid_trial_id(&r.trial_id) || !ids.insert(r.trial_id.as_str()) {
            return Err(Error::InvalidParams(format!(
                "trial id {:?} is invalid or repeated",
                r.trial_id
            )));
        }
    }
    let patch_dir = dir.join(PATCH_DIR);
    fs::create_dir_all(&patch_dir).map_err(|e| Error::io(&patch_dir, e))?;
    let scene_path = dir.join(SCENE_FILE);
    fs::write(&scene_path, dataset.scene.to_text()).map_err(|e| Error::io(&scene_path, e))?;
    for r in &dataset.records {
        write_pgm(&dir.join(r.face_path()), &r.face_patch)?;
        write_pgm(&dir.join(r.eyes_path()), &r.eyes_patch)?;
    }
    fs::write(path, manifest_text(dataset)).map_err(|e| Error::io(path, e))
}

struct Fields<'a> {
    line: usize,
    fields: Vec<&'a str>,
}

impl Fields<'_> {
    fn malformed(&self, message: String) -> Error {
        Error::MalformedRecord {
            line: self.line,
            message,
        }
    }

    fn invalid(&self, message: String) -> Error {
        Error::Validation {
            line: self.line,
            message,
        }
    }

    fn parse<T: FromStr>(&self, i: usize) -> Result<T> {
        self.fields[i].parse().map_err(|_| {
            self.malformed(format!(
                "{} = {:?} does not parse",
                COLUMNS[i], self.fields[i]
            ))
        })
    }

    fn float(&self, i: usize) -> Result<f64> {
        let v: f64 = self.parse(i)?;
        if !v.is_finite() {
            return Err(self.malformed(format!("{} is not finite", COLUMNS[i])));
        }
        Ok(v)
    }

    fn vec3(&self, start: usize) -> Result<Vec3> {
        Ok(Vec3::new(
            self.float(start)?,
            self.float(start + 1)?,
            self.float(start + 2)?,
        ))
    }
}

fn resolve(dir: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}

/// Reads and eagerly validates a manifest and every patch it references.
pub fn read_manifest(path: &Path) -> Result<Dataset> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::UnknownSchemaVersion(String::new()))?;
    match header.split_once('\t') {
        Some((MANIFEST_MAGIC, v)) if v == MANIFEST_VERSION.to_string() => {}
        _ => return Err(Error::UnknownSchemaVersion(header.to_string())),
    }

    let scene = match lines.next() {
        Some((n, line)) => {
            let Some(("scene", file)) = line.split_once('\t') else {
                return Err(Error::MalformedRecord {
                    line: n,
                    message: "expected `scene<TAB><file>`".into(),
                });
            };
            let scene_path = resolve(dir, file);
            if !scene_path.is_file() {
                return Err(Error::MissingFile(scene_path));
            }
            let text = fs::read_to_string(&scene_path).map_err(|e| Error::io(&scene_path, e))?;
            SceneLayout::from_text(&text)?
        }
        None => {
            return Err(Error::MalformedRecord {
                line: 2,
                message: "missing scene line".into(),
            })
        }
    };

    match lines.next() {
        Some((_, cols)) if cols == COLUMNS.join("\t") => {}
        _ => {
            return Err(Error::MalformedRecord {
                line: 3,
                message: format!("column header must be `{}`", COLUMNS.join(" ")),
            })
        }
    }

    let mut ids = HashSet::new();
    let mut records = Vec::new();
    for (line, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let f = Fields {
            line,
            fields: raw.split('\t').collect(),
        };
        if f.fields.len() != COLUMNS.len() {
            return Err(f.malformed(format!(
                "expected {} tab-separated fields, found {}",
                COLUMNS.len(),
                f.fields.len()
            )));
        }
        let trial_id = f.fields[0].to_string();
        if !valid_trial_id(&trial_id) {
            return Err(f.invalid(format!("invalid trial id {trial_id:?}")));
        }
        if !ids.insert(trial_id.clone()) {
            return Err(f.invalid(format!("duplicate trial id {trial_id:?}")));
        }
        let looker_id = f.fields[1].to_string();
        if !valid_trial_id(&looker_id) {
            return Err(f.invalid(format!("invalid looker id {looker_id:?}")));
        }
        let block_id: u32 = f.parse(2)?;
        let condition: Condition = f.fields[3]
            .parse()
            .ok()
            .filter(|c: &Condition| c.name() == f.fields[3])
            .ok_or_else(|| f.malformed(format!("unknown condition {:?}", f.fields[3])))?;
        let row: u8 = f.parse(4)?;
        let col: u8 = f.parse(5)?;
        let target = TargetId::new(row, col).map_err(|e| f.invalid(e.to_string()))?;
        let q = [f.float(8)?, f.float(9)?, f.float(10)?, f.float(11)?];
        let orientation =
            UnitQuaternion::from_unit_components(q[0], q[1], q[2], q[3], UNIT_NORM_TOLERANCE)
                .map_err(|_| Error::NonUnitQuaternion {
                    trial_id: trial_id.clone(),
                    norm: q.iter().map(|c| c * c).sum::<f64>().sqrt(),
                })?;
        if orientation.components() != q {
            return Err(f.invalid(format!(
                "trial {trial_id}: quaternion must have a nonnegative scalar part"
            )));
        }
        let eye_center = f.vec3(12)?;
        let target_position = f.vec3(15)?;
        let grid_position = scene.grid.target(target)?.position;
        if (target_position - grid_position).norm() > 1e-6 {
            return Err(f.invalid(format!(
                "trial {trial_id}: target position does not match grid target {target}"
            )));
        }
        if (target_position - eye_center).norm() <= 1e-9 {
            return Err(f.invalid(format!(
                "trial {trial_id}: eye center coincides with target"
            )));
        }
        let face_patch = read_patch(&resolve(dir, f.fields[6]))?;
        let eyes_patch = read_patch(&resolve(dir, f.fields[7]))?;
        records.push(Record {
            trial_id,
            looker_id,
            block_id,
            condition,
            target,
            face_patch,
            eyes_patch,
            annotated_head_pose: HeadPose::new(orientation),
            eye_center,
            target_position,
        });
    }
    Ok(Dataset { scene, records })
}
