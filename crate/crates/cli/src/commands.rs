use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use gazekit::datasets::{read_manifest, write_manifest, Condition, Dataset};
use gazekit::descriptor::HogParams;
use gazekit::evalkit::{
    predict_dataset, predictions_to_text, responses_from_text, score, truths_from_dataset,
    Response, Viewpoint,
};
use gazekit::geometry::SceneLayout;
use gazekit::models::{train_on_dataset, GazeModel, ModelConfig, ModelVariant, TrainedModel};
use gazekit::synthlab::{blocks_to_dataset, generate_block_range, LookerProfile};

use crate::args::{parse_blocks, required, EvalArgs, PredictArgs, SynthArgs, TrainArgs};
use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.tsv";

fn condition(s: Option<&str>) -> Result<Condition> {
    Ok(s.unwrap_or("visible").parse()?)
}

fn load(path: &Path, select: Option<&str>) -> Result<Dataset> {
    let data = read_manifest(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(match select {
        Some(list) => data.blocks(&parse_blocks(list)?),
        None => data,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let out = required(a.out, "out")?;
    let seed = a.seed.unwrap_or(0);
    let mut profile = LookerProfile::new(
        a.looker_id.unwrap_or_else(|| "A".into()),
        a.kappa.unwrap_or(0.6),
        seed,
    );
    profile.pose_jitter_deg = a.pose_jitter.unwrap_or(0.0);
    profile.pixel_noise = a.pixel_noise.unwrap_or(0.0);
    profile.annotation_noise_deg = a.annotation_noise.unwrap_or(0.0);
    profile.features.feature_offset_deg = (a.offset_az.unwrap_or(0.0), a.offset_el.unwrap_or(0.0));
    if let Some(g) = a.iris_gain {
        profile.features.iris_gain = g;
    }
    profile.validate()?;
    let condition = condition(a.condition.as_deref())?;
    let n_blocks = a.blocks.unwrap_or(3);
    let first = a.first_block.unwrap_or(0);

    let scene = SceneLayout::default();
    let blocks = generate_block_range(&profile, &scene, first, n_blocks, condition, seed)?;
    let data = blocks_to_dataset(&scene, &blocks);
    let manifest = out.join(MANIFEST_NAME);
    write_manifest(&data, &manifest).with_context(|| format!("writing {}", manifest.display()))?;
    println!(
        "synthesized looker {} (kappa {}, {}): lookers 1, blocks {}, trials {} -> {}",
        profile.looker_id,
        profile.kappa,
        condition,
        n_blocks,
        data.len(),
        manifest.display()
    );
    Ok(())
}

pub fn train(a: TrainArgs) -> Result<()> {
    let manifest = required(a.manifest, "manifest")?;
    let out = required(a.out, "out")?;
    let variant: ModelVariant = a.model.as_deref().unwrap_or("face-eyes").parse()?;
    let defaults = HogParams::default();
    let config = ModelConfig {
        variant,
        k: a.k.unwrap_or(5),
        epsilon: a.epsilon.unwrap_or(1e-6),
        hog: HogParams {
            cell_size: a.cell_size.unwrap_or(defaults.cell_size),
            n_bins: a.bins.unwrap_or(defaults.n_bins),
            block_size: a.block_size.unwrap_or(defaults.block_size),
            clip_threshold: a.clip.unwrap_or(defaults.clip_threshold),
        },
        cross_looker: a.cross_looker.unwrap_or(false),
        ..ModelConfig::default()
    };
    config.validate()?;
    let data = load(&manifest, a.select_blocks.as_deref())?;
    if data.is_empty() {
        return Err(gazekit::Error::Empty("training manifest has no trials").into());
    }
    let model = train_on_dataset(&data, &config).context("training")?;
    model.save(&out)?;
    println!(
        "trained {} ({}) on {} trials from looker(s) {} -> {}",
        variant.label(),
        variant,
        data.len(),
        model.lookers.join(","),
        out.display()
    );
    if let GazeModel::KinectLinear { map } = &model.model {
        for (name, w, b) in [
            ("azimuth", map.weights[0], map.intercept[0]),
            ("elevation", map.weights[1], map.intercept[1]),
        ] {
            println!(
                "  {name} = {} * yaw + {} * pitch + {} * roll + {}",
                w[0], w[1], w[2], b
            );
        }
    }
    Ok(())
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let manifest = required(a.manifest, "manifest")?;
    let model_file = required(a.model_file, "model-file")?;
    let out = required(a.out, "out")?;
    let condition = condition(a.condition.as_deref())?;
    let model = TrainedModel::load(&model_file)?;
    let data = load(&manifest, a.select_blocks.as_deref())?;
    let predictions = predict_dataset(&model, &data, condition)?;
    write(&out, &predictions_to_text(&predictions))?;
    let invalid = predictions
        .iter()
        .filter(|p| !p.response.is_valid())
        .count();
    println!(
        "predicted {} trials ({} invalid) with {} -> {}",
        predictions.len(),
        invalid,
        model.variant().label(),
        out.display()
    );
    Ok(())
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let manifest = required(a.manifest, "manifest")?;
    let out = required(a.out, "out")?;
    let condition = condition(a.condition.as_deref())?;
    let viewpoint = Viewpoint::parse(a.viewpoint.as_deref().unwrap_or("camera"))?;
    let data = load(&manifest, a.select_blocks.as_deref())?;
    if data.is_empty() {
        return Err(gazekit::Error::Empty("test manifest has no trials").into());
    }
    let model = a
        .model_file
        .as_deref()
        .map(TrainedModel::load)
        .transpose()?;

    if let Some(m) = &model {
        let unseen: Vec<String> = data
            .lookers()
            .into_iter()
            .filter(|l| !m.lookers.contains(l))
            .collect();
        if !unseen.is_empty() {
            let msg = format!(
                "test looker(s) {} not in the training set ({})",
                unseen.join(","),
                m.lookers.join(",")
            );
            if a.strict_lookers.unwrap_or(false) {
                return Err(CliError::new("looker-mismatch", msg).into());
            }
            eprintln!("warning[looker-mismatch]: {msg}");
        }
    }

    let responses: Vec<Response> = match (&a.predictions, &model) {
        (Some(path), _) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            responses_from_text(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, Some(m)) => predict_dataset(m, &data, condition)?
            .into_iter()
            .map(|p| p.response)
            .collect(),
        (None, None) => {
            return Err(CliError::new("usage", "--model-file or --predictions is required").into())
        }
    };
    let source = model
        .as_ref()
        .map_or("predictions", |m| m.variant().label());
    let truths = truths_from_dataset(&data)?;
    let report = score(
        &responses,
        &truths,
        &data.scene,
        source,
        condition,
        viewpoint,
    )?;

    let text = report.to_text();
    write(&out.join("report.txt"), &text)?;
    write(&out.join("report.json"), &report.to_json())?;
    print!("{text}");
    Ok(())
}
