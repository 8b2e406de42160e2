//! Writing cross-validation artifacts to disk.

use std::path::{Path, PathBuf};

use super::{CrossvalOutput, Manifest};
use crate::error::{Error, Result};
use crate::summarizer::Mode;

pub fn model_file_name(fold: usize, mode: Mode) -> String {
    format!("fold{fold}-{mode}.json")
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Write `report.json`, `report.txt`, `models/classifier.json` and one model
/// per fold and mode under `dir`, recording each in `manifest`.
pub fn write_crossval(
    dir: &Path,
    output: &CrossvalOutput,
    manifest: &mut Manifest,
) -> Result<Vec<PathBuf>> {
    let models_dir = dir.join("models");
    std::fs::create_dir_all(&models_dir).map_err(|e| Error::io(&models_dir, e))?;
    let mut written = Vec::new();
    let mut emit = |role: &str, path: PathBuf, text: String| -> Result<()> {
        write(&path, &text)?;
        manifest.add_output_file(role, &path)?;
        written.push(path);
        Ok(())
    };
    emit("report", dir.join("report.json"), output.report.to_json()?)?;
    emit(
        "report-table",
        dir.join("report.txt"),
        output.report.render_table(),
    )?;
    emit(
        "classifier",
        models_dir.join("classifier.json"),
        output.base.to_json()?,
    )?;
    for (fold, mode, model) in &output.models {
        emit(
            "model",
            models_dir.join(model_file_name(*fold, *mode)),
            model.to_json()?,
        )?;
    }
    Ok(written)
}
