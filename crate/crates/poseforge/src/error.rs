//! Pipeline-level error type shared by the orchestration modules.

use std::path::PathBuf;

use poseforge_core::bench::NotEnoughImages;
use poseforge_core::coco::CocoError;
use poseforge_core::prompt::PromptError;
use poseforge_core::scoring::ScoreError;

use crate::backend::BackendError;
use crate::files::FileError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("{}: {source}", path.display())]
    Coco {
        path: PathBuf,
        #[source]
        source: CocoError,
    },
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    NotEnoughImages(#[from] NotEnoughImages),
    #[error(
        "benchmark incomplete: {refused} items from {failed_images} images failed, refusing partial output ({details})"
    )]
    IncompleteBenchmark {
        failed_images: usize,
        refused: usize,
        details: String,
    },
    #[error("{0}")]
    Other(String),
}
