//! Elastomer material database, characterisation fits and material ranking.

mod fitting;
mod materials;

pub use fitting::{
    estimate_damping_from_chirp, fit_linear_stiffness, fit_stress_relaxation, read_xy_csv,
    LinearFit, RelaxationFit, TESTBED_DAMPING,
};
pub use materials::{
    builtin_materials, rank_materials, read_materials_csv, write_materials_csv, Criterion,
    MaterialRecord, RankOptions, RankWeights, Ranking,
};

use crate::lintf::LintfError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ElastomatError {
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("stress relaxation fit did not converge")]
    FitDiverged,
    #[error("every material was excluded from the ranking")]
    AllExcluded,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Lintf(#[from] LintfError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
