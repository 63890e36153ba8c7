//! Linear-systems core: polynomials, rational transfer functions with a
//! symbolic transport delay, frequency sweeps, stability margins and
//! second-order model fitting.

mod fit;
mod frequency;
mod margins;
mod polynomial;
mod transfer;

pub use fit::{fit_second_order, second_order, SecondOrderFit, PHASE_WEIGHT};
pub use frequency::{
    bode_sweep, log_grid, nearest_branch, response_at, wrap_deg, write_bode_csv,
    FrequencyResponse, FrequencyResponsePoint, BODE_CSV_HEADER,
};
pub use margins::{
    stability_margins, StabilityReport, MARGIN_BAND, MARGIN_SCAN_POINTS_PER_DECADE,
};
pub use polynomial::Polynomial;
pub use transfer::{compose, Composition, DelayedTransferFunction};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LintfError {
    #[error("denominator vanishes on the imaginary axis at ω = {omega} rad/s")]
    PoleOnAxis { omega: f64 },
    #[error("open-loop gain never crosses unity in the scanned band")]
    NoCrossover,
    #[error("parallel and feedback composition require delay-free operands")]
    DelayNotClosed,
    #[error("second-order fit stopped improving for {iterations} consecutive iterations")]
    FitDiverged { iterations: usize },
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("{0}")]
    InvalidArgument(String),
}
