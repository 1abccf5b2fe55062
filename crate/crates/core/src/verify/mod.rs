//! Drift, monotonicity, convergence and level-set checks.

mod convergence;
mod drift;
mod levelset;
mod monotone;
pub mod suites;

pub use convergence::{convergence_study, least_squares_slope, ConvergenceRow, ConvergenceTable};
pub use drift::{drift, DriftReport};
pub use levelset::{level_set, window_scale, LevelSetOptions, LevelSetPolyline};
pub use monotone::{check_monotone, check_sign, Direction, MonotoneReport, Sign};
