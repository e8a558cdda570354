//! Experiment drivers and their reports.
//!
//! Solves inside one sweep run one after another; each solve is parallel
//! internally. Reports are pure functions of the recorded series, so
//! re-running a report on series read back from CSV reproduces it exactly.

pub mod asymptotics;
pub mod continuity;
pub mod fit;
pub mod gronwall;
pub mod io;
pub mod nonuniform;
pub mod pairs;
pub mod residuals;

pub use asymptotics::{exp_asymptotics, AsymptoticsReport, AsymptoticsRow};
pub use continuity::{exp_continuity, ContinuityConfig, ContinuityLevel, ContinuityReport, ContinuitySample};
pub use fit::RateFit;
pub use gronwall::{difference_diagnostics, fit_c, DifferenceDiagnostics, LOCKED_C};
pub use nonuniform::{exp_nonuniform, initial_distance, nonuniform_report, InitialDistance, NonUniformEntry, NonUniformReport};
pub use pairs::{run_pair, split_by_n, PairRun, PairSample};
pub use residuals::{
    duhamel_report, exp_residuals, residuals_report, run_approximate, ApproxRun, DriftSample, DuhamelReport,
    ResidualEvaluator, ResidualSample, ResidualsReport,
};

/// Times recorded on the step grid agree with requested times to this relative tolerance.
const TIME_TOL: f64 = 1e-9;

pub(crate) fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIME_TOL * a.abs().max(b.abs()).max(1.0)
}

pub(crate) fn on_step_grid(t: f64, dt: f64) -> bool {
    let k = (t / dt).round();
    same_time(k * dt, t)
}
