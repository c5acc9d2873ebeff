//! Gate dynamics of the register coupled to the line.

pub mod exact;
pub mod oracle;
pub mod report;
pub mod timing;

pub use exact::{evolve_exact, DisplacementRecord};
pub use oracle::{evolve_oracle, OracleOptions, OracleRun};
pub use report::{gate_report, DiagonalPhaseGate, FidelityReference, GateReport, ReportOptions};
pub use timing::{
    commensurability_time, nonlinear_dispersion_scan, timing_error_scan, DispersionRegime, FrequencyRatio,
    NonlinearOptions, NonlinearPoint, SaturatedWindow, TimingScan, saturated_window,
};
