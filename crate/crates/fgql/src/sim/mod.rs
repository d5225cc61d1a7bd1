//! Scenario generation and Monte Carlo verification studies.

mod error_dist;
mod scenario;
mod study;

pub use error_dist::{ErrorDistribution, ErrorFamily};
pub use scenario::{
    asymptotic_covariance, audit_assumptions, AssumptionAudit, AuditCheck, AuditThresholds,
    DesignCovariance, GroupLayout, ResolvedScenario, SimulationScenario,
};
pub use study::{
    run_normality_study, run_rate_study, run_selection_study, NormalityStats,
    PerSampleSizeReport, StudyDirection, StudyKind, StudyReport, StudySweep,
};
