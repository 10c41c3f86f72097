//! End-to-end pipelines, residual checks, scans, configuration and the CLI.

mod cli;
mod config;
mod pipeline;
mod sweeps;
mod verify;

pub use cli::cli_run;
pub use config::{CaseTag, RunConfig};
pub use pipeline::{
    pde_residual, quasiperiodicity_check, residual_ladder, solve, solve_case_a, solve_case_b,
    weight_ladder, CaseADiagnostics, CaseBDiagnostics, Diagnostics, Masses, ResidualEntry,
    SolutionReport, QP_RELATIVE_TOL, SCHEMA,
};
pub use sweeps::{
    default_rho_grid, expected_exponents, probe, scaling_scan, ProbeSummary, ScanReport, ScanRow,
    AMPLITUDE_SLOPE_TOL, CORRECTION_SLOPE_TOL,
};
pub use verify::{gradient_checks, random_q1, verify, Check, GradientCheck, VerifyReport};
