//! Numerical construction and verification of the one-parameter family of
//! surfaces with parallel mean curvature vector and vanishing Hopf phase
//! constant in a complex space form of holomorphic sectional curvature
//! 4 rho = -12 b^2.
//!
//! The crate has four layers:
//!
//! * [`formulas`] — closed-form pointwise evaluators for the
//!   second-fundamental-form data, curvatures and Hopf coefficients;
//! * [`profile`] / [`grid`] — fixed-step integration of the adapted
//!   Kaehler-angle coordinate system and sampling onto a (u, v) grid;
//! * [`verify`] — a named residual suite that checks every structure
//!   equation and conserved quantity by finite differences and exact
//!   evaluation, with convergence-order estimates and a negative control;
//! * [`report`] / [`config`] — deterministic CSV/JSON output and the
//!   flat-file run configuration used by the CLI.

pub mod config;
pub mod error;
pub mod formulas;
pub mod grid;
pub mod params;
pub mod profile;
pub mod report;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use formulas::{HopfCoefficients, SecondFundamentalPoint};
pub use grid::{build_grid, centered_v_nodes, SurfaceGrid};
pub use params::{
    admissible_intervals, alpha_from_sin_sq, AlphaSide, Branch, ImSign, ModelParams,
    SinSqInterval, DEFAULT_DELTA,
};
pub use profile::{integrate_profile, integrate_profile_with, AlphaProfile, IntegrateOptions, StopReason};
pub use sweep::{run_sweep, sweep_to_csv, SweepRow};
pub use verify::{
    convergence_study, negative_control, run_residual_suite, ResidualEntry, ResidualReport,
    RunSpec, VerifySettings, RESIDUAL_NAMES,
};
