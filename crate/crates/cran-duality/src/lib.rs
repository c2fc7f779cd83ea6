//! Uplink-downlink duality toolkit for compression-based cloud radio access
//! networks.
//!
//! A C-RAN serves `K` single-antenna users through `M` remote radio heads
//! (RRHs) connected to a central processor over finite-capacity fronthaul
//! links; compression over the fronthaul appears as additive Gaussian
//! quantization noise. This crate evaluates such designs in closed form,
//! constructively maps any strictly feasible uplink design to a downlink
//! design with the same per-user rates, per-RRH fronthaul rates, and sum
//! power (and back), and globally minimizes sum power in both directions
//! with a fixed-point algorithm plus the duality transform.
//!
//! ## Quick start
//!
//! ```rust
//! use cran_duality::model::ChannelMatrix;
//! use cran_duality::optimizer::{solve_downlink_min_power, RateTargets, SolverOptions};
//! use num_complex::Complex64;
//!
//! // One RRH, one user, unit channel, 1-bit fronthaul.
//! let ch = ChannelMatrix::from_rows(&[vec![Complex64::new(1.0, 0.0)]]).unwrap();
//! let targets = RateTargets::new(vec![(4.0f64 / 3.0).log2()]).unwrap();
//! let result = solve_downlink_min_power(&ch, &targets, &[1.0], 1.0,
//!                                       &SolverOptions::default()).unwrap();
//! let report = result.report.unwrap();
//! assert!((report.sum_power - 1.0).abs() < 1e-9);
//! ```
//!
//! ## Examples
//!
//! The `examples/` directory is the guided tour; each file is runnable on
//! its own:
//!
//! - **`evaluate_design`** - rates, fronthaul usage, power, and feasibility
//!   of a hand-built design
//! - **`duality_transform`** - map designs between directions and watch the
//!   preserved quantities
//! - **`min_power_uplink`** - the fixed-point sum-power minimizer, including
//!   an infeasibility verdict
//! - **`min_power_downlink`** - the downlink solver built on the transform
//! - **`verify_duality`** - batch preservation checks over random instances
//! - **`interference_properties`** - the axioms behind fixed-point
//!   convergence
//! - **`rate_region`** - sampled achievable-rate regions in both directions
//! - **`scenario_roundtrip`** - generate, save, parse, and solve scenario
//!   files
//!
//! ```bash
//! cargo run --example duality_transform
//! cargo run --example min_power_downlink
//! ```
//!
//! ## Modules
//!
//! - [`model`] - domain types and the closed-form rate/power expressions
//! - [`duality`] - SINR coupling systems, spectral-radius feasibility, and
//!   the constructive uplink/downlink transforms
//! - [`optimizer`] - MMSE receivers, the interference map, and the
//!   fixed-point sum-power solvers
//! - [`verify`] - independent oracles: duality validation, axiom checks,
//!   grid-search optimum, region sampling
//! - [`scenario`] / [`report`] / [`cli`] - TOML scenario files, table and
//!   `key=value` record output, and the command-line front end

pub mod cli;
pub mod duality;
mod error;
mod linalg;
pub mod model;
pub mod optimizer;
pub mod report;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::SquareMatrix;
