//! Traveling waves, linearized eigenpairs and entire solutions of the
//! diffusive Lotka-Volterra competition system
//!
//! ```text
//! u_t = u_xx + u(1 - u - a v)
//! v_t = d v_xx + r v(1 - v - b u)
//! ```

pub mod acceptance;
pub mod entire_solutions;
pub mod error;
pub mod front_metrics;
pub mod grid;
pub mod io;
pub mod linearized_eigen;
pub mod rd_integrator;
pub mod runner;
pub mod spectral_classifier;
pub mod speed_atlas;
pub mod stats;
pub mod wave_profiles;

pub use error::{LabError, Result};
pub use grid::GridSpec;
pub use speed_atlas::{ModelParams, Regime};
