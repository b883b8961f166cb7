//! File formats, reports and the command-line front end for
//! [`ucp_ensemble_core`].

pub mod cli;
pub mod error;
pub mod io;
pub mod model_file;
pub mod profile;
pub mod report;

pub use error::{AppError, AppResult};
pub use ucp_ensemble_core as engine;
