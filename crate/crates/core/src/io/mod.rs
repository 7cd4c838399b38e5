//! Parsers and writers for the command-line front end: model files, run
//! configurations, flag values and CSV output.

mod config;
mod csv;
mod model_file;
mod parse;

pub use config::{parse_run_config, RunConfig};
pub use csv::{format_real, write_series_csv, write_trajectory_csv};
pub use model_file::{parse_model_file, BoxBounds, ModelFile};
pub use parse::{parse_deltas, parse_params, parse_real_list, parse_window};
