//! Configuration files, subcommands and table output for the `shgsim` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_config_str, write_config, ConfigError, RunConfig};
pub use run::{run, Command, Grid, Invocation, RunError};

/// Configuration template for the 1550 nm → 775 nm PPKTP doubler.
pub const PAPER_TEMPLATE: &str = include_str!("../templates/paper.toml");
