//! File formats, run configuration and command-line plumbing around
//! [`noonbloch_core`].

pub mod config;
pub mod presets;
pub mod run;
pub mod table;
pub mod verify;

pub use config::{parse_config, ConfigError, RunConfig};
pub use run::{run, RunError, RunOutput};
pub use verify::{verify, VerificationReport};
