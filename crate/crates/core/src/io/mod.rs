pub mod config;
pub mod csv;
pub mod manifest;

pub use self::config::{config_echo, parse_config, parse_config_value, set_key, ConfigFile};
pub use self::csv::{events_path, read_trajectory, write_table, write_trajectory};
pub use self::manifest::{RunManifest, EVENTS_FILE, MANIFEST_FILE, TRAJECTORY_FILE};
