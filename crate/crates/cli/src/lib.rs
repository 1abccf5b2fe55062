//! Library side of the `nonlocal` command: scenario files, trajectory
//! tables, level-set export and scenario verification.

pub mod config;
pub mod levelset;
pub mod scenario;
pub mod simulate;
pub mod verify;

pub use config::{ConfigError, Settings};
pub use scenario::{Family, Scenario, System};
pub use simulate::{simulate, write_csv, Columns, Table};
