pub mod run;
pub mod scenario;
pub mod verify;

pub use run::{preset, run};
pub use scenario::Scenario;
