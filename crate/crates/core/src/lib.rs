pub mod cli_report;
pub mod error;
pub mod gauge_field;
pub mod hidden_symmetry;
pub mod jet;
pub mod manifest_symmetry;
pub mod matrix_lie;
pub mod poly;
pub mod riemann_hilbert;
pub mod twistor_geometry;

pub use error::{Error, Result};
