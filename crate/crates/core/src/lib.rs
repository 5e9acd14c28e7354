pub mod blackwell;
pub mod calibration;
pub mod convex_geometry;
pub mod error;
pub mod general_games;
pub mod harness;
pub mod linalg;
pub mod lp;
pub mod partial_monitoring;
pub mod regret;
pub mod robust;

pub use error::{Error, Result};
