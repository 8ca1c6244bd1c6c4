pub mod analysis;
pub mod barrier;
pub mod dynsys;
pub mod error;
pub mod geometry;
pub mod integrator;
pub mod maps;
pub mod params;
pub mod profile;

pub use error::{Error, Result};
