pub mod degeneration;
pub mod error;
pub mod exact;
pub mod freefield;
pub mod hopf;
pub mod numeric;
pub mod qpoch;
pub mod relations;
pub mod report;
pub mod sampling;
pub mod series;
pub mod suite;
pub mod theta;

pub use error::{Error, Result};
