//! Bifurcation analysis of a Holling type IV predator-prey model with an
//! Allee effect in the prey.

pub mod ddouble;
pub mod error;
pub mod hopf;
pub mod local_bifurcations;
pub mod model;
pub mod series;
pub mod sim;

pub use error::{Error, Result};
pub use model::ModelParams;
pub use series::TruncatedSeries;
