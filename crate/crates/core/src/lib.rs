//! Dynamic Chung-Lu random graphs: stationary simulation of edge-count
//! snapshots and method-of-moments inference of the generating parameters.

pub mod degree_model;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod graph_sim;
pub mod lifetimes;
pub mod moments;
pub mod numeric;
pub mod quadrature;
pub mod series_io;

pub use error::{Error, Result};
