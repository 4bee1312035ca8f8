//! Archetype pursuit: find the extreme points of a point cloud by optimizing random
//! linear functionals over it, then recover mixing weights, select archetypes under
//! noise and diagnose how well conditioned the problem is.

pub mod distributed;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod geometry;
pub mod glasso;
pub mod io;
pub mod matrix;
pub mod nnls;
pub mod pursuit;
pub mod rng;

pub use error::{Error, Result};
pub use matrix::DataMatrix;
