//! Haar/Gaussian couplings on compact matrix groups, representation bookkeeping
//! (partitions, Weyl dimensions, Littlewood–Richardson, Laplacian eigenvalues),
//! and Monte-Carlo checks of level-d, mixing and contiguity statements.

pub mod cli;
pub mod empirical;
pub mod error;
pub mod experiments;
pub mod group;
pub mod laplacian;
pub mod matrix;
pub mod partitions;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod weyl;

pub use error::{Error, Result};
pub use group::{Family, GroupSpec};
pub use matrix::{DenseMatrix, Matrix, UpperTriangular};
pub use partitions::Partition;
pub use rng::RngStream;
pub use scalar::{Field, Quaternion, Scalar};
