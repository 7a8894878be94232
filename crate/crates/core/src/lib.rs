//! Global solvers and optimality certificates for homogeneous quadratic
//! programs with one or two quadratic-form constraints.

pub mod error;
pub mod etls;
pub mod linalg;
pub mod manifold;
pub mod oracle;
pub mod par;
pub mod pencil;
pub mod qq1;
pub mod qq2;
pub mod trs;

pub use error::{Error, Result};
pub use linalg::{Matrix, SymMat, Vector};
