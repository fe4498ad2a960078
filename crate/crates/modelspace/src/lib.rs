pub mod blaschke;
pub mod error;
pub mod linalg;
pub mod mixed;
pub mod model;
pub mod submodule;
pub mod tensor;
pub mod subspace;
pub mod tol;
