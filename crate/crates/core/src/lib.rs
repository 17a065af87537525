pub mod circulant;
pub mod direct;
pub mod error;
pub mod krylov;
pub mod multigrid;
pub mod operator;
pub mod problems;
pub mod spectral;
pub mod symbol;
pub mod toeplitz;

pub use error::{Error, Result};
pub use operator::{LinearOperator, Preconditioner};
pub use symbol::{FourierCoefficients, Symbol};
pub use toeplitz::{MatvecKernel, ToeplitzOperator};
