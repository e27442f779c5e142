//! Exact finite-N formulas, bulk scaling limits, and supporting special
//! functions for conditional left/right-eigenvector overlaps in the complex
//! Ginibre ensemble.
//!
//! Layout:
//! - [`scaled`]: overflow-safe (mantissa, log-scale) complex arithmetic;
//! - [`specfun`]: exponential polynomials e_n, the combination f_p, the
//!   three-argument kernel building block 𝔉_n, and the regularized
//!   incomplete-gamma ratio;
//! - [`biorthogonal`]: the moment matrix of the deformed weight, its LDU
//!   factors (closed form and numeric), the biorthogonal polynomials and
//!   norms, and partition functions;
//! - [`kernels`]: finite-N reduced kernels (sum and closed representations),
//!   K11, the conditional overlap determinants D11/D12, the eigenvalue
//!   kernel with its k-point densities, and a brute-force integral oracle;
//! - [`bulk`]: every N→∞ bulk object plus finite-N convergence probes;
//! - [`quad`]: Gauss–Legendre/trapezoid polar quadrature over disks.

pub mod biorthogonal;
pub mod bulk;
pub(crate) mod ddc;
pub mod error;
pub mod kernels;
pub mod quad;
pub mod scaled;
pub mod specfun;

pub use biorthogonal::ConditionPoint;
pub use error::{CoreError, Result};
pub use kernels::SplitPoint;
pub use scaled::ScaledComplex;

pub use num_complex::Complex64;
