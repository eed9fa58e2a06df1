//! Numerical kernels: sparse storage, Hermitian eigensolver, exponential
//! propagation, and the embedded Runge-Kutta integrator.

pub mod csr;
pub mod dense;
pub mod eigen;
pub mod expm;
pub mod rk;

pub use csr::Csr;
pub use eigen::{eigh, fix_column_phases, min_eigenvalue, Eigh};
pub use expm::{expi_action, expi_hermitian_dense, ExpmStats};
pub use rk::{dopri5, RkOptions, RkStats};
