//! Bulk spectral statistics of Wigner Hermitian random matrices.
//!
//! The crate samples Wigner ensembles with general mean-zero atom
//! distributions, diagonalizes them with a self-contained Hermitian
//! eigensolver, measures bulk statistics (windowed nearest-neighbor gap
//! distribution, averaged k-point correlations, local semicircle law,
//! eigenvalue localization), and compares them against their universal
//! limits: sine-kernel correlation determinants and the gap law obtained
//! from the Fredholm determinant `det(1 - K_alpha)`.
//!
//! Modules:
//! - [`ensemble`]: atom distributions, matrix sampling, truncation,
//!   Ornstein-Uhlenbeck interpolation toward GUE.
//! - [`eigensolver`]: Householder tridiagonalization + implicit-shift QL.
//! - [`spectral`]: semicircle density/CDF/quantiles, Stieltjes transforms,
//!   local-law and localization checks.
//! - [`gapstats`]: the empirical gap distribution and correlation statistic.
//! - [`predict`]: sine-kernel determinants and the limiting gap law.
//! - [`harness`]: configs, deterministic parallel Monte Carlo, comparison
//!   reports, file outputs.
//! - [`quad`], [`rng`]: quadrature and counter-based random streams.

pub mod ensemble;
pub mod eigensolver;
pub mod gapstats;
pub mod harness;
pub mod predict;
pub mod quad;
pub mod rng;
pub mod spectral;
