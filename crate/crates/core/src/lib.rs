//! Numerical laboratory for arithmetic random waves on the flat torus.
//!
//! The crate samples Gaussian Laplace eigenfunctions with frequencies on the
//! lattice circle (d = 2) or sphere (d = 3), measures the geometry of their
//! level sets, computes chaos projections exactly from the sampled Fourier
//! coefficients, and compares Monte Carlo estimates against closed-form
//! asymptotic predictions.
//!
//! Module map:
//! - [`lattice`]: frequency sets and their spectral summaries
//! - [`curves`]: toral reference curves, quadrature, functional audits
//! - [`surfaces`]: toral reference surfaces and moment audits
//! - [`field`]: coefficient draws, grid synthesis, curve/surface restriction
//! - [`levelset`]: level-curve length, nodal crossings, nodal area
//! - [`chaos`]: chaos projections and spectral quantities per draw
//! - [`theory`]: closed-form variances, correlations, resonant levels
//! - [`mc`]: ensemble orchestration, estimation, theory comparison

pub mod chaos;
pub mod curves;
pub mod field;
pub mod lattice;
pub mod levelset;
pub mod mc;
pub mod surfaces;
pub mod theory;
