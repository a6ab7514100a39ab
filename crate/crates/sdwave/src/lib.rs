//! Pseudo-spectral simulation and verification toolkit for the Cauchy problem
//!
//! ```text
//! u_tt - Δu + μ(-Δ)^σ u_t = f(u),   u(0) = u0,  u_t(0) = u1,
//! ```
//!
//! with fractional damping order `σ ∈ (0,1]` and damping strength `μ > 0`.
//!
//! The crate provides:
//!
//! - [`spectral`]: periodic-box grids, discrete Fourier transforms, fractional
//!   Laplacian multipliers, and grid-quadrature norms;
//! - [`kernels`]: characteristic roots `λ±(|ξ|)` and numerically stable
//!   evaluation of the fundamental solution kernels `K0`, `K1` and their time
//!   derivatives in every root regime;
//! - [`linear`]: exact one-shot linear propagation (diagonal in frequency),
//!   frequency splitting, and decay series on the grid;
//! - [`radial`]: a whole-space radial frequency-quadrature oracle for the
//!   decay integrals, free of the torus zero-mode artifact;
//! - [`semilinear`]: exponential time differencing built on the exact kernels,
//!   Picard iteration of the Duhamel fixed point, and blow-up detection;
//! - [`exponents`]: exact-rational calculators for critical exponents,
//!   admissible ranges, predicted decay-rate tables and Gagliardo-Nirenberg
//!   exponents;
//! - [`analysis`]: log-log rate regression, log-growth detection, weighted
//!   sup-norms and theory-vs-measurement verdicts;
//! - [`config`], [`presets`], [`runner`]: the experiment runner behind the
//!   `sdwave` binary.
//!
//! Heavy inner loops (per-mode propagation, pointwise nonlinearities, radial
//! quadrature batches) run data-parallel on rayon when the default `parallel`
//! feature is enabled; disabling it yields a dependency-free sequential build
//! with identical results.

pub mod analysis;
pub mod config;
pub mod exponents;
mod fft;
pub mod kernels;
pub mod linear;
pub mod par;
pub mod presets;
pub mod quad;
pub mod radial;
pub mod runner;
pub mod semilinear;
pub mod spectral;

pub use kernels::ModelSpec;
pub use spectral::{GridSpec, RealField, SpectralField};
