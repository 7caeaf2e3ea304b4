//! Spectral tooling for first-order operators
//!
//! ```text
//! L = ∂t + c(t) ∂x + q(t)   on   T¹ × ℝ
//! ```
//!
//! The crate decides Schwartz global hypoellipticity and global solvability
//! from the means of the coefficients and the sign structure of `Im c`,
//! solves `Lu = f` on a truncated product grid through mixed partial Fourier
//! transforms and closed-form periodic ODE solutions, and builds the
//! counterexample witnesses that certify negative verdicts.
//!
//! Module map:
//!
//! * [`trigfun`]: smooth periodic functions stored as truncated Fourier series.
//! * [`mixedfft`]: cylinder grids, partial/mixed transforms, decay diagnostics.
//! * [`torus_ode`]: the periodic scalar ODE `u' + θu = g`.
//! * [`classify`]: verdicts with machine-checkable certificates.
//! * [`conjugate`]: the automorphisms `Ψ_a`, `Ψ_q` reducing `L` to constant `a`, `q`.
//! * [`solve`]: the per-frequency solver and compatibility projection.
//! * [`witness`]: kernel elements, sign-change witnesses and the Laplace bound.
//!
//! Per-frequency work runs on rayon when the `parallel` feature is enabled
//! (default); results are bit-identical to the sequential path.

pub mod classify;
pub mod conjugate;
mod error;
pub mod exec;
pub mod io;
pub mod mixedfft;
pub mod solve;
pub mod torus_ode;
pub mod trigfun;
pub mod witness;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;

pub use classify::{OperatorSpec, SolvabilityVerdict, Verdict};
pub use mixedfft::{CylinderGrid, DecayReport, Field, HalfSpectrum, MixedSpectrum};
pub use trigfun::TorusFunction;

/// Default integer-membership tolerance used throughout the classifier.
pub const INT_TOL: f64 = 1e-10;
