//! Spectral laboratory for the damped bipolar Euler–Poisson system.
//!
//! The two-species system is rewritten in sum/difference variables
//! `n1 = ρ1 + ρ2 − 2`, `n2 = ρ1 − ρ2`, `w1 = u1 + u2`, `w2 = u1 − u2`, which
//! splits the linear part into a damped Euler block `(n1, w1)` and a damped
//! Euler–Poisson block `(n2, w2)`. The crate provides
//!
//! * [`spectral`]: periodic grids, FFTs, derivatives, Poisson solves, norms;
//! * [`state`]: primitive and sum/difference unknowns and the γ-law pressure;
//! * [`hodge`]: Fourier-space compressible/solenoidal splitting;
//! * [`propagators`]: closed-form 2×2 Green matrices of both linear blocks;
//! * [`decay`]: whole-space linear decay by radial quadrature and exponent fits;
//! * [`solver`]: the nonlinear pseudospectral Strang-split integrator and the
//!   weighted energy diagnostic;
//! * [`oracle`]: brute-force references used by the test-suites.

pub mod decay;
pub mod error;
pub mod hodge;
pub mod oracle;
pub mod propagators;
pub mod solver;
pub mod spectral;
pub mod state;

pub use error::{Error, Result};
