//! Exact time-dependent partial waves of the 3D isotropic harmonic oscillator
//! (units `hbar = m = omega = 1`), the decomposition of Gaussian coherent
//! packets into them, and the exact spin-orbit propagator
//! `U_ls(t) = f(t) + g(t) (l.sigma)` acting on spin-1/2 packets.
//!
//! Module map:
//!
//! * [`specfun`] — modified spherical Bessel functions of the first kind with
//!   complex argument, Legendre polynomials, spherical and solid harmonics.
//! * [`oscillator`] — classical phase-space kinematics of a coherent packet,
//!   the Gaussian packet itself, and the time-dependent partial waves.
//! * [`decomposition`] — expansion weights of a Gaussian packet over partial
//!   waves, truncation selection, reconstruction from the expansion.
//! * [`spinorbit`] — the exact spin-orbit evolution operator on the expansion,
//!   frozen-oscillator mode, spin projections along arbitrary axes.
//! * [`observables`] — grid sampling of densities and spin fields, quadrature
//!   norms and expectation values, radial profiles and vortex-ring metrics.
//! * [`oracle`] — independent brute-force validators (block matrix
//!   exponentials, finite-difference Schrodinger residuals, an independent
//!   quadrature) used by the test and acceptance suites.
//! * [`cli`] — configuration parsing, figure-reproduction pipelines and
//!   ad-hoc evaluation commands behind the `simulate` binary.

pub mod cli;
pub mod decomposition;
mod error;
pub mod observables;
pub mod oracle;
pub mod oscillator;
pub mod specfun;
pub mod spinorbit;
pub(crate) mod vec3;

pub use error::{Error, Result};
