//! Dynamics of the composed involutions `phi = sigma_x . sigma_y` on Wehler K3
//! surfaces `S = V(L, Q)` in `P^2 x P^2`.
//!
//! * [`ff`]: finite fields `F_{p^m}` and the rationals behind one [`ff::Field`] trait.
//! * [`surface`]: coefficient vectors, evaluation, the `G`/`H` fiber invariants.
//! * [`fiber`]: fibers of the projections, the involutions and `phi`.
//! * [`orbit`]: point counts `N_m`, enumeration and cycle tables over `F_p`.
//! * [`liftsearch`]: rational periodic points from cycle data at many primes.
//! * [`zeta`]: zeta function and Picard bound from `N_1, .., N_11`.

pub mod error;
pub mod ff;
pub mod fiber;
pub mod liftsearch;
pub mod orbit;
pub mod surface;
pub mod zeta;

#[cfg(test)]
pub(crate) mod testdata;

pub use error::{Error, Result};
pub use surface::{Side, SurfaceCoefficients, SurfacePoint};
