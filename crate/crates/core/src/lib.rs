//! Numerical toolkit for the weighted light ray transform.
//!
//! The transform integrates a function on (1+n)-dimensional spacetime over
//! lightlike lines `s ↦ (s, z + s·θ)` (flat case) or over null geodesics of a
//! product Lorentzian metric `-dt² + g'` (curved case).  The crate provides
//!
//! * the forward transform, its exact discrete adjoint and the continuum
//!   back-projection formula ([`minkowski`]),
//! * FFT-multiplier realizations of the normal operator `L'L`, the filtered
//!   back-projection inverse on the spacelike cone, and the microlocal cutoff
//!   `Q` that stabilizes inversion near the characteristic cone ([`spectral`]),
//! * null geodesic and Jacobi field integration, conjugate point detection and
//!   canonical relation diagnostics for product metrics, FLRW cosmologies and
//!   the cylinder `R × S²` ([`lorentz`]),
//! * the localized transform on precomputed geodesic charts together with the
//!   exact antipodal cancellation pair on `R × S²` ([`local_ray`]),
//! * a small binary file format for fields and sinograms ([`io`]).
//!
//! Conventions used throughout (see individual modules for details):
//!
//! * Fourier transform `f̂(τ,ξ) = ∫ e^{-i(tτ + x·ξ)} f(t,x) dt dx`, so the wave
//!   operator `□ = ∂t² - Δ` has symbol `|ξ|² - τ²` and the spacelike cone is
//!   `{|τ| < |ξ|}`.
//! * Lightlike lines are parameterized with unit time speed, `dt/ds = 1`.
//! * Fields are stored flat with the time index fastest varying.

pub mod error;
pub mod geometry;
pub mod io;
pub mod local_ray;
pub mod lorentz;
pub mod minkowski;
pub mod par;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::chart::{RayChart, Sinogram};
pub use geometry::covector::{CausalClass, Covector};
pub use geometry::grid::{ScalarField, SpacetimeGrid};
pub use geometry::phantom::Phantom;
pub use geometry::weight::Weight;
