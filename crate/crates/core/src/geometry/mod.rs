//! Shared domain types: spacetime grids and sampled fields, ray charts with
//! sphere quadrature, covectors with causal classification, ray weights and
//! analytic phantoms.

pub mod chart;
pub mod covector;
pub mod grid;
pub mod phantom;
pub mod sphere;
pub mod weight;

pub use chart::{RayChart, Sinogram};
pub use covector::{CausalClass, Covector};
pub use grid::{ScalarField, SpacetimeGrid};
pub use phantom::{sample_phantom, Phantom};
pub use weight::Weight;
