//! FFT-multiplier realizations of the normal operator, the filtered
//! back-projection inversion and the microlocal cutoff `Q`.

pub mod fft;
pub mod multipliers;
pub mod ops;

pub use multipliers::{MultiplierSpec, TOL_CONE_BAND};
pub use ops::{
    apply_isotropic_multiplier, cutoff_q, fbp_reconstruct, normal_via_composition,
    normal_via_multiplier, spacelike_projection, sphere_integral_lemma_check, stable_inversion,
    LemmaCheck, StableInversion,
};
