//! Fourier multiplier symbols for the normal operator, the filtered
//! back-projection inverse and the microlocal cutoff.
//!
//! With the transform convention `f̂(τ,ξ) = ∫ e^{-i(tτ+x·ξ)} f dt dx` the wave
//! operator `□ = ∂t² - Δ` has symbol `|ξ|² - τ²`, so `h(□)` is the indicator
//! of the closed spacelike cone `{|τ| ≤ |ξ|}`.  The opposite FFT sign
//! convention would flip the cone; tests pin this one.
//!
//! All symbols are written in terms of `ρ = |ξ|` and the ratio `r = |τ|/|ξ|`:
//!
//! * normal operator: `Cₙ (1-r²)₊^{(n-3)/2} / ρ`, `Cₙ = 2π|S^{n-2}|`,
//! * FBP filter: `Cₙ⁻¹ ρ (1-r²)₊^{(3-n)/2}`,
//! * stable inversion: the FBP filter restricted to the pass band of `φ`.
//!
//! For n = 2 the normal symbol has an inverse square root singularity at the
//! cone; it is clamped on a relative band of width [`TOL_CONE_BAND`] around
//! `|τ| = |ξ|`, and accuracy claims exclude that band.  Zero frequency is
//! mapped to 0 for the homogeneous symbols of negative degree and passed
//! through unchanged by the cutoff.

use crate::error::{Error, Result};
use crate::geometry::sphere::sphere_area;

/// Default relative width of the mollified band around the characteristic
/// cone for the n = 2 normal operator.
pub const TOL_CONE_BAND: f64 = 0.02;

/// `Cₙ = 2π|S^{n-2}|`: `4π` for n = 2 (`|S⁰| = 2`), `4π²` for n = 3.
pub fn normal_constant(n: usize) -> f64 {
    2.0 * std::f64::consts::PI * sphere_area(n - 1)
}

/// Quintic smoothstep: 0 → 1 on [0, 1] with two vanishing derivatives at the
/// ends.
fn smoothstep5(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

/// The cutoff profile `φ`: equal to 1 on `[0, 1-ε]`, 0 on `[1-ε/2, ∞)`,
/// smooth and monotone in between.
pub fn phi_profile(eps: f64, u: f64) -> f64 {
    debug_assert!(eps > 0.0 && eps < 1.0);
    let lo = 1.0 - eps;
    let hi = 1.0 - eps / 2.0;
    if u <= lo {
        1.0
    } else if u >= hi {
        0.0
    } else {
        1.0 - smoothstep5((u - lo) / (hi - lo))
    }
}

/// Symbol of the normal operator `L'L` (Theorem-level identity
/// `L'L = Cₙ 𝓕⁻¹ (|ξ|²-τ²)₊^{(n-3)/2} |ξ|^{2-n} 𝓕`), with the n = 2 cone
/// singularity mollified over `band`.
pub fn normal_symbol(n: usize, band: f64, tau: f64, xi_norm: f64) -> f64 {
    if xi_norm == 0.0 {
        return 0.0;
    }
    let r2 = (tau / xi_norm).powi(2);
    if r2 > 1.0 {
        return 0.0;
    }
    let c = normal_constant(n);
    match n {
        2 => {
            // clamp (1-r²) at its value on the band edge r = 1-band
            let floor = band * (2.0 - band);
            c / (xi_norm * (1.0 - r2).max(floor).sqrt())
        }
        3 => c / xi_norm,
        _ => panic!("unsupported dimension {n}"),
    }
}

/// Symbol of the FBP filter `Cₙ⁻¹ |D_x|^{n-2} □₊^{(3-n)/2}`; composing with
/// [`normal_symbol`] yields the indicator of `{|τ| ≤ |ξ|}` (off the mollified
/// band when n = 2).
pub fn fbp_symbol(n: usize, tau: f64, xi_norm: f64) -> f64 {
    if xi_norm == 0.0 {
        return 0.0;
    }
    let r2 = (tau / xi_norm).powi(2);
    if r2 > 1.0 {
        return 0.0;
    }
    let c = normal_constant(n);
    match n {
        2 => xi_norm * (1.0 - r2).sqrt() / c,
        3 => xi_norm / c,
        _ => panic!("unsupported dimension {n}"),
    }
}

/// Indicator of the closed spacelike cone `{|τ| ≤ |ξ|}` — the spectral
/// projection `h(□)`.
pub fn spacelike_indicator(tau: f64, xi_norm: f64) -> f64 {
    if xi_norm == 0.0 {
        if tau == 0.0 {
            1.0
        } else {
            0.0
        }
    } else if tau.abs() <= xi_norm {
        1.0
    } else {
        0.0
    }
}

/// Symbol of the stable inversion step: the inverse of the `L'QL` multiplier
/// `Cₙ φ(r) (1-r²)^{(n-3)/2} / |ξ|` on the support of `φ`, i.e.
/// `Cₙ⁻¹ |ξ| (1-r²)₊^{(3-n)/2}` restricted to `r < 1-ε/2`.
pub fn stable_inversion_symbol(n: usize, eps: f64, tau: f64, xi_norm: f64) -> f64 {
    if xi_norm == 0.0 {
        return 0.0;
    }
    let r = tau.abs() / xi_norm;
    if r >= 1.0 - eps / 2.0 {
        return 0.0;
    }
    let c = normal_constant(n);
    match n {
        2 => xi_norm * (1.0 - r * r).sqrt() / c,
        3 => xi_norm / c,
        _ => panic!("unsupported dimension {n}"),
    }
}

/// Catalog of the multiplier symbols with their validity checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MultiplierSpec {
    NormalOperator { n: usize },
    FbpFilter { n: usize },
    CutoffPhi { eps: f64 },
    StableInversion { n: usize, eps: f64 },
}

impl MultiplierSpec {
    pub fn validate(&self) -> Result<()> {
        let check_eps = |eps: f64| {
            if eps > 0.0 && eps < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParam(format!(
                    "cutoff parameter must satisfy 0 < ε < 1, got {eps}"
                )))
            }
        };
        match *self {
            MultiplierSpec::NormalOperator { n } | MultiplierSpec::FbpFilter { n } => {
                if n != 2 && n != 3 {
                    return Err(Error::InvalidParam(format!("n must be 2 or 3, got {n}")));
                }
                if matches!(self, MultiplierSpec::FbpFilter { n: 2 }) {
                    // singular exponent inside L'L; the plain filter must not
                    // be used alone in two dimensions
                    return Err(Error::NeedsStableInversion);
                }
                Ok(())
            }
            MultiplierSpec::CutoffPhi { eps } => check_eps(eps),
            MultiplierSpec::StableInversion { n, eps } => {
                if n != 2 && n != 3 {
                    return Err(Error::InvalidParam(format!("n must be 2 or 3, got {n}")));
                }
                check_eps(eps)
            }
        }
    }

    /// Value on the `(τ, |ξ|)` table; the cutoff is reported in its `L'QL`
    /// slice form `φ(|τ|/|ξ|)`.
    pub fn value(&self, tau: f64, xi_norm: f64) -> f64 {
        match *self {
            MultiplierSpec::NormalOperator { n } => normal_symbol(n, TOL_CONE_BAND, tau, xi_norm),
            MultiplierSpec::FbpFilter { n } => fbp_symbol(n, tau, xi_norm),
            MultiplierSpec::CutoffPhi { eps } => {
                if xi_norm == 0.0 {
                    1.0
                } else {
                    phi_profile(eps, tau.abs() / xi_norm)
                }
            }
            MultiplierSpec::StableInversion { n, eps } => {
                stable_inversion_symbol(n, eps, tau, xi_norm)
            }
        }
    }
}
