//! The FFT-multiplier pipeline: normal operator, filtered back-projection,
//! microlocal cutoff and the stable inversion chain, plus the sphere-integral
//! lemma check used in their derivation.

use super::fft::{fft_freqs, nice_fft_size, NdFft};
use super::multipliers::{
    fbp_symbol, normal_symbol, phi_profile, spacelike_indicator, stable_inversion_symbol,
    TOL_CONE_BAND,
};
use crate::error::{Error, Result};
use crate::geometry::chart::{RayChart, Sinogram};
use crate::geometry::grid::{ScalarField, SpacetimeGrid};
use crate::geometry::sphere::{gauss_legendre, sphere_area};
use crate::geometry::weight::Weight;
use crate::minkowski::{adjoint_discrete, forward, ForwardInput, RaySamplingPlan};
use num_complex::Complex64;

/// Zero-padding factor for spacetime multiplier applications; suppresses the
/// periodic wrap-around of the slowly decaying kernels.
pub const PAD_FACTOR: usize = 2;

/// Applies an isotropic-in-`ξ` spacetime multiplier `m(τ, |ξ|)` to a field on
/// the zero-padded FFT grid.  Returns the field and the relative size of the
/// imaginary residue (all implemented symbols are even in `(τ, ξ)`, so real
/// inputs must map to real outputs up to roundoff).
pub fn apply_isotropic_multiplier(
    field: &ScalarField,
    m: impl Fn(f64, f64) -> f64 + Sync,
) -> (ScalarField, f64) {
    let grid = &field.grid;
    let n = grid.n();
    let mut dims = vec![grid.nt()];
    dims.extend(std::iter::repeat_n(grid.nx(), n));
    let pdims: Vec<usize> = dims.iter().map(|&d| nice_fft_size(PAD_FACTOR * d)).collect();
    let total: usize = pdims.iter().product();

    let mut buf = vec![Complex64::default(); total];
    for (flat, &v) in field.values.iter().enumerate() {
        let mut rest = flat;
        let mut pflat = 0usize;
        let mut stride = 1usize;
        for (k, &d) in dims.iter().enumerate() {
            pflat += (rest % d) * stride;
            rest /= d;
            stride *= pdims[k];
        }
        buf[pflat] = Complex64::new(v, 0.0);
    }

    let fft = NdFft::new(&pdims);
    fft.forward(&mut buf);

    let tau_freqs = fft_freqs(pdims[0], grid.dt());
    let xi_freqs: Vec<Vec<f64>> = pdims[1..]
        .iter()
        .map(|&d| fft_freqs(d, grid.dx()))
        .collect();
    crate::par::for_each_indexed(&mut buf, |flat, v| {
        let tau = tau_freqs[flat % pdims[0]];
        let mut rest = flat / pdims[0];
        let mut xi2 = 0.0;
        for fs in &xi_freqs {
            let w = fs[rest % fs.len()];
            rest /= fs.len();
            xi2 += w * w;
        }
        *v *= m(tau, xi2.sqrt());
    });

    fft.inverse(&mut buf);

    let mut out = vec![0.0f64; field.values.len()];
    let mut max_abs = 0.0f64;
    let mut max_imag = 0.0f64;
    for (flat, slot) in out.iter_mut().enumerate() {
        let mut rest = flat;
        let mut pflat = 0usize;
        let mut stride = 1usize;
        for (k, &d) in dims.iter().enumerate() {
            pflat += (rest % d) * stride;
            rest /= d;
            stride *= pdims[k];
        }
        let v = buf[pflat];
        *slot = v.re;
        max_abs = max_abs.max(v.re.abs());
        max_imag = max_imag.max(v.im.abs());
    }
    let residue = if max_abs > 0.0 { max_imag / max_abs } else { 0.0 };
    let out_field = ScalarField {
        grid: grid.clone(),
        values: out,
        label: field.label.clone(),
    };
    (out_field, residue)
}

/// `L'Lf` through Theorem-level multiplier `Cₙ (1-r²)₊^{(n-3)/2}/|ξ|` on the
/// padded FFT grid; the `ξ = 0` plane is set to zero (the symbol is undefined
/// there for n = 2 and the cone passes through it for n = 3).
pub fn normal_via_multiplier(f: &ScalarField) -> ScalarField {
    let n = f.grid.n();
    let (mut out, _residue) =
        apply_isotropic_multiplier(f, |tau, rho| normal_symbol(n, TOL_CONE_BAND, tau, rho));
    out.label = format!("N[{}]", f.label);
    out
}

/// `L'Lf` by composing the ray-space operators: forward transform onto the
/// chart followed by the exact discrete adjoint.  Cross-validates the
/// multiplier path.
///
/// The chart must cover `z = x - tθ` for every grid point, i.e.
/// `z_extent ≥ x_extent + t_extent`.
pub fn normal_via_composition(
    f: &ScalarField,
    chart: &RayChart,
    plan: &RaySamplingPlan,
) -> Result<ScalarField> {
    if chart.z_extent() + 1e-12 < f.grid.x_extent() + f.grid.t_extent() {
        return Err(Error::ChartGridMismatch(format!(
            "composition needs z_extent ≥ R + T = {}, got {}",
            f.grid.x_extent() + f.grid.t_extent(),
            chart.z_extent()
        )));
    }
    let kappa = Weight::one();
    let sino = forward(ForwardInput::Field(f), chart, &kappa, plan)?;
    let mut out = adjoint_discrete(&sino, &f.grid, &kappa, plan)?;
    out.label = format!("L'L[{}]", f.label);
    Ok(out)
}

/// Filtered back-projection step of Theorem-level identity
/// `h(□)f = Cₙ⁻¹|D_x|^{n-2}□₊^{(3-n)/2} L'Lf` for n = 3.
///
/// For n = 2 the exponent inside `L'L` is the singular one; callers must use
/// [`stable_inversion`] instead.
pub fn fbp_reconstruct(nf: &ScalarField, n: usize) -> Result<ScalarField> {
    if n == 2 {
        return Err(Error::NeedsStableInversion);
    }
    if n != 3 {
        return Err(Error::InvalidParam(format!("n must be 2 or 3, got {n}")));
    }
    let (mut out, _) = apply_isotropic_multiplier(nf, |tau, rho| fbp_symbol(n, tau, rho));
    out.label = format!("fbp[{}]", nf.label);
    Ok(out)
}

/// Spectral projection onto the closed spacelike cone `{|τ| ≤ |ξ|}` — the
/// `h(□)` image that FBP is expected to reproduce.
pub fn spacelike_projection(f: &ScalarField) -> ScalarField {
    let (mut out, _) = apply_isotropic_multiplier(f, spacelike_indicator);
    out.label = format!("h(box)[{}]", f.label);
    out
}

/// Microlocal cutoff `Q`: for each direction applies the Fourier multiplier
/// `φ(|θ·ζ|/|ζ|)` in the `z` variable.  The `ζ = 0` mode passes through
/// unchanged.
///
/// The transform is applied on the bare `z` grid (no padding): the symbol is
/// bounded of order zero, and padding would break the exact pass/stop-band
/// behaviour on grid-periodic plane waves.
pub fn cutoff_q(s: &Sinogram, eps: f64) -> Result<Sinogram> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParam(format!(
            "cutoff parameter must satisfy 0 < ε < 1, got {eps}"
        )));
    }
    let chart = &s.chart;
    let n = chart.n();
    let dims = vec![chart.nz(); n];
    let fft = NdFft::new(&dims);
    let freqs = fft_freqs(chart.nz(), chart.dz());

    let mut out = Sinogram::zeros(chart.clone());
    let n_dirs = chart.directions().len();
    let nzp = chart.n_z_points();
    let mut blocks: Vec<Vec<f64>> = vec![Vec::new(); n_dirs];
    crate::par::for_each_indexed(&mut blocks, |idir, slot| {
        let theta = chart.directions()[idir].theta;
        let mut buf: Vec<Complex64> = s.direction_block(idir)
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft.forward(&mut buf);
        for (flat, v) in buf.iter_mut().enumerate() {
            let mut rest = flat;
            let mut dot = 0.0;
            let mut norm2 = 0.0;
            for k in 0..n {
                let w = freqs[rest % chart.nz()];
                rest /= chart.nz();
                dot += w * theta[k];
                norm2 += w * w;
            }
            if norm2 > 0.0 {
                *v *= phi_profile(eps, dot.abs() / norm2.sqrt());
            }
        }
        fft.inverse(&mut buf);
        *slot = buf.into_iter().map(|c| c.re).collect();
    });
    for (idir, block) in blocks.into_iter().enumerate() {
        out.values[idir * nzp..(idir + 1) * nzp].copy_from_slice(&block);
    }
    Ok(out)
}

/// Result of [`stable_inversion`].
pub struct StableInversion {
    pub reconstruction: ScalarField,
    /// The cutoff parameter actually used (widened when the requested one
    /// reaches into the mollified cone band).
    pub eps_used: f64,
}

/// Microlocally filtered reconstruction from sinogram data:
/// `f_rec = Cₙ⁻¹ |D_x| (1 - D_t²/|D_x|²)₊^{(3-n)/2} L'(Q s)` restricted to the
/// pass band of `φ`, which recovers `φ(|D_t|/|D_x|) f` when `s = Lf`.
pub fn stable_inversion(
    s: &Sinogram,
    grid: &SpacetimeGrid,
    eps: f64,
    plan: &RaySamplingPlan,
) -> Result<StableInversion> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParam(format!(
            "cutoff parameter must satisfy 0 < ε < 1, got {eps}"
        )));
    }
    // the pass band must stay clear of the mollified cone band
    let min_eps = 2.0 * TOL_CONE_BAND;
    let eps_used = if eps < min_eps {
        log::warn!("ε = {eps} reaches the mollified cone band; widened to {min_eps}");
        min_eps
    } else {
        eps
    };
    let n = grid.n();
    let cut = cutoff_q(s, eps_used)?;
    let back = adjoint_discrete(&cut, grid, &Weight::one(), plan)?;
    let (mut rec, _) = apply_isotropic_multiplier(&back, |tau, rho| {
        stable_inversion_symbol(n, eps_used, tau, rho)
    });
    rec.label = format!("stable_inv[eps={eps_used}]");
    Ok(StableInversion {
        reconstruction: rec,
        eps_used,
    })
}

/// Outcome of the sphere-integral lemma check.
#[derive(Debug, Clone, Copy)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl LemmaCheck {
    pub fn abs_diff(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Checks `∫_{S^{n-1}} ψ(θ·ξ) dθ = |S^{n-2}| |ξ|^{2-n} ∫ ψ(s)(|ξ|²-s²)₊^{(n-3)/2} ds`
/// by sphere quadrature on the left and 1D quadrature on the right
/// (`|S⁰| = 2`).  For n = 2 the right side is computed after the substitution
/// `s = |ξ|cos φ`, which removes the inverse square root singularity exactly.
pub fn sphere_integral_lemma_check(
    psi: &(dyn Fn(f64) -> f64 + Sync),
    xi: &[f64],
    resolution: usize,
) -> Result<LemmaCheck> {
    let n = xi.len();
    if n != 2 && n != 3 {
        return Err(Error::InvalidParam(format!("ξ must have 2 or 3 components, got {n}")));
    }
    let xi_norm: f64 = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
    if xi_norm == 0.0 {
        return Err(Error::InvalidParam(
            "the sphere integral lemma requires ξ ≠ 0".into(),
        ));
    }

    let dirs = match n {
        2 => crate::geometry::sphere::circle_directions(4 * resolution),
        _ => crate::geometry::sphere::sphere_directions(resolution, 2 * resolution),
    };
    let mut lhs = 0.0;
    for d in &dirs {
        let dot: f64 = d.theta[..n].iter().zip(xi).map(|(a, b)| a * b).sum();
        lhs += d.weight * psi(dot);
    }

    let rhs = match n {
        2 => {
            // 2 ∫₀^π ψ(|ξ| cos φ) dφ, midpoint rule (periodic-even: spectral)
            let m = 8 * resolution;
            let h = std::f64::consts::PI / m as f64;
            let mut acc = 0.0;
            for k in 0..m {
                let phi = (k as f64 + 0.5) * h;
                acc += psi(xi_norm * phi.cos());
            }
            2.0 * acc * h
        }
        _ => {
            // 2π |ξ|⁻¹ ∫_{-|ξ|}^{|ξ|} ψ(s) ds by Gauss–Legendre
            let (nodes, weights) = gauss_legendre(8 * resolution);
            let mut acc = 0.0;
            for (x, w) in nodes.iter().zip(&weights) {
                acc += w * psi(x * xi_norm);
            }
            sphere_area(2) / xi_norm * acc * xi_norm
        }
    };
    Ok(LemmaCheck { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::phantom::{sample_phantom, Phantom};
    use approx::assert_relative_eq;

    fn small_grid(n: usize) -> SpacetimeGrid {
        SpacetimeGrid::new(n, 2.0, 2.0, if n == 2 { 32 } else { 16 }, if n == 2 { 32 } else { 16 })
            .unwrap()
    }

    #[test]
    fn zero_maps_to_zero_through_every_pipeline_stage() {
        let f = ScalarField::zeros(small_grid(2));
        assert_eq!(normal_via_multiplier(&f).norm_sup(), 0.0);
        let chart = RayChart::circle(4.0, 16, 8).unwrap();
        let s = Sinogram::zeros(chart);
        assert_eq!(cutoff_q(&s, 0.2).unwrap().norm_sup(), 0.0);
        let inv = stable_inversion(&s, &small_grid(2), 0.2, &RaySamplingPlan::default()).unwrap();
        assert_eq!(inv.reconstruction.norm_sup(), 0.0);
    }

    #[test]
    fn multiplier_outputs_stay_real() {
        let g = small_grid(2);
        let f = sample_phantom(&Phantom::bandlimited_random(5, 0.7), &g);
        let (_, residue) = apply_isotropic_multiplier(&f, |tau, rho| {
            normal_symbol(2, TOL_CONE_BAND, tau, rho)
        });
        assert!(residue < 1e-12, "imaginary residue {residue}");
    }

    #[test]
    fn fbp_annihilates_timelike_phantoms() {
        // n = 3: fbp ∘ normal is the (bounded) spacelike projector at the
        // multiplier level, so a phantom with spectrum strictly inside Σ_t
        // maps to ~0; the residual is the phantom's own spectral tail
        let g = SpacetimeGrid::new(3, 3.5, 3.5, 28, 28).unwrap();
        let p = Phantom::bandlimited_random_with(9, 6.0, 6, 7.0, 9.0, 1.25);
        let f = sample_phantom(&p, &g);
        let rec = fbp_reconstruct(&normal_via_multiplier(&f), 3).unwrap();
        let rel = rec.norm_l2() / f.norm_l2();
        assert!(rel < 1e-2, "timelike leakage {rel}");
    }

    #[test]
    fn fbp_rejects_n2_and_unknown_dimensions() {
        let f = ScalarField::zeros(small_grid(2));
        assert!(matches!(
            fbp_reconstruct(&f, 2),
            Err(Error::NeedsStableInversion)
        ));
        assert!(fbp_reconstruct(&f, 5).is_err());
    }

    #[test]
    fn cutoff_passes_and_stops_grid_periodic_plane_waves() {
        let chart = RayChart::circle(2.0, 32, 6).unwrap();
        let nz = chart.nz();
        let dz = chart.dz();
        let make_wave = |k0: i32, k1: i32| {
            let w0 = 2.0 * std::f64::consts::PI * k0 as f64 / (nz as f64 * dz);
            let w1 = 2.0 * std::f64::consts::PI * k1 as f64 / (nz as f64 * dz);
            (w0, w1)
        };
        // direction 0 is θ = (1, 0)
        // pass band: ζ along (0, 1) gives θ·ζ = 0
        let (pw0, pw1) = make_wave(0, 5);
        // stop band: ζ along (1, 0) gives |θ·ζ| = |ζ|
        let (sw0, sw1) = make_wave(5, 0);
        let mut s = Sinogram::zeros(chart.clone());
        for iz in 0..chart.n_z_points() {
            let z = chart.z_point(iz);
            s.values[iz] = (pw0 * z[0] + pw1 * z[1] + 0.3).cos();
        }
        let filtered = cutoff_q(&s, 0.2).unwrap();
        let mut max_err = 0.0f64;
        for iz in 0..chart.n_z_points() {
            max_err = max_err.max((filtered.values[iz] - s.values[iz]).abs());
        }
        assert!(max_err < 1e-10, "pass band distorted by {max_err}");

        let mut s2 = Sinogram::zeros(chart.clone());
        for iz in 0..chart.n_z_points() {
            let z = chart.z_point(iz);
            s2.values[iz] = (sw0 * z[0] + sw1 * z[1] + 0.7).cos();
        }
        let filtered2 = cutoff_q(&s2, 0.2).unwrap();
        let out_sup = filtered2.direction_block(0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(out_sup < 1e-10, "stop band leaked {out_sup}");
    }

    #[test]
    fn lemma_check_trivial_cases() {
        // ψ ≡ 1: both sides are |S^{n-1}|
        let one = |_: f64| 1.0;
        for (xi, area) in [
            (vec![1.0, 0.0], 2.0 * std::f64::consts::PI),
            (vec![0.3, -0.4, 0.5], 4.0 * std::f64::consts::PI),
        ] {
            let chk = sphere_integral_lemma_check(&one, &xi, 16).unwrap();
            assert_relative_eq!(chk.lhs, area, epsilon = 1e-10);
            assert_relative_eq!(chk.rhs, area, epsilon = 1e-10);
        }
        // ψ(s) = s: both sides vanish by odd symmetry
        let ident = |s: f64| s;
        let chk = sphere_integral_lemma_check(&ident, &[0.0, 0.0, 2.0], 16).unwrap();
        assert!(chk.lhs.abs() < 1e-12 && chk.rhs.abs() < 1e-12);
        // ψ(s) = s², |ξ| = 1, n = 3: both sides 4π/3
        let sq = |s: f64| s * s;
        let chk = sphere_integral_lemma_check(&sq, &[1.0, 0.0, 0.0], 16).unwrap();
        assert_relative_eq!(chk.lhs, 4.0 * std::f64::consts::PI / 3.0, epsilon = 1e-10);
        assert_relative_eq!(chk.rhs, 4.0 * std::f64::consts::PI / 3.0, epsilon = 1e-10);
        // ξ = 0 is a domain error
        assert!(sphere_integral_lemma_check(&one, &[0.0, 0.0], 8).is_err());
    }
}
