//! Shared oracles for the integration suites.  Everything here is computed by
//! an independent route (closed forms, dense quadrature of the defining
//! integrals) and must not call the operator pipelines it is used to check.

use lightray::geometry::grid::{ScalarField, SpacetimeGrid};
use lightray::geometry::phantom::Phantom;
use lightray::geometry::sphere;
use lightray::spectral::fft::{fft_freqs, NdFft};
use num_complex::Complex64;

/// Closed form of the unit-Gaussian forward transform:
/// `L[e^{-t²-|x|²}](z,θ) = √(π/2)·exp((z·θ)²/2 - |z|²)` (any n).
pub fn gaussian_forward_exact(z: &[f64], theta: &[f64]) -> f64 {
    let zdot: f64 = z.iter().zip(theta).map(|(a, b)| a * b).sum();
    let z2: f64 = z.iter().map(|a| a * a).sum();
    (std::f64::consts::PI / 2.0).sqrt() * (0.5 * zdot * zdot - z2).exp()
}

/// Spherical-means form of the normal operator at a single point:
/// `N f(t,x) = ∫_{S^{n-1}} ∫₀^∞ [f(t-σ, x+σθ) + f(t+σ, x+σθ)] dσ dθ`,
/// evaluated by dense quadrature of the analytic phantom.
pub fn spherical_means_normal_at(
    phantom: &Phantom,
    n: usize,
    t: f64,
    x: &[f64],
    sigma_max: f64,
) -> f64 {
    let dirs = match n {
        2 => sphere::circle_directions(512),
        _ => sphere::sphere_directions(48, 96),
    };
    let (nodes, weights) = sphere::gauss_legendre(384);
    let mut acc = 0.0;
    for d in &dirs {
        let mut radial = 0.0;
        for (u, w) in nodes.iter().zip(&weights) {
            let sigma = 0.5 * sigma_max * (u + 1.0);
            let mut xp = [0.0f64; 3];
            for c in 0..n {
                xp[c] = x[c] + sigma * d.theta[c];
            }
            radial += w * (phantom.eval(t - sigma, &xp[..n]) + phantom.eval(t + sigma, &xp[..n]));
        }
        acc += d.weight * radial * 0.5 * sigma_max;
    }
    acc
}

/// Relative L² difference of two fields over the frequency bins outside the
/// mollified cone band `| |τ|/|ξ| - 1 | ≤ band` and outside the `ξ = 0`
/// plane (where the n = 2 normal symbol is undefined and set to zero).
pub fn masked_rel_l2(a: &ScalarField, b: &ScalarField, band: f64) -> f64 {
    assert_eq!(a.grid, b.grid);
    let g = &a.grid;
    let n = g.n();
    let mut dims = vec![g.nt()];
    dims.extend(std::iter::repeat_n(g.nx(), n));
    let fft = NdFft::new(&dims);
    let to_freq = |f: &ScalarField| {
        let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft.forward(&mut buf);
        buf
    };
    let fa = to_freq(a);
    let fb = to_freq(b);
    let tau_f = fft_freqs(g.nt(), g.dt());
    let xi_f = fft_freqs(g.nx(), g.dx());
    let mut num = 0.0;
    let mut den = 0.0;
    for (flat, (va, vb)) in fa.iter().zip(&fb).enumerate() {
        let tau = tau_f[flat % g.nt()];
        let mut rest = flat / g.nt();
        let mut xi2 = 0.0;
        for _ in 0..n {
            let w = xi_f[rest % g.nx()];
            rest /= g.nx();
            xi2 += w * w;
        }
        let xin = xi2.sqrt();
        if xin == 0.0 {
            continue;
        }
        let r = tau.abs() / xin;
        if (r - 1.0).abs() <= band {
            continue;
        }
        num += (va - vb).norm_sqr();
        den += vb.norm_sqr();
    }
    (num / den).sqrt()
}

/// Least-squares slope of `log err` against `log h` over the pairs whose
/// errors sit above `floor`.
pub fn fit_order(hs: &[f64], errs: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = hs
        .iter()
        .zip(errs)
        .filter(|(_, e)| **e > floor)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Some((m * sxy - sx * sy) / (m * sxx - sx * sx))
}

/// One pass/fail line per criterion, then the assertion.
pub fn criterion(id: &str, name: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {id} {name}: {detail}");
    assert!(pass, "{id} {name}: {detail}");
}

/// Random field with values in [-1, 1].
pub fn random_field(grid: &SpacetimeGrid, rng: &mut impl rand::Rng) -> ScalarField {
    let values = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    ScalarField::new(grid.clone(), values, "random").unwrap()
}
