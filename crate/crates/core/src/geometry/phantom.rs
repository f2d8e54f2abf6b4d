//! Analytic phantoms: closed-form test objects whose exact evaluator makes
//! quadrature-error-only tests possible.

use super::grid::{ScalarField, SpacetimeGrid};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::sync::Arc;

type ProfileFn = dyn Fn(f64) -> f64 + Send + Sync;

/// One plane-wave carrier of a band-limited random phantom.
#[derive(Debug, Clone, Copy)]
pub struct Carrier {
    pub tau: f64,
    pub xi: [f64; 3],
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Clone)]
pub enum Phantom {
    /// `exp(-((t-tc)/wt)² - |x-xc|²/wx²)`.
    Gaussian {
        t_center: f64,
        x_center: [f64; 3],
        t_width: f64,
        x_width: f64,
    },
    /// `f(t, x) = h(t + x·a)` with `|a| < 1`; in the kernel of `L` whenever
    /// `∫h = 0`.
    PlaneWavePacket {
        a: [f64; 3],
        profile: Arc<ProfileFn>,
        zero_mean: bool,
    },
    /// Sum of plane-wave carriers under a Gaussian envelope; the carriers are
    /// drawn inside a causal cone controlled by `cone_fraction` (see
    /// [`Phantom::bandlimited_random`]).
    BandlimitedRandom {
        seed: u64,
        cone_fraction: f64,
        carriers: Vec<Carrier>,
        envelope_width: f64,
    },
    /// On `R × S²`: Gaussian in geodesic distance from `y_center` times a
    /// Gaussian in `t`; the spatial argument is the ambient point on the unit
    /// sphere.  Smooth stand-in for a conormal singularity, sharpness set by
    /// `width`.
    RidgeOnSphere {
        t_center: f64,
        y_center: [f64; 3],
        width: f64,
    },
    Zero,
}

impl Phantom {
    pub fn gaussian(t_center: f64, x_center: &[f64], t_width: f64, x_width: f64) -> Self {
        let mut xc = [0.0f64; 3];
        xc[..x_center.len()].copy_from_slice(x_center);
        Phantom::Gaussian {
            t_center,
            x_center: xc,
            t_width,
            x_width,
        }
    }

    /// The standard unit Gaussian `exp(-t² - |x|²)`.
    pub fn unit_gaussian() -> Self {
        Self::gaussian(0.0, &[0.0, 0.0, 0.0], 1.0, 1.0)
    }

    pub fn plane_wave_packet(
        a: &[f64],
        zero_mean: bool,
        profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let norm: f64 = a.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm >= 1.0 {
            return Err(Error::InvalidParam(format!(
                "plane wave packet needs |a| < 1, got |a| = {norm}"
            )));
        }
        let mut av = [0.0f64; 3];
        av[..a.len()].copy_from_slice(a);
        Ok(Phantom::PlaneWavePacket {
            a: av,
            profile: Arc::new(profile),
            zero_mean,
        })
    }

    /// Packet with the odd profile `h(u) = u·exp(-u²)`, which has `∫h = 0`.
    pub fn odd_gaussian_packet(a: &[f64]) -> Result<Self> {
        Self::plane_wave_packet(a, true, |u| u * (-u * u).exp())
    }

    /// Random phantom with spectrum concentrated in a causal cone.
    ///
    /// For `cone_fraction ≤ 1` the carriers satisfy `|τ| ≤ cone_fraction·|ξ|`
    /// (spacelike band); for `cone_fraction > 1` they satisfy
    /// `|τ| ≥ cone_fraction·|ξ|` (timelike).  The Gaussian envelope widens the
    /// spectrum by `O(1/envelope_width)` around each carrier.
    pub fn bandlimited_random(seed: u64, cone_fraction: f64) -> Self {
        Self::bandlimited_random_with(seed, cone_fraction, 8, 3.0, 6.0, 1.2)
    }

    pub fn bandlimited_random_with(
        seed: u64,
        cone_fraction: f64,
        n_waves: usize,
        k_min: f64,
        k_max: f64,
        envelope_width: f64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut carriers = Vec::with_capacity(n_waves);
        for _ in 0..n_waves {
            let k = rng.random_range(k_min..k_max);
            // uniform direction on S² (works for n = 2 with the third
            // component ignored by the evaluator's callers)
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            let mu: f64 = rng.random_range(-1.0..1.0);
            let s = (1.0 - mu * mu).sqrt();
            let dir = [s * phi.cos(), s * phi.sin(), mu];
            let (tau, xi_scale) = if cone_fraction <= 1.0 {
                let r = rng.random_range(0.0..cone_fraction);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                (sign * r * k, k)
            } else {
                let u = rng.random_range(0.0..1.0 / cone_fraction);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                (sign * k, u * k)
            };
            carriers.push(Carrier {
                tau,
                xi: [xi_scale * dir[0], xi_scale * dir[1], xi_scale * dir[2]],
                amplitude: rng.random_range(0.5..1.0),
                phase: rng.random_range(0.0..std::f64::consts::TAU),
            });
        }
        Phantom::BandlimitedRandom {
            seed,
            cone_fraction,
            carriers,
            envelope_width,
        }
    }

    pub fn ridge_on_sphere(t_center: f64, y_center: [f64; 3], width: f64) -> Result<Self> {
        if !(width > 0.0) || width >= std::f64::consts::FRAC_PI_4 {
            return Err(Error::InvalidParam(format!(
                "ridge width must lie in (0, π/4), got {width}"
            )));
        }
        let norm: f64 = y_center.iter().map(|c| c * c).sum::<f64>().sqrt();
        Ok(Phantom::RidgeOnSphere {
            t_center,
            y_center: [y_center[0] / norm, y_center[1] / norm, y_center[2] / norm],
            width,
        })
    }

    /// Exact pointwise evaluation.  For [`Phantom::RidgeOnSphere`] the spatial
    /// argument is the ambient `R³` point (normalized internally).
    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        match self {
            Phantom::Gaussian {
                t_center,
                x_center,
                t_width,
                x_width,
            } => {
                let dt = (t - t_center) / t_width;
                let mut r2 = 0.0;
                for (xi, ci) in x.iter().zip(x_center.iter()) {
                    let d = (xi - ci) / x_width;
                    r2 += d * d;
                }
                (-dt * dt - r2).exp()
            }
            Phantom::PlaneWavePacket { a, profile, .. } => {
                let mut u = t;
                for (xi, ai) in x.iter().zip(a.iter()) {
                    u += xi * ai;
                }
                profile(u)
            }
            Phantom::BandlimitedRandom {
                carriers,
                envelope_width,
                ..
            } => {
                let mut r2 = t * t;
                for xi in x {
                    r2 += xi * xi;
                }
                let env = (-r2 / (envelope_width * envelope_width)).exp();
                let mut v = 0.0;
                for c in carriers {
                    let mut phase = c.tau * t + c.phase;
                    for (xi, ki) in x.iter().zip(c.xi.iter()) {
                        phase += xi * ki;
                    }
                    v += c.amplitude * phase.cos();
                }
                v * env
            }
            Phantom::RidgeOnSphere {
                t_center,
                y_center,
                width,
            } => {
                let norm: f64 = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                let mut dot = 0.0;
                for (yi, ci) in x.iter().zip(y_center.iter()) {
                    dot += yi * ci / norm;
                }
                let d = dot.clamp(-1.0, 1.0).acos();
                let dt = t - t_center;
                (-(d * d + dt * dt) / (2.0 * width * width)).exp()
            }
            Phantom::Zero => 0.0,
        }
    }

    /// Radius beyond which the phantom is below ~1e-14 of its peak, when that
    /// makes sense (plane-wave packets are unbounded along the wave fronts).
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            Phantom::Gaussian {
                t_width, x_width, ..
            } => Some(6.0 * t_width.max(*x_width)),
            Phantom::BandlimitedRandom { envelope_width, .. } => Some(6.0 * envelope_width),
            _ => None,
        }
    }

    /// True when the effective support (offset by the phantom's center) fits
    /// inside the grid box.
    pub fn fits_within(&self, grid: &SpacetimeGrid) -> bool {
        let Some(r) = self.support_radius() else {
            return true;
        };
        let (tc, xc) = match self {
            Phantom::Gaussian {
                t_center, x_center, ..
            } => (*t_center, *x_center),
            _ => (0.0, [0.0; 3]),
        };
        let x_reach = xc[..grid.n()]
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs()))
            + r;
        tc.abs() + r <= grid.t_extent() && x_reach <= grid.x_extent()
    }
}

impl fmt::Debug for Phantom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phantom::Gaussian { t_width, x_width, .. } => {
                write!(f, "Gaussian(wt={t_width}, wx={x_width})")
            }
            Phantom::PlaneWavePacket { a, zero_mean, .. } => {
                write!(f, "PlaneWavePacket(a={a:?}, zero_mean={zero_mean})")
            }
            Phantom::BandlimitedRandom {
                seed,
                cone_fraction,
                ..
            } => write!(f, "BandlimitedRandom(seed={seed}, cf={cone_fraction})"),
            Phantom::RidgeOnSphere { width, .. } => write!(f, "RidgeOnSphere(width={width})"),
            Phantom::Zero => write!(f, "Zero"),
        }
    }
}

/// Samples the phantom at every grid node (same arithmetic as the evaluator).
pub fn sample_phantom(phantom: &Phantom, grid: &SpacetimeGrid) -> ScalarField {
    if !phantom.fits_within(grid) {
        log::warn!(
            "phantom {:?} support may exceed the grid box (T={}, R={}); truncation error expected",
            phantom,
            grid.t_extent(),
            grid.x_extent()
        );
    }
    ScalarField::from_fn(grid.clone(), format!("{phantom:?}"), |t, x| {
        phantom.eval(t, x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_point_values() {
        let p = Phantom::unit_gaussian();
        assert_eq!(p.eval(0.0, &[0.0, 0.0]), 1.0);
        let e1 = p.eval(1.0, &[0.0, 0.0]);
        assert!((e1 - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn zero_phantom_samples_to_zero_field() {
        let g = SpacetimeGrid::new(2, 1.0, 1.0, 8, 8).unwrap();
        let f = sample_phantom(&Phantom::Zero, &g);
        assert!(f.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sampling_agrees_with_evaluator_at_every_node() {
        let g = SpacetimeGrid::new(2, 1.5, 1.5, 9, 7).unwrap();
        let p = Phantom::bandlimited_random(3, 0.7);
        let f = sample_phantom(&p, &g);
        for probe in [0usize, 11, 100, f.values.len() - 1] {
            let (it, ix) = g.coords_of(probe);
            let x = [g.x_coord(ix[0]), g.x_coord(ix[1])];
            assert_eq!(f.values[probe], p.eval(g.t_coord(it), &x));
        }
    }

    #[test]
    fn packet_requires_subluminal_a() {
        assert!(Phantom::odd_gaussian_packet(&[0.5, 0.0]).is_ok());
        assert!(Phantom::odd_gaussian_packet(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn bandlimited_carriers_respect_the_cone() {
        for (cf, spacelike) in [(0.8, true), (2.0, false)] {
            let p = Phantom::bandlimited_random(11, cf);
            let Phantom::BandlimitedRandom { carriers, .. } = &p else {
                unreachable!()
            };
            for c in carriers {
                let xin: f64 = c.xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                if spacelike {
                    assert!(c.tau.abs() <= cf * xin + 1e-12);
                } else {
                    assert!(c.tau.abs() >= cf * xin - 1e-12);
                }
            }
        }
    }

    #[test]
    fn ridge_is_centered_and_normalized() {
        let p = Phantom::ridge_on_sphere(0.0, [0.0, 0.0, 2.0], 0.1).unwrap();
        assert!((p.eval(0.0, &[0.0, 0.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!(p.eval(0.0, &[1.0, 0.0, 0.0]) < 1e-15);
        assert!(Phantom::ridge_on_sphere(0.0, [0.0, 0.0, 1.0], 1.0).is_err());
    }
}
