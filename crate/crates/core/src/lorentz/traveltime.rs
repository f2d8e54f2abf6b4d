//! Travel time linearization.
//!
//! For a family `g_ε = -dt² + g'₀ + ε·h` the arrival time `τ(ε)` of the null
//! geodesic from `(t₁, x₁)` to the spatial point `x₂` satisfies
//!
//! `dτ/dε|₀ = ½ ∫ h(γ̇₀(s), γ̇₀(s)) ds`
//!
//! along the unperturbed geodesic.  The check below measures the
//! finite-difference slope `(τ(ε) - τ(0))/ε` for a list of `ε`, compares it
//! against the integral, and fits the convergence order of the residual
//! (which should be 1, the size of the neglected `ε²` term).
//!
//! The two-point problem is solved by shooting: Newton iteration on the
//! initial direction chart and the arrival parameter, with a
//! finite-difference Jacobian.  Endpoints must not be conjugate along the
//! background geodesic.

use super::geodesic::shoot_null_geodesic;
use super::metric::LorentzMetric;
use crate::error::{Error, Result};

type SpatialTensor = dyn Fn(f64, &[f64]) -> [[f64; 3]; 3] + Send + Sync;

/// Outcome of one boundary solve.
#[derive(Debug, Clone)]
pub struct ArrivalTime {
    pub tau: f64,
    /// Direction chart parameters of the connecting geodesic.
    pub a: Vec<f64>,
    /// Arrival parameter `s*`.
    pub s_arrival: f64,
}

/// Cubic interpolation of a record position component at parameter `s`.
fn sample_position(rec: &super::geodesic::GeodesicRecord, s: f64, comp: usize) -> f64 {
    let h = rec.step_h();
    let u = (s / h).clamp(0.0, (rec.pos.len() - 1) as f64);
    let i1 = (u.floor() as usize).clamp(1, rec.pos.len() - 3);
    let f = u - i1 as f64;
    let p = [
        rec.pos[i1 - 1][comp],
        rec.pos[i1][comp],
        rec.pos[i1 + 1][comp],
        rec.pos[i1 + 2][comp],
    ];
    // Catmull-Rom
    0.5 * ((2.0 * p[1])
        + (-p[0] + p[2]) * f
        + (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3]) * f * f
        + (-p[0] + 3.0 * p[1] - 3.0 * p[2] + p[3]) * f * f * f)
}

/// Shoots from `(t1, x1)` and solves for the direction chart `a` and the
/// parameter `s*` with `γ'(s*) = x2`.  `a0` seeds the Newton iteration.
pub fn solve_arrival(
    metric: &LorentzMetric,
    t1: f64,
    x1: &[f64],
    x2: &[f64],
    a0: &[f64],
    n_steps: usize,
) -> Result<ArrivalTime> {
    let n = metric.n();
    if !metric.is_coordinate() {
        return Err(Error::InvalidParam(
            "travel time shooting requires a coordinate metric".into(),
        ));
    }
    // generous parameter length: euclid distance is a good scale for the
    // conformally flat cases this is used with
    let dist: f64 = x1
        .iter()
        .zip(x2)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let ell = 4.0 * dist.max(1.0);

    let mut u: Vec<f64> = a0.to_vec();
    u.push(0.5 * ell); // arrival parameter guess
    let tol = 1e-12;
    let fd = 1e-7;

    let residual = |u: &[f64]| -> Result<(Vec<f64>, f64)> {
        let a = &u[..n - 1];
        let s = u[n - 1].clamp(1e-6, ell);
        let rec = shoot_null_geodesic(metric, x1, a, ell, n_steps, t1)?;
        let mut r = Vec::with_capacity(n);
        for c in 0..n {
            r.push(sample_position(&rec, s, 1 + c) - x2[c]);
        }
        let tau = sample_position(&rec, s, 0);
        Ok((r, tau))
    };

    for _iter in 0..60 {
        let (r, tau) = residual(&u)?;
        let rn: f64 = r.iter().map(|c| c * c).sum::<f64>().sqrt();
        if rn < tol {
            return Ok(ArrivalTime {
                tau,
                a: u[..n - 1].to_vec(),
                s_arrival: u[n - 1],
            });
        }
        // finite-difference Jacobian
        let mut jac = nalgebra::DMatrix::zeros(n, n);
        for col in 0..n {
            let mut up = u.clone();
            up[col] += fd;
            let (rp, _) = residual(&up)?;
            for row in 0..n {
                jac[(row, col)] = (rp[row] - r[row]) / fd;
            }
        }
        let rhs = nalgebra::DVector::from_iterator(n, r.iter().map(|c| -c));
        let Some(delta) = jac.lu().solve(&rhs) else {
            return Err(Error::ShootingFailed {
                detail: format!("singular Jacobian for x1={x1:?} → x2={x2:?}"),
            });
        };
        // damped update keeps the first steps stable
        let damp = if _iter < 3 { 0.8 } else { 1.0 };
        for (ui, di) in u.iter_mut().zip(delta.iter()) {
            *ui += damp * di;
        }
    }
    Err(Error::ShootingFailed {
        detail: format!("no convergence for x1={x1:?} → x2={x2:?}"),
    })
}

/// Euclidean-direction seed for the Newton iteration.
pub fn direction_seed(n: usize, x1: &[f64], x2: &[f64]) -> Vec<f64> {
    let d: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| b - a).collect();
    match n {
        2 => vec![d[1].atan2(d[0])],
        3 => {
            let r = d.iter().map(|c| c * c).sum::<f64>().sqrt();
            vec![(d[2] / r).acos(), d[1].atan2(d[0])]
        }
        _ => panic!("unsupported dimension"),
    }
}

#[derive(Debug, Clone)]
pub struct TravelTimeReport {
    /// `½ ∫ h(γ̇₀, γ̇₀) ds` along the background geodesic.
    pub linearized: f64,
    pub tau0: f64,
    /// `(ε, (τ(ε)-τ(0))/ε, |slope - linearized|)` per requested ε.
    pub slopes: Vec<(f64, f64, f64)>,
    /// Least-squares slope of `log err` against `log ε`.
    pub fitted_order: f64,
}

/// Runs the full linearization check for a static background `g'₀` and a
/// symmetric spatial perturbation `h(t, x)` (the `h_{0j} = 0` case).
pub fn travel_time_linearization_check(
    n: usize,
    g0: std::sync::Arc<SpatialTensor>,
    h: std::sync::Arc<SpatialTensor>,
    t1: f64,
    x1: &[f64],
    x2: &[f64],
    eps_list: &[f64],
    n_steps: usize,
) -> Result<TravelTimeReport> {
    let g0c = g0.clone();
    let metric0 = LorentzMetric::product_static(n, move |x: &[f64]| g0c(0.0, x));
    let seed = direction_seed(n, x1, x2);
    let base = solve_arrival(&metric0, t1, x1, x2, &seed, n_steps)?;

    // ½ ∫ h(γ̇₀, γ̇₀) ds along the background solution, trapezoid on the
    // record samples restricted to [0, s*]
    let rec = shoot_null_geodesic(&metric0, x1, &base.a, 4.0 * dist_euclid(x1, x2).max(1.0), n_steps, t1)?;
    let hstep = rec.step_h();
    let i_max = (base.s_arrival / hstep).floor() as usize;
    let mut integral = 0.0;
    let hquad = |idx: usize| -> f64 {
        let p = &rec.pos[idx];
        let v = &rec.vel[idx];
        let hm = h(p[0], &p[1..1 + n]);
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += hm[i][j] * v[1 + i] * v[1 + j];
            }
        }
        acc
    };
    for i in 0..i_max {
        integral += 0.5 * (hquad(i) + hquad(i + 1)) * hstep;
    }
    // partial last cell up to s*
    let rem = base.s_arrival - i_max as f64 * hstep;
    integral += hquad(i_max) * rem;
    let linearized = 0.5 * integral;

    let mut slopes = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let g0c = g0.clone();
        let hc = h.clone();
        let metric_eps = LorentzMetric::product_general(n, move |t: f64, x: &[f64]| {
            let g = g0c(t, x);
            let hm = hc(t, x);
            let mut out = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] = g[i][j] + eps * hm[i][j];
                }
            }
            out
        });
        let sol = solve_arrival(&metric_eps, t1, x1, x2, &base.a, n_steps)?;
        let fd_slope = (sol.tau - base.tau) / eps;
        slopes.push((eps, fd_slope, (fd_slope - linearized).abs()));
    }

    // least-squares fit of log err vs log ε over the usable residuals
    let pts: Vec<(f64, f64)> = slopes
        .iter()
        .filter(|(_, _, e)| *e > 1e-13)
        .map(|(eps, _, e)| (eps.ln(), e.ln()))
        .collect();
    let fitted_order = fit_slope(&pts);
    Ok(TravelTimeReport {
        linearized,
        tau0: base.tau,
        slopes,
        fitted_order,
    })
}

fn dist_euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (m * sxy - sx * sy) / (m * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn flat() -> Arc<SpatialTensor> {
        Arc::new(|_t: f64, _x: &[f64]| {
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        })
    }

    #[test]
    fn flat_arrival_time_is_the_euclid_distance() {
        let metric = LorentzMetric::minkowski(2);
        let x1 = [-1.0, 0.0];
        let x2 = [0.8, 0.5];
        let seed = direction_seed(2, &x1, &x2);
        let sol = solve_arrival(&metric, 0.3, &x1, &x2, &seed, 1024).unwrap();
        let d = dist_euclid(&x1, &x2);
        assert!((sol.tau - (0.3 + d)).abs() < 1e-9, "τ = {}", sol.tau);
    }

    #[test]
    fn zero_perturbation_has_zero_slope() {
        let zero = Arc::new(|_t: f64, _x: &[f64]| [[0.0; 3]; 3]) as Arc<SpatialTensor>;
        let rep = travel_time_linearization_check(
            2,
            flat(),
            zero,
            0.0,
            &[-1.0, 0.1],
            &[1.0, 0.4],
            &[0.1, 0.05],
            512,
        )
        .unwrap();
        assert_eq!(rep.linearized, 0.0);
        for (_, slope, _) in &rep.slopes {
            assert!(slope.abs() < 1e-7, "slope {slope}");
        }
    }

    #[test]
    fn constant_speed_perturbation_matches_the_elementary_oracle() {
        // c₀ = 1, δc constant: h = -2δc·Id, predicted dτ/dε = -D·δc
        let dc = 0.05;
        let h = Arc::new(move |_t: f64, _x: &[f64]| {
            let v = -2.0 * dc;
            [[v, 0.0, 0.0], [0.0, v, 0.0], [0.0, 0.0, 0.0]]
        }) as Arc<SpatialTensor>;
        let x1 = [-1.0, 0.0];
        let x2 = [1.0, 0.3];
        let d = dist_euclid(&x1, &x2);
        let rep = travel_time_linearization_check(
            2,
            flat(),
            h,
            0.0,
            &x1,
            &x2,
            &[2e-3, 1e-3],
            1024,
        )
        .unwrap();
        let oracle = -d * dc;
        assert!(
            (rep.linearized - oracle).abs() <= 1e-4 * oracle.abs(),
            "{} vs {oracle}",
            rep.linearized
        );
        // Richardson-extrapolated slope removes the O(ε) term
        let d1 = rep.slopes[0].1;
        let d2 = rep.slopes[1].1;
        let extrap = 2.0 * d2 - d1;
        assert!(
            (extrap - oracle).abs() <= 1e-4 * oracle.abs(),
            "{extrap} vs {oracle}"
        );
    }
}
