//! Canonical relation diagnostics.
//!
//! On the chart `(z, a)` the transform's canonical relation pairs a covector
//! `ξ` at `γ_{z,a}(s)` with the chart covector `(ζ, α)` through the Jacobi
//! fields of the parameterization:
//!
//! `ζ_j = ⟨ξ, M_j(s)⟩`, `α_k = ⟨ξ, A_k(s)⟩`, subject to `⟨ξ, γ̇(s)⟩ = 0`.
//!
//! Covectors are represented by their metric duals `ξ_*` (vectors), so the
//! pairing is `⟨ξ, V⟩ = g(ξ_*, V)`.  The constraint is enforced by an
//! explicit projection because user-supplied covectors never satisfy it
//! exactly.

use super::jacobi::JacobiBundle;
use super::metric::{s2_chart, LorentzMetric};
use super::vec4::{self, V4};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RelationData {
    /// Chart-cotangent components dual to `z`.
    pub zeta: Vec<f64>,
    /// Chart-cotangent components dual to `a`.
    pub alpha: Vec<f64>,
    /// `⟨ξ, γ̇(s)⟩` after the projection; should be at roundoff.
    pub tau_check: f64,
    /// The projected covector's dual vector.
    pub xi_projected: V4,
}

/// Projects `ξ_*` onto `γ̇(s)^⊥` (along the time axis, which is transversal
/// because `⟨dt, γ̇⟩ = 1`) and pairs it with the bundle's variation fields.
pub fn canonical_relation_data(
    bundle: &JacobiBundle,
    idx: usize,
    xi_star: &V4,
) -> Result<RelationData> {
    if vec4::enorm(xi_star) == 0.0 {
        return Err(Error::ZeroCovector);
    }
    let rec = &bundle.record;
    let metric = &rec.metric;
    let n = metric.n();
    let pos = &rec.pos[idx];
    let vel = &rec.vel[idx];

    // e₀ = dual vector of dt: g(e₀, ·) = dt ⟺ e₀ = (-1, 0, …)
    let e0: V4 = [-1.0, 0.0, 0.0, 0.0];
    let pairing = metric.inner(pos, xi_star, vel);
    let denom = metric.inner(pos, &e0, vel);
    let mut xi = *xi_star;
    vec4::axpy(&mut xi, -pairing / denom, &e0);
    let tau_check = metric.inner(pos, &xi, vel);

    let mut zeta = Vec::with_capacity(n);
    for j in 0..n {
        zeta.push(metric.inner(pos, &xi, &bundle.m_field(j).j[idx]));
    }
    let mut alpha = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        alpha.push(metric.inner(pos, &xi, &bundle.a_field(k).j[idx]));
    }
    Ok(RelationData {
        zeta,
        alpha,
        tau_check,
        xi_projected: xi,
    })
}

/// The lightlike-characterization statistic: `max(‖α‖, sin ∠(ζ_*, θ))`.
///
/// Both vanish exactly when `ξ` is lightlike on the relation (`ξ_* ∥ γ̇`) and
/// stay bounded away from zero for spacelike `ξ`.  `ζ_*` is raised with the
/// chart metric `h = g'(t₀, z)` and compared against the chart components of
/// `θ(z, a)`.
pub fn lightlike_statistic(bundle: &JacobiBundle, data: &RelationData) -> f64 {
    let rec = &bundle.record;
    let metric = &rec.metric;
    let n = metric.n();
    let z = &rec.z;
    let h = metric.spatial_metric_chart(rec.t_origin, z);

    // ζ_*^j = h^{jk} ζ_k (chart components)
    let mut hm = nalgebra::DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            hm[(i, j)] = h[i][j];
        }
    }
    let hinv = hm.try_inverse().expect("chart metric invertible");
    let mut zeta_star = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            zeta_star[i] += hinv[(i, j)] * data.zeta[j];
        }
    }

    // chart components of θ(z, a)
    let theta_chart: Vec<f64> = match metric {
        LorentzMetric::RxS2 => {
            let (u1, u2) = s2_chart::frame(z);
            let lambda = s2_chart::lambda(z);
            let th = s2_chart::theta(z, rec.a[0]);
            // θ = Σ θ^j_chart · (λ u_j)
            let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            vec![dot(&th, &u1) / lambda, dot(&th, &u2) / lambda]
        }
        _ => rec.vel[0][1..1 + n].to_vec(),
    };

    let norm = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let nz = norm(&zeta_star);
    let nt = norm(&theta_chart);
    let sine = if nz == 0.0 || nt == 0.0 {
        1.0
    } else {
        // ‖ζ̂_* × θ̂‖
        match n {
            2 => ((zeta_star[0] * theta_chart[1] - zeta_star[1] * theta_chart[0]) / (nz * nt)).abs(),
            _ => {
                let a = [
                    zeta_star[1] * theta_chart[2] - zeta_star[2] * theta_chart[1],
                    zeta_star[2] * theta_chart[0] - zeta_star[0] * theta_chart[2],
                    zeta_star[0] * theta_chart[1] - zeta_star[1] * theta_chart[0],
                ];
                norm(&a) / (nz * nt)
            }
        }
    };
    let alpha_norm = norm(&data.alpha);
    alpha_norm.max(sine)
}
