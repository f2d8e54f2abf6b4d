//! Jacobi fields along null geodesics.
//!
//! For the chart family `γ_{z,a}` the bundle carries the variation fields
//! `M_j = ∂_{z^j} γ` (j = 1..n) and `A_k = ∂_{a^k} γ` (k = 1..n-1), obtained
//! by integrating the Jacobi equation `J'' + R(J, γ̇)γ̇ = 0` alongside the
//! geodesic, plus the two analytic members `γ̇` and `Γ(s) = s·γ̇(s)`.
//! Together these 2n+1 fields span the space whose Cauchy data at any `s`
//! fills `{(V, W) : W ∈ γ̇(s)^⊥}`.
//!
//! Initial data: `M_j(0) = (0, ∂y/∂z_j)` with `∇_s M_j(0)` the covariant
//! `z_j`-derivative of the initial tangent field `(1, θ(z,a))` — for static
//! products this is `(0, ∇'_{z^j} θ)`, while time-dependent metrics pick up
//! `Γ(e_j, (1,θ))` mixing terms.  `A_k(0) = 0` with `∇_s A_k(0) = (0, ∂_{a^k} θ)`.

use super::geodesic::{integrate, shoot_null_geodesic, store_field, GeodesicRecord};
use super::metric::{chart_initial, s2_chart, LorentzMetric};
use super::vec4::{self, V4};
use crate::error::{Error, Result};

/// Step for differentiating the chart direction map `θ(z, a)`.
const H_CHART: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// `M_j = ∂_{z^j} γ`
    ZVariation(usize),
    /// `A_k = ∂_{a^k} γ`
    AVariation(usize),
    /// `γ̇`
    Tangent,
    /// `Γ(s) = s γ̇(s)`
    ScaledTangent,
}

#[derive(Debug, Clone)]
pub struct JacobiField {
    pub kind: FieldKind,
    /// Field values at the record's samples.
    pub j: Vec<V4>,
    /// Covariant derivatives `∇_s J` at the record's samples.
    pub k: Vec<V4>,
}

#[derive(Debug, Clone)]
pub struct JacobiBundle {
    pub record: GeodesicRecord,
    /// Ordered `[M_1..M_n, A_1..A_{n-1}, γ̇, Γ]`.
    pub fields: Vec<JacobiField>,
}

impl JacobiBundle {
    pub fn n_fields(&self) -> usize {
        self.fields.len()
    }

    pub fn m_field(&self, j: usize) -> &JacobiField {
        &self.fields[j]
    }

    pub fn a_field(&self, k: usize) -> &JacobiField {
        &self.fields[self.record.metric.n() + k]
    }

    pub fn tangent_field(&self) -> &JacobiField {
        &self.fields[2 * self.record.metric.n() - 1]
    }

    pub fn scaled_tangent_field(&self) -> &JacobiField {
        &self.fields[2 * self.record.metric.n()]
    }

    /// Wronskian `(I, J')_g - (I', J)_g` of two bundle members at a sample.
    pub fn wronskian(&self, f1: usize, f2: usize, idx: usize) -> f64 {
        let p = &self.record.pos[idx];
        let m = &self.record.metric;
        let (a, b) = (&self.fields[f1], &self.fields[f2]);
        m.inner(p, &a.j[idx], &b.k[idx]) - m.inner(p, &a.k[idx], &b.j[idx])
    }

    /// Largest deviation of the Wronskian from its initial value, relative to
    /// the pair's scale.
    pub fn wronskian_drift(&self, f1: usize, f2: usize) -> f64 {
        let w0 = self.wronskian(f1, f2, 0);
        let mut scale = 1.0f64;
        let mut drift = 0.0f64;
        for idx in 0..self.record.pos.len() {
            let w = self.wronskian(f1, f2, idx);
            drift = drift.max((w - w0).abs());
            let a = &self.fields[f1];
            let b = &self.fields[f2];
            scale = scale
                .max(vec4::enorm(&a.j[idx]) * vec4::enorm(&b.k[idx]))
                .max(vec4::enorm(&a.k[idx]) * vec4::enorm(&b.j[idx]));
        }
        drift / scale
    }

    /// Numerical rank of the 2n+1 Cauchy-data vectors `(J(s), J'(s))` at a
    /// sample (threshold relative to the largest singular value).
    pub fn cauchy_data_rank(&self, idx: usize, threshold: f64) -> usize {
        let rows = 8;
        let cols = self.fields.len();
        let mut m = nalgebra::DMatrix::zeros(rows, cols);
        for (c, f) in self.fields.iter().enumerate() {
            for r in 0..4 {
                m[(r, c)] = f.j[idx][r];
                m[(4 + r, c)] = f.k[idx][r];
            }
        }
        let svd = m.svd(false, false);
        let smax = svd.singular_values.max();
        svd.singular_values.iter().filter(|&&s| s > threshold * smax).count()
    }

    /// Largest `|(J'(s), γ̇(s))_g|` over the bundle at a sample; vanishes for
    /// Jacobi fields generated by variations of the chart family.
    pub fn derivative_orthogonality_defect(&self, idx: usize) -> f64 {
        let p = &self.record.pos[idx];
        let v = &self.record.vel[idx];
        self.fields
            .iter()
            .map(|f| self.record.metric.inner(p, &f.k[idx], v).abs())
            .fold(0.0, f64::max)
    }
}

/// Derivative of the chart direction `θ(z, a)` in a chart parameter:
/// analytic for the homogeneous built-ins, central differences otherwise.
fn d_theta_fd(
    metric: &LorentzMetric,
    t0: f64,
    z: &[f64],
    a: &[f64],
    wiggle_z: Option<usize>,
    wiggle_a: Option<usize>,
) -> Result<V4> {
    match metric {
        LorentzMetric::Minkowski { n } | LorentzMetric::Flrw { n, .. } => {
            // θ = û(a)/a(t0) is independent of z
            if wiggle_z.is_some() {
                return Ok(vec4::ZERO);
            }
            let k = wiggle_a.unwrap();
            let du = euclid_direction_derivative(*n, a, k);
            let scale = if let LorentzMetric::Flrw { a: af, .. } = metric {
                1.0 / af(t0)
            } else {
                1.0
            };
            return Ok(vec4::from_time_and_space(
                0.0,
                &[scale * du[0], scale * du[1], scale * du[2]][..*n],
            ));
        }
        _ => {}
    }
    let mut zp = z.to_vec();
    let mut zm = z.to_vec();
    let mut ap = a.to_vec();
    let mut am = a.to_vec();
    if let Some(j) = wiggle_z {
        zp[j] += H_CHART;
        zm[j] -= H_CHART;
    }
    if let Some(k) = wiggle_a {
        ap[k] += H_CHART;
        am[k] -= H_CHART;
    }
    let (_, vp) = chart_initial(metric, t0, &zp, &ap)?;
    let (_, vm) = chart_initial(metric, t0, &zm, &am)?;
    Ok(vec4::scale(&vec4::sub(&vp, &vm), 1.0 / (2.0 * H_CHART)))
}

/// `∂û/∂a_k` of the euclidean direction chart.
fn euclid_direction_derivative(n: usize, a: &[f64], k: usize) -> [f64; 3] {
    match (n, k) {
        (2, 0) => [-a[0].sin(), a[0].cos(), 0.0],
        (3, 0) => [
            a[0].cos() * a[1].cos(),
            a[0].cos() * a[1].sin(),
            -a[0].sin(),
        ],
        (3, 1) => [
            -a[0].sin() * a[1].sin(),
            a[0].sin() * a[1].cos(),
            0.0,
        ],
        _ => panic!("bad direction chart index"),
    }
}

/// Initial Cauchy data for the chart variation fields.
fn variation_initial_data(
    metric: &LorentzMetric,
    t0: f64,
    z: &[f64],
    a: &[f64],
) -> Result<Vec<(V4, V4)>> {
    let n = metric.n();
    let mut data = Vec::with_capacity(2 * n - 1);
    match metric {
        LorentzMetric::RxS2 => {
            let (u1, u2) = s2_chart::frame(z);
            let lambda = s2_chart::lambda(z);
            let y = s2_chart::position(z);
            let jac = s2_chart::frame_jacobian(z);
            let (ca, sa) = (a[0].cos(), a[0].sin());
            for j in 0..2 {
                let u = if j == 0 { u1 } else { u2 };
                let mj0 = vec4::from_time_and_space(0.0, &[lambda * u[0], lambda * u[1], lambda * u[2]]);
                // ∇'_{z^j} θ = P_y (cos a ∂_j u1 + sin a ∂_j u2)
                let mut dth = [0.0f64; 3];
                for c in 0..3 {
                    dth[c] = ca * jac[0][j][c] + sa * jac[1][j][c];
                }
                let dot: f64 = (0..3).map(|c| dth[c] * y[c]).sum();
                for c in 0..3 {
                    dth[c] -= dot * y[c];
                }
                data.push((mj0, vec4::from_time_and_space(0.0, &dth)));
            }
            let dth_a = [
                -sa * u1[0] + ca * u2[0],
                -sa * u1[1] + ca * u2[1],
                -sa * u1[2] + ca * u2[2],
            ];
            data.push((vec4::ZERO, vec4::from_time_and_space(0.0, &dth_a)));
        }
        _ => {
            let (pos0, vel0) = chart_initial(metric, t0, z, a)?;
            let gamma = metric.christoffel(&pos0);
            let d = 1 + n;
            for j in 0..n {
                let mut mj0 = vec4::ZERO;
                mj0[1 + j] = 1.0;
                // K^μ = ∂_{z^j} θ^μ + Γ^μ_{(1+j)ν} V^ν along the z_j curve
                let mut k = d_theta_fd(metric, t0, z, a, Some(j), None)?;
                for mu in 0..d {
                    for nu in 0..d {
                        k[mu] += gamma[mu][1 + j][nu] * vel0[nu];
                    }
                }
                data.push((mj0, k));
            }
            for kk in 0..n - 1 {
                let dth = d_theta_fd(metric, t0, z, a, None, Some(kk))?;
                data.push((vec4::ZERO, dth));
            }
        }
    }
    Ok(data)
}

/// Integrates the Jacobi bundle along a record by re-running the joint
/// geodesic + Jacobi system from the record's chart data.  The geodesic
/// subsystem does not depend on the fields, so the trajectory reproduces the
/// record bit for bit.
pub fn propagate_jacobi(record: &GeodesicRecord) -> Result<JacobiBundle> {
    let metric = &record.metric;
    let n = metric.n();
    let n_var = 2 * n - 1;
    let init_data = variation_initial_data(metric, record.t_origin, &record.z, &record.a)?;

    let mut init = vec![0.0; 8 + 8 * n_var];
    init[0..4].copy_from_slice(&record.pos[0]);
    init[4..8].copy_from_slice(&record.vel[0]);
    for (f, (j0, k0)) in init_data.iter().enumerate() {
        store_field(&mut init, f, j0, k0);
    }
    let (samples, _) = integrate(metric, init, record.ell, record.n_steps(), n_var);

    // consistency guard: the embedded geodesic must match the record
    for (s, p) in samples.iter().zip(&record.pos) {
        let d: f64 = (0..4).map(|c| (s[c] - p[c]).abs()).fold(0.0, f64::max);
        if d > 1e-12 {
            return Err(Error::CurvatureEval(format!(
                "joint reintegration deviated from the record by {d}"
            )));
        }
    }

    let mut fields = Vec::with_capacity(2 * n + 1);
    for f in 0..n_var {
        let kind = if f < n {
            FieldKind::ZVariation(f)
        } else {
            FieldKind::AVariation(f - n)
        };
        let mut jv = Vec::with_capacity(samples.len());
        let mut kv = Vec::with_capacity(samples.len());
        for s in &samples {
            let (j, k) = super::geodesic::field_jk(s, f);
            jv.push(j);
            kv.push(k);
        }
        fields.push(JacobiField { kind, j: jv, k: kv });
    }
    // γ̇ (∇_s γ̇ = 0) and Γ = s·γ̇ (∇_s Γ = γ̇), both analytic
    let vel = record.vel.clone();
    fields.push(JacobiField {
        kind: FieldKind::Tangent,
        j: vel.clone(),
        k: vec![vec4::ZERO; vel.len()],
    });
    let scaled: Vec<V4> = vel
        .iter()
        .enumerate()
        .map(|(i, v)| vec4::scale(v, record.s_of(i)))
        .collect();
    fields.push(JacobiField {
        kind: FieldKind::ScaledTangent,
        j: scaled,
        k: vel,
    });

    Ok(JacobiBundle {
        record: record.clone(),
        fields,
    })
}

/// Shoots the geodesic and propagates its bundle in one call.
pub fn shoot_with_jacobi(
    metric: &LorentzMetric,
    z: &[f64],
    a: &[f64],
    ell: f64,
    n_steps: usize,
    t_origin: f64,
) -> Result<JacobiBundle> {
    let record = shoot_null_geodesic(metric, z, a, ell, n_steps, t_origin)?;
    propagate_jacobi(&record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn minkowski_fields_are_linear_in_s() {
        // M_j constant, A_k = s·(0, ∂_a θ)
        let m = LorentzMetric::minkowski(2);
        let b = shoot_with_jacobi(&m, &[0.2, -0.5], &[1.1], 2.0, 256, 0.0).unwrap();
        let mj = b.m_field(0);
        for (i, j) in mj.j.iter().enumerate() {
            assert!((j[0]).abs() < 1e-12 && (j[1] - 1.0).abs() < 1e-12, "sample {i}");
        }
        let af = b.a_field(0);
        let dth = [-(1.1f64.sin()), 1.1f64.cos()];
        for (i, j) in af.j.iter().enumerate() {
            let s = b.record.s_of(i);
            assert!((j[1] - s * dth[0]).abs() < 1e-10);
            assert!((j[2] - s * dth[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_normal_field_matches_sin() {
        // A_1 starts with (0, ∂_a θ) which is normal to the great circle:
        // ‖A_1(s)‖ = |sin s|
        let m = LorentzMetric::r_x_s2();
        let b = shoot_with_jacobi(&m, &[0.1, 0.3], &[0.8], 3.0 * std::f64::consts::PI, 4096, 0.0)
            .unwrap();
        let af = b.a_field(0);
        let mut max_err = 0.0f64;
        for (i, j) in af.j.iter().enumerate() {
            let s = b.record.s_of(i);
            let norm = (j[1] * j[1] + j[2] * j[2] + j[3] * j[3]).sqrt();
            max_err = max_err.max((norm - s.sin().abs()).abs());
        }
        assert!(max_err <= 1e-7, "‖A₁(s)‖ vs |sin s|: {max_err}");
    }

    #[test]
    fn variation_fields_match_finite_differences_of_geodesics() {
        // the defining property M_j = ∂_{z^j} γ, A_k = ∂_{a^k} γ
        let h = 1e-4;
        for (metric, t0) in [
            (LorentzMetric::einstein_de_sitter(2), 1.0),
            (LorentzMetric::r_x_s2(), 0.0),
            (
                LorentzMetric::product_static(2, |x: &[f64]| {
                    let c = 1.0 + 0.1 * (x[0] - 0.2 * x[1]).sin();
                    [[c, 0.0, 0.0], [0.0, c, 0.0], [0.0, 0.0, 0.0]]
                }),
                0.0,
            ),
        ] {
            let z = [0.15, -0.1];
            let a = [0.6];
            let ell = 2.0;
            let steps = 512;
            let b = shoot_with_jacobi(&metric, &z, &a, ell, steps, t0).unwrap();
            let probe = [steps / 3, 2 * steps / 3, steps];
            // z-variations
            for j in 0..2 {
                let mut zp = z;
                let mut zm = z;
                zp[j] += h;
                zm[j] -= h;
                let rp = shoot_null_geodesic(&metric, &zp, &a, ell, steps, t0).unwrap();
                let rm = shoot_null_geodesic(&metric, &zm, &a, ell, steps, t0).unwrap();
                for &i in &probe {
                    for c in 0..4 {
                        let fd = (rp.pos[i][c] - rm.pos[i][c]) / (2.0 * h);
                        let got = b.m_field(j).j[i][c];
                        assert!(
                            (fd - got).abs() < 2e-6,
                            "{metric:?} M_{j}[{i}][{c}]: fd {fd} vs {got}"
                        );
                    }
                }
            }
            // a-variation
            let mut ap = a;
            let mut am = a;
            ap[0] += h;
            am[0] -= h;
            let rp = shoot_null_geodesic(&metric, &z, &ap, ell, steps, t0).unwrap();
            let rm = shoot_null_geodesic(&metric, &z, &am, ell, steps, t0).unwrap();
            for &i in &probe {
                for c in 0..4 {
                    let fd = (rp.pos[i][c] - rm.pos[i][c]) / (2.0 * h);
                    let got = b.a_field(0).j[i][c];
                    assert!(
                        (fd - got).abs() < 2e-6,
                        "{metric:?} A_1[{i}][{c}]: fd {fd} vs {got}"
                    );
                }
            }
        }
    }

    #[test]
    fn wronskian_is_constant_along_the_geodesic() {
        for (metric, t0) in [
            (LorentzMetric::einstein_de_sitter(2), 1.0),
            (LorentzMetric::r_x_s2(), 0.0),
        ] {
            let b =
                shoot_with_jacobi(&metric, &[0.2, 0.1], &[0.9], 3.0 * std::f64::consts::PI, 2048, t0)
                    .unwrap();
            for f1 in 0..b.n_fields() {
                for f2 in (f1 + 1)..b.n_fields() {
                    let drift = b.wronskian_drift(f1, f2);
                    assert!(drift <= 1e-9, "{metric:?} pair ({f1},{f2}): drift {drift}");
                }
            }
        }
    }

    #[test]
    fn cauchy_data_spans_the_expected_space() {
        for (metric, t0, expected) in [
            (LorentzMetric::minkowski(2), 0.0, 5usize),
            (LorentzMetric::minkowski(3), 0.0, 7),
            (LorentzMetric::einstein_de_sitter(2), 1.0, 5),
            (LorentzMetric::r_x_s2(), 0.0, 5),
        ] {
            let n = metric.n();
            let z = vec![0.1; n];
            let a = if n == 2 { vec![0.4] } else { vec![1.3, 0.4] };
            let b = shoot_with_jacobi(&metric, &z, &a, 2.5, 512, t0).unwrap();
            for idx in [0, 200, 512] {
                assert_eq!(b.cauchy_data_rank(idx, 1e-8), expected, "{metric:?} at {idx}");
                let defect = b.derivative_orthogonality_defect(idx);
                assert!(defect < 1e-9, "{metric:?}: (J', γ̇) = {defect}");
            }
        }
    }

    #[test]
    fn flrw_tangent_norm_is_preserved_as_null() {
        let m = LorentzMetric::einstein_de_sitter(3);
        let b = shoot_with_jacobi(&m, &[0.1, 0.2, -0.1], &[1.4, 0.3], 3.0, 1024, 1.0).unwrap();
        assert!(b.record.null_defect_max() < 1e-9);
        // Wronskian of (M_1, A_1) as a spot check
        let drift = b.wronskian_drift(0, 3);
        assert!(drift < 1e-9, "drift {drift}");
    }

    #[test]
    fn static_product_initial_data_has_no_time_component() {
        // Eq-level check: for g' independent of t the covariant derivative
        // ∇_{z^j}(1, θ) stays spatial
        let metric = LorentzMetric::product_static(2, |x: &[f64]| {
            let c = 1.0 + 0.2 * (x[0] * x[1]).cos();
            [[c, 0.0, 0.0], [0.0, c, 0.0], [0.0, 0.0, 0.0]]
        });
        let data = variation_initial_data(&metric, 0.0, &[0.2, 0.3], &[0.5]).unwrap();
        for (j0, k0) in &data {
            assert!(j0[0].abs() < 1e-12);
            assert!(k0[0].abs() < 1e-9, "time slot {}", k0[0]);
        }
        // FLRW picks up a nonzero time slot through Γ⁰_{jk} θ^k
        let eds = LorentzMetric::einstein_de_sitter(2);
        let data = variation_initial_data(&eds, 1.0, &[0.2, 0.3], &[0.5]).unwrap();
        let (_, k0) = &data[0];
        assert_relative_eq!(
            k0[0],
            2.0 / 3.0 * 0.5f64.cos(),
            epsilon = 1e-9
        );
    }
}
