//! Lorentzian metric plug-ins of product form `g = -dt² + g'`.
//!
//! Four built-ins: flat Minkowski space, spatially flat FLRW cosmologies
//! `-dt² + a²(t)dx²` (Einstein–de Sitter is `a(t) = t^{2/3}`), general static
//! or time-dependent product metrics given by a user closure (Christoffel
//! symbols by central finite differences, step [`H_FD`]), and the cylinder
//! `R × S²`.
//!
//! `R × S²` is special: chart points live in a stereographic patch, but
//! geodesics and Jacobi fields are integrated in the ambient `R³` embedding
//! with tangent-plane projections, which sidesteps chart transitions near the
//! antipode where the interesting dynamics happen.

use super::vec4::{self, V4};
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Finite-difference step for user-supplied metrics.
pub const H_FD: f64 = 1e-5;

type SpatialMetricFn = dyn Fn(f64, &[f64]) -> [[f64; 3]; 3] + Send + Sync;
type ScaleFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum LorentzMetric {
    Minkowski {
        n: usize,
    },
    /// `-dt² + a²(t) dx²` with analytic `a, a', a''`.
    Flrw {
        n: usize,
        a: Arc<ScaleFn>,
        a_d1: Arc<ScaleFn>,
        a_d2: Arc<ScaleFn>,
    },
    /// `-dt² + g'(t,x)`; `time_dependent = false` marks `g' = g'(x)`.
    Product {
        n: usize,
        spatial: Arc<SpatialMetricFn>,
        time_dependent: bool,
    },
    /// Product of the time line with the unit sphere, ambient embedding.
    RxS2,
}

impl fmt::Debug for LorentzMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LorentzMetric::Minkowski { n } => write!(f, "Minkowski(n={n})"),
            LorentzMetric::Flrw { n, .. } => write!(f, "FLRW(n={n})"),
            LorentzMetric::Product { n, time_dependent, .. } => {
                write!(f, "Product(n={n}, time_dependent={time_dependent})")
            }
            LorentzMetric::RxS2 => write!(f, "RxS2"),
        }
    }
}

impl LorentzMetric {
    pub fn minkowski(n: usize) -> Self {
        LorentzMetric::Minkowski { n }
    }

    pub fn flrw(
        n: usize,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        a_d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        a_d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        LorentzMetric::Flrw {
            n,
            a: Arc::new(a),
            a_d1: Arc::new(a_d1),
            a_d2: Arc::new(a_d2),
        }
    }

    /// Einstein–de Sitter scale factor `a(t) = t^{2/3}`, valid for `t > 0`;
    /// charts should keep `t` bounded away from the big-bang time.
    pub fn einstein_de_sitter(n: usize) -> Self {
        Self::flrw(
            n,
            |t| t.powf(2.0 / 3.0),
            |t| 2.0 / 3.0 * t.powf(-1.0 / 3.0),
            |t| -2.0 / 9.0 * t.powf(-4.0 / 3.0),
        )
    }

    pub fn product_static(
        n: usize,
        spatial: impl Fn(&[f64]) -> [[f64; 3]; 3] + Send + Sync + 'static,
    ) -> Self {
        LorentzMetric::Product {
            n,
            spatial: Arc::new(move |_t, x| spatial(x)),
            time_dependent: false,
        }
    }

    pub fn product_general(
        n: usize,
        spatial: impl Fn(f64, &[f64]) -> [[f64; 3]; 3] + Send + Sync + 'static,
    ) -> Self {
        LorentzMetric::Product {
            n,
            spatial: Arc::new(spatial),
            time_dependent: true,
        }
    }

    pub fn r_x_s2() -> Self {
        LorentzMetric::RxS2
    }

    /// Spatial dimension of the manifold (2 for `R × S²`).
    pub fn n(&self) -> usize {
        match self {
            LorentzMetric::Minkowski { n }
            | LorentzMetric::Flrw { n, .. }
            | LorentzMetric::Product { n, .. } => *n,
            LorentzMetric::RxS2 => 2,
        }
    }

    /// Number of spatial slots in the vector representation.
    pub fn rep_dim(&self) -> usize {
        match self {
            LorentzMetric::RxS2 => 3,
            other => other.n(),
        }
    }

    pub fn is_coordinate(&self) -> bool {
        !matches!(self, LorentzMetric::RxS2)
    }

    /// Full metric pairing `g(v, w)` at `point`.
    pub fn inner(&self, point: &V4, v: &V4, w: &V4) -> f64 {
        match self {
            LorentzMetric::Minkowski { .. } | LorentzMetric::RxS2 => {
                -v[0] * w[0] + vec4::sdot(v, w)
            }
            LorentzMetric::Flrw { a, .. } => {
                let a2 = a(point[0]).powi(2);
                -v[0] * w[0] + a2 * vec4::sdot(v, w)
            }
            LorentzMetric::Product { n, spatial, .. } => {
                let gp = spatial(point[0], &point[1..1 + n]);
                let mut s = -v[0] * w[0];
                for i in 0..*n {
                    for j in 0..*n {
                        s += gp[i][j] * v[1 + i] * w[1 + j];
                    }
                }
                s
            }
        }
    }

    /// `g'(t0, z)` as an `n × n` matrix in chart coordinates (the metric `h`
    /// of the initial hypersurface when `t0` is the chart time).
    pub fn spatial_metric_chart(&self, t0: f64, z: &[f64]) -> [[f64; 3]; 3] {
        let n = self.n();
        let mut h = [[0.0; 3]; 3];
        match self {
            LorentzMetric::Minkowski { .. } => {
                for (i, row) in h.iter_mut().enumerate().take(n) {
                    row[i] = 1.0;
                }
            }
            LorentzMetric::Flrw { a, .. } => {
                let a2 = a(t0).powi(2);
                for (i, row) in h.iter_mut().enumerate().take(n) {
                    row[i] = a2;
                }
            }
            LorentzMetric::Product { spatial, .. } => {
                h = spatial(t0, z);
            }
            LorentzMetric::RxS2 => {
                // stereographic pullback of the round metric: conformal
                let lambda = 2.0 / (1.0 + z[0] * z[0] + z[1] * z[1]);
                h[0][0] = lambda * lambda;
                h[1][1] = lambda * lambda;
            }
        }
        h
    }

    /// Christoffel symbols `Γ^μ_{αβ}` at `point`, coordinate metrics only.
    pub fn christoffel(&self, point: &V4) -> [[[f64; 4]; 4]; 4] {
        let n = self.n();
        let d = 1 + n;
        let mut gamma = [[[0.0; 4]; 4]; 4];
        match self {
            LorentzMetric::Minkowski { .. } => {}
            LorentzMetric::Flrw { a, a_d1, .. } => {
                let av = a(point[0]);
                let ad = a_d1(point[0]);
                for i in 1..d {
                    gamma[0][i][i] = av * ad;
                    gamma[i][0][i] = ad / av;
                    gamma[i][i][0] = ad / av;
                }
            }
            LorentzMetric::Product { .. } => {
                gamma = self.christoffel_fd(point);
            }
            LorentzMetric::RxS2 => panic!("R×S² integrates in the ambient embedding"),
        }
        gamma
    }

    /// Central finite-difference Christoffels from the metric closure.
    fn christoffel_fd(&self, point: &V4) -> [[[f64; 4]; 4]; 4] {
        let n = self.n();
        let d = 1 + n;
        let g_at = |p: &V4| -> [[f64; 4]; 4] {
            let mut g = [[0.0; 4]; 4];
            g[0][0] = -1.0;
            if let LorentzMetric::Product { spatial, .. } = self {
                let gp = spatial(p[0], &p[1..1 + n]);
                for i in 0..n {
                    for j in 0..n {
                        g[1 + i][1 + j] = gp[i][j];
                    }
                }
            }
            g
        };
        // ∂_μ g at point
        let mut dg = [[[0.0; 4]; 4]; 4];
        let time_dependent = matches!(
            self,
            LorentzMetric::Product { time_dependent: true, .. }
        );
        for mu in 0..d {
            if mu == 0 && !time_dependent {
                continue;
            }
            let mut pp = *point;
            let mut pm = *point;
            pp[mu] += H_FD;
            pm[mu] -= H_FD;
            let gp = g_at(&pp);
            let gm = g_at(&pm);
            for i in 0..d {
                for j in 0..d {
                    dg[mu][i][j] = (gp[i][j] - gm[i][j]) / (2.0 * H_FD);
                }
            }
        }
        let g0 = g_at(point);
        let ginv = invert_spd_block(&g0, d);
        let mut gamma = [[[0.0; 4]; 4]; 4];
        for mu in 0..d {
            for al in 0..d {
                for be in 0..d {
                    let mut s = 0.0;
                    for nu in 0..d {
                        s += ginv[mu][nu] * (dg[al][nu][be] + dg[be][nu][al] - dg[nu][al][be]);
                    }
                    gamma[mu][al][be] = 0.5 * s;
                }
            }
        }
        gamma
    }

    /// `∂_ν Γ^μ_{αβ}` at `point`: analytic for FLRW and Minkowski, nested
    /// finite differences for user metrics (documented accuracy downgrade).
    pub fn christoffel_jacobian(&self, point: &V4) -> [[[[f64; 4]; 4]; 4]; 4] {
        let n = self.n();
        let d = 1 + n;
        let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
        match self {
            LorentzMetric::Minkowski { .. } => {}
            LorentzMetric::Flrw { a, a_d1, a_d2, .. } => {
                let av = a(point[0]);
                let ad = a_d1(point[0]);
                let add = a_d2(point[0]);
                for i in 1..d {
                    dgamma[0][0][i][i] = ad * ad + av * add;
                    let dlog = (add * av - ad * ad) / (av * av);
                    dgamma[0][i][0][i] = dlog;
                    dgamma[0][i][i][0] = dlog;
                }
            }
            LorentzMetric::Product { .. } => {
                let h = 10.0 * H_FD;
                for nu in 0..d {
                    let mut pp = *point;
                    let mut pm = *point;
                    pp[nu] += h;
                    pm[nu] -= h;
                    let gp = self.christoffel_fd(&pp);
                    let gm = self.christoffel_fd(&pm);
                    for mu in 0..d {
                        for al in 0..d {
                            for be in 0..d {
                                dgamma[nu][mu][al][be] =
                                    (gp[mu][al][be] - gm[mu][al][be]) / (2.0 * h);
                            }
                        }
                    }
                }
            }
            LorentzMetric::RxS2 => panic!("R×S² integrates in the ambient embedding"),
        }
        dgamma
    }

    /// `R(J, v)v` by the curvature formula
    /// `R^μ_{σαβ} = ∂_α Γ^μ_{βσ} - ∂_β Γ^μ_{ασ} + Γ^μ_{αλ}Γ^λ_{βσ} - Γ^μ_{βλ}Γ^λ_{ασ}`
    /// contracted with `J^α v^β v^σ`.
    pub fn riemann_term(
        &self,
        gamma: &[[[f64; 4]; 4]; 4],
        dgamma: &[[[[f64; 4]; 4]; 4]; 4],
        j: &V4,
        v: &V4,
    ) -> V4 {
        let d = 1 + self.n();
        let mut out = vec4::ZERO;
        for mu in 0..d {
            let mut acc = 0.0;
            for sg in 0..d {
                for al in 0..d {
                    for be in 0..d {
                        let w = j[al] * v[be] * v[sg];
                        if w == 0.0 {
                            continue;
                        }
                        let mut r = dgamma[al][mu][be][sg] - dgamma[be][mu][al][sg];
                        for la in 0..d {
                            r += gamma[mu][al][la] * gamma[la][be][sg]
                                - gamma[mu][be][la] * gamma[la][al][sg];
                        }
                        acc += r * w;
                    }
                }
            }
            out[mu] = acc;
        }
        out
    }

    /// Verifies the `(-,+,…,+)` signature at a sample point by an eigenvalue
    /// check of the metric matrix.
    pub fn signature_ok(&self, point: &V4) -> bool {
        match self {
            LorentzMetric::RxS2 => true,
            _ => {
                let n = self.n();
                let d = 1 + n;
                let mut g = nalgebra::DMatrix::zeros(d, d);
                g[(0, 0)] = -1.0;
                let h = self.spatial_metric_chart(point[0], &point[1..1 + n]);
                for i in 0..n {
                    for j in 0..n {
                        g[(1 + i, 1 + j)] = h[i][j];
                    }
                }
                let eig = nalgebra::SymmetricEigen::new(g);
                let neg = eig.eigenvalues.iter().filter(|&&l| l < 0.0).count();
                let pos = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
                neg == 1 && pos == n
            }
        }
    }
}

/// Inverse of the (1+n)-block of a product metric matrix: the time block is
/// `-1` and the spatial block is symmetric positive definite.
fn invert_spd_block(g: &[[f64; 4]; 4], d: usize) -> [[f64; 4]; 4] {
    let n = d - 1;
    let mut m = nalgebra::DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = g[1 + i][1 + j];
        }
    }
    let minv = m.try_inverse().expect("spatial metric must be invertible");
    let mut out = [[0.0; 4]; 4];
    out[0][0] = -1.0;
    for i in 0..n {
        for j in 0..n {
            out[1 + i][1 + j] = minv[(i, j)];
        }
    }
    out
}

// ---------------------------------------------------------------------------
// chart maps: (z, a) ↦ (spatial point, initial direction θ(z,a))
// ---------------------------------------------------------------------------

/// Stereographic chart of `S²` from the south pole: `z = 0` is the north
/// pole, and the patch covers everything but the south pole itself.
pub mod s2_chart {
    /// Chart point to ambient unit vector.
    pub fn position(z: &[f64]) -> [f64; 3] {
        let rho = z[0] * z[0] + z[1] * z[1];
        let d = 1.0 + rho;
        [2.0 * z[0] / d, 2.0 * z[1] / d, (1.0 - rho) / d]
    }

    /// Orthonormal tangent frame `u1, u2` at `position(z)` (the normalized
    /// coordinate directions; stereographic coordinates are conformal).
    pub fn frame(z: &[f64]) -> ([f64; 3], [f64; 3]) {
        let d = 1.0 + z[0] * z[0] + z[1] * z[1];
        (
            [
                (1.0 + z[1] * z[1] - z[0] * z[0]) / d,
                -2.0 * z[0] * z[1] / d,
                -2.0 * z[0] / d,
            ],
            [
                -2.0 * z[0] * z[1] / d,
                (1.0 + z[0] * z[0] - z[1] * z[1]) / d,
                -2.0 * z[1] / d,
            ],
        )
    }

    /// Conformal factor: `∂y/∂z_j = λ(z)·u_j(z)` with `λ = 2/(1+|z|²)`.
    pub fn lambda(z: &[f64]) -> f64 {
        2.0 / (1.0 + z[0] * z[0] + z[1] * z[1])
    }

    /// Unit tangent `θ(z, a) = cos a·u1 + sin a·u2`.
    pub fn theta(z: &[f64], a: f64) -> [f64; 3] {
        let (u1, u2) = frame(z);
        let (c, s) = (a.cos(), a.sin());
        [
            c * u1[0] + s * u2[0],
            c * u1[1] + s * u2[1],
            c * u1[2] + s * u2[2],
        ]
    }

    /// Ambient partials `∂u_i/∂z_j` of the frame.
    pub fn frame_jacobian(z: &[f64]) -> [[[f64; 3]; 2]; 2] {
        let (z1, z2) = (z[0], z[1]);
        let dd = 1.0 + z1 * z1 + z2 * z2;
        let num1 = [1.0 + z2 * z2 - z1 * z1, -2.0 * z1 * z2, -2.0 * z1];
        let num2 = [-2.0 * z1 * z2, 1.0 + z1 * z1 - z2 * z2, -2.0 * z2];
        let dnum1 = [
            [-2.0 * z1, -2.0 * z2, -2.0],
            [2.0 * z2, -2.0 * z1, 0.0],
        ];
        let dnum2 = [
            [-2.0 * z2, 2.0 * z1, 0.0],
            [-2.0 * z1, -2.0 * z2, -2.0],
        ];
        let mut out = [[[0.0; 3]; 2]; 2];
        for j in 0..2 {
            let dd_j = 2.0 * z[j];
            for c in 0..3 {
                out[0][j][c] = dnum1[j][c] / dd - num1[c] * dd_j / (dd * dd);
                out[1][j][c] = dnum2[j][c] / dd - num2[c] * dd_j / (dd * dd);
            }
        }
        out
    }
}

/// Initial data of the chart: spatial position in representation slots and
/// the direction `θ(z, a)`, unit with respect to `h = g'(t0, ·)`.
pub fn chart_initial(metric: &LorentzMetric, t0: f64, z: &[f64], a: &[f64]) -> Result<(V4, V4)> {
    let n = metric.n();
    if z.len() != n || a.len() != n - 1 {
        return Err(Error::InvalidParam(format!(
            "chart point needs {} z components and {} a components",
            n,
            n - 1
        )));
    }
    match metric {
        LorentzMetric::RxS2 => {
            let y = s2_chart::position(z);
            let th = s2_chart::theta(z, a[0]);
            Ok((
                vec4::from_time_and_space(t0, &y),
                vec4::from_time_and_space(1.0, &th),
            ))
        }
        _ => {
            let u = euclid_direction(n, a);
            let h = metric.spatial_metric_chart(t0, z);
            let mut norm2 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    norm2 += h[i][j] * u[i] * u[j];
                }
            }
            let scale = 1.0 / norm2.sqrt();
            let th: Vec<f64> = u[..n].iter().map(|c| c * scale).collect();
            Ok((
                vec4::from_time_and_space(t0, z),
                vec4::from_time_and_space(1.0, &th),
            ))
        }
    }
}

/// Unit euclidean direction from the angle chart: `n = 2` uses the angle
/// `a₀`, `n = 3` uses polar/azimuth `(a₀, a₁)` (keep `a₀` away from `0, π`).
pub fn euclid_direction(n: usize, a: &[f64]) -> [f64; 3] {
    match n {
        2 => [a[0].cos(), a[0].sin(), 0.0],
        3 => [
            a[0].sin() * a[1].cos(),
            a[0].sin() * a[1].sin(),
            a[0].cos(),
        ],
        _ => panic!("unsupported dimension"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn signature_holds_for_the_builtins() {
        let p = vec4::from_time_and_space(1.3, &[0.2, -0.4]);
        assert!(LorentzMetric::minkowski(2).signature_ok(&p));
        assert!(LorentzMetric::einstein_de_sitter(2).signature_ok(&p));
        let prod = LorentzMetric::product_static(2, |x| {
            let c = 1.0 / (1.0 + 0.1 * (x[0] * x[0] + x[1] * x[1]));
            [[c, 0.0, 0.0], [0.0, c, 0.0], [0.0, 0.0, 0.0]]
        });
        assert!(prod.signature_ok(&p));
    }

    #[test]
    fn chart_directions_are_h_unit_and_null() {
        for metric in [
            LorentzMetric::minkowski(2),
            LorentzMetric::einstein_de_sitter(2),
            LorentzMetric::r_x_s2(),
        ] {
            let (p, v) = chart_initial(&metric, 2.0, &[0.3, -0.2], &[0.7]).unwrap();
            let g = metric.inner(&p, &v, &v);
            assert!(g.abs() < 1e-14, "{metric:?}: g(v,v) = {g}");
        }
        let m3 = LorentzMetric::minkowski(3);
        let (p, v) = chart_initial(&m3, 0.0, &[0.0, 0.0, 0.0], &[1.2, 0.4]).unwrap();
        assert!(m3.inner(&p, &v, &v).abs() < 1e-14);
    }

    #[test]
    fn flrw_christoffels_match_finite_differences_of_the_metric() {
        let aeds = LorentzMetric::einstein_de_sitter(2);
        // same g' expressed as a user metric with FD Christoffels
        let prod = LorentzMetric::product_general(2, |t: f64, _x: &[f64]| {
            let a2 = t.powf(4.0 / 3.0);
            [[a2, 0.0, 0.0], [0.0, a2, 0.0], [0.0, 0.0, 0.0]]
        });
        let p = vec4::from_time_and_space(2.0, &[0.3, 0.1]);
        let ga = aeds.christoffel(&p);
        let gf = prod.christoffel(&p);
        for mu in 0..3 {
            for al in 0..3 {
                for be in 0..3 {
                    assert_relative_eq!(
                        ga[mu][al][be],
                        gf[mu][al][be],
                        epsilon = 1e-8,
                        max_relative = 1e-6
                    );
                }
            }
        }
    }

    #[test]
    fn stereographic_chart_is_consistent() {
        let z = [0.37, -0.81];
        let y = s2_chart::position(&z);
        assert_relative_eq!(y.iter().map(|c| c * c).sum::<f64>(), 1.0, epsilon = 1e-15);
        let (u1, u2) = s2_chart::frame(&z);
        // orthonormal tangent frame
        let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        assert_relative_eq!(dot(&u1, &u1), 1.0, epsilon = 1e-14);
        assert_relative_eq!(dot(&u2, &u2), 1.0, epsilon = 1e-14);
        assert!(dot(&u1, &u2).abs() < 1e-14);
        assert!(dot(&u1, &y).abs() < 1e-14);
        assert!(dot(&u2, &y).abs() < 1e-14);
        // frame jacobian against finite differences
        let jac = s2_chart::frame_jacobian(&z);
        let h = 1e-6;
        for j in 0..2 {
            let mut zp = z;
            let mut zm = z;
            zp[j] += h;
            zm[j] -= h;
            let (p1, p2) = s2_chart::frame(&zp);
            let (m1, m2) = s2_chart::frame(&zm);
            for c in 0..3 {
                assert_relative_eq!(jac[0][j][c], (p1[c] - m1[c]) / (2.0 * h), epsilon = 1e-8);
                assert_relative_eq!(jac[1][j][c], (p2[c] - m2[c]) / (2.0 * h), epsilon = 1e-8);
            }
        }
        // ∂y/∂z_j = λ u_j
        let lam = s2_chart::lambda(&z);
        for j in 0..2 {
            let mut zp = z;
            let mut zm = z;
            zp[j] += h;
            zm[j] -= h;
            let yp = s2_chart::position(&zp);
            let ym = s2_chart::position(&zm);
            let u = if j == 0 { u1 } else { u2 };
            for c in 0..3 {
                assert_relative_eq!((yp[c] - ym[c]) / (2.0 * h), lam * u[c], epsilon = 1e-8);
            }
        }
    }
}
