//! Conjugate point detection.
//!
//! A parameter pair `(s₁, s₂)` is conjugate when a nontrivial Jacobi field
//! vanishes at both.  The fields vanishing at `s₁` form an n-dimensional
//! space containing the trivial member `(s - s₁)γ̇(s)`; a genuine conjugate
//! parameter is where the values of the nontrivial members fall into the
//! line `R·γ̇`.  That degeneracy is monitored by the determinant
//!
//! `D(s) = det[ V_1(s), …, V_{n-1}(s), γ̇(s), w(s) (, ν(s)) ]`
//!
//! whose extra columns span the complement of `γ̇(s)^⊥`: `w` is the
//! euclidean normal of `γ̇^⊥` (the lowered tangent covector) and, for the
//! ambient `S²` representation, `ν` the sphere normal.  Zero crossings of
//! `D` are refined by bisection on a local cubic fit.

use super::jacobi::JacobiBundle;
use super::metric::LorentzMetric;
use super::vec4::{self, V4};
use crate::error::Result;

/// Bisection tolerance for the conjugate parameter.
pub const TOL_CONJ: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ConjugatePoint {
    pub s1: f64,
    pub s2: f64,
    /// Derivative `∇_s J(s₁)` of the vanishing field, normalized to unit
    /// euclidean length.
    pub jprime_s1: V4,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ConjugateReport {
    pub pairs: Vec<ConjugatePoint>,
}

/// A basis (in bundle-coefficient space) of the Jacobi fields vanishing at
/// `s₁`, split into the trivial direction `(s-s₁)γ̇ = Γ - s₁·γ̇` and
/// `n - 1` nontrivial combinations orthogonal to it.
fn vanishing_basis(bundle: &JacobiBundle, idx1: usize) -> Vec<Vec<f64>> {
    let nf = bundle.n_fields();
    let n = bundle.record.metric.n();
    let s1 = bundle.record.s_of(idx1);
    // values matrix at s₁ (4 × nf); its null space has dimension n
    let mut m = nalgebra::DMatrix::zeros(4, nf);
    for (c, f) in bundle.fields.iter().enumerate() {
        for r in 0..4 {
            m[(r, c)] = f.j[idx1][r];
        }
    }
    let svd = nalgebra::SVD::new(m, false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.max();
    let mut null: Vec<Vec<f64>> = Vec::new();
    for r in 0..vt.nrows() {
        let sv = if r < svd.singular_values.len() {
            svd.singular_values[r]
        } else {
            0.0
        };
        if sv <= 1e-10 * smax {
            null.push(vt.row(r).iter().copied().collect());
        }
    }
    debug_assert_eq!(null.len(), n, "null space of the value matrix");
    // trivial direction in coefficient space: Γ - s₁·γ̇
    let mut trivial = vec![0.0; nf];
    trivial[nf - 1] = 1.0;
    trivial[nf - 2] = -s1;
    let tn = trivial.iter().map(|c| c * c).sum::<f64>().sqrt();
    for c in trivial.iter_mut() {
        *c /= tn;
    }
    // project the trivial direction out of the null space and re-orthonormalize
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for cand in null {
        let mut v = cand;
        let dot: f64 = v.iter().zip(&trivial).map(|(a, b)| a * b).sum();
        for (vi, ti) in v.iter_mut().zip(&trivial) {
            *vi -= dot * ti;
        }
        for prev in &basis {
            let d: f64 = v.iter().zip(prev).map(|(a, b)| a * b).sum();
            for (vi, pi) in v.iter_mut().zip(prev) {
                *vi -= d * pi;
            }
        }
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for c in v.iter_mut() {
                *c /= norm;
            }
            basis.push(v);
        }
    }
    debug_assert_eq!(basis.len(), n - 1, "nontrivial vanishing fields");
    basis
}

fn combo_value(bundle: &JacobiBundle, coeffs: &[f64], idx: usize) -> V4 {
    let mut v = vec4::ZERO;
    for (c, f) in coeffs.iter().zip(&bundle.fields) {
        vec4::axpy(&mut v, *c, &f.j[idx]);
    }
    v
}

/// Catmull-Rom interpolation of a combo field's value at parameter `s`.
fn combo_value_at(bundle: &JacobiBundle, coeffs: &[f64], s: f64) -> V4 {
    let rec = &bundle.record;
    let h = rec.step_h();
    let u = (s / h).clamp(0.0, (rec.pos.len() - 1) as f64);
    let i1 = (u.floor() as usize).clamp(1, rec.pos.len() - 3);
    let f = u - i1 as f64;
    let p: Vec<V4> = (0..4)
        .map(|k| combo_value(bundle, coeffs, i1 - 1 + k))
        .collect();
    let mut out = vec4::ZERO;
    let w = [
        0.5 * (-f + 2.0 * f * f - f * f * f),
        0.5 * (2.0 - 5.0 * f * f + 3.0 * f * f * f),
        0.5 * (f + 4.0 * f * f - 3.0 * f * f * f),
        0.5 * (-f * f + f * f * f),
    ];
    for (k, pk) in p.iter().enumerate() {
        vec4::axpy(&mut out, w[k], pk);
    }
    out
}

/// Catmull-Rom interpolation of the record velocity at parameter `s`.
fn velocity_at(bundle: &JacobiBundle, s: f64) -> V4 {
    let rec = &bundle.record;
    let h = rec.step_h();
    let u = (s / h).clamp(0.0, (rec.pos.len() - 1) as f64);
    let i1 = (u.floor() as usize).clamp(1, rec.pos.len() - 3);
    let f = u - i1 as f64;
    let w = [
        0.5 * (-f + 2.0 * f * f - f * f * f),
        0.5 * (2.0 - 5.0 * f * f + 3.0 * f * f * f),
        0.5 * (f + 4.0 * f * f - 3.0 * f * f * f),
        0.5 * (-f * f + f * f * f),
    ];
    let mut out = vec4::ZERO;
    for k in 0..4 {
        vec4::axpy(&mut out, w[k], &rec.vel[i1 - 1 + k]);
    }
    out
}

fn combo_derivative(bundle: &JacobiBundle, coeffs: &[f64], idx: usize) -> V4 {
    let mut v = vec4::ZERO;
    for (c, f) in coeffs.iter().zip(&bundle.fields) {
        vec4::axpy(&mut v, *c, &f.k[idx]);
    }
    v
}

/// Euclidean normal of `γ̇(s)^⊥`: the lowered covector `g(γ̇, ·)` in
/// component form.
fn lowered_tangent(metric: &LorentzMetric, pos: &V4, vel: &V4) -> V4 {
    match metric {
        LorentzMetric::Minkowski { .. } | LorentzMetric::RxS2 => {
            [-vel[0], vel[1], vel[2], vel[3]]
        }
        LorentzMetric::Flrw { a, .. } => {
            let a2 = a(pos[0]).powi(2);
            [-vel[0], a2 * vel[1], a2 * vel[2], a2 * vel[3]]
        }
        LorentzMetric::Product { n, spatial, .. } => {
            let gp = spatial(pos[0], &pos[1..1 + n]);
            let mut w = [-vel[0], 0.0, 0.0, 0.0];
            for i in 0..*n {
                for j in 0..*n {
                    w[1 + i] += gp[i][j] * vel[1 + j];
                }
            }
            w
        }
    }
}

/// The degeneracy determinant at a sample.
fn degeneracy_det(bundle: &JacobiBundle, basis: &[Vec<f64>], idx: usize) -> f64 {
    let rec = &bundle.record;
    let metric = &rec.metric;
    let pos = &rec.pos[idx];
    let vel = &rec.vel[idx];
    let w = lowered_tangent(metric, pos, vel);
    let mut cols: Vec<V4> = basis
        .iter()
        .map(|c| combo_value(bundle, c, idx))
        .collect();
    cols.push(*vel);
    cols.push(w);
    match metric {
        LorentzMetric::RxS2 => {
            // ambient representation: add the sphere normal to span R⁴
            cols.push([0.0, pos[1], pos[2], pos[3]]);
            let m = nalgebra::Matrix4::from_fn(|r, c| cols[c][r]);
            m.determinant()
        }
        _ => {
            let d = 1 + metric.n();
            if d == 3 {
                let m = nalgebra::Matrix3::from_fn(|r, c| cols[c][r]);
                m.determinant()
            } else {
                let m = nalgebra::Matrix4::from_fn(|r, c| cols[c][r]);
                m.determinant()
            }
        }
    }
}

/// Scans the record for parameters conjugate to `s₁` (given as a sample
/// index via [`GeodesicRecord::index_of`](super::geodesic::GeodesicRecord::index_of)).
///
/// An empty report means no conjugate points on `(0, ℓ]`.
pub fn detect_conjugate(bundle: &JacobiBundle, idx1: usize) -> Result<ConjugateReport> {
    let rec = &bundle.record;
    let n_samples = rec.pos.len();
    let s1 = rec.s_of(idx1);
    let basis = vanishing_basis(bundle, idx1);

    let dets: Vec<f64> = (0..n_samples)
        .map(|i| degeneracy_det(bundle, &basis, i))
        .collect();
    let scale = dets.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut report = ConjugateReport::default();
    if scale == 0.0 {
        return Ok(report);
    }
    let h = rec.step_h();
    let noise = 1e-9 * scale;
    let mut i = 0usize;
    while i + 1 < n_samples {
        // skip the trivial root at s = s₁ (D vanishes there by construction)
        let near_s1 = (rec.s_of(i) - s1).abs() < 2.0 * h;
        if !near_s1 && dets[i] * dets[i + 1] < 0.0 && dets[i].abs().max(dets[i + 1].abs()) > noise
        {
            let s2 = refine_root(rec.s_of(i), h, &dets, i);
            // reconstruct the vanishing combination at the crossing
            let coeffs = vanishing_combination(bundle, &basis, s2);
            let mut jp = combo_derivative(bundle, &coeffs, idx1);
            let norm = vec4::enorm(&jp);
            if norm > 0.0 {
                jp = vec4::scale(&jp, 1.0 / norm);
            }
            let multiplicity = value_rank_deficiency(bundle, &basis, s2);
            report.pairs.push(ConjugatePoint {
                s1,
                s2,
                jprime_s1: jp,
                multiplicity,
            });
            i += 2;
        } else {
            i += 1;
        }
    }
    Ok(report)
}

/// Root of the local cubic through 4 determinant samples around the crossing
/// `(i, i+1)`, bisected to [`TOL_CONJ`].
fn refine_root(s_i: f64, h: f64, dets: &[f64], i: usize) -> f64 {
    let i0 = i.saturating_sub(1).min(dets.len() - 4);
    let xs: Vec<f64> = (0..4).map(|k| (i0 + k) as f64).collect();
    let ys = &dets[i0..i0 + 4];
    let eval = |x: f64| -> f64 {
        // Lagrange cubic
        let mut acc = 0.0;
        for a in 0..4 {
            let mut l = ys[a];
            for b in 0..4 {
                if a != b {
                    l *= (x - xs[b]) / (xs[a] - xs[b]);
                }
            }
            acc += l;
        }
        acc
    };
    let mut lo = i as f64;
    let mut hi = i as f64 + 1.0;
    let mut flo = eval(lo);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let fm = eval(mid);
        if (hi - lo) * h < TOL_CONJ {
            break;
        }
        if flo * fm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    let root_index = 0.5 * (lo + hi);
    s_i + (root_index - i as f64) * h
}

/// Null combination of the nontrivial basis plus `γ̇` at the conjugate
/// parameter (interpolated), mapped back to full bundle coefficients.
fn vanishing_combination(bundle: &JacobiBundle, basis: &[Vec<f64>], s2: f64) -> Vec<f64> {
    let nf = bundle.n_fields();
    let cols = basis.len() + 1;
    let mut m = nalgebra::DMatrix::zeros(4, cols);
    for (c, coeffs) in basis.iter().enumerate() {
        let v = combo_value_at(bundle, coeffs, s2);
        for r in 0..4 {
            m[(r, c)] = v[r];
        }
    }
    let vel = velocity_at(bundle, s2);
    for r in 0..4 {
        m[(r, cols - 1)] = vel[r];
    }
    let svd = nalgebra::SVD::new(m, false, true);
    let vt = svd.v_t.unwrap();
    let null_row = vt.row(vt.nrows() - 1);
    // combination Σ c_b·basis_b + c_γ̇·γ̇; the γ̇ part only shifts within the
    // trivial family, so keep the basis part
    let mut out = vec![0.0; nf];
    for (b, coeffs) in basis.iter().enumerate() {
        for (o, c) in out.iter_mut().zip(coeffs) {
            *o += null_row[b] * c;
        }
    }
    out
}

fn value_rank_deficiency(bundle: &JacobiBundle, basis: &[Vec<f64>], s2: f64) -> usize {
    let cols = basis.len() + 1;
    let mut m = nalgebra::DMatrix::zeros(4, cols);
    for (c, coeffs) in basis.iter().enumerate() {
        let v = combo_value_at(bundle, coeffs, s2);
        for r in 0..4 {
            m[(r, c)] = v[r];
        }
    }
    let vel = velocity_at(bundle, s2);
    for r in 0..4 {
        m[(r, cols - 1)] = vel[r];
    }
    let svd = m.svd(false, false);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-6 * smax)
        .count();
    cols - rank
}
