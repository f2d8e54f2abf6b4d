//! Discretization of the manifold of lightlike lines `(z, θ) ∈ R^n × S^{n-1}`.

use super::sphere::{self, WeightedDirection};
use crate::error::{Error, Result};

/// Uniform `z`-grid times a sphere quadrature rule.
///
/// The chart measure is `dz^n · w_θ`, the discretization of the standard
/// product measure `dz dθ`.  Sinogram values are stored direction-major so the
/// `z`-block of one direction is contiguous:
/// `offset = i_dir · nz^n + (i_z1 + nz·(i_z2 + nz·i_z3))`.
#[derive(Debug, Clone)]
pub struct RayChart {
    n: usize,
    z_extent: f64,
    nz: usize,
    directions: Vec<WeightedDirection>,
}

impl RayChart {
    /// Uniform angles on `S¹` (n = 2).
    pub fn circle(z_extent: f64, nz: usize, n_angles: usize) -> Result<Self> {
        Self::validate(z_extent, nz)?;
        if n_angles == 0 {
            return Err(Error::EmptyChart);
        }
        Ok(Self {
            n: 2,
            z_extent,
            nz,
            directions: sphere::circle_directions(n_angles),
        })
    }

    /// Gauss–Legendre polar × uniform azimuth on `S²` (n = 3).
    pub fn sphere(z_extent: f64, nz: usize, n_polar: usize, n_azimuth: usize) -> Result<Self> {
        Self::validate(z_extent, nz)?;
        if n_polar == 0 || n_azimuth == 0 {
            return Err(Error::EmptyChart);
        }
        Ok(Self {
            n: 3,
            z_extent,
            nz,
            directions: sphere::sphere_directions(n_polar, n_azimuth),
        })
    }

    fn validate(z_extent: f64, nz: usize) -> Result<()> {
        if !(z_extent > 0.0) || nz < 2 {
            return Err(Error::InvalidParam(format!(
                "chart needs z_extent > 0 and nz >= 2, got {z_extent}, {nz}"
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn z_extent(&self) -> f64 {
        self.z_extent
    }
    pub fn nz(&self) -> usize {
        self.nz
    }
    pub fn dz(&self) -> f64 {
        2.0 * self.z_extent / (self.nz - 1) as f64
    }
    pub fn directions(&self) -> &[WeightedDirection] {
        &self.directions
    }

    pub fn n_z_points(&self) -> usize {
        self.nz.pow(self.n as u32)
    }
    pub fn len(&self) -> usize {
        self.n_z_points() * self.directions.len()
    }
    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn z_coord(&self, j: usize) -> f64 {
        -self.z_extent + j as f64 * self.dz()
    }

    /// Decodes the flat z-index into per-axis indices (first axis fastest).
    pub fn z_coords_of(&self, mut iz: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.n];
        for slot in out.iter_mut() {
            *slot = iz % self.nz;
            iz /= self.nz;
        }
        out
    }

    pub fn z_point(&self, iz: usize) -> [f64; 3] {
        let idx = self.z_coords_of(iz);
        let mut z = [0.0f64; 3];
        for (k, i) in idx.iter().enumerate() {
            z[k] = self.z_coord(*i);
        }
        z
    }

    /// Chart measure of a single `(z, θ)` ray cell.
    pub fn ray_measure(&self, dir_index: usize) -> f64 {
        self.dz().powi(self.n as i32) * self.directions[dir_index].weight
    }
}

/// Values of the transform on a [`RayChart`].
#[derive(Debug, Clone)]
pub struct Sinogram {
    pub chart: RayChart,
    pub values: Vec<f64>,
}

impl Sinogram {
    pub fn zeros(chart: RayChart) -> Self {
        let values = vec![0.0; chart.len()];
        Self { chart, values }
    }

    pub fn from_fn(chart: RayChart, f: impl Fn(&[f64], &[f64]) -> f64 + Sync) -> Self {
        let mut s = Self::zeros(chart);
        let chart_ref = &s.chart;
        let n = chart_ref.n;
        let nzp = chart_ref.n_z_points();
        crate::par::for_each_indexed(&mut s.values, |idx, slot| {
            let dir = &chart_ref.directions[idx / nzp];
            let z = chart_ref.z_point(idx % nzp);
            *slot = f(&z[..n], &dir.theta[..n]);
        });
        s
    }

    #[inline]
    pub fn offset(&self, dir_index: usize, iz: usize) -> usize {
        dir_index * self.chart.n_z_points() + iz
    }

    /// Contiguous `z`-block of one direction.
    pub fn direction_block(&self, dir_index: usize) -> &[f64] {
        let nzp = self.chart.n_z_points();
        &self.values[dir_index * nzp..(dir_index + 1) * nzp]
    }

    pub fn direction_block_mut(&mut self, dir_index: usize) -> &mut [f64] {
        let nzp = self.chart.n_z_points();
        &mut self.values[dir_index * nzp..(dir_index + 1) * nzp]
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `L²` norm in the chart measure.
    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Pairing `Σ a·b · dz^n·w_θ` in the chart measure.
    pub fn dot(&self, other: &Sinogram) -> f64 {
        let nzp = self.chart.n_z_points();
        let dzn = self.chart.dz().powi(self.chart.n as i32);
        let mut acc = crate::spectral::fft::CompensatedSum::new();
        for (idx, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            let w = self.chart.directions[idx / nzp].weight;
            acc.add(a * b * w);
        }
        acc.value() * dzn
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_sums_match_sphere_area_across_resolutions() {
        for m in [16, 33, 128] {
            let c = RayChart::circle(2.0, 8, m).unwrap();
            let sum: f64 = c.directions().iter().map(|d| d.weight).sum();
            assert!((sum - 2.0 * std::f64::consts::PI).abs() < 1e-10);
        }
        for (mp, ma) in [(6, 12), (10, 20)] {
            let c = RayChart::sphere(2.0, 8, mp, ma).unwrap();
            let sum: f64 = c.directions().iter().map(|d| d.weight).sum();
            assert!((sum - 4.0 * std::f64::consts::PI).abs() < 1e-10);
        }
    }

    #[test]
    fn sinogram_layout_is_direction_major() {
        let c = RayChart::circle(1.0, 3, 4).unwrap();
        let s = Sinogram::from_fn(c, |z, th| z[0] + 10.0 * z[1] + 100.0 * th[0]);
        assert_eq!(s.values.len(), 9 * 4);
        let blk = s.direction_block(2);
        assert_eq!(blk.len(), 9);
        // direction 2 of 4 equispaced angles is (cos π, sin π) = (-1, 0)
        assert!((blk[0] - (-1.0 + 10.0 * (-1.0) + 100.0 * (-1.0))).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_charts() {
        assert!(RayChart::circle(1.0, 4, 0).is_err());
        assert!(RayChart::sphere(1.0, 4, 0, 8).is_err());
    }
}
