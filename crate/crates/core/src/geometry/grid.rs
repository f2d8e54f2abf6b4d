//! Uniform spacetime grids and sampled scalar fields.

use crate::error::{Error, Result};

/// Hard cap on grid point counts so index arithmetic stays in `usize` with
/// plenty of headroom; checked at construction.
const MAX_POINTS: u128 = 1 << 31;

/// A uniform grid on the spacetime box `[-T, T] × [-R, R]^n`, `n ∈ {2, 3}`.
///
/// Grid points are `t_i = -T + i·dt`, `x_j = -R + j·dx` with
/// `dt = 2T/(nt-1)`, `dx = 2R/(nx-1)`, so the box boundary is sampled.
///
/// Sampled values are stored flat with the time index fastest varying:
/// `offset = i_t + nt·(i_x1 + nx·(i_x2 + nx·i_x3))`.  This order is part of
/// the on-disk format and must not change.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeGrid {
    n: usize,
    t_extent: f64,
    x_extent: f64,
    nt: usize,
    nx: usize,
}

impl SpacetimeGrid {
    pub fn new(n: usize, t_extent: f64, x_extent: f64, nt: usize, nx: usize) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::InvalidParam(format!(
                "spatial dimension must be 2 or 3, got {n}"
            )));
        }
        if nt < 2 || nx < 2 {
            return Err(Error::InvalidParam(format!(
                "need at least 2 samples per axis, got nt={nt} nx={nx}"
            )));
        }
        if !(t_extent > 0.0) || !(x_extent > 0.0) {
            return Err(Error::InvalidParam(format!(
                "extents must be positive, got T={t_extent} R={x_extent}"
            )));
        }
        let points = nt as u128 * (nx as u128).pow(n as u32);
        if points > MAX_POINTS {
            return Err(Error::GridTooLarge {
                points,
                limit: MAX_POINTS,
            });
        }
        Ok(Self {
            n,
            t_extent,
            x_extent,
            nt,
            nx,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn t_extent(&self) -> f64 {
        self.t_extent
    }
    pub fn x_extent(&self) -> f64 {
        self.x_extent
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.t_extent / (self.nt - 1) as f64
    }
    pub fn dx(&self) -> f64 {
        2.0 * self.x_extent / (self.nx - 1) as f64
    }

    /// Volume of one grid cell, `dt·dx^n`; the weight of the discrete
    /// spacetime inner product.
    pub fn cell_volume(&self) -> f64 {
        self.dt() * self.dx().powi(self.n as i32)
    }

    pub fn len(&self) -> usize {
        self.nt * self.nx.pow(self.n as u32)
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_coord(&self, i: usize) -> f64 {
        -self.t_extent + i as f64 * self.dt()
    }
    pub fn x_coord(&self, j: usize) -> f64 {
        -self.x_extent + j as f64 * self.dx()
    }

    /// Flat offset of the grid point `(i_t, i_x)`; `i_x` has `n` entries.
    #[inline]
    pub fn offset(&self, it: usize, ix: &[usize]) -> usize {
        debug_assert_eq!(ix.len(), self.n);
        let mut idx = *ix.last().unwrap();
        for k in (0..self.n - 1).rev() {
            idx = idx * self.nx + ix[k];
        }
        idx * self.nt + it
    }

    /// Inverse of [`offset`](Self::offset).
    pub fn coords_of(&self, offset: usize) -> (usize, Vec<usize>) {
        let it = offset % self.nt;
        let mut rest = offset / self.nt;
        let mut ix = vec![0usize; self.n];
        for slot in ix.iter_mut() {
            *slot = rest % self.nx;
            rest /= self.nx;
        }
        (it, ix)
    }

    /// Evaluates `f(t, x)` at every grid node.
    pub fn tabulate(&self, f: impl Fn(f64, &[f64]) -> f64 + Sync) -> Vec<f64> {
        let mut values = vec![0.0f64; self.len()];
        let nt = self.nt;
        let nx = self.nx;
        let n = self.n;
        crate::par::for_each_indexed(&mut values, |idx, slot| {
            let it = idx % nt;
            let mut rest = idx / nt;
            let mut x = [0.0f64; 3];
            for xk in x.iter_mut().take(n) {
                *xk = self.x_coord(rest % nx);
                rest /= nx;
            }
            *slot = f(self.t_coord(it), &x[..n]);
        });
        values
    }
}

/// A real scalar function sampled on a [`SpacetimeGrid`].
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: SpacetimeGrid,
    pub values: Vec<f64>,
    pub label: String,
}

impl ScalarField {
    pub fn new(grid: SpacetimeGrid, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParam(format!(
                "field length {} does not match grid point count {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            label: label.into(),
        })
    }

    pub fn zeros(grid: SpacetimeGrid) -> Self {
        let values = vec![0.0; grid.len()];
        Self {
            grid,
            values,
            label: String::from("zeros"),
        }
    }

    pub fn from_fn(
        grid: SpacetimeGrid,
        label: impl Into<String>,
        f: impl Fn(f64, &[f64]) -> f64 + Sync,
    ) -> Self {
        let values = grid.tabulate(f);
        Self {
            grid,
            values,
            label: label.into(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Discrete `L²` pairing `Σ f·g · dt·dx^n`.
    pub fn dot(&self, other: &ScalarField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let mut acc = crate::spectral::fft::CompensatedSum::new();
        for (a, b) in self.values.iter().zip(&other.values) {
            acc.add(a * b);
        }
        acc.value() * self.grid.cell_volume()
    }
}

/// Relative `L²` difference `‖a - b‖ / ‖b‖`.
pub fn rel_l2_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    assert_eq!(a.grid, b.grid, "fields live on different grids");
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.values.iter().zip(&b.values) {
        num += (x - y) * (x - y);
        den += y * y;
    }
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_round_trip_and_time_is_fastest() {
        let g = SpacetimeGrid::new(3, 1.0, 1.0, 5, 4).unwrap();
        assert_eq!(g.offset(0, &[0, 0, 0]), 0);
        assert_eq!(g.offset(1, &[0, 0, 0]), 1);
        assert_eq!(g.offset(0, &[1, 0, 0]), 5);
        assert_eq!(g.offset(0, &[0, 1, 0]), 20);
        assert_eq!(g.offset(0, &[0, 0, 1]), 80);
        for probe in [0usize, 1, 17, 63, g.len() - 1] {
            let (it, ix) = g.coords_of(probe);
            assert_eq!(g.offset(it, &ix), probe);
        }
    }

    #[test]
    fn spacing_covers_the_box() {
        let g = SpacetimeGrid::new(2, 2.0, 3.0, 9, 7).unwrap();
        assert_eq!(g.t_coord(0), -2.0);
        assert!((g.t_coord(8) - 2.0).abs() < 1e-15);
        assert_eq!(g.x_coord(0), -3.0);
        assert!((g.x_coord(6) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(SpacetimeGrid::new(4, 1.0, 1.0, 4, 4).is_err());
        assert!(SpacetimeGrid::new(2, 1.0, 1.0, 1, 4).is_err());
        assert!(SpacetimeGrid::new(2, 0.0, 1.0, 4, 4).is_err());
        assert!(SpacetimeGrid::new(3, 1.0, 1.0, 4096, 4096).is_err());
    }

    #[test]
    fn tabulate_matches_pointwise_evaluation() {
        let g = SpacetimeGrid::new(2, 1.0, 1.0, 6, 5).unwrap();
        let f = ScalarField::from_fn(g.clone(), "probe", |t, x| t + 2.0 * x[0] - x[1]);
        for probe in [0usize, 7, 31, f.values.len() - 1] {
            let (it, ix) = g.coords_of(probe);
            let expect = g.t_coord(it) + 2.0 * g.x_coord(ix[0]) - g.x_coord(ix[1]);
            assert_eq!(f.values[probe], expect);
        }
    }
}
