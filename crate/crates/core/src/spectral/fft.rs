//! Flat-buffer n-dimensional FFT on top of `rustfft`, plus the phase/scale
//! bookkeeping that turns a DFT of samples on `[-E, E]` into an approximation
//! of the continuum Fourier transform.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::sync::Arc;

/// Neumaier compensated summation; keeps long reductions accurate to a few
/// ulps so the adjoint pairing test can resolve 1e-12.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Smallest `2^a·3^b·5^c ≥ min`; keeps padded FFT sizes fast.
pub fn nice_fft_size(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut m = n;
        for p in [2usize, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

/// Angular FFT frequencies `2π·k/(len·d)` with the usual signed layout.
pub fn fft_freqs(len: usize, spacing: f64) -> Vec<f64> {
    let step = 2.0 * std::f64::consts::PI / (len as f64 * spacing);
    (0..len)
        .map(|k| {
            let signed = if k <= (len - 1) / 2 {
                k as isize
            } else {
                k as isize - len as isize
            };
            signed as f64 * step
        })
        .collect()
}

/// In-place n-dimensional FFT of a flat buffer.
///
/// `dims[0]` is the fastest-varying axis (matching the field storage order).
/// The inverse transform includes the `1/N` normalization.
pub struct NdFft {
    dims: Vec<usize>,
    forward: Vec<Arc<dyn rustfft::Fft<f64>>>,
    inverse: Vec<Arc<dyn rustfft::Fft<f64>>>,
}

impl NdFft {
    pub fn new(dims: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = dims
            .iter()
            .map(|&n| planner.plan_fft_forward(n))
            .collect();
        let inverse = dims
            .iter()
            .map(|&n| planner.plan_fft_inverse(n))
            .collect();
        Self {
            dims: dims.to_vec(),
            forward,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, false);
        let scale = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], fwd: bool) {
        assert_eq!(data.len(), self.len());
        let mut stride = 1usize;
        for (axis, &len) in self.dims.iter().enumerate() {
            let plan = if fwd {
                &self.forward[axis]
            } else {
                &self.inverse[axis]
            };
            transform_axis(data, len, stride, plan.as_ref());
            stride *= len;
        }
    }
}

/// Applies a 1D FFT along the axis with the given length and stride.  Lines
/// are independent, so this parallelizes without affecting the result.
fn transform_axis(data: &mut [Complex64], len: usize, stride: usize, plan: &dyn rustfft::Fft<f64>) {
    let total = data.len();
    let n_lines = total / len;
    if stride == 1 {
        // contiguous lines
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            data.par_chunks_mut(len).for_each(|chunk| plan.process(chunk));
        }
        #[cfg(not(feature = "parallel"))]
        for chunk in data.chunks_mut(len) {
            plan.process(chunk);
        }
        return;
    }

    // Strided lines: gather into a scratch buffer per line.  Line `l` starts
    // at offset (l / stride)·(len·stride) + (l % stride).
    let line_starts: Vec<usize> = (0..n_lines)
        .map(|l| (l / stride) * (len * stride) + (l % stride))
        .collect();

    // Safety/aliasing: lines touch disjoint index sets, but expressing that to
    // the borrow checker costs more than copying through per-line buffers with
    // interior mutability via chunked unsafe.  Use an UnsafeCell-free approach:
    // process lines serially in the non-parallel build, and in the parallel
    // build split by `l % stride` groups which are still disjoint.  Copying
    // through a scratch buffer dominates anyway, so keep it simple and serial
    // per group.
    let process_line = |data: &mut [Complex64], start: usize| {
        let mut buf: Vec<Complex64> = (0..len).map(|i| data[start + i * stride]).collect();
        plan.process(&mut buf);
        for (i, v) in buf.into_iter().enumerate() {
            data[start + i * stride] = v;
        }
    };

    #[cfg(feature = "parallel")]
    {
        // Disjointness argument: consecutive `len·stride` blocks are
        // independent; parallelize over those blocks.
        use rayon::prelude::*;
        let block = len * stride;
        data.par_chunks_mut(block).for_each(|chunk| {
            for s in 0..stride.min(chunk.len()) {
                let mut buf: Vec<Complex64> = (0..len).map(|i| chunk[s + i * stride]).collect();
                plan.process(&mut buf);
                for (i, v) in buf.into_iter().enumerate() {
                    chunk[s + i * stride] = v;
                }
            }
        });
        let _ = line_starts;
    }
    #[cfg(not(feature = "parallel"))]
    for &start in &line_starts {
        process_line(data, start);
    }
    #[cfg(feature = "parallel")]
    let _ = process_line;
}

/// Continuum Fourier transform approximation of samples on a product of
/// intervals `[-ext_i, ext_i]`:
///
/// `F(ω) = Π dᵢ · Π e^{+i·extᵢ·ωᵢ} · DFT[f]`,
///
/// which is the Riemann sum for `∫ e^{-i y·ω} f(y) dy` on the FFT frequency
/// grid.  `dims[0]` fastest varying; optional zero padding per axis refines
/// the frequency grid.
pub struct ContinuumFt {
    pub values: Vec<Complex64>,
    pub dims: Vec<usize>,
    pub freqs: Vec<Vec<f64>>,
}

pub fn continuum_ft(
    samples: &[f64],
    dims: &[usize],
    spacings: &[f64],
    extents: &[f64],
    pad: &[usize],
) -> ContinuumFt {
    assert_eq!(samples.len(), dims.iter().product::<usize>());
    let pdims: Vec<usize> = dims
        .iter()
        .zip(pad)
        .map(|(&n, &p)| if p > 1 { nice_fft_size(n * p) } else { n })
        .collect();
    let total: usize = pdims.iter().product();
    let mut buf = vec![Complex64::default(); total];
    // embed with the original index layout at the low corner
    for (flat, &v) in samples.iter().enumerate() {
        let mut rest = flat;
        let mut pflat = 0usize;
        let mut pstride = 1usize;
        for (k, &n) in dims.iter().enumerate() {
            let i = rest % n;
            rest /= n;
            pflat += i * pstride;
            pstride *= pdims[k];
        }
        buf[pflat] = Complex64::new(v, 0.0);
    }
    NdFft::new(&pdims).forward(&mut buf);

    let freqs: Vec<Vec<f64>> = pdims
        .iter()
        .zip(spacings)
        .map(|(&n, &d)| fft_freqs(n, d))
        .collect();
    let scale: f64 = spacings.iter().product();
    // per-axis phase e^{i·ext·ω}
    let phases: Vec<Vec<Complex64>> = freqs
        .iter()
        .zip(extents)
        .map(|(fs, &ext)| {
            fs.iter()
                .map(|&w| Complex64::from_polar(1.0, ext * w))
                .collect()
        })
        .collect();
    crate::par::for_each_indexed(&mut buf, |flat, v| {
        let mut rest = flat;
        let mut phase = Complex64::new(scale, 0.0);
        for (k, &n) in pdims.iter().enumerate() {
            phase *= phases[k][rest % n];
            rest /= n;
        }
        *v *= phase;
    });
    ContinuumFt {
        values: buf,
        dims: pdims,
        freqs,
    }
}
