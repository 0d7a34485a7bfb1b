//! Orthonormal 3D discrete Fourier transform of zone-sized lattices.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Unitary 3D DFT (scaled by `1/√N`) on an x-fastest lattice.
#[derive(Clone)]
pub struct Fft3 {
    dims: [usize; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
    scale: f64,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("dims", &self.dims).finish()
    }
}

impl Fft3 {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = dims.map(|n| planner.plan_fft_forward(n));
        let inverse = dims.map(|n| planner.plan_fft_inverse(n));
        Self {
            dims,
            forward,
            inverse,
            scale: 1.0 / (dims.iter().product::<usize>() as f64).sqrt(),
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        assert_eq!(data.len(), self.len());
        let [nx, ny, nz] = self.dims;
        for line in data.chunks_exact_mut(nx) {
            plans[0].process(line);
        }
        let mut buf = vec![Complex64::default(); ny.max(nz)];
        for k in 0..nz {
            for i in 0..nx {
                for j in 0..ny {
                    buf[j] = data[i + nx * (j + ny * k)];
                }
                plans[1].process(&mut buf[..ny]);
                for j in 0..ny {
                    data[i + nx * (j + ny * k)] = buf[j];
                }
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                for k in 0..nz {
                    buf[k] = data[i + nx * (j + ny * k)];
                }
                plans[2].process(&mut buf[..nz]);
                for k in 0..nz {
                    data[i + nx * (j + ny * k)] = buf[k];
                }
            }
        }
        data.iter_mut().for_each(|v| *v *= self.scale);
    }

    /// Transforms each component of an interleaved 3-vector field; the output
    /// stores the three spectra one after another.
    pub fn forward_vector(&self, w: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        assert_eq!(w.len(), 3 * n);
        let mut out = vec![Complex64::default(); 3 * n];
        for c in 0..3 {
            let block = &mut out[c * n..(c + 1) * n];
            for (v, b) in block.iter_mut().enumerate() {
                *b = w[3 * v + c];
            }
            self.forward(block);
        }
        out
    }

    /// Inverse of [`Fft3::forward_vector`].
    pub fn inverse_vector(&self, spectra: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        assert_eq!(spectra.len(), 3 * n);
        let mut out = vec![Complex64::default(); 3 * n];
        let mut block = vec![Complex64::default(); n];
        for c in 0..3 {
            block.copy_from_slice(&spectra[c * n..(c + 1) * n]);
            self.inverse(&mut block);
            for (v, b) in block.iter().enumerate() {
                out[3 * v + c] = *b;
            }
        }
        out
    }
}
