//! Forward and inverse Weinstein transform.
//!
//! The kernel `Psi(x, lambda) = exp(-i <x', lambda'>) j_alpha(lambda_{d+1} x_{d+1})`
//! separates: an FFT over the periodic axes and a dense `j_alpha` quadrature
//! matrix over the radial axis.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::grid::{
    fourier_frequency_cell, measure_weights, spectral_measure_weights, GridKey, GridSpec,
    PhysicalField, SpectralField,
};
use crate::special_fn::normalized_bessel_j;

/// Precomputed radial matrices and FFT plans for one grid.
pub struct TransformPlan {
    pub grid: GridSpec,
    /// `N_lambda x N_r`, row-major: `j_alpha(lambda_k x_j) w_r(x_j)`.
    pub hankel_fwd: Vec<f64>,
    /// `N_r x N_lambda`, row-major: `j_alpha(lambda_k x_j) w_r(lambda_k)`.
    pub hankel_inv: Vec<f64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TransformPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformPlan").field("grid", &self.grid).finish_non_exhaustive()
    }
}

impl TransformPlan {
    pub fn new(grid: &GridSpec) -> Self {
        let nodes = grid.nodes();
        let c = grid.order.radial_normalization();
        let (n_r, n_l) = (grid.n_r, grid.n_lambda);
        let mut hankel_fwd = vec![0.0; n_l * n_r];
        let mut hankel_inv = vec![0.0; n_r * n_l];
        for k in 0..n_l {
            let lam = nodes.frequencies[k];
            for j in 0..n_r {
                let kern = normalized_bessel_j(grid.order, lam * nodes.radial[j]);
                hankel_fwd[k * n_r + j] = kern * nodes.radial_weights[j] * c;
                hankel_inv[j * n_l + k] = kern * nodes.frequency_weights[k] * c;
            }
        }
        let mut planner = FftPlanner::new();
        TransformPlan {
            grid: grid.clone(),
            hankel_fwd,
            hankel_inv,
            fft_fwd: planner.plan_fft_forward(grid.n),
            fft_inv: planner.plan_fft_inverse(grid.n),
        }
    }

    /// Cached plan for `grid`.
    pub fn for_grid(grid: &GridSpec) -> Arc<TransformPlan> {
        static CACHE: OnceLock<Mutex<HashMap<GridKey, Arc<TransformPlan>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = GridKey::of(grid);
        if let Some(p) = cache.lock().unwrap().get(&key) {
            return p.clone();
        }
        let plan = Arc::new(TransformPlan::new(grid));
        cache.lock().unwrap().insert(key, plan.clone());
        plan
    }

    /// FFT along every periodic axis of `[N]^d x inner` data.
    fn fft_periodic(&self, data: &mut [Complex64], inner: usize, inverse: bool) {
        let g = &self.grid;
        let n = g.n;
        let fft = if inverse { &self.fft_inv } else { &self.fft_fwd };
        for axis in 0..g.d {
            let stride = n.pow((g.d - 1 - axis) as u32) * inner;
            let block = stride * n;
            // Lines of one axis are independent; process each block of `n * stride` values.
            data.par_chunks_mut(block).for_each(|chunk| {
                let mut line = vec![Complex64::new(0.0, 0.0); n];
                let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
                for offset in 0..stride {
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = chunk[offset + i * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (i, v) in line.iter().enumerate() {
                        chunk[offset + i * stride] = *v;
                    }
                }
            });
        }
    }

    /// `(-1)^(m_1 + ... + m_d)` accounts for the centred periodic coordinates.
    fn centre_phase(&self, data: &mut [Complex64], inner: usize) {
        let g = &self.grid;
        let mut idx = vec![0; g.d];
        for (row, chunk) in data.chunks_mut(inner).enumerate() {
            g.fourier_multi_index(row, &mut idx);
            if idx.iter().sum::<usize>() % 2 == 1 {
                for v in chunk {
                    *v = -*v;
                }
            }
        }
    }

    /// Forward transform of complex samples (used for products carrying a factor `i`).
    pub fn forward_complex(&self, values: &[Complex64]) -> Vec<Complex64> {
        let g = &self.grid;
        let (n_r, n_l) = (g.n_r, g.n_lambda);
        let mut out = vec![Complex64::new(0.0, 0.0); g.spectral_len()];
        out.par_chunks_mut(n_l)
            .zip(values.par_chunks(n_r))
            .for_each(|(dst, src)| {
                for (k, d) in dst.iter_mut().enumerate() {
                    let row = &self.hankel_fwd[k * n_r..(k + 1) * n_r];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (h, s) in row.iter().zip(src) {
                        acc += s * *h;
                    }
                    *d = acc;
                }
            });
        self.fft_periodic(&mut out, n_l, false);
        self.centre_phase(&mut out, n_l);
        let cell = g.spacing().powi(g.d as i32) * (2.0 * PI).powf(-(g.d as f64) / 2.0);
        for v in out.iter_mut() {
            *v *= cell;
        }
        out
    }

    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let g = &self.grid;
        let (n_r, n_l) = (g.n_r, g.n_lambda);
        let mut out = vec![Complex64::new(0.0, 0.0); g.spectral_len()];
        out.par_chunks_mut(n_l)
            .zip(values.par_chunks(n_r))
            .for_each(|(dst, src)| {
                for (k, d) in dst.iter_mut().enumerate() {
                    let row = &self.hankel_fwd[k * n_r..(k + 1) * n_r];
                    let acc: f64 = row.iter().zip(src).map(|(h, s)| h * s).sum();
                    *d = Complex64::new(acc, 0.0);
                }
            });
        self.fft_periodic(&mut out, n_l, false);
        self.centre_phase(&mut out, n_l);
        let cell = g.spacing().powi(g.d as i32) * (2.0 * PI).powf(-(g.d as f64) / 2.0);
        for v in out.iter_mut() {
            *v *= cell;
        }
        out
    }

    /// Inverse transform returning complex samples.
    pub fn inverse_complex(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        self.inverse_with(coeffs, &self.hankel_inv)
    }

    /// Inverse transform with a replacement `N_r x N_lambda` radial synthesis matrix.
    pub(crate) fn inverse_with(&self, coeffs: &[Complex64], radial: &[f64]) -> Vec<Complex64> {
        let g = &self.grid;
        let (n_r, n_l) = (g.n_r, g.n_lambda);
        let mut work = coeffs.to_vec();
        self.centre_phase(&mut work, n_l);
        self.fft_periodic(&mut work, n_l, true);
        let cell = fourier_frequency_cell(g);
        let mut out = vec![Complex64::new(0.0, 0.0); g.physical_len()];
        out.par_chunks_mut(n_r)
            .zip(work.par_chunks(n_l))
            .for_each(|(dst, src)| {
                for (j, d) in dst.iter_mut().enumerate() {
                    let row = &radial[j * n_l..(j + 1) * n_l];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (h, s) in row.iter().zip(src) {
                        acc += s * *h;
                    }
                    *d = acc * cell;
                }
            });
        out
    }
}

/// `F_W(f)(lambda) = int f(x) Psi(x, lambda) d mu(x)`.
pub fn forward(f: &PhysicalField, plan: &TransformPlan) -> Result<SpectralField> {
    plan.grid.check_same(&f.grid, "forward transform")?;
    Ok(SpectralField {
        grid: f.grid.clone(),
        coeffs: plan.forward_real(&f.values),
    })
}

/// `f(x) = int F(lambda) Psi(-x, lambda) d mu(lambda)`, real part.
///
/// For spectra of real fields the imaginary part vanishes to rounding; use
/// [`inverse_complex`] when it carries information.
pub fn inverse(spec: &SpectralField, plan: &TransformPlan) -> Result<PhysicalField> {
    plan.grid.check_same(&spec.grid, "inverse transform")?;
    let values = plan.inverse_complex(&spec.coeffs).iter().map(|c| c.re).collect();
    Ok(PhysicalField {
        grid: spec.grid.clone(),
        values,
    })
}

pub fn inverse_complex(spec: &SpectralField, plan: &TransformPlan) -> Result<Vec<Complex64>> {
    plan.grid.check_same(&spec.grid, "inverse transform")?;
    Ok(plan.inverse_complex(&spec.coeffs))
}

/// `| ||f||_2^2 - ||F_W f||_2^2 | / ||f||_2^2`, zero for the zero field.
pub fn plancherel_defect(f: &PhysicalField, plan: &TransformPlan) -> Result<f64> {
    let spec = forward(f, plan)?;
    let phys: f64 = f
        .values
        .iter()
        .zip(measure_weights(&f.grid))
        .map(|(v, w)| w * v * v)
        .sum();
    if phys == 0.0 {
        return Ok(0.0);
    }
    let freq: f64 = spec
        .coeffs
        .iter()
        .zip(spectral_measure_weights(&f.grid))
        .map(|(c, w)| w * c.norm_sqr())
        .sum();
    Ok((phys - freq).abs() / phys)
}

/// Weighted inner products `(<f, g>_phys, <F f, F g>_spec)` of two real fields.
pub fn parseval_pair(f: &PhysicalField, g: &PhysicalField, plan: &TransformPlan) -> Result<(f64, Complex64)> {
    f.grid.check_same(&g.grid, "Parseval")?;
    let ff = forward(f, plan)?;
    let fg = forward(g, plan)?;
    let phys: f64 = f
        .values
        .iter()
        .zip(&g.values)
        .zip(measure_weights(&f.grid))
        .map(|((a, b), w)| w * a * b)
        .sum();
    let spec: Complex64 = ff
        .coeffs
        .iter()
        .zip(&fg.coeffs)
        .zip(spectral_measure_weights(&f.grid))
        .map(|((a, b), w)| a * b.conj() * w)
        .sum();
    Ok((phys, spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_test_fields, TestFieldKind};
    use crate::special_fn::BesselOrder;

    fn kappa(g: &GridSpec) -> f64 {
        g.alpha() + g.d as f64 / 2.0 + 1.0
    }

    #[test]
    fn gaussian_pair_half() {
        let g = GridSpec::desk(BesselOrder::new(0.0).unwrap());
        let plan = TransformPlan::for_grid(&g);
        let f = make_test_fields(&g, &TestFieldKind::Gaussian { s: 0.5 }).unwrap();
        let spec = forward(&f, &plan).unwrap();
        let mut err: f64 = 0.0;
        for (i, c) in spec.coeffs.iter().enumerate() {
            let lam = g.frequency(i);
            let l2: f64 = lam.iter().map(|v| v * v).sum();
            let exact = (-l2 / 2.0).exp();
            err = err.max((c - exact).norm());
        }
        assert!(err < 1e-6, "max error {err}");
        assert_eq!(kappa(&g), 1.5);
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = GridSpec::desk(BesselOrder::new(0.3).unwrap());
        let plan = TransformPlan::for_grid(&g);
        let z = PhysicalField::zeros(&g);
        assert_eq!(forward(&z, &plan).unwrap().max_abs(), 0.0);
        assert_eq!(inverse(&SpectralField::zeros(&g), &plan).unwrap().max_abs(), 0.0);
        assert_eq!(plancherel_defect(&z, &plan).unwrap(), 0.0);
    }

    #[test]
    fn sup_bound_by_l1_norm() {
        let g = GridSpec::desk(BesselOrder::new(0.5).unwrap());
        let plan = TransformPlan::for_grid(&g);
        for seed in 0..3 {
            let f = make_test_fields(&g, &TestFieldKind::BandLimitedRandom { seed, cutoff: 2.0 }).unwrap();
            let sup = forward(&f, &plan).unwrap().max_abs();
            assert!(sup <= crate::grid::lp_norm(&f, 1.0).unwrap());
        }
    }

    #[test]
    fn round_trip_and_grid_mismatch() {
        let g = GridSpec::desk(BesselOrder::new(1.5).unwrap());
        let plan = TransformPlan::for_grid(&g);
        let f = make_test_fields(&g, &TestFieldKind::Gaussian { s: 0.5 }).unwrap();
        let back = inverse(&forward(&f, &plan).unwrap(), &plan).unwrap();
        let scale = f.max_abs();
        for (a, b) in f.values.iter().zip(&back.values) {
            assert!((a - b).abs() < 1e-8 * scale, "{a} vs {b}");
        }
        let other = GridSpec::desk(BesselOrder::new(0.0).unwrap());
        let plan0 = TransformPlan::for_grid(&other);
        assert!(forward(&f, &plan0).is_err());
    }

    #[test]
    fn heat_kernel_inverse_pair() {
        // Spectral data exp(-t |xi|^2) inverts to q_t.
        let g = GridSpec::desk(BesselOrder::new(0.5).unwrap());
        let plan = TransformPlan::for_grid(&g);
        let t = 0.25;
        let spec = SpectralField::from_fn(&g, |l| {
            Complex64::new((-t * l.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
        });
        let phys = inverse(&spec, &plan).unwrap();
        let k = kappa(&g);
        let mut err: f64 = 0.0;
        for (i, v) in phys.values.iter().enumerate() {
            let x = g.point(i);
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let exact = (2.0 * t).powf(-k) * (-r2 / (4.0 * t)).exp();
            err = err.max((v - exact).abs());
        }
        assert!(err < 1e-6 * (2.0 * t).powf(-k), "err {err}");
    }

    #[test]
    fn linearity() {
        let g = GridSpec::desk(BesselOrder::new(0.0).unwrap());
        let plan = TransformPlan::for_grid(&g);
        let f = make_test_fields(&g, &TestFieldKind::BandLimitedRandom { seed: 1, cutoff: 2.0 }).unwrap();
        let h = make_test_fields(&g, &TestFieldKind::Gaussian { s: 0.7 }).unwrap();
        let combo = f.scale(2.0).axpy(-3.0, &h).unwrap();
        let lhs = forward(&combo, &plan).unwrap();
        let ff = forward(&f, &plan).unwrap();
        let fh = forward(&h, &plan).unwrap();
        let scale = lhs.max_abs();
        for i in 0..lhs.coeffs.len() {
            let rhs = ff.coeffs[i] * 2.0 - fh.coeffs[i] * 3.0;
            assert!((lhs.coeffs[i] - rhs).norm() < 1e-13 * scale);
        }
    }

    #[test]
    fn parseval_on_band_limited_pairs() {
        let g = GridSpec::desk(BesselOrder::new(0.0).unwrap());
        let plan = TransformPlan::for_grid(&g);
        let f = make_test_fields(&g, &TestFieldKind::BandLimitedRandom { seed: 3, cutoff: 2.0 }).unwrap();
        let h = make_test_fields(&g, &TestFieldKind::BandLimitedRandom { seed: 4, cutoff: 2.0 }).unwrap();
        let (phys, spec) = parseval_pair(&f, &h, &plan).unwrap();
        let scale = crate::grid::lp_norm(&f, 2.0).unwrap() * crate::grid::lp_norm(&h, 2.0).unwrap();
        assert!((phys - spec.re).abs() < 1e-8 * scale);
        assert!(spec.im.abs() < 1e-8 * scale);
    }
}
