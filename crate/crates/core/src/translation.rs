//! Weinstein translation `T_x` and convolution `*_W`.
//!
//! `T_x f(y) = (a/2) int_0^pi f(x' + y', sqrt(x_r^2 + y_r^2 + 2 x_r y_r cos t)) (sin t)^(2 alpha) dt`
//! with `a = 2 Gamma(alpha+1) / (sqrt(pi) Gamma(alpha+1/2))`, so that `T_x 1 = 1`.
//! Off-grid values of a field come from exact spectral synthesis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, WnsError};
use crate::grid::{fourier_frequency_cell, measure_weights, GridSpec, PhysicalField};
use crate::special_fn::{gamma, gauss_jacobi, normalized_bessel_j, BesselOrder, JacobiQuadrature};
use crate::transform::{forward, inverse, TransformPlan};

/// Minimum number of angular nodes used by the adaptive node count.
const MIN_THETA_NODES: usize = 24;
const MAX_THETA_NODES: usize = 400;

/// `2 Gamma(alpha+1) / (sqrt(pi) Gamma(alpha+1/2))`.
pub fn translation_constant(order: BesselOrder) -> Result<f64> {
    if order.is_classical() {
        return Err(WnsError::Domain(
            "the Weinstein translation needs alpha > -1/2".into(),
        ));
    }
    let a = order.alpha();
    Ok(2.0 * gamma(a + 1.0)? / (PI.sqrt() * gamma(a + 0.5)?))
}

/// Angular node count that resolves `j_alpha(lambda z)` over the translation orbit.
pub fn theta_nodes_for(lambda: f64, x_r: f64, y_r: f64) -> usize {
    let extra = (lambda.abs() * x_r.min(y_r)).ceil() as usize;
    (MIN_THETA_NODES + extra).min(MAX_THETA_NODES)
}

/// `Psi(x, lambda) = exp(-i <x', lambda'>) j_alpha(lambda_r x_r)`.
pub fn psi(order: BesselOrder, x: &[f64], lambda: &[f64]) -> Complex64 {
    let n = x.len();
    let phase: f64 = x[..n - 1].iter().zip(&lambda[..n - 1]).map(|(a, b)| a * b).sum();
    Complex64::from_polar(1.0, -phase) * normalized_bessel_j(order, lambda[n - 1] * x[n - 1])
}

#[derive(Debug, Clone)]
pub struct TranslationKernel {
    pub order: BesselOrder,
    pub x: Vec<f64>,
    pub quad: JacobiQuadrature,
    pub a_alpha: f64,
}

impl TranslationKernel {
    pub fn new(order: BesselOrder, x: &[f64], n_theta: usize) -> Result<Self> {
        check_point(x)?;
        Ok(TranslationKernel {
            order,
            x: x.to_vec(),
            quad: gauss_jacobi(order, n_theta)?,
            a_alpha: translation_constant(order)?,
        })
    }

    /// Translation orbit radii `sqrt(x_r^2 + y_r^2 + 2 x_r y_r cos t_q)`.
    pub fn radii(&self, y_r: f64) -> Vec<f64> {
        let x_r = *self.x.last().unwrap();
        self.quad
            .nodes
            .iter()
            .map(|t| (x_r * x_r + y_r * y_r + 2.0 * x_r * y_r * t.cos()).max(0.0).sqrt())
            .collect()
    }

    /// `T_x f(y)` for a function given pointwise.
    pub fn apply<T>(&self, f: impl Fn(&[f64]) -> T, y: &[f64]) -> Result<T>
    where
        T: std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        check_point(y)?;
        if y.len() != self.x.len() {
            return Err(WnsError::InvalidArgument(format!(
                "translation points differ in dimension: {} vs {}",
                self.x.len(),
                y.len()
            )));
        }
        let n = y.len();
        let mut z: Vec<f64> = self.x[..n - 1].iter().zip(&y[..n - 1]).map(|(a, b)| a + b).collect();
        z.push(0.0);
        let half_a = 0.5 * self.a_alpha;
        Ok(self
            .radii(y[n - 1])
            .into_iter()
            .zip(&self.quad.weights)
            .map(|(r, w)| {
                z[n - 1] = r;
                f(&z) * (w * half_a)
            })
            .sum())
    }
}

fn check_point(x: &[f64]) -> Result<()> {
    match x.last() {
        None => Err(WnsError::InvalidArgument("empty point".into())),
        Some(&r) if !(r >= 0.0) => Err(WnsError::InvalidArgument(format!(
            "translation points need a non-negative last coordinate, got {r}"
        ))),
        _ if x.iter().any(|v| !v.is_finite()) => {
            Err(WnsError::InvalidArgument("translation point is not finite".into()))
        }
        _ => Ok(()),
    }
}

/// `T_x f(y)` for a pointwise function with an explicit angular node count.
pub fn translate_point(
    order: BesselOrder,
    f: impl Fn(&[f64]) -> f64,
    x: &[f64],
    y: &[f64],
    n_theta: usize,
) -> Result<f64> {
    TranslationKernel::new(order, x, n_theta)?.apply(f, y)
}

/// `|Psi(x,l) Psi(y,l) - T_x[Psi(., l)](y)|` with the analytic eigenfunction.
pub fn product_formula_defect(order: BesselOrder, x: &[f64], y: &[f64], lambda: &[f64]) -> Result<f64> {
    if lambda.len() != x.len() {
        return Err(WnsError::InvalidArgument("frequency and point dimensions differ".into()));
    }
    let n = x.len();
    let n_theta = theta_nodes_for(lambda[n - 1], x[n - 1], y[n - 1]).max(64);
    let kernel = TranslationKernel::new(order, x, n_theta)?;
    let lhs = psi(order, x, lambda) * psi(order, y, lambda);
    let rhs = kernel.apply(|z| psi(order, z, lambda), y)?;
    Ok((lhs - rhs).norm())
}

/// Evaluates a field anywhere by spectral synthesis of its transform.
#[derive(Debug, Clone)]
pub struct SpectralInterpolant {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralInterpolant {
    pub fn new(f: &PhysicalField) -> Result<Self> {
        let plan = TransformPlan::for_grid(&f.grid);
        let spec = forward(f, &plan)?;
        Ok(SpectralInterpolant {
            grid: f.grid.clone(),
            coeffs: spec.coeffs,
        })
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        let g = &self.grid;
        let nodes = g.nodes();
        let c = g.order.radial_normalization() * fourier_frequency_cell(g);
        let radial: Vec<f64> = nodes
            .frequencies
            .iter()
            .zip(&nodes.frequency_weights)
            .map(|(l, w)| normalized_bessel_j(g.order, l * z[g.d]) * w * c)
            .collect();
        let mut idx = vec![0; g.d];
        let mut acc = Complex64::new(0.0, 0.0);
        for row in 0..g.fourier_count() {
            g.fourier_multi_index(row, &mut idx);
            let phase: f64 = idx.iter().zip(z).map(|(&m, zi)| g.fourier_freq(m) * zi).sum();
            let coeffs = &self.coeffs[row * g.n_lambda..(row + 1) * g.n_lambda];
            let inner: Complex64 = coeffs.iter().zip(&radial).map(|(a, b)| a * *b).sum();
            acc += inner * Complex64::from_polar(1.0, phase);
        }
        acc.re
    }
}

/// Radial synthesis matrix of `T_x` for radial shift `x_r`: entry `(j, k)` is
/// `(a/2) sum_q w_q j_alpha(lambda_k z_jq) Omega_k c`.
fn translated_synthesis(grid: &GridSpec, x_r: f64, n_theta: Option<usize>) -> Result<Vec<f64>> {
    let nodes = grid.nodes();
    let n_theta = n_theta.unwrap_or_else(|| theta_nodes_for(grid.lambda_max, x_r, grid.r_max));
    let mut x = vec![0.0; grid.d];
    x.push(x_r);
    let kernel = TranslationKernel::new(grid.order, &x, n_theta)?;
    let c = grid.order.radial_normalization() * 0.5 * kernel.a_alpha;
    let (n_r, n_l) = (grid.n_r, grid.n_lambda);
    let mut m = vec![0.0; n_r * n_l];
    m.par_chunks_mut(n_l).enumerate().for_each(|(j, row)| {
        let radii = kernel.radii(nodes.radial[j]);
        for (k, v) in row.iter_mut().enumerate() {
            let lam = nodes.frequencies[k];
            let s: f64 = radii
                .iter()
                .zip(&kernel.quad.weights)
                .map(|(r, w)| w * normalized_bessel_j(grid.order, lam * r))
                .sum();
            *v = s * nodes.frequency_weights[k] * c;
        }
    });
    Ok(m)
}

fn shift_phase(grid: &GridSpec, coeffs: &mut [Complex64], shift: &[f64]) {
    let mut idx = vec![0; grid.d];
    for (row, chunk) in coeffs.chunks_mut(grid.n_lambda).enumerate() {
        grid.fourier_multi_index(row, &mut idx);
        let phase: f64 = idx.iter().zip(shift).map(|(&m, s)| grid.fourier_freq(m) * s).sum();
        let rot = Complex64::from_polar(1.0, phase);
        for c in chunk {
            *c *= rot;
        }
    }
}

/// `T_x f` sampled at every grid node.
pub fn translate(f: &PhysicalField, x: &[f64]) -> Result<PhysicalField> {
    translate_with(f, x, None)
}

/// [`translate`] with an explicit angular node count.
pub fn translate_with(f: &PhysicalField, x: &[f64], n_theta: Option<usize>) -> Result<PhysicalField> {
    let g = &f.grid;
    check_point(x)?;
    if x.len() != g.d + 1 {
        return Err(WnsError::InvalidArgument(format!(
            "translation point has {} coordinates, grid needs {}",
            x.len(),
            g.d + 1
        )));
    }
    let plan = TransformPlan::for_grid(g);
    let mut coeffs = forward(f, &plan)?.coeffs;
    shift_phase(g, &mut coeffs, &x[..g.d]);
    let synth = translated_synthesis(g, x[g.d], n_theta)?;
    let values = plan.inverse_with(&coeffs, &synth).iter().map(|c| c.re).collect();
    PhysicalField::from_values(g, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvolutionMethod {
    /// `F^{-1}(F f . F g)`.
    Spectral,
    /// `int T_x f(-y', y_r) g(y) d mu(y)` at every node; quadratic cost, for small grids.
    Direct,
}

pub fn convolve(f: &PhysicalField, g: &PhysicalField, method: ConvolutionMethod) -> Result<PhysicalField> {
    if f.grid != g.grid {
        return Err(WnsError::InvalidArgument(
            "convolution operands live on different grids".into(),
        ));
    }
    match method {
        ConvolutionMethod::Spectral => {
            let plan = TransformPlan::for_grid(&f.grid);
            let prod = forward(f, &plan)?.mul(&forward(g, &plan)?)?;
            inverse(&prod, &plan)
        }
        ConvolutionMethod::Direct => convolve_direct(f, g),
    }
}

/// `f * g` at one point by the direct route, `int T_x f(y) g(-y', y_r) d mu(y)`.
pub fn convolve_direct_at(f: &PhysicalField, g: &PhysicalField, x: &[f64]) -> Result<f64> {
    if f.grid != g.grid {
        return Err(WnsError::InvalidArgument(
            "convolution operands live on different grids".into(),
        ));
    }
    let grid = &f.grid;
    let tx = translate(f, x)?;
    let weights = measure_weights(grid);
    let mut idx = vec![0; grid.d];
    let mut acc = 0.0;
    for row in 0..grid.fourier_count() {
        grid.fourier_multi_index(row, &mut idx);
        let mirror = idx.iter().fold(0, |a, &i| a * grid.n + (grid.n - i) % grid.n);
        for j in 0..grid.n_r {
            let k = row * grid.n_r + j;
            acc += tx.values[k] * weights[k] * g.values[mirror * grid.n_r + j];
        }
    }
    Ok(acc)
}

fn convolve_direct(f: &PhysicalField, g: &PhysicalField) -> Result<PhysicalField> {
    let grid = &f.grid;
    let plan = TransformPlan::for_grid(grid);
    let base = forward(f, &plan)?.coeffs;
    // Pair T_x f(y) with g(-y', y_r); this is the form that F_W turns into a product.
    let weights = measure_weights(grid);
    let mut idx = vec![0; grid.d];
    let mut wg = vec![0.0; grid.physical_len()];
    for row in 0..grid.fourier_count() {
        grid.fourier_multi_index(row, &mut idx);
        let mirror = idx.iter().fold(0, |acc, &i| acc * grid.n + (grid.n - i) % grid.n);
        for j in 0..grid.n_r {
            wg[row * grid.n_r + j] = weights[row * grid.n_r + j] * g.values[mirror * grid.n_r + j];
        }
    }
    let nodes = grid.nodes();
    let synths: Vec<Vec<f64>> = nodes
        .radial
        .iter()
        .map(|&x_r| translated_synthesis(grid, x_r, None))
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; grid.physical_len()];
    out.par_chunks_mut(grid.n_r).enumerate().for_each(|(row, dst)| {
        let x = grid.point(row * grid.n_r);
        let mut coeffs = base.clone();
        shift_phase(grid, &mut coeffs, &x[..grid.d]);
        for (j, v) in dst.iter_mut().enumerate() {
            let tx = plan.inverse_with(&coeffs, &synths[j]);
            *v = tx.iter().zip(&wg).map(|(a, b)| a.re * b).sum();
        }
    });
    PhysicalField::from_values(grid, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{lp_norm, make_test_fields, TestFieldKind};

    fn order(a: f64) -> BesselOrder {
        BesselOrder::new(a).unwrap()
    }

    #[test]
    fn constant_is_preserved() {
        for &a in &[0.0, 0.5, 1.7] {
            let v = translate_point(order(a), |_| 1.0, &[0.3, 2.0], &[-1.0, 0.7], 8).unwrap();
            assert!((v - 1.0).abs() < 1e-13, "alpha {a}: {v}");
        }
    }

    #[test]
    fn origin_is_identity() {
        let f = |z: &[f64]| (-(z[0] - 0.2).powi(2) - z[1] * z[1]).exp();
        let y = [0.4, 1.3];
        let v = translate_point(order(0.5), f, &[0.0, 0.0], &y, 16).unwrap();
        assert!((v - f(&y)).abs() < 1e-14);
    }

    #[test]
    fn rejects_negative_radius_and_classical_order() {
        assert!(translate_point(order(0.0), |_| 1.0, &[0.0, -1.0], &[0.0, 1.0], 4).is_err());
        assert!(translation_constant(BesselOrder::classical()).is_err());
    }

    #[test]
    fn constant_normalization_values() {
        // alpha = 1/2: a = 2 Gamma(3/2) / (sqrt(pi) Gamma(1)) = 1.
        assert!((translation_constant(order(0.5)).unwrap() - 1.0).abs() < 1e-14);
        assert!((translation_constant(order(0.0)).unwrap() - 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn product_formula_special_cases() {
        let o = order(0.3);
        assert!(product_formula_defect(o, &[1.0, 2.0], &[0.5, 3.0], &[0.0, 0.0]).unwrap() < 1e-13);
        assert!(product_formula_defect(o, &[1.0, 2.0], &[0.0, 0.0], &[1.5, 4.0]).unwrap() < 1e-8);
        assert!(product_formula_defect(o, &[1.0, 5.0], &[-2.0, 7.0], &[1.5, 6.0]).unwrap() < 1e-6);
    }

    #[test]
    fn field_translation_matches_pointwise() {
        let g = GridSpec::desk(order(0.5));
        let f = make_test_fields(&g, &TestFieldKind::BandLimitedRandom { seed: 7, cutoff: 2.0 }).unwrap();
        let x = [0.7, 1.1];
        let tf = translate(&f, &x).unwrap();
        let interp = SpectralInterpolant::new(&f).unwrap();
        for &node in &[5usize, 1000, 4100, 6000] {
            let y = g.point(node);
            let n = theta_nodes_for(g.lambda_max, x[1], y[1]);
            let direct = translate_point(g.order, |z| interp.eval(z), &x, &y, n).unwrap();
            assert!((tf.values[node] - direct).abs() < 1e-10, "node {node}");
        }
    }

    #[test]
    fn translation_contracts_norms() {
        let g = GridSpec::desk(order(0.0));
        let f = make_test_fields(&g, &TestFieldKind::BandLimitedRandom { seed: 3, cutoff: 2.0 }).unwrap();
        let tf = translate(&f, &[1.0, 0.8]).unwrap();
        for &p in &[1.0, 2.0, 4.0] {
            assert!(lp_norm(&tf, p).unwrap() <= lp_norm(&f, p).unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn convolution_zero_and_mismatch() {
        let g = GridSpec::desk(order(0.0));
        let f = make_test_fields(&g, &TestFieldKind::Gaussian { s: 1.0 }).unwrap();
        let z = PhysicalField::zeros(&g);
        assert_eq!(convolve(&f, &z, ConvolutionMethod::Spectral).unwrap().max_abs(), 0.0);
        let other = PhysicalField::zeros(&GridSpec::desk(order(0.5)));
        assert!(convolve(&f, &other, ConvolutionMethod::Spectral).is_err());
    }
}
