//! Spectral multipliers: Laplacian, gradient, divergence, heat semigroup and
//! the Leray projector.
//!
//! All operators act node-wise on [`SpectralField`] coefficients. The gradient
//! is the literal `i F^{-1}(lambda_j F f)` on every axis, including the radial one.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, WnsError};
use crate::grid::{GridKey, GridSpec, SpectralField};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Frequency vectors of every spectral node, stored component-major.
#[derive(Debug)]
pub struct FrequencyGrid {
    pub grid: GridSpec,
    /// `lambda[j][node]`, `j = 0..=d`.
    pub lambda: Vec<Vec<f64>>,
    pub lambda_sq: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(grid: &GridSpec) -> Self {
        let len = grid.spectral_len();
        let dim = grid.d + 1;
        let mut lambda = vec![vec![0.0; len]; dim];
        let mut lambda_sq = vec![0.0; len];
        for node in 0..len {
            let l = grid.frequency(node);
            for j in 0..dim {
                lambda[j][node] = l[j];
            }
            lambda_sq[node] = l.iter().map(|v| v * v).sum();
        }
        FrequencyGrid {
            grid: grid.clone(),
            lambda,
            lambda_sq,
        }
    }

    /// Cached frequency grid.
    pub fn for_grid(grid: &GridSpec) -> Arc<FrequencyGrid> {
        static CACHE: OnceLock<Mutex<HashMap<GridKey, Arc<FrequencyGrid>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = GridKey::of(grid);
        if let Some(f) = cache.lock().unwrap().get(&key) {
            return f.clone();
        }
        let f = Arc::new(FrequencyGrid::new(grid));
        cache.lock().unwrap().insert(key, f.clone());
        f
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn len(&self) -> usize {
        self.lambda_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda_sq.is_empty()
    }

    pub fn at(&self, node: usize) -> Vec<f64> {
        self.lambda.iter().map(|c| c[node]).collect()
    }
}

/// `M(xi) = I - xi xi^T / |xi|^2`, identity at `xi = 0`.
#[derive(Debug, Clone)]
pub struct LerayMultiplier {
    freq: Arc<FrequencyGrid>,
}

impl LerayMultiplier {
    pub fn new(grid: &GridSpec) -> Self {
        LerayMultiplier {
            freq: FrequencyGrid::for_grid(grid),
        }
    }

    /// Row-major `(d+1) x (d+1)` matrix at a spectral node.
    pub fn matrix(&self, node: usize) -> Vec<f64> {
        leray_matrix(&self.freq.at(node))
    }

    pub fn apply(&self, v: &[SpectralField]) -> Result<Vec<SpectralField>> {
        check_components(&self.freq.grid, v, "Leray projection")?;
        let dim = self.freq.dim();
        let len = self.freq.len();
        let mut out: Vec<SpectralField> = v.to_vec();
        let projected: Vec<Vec<Complex64>> = (0..len)
            .into_par_iter()
            .map(|node| {
                let l2 = self.freq.lambda_sq[node];
                let vals: Vec<Complex64> = v.iter().map(|c| c.coeffs[node]).collect();
                if l2 == 0.0 {
                    return vals;
                }
                let dot: Complex64 = (0..dim).map(|k| vals[k] * self.freq.lambda[k][node]).sum();
                (0..dim)
                    .map(|j| vals[j] - dot * (self.freq.lambda[j][node] / l2))
                    .collect()
            })
            .collect();
        for (node, vals) in projected.into_iter().enumerate() {
            for (j, c) in vals.into_iter().enumerate() {
                out[j].coeffs[node] = c;
            }
        }
        Ok(out)
    }
}

/// `delta_ij - xi_i xi_j / |xi|^2`; identity at the origin.
pub fn leray_matrix(xi: &[f64]) -> Vec<f64> {
    let n = xi.len();
    let l2: f64 = xi.iter().map(|v| v * v).sum();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            m[i * n + j] = if l2 == 0.0 {
                delta
            } else {
                delta - xi[i] * xi[j] / l2
            };
        }
    }
    m
}

fn check_components(grid: &GridSpec, v: &[SpectralField], what: &str) -> Result<()> {
    if v.len() != grid.d + 1 {
        return Err(WnsError::InvalidArgument(format!(
            "{what}: expected {} components, got {}",
            grid.d + 1,
            v.len()
        )));
    }
    for c in v {
        if &c.grid != grid {
            return Err(WnsError::InvalidArgument(format!(
                "{what}: components live on different grids"
            )));
        }
    }
    Ok(())
}

/// Multiplies by `-|lambda|^2`.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let freq = FrequencyGrid::for_grid(&f.grid);
    let coeffs = f
        .coeffs
        .iter()
        .zip(&freq.lambda_sq)
        .map(|(c, l2)| -c * *l2)
        .collect();
    SpectralField {
        grid: f.grid.clone(),
        coeffs,
    }
}

/// Component `j` is `i lambda_j F`.
pub fn gradient_w(f: &SpectralField) -> Vec<SpectralField> {
    let freq = FrequencyGrid::for_grid(&f.grid);
    freq.lambda
        .iter()
        .map(|lj| SpectralField {
            grid: f.grid.clone(),
            coeffs: f.coeffs.iter().zip(lj).map(|(c, l)| I * *l * c).collect(),
        })
        .collect()
}

/// `sum_j i lambda_j V_j`.
pub fn div_w(v: &[SpectralField]) -> Result<SpectralField> {
    let grid = v
        .first()
        .map(|c| c.grid.clone())
        .ok_or_else(|| WnsError::InvalidArgument("divergence of an empty vector field".into()))?;
    check_components(&grid, v, "divergence")?;
    let freq = FrequencyGrid::for_grid(&grid);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.spectral_len()];
    for (vj, lj) in v.iter().zip(&freq.lambda) {
        for ((acc, c), l) in coeffs.iter_mut().zip(&vj.coeffs).zip(lj) {
            *acc += I * *l * c;
        }
    }
    Ok(SpectralField { grid, coeffs })
}

/// Multiplies by `exp(-nu t |lambda|^2)`.
pub fn heat_semigroup(f: &SpectralField, nu: f64, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(WnsError::InvalidArgument(format!(
            "heat semigroup needs a finite time t >= 0, got {t}"
        )));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(WnsError::InvalidArgument(format!(
            "viscosity must be positive and finite, got {nu}"
        )));
    }
    let freq = FrequencyGrid::for_grid(&f.grid);
    let coeffs = f
        .coeffs
        .iter()
        .zip(&freq.lambda_sq)
        .map(|(c, l2)| c * (-nu * t * l2).exp())
        .collect();
    Ok(SpectralField {
        grid: f.grid.clone(),
        coeffs,
    })
}

pub fn leray_project(v: &[SpectralField]) -> Result<Vec<SpectralField>> {
    let grid = v
        .first()
        .map(|c| c.grid.clone())
        .ok_or_else(|| WnsError::InvalidArgument("projection of an empty vector field".into()))?;
    LerayMultiplier::new(&grid).apply(v)
}

/// Nodes kept by the 2/3 rule: `|m| <= N/3` on periodic axes and
/// `lambda_r <= 2/3 Lambda_max` on the radial axis.
pub fn dealias_mask(grid: &GridSpec) -> Vec<bool> {
    let nodes = grid.nodes();
    let radial_cut = 2.0 / 3.0 * grid.lambda_max;
    let mode_cut = (grid.n / 3) as isize;
    let mut idx = vec![0; grid.d];
    let mut mask = Vec::with_capacity(grid.spectral_len());
    for row in 0..grid.fourier_count() {
        grid.fourier_multi_index(row, &mut idx);
        let keep_row = idx.iter().all(|&m| {
            let signed = if m < grid.n / 2 {
                m as isize
            } else {
                m as isize - grid.n as isize
            };
            signed.abs() <= mode_cut
        });
        for &lam in &nodes.frequencies {
            mask.push(keep_row && lam <= radial_cut);
        }
    }
    mask
}

pub fn apply_mask(f: &mut SpectralField, mask: &[bool]) {
    for (c, &keep) in f.coeffs.iter_mut().zip(mask) {
        if !keep {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gaussian, make_test_fields, TestFieldKind};
    use crate::special_fn::BesselOrder;
    use crate::transform::{forward, inverse, TransformPlan};

    fn desk(alpha: f64) -> GridSpec {
        GridSpec::desk(BesselOrder::new(alpha).unwrap())
    }

    fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        a.coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn laplacian_matches_stencil_oracle() {
        // Second differences of E_s on the periodic axis, L_alpha stencil on the radial one.
        let g = desk(0.5);
        let plan = TransformPlan::for_grid(&g);
        let s = 0.5;
        let a = g.alpha();
        let h = 1e-3;
        let lap_phys = crate::grid::PhysicalField::from_fn(&g, |x| {
            let e = |y: &[f64]| gaussian(s, y);
            let mut total = 0.0;
            for k in 0..x.len() {
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[k] += h;
                m[k] -= h;
                let second = (e(&p) - 2.0 * e(x) + e(&m)) / (h * h);
                total += second;
                if k == x.len() - 1 {
                    total += (2.0 * a + 1.0) / x[k] * (e(&p) - e(&m)) / (2.0 * h);
                }
            }
            total
        });
        let f = make_test_fields(&g, &TestFieldKind::Gaussian { s }).unwrap();
        let spec = laplacian(&forward(&f, &plan).unwrap());
        let oracle = forward(&lap_phys, &plan).unwrap();
        let rel = max_diff(&spec, &oracle) / oracle.max_abs();
        assert!(rel < 1e-4, "rel {rel}");
    }

    #[test]
    fn single_mode_and_zero() {
        let g = desk(0.0);
        let mut f = SpectralField::zeros(&g);
        assert_eq!(laplacian(&f).max_abs(), 0.0);
        let node = 5 * g.n_lambda + 7;
        f.coeffs[node] = Complex64::new(1.0, 0.0);
        let lam = g.frequency(node);
        let l2: f64 = lam.iter().map(|v| v * v).sum();
        let out = laplacian(&f);
        assert!((out.coeffs[node].re + l2).abs() < 1e-14);
        assert_eq!(out.max_abs(), l2);
    }

    #[test]
    fn gradient_first_component_matches_derivative() {
        let g = desk(0.0);
        let plan = TransformPlan::for_grid(&g);
        let s = 0.5;
        let f = make_test_fields(&g, &TestFieldKind::Gaussian { s }).unwrap();
        let grad = gradient_w(&forward(&f, &plan).unwrap());
        let d1 = inverse(&grad[0], &plan).unwrap();
        let scale = 2.0 * s * (0.5 / s).sqrt();
        let mut err: f64 = 0.0;
        for (i, v) in d1.values.iter().enumerate() {
            let x = g.point(i);
            err = err.max((v + 2.0 * s * x[0] * gaussian(s, &x)).abs());
        }
        assert!(err / scale < 1e-5, "err {err}");
    }

    #[test]
    fn div_grad_is_laplacian() {
        let g = desk(0.3);
        let plan = TransformPlan::for_grid(&g);
        let f = make_test_fields(&g, &TestFieldKind::BandLimitedRandom { seed: 9, cutoff: 2.0 }).unwrap();
        let spec = forward(&f, &plan).unwrap();
        let lhs = div_w(&gradient_w(&spec)).unwrap();
        let rhs = laplacian(&spec);
        assert!(max_diff(&lhs, &rhs) <= 1e-14 * rhs.max_abs());
        assert!(div_w(&gradient_w(&SpectralField::zeros(&g))).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn div_rejects_mismatched_components() {
        let g = desk(0.0);
        let other = desk(0.5);
        let v = vec![SpectralField::zeros(&g), SpectralField::zeros(&other)];
        assert!(matches!(div_w(&v), Err(WnsError::InvalidArgument(_))));
        assert!(div_w(&[SpectralField::zeros(&g)]).is_err());
    }

    #[test]
    fn projection_kills_divergence_and_gradients() {
        let g = desk(0.5);
        let plan = TransformPlan::for_grid(&g);
        let v: Vec<SpectralField> = (0..2)
            .map(|k| {
                let f = make_test_fields(&g, &TestFieldKind::BandLimitedRandom { seed: k, cutoff: 2.0 }).unwrap();
                forward(&f, &plan).unwrap()
            })
            .collect();
        let pv = leray_project(&v).unwrap();
        assert!(div_w(&pv).unwrap().max_abs() <= 1e-10);
        let ppv = leray_project(&pv).unwrap();
        for j in 0..2 {
            assert!(max_diff(&ppv[j], &pv[j]) <= 1e-14 * v[j].max_abs().max(1.0));
        }
        let grad = gradient_w(&v[0]);
        let pg = leray_project(&grad).unwrap();
        let scale = grad.iter().map(|c| c.max_abs()).fold(0.0, f64::max);
        assert!(pg.iter().all(|c| c.max_abs() <= 1e-13 * scale));
    }

    #[test]
    fn leray_matrix_example() {
        let m = leray_matrix(&[1.0, 1.0]);
        assert_eq!(m, vec![0.5, -0.5, -0.5, 0.5]);
        let v = [1.0, 0.0];
        let out = [m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]];
        assert_eq!(out, [0.5, -0.5]);
        assert_eq!(leray_matrix(&[0.0, 0.0]), vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn heat_on_gaussian_matches_closed_form() {
        let g = desk(0.5);
        let plan = TransformPlan::for_grid(&g);
        let (s, nu, t) = (1.0, 0.5, 0.3);
        let kappa = g.alpha() + g.d as f64 / 2.0 + 1.0;
        let f = make_test_fields(&g, &TestFieldKind::Gaussian { s }).unwrap();
        let out = inverse(&heat_semigroup(&forward(&f, &plan).unwrap(), nu, t).unwrap(), &plan).unwrap();
        let a = 1.0 + 4.0 * nu * s * t;
        let mut err: f64 = 0.0;
        for (i, v) in out.values.iter().enumerate() {
            let x = g.point(i);
            let r2: f64 = x.iter().map(|v| v * v).sum();
            err = err.max((v - a.powf(-kappa) * (-s * r2 / a).exp()).abs());
        }
        assert!(err / a.powf(-kappa) < 1e-6, "err {err}");
    }

    #[test]
    fn heat_identity_semigroup_and_errors() {
        let g = desk(0.0);
        let plan = TransformPlan::for_grid(&g);
        let f = make_test_fields(&g, &TestFieldKind::BandLimitedRandom { seed: 2, cutoff: 2.0 }).unwrap();
        let spec = forward(&f, &plan).unwrap();
        assert_eq!(heat_semigroup(&spec, 1.0, 0.0).unwrap().coeffs, spec.coeffs);
        let two = heat_semigroup(&heat_semigroup(&spec, 0.7, 0.2).unwrap(), 0.7, 0.3).unwrap();
        let one = heat_semigroup(&spec, 0.7, 0.5).unwrap();
        assert!(max_diff(&two, &one) <= 1e-15 * spec.max_abs());
        assert!(heat_semigroup(&spec, 1.0, -0.1).is_err());
        assert!(heat_semigroup(&spec, 0.0, 0.1).is_err());
    }

    #[test]
    fn dealias_mask_keeps_low_modes() {
        let g = desk(0.0);
        let mask = dealias_mask(&g);
        assert_eq!(mask.len(), g.spectral_len());
        assert!(mask[0]);
        let nyquist_row = g.n / 2;
        assert!(!mask[nyquist_row * g.n_lambda]);
        assert!(!mask[g.n_lambda - 1]);
    }
}
