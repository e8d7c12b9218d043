//! Discretization of `R^d x (0, inf)` with the weighted measure
//! `x_{d+1}^(2 alpha + 1) / ((2 pi)^(d/2) 2^alpha Gamma(alpha + 1)) dx`.
//!
//! The first `d` axes are periodic boxes of length `L` sampled at `N` points
//! centred on the origin, `x_i = (i - N/2) L / N`. The last axis carries Gauss
//! nodes for the weight `x^(2 alpha + 1)` on `(0, R_max)`, so no node sits on the
//! singular point `x_{d+1} = 0`. The radial frequency axis uses the same kind of
//! rule on `(0, Lambda_max)`.
//!
//! Flat storage is row-major with the radial index fastest:
//! `index = ((i_1 N + i_2) N + ... + i_d) N_r + j`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, WnsError};
use crate::special_fn::{radial_rule, BesselOrder};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub d: usize,
    pub order: BesselOrder,
    /// Box length of each periodic axis.
    pub box_len: f64,
    /// Samples per periodic axis (even).
    pub n: usize,
    pub r_max: f64,
    pub n_r: usize,
    pub lambda_max: f64,
    pub n_lambda: usize,
}

impl GridSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        order: BesselOrder,
        box_len: f64,
        n: usize,
        r_max: f64,
        n_r: usize,
        lambda_max: f64,
        n_lambda: usize,
    ) -> Result<Self> {
        let bad = |msg: String| Err(WnsError::InvalidArgument(msg));
        if d == 0 {
            return bad("at least one periodic axis is required".into());
        }
        if n < 2 || !n.is_multiple_of(2) {
            return bad(format!("periodic sample count must be even and >= 2, got {n}"));
        }
        if n_r < 2 || n_lambda < 2 {
            return bad(format!(
                "radial node counts must be >= 2, got N_r = {n_r}, N_lambda = {n_lambda}"
            ));
        }
        if !(box_len > 0.0 && r_max > 0.0 && lambda_max > 0.0)
            || !(box_len.is_finite() && r_max.is_finite() && lambda_max.is_finite())
        {
            return bad("box length, R_max and Lambda_max must be positive and finite".into());
        }
        Ok(GridSpec {
            d,
            order,
            box_len,
            n,
            r_max,
            n_r,
            lambda_max,
            n_lambda,
        })
    }

    /// Desk-scale grid: `d = 1`, `N = 96`, `L = 8 pi`, `N_r = N_lambda = 128`,
    /// `R_max = 16`, `Lambda_max = 12`.
    pub fn desk(order: BesselOrder) -> Self {
        GridSpec::new(1, order, 8.0 * PI, 96, 16.0, 128, 12.0, 128).expect("desk grid is valid")
    }

    /// Small grid for solver runs: `d = 1`, `N = 32`, `L = 4 pi`, `N_r = N_lambda = 64`,
    /// `R_max = 12`, `Lambda_max = 8`.
    pub fn small(order: BesselOrder) -> Self {
        GridSpec::new(1, order, 4.0 * PI, 32, 12.0, 64, 8.0, 64).expect("small grid is valid")
    }

    pub fn alpha(&self) -> f64 {
        self.order.alpha()
    }

    /// `N^d`, the number of periodic sample points.
    pub fn fourier_count(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn physical_len(&self) -> usize {
        self.fourier_count() * self.n_r
    }

    pub fn spectral_len(&self) -> usize {
        self.fourier_count() * self.n_lambda
    }

    pub fn spacing(&self) -> f64 {
        self.box_len / self.n as f64
    }

    pub fn fourier_coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.spacing()
    }

    /// Angular frequency of FFT bin `m` (standard ordering, Nyquist negative).
    pub fn fourier_freq(&self, m: usize) -> f64 {
        let signed = if m < self.n / 2 {
            m as isize
        } else {
            m as isize - self.n as isize
        };
        2.0 * PI * signed as f64 / self.box_len
    }

    /// Splits a flat periodic index into per-axis indices.
    pub fn fourier_multi_index(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.d).rev() {
            out[a] = flat % self.n;
            flat /= self.n;
        }
    }

    pub fn nodes(&self) -> Arc<GridNodes> {
        static CACHE: OnceLock<Mutex<HashMap<GridKey, Arc<GridNodes>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = GridKey::of(self);
        if let Some(n) = cache.lock().unwrap().get(&key) {
            return n.clone();
        }
        let nodes = Arc::new(GridNodes::build(self));
        cache.lock().unwrap().insert(key, nodes.clone());
        nodes
    }

    /// Physical coordinates of a flat node index.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let nodes = self.nodes();
        let mut idx = vec![0; self.d];
        self.fourier_multi_index(flat / self.n_r, &mut idx);
        let mut p: Vec<f64> = idx.iter().map(|&i| self.fourier_coord(i)).collect();
        p.push(nodes.radial[flat % self.n_r]);
        p
    }

    /// Frequency vector of a flat spectral index.
    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        let nodes = self.nodes();
        let mut idx = vec![0; self.d];
        self.fourier_multi_index(flat / self.n_lambda, &mut idx);
        let mut p: Vec<f64> = idx.iter().map(|&m| self.fourier_freq(m)).collect();
        p.push(nodes.frequencies[flat % self.n_lambda]);
        p
    }

    pub(crate) fn check_same(&self, other: &GridSpec, what: &str) -> Result<()> {
        if self != other {
            return Err(WnsError::GridMismatch(format!(
                "{what}: operands live on different grids"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct GridKey([u64; 8]);

impl GridKey {
    pub(crate) fn of(g: &GridSpec) -> Self {
        GridKey([
            g.d as u64,
            g.alpha().to_bits(),
            g.box_len.to_bits(),
            g.n as u64,
            g.r_max.to_bits(),
            g.n_r as u64,
            g.lambda_max.to_bits(),
            g.n_lambda as u64,
        ])
    }
}

/// Radial nodes and quadrature weights of a grid, shared by all users of the grid.
#[derive(Debug)]
pub struct GridNodes {
    /// Radial physical nodes in `(0, R_max)`.
    pub radial: Vec<f64>,
    /// `int_0^R g(x) x^(2a+1) dx ~ sum radial_weights[j] g(radial[j])`.
    pub radial_weights: Vec<f64>,
    /// Radial frequency nodes in `(0, Lambda_max)`.
    pub frequencies: Vec<f64>,
    pub frequency_weights: Vec<f64>,
}

impl GridNodes {
    fn build(g: &GridSpec) -> Self {
        let (radial, radial_weights) =
            radial_rule(g.order, g.n_r, g.r_max).expect("radial rule for a validated grid");
        let (frequencies, frequency_weights) = radial_rule(g.order, g.n_lambda, g.lambda_max)
            .expect("frequency rule for a validated grid");
        GridNodes {
            radial,
            radial_weights,
            frequencies,
            frequency_weights,
        }
    }
}

/// Weight of the periodic part of the measure per sample: `h^d (2 pi)^(-d/2)`.
fn fourier_cell(g: &GridSpec) -> f64 {
    g.spacing().powi(g.d as i32) * (2.0 * PI).powf(-(g.d as f64) / 2.0)
}

/// Weight of the periodic part of the measure per frequency: `(2 pi / L)^d (2 pi)^(-d/2)`.
pub(crate) fn fourier_frequency_cell(g: &GridSpec) -> f64 {
    (2.0 * PI / g.box_len).powi(g.d as i32) * (2.0 * PI).powf(-(g.d as f64) / 2.0)
}

/// Per-node weights `w` with `sum w f ~ int f d mu`.
pub fn measure_weights(grid: &GridSpec) -> Vec<f64> {
    let nodes = grid.nodes();
    let c = fourier_cell(grid) * grid.order.radial_normalization();
    let radial: Vec<f64> = nodes.radial_weights.iter().map(|w| w * c).collect();
    let mut out = Vec::with_capacity(grid.physical_len());
    for _ in 0..grid.fourier_count() {
        out.extend_from_slice(&radial);
    }
    out
}

/// Spectral-side counterpart of [`measure_weights`].
pub fn spectral_measure_weights(grid: &GridSpec) -> Vec<f64> {
    let nodes = grid.nodes();
    let c = fourier_frequency_cell(grid) * grid.order.radial_normalization();
    let radial: Vec<f64> = nodes.frequency_weights.iter().map(|w| w * c).collect();
    let mut out = Vec::with_capacity(grid.spectral_len());
    for _ in 0..grid.fourier_count() {
        out.extend_from_slice(&radial);
    }
    out
}

/// Exponent of a weighted Lebesgue norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormExponent {
    Finite(f64),
    Infinity,
}

impl NormExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(NormExponent::Infinity)
        } else if p >= 1.0 {
            Ok(NormExponent::Finite(p))
        } else {
            Err(WnsError::InvalidArgument(format!(
                "norm exponent must be >= 1, got {p}"
            )))
        }
    }
}

/// `(sum w |v|^p)^(1/p)`, or `max |v|` for `p = inf`.
pub(crate) fn weighted_norm(magnitudes: &[f64], weights: &[f64], p: NormExponent) -> f64 {
    match p {
        NormExponent::Infinity => magnitudes.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        NormExponent::Finite(p) => {
            let scale = magnitudes.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if scale == 0.0 {
                return 0.0;
            }
            let s: f64 = magnitudes
                .iter()
                .zip(weights)
                .map(|(v, w)| w * (v.abs() / scale).powf(p))
                .sum();
            scale * s.powf(1.0 / p)
        }
    }
}

/// Scalar samples on the physical grid. The field stands for its even
/// extension in the last variable.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl PhysicalField {
    pub fn zeros(grid: &GridSpec) -> Self {
        PhysicalField {
            grid: grid.clone(),
            values: vec![0.0; grid.physical_len()],
        }
    }

    pub fn from_values(grid: &GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.physical_len() {
            return Err(WnsError::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.physical_len(),
                values.len()
            )));
        }
        Ok(PhysicalField {
            grid: grid.clone(),
            values,
        })
    }

    /// Samples `f` at every grid node.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.physical_len()).map(|i| f(&grid.point(i))).collect();
        PhysicalField {
            grid: grid.clone(),
            values,
        }
    }

    #[must_use]
    pub fn scale(&self, c: f64) -> Self {
        PhysicalField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn axpy(&self, a: f64, other: &PhysicalField) -> Result<Self> {
        self.grid.check_same(&other.grid, "axpy")?;
        Ok(PhysicalField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// `||f||_{alpha, p}`.
pub fn lp_norm(f: &PhysicalField, p: f64) -> Result<f64> {
    let p = NormExponent::new(p)?;
    if f.values.iter().any(|v| !v.is_finite()) {
        return Err(WnsError::InvalidArgument("field has non-finite samples".into()));
    }
    Ok(weighted_norm(&f.values, &measure_weights(&f.grid), p))
}

/// Weinstein-frequency coefficients on the spectral grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &GridSpec) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.spectral_len()],
        }
    }

    /// Samples `f(lambda)` at every spectral node.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let coeffs = (0..grid.spectral_len())
            .map(|i| f(&grid.frequency(i)))
            .collect();
        SpectralField {
            grid: grid.clone(),
            coeffs,
        }
    }

    #[must_use]
    pub fn scale(&self, c: Complex64) -> Self {
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        self.grid.check_same(&other.grid, "spectral add")?;
        Ok(SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.grid.check_same(&other.grid, "spectral sub")?;
        Ok(SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    /// Pointwise product, the spectral side of convolution.
    pub fn mul(&self, other: &SpectralField) -> Result<Self> {
        self.grid.check_same(&other.grid, "spectral product")?;
        Ok(SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `||F||_{alpha, p}` over the spectral measure.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        let p = NormExponent::new(p)?;
        let mags: Vec<f64> = self.coeffs.iter().map(|c| c.norm()).collect();
        Ok(weighted_norm(&mags, &spectral_measure_weights(&self.grid), p))
    }
}

/// Velocity `u = (u_1, ..., u_{d+1})` at time `t`.
///
/// Real initial data stays in the class where `u_1..u_d` are real and
/// `u_{d+1}` is purely imaginary: the Weinstein gradient
/// `i F^-1(lambda_{d+1} F f)` maps real even functions to imaginary ones. The
/// last entry of `components` therefore stores `Im u_{d+1}`; all other entries
/// store the real components directly. Pointwise magnitudes and norms are
/// unaffected by the convention.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityState {
    pub t: f64,
    pub components: Vec<PhysicalField>,
    /// `||div_W u||_{alpha, 2}`.
    pub div_norm: f64,
}

impl VelocityState {
    pub fn zeros(grid: &GridSpec, t: f64) -> Self {
        VelocityState {
            t,
            components: (0..=grid.d).map(|_| PhysicalField::zeros(grid)).collect(),
            div_norm: 0.0,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.components[0].grid
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let g = self.grid();
        if self.components.len() != g.d + 1 {
            return Err(WnsError::InvalidArgument(format!(
                "velocity needs {} components, got {}",
                g.d + 1,
                self.components.len()
            )));
        }
        for c in &self.components[1..] {
            g.check_same(&c.grid, "velocity components")?;
        }
        Ok(())
    }

    /// Pointwise Euclidean magnitude `|u(x)|`.
    pub fn magnitudes(&self) -> Vec<f64> {
        let n = self.components[0].values.len();
        (0..n)
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c.values[i] * c.values[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// `|| |u| ||_{alpha, p}`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        let p = NormExponent::new(p)?;
        Ok(weighted_norm(&self.magnitudes(), &measure_weights(self.grid()), p))
    }
}

/// Deterministic test-field families.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFieldKind {
    /// `E_s(x) = exp(-s |x|^2)`.
    Gaussian { s: f64 },
    /// Random trigonometric polynomial in the periodic variables (wavenumbers
    /// up to `cutoff`) times a polynomial in `x_{d+1}^2`, under a Gaussian
    /// envelope. Reproducible from `seed`.
    BandLimitedRandom { seed: u64, cutoff: f64 },
    Constant(f64),
}

/// Envelope exponent of band-limited random fields.
pub const BAND_LIMITED_ENVELOPE: f64 = 0.5;

#[derive(Debug, Clone)]
struct RandomMode {
    wavevector: Vec<f64>,
    phase: f64,
    radial: [f64; 3],
}

/// Closed-form evaluator behind [`TestFieldKind::BandLimitedRandom`].
#[derive(Debug, Clone)]
pub struct BandLimitedProfile {
    modes: Vec<RandomMode>,
}

impl BandLimitedProfile {
    pub fn new(grid: &GridSpec, seed: u64, cutoff: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k0 = 2.0 * PI / grid.box_len;
        let m_max = (cutoff / k0).floor().max(0.0) as i64;
        let modes = (0..6)
            .map(|_| RandomMode {
                wavevector: (0..grid.d)
                    .map(|_| k0 * rng.gen_range(-m_max..=m_max) as f64)
                    .collect(),
                phase: rng.gen_range(0.0..2.0 * PI),
                radial: [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-0.5..0.5),
                    rng.gen_range(-0.1..0.1),
                ],
            })
            .collect();
        BandLimitedProfile { modes }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = x.len() - 1;
        let r2 = x[d] * x[d];
        let envelope = (-BAND_LIMITED_ENVELOPE * x.iter().map(|v| v * v).sum::<f64>()).exp();
        let s: f64 = self
            .modes
            .iter()
            .map(|m| {
                let arg: f64 = m.wavevector.iter().zip(x).map(|(k, v)| k * v).sum::<f64>() + m.phase;
                arg.cos() * (m.radial[0] + m.radial[1] * r2 + m.radial[2] * r2 * r2)
            })
            .sum();
        s * envelope
    }
}

pub fn make_test_fields(grid: &GridSpec, kind: &TestFieldKind) -> Result<PhysicalField> {
    match *kind {
        TestFieldKind::Gaussian { s } => {
            if !(s > 0.0) {
                return Err(WnsError::InvalidArgument(format!(
                    "Gaussian parameter must be positive, got {s}"
                )));
            }
            Ok(PhysicalField::from_fn(grid, |x| gaussian(s, x)))
        }
        TestFieldKind::BandLimitedRandom { seed, cutoff } => {
            let profile = BandLimitedProfile::new(grid, seed, cutoff);
            Ok(PhysicalField::from_fn(grid, |x| profile.eval(x)))
        }
        TestFieldKind::Constant(c) => Ok(PhysicalField {
            grid: grid.clone(),
            values: vec![c; grid.physical_len()],
        }),
    }
}

/// `E_s(x) = exp(-s |x|^2)`.
pub fn gaussian(s: f64, x: &[f64]) -> f64 {
    (-s * x.iter().map(|v| v * v).sum::<f64>()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk0() -> GridSpec {
        GridSpec::desk(BesselOrder::new(0.0).unwrap())
    }

    #[test]
    fn gaussian_integral_matches_transform_at_origin() {
        for &alpha in &[0.0, 0.5, 1.5] {
            let g = GridSpec::desk(BesselOrder::new(alpha).unwrap());
            let f = make_test_fields(&g, &TestFieldKind::Gaussian { s: 1.0 }).unwrap();
            let w = measure_weights(&g);
            let integral: f64 = f.values.iter().zip(&w).map(|(v, w)| v * w).sum();
            let exact = 2f64.powf(-(alpha + 0.5 + 1.0));
            assert!((integral - exact).abs() / exact < 1e-12, "alpha {alpha}");
        }
    }

    #[test]
    fn weights_positive_and_zero_integral() {
        let g = desk0();
        assert!(measure_weights(&g).iter().all(|&w| w > 0.0));
        let z = make_test_fields(&g, &TestFieldKind::Constant(0.0)).unwrap();
        assert_eq!(lp_norm(&z, 2.0).unwrap(), 0.0);
        assert_eq!(lp_norm(&z, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn quarter_gaussian_has_unit_l2_norm() {
        let g = desk0();
        let f = make_test_fields(&g, &TestFieldKind::Gaussian { s: 0.25 }).unwrap();
        assert!((lp_norm(&f, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let three = f.scale(3.0);
        for p in [1.0, 2.0, 4.5, f64::INFINITY] {
            let a = lp_norm(&three, p).unwrap();
            let b = 3.0 * lp_norm(&f, p).unwrap();
            assert!((a - b).abs() <= 1e-13 * b);
        }
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn test_fields_are_deterministic() {
        let g = desk0();
        assert_eq!(gaussian(1.0, &[0.0, 0.0]), 1.0);
        let kind = TestFieldKind::BandLimitedRandom { seed: 7, cutoff: 2.0 };
        let a = make_test_fields(&g, &kind).unwrap();
        let b = make_test_fields(&g, &kind).unwrap();
        assert_eq!(a, b);
        let c = make_test_fields(&g, &TestFieldKind::BandLimitedRandom { seed: 8, cutoff: 2.0 }).unwrap();
        assert_ne!(a, c);
        assert!(make_test_fields(&g, &TestFieldKind::Gaussian { s: 0.0 }).is_err());
    }

    #[test]
    fn radial_refinement_converges() {
        let order = BesselOrder::new(0.5).unwrap();
        let exact = 2f64.powf(-(0.5 + 0.5 + 1.0));
        let mut prev = f64::INFINITY;
        for &n_r in &[4usize, 8, 16] {
            let g = GridSpec::new(1, order, 8.0 * PI, 64, 16.0, n_r, 8.0, 16).unwrap();
            let f = make_test_fields(&g, &TestFieldKind::Gaussian { s: 1.0 }).unwrap();
            let integral: f64 = f.values.iter().zip(measure_weights(&g)).map(|(v, w)| v * w).sum();
            let err = (integral - exact).abs();
            assert!(err < prev || err < 1e-14);
            prev = err;
        }
    }

    #[test]
    fn grid_validation() {
        let o = BesselOrder::new(0.0).unwrap();
        assert!(GridSpec::new(1, o, 1.0, 63, 1.0, 8, 1.0, 8).is_err());
        assert!(GridSpec::new(1, o, 1.0, 64, 1.0, 1, 1.0, 8).is_err());
        assert!(GridSpec::new(0, o, 1.0, 64, 1.0, 8, 1.0, 8).is_err());
        assert!(GridSpec::new(1, o, 1.0, 64, -1.0, 8, 1.0, 8).is_err());
        let g = desk0();
        let nodes = g.nodes();
        assert!(nodes.radial.iter().all(|&x| x > 0.0 && x <= g.r_max));
        assert_eq!(g.fourier_freq(1), 2.0 * PI / g.box_len);
        assert!(g.fourier_freq(g.n - 1) < 0.0);
    }
}
