//! Independent Fourier/cosine pseudospectral solver for the `alpha = -1/2` case.
//!
//! At `alpha = -1/2` the Bessel kernel is `cos`, so fields even in the last
//! variable expand in cosine series on `[0, R]`. This module solves the same
//! mild equation with its own dense DFT and DCT matrices, its own multipliers
//! and its own time stepper; it shares only the grid geometry with the main
//! stack. The multipliers follow the literal definitions: the gradient is
//! `i lambda_j` on every axis, including the cosine one.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, WnsError};
use crate::grid::{measure_weights, GridSpec, VelocityState};
use crate::solver::{march_with, calibrate_constants, NormSeries, SolverConfig};
use crate::translation::SpectralInterpolant;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Periodic axes times a midpoint cosine axis `y_j = (j + 1/2) R / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineGrid {
    pub d: usize,
    pub n: usize,
    pub box_len: f64,
    pub m: usize,
    pub r_len: f64,
}

impl CosineGrid {
    pub fn new(d: usize, n: usize, box_len: f64, m: usize, r_len: f64) -> Result<Self> {
        if d == 0 || n < 2 || !n.is_multiple_of(2) || m < 2 || !(box_len > 0.0) || !(r_len > 0.0) {
            return Err(WnsError::InvalidArgument(format!(
                "invalid cosine grid: d = {d}, N = {n}, L = {box_len}, M = {m}, R = {r_len}"
            )));
        }
        Ok(CosineGrid { d, n, box_len, m, r_len })
    }

    /// Same periodic axes as `grid`, cosine axis `[0, r_len]` with `m` modes.
    pub fn matching(grid: &GridSpec, m: usize, r_len: f64) -> Result<Self> {
        CosineGrid::new(grid.d, grid.n, grid.box_len, m, r_len)
    }

    pub fn rows(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn len(&self) -> usize {
        self.rows() * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn index(&self, mut row: usize) -> Vec<usize> {
        let mut idx = vec![0; self.d];
        for a in (0..self.d).rev() {
            idx[a] = row % self.n;
            row /= self.n;
        }
        idx
    }

    fn wavenumber(&self, i: usize) -> f64 {
        let s = if i < self.n / 2 { i as f64 } else { i as f64 - self.n as f64 };
        2.0 * PI * s / self.box_len
    }

    pub fn radial_node(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.r_len / self.m as f64
    }

    pub fn radial_freq(&self, k: usize) -> f64 {
        PI * k as f64 / self.r_len
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let h = self.box_len / self.n as f64;
        let mut p: Vec<f64> = self
            .index(flat / self.m)
            .into_iter()
            .map(|i| (i as f64 - (self.n / 2) as f64) * h)
            .collect();
        p.push(self.radial_node(flat % self.m));
        p
    }

    /// Frequency vector of coefficient `flat`.
    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        let mut f: Vec<f64> = self.index(flat / self.m).into_iter().map(|i| self.wavenumber(i)).collect();
        f.push(self.radial_freq(flat % self.m));
        f
    }
}

/// Dense transform matrices of a [`CosineGrid`].
struct Transforms {
    grid: CosineGrid,
    /// `e^{-i k_m x_i}`, row `m`, column `i`.
    dft: Vec<Complex64>,
    /// `cos(lambda_k y_j)`, row `k`, column `j`.
    dct: Vec<f64>,
}

impl Transforms {
    fn new(grid: &CosineGrid) -> Self {
        let n = grid.n;
        let h = grid.box_len / n as f64;
        let mut dft = vec![ZERO; n * n];
        for m in 0..n {
            for i in 0..n {
                let x = (i as f64 - (n / 2) as f64) * h;
                dft[m * n + i] = Complex64::from_polar(1.0, -grid.wavenumber(m) * x);
            }
        }
        let mm = grid.m;
        let mut dct = vec![0.0; mm * mm];
        for k in 0..mm {
            for j in 0..mm {
                dct[k * mm + j] = (grid.radial_freq(k) * grid.radial_node(j)).cos();
            }
        }
        Transforms {
            grid: grid.clone(),
            dft,
            dct,
        }
    }

    /// Dense DFT along every periodic axis of `rows x m` data.
    fn periodic(&self, data: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let g = &self.grid;
        let n = g.n;
        let mut cur = data.to_vec();
        for axis in 0..g.d {
            let stride = n.pow((g.d - 1 - axis) as u32) * g.m;
            let mut next = vec![ZERO; cur.len()];
            next.par_chunks_mut(stride * n)
                .zip(cur.par_chunks(stride * n))
                .for_each(|(dst, src)| {
                    for out_i in 0..n {
                        for off in 0..stride {
                            let mut acc = ZERO;
                            for in_i in 0..n {
                                let w = if inverse {
                                    self.dft[in_i * n + out_i].conj() / n as f64
                                } else {
                                    self.dft[out_i * n + in_i]
                                };
                                acc += w * src[in_i * stride + off];
                            }
                            dst[out_i * stride + off] = acc;
                        }
                    }
                });
            cur = next;
        }
        cur
    }

    fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mm = self.grid.m;
        let mut radial = vec![ZERO; values.len()];
        radial.par_chunks_mut(mm).zip(values.par_chunks(mm)).for_each(|(dst, src)| {
            for k in 0..mm {
                dst[k] = (0..mm).map(|j| src[j] * self.dct[k * mm + j]).sum();
            }
        });
        self.periodic(&radial, false)
    }

    fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mm = self.grid.m;
        let rows = self.periodic(coeffs, true);
        let mut out = vec![ZERO; coeffs.len()];
        out.par_chunks_mut(mm).zip(rows.par_chunks(mm)).for_each(|(dst, src)| {
            for j in 0..mm {
                let mut acc = src[0];
                for k in 1..mm {
                    acc += src[k] * (2.0 * self.dct[k * mm + j]);
                }
                dst[j] = acc / mm as f64;
            }
        });
        out
    }
}

/// Cosine-series representation of a velocity field at time `t`.
#[derive(Debug, Clone)]
pub struct OracleState {
    pub t: f64,
    /// Per component, `rows x m` coefficients.
    pub coeffs: Vec<Vec<Complex64>>,
}

impl OracleState {
    /// Evaluates every component at an arbitrary point.
    pub fn eval(&self, grid: &CosineGrid, x: &[f64]) -> Vec<Complex64> {
        let mm = grid.m;
        let radial: Vec<f64> = (0..mm)
            .map(|k| {
                let c = (grid.radial_freq(k) * x[grid.d]).cos();
                if k == 0 { c } else { 2.0 * c }
            })
            .collect();
        let norm = (grid.rows() * mm) as f64;
        self.coeffs
            .iter()
            .map(|c| {
                let mut acc = ZERO;
                for row in 0..grid.rows() {
                    let phase: f64 = grid.index(row).into_iter().zip(x).map(|(i, xi)| grid.wavenumber(i) * xi).sum();
                    let inner: Complex64 = c[row * mm..(row + 1) * mm].iter().zip(&radial).map(|(a, b)| a * *b).sum();
                    acc += inner * Complex64::from_polar(1.0, phase);
                }
                acc / norm
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub p: f64,
    pub nonlinear: bool,
    /// `(|m| cut, radial frequency cut)` for products; `None` disables dealiasing.
    pub dealias: Option<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub series: NormSeries,
    pub states: Vec<OracleState>,
}

struct Stepper {
    tr: Transforms,
    freq: Vec<Vec<f64>>,
    lsq: Vec<f64>,
    keep: Option<Vec<bool>>,
    weights: Vec<f64>,
}

impl Stepper {
    fn new(grid: &CosineGrid, cfg: &OracleConfig) -> Self {
        let dim = grid.d + 1;
        let mut freq = vec![vec![0.0; grid.len()]; dim];
        let mut lsq = vec![0.0; grid.len()];
        for node in 0..grid.len() {
            let f = grid.frequency(node);
            for j in 0..dim {
                freq[j][node] = f[j];
            }
            lsq[node] = f.iter().map(|v| v * v).sum();
        }
        let keep = cfg.dealias.map(|(mode_cut, radial_cut)| {
            (0..grid.len())
                .map(|node| {
                    let idx = grid.index(node / grid.m);
                    let ok = idx.iter().all(|&i| {
                        let s = if i < grid.n / 2 { i as isize } else { i as isize - grid.n as isize };
                        s.unsigned_abs() <= mode_cut
                    });
                    ok && grid.radial_freq(node % grid.m) <= radial_cut
                })
                .collect()
        });
        // Midpoint weights of d mu at alpha = -1/2: h^d (R/M) sqrt(2/pi) (2 pi)^(-d/2).
        let h = grid.box_len / grid.n as f64;
        let w = h.powi(grid.d as i32) * grid.r_len / grid.m as f64 * (2.0 / PI).sqrt()
            * (2.0 * PI).powf(-(grid.d as f64) / 2.0);
        Stepper {
            tr: Transforms::new(grid),
            freq,
            lsq,
            keep,
            weights: vec![w; grid.len()],
        }
    }

    fn truncate(&self, c: &mut [Complex64]) {
        if let Some(keep) = &self.keep {
            for (v, &k) in c.iter_mut().zip(keep) {
                if !k {
                    *v = ZERO;
                }
            }
        }
    }

    fn project(&self, u: &mut [Vec<Complex64>]) {
        for node in 0..self.lsq.len() {
            let l2 = self.lsq[node];
            if l2 == 0.0 {
                continue;
            }
            let dot: Complex64 = u.iter().zip(&self.freq).map(|(c, f)| c[node] * f[node]).sum();
            for (c, f) in u.iter_mut().zip(&self.freq) {
                c[node] -= dot * (f[node] / l2);
            }
        }
    }

    /// `P div(u (x) u)`, with `div(u (x) u)_j = i sum_k lambda_k (u_j u_k)^`.
    fn nonlinear(&self, u: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let phys: Vec<Vec<Complex64>> = u
            .iter()
            .map(|c| {
                let mut c = c.clone();
                self.truncate(&mut c);
                self.tr.inverse(&c)
            })
            .collect();
        let dim = u.len();
        let mut out: Vec<Vec<Complex64>> = (0..dim)
            .map(|j| {
                let mut acc = vec![ZERO; self.lsq.len()];
                for k in 0..dim {
                    let prod: Vec<Complex64> = phys[j].iter().zip(&phys[k]).map(|(a, b)| a * b).collect();
                    let c = self.tr.forward(&prod);
                    for ((a, v), f) in acc.iter_mut().zip(&c).zip(&self.freq[k]) {
                        *a += I * *f * v;
                    }
                }
                acc
            })
            .collect();
        self.project(&mut out);
        for c in out.iter_mut() {
            self.truncate(c);
        }
        out
    }

    fn norm(&self, u: &[Vec<Complex64>], p: f64) -> f64 {
        let phys: Vec<Vec<Complex64>> = u.iter().map(|c| self.tr.inverse(c)).collect();
        let s: f64 = (0..self.lsq.len())
            .map(|i| {
                let m: f64 = phys.iter().map(|c| c[i].norm_sqr()).sum::<f64>().sqrt();
                self.weights[i] * m.powf(p)
            })
            .sum();
        s.powf(1.0 / p)
    }

    fn div_norm(&self, u: &[Vec<Complex64>]) -> f64 {
        let mut div = vec![ZERO; self.lsq.len()];
        for (c, f) in u.iter().zip(&self.freq) {
            for ((d, v), l) in div.iter_mut().zip(c).zip(f) {
                *d += I * *l * v;
            }
        }
        self.norm(&[div], 2.0)
    }
}

/// `(int_0^1 e^{-zs} ds, int_0^1 s e^{-zs} ds)` by series near 0.
fn phi_weights(z: f64) -> (f64, f64) {
    if z < 1e-3 {
        (
            1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0,
            0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0,
        )
    } else {
        let e = (-z).exp();
        ((1.0 - e) / z, (1.0 - e * (1.0 + z)) / (z * z))
    }
}

/// Marches a main-stack state (at `alpha = -1/2`) on `grid` to `cfg.t_end`
/// with fixed steps `cfg.dt`. The state is sampled on the cosine grid through
/// its exact spectral synthesis.
pub fn classical_march(u0: &VelocityState, grid: &CosineGrid, cfg: &OracleConfig) -> Result<OracleRun> {
    let sampler = state_sampler(u0)?;
    classical_march_fn(grid, sampler, cfg)
}

/// Pointwise evaluation of a state, with the last component made imaginary.
fn state_sampler(u0: &VelocityState) -> Result<impl Fn(&[f64]) -> Vec<Complex64> + Sync> {
    let grid = u0.grid();
    if !grid.order.is_classical() {
        return Err(WnsError::InvalidArgument(
            "the classical oracle applies to alpha = -1/2 only".into(),
        ));
    }
    let d = grid.d;
    let interps = u0
        .components
        .iter()
        .map(SpectralInterpolant::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(move |x: &[f64]| -> Vec<Complex64> {
        interps
            .iter()
            .enumerate()
            .map(|(j, f)| {
                let v = f.eval(x);
                if j == d { Complex64::new(0.0, v) } else { Complex64::new(v, 0.0) }
            })
            .collect()
    })
}

/// Marches `u0` (true complex component values at each point) to `cfg.t_end`
/// with fixed steps `cfg.dt`, using the exponential Heun scheme.
pub fn classical_march_fn(
    grid: &CosineGrid,
    u0: impl Fn(&[f64]) -> Vec<Complex64> + Sync,
    cfg: &OracleConfig,
) -> Result<OracleRun> {
    if !(cfg.dt > 0.0 && cfg.t_end >= 0.0) {
        return Err(WnsError::InvalidArgument("oracle needs dt > 0 and t_end >= 0".into()));
    }
    let steps = (cfg.t_end / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let mut times: Vec<f64> = (0..=steps).map(|s| (s as f64 * cfg.dt).min(cfg.t_end)).collect();
    times.dedup();
    classical_march_at(grid, u0, cfg, &times)
}

/// [`classical_march_fn`] through the given increasing times, starting at `times[0]`.
pub fn classical_march_at(
    grid: &CosineGrid,
    u0: impl Fn(&[f64]) -> Vec<Complex64> + Sync,
    cfg: &OracleConfig,
    times: &[f64],
) -> Result<OracleRun> {
    if !(cfg.nu > 0.0 && cfg.p >= 1.0) {
        return Err(WnsError::InvalidArgument("oracle needs nu > 0 and p >= 1".into()));
    }
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(WnsError::InvalidArgument("oracle times must be non-empty and increasing".into()));
    }
    let st = Stepper::new(grid, cfg);
    let dim = grid.d + 1;
    let samples: Vec<Vec<Complex64>> = (0..grid.len()).into_par_iter().map(|i| u0(&grid.point(i))).collect();
    if samples.iter().any(|s| s.len() != dim) {
        return Err(WnsError::InvalidArgument(format!("initial data must have {dim} components")));
    }
    let mut u: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| st.tr.forward(&samples.iter().map(|s| s[j]).collect::<Vec<_>>()))
        .collect();
    st.project(&mut u);

    let mut series = NormSeries::default();
    let mut t = times[0];
    let mut states = vec![OracleState { t, coeffs: u.clone() }];
    series.push(t, st.norm(&u, cfg.p), st.norm(&u, 2.0), st.div_norm(&u))?;
    for &next in &times[1..] {
        let h = next - t;
        let len = st.lsq.len();
        let mut decay = vec![0.0; len];
        let mut w0h = vec![0.0; len];
        let mut w1h = vec![0.0; len];
        for n in 0..len {
            let z = cfg.nu * st.lsq[n] * h;
            let (w0, w1) = phi_weights(z);
            decay[n] = (-z).exp();
            w0h[n] = w0 * h;
            w1h[n] = w1 * h;
        }
        u = if cfg.nonlinear {
            let n0 = st.nonlinear(&u);
            let pred: Vec<Vec<Complex64>> = (0..dim)
                .map(|j| (0..len).map(|n| decay[n] * u[j][n] - w0h[n] * n0[j][n]).collect())
                .collect();
            let n1 = st.nonlinear(&pred);
            (0..dim)
                .map(|j| {
                    (0..len)
                        .map(|n| decay[n] * u[j][n] - w1h[n] * n0[j][n] - (w0h[n] - w1h[n]) * n1[j][n])
                        .collect()
                })
                .collect()
        } else {
            (0..dim).map(|j| (0..len).map(|n| decay[n] * u[j][n]).collect()).collect()
        };
        st.project(&mut u);
        t = next;
        series.push(t, st.norm(&u, cfg.p), st.norm(&u, 2.0), st.div_norm(&u))?;
        states.push(OracleState { t, coeffs: u.clone() });
    }
    Ok(OracleRun { series, states })
}

/// Relative weighted `L^2` gaps between a main-stack march and the oracle.
#[derive(Debug, Clone)]
pub struct OracleComparison {
    pub times: Vec<f64>,
    pub gaps: Vec<f64>,
    pub max_gap: f64,
}

/// Runs the main solver at `alpha = -1/2` and the oracle on `oracle_grid`
/// through the same step sequence from the same initial field, and measures
/// `||u_main(t) - u_oracle(t)||_2 / ||u_main(t)||_2` on the main grid.
pub fn compare_with_oracle(u0: &VelocityState, cfg: &SolverConfig, oracle_grid: &CosineGrid) -> Result<OracleComparison> {
    let grid = &cfg.grid;
    if oracle_grid.d != grid.d || oracle_grid.n != grid.n || oracle_grid.box_len != grid.box_len {
        return Err(WnsError::GridMismatch(
            "oracle grid must share the periodic axes of the main grid".into(),
        ));
    }
    let sampler = state_sampler(u0)?;
    let mut main_cfg = cfg.clone();
    main_cfg.snapshot_stride = 1;
    let constants = calibrate_constants(&main_cfg)?;
    let main = march_with(u0, &main_cfg, constants, None)?;
    let d = grid.d;
    let ocfg = OracleConfig {
        nu: cfg.nu,
        dt: cfg.dt,
        t_end: cfg.t_end,
        p: cfg.p,
        nonlinear: cfg.nonlinear,
        dealias: cfg.dealias.then_some((grid.n / 3, 2.0 / 3.0 * grid.lambda_max)),
    };
    let times: Vec<f64> = main.snapshots.iter().map(|s| s.t).collect();
    let oracle = classical_march_at(oracle_grid, sampler, &ocfg, &times)?;
    let weights = measure_weights(grid);
    let mut times = Vec::new();
    let mut gaps = Vec::new();
    for (ms, os) in main.snapshots.iter().zip(&oracle.states) {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..grid.physical_len() {
            let x = grid.point(i);
            let ov = os.eval(oracle_grid, &x);
            for j in 0..=d {
                let mv = ms.components[j].values[i];
                let o = if j == d { ov[j].im } else { ov[j].re };
                num += weights[i] * (mv - o) * (mv - o);
                den += weights[i] * mv * mv;
            }
        }
        times.push(ms.t);
        gaps.push(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() });
    }
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    Ok(OracleComparison { times, gaps, max_gap })
}
