//! Mild solutions of the Navier–Stokes–Weinstein system
//!
//! ```text
//! u(t) = e^{nu t Delta_W} u0 - int_0^t e^{nu (t - s) Delta_W} P div_W(u (x) u)(s) ds
//! ```
//!
//! solved either by Picard iteration on a fixed time grid or by marching
//! with an exponential integrator.
//!
//! Internally every component is carried as its true complex spectrum
//! `F_W(u_j)`; [`VelocityState`] is only the storage format.

pub mod blowup;
pub mod initial;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, WnsError};
use crate::grid::{
    measure_weights, weighted_norm, GridSpec, NormExponent, PhysicalField, SpectralField, VelocityState,
};
use crate::operators::{apply_mask, dealias_mask, FrequencyGrid};
use crate::transform::TransformPlan;

pub use blowup::{blowup_monitor, BlowupFit, BlowupReport, KappaMode, NormSeries};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    Picard,
    March,
}

impl std::str::FromStr for SolverMode {
    type Err = WnsError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "picard" => Ok(SolverMode::Picard),
            "march" => Ok(SolverMode::March),
            other => Err(WnsError::InvalidArgument(format!(
                "solver mode must be `picard` or `march`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub nu: f64,
    /// Lebesgue exponent of the solution space, `2 alpha + d + 2 < p < inf`.
    pub p: f64,
    pub grid: GridSpec,
    pub mode: SolverMode,
    /// Largest march step.
    pub dt: f64,
    pub picard_max_iter: usize,
    pub picard_tol: f64,
    pub t_end: f64,
    pub dealias: bool,
    /// Uniform time panels of the Picard grid.
    pub panels: usize,
    /// Fraction of the existence time allowed per march step.
    pub safety: f64,
    /// March stops once `||u||_p` exceeds this.
    pub overflow_guard: f64,
    pub max_steps: usize,
    /// Record a snapshot every this many march steps; 0 disables snapshots.
    pub snapshot_stride: usize,
    /// Test hook: drop `P div_W(u (x) u)` and solve the Stokes problem.
    pub nonlinear: bool,
}

impl SolverConfig {
    pub fn new(grid: GridSpec, nu: f64, p: f64) -> Result<Self> {
        let cfg = SolverConfig {
            nu,
            p,
            grid,
            mode: SolverMode::March,
            dt: 1e-2,
            picard_max_iter: 25,
            picard_tol: 1e-10,
            t_end: 0.1,
            dealias: true,
            panels: 16,
            safety: 0.5,
            overflow_guard: 1e12,
            max_steps: 100_000,
            snapshot_stride: 0,
            nonlinear: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `2 alpha + d + 2`, the lower limit for `p`.
    pub fn critical_exponent(&self) -> f64 {
        2.0 * self.grid.alpha() + self.grid.d as f64 + 2.0
    }

    /// `theta = (p - 2 alpha - d - 2) / (2p)`.
    pub fn theta(&self) -> f64 {
        (self.p - self.critical_exponent()) / (2.0 * self.p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(WnsError::InvalidArgument(m));
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return bad(format!("viscosity must be positive, got {}", self.nu));
        }
        let crit = self.critical_exponent();
        if !(self.p > crit) || !self.p.is_finite() {
            return bad(format!(
                "local existence needs 2*alpha + d + 2 < p < inf; here 2*alpha + d + 2 = {crit} and p = {}",
                self.p
            ));
        }
        if !(self.dt > 0.0) || !(self.picard_tol > 0.0) {
            return bad("dt and picard_tol must be positive".into());
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end must be finite and >= 0, got {}", self.t_end));
        }
        if self.panels == 0 || self.picard_max_iter == 0 || self.max_steps == 0 {
            return bad("panels, picard_max_iter and max_steps must be positive".into());
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad(format!("safety factor must lie in (0, 1], got {}", self.safety));
        }
        Ok(())
    }
}

/// Spectra `F_W(u_j)` of all components.
pub type SpectralVelocity = Vec<Vec<Complex64>>;

/// Plans, multipliers and masks shared by the solver routines.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub grid: GridSpec,
    pub plan: Arc<TransformPlan>,
    pub freq: Arc<FrequencyGrid>,
    mask: Option<Vec<bool>>,
    weights: Vec<f64>,
}

impl Workspace {
    pub fn new(grid: &GridSpec, dealias: bool) -> Self {
        Workspace {
            grid: grid.clone(),
            plan: TransformPlan::for_grid(grid),
            freq: FrequencyGrid::for_grid(grid),
            mask: dealias.then(|| dealias_mask(grid)),
            weights: measure_weights(grid),
        }
    }

    pub fn dim(&self) -> usize {
        self.grid.d + 1
    }

    /// True spectra of a stored state (last component is `i F(w)`).
    pub fn to_spectral(&self, u: &VelocityState) -> Result<SpectralVelocity> {
        self.grid.check_same(u.grid(), "velocity")?;
        u.validate()?;
        let dim = self.dim();
        Ok(u.components
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let spec = self.plan.forward_real(&c.values);
                if j + 1 == dim {
                    spec.into_iter().map(|v| I * v).collect()
                } else {
                    spec
                }
            })
            .collect())
    }

    /// Stored state of true spectra, with its divergence diagnostic.
    pub fn to_state(&self, spec: &SpectralVelocity, t: f64) -> Result<VelocityState> {
        let dim = self.dim();
        let components = spec
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let phys = self.plan.inverse_complex(s);
                let values = if j + 1 == dim {
                    phys.iter().map(|c| c.im).collect()
                } else {
                    phys.iter().map(|c| c.re).collect()
                };
                PhysicalField::from_values(&self.grid, values)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VelocityState {
            t,
            components,
            div_norm: self.div_norm(spec),
        })
    }

    /// `|| div_W u ||_{alpha, 2}` from spectra.
    pub fn div_norm(&self, spec: &SpectralVelocity) -> f64 {
        let mut div = vec![ZERO; self.grid.spectral_len()];
        for (uj, lj) in spec.iter().zip(&self.freq.lambda) {
            for ((d, u), l) in div.iter_mut().zip(uj).zip(lj) {
                *d += I * *l * u;
            }
        }
        let phys = self.plan.inverse_complex(&div);
        let mags: Vec<f64> = phys.iter().map(|c| c.norm()).collect();
        weighted_norm(&mags, &self.weights, NormExponent::Finite(2.0))
    }

    /// `|| |u| ||_{alpha, p}` from spectra.
    pub fn lp_norm(&self, spec: &SpectralVelocity, p: f64) -> Result<f64> {
        let p = NormExponent::new(p)?;
        let mut mag2 = vec![0.0; self.grid.physical_len()];
        for s in spec {
            for (m, v) in mag2.iter_mut().zip(self.plan.inverse_complex(s)) {
                *m += v.norm_sqr();
            }
        }
        let mags: Vec<f64> = mag2.into_iter().map(f64::sqrt).collect();
        Ok(weighted_norm(&mags, &self.weights, p))
    }

    /// Applies `M(xi)` node-wise in place.
    pub fn project(&self, spec: &mut SpectralVelocity) {
        let dim = self.dim();
        let f = &self.freq;
        for node in 0..f.len() {
            let l2 = f.lambda_sq[node];
            if l2 == 0.0 {
                continue;
            }
            let dot: Complex64 = (0..dim).map(|k| spec[k][node] * f.lambda[k][node]).sum();
            for j in 0..dim {
                spec[j][node] -= dot * (f.lambda[j][node] / l2);
            }
        }
    }

    fn masked(&self, s: &[Complex64]) -> Vec<Complex64> {
        let mut v = s.to_vec();
        if let Some(mask) = &self.mask {
            for (c, &keep) in v.iter_mut().zip(mask) {
                if !keep {
                    *c = ZERO;
                }
            }
        }
        v
    }

    /// `div_W(u (x) v)` in spectral form, `i sum_k lambda_k F(u_j v_k)`, from
    /// dealiased inputs.
    pub fn flux(&self, u: &SpectralVelocity, v: &SpectralVelocity) -> SpectralVelocity {
        let dim = self.dim();
        let phys_u: Vec<Vec<Complex64>> = u.par_iter().map(|s| self.plan.inverse_complex(&self.masked(s))).collect();
        let phys_v: Vec<Vec<Complex64>> = if std::ptr::eq(u, v) {
            phys_u.clone()
        } else {
            v.par_iter().map(|s| self.plan.inverse_complex(&self.masked(s))).collect()
        };
        (0..dim)
            .into_par_iter()
            .map(|j| {
                let mut acc = vec![ZERO; self.grid.spectral_len()];
                for k in 0..dim {
                    let prod: Vec<Complex64> =
                        phys_u[j].iter().zip(&phys_v[k]).map(|(a, b)| a * b).collect();
                    let spec = self.plan.forward_complex(&prod);
                    for ((a, s), l) in acc.iter_mut().zip(&spec).zip(&self.freq.lambda[k]) {
                        *a += I * *l * s;
                    }
                }
                acc
            })
            .collect()
    }

    /// Pressure spectrum `-(sum_jk lambda_j lambda_k F(u_j u_k)) / |lambda|^2`,
    /// zero at `lambda = 0`.
    pub fn pressure(&self, u: &SpectralVelocity) -> Vec<Complex64> {
        let phys: Vec<Vec<Complex64>> = u.iter().map(|s| self.plan.inverse_complex(&self.masked(s))).collect();
        let f = &self.freq;
        let mut p = vec![ZERO; self.grid.spectral_len()];
        for j in 0..self.dim() {
            for k in 0..self.dim() {
                let prod: Vec<Complex64> = phys[j].iter().zip(&phys[k]).map(|(a, b)| a * b).collect();
                let s = self.plan.forward_complex(&prod);
                for n in 0..p.len() {
                    p[n] += s[n] * f.lambda[j][n] * f.lambda[k][n];
                }
            }
        }
        for (c, l2) in p.iter_mut().zip(&f.lambda_sq) {
            *c = if *l2 == 0.0 { ZERO } else { -*c / *l2 };
        }
        p
    }

    /// `P div_W(u (x) v)` in spectral form, dealiased on both sides.
    pub fn nonlinear(&self, u: &SpectralVelocity, v: &SpectralVelocity) -> SpectralVelocity {
        let mut out = self.flux(u, v);
        self.project(&mut out);
        if let Some(mask) = &self.mask {
            for comp in out.iter_mut() {
                let mut f = SpectralField {
                    grid: self.grid.clone(),
                    coeffs: std::mem::take(comp),
                };
                apply_mask(&mut f, mask);
                *comp = f.coeffs;
            }
        }
        out
    }

    /// `e^{-nu |lambda|^2 t}` applied in place.
    pub fn heat(&self, spec: &mut SpectralVelocity, nu: f64, t: f64) {
        for comp in spec.iter_mut() {
            for (c, l2) in comp.iter_mut().zip(&self.freq.lambda_sq) {
                *c *= (-nu * t * l2).exp();
            }
        }
    }

    pub fn zero_velocity(&self) -> SpectralVelocity {
        vec![vec![ZERO; self.grid.spectral_len()]; self.dim()]
    }
}

/// `(w0, w1) = (int_0^1 e^{-z s} ds, int_0^1 s e^{-z s} ds)`.
fn etd_weights(z: f64) -> (f64, f64) {
    if z.abs() < 1e-3 {
        let w0 = 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
        let w1 = 0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0;
        (w0, w1)
    } else {
        let e = (-z).exp();
        let w0 = (1.0 - e) / z;
        let w1 = (1.0 - e - z * e) / (z * z);
        (w0, w1)
    }
}

/// Per-node heat factor and panel weights for step `h`.
struct PanelWeights {
    decay: Vec<f64>,
    /// Weight of the value at the panel start.
    start: Vec<f64>,
    /// Weight of the value at the panel end.
    end: Vec<f64>,
    /// `h w0`, the exponential Euler weight.
    euler: Vec<f64>,
}

impl PanelWeights {
    fn new(ws: &Workspace, nu: f64, h: f64) -> Self {
        let len = ws.freq.len();
        let mut pw = PanelWeights {
            decay: Vec::with_capacity(len),
            start: Vec::with_capacity(len),
            end: Vec::with_capacity(len),
            euler: Vec::with_capacity(len),
        };
        for &l2 in &ws.freq.lambda_sq {
            let z = nu * l2 * h;
            let (w0, w1) = etd_weights(z);
            pw.decay.push((-z).exp());
            pw.start.push(h * w1);
            pw.end.push(h * (w0 - w1));
            pw.euler.push(h * w0);
        }
        pw
    }
}

/// Uniform time grid `0 = t_0 < ... < t_M = t_end`.
pub fn uniform_times(t_end: f64, panels: usize) -> Vec<f64> {
    (0..=panels).map(|m| t_end * m as f64 / panels as f64).collect()
}

fn check_uniform(times: &[f64]) -> Result<f64> {
    if times.len() < 2 || times[0] != 0.0 {
        return Err(WnsError::InvalidArgument(
            "time grid needs at least two nodes starting at 0".into(),
        ));
    }
    let h = times[1] - times[0];
    if !(h > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-12 * h.max(1.0)) {
        return Err(WnsError::InvalidArgument("time grid must be uniform and increasing".into()));
    }
    Ok(h)
}

/// `B(u, v)(t_m) = int_0^{t_m} e^{nu (t_m - s) Delta_W} P div_W(u (x) v)(s) ds` on a
/// uniform grid, with `u, v` given at the grid times. The integrand is
/// interpolated linearly between nodes and the heat factor integrated exactly.
pub fn bilinear_b_spectral(
    ws: &Workspace,
    u: &[SpectralVelocity],
    v: &[SpectralVelocity],
    nu: f64,
    times: &[f64],
) -> Result<Vec<SpectralVelocity>> {
    let h = check_uniform(times)?;
    if u.len() != times.len() || v.len() != times.len() {
        return Err(WnsError::InvalidArgument(
            "trajectories and time grid differ in length".into(),
        ));
    }
    let n: Vec<SpectralVelocity> = u.iter().zip(v).map(|(a, b)| ws.nonlinear(a, b)).collect();
    Ok(accumulate(ws, &n, nu, h))
}

fn accumulate(ws: &Workspace, n: &[SpectralVelocity], nu: f64, h: f64) -> Vec<SpectralVelocity> {
    let pw = PanelWeights::new(ws, nu, h);
    let mut out = Vec::with_capacity(n.len());
    let mut acc = ws.zero_velocity();
    out.push(acc.clone());
    for m in 1..n.len() {
        for j in 0..ws.dim() {
            for node in 0..pw.decay.len() {
                acc[j][node] = pw.decay[node] * acc[j][node]
                    + pw.start[node] * n[m - 1][j][node]
                    + pw.end[node] * n[m][j][node];
            }
        }
        out.push(acc.clone());
    }
    out
}

/// [`bilinear_b_spectral`] on stored states; returns `B(u, v)` at every grid time.
pub fn bilinear_b(
    u: &[VelocityState],
    v: &[VelocityState],
    nu: f64,
    times: &[f64],
    dealias: bool,
) -> Result<Vec<VelocityState>> {
    let grid = u
        .first()
        .map(|s| s.grid().clone())
        .ok_or_else(|| WnsError::InvalidArgument("empty trajectory".into()))?;
    for s in u.iter().chain(v) {
        if s.grid() != &grid {
            return Err(WnsError::InvalidArgument(
                "bilinear form operands live on different grids".into(),
            ));
        }
    }
    let ws = Workspace::new(&grid, dealias);
    let us = u.iter().map(|s| ws.to_spectral(s)).collect::<Result<Vec<_>>>()?;
    let vs = v.iter().map(|s| ws.to_spectral(s)).collect::<Result<Vec<_>>>()?;
    let b = bilinear_b_spectral(&ws, &us, &vs, nu, times)?;
    b.iter().zip(times).map(|(s, &t)| ws.to_state(s, t)).collect()
}

/// Constants of the contraction argument for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionConstants {
    pub theta: f64,
    /// `C` with `||B(u, v)(t)|| <= C T^theta sup||u|| sup||v||`.
    pub c: f64,
    /// `C_0 = 1 / (8 C)`: `T^theta = C_0 / ||u0||` gives `2 C R T^theta = 1/2` at `R = 2 ||u0||`.
    pub c0: f64,
    /// `C_{p,alpha,d} = C_0^(1/theta)`.
    pub c_pad: f64,
}

/// Measures `C = nu^{-(p+2a+d+2)/(2p)} / theta * max_ij (||F^-1 f_ij||_{p'} + ||F^-1 g_ij||_{p'})`
/// on the configured grid, with
/// `f_ij = i eta_j e^{-|eta|^2} (1 - eta_i^2/|eta|^2)` and
/// `g_ij = i eta_i e^{-|eta|^2} eta_i eta_j / |eta|^2`.
pub fn calibrate_constants(cfg: &SolverConfig) -> Result<ContractionConstants> {
    cfg.validate()?;
    let ws = Workspace::new(&cfg.grid, false);
    let p_dual = cfg.p / (cfg.p - 1.0);
    let dim = ws.dim();
    let f = &ws.freq;
    let norm_of = |profile: &dyn Fn(usize) -> Complex64| -> f64 {
        let spec: Vec<Complex64> = (0..f.len()).map(profile).collect();
        let mags: Vec<f64> = ws.plan.inverse_complex(&spec).iter().map(|c| c.norm()).collect();
        weighted_norm(&mags, &ws.weights, NormExponent::Finite(p_dual))
    };
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let fij = |n: usize| {
                let l2 = f.lambda_sq[n];
                let (li, lj) = (f.lambda[i][n], f.lambda[j][n]);
                I * lj * (-l2).exp() * (1.0 - li * li / l2)
            };
            let gij = |n: usize| {
                let l2 = f.lambda_sq[n];
                let (li, lj) = (f.lambda[i][n], f.lambda[j][n]);
                I * li * (-l2).exp() * (li * lj / l2)
            };
            worst = worst.max(norm_of(&fij) + norm_of(&gij));
        }
    }
    let theta = cfg.theta();
    let exponent = (cfg.p + cfg.critical_exponent()) / (2.0 * cfg.p);
    let c = cfg.nu.powf(-exponent) / theta * worst;
    let c0 = 1.0 / (8.0 * c);
    Ok(ContractionConstants {
        theta,
        c,
        c0,
        c_pad: c0.powf(1.0 / theta),
    })
}

/// `T = C_{p,alpha,d} / ||u0||^{2p/(p - 2 alpha - d - 2)}`; `+inf` for zero data.
pub fn existence_time(u0_norm: f64, cfg: &SolverConfig, c_const: f64) -> f64 {
    if u0_norm == 0.0 {
        return f64::INFINITY;
    }
    c_const / u0_norm.powf(1.0 / cfg.theta())
}

/// Result of a converged Picard iteration.
#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub times: Vec<f64>,
    pub trajectory: Vec<VelocityState>,
    /// `sup_t ||u^(k+1)(t) - u^(k)(t)||_p` per iteration.
    pub distances: Vec<f64>,
    /// Successive distance ratios.
    pub ratios: Vec<f64>,
    pub iterations: usize,
    /// The converged iterate in spectral form.
    pub spectral: Vec<SpectralVelocity>,
}

fn sup_distance(ws: &Workspace, a: &[SpectralVelocity], b: &[SpectralVelocity], p: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let diff: SpectralVelocity = x
            .iter()
            .zip(y)
            .map(|(cx, cy)| cx.iter().zip(cy).map(|(p, q)| p - q).collect())
            .collect();
        worst = worst.max(ws.lp_norm(&diff, p)?);
    }
    Ok(worst)
}

fn heat_trajectory(ws: &Workspace, u0: &SpectralVelocity, nu: f64, times: &[f64]) -> Vec<SpectralVelocity> {
    times
        .iter()
        .map(|&t| {
            let mut s = u0.clone();
            ws.heat(&mut s, nu, t);
            s
        })
        .collect()
}

/// Relative divergence `||div u||_2 / ||u||_2` accepted for initial data.
pub const INTAKE_DIVERGENCE_TOL: f64 = 1e-5;

/// Spectra of initial data, checked for divergence and re-projected to clear rounding.
fn intake(ws: &Workspace, u0: &VelocityState) -> Result<SpectralVelocity> {
    let mut spec = ws.to_spectral(u0)?;
    let div = ws.div_norm(&spec);
    let scale = ws.lp_norm(&spec, 2.0)?;
    if div > INTAKE_DIVERGENCE_TOL * scale {
        return Err(WnsError::InvalidArgument(format!(
            "initial velocity is not divergence free: ||div u||_2 / ||u||_2 = {:e}",
            div / scale
        )));
    }
    ws.project(&mut spec);
    Ok(spec)
}

/// Picard iteration `u <- L0 - B(u, u)` on `cfg.panels` uniform panels of `[0, T]`.
pub fn picard_solve(u0: &VelocityState, cfg: &SolverConfig, t_final: f64) -> Result<PicardOutcome> {
    cfg.validate()?;
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(WnsError::InvalidArgument(format!(
            "Picard horizon must be positive and finite, got {t_final}"
        )));
    }
    let ws = Workspace::new(&cfg.grid, cfg.dealias);
    let s0 = intake(&ws, u0)?;
    let norm0 = ws.lp_norm(&s0, cfg.p)?;
    let times = uniform_times(t_final, cfg.panels);
    let h = times[1];
    let l0 = heat_trajectory(&ws, &s0, cfg.nu, &times);

    let mut current = l0.clone();
    let mut distances = Vec::new();
    let mut ratios = Vec::new();
    let mut iterations = 0;
    if cfg.nonlinear && norm0 > 0.0 {
        loop {
            iterations += 1;
            let n: Vec<SpectralVelocity> = current.iter().map(|s| ws.nonlinear(s, s)).collect();
            let b = accumulate(&ws, &n, cfg.nu, h);
            let next: Vec<SpectralVelocity> = l0
                .iter()
                .zip(&b)
                .map(|(l, bb)| {
                    l.iter()
                        .zip(bb)
                        .map(|(cl, cb)| cl.iter().zip(cb).map(|(x, y)| x - y).collect())
                        .collect()
                })
                .collect();
            let dist = sup_distance(&ws, &next, &current, cfg.p)?;
            if let Some(&prev) = distances.last() {
                let prev: f64 = prev;
                if prev > 0.0 {
                    ratios.push(dist / prev);
                }
            }
            distances.push(dist);
            current = next;
            if dist < cfg.picard_tol {
                break;
            }
            if iterations >= cfg.picard_max_iter || !dist.is_finite() {
                return Err(WnsError::ContractionFailure {
                    iterations,
                    last_ratio: ratios.last().copied().unwrap_or(f64::NAN),
                    last_distance: dist,
                });
            }
        }
    }
    let trajectory = current
        .iter()
        .zip(&times)
        .map(|(s, &t)| ws.to_state(s, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(PicardOutcome {
        times,
        trajectory,
        distances,
        ratios,
        iterations,
        spectral: current,
    })
}

/// `sup_t || u(t) - L0(t) + B(u, u)(t) ||_p` for a Picard result, on its own time grid.
pub fn mild_residual(out: &PicardOutcome, cfg: &SolverConfig) -> Result<f64> {
    let ws = Workspace::new(&cfg.grid, cfg.dealias);
    mild_residual_spectral(&ws, &out.spectral, &out.times, cfg)
}

/// [`mild_residual`] for an arbitrary spectral trajectory on a uniform grid.
pub fn mild_residual_spectral(
    ws: &Workspace,
    spec: &[SpectralVelocity],
    times: &[f64],
    cfg: &SolverConfig,
) -> Result<f64> {
    let h = check_uniform(times)?;
    if spec.len() != times.len() {
        return Err(WnsError::InvalidArgument("trajectory and time grid differ in length".into()));
    }
    let l0 = heat_trajectory(ws, &spec[0], cfg.nu, times);
    let b = if cfg.nonlinear {
        let n: Vec<SpectralVelocity> = spec.iter().map(|s| ws.nonlinear(s, s)).collect();
        accumulate(ws, &n, cfg.nu, h)
    } else {
        vec![ws.zero_velocity(); times.len()]
    };
    let mut worst: f64 = 0.0;
    for m in 0..times.len() {
        let r: SpectralVelocity = (0..ws.dim())
            .map(|j| {
                (0..ws.freq.len())
                    .map(|n| spec[m][j][n] - l0[m][j][n] + b[m][j][n])
                    .collect()
            })
            .collect();
        worst = worst.max(ws.lp_norm(&r, cfg.p)?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarchStatus {
    Completed,
    /// `||u||_p` passed the overflow guard at time `t`.
    BlowupSuspected { t: f64, norm: f64 },
    StepLimit { t: f64 },
}

#[derive(Debug, Clone)]
pub struct MarchOutcome {
    pub series: NormSeries,
    pub snapshots: Vec<VelocityState>,
    pub final_state: VelocityState,
    pub status: MarchStatus,
    pub constants: ContractionConstants,
}

/// Advances `u0` to `cfg.t_end` with steps `min(dt, safety * existence_time(||u||))`.
///
/// Each step is an exponential Heun step: an exponential Euler predictor,
/// then the trapezoidal exponential rule with the predicted end value.
pub fn march(u0: &VelocityState, cfg: &SolverConfig) -> Result<MarchOutcome> {
    let constants = calibrate_constants(cfg)?;
    march_with(u0, cfg, constants, None)
}

/// [`march`] with fixed constants and an optional forced step size.
pub fn march_with(
    u0: &VelocityState,
    cfg: &SolverConfig,
    constants: ContractionConstants,
    fixed_step: Option<f64>,
) -> Result<MarchOutcome> {
    cfg.validate()?;
    let ws = Workspace::new(&cfg.grid, cfg.dealias);
    let mut u = intake(&ws, u0)?;
    let mut t = u0.t;
    let t_end = u0.t + cfg.t_end;
    let mut series = NormSeries::default();
    let mut snapshots = Vec::new();
    let record = |series: &mut NormSeries, u: &SpectralVelocity, t: f64| -> Result<f64> {
        let lp = ws.lp_norm(u, cfg.p)?;
        let l2 = ws.lp_norm(u, 2.0)?;
        series.push(t, lp, l2, ws.div_norm(u))?;
        Ok(lp)
    };
    let mut norm = record(&mut series, &u, t)?;
    if cfg.snapshot_stride > 0 {
        snapshots.push(ws.to_state(&u, t)?);
    }
    let mut status = MarchStatus::Completed;
    let mut cached: Option<(f64, PanelWeights)> = None;
    let mut steps = 0;
    while t < t_end * (1.0 - 1e-14) {
        if steps >= cfg.max_steps {
            status = MarchStatus::StepLimit { t };
            break;
        }
        let limit = cfg.safety * existence_time(norm, cfg, constants.c_pad);
        let mut h = fixed_step.unwrap_or(cfg.dt).min(limit).min(t_end - t);
        if t_end - t - h < 1e-12 * t_end.max(1.0) {
            h = t_end - t;
        }
        if !(h > 0.0) {
            status = MarchStatus::StepLimit { t };
            break;
        }
        let pw = match cached.take() {
            Some((hc, pw)) if hc == h => pw,
            _ => PanelWeights::new(&ws, cfg.nu, h),
        };
        u = heun_step(&ws, &u, &pw, cfg.nonlinear);
        cached = Some((h, pw));
        ws.project(&mut u);
        t += h;
        steps += 1;
        norm = record(&mut series, &u, t)?;
        if cfg.snapshot_stride > 0 && steps % cfg.snapshot_stride == 0 {
            snapshots.push(ws.to_state(&u, t)?);
        }
        if !(norm <= cfg.overflow_guard) {
            status = MarchStatus::BlowupSuspected { t, norm };
            break;
        }
    }
    Ok(MarchOutcome {
        series,
        snapshots,
        final_state: ws.to_state(&u, t)?,
        status,
        constants,
    })
}

fn heun_step(ws: &Workspace, u: &SpectralVelocity, pw: &PanelWeights, nonlinear: bool) -> SpectralVelocity {
    let dim = ws.dim();
    let len = pw.decay.len();
    if !nonlinear {
        return (0..dim)
            .map(|j| (0..len).map(|n| pw.decay[n] * u[j][n]).collect())
            .collect();
    }
    let n0 = ws.nonlinear(u, u);
    let pred: SpectralVelocity = (0..dim)
        .map(|j| (0..len).map(|n| pw.decay[n] * u[j][n] - pw.euler[n] * n0[j][n]).collect())
        .collect();
    let n1 = ws.nonlinear(&pred, &pred);
    (0..dim)
        .map(|j| {
            (0..len)
                .map(|n| pw.decay[n] * u[j][n] - pw.start[n] * n0[j][n] - pw.end[n] * n1[j][n])
                .collect()
        })
        .collect()
}

/// Pressure `p = -(sum_jk lambda_j lambda_k F(u_j u_k)) / |lambda|^2`, zero at `lambda = 0`.
pub fn pressure_diagnostic(u: &VelocityState, dealias: bool) -> Result<PhysicalField> {
    let ws = Workspace::new(u.grid(), dealias);
    let p = ws.pressure(&ws.to_spectral(u)?);
    let values = ws.plan.inverse_complex(&p).iter().map(|c| c.re).collect();
    PhysicalField::from_values(&ws.grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::BesselOrder;

    fn small() -> GridSpec {
        GridSpec::new(1, BesselOrder::new(0.0).unwrap(), 4.0 * std::f64::consts::PI, 16, 10.0, 24, 6.0, 24)
            .unwrap()
    }

    #[test]
    fn etd_weights_series_and_closed_form_agree() {
        for &z in &[9.9e-4, 1.01e-3] {
            let (a0, a1) = etd_weights(z);
            let e = (-z).exp();
            assert!((a0 - (1.0 - e) / z).abs() < 1e-12);
            assert!((a1 - (1.0 - e - z * e) / (z * z)).abs() < 1e-9);
        }
        assert_eq!(etd_weights(0.0), (1.0, 0.5));
    }

    #[test]
    fn config_rejects_subcritical_p() {
        let err = SolverConfig::new(small(), 1.0, 3.0).unwrap_err();
        assert!(err.to_string().contains("2*alpha + d + 2 < p"));
        assert!(SolverConfig::new(small(), 0.0, 6.0).is_err());
        assert!(SolverConfig::new(small(), 1.0, 6.0).is_ok());
    }

    #[test]
    fn existence_time_formula() {
        let cfg = SolverConfig::new(small(), 1.0, 6.0).unwrap();
        assert_eq!(existence_time(1.0, &cfg, 1.0), 1.0);
        let ratio = existence_time(1.0, &cfg, 1.0) / existence_time(2.0, &cfg, 1.0);
        assert!((ratio - 16.0).abs() < 1e-12);
        assert_eq!(existence_time(0.0, &cfg, 1.0), f64::INFINITY);
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let mut cfg = SolverConfig::new(small(), 1.0, 6.0).unwrap();
        cfg.panels = 4;
        let u0 = VelocityState::zeros(&cfg.grid, 0.0);
        let out = picard_solve(&u0, &cfg, 0.1).unwrap();
        assert!(out.trajectory.iter().all(|s| s.components.iter().all(|c| c.max_abs() == 0.0)));
        let m = march_with(&u0, &cfg, calibrate_constants(&cfg).unwrap(), None).unwrap();
        assert!(m.series.lp_norms.iter().all(|&v| v == 0.0));
        assert_eq!(m.status, MarchStatus::Completed);
    }

    #[test]
    fn pressure_of_zero_is_zero() {
        let u = VelocityState::zeros(&small(), 0.0);
        assert_eq!(pressure_diagnostic(&u, true).unwrap().max_abs(), 0.0);
    }
}
