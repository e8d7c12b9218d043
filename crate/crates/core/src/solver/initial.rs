//! Divergence-free initial data.

use crate::error::{Result, WnsError};
use crate::grid::{make_test_fields, GridSpec, PhysicalField, TestFieldKind, VelocityState};

use super::Workspace;

/// Power of `lambda_{d+1}` in [`divergence_free_random`]. A divergence-free
/// field must carry an odd power of `lambda_{d+1}` in some component, which
/// gives algebraic tails `x^-(2 alpha + 2m + 3)`; a high power keeps them
/// far below the grid truncation.
pub const RADIAL_POWER: i32 = 2;

/// Divergence-free field built from band-limited random potentials `phi_j`:
/// `U_j = lambda_r^(2m+1) F(phi_j)` for `j <= d` and
/// `U_{d+1} = -lambda_r^(2m) sum_j lambda_j F(phi_j)`, scaled so that `max |u| = amplitude`.
pub fn divergence_free_random(grid: &GridSpec, seed: u64, cutoff: f64, amplitude: f64) -> Result<VelocityState> {
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(WnsError::InvalidArgument(format!(
            "amplitude must be finite and >= 0, got {amplitude}"
        )));
    }
    let ws = Workspace::new(grid, false);
    let d = grid.d;
    let potentials = (0..d)
        .map(|j| {
            let kind = TestFieldKind::BandLimitedRandom { seed: seed.wrapping_add(j as u64), cutoff };
            make_test_fields(grid, &kind).map(|f| ws.plan.forward_real(&f.values))
        })
        .collect::<Result<Vec<_>>>()?;
    let f = &ws.freq;
    let mut spec = vec![vec![num_complex::Complex64::new(0.0, 0.0); f.len()]; d + 1];
    for n in 0..f.len() {
        let lr = f.lambda[d][n];
        let even = lr.powi(2 * RADIAL_POWER);
        for j in 0..d {
            spec[j][n] = potentials[j][n] * (even * lr);
            spec[d][n] -= potentials[j][n] * (even * f.lambda[j][n]);
        }
    }
    let state = ws.to_state(&spec, 0.0)?;
    let peak = state.magnitudes().into_iter().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(state);
    }
    let c = amplitude / peak;
    for s in spec.iter_mut() {
        for v in s.iter_mut() {
            *v *= c;
        }
    }
    ws.to_state(&spec, 0.0)
}

/// Shear flow `u = (A e^{-s x_{d+1}^2}, 0, ..., 0)`. It is divergence free,
/// its nonlinear term vanishes, and it decays as
/// `A (1 + 4 nu s t)^{-(alpha+1)} e^{-s x_{d+1}^2 / (1 + 4 nu s t)}`.
pub fn gaussian_shear(grid: &GridSpec, s: f64, amplitude: f64) -> Result<VelocityState> {
    if !(s > 0.0) {
        return Err(WnsError::InvalidArgument(format!(
            "shear width parameter must be positive, got {s}"
        )));
    }
    let mut u = VelocityState::zeros(grid, 0.0);
    u.components[0] = PhysicalField::from_fn(grid, |x| amplitude * (-s * x[grid.d] * x[grid.d]).exp());
    Ok(u)
}

/// Closed form of the shear profile at time `t`.
pub fn gaussian_shear_exact(grid: &GridSpec, s: f64, amplitude: f64, nu: f64, t: f64) -> PhysicalField {
    let a = 1.0 + 4.0 * nu * s * t;
    let scale = amplitude * a.powf(-(grid.alpha() + 1.0));
    PhysicalField::from_fn(grid, |x| scale * (-s * x[grid.d] * x[grid.d] / a).exp())
}
