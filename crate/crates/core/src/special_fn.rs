//! Scalar special functions: Gamma, the normalized Bessel function `j_alpha`,
//! and Gauss-Jacobi quadrature.
//!
//! `j_alpha(x) = Gamma(alpha + 1) (2 / x)^alpha J_alpha(x)` is the even entire
//! function with `j_alpha(0) = 1`. It is the radial factor of the Weinstein
//! kernel. For `alpha = -1/2` it is `cos x`, for `alpha = 1/2` it is `sin x / x`.

use std::f64::consts::PI;

use crate::error::{Result, WnsError};

/// Below this argument `j_alpha` is summed from its power series, above it the
/// Hankel asymptotic expansion is used.
pub const SERIES_SWITCHOVER: f64 = 12.0;

/// Index `alpha` of the Bessel operator `d^2/dx^2 + (2 alpha + 1)/x d/dx`.
///
/// Regular orders satisfy `alpha > -1/2`. The limit `alpha = -1/2`, where the
/// Weinstein operator is the ordinary Laplacian, can only be constructed through
/// [`BesselOrder::classical`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= -0.5 {
            return Err(WnsError::Domain(format!(
                "Bessel order must satisfy alpha > -1/2, got {alpha}"
            )));
        }
        Ok(BesselOrder(alpha))
    }

    /// The classical limit `alpha = -1/2`.
    pub fn classical() -> Self {
        BesselOrder(-0.5)
    }

    /// Accepts `alpha >= -1/2`, mapping `-1/2` to [`BesselOrder::classical`].
    pub fn new_or_classical(alpha: f64) -> Result<Self> {
        if alpha == -0.5 {
            Ok(Self::classical())
        } else {
            Self::new(alpha)
        }
    }

    #[inline]
    pub fn alpha(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == -0.5
    }

    /// Exponent `2 alpha + 1` of the radial weight `x^(2 alpha + 1)`.
    #[inline]
    pub fn weight_exponent(self) -> f64 {
        2.0 * self.0 + 1.0
    }

    /// `1 / (2^alpha Gamma(alpha + 1))`, the radial part of the measure normalization.
    pub fn radial_normalization(self) -> f64 {
        1.0 / (2f64.powf(self.0) * gamma_unchecked(self.0 + 1.0))
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(z: f64) -> f64 {
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    acc
}

/// `Gamma(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(WnsError::Domain(format!(
            "gamma is only defined here for finite x > 0, got {x}"
        )));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    // Integer arguments are exact factorials.
    if x == x.floor() && x <= 23.0 {
        return (1..x as u64).map(|k| k as f64).product();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // Split the power so large arguments do not overflow before the exponential.
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * ((-t).exp() * half) * lanczos_sum(z)
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(WnsError::Domain(format!(
            "ln_gamma is only defined here for finite x > 0, got {x}"
        )));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// Normalized Bessel function `j_alpha(xi)`.
pub fn normalized_bessel_j(order: BesselOrder, xi: f64) -> f64 {
    let x = xi.abs();
    if x < SERIES_SWITCHOVER {
        bessel_series(order.alpha(), x)
    } else {
        bessel_asymptotic(order.alpha(), x)
    }
}

/// Kahan-compensated power series
/// `sum_n (-1)^n Gamma(alpha+1) / (n! Gamma(n+alpha+1)) (x/2)^(2n)`.
fn bessel_series(alpha: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut comp = 0.0;
    for n in 1..200 {
        let nf = n as f64;
        term *= q / (nf * (nf + alpha));
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && nf > 0.5 * x {
            break;
        }
    }
    sum
}

/// Hankel expansion of `J_alpha`, truncated at its smallest term, rescaled to `j_alpha`.
fn bessel_asymptotic(alpha: f64, x: f64) -> f64 {
    let mu = 4.0 * alpha * alpha;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a_k: f64 = 1.0; // a_k(alpha) / x^k
    let mut prev = f64::INFINITY;
    for k in 0..60usize {
        if a_k.abs() > prev {
            break;
        }
        prev = a_k.abs();
        match k % 4 {
            0 => p += a_k,
            1 => q += a_k,
            2 => p -= a_k,
            _ => q -= a_k,
        }
        if a_k == 0.0 || a_k.abs() < 1e-17 {
            break;
        }
        let odd = (2 * k + 1) as f64;
        a_k *= (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
    }
    let omega = x - (0.5 * alpha + 0.25) * PI;
    let big_j = (2.0 / (PI * x)).sqrt() * (p * omega.cos() - q * omega.sin());
    let scale = if alpha == -0.5 {
        (PI * x / 2.0).sqrt()
    } else {
        (ln_gamma_unchecked(alpha + 1.0) + alpha * (2.0 / x).ln()).exp()
    };
    scale * big_j
}

/// Gauss-Jacobi rule on `[-1, 1]` for the weight `(1 - t)^a (1 + t)^b`.
///
/// Nodes are returned in increasing order. Newton iteration on the three-term
/// recurrence of `P_n^(a, b)`, seeded with the usual asymptotic guesses.
#[allow(clippy::approx_constant)]
pub fn gauss_jacobi_rule(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(WnsError::InvalidArgument(
            "quadrature needs at least one node".into(),
        ));
    }
    if !(a > -1.0 && b > -1.0) {
        return Err(WnsError::Domain(format!(
            "Jacobi exponents must exceed -1, got a = {a}, b = {b}"
        )));
    }
    let nf = n as f64;
    let ab = a + b;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..n {
        z = match i {
            0 => {
                let an = a / nf;
                let bn = b / nf;
                let r1 = (1.0 + a) * (2.78 / (4.0 + nf * nf) + 0.768 * an / nf);
                let r2 = 1.0 + 1.48 * an + 0.96 * bn + 0.452 * an * an + 0.83 * an * bn;
                1.0 - r1 / r2
            }
            1 => {
                let r1 = (4.1 + a) / ((1.0 + a) * (1.0 + 0.156 * a));
                let r2 = 1.0 + 0.06 * (nf - 8.0) * (1.0 + 0.12 * a) / nf;
                let r3 = 1.0 + 0.012 * b * (1.0 + 0.25 * a.abs()) / nf;
                z - (1.0 - z) * r1 * r2 * r3
            }
            2 => {
                let r1 = (1.67 + 0.28 * a) / (1.0 + 0.37 * a);
                let r2 = 1.0 + 0.22 * (nf - 8.0) / nf;
                let r3 = 1.0 + 8.0 * b / ((6.28 + b) * nf * nf);
                z - (x[0] - z) * r1 * r2 * r3
            }
            _ if i == n - 2 => {
                let r1 = (1.0 + 0.235 * b) / (0.766 + 0.119 * b);
                let r2 = 1.0 / (1.0 + 0.639 * (nf - 4.0) / (1.0 + 0.71 * (nf - 4.0)));
                let r3 = 1.0 / (1.0 + 20.0 * a / ((7.5 + a) * nf * nf));
                z + (z - x[n - 4]) * r1 * r2 * r3
            }
            _ if i == n - 1 => {
                let r1 = (1.0 + 0.37 * b) / (1.67 + 0.28 * b);
                let r2 = 1.0 / (1.0 + 0.22 * (nf - 8.0) / nf);
                let r3 = 1.0 / (1.0 + 8.0 * a / ((6.28 + a) * nf * nf));
                z + (z - x[n - 3]) * r1 * r2 * r3
            }
            _ => 3.0 * x[i - 1] - 3.0 * x[i - 2] + x[i - 3],
        };
        let mut p1;
        let mut p2 = 0.0;
        let mut pp = 0.0;
        let mut temp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            temp = 2.0 + ab;
            p1 = (a - b + temp * z) / 2.0;
            p2 = 1.0;
            for j in 2..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                temp = 2.0 * jf + ab;
                let aa = 2.0 * jf * (jf + ab) * (temp - 2.0);
                let bb = (temp - 1.0) * (a * a - b * b + temp * (temp - 2.0) * z);
                let cc = 2.0 * (jf - 1.0 + a) * (jf - 1.0 + b) * temp;
                p1 = (bb * p2 - cc * p3) / aa;
            }
            pp = (nf * (a - b - temp * z) * p1 + 2.0 * (nf + a) * (nf + b) * p2)
                / (temp * (1.0 - z * z));
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || !z.is_finite() {
            return Err(WnsError::Domain(format!(
                "Gauss-Jacobi Newton iteration failed for n = {n}, a = {a}, b = {b}"
            )));
        }
        x[i] = z;
        w[i] = (ln_gamma_unchecked(a + nf) + ln_gamma_unchecked(b + nf)
            - ln_gamma_unchecked(nf + 1.0)
            - ln_gamma_unchecked(nf + ab + 1.0))
        .exp()
            * temp
            * 2f64.powf(ab)
            / (pp * p2);
    }
    // Newton from the recurrence guesses can only be trusted if the roots are distinct.
    for i in 1..n {
        if x[i] >= x[i - 1] {
            return Err(WnsError::Domain(format!(
                "Gauss-Jacobi nodes collided for n = {n}, a = {a}, b = {b}"
            )));
        }
    }
    x.reverse();
    w.reverse();
    Ok((x, w))
}

/// Quadrature on `(0, pi)` for the weight `(sin theta)^(2 alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl JacobiQuadrature {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `n`-point rule for `int_0^pi f(theta) (sin theta)^(2 alpha) d theta`, exact for
/// polynomials in `cos theta` of degree `2n - 1`.
///
/// In `t = cos theta` the weight is `(1 - t^2)^(alpha - 1/2)`, i.e. Jacobi
/// `(alpha - 1/2, alpha - 1/2)`.
pub fn gauss_jacobi(order: BesselOrder, n: usize) -> Result<JacobiQuadrature> {
    if order.is_classical() {
        return Err(WnsError::Domain(
            "the (sin theta)^(2 alpha) weight degenerates at alpha = -1/2".into(),
        ));
    }
    let e = order.alpha() - 0.5;
    let (t, w) = gauss_jacobi_rule(n, e, e)?;
    let mut nodes: Vec<f64> = t.iter().map(|&t| t.clamp(-1.0, 1.0).acos()).collect();
    let mut weights = w;
    // acos reverses the order; keep theta increasing.
    nodes.reverse();
    weights.reverse();
    // Symmetrize about pi/2 to remove the last ulp of Newton asymmetry.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let half = 0.5 * (nodes[i] + (PI - nodes[j]));
        nodes[i] = half;
        nodes[j] = PI - half;
        let wm = 0.5 * (weights[i] + weights[j]);
        weights[i] = wm;
        weights[j] = wm;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.5 * PI;
    }
    Ok(JacobiQuadrature { nodes, weights })
}

/// Gauss rule on `(0, r_max)` for the weight `x^(2 alpha + 1)`.
pub(crate) fn radial_rule(order: BesselOrder, n: usize, r_max: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let b = order.weight_exponent();
    let (t, w) = gauss_jacobi_rule(n, 0.0, b)?;
    let half = 0.5 * r_max;
    let scale = half.powf(b + 1.0);
    let nodes = t.iter().map(|&t| half * (1.0 + t)).collect();
    let weights = w.iter().map(|&w| w * scale).collect();
    Ok((nodes, weights))
}
