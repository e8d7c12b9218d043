//! Norm time series and power-law blow-up fits.

use crate::error::{Result, WnsError};

/// Minimum number of samples the monitor will fit.
pub const MIN_SAMPLES: usize = 8;

/// Recorded norms of a trajectory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormSeries {
    pub times: Vec<f64>,
    pub lp_norms: Vec<f64>,
    pub l2_norms: Vec<f64>,
    pub div_norms: Vec<f64>,
    pub fitted_tstar: Option<f64>,
    pub fitted_kappa: Option<f64>,
    /// `C` in `||u(t)|| >= C (T* - t)^(-kappa)`, once a fit exists.
    pub bound_constant: Option<f64>,
    /// Exponent used with `bound_constant`.
    pub bound_kappa: Option<f64>,
}

impl NormSeries {
    pub fn push(&mut self, t: f64, lp: f64, l2: f64, div: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(WnsError::InvalidArgument(format!(
                    "norm series times must increase strictly: {t} after {last}"
                )));
            }
        }
        if [t, lp, l2, div].iter().any(|v| !v.is_finite()) || lp < 0.0 || l2 < 0.0 || div < 0.0 {
            return Err(WnsError::InvalidArgument(format!(
                "norm series sample at t = {t} is not finite and non-negative"
            )));
        }
        self.times.push(t);
        self.lp_norms.push(lp);
        self.l2_norms.push(l2);
        self.div_norms.push(div);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `C (T* - t)^(-kappa)` at sample `i`, if a bound has been fitted.
    pub fn lower_bound(&self, i: usize) -> Option<f64> {
        let (c, ts, k) = (self.bound_constant?, self.fitted_tstar?, self.bound_kappa?);
        let gap = ts - self.times[i];
        (gap > 0.0).then(|| c * gap.powf(-k))
    }

    pub fn apply_report(&mut self, report: &BlowupReport) {
        if let BlowupReport::Signature(fit) = report {
            self.fitted_tstar = Some(fit.t_star);
            self.fitted_kappa = Some(fit.kappa);
            self.bound_constant = Some(fit.bound_constant);
            self.bound_kappa = Some(fit.kappa_mode);
        }
    }
}

/// Which exponent the lower bound is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaMode {
    /// `2p / (p - 2 alpha - d - 2)`, the exponent in the stated lower bound.
    Theorem,
    /// `(p - 2 alpha - d - 2) / (2p)`, the exponent the existence-time scaling yields.
    Scaling,
}

impl KappaMode {
    pub fn exponent(self, p: f64, alpha: f64, d: usize) -> f64 {
        let gap = p - 2.0 * alpha - d as f64 - 2.0;
        match self {
            KappaMode::Theorem => 2.0 * p / gap,
            KappaMode::Scaling => gap / (2.0 * p),
        }
    }
}

impl std::str::FromStr for KappaMode {
    type Err = WnsError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem" => Ok(KappaMode::Theorem),
            "scaling" => Ok(KappaMode::Scaling),
            other => Err(WnsError::InvalidArgument(format!(
                "kappa mode must be `theorem` or `scaling`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupFit {
    pub t_star: f64,
    pub kappa: f64,
    pub log_c: f64,
    /// Exponent of the selected mode.
    pub kappa_mode: f64,
    /// `kappa - kappa_mode`.
    pub kappa_residual: f64,
    /// RMS misfit of `log ||u||`.
    pub rms: f64,
    /// Lower-bound constant calibrated on the first half of the series.
    pub bound_constant: f64,
    /// Samples in the second half falling below that bound.
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlowupReport {
    Signature(BlowupFit),
    NoSignature(String),
}

impl BlowupReport {
    pub fn fit(&self) -> Option<&BlowupFit> {
        match self {
            BlowupReport::Signature(f) => Some(f),
            BlowupReport::NoSignature(_) => None,
        }
    }
}

/// Least-squares `(log C, kappa, sse)` of `log y = log C - kappa log(T* - t)`.
fn linear_fit(times: &[f64], logs: &[f64], t_star: f64) -> (f64, f64, f64) {
    let n = times.len() as f64;
    let xs: Vec<f64> = times.iter().map(|t| -(t_star - t).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = logs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(logs).map(|(x, y)| (x - mx) * (y - my)).sum();
    let kappa = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let log_c = my - kappa * mx;
    let sse = xs
        .iter()
        .zip(logs)
        .map(|(x, y)| (y - log_c - kappa * x).powi(2))
        .sum();
    (log_c, kappa, sse)
}

/// Fits a finite-time power-law singularity to the `lp_norms` of `series`.
pub fn blowup_monitor(series: &NormSeries, p: f64, alpha: f64, d: usize, mode: KappaMode) -> BlowupReport {
    let n = series.len();
    if n < MIN_SAMPLES {
        return BlowupReport::NoSignature(format!("{n} samples, need at least {MIN_SAMPLES}"));
    }
    let (t, y) = (&series.times, &series.lp_norms);
    if y.iter().any(|v| !(*v > 0.0)) {
        return BlowupReport::NoSignature("series contains zero norms".into());
    }
    let tail = (n / 4).max(4);
    if y[n - tail..].windows(2).any(|w| !(w[1] > w[0])) {
        return BlowupReport::NoSignature("tail of the norm series is not increasing".into());
    }
    if !(y[n - 1] > y[0]) {
        return BlowupReport::NoSignature("norm does not grow over the series".into());
    }
    let logs: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let span = t[n - 1] - t[0];
    let t_last = t[n - 1];
    let sse_at = |g: f64| linear_fit(t, &logs, t_last + g.exp()).2;

    // Coarse scan on log(T* - t_last), then golden-section refinement.
    let (lo, hi) = ((1e-8 * span).ln(), (10.0 * span).ln());
    let steps = 200;
    let grid: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect();
    let best = grid
        .iter()
        .enumerate()
        .min_by(|a, b| sse_at(*a.1).total_cmp(&sse_at(*b.1)))
        .map(|(i, _)| i)
        .unwrap();
    if best == steps {
        return BlowupReport::NoSignature("fitted singular time runs off the search range".into());
    }
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(steps)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut e = a + phi * (b - a);
    let (mut fc, mut fe) = (sse_at(c), sse_at(e));
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 {
            break;
        }
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - phi * (b - a);
            fc = sse_at(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + phi * (b - a);
            fe = sse_at(e);
        }
    }
    let g = 0.5 * (a + b);
    let t_star = t_last + g.exp();
    let (log_c, kappa, sse) = linear_fit(t, &logs, t_star);
    if !(kappa > 0.0) {
        return BlowupReport::NoSignature("fitted exponent is not positive".into());
    }
    let kappa_mode = mode.exponent(p, alpha, d);
    let half = n / 2;
    let bound_constant = (0..half)
        .map(|i| y[i] * (t_star - t[i]).powf(kappa_mode))
        .fold(f64::INFINITY, f64::min);
    let violations = (half..n)
        .filter(|&i| y[i] < bound_constant * (t_star - t[i]).powf(-kappa_mode) * (1.0 - 1e-12))
        .count();
    BlowupReport::Signature(BlowupFit {
        t_star,
        kappa,
        log_c,
        kappa_mode,
        kappa_residual: kappa - kappa_mode,
        rms: (sse / n as f64).sqrt(),
        bound_constant,
        violations,
    })
}
