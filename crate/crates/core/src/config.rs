//! Run configuration: flat `key = value` text with `[grid]`, `[solver]`,
//! `[initial]` and `[output]` sections. `#` starts a comment.
//!
//! ```text
//! [grid]
//! preset = small
//! alpha = 0
//!
//! [solver]
//! nu = 1
//! p = 6
//! t_end = 0.1
//!
//! [initial]
//! kind = random
//! amplitude = 0.5
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Result, WnsError};
use crate::grid::{GridSpec, VelocityState};
use crate::solver::{initial, KappaMode, SolverConfig, SolverMode};
use crate::special_fn::BesselOrder;

/// Initial velocity recipes.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialKind {
    Zero,
    /// [`initial::divergence_free_random`].
    Random { seed: u64, cutoff: f64, amplitude: f64 },
    /// [`initial::gaussian_shear`].
    Shear { width: f64, amplitude: f64 },
}

impl InitialKind {
    pub fn build(&self, grid: &GridSpec) -> Result<VelocityState> {
        match *self {
            InitialKind::Zero => Ok(VelocityState::zeros(grid, 0.0)),
            InitialKind::Random { seed, cutoff, amplitude } => {
                initial::divergence_free_random(grid, seed, cutoff, amplitude)
            }
            InitialKind::Shear { width, amplitude } => initial::gaussian_shear(grid, width, amplitude),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub csv_name: String,
}

/// Oracle settings used by `simulate --oracle`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpec {
    pub modes: usize,
    /// Cosine box length as a multiple of `R_max`.
    pub box_factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub initial: InitialKind,
    pub output: OutputSpec,
    pub kappa_mode: KappaMode,
    pub oracle: OracleSpec,
}

const GRID_KEYS: &[&str] = &["preset", "d", "alpha", "box_len", "n", "r_max", "n_r", "lambda_max", "n_lambda"];
const SOLVER_KEYS: &[&str] = &[
    "nu",
    "p",
    "mode",
    "dt",
    "t_end",
    "picard_max_iter",
    "picard_tol",
    "panels",
    "safety",
    "overflow_guard",
    "max_steps",
    "dealias",
    "nonlinear",
    "kappa_mode",
    "oracle_modes",
    "oracle_box_factor",
];
const INITIAL_KEYS: &[&str] = &["kind", "seed", "cutoff", "amplitude", "width"];
const OUTPUT_KEYS: &[&str] = &["dir", "csv", "snapshot_stride"];

fn section_keys(section: &str) -> Option<&'static [&'static str]> {
    match section {
        "grid" => Some(GRID_KEYS),
        "solver" => Some(SOLVER_KEYS),
        "initial" => Some(INITIAL_KEYS),
        "output" => Some(OUTPUT_KEYS),
        _ => None,
    }
}

/// Raw `section.key -> value` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let here = format!("line {}", k + 1);
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if section_keys(name).is_none() {
                    return Err(WnsError::Config {
                        key: format!("[{name}]"),
                        message: format!("unknown section ({here})"),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| WnsError::Config {
                key: line.to_string(),
                message: format!("expected `key = value` ({here})"),
            })?;
            let sec = section.as_deref().ok_or_else(|| WnsError::Config {
                key: key.trim().to_string(),
                message: format!("key outside any section ({here})"),
            })?;
            let key = key.trim();
            let full = format!("{sec}.{key}");
            if !section_keys(sec).is_some_and(|keys| keys.contains(&key)) {
                return Err(WnsError::Config {
                    key: full,
                    message: format!("unknown key ({here})"),
                });
            }
            if entries.insert(full.clone(), value.trim().to_string()).is_some() {
                return Err(WnsError::Config {
                    key: full,
                    message: format!("duplicate key ({here})"),
                });
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| WnsError::Config {
                key: key.to_string(),
                message: format!("cannot parse `{v}`"),
            }),
        }
    }

    fn get_str<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.entries.get(key).map(String::as_str).unwrap_or(default)
    }

    /// Resolves defaults and validates everything.
    pub fn resolve(&self) -> Result<RunConfig> {
        let alpha: f64 = self.get("grid.alpha", 0.0)?;
        let order = BesselOrder::new_or_classical(alpha).map_err(|e| WnsError::Config {
            key: "grid.alpha".into(),
            message: e.to_string(),
        })?;
        let base = match self.get_str("grid.preset", "small") {
            "small" => GridSpec::small(order),
            "desk" => GridSpec::desk(order),
            other => {
                return Err(WnsError::Config {
                    key: "grid.preset".into(),
                    message: format!("`{other}` is not `small` or `desk`"),
                })
            }
        };
        let grid = GridSpec::new(
            self.get("grid.d", base.d)?,
            order,
            self.get("grid.box_len", base.box_len)?,
            self.get("grid.n", base.n)?,
            self.get("grid.r_max", base.r_max)?,
            self.get("grid.n_r", base.n_r)?,
            self.get("grid.lambda_max", base.lambda_max)?,
            self.get("grid.n_lambda", base.n_lambda)?,
        )
        .map_err(|e| WnsError::Config {
            key: "grid".into(),
            message: e.to_string(),
        })?;

        let nu = self.get("solver.nu", 1.0)?;
        let p = self.get("solver.p", 2.0 * alpha.max(-0.5) + grid.d as f64 + 4.0)?;
        let mut solver = SolverConfig::new(grid, nu, p).map_err(solver_error)?;
        let mode = self.get_str("solver.mode", "march");
        solver.mode = SolverMode::from_str(mode).map_err(|e| WnsError::Config {
            key: "solver.mode".into(),
            message: e.to_string(),
        })?;
        solver.dt = self.get("solver.dt", solver.dt)?;
        solver.t_end = self.get("solver.t_end", solver.t_end)?;
        solver.picard_max_iter = self.get("solver.picard_max_iter", solver.picard_max_iter)?;
        solver.picard_tol = self.get("solver.picard_tol", solver.picard_tol)?;
        solver.panels = self.get("solver.panels", solver.panels)?;
        solver.safety = self.get("solver.safety", solver.safety)?;
        solver.overflow_guard = self.get("solver.overflow_guard", solver.overflow_guard)?;
        solver.max_steps = self.get("solver.max_steps", solver.max_steps)?;
        solver.dealias = self.get("solver.dealias", solver.dealias)?;
        solver.nonlinear = self.get("solver.nonlinear", solver.nonlinear)?;
        solver.snapshot_stride = self.get("output.snapshot_stride", 0)?;
        solver.validate().map_err(solver_error)?;
        let kappa_mode = KappaMode::from_str(self.get_str("solver.kappa_mode", "theorem")).map_err(|e| {
            WnsError::Config {
                key: "solver.kappa_mode".into(),
                message: e.to_string(),
            }
        })?;
        let oracle = OracleSpec {
            modes: self.get("solver.oracle_modes", 64)?,
            box_factor: self.get("solver.oracle_box_factor", 2.0)?,
        };

        let amplitude = self.get("initial.amplitude", 0.5)?;
        let initial = match self.get_str("initial.kind", "random") {
            "zero" => InitialKind::Zero,
            "random" => InitialKind::Random {
                seed: self.get("initial.seed", 1)?,
                cutoff: self.get("initial.cutoff", 2.0)?,
                amplitude,
            },
            "shear" => InitialKind::Shear {
                width: self.get("initial.width", 0.5)?,
                amplitude,
            },
            other => {
                return Err(WnsError::Config {
                    key: "initial.kind".into(),
                    message: format!("`{other}` is not `zero`, `random` or `shear`"),
                })
            }
        };
        let output = OutputSpec {
            dir: PathBuf::from(self.get_str("output.dir", "wns-run")),
            csv_name: self.get_str("output.csv", "norms.csv").to_string(),
        };
        Ok(RunConfig {
            solver,
            initial,
            output,
            kappa_mode,
            oracle,
        })
    }
}

/// Names the solver key a validation message is about.
fn solver_error(e: WnsError) -> WnsError {
    let message = e.to_string();
    let key = [
        ("viscosity", "solver.nu"),
        ("alpha + d + 2", "solver.p"),
        ("dt and picard_tol", "solver.dt"),
        ("t_end", "solver.t_end"),
        ("panels", "solver.panels"),
        ("safety", "solver.safety"),
    ]
    .iter()
    .find(|(needle, _)| message.contains(needle))
    .map_or("solver", |(_, key)| key);
    WnsError::Config {
        key: key.to_string(),
        message,
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| WnsError::io(path, e))?;
        RawConfig::parse(&text)?.resolve()
    }

    /// Fully resolved configuration in the input format; parsing it back
    /// reproduces this configuration.
    pub fn echo(&self) -> String {
        let s = &self.solver;
        let g = &s.grid;
        let mut out = String::new();
        let _ = writeln!(out, "[grid]");
        let _ = writeln!(out, "d = {}", g.d);
        let _ = writeln!(out, "alpha = {:?}", g.alpha());
        let _ = writeln!(out, "box_len = {:?}", g.box_len);
        let _ = writeln!(out, "n = {}", g.n);
        let _ = writeln!(out, "r_max = {:?}", g.r_max);
        let _ = writeln!(out, "n_r = {}", g.n_r);
        let _ = writeln!(out, "lambda_max = {:?}", g.lambda_max);
        let _ = writeln!(out, "n_lambda = {}", g.n_lambda);
        let _ = writeln!(out, "\n[solver]");
        let mode = match s.mode {
            SolverMode::Picard => "picard",
            SolverMode::March => "march",
        };
        let kappa = match self.kappa_mode {
            KappaMode::Theorem => "theorem",
            KappaMode::Scaling => "scaling",
        };
        let _ = writeln!(out, "nu = {:?}\np = {:?}\nmode = {mode}", s.nu, s.p);
        let _ = writeln!(out, "dt = {:?}\nt_end = {:?}", s.dt, s.t_end);
        let _ = writeln!(out, "picard_max_iter = {}\npicard_tol = {:?}", s.picard_max_iter, s.picard_tol);
        let _ = writeln!(out, "panels = {}\nsafety = {:?}", s.panels, s.safety);
        let _ = writeln!(out, "overflow_guard = {:?}\nmax_steps = {}", s.overflow_guard, s.max_steps);
        let _ = writeln!(out, "dealias = {}\nnonlinear = {}", s.dealias, s.nonlinear);
        let _ = writeln!(out, "kappa_mode = {kappa}");
        let _ = writeln!(out, "oracle_modes = {}\noracle_box_factor = {:?}", self.oracle.modes, self.oracle.box_factor);
        let _ = writeln!(out, "\n[initial]");
        match &self.initial {
            InitialKind::Zero => {
                let _ = writeln!(out, "kind = zero");
            }
            InitialKind::Random { seed, cutoff, amplitude } => {
                let _ = writeln!(out, "kind = random\nseed = {seed}\ncutoff = {cutoff:?}\namplitude = {amplitude:?}");
            }
            InitialKind::Shear { width, amplitude } => {
                let _ = writeln!(out, "kind = shear\nwidth = {width:?}\namplitude = {amplitude:?}");
            }
        }
        let _ = writeln!(out, "\n[output]");
        let _ = writeln!(out, "dir = {}", self.output.dir.display());
        let _ = writeln!(out, "csv = {}", self.output.csv_name);
        let _ = writeln!(out, "snapshot_stride = {}", s.snapshot_stride);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = RawConfig::parse("").unwrap().resolve().unwrap();
        assert_eq!(cfg.solver.grid, GridSpec::small(BesselOrder::new(0.0).unwrap()));
        assert_eq!(cfg.solver.p, 5.0);
        assert_eq!(cfg.kappa_mode, KappaMode::Theorem);
    }

    #[test]
    fn echo_round_trips() {
        let text = "[grid]\npreset = small\nalpha = 0.5 # comment\n[solver]\nnu = 0.3\np = 8\nmode = picard\n\
                    kappa_mode = scaling\n[initial]\nkind = shear\nwidth = 0.7\n[output]\ndir = out\nsnapshot_stride = 2\n";
        let cfg = RawConfig::parse(text).unwrap().resolve().unwrap();
        assert_eq!(cfg.solver.mode, SolverMode::Picard);
        assert_eq!(cfg.initial, InitialKind::Shear { width: 0.7, amplitude: 0.5 });
        let again = RawConfig::parse(&cfg.echo()).unwrap().resolve().unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn errors_name_the_key() {
        let key_of = |text: &str| match RawConfig::parse(text).and_then(|r| r.resolve()) {
            Err(WnsError::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(key_of("[solver]\nnu = fast\n"), "solver.nu");
        assert_eq!(key_of("[solver]\nbogus = 1\n"), "solver.bogus");
        assert_eq!(key_of("[solver]\np = 3\n"), "solver.p");
        assert_eq!(key_of("[initial]\nkind = vortex\n"), "initial.kind");
        assert_eq!(key_of("[weird]\n"), "[weird]");
        assert_eq!(key_of("nu = 1\n"), "nu");
        assert_eq!(key_of("[grid]\nn = 7\n"), "grid");
        assert_eq!(key_of("[solver]\nnu = 1\nnu = 2\n"), "solver.nu");
    }

    #[test]
    fn p_rejection_quotes_the_hypothesis() {
        let err = RawConfig::parse("[solver]\np = 3\n").unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("2*alpha + d + 2 < p"), "{err}");
    }
}
