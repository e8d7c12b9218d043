use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use wns::config::{RawConfig, RunConfig};
use wns::io::{read_series_csv, write_series_csv, write_snapshot};
use wns::oracle::{compare_with_oracle, CosineGrid};
use wns::selftest::{check_names, run_all, SelftestOptions};
use wns::solver::{blowup_monitor, march, picard_solve, BlowupReport, KappaMode, NormSeries, SolverMode, Workspace};
use wns::{Result, WnsError};

#[derive(Parser)]
#[command(name = "wns", version, about = "Navier-Stokes solver for the Weinstein operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suite on the desk grid.
    Selftest {
        /// Override the radial node count.
        #[arg(long)]
        grid_nr: Option<usize>,
        /// Print check names without running them.
        #[arg(long)]
        list: bool,
    },
    /// Run a configured simulation and write CSV, snapshots and a manifest.
    Simulate {
        config: PathBuf,
        /// Also run the classical solver and report the trajectory gap (needs alpha = -1/2).
        #[arg(long)]
        oracle: bool,
        /// Output directory, overriding `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bessel order, overriding `grid.alpha`.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
    },
    /// Fit a blow-up law to a stored norm series.
    Norms {
        csv: PathBuf,
        #[arg(long, default_value = "theorem")]
        kappa_mode: KappaMode,
        /// Lebesgue exponent of the stored norms.
        #[arg(long, default_value_t = 5.0)]
        p: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("WNS_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let result = match cli.command {
        Command::Selftest { grid_nr, list } => selftest(grid_nr, list),
        Command::Simulate { config, oracle, out, alpha } => simulate(&config, oracle, out, alpha),
        Command::Norms { csv, kappa_mode, p, alpha, d } => norms(&csv, kappa_mode, p, alpha, d),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                WnsError::Io { .. } => 2,
                _ => 1,
            })
        }
    }
}

fn selftest(grid_nr: Option<usize>, list: bool) -> Result<bool> {
    if list {
        for (name, what) in check_names() {
            println!("{name:<18} {what}");
        }
        return Ok(true);
    }
    let opts = SelftestOptions {
        grid_nr,
        ..SelftestOptions::default()
    };
    let start = Instant::now();
    let reports = run_all(&opts);
    for r in &reports {
        println!(
            "{:<18} {} defect {:.3e} tol {:e} {:.2}s  {}",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.defect,
            r.tolerance,
            r.seconds,
            r.detail
        );
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    println!("{} checks in {:.1}s", reports.len(), start.elapsed().as_secs_f64());
    if failed.is_empty() {
        Ok(true)
    } else {
        println!("failed: {}", failed.join(", "));
        Ok(false)
    }
}

fn simulate(path: &Path, with_oracle: bool, out: Option<PathBuf>, alpha: Option<f64>) -> Result<bool> {
    let text = std::fs::read_to_string(path).map_err(|e| WnsError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut raw = RawConfig::parse(&text)?;
    if let Some(a) = alpha {
        raw.set("grid.alpha", a);
    }
    if let Some(dir) = &out {
        raw.set("output.dir", dir.display());
    }
    let run = raw.resolve()?;
    let dir = run.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| WnsError::Io {
        path: dir.clone(),
        source: e,
    })?;

    let start = Instant::now();
    let u0 = run.initial.build(&run.solver.grid)?;
    let mut summary = String::new();
    let (mut series, snapshots) = match run.solver.mode {
        SolverMode::March => {
            let out = march(&u0, &run.solver)?;
            let _ = writeln!(summary, "status = {:?}", out.status);
            let _ = writeln!(summary, "steps = {}", out.series.len().saturating_sub(1));
            let _ = writeln!(summary, "contraction_constant = {:e}", out.constants.c);
            let mut snaps = out.snapshots;
            if snaps.is_empty() {
                snaps.push(out.final_state);
            }
            (out.series, snaps)
        }
        SolverMode::Picard => {
            let out = picard_solve(&u0, &run.solver, run.solver.t_end)?;
            let _ = writeln!(summary, "status = converged");
            let _ = writeln!(summary, "picard_iterations = {}", out.iterations);
            let worst = out.ratios.iter().fold(0.0_f64, |m, r| m.max(*r));
            let _ = writeln!(summary, "picard_max_ratio = {worst:e}");
            let ws = Workspace::new(&run.solver.grid, run.solver.dealias);
            let mut series = NormSeries::default();
            for (t, spec) in out.times.iter().zip(&out.spectral) {
                series.push(*t, ws.lp_norm(spec, run.solver.p)?, ws.lp_norm(spec, 2.0)?, ws.div_norm(spec))?;
            }
            (series, out.trajectory)
        }
    };
    let g = &run.solver.grid;
    let report = blowup_monitor(&series, run.solver.p, g.alpha(), g.d, run.kappa_mode);
    series.apply_report(&report);
    let max_div = series.div_norms.iter().fold(0.0_f64, |m, v| m.max(*v));
    let _ = writeln!(summary, "samples = {}", series.len());
    let _ = writeln!(summary, "max_div_norm = {max_div:e}");
    let _ = writeln!(summary, "blowup = {}", describe(&report));

    let mut ok = true;
    if with_oracle {
        let r_len = run.oracle.box_factor * g.r_max;
        let og = CosineGrid::matching(g, run.oracle.modes, r_len)?;
        let cmp = compare_with_oracle(&u0, &run.solver, &og)?;
        let _ = writeln!(summary, "oracle_max_gap = {:e}", cmp.max_gap);
        println!("oracle gap over {} samples: max {:e}", cmp.times.len(), cmp.max_gap);
        ok = cmp.max_gap.is_finite();
    }

    let csv_path = dir.join(&run.output.csv_name);
    write_series_csv(&csv_path, &series)?;
    for (i, s) in snapshots.iter().enumerate() {
        write_snapshot(&dir.join(format!("snapshot_{i:05}.wnsf")), s)?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    let _ = writeln!(summary, "snapshots = {}", snapshots.len());
    let _ = writeln!(summary, "wall_clock_seconds = {elapsed:.3}");
    write_manifest(&dir, &run, &summary)?;
    print!("{summary}");
    println!("wrote {}", dir.display());
    Ok(ok)
}

fn write_manifest(dir: &Path, run: &RunConfig, summary: &str) -> Result<()> {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut text = String::new();
    let _ = writeln!(text, "# wns {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "# finished at unix time {stamp}");
    let _ = writeln!(text, "\n{}", run.echo());
    let _ = writeln!(text, "# summary");
    for line in summary.lines() {
        let _ = writeln!(text, "# {line}");
    }
    let path = dir.join("manifest.txt");
    std::fs::write(&path, text).map_err(|e| WnsError::Io { path, source: e })
}

fn describe(report: &BlowupReport) -> String {
    match report {
        BlowupReport::Signature(f) => format!(
            "T* = {:.6e}, kappa = {:.6} (mode exponent {:.6}), rms {:.2e}, {} bound violations",
            f.t_star, f.kappa, f.kappa_mode, f.rms, f.violations
        ),
        BlowupReport::NoSignature(why) => format!("no blow-up signature ({why})"),
    }
}

fn norms(path: &Path, mode: KappaMode, p: f64, alpha: f64, d: usize) -> Result<bool> {
    let series = read_series_csv(path)?;
    let report = blowup_monitor(&series, p, alpha, d, mode);
    println!("{} samples", series.len());
    println!("{}", describe(&report));
    Ok(true)
}
