//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use wns::grid::GridSpec;
use wns::oracle::{compare_with_oracle, CosineGrid};
use wns::selftest::{run_check, SelftestOptions};
use wns::solver::{calibrate_constants, existence_time, initial, mild_residual, picard_solve, SolverConfig};
use wns::special_fn::BesselOrder;
use wns::Result;

struct Line {
    passed: bool,
    summary: String,
}

fn from_check(name: &str, time_limit: Option<f64>) -> Line {
    let r = run_check(name, &SelftestOptions::default()).expect("known check");
    let in_time = time_limit.is_none_or(|lim| r.seconds <= lim);
    let mut summary = format!("{name}: defect {:.3e} (tol {:e}) in {:.2}s", r.defect, r.tolerance, r.seconds);
    if let Some(lim) = time_limit {
        summary.push_str(&format!(" (limit {lim}s)"));
    }
    if !r.passed {
        summary.push_str(&format!("; worst case {}", r.detail));
    }
    Line {
        passed: r.passed && in_time,
        summary,
    }
}

fn or_error(run: impl FnOnce() -> Result<Line>) -> Line {
    run().unwrap_or_else(|e| Line {
        passed: false,
        summary: format!("error: {e}"),
    })
}

/// Criteria 8 and 9 share one Picard run.
fn picard_lines() -> (Line, Line) {
    let start = Instant::now();
    let run = || -> Result<_> {
        let g = GridSpec::small(BesselOrder::new(0.0)?);
        let cfg = SolverConfig::new(g.clone(), 1.0, 6.0)?;
        let k = calibrate_constants(&cfg)?;
        let u0 = initial::divergence_free_random(&g, 1, 2.0, 0.5)?;
        let t = 0.5 * existence_time(u0.lp_norm(cfg.p)?, &cfg, k.c_pad);
        let out = picard_solve(&u0, &cfg, t)?;
        let residual = mild_residual(&out, &cfg)?;
        Ok((cfg, t, out, residual))
    };
    match run() {
        Err(e) => {
            let fail = |s: String| Line { passed: false, summary: s };
            (fail(format!("error: {e}")), fail(format!("error: {e}")))
        }
        Ok((cfg, t, out, residual)) => {
            let secs = start.elapsed().as_secs_f64();
            let worst = out.ratios.iter().fold(0.0_f64, |m, r| m.max(*r));
            let contract = Line {
                passed: worst <= 0.5 && out.iterations <= 25 && secs <= 60.0,
                summary: format!(
                    "T = {t:.3e}, {} iterations (max 25), worst ratio {worst:.3e} (max 0.5), {secs:.2}s (limit 60s)",
                    out.iterations
                ),
            };
            let tol = 10.0 * cfg.picard_tol;
            let mild = Line {
                passed: residual <= tol,
                summary: format!("mild residual {residual:.3e} (tol {tol:e})"),
            };
            (contract, mild)
        }
    }
}

fn oracle_line() -> Line {
    or_error(|| {
        let start = Instant::now();
        let g = GridSpec::small(BesselOrder::classical());
        let mut cfg = SolverConfig::new(g.clone(), 1.0, 4.0)?;
        cfg.dt = 0.01;
        cfg.t_end = 0.1;
        let og = CosineGrid::matching(&g, 64, 2.0 * g.r_max)?;
        let mut worst: f64 = 0.0;
        for seed in [7, 11, 23] {
            let u0 = initial::divergence_free_random(&g, seed, 2.0, 0.1)?;
            worst = worst.max(compare_with_oracle(&u0, &cfg, &og)?.max_gap);
        }
        let secs = start.elapsed().as_secs_f64();
        Ok(Line {
            passed: worst <= 1e-4 && secs <= 120.0,
            summary: format!("max relative L2 gap {worst:.3e} (tol 1e-4) over 3 seeds, {secs:.2}s (limit 120s)"),
        })
    })
}

fn main() -> ExitCode {
    let total = Instant::now();
    let (c8, c9) = picard_lines();
    let lines: Vec<(u32, &str, Line)> = vec![
        (1, "Gaussian transform pair", from_check("gaussian_pair", Some(5.0))),
        (2, "Plancherel", from_check("plancherel", None)),
        (3, "round trip", from_check("round_trip", None)),
        (4, "convolution theorem and heat semigroup", from_check("convolution", None)),
        (5, "product formula", from_check("product_formula", None)),
        (6, "Leray projector", from_check("leray", None)),
        (7, "heat closed form", from_check("heat_closed_form", None)),
        (8, "Picard contraction", c8),
        (9, "mild residual", c9),
        (10, "classical oracle", oracle_line()),
        (11, "blow-up monitor", from_check("blowup_fit", None)),
        (12, "kernel bounds and Young", from_check("kernel_bounds", None)),
    ];
    let mut failed = 0;
    for (n, title, line) in &lines {
        let verdict = if line.passed { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {verdict} {title}: {}", line.summary);
        failed += usize::from(!line.passed);
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        lines.len() - failed,
        lines.len(),
        total.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
