//! Long-time march with the blow-up monitor on the recorded norm series.

use wns::grid::GridSpec;
use wns::solver::{blowup_monitor, initial, march, KappaMode, NormSeries, SolverConfig};
use wns::special_fn::BesselOrder;

fn main() -> wns::Result<()> {
    let grid = GridSpec::small(BesselOrder::new(0.5)?);
    let mut cfg = SolverConfig::new(grid.clone(), 0.5, 16.0)?;
    cfg.t_end = 0.5;
    cfg.dt = 0.02;
    let u0 = initial::divergence_free_random(&grid, 4, 2.0, 0.3)?;
    let out = march(&u0, &cfg)?;
    println!("status {:?} after {} samples", out.status, out.series.len());
    let stride = (out.series.len() / 8).max(1);
    for i in (0..out.series.len()).step_by(stride) {
        println!(
            "t = {:.3}  ||u||_p = {:.5e}  ||u||_2 = {:.5e}  div {:.1e}",
            out.series.times[i], out.series.lp_norms[i], out.series.l2_norms[i], out.series.div_norms[i]
        );
    }
    let report = blowup_monitor(&out.series, cfg.p, grid.alpha(), grid.d, KappaMode::Theorem);
    println!("simulated run: {report:?}");

    let mut synthetic = NormSeries::default();
    for i in 0..40 {
        let t = 0.95 * i as f64 / 39.0;
        synthetic.push(t, 3.0 * (1.0 - t).powf(-2.0), 1.0, 0.0)?;
    }
    match blowup_monitor(&synthetic, cfg.p, grid.alpha(), grid.d, KappaMode::Theorem).fit() {
        Some(f) => println!("synthetic (1 - t)^-2: T* = {:.5}, kappa = {:.5}", f.t_star, f.kappa),
        None => println!("synthetic series gave no fit"),
    }
    Ok(())
}
