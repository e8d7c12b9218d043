//! Local mild solution by Picard iteration on the existence interval.

use wns::grid::GridSpec;
use wns::solver::{calibrate_constants, existence_time, initial, mild_residual, picard_solve, SolverConfig};
use wns::special_fn::BesselOrder;

fn main() -> wns::Result<()> {
    let grid = GridSpec::small(BesselOrder::new(0.0)?);
    let cfg = SolverConfig::new(grid.clone(), 1.0, 6.0)?;
    let k = calibrate_constants(&cfg)?;
    println!("theta = {:.4}, C = {:.4e}, C_0 = {:.4e}", k.theta, k.c, k.c0);
    for amplitude in [0.05, 0.5, 2.0] {
        let u0 = initial::divergence_free_random(&grid, 1, 2.0, amplitude)?;
        let norm = u0.lp_norm(cfg.p)?;
        let t = 0.5 * existence_time(norm, &cfg, k.c_pad);
        let out = picard_solve(&u0, &cfg, t)?;
        println!(
            "||u0||_p = {norm:.3e}  T = {t:.3e}  iterations {}  ratios {:?}  residual {:.2e}",
            out.iterations,
            out.ratios.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>(),
            mild_residual(&out, &cfg)?
        );
    }
    Ok(())
}
