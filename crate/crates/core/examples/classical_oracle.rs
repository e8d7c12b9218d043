//! Comparison with the independent cosine-series solver at alpha = -1/2.

use wns::grid::GridSpec;
use wns::oracle::{compare_with_oracle, CosineGrid};
use wns::solver::{initial, SolverConfig};
use wns::special_fn::BesselOrder;

fn main() -> wns::Result<()> {
    let grid = GridSpec::small(BesselOrder::classical());
    let mut cfg = SolverConfig::new(grid.clone(), 1.0, 4.0)?;
    cfg.dt = 0.01;
    cfg.t_end = 0.1;
    let oracle = CosineGrid::matching(&grid, 64, 2.0 * grid.r_max)?;
    for amplitude in [0.01, 0.1, 1.0] {
        let u0 = initial::divergence_free_random(&grid, 7, 2.0, amplitude)?;
        let cmp = compare_with_oracle(&u0, &cfg, &oracle)?;
        println!("amplitude {amplitude:<5} max relative L2 gap {:.3e} over {} times", cmp.max_gap, cmp.times.len());
    }
    cfg.nonlinear = false;
    let u0 = initial::divergence_free_random(&grid, 7, 2.0, 1.0)?;
    println!("Stokes flow gap {:.3e}", compare_with_oracle(&u0, &cfg, &oracle)?.max_gap);
    Ok(())
}
