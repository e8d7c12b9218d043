//! Forward and inverse Weinstein transform of a Gaussian on the desk grid.

use wns::grid::{GridSpec, PhysicalField};
use wns::transform::{forward, inverse, plancherel_defect, TransformPlan};
use wns::special_fn::BesselOrder;

fn main() -> wns::Result<()> {
    let alpha = std::env::args().nth(1).map_or(Ok(0.5), |a| a.parse()).expect("alpha is a number");
    let grid = GridSpec::desk(BesselOrder::new(alpha)?);
    let plan = TransformPlan::for_grid(&grid);
    let kappa = alpha + grid.d as f64 / 2.0 + 1.0;
    for s in [0.25, 0.5, 1.0, 2.0] {
        let e = PhysicalField::from_fn(&grid, |x| (-s * x.iter().map(|v| v * v).sum::<f64>()).exp());
        let spec = forward(&e, &plan)?;
        let mut err: f64 = 0.0;
        for (n, c) in spec.coeffs.iter().enumerate() {
            let l2: f64 = grid.frequency(n).iter().map(|v| v * v).sum();
            err = err.max((c.re - (2.0 * s).powf(-kappa) * (-l2 / (4.0 * s)).exp()).abs());
        }
        let back = inverse(&spec, &plan)?;
        let trip = back.axpy(-1.0, &e)?.max_abs() / e.max_abs();
        println!(
            "s = {s:<4}  forward error {:.2e}  round trip {trip:.2e}  Plancherel {:.2e}",
            err / (2.0 * s).powf(-kappa),
            plancherel_defect(&e, &plan)?
        );
    }
    Ok(())
}
