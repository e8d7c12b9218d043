//! Generalized translation, the product formula and heat-kernel convolution.

use wns::grid::{GridSpec, PhysicalField};
use wns::special_fn::BesselOrder;
use wns::translation::{convolve, convolve_direct_at, product_formula_defect, ConvolutionMethod};

fn heat_kernel(grid: &GridSpec, t: f64) -> PhysicalField {
    let kappa = grid.alpha() + grid.d as f64 / 2.0 + 1.0;
    PhysicalField::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (2.0 * t).powf(-kappa) * (-r2 / (4.0 * t)).exp()
    })
}

fn main() -> wns::Result<()> {
    let order = BesselOrder::new(1.0)?;
    let d = product_formula_defect(order, &[0.3, 1.7], &[-1.1, 2.4], &[2.0, 1.5])?;
    println!("product formula defect {d:.2e}");

    let grid = GridSpec::desk(order);
    let (s, t) = (0.3, 0.5);
    let conv = convolve(&heat_kernel(&grid, s), &heat_kernel(&grid, t), ConvolutionMethod::Spectral)?;
    let exact = heat_kernel(&grid, s + t);
    let err = conv.axpy(-1.0, &exact)?.max_abs() / exact.max_abs();
    println!("q_s * q_t against q_(s+t): relative error {err:.2e}");

    let x = [0.7, 1.2];
    let direct = convolve_direct_at(&heat_kernel(&grid, s), &heat_kernel(&grid, t), &x)?;
    let want = {
        let kappa = grid.alpha() + 1.5;
        (2.0 * (s + t)).powf(-kappa) * (-(x[0] * x[0] + x[1] * x[1]) / (4.0 * (s + t))).exp()
    };
    println!("direct quadrature at {x:?}: {direct:.12} (closed form {want:.12})");
    Ok(())
}
