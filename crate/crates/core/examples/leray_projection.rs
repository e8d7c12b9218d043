//! Leray projection, divergence and the heat semigroup in frequency space.

use num_complex::Complex64;
use wns::grid::{GridSpec, SpectralField};
use wns::operators::{div_w, gradient_w, heat_semigroup, leray_project};
use wns::special_fn::BesselOrder;

fn sup(f: &SpectralField) -> f64 {
    f.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
}

fn main() -> wns::Result<()> {
    let grid = GridSpec::small(BesselOrder::new(0.0)?);
    let bump = |shift: f64| {
        SpectralField::from_fn(&grid, move |l| {
            let l2: f64 = l.iter().map(|v| v * v).sum();
            Complex64::new((-l2).exp() * (1.0 + shift * l[0]), shift * l[1])
        })
    };
    let v = vec![bump(0.3), bump(-0.8)];
    println!("sup |div V|   = {:.3e}", sup(&div_w(&v)?));
    let pv = leray_project(&v)?;
    println!("sup |div PV|  = {:.3e}", sup(&div_w(&pv)?));
    let ppv = leray_project(&pv)?;
    let idem = pv.iter().zip(&ppv).map(|(a, b)| sup(&a.sub(b).unwrap())).fold(0.0, f64::max);
    println!("sup |P^2 V - PV| = {idem:.3e}");
    let grad = leray_project(&gradient_w(&bump(0.5)))?;
    println!("sup |P grad p| = {:.3e}", grad.iter().map(sup).fold(0.0, f64::max));
    let mass = |f: &SpectralField| f.coeffs.iter().map(|c| c.norm()).sum::<f64>();
    let decayed = heat_semigroup(&bump(0.0), 1.0, 0.5)?;
    println!("heat flow for t = 0.5: sum |c| from {:.4} to {:.4}", mass(&bump(0.0)), mass(&decayed));
    Ok(())
}
