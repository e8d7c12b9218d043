//! Normalized Bessel functions, Gamma and the translation quadrature.

use wns::special_fn::{gamma, gauss_jacobi, normalized_bessel_j, BesselOrder};

fn main() -> wns::Result<()> {
    println!("{:>6} {:>14} {:>14} {:>14}", "xi", "j_0", "j_1/2", "j_3/2");
    let orders = [0.0, 0.5, 1.5].map(|a| BesselOrder::new(a).unwrap());
    for xi in [0.0, 0.5, 1.0, 5.0, 20.0, 100.0] {
        let v: Vec<String> = orders.iter().map(|&o| format!("{:14.10}", normalized_bessel_j(o, xi))).collect();
        println!("{xi:>6} {}", v.join(" "));
    }
    let half = normalized_bessel_j(BesselOrder::new(0.5)?, 3.0);
    println!("j_1/2(3) = {half:.15}, sin(3)/3 = {:.15}", 3f64.sin() / 3.0);
    println!("Gamma(1/2)^2 = {:.15} (pi = {:.15})", gamma(0.5)?.powi(2), std::f64::consts::PI);

    let q = gauss_jacobi(BesselOrder::new(1.0)?, 12)?;
    let mass = q.integrate(|_| 1.0);
    println!("int_0^pi sin^2 = {mass:.15} with {} nodes (pi/2 = {:.15})", q.len(), std::f64::consts::FRAC_PI_2);
    Ok(())
}
