//! Sweep the mode frequency across the first two instability tongues and
//! report their edges, widths and peak growth rates.

use std::f64::consts::FRAC_PI_2;

use oscimedia::floquet::{exponent_scan, resonance_region};
use oscimedia::medium::MediumSpec;

fn main() -> Result<(), oscimedia::Error> {
    let medium = MediumSpec::new(2.0)?;
    let b = 0.3;
    let theta = FRAC_PI_2;

    println!("characteristic exponent across rho in [0.5, 2.5], b = {b}:");
    let scan = exponent_scan(medium, b, theta, (0.5, 2.5), 41, 1e-10)?;
    for (rho, nu) in &scan {
        let marker = if nu.stable { "" } else { "  <- unstable" };
        println!("  rho = {rho:.3}  Re nu = {:.6}  Im nu = {:.3e}{marker}", nu.re, nu.im);
    }

    for order in [1, 2] {
        let region = resonance_region(medium, b, theta, order, 1e-10)?;
        println!(
            "\ntongue m = {order}: rho in [{:.6}, {:.6}], width {:.3e}",
            region.rho_lo,
            region.rho_hi,
            region.rho_hi - region.rho_lo
        );
        println!(
            "  peak Im nu = {:.6e} at rho = {:.6}",
            region.im_nu_peak, region.rho_peak
        );
    }

    let first = resonance_region(medium, b, theta, 1, 1e-10)?;
    let second = resonance_region(medium, b, theta, 2, 1e-10)?;
    println!(
        "\nwidth ratio m2/m1 = {:.5}",
        (second.rho_hi - second.rho_lo) / (first.rho_hi - first.rho_lo)
    );
    Ok(())
}
