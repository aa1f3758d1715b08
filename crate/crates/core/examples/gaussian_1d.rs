//! One-dimensional Gaussian primitives and the single-bubble profile
//! `I(v) = φ(Φ⁻¹(v))`.

use gdbubble::gauss1d::{phi, single_bubble_ode_residual, single_bubble_profile, Phi, Phi_inv};

fn main() -> gdbubble::Result<()> {
    println!("{:>6} {:>12} {:>12} {:>12}", "x", "phi", "Phi", "Phi_inv(Phi)");
    for x in [-3.0, -1.0, 0.0, 0.5, 2.0] {
        println!("{x:>6} {:>12.9} {:>12.9} {:>12.9}", phi(x), Phi(x), Phi_inv(Phi(x))?);
    }
    println!();
    println!("{:>6} {:>12} {:>14}", "v", "I(v)", "I*I'' + 1");
    for v in [0.01, 0.1, 0.25, 0.5, 0.75, 0.99] {
        println!("{v:>6} {:>12.9} {:>14.3e}", single_bubble_profile(v)?, single_bubble_ode_residual(v)?);
    }
    Ok(())
}
