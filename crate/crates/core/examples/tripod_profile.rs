//! The tripod family: volume map, its inverse, and the model profile with
//! gradient, Hessian and the trace identity `−tr[(∇²I_m)⁻¹] = 2 I_m`.
//!
//! Usage: `cargo run --example tripod_profile -- [v1 v2]`

use gdbubble::tripod::{interface_areas, profile_point, volume_jacobian, volume_map};
use gdbubble::SimplexVolume;

fn main() -> gdbubble::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let v = match args[..] {
        [a, b] => SimplexVolume::from_pair(a, b)?,
        _ => SimplexVolume::new([0.5, 0.3, 0.2])?,
    };
    let p = profile_point(&v)?;
    let x = p.vertex;
    println!("v              = {:?}", v.values());
    println!("vertex x (u1,u2) = {:?}", x.coords2());
    println!("V(x)           = {:?}", volume_map(&x)?.values());
    println!("areas A_12, A_23, A_31 = {:?}", interface_areas(&x).to_array());
    println!("I_m(v)         = {:.12}", p.value);
    println!("grad I_m       = {:?}", p.gradient.coords2());
    println!("Hessian (u1,u2) = {}", p.hessian.m22());
    println!("eigenvalues    = {:?}", p.hessian.eigenvalues());
    println!("trace residual = {:.3e}", p.trace_residual()?);
    println!("DV(x)          = {}", volume_jacobian(&x).m22());
    Ok(())
}
