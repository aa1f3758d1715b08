//! Closed-form first and second variations of a tripod under a constant
//! translation, compared with finite differences of the translated family.

use gdbubble::fd;
use gdbubble::tripod::{tripod_perimeter, volume_map};
use gdbubble::variation::{first_variation_from_m, index_form_translation};
use gdbubble::PlanePoint;

fn main() -> gdbubble::Result<()> {
    let x = PlanePoint::from_coords2(0.4, -0.7);
    let w = PlanePoint::from_coords2(0.6, 0.8);
    let r = index_form_translation(&x, &w);
    let h = 1e-3;
    let vol = |t: f64| Ok(volume_map(&(x + t * w))?.values());
    let per = |t: f64| Ok(tripod_perimeter(&(x + t * w)));
    let dv = fd::derivative_vec(vol, h)?;
    let d2v = fd::second_derivative_vec(vol, h)?;
    let da = fd::derivative(per, h)?;
    let d2a = fd::second_derivative(per, h)?;
    let q_fd = d2a - (0..3).map(|i| r.lambda[i] * d2v[i]).sum::<f64>();
    println!("dV   closed {:?}\n     fd     {:?}", r.dv, dv);
    println!("d2V  closed {:?}\n     fd     {:?}", r.d2v, d2v);
    println!("dA   closed {:.12}  <lambda, Mw> {:.12}  fd {:.12}", r.da, first_variation_from_m(&x, &w), da);
    println!("d2A  closed {:.12}  fd {:.12}", r.d2a, d2a);
    println!("Q    closed {:.12}  from parts {:.12}  fd {:.12}", r.q, r.q_from_parts(), q_fd);
    Ok(())
}
