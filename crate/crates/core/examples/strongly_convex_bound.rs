//! `√K · I_m(v)` bounds the double-bubble profile of any measure whose
//! potential is `K`-strongly convex.

use gdbubble::tripod::{model_profile, strongly_convex_lower_bound};
use gdbubble::SimplexVolume;

fn main() -> gdbubble::Result<()> {
    let v = SimplexVolume::new([0.5, 0.3, 0.2])?;
    let base = model_profile(&v)?;
    for k in [0.25, 1.0, 4.0, 9.0] {
        let b = strongly_convex_lower_bound(k, &v)?;
        println!("K = {k:<5} bound = {b:.12}  bound/I_m = {:.12}", b / base);
    }
    Ok(())
}
