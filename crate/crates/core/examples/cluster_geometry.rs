//! Grid clusters and the matrices built from their interface statistics:
//! a rasterised tripod against its closed form, and a one-dimensional
//! competitor with the same measures.

use gdbubble::cluster::{best_one_dim_competitor, dichotomy_rank, matrix_cs_gap, InterfaceStats};
use gdbubble::grid::{make_tripod_grid, GridCluster};
use gdbubble::tripod::{invert_volume_map, model_profile, tripod_perimeter};
use gdbubble::SimplexVolume;

fn report(name: &str, g: &GridCluster) -> gdbubble::Result<()> {
    let m = g.measures();
    let p = g.perimeter();
    println!("{name}: measures {:?} (outside {:.1e})", m.inside, m.outside);
    println!("  perimeter {:.6} (uncorrected {:.6}), {} cut edges", p.perimeter, p.raw_perimeter, p.cut_edges);
    println!("  M =\n{}  N =\n{}", p.stats.m(), p.stats.n());
    println!("  CS gap min-eig {:.3e}, rank M {}", matrix_cs_gap(&p.stats)?, dichotomy_rank(&p.stats, 1e-3));
    Ok(())
}

fn main() -> gdbubble::Result<()> {
    let v = SimplexVolume::new([0.5, 0.3, 0.2])?;
    let x = invert_volume_map(&v, 1e-12)?;
    let exact = InterfaceStats::tripod(&x);
    println!("model: I_m = {:.6}, rank M {}", tripod_perimeter(&x), dichotomy_rank(&exact, 1e-9));
    report("tripod grid 512", &make_tripod_grid(&x, 6.0, 512)?)?;

    let line = best_one_dim_competitor(&v)?;
    println!("\none-dimensional competitor: perimeter {:.6} vs I_m {:.6}", line.perimeter(), model_profile(&v)?);
    report("competitor grid 512", &GridCluster::from_one_dim(&line, 6.0, 512)?)?;
    Ok(())
}
