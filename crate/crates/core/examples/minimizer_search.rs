//! Anneal a random grid cluster with prescribed measures and compare it with
//! the model tripod.
//!
//! Usage: `cargo run --release --example minimizer_search -- [v1 v2 [seed [fast|accurate]]]`

use gdbubble::cluster::best_one_dim_competitor;
use gdbubble::search::{search, SearchParams};
use gdbubble::SimplexVolume;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let v = match (args.first(), args.get(1)) {
        (Some(a), Some(b)) => SimplexVolume::from_pair(a.parse()?, b.parse()?)?,
        _ => SimplexVolume::new([0.5, 0.3, 0.2])?,
    };
    let seed = args.get(2).map_or(Ok(1), |s| s.parse())?;
    let params = SearchParams::preset(args.get(3).map_or("fast", |s| s.as_str()), seed)?;
    let t = std::time::Instant::now();
    let r = search(&v, &params)?;
    println!("target        {:?}", r.target);
    println!("achieved      {:?} (error {:.1e})", r.achieved_measures, r.measure_error);
    println!("perimeter     {:.6}  model {:.6}  gap {:+.3}%", r.achieved_perimeter, r.model_profile, 100.0 * r.relative_gap);
    println!("competitor    {:.6}", best_one_dim_competitor(&v)?.perimeter());
    println!("angles        {:.2?}", r.triple_junction_angles);
    println!("areas / model {:+.4?}", r.areas_vs_model);
    println!("junction      {:.3?}  model vertex {:.3?}", r.junction, r.model_vertex);
    println!("flatness      {:.2} px", r.interface_flatness_residual);
    println!("{} epochs in {:.1}s", r.history.len(), t.elapsed().as_secs_f64());
    Ok(())
}
