//! Run the fast identity suite and print one line per check.

use gdbubble::verify::{run, Level, Options};

fn main() {
    let level = std::env::args().nth(1).map_or(Ok(Level::Fast), |s| s.parse()).expect("level is fast or full");
    let t = std::time::Instant::now();
    let report = run(&Options::new(level));
    for c in &report.checks {
        let mark = if c.pass { "ok  " } else { "FAIL" };
        println!("{mark} {:<40} {:>12.3e} <= {:.1e}", c.name, c.residual, c.tolerance);
    }
    println!("{} passed, {} failed in {:.1}s", report.passed, report.failed, t.elapsed().as_secs_f64());
}
