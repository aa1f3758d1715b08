use clap::{Parser, Subcommand};
use gdbubble::cluster::best_one_dim_competitor;
use gdbubble::gauss1d::single_bubble_profile;
use gdbubble::search::{search, SearchError, SearchParams};
use gdbubble::tripod::{
    interface_areas, invert_volume_map, profile_point, strongly_convex_lower_bound, volume_map,
};
use gdbubble::variation::index_form_translation;
use gdbubble::verify::{self, Level};
use gdbubble::{Error, PlanePoint, SimplexVolume};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const DOMAIN: u8 = 2;
const NUMERICAL: u8 = 3;
const VERIFICATION: u8 = 4;

pub const PROFILE_HEADER: &str =
    "v1,v2,v3,x_u1,x_u2,I_m,grad_u1,grad_u2,hess_11,hess_12,hess_22,trace_residual";
pub const EDGES_HEADER: &str = "v1,v2,v3,I_m";

#[derive(Parser, Debug)]
#[command(name = "gdbubble", version, about = "Tripod clusters, the model double-bubble profile and a minimizer search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate I_m, its gradient and Hessian over a barycentric grid.
    Profile {
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        /// Tabulate the boundary of the simplex instead.
        #[arg(long)]
        edges: bool,
    },
    /// Find the tripod vertex with prescribed measures.
    Invert {
        #[arg(long)]
        v1: f64,
        #[arg(long)]
        v2: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Run the identity checks and write a JSON report.
    Verify {
        #[arg(long, value_parser = ["fast", "full"])]
        level: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1.0, hide = true)]
        jacobian_scale: f64,
    },
    /// Closed-form variations of a tripod under a translation.
    Variation {
        #[arg(long, allow_hyphen_values = true)]
        x_u1: f64,
        #[arg(long, allow_hyphen_values = true)]
        x_u2: f64,
        #[arg(long, allow_hyphen_values = true)]
        w_u1: f64,
        #[arg(long, allow_hyphen_values = true)]
        w_u2: f64,
    },
    /// Anneal a grid cluster towards a perimeter minimizer.
    Search {
        #[arg(long)]
        v1: f64,
        #[arg(long)]
        v2: f64,
        #[arg(long, value_parser = ["fast", "accurate"], default_value = "fast")]
        preset: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lower bound for a K-strongly log-concave measure.
    Bound {
        #[arg(long)]
        k: f64,
        #[arg(long)]
        v1: f64,
        #[arg(long)]
        v2: f64,
    },
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::Io(_) | Error::Format(_) => DOMAIN,
            _ => NUMERICAL,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure { code: DOMAIN, message: e.to_string() }
    }
}

type Outcome = Result<Value, Failure>;

fn run_header(command: &str, config: Value, seed: Option<u64>) -> Value {
    json!({
        "program": "gdbubble",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "seed": seed,
    })
}

fn volume(v1: f64, v2: f64) -> Result<SimplexVolume, Failure> {
    Ok(SimplexVolume::from_pair(v1, v2)?)
}

fn write_json(path: &Path, value: &Value) -> Result<(), Failure> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

/// Barycentric points `k/(3N)` with every `kᵢ ≥ 2`, so `min vᵢ ≥ 1/(2N)`
/// and the centre is included.
fn profile_points(n: usize) -> Vec<SimplexVolume> {
    let s = 3 * n;
    let mut out = Vec::new();
    for a in 2..=s {
        for b in 2..=s.saturating_sub(a) {
            let c = s - a - b;
            if c < 2 {
                continue;
            }
            let v = [a, b, c].map(|k| k as f64 / s as f64);
            if let Ok(v) = SimplexVolume::new(v) {
                out.push(v);
            }
        }
    }
    out
}

fn cmd_profile(grid: usize, out: &Path, edges: bool) -> Outcome {
    if !(5..=200).contains(&grid) {
        return Err(Error::Domain(format!("grid must be in [5, 200], got {grid}")).into());
    }
    let header = run_header("profile", json!({"grid": grid, "out": out, "edges": edges}), None);
    let mut w = std::io::BufWriter::new(std::fs::File::create(out)?);
    writeln!(w, "# {}", serde_json::to_string(&header)?)?;
    let mut rows = 0;
    let mut worst_trace: f64 = 0.0;
    if edges {
        writeln!(w, "{EDGES_HEADER}")?;
        let s = 3 * grid;
        for side in 0..3 {
            for k in 0..=s {
                let t = k as f64 / s as f64;
                let mut v = [0.0; 3];
                v[side] = t;
                v[(side + 1) % 3] = 1.0 - t;
                let i = single_bubble_profile(t.max(1.0 - t))?;
                writeln!(w, "{},{},{},{}", v[0], v[1], v[2], i)?;
                rows += 1;
            }
        }
    } else {
        writeln!(w, "{PROFILE_HEADER}")?;
        for v in profile_points(grid) {
            let p = profile_point(&v)?;
            let x = p.vertex.coords2();
            let g = p.gradient.coords2();
            let h = p.hessian.m22();
            let tr = p.trace_residual()?;
            worst_trace = worst_trace.max(tr);
            let [a, b, c] = v.values();
            writeln!(
                w,
                "{a},{b},{c},{},{},{},{},{},{},{},{},{:e}",
                x[0],
                x[1],
                p.value,
                g[0],
                g[1],
                h[(0, 0)],
                h[(0, 1)],
                h[(1, 1)],
                tr
            )?;
            rows += 1;
        }
    }
    w.flush()?;
    Ok(json!({"run": header, "rows": rows, "maxTraceResidual": worst_trace}))
}

fn cmd_invert(v1: f64, v2: f64, tol: f64) -> Outcome {
    let header = run_header("invert", json!({"v1": v1, "v2": v2, "tol": tol}), None);
    let v = volume(v1, v2)?;
    let x = invert_volume_map(&v, tol)?;
    let back = volume_map(&x)?;
    Ok(json!({
        "run": header,
        "volume": v.values(),
        "vertex": {"u1": x.coords2()[0], "u2": x.coords2()[1], "coords3": x.coords3()},
        "residual": back.max_abs_diff(&v),
        "interfaceAreas": interface_areas(&x).to_array(),
        "perimeter": interface_areas(&x).total(),
    }))
}

fn cmd_verify(level: &str, out: &Path, seed: Option<u64>, jacobian_scale: f64) -> Outcome {
    let level: Level = level.parse()?;
    let mut opts = verify::Options::new(level);
    if let Some(s) = seed {
        opts.seed = s;
    }
    opts.jacobian_scale = jacobian_scale;
    let header = run_header("verify", json!({"level": level, "out": out}), Some(opts.seed));
    let report = verify::run(&opts);
    let doc = json!({"run": header, "report": report});
    write_json(out, &doc)?;
    let summary = json!({
        "run": header,
        "passed": report.passed,
        "failed": report.failed,
        "failures": report.failures().map(|c| c.name.clone()).collect::<Vec<_>>(),
    });
    if !report.all_passed() {
        return Err(Failure { code: VERIFICATION, message: serde_json::to_string_pretty(&summary)? });
    }
    Ok(summary)
}

fn cmd_variation(x: [f64; 2], w: [f64; 2]) -> Outcome {
    let header = run_header("variation", json!({"xU1": x[0], "xU2": x[1], "wU1": w[0], "wU2": w[1]}), None);
    for c in x.iter().chain(&w) {
        if !c.is_finite() {
            return Err(Error::Domain("coordinates must be finite".into()).into());
        }
    }
    let xp = PlanePoint::from_coords2(x[0], x[1]);
    let wp = PlanePoint::from_coords2(w[0], w[1]);
    let r = index_form_translation(&xp, &wp);
    Ok(json!({"run": header, "variation": r, "qFromParts": r.q_from_parts()}))
}

fn cmd_search(v1: f64, v2: f64, preset: &str, seed: u64, out: &Path) -> Outcome {
    let params = SearchParams::preset(preset, seed)?;
    let header = run_header("search", json!({"v1": v1, "v2": v2, "preset": preset, "params": params}), Some(seed));
    let v = volume(v1, v2)?;
    std::fs::create_dir_all(out)?;
    match search(&v, &params) {
        Ok(result) => {
            write_json(&out.join("result.json"), &json!({"run": header, "result": result}))?;
            result.grid.save_binary(out.join("cluster.gbc"))?;
            result.grid.save_csv(out.join("cluster.csv"))?;
            Ok(json!({
                "run": header,
                "out": out,
                "achievedPerimeter": result.achieved_perimeter,
                "modelProfile": result.model_profile,
                "relativeGap": result.relative_gap,
                "tripleJunctionAngles": result.triple_junction_angles,
                "competitorPerimeter": best_one_dim_competitor(&v)?.perimeter(),
            }))
        }
        Err(SearchError::Input(e)) => Err(e.into()),
        Err(e) => {
            let path = out.join("diagnostics.json");
            write_json(&path, &json!({"run": header, "diagnostics": e.diagnostics()}))?;
            Err(Failure { code: NUMERICAL, message: format!("{e} (diagnostics in {})", path.display()) })
        }
    }
}

fn cmd_bound(k: f64, v1: f64, v2: f64) -> Outcome {
    let header = run_header("bound", json!({"k": k, "v1": v1, "v2": v2}), None);
    let v = volume(v1, v2)?;
    let bound = strongly_convex_lower_bound(k, &v)?;
    Ok(json!({"run": header, "volume": v.values(), "modelProfile": bound / k.sqrt(), "bound": bound}))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Profile { grid, out, edges } => cmd_profile(*grid, out, *edges),
        Command::Invert { v1, v2, tol } => cmd_invert(*v1, *v2, *tol),
        Command::Verify { level, out, seed, jacobian_scale } => cmd_verify(level, out, *seed, *jacobian_scale),
        Command::Variation { x_u1, x_u2, w_u1, w_u2 } => cmd_variation([*x_u1, *x_u2], [*w_u1, *w_u2]),
        Command::Search { v1, v2, preset, seed, out } => cmd_search(*v1, *v2, preset, *seed, out),
        Command::Bound { k, v1, v2 } => cmd_bound(*k, *v1, *v2),
    };
    match outcome {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("serialisable"));
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("gdbubble: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
