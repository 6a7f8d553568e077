//! leafflow: leaf topology, red zones, double-bracket metrics, GDB flows,
//! and mesh export for the bracket family {x,y} = U(z) + V(z)xy, {z,x} = x,
//! {z,y} = -y on R^3 with the metric 2 dx dy + dz^2.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use leafflow_core::flow::FlowOptions;
use leafflow_core::verify::{run_verify, VerifyOptions};
use leafflow_core::{
    causal_character_at, chart_frame_at, gdb_on_leaf_at, gradient_residual_at, AmbientPoint, Chart,
    Error as CoreError, FunctionSpec, GridBox, RedLines, ScalarField,
};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_BAD_ARGS: u8 = 1;
const EXIT_VERIFY_FAIL: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "leafflow",
    version,
    about = "Symplectic-leaf geometry, metric degeneracy, and GDB gradient flows on R^3"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suite at seeded random points and report residuals.
    Verify {
        /// builtin:NAME, a spec file path, or an inline "family=..." string
        #[arg(long)]
        spec: String,
        /// Points per check
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Leaf topology and zone profile for a Casimir value.
    Classify {
        #[arg(long)]
        spec: String,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        zmin: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        zmax: f64,
    },
    /// Red-line z values of a leaf.
    Redlines {
        #[arg(long)]
        spec: String,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        zmin: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        zmax: f64,
    },
    /// Chart data at a point of the leaf C = c in the (x, z) chart.
    Frame {
        #[arg(long)]
        spec: String,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        z: f64,
        /// Scalar field G: also print the GDB direction, gradient residual,
        /// and causal character
        #[arg(long = "G", allow_hyphen_values = true)]
        g: Option<String>,
    },
    /// Integrate a GDB flow and write the trajectory as CSV.
    Flow {
        #[arg(long)]
        spec: String,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long = "G", allow_hyphen_values = true)]
        g: String,
        /// Start point "x,y,z" on the leaf
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract a leaf surface (--c) or the red zone (--red-zone) as OBJ.
    Mesh {
        #[arg(long)]
        spec: String,
        #[arg(long, conflicts_with = "red_zone", allow_negative_numbers = true)]
        c: Option<f64>,
        #[arg(long)]
        red_zone: bool,
        /// Cube bounds "lo,hi" in causal coordinates
        #[arg(long = "box", default_value = "-3,3", allow_hyphen_values = true)]
        bounds: String,
        #[arg(long, default_value_t = 64)]
        res: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write red-line polylines as CSV (leaf meshes only)
        #[arg(long)]
        lines: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_BAD_ARGS,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &CoreError) -> u8 {
    match e {
        CoreError::Parse(_) | CoreError::Spec(_) => EXIT_BAD_ARGS,
        _ => EXIT_NUMERIC,
    }
}

fn load_spec(text: &str) -> Result<FunctionSpec, CoreError> {
    if text.starts_with("builtin:") {
        FunctionSpec::builtin(text)
    } else if text.contains('=') {
        leafflow_core::parse_spec(text)
    } else {
        let content = std::fs::read_to_string(text)
            .map_err(|e| CoreError::Spec(format!("cannot read spec file '{text}': {e}")))?;
        leafflow_core::parse_spec(&content)
    }
}

fn write_file(path: &PathBuf, content: &str) -> Result<(), CoreError> {
    std::fs::write(path, content)
        .map_err(|e| CoreError::Spec(format!("cannot write '{}': {e}", path.display())))
}

/// Flush negative zero for display.
fn n0(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

fn fmt_list(xs: &[f64]) -> String {
    let inner: Vec<String> = xs.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", inner.join(", "))
}

fn run(cmd: Command) -> Result<u8, CoreError> {
    match cmd {
        Command::Verify { spec, n, seed } => cmd_verify(&spec, n, seed),
        Command::Classify {
            spec,
            c,
            zmin,
            zmax,
        } => cmd_classify(&spec, c, (zmin, zmax)),
        Command::Redlines {
            spec,
            c,
            zmin,
            zmax,
        } => cmd_redlines(&spec, c, (zmin, zmax)),
        Command::Frame { spec, c, x, z, g } => cmd_frame(&spec, c, x, z, g.as_deref()),
        Command::Flow {
            spec,
            c,
            g,
            start,
            dt,
            steps,
            out,
        } => cmd_flow(&spec, c, &g, &start, dt, steps, &out),
        Command::Mesh {
            spec,
            c,
            red_zone,
            bounds,
            res,
            out,
            lines,
        } => cmd_mesh(&spec, c, red_zone, &bounds, res, &out, lines.as_ref()),
    }
}

fn cmd_verify(spec_text: &str, n: usize, seed: u64) -> Result<u8, CoreError> {
    let spec = load_spec(spec_text)?;
    let opts = VerifyOptions {
        n_points: n,
        seed,
        ..Default::default()
    };
    println!("spec: {spec}");
    println!("points: {n}");
    println!("seed: {seed}");
    let results = run_verify(&spec, &opts);
    let mut all_pass = true;
    for r in &results {
        all_pass &= r.passed;
        println!(
            "check.{}: max_residual={:.6e} threshold={:.1e} points={} status={}",
            r.name,
            r.max_residual,
            r.threshold,
            r.points,
            if r.passed { "pass" } else { "fail" }
        );
    }
    println!("result: {}", if all_pass { "pass" } else { "fail" });
    Ok(if all_pass { EXIT_OK } else { EXIT_VERIFY_FAIL })
}

fn cmd_classify(spec_text: &str, c: f64, z_range: (f64, f64)) -> Result<u8, CoreError> {
    let spec = load_spec(spec_text)?;
    println!("spec: {spec}");
    println!("c: {c}");
    println!("z_range: [{}, {}]", z_range.0, z_range.1);
    let sing = leafflow_core::singular_leaves(&spec, z_range)?;
    println!("singular_leaves: {}", fmt_list(&sing));
    let crit = leafflow_core::casimir_critical_values(&spec, z_range)?;
    println!("critical_values: {}", fmt_list(&crit));
    let leaf = leafflow_core::LeafId::new(c);
    let (topo, _zones) = leafflow_core::describe_leaf(&spec, &leaf, z_range)?;
    println!("n_zeros: {}", topo.n_zeros);
    println!("degenerate: {}", topo.degenerate);
    match (topo.genus, topo.punctures) {
        (Some(g), Some(p)) => {
            println!("genus: {g}");
            println!("punctures: {p}");
        }
        _ => {
            println!("genus: n/a");
            println!("punctures: n/a");
        }
    }
    println!("note: {}", topo.components_note);
    match leafflow_core::red_lines(&spec, c, z_range)? {
        RedLines::BadLeaf => println!("bad_leaf: true"),
        RedLines::Zeros(zs) => {
            println!("red_lines: {}", fmt_list(&zs));
            let zp = leafflow_core::zone_profile(&spec, c, z_range)?;
            for iv in &zp.intervals {
                println!("zone: [{}, {}] {}", iv.lo, iv.hi, iv.signature);
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_redlines(spec_text: &str, c: f64, z_range: (f64, f64)) -> Result<u8, CoreError> {
    let spec = load_spec(spec_text)?;
    println!("spec: {spec}");
    println!("c: {c}");
    match leafflow_core::red_lines(&spec, c, z_range)? {
        RedLines::BadLeaf => println!("bad_leaf: true"),
        RedLines::Zeros(zs) => println!("red_lines: {}", fmt_list(&zs)),
    }
    Ok(EXIT_OK)
}

fn cmd_frame(spec_text: &str, c: f64, x: f64, z: f64, g: Option<&str>) -> Result<u8, CoreError> {
    let spec = load_spec(spec_text)?;
    let frame = chart_frame_at(&spec, c, Chart::XZ, [x, z])?;
    println!("spec: {spec}");
    println!("c: {c}");
    println!("chart: {}", frame.chart);
    println!("x: {x}");
    println!("z: {z}");
    println!("y: {}", n0(frame.dependent));
    println!("W: {}", n0(frame.w));
    println!(
        "g_ind: [[{}, {}], [{}, {}]]",
        n0(frame.g_ind[0][0]),
        n0(frame.g_ind[0][1]),
        n0(frame.g_ind[1][0]),
        n0(frame.g_ind[1][1])
    );
    println!("det_g_ind: {}", n0(frame.det_g_ind()));
    println!("omega: {}", n0(frame.omega));
    println!("f_S: {}", n0(frame.f_s));
    match &frame.tau_db {
        Some(t) => println!(
            "tau_db: [[{}, {}], [{}, {}]]",
            n0(t[0][0]),
            n0(t[0][1]),
            n0(t[1][0]),
            n0(t[1][1])
        ),
        None => println!("tau_db: undefined (red line)"),
    }
    if let Some(g_text) = g {
        let g_field = ScalarField::parse(g_text)?;
        let v = gdb_on_leaf_at(&spec, c, &g_field, Chart::XZ, [x, z])?;
        println!("G: {g_text}");
        println!("gdb: [{}, {}]", n0(v[0]), n0(v[1]));
        match gradient_residual_at(&spec, c, &g_field, Chart::XZ, [x, z]) {
            Ok(r) => println!("gradient_residual: {r:.6e}"),
            Err(e) => println!("gradient_residual: undefined ({e})"),
        }
        match causal_character_at(&spec, c, &g_field, Chart::XZ, [x, z]) {
            Ok(ch) => println!("causal: {} (norm2 = {})", ch.tag, n0(ch.norm2)),
            Err(e) => println!("causal: undefined ({e})"),
        }
    }
    Ok(EXIT_OK)
}

fn parse_start(text: &str) -> Result<AmbientPoint, CoreError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CoreError::Spec(format!(
            "start must be 'x,y,z', got '{text}'"
        )));
    }
    let mut vals = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        vals[i] = p
            .trim()
            .parse::<f64>()
            .map_err(|_| CoreError::Spec(format!("bad coordinate '{p}' in start")))?;
    }
    Ok(AmbientPoint::new(vals[0], vals[1], vals[2]))
}

fn cmd_flow(
    spec_text: &str,
    c: f64,
    g_text: &str,
    start_text: &str,
    dt: f64,
    steps: usize,
    out: &PathBuf,
) -> Result<u8, CoreError> {
    let spec = load_spec(spec_text)?;
    let g = ScalarField::parse(g_text)?;
    let start = parse_start(start_text)?;
    let opts = FlowOptions {
        dt,
        n_steps: steps,
        ..Default::default()
    };
    let traj = leafflow_core::integrate_flow(&spec, c, &g, start, &opts)?;
    write_file(out, &traj.to_csv())?;
    let first = traj.samples.first().expect("trajectory has samples");
    let last = traj.samples.last().expect("trajectory has samples");
    println!("spec: {spec}");
    println!("steps: {}", traj.samples.len() - 1);
    println!("termination: {}", traj.termination);
    println!("G: {} -> {}", first.g, last.g);
    println!("max_casimir_drift: {:.6e}", traj.max_casimir_drift(c));
    println!("wrote: {}", out.display());
    Ok(EXIT_OK)
}

fn parse_bounds(text: &str) -> Result<GridBox, CoreError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CoreError::Spec(format!(
            "box must be 'lo,hi', got '{text}'"
        )));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CoreError::Spec(format!("bad box bound '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CoreError::Spec(format!("bad box bound '{}'", parts[1])))?;
    if !(hi > lo) {
        return Err(CoreError::Spec("box needs lo < hi".into()));
    }
    Ok(GridBox {
        min: [lo; 3],
        max: [hi; 3],
    })
}

fn cmd_mesh(
    spec_text: &str,
    c: Option<f64>,
    red_zone: bool,
    bounds: &str,
    res: usize,
    out: &PathBuf,
    lines: Option<&PathBuf>,
) -> Result<u8, CoreError> {
    let spec = load_spec(spec_text)?;
    let bx = parse_bounds(bounds)?;
    if res < 8 {
        return Err(CoreError::Spec("mesh resolution must be at least 8".into()));
    }
    let mesh = if red_zone {
        leafflow_core::mesh_red_zone(&spec, &bx, res)
    } else {
        let c = c.ok_or_else(|| CoreError::Spec("mesh needs --c or --red-zone".into()))?;
        leafflow_core::mesh_leaf(&spec, c, &bx, res)
    };
    write_file(out, &leafflow_core::write_obj(&mesh))?;
    let mut counts = [0usize; 4];
    for t in &mesh.vertex_tags {
        let i = match t {
            leafflow_core::ZoneTag::Euclidean => 0,
            leafflow_core::ZoneTag::Lorentzian => 1,
            leafflow_core::ZoneTag::RedNear => 2,
            leafflow_core::ZoneTag::Excluded => 3,
        };
        counts[i] += 1;
    }
    println!("spec: {spec}");
    println!("vertices: {}", mesh.vertices.len());
    println!("triangles: {}", mesh.triangles.len());
    println!("components: {}", leafflow_core::component_count(&mesh));
    println!(
        "tags: euclidean={} lorentzian={} red-near={} excluded={}",
        counts[0], counts[1], counts[2], counts[3]
    );
    println!("wrote: {}", out.display());
    if let Some(lines_path) = lines {
        let c = c.ok_or_else(|| CoreError::Spec("--lines needs --c".into()))?;
        let polys = leafflow_core::red_line_polylines(&spec, c, &bx, res)?;
        write_file(lines_path, &leafflow_core::polylines_csv(&polys))?;
        println!("red_line_polylines: {}", polys.len());
        println!("wrote: {}", lines_path.display());
    }
    Ok(EXIT_OK)
}
