//! `trajmap`: build polynomial road maps from GPS traces and evaluate
//! trajectories against them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod evaluate;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use trajmap_core::formats::{
    self, Label, LabelFile, MapFile, PoseFile, PoseRow, TopologyFile, TraceFile, TruthFile,
};
use trajmap_core::geo::to_geodetic;
use trajmap_core::roadmap::{build_map, rasterize_crop, MapConfig, RouteTrace};
use trajmap_core::routing::{chord_lengths, simulate_coverage, under_crossed, CoverageConfig};
use trajmap_core::synth;
use trajmap_core::trajectory::{
    ground_truth_trajectory, smooth_poses, GroundTruthConfig, Pose, SmoothConfig, TrajectoryError,
    HORIZON,
};
use trajmap_core::Point;

use crate::io::{read_text, reframe, trace_files, write_text, Failure};

#[derive(Parser)]
#[command(
    name = "trajmap",
    version,
    about = "Polynomial road maps from GPS traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a road map to traces recorded over a known intersection graph.
    BuildMap(BuildMapArgs),
    /// Snap poses onto a map and smooth them over time.
    Project(ProjectArgs),
    /// Plan random drives until every intersection crossing is covered.
    SimulateRoutes(SimulateArgs),
    /// Render heading-up map crops around a pose as binary PGM images.
    Crop(CropArgs),
    /// Derive pose and 7 s trajectory labels from traces.
    GroundTruth(GroundTruthArgs),
    /// Score predictions or a map.
    #[command(subcommand)]
    Evaluate(evaluate::EvaluateCommand),
    /// Generate a synthetic world: topology, plan, traces and reference geometry.
    Synth(SynthArgs),
}

#[derive(Args)]
struct BuildMapArgs {
    /// Topology file (node and edge records).
    #[arg(long)]
    topology: PathBuf,
    /// Directory of trace files (`*.txt`).
    #[arg(long)]
    traces: PathBuf,
    /// Neighbor overlap used by the continuity refit, meters.
    #[arg(long, default_value_t = 5.0)]
    delta: f64,
    /// Lowest polynomial degree, used for the shortest segments.
    #[arg(long, default_value_t = 3)]
    min_degree: usize,
    /// Highest polynomial degree.
    #[arg(long, default_value_t = 9)]
    max_degree: usize,
    /// Output map file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProjectArgs {
    /// Map file.
    #[arg(long)]
    map: PathBuf,
    /// Pose file (`pose,t,x,y,heading`); heading is ignored.
    #[arg(long)]
    poses: PathBuf,
    /// Smoothing window in seconds; 0 disables smoothing.
    #[arg(long, default_value_t = 2.0)]
    smooth_window: f64,
    /// Degree of the local smoothing polynomial.
    #[arg(long, default_value_t = 2)]
    smooth_degree: usize,
    /// Output pose file, in the map frame.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Topology file.
    #[arg(long)]
    topology: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Driving budget per run, kilometers.
    #[arg(long, default_value_t = 350.0)]
    km_limit: f64,
    /// Independent runs; the best one is kept.
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    /// Crossings each pair edge should reach.
    #[arg(long, default_value_t = 3)]
    min_crossings: usize,
    /// Output plan file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CropArgs {
    /// Map file.
    #[arg(long)]
    map: PathBuf,
    /// Crop center `X,Y` in the map frame, meters; defaults to the first
    /// node of the route.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    /// Heading in radians, counterclockwise from east.
    #[arg(long, allow_hyphen_values = true)]
    heading: f64,
    /// File with a `# route,...` or `route,...` line (trace files work).
    #[arg(long)]
    route: PathBuf,
    /// Image side in pixels (1 px = 1 m); even, at least 32.
    #[arg(long, default_value_t = 128)]
    size: usize,
    /// Two outputs `full.pgm,route.pgm`: all roads, then the route only.
    #[arg(long)]
    out: String,
}

#[derive(Args)]
struct GroundTruthArgs {
    /// Directory of trace files.
    #[arg(long)]
    traces: PathBuf,
    /// Seconds between label start times.
    #[arg(long, default_value_t = 5.0)]
    every: f64,
    /// Degree of the time polynomial.
    #[arg(long, default_value_t = 4)]
    degree: usize,
    /// Extra context seconds around each 7 s window.
    #[arg(long, default_value_t = 2.0)]
    fit_window: f64,
    /// Output label file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// World spec file.
    #[arg(long)]
    spec: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also write noiseless copies of the traces under `clean/`.
    #[arg(long)]
    clean: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildMap(a) => cmd_build_map(a),
        Command::Project(a) => cmd_project(a),
        Command::SimulateRoutes(a) => cmd_simulate(a),
        Command::Crop(a) => cmd_crop(a),
        Command::GroundTruth(a) => cmd_ground_truth(a),
        Command::Evaluate(c) => evaluate::run(c),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("trajmap: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn load_topology(path: &Path) -> Result<TopologyFile, Failure> {
    formats::parse_topology(&read_text(path)?).map_err(|e| Failure::from(e).at(path))
}

pub(crate) fn load_map(path: &Path) -> Result<trajmap_core::Map, Failure> {
    let file = formats::parse_map(&read_text(path)?).map_err(|e| Failure::from(e).at(path))?;
    file.to_road_map().map_err(|e| Failure::from(e).at(path))
}

fn cmd_build_map(a: BuildMapArgs) -> Result<(), Failure> {
    let topo_file = load_topology(&a.topology)?;
    let (graph, origin) = topo_file
        .to_graph()
        .map_err(|e| Failure::from(e).at(&a.topology))?;
    let mut traces = Vec::new();
    for path in trace_files(&a.traces)? {
        let t = formats::parse_trace(&read_text(&path)?, Some(&graph))
            .map_err(|e| Failure::from(e).at(&path))?;
        traces.push(RouteTrace {
            route: t.route.clone(),
            samples: t
                .samples_in(origin)
                .map_err(|e| Failure::from(e).at(&path))?,
        });
    }
    let config = MapConfig {
        delta: a.delta,
        min_degree: a.min_degree,
        max_degree: a.max_degree,
        ..MapConfig::default()
    };
    let samples: usize = traces.iter().map(|t| t.samples.len()).sum();
    let map = build_map(&traces, graph, origin, &config)?;
    write_text(
        &a.out,
        formats::write_map(&MapFile::from_map(&map, &topo_file)),
    )?;
    println!(
        "{} segments from {} traces ({} samples); max adjacency gap {:.3} m",
        map.segments().len(),
        traces.len(),
        samples,
        map.max_adjacency_gap()
    );
    Ok(())
}

fn cmd_project(a: ProjectArgs) -> Result<(), Failure> {
    let map = load_map(&a.map)?;
    let input =
        formats::parse_poses(&read_text(&a.poses)?).map_err(|e| Failure::from(e).at(&a.poses))?;
    let from = input.origin.unwrap_or(map.origin());
    let mut snapped = Vec::new();
    let mut slots = Vec::new();
    for (i, row) in input.rows.iter().enumerate() {
        let Some(p) = row.p else { continue };
        let p = reframe(p, from, map.origin())?;
        let proj = map
            .project_point(p)
            .ok_or_else(|| Failure::data("map has no segments"))?;
        let seg = map
            .segment(proj.segment)
            .expect("projection names a map segment");
        let (dx, dy) = seg.curve.derivative_at(&proj.d);
        snapped.push(Pose::new(row.t, proj.q, dy.atan2(dx)));
        slots.push(i);
    }
    let poses = if a.smooth_window > 0.0 {
        smooth_poses(
            &snapped,
            &SmoothConfig {
                window: a.smooth_window,
                degree: a.smooth_degree,
            },
        )?
    } else {
        snapped
    };
    let mut rows: Vec<PoseRow> = input
        .rows
        .iter()
        .map(|r| PoseRow {
            t: r.t,
            p: None,
            heading: None,
        })
        .collect();
    for (slot, pose) in slots.into_iter().zip(&poses) {
        rows[slot] = PoseRow {
            t: pose.t,
            p: Some(pose.p),
            heading: Some(pose.heading),
        };
    }
    write_text(
        &a.out,
        formats::write_poses(&PoseFile {
            origin: Some(map.origin()),
            rows,
        }),
    )?;
    println!("{} of {} poses projected", poses.len(), input.rows.len());
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    if !(a.km_limit >= 0.0) || !a.km_limit.is_finite() {
        return Err(Failure::usage("--km-limit must be a non-negative number"));
    }
    let (graph, _) = load_topology(&a.topology)?
        .to_graph()
        .map_err(|e| Failure::from(e).at(&a.topology))?;
    let config = CoverageConfig {
        seed: a.seed,
        limit: a.km_limit * 1000.0,
        runs: a.runs,
        min_crossings: a.min_crossings,
    };
    let outcome = simulate_coverage(&graph, &chord_lengths(&graph), &config)?;
    let text = formats::write_plan(&outcome.plan);
    match &a.out {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    let pairs = graph.pair_edges().len();
    let mut report = formats::Report::default();
    report.push("best_run", outcome.run);
    report.push("legs", outcome.plan.legs.len());
    report.push(
        "total_km",
        format!("{:.3}", outcome.plan.total_length / 1000.0),
    );
    report.push("pair_edges", pairs);
    report.push("under_crossed", outcome.under_crossed);
    evaluate::print_table(&report);
    Ok(())
}

fn cmd_crop(a: CropArgs) -> Result<(), Failure> {
    let center = match &a.center {
        Some(c) => Some(parse_xy(c).ok_or_else(|| Failure::usage("--center must be X,Y"))?),
        None => None,
    };
    let outs: Vec<&str> = a.out.split(',').collect();
    if outs.len() != 2 || outs.iter().any(|s| s.is_empty()) {
        return Err(Failure::usage(
            "--out must name two files: full.pgm,route.pgm",
        ));
    }
    let map = load_map(&a.map)?;
    let route =
        formats::parse_route(&read_text(&a.route)?).map_err(|e| Failure::from(e).at(&a.route))?;
    let segments = map.route_segments(&route)?;
    let center = match center {
        Some(c) => c,
        None => route
            .first()
            .and_then(|n| map.topology().node(*n))
            .map(|n| n.center)
            .ok_or_else(|| Failure::data("route is empty"))?,
    };
    let full = rasterize_crop(&map, center, a.heading, None, a.size)?;
    let own = rasterize_crop(&map, center, a.heading, Some(&segments), a.size)?;
    write_text(&PathBuf::from(outs[0]), full.to_pgm())?;
    write_text(&PathBuf::from(outs[1]), own.to_pgm())?;
    println!(
        "{}x{} crops: {} road pixels, {} on route",
        a.size,
        a.size,
        full.count_set(),
        own.count_set()
    );
    Ok(())
}

fn parse_xy(s: &str) -> Option<Point> {
    let (x, y) = s.split_once(',')?;
    let (x, y) = (x.trim().parse::<f64>().ok()?, y.trim().parse::<f64>().ok()?);
    (x.is_finite() && y.is_finite()).then(|| Point::new(x, y))
}

fn cmd_ground_truth(a: GroundTruthArgs) -> Result<(), Failure> {
    if !(a.every > 0.0) || !(a.fit_window >= 0.0) {
        return Err(Failure::usage(
            "--every must be positive and --fit-window non-negative",
        ));
    }
    let config = GroundTruthConfig {
        degree: a.degree,
        fit_window: a.fit_window,
    };
    let mut origin = None;
    let mut labels = Vec::new();
    let mut skipped = 0usize;
    let files = trace_files(&a.traces)?;
    for path in &files {
        let trace: TraceFile =
            formats::parse_trace(&read_text(path)?, None).map_err(|e| Failure::from(e).at(path))?;
        let name = io::trace_name(path)?;
        let origin = *origin.get_or_insert(trace.origin);
        let samples = trace
            .samples_in(origin)
            .map_err(|e| Failure::from(e).at(path))?;
        let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
            continue;
        };
        let half = a.fit_window / 2.0;
        let end = last.t - HORIZON as f64 - half;
        let mut k = 0usize;
        loop {
            let t0 = first.t + half + k as f64 * a.every;
            if t0 > end + 1e-9 {
                break;
            }
            k += 1;
            match ground_truth_trajectory(&samples, t0, &config) {
                Ok((pose, trajectory)) => labels.push(Label {
                    trace: name.clone(),
                    pose,
                    trajectory,
                }),
                Err(
                    TrajectoryError::WindowTooSparse { .. }
                    | TrajectoryError::HeadingUndefined { .. },
                ) => skipped += 1,
                Err(e) => return Err(Failure::from(e).at(path)),
            }
        }
    }
    let origin =
        origin.ok_or_else(|| Failure::data(format!("no traces in {}", a.traces.display())))?;
    let count = labels.len();
    write_text(&a.out, formats::write_labels(&LabelFile { origin, labels }))?;
    println!(
        "{count} labels from {} traces; {skipped} windows skipped",
        files.len()
    );
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<(), Failure> {
    let spec = formats::parse_synth_spec(&read_text(&a.spec)?)
        .map_err(|e| Failure::from(e).at(&a.spec))?;
    let origin = spec.origin;
    let out = synth::generate(spec)?;
    let world = &out.world;
    io::create_dir(&a.out.join("traces"))?;
    if a.clean {
        io::create_dir(&a.out.join("clean"))?;
    }

    let topo = TopologyFile::from_graph(&world.topology, origin)?;
    write_text(&a.out.join("topology.txt"), formats::write_topology(&topo))?;
    write_text(&a.out.join("plan.txt"), formats::write_plan(&out.plan))?;
    let truth = TruthFile {
        origin,
        polylines: world.truth_polylines(1.0),
    };
    write_text(&a.out.join("truth.txt"), formats::write_truth(&truth))?;

    let geodetic = |rows: &[(i64, Point)]| -> Result<Vec<_>, Failure> {
        rows.iter()
            .map(|(ms, p)| Ok((*ms, to_geodetic(*p, origin)?)))
            .collect()
    };
    for (i, (route, rows)) in out.drives.iter().enumerate() {
        let name = format!("leg_{i:04}.txt");
        let file = TraceFile {
            origin,
            route: route.clone(),
            rows: geodetic(rows)?,
        };
        write_text(
            &a.out.join("traces").join(&name),
            formats::write_trace(&file),
        )?;
        if a.clean {
            let file = TraceFile {
                rows: geodetic(&world.drive_truth(route)?)?,
                ..file
            };
            write_text(
                &a.out.join("clean").join(&name),
                formats::write_trace(&file),
            )?;
        }
    }

    // Probe drive for `project`: noisy positions and the true poses.
    if let Some((route, rows)) = out.drives.first() {
        let noisy = PoseFile {
            origin: Some(origin),
            rows: rows
                .iter()
                .map(|(ms, p)| PoseRow {
                    t: *ms as f64 / 1000.0,
                    p: Some(*p),
                    heading: None,
                })
                .collect(),
        };
        let truth = PoseFile {
            origin: Some(origin),
            rows: world
                .drive_truth_poses(route)?
                .into_iter()
                .map(|(ms, p, h)| PoseRow {
                    t: ms as f64 / 1000.0,
                    p: Some(p),
                    heading: Some(h),
                })
                .collect(),
        };
        write_text(&a.out.join("probe_poses.txt"), formats::write_poses(&noisy))?;
        write_text(&a.out.join("probe_truth.txt"), formats::write_poses(&truth))?;
    }

    let samples: usize = out.drives.iter().map(|d| d.1.len()).sum();
    let p = &world.spec.params;
    println!(
        "{} traces, {} samples, {:.1} km planned, {} segments of reference geometry; \
         {} pair edges crossed fewer than {} times",
        out.drives.len(),
        samples,
        out.plan.total_length / 1000.0,
        truth.polylines.len(),
        under_crossed(&world.topology, &out.plan.pair_edge_counts, p.min_crossings),
        p.min_crossings
    );
    Ok(())
}
