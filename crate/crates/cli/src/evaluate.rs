use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};

use trajmap_core::eval::{
    control_mae, direction_accuracy, map_fidelity, pose_metrics, DecodedPose, DirectionSample,
    PoseMetrics,
};
use trajmap_core::formats::{self, Label, LabelFile, Report};
use trajmap_core::trajectory::{derive_controls, Pose, HORIZON};
use trajmap_core::{Geo, SegmentId};

use crate::io::{read_text, reframe, trace_files, trace_name, write_text, Failure};

#[derive(Subcommand)]
pub enum EvaluateCommand {
    /// Position and orientation errors of predicted poses.
    Poses(PosesArgs),
    /// Per-interval speed and steering errors derived from trajectories.
    Controls(ControlsArgs),
    /// Whether predicted trajectories take the right branch at intersections.
    Direction(DirectionArgs),
    /// Distance of a built map to reference geometry.
    Map(MapArgs),
}

#[derive(Args)]
pub struct PosesArgs {
    /// Predicted poses; rows without position count as no response.
    #[arg(long)]
    pred: PathBuf,
    /// True poses, same timestamps in the same order.
    #[arg(long)]
    truth: PathBuf,
    /// Optional report file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ControlsArgs {
    /// Predicted labels.
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth labels; matched to predictions by trace and start time.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct DirectionArgs {
    /// Map file.
    #[arg(long)]
    map: PathBuf,
    /// Trace directory; each label's route comes from the trace of the same name.
    #[arg(long)]
    traces: PathBuf,
    /// Ground-truth labels (current poses).
    #[arg(long)]
    truth: PathBuf,
    /// Predicted labels.
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct MapArgs {
    /// Map file.
    #[arg(long)]
    map: PathBuf,
    /// Reference geometry (`truth` records).
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(cmd: EvaluateCommand) -> Result<(), Failure> {
    let (report, out) = match cmd {
        EvaluateCommand::Poses(a) => (poses(&a)?, a.out),
        EvaluateCommand::Controls(a) => (controls(&a)?, a.out),
        EvaluateCommand::Direction(a) => (direction(&a)?, a.out),
        EvaluateCommand::Map(a) => (map(&a)?, a.out),
    };
    print_table(&report);
    if let Some(path) = out {
        write_text(&path, formats::write_report(&report))?;
    }
    Ok(())
}

/// Two aligned columns on stdout.
pub fn print_table(report: &Report) {
    let width = report
        .entries
        .iter()
        .map(|(k, _)| k.len())
        .max()
        .unwrap_or(0);
    for (k, v) in &report.entries {
        println!("{k:<width$}  {v}");
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

fn push_metrics(report: &mut Report, prefix: &str, unit: &str, m: &PoseMetrics<f64>) {
    report.push(format!("{prefix}_response_rate"), m.response_rate);
    report.push(format!("{prefix}_mean_{unit}"), opt(m.mean));
    report.push(format!("{prefix}_median_{unit}"), opt(m.median));
}

fn poses(a: &PosesArgs) -> Result<Report, Failure> {
    let pred =
        formats::parse_poses(&read_text(&a.pred)?).map_err(|e| Failure::from(e).at(&a.pred))?;
    let truth =
        formats::parse_poses(&read_text(&a.truth)?).map_err(|e| Failure::from(e).at(&a.truth))?;
    if pred.rows.len() != truth.rows.len() {
        return Err(Failure::data(format!(
            "{} predictions for {} true poses",
            pred.rows.len(),
            truth.rows.len()
        )));
    }
    let to = truth.origin.or(pred.origin);
    let from = pred.origin.or(to);
    let mut preds = Vec::new();
    let mut truths = Vec::new();
    for (i, (p, t)) in pred.rows.iter().zip(&truth.rows).enumerate() {
        if (p.t - t.t).abs() > 1e-6 {
            return Err(Failure::data(format!(
                "row {}: times {} and {} differ",
                i + 1,
                p.t,
                t.t
            )));
        }
        let (Some(tp), Some(th)) = (t.p, t.heading) else {
            return Err(Failure::data(format!(
                "{}: row {} lacks position or heading",
                a.truth.display(),
                i + 1
            )));
        };
        truths.push(Pose::new(t.t, tp, th));
        preds.push(match (p.p, from, to) {
            (Some(pp), Some(f), Some(o)) => Some(DecodedPose {
                p: reframe(pp, f, o)?,
                heading: p.heading,
            }),
            (Some(pp), _, _) => Some(DecodedPose {
                p: pp,
                heading: p.heading,
            }),
            (None, _, _) => None,
        });
    }
    let (position, orientation) = pose_metrics(&preds, &truths)?;
    let mut report = Report::default();
    report.push("poses", truths.len());
    push_metrics(&mut report, "position", "m", &position);
    push_metrics(&mut report, "orientation", "deg", &orientation);
    Ok(report)
}

type LabelKey = (String, u64);

fn key(l: &Label) -> LabelKey {
    (l.trace.clone(), l.pose.t.to_bits())
}

fn load_labels(path: &Path) -> Result<LabelFile, Failure> {
    formats::parse_labels(&read_text(path)?).map_err(|e| Failure::from(e).at(path))
}

type Pairs<'a> = Vec<(&'a Label, &'a Label)>;

/// Prediction/truth pairs sharing trace and start time, and the count of
/// unmatched predictions.
fn match_labels<'a>(
    pred: &'a LabelFile,
    truth: &'a LabelFile,
) -> Result<(Pairs<'a>, usize), Failure> {
    let index: BTreeMap<LabelKey, &Label> = truth.labels.iter().map(|l| (key(l), l)).collect();
    let mut pairs = Vec::new();
    let mut unmatched = 0;
    for p in &pred.labels {
        match index.get(&key(p)) {
            Some(t) => pairs.push((p, *t)),
            None => unmatched += 1,
        }
    }
    if pairs.is_empty() {
        return Err(Failure::data("no prediction matches a ground-truth label"));
    }
    Ok((pairs, unmatched))
}

fn controls(a: &ControlsArgs) -> Result<Report, Failure> {
    let pred = load_labels(&a.pred)?;
    let truth = load_labels(&a.truth)?;
    let (pairs, unmatched) = match_labels(&pred, &truth)?;
    let p: Vec<_> = pairs
        .iter()
        .map(|(p, _)| derive_controls(&p.trajectory))
        .collect();
    let t: Vec<_> = pairs
        .iter()
        .map(|(_, t)| derive_controls(&t.trajectory))
        .collect();
    let mae = control_mae(&p, &t)?;
    let mut report = Report::default();
    report.push("pairs", pairs.len());
    report.push("unmatched", unmatched);
    for n in 0..HORIZON {
        report.push(format!("speed_mae_mps_{}", n + 1), mae.speed[n]);
    }
    for n in 0..HORIZON {
        report.push(format!("steering_mae_deg_{}", n + 1), mae.angle[n]);
    }
    Ok(report)
}

fn direction(a: &DirectionArgs) -> Result<Report, Failure> {
    let map = crate::load_map(&a.map)?;
    let mut routes = BTreeMap::new();
    for path in trace_files(&a.traces)? {
        let route =
            formats::parse_route(&read_text(&path)?).map_err(|e| Failure::from(e).at(&path))?;
        routes.insert(trace_name(&path)?, route);
    }
    let pred = load_labels(&a.pred)?;
    let truth = load_labels(&a.truth)?;
    let (pairs, unmatched) = match_labels(&pred, &truth)?;
    let mut samples = Vec::new();
    for (p, t) in pairs {
        let route = routes.get(&t.trace).ok_or_else(|| {
            Failure::data(format!(
                "no trace named {} in {}",
                t.trace,
                a.traces.display()
            ))
        })?;
        let pose = Pose::new(
            t.pose.t,
            reframe(t.pose.p, truth.origin, map.origin())?,
            t.pose.heading,
        );
        samples.push(DirectionSample {
            pose,
            prediction: p.trajectory,
            route: route.clone(),
        });
    }
    let r = direction_accuracy(&samples, &map)?;
    let mut report = Report::default();
    report.push("pairs", samples.len());
    report.push("unmatched", unmatched);
    for n in 0..HORIZON {
        report.push(format!("accuracy_{}", n + 1), opt(r.accuracy[n]));
    }
    for n in 0..HORIZON {
        report.push(format!("counted_{}", n + 1), r.counted[n]);
    }
    Ok(report)
}

fn segment_key(id: &SegmentId) -> String {
    match id {
        SegmentId::Edge(e) => format!("edge_{e}"),
        SegmentId::Turn(a, b) => format!("turn_{a}_{b}"),
    }
}

fn map(a: &MapArgs) -> Result<Report, Failure> {
    let map = crate::load_map(&a.map)?;
    let truth =
        formats::parse_truth(&read_text(&a.truth)?).map_err(|e| Failure::from(e).at(&a.truth))?;
    let from: Geo = truth.origin;
    let polylines = truth
        .polylines
        .into_iter()
        .map(|(id, pts)| {
            let pts = pts
                .into_iter()
                .map(|p| reframe(p, from, map.origin()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((id, pts))
        })
        .collect::<Result<BTreeMap<_, _>, Failure>>()?;
    let r = map_fidelity(&map, &polylines)?;
    let mut report = Report::default();
    report.push("segments", map.segments().len());
    report.push("points", r.points);
    report.push("mean_m", r.mean);
    report.push("max_m", r.max);
    report.push("max_adjacency_gap_m", r.max_adjacency_gap);
    report.push("unmatched", r.unmatched.len());
    report.push("missing", r.missing.len());
    for (id, d) in &r.per_segment {
        report.push(format!("mean_m_{}", segment_key(id)), d);
    }
    Ok(report)
}
