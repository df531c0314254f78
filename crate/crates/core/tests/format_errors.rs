use trajmap_core::formats::{self, FormatError};
use trajmap_core::roadmap::{BinaryImage, Edge, EdgeId, GraphTopology, Node, NodeId};
use trajmap_core::Point;

fn line_of(e: FormatError) -> usize {
    match e {
        FormatError::Parse { line, .. } => line,
        other => panic!("expected a parse error, got {other}"),
    }
}

fn two_nodes() -> GraphTopology<f64> {
    let node = |id, x| Node {
        id: NodeId(id),
        center: Point::new(x, 0.0),
        radius: 10.0,
    };
    let edge = |id, from, to| Edge {
        id: EdgeId(id),
        from: NodeId(from),
        to: NodeId(to),
    };
    GraphTopology::new(
        vec![node(1, 0.0), node(2, 100.0)],
        vec![edge(1, 1, 2), edge(2, 2, 1)],
    )
    .unwrap()
}

const MAP_HEAD: &str = "# origin,10,20\nnode,1,10,20,12\nnode,2,10,20.001,12\nedge,1,1,2\n";

#[test]
fn map_records_report_their_line() {
    let short = format!("{MAP_HEAD}segment,edge,1,1,80,1,0,0\n");
    assert_eq!(line_of(formats::parse_map(&short).unwrap_err()), 5);
    let bad_kind = format!("{MAP_HEAD}\n# note\nsegment,ramp,1,1,80,1,0,0,1\n");
    assert_eq!(line_of(formats::parse_map(&bad_kind).unwrap_err()), 7);
    let dup = format!("{MAP_HEAD}segment,edge,1,1,80,1,0,0,1\nsegment,edge,1,1,80,1,0,0,1\n");
    assert_eq!(line_of(formats::parse_map(&dup).unwrap_err()), 6);
    let not_number = format!("{MAP_HEAD}segment,edge,1,1,eighty,1,0,0,1\n");
    assert_eq!(line_of(formats::parse_map(&not_number).unwrap_err()), 5);
    let ok = format!("{MAP_HEAD}segment,edge,1,1,80,1,0,0,1\n");
    assert!(formats::parse_map(&ok).is_ok());
    assert!(matches!(
        formats::parse_map("node,1,10,20,12\n"),
        Err(FormatError::Invalid(_))
    ));
}

#[test]
fn plan_checks_routes_against_the_topology() {
    let topo = two_nodes();
    let plan =
        formats::parse_plan("leg,100,1,2\nleg,100,2,1\ntotal,200\npair,1,2,1\n", &topo).unwrap();
    assert_eq!(plan.legs.len(), 2);
    assert_eq!(
        line_of(formats::parse_plan("leg,100,1,3\ntotal,100\n", &topo).unwrap_err()),
        1
    );
    assert_eq!(
        line_of(formats::parse_plan("total,1\nlap,1\n", &topo).unwrap_err()),
        2
    );
    assert!(matches!(
        formats::parse_plan("leg,100,1,2\n", &topo),
        Err(FormatError::Invalid(_))
    ));
}

#[test]
fn labels_need_all_seven_points() {
    let mut row = String::from("# origin,1,2\nlabel,a,0,0,0,0");
    for k in 0..6 {
        row.push_str(&format!(",0,{k}"));
    }
    row.push('\n');
    assert_eq!(line_of(formats::parse_labels(&row).unwrap_err()), 2);
    let full = row.trim_end().to_string() + ",0,7\n";
    assert_eq!(formats::parse_labels(&full).unwrap().labels.len(), 1);
    assert!(matches!(
        formats::parse_labels("label,a,0,0,0,0,0,1,0,2,0,3,0,4,0,5,0,6,0,7\n"),
        Err(FormatError::Invalid(_))
    ));
}

#[test]
fn poses_may_leave_fields_empty() {
    let f = formats::parse_poses("pose,0,,,\npose,1,3,4,\npose,2,3,4,0.5\n").unwrap();
    assert_eq!(f.rows[0].p, None);
    assert_eq!(f.rows[1].heading, None);
    assert_eq!(f.rows[2].heading, Some(0.5));
    assert_eq!(formats::parse_poses(&formats::write_poses(&f)).unwrap(), f);
    assert_eq!(
        line_of(formats::parse_poses("pose,0,1,,\n").unwrap_err()),
        1
    );
    assert_eq!(
        line_of(formats::parse_poses("\n\npose,0,1\n").unwrap_err()),
        3
    );
}

#[test]
fn synth_spec_rejects_unknown_parameters_and_shapes() {
    let head = "# origin,1,2\nnode,1,0,0,15\nnode,2,300,0,15\n";
    let ok = format!("{head}edge,1,1,2,arc,10\nedge,2,2,1,line\nparam,sigma,0\n");
    let spec = formats::parse_synth_spec(&ok).unwrap();
    assert_eq!(spec.params.sigma, 0.0);
    assert_eq!(spec.edges.len(), 2);
    let unknown = format!("{head}param,wobble,1\n");
    assert_eq!(line_of(formats::parse_synth_spec(&unknown).unwrap_err()), 4);
    let shape = format!("{head}edge,1,1,2,spiral\n");
    assert_eq!(line_of(formats::parse_synth_spec(&shape).unwrap_err()), 4);
}

#[test]
fn pgm_round_trip_and_rejects() {
    let mut img = BinaryImage::new(5, 3);
    img.set(4, 2, true);
    img.set(0, 0, true);
    let back = BinaryImage::from_pgm(&img.to_pgm()).unwrap();
    assert_eq!(back, img);
    assert!(BinaryImage::from_pgm(b"P2\n1 1\n255\n0\n").is_err());
    assert!(BinaryImage::from_pgm(b"P5\n2 2\n255\n\x00").is_err());
}

#[test]
fn report_is_ordered_key_value() {
    let r = formats::parse_report("b,1\na,2\n").unwrap();
    assert_eq!(r.entries[0].0, "b");
    assert_eq!(r.get("a"), Some("2"));
    assert_eq!(formats::write_report(&r), "b,1\na,2\n");
    assert_eq!(line_of(formats::parse_report("a,1,2\n").unwrap_err()), 1);
}
