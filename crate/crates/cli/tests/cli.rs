use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use trajmap_core::formats;

const TOPOLOGY: &str = "\
# origin,45,7
node,1,45,7,15
node,2,45,7.005,15
node,3,45.004,7.005,15
edge,1,1,2
edge,2,2,1
edge,3,2,3
edge,4,3,2
edge,5,3,1
edge,6,1,3
";

const WORLD: &str = "\
# origin,45,7
param,sigma,1.5
param,seed,2
param,km_limit,60
param,runs,20
node,1,0,0,15
node,2,350,0,15
node,3,350,330,15
node,4,0,330,15
edge,1,1,2,line
edge,2,2,1,line
edge,3,2,3,arc,10
edge,4,3,2,arc,-10
edge,5,3,4,line
edge,6,4,3,line
edge,7,4,1,line
edge,8,1,4,line
";

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("trajmap-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn trajmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trajmap"))
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_input_names_the_path() {
    let dir = scratch("missing");
    let path = dir.join("nowhere.txt");
    let o = trajmap(&["simulate-routes", "--topology", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("nowhere.txt"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(trajmap(&["simulate-routes"]).status.code(), Some(2));
    assert_eq!(trajmap(&["fly"]).status.code(), Some(2));
    let dir = scratch("usage");
    let topo = dir.join("t.txt");
    fs::write(&topo, TOPOLOGY).unwrap();
    let o = trajmap(&[
        "simulate-routes",
        "--topology",
        topo.to_str().unwrap(),
        "--km-limit",
        "-1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_topology_reports_the_line() {
    let dir = scratch("malformed");
    let topo = dir.join("t.txt");
    fs::write(&topo, "# origin,45,7\nnode,1,45,7,15\nnode,2,45,seven,15\n").unwrap();
    let o = trajmap(&["simulate-routes", "--topology", topo.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let e = stderr(&o);
    assert!(e.contains("t.txt") && e.contains("line 3"), "{e}");
}

#[test]
fn zero_budget_gives_an_empty_plan() {
    let dir = scratch("empty");
    let topo = dir.join("t.txt");
    let plan = dir.join("plan.txt");
    fs::write(&topo, TOPOLOGY).unwrap();
    let o = trajmap(&[
        "simulate-routes",
        "--topology",
        topo.to_str().unwrap(),
        "--km-limit",
        "0",
        "--runs",
        "3",
        "--out",
        plan.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (graph, _) = formats::parse_topology(TOPOLOGY)
        .unwrap()
        .to_graph()
        .unwrap();
    let parsed = formats::parse_plan(&fs::read_to_string(&plan).unwrap(), &graph).unwrap();
    assert!(parsed.legs.is_empty());
    assert_eq!(parsed.total_length, 0.0);
}

#[test]
fn plan_goes_to_stdout_without_out() {
    let dir = scratch("stdout");
    let topo = dir.join("t.txt");
    fs::write(&topo, TOPOLOGY).unwrap();
    let args = [
        "simulate-routes",
        "--topology",
        topo.to_str().unwrap(),
        "--km-limit",
        "5",
        "--runs",
        "4",
        "--seed",
        "9",
    ];
    let a = trajmap(&args);
    let b = trajmap(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("leg,")));
    assert!(text.lines().any(|l| l.starts_with("total,")));
}

#[test]
fn synth_build_and_evaluate() {
    let dir = scratch("flow");
    let spec = dir.join("world.spec");
    fs::write(&spec, WORLD).unwrap();
    let world = dir.join("world");
    let s = |p: &PathBuf| p.to_str().unwrap().to_string();
    let o = trajmap(&["synth", "--spec", &s(&spec), "--out", &s(&world)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!world.join("clean").exists());

    let map = dir.join("map.txt");
    let o = trajmap(&[
        "build-map",
        "--topology",
        &s(&world.join("topology.txt")),
        "--traces",
        &s(&world.join("traces")),
        "--out",
        &s(&map),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    formats::parse_map(&fs::read_to_string(&map).unwrap())
        .unwrap()
        .to_road_map()
        .unwrap();

    let report = dir.join("report.txt");
    let o = trajmap(&[
        "evaluate",
        "map",
        "--map",
        &s(&map),
        "--truth",
        &s(&world.join("truth.txt")),
        "--out",
        &s(&report),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = formats::parse_report(&fs::read_to_string(&report).unwrap()).unwrap();
    let mean: f64 = r.get("mean_m").unwrap().parse().unwrap();
    assert!(mean < 1.5, "mean {mean}");

    // A trace naming a node the topology lacks is a data error.
    let traces = world.join("traces");
    let first = fs::read_dir(&traces)
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let text = fs::read_to_string(&first).unwrap();
    let broken = text.replacen("# route,", "# route,99,", 1);
    fs::write(&first, broken).unwrap();
    let o = trajmap(&[
        "build-map",
        "--topology",
        &s(&world.join("topology.txt")),
        "--traces",
        &s(&traces),
        "--out",
        &s(&dir.join("map2.txt")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains(first.file_name().unwrap().to_str().unwrap()));
}
