use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lottery_core::io::{parse_assignment, parse_decomposition, parse_instance, parse_matching};
use lottery_core::is_pareto_efficient;

fn lottery(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lottery"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = lottery(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn line<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no `{key}` in:\n{text}"))
        .trim()
}

const SINGLE: &str = r#"{"objects": [{"id": "a", "capacity": 1}], "agents": [{"id": "x", "prefs": ["a"]}]}"#;

#[test]
fn bounds_on_the_families_and_a_single_agent() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["family", "lb", "2", "--out", "lb.json"]);
    let text = ok(d, &["bounds", "lb.json", "--solve"]);
    assert_eq!(line(&text, "p-:"), "2");
    assert_eq!(line(&text, "floor(mu):"), "3");
    assert_eq!(line(&text, "interval:"), "1.5 < z < 4");
    assert_eq!(line(&text, "z:"), "2 (inside the interval)");

    ok(d, &["family", "ub", "3", "--out", "ub.json"]);
    assert_eq!(line(&ok(d, &["bounds", "ub.json"]), "p-:"), "3");

    fs::write(d.join("one.json"), SINGLE).unwrap();
    let text = ok(d, &["bounds", "one.json"]);
    assert_eq!(line(&text, "p-:"), "1");
    assert_eq!(line(&text, "p+:"), "1");
    assert_eq!(line(&text, "floor(mu):"), "1");
}

#[test]
fn mechanisms_write_readable_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["family", "lb", "2", "--out", "lb.json", "--rsd", "lb_rsd.json"]);
    let inst = parse_instance(&fs::read_to_string(d.join("lb.json")).unwrap()).unwrap();

    let rsd = ok(d, &["rsd", "lb.json"]);
    let x = parse_assignment(&inst, &rsd).unwrap();
    let from_family = parse_assignment(&inst, &fs::read_to_string(d.join("lb_rsd.json")).unwrap()).unwrap();
    assert_eq!(x, from_family);
    assert!(rsd.contains("\"5/12\""));

    let sampled = parse_assignment(&inst, &ok(d, &["rsd", "lb.json", "--sampled", "--samples", "2000", "--seed", "4"])).unwrap();
    assert!(sampled.max_abs_diff(&x) < 0.05);

    let ps = parse_assignment(&inst, &ok(d, &["ps", "lb.json"])).unwrap();
    ps.check_feasible(&inst).unwrap();

    let m = parse_matching(&inst, &ok(d, &["sd", "lb.json", "--order", "4,3,2,1"])).unwrap();
    assert_eq!(m.cardinality(), 4);
    assert!(is_pareto_efficient(&inst, &m));
    assert_eq!(ok(d, &["sd", "lb.json", "--seed", "7"]), ok(d, &["sd", "lb.json", "--seed", "7"]));
}

#[test]
fn decompose_and_solve() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["family", "lb", "2", "--out", "lb.json", "--rsd", "x.json"]);
    let inst = parse_instance(&fs::read_to_string(d.join("lb.json")).unwrap()).unwrap();

    let md = parse_decomposition(&inst, &ok(d, &["decompose", "lb.json", "x.json"])).unwrap();
    assert_eq!(md.worst_case_cardinality(), 3);

    for framework in ["rmp", "alpha"] {
        let text = ok(d, &["solve-mdsd", "lb.json", "x.json", "--framework", framework, "--out", "z.json"]);
        assert_eq!(line(&text, "status:"), "optimal");
        assert_eq!(line(&text, "z:"), "2");
        let z = parse_decomposition(&inst, &fs::read_to_string(d.join("z.json")).unwrap()).unwrap();
        assert!(z.matchings().all(|m| m.cardinality() >= 2 && is_pareto_efficient(&inst, m)));
    }

    let text = ok(d, &["solve-mdsd", "lb.json", "--measure", "margin", "--out", "g.json"]);
    assert_eq!(line(&text, "status:"), "optimal");
    let omega: u64 = line(&text, "margin:").parse().unwrap();
    let report = ok(d, &["unpopularity", "lb.json", "--decomposition", "g.json"]);
    assert_eq!(line(&report, "worst margin"), omega.to_string());
}

#[test]
fn generate_many_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("params.json"), r#"{"n_agents": 30, "ratio": 5}"#).unwrap();
    ok(d, &["generate", "--params", "params.json", "--count", "3", "--seed", "10", "--out", "gen"]);
    for seed in 10..13 {
        let text = fs::read_to_string(d.join(format!("gen/instance-{seed}.json"))).unwrap();
        let inst = parse_instance(&text).unwrap();
        assert_eq!((inst.n_agents(), inst.n_objects()), (30, 6));
    }
    let single = ok(d, &["generate", "--params", "params.json", "--seed", "11"]);
    assert_eq!(single, fs::read_to_string(d.join("gen/instance-11.json")).unwrap());
    assert!(!lottery(d, &["generate", "--count", "2"]).status.success());
}

#[test]
fn experiment_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("exp.json"),
        r#"{"grid": [{"n_agents": 20, "ratio": 5}, {"n_agents": 30, "ratio": 10}], "seeds": [0, 1], "samples": 500}"#,
    )
    .unwrap();
    let first = ok(d, &["experiment", "exp.json", "--out", "a", "--jobs", "2"]);
    let second = ok(d, &["experiment", "exp.json", "--out", "b"]);
    assert_eq!(first, second);
    for file in ["report.csv", "report.txt"] {
        assert_eq!(
            fs::read(d.join("a").join(file)).unwrap(),
            fs::read(d.join("b").join(file)).unwrap(),
            "{file}"
        );
    }
    let csv = fs::read_to_string(d.join("a/report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "id,agents,objects,p_min,floor_mu,z,upper,status,iterations,columns,error"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r[7], "optimal");
        let (p, f, z): (usize, usize, usize) = (r[3].parse().unwrap(), r[4].parse().unwrap(), r[5].parse().unwrap());
        assert!(p <= z && z <= f);
        let id = r[0];
        let inst = parse_instance(&fs::read_to_string(d.join(format!("a/instances/{id}.json"))).unwrap()).unwrap();
        let dec = fs::read_to_string(d.join(format!("a/decompositions/{id}.json"))).unwrap();
        parse_decomposition(&inst, &dec).unwrap();
    }
    assert_eq!(fs::read_to_string(d.join("a/timings.csv")).unwrap().lines().count(), 5);

    fs::write(d.join("empty.json"), r#"{"grid": []}"#).unwrap();
    let text = ok(d, &["experiment", "empty.json", "--out", "e"]);
    assert!(text.contains("instances 0"));
    assert_eq!(fs::read_to_string(d.join("e/report.csv")).unwrap().lines().count(), 1);
}

#[test]
fn bad_inputs_fail_with_the_path_and_position() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("broken.json"), "{\"objects\": [\n  {\"id\": \"a\", \"capacity\": 1},\n  oops\n]}").unwrap();
    let out = lottery(d, &["ps", "broken.json"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("broken.json") && err.contains("line 3"), "{err}");

    let bad_ref = r#"{"objects": [{"id": "a", "capacity": 1}], "agents": [{"id": "x", "prefs": ["b"]}]}"#;
    fs::write(d.join("ref.json"), bad_ref).unwrap();
    let out = lottery(d, &["ps", "ref.json"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown object `b`"));

    assert!(!lottery(d, &["bounds", "missing.json"]).status.success());
    assert!(!lottery(d, &["solve-mdsd", "ref.json", "--framework", "simplex"]).status.success());
    fs::write(d.join("exp.json"), r#"{"grid": [{"agents": 5}]}"#).unwrap();
    assert!(!lottery(d, &["experiment", "exp.json"]).status.success());
}
