use std::fs;
use std::path::Path;

use propa::cli::run;

fn propa(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("propa").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn grid_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (space, cover) = (path(dir.path(), "s.json"), path(dir.path(), "c.json"));
    assert_eq!(propa(&["gen-space", "--grid", "12", "--out", &space]).0, 0);
    assert_eq!(fs::read_to_string(&space).unwrap(), "{\"kind\":\"grid\",\"size\":12,\"dims\":[12]}\n");
    assert_eq!(propa(&["gen-cover", "--interval", "6", "--space", &space, "--out", &cover]).0, 0);

    let (code, out, err) = propa(&["witness", "--n", "2", "--R", "1", "--space", &space, "--cover", &cover]);
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["m"], 2);
    assert_eq!(report["all_pairs_ok"], true);
    assert_eq!(report["bound_final"], 1.0);
    assert!(report["measured_sup_zeta"].as_str().unwrap().contains('/'));

    let (code, out, _) = propa(&["stats", "--space", &space, "--cover", &cover]);
    assert_eq!(code, 0);
    let stats: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(stats["multiplicity"], 2);
    assert_eq!(stats["ball_lebesgue_per_point"].as_array().unwrap().len(), 12);
}

#[test]
fn infeasible_scale_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let (space, cover) = (path(dir.path(), "s.json"), path(dir.path(), "c.json"));
    propa(&["gen-space", "--grid", "12", "--out", &space]);
    propa(&["gen-cover", "--interval", "2", "--space", &space, "--out", &cover]);
    let (code, out, err) = propa(&["witness", "--n", "50", "--R", "1", "--space", &space, "--cover", &cover]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("x = 0"), "{err}");
    let (code, _, err) = propa(&["witness", "--n", "2", "--R", "2", "--space", &space, "--cover", &cover]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn sweep_rows_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let space = path(dir.path(), "p96.json");
    propa(&["gen-space", "--grid", "96", "--out", &space]);
    let sweep = ["sweep", "--n", "2,4,8,16", "--R", "1", "--ell-rule", "3", "--space", &space];
    let (code, out, err) = propa(&sweep);
    assert_eq!(code, 0, "{err}");
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["n", "m", "bound", "measured_sup_eta", "measured_sup_zeta", "sup_pair_x", "sup_pair_y"]
    );
    let bounds: Vec<f64> = reader.records().map(|r| r.unwrap()[2].parse().unwrap()).collect();
    assert_eq!(bounds.len(), 4);
    assert!(bounds.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(propa(&sweep).1, out);
}

#[test]
fn tree_and_graph_sources() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = propa(&["gen-space", "--tree", "2,2"]);
    assert_eq!(code, 0);
    assert_eq!(out, "{\"kind\":\"tree\",\"size\":7,\"arity\":2,\"depth\":2}\n");
    assert_eq!(propa(&["gen-space", "--tree", "2"]).0, 1);

    let edges = path(dir.path(), "g.txt");
    fs::write(&edges, "5\n0 1\n1 2\n2 3\n3 4\n").unwrap();
    let space = path(dir.path(), "g.json");
    assert_eq!(propa(&["gen-space", "--graph", &edges, "--out", &space]).0, 0);
    let cover = path(dir.path(), "c.json");
    assert_eq!(propa(&["gen-cover", "--net", "1", "--space", &space, "--out", &cover]).0, 0);
    let (code, out, err) = propa(&["dim", "--lambda", "1", "--mesh-cap", "2", "--exact", "--space", &space]);
    assert_eq!(code, 0, "{err}");
    let dim: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(dim["exact"], 1);

    fs::write(&edges, "3\n0 1\n1 9\n").unwrap();
    let (code, _, err) = propa(&["gen-space", "--graph", &edges]);
    assert_eq!(code, 1);
    assert!(err.contains("line 3"), "{err}");
    // interval covers need a grid
    assert_eq!(propa(&["gen-cover", "--interval", "2", "--space", &space]).0, 1);
}

#[test]
fn usage_errors() {
    assert_eq!(propa(&["gen-space"]).0, 1);
    assert_eq!(propa(&["gen-space", "--grid", "3", "--tree", "2,2"]).0, 1);
    assert_eq!(propa(&["witness", "--n", "0", "--space", "x"]).0, 1);
    assert_eq!(propa(&["stats"]).0, 1);
    assert_eq!(propa(&["stats", "--space", "/nonexistent/space.json"]).0, 1);
    assert_eq!(propa(&["dim", "--lambda", "3", "--mesh-cap", "2", "--space", "x"]).0, 1);
    let (code, out, _) = propa(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("gen-space"));
}

#[test]
fn mesh_below_lambda_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let space = path(dir.path(), "s.json");
    propa(&["gen-space", "--grid", "5", "--out", &space]);
    assert_eq!(propa(&["dim", "--lambda", "3", "--mesh-cap", "2", "--space", &space]).0, 2);
}
