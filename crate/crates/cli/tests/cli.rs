use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use densewalk::graph::synth;
use densewalk::stats::spearman;
use densewalk::Graph;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_densewalk");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .env("RUST_LOG", "info")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_graph(dir: &Path, name: &str, g: &Graph) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, g.to_edge_list()).unwrap();
    path
}

/// Every file under `dir`, keyed by relative path.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let key = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(key, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn ranking_order(path: &Path) -> Vec<usize> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect()
}

fn ranking_scores(path: &Path) -> Vec<f64> {
    let mut rows: Vec<(usize, f64)> = fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',');
            (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
        })
        .collect();
    rows.sort_by_key(|r| r.0);
    rows.into_iter().map(|r| r.1).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn triangle_with_zero_fractions_keeps_every_edge() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(d.join("tri.edges"), "0 1\n1 2\n2 0\n").unwrap();
    ok(
        d,
        &[
            "--out-dir",
            "s",
            "preprocess",
            "--input",
            "tri.edges",
            "--val-frac",
            "0",
            "--test-frac",
            "0",
        ],
    );
    let train = fs::read_to_string(d.join("s/train.edges")).unwrap();
    assert_eq!(train.lines().filter(|l| !l.starts_with('#')).count(), 3);
    assert!(fs::read_to_string(d.join("s/test.edges")).unwrap().trim().is_empty());
}

#[test]
fn disconnected_input_keeps_largest_component() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(d.join("g.edges"), "10 11\n11 12\n12 10\n12 13\n50 51\n").unwrap();
    let out = ok(
        d,
        &[
            "--out-dir",
            "s",
            "preprocess",
            "--input",
            "g.edges",
            "--val-frac",
            "0",
            "--test-frac",
            "0",
        ],
    );
    let log = String::from_utf8_lossy(&out.stderr);
    assert!(log.contains("kept largest component: 4 of 6 vertices"), "{log}");
    let meta = json(&d.join("s/meta.json"));
    assert_eq!(meta["num_vertices"], 4);
    assert_eq!(meta["id_mapping"], serde_json::json!([10, 11, 12, 13]));
}

#[test]
fn full_chain_produces_every_artifact() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write_graph(d, "g.edges", &synth::planted_partition(60, 2, 0.3, 0.02, 4));
    ok(d, &["--out-dir", "split", "preprocess", "--input", "g.edges"]);
    ok(
        d,
        &["--out-dir", "rank", "density", "--split", "split", "--mode", "exact"],
    );
    ok(
        d,
        &[
            "--out-dir",
            "walks",
            "walks",
            "--split",
            "split",
            "--strategy",
            "dense",
            "--ranking",
            "rank/ranking.csv",
            "--num-batches",
            "20",
        ],
    );
    let walks = fs::read_to_string(d.join("walks/walks.txt")).unwrap();
    assert!(walks.starts_with("#walkset l=2"));
    assert_eq!(walks.lines().filter(|l| !l.starts_with('#')).count(), 13 * 20);

    for kind in ["markov", "replay"] {
        let fit_dir = format!("fit-{kind}");
        let gen_dir = format!("gen-{kind}");
        let eval_dir = format!("eval-{kind}");
        ok(
            d,
            &[
                "--out-dir",
                &fit_dir,
                "fit",
                "--split",
                "split",
                "--walks",
                "walks/walks.txt",
                "--generator",
                kind,
            ],
        );
        ok(
            d,
            &[
                "--out-dir",
                &gen_dir,
                "generate",
                "--split",
                "split",
                "--generator-dir",
                &format!("{fit_dir}/generator"),
                "--count",
                "2000",
                "--walk-length",
                "2",
            ],
        );
        ok(
            d,
            &[
                "--out-dir",
                &eval_dir,
                "evaluate",
                "--split",
                "split",
                "--generated",
                &format!("{gen_dir}/generated.txt"),
            ],
        );
        let report = json(&d.join(format!("{eval_dir}/report.json")));
        for key in ["roc_auc", "average_precision", "edge_overlap"] {
            let v = report[key].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&v), "{kind} {key} = {v}");
        }
        assert!(report["training_accuracy"].is_null());
        assert!(
            fs::read_to_string(d.join(format!("{eval_dir}/scores.csv")))
                .unwrap()
                .len()
                > 10
        );
        assert!(d.join(format!("{eval_dir}/evaluate.config.json")).exists());
    }
}

#[test]
fn star_center_is_first_only_when_inverted() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write_graph(d, "star.edges", &synth::star(4));
    ok(
        d,
        &[
            "--out-dir",
            "desc",
            "density",
            "--graph",
            "star.edges",
            "--mode",
            "exact",
        ],
    );
    ok(
        d,
        &[
            "--out-dir",
            "asc",
            "--invert-ranking",
            "density",
            "--graph",
            "star.edges",
            "--mode",
            "exact",
        ],
    );
    assert_eq!(ranking_order(&d.join("desc/ranking.csv")), vec![1, 2, 3, 4, 0]);
    assert_eq!(ranking_order(&d.join("asc/ranking.csv"))[0], 0);
    let sidecar = json(&d.join("asc/ranking.json"));
    assert_eq!(sidecar["direction"], "ascending");
}

#[test]
fn exact_and_monte_carlo_rankings_agree() {
    // scores on these graphs span about 0.01, so the estimate needs many
    // walks before the order settles
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    for (i, g) in [
        synth::erdos_renyi(50, 0.1, 7),
        synth::planted_partition(50, 2, 0.3, 0.02, 5),
    ]
    .iter()
    .enumerate()
    {
        let name = format!("g{i}.edges");
        write_graph(d, &name, g);
        let exact = format!("exact{i}");
        let mc = format!("mc{i}");
        ok(
            d,
            &["--out-dir", &exact, "density", "--graph", &name, "--mode", "exact"],
        );
        ok(
            d,
            &[
                "--out-dir",
                &mc,
                "density",
                "--graph",
                &name,
                "--mode",
                "mc",
                "--walks-per-vertex",
                "10000",
            ],
        );
        let rho = spearman(
            &ranking_scores(&d.join(format!("{exact}/ranking.csv"))),
            &ranking_scores(&d.join(format!("{mc}/ranking.csv"))),
        );
        assert!(rho >= 0.9, "graph {i}: spearman {rho}");
    }
}

fn small_benchmark(d: &Path, out: &str, extra: &[&str]) {
    let mut args = vec![
        "--out-dir",
        out,
        "--seed",
        "5",
        "benchmark",
        "--split",
        "split",
        "--repetitions",
        "1",
        "--num-batches",
        "10",
        "--walks-per-vertex",
        "20",
    ];
    args.extend_from_slice(extra);
    ok(d, &args);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write_graph(d, "g.edges", &synth::planted_partition(40, 2, 0.3, 0.03, 8));
    ok(
        d,
        &["--out-dir", "split", "--seed", "3", "preprocess", "--input", "g.edges"],
    );
    ok(
        d,
        &["--out-dir", "split2", "--seed", "3", "preprocess", "--input", "g.edges"],
    );
    assert_eq!(snapshot(&d.join("split")), snapshot(&d.join("split2")));

    let cases: [&[&str]; 3] = [
        &["density", "--split", "split"],
        &["walks", "--split", "split", "--strategy", "weighted"],
        &["entropy", "--split", "split", "--walks", "100", "--repetitions", "3"],
    ];
    for args in cases {
        let mut snaps = Vec::new();
        for threads in ["1", "1", "3"] {
            let out = format!("{}-{threads}-{}", args[0], snaps.len());
            let mut full = vec!["--out-dir", out.as_str(), "--threads", threads, "--seed", "9"];
            full.extend_from_slice(args);
            ok(d, &full);
            snaps.push(snapshot(&d.join(&out)));
        }
        assert_eq!(snaps[0], snaps[1], "{args:?} repeated");
        assert_eq!(snaps[0], snaps[2], "{args:?} across thread counts");
    }

    small_benchmark(d, "b1", &["--threads", "1"]);
    small_benchmark(d, "b2", &["--threads", "1"]);
    small_benchmark(d, "b3", &["--threads", "4"]);
    let b1 = snapshot(&d.join("b1"));
    assert_eq!(b1, snapshot(&d.join("b2")));
    assert_eq!(b1, snapshot(&d.join("b3")));
}

#[test]
fn benchmark_grid_has_the_default_shape() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write_graph(d, "g.edges", &synth::planted_partition(100, 2, 0.3, 0.01, 1));
    ok(d, &["--out-dir", "split", "preprocess", "--input", "g.edges"]);
    small_benchmark(d, "bench", &[]);

    let csv = fs::read_to_string(d.join("bench/aggregate.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "strategy,batch_size,walk_length,metric,mean,std,min,max,n_reps"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4 * 2 * 3);
    let cells: std::collections::BTreeSet<(&str, &str, &str)> = rows.iter().map(|r| (r[0], r[1], r[2])).collect();
    assert_eq!(cells.len(), 8);
    for (b, l) in [("13", "2"), ("19", "3"), ("25", "4"), ("40", "5")] {
        for s in ["uniform", "dense"] {
            assert!(cells.contains(&(s, b, l)), "{s} {b}:{l}");
            assert!(d.join(format!("bench/runs/{s}-b{b}-l{l}.json")).exists());
        }
    }

    let summary = fs::read_to_string(d.join("bench/summary.md")).unwrap();
    for label in [
        "Batch size",
        "Random walk length",
        "Average precision",
        "Average ROC-AUC",
        "Edge overlap",
        "Random / Dense",
    ] {
        assert!(summary.contains(label), "missing {label}");
    }
    let echo = json(&d.join("bench/benchmark.config.json"));
    assert_eq!(echo["seed"], 5);
    assert_eq!(
        echo["args"]["benchmark"]["configs"],
        serde_json::json!([[13, 2], [19, 3], [25, 4], [40, 5]])
    );
}

#[test]
fn entropy_reports_both_deciles() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write_graph(d, "barbell.edges", &synth::barbell(5, 4));
    ok(
        d,
        &[
            "--out-dir",
            "e",
            "entropy",
            "--graph",
            "barbell.edges",
            "--mode",
            "exact",
            "--walks",
            "1000",
            "--repetitions",
            "10",
        ],
    );
    let report = json(&d.join("e/entropy.json"));
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        for key in [
            "top_mean",
            "bottom_mean",
            "difference",
            "top_std",
            "bottom_std",
            "difference_std",
            "fraction_top_lower",
        ] {
            assert!(row[key].is_number(), "{key}");
        }
        assert!(row["top_mean"].as_f64().unwrap() < row["bottom_mean"].as_f64().unwrap());
    }

    fs::write(d.join("edge.edges"), "0 1\n").unwrap();
    ok(
        d,
        &[
            "--out-dir",
            "e1",
            "entropy",
            "--graph",
            "edge.edges",
            "--mode",
            "exact",
            "--walks",
            "50",
            "--repetitions",
            "3",
        ],
    );
    for row in json(&d.join("e1/entropy.json"))["rows"].as_array().unwrap() {
        assert_eq!(row["top_mean"], 0.0);
        assert_eq!(row["bottom_mean"], 0.0);
    }
}

#[test]
fn config_file_fills_in_and_flags_override() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write_graph(d, "star.edges", &synth::star(4));
    fs::write(
        d.join("run.cfg"),
        "[density]\nmode = exact\ninvert_ranking = true\nl_density = 3\n",
    )
    .unwrap();
    ok(
        d,
        &[
            "--out-dir",
            "a",
            "density",
            "--graph",
            "star.edges",
            "--config",
            "run.cfg",
        ],
    );
    ok(
        d,
        &[
            "--out-dir",
            "b",
            "density",
            "--graph",
            "star.edges",
            "--config",
            "run.cfg",
            "--l-density",
            "5",
        ],
    );
    let a = json(&d.join("a/density.config.json"));
    let b = json(&d.join("b/density.config.json"));
    assert_eq!(a["invert_ranking"], true);
    assert_eq!(a["args"]["density"]["density"]["mode"], "exact");
    assert_eq!(a["args"]["density"]["density"]["l_density"], 3);
    assert_eq!(b["args"]["density"]["density"]["l_density"], 5);
}

#[test]
fn exit_codes_follow_the_error_class() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write_graph(d, "star.edges", &synth::star(3));
    fs::write(d.join("bad.edges"), "0 1\n1 x\n").unwrap();
    let code = |args: &[&str]| run(d, args).status.code().unwrap();

    assert_eq!(code(&["density", "--no-such-flag"]), 1);
    assert_eq!(code(&["--out-dir", "o", "density"]), 1);
    assert_eq!(
        code(&["--out-dir", "o", "density", "--graph", "star.edges", "--restart", "1.5"]),
        1
    );
    assert_eq!(code(&["--out-dir", "o", "density", "--graph", "missing.edges"]), 2);
    assert_eq!(code(&["--out-dir", "o", "density", "--graph", "bad.edges"]), 2);
    assert_eq!(
        code(&["--out-dir", "o", "evaluate", "--split", "nowhere", "--generated", "x"]),
        2
    );
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn walks_with_invalid_steps_are_rejected_on_import() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write_graph(d, "path.edges", &synth::path(4));
    fs::write(d.join("w.txt"), "0 1 2\n0 2 3\n").unwrap();
    let out = run(
        d,
        &["--out-dir", "f", "fit", "--graph", "path.edges", "--walks", "w.txt"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not an edge"));
}
