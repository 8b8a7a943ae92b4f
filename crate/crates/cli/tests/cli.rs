use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use section_pursuit::datagen::{hole_fixture, sample_with_cavities};
use section_pursuit::index::{IndexConfig, IndexValue};
use section_pursuit::pursuit::evaluate_frame;
use section_pursuit::slicing::Dataset;
use section_pursuit::ProjectionFrame;
use section_pursuit_cli::ingest::{ingest, IngestOptions};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_section-pursuit")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_csv(path: &Path, data: &Dataset) {
    let mut s = (1..=data.p()).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
    s.push('\n');
    for row in data.rows() {
        s.push_str(&row.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    fs::write(path, s).unwrap();
}

/// Count circles per panel and compare with the declared counts.
fn assert_declared_circles(svg: &str) -> Vec<usize> {
    let doc = roxmltree::Document::parse(svg).expect("valid XML");
    let panels: Vec<_> = doc.descendants().filter(|n| n.attribute("data-points").is_some()).collect();
    assert!(!panels.is_empty());
    let mut counts = Vec::new();
    for panel in &panels {
        let declared: usize = panel.attribute("data-points").unwrap().parse().unwrap();
        let circles = panel.descendants().filter(|n| n.has_tag_name("circle")).count();
        assert_eq!(circles, declared);
        counts.push(declared);
    }
    let total = doc.descendants().filter(|n| n.has_tag_name("circle")).count();
    assert_eq!(total, counts.iter().sum::<usize>());
    counts
}

#[test]
fn index_eval_matches_library_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let data = sample_with_cavities(20_000, 4, 1.0, &hole_fixture(4, 1.0), 1).unwrap().dataset;
    let csv = dir.path().join("fixture.csv");
    write_csv(&csv, &data);
    let out = ok(&["index-eval", "--input", path(&csv), "--no-scale", "--r-max", "1", "--axes", "1", "2", "--out-dir", path(&dir.path().join("o"))]);
    let printed: IndexValue = serde_json::from_slice(&out.stdout).unwrap();
    let reloaded = ingest(&IngestOptions { input: csv.clone(), class_column: None, drop_class: None, scale: false, r_max: Some(1.0) })
        .unwrap()
        .dataset;
    let direct = evaluate_frame(
        &reloaded,
        &ProjectionFrame::coordinate_plane(4, 0, 1).unwrap(),
        &IndexConfig::with_defaults(1.0).unwrap(),
    )
    .unwrap();
    assert_eq!(printed, direct);
}

#[test]
fn generated_ball_scores_low() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    ok(&["datagen", "ball", "--n", "1000", "--p", "4", "--seed", "1", "--out-dir", path(&gen)]);
    let csv = gen.join("data.csv");
    // at the default slice height 1000 points leave under one expected point per inner bin
    let out = run(&["index-eval", "--input", path(&csv), "--axes", "1", "2", "--out-dir", path(&dir.path().join("a"))]);
    assert_eq!(out.status.code(), Some(3));
    let out = ok(&[
        "index-eval", "--input", path(&csv), "--axes", "1", "2", "--slice-height-ratio", "0.5",
        "--out-dir", path(&dir.path().join("b")),
    ]);
    let v: IndexValue = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.value < 0.15, "{}", v.value);
}

#[test]
fn pursue_writes_trace_svg_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    ok(&["datagen", "cavity", "--n", "20000", "--p", "4", "--preset", "hole-fixture", "--seed", "1", "--out-dir", path(&gen)]);
    let csv = gen.join("data.csv");
    let out_a = dir.path().join("a");
    let args = |out: &PathBuf| {
        vec![
            "pursue".to_string(), "--input".into(), path(&csv).into(), "--no-scale".into(), "--r-max".into(), "1".into(),
            "--seed".into(), "5".into(), "--interpolate".into(), "4".into(), "--out-dir".into(), path(out).into(),
        ]
    };
    let a: Vec<String> = args(&out_a);
    ok(&a.iter().map(String::as_str).collect::<Vec<_>>());
    for f in ["trace.json", "tour.json", "best_slice.svg", "manifest.json", "ingest.json"] {
        assert!(out_a.join(f).exists(), "{f}");
    }
    let trace = section_pursuit::pursuit::PursuitTrace::from_json(&fs::read_to_string(out_a.join("trace.json")).unwrap()).unwrap();
    let optimum = evaluate_frame(
        &sample_with_cavities(20_000, 4, 1.0, &hole_fixture(4, 1.0), 1).unwrap().dataset,
        &ProjectionFrame::coordinate_plane(4, 0, 1).unwrap(),
        &IndexConfig::with_defaults(1.0).unwrap(),
    )
    .unwrap();
    assert!(trace.best().index.value >= 0.9 * optimum.value);

    let counts = assert_declared_circles(&fs::read_to_string(out_a.join("best_slice.svg")).unwrap());
    assert_eq!(counts, vec![trace.best().index.inside_count, 20_000]);

    let out_b = dir.path().join("b");
    let b: Vec<String> = args(&out_b);
    ok(&b.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(fs::read(out_a.join("trace.json")).unwrap(), fs::read(out_b.join("trace.json")).unwrap());
}

#[test]
fn topotrace_counts_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    ok(&["datagen", "cavity", "--n", "5000", "--p", "4", "--preset", "hole-fixture", "--seed", "2", "--out-dir", path(&gen)]);
    let out = dir.path().join("t");
    ok(&[
        "topotrace", "--input", path(&gen.join("data.csv")), "--no-scale", "--r-max", "1", "--epsilon", "0",
        "--start-axes", "1", "2", "--m", "100", "--alpha-max", "1.5708", "--out-dir", path(&out),
    ]);
    let csv = fs::read_to_string(out.join("topotrace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("trace_id,alpha,index,raw"));
    assert_eq!(lines.count(), 100 * 41);
    let counts = assert_declared_circles(&fs::read_to_string(out.join("topotrace.svg")).unwrap());
    assert_eq!(counts, vec![4100]);
    assert!(out.join("squint.json").exists());
}

#[test]
fn ingestion_drops_exactly_one_class() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("olives.csv");
    let mut s = String::from("a,b,c,d,region\n");
    let mut expected = 0;
    for i in 0..300 {
        let t = i as f64;
        let region = ["north", "south", "sardinia"][i % 3];
        if region != "south" {
            expected += 1;
        }
        s.push_str(&format!("{},{},{},{},{region}\n", t.sin(), (1.3 * t).cos(), (0.7 * t).sin() * 2.0, t % 7.0));
    }
    fs::write(&csv, s).unwrap();
    let opts = IngestOptions {
        input: csv,
        class_column: Some("region".into()),
        drop_class: Some("south".into()),
        scale: true,
        r_max: Some(100.0),
    };
    let out = ingest(&opts).unwrap();
    let r = &out.report;
    assert_eq!(out.dataset.n(), expected);
    assert_eq!(r.rows_dropped_by_class, 100);
    assert_eq!(r.rows_read, r.rows_kept + r.rows_trimmed + r.rows_dropped_by_class);
    assert_eq!(r.columns, vec!["a", "b", "c", "d"]);

    let trimmed = ingest(&IngestOptions { r_max: None, ..opts }).unwrap().report;
    assert_eq!(trimmed.rows_read, trimmed.rows_kept + trimmed.rows_trimmed + trimmed.rows_dropped_by_class);
    assert!(trimmed.rows_trimmed >= 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "a,b,c\n1,2,x\n").unwrap();
    let o = path(&dir.path().join("o")).to_string();
    assert_eq!(run(&["index-eval", "--input", path(&bad), "--axes", "1", "2", "--out-dir", &o]).status.code(), Some(2));
    assert_eq!(run(&["pursue", "--input", path(&bad), "--max-iter", "0"]).status.code(), Some(4));
    assert_eq!(run(&["pursue", "--input", path(&bad), "--q", "nope"]).status.code(), Some(4));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(4));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let good = dir.path().join("good.csv");
    fs::write(&good, "a,b,c\n0.1,0.2,0.3\n0.3,0.1,-0.2\n-0.2,0.1,0.1\n").unwrap();
    let far = dir.path().join("far.csv");
    fs::write(&far, "a,b,c\n0,0,0.9\n0.1,0,-0.8\n0,0.1,0.85\n").unwrap();
    assert_eq!(
        run(&["index-eval", "--input", path(&good), "--axes", "1", "2", "--q", "-1", "--out-dir", &o]).status.code(),
        Some(4)
    );
    assert_eq!(
        run(&[
            "index-eval", "--input", path(&far), "--no-scale", "--r-max", "1", "--axes", "1", "2", "--epsilon", "0",
            "--out-dir", &o,
        ])
        .status
        .code(),
        Some(3)
    );
}
