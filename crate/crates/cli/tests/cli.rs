//! Command-line behaviour: exit codes, file formats and reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kreg::preprocess::two_texture_image;
use kreg::Verdict;
use kreg_cli::RunReport;

fn kreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kreg")).args(args).output().unwrap()
}

fn kreg_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kreg")).args(args).env(key, value).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_report(path: &Path) -> RunReport {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(kreg(&["--help"]).status.code(), Some(0));
    assert_eq!(kreg(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(kreg(&["estimate", "--input", "iris", "--k-max", "2"]).status.code(), Some(1));
    assert_eq!(kreg(&["estimate", "--input", "iris", "--penalty", "poly:0.5"]).status.code(), Some(1));
    assert_eq!(kreg(&["estimate", "--input", "iris", "--lambda-mode", "huge"]).status.code(), Some(1));
    assert_eq!(kreg_env(&["estimate", "--input", "iris"], "KREG_THREADS", "0").status.code(), Some(1));

    let missing = kreg(&["estimate", "--input", p(&dir.path().join("missing.csv"))]);
    assert_eq!(missing.status.code(), Some(2));
    let stderr = String::from_utf8(missing.stderr).unwrap();
    assert_eq!(stderr.trim_end().lines().count(), 1, "{stderr}");

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,2\n3,x\n").unwrap();
    assert_eq!(kreg(&["estimate", "--input", p(&bad)]).status.code(), Some(2));
    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "1,2\n3\n").unwrap();
    assert_eq!(kreg(&["estimate", "--input", p(&ragged)]).status.code(), Some(2));
    let small = dir.path().join("small.csv");
    fs::write(&small, "1\n2\n3\n4\n").unwrap();
    assert_eq!(kreg(&["estimate", "--input", p(&small), "--k-max", "5"]).status.code(), Some(2));

    let not_pgm = dir.path().join("x.pgm");
    fs::write(&not_pgm, "P7 nope").unwrap();
    let out = dir.path().join("f.csv");
    assert_eq!(kreg(&["features", p(&not_pgm), "--mode", "dct", "--output", p(&out)]).status.code(), Some(2));
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("g.csv");
    assert!(kreg(&["gen", "--d", "3", "--k", "4", "--per-cluster", "50", "--seed", "9", "--output", p(&data)]).status.success());
    let run = |tag: &str, threads: &str| {
        let report = dir.path().join(format!("r{tag}.json"));
        let curves = dir.path().join(format!("c{tag}.csv"));
        let out = kreg_env(
            &[
                "estimate", "--input", p(&data), "--k-max", "12", "--reproducible",
                "--report", p(&report), "--curves", p(&curves),
            ],
            "KREG_THREADS",
            threads,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let read = |path: &Path, alg: &str| {
            let name = path.file_stem().unwrap().to_str().unwrap();
            let ext = path.extension().unwrap().to_str().unwrap();
            fs::read(path.with_file_name(format!("{name}.{alg}.{ext}"))).unwrap()
        };
        [read(&report, "alg1"), read(&report, "alg2"), read(&curves, "alg1"), read(&curves, "alg2")]
    };
    let a = run("a", "1");
    let b = run("b", "4");
    assert_eq!(a, b, "outputs depend on the run or on the thread count");

    // metadata is carried only outside reproducible mode
    let timed = dir.path().join("timed.json");
    assert!(kreg(&["estimate", "--input", p(&data), "--k-max", "12", "--algorithm", "alg1", "--report", p(&timed)]).status.success());
    let mut with_meta = read_report(&timed);
    assert!(with_meta.metadata.is_some());
    with_meta.metadata = None;
    let plain: RunReport = serde_json::from_slice(&a[0]).unwrap();
    assert_eq!(with_meta, plain);
    assert!(plain.metadata.is_none());
    assert_eq!(plain.schema_version, kreg_cli::REPORT_SCHEMA_VERSION);
}

#[test]
fn curves_have_the_plot_columns() {
    let dir = tempfile::tempdir().unwrap();
    let curves = dir.path().join("c.csv");
    let report = dir.path().join("r.json");
    let out = kreg(&[
        "estimate", "--input", "iris", "--algorithm", "alg2", "--k-max", "6",
        "--curves", p(&curves), "--report", p(&report),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&curves).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,E,Em,Ea_K2,Ea_K3,Ea_K4,Ea_K5");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    let r = read_report(&report);
    for (row, per_k) in rows.iter().zip(&r.per_k) {
        assert_eq!(row[0] as usize, per_k.k);
        assert_eq!(row[1], per_k.error);
        assert_eq!(row[2], row[0] * row[1], "linear multiplicative curve");
        assert_eq!(&row[3..], per_k.additive.as_slice());
    }
    assert_eq!(r.per_k.len(), 6);
    assert!(r.per_k.iter().all(|k| k.purity.is_some()));
}

#[test]
fn generated_ideal_data_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("g.csv");
    let again = dir.path().join("g2.csv");
    for path in [&data, &again] {
        let out = kreg(&["gen", "--d", "2", "--k", "10", "--per-cluster", "100", "--seed", "42", "--output", p(path)]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&data).unwrap(), fs::read(&again).unwrap());
    let manifest = dir.path().join("g.manifest.json");
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["rng"], kreg::datagen::RNG_ID);
    assert_eq!(m["labels"].as_array().unwrap().len(), 1000);

    let report = dir.path().join("r.json");
    let out = kreg(&["estimate", "--input", p(&data), "--manifest", p(&manifest), "--reproducible", "--report", p(&report)]);
    assert!(out.status.success());
    let alg1 = read_report(&dir.path().join("r.alg1.json"));
    let alg2 = read_report(&dir.path().join("r.alg2.json"));
    assert_eq!(alg1.per_k[9].purity, Some(1.0));
    assert!(alg1.consensus.contains(&10), "{:?}", alg1.verdict);
    assert_eq!(alg2.verdict, Verdict::Unique(10));
}

#[test]
fn degradation_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let f = |name: &str| dir.path().join(name);
    assert!(kreg(&["gen", "--d", "2", "--k", "5", "--per-cluster", "40", "--output", p(&f("g.csv"))]).status.success());

    // shrinking needs the true centroids
    assert_eq!(kreg(&["shrink", "--input", p(&f("g.csv")), "--factor", "0.5", "--output", p(&f("s.csv"))]).status.code(), Some(1));
    assert_eq!(
        kreg(&["shrink", "--input", p(&f("g.csv")), "--manifest", p(&f("g.manifest.json")), "--factor", "1.5", "--output", p(&f("s.csv"))])
            .status
            .code(),
        Some(1)
    );
    let out = kreg(&["shrink", "--input", p(&f("g.csv")), "--manifest", p(&f("g.manifest.json")), "--factor", "0.5", "--output", p(&f("s.csv"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(f("s.manifest.json").exists());

    let out = kreg(&[
        "outliers", "--input", p(&f("s.csv")), "--manifest", p(&f("s.manifest.json")), "--count", "20",
        "--seed", "3", "--output", p(&f("o.csv")),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(f("o.csv")).unwrap().lines().count(), 220);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(f("o.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["labels"].as_array().unwrap().iter().filter(|l| l.as_i64() == Some(-1)).count(), 20);

    let out = kreg(&[
        "cull", "--input", p(&f("o.csv")), "--manifest", p(&f("o.manifest.json")), "--m", "5", "--quantile", "0.1",
        "--output", p(&f("c.csv")),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(f("c.csv")).unwrap().lines().count(), 198);
}

#[test]
fn features_from_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let img = two_texture_image(64, 32, 1).unwrap();
    let binary = dir.path().join("t.pgm");
    let ascii = dir.path().join("t2.pgm");
    fs::write(&binary, img.to_pgm_binary()).unwrap();
    fs::write(&ascii, img.to_pgm_ascii()).unwrap();
    let mut outputs = Vec::new();
    for (image, mode, dims) in [(&binary, "moments", 6), (&ascii, "moments", 6), (&binary, "dct", 9)] {
        let out_path = dir.path().join(format!("f{}.csv", outputs.len()));
        let out = kreg(&["features", p(image), "--mode", mode, "--windows", "50", "--seed", "4", "--output", p(&out_path)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = fs::read_to_string(&out_path).unwrap();
        assert_eq!(text.lines().count(), 50);
        assert!(text.lines().all(|l| l.split(',').count() == dims));
        outputs.push(text);
    }
    assert_eq!(outputs[0], outputs[1], "P5 and P2 encodings give the same features");
}

#[test]
fn geom_prints_constants_and_verdict() {
    let out = kreg(&["geom", "--d", "2", "--l", "2", "--n", "1000", "--k", "10"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let gamma = v["geometry"]["gamma"].as_f64().unwrap();
    assert!((gamma * gamma - 0.1801).abs() < 1e-3);
    assert_eq!(v["tighter_upper_bound"], "uneven_dumbbell");
    assert_eq!(v["lambda_choice"].as_f64().unwrap(), 100.0);
    let b = &v["lambda_bounds"];
    assert!(b["lower"].as_f64().unwrap() < b["upper"].as_f64().unwrap());

    let out = kreg(&["geom", "--d", "12", "--l", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tighter_upper_bound"], "perfect_dumbbell");
    assert!(v["lambda_bounds"].is_null());
    assert_eq!(kreg(&["geom", "--d", "0"]).status.code(), Some(1));
    assert_eq!(kreg(&["geom", "--d", "2", "--n", "5", "--k", "10"]).status.code(), Some(2));
}

#[test]
fn krzanowski_lai_penalty_reports_its_choice() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("kl.json");
    let out = kreg(&["estimate", "--input", "iris", "--algorithm", "alg1", "--k-max", "10", "--penalty", "kl", "--report", p(&report)]);
    assert!(out.status.success());
    let r = read_report(&report);
    assert!(r.kl_best_k.is_some());
    assert!(String::from_utf8(out.stdout).unwrap().contains("Krzanowski-Lai"));
}
