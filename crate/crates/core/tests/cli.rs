use std::fs;
use std::path::Path;
use std::process::Command;

use linnetcox::io::{curves_from_csv, load_network, load_pattern, study_from_csv};
use std::sync::Arc;

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_linnetcox"))
        .args(args)
        .env_remove("LINNETCOX_SEED")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn ok(args: &[&str]) {
    let (code, err) = cli(args);
    assert_eq!(code, 0, "{args:?} failed: {err}");
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn json(path: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn full_workflow() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let net = p(d, "net.json");
    ok(&[
        "make-network",
        "--template",
        "dendrite",
        "--main-length",
        "120",
        "--side-length",
        "150",
        "--seed",
        "3",
        "--out",
        &net,
    ]);
    assert!(d.join("manifest.json").exists());
    let loaded = load_network(Path::new(&net)).unwrap();
    assert!((loaded.total_length() - 270.0).abs() < 1e-9);

    let sims = p(d, "cox");
    ok(&[
        "simulate-cox",
        "--net",
        &net,
        "--rho-ym",
        "1",
        "--rho-ys",
        "1.5",
        "--sigma2",
        "2",
        "--beta",
        "0.1",
        "--mode",
        "grid",
        "--write-pi",
        "--reps",
        "2",
        "--seed",
        "5",
        "--out",
        &sims,
    ]);
    let pattern = format!("{sims}/pattern_0000.csv");
    let x = load_pattern(Arc::new(loaded), Path::new(&pattern)).unwrap();
    assert!(!x.is_empty());
    assert!(Path::new(&format!("{sims}/pattern_0001.csv")).exists());

    let fit = p(d, "fit.json");
    ok(&[
        "fit",
        "--net",
        &net,
        "--pattern",
        &pattern,
        "--method",
        "mce-g",
        "--ru",
        "20",
        "--out",
        &fit,
    ]);
    let f = json(&fit);
    assert_eq!(f["method"], "mce-g");
    assert!(f["sigma2"].as_f64().unwrap() > 0.0);
    assert!(f["rho_y"]["main"].as_f64().unwrap() >= f["rho"]["main"].as_f64().unwrap());

    let curves = p(d, "curves.csv");
    ok(&[
        "summaries",
        "--net",
        &net,
        "--pattern",
        &pattern,
        "--rgrid",
        "0:20:21",
        "--intensity",
        &fit,
        "--out",
        &curves,
    ]);
    let c = curves_from_csv(&fs::read_to_string(&curves).unwrap()).unwrap();
    assert_eq!(c.len(), 5);
    assert!(c.iter().all(|curve| curve.len() == 21));

    let env = p(d, "env.csv");
    ok(&[
        "envelope",
        "--net",
        &net,
        "--pattern",
        &pattern,
        "--model",
        &fit,
        "--test",
        "FGJ",
        "--sims",
        "19",
        "--rgrid",
        "0:10:11",
        "--mode",
        "grid",
        "--seed",
        "1",
        "--out",
        &env,
    ]);
    let side = json(&p(d, "env.json"));
    let (lib, cons) = (
        side["p_liberal"].as_f64().unwrap(),
        side["p_conservative"].as_f64().unwrap(),
    );
    assert!(0.0 < lib && lib <= cons && cons <= 1.0);
    assert_eq!(side["sims"], 19);

    let ki = p(d, "ki.csv");
    ok(&[
        "kernel-intensity",
        "--net",
        &net,
        "--pattern",
        &pattern,
        "--bandwidth",
        "5",
        "--out",
        &ki,
    ]);
    assert!(fs::read_to_string(&ki)
        .unwrap()
        .starts_with("edge,offset,intensity"));

    let design = p(d, "design.toml");
    fs::write(
        &design,
        "[[run]]\nid = 1\nsigma2 = 5.0\nbeta = 0.1\nrho_y = [0.8, 1.2]\nr_u = 20.0\n",
    )
    .unwrap();
    let study = p(d, "study.csv");
    ok(&[
        "simstudy", "--net", &net, "--design", &design, "--reps", "3", "--seed", "2", "--out",
        &study,
    ]);
    let rows = study_from_csv(&fs::read_to_string(&study).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(Path::new(&p(d, "study.summary.json")).exists());
}

#[test]
fn same_seed_same_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let net = p(d, "net.json");
    ok(&[
        "make-network",
        "--template",
        "random-tree",
        "--edges",
        "20",
        "--seed",
        "8",
        "--out",
        &net,
    ]);
    for run in ["a", "b"] {
        ok(&[
            "simulate-cox",
            "--net",
            &net,
            "--rho-ym",
            "2",
            "--rho-ys",
            "2",
            "--sigma2",
            "1",
            "--beta",
            "0.5",
            "--reps",
            "3",
            "--seed",
            "11",
            "--threads",
            "1",
            "--out",
            &p(d, run),
        ]);
    }
    for i in 0..3 {
        let name = format!("pattern_{i:04}.csv");
        assert_eq!(
            fs::read(d.join("a").join(&name)).unwrap(),
            fs::read(d.join("b").join(&name)).unwrap()
        );
    }
    ok(&[
        "simulate-poisson",
        "--net",
        &net,
        "--rho-m",
        "1",
        "--rho-s",
        "1",
        "--seed",
        "12",
        "--out",
        &p(d, "c"),
    ]);
    assert_ne!(
        fs::read(d.join("a/pattern_0000.csv")).unwrap(),
        fs::read(d.join("c/pattern_0000.csv")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(cli(&["--help"]).0, 0);
    assert_eq!(cli(&["fit", "--no-such-flag"]).0, 2);

    let missing = p(d, "missing.json");
    let out = p(d, "fit.json");
    assert_eq!(
        cli(&[
            "fit",
            "--net",
            &missing,
            "--pattern",
            &missing,
            "--out",
            &out
        ])
        .0,
        2
    );
    assert!(!Path::new(&out).exists());

    let net = p(d, "net.json");
    ok(&[
        "make-network",
        "--template",
        "path",
        "--length",
        "30",
        "--out",
        &net,
    ]);
    let bad = p(d, "bad.csv");
    fs::write(&bad, "edge,offset\n0,31\n").unwrap();
    assert_eq!(
        cli(&[
            "summaries",
            "--net",
            &net,
            "--pattern",
            &bad,
            "--out",
            &p(d, "c.csv")
        ])
        .0,
        2
    );

    ok(&[
        "simulate-poisson",
        "--net",
        &net,
        "--rho-m",
        "1",
        "--rho-s",
        "1",
        "--out",
        &p(d, "sim"),
    ]);
    let pattern = p(d, "sim/pattern_0000.csv");
    let env = p(d, "env.csv");
    let (code, err) = cli(&[
        "envelope",
        "--net",
        &net,
        "--pattern",
        &pattern,
        "--sims",
        "19",
        "--rgrid",
        "0:5:6",
        "--rmin",
        "10",
        "--out",
        &env,
    ]);
    assert_eq!(code, 3, "{err}");
    assert!(!Path::new(&env).exists());
}
