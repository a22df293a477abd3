use std::path::Path;
use std::process::{Command, Output};

use lpsq_core::TrigPoly;
use num_complex::Complex64;

fn lpsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpsq"))
        .args(args)
        .output()
        .expect("spawn lpsq")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Last field of the single data row of a `quantity,param,value` table.
fn norm_value(o: &Output) -> f64 {
    let text = stdout(o);
    let row = text.lines().nth(1).expect("data row");
    row.rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn gen_then_l2_norm_matches_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("fejer.json");
    let o = lpsq(&[
        "gen",
        "--family",
        "fejer",
        "--n",
        "2",
        "--out",
        path_str(&f),
    ]);
    assert!(o.status.success());
    let poly = TrigPoly::read_json(&f).unwrap();
    assert_eq!(poly.len(), 5);
    assert!((poly.coeff(&[1]).re - 2.0 / 3.0).abs() < 1e-15);

    let o = lpsq(&["norm", "--input", path_str(&f), "--p", "2"]);
    assert!(o.status.success());
    let expected = (1.0f64 + 10.0 / 9.0).sqrt();
    assert!((norm_value(&o) - expected).abs() < 1e-12);
}

#[test]
fn square_function_of_single_exponential_blocks_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("fejer.json");
    lpsq(&[
        "gen",
        "--family",
        "fejer",
        "--n",
        "2",
        "--out",
        path_str(&f),
    ]);
    let o = lpsq(&["sqfn", "--input", path_str(&f), "--resolution", "16"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i1,re,im"));
    let expected = (1.0f64 + 10.0 / 9.0).sqrt();
    let mut count = 0;
    for line in lines {
        let re: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((re - expected).abs() < 1e-12);
        count += 1;
    }
    assert_eq!(count, 16);
}

#[test]
fn apply_sign_multiplier() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.json");
    let m = dir.path().join("m.json");
    let out = dir.path().join("out.json");
    lpsq(&[
        "gen",
        "--family",
        "pichorides",
        "--n",
        "1",
        "--out",
        path_str(&f),
    ]);
    std::fs::write(
        &m,
        r#"{"axes":[{"kind":"signs","signs":{"1":-1,"2":1,"3":-1}}]}"#,
    )
    .unwrap();
    let o = lpsq(&[
        "apply",
        "--input",
        path_str(&f),
        "--multiplier",
        path_str(&m),
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = TrigPoly::read_json(&out).unwrap();
    let expected = [
        (1, -0.5),
        (2, 1.0),
        (3, 1.0),
        (4, -1.0),
        (5, -1.0),
        (6, -1.0),
        (7, -0.5),
    ];
    for (n, v) in expected {
        assert!(
            (g.coeff(&[n]) - Complex64::new(v, 0.0)).norm() < 1e-15,
            "n = {n}"
        );
    }
}

#[test]
fn kx_split_reports_constants() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    let poly = TrigPoly::from_1d([
        (0, Complex64::new(1.0, 0.0)),
        (1, Complex64::new(-0.5, 0.0)),
    ]);
    poly.write_json(&f).unwrap();
    let o = lpsq(&[
        "kx-split",
        "--input",
        path_str(&f),
        "--lambda",
        "0.8",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["lambda"], 0.8);
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
    assert!(v["bullet1_C"].as_f64().unwrap() > 0.0);
    assert!(v["bullet2_C"].as_f64().unwrap() >= 0.0);
}

#[test]
fn kx_split_rejects_zeros_and_non_analytic_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.json");
    lpsq(&[
        "gen",
        "--family",
        "pichorides",
        "--n",
        "1",
        "--out",
        path_str(&f),
    ]);
    assert_eq!(
        lpsq(&["kx-split", "--input", path_str(&f), "--lambda", "0.8"])
            .status
            .code(),
        Some(2)
    );
    let g = dir.path().join("fejer.json");
    lpsq(&[
        "gen",
        "--family",
        "fejer",
        "--n",
        "2",
        "--out",
        path_str(&g),
    ]);
    assert_eq!(
        lpsq(&["kx-split", "--input", path_str(&g), "--lambda", "0.8"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn norm_variants_are_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.json");
    lpsq(&[
        "gen",
        "--family",
        "pichorides",
        "--n",
        "2",
        "--out",
        path_str(&f),
    ]);
    let input = path_str(&f);
    let l1 = norm_value(&lpsq(&["norm", "--input", input, "--p", "1"]));
    let weak = norm_value(&lpsq(&["norm", "--input", input, "--weak"]));
    let h1 = norm_value(&lpsq(&["norm", "--input", input, "--h1"]));
    let orlicz = norm_value(&lpsq(&["norm", "--input", input, "--orlicz", "1"]));
    assert!(weak <= l1 * (1.0 + 1e-12));
    assert!(h1 >= l1);
    assert!(orlicz > 0.0);
}

#[test]
fn random_gen_is_seeded() {
    let a = lpsq(&["gen", "--random", "5", "--width", "8", "--seed", "3"]);
    let b = lpsq(&["gen", "--random", "5", "--width", "8", "--seed", "3"]);
    let c = lpsq(&["gen", "--random", "5", "--width", "8", "--seed", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn empty_p_grid_gives_header_only_table() {
    let o = lpsq(&["rate", "--d", "1", "--p", "", "--resolution", "64"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim_end(), "d,p,N,num,den,ratio");

    let o = lpsq(&[
        "rate",
        "--d",
        "1",
        "--p",
        "",
        "--resolution",
        "64",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 0);
    assert_eq!(v["metadata"]["experiment"], "rate");
}

#[test]
fn bad_configuration_exits_with_code_two() {
    let cases: &[&[&str]] = &[
        &["rate", "--d", "1", "--p", "1.5", "--resolution", "1000"],
        &["rate", "--d", "1", "--p", "1.5,x"],
        &["rate", "--d", "1", "--p", "0.5"],
        &["rate", "--d", "0", "--p", "1.5"],
        &["norm", "--input", "/nonexistent/f.json", "--p", "2"],
        &["gen", "--family", "nonsense"],
    ];
    for args in cases {
        let o = lpsq(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"experiment":"rate","d":1,"p_grid":[1.5,1.25],"resolution":256,"seed":11}"#,
    )
    .unwrap();
    let o = lpsq(&["rate", "--config", path_str(&cfg), "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["metadata"]["seed"], 11);
    assert_eq!(v["metadata"]["resolution"], 256);

    let o = lpsq(&[
        "rate",
        "--config",
        path_str(&cfg),
        "--p",
        "1.5",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn report_written_to_out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rate.csv");
    let args = [
        "rate",
        "--d",
        "1",
        "--p",
        "1.5,1.25",
        "--resolution",
        "256",
        "--seed",
        "5",
    ];
    let to_stdout = lpsq(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path_str(&out)]);
    let o = lpsq(&with_out);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), to_stdout.stdout);
}
