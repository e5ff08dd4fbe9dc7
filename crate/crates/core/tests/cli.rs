use std::process::Command;

fn thinfiber(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_thinfiber")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn halpin_tsai_prints_key_values() {
    let (code, out, _) = thinfiber(&["halpin-tsai"]);
    assert_eq!(code, 0);
    let nu: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("nu_r="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((nu - 0.3694).abs() < 1e-4);
}

#[test]
fn run_writes_csv_with_flags_over_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pull.cfg");
    std::fs::write(&cfg, "# small pull sweep\ntest = pull\nr_omega = 3\nr_gamma = 1\nfibers = 4\n").unwrap();
    let csv = dir.path().join("out.csv");
    let (code, _, err) = thinfiber(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--r-omega",
        "1",
        "--fibers",
        "4,16",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "n_fibers,radius,l2_error,iterations,seconds");
    assert_eq!(rows.len(), 3);
    assert!(rows[2].starts_with("16,"));
    assert!(err.contains("least_squares_slope="));
}

#[test]
fn gen_fibers_then_solve_one() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.txt");
    let vtk = dir.path().join("sol.vtk");
    let (code, _, err) = thinfiber(&[
        "gen-fibers",
        "--mode",
        "random-planar",
        "--n",
        "12",
        "--seed",
        "4",
        "--out",
        net.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&net).unwrap();
    assert!(text.contains("# rng=chacha8") && text.contains("# seed=4"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 12);

    let (code, out, err) = thinfiber(&[
        "solve-one",
        "--test",
        "random-planar",
        "--r-omega",
        "2",
        "--network",
        net.to_str().unwrap(),
        "--vtk",
        vtk.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.lines().any(|l| l.starts_with("iterations=")));
    assert!(out.lines().any(|l| l.starts_with("l2_error=")));
    let grid = thinfiber::harness::parse_vtk(&std::fs::read_to_string(&vtk).unwrap()).unwrap();
    assert_eq!(grid.vectors.len(), 3);
}

#[test]
fn failures_exit_nonzero_with_error_line() {
    for args in [
        &["run", "--fibers", "10"][..],
        &["solve-one", "--config", "/nonexistent/x.cfg"],
        &["gen-fibers", "--mode", "uniform", "--n", "7"],
        &["halpin-tsai", "--e-m", "-1"],
        &["frobnicate"],
    ] {
        let (code, _, err) = thinfiber(args);
        assert_ne!(code, 0, "{args:?}");
        let line = err.lines().last().unwrap();
        assert!(line.starts_with("error kind="), "{args:?}: {line}");
        assert!(line.contains("message=\""));
    }
}
