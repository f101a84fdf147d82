mod common;

use std::fs;

use common::{code, dpbench, fixture, ok, rows};
use dualprec::dataset::csv::read_csv_file;
use dualprec::{dataset_stats, Dims};
use tempfile::tempdir;

#[test]
fn generate_random2d_and_menger() {
    let dir = tempdir().unwrap();
    let out = ok(
        dir.path(),
        &[
            "generate", "random2d", "--count", "10000", "--seed", "7", "-o", "r.csv",
        ],
    );
    assert!(out.contains("count=10000"), "{out}");
    let r = read_csv_file(dir.path().join("r.csv")).unwrap();
    assert_eq!((r.len(), r.dims), (10_000, Dims::Two));

    ok(
        dir.path(),
        &["generate", "menger", "--iterations", "2", "-o", "m.csv"],
    );
    assert_eq!(read_csv_file(dir.path().join("m.csv")).unwrap().len(), 3200);
}

#[test]
fn generate_defaults_name_the_file_after_the_dataset() {
    let dir = tempdir().unwrap();
    ok(dir.path(), &["generate", "sierpinski", "--depth", "2"]);
    assert!(dir.path().join("sierpinski_64.csv").exists());
}

#[test]
fn unknown_generator_is_a_usage_error_listing_names() {
    let dir = tempdir().unwrap();
    let o = dpbench(dir.path(), &["generate", "bogus"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("random2d") && err.contains("sierpinski"),
        "{err}"
    );
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempdir().unwrap();
    for args in [&["--help"][..], &["--version"], &["bench", "--help"]] {
        assert_eq!(code(&dpbench(dir.path(), args)), 0, "{args:?}");
    }
    let help = ok(dir.path(), &["bench", "--help"]);
    assert!(help.contains("[default: 30]"), "{help}");
}

#[test]
fn convert_fixtures() {
    let dir = tempdir().unwrap();
    let one = fixture("triangle.glb");
    ok(
        dir.path(),
        &["convert", one.to_str().unwrap(), "-o", "t.csv"],
    );
    assert_eq!(read_csv_file(dir.path().join("t.csv")).unwrap().len(), 3);

    let two = fixture("two_primitives.glb");
    ok(
        dir.path(),
        &["convert", two.to_str().unwrap(), "-o", "two.csv"],
    );
    let direct = dualprec::dataset::glb::extract_points_from_glb_file(&two).unwrap();
    assert_eq!(
        read_csv_file(dir.path().join("two.csv")).unwrap().points,
        direct.points
    );
}

#[test]
fn convert_rejects_non_glb_input() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("x.glb"), "x,y\n1,2\n").unwrap();
    let o = dpbench(dir.path(), &["convert", "x.glb"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("x.glb") && err.contains("parse error"),
        "{err}"
    );
}

#[test]
fn analyze_identity_is_exact_on_integer_corners() {
    let dir = tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "generate",
            "menger",
            "--iterations",
            "2",
            "--size",
            "27",
            "-o",
            "m.csv",
        ],
    );
    ok(
        dir.path(),
        &["analyze", "m.csv", "--stack", "identity", "-o", "id.csv"],
    );
    let r = rows(&dir.path().join("id.csv"));
    assert_eq!(r.len(), 2);
    assert_eq!((r[0][0].as_str(), r[1][0].as_str()), ("binary32", "df64"));
    for row in &r {
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.0, "{row:?}");
    }
}

#[test]
fn analyze_far_stack_df64_dominates() {
    let dir = tempdir().unwrap();
    ok(
        dir.path(),
        &["generate", "menger", "--iterations", "2", "-o", "m.csv"],
    );
    let out = ok(
        dir.path(),
        &[
            "analyze", "m.csv", "--stack", "far", "--offset", "1e6", "-o", "far.csv",
        ],
    );
    assert!(out.contains("binary32") && out.contains("df64"), "{out}");
    let r = rows(&dir.path().join("far.csv"));
    let f = |i: usize, c: usize| r[i][c].parse::<f64>().unwrap();
    // max ndc, rms ndc, max px
    for c in 1..=3 {
        assert!(f(1, c) < f(0, c), "column {c}: {r:?}");
    }
    assert!(f(0, 3) > 1.0 && f(1, 3) < 1e-3, "{r:?}");
}

#[test]
fn analyze_missing_file_fails() {
    let dir = tempdir().unwrap();
    let o = dpbench(dir.path(), &["analyze", "missing.csv"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.csv"));
}

#[test]
fn mandelbrot_zoom_study_outputs() {
    let dir = tempdir().unwrap();
    ok(dir.path(), &["mandelbrot", "--out-dir", "a"]);
    ok(dir.path(), &["mandelbrot", "--out-dir", "b"]);
    let r = rows(&dir.path().join("a/collapse.csv"));
    assert_eq!(r.len(), 6);
    let ratio = |p: &str, z: &str| {
        r.iter().find(|x| x[0] == p && x[1] == z).unwrap()[4]
            .parse::<f64>()
            .unwrap()
    };
    assert_eq!(ratio("binary32", "1e-1"), 0.0);
    assert_eq!(ratio("binary64", "1e-1"), 0.0);
    assert!(ratio("binary32", "1e-6") >= 0.9);
    assert_eq!(ratio("binary64", "1e-6"), 0.0);

    let mut images = 0;
    for e in fs::read_dir(dir.path().join("a")).unwrap() {
        let name = e.unwrap().file_name();
        let a = fs::read(dir.path().join("a").join(&name)).unwrap();
        let b = fs::read(dir.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs between runs");
        images += name.to_string_lossy().ends_with(".ppm") as usize;
    }
    assert_eq!(images, 6);
    let img =
        |p: &str, z: &str| fs::read(dir.path().join(format!("a/mandelbrot_{p}_{z}.ppm"))).unwrap();
    assert_eq!(img("binary32", "1e-1"), img("binary64", "1e-1"));
    assert_ne!(img("binary32", "1e-6"), img("binary64", "1e-6"));
}

#[test]
fn config_presets_flags_and_the_command_line_wins() {
    let dir = tempdir().unwrap();
    fs::write(
        dir.path().join("c.toml"),
        "[generate]\ncount = 250\nseed = 3\nout = \"cfg.csv\"\n",
    )
    .unwrap();
    ok(dir.path(), &["--config", "c.toml", "generate", "random2d"]);
    let a = read_csv_file(dir.path().join("cfg.csv")).unwrap();
    assert_eq!(a.len(), 250);

    ok(
        dir.path(),
        &[
            "generate", "random2d", "--count", "40", "--config", "c.toml",
        ],
    );
    let b = read_csv_file(dir.path().join("cfg.csv")).unwrap();
    assert_eq!(b.len(), 40);
    // the seed still comes from the file
    ok(
        dir.path(),
        &[
            "generate",
            "random2d",
            "--count",
            "40",
            "--seed",
            "3",
            "-o",
            "direct.csv",
        ],
    );
    let c = read_csv_file(dir.path().join("direct.csv")).unwrap();
    assert_eq!(dataset_stats(&b).unwrap(), dataset_stats(&c).unwrap());
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "[generate]\nno_such_flag = 1\n").unwrap();
    assert_eq!(
        code(&dpbench(
            dir.path(),
            &["--config", "c.toml", "generate", "random2d"]
        )),
        2
    );
    fs::write(dir.path().join("d.toml"), "not toml [").unwrap();
    assert_eq!(
        code(&dpbench(
            dir.path(),
            &["--config", "d.toml", "generate", "random2d"]
        )),
        2
    );
    assert_eq!(
        code(&dpbench(
            dir.path(),
            &["--config", "none.toml", "generate", "random2d"]
        )),
        1
    );
}

#[test]
fn view_without_a_display_points_at_bench() {
    let dir = tempdir().unwrap();
    ok(
        dir.path(),
        &["generate", "random2d", "--count", "100", "-o", "r.csv"],
    );
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_dpbench"))
        .current_dir(dir.path())
        .args(["view", "r.csv", "--max-frames", "1"])
        .env_remove("DISPLAY")
        .env_remove("WAYLAND_DISPLAY")
        .env_remove("WAYLAND_SOCKET")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bench --headless"));
}
