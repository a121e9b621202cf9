use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pftycho::field::raw::save_complex;
use pftycho::ptycho::{phantom_image, phantom_object, save_grayscale_png};

fn pftycho(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pftycho")).args(args).env("PFTYCHO_THREADS", "1").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL_NONBLIND: &str = r#"
[experiment]
mode = "nonblind"
seed = 3
output = "out"

[object]
size = 64

[scan]
kind = "grid"
window = 32
shift = 16

[probe]
kind = "ones"

[pft]
half_width = 8
p = 8
eps = 1e-7

[solver]
max_pft_iters = 3
max_fft_iters = 5
"#;

const SMALL_BLIND: &str = r#"
[experiment]
mode = "blind"
output = "out"

[object]
size = 64

[scan]
kind = "circular"
radius = 12
shift = 16

[probe]
kind = "gaussian"
sigma = 20.0

[pft]
half_width = 8
p = 8
eps = 1e-7

[solver]
max_pft_iters = 2
max_fft_iters = 3
"#;

fn count_measurements(dir: &Path) -> usize {
    std::fs::read_dir(dir.join("out/measurements"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("d_"))
        .count()
}

#[test]
fn simulate_writes_measurements_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL_NONBLIND);
    let o = pftycho(&["simulate", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(count_measurements(tmp.path()), 9);
    let manifest = std::fs::read_to_string(tmp.path().join("out/manifest.toml")).unwrap();
    assert!(manifest.contains("probes = 9"));
    assert!(manifest.contains("[outputs]"));
    assert!(manifest.contains("phase = \"[0, 1.5707963267948966] -> [0, 255]\""));

    // same configuration, same bytes
    std::fs::rename(tmp.path().join("out"), tmp.path().join("first")).unwrap();
    assert!(pftycho(&["simulate", cfg.to_str().unwrap()]).status.success());
    let again = std::fs::read_to_string(tmp.path().join("out/manifest.toml")).unwrap();
    let hashes = |m: &str| m.split("[outputs]").nth(1).unwrap().to_string();
    assert_eq!(hashes(&manifest), hashes(&again));

    let blind = write_config(tmp.path(), "blind.toml", SMALL_BLIND);
    assert!(pftycho(&["simulate", blind.to_str().unwrap()]).status.success());
    assert_eq!(count_measurements(tmp.path()), 16);
}

#[test]
fn validation_failures_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = SMALL_NONBLIND.replace("size = 64", "magnitude = \"nope.png\"\nphase = \"nope.png\"");
    let cfg = write_config(tmp.path(), "missing.toml", &missing);
    let o = pftycho(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.png"));

    let cfg = write_config(tmp.path(), "small.toml", SMALL_NONBLIND);
    assert_eq!(pftycho(&["simulate", cfg.to_str().unwrap(), "--set", "scan.shift=15"]).status.code(), Some(2));
    assert_eq!(pftycho(&["simulate", cfg.to_str().unwrap(), "--set", "solver.bogus=1"]).status.code(), Some(2));
    assert_eq!(pftycho(&["reconstruct", cfg.to_str().unwrap(), "-a", "pie"]).status.code(), Some(2));
    assert_eq!(pftycho(&["reconstruct", cfg.to_str().unwrap(), "-a", "magic"]).status.code(), Some(2));
    assert!(pftycho(&["simulate", cfg.to_str().unwrap()]).status.success());
    assert_eq!(pftycho(&["reconstruct", cfg.to_str().unwrap(), "-a", "epie"]).status.code(), Some(2));
}

fn trace_without_wall_time(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            cols.remove(2);
            cols.join(",")
        })
        .collect()
}

#[test]
fn reconstruct_outputs_and_reduction() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL_NONBLIND);
    let cfg = cfg.to_str().unwrap();
    assert!(pftycho(&["simulate", cfg]).status.success());

    let o = pftycho(&["reconstruct", cfg, "-a", "hybrid", "--set", "experiment.seeds=2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    assert_eq!(table.lines().count(), 3);
    assert!(table.starts_with("seed,status,iterations,transition"));
    let run = tmp.path().join("out/hybrid/seed_3");
    for f in ["trace.csv", "object.ptyc", "probe.ptyc", "magnitude.png", "phase.png", "warm_magnitude.png", "warm_phase.png", "summary.csv"] {
        assert!(run.join(f).is_file(), "missing {f}");
    }
    assert!(tmp.path().join("out/hybrid/seed_4/trace.csv").is_file());
    assert!(tmp.path().join("out/hybrid/manifest.toml").is_file());

    let o = pftycho(&["metrics", run.join("object.ptyc").to_str().unwrap(), "--truth", tmp.path().join("out/truth.ptyc").to_str().unwrap()]);
    assert!(o.status.success());
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert!(lines[0].starts_with("rel_err,"));
    let rel: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
    let summary = std::fs::read_to_string(run.join("summary.csv")).unwrap();
    let expect: f64 = summary.lines().nth(1).unwrap().split(',').nth(5).unwrap().parse().unwrap();
    assert!((rel - expect).abs() < 1e-6);

    assert!(pftycho(&["reconstruct", cfg, "-a", "pie"]).status.success());
    assert!(pftycho(&["reconstruct", cfg, "-a", "hybrid", "--set", "solver.max_pft_iters=0"]).status.success());
    let pie = trace_without_wall_time(&tmp.path().join("out/pie/seed_3/trace.csv"));
    let hybrid = trace_without_wall_time(&tmp.path().join("out/hybrid/seed_3/trace.csv"));
    assert_eq!(pie, hybrid);
}

#[test]
fn divergence_exits_with_code_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "blind.toml", SMALL_BLIND);
    let cfg = cfg.to_str().unwrap();
    assert!(pftycho(&["simulate", cfg]).status.success());
    let o = pftycho(&["reconstruct", cfg, "-a", "epie", "--set", "solver.beta=1e8", "--set", "solver.gamma=1e8"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(tmp.path().join("out/epie/seed_0/trace.csv").is_file());
    assert!(stdout(&o).contains("diverged"));
}

#[test]
fn pft_bench_reports_rows() {
    let o = pftycho(&["pft-bench", "--sizes", "64,128", "--half-width", "8", "--p", "8", "--eps", "1e-3,1e-7,2e-7", "--trials", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    let r = |row: &Vec<&str>| row[4].parse::<usize>().unwrap();
    assert!(r(&rows[0]) < r(&rows[1]));
    assert!(rows[0][10].parse::<f64>().unwrap() > rows[1][10].parse::<f64>().unwrap());
    assert!(rows[2][12].starts_with("error"));
    for row in rows.iter().filter(|row| row[12] == "ok") {
        assert!(row[10].parse::<f64>().unwrap() <= row[11].parse::<f64>().unwrap());
    }
}

#[test]
fn register_finds_a_cut_out() {
    let tmp = tempfile::tempdir().unwrap();
    let image = phantom_image(64, 72, 9);
    save_grayscale_png(tmp.path().join("image.png"), &image, 0.0, 1.0).unwrap();
    save_grayscale_png(tmp.path().join("tpl.png"), &image.block(20, 11, 16, 24).unwrap(), 0.0, 1.0).unwrap();
    let o = pftycho(&["register", tmp.path().join("image.png").to_str().unwrap(), tmp.path().join("tpl.png").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("20,11,"));
}

#[test]
fn metrics_rejects_mismatched_shapes() {
    let tmp = tempfile::tempdir().unwrap();
    save_complex(tmp.path().join("a.ptyc"), &phantom_object(16, 1)).unwrap();
    save_complex(tmp.path().join("b.ptyc"), &phantom_object(32, 1)).unwrap();
    let o = pftycho(&["metrics", tmp.path().join("a.ptyc").to_str().unwrap(), "--truth", tmp.path().join("b.ptyc").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(pftycho(&["metrics", tmp.path().join("a.ptyc").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn scope_table_prints_builtin() {
    let o = pftycho(&["scope-table"]);
    assert!(o.status.success());
    assert!(!stdout(&o).is_empty());
}
