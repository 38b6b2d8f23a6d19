use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dbar_core::dataset::{images_from_array, read_array, Manifest};

fn dbar(args: &[&str], data_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbar"))
        .args(args)
        .env("DBAR_DATA_DIR", data_dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn config_line(out: &Output) -> serde_json::Value {
    let text = stderr(out);
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix("config "))
        .expect("config line on stderr");
    serde_json::from_str(line).expect("config is JSON")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const TINY: &[&str] = &[
    "--l",
    "5",
    "--zgrid",
    "16",
    "--radii",
    "6,7",
    "--mesh-level",
    "1",
    "--k-spacing",
    "0.5",
];

#[test]
fn help_and_usage_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&dbar(&["--help"], dir.path())), 0);
    assert_eq!(code(&dbar(&["simulate", "--help"], dir.path())), 0);
    assert_eq!(code(&dbar(&[], dir.path())), 1);
    assert_eq!(code(&dbar(&["frobnicate"], dir.path())), 1);
    assert_eq!(code(&dbar(&["reconstruct", "--l", "seven"], dir.path())), 1);
    assert_eq!(
        code(&dbar(
            &["simulate", "--style", "kit5", "--seed", "1"],
            dir.path()
        )),
        1
    );
    assert_eq!(code(&dbar(&["--threads", "0", "bench"], dir.path())), 1);
}

#[test]
fn simulate_needs_a_phantom_source() {
    let dir = tempfile::tempdir().unwrap();
    let out = dbar(&["simulate", "--noise", "0.001"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--seed"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn simulate_writes_a_33_by_33_dtn() {
    let dir = tempfile::tempdir().unwrap();
    let out = dbar(
        &[
            "simulate", "--style", "kit4", "--seed", "1", "--noise", "0.0075",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let path = dir.path().join("dtn_kit4_1.dbar");
    assert_eq!(
        stdout(&out).lines().next().unwrap(),
        path.display().to_string()
    );
    assert_eq!(read_array(&path).unwrap().dims, vec![33, 33]);
    assert!(dir.path().join("dtn_kit4_1.phantom.json").exists());
    let cfg = config_line(&out);
    assert_eq!(cfg["subcommand"], "simulate");
    assert_eq!(cfg["settings"]["noise"], 0.0075);
    assert_eq!(cfg["settings"]["patterns"], 16);
}

#[test]
fn noiseless_simulation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.dbar");
    let b = dir.path().join("b.dbar");
    for path in [&a, &b] {
        let out = dbar(
            &[
                "simulate",
                "--seed",
                "3",
                "--noise",
                "0",
                "--mesh-level",
                "2",
                "--out",
                p(path),
            ],
            dir.path(),
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn homogeneous_reconstruction_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let phantom = dir.path().join("empty.json");
    fs::write(
        &phantom,
        r#"{"inclusions":[],"background":1.0,"style":"kit4","seed":0}"#,
    )
    .unwrap();
    let dtn = dir.path().join("empty.dbar");
    let out = dbar(
        &[
            "simulate",
            "--phantom",
            p(&phantom),
            "--mesh-level",
            "2",
            "--out",
            p(&dtn),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sigma = dir.path().join("sigma.dbar");
    let out = dbar(
        &[
            "reconstruct",
            "--dtn",
            p(&dtn),
            "--Rdelta",
            "4",
            "--l",
            "6",
            "--zgrid",
            "32",
            "--out",
            p(&sigma),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("sigma.png").exists());
    let cfg = config_line(&out);
    assert_eq!(cfg["settings"]["iters"], 5);
    assert_eq!(cfg["settings"]["r"], 4.0);
    assert_eq!(cfg["settings"]["solver"], "richardson");
    let image = images_from_array(read_array(&sigma).unwrap(), &sigma)
        .unwrap()
        .remove(0);
    assert_eq!((image.width(), image.height()), (32, 32));
    let worst = image
        .values()
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 2e-2, "max deviation from 1: {worst}");
}

#[test]
fn reconstruct_rejects_bad_requests() {
    let dir = tempfile::tempdir().unwrap();
    let dtn = dir.path().join("d.dbar");
    let out = dbar(
        &[
            "simulate",
            "--seed",
            "2",
            "--mesh-level",
            "1",
            "--out",
            p(&dtn),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let out = dbar(
        &[
            "reconstruct",
            "--dtn",
            p(&dtn),
            "--solver",
            "direct",
            "--l",
            "7",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("l <= 6"), "{}", stderr(&out));

    let out = dbar(
        &["reconstruct", "--dtn", p(&dtn), "--Rdelta", "4", "--R", "3"],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
    let out = dbar(
        &["reconstruct", "--dtn", p(&dtn), "--Rdelta", "4", "--R", "5"],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--phantom"));

    let missing = dir.path().join("missing.dbar");
    let out = dbar(&["reconstruct", "--dtn", p(&missing)], dir.path());
    assert_eq!(code(&out), 2);

    let mut bytes = fs::read(&dtn).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x10;
    fs::write(&dtn, bytes).unwrap();
    let out = dbar(&["reconstruct", "--dtn", p(&dtn)], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("d.dbar"), "{}", stderr(&out));
}

#[test]
fn empty_dataset_has_an_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dbar(&["dataset", "--count", "0"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let manifest = Manifest::read(&dir.path().join("kit4_train")).unwrap();
    assert!(manifest.entries.is_empty());
}

#[test]
fn dataset_defaults_follow_the_split() {
    let dir = tempfile::tempdir().unwrap();
    let out = dbar(
        &[
            "dataset",
            "--style",
            "act4",
            "--split",
            "validation",
            "--count",
            "0",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let cfg = config_line(&out);
    assert_eq!(cfg["settings"]["first_seed"], 1_000_000);
    assert!(dir
        .path()
        .join("act4_validation")
        .join("manifest.txt")
        .exists());
    assert_eq!(
        code(&dbar(
            &["dataset", "--radii", "3,2", "--count", "1"],
            dir.path()
        )),
        1
    );
}

#[test]
fn dataset_resume_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("set");
    let mut args = vec!["dataset", "--count", "2", "--out", p(&set)];
    args.extend_from_slice(TINY);
    let out = dbar(&args, dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let first = fs::read(set.join("manifest.txt")).unwrap();
    let stamp = fs::metadata(set.join("sample_000000.dbar"))
        .unwrap()
        .modified()
        .unwrap();

    args.push("--resume");
    let out = dbar(&args, dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read(set.join("manifest.txt")).unwrap(), first);
    let again = fs::metadata(set.join("sample_000000.dbar"))
        .unwrap()
        .modified()
        .unwrap();
    assert_eq!(stamp, again);

    let csv = dir.path().join("metrics.csv");
    let out = dbar(
        &["eval", "--pred", p(&set), "--gt", p(&set), "--csv", p(&csv)],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(text.lines().next().unwrap(), "file,psnr,ssim,rmse");
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(row[2], 0.0);
        assert!((row[1] - 1.0).abs() < 1e-12);
    }
    let mean_line = stdout(&out)
        .lines()
        .find(|l| l.starts_with("mean"))
        .unwrap()
        .to_owned();
    let mean_rmse: f64 = mean_line
        .split_whitespace()
        .last()
        .unwrap()
        .parse()
        .unwrap();
    let recomputed = rows.iter().map(|r| r[2]).sum::<f64>() / rows.len() as f64;
    assert!((mean_rmse - recomputed).abs() < 1e-6);

    let low = dir.path().join("low");
    fs::create_dir(&low).unwrap();
    let out = dbar(
        &["eval", "--pred", p(&low), "--gt", p(&set), "--csv", p(&csv)],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn eval_rejects_mismatched_grids() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("set");
    let mut args = vec!["dataset", "--count", "1", "--out", p(&set)];
    args.extend_from_slice(TINY);
    assert_eq!(code(&dbar(&args, dir.path())), 0);

    let pred = dir.path().join("pred");
    fs::create_dir(&pred).unwrap();
    let image = dbar_core::image::Image::constant(8, 8, 1.0, 1.0);
    dbar_core::dataset::write_array(
        &pred.join("sample_000000.dbar"),
        &dbar_core::dataset::image_to_array(&image),
    )
    .unwrap();
    let out = dbar(&["eval", "--pred", p(&pred), "--gt", p(&set)], dir.path());
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("sample_000000.dbar"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn bench_reports_both_solvers() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let out = dbar(
        &[
            "--threads",
            "1",
            "bench",
            "--l",
            "5,8",
            "--points",
            "1",
            "--csv",
            p(&csv),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(config_line(&out)["threads"], 1);
    let text = stdout(&out);
    assert!(text.contains("richardson") && text.contains("direct"));
    assert!(text.contains("skipped"));
    let rows: Vec<&str> = fs::read_to_string(&csv)
        .unwrap()
        .leak()
        .lines()
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 4);
    let rich5: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(&rich5[..2], ["5", "richardson"]);
    assert!(rich5[4].parse::<f64>().unwrap() < 1e-6);
    assert!(rows[3].ends_with("direct,,,"));
}
