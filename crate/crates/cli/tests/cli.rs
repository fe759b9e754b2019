use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn perfhom(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perfhom"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn capacity_prints_the_constant() {
    let dir = tempfile::tempdir().unwrap();
    let o = perfhom(&["capacity", "--p", "1.5", "--shape", "boundary_segment"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    let c: f64 = text
        .split_whitespace()
        .find_map(|w| w.strip_prefix("c="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((c - 1.602).abs() < 0.03 * 1.602, "{c}");
    assert!(text.contains("R,phi_R,fitted_beta,phi_inf,err"));
    assert!(dir.path().join("capacity.csv").exists());
}

#[test]
fn bvp1_ladder_writes_a_row_per_entry_plus_limit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("bvp1.cfg");
    let o = perfhom(&["ladder", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 + 1, "{csv}");
    assert_eq!(stdout(&o).lines().count(), 5);
    for name in ["run.log", "config.cfg", "constants.csv", "field_limit.vtk"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn bvp2_family_validates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("bvp2.cfg");
    let o = perfhom(&["validate", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("passed"));
    let csv = std::fs::read_to_string(dir.path().join("validation.csv")).unwrap();
    assert!(csv.contains("violations,0"));
}

#[test]
fn every_shipped_config_validates() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.file_name().unwrap() == "capacity.cfg" {
            continue;
        }
        let dir = tempfile::tempdir().unwrap();
        let o = perfhom(
            &["validate", "--samples", "16", "--config", path.to_str().unwrap()],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), stdout(&o));
    }
}

#[test]
fn solve_runs_one_entry() {
    let dir = tempfile::tempdir().unwrap();
    let o = perfhom(&["solve", "--eps", "0.25"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("bvp1,0.25,"));
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = perfhom(&["ladder", "--set", "p=3"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let log = std::fs::read_to_string(dir.path().join("run.log")).unwrap();
    assert!(log.contains("p") && log.contains("exit: 1"), "{log}");

    let o = perfhom(&["ladder", "--set", "unknown_key=1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = perfhom(&["ladder", "--config", "/nonexistent.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_solves_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = perfhom(
        &[
            "ladder",
            "--set",
            "eps_ladder=0.5",
            "--set",
            "max_iters=1",
            "--set",
            "tolerance=1e-14",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAILED"));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.contains("failed: "));
    assert!(std::fs::read_to_string(dir.path().join("run.log"))
        .unwrap()
        .contains("exit: 2"));
}

#[test]
fn fixed_seed_and_threads_give_identical_reports() {
    let args = ["--threads", "1", "--seed", "7"];
    let mut reports = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let o = perfhom(
            &[&["ladder", "--set", "eps_ladder=0.5,0.25"][..], &args[..]].concat(),
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0));
        let v = perfhom(&[&["validate"][..], &args[..]].concat(), dir.path());
        assert_eq!(v.status.code(), Some(0));
        reports.push((
            std::fs::read(dir.path().join("report.csv")).unwrap(),
            std::fs::read(dir.path().join("validation.csv")).unwrap(),
        ));
    }
    assert_eq!(reports[0], reports[1]);
}
