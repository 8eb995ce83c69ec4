use std::fs;
use std::process::{Command, Output};

fn voi_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voi-lab"))
        .args(args)
        .env_remove("VOI_LAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// CSV text without the wall-clock column.
fn without_runtime(csv: &str) -> Vec<String> {
    csv.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
}

#[test]
fn preset_list_names_every_figure() {
    let o = voi_lab(&["preset", "list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["uniform-log", "exponential-dependent", "binary-independent", "aoi-voi", "mm12-closed"] {
        assert!(text.contains(name), "{text}");
    }
    let shown = voi_lab(&["preset", "show", "uniform-log"]);
    assert!(stdout(&shown).contains("scenario.service = dependent(log-shift, 1)"));
    assert_eq!(voi_lab(&["preset", "show", "nope"]).status.code(), Some(2));
}

#[test]
fn uniform_log_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.csv");
    let o = voi_lab(&["run", "--preset", "uniform-log", "--packets", "2000", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1 + 20 * 3 * 2);
    assert!(csv.starts_with(
        "lambda,discipline,policy,engine,avg_voi,avg_aoi,stderr,p_idle,p_busy1,p_busy2,seed,runtime_ms\n"
    ));
    let meta = fs::read_to_string(dir.path().join("u.csv.meta")).unwrap();
    assert!(meta.contains("scenario.lambda_grid = 0.1, "), "{meta}");
    assert!(meta.contains("resolved_seed = 1"));
}

#[test]
fn mm12_closed_form_row() {
    let o = voi_lab(&["run", "--preset", "mm12-closed", "--packets", "1000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("1,M/GI/1/2,serve-all,closed-form,")).unwrap();
    let value: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert!((value - 0.260_69).abs() < 5e-6, "{row}");
}

#[test]
fn unknown_discipline_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(
        &cfg,
        "scenario.value = uniform(0, 10)\nscenario.service = dependent(log-shift, 1)\nscenario.deadline = 3\n\
         scenario.lambda_grid = 1\nscenario.disciplines = M/GI/1/3\n",
    )
    .unwrap();
    let o = voi_lab(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("M/GI/1/3"));
    assert_eq!(voi_lab(&["run", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(voi_lab(&["run"]).status.code(), Some(2));
    assert_eq!(voi_lab(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn nonlinear_descend_rows_are_unsupported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("convex.cfg");
    fs::write(
        &cfg,
        "scenario.value = exponential(1.5)\nscenario.service = dependent(identity)\nscenario.deadline = 3\n\
         scenario.descend = convex(2)\nscenario.lambda_grid = 1\nscenario.disciplines = M/GI/1/1\n\
         run.n_packets = 5000\n",
    )
    .unwrap();
    let o = voi_lab(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[1].contains(",analytic,unsupported,"), "{text}");
    assert!(lines[2].contains(",simulate,0."), "{text}");
}

#[test]
fn csv_is_deterministic_and_seeded() {
    let args = ["run", "--preset", "binary-dependent", "--packets", "3000", "--jobs", "3"];
    let a = stdout(&voi_lab(&args));
    let b = stdout(&voi_lab(&args));
    assert_eq!(without_runtime(&a), without_runtime(&b));

    let with_env = Command::new(env!("CARGO_BIN_EXE_voi-lab"))
        .args(args)
        .env("VOI_LAB_SEED", "77")
        .output()
        .unwrap();
    let env_csv = stdout(&with_env);
    assert!(env_csv.lines().nth(1).unwrap().contains(",77,"));
    assert_ne!(without_runtime(&env_csv), without_runtime(&a));

    let flagged = Command::new(env!("CARGO_BIN_EXE_voi-lab"))
        .args(args)
        .args(["--seed", "5"])
        .env("VOI_LAB_SEED", "77")
        .output()
        .unwrap();
    assert!(stdout(&flagged).lines().nth(1).unwrap().contains(",5,"));

    let bad_env = Command::new(env!("CARGO_BIN_EXE_voi-lab"))
        .args(args)
        .env("VOI_LAB_SEED", "minus one")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    let o = voi_lab(&["run", "--preset", "mm12-closed", "--out", good.to_str().unwrap()]);
    assert!(o.status.success());
    let v = voi_lab(&["verify", good.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert!(stdout(&v).contains("6 passed, 0 failed"));

    let csv = fs::read_to_string(&good).unwrap();
    let corrupted: String = csv
        .lines()
        .map(|l| {
            if l.starts_with("1,M/GI/1/2,serve-all,analytic,") {
                let mut f: Vec<&str> = l.split(',').collect();
                f[4] = "0.5";
                f.join(",")
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, corrupted).unwrap();
    let v = voi_lab(&["verify", bad.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(3));
    assert!(stdout(&v).contains("FAIL lambda=1 M/GI/1/2 serve-all analytic"));
}

#[test]
fn trace_prints_one_line_per_event() {
    let o = voi_lab(&[
        "trace",
        "--preset",
        "exponential-dependent",
        "--lambda",
        "2",
        "--discipline",
        "M/GI/1/2*",
        "--packets",
        "50",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains(" arrive ")).count(), 50);
    assert!(text.lines().all(|l| l.split(' ').count() == 4));
    let o = voi_lab(&["trace", "--preset", "exponential-dependent", "--lambda", "2", "--discipline", "M/GI/1/9"]);
    assert_eq!(o.status.code(), Some(2));
}
