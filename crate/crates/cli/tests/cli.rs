use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_approachkit"))
}

fn game(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../games").join(name)
}

#[test]
fn approach_writes_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| dir.path().join(name);
    for name in ["a.csv", "b.csv"] {
        let status = bin()
            .args(["approach", "--horizon", "200", "--seed", "7", "--replications", "2"])
            .args(["--opponent", "adaptive:0.25", "--game"])
            .arg(game("matching_pennies.json"))
            .arg("--out")
            .arg(out(name))
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(out("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(out("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "replication,t,block,distance,regret,calibration_score,gamma_n,L_n"
    );
    assert_eq!(lines.count(), 400);
}

#[test]
fn json_output_has_the_csv_keys() {
    let out = bin()
        .args(["external-regret", "--horizon", "300", "--format", "json"])
        .args(["--opponent", "fixed:0.2,0,0.8", "--game"])
        .arg(game("dark_pennies.json"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let first = &rows.as_array().unwrap()[0];
    for key in ["replication", "t", "block", "distance", "regret", "calibration_score", "gamma_n", "L_n"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    assert!(first["calibration_score"].is_null());
}

#[test]
fn failing_condition_exits_with_2_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("far.json");
    std::fs::write(&target, r#"{"normals": [[1], [-1]], "offsets": [-5, 6]}"#).unwrap();
    let run = |force: bool| {
        let mut c = bin();
        c.args(["approach", "--horizon", "10", "--opponent", "cyclic:0,1", "--game"])
            .arg(game("matching_pennies.json"))
            .arg("--target")
            .arg(&target);
        if force {
            c.arg("--force");
        }
        c.output().unwrap()
    };
    assert_eq!(run(false).status.code(), Some(2));
    assert_eq!(run(true).status.code(), Some(0));
}

#[test]
fn check_apm_reports() {
    let out = bin()
        .arg("check-apm")
        .arg("--game")
        .arg(game("dark_pennies.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("holds: true"));

    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("tight.json");
    std::fs::write(&target, r#"{"normals": [[-1], [1]], "offsets": [-1.5, 4]}"#).unwrap();
    let out = bin()
        .arg("check-apm")
        .arg("--game")
        .arg(game("dark_pennies.json"))
        .arg("--target")
        .arg(&target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("holds: false"));
}

#[test]
fn bad_inputs_exit_with_1() {
    let missing = bin()
        .args(["calibrate", "--game", "/no/such/game.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));

    let bad_opponent = bin()
        .args(["calibrate", "--opponent", "sometimes:3", "--game"])
        .arg(game("matching_pennies.json"))
        .output()
        .unwrap();
    assert_eq!(bad_opponent.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    let out = bin().arg("robust").arg("--game").arg(&broken).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn every_mode_runs() {
    let cases = [
        ("robust", "interval_game.json", "adaptive:0.5"),
        ("pm-approach", "dark_pennies.json", "fixed:0.2,0,0.8"),
        ("pm-approach", "counterexample_game.json", "cyclic:0,1,2"),
        ("swap-regret", "dark_pennies.json", "fixed:0.2,0,0.8"),
        ("calibrate", "matching_pennies.json", "cyclic:0,0,1"),
    ];
    for (mode, file, opponent) in cases {
        let out = bin()
            .args([mode, "--horizon", "300", "--opponent", opponent, "--game"])
            .arg(game(file))
            .output()
            .unwrap();
        assert!(out.status.success(), "{mode} on {file}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).lines().count() > 1);
    }
}
