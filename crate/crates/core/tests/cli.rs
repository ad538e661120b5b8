use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qinterference"))
}

#[test]
fn csv_header_and_rows() {
    let out = bin()
        .args(["grover-systematic", "--n", "3", "--grid", "0:pi/2:3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "sweep_value,n,n_f,interference_pa,interference_au,ibits_pa,ibits_au,success,success_stderr,n_samples,seed"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("0.785398163397,3,,"));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(
        code(&["grover-systematic", "--n", "2", "--grid", "0.5"]),
        Some(0)
    );
    assert_eq!(code(&["grover-systematic", "--bogus"]), Some(2));
    assert_eq!(code(&["grover-decoherence", "--n", "2"]), Some(2));
    assert_eq!(code(&["shor-systematic", "--R", "15", "--a", "5"]), Some(2));
    assert_eq!(code(&["grover-systematic", "--n", "13"]), Some(3));
    assert_eq!(code(&["shor-systematic", "--R", "31", "--a", "2"]), Some(3));
    assert_eq!(
        code(&[
            "grover-systematic",
            "--n",
            "2",
            "--out",
            "/nonexistent/dir/x.csv"
        ]),
        Some(4)
    );
    assert_eq!(
        code(&["grover-systematic", "--config", "/nonexistent/config.toml"]),
        Some(4)
    );
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "n = 3\ngrid = \"0.5\"\nformat = \"json\"\nerror-kind = \"phaseflip\"\nnf = \"2\"\n",
    )
    .unwrap();
    let out = bin()
        .args([
            "grover-decoherence",
            "--config",
            cfg.to_str().unwrap(),
            "--n",
            "2",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["n"], 2);
    assert_eq!(v[0]["n_f"], 2);
    assert_eq!(v[0]["sweep_value"], 0.5);
}

#[test]
fn output_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cue.csv");
    let status = bin()
        .args([
            "cue-baseline",
            "--n",
            "3",
            "--realizations",
            "10",
            "--out",
            path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,samples,mean_interference,stddev,seed\n3,10,"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let run = || {
        bin()
            .args([
                "shor-random",
                "--R",
                "3",
                "--a",
                "2",
                "--grid",
                "0:2:3",
                "--realizations",
                "8",
                "--seed",
                "5",
                "--parallel",
                "3",
            ])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
}
