use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_platoon-sim"));
    c.env_remove("PLATOON_SIM_OUT");
    c
}

const TINY: &str = r#"
[scenario]
num_platoons = 2
platoon_size = 2
num_subchannels = 2

[env]
slots_per_episode = 5

[learner]
episodes = 2
eval_episodes = 1
actor_hidden = [8]
critic_hidden = [8]
batch_size = 4
"#;

fn write_config(dir: &std::path::Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn run_writes_into_out_dir() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), TINY);
    let out = d.path().join("out");
    let o = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--seed", "3", "--deterministic", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert!(names.iter().any(|n| n.ends_with("_3_episodes.csv")));
    assert!(names.iter().any(|n| n.ends_with("_3_summary.toml")));
    assert!(names.iter().any(|n| n.ends_with("_3_checkpoint.json")));
}

#[test]
fn output_root_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), TINY);
    let out = d.path().join("from_env");
    let o = bin().args(["run", "--algo", "random", "--config"]).arg(&cfg).env("PLATOON_SIM_OUT", &out).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.read_dir().unwrap().count() >= 2);
}

#[test]
fn config_errors_exit_with_one() {
    let d = tempfile::tempdir().unwrap();
    let bad = write_config(d.path(), "[scenario]\nplatoon_gap_m = 50\n");
    let o = bin().args(["run", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("platoon_gap_m"));

    let o = bin().args(["run", "--algo", "ppo"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(["sweep", "--param", "noise", "--values", "1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), TINY);
    let o = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(d.path())
        .arg("--deterministic")
        .env("PLATOON_SIM_OUT", d.path())
        .args(["--seed", "1"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let missing = d.path().join("missing.json");
    let text = format!("{TINY}\n[run]\neval_checkpoint = {:?}\n", missing.to_str().unwrap());
    let cfg = write_config(d.path(), &text);
    let o = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(d.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_and_oracle_subcommands() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), TINY);
    let mut files = Vec::new();
    for algo in ["samramarl", "random"] {
        let out = d.path().join(algo);
        let o = bin().args(["run", "--algo", algo, "--deterministic", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
        assert!(o.status.success());
        let f = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .find(|p| p.to_str().unwrap().ends_with("_episodes.csv"))
            .unwrap();
        files.push(f);
    }
    let o = bin().arg("compare").args(&files).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.starts_with("reference,other,metric"));
    assert_eq!(report.lines().count(), 1 + 4);

    let o = bin().args(["oracle", "--config"]).arg(&cfg).arg("--out").arg(d.path()).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("optimum"));
}
