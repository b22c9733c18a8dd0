use std::path::PathBuf;
use std::process::Command;

fn dressed() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dressed"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dressed-cli-{name}-{}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    dir
}

#[test]
fn gs_with_config_and_overrides() {
    let dir = scratch("gs");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("run.toml");
    std::fs::write(&config, "[model]\nkind = \"two-site\"\n\n[grids.p]\nn = 32\n").unwrap();
    let out = dir.join("out");
    let status = dressed()
        .args(["gs", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--override", "model.lambda=0.02"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("lambda = 0.02"));
    assert!(std::fs::read_to_string(out.join("gs.csv")).unwrap().starts_with("quantity,value"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_config_reports_key_and_exits_nonzero() {
    let dir = scratch("bad");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("bad.toml");
    std::fs::write(&config, "[model]\nomega = -1.0\n").unwrap();
    let output = dressed().args(["gs", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("model.omega"));

    let output = dressed().args(["prop", "--override", "model.bogus=1"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_subcommand_is_rejected() {
    let output = dressed().arg("fig3").output().unwrap();
    assert!(!output.status.success());
}
