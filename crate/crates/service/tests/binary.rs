use std::process::Command;

#[test]
fn add_user_persists_to_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_rpm-service"))
            .args(args)
            .env("RPM_DATA_DIR", dir.path())
            .output()
            .unwrap()
    };
    let out = run(&["add-user", "--user-id", "dr", "--role", "provider", "--password", "s3cret", "--link", "p1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let account: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(account["linked_subjects"], serde_json::json!(["p1"]));

    let again = run(&["add-user", "--user-id", "dr", "--role", "provider", "--password", "x"]);
    assert!(!again.status.success());
    assert!(String::from_utf8_lossy(&again.stderr).contains("already exists"));

    let events = std::fs::read_to_string(dir.path().join("events.jsonl")).unwrap();
    assert_eq!(events.lines().count(), 1);
    let audit = std::fs::read_to_string(dir.path().join("audit.jsonl")).unwrap();
    assert_eq!(audit.lines().count(), 2);

    let bad = run(&["add-user", "--user-id", "x", "--role", "admin", "--password", "x"]);
    assert!(!bad.status.success());
}
