use std::process::Command;

fn kneser(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_kneser"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn counts_and_isometry() {
    assert_eq!(
        kneser(&["neighbors", "Z9", "-p", "3", "--count-only"]).trim(),
        "3280 isotropic lines mod 3"
    );
    assert_eq!(kneser(&["isom", "D16+", "E8+E8"]).trim(), "NOT ISOMETRIC");
    assert_eq!(
        kneser(&["embed", "A1", "E8", "--saturated", "--count"]).trim(),
        "240"
    );
    assert!(kneser(&["aut", "E8"]).starts_with("order 696729600"));
}

#[test]
fn genus_then_stats() {
    let dir = std::env::temp_dir().join(format!("kneser-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cat = dir.join("z9.json");
    let cat = cat.to_str().unwrap();
    kneser(&["genus", "Z9", "-p", "3", "--out", cat]);
    let csv = kneser(&["stats", "--catalog", cat, "-p", "3"]);
    let mut lines = csv.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("p,class_from,class_to,count,lines_total"));
    assert_eq!(lines.count(), 4);
    let spec = kneser(&["spectrum", "--catalog", cat, "-p", "3"]);
    assert!(spec.contains("lambda_2 = 1104 (exact)"), "{spec}");
    let bad = Command::new(env!("CARGO_BIN_EXE_kneser"))
        .args(["isom", "Q7", "E8"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn glue_writes_lattices() {
    let dir = std::env::temp_dir().join(format!("kneser-glue-{}", std::process::id()));
    let out = kneser(&[
        "glue",
        "D8",
        "D8",
        "--quadratic-only",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.starts_with("2 anti-isometries in 1 O(B)-orbits"),
        "{out}"
    );
    assert!(dir.join("glue_0.lat").exists() && dir.join("glue_1.lat").exists());
    std::fs::remove_dir_all(&dir).ok();
}
