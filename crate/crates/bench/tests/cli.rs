use std::fs;
use std::process::Command;

fn foops() -> Command {
    Command::new(env!("CARGO_BIN_EXE_foops"))
}

#[test]
fn run_with_config_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    fs::write(
        &config,
        r#"
name = "cli"
[problem]
kind = "quadratic_pair"
[preferences]
rays = [[1.0, 2.0]]
[init]
kind = "fixed"
x0 = [0.5]
[method]
kind = "foops"
t_max = 20
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = foops()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--alpha", "0.05", "--K", "5", "--gamma-max", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    let saved = fs::read_to_string(out.join("experiment.toml")).unwrap();
    assert!(saved.contains("alpha = 0.05"));
    assert!(saved.contains("gamma_max = 2.0"));
    assert!(out.join("traces/run_0000.csv").is_file());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| foops().args(args).output().unwrap().status.code();

    assert_eq!(code(&["run", "--problem", "zdt1"]), Some(1));
    assert_eq!(code(&["run", "--config", "/nonexistent/exp.toml"]), Some(1));
    assert_eq!(code(&["frobnicate"]), Some(1));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "repeats = 0\n[problem]\nkind = \"fig2\"\n[init]\nkind = \"easy\"\n[method]\nkind = \"foops\"\n")
        .unwrap();
    assert_eq!(code(&["run", "--config", bad.to_str().unwrap()]), Some(1));

    let blocker = dir.path().join("blocker");
    fs::write(&blocker, b"").unwrap();
    let out = blocker.join("sub");
    assert_eq!(code(&["run", "--problem", "fig2", "--out", out.to_str().unwrap()]), Some(2));

    let diverging = dir.path().join("div");
    assert_eq!(
        code(&[
            "run", "--problem", "quadratic_pair", "--method", "ls", "--alpha", "50", "--out",
            diverging.to_str().unwrap()
        ]),
        Some(2)
    );

    let ok = dir.path().join("ok");
    assert_eq!(
        code(&["sweep", "--problem", "fig2", "--n-weights", "5", "--out", ok.to_str().unwrap()]),
        Some(0)
    );
    let surface = dir.path().join("surface.csv");
    assert_eq!(
        code(&["merit-surface", "--points", "5", "--l", "0", "--tau", "0.1", "--out", surface.to_str().unwrap()]),
        Some(0)
    );
    assert_eq!(fs::read_to_string(&surface).unwrap().lines().count(), 6);
}

#[test]
fn compare_rejects_mismatched_problems() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, problem: &str| {
        let path = dir.path().join(name);
        let out = dir.path().join(format!("{name}.out"));
        fs::write(
            &path,
            format!(
                "output = {:?}\n[problem]\nkind = \"{problem}\"\n[preferences]\nrays = [[1.0, 1.0]]\n[init]\nkind = \"easy\"\n[method]\nkind = \"foops\"\nt_max = 5\n",
                out
            ),
        )
        .unwrap();
        path
    };
    let a = write("a.toml", "fig2");
    let b = write("b.toml", "quadratic_pair");
    let status = foops()
        .args(["compare", "--config"])
        .arg(&a)
        .arg("--config")
        .arg(&b)
        .arg("--out")
        .arg(dir.path().join("cmp"))
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(1));

    let status = foops()
        .args(["compare", "--config"])
        .arg(&a)
        .arg("--config")
        .arg(&a)
        .arg("--out")
        .arg(dir.path().join("cmp"))
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("cmp/comparison.csv").is_file());
}
