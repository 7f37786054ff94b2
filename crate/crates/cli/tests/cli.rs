use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sharp-radon"));
    c.env("SHARP_RADON_THREADS", "2");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn missing_field_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["transform", "--op", "rsharp"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--f"));
    let o = run(&["transform", "--f", "family=nonsense"], dir.path());
    assert_eq!(code(&o), 2);
    let o = run(&["transform", "--bogus-flag"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn radon_profile_of_extremizer() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "transform",
            "--f",
            "family=extremizer a=1 c=1",
            "--nr",
            "16",
            "--ndirs",
            "8",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&dir.path().join("profile.dat"));
    let mut rows = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let v: Vec<f64> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
        let expect = std::f64::consts::PI / (1.0 + v[0] * v[0]).sqrt();
        assert!(
            (v[1] - expect).abs() < 1e-7 * expect,
            "r = {}: {} vs {expect}",
            v[0],
            v[1]
        );
        rows += 1;
    }
    assert_eq!(rows, 16);
    for f in ["sinogram.csv", "transform.config", "transform.meta"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn verify_subset_and_tolerance_override() {
    let dir = tempfile::tempdir().unwrap();
    let only = "flat-radon,shear-conjugacy,inversion-fixed-point";
    let o = run(&["verify", "--only", only], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let csv = read(&dir.path().join("verify.csv"));
    assert_eq!(csv.lines().count(), 1 + 4 + 2 + 2);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",pass")));

    let o = run(&["verify", "--only", only, "--tol", "1e-30"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("worst offender"));
    assert!(read(&dir.path().join("verify.meta")).contains("verdict = failed"));

    let o = run(&["verify", "--only", "no-such-identity"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn burchard_grid_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["burchard"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("20 equalities, 0 mismatches"));
    let csv = read(&dir.path().join("burchard.csv"));
    assert_eq!(csv.lines().count(), 401);
    // c_0 = c_1 with c_2 = 0 is the center relation for v = (1, 1)
    assert!(csv.contains("\n-19/20,-19/20,true,true,true\n"));

    let o = run(&["burchard", "--v", "1/2,x"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let o = run(
            &["transform", "--op", "j", "--f", "random_smooth seed=4", "--N", "16"],
            dir,
        );
        assert_eq!(code(&o), 0);
        let o = run(&["drury", "--samples", "2e4", "--seed", "3"], dir);
        assert!(code(&o) <= 1);
    }
    for f in ["field.csv", "profile.dat", "drury.txt"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    // the echoed settings differ only in the output directory
    let strip = |p: &Path| {
        read(p)
            .lines()
            .filter(|l| !l.starts_with("out = "))
            .collect::<Vec<_>>()
            .join("\n")
    };
    for f in ["transform.config", "drury.config"] {
        assert_eq!(strip(&a.path().join(f)), strip(&b.path().join(f)), "{f}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# transform settings\nop = psi\nf = family=gaussian a=2\nN = 8\nR = 2\n",
    )
    .unwrap();
    let o = bin()
        .args(["transform", "--N", "12", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let echo = read(&dir.path().join("transform.config"));
    for line in ["op = psi", "N = 12", "R = 2", "f = family=gaussian a=2", "d = 2"] {
        assert!(echo.lines().any(|l| l == line), "missing '{line}' in\n{echo}");
    }
    let csv = read(&dir.path().join("field.csv"));
    assert!(csv.lines().count() >= 144);
    assert!(read(&dir.path().join("transform.meta")).contains("threads = 2"));
}
