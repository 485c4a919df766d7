use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn table() -> Vec<Value> {
    let text = fs::read_to_string(fixtures().join("periodic_table.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Sandbox {
            dir: TempDir::new().unwrap(),
        }
    }

    fn file(&self, name: &str, value: &Value) -> PathBuf {
        let path = self.dir.path().join(name);
        fs::write(&path, value.to_string()).unwrap();
        path
    }

    fn surface_for_period(&self, n: u64) -> PathBuf {
        let row = table().into_iter().find(|r| r["period"] == n).unwrap();
        self.file(
            &format!("s{n}.json"),
            &json!({"L": row["L"], "Q": row["Q"]}),
        )
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_wehler"))
            .args(args)
            .arg("--cache-dir")
            .arg(self.dir.path().join("cache"))
            .env_remove("WEHLER_THREADS")
            .output()
            .unwrap()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn machine(out: &Output) -> Vec<Value> {
    stdout(out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn picard_two() -> PathBuf {
    fixtures().join("picard_two.json")
}

#[test]
fn check_reports_good_reduction() {
    let sb = Sandbox::new();
    let out = sb.run(&[
        "check",
        "--surface",
        p(&picard_two()),
        "--primes",
        "3",
        "--format",
        "machine",
    ]);
    assert_eq!(code(&out), 0);
    let v = &machine(&out)[0];
    assert_eq!(v["primes"][0]["good"], json!(true));

    let s4 = sb.surface_for_period(4);
    let out = sb.run(&[
        "check",
        "--surface",
        p(&s4),
        "--primes",
        "3,5,7",
        "--format",
        "machine",
    ]);
    let v = &machine(&out)[0];
    for row in v["primes"].as_array().unwrap() {
        assert_eq!(row["good"], json!(true));
    }
}

#[test]
fn check_finds_zero_row_degeneracy() {
    let sb = Sandbox::new();
    let q: Value = serde_json::from_str(&fs::read_to_string(picard_two()).unwrap()).unwrap();
    let s = sb.file(
        "zero_row.json",
        &json!({"L": [0, 0, 0, 0, 1, 0, 0, 0, 1], "Q": q["Q"]}),
    );
    let out = sb.run(&["check", "--surface", p(&s), "--primes", "3,5"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("p = 3: x degenerate over [1,0,0]"), "{text}");
    assert!(text.contains("p = 5: x degenerate over [1,0,0]"), "{text}");
}

#[test]
fn count_prints_and_writes_counts() {
    let sb = Sandbox::new();
    let counts = sb.dir.path().join("out.counts");
    let out = sb.run(&[
        "count",
        "--surface",
        p(&picard_two()),
        "--p",
        "3",
        "--mmax",
        "5",
        "--out",
        p(&counts),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "1 13\n2 97\n3 784\n4 6877\n5 60238\n");
    assert_eq!(fs::read_to_string(&counts).unwrap(), stdout(&out));

    let out = sb.run(&[
        "count",
        "--surface",
        p(&picard_two()),
        "--p",
        "3",
        "--mmax",
        "3",
        "--format",
        "machine",
    ]);
    assert_eq!(machine(&out)[0]["counts"], json!([13, 97, 784]));
}

#[test]
fn count_rejects_even_characteristic() {
    let sb = Sandbox::new();
    let out = sb.run(&[
        "count",
        "--surface",
        p(&picard_two()),
        "--p",
        "2",
        "--mmax",
        "1",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn cycles_spectrum_and_cache() {
    let sb = Sandbox::new();
    let s6 = sb.surface_for_period(6);
    let first = sb.run(&[
        "cycles",
        "--surface",
        p(&s6),
        "--p",
        "7",
        "--format",
        "machine",
    ]);
    assert_eq!(code(&first), 0);
    let v = &machine(&first)[0];
    let spectrum: Vec<[usize; 2]> = serde_json::from_value(v["spectrum"].clone()).unwrap();
    let total: usize = spectrum.iter().map(|[l, n]| l * n).sum();
    assert_eq!(total, v["points"].as_u64().unwrap() as usize);
    assert!(spectrum.iter().any(|[l, _]| *l == 6));
    assert!(spectrum.iter().any(|[l, _]| *l == 2));
    assert!(!String::from_utf8_lossy(&first.stderr).contains("cached"));

    let second = sb.run(&[
        "cycles",
        "--surface",
        p(&s6),
        "--p",
        "7",
        "--format",
        "machine",
    ]);
    assert_eq!(first.stdout, second.stdout);
    assert!(String::from_utf8_lossy(&second.stderr).contains("using cached cycle table"));
}

#[test]
fn cycles_on_degenerate_reduction_fails() {
    let sb = Sandbox::new();
    let s9 = sb.surface_for_period(9);
    let out = sb.run(&["cycles", "--surface", p(&s9), "--p", "5"]);
    assert_eq!(code(&out), 2);
}

fn orbit_contains(report: &Value, point: Value) -> bool {
    report["verified"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v["orbit"].as_array().unwrap().contains(&point))
}

#[test]
fn search_table_surfaces() {
    let sb = Sandbox::new();
    let s13 = sb.surface_for_period(13);
    let out = sb.run(&[
        "search",
        "--period",
        "13",
        "--surface",
        p(&s13),
        "--format",
        "machine",
    ]);
    assert_eq!(code(&out), 0);
    let report = &machine(&out)[0];
    assert_eq!(report["verdict"], json!("found"));
    assert!(orbit_contains(
        report,
        json!({"x": [0, 1, 0], "y": [1, -1, -1]})
    ));

    let s12 = sb.surface_for_period(12);
    let out = sb.run(&[
        "search",
        "--period",
        "12",
        "--surface",
        p(&s12),
        "--format",
        "machine",
    ]);
    let report = &machine(&out)[0];
    assert!(orbit_contains(
        report,
        json!({"x": [2, 1, -2], "y": [0, 2, -1]})
    ));
}

#[test]
fn seeded_search_replays() {
    let sb = Sandbox::new();
    let args = [
        "search",
        "--period",
        "2",
        "--surfaces",
        "3",
        "--seed",
        "11",
        "--primes",
        "8",
        "--format",
        "machine",
    ];
    let a = sb.run(&[&args[..], &["--threads", "1"]].concat());
    let b = sb.run(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let reports = machine(&a);
    assert_eq!(reports.len(), 3);
    for r in &reports {
        for c in r["surface"]["L"]
            .as_array()
            .unwrap()
            .iter()
            .chain(r["surface"]["Q"].as_array().unwrap())
        {
            assert!((-1..=1).contains(&c.as_i64().unwrap()));
        }
    }
}

#[test]
fn zeta_from_counts_file() {
    let sb = Sandbox::new();
    let counts = fixtures().join("picard_two_counts.txt");
    let out = sb.run(&["zeta", "--counts", p(&counts), "--p", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("Picard upper bound: 2"));
    assert!(text.contains("Picard number exactly 2"));
    assert!(text.contains("Z(S,T) = 1/((1-T)*P2(T)*(1-9T))"));

    let out = sb.run(&[
        "zeta",
        "--counts",
        p(&counts),
        "--p",
        "3",
        "--format",
        "machine",
    ]);
    let v = &machine(&out)[0];
    assert_eq!(v["p2"][22], json!(31381059609i64));
    assert_eq!(v["picard_bound"], json!(2));
    assert_eq!(v["multiplicities"], json!([[1, 2]]));
}

#[test]
fn zeta_rejects_bad_input() {
    let sb = Sandbox::new();
    let text = fs::read_to_string(fixtures().join("picard_two_counts.txt")).unwrap();
    let corrupted = text.replace("2 97", "2 98");
    let path = sb.dir.path().join("bad.counts");
    fs::write(&path, corrupted).unwrap();
    let out = sb.run(&["zeta", "--counts", p(&path), "--p", "3"]);
    assert_eq!(code(&out), 2);

    let short: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
    fs::write(&path, short).unwrap();
    let out = sb.run(&["zeta", "--counts", p(&path), "--p", "3"]);
    assert_eq!(code(&out), 1);

    let out = sb.run(&[
        "zeta",
        "--surface",
        p(&picard_two()),
        "--p",
        "3",
        "--mmax",
        "7",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("11 counts"));
}

#[test]
fn verify_every_table_point() {
    let sb = Sandbox::new();
    for row in table() {
        let n = row["period"].as_u64().unwrap();
        let surface = sb.surface_for_period(n);
        for (k, pt) in row["points"].as_array().unwrap().iter().enumerate() {
            let point = sb.file(
                &format!("pt{n}_{k}.json"),
                &json!({"x": pt["x"], "y": pt["y"]}),
            );
            let period = pt["period"].to_string();
            let out = sb.run(&[
                "verify",
                "--surface",
                p(&surface),
                "--point",
                p(&point),
                "--period",
                &period,
            ]);
            assert_eq!(code(&out), 0, "period {n}: {}", stdout(&out));
        }
    }
}

#[test]
fn verify_scaled_and_wrong_period() {
    let sb = Sandbox::new();
    let s7 = sb.surface_for_period(7);
    let scaled = sb.file("scaled.json", &json!({"x": [2, -4, 2], "y": [-3, 3, 3]}));
    let out = sb.run(&[
        "verify",
        "--surface",
        p(&s7),
        "--point",
        p(&scaled),
        "--period",
        "7",
        "--format",
        "machine",
    ]);
    assert_eq!(code(&out), 0);
    let v = &machine(&out)[0];
    assert_eq!(v["point"], json!({"x": [1, -2, 1], "y": [1, -1, -1]}));
    assert_eq!(v["primitive_period"], json!(7));

    let out = sb.run(&[
        "verify",
        "--surface",
        p(&s7),
        "--point",
        p(&scaled),
        "--period",
        "5",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("primitive period is 7"));

    let off = sb.file("off.json", &json!({"x": [1, 0, 0], "y": [0, 0, 1]}));
    let out = sb.run(&[
        "verify",
        "--surface",
        p(&s7),
        "--point",
        p(&off),
        "--period",
        "7",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_one() {
    let sb = Sandbox::new();
    assert_eq!(code(&sb.run(&["frobnicate"])), 1);
    assert_eq!(
        code(&sb.run(&["cycles", "--surface", "/nonexistent.json", "--p", "3"])),
        1
    );
    assert_eq!(
        code(&sb.run(&["cycles", "--surface", p(&picard_two()), "--p", "9"])),
        1
    );
    let bad = sb.file("bad.json", &json!({"L": [1, 2], "Q": []}));
    assert_eq!(code(&sb.run(&["check", "--surface", p(&bad)])), 1);
    assert_eq!(code(&sb.run(&["--help"])), 0);
}
