//! Acceptance grid: one PASS/FAIL line per criterion, written straight to
//! stderr so the lines show even when the harness captures output.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use regdet_cli::acceptance::{self, Criterion, DEFAULT_SAMPLES, DEFAULT_SEED};
use regdet_cli::Check;

fn timed(f: impl FnOnce() -> regdet::Result<Criterion>, limit: Option<Duration>) -> Criterion {
    let start = Instant::now();
    let mut c = f().expect("criterion evaluates");
    if let Some(limit) = limit {
        let secs = start.elapsed().as_secs_f64();
        c.checks.push(Check::abs("runtime [s]", secs, 0.0, limit.as_secs_f64()));
        c.pass &= secs <= limit.as_secs_f64();
    }
    c
}

fn verify_all(threads: &str, ignore: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_regdet"))
        .args(["verify-all", "--threads", threads, "--seed", "7"])
        .output()
        .expect("binary runs");
    assert!(matches!(out.status.code(), Some(0) | Some(2)), "{out:?}");
    String::from_utf8(out.stdout)
        .expect("utf-8")
        .lines()
        .filter(|l| {
            let key = l.trim_start();
            !["\"timestamp\"", "\"runtime_ms\""].iter().chain(ignore).any(|k| key.starts_with(k))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn a10() -> Criterion {
    let first = verify_all("2", &[]);
    let second = verify_all("2", &[]);
    // the thread count itself is echoed in the inputs
    let first_masked = verify_all("2", &["\"threads\""]);
    let other_threads = verify_all("1", &["\"threads\""]);
    let differing = |a: &str, b: &str| a.lines().zip(b.lines()).filter(|(x, y)| x != y).count() as f64;
    let checks = vec![
        Check::abs("verify-all twice, same threads: differing lines", differing(&first, &second), 0.0, 0.0),
        Check::abs("verify-all with 2 vs 1 threads: differing lines", differing(&first_masked, &other_threads), 0.0, 0.0),
        Check::abs(
            "report lengths agree",
            first.len() as f64,
            second.len() as f64,
            0.0,
        ),
    ];
    let pass = checks.iter().all(|c| c.pass) && first == second && first_masked == other_threads;
    Criterion {
        id: "A10".into(),
        title: "byte-identical verify-all reports modulo timestamp".into(),
        checks,
        notes: vec![],
        pass,
    }
}

#[test]
fn acceptance_grid() {
    let secs = Duration::from_secs;
    let criteria = vec![
        timed(acceptance::a1, Some(secs(10))),
        timed(acceptance::a2, Some(secs(30))),
        timed(acceptance::a3, None),
        timed(acceptance::a4, None),
        timed(acceptance::a5, Some(secs(5))),
        timed(acceptance::a6, None),
        timed(|| acceptance::a7(DEFAULT_SEED, DEFAULT_SAMPLES), Some(secs(60))),
        timed(acceptance::a8, None),
        timed(acceptance::a9, None),
        a10(),
    ];
    let mut err = std::io::stderr().lock();
    for c in &criteria {
        let _ = writeln!(err, "{}", c.summary_line());
        for note in c.notes.iter().filter(|_| !c.pass) {
            let _ = writeln!(err, "    note: {note}");
        }
    }
    let failed: Vec<&str> = criteria.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
