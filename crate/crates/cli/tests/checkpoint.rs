use std::fs;
use std::path::Path;

use pellsieve_cli::{run, EXIT_INCONSISTENT, EXIT_OK, EXIT_USAGE};

fn sweep(checkpoint: &Path, jobs: &str) -> (i32, String, String) {
    let cp = checkpoint.to_str().unwrap();
    let args = [
        "pellsieve", "sweep", "--a-max", "12", "--b-max", "60", "--n-max", "12", "--m-all",
        "--jobs", jobs, "--checkpoint", cp,
    ];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(args, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn pair_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| l.starts_with("pair ")).collect()
}

#[test]
fn fresh_run_writes_every_pair_and_a_digest() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("sweep.ckpt");
    let (code, out, _) = sweep(&cp, "4");
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("\"x\":\"22\""));
    let text = fs::read_to_string(&cp).unwrap();
    assert!(text.starts_with("pellsieve-checkpoint 1 a=2..=12 b=2..=60 n=2..=12 m=all\n"));
    let expected_pairs: usize = (2..=12u64).map(|a| (60 - a) as usize).sum();
    assert_eq!(pair_lines(&text).len(), expected_pairs);
    assert!(text.lines().last().unwrap().starts_with("digest "));
    assert!(text.contains("pair 2 5 2:3:22\n"));
}

#[test]
fn resuming_a_finished_run_reproduces_its_output() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("sweep.ckpt");
    let (_, first, _) = sweep(&cp, "1");
    let (code, second, err) = sweep(&cp, "8");
    assert_eq!(code, EXIT_OK);
    assert_eq!(first, second);
    assert!(err.contains("resuming"));
    assert!(pair_lines(&err).is_empty(), "no pair should be recomputed");
}

#[test]
fn interrupted_run_resumes_past_a_partial_line() {
    let dir = tempfile::tempdir().unwrap();
    let reference_cp = dir.path().join("reference.ckpt");
    let (_, reference, _) = sweep(&reference_cp, "1");

    let full = fs::read_to_string(&reference_cp).unwrap();
    let lines: Vec<&str> = full.lines().collect();
    // Header, twenty pairs, then half of the next line and no digest.
    let mut cut = lines[..21].join("\n");
    cut.push('\n');
    cut.push_str(&lines[21][..lines[21].len() / 2]);
    let cp = dir.path().join("cut.ckpt");
    fs::write(&cp, cut).unwrap();

    let (code, out, err) = sweep(&cp, "4");
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(out, reference);
    assert!(err.contains("resuming: 20 pairs"));
    let text = fs::read_to_string(&cp).unwrap();
    assert_eq!(pair_lines(&text).len(), pair_lines(&full).len());
}

#[test]
fn tampered_digest_is_an_inconsistency() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("sweep.ckpt");
    sweep(&cp, "2");
    let text = fs::read_to_string(&cp).unwrap().replace("pair 2 5 2:3:22", "pair 2 5 2:3:23");
    fs::write(&cp, text).unwrap();
    let (code, out, err) = sweep(&cp, "2");
    assert_eq!(code, EXIT_INCONSISTENT);
    assert!(out.is_empty());
    assert!(err.contains("digest mismatch"));
}

#[test]
fn wrong_recorded_hit_is_an_inconsistency() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("sweep.ckpt");
    let header = "pellsieve-checkpoint 1 a=2..=12 b=2..=60 n=2..=12 m=all\n";
    fs::write(&cp, format!("{header}pair 2 5 2:3:21\n")).unwrap();
    assert_eq!(sweep(&cp, "1").0, EXIT_INCONSISTENT);
}

#[test]
fn last_pair_is_recomputed_on_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("sweep.ckpt");
    let header = "pellsieve-checkpoint 1 a=2..=12 b=2..=60 n=2..=12 m=all\n";
    // A real solution lies in pair (2, 5); claiming it has none must be noticed.
    fs::write(&cp, format!("{header}pair 2 3\npair 2 5\n")).unwrap();
    let (code, _, err) = sweep(&cp, "1");
    assert_eq!(code, EXIT_INCONSISTENT);
    assert!(err.contains("(2, 5)"));
}

#[test]
fn checkpoint_from_another_query_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("sweep.ckpt");
    fs::write(&cp, "pellsieve-checkpoint 1 a=2..=3 b=2..=3 n=2..=3 m=1\n").unwrap();
    let (code, _, err) = sweep(&cp, "1");
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("different query"));
    assert_eq!(
        fs::read_to_string(&cp).unwrap(),
        "pellsieve-checkpoint 1 a=2..=3 b=2..=3 n=2..=3 m=1\n",
        "a foreign checkpoint must be left untouched"
    );
}

#[test]
fn garbage_lines_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("sweep.ckpt");
    let header = "pellsieve-checkpoint 1 a=2..=12 b=2..=60 n=2..=12 m=all\n";
    for body in ["pair 2\n", "pair 2 3 x:y\n", "hello\n", "pair 200 300\n", "pair 2 3\npair 2 3\n"] {
        fs::write(&cp, format!("{header}{body}")).unwrap();
        assert_eq!(sweep(&cp, "1").0, EXIT_INCONSISTENT, "{body:?}");
    }
}
