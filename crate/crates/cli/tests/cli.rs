use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_occner"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn normalize_is_idempotent() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("raw.txt"),
        "R&D Manager\n  Senior   SALES Director \n",
    )
    .unwrap();
    let once = ok(d.path(), &["normalize", "--in", "raw.txt"]);
    assert_eq!(once, "r&d manager\nsenior sales director\n");
    std::fs::write(d.path().join("once.txt"), &once).unwrap();
    assert_eq!(ok(d.path(), &["normalize", "--in", "once.txt"]), once);
}

#[test]
fn identical_files_score_100() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("t.txt"),
        "senior sales manager\nhead of marketing\n",
    )
    .unwrap();
    ok(d.path(), &["tag", "--in", "t.txt", "--out", "g.conll"]);
    let kv = ok(
        d.path(),
        &[
            "eval", "--gold", "g.conll", "--pred", "g.conll", "--format", "kv",
        ],
    );
    assert!(kv.lines().any(|l| l == "em_token=100.0000"), "{kv}");
    assert!(kv.lines().any(|l| l == "f1=100.0000"), "{kv}");
}

#[test]
fn misaligned_predictions_exit_6() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("a.txt"), "sales manager\n").unwrap();
    std::fs::write(
        d.path().join("b.txt"),
        "sales manager\nchief executive officer\n",
    )
    .unwrap();
    ok(d.path(), &["tag", "--in", "a.txt", "--out", "a.conll"]);
    ok(d.path(), &["tag", "--in", "b.txt", "--out", "b.conll"]);
    let out = run(
        d.path(),
        &["eval", "--gold", "a.conll", "--pred", "b.conll"],
    );
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let missing = run(d.path(), &["normalize", "--in", "nope.txt"]);
    assert_eq!(missing.status.code(), Some(3));
    let err = String::from_utf8_lossy(&missing.stderr);
    assert!(err.starts_with("occner: error: nope.txt"), "{err}");
    assert_eq!(err.lines().count(), 1);

    let unseeded = run(d.path(), &["synth", "--count", "3"]);
    assert_eq!(unseeded.status.code(), Some(2));
    assert_eq!(run(d.path(), &["--bogus"]).status.code(), Some(2));

    std::fs::write(d.path().join("bad.conll"), "sales\tE-RES\n").unwrap();
    let illegal = run(
        d.path(),
        &[
            "train",
            "crf",
            "--seed",
            "1",
            "--in",
            "bad.conll",
            "--out",
            "m.bin",
        ],
    );
    assert_eq!(illegal.status.code(), Some(4));

    std::fs::write(d.path().join("junk.bin"), "not a model").unwrap();
    let model = run(
        d.path(),
        &["predict", "--model", "junk.bin", "--in", "bad.conll"],
    );
    assert_eq!(model.status.code(), Some(8));
}

#[test]
fn seed_from_config_and_echoed() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("run.cfg"),
        "# synth settings\nseed = 5\ncount = 4\n",
    )
    .unwrap();
    let out = run(d.path(), &["--config", "run.cfg", "synth"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stderr).trim(), "seed=5");
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);
    let flag = ok(d.path(), &["synth", "--seed", "5", "--count", "4"]);
    assert_eq!(flag.as_bytes(), out.stdout.as_slice());

    std::fs::write(d.path().join("bad.cfg"), "momentum=0.9\n").unwrap();
    let bad = run(d.path(), &["--config", "bad.cfg", "synth", "--seed", "1"]);
    assert_eq!(bad.status.code(), Some(5));
}

#[test]
fn gridsearch_over_a_small_space() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(
        p,
        &["synth", "--seed", "3", "--count", "200", "--out", "t.txt"],
    );
    ok(p, &["tag", "--in", "t.txt", "--out", "all.conll"]);
    ok(
        p,
        &["split", "--seed", "3", "--in", "all.conll", "--out", "s"],
    );
    std::fs::write(p.join("space.txt"), "lr=0.1,0.01\nbatch=32\n").unwrap();
    let grid = &[
        "gridsearch",
        "crf",
        "--seed",
        "3",
        "--train",
        "s/train.conll",
        "--dev",
        "s/dev.conll",
        "--space",
        "space.txt",
        "--epochs",
        "2",
    ];
    let tsv = ok(p, grid);
    assert_eq!(ok(p, grid), tsv);
    let best = ok(p, &[&grid[..], &["--format", "kv"]].concat());
    assert!(best.contains("lr="), "{best}");
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines.len(), 3, "{tsv}");
    assert!(lines[0].starts_with("lr\tbatch\tprecision"));
    assert!(lines[1].starts_with("0.1\t32\t") && lines[1].ends_with("\tok"));
}

#[test]
fn stats_and_ngrams() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("t.txt"),
        "sales manager\nsenior sales manager\nhead of sales\n",
    )
    .unwrap();
    let kv = ok(d.path(), &["stats", "--in", "t.txt", "--format", "kv"]);
    assert!(kv.contains("overall.max=3"), "{kv}");
    let grams = ok(
        d.path(),
        &["ngrams", "--in", "t.txt", "-n", "2", "--top", "1"],
    );
    assert!(grams.contains("sales manager"), "{grams}");
    assert!(grams.trim_start().starts_with('2'), "{grams}");
}
