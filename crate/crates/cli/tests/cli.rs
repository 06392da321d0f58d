use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_relaxtag"));
    c.env("RUST_LOG", "error").env_remove("RUST_BACKTRACE");
    c
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A generated corpus split into train and test files.
fn corpus(dir: &TempDir, words: &str) -> (PathBuf, PathBuf) {
    let all = dir.path().join("all.txt");
    run(&[
        "synth",
        "--spec",
        s(&data("synth_trend.json")),
        "--words",
        words,
        "--seed",
        "5",
        "-o",
        s(&all),
    ]);
    let text = fs::read_to_string(&all).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let cut = lines.len() * 4 / 5;
    let (train, test) = (dir.path().join("train.txt"), dir.path().join("test.txt"));
    fs::write(&train, lines[..cut].join("\n") + "\n").unwrap();
    fs::write(&test, lines[cut..].join("\n") + "\n").unwrap();
    (train, test)
}

fn record_value(text: &str, model: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(&format!("eval model={model} ")))
        .unwrap_or_else(|| panic!("no record for {model} in\n{text}"));
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn synth_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = run(&[
        "synth",
        "--spec",
        s(&data("synth_bigram.json")),
        "--words",
        "500",
        "--seed",
        "3",
    ]);
    let b = run(&[
        "synth",
        "--spec",
        s(&data("synth_bigram.json")),
        "--words",
        "500",
        "--seed",
        "3",
    ]);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.split_whitespace().count() >= 500);
    assert!(text.lines().all(|l| l.ends_with("._E")));
    let path = dir.path().join("c.txt");
    fs::write(&path, &text).unwrap();
    let st = stdout(&run(&["stats", "--corpus", s(&path)]));
    assert!(st.contains("ambiguous words"));
    let record = st.lines().find(|l| l.starts_with("stats ")).unwrap();
    assert!(record.contains(&format!("words={}", text.split_whitespace().count())));
}

#[test]
fn artifact_pipeline_matches_training_in_one_step() {
    let dir = TempDir::new().unwrap();
    let (train, test) = corpus(&dir, "20000");
    let p = |n: &str| dir.path().join(n);
    run(&["lexicon", "build", "--corpus", s(&train), "-o", s(&p("lex.txt"))]);
    run(&[
        "ngrams",
        "collect",
        "--corpus",
        s(&train),
        "--order",
        "2",
        "-o",
        s(&p("bi.txt")),
    ]);
    run(&[
        "ngrams",
        "collect",
        "--corpus",
        s(&train),
        "--order",
        "3",
        "-o",
        s(&p("tri.txt")),
    ]);
    let learned = run(&[
        "trees",
        "learn",
        "--corpus",
        s(&train),
        "-o",
        s(&p("trees.txt")),
        "--constraints",
        s(&p("c.txt")),
    ]);
    assert!(stdout(&learned).lines().all(|l| l.starts_with("tree class=")));
    run(&[
        "constraints",
        "compile",
        "--trees",
        s(&p("trees.txt")),
        "--lexicon",
        s(&p("lex.txt")),
        "-o",
        s(&p("c2.txt")),
    ]);
    let n_lines = |f: &str| fs::read_to_string(p(f)).unwrap().lines().count();
    assert_eq!(n_lines("c.txt"), n_lines("c2.txt"));

    let models = ["ML", "HMM", "B", "BC", "BTC"];
    let (lex, bi, tri, c2) = (p("lex.txt"), p("bi.txt"), p("tri.txt"), p("c2.txt"));
    let mut from_artifacts = vec![
        "eval",
        "--lexicon",
        s(&lex),
        "--bigrams",
        s(&bi),
        "--trigrams",
        s(&tri),
        "--learned",
        s(&c2),
        "--gold",
        s(&test),
        "--models",
    ];
    from_artifacts.extend(models);
    let a = stdout(&run(&from_artifacts));
    let mut from_train = vec!["eval", "--train", s(&train), "--gold", s(&test), "--models"];
    from_train.extend(models);
    let b = stdout(&run(&from_train));
    for m in models {
        let (x, y) = (record_value(&a, m, "overall"), record_value(&b, m, "overall"));
        assert!((x - y).abs() < 1e-9, "{m}: {x} vs {y}");
    }
    assert!(record_value(&a, "BC", "ambiguous") > record_value(&a, "ML", "ambiguous"));
    assert!(a.lines().next().unwrap().starts_with("model"));
}

#[test]
fn tag_then_score_predicted_file() {
    let dir = TempDir::new().unwrap();
    let (train, test) = corpus(&dir, "8000");
    let gold = fs::read_to_string(&test).unwrap();
    let raw: String = gold
        .lines()
        .map(|l| {
            l.split_whitespace()
                .map(|t| t.rsplit_once('_').unwrap().0)
                .collect::<Vec<_>>()
                .join(" ")
                + "\n"
        })
        .collect();
    let input = dir.path().join("raw.txt");
    let out = dir.path().join("tagged.txt");
    let diag = dir.path().join("diag.txt");
    fs::write(&input, raw).unwrap();
    run(&[
        "tag",
        "--train",
        s(&train),
        "--hand",
        s(&data("trend_hand.constraints")),
        "--models",
        "B,C,H",
        "--input",
        s(&input),
        "-o",
        s(&out),
        "--diagnostics",
        s(&diag),
    ]);
    let tagged = fs::read_to_string(&out).unwrap();
    assert_eq!(tagged.lines().count(), gold.lines().count());
    let records = fs::read_to_string(&diag).unwrap();
    assert_eq!(records.lines().count(), gold.lines().count());
    assert!(records.lines().all(|l| l.split_whitespace().count() == 4));

    let scored = stdout(&run(&[
        "eval",
        "--train",
        s(&train),
        "--gold",
        s(&test),
        "--predicted",
        s(&out),
    ]));
    let direct = stdout(&run(&[
        "eval",
        "--train",
        s(&train),
        "--hand",
        s(&data("trend_hand.constraints")),
        "--gold",
        s(&test),
        "--models",
        "BCH",
    ]));
    let name = out.display().to_string();
    assert_eq!(
        record_value(&scored, &name, "overall"),
        record_value(&direct, "BCH", "overall")
    );
}

#[test]
fn constraint_check_and_errors() {
    let dir = TempDir::new().unwrap();
    let canon = dir.path().join("canon.txt");
    let out = run(&[
        "constraints",
        "check",
        "--tags",
        "DT NN VBN IN RB JJ JJS JJR , :",
        s(&data("auxiliary.constraints")),
        "-o",
        s(&canon),
    ]);
    let text = stdout(&out);
    assert!(text.contains("macros=1 constraints=3 repeated=1"), "{text}");
    let again = run(&[
        "constraints",
        "check",
        "--tags",
        "DT NN VBN IN RB JJ JJS JJR , :",
        s(&canon),
    ]);
    assert!(stdout(&again).contains("constraints=3 repeated=1"));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1.0 ([DT]) <NN>;\n2.0 ([DT]) <NN>\n").unwrap();
    let out = bin()
        .args(["constraints", "check", "--tags", "DT NN", s(&bad)])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");

    let out = bin().args(["eval", "--gold", "x.txt"]).output().unwrap();
    assert!(!out.status.success(), "model source is required");
    let out = bin()
        .args(["tag", "--lexicon", "l", "--input", "i", "--models", "BX"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--models"));
}

#[test]
fn missing_source_for_model_letter_is_reported() {
    let dir = TempDir::new().unwrap();
    let (train, test) = corpus(&dir, "3000");
    let lex = dir.path().join("lex.txt");
    run(&["lexicon", "build", "--corpus", s(&train), "-o", s(&lex)]);
    let out = bin()
        .args(["eval", "--lexicon", s(&lex), "--gold", s(&test), "--models", "BC"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let ok = stdout(&run(&[
        "eval",
        "--lexicon",
        s(&lex),
        "--gold",
        s(&test),
        "--models",
        "ML",
    ]));
    assert!(record_value(&ok, "ML", "overall") > 50.0);
}

#[test]
fn lexicon_filter_applies_corrections() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("c.txt");
    fs::write(&corpus, "as_IN as_RB as_JJ that_DT that_NN\nthat_IN that_WDT\n").unwrap();
    let lex = dir.path().join("lex.txt");
    run(&["lexicon", "build", "--corpus", s(&corpus), "-o", s(&lex)]);
    let filtered = stdout(&run(&[
        "lexicon",
        "filter",
        "--lexicon",
        s(&lex),
        "--corrections",
        s(&data("corrections.txt")),
    ]));
    assert!(filtered.lines().any(|l| l == "as IN 1 RB 1"), "{filtered}");
    assert!(filtered.lines().any(|l| l == "that DT 1 IN 1 WDT 1"), "{filtered}");
}
