use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_simdoc");

fn simdoc(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("SIMDOC_SEED")
        .output()
        .expect("run simdoc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn leveled_fixture(dir: &Path, articles: usize, levels: &[u8]) {
    fs::create_dir_all(dir).unwrap();
    for a in 0..articles {
        for &l in levels {
            fs::write(
                dir.join(format!("art{a}.en.{l}.txt")),
                format!("Article {a} is written at level {l}. It has a second sentence."),
            )
            .unwrap();
        }
    }
}

/// Synthetic corpus, coherence model and a config skeleton in a temp dir.
struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace {
            dir: tempfile::tempdir().unwrap(),
        };
        let corpus = ws.path("syn.jsonl");
        let o = simdoc(&["build-corpus", "--scheme", "synthetic", "--seed", "1", "--n", "100", "--out", p(&corpus)]);
        assert!(o.status.success(), "{}", stderr(&o));
        let coh = ws.path("coh.jsonl");
        let o = simdoc(&[
            "build-corpus", "--scheme", "synthetic-coherence", "--seed", "2", "--n", "30", "--out", p(&coh),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let o = simdoc(&["train-coherence", "--in", p(&coh), "--out", p(&ws.path("coh.model"))]);
        assert!(o.status.success(), "{}", stderr(&o));
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn config(&self, name: &str, body: &str) -> PathBuf {
        let path = self.path(name);
        fs::write(
            &path,
            format!("corpus.syn = syn.jsonl\ncoherence_model = coh.model\ntest_corpus = syn\nfine_epochs = 2\n{body}"),
        )
        .unwrap();
        path
    }
}

#[test]
fn newsela_sl_on_five_articles_yields_twenty() {
    let dir = tempfile::tempdir().unwrap();
    leveled_fixture(&dir.path().join("in"), 5, &[0, 1, 2, 3, 4]);
    let out = dir.path().join("sl.jsonl");
    let o = simdoc(&["build-corpus", "--scheme", "newsela-sl", "--in", p(&dir.path().join("in")), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "20 instances\n");
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 20);

    let o = simdoc(&["build-corpus", "--scheme", "newsela-s", "--in", p(&dir.path().join("in")), "--out", p(&out)]);
    assert_eq!(stdout(&o), "5 instances\n");
}

#[test]
fn newsela_s_reports_skipped_articles() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    leveled_fixture(&input, 1, &[0, 1, 2]);
    let out = dir.path().join("s.jsonl");
    let o = simdoc(&["build-corpus", "--scheme", "newsela-s", "--in", p(&input), "--out", p(&out)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0 instances\nskipped 1 articles: art0\n");
}

#[test]
fn synthetic_corpus_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    for out in [&a, &b] {
        let o = simdoc(&["build-corpus", "--scheme", "synthetic", "--seed", "7", "--n", "12", "--out", p(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn missing_input_dir_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = simdoc(&[
        "build-corpus", "--scheme", "newsela-sl", "--in", p(&dir.path().join("absent")), "--out", p(&dir.path().join("x")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn article_without_complex_version_fails() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    leveled_fixture(&input, 1, &[1, 4]);
    let o = simdoc(&["build-corpus", "--scheme", "newsela-sl", "--in", p(&input), "--out", p(&dir.path().join("x"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("MissingComplex"), "{}", stderr(&o));
}

#[test]
fn score_prints_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src.txt");
    let simple = dir.path().join("simple.txt");
    fs::write(&src, "The committee approved the proposal yesterday. It was long.").unwrap();
    fs::write(&simple, "The group said yes. It was long.").unwrap();
    let args = ["score", "--source", p(&src), "--prediction", p(&simple), "--reference", p(&simple)];
    let o = simdoc(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains("D-SARI"));
    assert!(lines[1].trim_end().ends_with("100.000"), "{text}");

    let mut tsv = args.to_vec();
    tsv.extend(["--format", "tsv"]);
    let o = simdoc(&tsv);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "FKGL\tFRE\tSARI\tD-SARI");
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].split('\t').count(), 4);
}

#[test]
fn score_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src.txt");
    let empty = dir.path().join("empty.txt");
    fs::write(&src, "The cat sat.").unwrap();
    fs::write(&empty, "  \n").unwrap();
    let missing = dir.path().join("missing.txt");
    let o = simdoc(&["score", "--source", p(&src), "--prediction", p(&src), "--reference", p(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    let o = simdoc(&["score", "--source", p(&src), "--prediction", p(&empty), "--reference", p(&src)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NoText"), "{}", stderr(&o));
    let o = simdoc(&["score", "--source", p(&src), "--prediction", p(&src)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn train_coherence_rejects_single_class() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("gcdc.jsonl");
    fs::write(
        &input,
        "{\"text\": \"The cat sat. It slept.\", \"expert_ratings\": [3, 3, 3]}\n\
         {\"text\": \"A dog ran. It barked.\", \"expert_ratings\": [3, 2, 3]}\n",
    )
    .unwrap();
    let o = simdoc(&["train-coherence", "--in", p(&input), "--out", p(&dir.path().join("m"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("DegenerateLabels"), "{}", stderr(&o));
}

#[test]
fn zero_regime_writes_an_empty_trace() {
    let ws = Workspace::new();
    let config = ws.config("zero.cfg", "regime = zero\n");
    let out = ws.path("zero-out");
    let o = simdoc(&["run-experiment", "--config", p(&config), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("loss_trace.jsonl")).unwrap(), "");
    assert!(stdout(&o).contains("D-SARI"));
    assert!(stderr(&o).contains("regime = zero"));
    for f in ["report.tsv", "report.txt", "config.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn config_echo_reproduces_the_run() {
    let ws = Workspace::new();
    let config = ws.config("fine.cfg", "regime = fine\nstages = syn\nloss_mode = S_R_C\nseed = 3\n");
    let first = ws.path("first");
    let o = simdoc(&["run-experiment", "--config", p(&config), "--out", p(&first)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(first.join("loss_trace.jsonl")).unwrap().lines().count(), 2);

    let echoed = ws.path("echoed.cfg");
    fs::copy(first.join("config.txt"), &echoed).unwrap();
    let second = ws.path("second");
    let o = simdoc(&["run-experiment", "--config", p(&echoed), "--out", p(&second)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["report.tsv", "loss_trace.jsonl", "config.txt"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn overrides_and_seed_environment() {
    let ws = Workspace::new();
    let config = ws.config("base.cfg", "regime = fine\nstages = syn\n");
    let out = ws.path("o");
    let o = simdoc(&[
        "run-experiment", "--config", p(&config), "--out", p(&out), "--fine_epochs", "1", "--loss_mode", "S_C",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let echo = fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(echo.contains("fine_epochs = 1") && echo.contains("loss_mode = S_C"), "{echo}");

    let o = Command::new(BIN)
        .args(["run-experiment", "--config", p(&config), "--out", p(&out)])
        .env("SIMDOC_SEED", "99")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(out.join("config.txt")).unwrap().contains("seed = 99"));
}

#[test]
fn readability_mode_needs_labels() {
    let ws = Workspace::new();
    let unlabelled = ws.path("s.jsonl");
    let o = simdoc(&[
        "build-corpus", "--scheme", "synthetic", "--seed", "1", "--n", "100", "--pairing", "newsela-s", "--out",
        p(&unlabelled),
    ]);
    assert!(o.status.success());
    let config = ws.path("sr.cfg");
    fs::write(
        &config,
        "corpus.syn = s.jsonl\ncoherence_model = coh.model\ntest_corpus = syn\nregime = fine\nstages = syn\nloss_mode = S_R\n",
    )
    .unwrap();
    let o = simdoc(&["run-experiment", "--config", p(&config), "--out", p(&ws.path("sr"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ModeMismatch"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_two() {
    let ws = Workspace::new();
    let bad = ws.config("bad.cfg", "regime = sometimes\n");
    let o = simdoc(&["run-experiment", "--config", p(&bad), "--out", p(&ws.path("bad"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ConfigError"), "{}", stderr(&o));

    let no_model = ws.path("nomodel.cfg");
    fs::write(&no_model, "corpus.syn = syn.jsonl\ntest_corpus = syn\n").unwrap();
    let o = simdoc(&["run-experiment", "--config", p(&no_model), "--out", p(&ws.path("nm"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn external_echo_backend_runs_through_the_harness() {
    let echo = PathBuf::from(BIN).with_file_name("echo-backend");
    if !echo.exists() {
        let o = Command::new(env!("CARGO"))
            .args(["build", "-q", "-p", "simdoc-core", "--bin", "echo-backend"])
            .status()
            .unwrap();
        assert!(o.success());
    }
    let ws = Workspace::new();
    let config = ws.config(
        "ext.cfg",
        &format!("regime = fine\nstages = syn:1\nbackend = external:{}\n", echo.display()),
    );
    let o = simdoc(&["run-experiment", "--config", p(&config), "--out", p(&ws.path("ext"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("echo-backend"));
}

#[test]
fn compare_flags_the_best_regime() {
    let ws = Workspace::new();
    let configs = [
        ws.config("zero.cfg", "regime = zero\n"),
        ws.config("few.cfg", "regime = few\nstages = syn\n"),
        ws.config("fine.cfg", "regime = fine\nstages = syn\n"),
    ];
    let out = ws.path("cmp");
    let mut args = vec!["compare", "--format", "tsv", "--out", p(&out)];
    for c in &configs {
        args.extend(["--config", p(c)]);
    }
    let o = simdoc(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3, "{text}");
    assert!(rows[2].contains("\tfine\t") && rows[2].ends_with('*'), "{text}");
    assert!(!rows[0].ends_with('*'));
    assert_eq!(fs::read_to_string(out.join("comparison.tsv")).unwrap(), text);
    assert!(out.join("run03-fine").join("report.tsv").exists());
}

#[test]
fn compare_rejects_different_test_corpora() {
    let ws = Workspace::new();
    let a = ws.config("a.cfg", "regime = zero\n");
    let b = ws.path("b.cfg");
    fs::write(&b, "corpus.other = syn.jsonl\ncoherence_model = coh.model\ntest_corpus = other\n").unwrap();
    let o = simdoc(&["compare", "--config", p(&a), "--config", p(&b)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ConfigError"), "{}", stderr(&o));
}
