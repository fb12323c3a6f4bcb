//! Runs the `wikidir` binary against a scratch copy of the mini-wiki fixture.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

pub const CHAIN: [&str; 7] = [
    "ingest",
    "make-collection",
    "mine-candidates",
    "build-dictionary",
    "analysis-qrels",
    "search",
    "evaluate",
];

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/miniwiki")
}

pub fn golden(name: &str) -> String {
    fs::read_to_string(fixture_dir().join("golden").join(name)).unwrap_or_else(|e| panic!("golden {name}: {e}"))
}

pub fn stub() -> &'static str {
    env!("CARGO_BIN_EXE_wikidir-plugin-stub")
}

/// File contents without `#` comment lines.
pub fn body(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

pub struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    /// Inputs only: dumps, title map, judgment log and config.
    pub fn new() -> Self {
        let dir = tempfile::tempdir().expect("temp dir");
        let src = fixture_dir();
        fs::create_dir_all(dir.path().join("dumps")).unwrap();
        for entry in fs::read_dir(src.join("dumps")).unwrap() {
            let path = entry.unwrap().path();
            fs::copy(&path, dir.path().join("dumps").join(path.file_name().unwrap())).unwrap();
        }
        for name in ["langlinks.tsv", "judgments.jsonl", "wikidir.toml"] {
            fs::copy(src.join(name), dir.path().join(name)).unwrap();
        }
        Self { dir }
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn out(&self, rel: &str) -> PathBuf {
        self.dir.path().join("out").join(rel)
    }

    pub fn config(&self) -> PathBuf {
        self.dir.path().join("wikidir.toml")
    }

    pub fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_wikidir"))
            .arg("--config")
            .arg(self.config())
            .args(args)
            .current_dir(self.path())
            .env("RUST_LOG", "warn")
            .output()
            .expect("wikidir runs")
    }

    /// Runs one subcommand and fails with its stderr unless it exits 0.
    pub fn stage(&self, args: &[&str]) -> Result<String, String> {
        let output = self.run(args);
        if output.status.success() {
            Ok(String::from_utf8_lossy(&output.stdout).into_owned())
        } else {
            Err(format!("{args:?} exited {:?}: {}", output.status.code(), String::from_utf8_lossy(&output.stderr)))
        }
    }

    pub fn chain(&self) -> Result<Duration, String> {
        let start = Instant::now();
        for stage in CHAIN {
            self.stage(&[stage])?;
        }
        Ok(start.elapsed())
    }

    pub fn translator_override(&self) -> String {
        let langlinks = self.path().join("langlinks.tsv");
        format!("plugins.translator.address=\"{} lookup-translator {}\"", stub(), langlinks.display())
    }

    pub fn reranker_overrides(&self, mode: &str) -> [String; 2] {
        [
            "plugins.reranker.transport=\"subprocess-stdio\"".to_owned(),
            format!("plugins.reranker.address=\"{} {mode}\"", stub()),
        ]
    }

    /// Every file under `out/`, relative path → bytes, sorted.
    pub fn snapshot(&self) -> Vec<(String, Vec<u8>)> {
        let mut files = Vec::new();
        let mut stack = vec![self.path().join("out")];
        while let Some(dir) = stack.pop() {
            for entry in fs::read_dir(&dir).unwrap() {
                let path = entry.unwrap().path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    let rel = path.strip_prefix(self.path()).unwrap().display().to_string();
                    files.push((rel, fs::read(&path).unwrap()));
                }
            }
        }
        files.sort();
        files
    }
}

/// Pipeline outputs and the golden files they must equal once headers are
/// dropped.
pub const GOLDEN_PAIRS: [(&str, &str); 12] = [
    ("collection/queries.tsv", "queries.tsv"),
    ("collection/queries_crosslingual.tsv", "queries_crosslingual.tsv"),
    ("collection/qrels_monolingual.txt", "qrels_monolingual.txt"),
    ("collection/qrels_crosslingual.txt", "qrels_crosslingual.txt"),
    ("collection/qrels_analysis_without.txt", "qrels_analysis_without.txt"),
    ("collection/qrels_analysis_with.txt", "qrels_analysis_with.txt"),
    ("collection/splits.tsv", "splits.tsv"),
    ("dictionary/candidates.tsv", "candidates.tsv"),
    ("dictionary/dictionary.tsv", "dictionary.tsv"),
    ("runs/bm25.run", "bm25.run"),
    ("runs/bm25.eval.tsv", "bm25.eval.tsv"),
    ("corpus/corpus.jsonl", "articles.tsv"),
];

/// `id<TAB>title<TAB>german` per ingested article, comparable to the
/// golden article list.
pub fn article_rows(corpus: &Path) -> String {
    let mut rows: Vec<String> = body(corpus)
        .lines()
        .map(|line| {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            format!(
                "{}\t{}\t{}\n",
                v["id"].as_str().unwrap(),
                v["canonical_title"].as_str().unwrap(),
                v["german_title"].as_str().unwrap_or("")
            )
        })
        .collect();
    rows.sort();
    rows.concat()
}

/// Mismatching golden comparisons, one message each.
pub fn golden_mismatches(ws: &Workspace) -> Vec<String> {
    let mut problems = Vec::new();
    for (output, golden_name) in GOLDEN_PAIRS {
        let path = ws.out(output);
        let actual = if golden_name == "articles.tsv" { article_rows(&path) } else { body(&path) };
        let mut expected = golden(golden_name);
        if golden_name == "articles.tsv" {
            let mut rows: Vec<&str> = expected.lines().collect();
            rows.sort();
            expected = rows.iter().map(|r| format!("{r}\n")).collect();
        }
        if actual != expected {
            let first = actual
                .lines()
                .zip(expected.lines())
                .find(|(a, e)| a != e)
                .map(|(a, e)| format!("got {a:?}, want {e:?}"))
                .unwrap_or_else(|| format!("{} vs {} lines", actual.lines().count(), expected.lines().count()));
            problems.push(format!("{output} differs from golden {golden_name}: {first}"));
        }
    }
    problems
}
