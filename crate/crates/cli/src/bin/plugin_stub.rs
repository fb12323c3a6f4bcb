//! Deterministic stand-ins for reranker and translator plugins, speaking the
//! line-delimited JSON protocol over stdin/stdout.
//!
//! ```text
//! wikidir-plugin-stub identity-reranker
//! wikidir-plugin-stub reverse-reranker
//! wikidir-plugin-stub broken-reranker      # drops one id from every reply
//! wikidir-plugin-stub echo-translator
//! wikidir-plugin-stub lookup-translator <dialect<TAB>title<TAB>german tsv>
//! ```
//!
//! The lookup translator replaces whole-word occurrences of dialect titles
//! with their German titles, longest title first.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::process::ExitCode;

use serde_json::{json, Value};
use wikidir::ingest::load_title_map;

type Lexicon = BTreeMap<String, Vec<(String, String)>>;

enum Mode {
    Identity,
    Reverse,
    Broken,
    Echo,
    Lookup(Lexicon),
}

fn load_lexicon(path: &str) -> Result<Lexicon, String> {
    let file = File::open(path).map_err(|e| format!("{path}: {e}"))?;
    let (map, _) = load_title_map(BufReader::new(file)).map_err(|e| format!("{path}: {e}"))?;
    let mut lexicon = Lexicon::new();
    for (dialect, title, german) in map.iter() {
        lexicon.entry(dialect.to_string()).or_default().push((title.to_owned(), german.to_owned()));
    }
    for pairs in lexicon.values_mut() {
        pairs.sort_by(|a, b| b.0.chars().count().cmp(&a.0.chars().count()).then_with(|| a.0.cmp(&b.0)));
    }
    Ok(lexicon)
}

fn is_boundary(c: Option<char>) -> bool {
    c.is_none_or(|c| !c.is_alphanumeric())
}

/// Replaces whole-word matches of each title in one left-to-right pass, so a
/// replacement is never rewritten by a shorter title.
fn translate(text: &str, pairs: &[(String, String)]) -> String {
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    'scan: while i < text.len() {
        let prev = text[..i].chars().next_back();
        if is_boundary(prev) {
            for (title, german) in pairs {
                if text[i..].starts_with(title.as_str()) && is_boundary(text[i + title.len()..].chars().next()) {
                    out.push_str(german);
                    i += title.len();
                    continue 'scan;
                }
            }
        }
        let c = text[i..].chars().next().expect("i is on a char boundary");
        out.push(c);
        i += c.len_utf8();
    }
    out
}

fn ids(request: &Value) -> Vec<Value> {
    request["candidates"]
        .as_array()
        .map(|cs| cs.iter().map(|c| c["id"].clone()).collect())
        .unwrap_or_default()
}

fn answer(mode: &Mode, request: &Value) -> Value {
    match mode {
        Mode::Identity => json!({"qid": request["qid"], "ordering": ids(request)}),
        Mode::Reverse => {
            let mut ordering = ids(request);
            ordering.reverse();
            json!({"qid": request["qid"], "ordering": ordering})
        }
        Mode::Broken => {
            let mut ordering = ids(request);
            ordering.pop();
            json!({"qid": request["qid"], "ordering": ordering})
        }
        Mode::Echo => json!({"id": request["id"], "text": request["text"]}),
        Mode::Lookup(lexicon) => {
            let text = request["text"].as_str().unwrap_or_default();
            let dialect = request["source_dialect"].as_str().unwrap_or_default();
            let translated = lexicon.get(dialect).map_or_else(|| text.to_owned(), |pairs| translate(text, pairs));
            json!({"id": request["id"], "text": translated})
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mode = match args.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["identity-reranker"] => Mode::Identity,
        ["reverse-reranker"] => Mode::Reverse,
        ["broken-reranker"] => Mode::Broken,
        ["echo-translator"] => Mode::Echo,
        ["lookup-translator", path] => match load_lexicon(path) {
            Ok(lexicon) => Mode::Lookup(lexicon),
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
        },
        _ => {
            eprintln!("usage: wikidir-plugin-stub identity-reranker|reverse-reranker|broken-reranker|echo-translator|lookup-translator <tsv>");
            return ExitCode::from(2);
        }
    };
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout().lock();
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        let reply = match serde_json::from_str::<Value>(&line) {
            Ok(request) => answer(&mode, &request),
            Err(e) => json!({"error": e.to_string()}),
        };
        if writeln!(stdout, "{reply}").and_then(|()| stdout.flush()).is_err() {
            break;
        }
    }
    ExitCode::SUCCESS
}
