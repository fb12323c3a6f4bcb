//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Oracles here are brute-force rewrites, never calls back into the
//! code under test for the quantity being checked.

#[path = "../common/mod.rs"]
mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wikidir::collection::{discretize_scores, jenks_breaks, read_documents, Document, Qrels, QrelsSide};
use wikidir::dialect::{cohen_kappa, read_judgments, Decision, Judgment};
use wikidir::eval::{ndcg_at_k, read_qrels, read_run, GainMode};
use wikidir::lexindex::{contains_phrase, tokenize, Bm25Params, InvertedIndex};
use wikidir::runtime::{rerank_sliding_window, FnEndpoint, PluginError, RunList};

use common::Workspace;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

/// The fixture pipeline, run once and shared by the criteria that read its
/// artifacts.
struct Pipeline {
    ws: Workspace,
    elapsed: Duration,
    /// Every artifact as written by the chain, before later criteria add runs.
    snapshot: Vec<(String, Vec<u8>)>,
}

fn pipeline() -> Result<&'static Pipeline, String> {
    static CELL: OnceLock<Result<Pipeline, String>> = OnceLock::new();
    CELL.get_or_init(|| {
        let ws = Workspace::new();
        let elapsed = ws.chain()?;
        let snapshot = ws.snapshot();
        Ok(Pipeline { ws, elapsed, snapshot })
    })
    .as_ref()
    .map_err(Clone::clone)
}

fn load_docs(ws: &Workspace) -> Result<Vec<Document>, String> {
    let path = ws.out("collection/documents.jsonl");
    let file = fs::File::open(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    read_documents(std::io::BufReader::new(file)).map_err(|e| e.to_string())
}

fn load_qrels(ws: &Workspace, name: &str, side: QrelsSide) -> Result<Qrels, String> {
    let path = ws.out(&format!("collection/{name}"));
    let file = fs::File::open(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    read_qrels(std::io::BufReader::new(file), side).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- Jenks

fn ssd(values: &[i64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<i64>() as f64 / n;
    values.iter().map(|&v| (v as f64 - mean).powi(2)).sum()
}

/// Direct SSD of every segment `values[i..j]`.
struct Segments {
    n: usize,
    cost: Vec<f64>,
}

impl Segments {
    fn new(values: &[i64]) -> Self {
        let n = values.len();
        let mut cost = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..n {
            for j in i + 1..=n {
                cost[i * (n + 1) + j] = ssd(&values[i..j]);
            }
        }
        Self { n, cost }
    }

    fn partition(&self, cuts: &[usize]) -> f64 {
        let mut total = 0.0;
        let mut from = 0;
        for &to in cuts.iter().chain([self.n].iter()) {
            total += self.cost[from * (self.n + 1) + to];
            from = to;
        }
        total
    }
}

/// Every strictly increasing choice of `r` cut positions from `1..n`, in
/// lexicographic order.
fn cut_sets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(from: usize, n: usize, r: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == r {
            out.push(current.clone());
            return;
        }
        for c in from..n {
            current.push(c);
            go(c + 1, n, r, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, r, &mut Vec::new(), &mut out);
    out
}

fn multisets(domain: &[i64], max_len: usize) -> Vec<Vec<i64>> {
    fn go(domain: &[i64], start: usize, max_len: usize, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if !current.is_empty() {
            out.push(current.clone());
        }
        if current.len() == max_len {
            return;
        }
        for i in start..domain.len() {
            current.push(domain[i]);
            go(domain, i, max_len, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    go(domain, 0, max_len, &mut Vec::new(), &mut out);
    out
}

fn check_jenks_case(values: &[i64], k: usize, cache: &mut BTreeMap<(usize, usize), Vec<Vec<usize>>>) -> Outcome {
    let n = values.len();
    let distinct = values.iter().collect::<BTreeSet<_>>().len();
    let floats: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    let ranges = jenks_breaks(&floats, k).map_err(|e| format!("{values:?} k={k}: {e}"))?;
    let mut cuts = Vec::new();
    let mut at = 0;
    for r in &ranges[..ranges.len() - 1] {
        at += r.count;
        cuts.push(at);
    }
    let segments = Segments::new(values);
    let dp_cost = segments.partition(&cuts);

    // Unrestricted optimum over all contiguous partitions into at most k
    // classes.
    let mut unrestricted = f64::INFINITY;
    for r in 0..k.min(n) {
        for set in cache.entry((n, r)).or_insert_with(|| cut_sets(n, r)).iter() {
            unrestricted = unrestricted.min(segments.partition(set));
        }
    }
    let tol = 1e-9 * unrestricted.max(1.0);
    ensure((dp_cost - unrestricted).abs() <= tol, || {
        format!("{values:?} k={k}: dp cost {dp_cost} vs brute force {unrestricted}")
    })?;

    // Expected partition: exactly min(k, distinct) classes, equal values
    // together, lexicographically earliest cuts among the optimal ones.
    let classes = k.min(distinct);
    let sets = cache.entry((n, classes - 1)).or_insert_with(|| cut_sets(n, classes - 1));
    let admissible = |set: &&Vec<usize>| set.iter().all(|&c| values[c - 1] != values[c]);
    let best = sets.iter().filter(admissible).map(|s| segments.partition(s)).fold(f64::INFINITY, f64::min);
    let expected = sets
        .iter()
        .filter(admissible)
        .find(|s| segments.partition(s) <= best + 1e-9 * best.max(1.0))
        .expect("an admissible partition exists");
    ensure(&cuts == expected, || format!("{values:?} k={k}: breaks {cuts:?}, expected {expected:?}"))
}

fn jenks_sweep() -> Outcome {
    let start = Instant::now();
    let domain = [0, 1, 2, 4, 8, 9, 16];
    let mut cache = BTreeMap::new();
    let arrays = multisets(&domain, 12);
    let mut cases = 0usize;
    for values in &arrays {
        for k in 1..=5 {
            check_jenks_case(values, k, &mut cache)?;
            cases += 1;
        }
    }
    let ranges = jenks_breaks(&[1.0, 2.0, 4.0, 8.0, 9.0], 2).map_err(|e| e.to_string())?;
    let groups: Vec<(f64, f64)> = ranges.iter().map(|r| (r.lower, r.upper)).collect();
    ensure(groups == [(1.0, 4.0), (8.0, 9.0)], || format!("[1,2,4,8,9] k=2 gave {groups:?}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("sweep took {elapsed:?}"))?;
    println!("  {cases} cases over {} arrays in {:.1}s", arrays.len(), elapsed.as_secs_f64());
    Ok(())
}

// ---------------------------------------------------------------- BM25

/// Lucene BM25 from raw token lists: a linear scan with no index.
fn brute_bm25(docs: &[(String, Vec<String>)], query: &[String], k1: f64, b: f64) -> Vec<(String, f64)> {
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(|(_, t)| t.len()).sum::<usize>() as f64 / n;
    let terms: BTreeSet<&String> = query.iter().collect();
    let mut scored = Vec::new();
    for (id, tokens) in docs {
        let mut score = 0.0;
        let mut matched = false;
        for term in &terms {
            let tf = tokens.iter().filter(|t| t == term).count() as f64;
            if tf == 0.0 {
                continue;
            }
            matched = true;
            let df = docs.iter().filter(|(_, t)| t.contains(term)).count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * tokens.len() as f64 / avgdl));
        }
        if matched {
            scored.push((id.clone(), score));
        }
    }
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    scored
}

fn bm25() -> Outcome {
    let params = Bm25Params { k1: 0.9, b: 0.4 };
    let toy = [("d1", "alpha beta"), ("d2", "gamma delta")];
    let index = InvertedIndex::build(toy, params).map_err(|e| e.to_string())?;
    let score = index.bm25_score(&tokenize("alpha"), "d1").map_err(|e| e.to_string())?;
    ensure((score - 2f64.ln()).abs() <= 1e-9, || format!("toy score {score}, expected ln 2"))?;

    let p = pipeline()?;
    let docs = load_docs(&p.ws)?;
    ensure(docs.len() <= 100, || format!("{} fixture documents", docs.len()))?;
    let index = InvertedIndex::build(docs.iter().map(|d| (d.doc_id.as_str(), d.text.as_str())), params).map_err(|e| e.to_string())?;
    let raw: Vec<(String, Vec<String>)> = docs
        .iter()
        .map(|d| (d.doc_id.clone(), tokenize(&d.text).iter().map(|t| t.as_str().to_owned()).collect()))
        .collect();
    let mut texts: Vec<String> = common::golden("articles.tsv")
        .lines()
        .flat_map(|l| l.split('\t').skip(1).map(str::to_owned).collect::<Vec<_>>())
        .collect();
    texts.extend(["Kanton Lozärn Bärn", "de und vo", "Stadt"].map(str::to_owned));
    texts.retain(|t| !t.is_empty());
    for text in &texts {
        let query: Vec<String> = tokenize(text).iter().map(|t| t.as_str().to_owned()).collect();
        let expected = brute_bm25(&raw, &query, 0.9, 0.4);
        let got = index.search(text, docs.len(), None).map_err(|e| e.to_string())?;
        ensure(got.len() == expected.len(), || format!("{text:?}: {} hits vs {}", got.len(), expected.len()))?;
        for (g, (id, s)) in got.iter().zip(&expected) {
            ensure(&g.doc_id == id && (g.score - s).abs() <= 1e-9, || {
                format!("{text:?}: got {} {} expected {id} {s}", g.doc_id, g.score)
            })?;
        }
    }
    println!("  {} fixture queries against {} documents", texts.len(), docs.len());
    Ok(())
}

// ---------------------------------------------------------------- labels

fn phrasal_gate() -> Outcome {
    let p = pipeline()?;
    let docs = load_docs(&p.ws)?;
    let als3 = docs.iter().find(|d| d.doc_id == "als-3").ok_or("als-3 missing from documents")?;
    let tokens = tokenize(&als3.text);
    let query = tokenize("Kanton Lozärn");
    ensure(query.iter().all(|t| tokens.contains(t)), || "als-3 lacks a query term".into())?;
    ensure(!contains_phrase(&tokens, &query), || "als-3 contains the phrase".into())?;
    let qrels = load_qrels(&p.ws, "qrels_monolingual.txt", QrelsSide::Monolingual)?;
    let labels = qrels.get("als-1").ok_or("no labels for als-1")?;
    ensure(!labels.contains_key("als-3"), || format!("als-3 labeled {}", labels["als-3"]))?;
    ensure(labels.get("als-1") == Some(&6), || "als-1 lacks its self label".into())
}

fn label_structure() -> Outcome {
    let p = pipeline()?;
    for (file, side) in [
        ("qrels_monolingual.txt", QrelsSide::Monolingual),
        ("qrels_crosslingual.txt", QrelsSide::CrossLingual),
    ] {
        let qrels = load_qrels(&p.ws, file, side)?;
        for (qid, labels) in &qrels.labels {
            ensure(labels.values().all(|l| (1..=6).contains(l)), || format!("{file} {qid}: label outside 1..6"))?;
            let sixes: Vec<&String> = labels.iter().filter(|(_, &l)| l == 6).map(|(d, _)| d).collect();
            ensure(sixes == [qid], || format!("{file} {qid}: label-6 documents {sixes:?}"))?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let transforms = [(2.0, 0.0), (0.5, -3.0), (1000.0, 42.0), (3.7, 1e-3), (1e-3, 7.0)];
    for case in 0..500 {
        let n = rng.gen_range(1..40);
        let scores: BTreeMap<String, f64> =
            (0..n).map(|i| (format!("d{i}"), f64::from(rng.gen_range(0..50u32)) * 0.25)).collect();
        let base = discretize_scores(&scores);
        for &(a, b) in &transforms {
            let moved: BTreeMap<String, f64> = scores.iter().map(|(d, s)| (d.clone(), a * s + b)).collect();
            ensure(discretize_scores(&moved) == base, || format!("case {case}: labels change under {a}x+{b}"))?;
        }
    }
    Ok(())
}

fn dual_monotonicity() -> Outcome {
    let p = pipeline()?;
    let without = load_qrels(&p.ws, "qrels_analysis_without.txt", QrelsSide::CrossLingual)?;
    let with = load_qrels(&p.ws, "qrels_analysis_with.txt", QrelsSide::CrossLingual)?;
    let analysis: Vec<String> = common::golden("analysis_qids.txt").lines().map(str::to_owned).collect();
    ensure(!analysis.is_empty(), || "no analysis queries".into())?;
    for qid in &analysis {
        let w: BTreeSet<&String> = without.get(qid).map(|l| l.keys().collect()).unwrap_or_default();
        let v: BTreeSet<&String> = with.get(qid).map(|l| l.keys().collect()).unwrap_or_default();
        ensure(w.is_subset(&v), || format!("{qid}: {:?} relevant without variants only", w.difference(&v)))?;
    }
    for name in ["qrels_analysis_without.txt", "qrels_analysis_with.txt"] {
        let got = common::body(&p.ws.out(&format!("collection/{name}")));
        ensure(got == common::golden(name), || format!("{name} differs from the oracle"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- nDCG

fn one_query(labels: &[(&str, u8)], ranking: &[&str]) -> (Qrels, RunList) {
    let mut qrels = Qrels::new(QrelsSide::CrossLingual);
    qrels.labels.insert("q".into(), labels.iter().map(|(d, l)| (d.to_string(), *l)).collect());
    let mut run = RunList::new("t");
    run.insert_ordering("q", ranking.iter().map(|d| d.to_string()));
    (qrels, run)
}

/// nDCG@k written out directly: linear gain, log2(position + 1) discount.
fn brute_ndcg(labels: &BTreeMap<String, u8>, ranking: &[String], k: usize) -> f64 {
    let dcg = |gains: &[f64]| -> f64 { gains.iter().take(k).enumerate().map(|(i, g)| g / ((i + 2) as f64).log2()).sum() };
    let got: Vec<f64> = ranking.iter().map(|d| f64::from(labels.get(d).copied().unwrap_or(0))).collect();
    let mut ideal: Vec<f64> = labels.values().map(|&l| f64::from(l)).collect();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let best = dcg(&ideal);
    if best == 0.0 {
        0.0
    } else {
        dcg(&got) / best
    }
}

fn ndcg() -> Outcome {
    let score = |q: &Qrels, r: &RunList| ndcg_at_k(r, q, 10, GainMode::Linear).map(|e| e.mean).map_err(|e| e.to_string());

    let (q, r) = one_query(&[("a", 6), ("b", 3), ("c", 1)], &["a", "b", "c"]);
    let ideal = score(&q, &r)?;
    ensure((ideal - 1.0).abs() <= 1e-12, || format!("ideal ranking scored {ideal}"))?;

    let (q, r) = one_query(&[("d1", 6), ("d2", 3)], &["d2", "d1"]);
    let hand = score(&q, &r)?;
    ensure((hand - 0.8598).abs() <= 1e-3, || format!("hand case scored {hand}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..1000 {
        let n = rng.gen_range(2..25);
        let mut ranking: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
        ranking.shuffle(&mut rng);
        let mut labels = BTreeMap::new();
        for d in &ranking {
            if rng.gen_bool(0.7) {
                labels.insert(d.clone(), rng.gen_range(1..=6u8));
            }
        }
        if labels.is_empty() {
            continue;
        }
        let i = rng.gen_range(0..n - 1);
        let j = rng.gen_range(i + 1..n);
        let label = |d: &String| labels.get(d).copied().unwrap_or(0);
        let mut swapped = ranking.clone();
        // Move the better of the two documents to the earlier position.
        if label(&ranking[i]) < label(&ranking[j]) {
            swapped.swap(i, j);
        }
        let mut qrels = Qrels::new(QrelsSide::CrossLingual);
        qrels.labels.insert("q".into(), labels.clone());
        let mut before = RunList::new("t");
        before.insert_ordering("q", ranking.clone());
        let mut after = RunList::new("t");
        after.insert_ordering("q", swapped.clone());
        let (x, y) = (score(&qrels, &before)?, score(&qrels, &after)?);
        ensure(y >= x - 1e-12, || format!("case {case}: swap lowered nDCG {x} -> {y}"))?;
        let oracle = brute_ndcg(&labels, &ranking, 10);
        ensure((x - oracle).abs() <= 1e-12, || format!("case {case}: {x} vs oracle {oracle}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- reranker

fn ordering_of(request: &Value) -> Vec<Value> {
    request["candidates"].as_array().map(|c| c.iter().map(|x| x["id"].clone()).collect()).unwrap_or_default()
}

fn run_of(len: usize) -> RunList {
    let mut run = RunList::new("first");
    run.insert_ranked("q", (0..len).map(|i| (format!("d{i:03}"), (len - i) as f64)));
    run
}

fn reranker() -> Outcome {
    let queries = BTreeMap::from([("q".to_owned(), "query".to_owned())]);
    let texts = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for len in 0..=120 {
        let run = run_of(len);
        let input: Vec<&str> = run.ranked_ids("q");

        let mut identity = FnEndpoint(|r: &Value| Ok::<_, PluginError>(json!({"qid": r["qid"], "ordering": ordering_of(r)})));
        let out = rerank_sliding_window(&run, &queries, &texts, &mut identity, 16, 8, "id").map_err(|e| e.to_string())?;
        ensure(out.run.ranked_ids("q") == input, || format!("len {len}: identity changed the order"))?;
        ensure(out.warnings.is_empty(), || format!("len {len}: warnings {:?}", out.warnings))?;

        let mut shuffler = FnEndpoint(|r: &Value| {
            let mut ids = ordering_of(r);
            ids.shuffle(&mut rng);
            Ok::<_, PluginError>(json!({"qid": r["qid"], "ordering": ids}))
        });
        let out = rerank_sliding_window(&run, &queries, &texts, &mut shuffler, 16, 8, "shuffled").map_err(|e| e.to_string())?;
        let mut got: Vec<&str> = out.run.ranked_ids("q");
        ensure(got.len() == len, || format!("len {len}: output has {} entries", got.len()))?;
        got.sort_unstable();
        ensure(got == input, || format!("len {len}: output is not a permutation"))?;

        let mut calls = 0;
        let mut reverse = FnEndpoint(|r: &Value| {
            calls += 1;
            let mut ids = ordering_of(r);
            ids.reverse();
            Ok::<_, PluginError>(json!({"qid": r["qid"], "ordering": ids}))
        });
        let window = len.max(8) + len % 3;
        let out = rerank_sliding_window(&run, &queries, &texts, &mut reverse, window, 8, "rev").map_err(|e| e.to_string())?;
        let expected_calls = usize::from(len > 0);
        ensure(calls == expected_calls, || format!("len {len} window {window}: {calls} calls"))?;
        let mut reversed = input.clone();
        reversed.reverse();
        ensure(out.run.ranked_ids("q") == reversed, || format!("len {len}: single window differs from one call"))?;
    }

    // The identity subprocess plugin leaves the fixture run untouched.
    let p = pipeline()?;
    let [transport, address] = p.ws.reranker_overrides("identity-reranker");
    p.ws.stage(&["--set", &transport, "--set", &address, "rerank", "--name", "identity"])?;
    let read = |name: &str| -> Result<RunList, String> {
        let file = fs::File::open(p.ws.out(&format!("runs/{name}.run"))).map_err(|e| e.to_string())?;
        read_run(std::io::BufReader::new(file)).map_err(|e| e.to_string())
    };
    let (first, reranked) = (read("bm25")?, read("identity")?);
    ensure(first.entries.keys().eq(reranked.entries.keys()), || "query sets differ".into())?;
    for qid in first.entries.keys() {
        ensure(first.ranked_ids(qid) == reranked.ranked_ids(qid), || format!("{qid}: identity plugin reordered"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- kappa

fn judgment(annotator: &str, candidate: &str, decision: Decision) -> Judgment {
    Judgment {
        annotator_id: annotator.to_owned(),
        candidate_id: candidate.to_owned(),
        decision,
        timestamp: "2024-01-01T00:00:00Z".parse().unwrap(),
    }
}

fn kappa() -> Outcome {
    use Decision::{Accept, Reject, Skip};
    let mut log = Vec::new();
    let cells = [(Accept, Accept, 20), (Reject, Reject, 20), (Accept, Reject, 5), (Reject, Accept, 5)];
    for (a, b, count) in cells {
        for _ in 0..count {
            let id = format!("c{}", log.len());
            log.push(judgment("a", &id, a));
            log.push(judgment("b", &id, b));
        }
    }
    log.push(judgment("a", "skipped", Accept));
    log.push(judgment("b", "skipped", Skip));
    let ab = cohen_kappa(&log, "a", "b").map_err(|e| e.to_string())?;
    let ba = cohen_kappa(&log, "b", "a").map_err(|e| e.to_string())?;
    ensure(ab.n_items == 50, || format!("{} co-judged items", ab.n_items))?;
    ensure((ab.kappa - 0.6).abs() <= 1e-9, || format!("20/20/5/5 kappa {}", ab.kappa))?;
    ensure(ab.kappa == ba.kappa, || format!("asymmetric: {} vs {}", ab.kappa, ba.kappa))?;

    let perfect: Vec<Judgment> = (0..12)
        .flat_map(|i| {
            let d = if i % 3 == 0 { Reject } else { Accept };
            [judgment("x", &format!("c{i}"), d), judgment("y", &format!("c{i}"), d)]
        })
        .collect();
    let k = cohen_kappa(&perfect, "x", "y").map_err(|e| e.to_string())?.kappa;
    ensure(k == 1.0, || format!("perfect agreement kappa {k}"))?;

    // The fixture judgment log through the CLI.
    let fixture = fs::read(common::fixture_dir().join("judgments.jsonl")).map_err(|e| e.to_string())?;
    let log = read_judgments(fixture.as_slice()).map_err(|e| e.to_string())?;
    let direct = cohen_kappa(&log, "anna", "beni").map_err(|e| e.to_string())?;
    let p = pipeline()?;
    let line = p.ws.stage(&["kappa", "--a", "beni", "--b", "anna"])?;
    let report: Value = serde_json::from_str(line.trim()).map_err(|e| format!("{line:?}: {e}"))?;
    let cli = report["kappa"].as_f64().ok_or("no kappa in CLI output")?;
    ensure((direct.kappa - 0.6).abs() <= 1e-9 && (cli - 0.6).abs() <= 1e-9, || {
        format!("fixture kappa {} / CLI {cli}", direct.kappa)
    })
}

// ---------------------------------------------------------------- pipeline

fn end_to_end() -> Outcome {
    let p = pipeline()?;
    ensure(p.elapsed < Duration::from_secs(60), || format!("pipeline took {:?}", p.elapsed))?;
    let problems = common::golden_mismatches(&p.ws);
    ensure(problems.is_empty(), || problems.join("; "))?;

    let again = Workspace::new();
    let elapsed = again.chain()?;
    ensure(elapsed < Duration::from_secs(60), || format!("second run took {elapsed:?}"))?;
    let (first, second) = (&p.snapshot, again.snapshot());
    let names = |s: &[(String, Vec<u8>)]| s.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
    ensure(names(first) == names(&second), || format!("runs wrote different files: {:?} vs {:?}", names(first), names(&second)))?;
    for ((name, a), (_, b)) in first.iter().zip(&second) {
        ensure(a == b, || format!("{name} differs between runs"))?;
    }
    println!("  {} artifacts, {:.2}s per run", first.len(), p.elapsed.as_secs_f64());
    Ok(())
}

fn translate_test() -> Outcome {
    let ws = Workspace::new();
    ws.chain()?;
    ws.stage(&["--set", &ws.translator_override(), "translate"])?;
    let table = ws.stage(&["stats"])?;
    let mut rates: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
    for line in table.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        if let [dialect, stat, value, n] = cols[..] {
            if let Some(kind) = stat.strip_prefix("exact_match_").and_then(|s| s.strip_suffix("_percent")) {
                let value: f64 = value.parse().map_err(|_| format!("bad value in {line:?}"))?;
                rates.insert((dialect.to_owned(), kind.to_owned()), (value, n.parse().unwrap_or(0)));
            }
        }
    }
    let golden = common::golden("exact_match.tsv");
    for line in golden.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        let [dialect, before, after, n] = cols[..] else {
            return Err(format!("bad golden line {line:?}"));
        };
        let original = rates.get(&(dialect.into(), "original".into())).ok_or(format!("{dialect}: no original rate"))?;
        let translated = rates.get(&(dialect.into(), "translated".into())).ok_or(format!("{dialect}: no translated rate"))?;
        ensure(translated.0 > original.0, || format!("{dialect}: {} -> {}", original.0, translated.0))?;
        let shown = (format!("{:.2}", original.0), format!("{:.2}", translated.0), original.1.to_string());
        ensure(shown == (before.into(), after.into(), n.into()), || format!("{dialect}: {shown:?} vs golden {line:?}"))?;
        println!("  {dialect}: {before}% -> {after}% of {n} judged pairs");
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("jenks-oracle-equivalence", jenks_sweep),
        ("bm25-closed-form-and-oracle-order", bm25),
        ("phrasal-gate-excludes-kanton-bern", phrasal_gate),
        ("label-structure", label_structure),
        ("dual-assessment-monotonicity", dual_monotonicity),
        ("ndcg-at-10", ndcg),
        ("sliding-window-reranker", reranker),
        ("cohen-kappa", kappa),
        ("end-to-end-fixture", end_to_end),
        ("translate-test-plumbing", translate_test),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        match check() {
            Ok(()) => println!("PASS {name} ({:.2}s)", start.elapsed().as_secs_f64()),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
