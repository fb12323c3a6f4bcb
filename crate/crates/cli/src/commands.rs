//! Subcommand implementations. Each reads the documented files under the
//! configured directories and writes its artifacts with a provenance header.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use serde_json::json;
use wikidir::collection::{
    crosslingualize, extract_document, extract_query, read_documents, read_queries, read_split, split_dataset,
    synthesize_monolingual_qrels_parallel, write_documents, write_queries, write_split, SplitRatios,
};
use wikidir::dialect::{
    apply_judgments, build_analysis_split, cohen_kappa, exact_match_rate, extract_candidates, read_candidates,
    read_dictionary_tsv, read_judgments, synthesize_dual_qrels, write_candidates, DualMode, ExactMatchStats, Policy,
    RedirectTable,
};
use wikidir::eval::{
    collection_stats, ndcg_at_k, read_qrels, read_run, write_eval_tsv, write_qrels, write_run, write_stats_tsv,
    StatsInputs,
};
use wikidir::ingest::{
    article_order, articles_from_pages, load_title_map, open_dump, parse_dump, read_corpus, redirect_map,
    write_corpus, FetchMode, IngestReport, RedirectFetcher, RetryPolicy,
};
use wikidir::runtime::{connect, first_stage, rerank_sliding_window, translate_corpus, TranslationCache};
use wikidir::{
    Article, CandidateMention, DialectCode, DialectDictionary, Document, InvertedIndex, Qrels, QrelsSide, Query,
    Split, SplitAssignment, TitleMap,
};
use wikidir_annotate::{serve, ServiceConfig, Store};

use crate::output::{missing, open, Ctx};

const CORPUS: &str = "corpus.jsonl";
const REDIRECTS: &str = "redirects.tsv";
const INGEST_REPORT: &str = "ingest_report.txt";
const QUERIES: &str = "queries.tsv";
const QUERIES_CL: &str = "queries_crosslingual.tsv";
const DOCUMENTS: &str = "documents.jsonl";
const DOCUMENTS_TRANSLATED: &str = "documents_translated.jsonl";
const QRELS_MONO: &str = "qrels_monolingual.txt";
const QRELS_CL: &str = "qrels_crosslingual.txt";
const QRELS_WITHOUT: &str = "qrels_analysis_without.txt";
const QRELS_WITH: &str = "qrels_analysis_with.txt";
const SPLITS: &str = "splits.tsv";
const STATS: &str = "stats.tsv";
const TRANSLATION_CACHE: &str = "translation_cache.jsonl";
const INDEX: &str = "index.txt";
const CANDIDATES: &str = "candidates.tsv";
const DICTIONARY_TSV: &str = "dictionary.tsv";
const DICTIONARY_JSON: &str = "dictionary.json";

impl Ctx {
    fn corpus_file(&self, name: &str) -> PathBuf {
        self.config.paths.corpus.join(name)
    }

    fn collection_file(&self, name: &str) -> PathBuf {
        self.config.paths.qrels.join(name)
    }

    fn dictionary_file(&self, name: &str) -> PathBuf {
        self.config.paths.dictionary.join(name)
    }

    fn index_file(&self) -> PathBuf {
        self.config.paths.index.join(INDEX)
    }

    /// A bare name refers to a file in the runs directory.
    fn run_file(&self, name_or_path: &str) -> PathBuf {
        if name_or_path.contains('/') || name_or_path.ends_with(".run") {
            PathBuf::from(name_or_path)
        } else {
            self.config.paths.runs.join(format!("{name_or_path}.run"))
        }
    }

    /// Corpus articles of the configured dialects.
    fn articles(&self) -> anyhow::Result<Vec<Article>> {
        let dialects: BTreeSet<&DialectCode> = self.config.dialects.iter().collect();
        let mut articles = read_corpus(open(&self.corpus_file(CORPUS))?)?;
        articles.retain(|a| dialects.contains(&a.dialect));
        Ok(articles)
    }

    /// Queries with their German titles as retrieval text, in corpus order.
    fn crosslingual_queries(&self, articles: &[Article]) -> Vec<Query> {
        let queries: Vec<Query> = articles.iter().filter_map(extract_query).collect();
        crosslingualize(&Qrels::new(QrelsSide::Monolingual), &queries).queries
    }

    fn split_ratios(&self) -> SplitRatios {
        SplitRatios {
            dev: self.config.dev_ratio,
            test: self.config.test_ratio,
        }
    }

    fn split(&self) -> anyhow::Result<SplitAssignment> {
        Ok(read_split(open(&self.collection_file(SPLITS))?)?)
    }

    /// Explicit documents win; otherwise the explicit or default index file;
    /// otherwise the collection's documents.
    fn index(&self, docs: Option<&Path>, index: Option<&Path>) -> anyhow::Result<InvertedIndex> {
        if let Some(docs) = docs {
            return index_documents(&read_docs(docs)?, self);
        }
        let path = index.map_or_else(|| self.index_file(), Path::to_owned);
        if path.exists() || index.is_some() {
            let loaded = InvertedIndex::read_from(open(&path)?).with_context(|| format!("loading {}", path.display()))?;
            if loaded.params() != self.config.bm25 {
                log::warn!("{} was built with {:?}; configuration says {:?}", path.display(), loaded.params(), self.config.bm25);
            }
            return Ok(loaded);
        }
        index_documents(&read_docs(&self.collection_file(DOCUMENTS))?, self)
    }
}

fn index_documents(docs: &[Document], ctx: &Ctx) -> anyhow::Result<InvertedIndex> {
    Ok(InvertedIndex::build(docs.iter().map(|d| (d.doc_id.as_str(), d.text.as_str())), ctx.config.bm25)?)
}

fn read_docs(path: &Path) -> anyhow::Result<Vec<Document>> {
    read_documents(open(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_redirects(path: &Path) -> anyhow::Result<RedirectTable> {
    let mut table = RedirectTable::new();
    if !path.exists() {
        log::warn!("{} missing; link targets are taken as written", path.display());
        return Ok(table);
    }
    let text = std::fs::read_to_string(path)?;
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let [dialect, source, target] = line.split('\t').collect::<Vec<_>>()[..] else {
            bail!("{}:{}: expected dialect<TAB>source<TAB>target", path.display(), n + 1);
        };
        table.entry(DialectCode::new(dialect)?).or_default().insert(source.to_owned(), target.to_owned());
    }
    Ok(table)
}

fn read_candidates_file(path: &Path) -> anyhow::Result<Vec<CandidateMention>> {
    read_candidates(open(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_qrels_file(path: &Path, side: QrelsSide) -> anyhow::Result<Qrels> {
    read_qrels(open(path)?, side).with_context(|| format!("parsing {}", path.display()))
}

fn read_judgment_log(path: &Path) -> anyhow::Result<Vec<wikidir::Judgment>> {
    if !path.exists() {
        log::warn!("judgment log {} missing; treating as empty", path.display());
        return Ok(Vec::new());
    }
    read_judgments(open(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// Dump files for `dialect` in `dir`: `<dialect>wiki*.xml[.bz2]` exports or
/// a `<dialect>.jsonl` corpus.
fn inputs_for(dir: &Path, dialect: &DialectCode) -> anyhow::Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let dump = name.starts_with(&format!("{dialect}wiki")) && (name.ends_with(".xml") || name.ends_with(".xml.bz2"));
        if dump || name == format!("{dialect}.jsonl") {
            found.push(path);
        }
    }
    found.sort();
    if found.is_empty() {
        bail!("no {dialect}wiki*.xml[.bz2] dump or {dialect}.jsonl corpus in {}", dir.display());
    }
    Ok(found)
}

pub fn ingest(ctx: &Ctx) -> anyhow::Result<()> {
    let config = &ctx.config;
    let mut report = IngestReport::default();
    let titles = match &config.paths.langlinks {
        Some(path) => {
            let (titles, conflicts) = load_title_map(open(path)?).with_context(|| format!("parsing {}", path.display()))?;
            for c in conflicts.iter().filter(|c| c.is_conflicting()) {
                report.push(format!("{}:{:?} maps to {:?}; ignored {:?}", c.dialect, c.dialect_title, c.kept, c.ignored));
            }
            titles
        }
        None => TitleMap::default(),
    };
    let fetcher = config
        .online_redirects
        .then(|| RedirectFetcher::new(FetchMode::Online, &config.redirect_cache, RetryPolicy::default()));

    let mut articles = Vec::new();
    let mut redirects = RedirectTable::new();
    for dialect in &config.dialects {
        let mut dialect_articles = Vec::new();
        let mut edges = BTreeMap::new();
        for path in inputs_for(&config.paths.dumps, dialect)? {
            if path.extension().is_some_and(|e| e == "jsonl") {
                let mut read = read_corpus(open(&path)?).with_context(|| format!("parsing {}", path.display()))?;
                read.retain(|a| &a.dialect == dialect);
                dialect_articles.extend(read);
            } else {
                let pages = parse_dump(open_dump(&path)?, dialect).with_context(|| format!("parsing {}", path.display()))?;
                edges.extend(redirect_map(&pages));
                dialect_articles.extend(articles_from_pages(&pages, &titles, &mut report));
            }
        }
        if let Some(fetcher) = &fetcher {
            let known: BTreeSet<&str> = dialect_articles.iter().map(|a| a.canonical_title.as_str()).collect();
            let unresolved: BTreeSet<&str> = dialect_articles
                .iter()
                .flat_map(|a| a.links.iter().map(|l| l.target_title.as_str()))
                .filter(|t| !known.contains(t) && !edges.contains_key(*t))
                .collect();
            let host = format!("{dialect}.wikipedia.org");
            let fetched: Vec<(String, String)> = unresolved
                .into_iter()
                .filter_map(|t| Some((t.to_owned(), fetcher.fetch_redirect_online(t, &host)?)))
                .collect();
            edges.extend(fetched);
        }
        log::info!("{dialect}: {} articles, {} redirects", dialect_articles.len(), edges.len());
        articles.extend(dialect_articles);
        if !edges.is_empty() {
            redirects.insert(dialect.clone(), edges);
        }
    }
    articles.sort_by_key(article_order);
    if let Some(pair) = articles.windows(2).find(|w| w[0].id == w[1].id) {
        bail!("duplicate article id {}", pair[0].id);
    }

    ctx.write_artifact(&ctx.corpus_file(CORPUS), |out| Ok(write_corpus(out, &articles)?))?;
    ctx.write_artifact(&ctx.corpus_file(REDIRECTS), |out| {
        for (dialect, edges) in &redirects {
            for (source, target) in edges {
                writeln!(out, "{dialect}\t{source}\t{target}")?;
            }
        }
        Ok(())
    })?;
    ctx.write_artifact(&ctx.corpus_file(INGEST_REPORT), |out| Ok(out.write_all(report.render().as_bytes())?))?;
    println!("articles\t{}", articles.len());
    println!("redirects\t{}", redirects.values().map(BTreeMap::len).sum::<usize>());
    println!("report_lines\t{}", report.lines.len());
    Ok(())
}

#[derive(Args)]
pub struct BuildIndexArgs {
    /// Documents file (JSONL); defaults to the collection's documents.
    #[arg(long)]
    docs: Option<PathBuf>,
    /// Index file to write; defaults to `<paths.index>/index.txt`.
    #[arg(long)]
    output: Option<PathBuf>,
}

pub fn build_index(ctx: &Ctx, args: BuildIndexArgs) -> anyhow::Result<()> {
    let docs = read_docs(&args.docs.unwrap_or_else(|| ctx.collection_file(DOCUMENTS)))?;
    let index = index_documents(&docs, ctx)?;
    let output = args.output.unwrap_or_else(|| ctx.index_file());
    ctx.write_artifact(&output, |out| Ok(index.write_to(out)?))?;
    println!("documents\t{}", index.doc_count());
    Ok(())
}

fn read_dictionary_if_present(ctx: &Ctx) -> anyhow::Result<Option<DialectDictionary>> {
    let path = ctx.dictionary_file(DICTIONARY_TSV);
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(read_dictionary_tsv(open(&path)?).with_context(|| format!("parsing {}", path.display()))?))
}

pub fn make_collection(ctx: &Ctx) -> anyhow::Result<()> {
    let config = &ctx.config;
    let articles = ctx.articles()?;
    let queries: Vec<Query> = articles.iter().filter_map(extract_query).collect();
    let docs: Vec<Document> = articles.iter().map(extract_document).collect();
    let index = index_documents(&docs, ctx)?;
    let mono = synthesize_monolingual_qrels_parallel(&index, &queries, config.workers);
    let cl = crosslingualize(&mono, &queries);
    if !cl.dropped.is_empty() {
        log::info!("{} queries without a German title dropped from the cross-lingual set", cl.dropped.len());
    }
    let analysis = match read_dictionary_if_present(ctx)? {
        Some(dict) => build_analysis_split(&cl.queries, &dict),
        None => BTreeSet::new(),
    };
    let split = split_dataset(&cl.queries, &analysis, config.seed, ctx.split_ratios());

    ctx.write_artifact(&ctx.collection_file(QUERIES), |out| {
        Ok(write_queries(out, queries.iter().map(|q| (q.qid.as_str(), q.text.as_str(), &q.dialect)))?)
    })?;
    ctx.write_artifact(&ctx.collection_file(QUERIES_CL), |out| {
        Ok(write_queries(out, cl.queries.iter().map(|q| (q.qid.as_str(), q.text.as_str(), &q.dialect)))?)
    })?;
    ctx.write_artifact(&ctx.collection_file(DOCUMENTS), |out| Ok(write_documents(out, &docs)?))?;
    ctx.write_artifact(&ctx.collection_file(QRELS_MONO), |out| Ok(write_qrels(out, &mono)?))?;
    ctx.write_artifact(&ctx.collection_file(QRELS_CL), |out| Ok(write_qrels(out, &cl.qrels)?))?;
    ctx.write_artifact(&ctx.collection_file(SPLITS), |out| Ok(write_split(out, &split)?))?;
    ctx.write_artifact(&ctx.index_file(), |out| Ok(index.write_to(out)?))?;

    let [train, dev, test, analysis] = split.counts();
    println!("queries\t{}", queries.len());
    println!("crosslingual_queries\t{}", cl.queries.len());
    println!("documents\t{}", docs.len());
    println!("judgments\t{}", mono.judgment_count());
    println!("split\ttrain={train} dev={dev} test={test} analysis={analysis}");
    Ok(())
}

pub fn mine_candidates(ctx: &Ctx) -> anyhow::Result<()> {
    let articles = ctx.articles()?;
    let redirects = read_redirects(&ctx.corpus_file(REDIRECTS))?;
    let candidates = extract_candidates(&articles, &redirects);
    ctx.write_artifact(&ctx.dictionary_file(CANDIDATES), |out| Ok(write_candidates(out, &candidates)?))?;
    let mut per_dialect: BTreeMap<&DialectCode, usize> = BTreeMap::new();
    for c in &candidates {
        *per_dialect.entry(&c.dialect).or_default() += 1;
    }
    for (dialect, n) in per_dialect {
        println!("{dialect}\tcandidates\t{n}");
    }
    Ok(())
}

#[derive(Args)]
pub struct ServeArgs {
    /// Address to listen on; overrides `annotation.bind`.
    #[arg(long)]
    bind: Option<SocketAddr>,
    /// Directory with the UI bundle; overrides `annotation.static_dir`.
    #[arg(long)]
    static_dir: Option<PathBuf>,
}

pub fn serve_annotation(ctx: &Ctx, args: ServeArgs) -> anyhow::Result<()> {
    let config = &ctx.config;
    let candidates = read_candidates_file(&ctx.dictionary_file(CANDIDATES))?;
    let log_path = &config.paths.judgments;
    if let Some(parent) = log_path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut store = Store::open(candidates, log_path)?;
    if ctx.corpus_file(CORPUS).exists() {
        let titles = ctx
            .articles()?
            .into_iter()
            .filter_map(|a| Some(((a.dialect, a.canonical_title), a.german_title?)))
            .collect();
        store = store.with_german_titles(titles);
    }
    let bind = match args.bind {
        Some(bind) => bind,
        None => config.bind.parse().context("annotation.bind")?,
    };
    let static_dir = args.static_dir.or_else(|| config.static_dir.clone());
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(serve(store, ServiceConfig { bind, static_dir }))?;
    Ok(())
}

#[derive(Args)]
pub struct DictionaryArgs {
    /// `any-accept` or `majority`; defaults to `annotation.policy`, else
    /// any-accept for a single annotator and majority otherwise.
    #[arg(long)]
    policy: Option<Policy>,
}

pub fn build_dictionary(ctx: &Ctx, args: DictionaryArgs) -> anyhow::Result<()> {
    let candidates = read_candidates_file(&ctx.dictionary_file(CANDIDATES))?;
    let log = read_judgment_log(&ctx.config.paths.judgments)?;
    let annotators: BTreeSet<&str> = log.iter().map(|j| j.annotator_id.as_str()).collect();
    let policy = args
        .policy
        .or(ctx.config.policy)
        .unwrap_or_else(|| Policy::default_for(annotators.len()));
    let mut dict = apply_judgments(&candidates, &log, policy)?;
    if ctx.corpus_file(CORPUS).exists() {
        dict.attach_german_titles(&ctx.articles()?);
    }
    ctx.write_artifact(&ctx.dictionary_file(DICTIONARY_TSV), |out| Ok(dict.write_tsv(out)?))?;

    let json_path = ctx.dictionary_file(DICTIONARY_JSON);
    let document = json!({
        "provenance": ctx.provenance(),
        "policy": policy,
        "entries": dict.to_json(),
    });
    std::fs::write(&json_path, serde_json::to_string_pretty(&document)? + "\n").with_context(|| format!("writing {}", json_path.display()))?;
    log::info!("wrote {}", json_path.display());
    println!("policy\t{policy}");
    println!("annotators\t{}", annotators.len());
    println!("entities\t{}", dict.entity_count());
    println!("variants\t{}", dict.variant_count());
    Ok(())
}

pub fn analysis_qrels(ctx: &Ctx) -> anyhow::Result<()> {
    let config = &ctx.config;
    let articles = ctx.articles()?;
    let queries = ctx.crosslingual_queries(&articles);
    let dict_path = ctx.dictionary_file(DICTIONARY_TSV);
    let dict = read_dictionary_if_present(ctx)?.with_context(|| format!("{} missing; run build-dictionary first", dict_path.display()))?;
    let index = ctx.index(None, None)?;
    let analysis = build_analysis_split(&queries, &dict);

    let mut without = Qrels::new(QrelsSide::CrossLingual);
    let mut with = Qrels::new(QrelsSide::CrossLingual);
    for query in queries.iter().filter(|q| analysis.contains(&q.qid)) {
        let variants = dict.variants(&query.dialect, &query.entity_title);
        without.labels.insert(query.qid.clone(), synthesize_dual_qrels(&index, query, variants, DualMode::Without));
        with.labels.insert(query.qid.clone(), synthesize_dual_qrels(&index, query, variants, DualMode::With));
    }
    let split = split_dataset(&queries, &analysis, config.seed, ctx.split_ratios());
    ctx.write_artifact(&ctx.collection_file(QRELS_WITHOUT), |out| Ok(write_qrels(out, &without)?))?;
    ctx.write_artifact(&ctx.collection_file(QRELS_WITH), |out| Ok(write_qrels(out, &with)?))?;
    ctx.write_artifact(&ctx.collection_file(SPLITS), |out| Ok(write_split(out, &split)?))?;
    println!("analysis_queries\t{}", analysis.len());
    println!("judgments_without\t{}", without.judgment_count());
    println!("judgments_with\t{}", with.judgment_count());
    Ok(())
}

#[derive(Args)]
pub struct SearchArgs {
    /// Queries file; defaults to the cross-lingual queries.
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Only search queries assigned to this split.
    #[arg(long)]
    split: Option<Split>,
    /// Index these documents instead of loading the index file.
    #[arg(long)]
    docs: Option<PathBuf>,
    /// Index file to load.
    #[arg(long)]
    index: Option<PathBuf>,
    /// Run name: tag and file name under the runs directory.
    #[arg(long, default_value = "bm25")]
    name: String,
}

fn read_query_texts(ctx: &Ctx, path: Option<PathBuf>, split: Option<Split>) -> anyhow::Result<Vec<(String, String)>> {
    let path = path.unwrap_or_else(|| ctx.collection_file(QUERIES_CL));
    let mut queries: Vec<(String, String)> = read_queries(open(&path)?)
        .with_context(|| format!("parsing {}", path.display()))?
        .into_iter()
        .map(|q| (q.qid, q.text))
        .collect();
    if let Some(split) = split {
        let assignment = ctx.split()?;
        queries.retain(|(qid, _)| assignment.assignment.get(qid) == Some(&split));
    }
    Ok(queries)
}

pub fn search(ctx: &Ctx, args: SearchArgs) -> anyhow::Result<()> {
    let queries = read_query_texts(ctx, args.queries, args.split)?;
    let index = ctx.index(args.docs.as_deref(), args.index.as_deref())?;
    let run = first_stage(&index, queries.iter().map(|(q, t)| (q.as_str(), t.as_str())), ctx.config.depth, &args.name)?;
    let path = ctx.run_file(&args.name);
    ctx.write_artifact(&path, |out| Ok(write_run(out, &run)?))?;
    println!("queries\t{}", queries.len());
    println!("run\t{}", path.display());
    Ok(())
}

#[derive(Args)]
pub struct RerankArgs {
    /// Input run: a name under the runs directory or a path.
    #[arg(long, default_value = "bm25")]
    run: String,
    /// Queries file; defaults to the cross-lingual queries.
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Documents whose text is sent to the reranker.
    #[arg(long)]
    docs: Option<PathBuf>,
    /// Output run name.
    #[arg(long, default_value = "rerank")]
    name: String,
}

pub fn rerank(ctx: &Ctx, args: RerankArgs) -> anyhow::Result<()> {
    let config = &ctx.config;
    let def = config.reranker.as_ref().ok_or_else(|| missing("plugins.reranker", "no reranker plugin configured"))?;
    let input = read_run(open(&ctx.run_file(&args.run))?)?;
    let queries: BTreeMap<String, String> = read_query_texts(ctx, args.queries, None)?.into_iter().collect();
    let docs = read_docs(&args.docs.unwrap_or_else(|| ctx.collection_file(DOCUMENTS)))?;
    let texts: BTreeMap<String, String> = docs.into_iter().map(|d| (d.doc_id, d.text)).collect();
    let mut endpoint = connect(def)?;
    let outcome = rerank_sliding_window(&input, &queries, &texts, endpoint.as_mut(), config.window, config.step, &args.name)?;
    for warning in &outcome.warnings {
        log::warn!("{warning}");
    }
    let path = ctx.run_file(&args.name);
    ctx.write_artifact(&path, |out| Ok(write_run(out, &outcome.run)?))?;
    println!("calls\t{}", outcome.calls);
    println!("warnings\t{}", outcome.warnings.len());
    println!("run\t{}", path.display());
    Ok(())
}

#[derive(Args)]
pub struct TranslateArgs {
    /// Documents to translate; defaults to the collection's documents.
    #[arg(long)]
    docs: Option<PathBuf>,
    /// Output documents file.
    #[arg(long)]
    output: Option<PathBuf>,
}

pub fn translate(ctx: &Ctx, args: TranslateArgs) -> anyhow::Result<()> {
    let def = ctx.config.translator.as_ref().ok_or_else(|| missing("plugins.translator", "no translator plugin configured"))?;
    let docs = read_docs(&args.docs.unwrap_or_else(|| ctx.collection_file(DOCUMENTS)))?;
    std::fs::create_dir_all(&ctx.config.paths.qrels)?;
    let mut cache = TranslationCache::open(&ctx.collection_file(TRANSLATION_CACHE))?;
    let mut endpoint = connect(def)?;
    let outcome = translate_corpus(&docs, endpoint.as_mut(), &mut cache)?;
    for (id, reason) in &outcome.failures {
        log::warn!("{id} kept untranslated: {reason}");
    }
    let output = args.output.unwrap_or_else(|| ctx.collection_file(DOCUMENTS_TRANSLATED));
    ctx.write_artifact(&output, |out| Ok(write_documents(out, &outcome.docs)?))?;
    println!("documents\t{}", outcome.docs.len());
    println!("calls\t{}", outcome.calls);
    println!("cache_hits\t{}", outcome.cache_hits);
    println!("failures\t{}", outcome.failures.len());
    Ok(())
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Run to score: a name under the runs directory or a path.
    #[arg(long, default_value = "bm25")]
    run: String,
    /// Qrels file; defaults to the cross-lingual qrels.
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// Only score queries assigned to this split.
    #[arg(long)]
    split: Option<Split>,
    /// Cutoff; overrides `evaluation.k`.
    #[arg(long)]
    k: Option<usize>,
    /// `linear` or `exponential`; overrides `evaluation.gain`.
    #[arg(long)]
    gain: Option<wikidir::eval::GainMode>,
    /// Per-query output; defaults to `<run>.eval.tsv` next to the run.
    #[arg(long)]
    output: Option<PathBuf>,
}

pub fn evaluate(ctx: &Ctx, args: EvaluateArgs) -> anyhow::Result<()> {
    let run_path = ctx.run_file(&args.run);
    let mut run = read_run(open(&run_path)?).with_context(|| format!("parsing {}", run_path.display()))?;
    let qrels_path = args.qrels.unwrap_or_else(|| ctx.collection_file(QRELS_CL));
    let mut qrels = read_qrels_file(&qrels_path, QrelsSide::CrossLingual)?;
    if let Some(split) = args.split {
        let assignment = ctx.split()?;
        let keep = |qid: &str| assignment.assignment.get(qid) == Some(&split);
        qrels = qrels.filtered(keep);
        run.entries.retain(|qid, _| keep(qid));
    }
    let k = args.k.unwrap_or(ctx.config.k);
    if k == 0 {
        return Err(missing("evaluation.k", "must be at least 1"));
    }
    let result = ndcg_at_k(&run, &qrels, k, args.gain.unwrap_or(ctx.config.gain))?;
    if !result.empty_qrels.is_empty() {
        log::warn!("{} queries without judgments excluded: {}", result.empty_qrels.len(), result.empty_qrels.join(" "));
    }
    if !result.unjudged_run_queries.is_empty() {
        log::warn!("{} run queries absent from the qrels skipped", result.unjudged_run_queries.len());
    }
    let output = args.output.unwrap_or_else(|| run_path.with_extension("eval.tsv"));
    ctx.write_artifact(&output, |out| Ok(write_eval_tsv(out, &result)?))?;
    println!("ndcg@{k}\t{:.4}\t{}", result.mean, result.per_query.len());
    Ok(())
}

pub fn stats(ctx: &Ctx) -> anyhow::Result<()> {
    let articles = ctx.articles()?;
    let optional = |name: &str| Some(ctx.collection_file(name)).filter(|p| p.exists());

    let mut query_dialects = BTreeMap::new();
    if let Some(path) = optional(QUERIES) {
        for q in read_queries(open(&path)?)? {
            query_dialects.insert(q.qid, q.dialect);
        }
    }
    let split = optional(SPLITS).map(|_| ctx.split()).transpose()?;
    let mut named_qrels = Vec::new();
    for (name, file, side) in [
        ("monolingual", QRELS_MONO, QrelsSide::Monolingual),
        ("crosslingual", QRELS_CL, QrelsSide::CrossLingual),
        ("analysis_without", QRELS_WITHOUT, QrelsSide::CrossLingual),
        ("analysis_with", QRELS_WITH, QrelsSide::CrossLingual),
    ] {
        if let Some(path) = optional(file) {
            named_qrels.push((name, read_qrels_file(&path, side)?));
        }
    }
    let candidates_path = ctx.dictionary_file(CANDIDATES);
    let candidates = candidates_path.exists().then(|| read_candidates_file(&candidates_path)).transpose()?;
    let dictionary = read_dictionary_if_present(ctx)?;

    // Share of judged pairs whose document contains the German query title,
    // before and after translation.
    let mut exact: Vec<(&str, ExactMatchStats)> = Vec::new();
    let cl_qrels = named_qrels.iter().find(|(n, _)| *n == "crosslingual").map(|(_, q)| q);
    if let (Some(qrels), Some(docs_path)) = (cl_qrels, optional(DOCUMENTS)) {
        let queries = ctx.crosslingual_queries(&articles);
        let phrases: BTreeMap<String, Vec<String>> = queries.iter().map(|q| (q.qid.clone(), vec![q.text.clone()])).collect();
        let original = index_documents(&read_docs(&docs_path)?, ctx)?;
        exact.push(("original", exact_match_rate(&original, &queries, qrels, &phrases)));
        if let Some(translated_path) = optional(DOCUMENTS_TRANSLATED) {
            let translated = index_documents(&read_docs(&translated_path)?, ctx)?;
            exact.push(("translated", exact_match_rate(&translated, &queries, qrels, &phrases)));
        }
    }

    let inputs = StatsInputs {
        corpus: &articles,
        query_dialects,
        split: split.as_ref(),
        qrels: named_qrels.iter().map(|(n, q)| (*n, q)).collect(),
        candidates: candidates.as_deref(),
        dictionary: dictionary.as_ref(),
        exact_match: exact.iter().map(|(n, s)| (*n, s)).collect(),
    };
    let rows = collection_stats(&inputs);
    ctx.write_artifact(&ctx.collection_file(STATS), |out| Ok(write_stats_tsv(out, &rows)?))?;
    let stdout = std::io::stdout();
    write_stats_tsv(stdout.lock(), &rows)?;
    Ok(())
}

#[derive(Args)]
pub struct KappaArgs {
    /// First annotator id.
    #[arg(long)]
    a: String,
    /// Second annotator id.
    #[arg(long)]
    b: String,
}

pub fn kappa(ctx: &Ctx, args: KappaArgs) -> anyhow::Result<()> {
    let log = read_judgment_log(&ctx.config.paths.judgments)?;
    let report = cohen_kappa(&log, &args.a, &args.b)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}
