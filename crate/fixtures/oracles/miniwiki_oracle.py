#!/usr/bin/env python3
"""Independent oracle for the mini-wiki fixture.

Recomputes the pipeline's checkable outputs by brute force, from the raw
dumps, the title map, the judgment log and two intermediate artifacts whose
production (wikitext stripping, lead-sentence cleanup) is not re-derived here:
the ingested corpus and the extracted documents.

    python3 miniwiki_oracle.py --fixture ../miniwiki --artifacts <out dir> --golden ../miniwiki/golden

BM25 is scored by scanning every document, Jenks breaks by enumerating every
contiguous partition, phrase gates by sliding over token lists, and nDCG
straight from its definition. Nothing here imports or calls the Rust code.
"""

import argparse
import hashlib
import itertools
import json
import math
import re
import unicodedata
import xml.etree.ElementTree as ET
from collections import defaultdict
from pathlib import Path

K1, B = 0.9, 0.4
DEPTH = 100
NDCG_K = 10
CLASSES = 5
SELF_LABEL = 6
MAX_REDIRECT_DEPTH = 10


def data_lines(path):
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip() and not line.startswith("#"):
            yield line


def read_jsonl(path):
    return [json.loads(line) for line in data_lines(path)]


# -- tokens -------------------------------------------------------------------

def tokenize(text):
    text = unicodedata.normalize("NFC", text)
    tokens, piece = [], []
    for ch in text + " ":
        if ch.isalnum():
            piece.append(ch)
        elif piece:
            folded = "".join(c for ch2 in piece for c in ch2.lower() if c.isalnum())
            folded = unicodedata.normalize("NFC", folded)
            if folded:
                tokens.append(folded)
            piece = []
    return tokens


def contains_run(tokens, phrase):
    n = len(phrase)
    return n > 0 and any(tokens[i:i + n] == phrase for i in range(len(tokens) - n + 1))


# -- BM25 by full scan ----------------------------------------------------------

class Corpus:
    def __init__(self, docs):
        self.ids = sorted(d["doc_id"] for d in docs)
        by_id = {d["doc_id"]: tokenize(d["text"]) for d in docs}
        self.tokens = {i: by_id[i] for i in self.ids}
        self.n = len(self.ids)
        self.avgdl = sum(len(t) for t in self.tokens.values()) / self.n

    def df(self, term):
        return sum(1 for t in self.tokens.values() if term in t)

    def score(self, terms, doc):
        toks = self.tokens[doc]
        dl = len(toks)
        total = 0.0
        for term in sorted(set(terms)):
            tf = toks.count(term)
            if tf == 0:
                total += 0.0
                continue
            df = self.df(term)
            idf = math.log(1.0 + (self.n - df + 0.5) / (df + 0.5))
            norm = K1 * (1.0 - B + B * dl / self.avgdl)
            total += idf * tf * (K1 + 1.0) / (tf + norm)
        return total

    def ranked(self, docs, terms):
        scored = [(self.score(terms, d), d) for d in docs]
        scored.sort(key=lambda p: (-p[0], p[1]))
        return scored


# -- Jenks by exhaustive partition search -------------------------------------

def sse(values):
    if not values:
        return 0.0
    mean = sum(values) / len(values)
    return sum((v - mean) ** 2 for v in values)


def jenks_classes(values, k):
    """Class index per value. Equal values share a class; among optimal
    partitions the lexicographically earliest break positions win."""
    distinct = sorted(set(values))
    groups = [[v] * values.count(v) for v in distinct]
    m = len(distinct)
    classes = min(k, m)
    best, best_breaks = None, None
    for breaks in itertools.combinations(range(1, m), classes - 1):
        bounds = (0,) + breaks + (m,)
        cost = sum(sse([x for g in groups[a:b] for x in g]) for a, b in zip(bounds, bounds[1:]))
        if best is None or cost < best - 1e-9 * max(abs(best), 1.0):
            best, best_breaks = cost, bounds
    class_of = {}
    for c, (a, b) in enumerate(zip(best_breaks, best_breaks[1:])):
        for v in distinct[a:b]:
            class_of[v] = c
    return [class_of[v] for v in values]


def discretize(scores):
    if not scores:
        return {}
    lo, hi = min(scores.values()), max(scores.values())
    if hi <= lo:
        return {d: CLASSES for d in scores}
    ids = sorted(scores)
    normalized = [(scores[d] - lo) / (hi - lo) for d in ids]
    return {d: c + 1 for d, c in zip(ids, jenks_classes(normalized, CLASSES))}


def gated_labels(corpus, query_text, gate_phrases, self_doc):
    terms = tokenize(query_text)
    gates = [tokenize(p) for p in gate_phrases]
    eligible = [d for d in corpus.ids if any(contains_run(corpus.tokens[d], g) for g in gates if g)]
    labels = discretize({d: s for s, d in corpus.ranked(eligible, terms)})
    if self_doc in corpus.tokens:
        labels[self_doc] = SELF_LABEL
    return labels


# -- ingest -------------------------------------------------------------------

def local(tag):
    return tag.rsplit("}", 1)[-1]


def normalize_title(title):
    title = " ".join(title.replace("_", " ").split())
    return title[:1].upper() + title[1:]


def read_dump(path):
    pages = []
    for page in ET.parse(path).getroot():
        if local(page.tag) != "page":
            continue
        fields = {local(c.tag): c for c in page}
        if fields["ns"].text.strip() != "0":
            continue
        text = next((t.text or "" for t in page.iter() if local(t.tag) == "text"), "")
        redirect = fields.get("redirect")
        pages.append({
            "id": int(fields["id"].text),
            "title": normalize_title(fields["title"].text),
            "redirect": normalize_title(redirect.get("title")) if redirect is not None else None,
            "text": text,
        })
    return sorted(pages, key=lambda p: p["id"])


def resolve(title, edges):
    seen, current = {title}, title
    for _ in range(MAX_REDIRECT_DEPTH):
        nxt = edges.get(current)
        if nxt is None:
            return current
        if nxt in seen:
            return title
        seen.add(nxt)
        current = nxt
    return title


# -- candidates and dictionary ------------------------------------------------

def candidate_id(dialect, entity, mention):
    digest = hashlib.sha256(f"{dialect}\t{entity}\t{mention}".encode()).hexdigest()
    return "c" + digest[:12]


def clean(field):
    return re.sub(r"[\t\n\r]", " ", field)


def mine(corpus, edges):
    titles = {(a["dialect"], a["canonical_title"]) for a in corpus}
    found = {}
    for article in corpus:
        d = article["dialect"]
        for link in article.get("links", []):
            mention = unicodedata.normalize("NFC", link["anchor"].strip())
            entity = resolve(link["target"], edges.get(d, {}))
            if not mention or (d, entity) not in titles or mention.strip().lower() == entity.strip().lower():
                continue
            found.setdefault((d, entity, mention), (article["id"], link.get("context", "")))
    return [(candidate_id(d, e, m), d, e, m, src, ctx) for (d, e, m), (src, ctx) in sorted(found.items())]


def effective(log):
    latest = {}
    for order, j in enumerate(log):
        key = (j["annotator_id"], j["candidate_id"])
        stamp = (j["timestamp"], order)
        if key not in latest or stamp >= latest[key][0]:
            latest[key] = (stamp, j["decision"])
    return {k: v[1] for k, v in latest.items()}


def dictionary(candidates, log, corpus):
    annotators = {j["annotator_id"] for j in log}
    majority = len(annotators) >= 2
    tally = defaultdict(lambda: [0, 0])
    for (_, cid), decision in effective(log).items():
        if decision == "accept":
            tally[cid][0] += 1
        elif decision == "reject":
            tally[cid][1] += 1
    entries = defaultdict(dict)
    for cid, d, e, m, _, _ in candidates:
        acc, rej = tally.get(cid, (0, 0))
        if cid not in tally:
            continue
        ok = acc > rej if majority else acc > 0
        if ok and m.strip().lower() != e.strip().lower():
            entries[(d, e)].setdefault(m.strip().lower(), m)
    german = {(a["dialect"], a["canonical_title"]): a.get("german_title") for a in corpus}
    return {
        key: (german.get(key), [v for _, v in sorted(variants.items())])
        for key, variants in sorted(entries.items())
    }


# -- evaluation ---------------------------------------------------------------

def ndcg(run, qrels, k):
    per_query = {}
    for qid, labels in qrels.items():
        if not labels:
            continue
        ranked = run.get(qid, [])[:k]
        dcg = sum(labels.get(doc, 0) / math.log2(i + 2) for i, doc in enumerate(ranked))
        ideal = sorted(labels.values(), reverse=True)[:k]
        idcg = sum(g / math.log2(i + 2) for i, g in enumerate(ideal))
        per_query[qid] = dcg / idcg if idcg > 0 else 0.0
    mean = sum(per_query.values()) / len(per_query) if per_query else 0.0
    return per_query, mean


def lookup_translate(text, pairs):
    out, i = [], 0
    while i < len(text):
        if i == 0 or not text[i - 1].isalnum():
            for title, german in pairs:
                end = i + len(title)
                if text.startswith(title, i) and (end == len(text) or not text[end].isalnum()):
                    out.append(german)
                    i = end
                    break
            else:
                out.append(text[i])
                i += 1
            continue
        out.append(text[i])
        i += 1
    return "".join(out)


def exact_match(docs_tokens, queries, qrels):
    stats = defaultdict(lambda: [0, 0])
    for q in queries:
        phrase = tokenize(q["german_title"])
        for doc in qrels.get(q["qid"], {}):
            stats[q["dialect"]][1] += 1
            if doc in docs_tokens and contains_run(docs_tokens[doc], phrase):
                stats[q["dialect"]][0] += 1
    return stats


def write_qrels(path, qrels):
    with open(path, "w", encoding="utf-8") as f:
        for qid in sorted(qrels):
            for doc in sorted(qrels[qid]):
                f.write(f"{qid} 0 {doc} {qrels[qid][doc]}\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--fixture", type=Path, required=True)
    parser.add_argument("--artifacts", type=Path, required=True, help="pipeline out/ directory")
    parser.add_argument("--golden", type=Path, required=True)
    args = parser.parse_args()
    fx, art, golden = args.fixture, args.artifacts, args.golden
    golden.mkdir(parents=True, exist_ok=True)

    # Ingest: article ids, German titles and redirect edges from the XML.
    langlinks = {}
    for line in data_lines(fx / "langlinks.tsv"):
        d, title, german = line.split("\t")
        langlinks.setdefault((d, title), german)
    edges, expected = {}, []
    for dump in sorted((fx / "dumps").glob("*wiki*.xml")):
        dialect = dump.name.split("wiki")[0]
        for page in read_dump(dump):
            if page["redirect"]:
                edges.setdefault(dialect, {})[page["title"]] = page["redirect"]
                continue
            german = langlinks.get((dialect, page["title"]))
            if german is None:
                m = re.search(r"\[\[de:([^\]|]+)\]\]", page["text"])
                german = m.group(1).strip() if m else None
            expected.append((dialect, page["id"], page["title"], german))
    expected.sort()
    with open(golden / "articles.tsv", "w", encoding="utf-8") as f:
        for d, pid, title, german in expected:
            f.write(f"{d}-{pid}\t{title}\t{german or ''}\n")

    corpus = read_jsonl(art / "corpus" / "corpus.jsonl")
    docs = read_jsonl(art / "collection" / "documents.jsonl")
    log = read_jsonl(fx / "judgments.jsonl")

    candidates = mine(corpus, edges)
    with open(golden / "candidates.tsv", "w", encoding="utf-8") as f:
        for row in candidates:
            f.write("\t".join(clean(x) for x in row) + "\n")

    dictionary_entries = dictionary(candidates, log, corpus)
    with open(golden / "dictionary.tsv", "w", encoding="utf-8") as f:
        for (d, entity), (german, variants) in dictionary_entries.items():
            f.write(f"{d}\t{entity}\t{german or ''}\t{'|'.join(variants)}\n")

    # Queries: display titles that are not purely numeric.
    queries = []
    for a in corpus:
        title = a["display_title"].strip()
        alnum = [c for c in title if c.isalnum()]
        if alnum and not all(c.isnumeric() for c in alnum):
            queries.append({
                "qid": a["id"], "dialect": a["dialect"], "title": title,
                "entity": a["canonical_title"], "german_title": a.get("german_title"),
            })
    cl_queries = [q for q in queries if q["german_title"] and q["german_title"].strip()]

    with open(golden / "queries.tsv", "w", encoding="utf-8") as f:
        f.writelines(f"{q['qid']}\t{clean(q['title'])}\t{q['dialect']}\n" for q in queries)
    with open(golden / "queries_crosslingual.tsv", "w", encoding="utf-8") as f:
        f.writelines(f"{q['qid']}\t{clean(q['german_title'])}\t{q['dialect']}\n" for q in cl_queries)

    index = Corpus(docs)
    mono = {q["qid"]: gated_labels(index, q["title"], [q["title"]], q["qid"]) for q in queries}
    write_qrels(golden / "qrels_monolingual.txt", mono)
    cross = {q["qid"]: mono[q["qid"]] for q in cl_queries}
    write_qrels(golden / "qrels_crosslingual.txt", cross)

    analysis = [q for q in cl_queries if dictionary_entries.get((q["dialect"], q["entity"]), (None, []))[1]]
    without, with_ = {}, {}
    for q in analysis:
        variants = [v for v in dictionary_entries[(q["dialect"], q["entity"])][1] if tokenize(v)]
        without[q["qid"]] = gated_labels(index, q["title"], [q["title"]], q["qid"])
        with_[q["qid"]] = gated_labels(index, q["title"], [q["title"]] + variants, q["qid"])
        assert set(without[q["qid"]]) <= set(with_[q["qid"]]), q["qid"]
    write_qrels(golden / "qrels_analysis_without.txt", without)
    write_qrels(golden / "qrels_analysis_with.txt", with_)
    (golden / "analysis_qids.txt").write_text("".join(q["qid"] + "\n" for q in analysis), encoding="utf-8")

    # First-stage run over the German-title queries, then nDCG@10 against
    # the cross-lingual qrels.
    run = {}
    with open(golden / "bm25.run", "w", encoding="utf-8") as f:
        for q in sorted(cl_queries, key=lambda q: q["qid"]):
            terms = tokenize(q["german_title"])
            eligible = [d for d in index.ids if any(t in index.tokens[d] for t in terms)]
            ranked = index.ranked(eligible, terms)[:DEPTH]
            run[q["qid"]] = [d for _, d in ranked]
            for rank, (score, doc) in enumerate(ranked, 1):
                f.write(f"{q['qid']} Q0 {doc} {rank} {score!r} bm25\n")
    per_query, mean = ndcg(run, cross, NDCG_K)
    with open(golden / "bm25.eval.tsv", "w", encoding="utf-8") as f:
        for qid in sorted(per_query):
            f.write(f"{qid}\t{per_query[qid]:.6f}\n")
        f.write(f"all\t{mean:.6f}\n")

    # Translate-test: share of judged pairs containing the German title,
    # before and after the lookup-table translator.
    pairs = defaultdict(list)
    for (d, title), german in langlinks.items():
        pairs[d].append((title, german))
    for d in pairs:
        pairs[d].sort(key=lambda p: (-len(p[0]), p[0]))
    original = {d["doc_id"]: tokenize(d["text"]) for d in docs}
    translated = {d["doc_id"]: tokenize(lookup_translate(d["text"], pairs[d["dialect"]])) for d in docs}
    before = exact_match(original, cl_queries, cross)
    after = exact_match(translated, cl_queries, cross)
    with open(golden / "exact_match.tsv", "w", encoding="utf-8") as f:
        for d in sorted(before):
            (hb, nb), (ha, na) = before[d], after[d]
            f.write(f"{d}\t{100 * hb / nb:.2f}\t{100 * ha / na:.2f}\t{nb}\n")

    print(f"articles={len(expected)} candidates={len(candidates)} entities={len(dictionary_entries)} "
          f"analysis={len(analysis)} ndcg@10={mean:.6f}")


if __name__ == "__main__":
    main()
