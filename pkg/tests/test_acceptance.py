"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v`` (or ``python tests/test_acceptance.py``).
"""

import io
import random
import shutil
import string
import time
import unicodedata
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from bitextmine import cli
from bitextmine.crawler import CrawlBudget, HttpFetcher, crawl_domain, write_archive
from bitextmine.extract import normalize_nfkc, split_sentences
from bitextmine.filtering import (
    extract_features,
    filter_corpus,
    hard_rules,
    load_model,
    loss_and_grad,
    score_pair,
)
from bitextmine.ingest import filter_small_domains, read_archive
from bitextmine.langstat import rank_domains
from bitextmine.model import DomainLangStats, RawDocument, SentencePair, load_lexicon, parse_pairs, serialize_pairs
from bitextmine.pipeline import Config, _langid, read_corpus
from bitextmine.sentalign import BeadScorer, align_sentences
from bitextmine.synthetic import load_gold
from conftest import FIXTURE_DIR, generator
from oracles import (
    KINDS,
    FixtureServer,
    all_segmentation_costs,
    five_page_site,
    html_page,
    precision_recall,
    random_alignment_instance,
)


def report(capsys, number, title, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})")
    assert ok, detail


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    """Two independent pipeline runs on fresh copies of the bundled fixture."""
    out = []
    for k in range(2):
        dest = tmp_path_factory.mktemp(f"acceptance{k}") / "fixture"
        shutil.copytree(FIXTURE_DIR, dest)
        start = time.monotonic()
        code = cli.main(["pipeline", "-c", str(dest / "pipeline.ini")])
        out.append((dest, code, time.monotonic() - start))
    return out


def test_01_alignment_matches_brute_force(capsys, toy, toy_lexicon):
    rng = np.random.default_rng(2024)
    gen = generator(toy, 2024)
    start = time.monotonic()
    mismatches = 0
    biggest = 0
    for k in range(500):
        if k < 20:
            # always exercise the largest size
            src, tgt = [], []
            while len(src) < 8 or len(tgt) < 8:
                s, t = random_alignment_instance(rng, gen)
                src, tgt = (src + s)[:8], (tgt + t)[:8]
        else:
            src, tgt = random_alignment_instance(rng, gen, max_len=8)
        beads = align_sentences(src, tgt, toy_lexicon)
        total = 0.0
        for bead in beads:
            total += bead.cost
        scorer = BeadScorer(src, tgt, toy_lexicon)
        brute = all_segmentation_costs(len(src), len(tgt), lambda *key: scorer.cost(*key)[0], KINDS)
        biggest = max(biggest, brute.size)
        mismatches += total != brute.min()
    elapsed = time.monotonic() - start
    ok = mismatches == 0 and elapsed < 60
    report(capsys, 1, "DP cost equals brute-force minimum", ok,
           f"500 instances, {mismatches} mismatches, up to {biggest} segmentations, {elapsed:.1f}s < 60s")


def test_02_synthetic_end_to_end(capsys, runs):
    dest, code, elapsed = runs[0]
    gold = load_gold(dest / "gold.tsv")
    pairs = read_corpus(dest / "work" / "corpus.filtered.tsv") if code == 0 else []
    precision, recall = precision_recall(pairs, gold)
    ok = code == 0 and precision >= 0.9 and recall >= 0.9 and elapsed < 300
    report(capsys, 2, "synthetic pipeline precision/recall", ok,
           f"exit {code}, {len(pairs)} pairs vs {len(gold)} gold, P={precision:.3f} R={recall:.3f}, {elapsed:.1f}s")


def test_03_threshold_semantics(capsys, runs):
    dest, _, _ = runs[0]
    config = Config.load(dest / "pipeline.ini")
    with open(dest / "lexicon.tsv", "rb") as fh:
        lexicon = load_lexicon(fh)
    langid = _langid(config)
    with open(dest / "work" / "filter_model.txt", encoding="utf-8") as fh:
        model = load_model(fh)
    corpus = read_corpus(dest / "work" / "corpus.raw.tsv")
    survivors = [p for p in corpus if hard_rules(p, langid) is None]
    scores = [score_pair(model, extract_features(p, lexicon, langid)) for p in survivors]
    kept_sets = {}
    exact = True
    for t in (0.3, 0.5, 0.7):
        kept, _ = filter_corpus(corpus, model, lexicon, langid, threshold=t)
        expected = [(p.src_url, p.src_text, p.tgt_text, s) for p, s in zip(survivors, scores) if s >= t]
        got = [(p.src_url, p.src_text, p.tgt_text, p.filter_score) for p in kept]
        exact &= got == expected
        kept_sets[t] = {g[:3] for g in got}
    monotone = kept_sets[0.3] >= kept_sets[0.5] >= kept_sets[0.7]
    below = sum(s < 0.5 for s in scores)
    ok = exact and monotone and below > 0
    report(capsys, 3, "kept set is {score >= threshold}, monotone", ok,
           f"{len(corpus)} pairs, kept {len(kept_sets[0.3])}/{len(kept_sets[0.5])}/{len(kept_sets[0.7])} "
           f"at 0.3/0.5/0.7, {below} scored below 0.5")


def test_04_domain_size_boundary(capsys):
    kept = filter_small_domains({"a.example": 1_048_576, "b.example": 1_048_575})
    ok = kept == {"a.example"}
    report(capsys, 4, "1 MiB domain-size boundary", ok, f"kept {sorted(kept)}")


def test_05_ranking(capsys):
    rng = random.Random(5)
    stats = {}
    for i in range(1000):
        name = f"site{rng.randrange(10**6):06d}-{i}.example"
        en = rng.choice([0, rng.randrange(1, 10**6)])
        ja = rng.choice([0, rng.randrange(1, 10**6), en])
        stats[name] = DomainLangStats(name, {"en": en, "ja": ja, "other": rng.randrange(10**4)})

    def oracle_ratio(s):
        hi = max(s.bytes_en, s.bytes_ja)
        return min(s.bytes_en, s.bytes_ja) / hi if hi else 0.0

    oracle = sorted((d for d, s in stats.items() if oracle_ratio(s) > 0),
                    key=lambda d: (-oracle_ratio(stats[d]), -(stats[d].bytes_en + stats[d].bytes_ja), d))
    ranking_ok = all(rank_domains(stats, k) == oracle[:k] for k in (1, 10, 100, 1000))
    swapped = [DomainLangStats(d, {"en": s.bytes_ja, "ja": s.bytes_en, "other": s.bytes_other})
               for d, s in stats.items()]
    symmetric = all(a.ratio == b.ratio and 0 <= a.ratio <= 1 for a, b in zip(stats.values(), swapped))
    ok = ranking_ok and symmetric
    report(capsys, 5, "ranking equals full-sort oracle, ratio symmetric", ok,
           f"1000 domains, {len(oracle)} with ratio > 0, ranking {'ok' if ranking_ok else 'differs'}, "
           f"symmetry {'ok' if symmetric else 'broken'}")


def test_06_gradient_check(capsys, toy_pairs, toy_lexicon, toy_langid):
    pos = [SentencePair("http://t.example/en", "http://t.example/ja", en, ja, 1.0, 1.0) for en, _, ja in toy_pairs[:80]]
    rng = np.random.default_rng(6)
    X = np.array([extract_features(p, toy_lexicon, toy_langid) for p in pos])
    X = np.vstack([X, X[rng.permutation(len(X))] * rng.uniform(0.5, 1.5, size=X.shape)])
    X = (X - X.mean(0)) / np.where(X.std(0) > 0, X.std(0), 1.0)
    y = np.r_[np.ones(len(pos)), np.zeros(len(pos))]
    h, l2 = 1e-6, 1e-4
    worst = 0.0
    for _ in range(20):
        w, b = rng.normal(size=X.shape[1]), float(rng.normal())
        _, gw, gb = loss_and_grad(w, b, X, y, l2)
        numeric = []
        for k in range(len(w) + 1):
            e = np.zeros(len(w) + 1)
            e[k] = h
            plus = loss_and_grad(w + e[:-1], b + e[-1], X, y, l2)[0]
            minus = loss_and_grad(w - e[:-1], b - e[-1], X, y, l2)[0]
            numeric.append((plus - minus) / (2 * h))
        analytic = np.append(gw, gb)
        numeric = np.array(numeric)
        err = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), np.linalg.norm(numeric))
        worst = max(worst, err)
    ok = worst <= 1e-5
    report(capsys, 6, "analytic vs finite-difference gradient", ok, f"20 points, worst relative error {worst:.2e}")


def test_07_crawler_budget(capsys):
    details, ok = [], True
    html = "text/html; charset=utf-8"
    with FixtureServer(five_page_site()) as srv:
        for n in range(1, 6):
            docs = list(crawl := crawl_domain(srv.base + "/", CrawlBudget(max_pages=n, politeness_delay=0.01),
                                              HttpFetcher(timeout=5)))
            want = "pages" if n < 5 else ("pages", "frontier_empty")
            ok &= len(docs) == n and crawl.summary.stopped_reason in want
        details.append("max_pages 1..5 exact")

    delay = 0.2
    with FixtureServer(five_page_site()) as srv:
        list(crawl_domain(srv.base + "/", CrawlBudget(politeness_delay=delay), HttpFetcher(timeout=5)))
        times = [t for _, t in srv.log]
    min_gap = min(b - a for a, b in zip(times, times[1:]))
    # receipt times on the server side carry a few ms of loopback jitter
    ok &= min_gap >= delay - 0.005
    details.append(f"min gap {min_gap:.3f}s for delay {delay}s")

    chain = {f"/p{k}.html": (200, html, html_page(f"p{k}", [f"/p{k + 1}.html"])) for k in range(200)}
    chain["/"] = (200, html, html_page("home", ["/p0.html"]))
    timeout, budget = 2.0, 1.5
    with FixtureServer(chain, delay=0.15) as srv:
        start = time.monotonic()
        crawl = crawl_domain(srv.base + "/", CrawlBudget(max_duration=budget, politeness_delay=0.05),
                             HttpFetcher(timeout=timeout))
        docs = list(crawl)
        elapsed = time.monotonic() - start
    ok &= crawl.summary.stopped_reason == "time" and elapsed <= budget + timeout and 0 < len(docs) < 200
    details.append(f"time stop after {elapsed:.2f}s for {budget}s budget, timeout {timeout}s")
    report(capsys, 7, "crawler budgets and politeness", ok, "; ".join(details))


def test_08_determinism(capsys, runs):
    (a, code_a, _), (b, code_b, _) = runs
    names = ["corpus.raw.tsv", "corpus.filtered.tsv", "corpus_stats.tsv", "reject_report.tsv", "filter_model.txt"]
    same = [n for n in names if (a / "work" / n).read_bytes() == (b / "work" / n).read_bytes()]
    ok = code_a == code_b == 0 and same == names
    report(capsys, 8, "two seeded runs are byte-identical", ok, f"{len(same)}/{len(names)} artifacts identical")


def _random_text(rng, alphabet, lo=1, hi=60):
    while True:
        text = "".join(rng.choice(alphabet) for _ in range(rng.randrange(lo, hi)))
        if text.strip():
            return text


def test_09_round_trips(capsys, tmp_path):
    rng = random.Random(9)
    t0 = datetime(2019, 1, 1, tzinfo=timezone.utc)
    docs = []
    for i in range(1000):
        host = f"{rng.choice(['www', 'news', 'blog'])}.h{rng.randrange(50)}.example"
        body = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 400)))
        ctype = rng.choice(["text/html", "text/html; charset=utf-8", "text/html; charset=shift_jis",
                            "application/xhtml+xml"])
        docs.append(RawDocument(f"http://{host}/d{i}/{rng.randrange(10**6)}.html", host,
                                t0 + timedelta(seconds=rng.randrange(10**8)), ctype, body))
    path = tmp_path / "rt.warc.gz"
    write_archive(docs, path)
    reader = read_archive(path)
    back = list(reader)
    warc_ok = ([(d.url, d.domain, d.fetched_at, d.content_type, d.body) for d in back]
               == [(d.url, d.domain, d.fetched_at, d.content_type, d.body) for d in docs]
               and reader.stats.corrupt == 0)

    alphabet = string.ascii_letters + string.digits + " .,!?'\"-" + "あいうえおアイウエオ漢字日本語、。「」" + "éß€😀"
    pairs = []
    for i in range(1000):
        pairs.append(SentencePair(f"http://h{i % 7}.example/en/{i}", f"http://h{i % 7}.example/ja/{i}",
                                  _random_text(rng, alphabet), _random_text(rng, alphabet),
                                  rng.randrange(10**6 + 1) / 10**6, rng.randrange(10**6 + 1) / 10**6))
    sink = io.BytesIO()
    serialize_pairs(pairs, sink)
    corpus_ok = parse_pairs(io.BytesIO(sink.getvalue())) == pairs
    ok = warc_ok and corpus_ok
    report(capsys, 9, "WARC and corpus round trips", ok,
           f"1000 records {'identical' if warc_ok else 'differ'}, 1000 pairs {'identical' if corpus_ok else 'differ'}")


def test_10_normalization_and_splitting(capsys):
    rng = random.Random(10)
    pools = [
        "ＡＢＣａｂｃ０１２３４５６７８９",       # full-width Latin and digits
        "ｱｲｳｴｵｶﾞｷﾞﾊﾟﾋﾟｰ",                      # half-width katakana
        "あいうえおかきくけこ漢字日本語東京",      # hiragana and kanji
        "アイウエオカタカナー",
        "。！？．」』）「『（、・",                # Japanese punctuation, full-width
        "Hello world Mr. Dr. etc. e.g. 3.14 ",
        ".!?\"')( \n\t　",                 # ASCII punctuation, whitespace, ideographic space
        "①②㍻㌔ﬁ℡",                              # compatibility characters
    ]
    idempotent = no_loss = 0
    for _ in range(10_000):
        text = "".join(rng.choice(rng.choice(pools)) for _ in range(rng.randrange(0, 80)))
        once = normalize_nfkc(text)
        idempotent += normalize_nfkc(once) == once and unicodedata.is_normalized("NFKC", once)
        ok_split = True
        for lang in ("en", "ja"):
            out = split_sentences(once, lang)
            ok_split &= "".join("".join(out).split()) == "".join(once.split())
        no_loss += ok_split
    ok = idempotent == no_loss == 10_000
    report(capsys, 10, "NFKC idempotence and split no-text-loss", ok,
           f"10000 strings, idempotent {idempotent}, lossless splits {no_loss}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
