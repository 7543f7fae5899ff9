"""Pipeline stages over a work directory of file artifacts.

Every stage reads the artifacts of earlier stages from ``work_dir`` and writes
its own outputs atomically, so stages can be re-run independently.
"""

from __future__ import annotations

import base64
import gzip
import configparser
import contextlib
import json
import logging
import os
import tempfile
from collections import defaultdict
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from . import docalign, extract, filtering, ingest, langstat, sentalign
from .crawler import CrawlBudget, CrawlError, HttpFetcher, MirrorFetcher, crawl_domain, write_archive
from .model import RawDocument, SentencePair, TextDocument, load_lexicon, parse_pairs, serialize_pairs

log = logging.getLogger(__name__)

STAGES = ("rank", "crawl", "ingest", "extract", "docalign", "align", "filter", "stats")
CONFIG_ENV = "BITEXTMINE_CONFIG"

DEFAULTS: dict[str, dict[str, str]] = {
    "general": {"work_dir": "work", "seed": "0"},
    "paths": {"lexicon": "", "langid_train": "", "rank_input": "", "seed_corpus": "", "filter_model": ""},
    "langid": {"ngram_order": "3", "other_threshold": "0.5"},
    "rank": {"top_k": "100000"},
    "crawl": {
        "mirror_dir": "", "max_duration": "86400", "max_pages": "inf",
        "politeness_delay": "1.0", "max_depth": "10", "request_timeout": "30",
        "user_agent": "bitextmine/0.1 (+parallel corpus research crawler)",
    },
    "ingest": {"min_bytes": str(ingest.ONE_MB), "archives": ""},
    "docalign": {"min_score": "0.3"},
    "align": {
        "lex_weight": "3.0", "length_var": "6.8", "skip_penalty": "2.0", "min_align_score": "0.1",
        "length_ratio": "", "ratio_min": "0.3", "ratio_max": "3.0",
        **{f"prior_{k.replace(':', '_')}": repr(v) for k, v in sentalign.DEFAULT_PRIORS.items()},
    },
    "filter": {
        "threshold": "0.5", "epochs": "200", "learning_rate": "0.1", "l2": "1e-4", "seed": "",
        "min_chars": "3", "max_chars": "2000", "max_char_ratio": "6.0", "max_copy_similarity": "0.9",
        "min_digit_jaccard": "0.5", "digit_count_trigger": "3",
    },
}


class MissingInput(Exception):
    def __init__(self, path: Path):
        self.path = path
        super().__init__(f"missing input: {path}")


class Config:
    """Sectioned key-value settings; relative paths resolve against the config file."""

    def __init__(self, parser: configparser.ConfigParser, base_dir: Path):
        self.parser = parser
        self.base_dir = base_dir

    @classmethod
    def load(cls, path: str | Path | None = None, overrides: Sequence[str] = ()) -> Config:
        parser = configparser.ConfigParser(interpolation=None)
        parser.read_dict(DEFAULTS)
        base = Path.cwd()
        if path is None:
            path = os.environ.get(CONFIG_ENV) or None
        if path is not None:
            path = Path(path)
            if not path.is_file():
                raise MissingInput(path)
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
            base = path.resolve().parent
        for item in overrides:
            key, sep, value = item.partition("=")
            section, dot, option = key.strip().partition(".")
            if not sep or not dot:
                raise ValueError(f"override must look like section.key=value, got {item!r}")
            if not parser.has_section(section):
                parser.add_section(section)
            parser.set(section, option, value.strip())
        return cls(parser, base)

    def get(self, section: str, key: str) -> str:
        return self.parser.get(section, key, fallback="").strip()

    def getfloat(self, section: str, key: str) -> float:
        return float(self.get(section, key))

    def getint(self, section: str, key: str) -> int:
        return int(self.get(section, key))

    def path(self, section: str, key: str) -> Path | None:
        value = self.get(section, key)
        return (self.base_dir / value) if value else None

    @property
    def work_dir(self) -> Path:
        return self.path("general", "work_dir")

    @property
    def seed(self) -> int:
        return self.getint("general", "seed")


@contextlib.contextmanager
def atomic_open(path: Path, mode: str = "wb"):
    """Write to a temp file beside ``path``, renamed into place on success."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        kwargs = {} if "b" in mode else {"encoding": "utf-8", "newline": ""}
        with os.fdopen(fd, mode, **kwargs) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def require(path: Path | None, what: str = "input") -> Path:
    if path is None:
        raise ValueError(f"no path configured for {what}")
    if not path.exists():
        raise MissingInput(path)
    return path


ARTIFACTS = {
    "domain_stats": "domain_stats.tsv",
    "domains": "domains.txt",
    "archives": "archives",
    "crawl_summary": "crawl_summary.tsv",
    "documents": "documents.jsonl",
    "ingest_report": "ingest_report.tsv",
    "text_documents": "text_documents.jsonl",
    "docpairs": "docpairs.jsonl",
    "raw_corpus": "corpus.raw.tsv",
    "filter_model": "filter_model.txt",
    "filtered_corpus": "corpus.filtered.tsv",
    "reject_report": "reject_report.tsv",
    "corpus_stats": "corpus_stats.tsv",
}


class Workspace:
    """Artifact paths under the configured work directory."""

    def __init__(self, config: Config):
        self.root = config.work_dir
        for name, filename in ARTIFACTS.items():
            setattr(self, name, self.root / filename)


def _lexicon(config: Config):
    with open(require(config.path("paths", "lexicon"), "paths.lexicon"), "rb") as fh:
        return load_lexicon(fh)


def _langid(config: Config) -> langstat.LangIdModel:
    with open(require(config.path("paths", "langid_train"), "paths.langid_train"), "rb") as fh:
        samples = langstat.load_langid_samples(fh)
    return langstat.train_langid(samples, config.getint("langid", "ngram_order"),
                                 other_threshold=config.getfloat("langid", "other_threshold"))


def _charset(content_type: str) -> str | None:
    for part in content_type.split(";")[1:]:
        key, _, value = part.partition("=")
        if key.strip().lower() == "charset":
            return value.strip().strip("\"'")
    return None


def page_text(doc: RawDocument) -> str:
    return extract.normalize_nfkc(extract.extract_text(doc.body, _charset(doc.content_type)))


def text_line_stats(doc: RawDocument, langid: langstat.LangIdModel) -> Iterator[tuple[str, str, int]]:
    """(domain, language, UTF-8 bytes) per extracted line of a page."""
    for line in page_text(doc).splitlines():
        if line.strip():
            yield doc.domain, langid.detect(line)[0], len(line.encode("utf-8"))


def stage_rank(config: Config) -> None:
    ws = Workspace(config)
    langid = _langid(config)
    raw = config.get("paths", "rank_input")
    if not raw:
        raise ValueError("paths.rank_input is not configured")
    shards = []
    for item in raw.split(","):
        reader = ingest.read_archive(require(config.base_dir / item.strip()))
        shards.append(langstat.accumulate_stats(s for doc in reader for s in text_line_stats(doc, langid)))
    stats = langstat.merge_stats(*shards)
    ranked = langstat.rank_domains(stats, config.getint("rank", "top_k"))
    with atomic_open(ws.domain_stats, "w") as fh:
        fh.write(langstat.format_stats_report(stats))
    with atomic_open(ws.domains, "w") as fh:
        fh.write("".join(f"{d}\n" for d in ranked))
    log.info("ranked %d of %d domains", len(ranked), len(stats))


def _fetcher(config: Config):
    ua = config.get("crawl", "user_agent")
    timeout = config.getfloat("crawl", "request_timeout")
    mirror = config.path("crawl", "mirror_dir")
    if mirror is not None:
        return MirrorFetcher(require(mirror, "crawl.mirror_dir"), ua, timeout)
    return HttpFetcher(ua, timeout)


def stage_crawl(config: Config) -> None:
    ws = Workspace(config)
    domains = [d for d in require(ws.domains).read_text(encoding="utf-8").split() if d]
    budget = CrawlBudget(
        max_duration=config.getfloat("crawl", "max_duration"),
        max_pages=float(config.get("crawl", "max_pages")),
        politeness_delay=config.getfloat("crawl", "politeness_delay"),
        max_depth=config.getint("crawl", "max_depth"),
    )
    fetcher = _fetcher(config)
    ws.archives.mkdir(parents=True, exist_ok=True)
    rows = ["domain\tpages\tbytes\tstopped_reason\n"]
    for domain in domains:
        crawl = crawl_domain(f"http://{domain}/", budget, fetcher)
        try:
            docs = list(crawl)
        except CrawlError as exc:
            log.warning("%s: %s", domain, exc)
            rows.append(f"{domain}\t0\t0\terror\n")
            continue
        write_archive(docs, ws.archives / f"{domain}.warc.gz")
        s = crawl.summary
        rows.append(f"{domain}\t{s.pages}\t{s.bytes}\t{s.stopped_reason}\n")
    with atomic_open(ws.crawl_summary, "w") as fh:
        fh.write("".join(rows))


def _doc_to_json(doc: RawDocument) -> str:
    return json.dumps({
        "url": doc.url, "domain": doc.domain, "fetched_at": doc.fetched_at.isoformat(),
        "content_type": doc.content_type, "body": base64.b64encode(doc.body).decode("ascii"),
    }, ensure_ascii=False)


def _doc_from_record(d: Mapping) -> RawDocument:
    return RawDocument(d["url"], d["domain"], datetime.fromisoformat(d["fetched_at"]),
                       d["content_type"], base64.b64decode(d["body"]))


def archive_domain_sizes(archive: Path, docs: Sequence[RawDocument]) -> dict[str, int]:
    """Compressed bytes per domain held by one archive.

    A single-domain archive counts its whole file size; records of mixed
    archives count their gzip-compressed body size.
    """
    domains = {d.domain for d in docs}
    if archive.is_file() and len(domains) == 1:
        return {domains.pop(): archive.stat().st_size}
    sizes: dict[str, int] = defaultdict(int)
    for doc in docs:
        sizes[doc.domain] += len(gzip.compress(doc.body, mtime=0))
    return dict(sizes)


def stage_ingest(config: Config) -> None:
    ws = Workspace(config)
    extra = [config.base_dir / p.strip() for p in config.get("ingest", "archives").split(",") if p.strip()]
    archives = sorted(require(ws.archives).glob("*.warc*")) + [require(p) for p in extra]
    sizes: dict[str, int] = defaultdict(int)
    docs_by_domain: dict[str, list[RawDocument]] = defaultdict(list)
    totals: dict[str, int] = defaultdict(int)
    for archive in archives:
        reader = ingest.read_archive(archive)
        docs = list(reader)
        for doc in docs:
            docs_by_domain[doc.domain].append(doc)
        for domain, size in archive_domain_sizes(archive, docs).items():
            sizes[domain] += size
        for key, value in vars(reader.stats).items():
            if isinstance(value, int):
                totals[key] += value
    kept = ingest.filter_small_domains(sizes, config.getint("ingest", "min_bytes"))
    with atomic_open(ws.documents, "w") as fh:
        for domain in sorted(kept):
            for doc in sorted(docs_by_domain[domain], key=lambda d: d.url):
                fh.write(_doc_to_json(doc) + "\n")
    with atomic_open(ws.ingest_report, "w") as fh:
        fh.write("key\tvalue\n")
        for key in sorted(totals):
            fh.write(f"{key}\t{totals[key]}\n")
        fh.write(f"domains_seen\t{len(sizes)}\ndomains_kept\t{len(kept)}\n")


def _read_jsonl(path: Path) -> Iterator[dict]:
    with open(require(path), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None


def to_text_document(doc: RawDocument, langid: langstat.LangIdModel) -> TextDocument | None:
    text = page_text(doc)
    if not text.strip():
        return None
    lang, _ = langid.detect(text)
    if lang == "other":
        return None
    return TextDocument(doc.url, lang, tuple(extract.split_sentences(text, lang)))


def stage_extract(config: Config) -> None:
    ws = Workspace(config)
    langid = _langid(config)
    out = []
    for record in _read_jsonl(ws.documents):
        tdoc = to_text_document(_doc_from_record(record), langid)
        if tdoc is not None and tdoc.sentences:
            out.append(tdoc)
    out.sort(key=lambda d: d.url)
    with atomic_open(ws.text_documents, "w") as fh:
        for d in out:
            fh.write(json.dumps({"url": d.url, "lang": d.lang, "sentences": list(d.sentences)},
                                ensure_ascii=False) + "\n")


def load_text_documents(path: Path) -> dict[str, TextDocument]:
    return {r["url"]: TextDocument(r["url"], r["lang"], tuple(r["sentences"])) for r in _read_jsonl(path)}


def stage_docalign(config: Config) -> None:
    ws = Workspace(config)
    lexicon = _lexicon(config)
    docs = load_text_documents(ws.text_documents)
    by_domain: dict[str, dict[str, list[TextDocument]]] = defaultdict(lambda: defaultdict(list))
    for d in docs.values():
        by_domain[d.domain][d.lang].append(d)
    min_score = config.getfloat("docalign", "min_score")
    with atomic_open(ws.docpairs, "w") as fh:
        for domain in sorted(by_domain):
            groups = by_domain[domain]
            for p in docalign.pair_documents(groups["en"], groups["ja"], lexicon, min_score):
                fh.write(json.dumps({
                    "domain": domain, "src_url": p.src_doc.url, "tgt_url": p.tgt_doc.url,
                    "url_score": p.url_score, "content_score": p.content_score,
                    "combined_score": p.combined_score,
                }) + "\n")


def align_params(config: Config) -> sentalign.AlignParams:
    priors = {k: config.getfloat("align", f"prior_{k.replace(':', '_')}") for k in sentalign.DEFAULT_PRIORS}
    ratio = config.get("align", "length_ratio")
    return sentalign.AlignParams(
        bead_priors=priors,
        length_ratio_c=float(ratio) if ratio else None,
        length_var_s2=config.getfloat("align", "length_var"),
        lex_weight=config.getfloat("align", "lex_weight"),
        skip_penalty=config.getfloat("align", "skip_penalty"),
        ratio_bounds=(config.getfloat("align", "ratio_min"), config.getfloat("align", "ratio_max")),
    )


def stage_align(config: Config) -> None:
    ws = Workspace(config)
    pairs_path = require(ws.docpairs)
    docs = load_text_documents(ws.text_documents)
    lexicon = _lexicon(config)
    params = align_params(config)
    min_score = config.getfloat("align", "min_align_score")
    corpus: list[SentencePair] = []
    for record in _read_jsonl(pairs_path):
        try:
            src, tgt = docs[record["src_url"]], docs[record["tgt_url"]]
        except KeyError as exc:
            raise ValueError(f"document pair refers to unknown document {exc}") from None
        corpus.extend(sentalign.align_documents(src, tgt, lexicon, params, min_score))
    with atomic_open(ws.raw_corpus) as fh:
        serialize_pairs(corpus, fh)


def read_corpus(path: Path) -> list[SentencePair]:
    with open(require(path), "rb") as fh:
        return parse_pairs(fh)


def hard_rule_config(config: Config) -> filtering.HardRuleConfig:
    return filtering.HardRuleConfig(
        min_chars=config.getint("filter", "min_chars"),
        max_chars=config.getint("filter", "max_chars"),
        max_char_ratio=config.getfloat("filter", "max_char_ratio"),
        max_copy_similarity=config.getfloat("filter", "max_copy_similarity"),
        min_digit_jaccard=config.getfloat("filter", "min_digit_jaccard"),
        digit_count_trigger=config.getint("filter", "digit_count_trigger"),
    )


def stage_filter(config: Config) -> None:
    ws = Workspace(config)
    raw = read_corpus(ws.raw_corpus)
    lexicon = _lexicon(config)
    langid = _langid(config)
    model_path = config.path("paths", "filter_model")
    if model_path is not None:
        with open(require(model_path), encoding="utf-8") as fh:
            model = filtering.load_model(fh)
    else:
        seed_value = config.get("filter", "seed")
        model = filtering.train_filter(
            read_corpus(require(config.path("paths", "seed_corpus"), "paths.seed_corpus")),
            int(seed_value) if seed_value else config.seed, lexicon, langid,
            epochs=config.getint("filter", "epochs"),
            learning_rate=config.getfloat("filter", "learning_rate"),
            l2=config.getfloat("filter", "l2"),
        )
    kept, report = filtering.filter_corpus(raw, model, lexicon, langid,
                                           config.getfloat("filter", "threshold"), hard_rule_config(config))
    with atomic_open(ws.filter_model, "w") as fh:
        filtering.save_model(model, fh)
    with atomic_open(ws.filtered_corpus) as fh:
        serialize_pairs(kept, fh)
    with atomic_open(ws.reject_report, "w") as fh:
        fh.write(report.to_tsv())


@dataclass(frozen=True)
class CorpusStats:
    label: str
    n_sentences: int
    n_src_words: int
    n_tgt_chars: int


def corpus_stats(pairs: Sequence[SentencePair], label: str = "Raw") -> CorpusStats:
    """Pair count, English whitespace-token count and Japanese character count."""
    return CorpusStats(label, len(pairs), sum(len(p.src_text.split()) for p in pairs),
                       sum(len(p.tgt_text) for p in pairs))


def format_corpus_stats(rows: Sequence[CorpusStats]) -> str:
    lines = ["corpus\tsentences\tsrc_words\ttgt_chars\n"]
    lines += [f"{r.label}\t{r.n_sentences}\t{r.n_src_words}\t{r.n_tgt_chars}\n" for r in rows]
    return "".join(lines)


def stage_stats(config: Config) -> None:
    ws = Workspace(config)
    rows = [corpus_stats(read_corpus(ws.raw_corpus), "Raw")]
    if ws.filtered_corpus.exists():
        rows.append(corpus_stats(read_corpus(ws.filtered_corpus), "Filtered"))
    with atomic_open(ws.corpus_stats, "w") as fh:
        fh.write(format_corpus_stats(rows))


STAGE_FUNCS = {
    "rank": stage_rank,
    "crawl": stage_crawl,
    "ingest": stage_ingest,
    "extract": stage_extract,
    "docalign": stage_docalign,
    "align": stage_align,
    "filter": stage_filter,
    "stats": stage_stats,
}


def run_pipeline(config: Config, stages: Sequence[str] = STAGES) -> None:
    for name in stages:
        log.info("stage %s", name)
        STAGE_FUNCS[name](config)
