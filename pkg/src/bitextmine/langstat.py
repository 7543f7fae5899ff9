"""Language identification and per-domain language balance statistics."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import BinaryIO, Protocol

from .model import DomainLangStats, normalize_lang


class ConfigurationError(ValueError):
    pass


class LanguageDetector(Protocol):
    def detect(self, text: str) -> tuple[str, float]: ...


def char_ngrams(text: str, order: int) -> list[str]:
    padded = f" {text} "
    return [padded[i:i + order] for i in range(len(padded) - order + 1)]


@dataclass
class LangIdModel:
    """Character n-gram naive Bayes over a fixed set of languages."""

    ngram_order: int
    log_probs: dict[str, dict[str, float]]
    unseen_log_prob: dict[str, float]
    priors: dict[str, float]
    other_threshold: float = 0.5
    _langs: tuple[str, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.ngram_order < 1:
            raise ConfigurationError("ngram_order must be >= 1")
        self._langs = tuple(sorted(self.priors))

    @property
    def languages(self) -> tuple[str, ...]:
        return self._langs

    def log_scores(self, text: str) -> dict[str, float]:
        scores = dict(self.priors)
        if len(text) < self.ngram_order:
            return scores
        grams = Counter(char_ngrams(text, self.ngram_order))
        for lang in self._langs:
            table, unseen = self.log_probs[lang], self.unseen_log_prob[lang]
            scores[lang] += sum(n * table.get(g, unseen) for g, n in grams.items())
        return scores

    def posteriors(self, text: str) -> dict[str, float]:
        scores = self.log_scores(text)
        top = max(scores.values())
        exp = {k: math.exp(v - top) for k, v in scores.items()}
        z = sum(exp.values())
        return {k: v / z for k, v in exp.items()}

    def detect(self, text: str) -> tuple[str, float]:
        return detect_language(self, text)


def train_langid(samples: Iterable[tuple[str, str]], ngram_order: int = 3,
                 languages: Iterable[str] | None = None,
                 other_threshold: float = 0.5) -> LangIdModel:
    """Add-one smoothed n-gram model; priors follow the sample counts."""
    counts: dict[str, Counter] = defaultdict(Counter)
    n_samples: Counter = Counter()
    for lang, text in samples:
        lang = normalize_lang(lang)
        if not text.strip():
            raise ConfigurationError(f"empty training text for {lang!r}")
        counts[lang].update(char_ngrams(text, ngram_order))
        n_samples[lang] += 1
    declared = set(languages) if languages is not None else set(n_samples)
    missing = sorted(lang for lang in declared if n_samples[lang] == 0)
    if not declared or missing:
        raise ConfigurationError(f"no training samples for languages: {missing or 'any'}")
    vocab = set().union(*(counts[lang] for lang in declared))
    total_samples = sum(n_samples[lang] for lang in declared)
    log_probs, unseen, priors = {}, {}, {}
    for lang in declared:
        denom = math.log(sum(counts[lang].values()) + len(vocab) + 1)
        log_probs[lang] = {g: math.log(n + 1) - denom for g, n in counts[lang].items()}
        unseen[lang] = -denom
        priors[lang] = math.log(n_samples[lang] / total_samples)
    return LangIdModel(ngram_order, log_probs, unseen, priors, other_threshold)


def detect_language(model: LangIdModel, text: str) -> tuple[str, float]:
    """Most probable language and its posterior; ``"other"`` below the threshold."""
    if not text.strip():
        raise ValueError("cannot detect the language of empty text")
    post = model.posteriors(text.strip())
    lang = max(sorted(post), key=post.__getitem__)
    conf = post[lang]
    if conf < model.other_threshold:
        return "other", conf
    return lang, conf


def load_langid_samples(source: BinaryIO) -> list[tuple[str, str]]:
    """``lang<TAB>text`` lines."""
    samples = []
    for lineno, raw in enumerate(source, 1):
        line = raw.decode("utf-8").rstrip("\r\n")
        if not line.strip():
            continue
        lang, sep, text = line.partition("\t")
        if not sep or not text.strip():
            raise ConfigurationError(f"line {lineno}: expected lang<TAB>text")
        samples.append((lang, text))
    return samples


def accumulate_stats(docs: Iterable[tuple[str, str, int]]) -> dict[str, DomainLangStats]:
    totals: dict[str, Counter] = defaultdict(Counter)
    for domain, lang, nbytes in docs:
        if nbytes < 0:
            raise ValueError("byte counts must be non-negative")
        totals[domain][normalize_lang(lang)] += nbytes
    return {d: DomainLangStats(d, dict(totals[d])) for d in sorted(totals)}


def merge_stats(*parts: Mapping[str, DomainLangStats]) -> dict[str, DomainLangStats]:
    """Combine shard results; associative and commutative."""
    return accumulate_stats(
        (s.domain, lang, n) for part in parts for s in part.values() for lang, n in s.bytes_by_lang.items())


def rank_key(stats: DomainLangStats):
    return (-stats.ratio, -(stats.bytes_en + stats.bytes_ja), stats.domain)


def rank_domains(stats: Mapping[str, DomainLangStats], k: int) -> list[str]:
    """Best-balanced domains first; ratio-0 domains never appear."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted((s for s in stats.values() if s.ratio > 0), key=rank_key)
    return [s.domain for s in ranked[:k]]


def format_stats_report(stats: Mapping[str, DomainLangStats]) -> str:
    lines = ["domain\tbytes_en\tbytes_ja\tbytes_other\tratio\n"]
    for s in sorted(stats.values(), key=rank_key):
        lines.append(f"{s.domain}\t{s.bytes_en}\t{s.bytes_ja}\t{s.bytes_other}\t{s.ratio:.6f}\n")
    return "".join(lines)


def parse_stats_report(text: str) -> dict[str, DomainLangStats]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if lineno == 1 and line.startswith("domain\t"):
            continue
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 5:
            raise ValueError(f"line {lineno}: expected 5 columns")
        out[cols[0]] = DomainLangStats(cols[0], {"en": int(cols[1]), "ja": int(cols[2]), "other": int(cols[3])})
    return out
