"""Pair English and Japanese documents of one site."""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from urllib.parse import parse_qsl, urlsplit

from rapidfuzz.distance import Levenshtein

from .model import Lexicon, TextDocument, host_of
from .sentalign import tokenize

LANG_MARKERS = frozenset(("en", "ja", "jp", "eng", "jpn", "english", "japanese"))


@dataclass(frozen=True)
class DocPair:
    src_doc: TextDocument
    tgt_doc: TextDocument
    url_score: float
    content_score: float

    @property
    def combined_score(self) -> float:
        return 0.5 * self.url_score + 0.5 * self.content_score


def strip_language_markers(url: str) -> str:
    parts = urlsplit(url)
    segments = [s for s in parts.path.split("/") if s and s.lower() not in LANG_MARKERS]
    query = [(k, v) for k, v in parse_qsl(parts.query, keep_blank_values=True)
             if v.lower() not in LANG_MARKERS]
    path = "/".join(segments)
    if query:
        path += "?" + "&".join(f"{k}={v}" for k, v in query)
    return path


def normalized_similarity(a: str, b: str) -> float:
    """1 - Levenshtein distance / longer length; two empty strings are identical."""
    if not a and not b:
        return 1.0
    return 1.0 - Levenshtein.distance(a, b) / max(len(a), len(b))


def url_similarity(url_a: str, url_b: str) -> float:
    if host_of(url_a) != host_of(url_b):
        raise ValueError(f"urls on different hosts: {url_a!r}, {url_b!r}")
    return normalized_similarity(strip_language_markers(url_a), strip_language_markers(url_b))


def _bag(doc: TextDocument, lexicon: Lexicon) -> Counter:
    bag: Counter = Counter()
    for sent in doc.sentences:
        bag.update(tokenize(sent, doc.lang, lexicon))
    return bag


def _cosine(a: Counter, b: Counter) -> float:
    dot = sum(v * b[k] for k, v in a.items() if k in b)
    if dot == 0:
        return 0.0
    norm = math.sqrt(sum(v * v for v in a.values())) * math.sqrt(sum(v * v for v in b.values()))
    return min(1.0, dot / norm)


def translate_bag(bag: Counter, lexicon: Lexicon) -> Counter:
    out: Counter = Counter()
    for word, n in bag.items():
        if word.isdigit():
            out[word] += n
        for target in lexicon.translations(word):
            out[target] += n
    return out


def content_similarity(src: TextDocument, tgt: TextDocument, lexicon: Lexicon) -> float:
    """Cosine between the lexicon translation of ``src`` and the words of ``tgt``."""
    if src.lang == lexicon.tgt_lang and tgt.lang == lexicon.src_lang and src.lang != tgt.lang:
        src, tgt = tgt, src
    return _cosine(translate_bag(_bag(src, lexicon), lexicon), _bag(tgt, lexicon))


def pair_documents(en_docs: Sequence[TextDocument], ja_docs: Sequence[TextDocument],
                   lexicon: Lexicon, min_score: float = 0.3) -> list[DocPair]:
    """Greedy one-to-one matching on the combined score, best first."""
    ja_bags = {d.url: _bag(d, lexicon) for d in ja_docs}
    candidates = []
    for en in en_docs:
        translated = translate_bag(_bag(en, lexicon), lexicon)
        for ja in ja_docs:
            pair = DocPair(en, ja, url_similarity(en.url, ja.url), _cosine(translated, ja_bags[ja.url]))
            if pair.combined_score >= min_score:
                candidates.append(pair)
    candidates.sort(key=lambda p: (-p.combined_score, p.src_doc.url, p.tgt_doc.url))
    used_src, used_tgt, out = set(), set(), []
    for pair in candidates:
        if pair.src_doc.url in used_src or pair.tgt_doc.url in used_tgt:
            continue
        used_src.add(pair.src_doc.url)
        used_tgt.add(pair.tgt_doc.url)
        out.append(pair)
    return out
