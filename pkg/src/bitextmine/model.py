"""Shared pipeline types and the corpus / lexicon TSV formats."""

from __future__ import annotations

import math
import unicodedata
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from datetime import datetime
from types import MappingProxyType
from typing import BinaryIO
from urllib.parse import urlsplit

LANGS = ("en", "ja", "other")

BEAD_KINDS = ("1:1", "1:0", "0:1", "2:1", "1:2", "2:2")


class FormatError(ValueError):
    """Malformed corpus, lexicon or model file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def nfkc(text: str) -> str:
    return unicodedata.normalize("NFKC", text)


def normalize_lang(code: str) -> str:
    code = code.strip().lower()
    return code if code in LANGS else "other"


def host_of(url: str) -> str:
    return (urlsplit(url).hostname or "").lower()


@dataclass(frozen=True)
class DomainLangStats:
    domain: str
    bytes_by_lang: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        counts = {normalize_lang(k): 0 for k in self.bytes_by_lang}
        for lang, n in self.bytes_by_lang.items():
            if n < 0:
                raise ValueError(f"negative byte count for {lang!r}")
            counts[normalize_lang(lang)] += int(n)
        object.__setattr__(self, "bytes_by_lang", MappingProxyType(counts))

    @property
    def bytes_en(self) -> int:
        return self.bytes_by_lang.get("en", 0)

    @property
    def bytes_ja(self) -> int:
        return self.bytes_by_lang.get("ja", 0)

    @property
    def bytes_other(self) -> int:
        return self.bytes_by_lang.get("other", 0)

    @property
    def ratio(self) -> float:
        lo, hi = sorted((self.bytes_en, self.bytes_ja))
        return lo / hi if hi else 0.0


@dataclass(frozen=True)
class RawDocument:
    url: str
    domain: str
    fetched_at: datetime
    content_type: str
    body: bytes

    def __post_init__(self):
        if self.domain != host_of(self.url):
            raise ValueError(f"domain {self.domain!r} does not match url {self.url!r}")


@dataclass(frozen=True)
class TextDocument:
    url: str
    lang: str
    sentences: tuple[str, ...]

    def __post_init__(self):
        sents = tuple(self.sentences)
        for s in sents:
            if not s.strip():
                raise ValueError("empty sentence in TextDocument")
            if nfkc(s) != s:
                raise ValueError(f"sentence is not NFKC-normalized: {s!r}")
        object.__setattr__(self, "sentences", sents)
        object.__setattr__(self, "lang", normalize_lang(self.lang))

    @property
    def char_count(self) -> int:
        return sum(len(s) for s in self.sentences)

    @property
    def domain(self) -> str:
        return host_of(self.url)


@dataclass(frozen=True)
class AlignmentBead:
    kind: str
    src_span: tuple[int, int]
    tgt_span: tuple[int, int]
    cost: float
    score: float = 0.0

    def __post_init__(self):
        if self.kind not in BEAD_KINDS:
            raise ValueError(f"unknown bead kind {self.kind!r}")
        a, b = (int(x) for x in self.kind.split(":"))
        if self.src_span[1] - self.src_span[0] != a or self.tgt_span[1] - self.tgt_span[0] != b:
            raise ValueError(f"spans {self.src_span}/{self.tgt_span} do not match kind {self.kind}")
        if self.cost < 0:
            raise ValueError("bead cost must be non-negative")

    @property
    def is_substitution(self) -> bool:
        return self.kind not in ("1:0", "0:1")


@dataclass(frozen=True)
class SentencePair:
    src_url: str
    tgt_url: str
    src_text: str
    tgt_text: str
    align_score: float
    filter_score: float = 1.0

    def __post_init__(self):
        if not self.src_text.strip() or not self.tgt_text.strip():
            raise ValueError("sentence pair texts must be non-empty")
        for name in ("align_score", "filter_score"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0, 1]")


class Lexicon:
    """Bilingual word mapping with an exact inverse.

    ``forward`` maps a source word to ``{target: weight}``; ``backward`` is the
    inverse relation. Words are stored NFKC-normalized and lowercased.
    """

    def __init__(self, entries: Iterable[tuple[str, str, float]] = (),
                 src_lang: str = "en", tgt_lang: str = "ja"):
        self.src_lang = src_lang
        self.tgt_lang = tgt_lang
        self.forward: dict[str, dict[str, float]] = {}
        self.backward: dict[str, dict[str, float]] = {}
        self._index: dict[str, tuple[frozenset[str], int]] = {}
        for src, tgt, weight in entries:
            self.add(src, tgt, weight)

    @staticmethod
    def key(word: str) -> str:
        return nfkc(word).lower()

    def add(self, src: str, tgt: str, weight: float = 1.0) -> None:
        src, tgt = self.key(src).strip(), self.key(tgt).strip()
        if not src or not tgt:
            raise ValueError("empty lexicon word")
        if not (0.0 < weight <= 1.0):
            raise ValueError(f"weight {weight} outside (0, 1]")
        self._index.clear()
        w = max(weight, self.forward.get(src, {}).get(tgt, 0.0))
        self.forward.setdefault(src, {})[tgt] = w
        self.backward.setdefault(tgt, {})[src] = w

    def translations(self, word: str) -> dict[str, float]:
        return self.forward.get(word, {})

    def inverted(self) -> Lexicon:
        lex = Lexicon(src_lang=self.tgt_lang, tgt_lang=self.src_lang)
        lex.forward = {k: dict(v) for k, v in self.backward.items()}
        lex.backward = {k: dict(v) for k, v in self.forward.items()}
        return lex

    def word_index(self, lang: str) -> tuple[frozenset[str], int]:
        """Vocabulary of ``lang`` and its longest word length, cached."""
        if lang not in self._index:
            words = frozenset(self.vocabulary(lang))
            self._index[lang] = (words, max(map(len, words), default=0))
        return self._index[lang]

    def vocabulary(self, lang: str) -> set[str]:
        """Words of the side written in ``lang`` (empty set if neither side is)."""
        if lang == self.src_lang:
            return set(self.forward)
        if lang == self.tgt_lang:
            return set(self.backward)
        return set()

    def __len__(self) -> int:
        return sum(len(v) for v in self.forward.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, Lexicon) and self.forward == other.forward


def load_lexicon(source: BinaryIO) -> Lexicon:
    """Read ``src<TAB>tgt[<TAB>weight]`` lines; duplicates keep the max weight."""
    lex = Lexicon()
    for lineno, raw in enumerate(source, 1):
        try:
            line = raw.decode("utf-8").rstrip("\r\n")
        except UnicodeDecodeError:
            raise FormatError("invalid UTF-8", lineno) from None
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) not in (2, 3):
            raise FormatError(f"expected 2 or 3 columns, got {len(cols)}", lineno)
        weight = 1.0
        if len(cols) == 3:
            try:
                weight = float(cols[2])
            except ValueError:
                raise FormatError(f"unparsable weight {cols[2]!r}", lineno) from None
            if not (0.0 < weight <= 1.0):
                raise FormatError(f"weight {weight} outside (0, 1]", lineno)
        if not cols[0].strip() or not cols[1].strip():
            raise FormatError("empty word", lineno)
        lex.add(cols[0], cols[1], weight)
    return lex


def _clean_field(text: str) -> str:
    return text.replace("\r\n", " ").replace("\t", " ").replace("\n", " ").replace("\r", " ")


def format_pair(pair: SentencePair) -> str:
    cols = [_clean_field(pair.src_url), _clean_field(pair.tgt_url),
            _clean_field(pair.src_text), _clean_field(pair.tgt_text),
            f"{pair.align_score:.6f}", f"{pair.filter_score:.6f}"]
    return "\t".join(cols) + "\n"


def serialize_pairs(pairs: Iterable[SentencePair], sink: BinaryIO) -> int:
    """Write pairs as corpus TSV; returns the number of bytes written."""
    written = 0
    for i, pair in enumerate(pairs):
        data = format_pair(pair).encode("utf-8")
        try:
            sink.write(data)
        except OSError as exc:
            raise OSError(exc.errno, f"failed writing pair {i}: {exc.strerror or exc}") from exc
        written += len(data)
    return written


def _parse_score(text: str, lineno: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise FormatError(f"unparsable score {text!r}", lineno) from None
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise FormatError(f"score {text!r} outside [0, 1]", lineno)
    return value


def parse_pairs(source: BinaryIO) -> list[SentencePair]:
    pairs = []
    for lineno, raw in enumerate(source, 1):
        line = raw.decode("utf-8")
        if line.endswith("\n"):
            line = line[:-1]
        cols = line.split("\t")
        if len(cols) != 6:
            raise FormatError(f"expected 6 columns, got {len(cols)}", lineno)
        try:
            pairs.append(SentencePair(cols[0], cols[1], cols[2], cols[3],
                                      _parse_score(cols[4], lineno),
                                      _parse_score(cols[5], lineno)))
        except FormatError:
            raise
        except ValueError as exc:
            raise FormatError(str(exc), lineno) from None
    return pairs
