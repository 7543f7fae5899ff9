"""Length + lexicon sentence alignment by dynamic programming.

Bead costs combine a length model (a normal approximation of the
target/source character-length ratio) with the overlap of crude word-by-word
translations through a bilingual lexicon. Insertions and deletions pay a
fixed skip penalty on top of their prior.
"""

from __future__ import annotations

import math
import re
import unicodedata
from collections.abc import Sequence
from dataclasses import dataclass, field

from .model import AlignmentBead, Lexicon, SentencePair, TextDocument

DEFAULT_PRIORS = {
    "1:1": 0.89,
    "1:0": 0.00495,
    "0:1": 0.00495,
    "2:1": 0.0445,
    "1:2": 0.0445,
    "2:2": 0.011,
}
MAX_LENGTH_COST = 25.0

_EN_TOKEN = re.compile(r"[^\W_]+")
_DIGITS = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class AlignParams:
    bead_priors: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_PRIORS))
    length_ratio_c: float | None = None
    length_var_s2: float = 6.8
    lex_weight: float = 3.0
    skip_penalty: float = 2.0
    ratio_bounds: tuple[float, float] = (0.3, 3.0)

    def __post_init__(self):
        if set(self.bead_priors) - set(DEFAULT_PRIORS) or "1:1" not in self.bead_priors:
            raise ValueError(f"bead kinds must be a subset of {sorted(DEFAULT_PRIORS)} including 1:1")
        if any(p <= 0 for p in self.bead_priors.values()):
            raise ValueError("bead priors must be positive")
        # the classical defaults sum to 0.9999; renormalize so the priors form a distribution
        total = sum(self.bead_priors.values())
        object.__setattr__(self, "bead_priors", {k: p / total for k, p in self.bead_priors.items()})
        if self.length_var_s2 <= 0:
            raise ValueError("length_var_s2 must be positive")
        if self.lex_weight < 0 or self.skip_penalty < 0:
            raise ValueError("lex_weight and skip_penalty must be non-negative")
        if self.length_ratio_c is not None and self.length_ratio_c <= 0:
            raise ValueError("length_ratio_c must be positive")

    @property
    def bead_log_priors(self) -> dict[str, float]:
        return {k: math.log(p) for k, p in self.bead_priors.items()}


def _char_class(ch: str) -> str:
    if ch.isdigit():
        return "digit"
    name = unicodedata.name(ch, "")
    if name.startswith("CJK UNIFIED") or name.startswith("CJK COMPATIBILITY IDEOGRAPH") or ch in "々〆":
        return "kanji"
    if name.startswith("HIRAGANA"):
        return "hiragana"
    if name.startswith("KATAKANA") or ch == "ー":
        return "katakana"
    if ch.isalpha():
        return "latin"
    return ""


def _class_split(span: str) -> list[str]:
    tokens, cur, cur_cls = [], [], ""
    for ch in span:
        cls = _char_class(ch)
        if cls != cur_cls and cur:
            if cur_cls:
                tokens.append("".join(cur))
            cur = []
        cur.append(ch)
        cur_cls = cls
    if cur and cur_cls:
        tokens.append("".join(cur))
    return tokens


def tokenize(text: str, lang: str, lexicon: Lexicon | None = None) -> list[str]:
    """Word tokens used for lexicon lookups.

    English: lowercase alphanumeric runs. Japanese: greedy longest match
    against the lexicon's Japanese words, unmatched spans cut at
    script boundaries; punctuation and spaces never form tokens.
    """
    text = text.lower()
    if lang != "ja":
        return _EN_TOKEN.findall(text)
    words, longest = lexicon.word_index("ja") if lexicon is not None else (frozenset(), 0)
    tokens: list[str] = []
    pending_start = 0
    i, n = 0, len(text)
    while i < n:
        match = 0
        for size in range(min(longest, n - i), 0, -1):
            if text[i:i + size] in words:
                match = size
                break
        if match:
            tokens.extend(_class_split(text[pending_start:i]))
            tokens.append(text[i:i + match])
            i += match
            pending_start = i
        else:
            i += 1
    tokens.extend(_class_split(text[pending_start:]))
    return tokens


def _std_normal_sf2(z: float) -> float:
    """2 * (1 - Phi(|z|)) = erfc(|z| / sqrt 2), Chebyshev-fitted erfc (rel. error < 1.2e-7)."""
    x = abs(z) / math.sqrt(2.0)
    t = 1.0 / (1.0 + 0.5 * x)
    poly = (-x * x - 1.26551223 + t * (1.00002368 + t * (0.37409196 + t * (0.09678418
            + t * (-0.18628806 + t * (0.27886807 + t * (-1.13520398 + t * (1.48851587
            + t * (-0.82215223 + t * 0.17087277)))))))))
    return min(1.0, t * math.exp(poly))


def length_cost(src_chars: int, tgt_chars: int, params: AlignParams = AlignParams(),
                c: float | None = None) -> float:
    if src_chars < 0 or tgt_chars < 0:
        raise ValueError("character counts must be non-negative")
    if src_chars == 0 and tgt_chars == 0:
        raise ValueError("length cost undefined for two empty segments")
    if c is None:
        c = params.length_ratio_c if params.length_ratio_c is not None else 1.0
    s = max(src_chars, 1)
    delta = (tgt_chars - s * c) / math.sqrt(s * params.length_var_s2)
    p = _std_normal_sf2(delta)
    if p <= 0.0:
        return MAX_LENGTH_COST
    return min(MAX_LENGTH_COST, max(0.0, -math.log(p)))


def _coverage(tokens: Sequence[str], other: set[str], table: dict[str, dict[str, float]]) -> float:
    hit = 0
    for tok in tokens:
        if tok.isdigit() and tok in other:
            hit += 1
        elif any(t in other for t in table.get(tok, ())):
            hit += 1
    return hit / len(tokens)


def coverages(src_tokens: Sequence[str], tgt_tokens: Sequence[str], lexicon: Lexicon) -> tuple[float, float]:
    """Fraction of each side's tokens with a translation present on the other side."""
    if not src_tokens or not tgt_tokens:
        return 0.0, 0.0
    return (_coverage(src_tokens, set(tgt_tokens), lexicon.forward),
            _coverage(tgt_tokens, set(src_tokens), lexicon.backward))


def lexical_score(src_tokens: Sequence[str], tgt_tokens: Sequence[str], lexicon: Lexicon) -> float:
    cov_s, cov_t = coverages(src_tokens, tgt_tokens, lexicon)
    if cov_s == 0.0 or cov_t == 0.0:
        return 0.0
    return 2.0 * cov_s * cov_t / (cov_s + cov_t)


def estimate_length_ratio(src: Sequence[str], tgt: Sequence[str], params: AlignParams) -> float:
    if params.length_ratio_c is not None:
        return params.length_ratio_c
    src_total = sum(map(len, src))
    if src_total == 0:
        return 1.0
    lo, hi = params.ratio_bounds
    return min(hi, max(lo, sum(map(len, tgt)) / src_total))


class BeadScorer:
    """Cost of every candidate bead for one pair of sentence lists."""

    def __init__(self, src: Sequence[str], tgt: Sequence[str], lexicon: Lexicon,
                 params: AlignParams = AlignParams(), src_lang: str | None = None,
                 tgt_lang: str | None = None):
        self.params = params
        self.lexicon = lexicon
        self.src_lens = [len(s) for s in src]
        self.tgt_lens = [len(t) for t in tgt]
        self.src_tokens = [tokenize(s, src_lang or lexicon.src_lang, lexicon) for s in src]
        self.tgt_tokens = [tokenize(t, tgt_lang or lexicon.tgt_lang, lexicon) for t in tgt]
        self.c = estimate_length_ratio(src, tgt, params)
        self.neg_log_prior = {k: -v for k, v in params.bead_log_priors.items()}
        self._cache: dict[tuple[int, int, int, int], tuple[float, float]] = {}

    def cost(self, i: int, a: int, j: int, b: int) -> tuple[float, float]:
        """(cost, lexical score) of the bead covering src[i:i+a] and tgt[j:j+b]."""
        key = (i, a, j, b)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        prior = self.neg_log_prior[f"{a}:{b}"]
        if a == 0 or b == 0:
            result = (prior + self.params.skip_penalty, 0.0)
        else:
            src_tok = [t for toks in self.src_tokens[i:i + a] for t in toks]
            tgt_tok = [t for toks in self.tgt_tokens[j:j + b] for t in toks]
            lex = lexical_score(src_tok, tgt_tok, self.lexicon)
            length = length_cost(sum(self.src_lens[i:i + a]), sum(self.tgt_lens[j:j + b]),
                                 self.params, self.c)
            result = (prior + length + self.params.lex_weight * (1.0 - lex), lex)
        self._cache[key] = result
        return result


def _kinds(params: AlignParams) -> list[tuple[int, int]]:
    return [tuple(int(x) for x in k.split(":")) for k in params.bead_priors]


def align_sentences(src: Sequence[str], tgt: Sequence[str], lexicon: Lexicon,
                    params: AlignParams = AlignParams(), src_lang: str | None = None,
                    tgt_lang: str | None = None) -> list[AlignmentBead]:
    """Minimum-cost monotone bead sequence covering both sentence lists."""
    scorer = BeadScorer(src, tgt, lexicon, params, src_lang, tgt_lang)
    kinds = _kinds(params)
    m, n = len(src), len(tgt)
    inf = math.inf
    cost = [[inf] * (n + 1) for _ in range(m + 1)]
    back: list[list[tuple[int, int] | None]] = [[None] * (n + 1) for _ in range(m + 1)]
    cost[0][0] = 0.0
    for i in range(m + 1):
        row = cost[i]
        for j in range(n + 1):
            if i == 0 and j == 0:
                continue
            best, arg = inf, None
            for a, b in kinds:
                if a > i or b > j:
                    continue
                prev = cost[i - a][j - b]
                if prev == inf:
                    continue
                total = prev + scorer.cost(i - a, a, j - b, b)[0]
                if total < best:
                    best, arg = total, (a, b)
            row[j] = best
            back[i][j] = arg
    beads = []
    i, j = m, n
    while i or j:
        a, b = back[i][j]
        bead_cost, lex = scorer.cost(i - a, a, j - b, b)
        beads.append(AlignmentBead(f"{a}:{b}", (i - a, i), (j - b, j), bead_cost, lex))
        i, j = i - a, j - b
    beads.reverse()
    return beads


def extract_pairs(beads: Sequence[AlignmentBead], src_doc: TextDocument, tgt_doc: TextDocument,
                  min_align_score: float = 0.1) -> list[SentencePair]:
    pairs = []
    for bead in beads:
        if not bead.is_substitution or bead.score < min_align_score:
            continue
        src_text = " ".join(src_doc.sentences[bead.src_span[0]:bead.src_span[1]])
        tgt_text = " ".join(tgt_doc.sentences[bead.tgt_span[0]:bead.tgt_span[1]])
        pairs.append(SentencePair(src_doc.url, tgt_doc.url, src_text, tgt_text,
                                  min(1.0, max(0.0, bead.score)), 1.0))
    return pairs


def align_documents(src_doc: TextDocument, tgt_doc: TextDocument, lexicon: Lexicon,
                    params: AlignParams = AlignParams(), min_align_score: float = 0.1) -> list[SentencePair]:
    beads = align_sentences(src_doc.sentences, tgt_doc.sentences, lexicon, params,
                            src_doc.lang, tgt_doc.lang)
    return extract_pairs(beads, src_doc, tgt_doc, min_align_score)
