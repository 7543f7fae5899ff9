"""Noise filtering: hard rules followed by a logistic-regression classifier."""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from typing import TextIO

import numpy as np
from rapidfuzz.distance import Levenshtein

from .langstat import ConfigurationError, LangIdModel
from .model import FormatError, Lexicon, SentencePair
from .sentalign import coverages, tokenize

FEATURE_NAMES = (
    "len_src_chars",
    "len_tgt_chars",
    "log_char_ratio",
    "lexical_score_fwd",
    "lexical_score_bwd",
    "langid_conf_src",
    "langid_conf_tgt",
    "digit_jaccard",
    "copy_similarity",
    "punct_ratio_diff",
)
MODEL_HEADER = "bitextmine-filter-model\t1"
MIN_POSITIVES = 100

_DIGITS = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class HardRuleConfig:
    min_chars: int = 3
    max_chars: int = 2000
    max_char_ratio: float = 6.0
    max_copy_similarity: float = 0.9
    min_digit_jaccard: float = 0.5
    digit_count_trigger: int = 3
    src_lang: str = "en"
    tgt_lang: str = "ja"


def digit_jaccard(src: str, tgt: str) -> float:
    a, b = Counter(_DIGITS.findall(src)), Counter(_DIGITS.findall(tgt))
    if not a and not b:
        return 1.0
    return sum((a & b).values()) / sum((a | b).values())


def copy_similarity(src: str, tgt: str) -> float:
    if not src and not tgt:
        return 1.0
    return 1.0 - Levenshtein.distance(src, tgt) / max(len(src), len(tgt))


def _punct_ratio(text: str) -> float:
    if not text:
        return 0.0
    return sum(unicodedata.category(ch).startswith("P") for ch in text) / len(text)


def hard_rules(pair: SentencePair, langid: LangIdModel | None,
               config: HardRuleConfig = HardRuleConfig()) -> str | None:
    """Name of the first rule the pair violates, or None when it passes."""
    src, tgt = pair.src_text, pair.tgt_text
    ls, lt = len(src), len(tgt)
    if min(ls, lt) < config.min_chars:
        return "too_short"
    if max(ls, lt) > config.max_chars:
        return "too_long"
    if not (1.0 / config.max_char_ratio <= lt / ls <= config.max_char_ratio):
        return "char_ratio"
    if copy_similarity(src, tgt) > config.max_copy_similarity:
        return "copy"
    if langid is not None:
        if langid.detect(src)[0] != config.src_lang:
            return "src_language"
        if langid.detect(tgt)[0] != config.tgt_lang:
            return "tgt_language"
    n_digits = max(len(_DIGITS.findall(src)), len(_DIGITS.findall(tgt)))
    if n_digits >= config.digit_count_trigger and digit_jaccard(src, tgt) < config.min_digit_jaccard:
        return "digit_mismatch"
    return None


def _lang_posterior(langid: LangIdModel | None, text: str, lang: str) -> float:
    if langid is None or not text.strip():
        return 0.0
    return langid.posteriors(text.strip()).get(lang, 0.0)


def extract_features(pair: SentencePair, lexicon: Lexicon, langid: LangIdModel | None,
                     src_lang: str = "en", tgt_lang: str = "ja") -> np.ndarray:
    src, tgt = pair.src_text, pair.tgt_text
    cov_s, cov_t = coverages(tokenize(src, src_lang, lexicon), tokenize(tgt, tgt_lang, lexicon), lexicon)
    return np.array([
        min(len(src) / 100.0, 5.0),
        min(len(tgt) / 100.0, 5.0),
        math.log(max(len(tgt), 1) / max(len(src), 1)),
        cov_s,
        cov_t,
        _lang_posterior(langid, src, src_lang),
        _lang_posterior(langid, tgt, tgt_lang),
        digit_jaccard(src, tgt),
        copy_similarity(src, tgt),
        abs(_punct_ratio(src) - _punct_ratio(tgt)),
    ], dtype=np.float64)


@dataclass
class FilterModel:
    feature_names: tuple[str, ...]
    weights: np.ndarray
    bias: float
    means: np.ndarray = field(default=None)
    scales: np.ndarray = field(default=None)

    def __post_init__(self):
        self.feature_names = tuple(self.feature_names)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        k = len(self.feature_names)
        self.means = np.zeros(k) if self.means is None else np.asarray(self.means, dtype=np.float64)
        self.scales = np.ones(k) if self.scales is None else np.asarray(self.scales, dtype=np.float64)
        if not (self.weights.shape == self.means.shape == self.scales.shape == (k,)):
            raise ValueError("weights, means and scales must match feature_names")
        if np.any(self.scales <= 0):
            raise ValueError("feature scales must be positive")

    def standardize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.means) / self.scales


def sigmoid(z):
    """Overflow-free logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def score_pair(model: FilterModel, features) -> float:
    x = np.asarray(features, dtype=np.float64)
    if x.shape != model.weights.shape:
        raise ValueError(f"expected {model.weights.shape[0]} features, got {x.shape}")
    z = float(model.standardize(x) @ model.weights + model.bias)
    # clip keeps the score strictly inside (0, 1) where float64 would round to 0 or 1
    return float(np.clip(sigmoid(np.array([z]))[0], 1e-300, 1.0 - 2.0**-53))


def loss_and_grad(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float):
    """Mean log loss plus (l2/2)|w|^2, with its gradient."""
    z = X @ w + b
    # log(1 + e^z) - y z, the stable form of the cross-entropy
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w))
    err = sigmoid(z) - y
    return loss, X.T @ err / len(y) + l2 * w, float(np.mean(err))


def fit_logistic(X: np.ndarray, y: np.ndarray, epochs: int = 200, learning_rate: float = 0.1,
                 l2: float = 1e-4) -> tuple[np.ndarray, float, list[float]]:
    """Full-batch gradient descent from zero; returns weights, bias, loss per epoch."""
    w = np.zeros(X.shape[1])
    b = 0.0
    history = []
    for _ in range(epochs):
        loss, gw, gb = loss_and_grad(w, b, X, y, l2)
        history.append(loss)
        w = w - learning_rate * gw
        b = b - learning_rate * gb
    history.append(loss_and_grad(w, b, X, y, l2)[0])
    return w, b, history


def fit_standardized(X: np.ndarray, y: np.ndarray, feature_names: Sequence[str] = FEATURE_NAMES,
                     epochs: int = 200, learning_rate: float = 0.1, l2: float = 1e-4) -> FilterModel:
    means = X.mean(axis=0)
    scales = X.std(axis=0)
    scales[scales < 1e-12] = 1.0
    w, b, _ = fit_logistic((X - means) / scales, y, epochs, learning_rate, l2)
    return FilterModel(tuple(feature_names), w, b, means, scales)


NEGATIVE_RECIPES = ("repair", "truncate", "shuffle", "copy")


def synthesize_negatives(positives: Sequence[SentencePair], seed: int,
                         lexicon: Lexicon | None = None) -> list[SentencePair]:
    """One corrupted pair per positive, recipe drawn uniformly per sample."""
    rng = np.random.default_rng(seed)
    n = len(positives)
    out = []
    for i, pair in enumerate(positives):
        recipe = NEGATIVE_RECIPES[int(rng.integers(len(NEGATIVE_RECIPES)))]
        tgt = pair.tgt_text
        if recipe == "repair" and n > 1:
            j = int(rng.integers(n - 1))
            tgt = positives[j if j < i else j + 1].tgt_text
        elif recipe == "truncate":
            tgt = tgt[: max(1, len(tgt) // 2)]
        elif recipe == "shuffle":
            toks = tokenize(tgt, "ja", lexicon) or list(tgt)
            order = rng.permutation(len(toks))
            tgt = "".join(toks[k] for k in order)
        else:
            tgt = pair.src_text
        if not tgt.strip():
            tgt = pair.src_text
        out.append(replace(pair, tgt_text=tgt, align_score=0.0, filter_score=0.0))
    return out


def train_filter(positives: Sequence[SentencePair], negative_synthesis_seed: int, lexicon: Lexicon,
                 langid: LangIdModel | None, epochs: int = 200, learning_rate: float = 0.1,
                 l2: float = 1e-4) -> FilterModel:
    if len(positives) < MIN_POSITIVES:
        raise ConfigurationError(f"need at least {MIN_POSITIVES} positive pairs, got {len(positives)}")
    negatives = synthesize_negatives(positives, negative_synthesis_seed, lexicon)
    X = np.array([extract_features(p, lexicon, langid) for p in (*positives, *negatives)])
    y = np.concatenate([np.ones(len(positives)), np.zeros(len(negatives))])
    return fit_standardized(X, y, FEATURE_NAMES, epochs, learning_rate, l2)


@dataclass
class RejectReport:
    by_reason: Counter = field(default_factory=Counter)
    below_threshold: int = 0
    kept: int = 0

    @property
    def total(self) -> int:
        return sum(self.by_reason.values()) + self.below_threshold + self.kept

    def to_tsv(self) -> str:
        rows = [(reason, n) for reason, n in sorted(self.by_reason.items())]
        rows.append(("below_threshold", self.below_threshold))
        rows.append(("kept", self.kept))
        return "reason\tcount\n" + "".join(f"{r}\t{n}\n" for r, n in rows)


def filter_corpus(pairs: Sequence[SentencePair], model: FilterModel, lexicon: Lexicon,
                  langid: LangIdModel | None, threshold: float = 0.5,
                  rules: HardRuleConfig = HardRuleConfig()) -> tuple[list[SentencePair], RejectReport]:
    report = RejectReport()
    kept = []
    for pair in pairs:
        reason = hard_rules(pair, langid, rules)
        if reason is not None:
            report.by_reason[reason] += 1
            continue
        score = score_pair(model, extract_features(pair, lexicon, langid, rules.src_lang, rules.tgt_lang))
        if score >= threshold:
            kept.append(replace(pair, filter_score=score))
            report.kept += 1
        else:
            report.below_threshold += 1
    return kept, report


def save_model(model: FilterModel, sink: TextIO) -> None:
    sink.write(MODEL_HEADER + "\n")
    for name, mean, scale, weight in zip(model.feature_names, model.means, model.scales, model.weights):
        sink.write(f"feature\t{name}\t{mean:.17g}\t{scale:.17g}\t{weight:.17g}\n")
    sink.write(f"bias\t{model.bias:.17g}\n")


def load_model(source: TextIO) -> FilterModel:
    lines = source.read().splitlines()
    if not lines or lines[0] != MODEL_HEADER:
        raise FormatError("not a filter model file (bad header)", 1)
    names, means, scales, weights, bias = [], [], [], [], None
    for lineno, line in enumerate(lines[1:], 2):
        cols = line.split("\t")
        try:
            if cols[0] == "feature" and len(cols) == 5:
                names.append(cols[1])
                means.append(float(cols[2]))
                scales.append(float(cols[3]))
                weights.append(float(cols[4]))
            elif cols[0] == "bias" and len(cols) == 2:
                bias = float(cols[1])
            elif line.strip():
                raise FormatError(f"unexpected record {cols[0]!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(str(exc), lineno) from None
    if bias is None:
        raise FormatError("missing bias line")
    try:
        return FilterModel(tuple(names), np.array(weights), bias, np.array(means), np.array(scales))
    except ValueError as exc:
        raise FormatError(str(exc)) from None
