"""Deterministic toy bilingual web sites with known gold sentence pairs.

The generated language is a pseudo-English / pseudo-Japanese pair built on a
random bilingual word list, so every true translation is known exactly.
"""

from __future__ import annotations

import html
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import SentencePair, format_pair, nfkc

CONSONANTS = "bdfgklmnprstvz"
VOWELS = "aeiou"
FUNCTION_WORDS = ("the", "a", "of", "to", "in", "and", "with", "for", "on", "at")
KANJI = (
    "山川田中日月火水木金土本人大小上下左右前後東西南北春夏秋冬花草竹石雨雪風空海森林村町市国語"
    "学校先生年時分半毎朝昼夜午電車道駅店社会長高安新古多少明暗白黒赤青早近遠強弱重軽広太細"
)
PARTICLES = ("は", "が", "を", "に", "で", "と", "の", "へ", "も")
ENDINGS = ("ます", "です", "した")
_FULLWIDTH_DIGITS = str.maketrans("0123456789", "０１２３４５６７８９")
_TERMINATORS = [(".", "。"), ("?", "？"), ("!", "！")]


@dataclass
class ToyLanguage:
    rng: np.random.Generator
    words: list[tuple[str, list[str]]] = field(default_factory=list)

    @classmethod
    def build(cls, seed: int, n_entries: int = 500) -> ToyLanguage:
        rng = np.random.default_rng(seed)
        lang = cls(rng)
        en_seen, ja_seen = set(FUNCTION_WORDS), set()
        entries = 0
        while entries < n_entries:
            en = "".join(CONSONANTS[rng.integers(len(CONSONANTS))] + VOWELS[rng.integers(len(VOWELS))]
                         for _ in range(int(rng.integers(2, 4))))
            if rng.random() < 0.4:
                en += CONSONANTS[rng.integers(len(CONSONANTS))]
            if en in en_seen:
                continue
            senses = 2 if rng.random() < 0.1 and entries + 2 <= n_entries else 1
            ja_words = []
            while len(ja_words) < senses:
                ja = "".join(KANJI[rng.integers(len(KANJI))] for _ in range(2))
                if ja not in ja_seen:
                    ja_seen.add(ja)
                    ja_words.append(ja)
            en_seen.add(en)
            lang.words.append((en, ja_words))
            entries += senses
        return lang

    def lexicon_lines(self) -> list[str]:
        return [f"{en}\t{ja}\n" for en, senses in self.words for ja in senses]

    def _number(self) -> str:
        if self.rng.random() < 0.5:
            return str(int(self.rng.integers(1950, 2025)))
        return str(int(self.rng.integers(2, 100)))

    def sentence_pair(self, keep_fraction: float = 1.0) -> tuple[str, str, str]:
        """(English, Japanese as written on the page, Japanese after NFKC).

        With ``keep_fraction < 1`` only that share of the English content
        words is translated; the rest of the Japanese side is unrelated words,
        giving a partially parallel (noisy) pair.
        """
        rng = self.rng
        k = int(rng.integers(4, 10))
        idx = rng.choice(len(self.words), size=2 * k, replace=False)
        picks = [self.words[i] for i in idx[:k]]
        fillers = [self.words[i] for i in idx[k:]]
        n_keep = k if keep_fraction >= 1.0 else int(k * keep_fraction)
        en_tokens, ja_tokens = [], []
        for pos, (en, senses) in enumerate(picks):
            if pos >= n_keep:
                senses = fillers[pos][1]
            if rng.random() < 0.4:
                en_tokens.append(FUNCTION_WORDS[rng.integers(len(FUNCTION_WORDS))])
            en_tokens.append(en)
            ja_tokens.append(senses[rng.integers(len(senses))])
        number = self._number() if rng.random() < 0.25 else None
        if number is not None:
            pos = int(rng.integers(1, len(en_tokens) + 1))
            en_tokens.insert(pos, number)
        # verb-final: the first English content word goes last in Japanese
        ja_tokens = ja_tokens[1:] + ja_tokens[:1]
        en_end, ja_end = _TERMINATORS[int(rng.choice(3, p=[0.85, 0.1, 0.05]))]
        en_text = " ".join(en_tokens)
        en_text = en_text[0].upper() + en_text[1:] + en_end
        ja_parts = []
        for tok in ja_tokens[:-1]:
            ja_parts.append(tok + PARTICLES[rng.integers(len(PARTICLES))])
        if number is not None:
            ja_parts.insert(int(rng.integers(0, len(ja_parts) + 1)),
                            number.translate(_FULLWIDTH_DIGITS) + "年に")
        ja_parts.append(ja_tokens[-1] + ENDINGS[rng.integers(len(ENDINGS))] + ja_end)
        ja_page = "".join(ja_parts)
        return en_text, ja_page, nfkc(ja_page)


@dataclass(frozen=True)
class SiteSpec:
    domain: str
    en_path: str
    ja_path: str
    ja_charset: str = "utf-8"


SITES = (
    SiteSpec("www.alpha-travel.example", "en/page{i}.html", "ja/page{i}.html"),
    SiteSpec("news.beta-shop.example", "english/news/item{i}.html", "japanese/news/item{i}.html", "shift_jis"),
)
MONOLINGUAL_SITE = "blog.gamma-notes.example"


def _page(title: str, sentences: list[str], lang: str, links: list[tuple[str, str]],
          charset: str = "utf-8", nav: str = "Home | About | Contact", footer: str = "") -> str:
    paras, i = [], 0
    rng_sizes = [3, 2, 4, 3, 1, 2]
    k = 0
    while i < len(sentences):
        n = rng_sizes[k % len(rng_sizes)]
        joiner = "" if lang == "ja" else " "
        paras.append("<p>" + html.escape(joiner.join(sentences[i:i + n])) + "</p>")
        i += n
        k += 1
    link_html = "".join(f'<li><a href="{href}">{html.escape(text)}</a></li>' for href, text in links)
    return (
        f'<!DOCTYPE html>\n<html lang="{lang}"><head><meta charset="{charset}">'
        f"<title>{html.escape(title)}</title>"
        "<script>var tracker = {id: 1}; if (a < b) { track(); }</script>"
        "<style>p { margin: 0 }</style></head>\n<body>"
        f"<nav>{html.escape(nav)}</nav>\n<article>\n" + "\n".join(paras) + "\n</article>\n"
        f"<ul>{link_html}</ul>\n<!-- generated page -->"
        f"<footer>{html.escape(footer)}</footer></body></html>\n"
    )


def _write(path: Path, text: str, charset: str = "utf-8") -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode(charset))


@dataclass
class FixtureSummary:
    gold: list[tuple[str, str]]
    n_pages: int
    n_noise: int


def build_fixture(out_dir: str | Path, seed: int = 2020, pages_per_site: int = 10,
                  pairs_per_page: int = 15, noise_sentences: int = 100,
                  lexicon_size: int = 500, partial_noise: float = 0.5) -> FixtureSummary:
    """Write sites, lexicon, langid samples, filter seed corpus, gold pairs and a config.

    Noise sentences come in unrelated en/ja couples placed in the same slot of
    a page pair, spread as evenly as possible over the page pairs.
    """
    out = Path(out_dir)
    toy = ToyLanguage.build(seed, lexicon_size)
    rng = np.random.default_rng(seed + 1)
    gold: list[tuple[str, str]] = []
    n_pages = n_noise = 0
    site_root = out / "site"
    n_pairs = len(SITES) * pages_per_site
    slots_total = noise_sentences // 2
    page_no = 0
    for site in SITES:
        footer = f"Copyright 2019 {site.domain}"
        index_links = []
        for i in range(1, pages_per_site + 1):
            en_sents, ja_sents = [], []
            n_slots = slots_total // n_pairs + (page_no < slots_total % n_pairs)
            page_no += 1
            noise_slots = set(rng.choice(pairs_per_page + n_slots, size=n_slots, replace=False).tolist())
            for slot in range(pairs_per_page + n_slots):
                if slot in noise_slots:
                    if rng.random() < partial_noise:
                        en, ja_page, _ = toy.sentence_pair(keep_fraction=0.5)
                    else:
                        # unrelated sentences sharing a slot on the two sides
                        en, ja_page = toy.sentence_pair()[0], toy.sentence_pair()[1]
                    en_sents.append(en)
                    ja_sents.append(ja_page)
                    n_noise += 2
                else:
                    en, ja_page, ja_norm = toy.sentence_pair()
                    en_sents.append(en)
                    ja_sents.append(ja_page)
                    gold.append((en, ja_norm))
            en_path = site.en_path.format(i=i)
            ja_path = site.ja_path.format(i=i)
            nxt = i % pages_per_site + 1
            _write(site_root / site.domain / en_path,
                   _page(f"Page {i}", en_sents, "en",
                         [("/", "Top"), ("/" + ja_path, "日本語"), ("/" + site.en_path.format(i=nxt), "Next")],
                         footer=footer))
            _write(site_root / site.domain / ja_path,
                   _page(f"ページ{i}", ja_sents, "ja",
                         [("/", "Top"), ("/" + en_path, "English"), ("/" + site.ja_path.format(i=nxt), "次へ")],
                         charset=site.ja_charset, footer=footer), site.ja_charset)
            index_links += [("/" + en_path, f"Page {i}"), ("/" + ja_path, f"ページ{i}")]
            n_pages += 2
        _write(site_root / site.domain / "index.html",
               _page(site.domain, [], "en", index_links, footer=footer))
        _write(site_root / site.domain / "robots.txt", "User-agent: *\nDisallow: /private/\n")
        _write(site_root / site.domain / "private" / "secret.html",
               _page("Private", ["This page must never be crawled."], "en", []))
    mono = [toy.sentence_pair()[0] for _ in range(30)]
    for i in range(3):
        _write(site_root / MONOLINGUAL_SITE / f"post{i + 1}.html",
               _page(f"Post {i + 1}", mono[i * 10:(i + 1) * 10], "en", [("/", "Top")]))
    _write(site_root / MONOLINGUAL_SITE / "index.html",
           _page("Notes", [], "en", [(f"/post{i + 1}.html", f"Post {i + 1}") for i in range(3)]))

    _write(out / "lexicon.tsv", "".join(toy.lexicon_lines()))
    samples = []
    for _ in range(200):
        en, ja_page, _ = toy.sentence_pair()
        samples += [f"en\t{en}\n", f"ja\t{nfkc(ja_page)}\n"]
    _write(out / "langid_train.tsv", "".join(samples))

    seed_pairs = []
    for i in range(400):
        en, _, ja = toy.sentence_pair()
        seed_pairs.append(SentencePair(f"http://seed.example/en/{i}", f"http://seed.example/ja/{i}", en, ja, 1.0, 1.0))
    _write(out / "seed_corpus.tsv", "".join(format_pair(p) for p in seed_pairs))
    _write(out / "gold.tsv", "".join(f"{en}\t{ja}\n" for en, ja in gold))
    _write(out / "pipeline.ini", FIXTURE_CONFIG)
    return FixtureSummary(gold, n_pages, n_noise)


FIXTURE_CONFIG = """\
# Synthetic two-site fixture; paths are relative to this file.
[general]
work_dir = work
seed = 2020

[paths]
lexicon = lexicon.tsv
langid_train = langid_train.tsv
rank_input = site
seed_corpus = seed_corpus.tsv

[rank]
top_k = 100

[crawl]
mirror_dir = site
politeness_delay = 0.001
max_duration = 600

[ingest]
# the toy sites are far below the 1 MiB production threshold
min_bytes = 1024
"""


def load_gold(path: str | Path) -> list[tuple[str, str]]:
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        en, ja = line.split("\t")
        rows.append((en, ja))
    return rows
