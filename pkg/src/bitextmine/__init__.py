"""Mine English-Japanese parallel sentences from web-crawl archives."""

from .model import (
    AlignmentBead,
    DomainLangStats,
    Lexicon,
    RawDocument,
    SentencePair,
    TextDocument,
    load_lexicon,
    parse_pairs,
    serialize_pairs,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentBead",
    "DomainLangStats",
    "Lexicon",
    "RawDocument",
    "SentencePair",
    "TextDocument",
    "load_lexicon",
    "parse_pairs",
    "serialize_pairs",
]
