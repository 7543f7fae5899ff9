"""HTML to text, NFKC normalization and sentence splitting."""

from __future__ import annotations

import codecs
import re
from html.parser import HTMLParser

from .model import nfkc

BLOCK_TAGS = frozenset("""
    p div li br h1 h2 h3 h4 h5 h6 td th tr table section article ul ol dl dt dd
    header footer nav main aside blockquote pre hr form figure figcaption
    address title option
""".split())
DROP_TAGS = frozenset(("script", "style", "noscript", "head", "template"))

_META_CHARSET = re.compile(
    rb"""<meta[^>]+charset\s*=\s*["']?\s*([A-Za-z0-9_\-:.]+)""", re.IGNORECASE)
_SPACES = re.compile(r"[^\S\n]+")


def _codec(name: str | None) -> str | None:
    if not name:
        return None
    try:
        return codecs.lookup(name.strip().strip("\"'")).name
    except LookupError:
        return None


def decode_html(html: bytes, declared_charset: str | None = None) -> str:
    """Decode with the declared charset, then a meta charset, then UTF-8."""
    enc = _codec(declared_charset)
    if enc is None:
        m = _META_CHARSET.search(html[:4096])
        enc = _codec(m.group(1).decode("ascii", "replace")) if m else None
    if enc is not None:
        try:
            return html.decode(enc)
        except UnicodeDecodeError:
            pass
    return html.decode("utf-8", errors="replace")


class _TextCollector(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self.dropping: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag == "body":
            # a missing </head> must not swallow the document
            self.dropping = [t for t in self.dropping if t != "head"]
        if tag in DROP_TAGS:
            self.dropping.append(tag)
        elif tag in BLOCK_TAGS:
            self.parts.append("\n")

    def handle_startendtag(self, tag, attrs):
        if tag in BLOCK_TAGS:
            self.parts.append("\n")

    def handle_endtag(self, tag):
        if tag in DROP_TAGS:
            if tag in self.dropping:
                while self.dropping and self.dropping.pop() != tag:
                    pass
        elif tag in BLOCK_TAGS:
            self.parts.append("\n")

    def handle_data(self, data):
        if not self.dropping:
            self.parts.append(data)


def extract_text(html: bytes | str, declared_charset: str | None = None) -> str:
    """Visible text of an HTML page, one block element per line."""
    text = html if isinstance(html, str) else decode_html(html, declared_charset)
    parser = _TextCollector()
    try:
        parser.feed(text)
        parser.close()
    except Exception:  # html.parser rarely raises, but garbage input must never propagate
        pass
    raw = "".join(parser.parts).replace("\r\n", "\n").replace("\r", "\n")
    lines = (_SPACES.sub(" ", line).strip() for line in raw.split("\n"))
    return "\n".join(line for line in lines if line)


def normalize_nfkc(text: str) -> str:
    return nfkc(text)


ABBREVIATIONS = frozenset((
    "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "Sr.", "Jr.", "St.", "etc.", "e.g.",
    "i.e.", "vs.", "Fig.", "No.", "Inc.", "Ltd.", "Co.", "Corp.", "Jan.", "Feb.",
    "Mar.", "Apr.", "Jun.", "Jul.", "Aug.", "Sep.", "Sept.", "Oct.", "Nov.",
    "Dec.", "approx.", "Vol.", "pp.", "cf.", "al.",
))

# NFKC folds full-width ！？．） to ASCII, so both forms are listed.
_JA_SPLIT = re.compile(r"""(?:[。！？!?]|[．.](?![0-9A-Za-z]))[」』）)"'’”]*""")
_EN_SPLIT = re.compile(r"""[.!?]+["')\]’”]*(?=\s+["'(\[“‘]?[A-Z])""")


def _split_line_ja(line: str) -> list[str]:
    out, start = [], 0
    for m in _JA_SPLIT.finditer(line):
        out.append(line[start:m.end()])
        start = m.end()
    out.append(line[start:])
    return out


def _split_line_en(line: str, abbreviations: frozenset[str]) -> list[str]:
    out, start = [], 0
    for m in _EN_SPLIT.finditer(line):
        head = line[start:m.end()]
        last = head.split()[-1] if head.split() else ""
        if last.rstrip("\"')]’”") in abbreviations:
            continue
        out.append(head)
        start = m.end()
    out.append(line[start:])
    return out


def split_sentences(text: str, lang: str, abbreviations: frozenset[str] = ABBREVIATIONS) -> list[str]:
    sentences = []
    for line in text.splitlines():
        if lang == "ja":
            pieces = _split_line_ja(line)
        elif lang == "en":
            pieces = _split_line_en(line, abbreviations)
        else:
            pieces = [line]
        sentences.extend(p.strip() for p in pieces if p.strip())
    return sentences
