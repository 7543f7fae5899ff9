"""Minimal WARC 1.0 reader/writer (plain or gzip, one member per record)."""

from __future__ import annotations

import gzip
import hashlib
import io
import uuid
import zlib
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from datetime import datetime, timezone
from email.utils import format_datetime, parsedate_to_datetime
from pathlib import Path
from typing import BinaryIO

from .model import RawDocument, host_of

GZIP_MAGIC = b"\x1f\x8b\x08"
_CHUNK = 1 << 20
HTML_TYPES = ("text/html", "application/xhtml+xml")


class CorruptRecord(Exception):
    pass


@dataclass
class WarcRecord:
    headers: dict[str, str]
    block: bytes

    @property
    def type(self) -> str:
        return self.headers.get("warc-type", "")


def _warc_date(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_warc_date(text: str) -> datetime:
    return datetime.strptime(text.strip(), "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


def _record_id(target: str, date: str, block: bytes) -> str:
    """Content-derived record id, so identical records get identical ids."""
    digest = hashlib.sha1(block).hexdigest()
    return f"<urn:uuid:{uuid.uuid5(uuid.NAMESPACE_URL, f'{target} {date} {digest}')}>"


def _record_bytes(headers: list[tuple[str, str]], block: bytes) -> bytes:
    head = "WARC/1.0\r\n" + "".join(f"{k}: {v}\r\n" for k, v in headers)
    head += f"Content-Length: {len(block)}\r\n\r\n"
    return head.encode("utf-8") + block + b"\r\n\r\n"


def response_record(doc: RawDocument) -> bytes:
    http_head = (
        "HTTP/1.1 200 OK\r\n"
        f"Content-Type: {doc.content_type}\r\n"
        f"Content-Length: {len(doc.body)}\r\n"
        f"Date: {format_datetime(doc.fetched_at.astimezone(timezone.utc), usegmt=True)}\r\n"
        "\r\n"
    ).encode("latin-1")
    headers = [
        ("WARC-Type", "response"),
        ("WARC-Record-ID", _record_id(doc.url, _warc_date(doc.fetched_at), doc.body)),
        ("WARC-Date", _warc_date(doc.fetched_at)),
        ("WARC-Target-URI", doc.url),
        ("Content-Type", "application/http; msgtype=response"),
    ]
    return _record_bytes(headers, http_head + doc.body)


def warcinfo_record(software: str = "bitextmine") -> bytes:
    block = f"software: {software}\r\nformat: WARC File Format 1.0\r\n".encode("utf-8")
    date = _warc_date(datetime.now(timezone.utc))
    headers = [
        ("WARC-Type", "warcinfo"),
        ("WARC-Record-ID", _record_id("warcinfo", date, block)),
        ("WARC-Date", date),
        ("Content-Type", "application/warc-fields"),
    ]
    return _record_bytes(headers, block)


def write_warc(docs: Iterable[RawDocument], sink: BinaryIO, compress: bool = True) -> int:
    """Write a warcinfo record followed by one response record per document."""
    written = 0
    for record in _with_info(docs):
        data = gzip.compress(record, mtime=0) if compress else record
        sink.write(data)
        written += len(data)
    return written


def _with_info(docs: Iterable[RawDocument]) -> Iterator[bytes]:
    yield warcinfo_record()
    for doc in docs:
        yield response_record(doc)


def _read_record(stream: BinaryIO) -> WarcRecord | None:
    line = stream.readline()
    while line in (b"\r\n", b"\n"):
        line = stream.readline()
    if not line:
        return None
    if not line.startswith(b"WARC/"):
        raise CorruptRecord(f"bad version line {line[:40]!r}")
    headers: dict[str, str] = {}
    while True:
        line = stream.readline()
        if not line:
            raise CorruptRecord("unexpected end of headers")
        if line in (b"\r\n", b"\n"):
            break
        name, sep, value = line.decode("utf-8", "replace").partition(":")
        if not sep:
            raise CorruptRecord(f"bad header line {line[:40]!r}")
        headers[name.strip().lower()] = value.strip()
    try:
        length = int(headers["content-length"])
    except (KeyError, ValueError):
        raise CorruptRecord("missing or invalid Content-Length") from None
    block = stream.read(length)
    if len(block) != length:
        raise CorruptRecord("truncated record block")
    return WarcRecord(headers, block)


def _gzip_members(fh: BinaryIO) -> Iterator[bytes | None]:
    """Decompressed gzip members; None marks a corrupt or truncated member.

    After a corrupt member, reading resumes at the next gzip header.
    """
    pos = fh.tell()
    while True:
        fh.seek(pos)
        d = zlib.decompressobj(zlib.MAX_WBITS | 16)
        out = []
        consumed = 0
        try:
            while not d.eof:
                chunk = fh.read(_CHUNK)
                if not chunk:
                    break
                consumed += len(chunk)
                out.append(d.decompress(chunk))
        except zlib.error:
            yield None
            nxt = _find_magic(fh, pos + 1)
            if nxt is None:
                return
            pos = nxt
            continue
        if not d.eof:
            if consumed:
                yield None
            return
        yield b"".join(out)
        pos = pos + consumed - len(d.unused_data)


def _find_magic(fh: BinaryIO, start: int) -> int | None:
    fh.seek(start)
    offset = start
    tail = b""
    while True:
        chunk = fh.read(_CHUNK)
        if not chunk:
            return None
        buf = tail + chunk
        idx = buf.find(GZIP_MAGIC)
        if idx >= 0:
            return offset - len(tail) + idx
        tail = buf[-(len(GZIP_MAGIC) - 1):]
        offset += len(chunk)


@dataclass
class ReadStats:
    records: int = 0
    documents: int = 0
    skipped_type: int = 0
    skipped_status: int = 0
    skipped_content: int = 0
    corrupt: int = 0
    by_reason: dict[str, int] = field(default_factory=dict)


def iter_records(path: str | Path, stats: ReadStats) -> Iterator[WarcRecord]:
    with open(path, "rb") as fh:
        gzipped = fh.read(3) == GZIP_MAGIC
        fh.seek(0)
        if not gzipped:
            yield from _plain_records(fh, stats)
            return
        for member in _gzip_members(fh):
            if member is None:
                stats.corrupt += 1
                continue
            yield from _plain_records(io.BytesIO(member), stats)


def _plain_records(stream: BinaryIO, stats: ReadStats) -> Iterator[WarcRecord]:
    while True:
        try:
            record = _read_record(stream)
        except CorruptRecord:
            stats.corrupt += 1
            return
        if record is None:
            return
        stats.records += 1
        yield record


def parse_http_response(block: bytes) -> tuple[int, dict[str, str], bytes]:
    head, sep, body = block.partition(b"\r\n\r\n")
    if not sep:
        head, sep, body = block.partition(b"\n\n")
    if not sep:
        raise CorruptRecord("no HTTP header terminator")
    lines = head.decode("latin-1").splitlines()
    parts = lines[0].split(None, 2) if lines else []
    if len(parts) < 2 or not parts[0].startswith("HTTP/"):
        raise CorruptRecord("bad HTTP status line")
    try:
        status = int(parts[1])
    except ValueError:
        raise CorruptRecord("bad HTTP status code") from None
    headers = {}
    for line in lines[1:]:
        name, _, value = line.partition(":")
        headers[name.strip().lower()] = value.strip()
    return status, headers, body


def is_html(content_type: str) -> bool:
    return content_type.split(";")[0].strip().lower() in HTML_TYPES


def iter_documents(path: str | Path, stats: ReadStats) -> Iterator[RawDocument]:
    for record in iter_records(path, stats):
        if record.type != "response":
            stats.skipped_type += 1
            continue
        try:
            status, headers, body = parse_http_response(record.block)
        except CorruptRecord:
            stats.corrupt += 1
            continue
        if status != 200:
            stats.skipped_status += 1
            continue
        ctype = headers.get("content-type", "")
        if not is_html(ctype):
            stats.skipped_content += 1
            continue
        url = record.headers.get("warc-target-uri", "").strip("<>")
        try:
            fetched = _parse_warc_date(record.headers.get("warc-date", ""))
        except ValueError:
            fetched = parsedate_to_datetime(headers["date"]) if "date" in headers else datetime.fromtimestamp(0, timezone.utc)
        try:
            doc = RawDocument(url, host_of(url), fetched, ctype, body)
        except ValueError:
            stats.corrupt += 1
            continue
        stats.documents += 1
        yield doc
