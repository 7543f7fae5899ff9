"""Read crawl archives and drop domains too small to mine."""

from __future__ import annotations

import os
from collections.abc import Iterator, Mapping
from datetime import datetime, timezone
from pathlib import Path

from .model import RawDocument, host_of
from .warc import ReadStats, iter_documents

ONE_MB = 1 << 20
HTML_SUFFIXES = (".html", ".htm", ".xhtml")


class ArchiveReader:
    """Iterable of response documents; ``stats`` holds skip/corruption counts."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        if not self.path.exists():
            raise FileNotFoundError(f"no such archive: {self.path}")
        if not os.access(self.path, os.R_OK):
            raise PermissionError(f"cannot read archive: {self.path}")
        self.stats = ReadStats()

    def __iter__(self) -> Iterator[RawDocument]:
        if self.path.is_dir():
            return self._iter_directory()
        return iter_documents(self.path, self.stats)

    def _iter_directory(self) -> Iterator[RawDocument]:
        """``root/<host>/<path>.html`` becomes ``http://<host>/<path>.html``."""
        for path in sorted(self.path.rglob("*")):
            if not path.is_file():
                continue
            self.stats.records += 1
            if path.suffix.lower() not in HTML_SUFFIXES:
                self.stats.skipped_content += 1
                continue
            rel = path.relative_to(self.path).as_posix()
            url = f"http://{rel}"
            if "/" not in rel or not host_of(url):
                self.stats.skipped_content += 1
                continue
            fetched = datetime.fromtimestamp(int(path.stat().st_mtime), timezone.utc)
            self.stats.documents += 1
            yield RawDocument(url, host_of(url), fetched, "text/html", path.read_bytes())


def read_archive(path: str | Path) -> ArchiveReader:
    return ArchiveReader(path)


def filter_small_domains(domain_archives: Mapping[str, int], min_bytes: int = ONE_MB) -> set[str]:
    """Domains whose compressed archive holds at least ``min_bytes``."""
    for domain, size in domain_archives.items():
        if size < 0:
            raise ValueError(f"negative archive size for {domain!r}")
    return {d for d, size in domain_archives.items() if size >= min_bytes}
