"""Budgeted, polite, same-host breadth-first crawler."""

from __future__ import annotations

import logging
import os
import posixpath
import tempfile
import time
import urllib.error
import urllib.request
from collections import deque
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass, field
from datetime import datetime, timezone
from html.parser import HTMLParser
from pathlib import Path
from typing import Protocol
from urllib.parse import unquote, urldefrag, urljoin, urlsplit, urlunsplit
from urllib.robotparser import RobotFileParser

from .model import RawDocument, host_of
from .warc import is_html, write_warc

log = logging.getLogger(__name__)

DEFAULT_USER_AGENT = "bitextmine/0.1 (+parallel corpus research crawler)"
SKIP_EXTENSIONS = (
    ".pdf", ".jpg", ".jpeg", ".png", ".gif", ".svg", ".css", ".js", ".zip", ".gz",
    ".mp3", ".mp4", ".avi", ".doc", ".docx", ".xls", ".xlsx", ".ppt", ".pptx", ".ico",
)
DEFAULT_PORTS = {"http": 80, "https": 443}


class CrawlError(RuntimeError):
    pass


class FetchError(OSError):
    pass


@dataclass(frozen=True)
class CrawlBudget:
    max_duration: float = 86_400.0
    max_pages: float = float("inf")
    politeness_delay: float = 1.0
    max_depth: int = 10

    def __post_init__(self):
        for name in ("max_duration", "max_pages", "politeness_delay", "max_depth"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Response:
    url: str
    status: int
    content_type: str
    body: bytes


class Fetcher(Protocol):
    user_agent: str
    timeout: float

    def fetch(self, url: str) -> Response: ...


class HttpFetcher:
    """urllib-backed HTTP/1.1 fetcher."""

    def __init__(self, user_agent: str = DEFAULT_USER_AGENT, timeout: float = 30.0):
        self.user_agent = user_agent
        self.timeout = timeout

    def fetch(self, url: str) -> Response:
        req = urllib.request.Request(url, headers={"User-Agent": self.user_agent})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return Response(resp.geturl(), resp.status, resp.headers.get("Content-Type", ""), resp.read())
        except urllib.error.HTTPError as exc:
            return Response(url, exc.code, exc.headers.get("Content-Type", "") if exc.headers else "", b"")
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise FetchError(f"{url}: {exc}") from exc


class MirrorFetcher:
    """Serves ``http://host/path`` from ``root/host/path`` on disk (``index.html`` for directories)."""

    def __init__(self, root: str | Path, user_agent: str = DEFAULT_USER_AGENT, timeout: float = 30.0):
        self.root = Path(root)
        self.user_agent = user_agent
        self.timeout = timeout

    def fetch(self, url: str) -> Response:
        parts = urlsplit(url)
        rel = unquote(parts.path).lstrip("/")
        path = self.root / (parts.hostname or "") / rel
        if path.is_dir() or not rel or rel.endswith("/"):
            path = path / "index.html"
        try:
            path.resolve().relative_to(self.root.resolve())
        except ValueError:
            return Response(url, 403, "text/plain", b"")
        if not path.is_file():
            return Response(url, 404, "text/plain", b"")
        ctype = "text/html" if path.suffix in (".html", ".htm") else "text/plain"
        return Response(url, 200, ctype, path.read_bytes())


def normalize_url(url: str) -> str:
    """Lowercase scheme and host, drop default ports and the fragment, resolve dot segments."""
    url, _ = urldefrag(url)
    parts = urlsplit(url)
    scheme = parts.scheme.lower()
    host = (parts.hostname or "").lower()
    port = parts.port
    if port is None or DEFAULT_PORTS.get(scheme) == port:
        netloc = host
    else:
        netloc = f"{host}:{port}"
    path = posixpath.normpath(parts.path) if parts.path else "/"
    if path.startswith("//"):
        path = "/" + path.lstrip("/")
    if parts.path.endswith("/") and not path.endswith("/"):
        path += "/"
    return urlunsplit((scheme, netloc, path, parts.query, ""))


class _LinkParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.links: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag == "a":
            for name, value in attrs:
                if name == "href" and value:
                    self.links.append(value)


def extract_links(base_url: str, body: bytes) -> list[str]:
    parser = _LinkParser()
    try:
        parser.feed(body.decode("utf-8", errors="replace"))
    except Exception:
        pass
    return [urljoin(base_url, href.strip()) for href in parser.links]


@dataclass
class CrawlSummary:
    pages: int = 0
    bytes: int = 0
    stopped_reason: str = ""
    failures: int = 0
    fetched_urls: list[str] = field(default_factory=list)


class Crawl:
    """Iterate to crawl; ``summary`` is final once iteration ends."""

    def __init__(self, seed_url: str, budget: CrawlBudget, fetcher: Fetcher,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep,
                 now: Callable[[], datetime] = lambda: datetime.now(timezone.utc)):
        parts = urlsplit(seed_url)
        if parts.scheme not in ("http", "https") or not parts.hostname:
            raise ValueError(f"malformed seed url {seed_url!r}")
        self.seed_url = normalize_url(seed_url)
        self.host = host_of(seed_url)
        self._netloc = urlsplit(self.seed_url).netloc
        self.budget = budget
        self.fetcher = fetcher
        self.clock = clock
        self.sleep = sleep
        self.now = now
        self.summary = CrawlSummary()
        self._last_request: float | None = None
        self._delay = budget.politeness_delay
        self._deadline = 0.0

    def _wait_turn(self) -> bool:
        """Sleep until the host may be contacted again; False once the deadline is reached."""
        if self._last_request is not None:
            ready = self._last_request + self._delay
            if ready >= self._deadline:
                return False
            while (now := self.clock()) < ready:
                self.sleep(ready - now)
        return self.clock() < self._deadline

    def _request(self, url: str) -> Response:
        # politeness gaps are measured between request starts
        self._last_request = self.clock()
        return self.fetcher.fetch(url)

    def _load_robots(self) -> RobotFileParser:
        parts = urlsplit(self.seed_url)
        robots_url = urlunsplit((parts.scheme, parts.netloc, "/robots.txt", "", ""))
        rp = RobotFileParser(robots_url)
        try:
            resp = self._request(robots_url)
        except FetchError:
            rp.parse([])
            return rp
        if resp.status == 200:
            rp.parse(resp.body.decode("utf-8", errors="replace").splitlines())
        elif resp.status in (401, 403):
            rp.disallow_all = True
        else:
            rp.parse([])
        delay = rp.crawl_delay(self.fetcher.user_agent)
        if delay is not None and float(delay) > self._delay:
            self._delay = float(delay)
        return rp

    def __iter__(self) -> Iterator[RawDocument]:
        self._deadline = self.clock() + self.budget.max_duration
        robots = self._load_robots()
        frontier = deque([(self.seed_url, 0)])
        seen = {self.seed_url}
        first = True
        while frontier:
            if self.summary.pages >= self.budget.max_pages:
                self.summary.stopped_reason = "pages"
                return
            url, depth = frontier.popleft()
            if not robots.can_fetch(self.fetcher.user_agent, url):
                if first:
                    raise CrawlError(f"seed {url} disallowed by robots.txt")
                continue
            if not self._wait_turn():
                self.summary.stopped_reason = "time"
                return
            try:
                resp = self._request(url)
            except FetchError as exc:
                if first:
                    raise CrawlError(f"seed unreachable: {exc}") from exc
                log.warning("fetch failed: %s", exc)
                self.summary.failures += 1
                continue
            if first and resp.status >= 400:
                raise CrawlError(f"seed {url} returned HTTP {resp.status}")
            first = False
            if resp.status != 200 or not is_html(resp.content_type):
                self.summary.failures += resp.status != 200
                continue
            self.summary.pages += 1
            self.summary.bytes += len(resp.body)
            self.summary.fetched_urls.append(url)
            yield RawDocument(url, self.host, self.now(), resp.content_type, resp.body)
            if depth >= self.budget.max_depth:
                continue
            for link in extract_links(url, resp.body):
                norm = normalize_url(link)
                parts = urlsplit(norm)
                if parts.scheme not in ("http", "https") or parts.netloc != self._netloc:
                    continue
                if parts.path.lower().endswith(SKIP_EXTENSIONS) or norm in seen:
                    continue
                seen.add(norm)
                frontier.append((norm, depth + 1))
        self.summary.stopped_reason = "pages" if self.summary.pages >= self.budget.max_pages else "frontier_empty"


def crawl_domain(seed_url: str, budget: CrawlBudget = CrawlBudget(), fetcher: Fetcher | None = None,
                 **kwargs) -> Crawl:
    return Crawl(seed_url, budget, fetcher or HttpFetcher(), **kwargs)


def write_archive(docs: Iterable[RawDocument], path: str | Path) -> int:
    """Write documents as a per-record gzip WARC; the file appears atomically."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            size = write_warc(docs, fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return size
