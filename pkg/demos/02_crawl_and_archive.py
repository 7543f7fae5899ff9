"""Crawl a site politely and keep the pages in a WARC archive.

The crawl runs against the bundled synthetic mirror, so nothing touches the
network. Pages disallowed by robots.txt are never requested.
"""

import tempfile
from pathlib import Path

from bitextmine.crawler import CrawlBudget, MirrorFetcher, crawl_domain, write_archive
from bitextmine.ingest import filter_small_domains, read_archive

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "synthetic"

crawl = crawl_domain("http://www.alpha-travel.example/",
                     CrawlBudget(max_pages=12, politeness_delay=0.01),
                     MirrorFetcher(FIXTURE / "site"))
with tempfile.TemporaryDirectory() as tmp:
    archive = Path(tmp) / "alpha.warc.gz"
    size = write_archive(crawl, archive)
    s = crawl.summary
    print(f"crawled {s.pages} pages ({s.bytes} bytes), stopped because: {s.stopped_reason}")
    print(f"archive is {size} compressed bytes")
    for doc in list(read_archive(archive))[:4]:
        print("  ", doc.url, len(doc.body), "bytes")

    # production keeps only domains with at least 1 MiB of compressed archive
    print("kept at 1 MiB:", filter_small_domains({"alpha": size}))
    print("kept at 1 KiB:", filter_small_domains({"alpha": size}, min_bytes=1024))
