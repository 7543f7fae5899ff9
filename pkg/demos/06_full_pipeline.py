"""Run every stage on the bundled two-site fixture and score against gold.

Equivalent to ``bitextmine pipeline -c <copy>/pipeline.ini``.
"""

import shutil
import tempfile
from pathlib import Path

from bitextmine import cli
from bitextmine.pipeline import read_corpus
from bitextmine.synthetic import load_gold

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "synthetic"

with tempfile.TemporaryDirectory() as tmp:
    work = Path(tmp) / "fixture"
    shutil.copytree(FIXTURE, work)
    assert cli.main(["pipeline", "-c", str(work / "pipeline.ini")]) == 0

    out = work / "work"
    print("artifacts:", ", ".join(sorted(p.name for p in out.iterdir())))
    print("\nranked domains:", (out / "domains.txt").read_text().split())
    print("\n" + (out / "corpus_stats.tsv").read_text())
    print((out / "reject_report.tsv").read_text())

    gold = set(load_gold(work / "gold.tsv"))
    for name in ("corpus.raw.tsv", "corpus.filtered.tsv"):
        pairs = [(p.src_text, p.tgt_text) for p in read_corpus(out / name)]
        hits = sum(p in gold for p in pairs)
        print(f"{name:20} precision {hits / len(pairs):.3f}  recall {len(gold & set(pairs)) / len(gold):.3f}")
