"""Train the noise filter on a seed corpus and clean a noisy one.

Negatives are synthesized from the positives (re-pairing, truncation, token
shuffling, copying the source). Hard rules run first; survivors are kept
when the classifier scores them at or above the threshold.
"""

from pathlib import Path

from bitextmine.filtering import FEATURE_NAMES, filter_corpus, synthesize_negatives, train_filter
from bitextmine.langstat import load_langid_samples, train_langid
from bitextmine.model import load_lexicon, parse_pairs

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "synthetic"

with open(FIXTURE / "lexicon.tsv", "rb") as fh:
    lexicon = load_lexicon(fh)
with open(FIXTURE / "langid_train.tsv", "rb") as fh:
    langid = train_langid(load_langid_samples(fh))
with open(FIXTURE / "seed_corpus.tsv", "rb") as fh:
    seed = parse_pairs(fh)

train, held_out = seed[:300], seed[300:]
model = train_filter(train, 2020, lexicon, langid)
print("learned weights (standardized features):")
for name, w in zip(FEATURE_NAMES, model.weights):
    print(f"  {name:18} {w:+.3f}")

noisy = held_out + synthesize_negatives(held_out, 7, lexicon)
for threshold in (0.3, 0.5, 0.7):
    kept, report = filter_corpus(noisy, model, lexicon, langid, threshold)
    good = sum(p.tgt_text in {h.tgt_text for h in held_out} and p.src_text in {h.src_text for h in held_out}
               for p in kept)
    print(f"\nthreshold {threshold}: kept {len(kept)} of {len(noisy)} ({good} genuine)")
    print(report.to_tsv(), end="")
