"""Align sentences of a translated document pair.

Costs mix a length model with lexicon overlap; the dynamic program finds the
cheapest monotone sequence of beads (1:1, 2:1, skips, ...).
"""

from bitextmine.model import Lexicon, TextDocument
from bitextmine.sentalign import align_documents, align_sentences

lexicon = Lexicon([
    ("hotel", "ホテル", 1.0), ("station", "駅", 1.0), ("near", "近い", 1.0),
    ("breakfast", "朝食", 1.0), ("included", "込み", 1.0), ("room", "部屋", 1.0),
    ("sea", "海", 1.0), ("view", "眺め", 1.0), ("every", "全て", 1.0),
    ("is", "です", 0.5), ("has", "あります", 0.5), ("from", "から", 1.0),
])
en = TextDocument("http://h.example/en/1", "en", (
    "The hotel is near the station.",
    "Breakfast is included.",
    "Every room has a view of the sea.",
    "Subscribe to our newsletter.",
))
ja = TextDocument("http://h.example/ja/1", "ja", (
    "ホテルは駅から近いです。",
    "朝食込みです。",
    "全ての部屋から海の眺めがあります。",
))

for bead in align_sentences(en.sentences, ja.sentences, lexicon, src_lang="en", tgt_lang="ja"):
    print(f"{bead.kind:4} src{bead.src_span} tgt{bead.tgt_span} cost={bead.cost:6.3f} lex={bead.score:.2f}")

print()
for pair in align_documents(en, ja, lexicon):
    print(f"{pair.align_score:.2f}  {pair.src_text}  <->  {pair.tgt_text}")

# A 1:0 skip costs -log(prior) + skip penalty, about 7.3 here, so the
# untranslated newsletter line is cheaper to fold into a 2:1 bead. Its lower
# lexical score travels with the pair and is one of the filter's features.
