"""From raw HTML bytes to clean, normalized sentences.

Scripts, styles and the head are dropped; block elements become line breaks;
full-width characters are folded by NFKC before sentence splitting.
"""

from bitextmine.extract import extract_text, normalize_nfkc, split_sentences

html_ja = """<html><head><title>旅行</title><script>var x = 1 < 2;</script></head>
<body><nav>ホーム｜お問い合わせ</nav>
<p>東京駅から徒歩５分です。「便利！」と好評です。</p><p>価格は３．５万円から。</p></body></html>""".encode("shift_jis")

html_en = b"""<html><body><div>Dr. Tanaka runs the hotel. It is 5 minutes from Tokyo Station!</div>
<p>Prices start at 35,000 yen.</p></body></html>"""

text_ja = normalize_nfkc(extract_text(html_ja, "shift_jis"))
text_en = normalize_nfkc(extract_text(html_en))
print("Japanese page text:\n" + text_ja, "\n")
for s in split_sentences(text_ja, "ja"):
    print("  ja |", s)
print()
for s in split_sentences(text_en, "en"):
    print("  en |", s)
