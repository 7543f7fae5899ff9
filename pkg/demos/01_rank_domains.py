"""Pick crawl candidates by how balanced their English and Japanese text is.

A tiny language identifier is trained from a handful of labelled lines, then
used to tally bytes per language for a few made-up sites.
"""

from bitextmine.langstat import accumulate_stats, detect_language, format_stats_report, rank_domains, train_langid

samples = [
    ("en", "The hotel is close to the station and the beach."),
    ("en", "Opening hours are from nine to five on weekdays."),
    ("en", "Breakfast and dinner are served in the restaurant on the first floor."),
    ("en", "Please contact us if you have any questions about your booking."),
    ("en", "New products arrive every week, so check this page often."),
    ("ja", "ホテルは駅と海の近くにあります。"),
    ("ja", "営業時間は平日の九時から五時までです。"),
    ("ja", "朝食と夕食は一階のレストランでお召し上がりいただけます。"),
    ("ja", "ご予約についてご質問があればお問い合わせください。"),
    ("ja", "新しい商品が毎週入荷しますので、このページをご確認ください。"),
]
# bigrams generalize better than trigrams from this little text
model = train_langid(samples, ngram_order=2)

for text in ["Breakfast is included.", "朝食は含まれています。"]:
    lang, conf = detect_language(model, text)
    print(f"{text!r:32} -> {lang} ({conf:.3f})")

# (domain, text) lines as a crawl of the open web might return them
crawl = [
    ("travel.example", "Rooms with a view of the sea."),
    ("travel.example", "海が見える部屋があります。"),
    ("travel.example", "Book early for the summer."),
    ("news.example", "Local news in English only."),
    ("news.example", "Weather for the weekend."),
    ("shop.example", "新しい商品が入荷しました。"),
    ("shop.example", "New items have arrived."),
]
stats = accumulate_stats((d, detect_language(model, t)[0], len(t.encode())) for d, t in crawl)
print()
print(format_stats_report(stats), end="")
print("\ncrawl order:", rank_domains(stats, k=10))
print("news.example is dropped: with no Japanese its ratio is 0.")
