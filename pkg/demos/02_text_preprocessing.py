"""Tweet normalization, step by step.

Emojis become words, URLs collapse to a bare ``http`` token, hashtags split
into phrases, and mentions / emails / times / money / dates become uniform
``<category>`` markers. The pipeline is deterministic and idempotent.
"""

from offgraph import EmojiTable, RawTweet, preprocess
from offgraph.preprocess import (
    normalize_entities,
    replace_emojis,
    replace_urls,
    segment_hashtags,
)

table = EmojiTable.default()
print(f"packaged emoji table: {len(table)} entries")

samples = [
    "Refinancing during Covid-19. https://t.co/EzjVxwoLq7",
    "#SomeHashtagText is trending, also #Trump2024Now",
    "@Kevin pay me $10 at 5:30pm on 03/05/2021, mail a.b@x.com",
    "good \U0001F600 bad \U0001F621 unknown \U0001FAFF",
    "meet me@5pm, that at-sign is not a mention",
]

print("\n== individual passes ==")
print(replace_urls(samples[0]))
print(segment_hashtags(samples[1]))
print(normalize_entities(samples[2]))
print(replace_emojis(samples[3], table))

print("\n== full pipeline ==")
for i, text in enumerate(samples):
    tweet = RawTweet(f"t{i}", "demo_user", text, 0)
    clean = preprocess(tweet, table)
    print(f"  in:  {text}")
    print(f"  out: {clean.text}\n")

print("== idempotence ==")
tweet = RawTweet("t9", "demo_user", samples[2], 0)
once = preprocess(tweet, table)
twice = preprocess(once, table)
print("second pass changed anything:", once.text != twice.text)
