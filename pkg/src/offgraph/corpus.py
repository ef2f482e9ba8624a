"""Corpus ingestion, vocabulary, token encoding, splits, and batching.

File formats:
  * tweets: UTF-8 JSON lines, one object per line with keys ``tweet_id``,
    ``user_id``, ``text``, ``label`` (integer 0/1),
  * edges: UTF-8 TSV, ``follower_id<TAB>followee_id`` per line.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .preprocess import EmojiTable, RawTweet, preprocess

__all__ = [
    "Corpus",
    "Split",
    "Vocab",
    "TokenSequence",
    "load_corpus",
    "write_tweets_jsonl",
    "write_edges_tsv",
    "preprocess_corpus",
    "split_corpus",
    "tokenize",
    "build_vocab",
    "encode",
    "batches",
]


@dataclass
class Corpus:
    tweets: list[RawTweet]
    edges: list[tuple[str, str]]
    users: set[str] = field(default_factory=set)

    def __post_init__(self):
        seen: set[str] = set()
        for tweet in self.tweets:
            if tweet.tweet_id in seen:
                raise ValueError(f"duplicate tweet_id {tweet.tweet_id!r}")
            seen.add(tweet.tweet_id)
        implied = {t.user_id for t in self.tweets}
        for follower, followee in self.edges:
            implied.add(follower)
            implied.add(followee)
        self.users = self.users | implied

    def __len__(self) -> int:
        return len(self.tweets)


def load_corpus(tweets_path, edges_path) -> Corpus:
    """Parse and validate the two data files; errors carry line numbers."""
    tweets: list[RawTweet] = []
    with open(tweets_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                tweets.append(
                    RawTweet(
                        tweet_id=str(obj["tweet_id"]),
                        user_id=str(obj["user_id"]),
                        text=str(obj["text"]),
                        label=int(obj["label"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{tweets_path}:{lineno}: bad tweet record: {exc}") from exc
    edges: list[tuple[str, str]] = []
    with open(edges_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ValueError(f"{edges_path}:{lineno}: expected follower<TAB>followee")
            edges.append((parts[0], parts[1]))
    return Corpus(tweets=tweets, edges=edges)


def write_tweets_jsonl(tweets: list[RawTweet], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in tweets:
            fh.write(
                json.dumps(
                    {"tweet_id": t.tweet_id, "user_id": t.user_id, "text": t.text, "label": t.label},
                    ensure_ascii=False,
                )
                + "\n"
            )


def write_edges_tsv(edges: list[tuple[str, str]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for follower, followee in edges:
            fh.write(f"{follower}\t{followee}\n")


def preprocess_corpus(corpus: Corpus, table: EmojiTable | None = None) -> Corpus:
    """Run the text pipeline over every tweet (idempotent, so safe to repeat)."""
    if table is None:
        table = EmojiTable.default()
    return Corpus(
        tweets=[preprocess(t, table) for t in corpus.tweets],
        edges=list(corpus.edges),
        users=set(corpus.users),
    )


@dataclass
class Split:
    train: list[RawTweet]
    test: list[RawTweet]

    @property
    def train_ids(self) -> set[str]:
        return {t.tweet_id for t in self.train}

    @property
    def test_ids(self) -> set[str]:
        return {t.tweet_id for t in self.test}


def _partition(tweets: list[RawTweet], train_fraction: float, rng: np.random.Generator) -> tuple[list, list]:
    order = rng.permutation(len(tweets))
    # test size floors, train keeps the remainder
    n_test = int(len(tweets) * (1.0 - train_fraction))
    train_idx, test_idx = order[: len(tweets) - n_test], order[len(tweets) - n_test :]
    return [tweets[i] for i in train_idx], [tweets[i] for i in test_idx]


def split_corpus(
    corpus: Corpus,
    train_fraction: float = 0.7,
    rng_seed: int | np.random.Generator = 0,
    stratify: bool = False,
) -> Split:
    """Uniform random partition of tweets (users may straddle both sides).

    With ``stratify`` the same rule is applied within each label class, which
    keeps the class ratio equal across sides.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if not corpus.tweets:
        raise ValueError("cannot split an empty corpus")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    if not stratify:
        train, test = _partition(corpus.tweets, train_fraction, rng)
        return Split(train=train, test=test)
    train, test = [], []
    for label in (0, 1):
        group = [t for t in corpus.tweets if t.label == label]
        if group:
            tr, te = _partition(group, train_fraction, rng)
            train.extend(tr)
            test.extend(te)
    return Split(train=train, test=test)


@dataclass
class Vocab:
    """Dense token-id map with reserved padding/unknown/classifier slots."""

    tokens: list[str]
    index: dict[str, int] = field(init=False)

    PAD = 0
    UNK = 1
    CLS = 2
    RESERVED = ("<pad>", "<unk>", "<cls>")

    def __post_init__(self):
        if tuple(self.tokens[:3]) != self.RESERVED:
            raise ValueError("vocabulary must start with the reserved tokens")
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValueError("duplicate token in vocabulary")

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        return self.index.get(token, self.UNK)

    def decode(self, ids) -> list[str]:
        return [self.tokens[i] for i in ids]


_TOKEN = re.compile(r"<[a-z]+>|[a-z0-9_]+(?:'[a-z]+)?")


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; ``<placeholder>`` markers survive as single tokens."""
    return _TOKEN.findall(text.lower())


def build_vocab(train_tweets: list[RawTweet], min_freq: int = 1, max_size: int | None = None) -> Vocab:
    """Frequency vocabulary over the training split only (no test leakage)."""
    counts = Counter()
    for tweet in train_tweets:
        counts.update(tokenize(tweet.text))
    kept = [tok for tok, c in counts.items() if c >= min_freq]
    kept.sort(key=lambda tok: (-counts[tok], tok))
    if max_size is not None:
        kept = kept[: max(0, max_size - len(Vocab.RESERVED))]
    return Vocab(tokens=list(Vocab.RESERVED) + kept)


@dataclass
class TokenSequence:
    token_ids: np.ndarray
    author_id: str
    label: int
    tweet_id: str

    def __len__(self) -> int:
        return len(self.token_ids)


def encode(tweet: RawTweet, vocab: Vocab, max_len: int = 64) -> TokenSequence:
    """Token ids with a leading ``<cls>`` anchor, truncated to ``max_len``."""
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    ids = [vocab.CLS] + [vocab.id_of(tok) for tok in tokenize(tweet.text)]
    return TokenSequence(
        token_ids=np.asarray(ids[:max_len], dtype=np.int64),
        author_id=tweet.user_id,
        label=tweet.label,
        tweet_id=tweet.tweet_id,
    )


def batches(items: list, batch_size: int = 64, rng_seed=None, shuffle: bool = False):
    """Yield the items in batches; each shuffled epoch draws a fresh order."""
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    if shuffle:
        rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
        order = rng.permutation(len(items))
    else:
        order = np.arange(len(items))
    for start in range(0, len(items), batch_size):
        yield [items[i] for i in order[start : start + batch_size]]
