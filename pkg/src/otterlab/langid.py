"""Character n-gram language identifier used as the oracle inside OTTER.

Each language gets add-one smoothed n-gram distributions for n = 1..n_max,
estimated from NFC text wrapped in ``^``/``$`` boundary markers.  For
order n with N observed n-gram tokens over V distinct types, a seen n-gram
with count c gets probability (c + 1) / (N + V + 1) and every unseen
n-gram shares the single leftover bucket 1 / (N + V + 1).  Classification
sums log probabilities over all orders and takes the argmax (uniform
prior).

Model file layout (JSON, UTF-8)::

    {"format": "otterlab-langid", "version": 1, "n_max": 3,
     "min_chars": 3, "threshold": 0.0,
     "languages": [{"code": "de", "display_name": "German",
                    "total_ngrams": 1234,
                    "orders": [{"n": 1, "unseen": -7.1,
                                "logprobs": {"a": -2.3, ...}}, ...]}, ...]}
"""

from __future__ import annotations

import json
import math
import os
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import LanguageTag, language
from .errors import ModelFormatError, OtterlabError

UND = "und"
FORMAT_NAME = "otterlab-langid"
FORMAT_VERSION = 1
BOS, EOS = "^", "$"


def _normalize(text: str) -> str:
    return " ".join(unicodedata.normalize("NFC", text).split())


def char_ngrams(text: str, n: int) -> list[str]:
    padded = BOS + _normalize(text) + EOS
    return [padded[i:i + n] for i in range(len(padded) - n + 1)]


@dataclass(frozen=True)
class NgramTable:
    n: int
    logprobs: dict[str, float]
    unseen: float

    def score(self, grams: Iterable[str]) -> float:
        lp, unseen = self.logprobs, self.unseen
        return math.fsum(lp.get(g, unseen) for g in grams)


@dataclass(frozen=True)
class LangProfile:
    lang: LanguageTag
    orders: tuple[NgramTable, ...]
    total_ngrams: int

    @property
    def ngram_logprobs(self) -> dict[str, float]:
        merged = {}
        for table in self.orders:
            merged.update(table.logprobs)
        return merged

    def loglik(self, grams_by_order: Sequence[list[str]]) -> float:
        return math.fsum(t.score(g) for t, g in zip(self.orders, grams_by_order))


@dataclass(frozen=True)
class Classification:
    label: str
    score: float  # log-likelihood margin between the best and second-best language


@dataclass(frozen=True)
class LanguageIdentifier:
    profiles: tuple[LangProfile, ...]
    n_max: int = 3
    min_chars: int = 3
    threshold: float = 0.0

    def __post_init__(self):
        codes = [p.lang.code for p in self.profiles]
        if len(codes) < 2 or len(set(codes)) != len(codes):
            raise OtterlabError("a language identifier needs at least two distinct languages")
        object.__setattr__(self, "profiles", tuple(sorted(self.profiles, key=lambda p: p.lang.code)))

    @property
    def labels(self) -> list[str]:
        return [p.lang.code for p in self.profiles] + [UND]

    def classify(self, text: str) -> Classification:
        if sum(1 for ch in text if not ch.isspace()) < self.min_chars:
            return Classification(UND, 0.0)
        grams = [char_ngrams(text, n) for n in range(1, self.n_max + 1)]
        # profiles are sorted by code and sort is stable: ties go to the smaller code
        scored = sorted(((p.loglik(grams), p.lang.code) for p in self.profiles), key=lambda s: -s[0])
        (best, code), (second, _) = scored[0], scored[1]
        margin = best - second
        if margin < self.threshold:
            return Classification(UND, margin)
        return Classification(code, margin)

    def __call__(self, text: str) -> str:
        return self.classify(text).label

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "n_max": self.n_max,
            "min_chars": self.min_chars,
            "threshold": self.threshold,
            "languages": [
                {
                    "code": p.lang.code,
                    "display_name": p.lang.display_name,
                    "total_ngrams": p.total_ngrams,
                    "orders": [
                        {"n": t.n, "unseen": t.unseen, "logprobs": dict(sorted(t.logprobs.items()))}
                        for t in p.orders
                    ],
                }
                for p in self.profiles
            ],
        }


def classify(model: LanguageIdentifier, text: str) -> Classification:
    return model.classify(text)


def _train_table(texts: Sequence[str], n: int) -> tuple[NgramTable, int]:
    counts = Counter()
    for text in texts:
        counts.update(char_ngrams(text, n))
    total = sum(counts.values())
    denom = total + len(counts) + 1
    log_denom = math.log(denom)
    logprobs = {g: math.log(c + 1) - log_denom for g, c in counts.items()}
    return NgramTable(n, logprobs, -log_denom), total


def train_profiles(
    corpora: Mapping[LanguageTag | str, Sequence[str]],
    n_max: int = 3,
    min_chars: int = 3,
    threshold: float = 0.0,
) -> LanguageIdentifier:
    if len(corpora) < 2:
        raise OtterlabError(f"need at least 2 languages to train, got {len(corpora)}")
    if n_max < 1:
        raise OtterlabError(f"n_max must be >= 1, got {n_max}")
    profiles = []
    for tag, texts in corpora.items():
        tag = language(tag, permissive=True)
        texts = [t for t in texts if _normalize(t)]
        if not texts:
            raise OtterlabError(f"language {tag.code} has no non-empty training text")
        tables, total = [], 0
        for n in range(1, n_max + 1):
            table, count = _train_table(texts, n)
            tables.append(table)
            total += count
        profiles.append(LangProfile(tag, tuple(tables), total))
    return LanguageIdentifier(tuple(profiles), n_max, min_chars, threshold)


def dumps_model(model: LanguageIdentifier) -> str:
    return json.dumps(model.to_dict(), ensure_ascii=False, sort_keys=True) + "\n"


def save_model(model: LanguageIdentifier, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_model(model))


def loads_model(data: str) -> LanguageIdentifier:
    try:
        doc = json.loads(data)
    except ValueError as exc:
        raise ModelFormatError(
            f"corrupt langid model (expected {FORMAT_NAME} version {FORMAT_VERSION}): {exc}"
        ) from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ModelFormatError(f"not an {FORMAT_NAME} model file")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported langid model version {doc.get('version')!r}; "
            f"this build reads version {FORMAT_VERSION}"
        )
    try:
        profiles = []
        for entry in doc["languages"]:
            tables = tuple(
                NgramTable(int(o["n"]), {k: float(v) for k, v in o["logprobs"].items()}, float(o["unseen"]))
                for o in entry["orders"]
            )
            profiles.append(LangProfile(
                LanguageTag(entry["code"], entry["display_name"]), tables, int(entry["total_ngrams"])
            ))
        return LanguageIdentifier(tuple(profiles), int(doc["n_max"]), int(doc["min_chars"]), float(doc["threshold"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"corrupt langid model (version {FORMAT_VERSION}): {exc!r}") from None


def load_model(path: str | os.PathLike) -> LanguageIdentifier:
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())
