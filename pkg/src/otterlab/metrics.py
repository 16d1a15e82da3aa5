"""OTTER and corpus BLEU.

OTTER (off-target translation error rate) divides the number of
hypotheses the oracle does *not* identify as the target language by the
number of references it *does* identify as the target language::

    OTTER = #{i : L(hyp_i) != t} / #{i : L(ref_i) == t}

Numerator and denominator count different sets, so the value is not a
proportion and can exceed 1.  An "und" label counts as off-target on the
hypothesis side and as not-target on the reference side.
"""

from __future__ import annotations

import math
import os
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence, Union

from .corpus import LanguageTag, read_lines, language, tokenize
from .errors import OtterlabError, OtterUndefinedError, ParseError
from .langid import LanguageIdentifier


@dataclass(frozen=True)
class ExampleLabels:
    id: str
    hyp_label: str
    ref_label: str


@dataclass(frozen=True)
class OtterReport:
    target: LanguageTag
    numerator: int
    denominator: int
    value: float
    total: int
    per_example: tuple[ExampleLabels, ...] = ()

    @property
    def percent(self) -> str:
        return f"{100 * self.value:.1f}%"

    def to_dict(self, per_example: bool = False) -> dict:
        out = {
            "metric": "otter",
            "target": self.target.code,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "value": self.value,
            "percent": self.percent,
            "total": self.total,
        }
        if per_example:
            out["per_example"] = [asdict(e) for e in self.per_example]
        return out


class LabelFileOracle:
    """Replays precomputed (hyp_label, ref_label) rows, e.g. from CLD3."""

    def __init__(self, rows: Sequence[tuple[str, str]], source: str = "<labels>"):
        self.rows = list(rows)
        self.source = source

    def label_pairs(self, hyps: Sequence[str], refs: Sequence[str]) -> list[tuple[str, str]]:
        if len(self.rows) != len(hyps):
            raise OtterlabError(
                f"{self.source}: label file has {len(self.rows)} rows but there are {len(hyps)} examples"
            )
        return list(self.rows)


def label_file_oracle(path: str | os.PathLike) -> LabelFileOracle:
    rows = []
    for i, line in enumerate(read_lines(path), 1):
        fields = line.split("\t")
        if len(fields) != 2 or not all(f.strip() for f in fields):
            raise ParseError(path, i, f"expected 2 tab-separated labels, found {len(fields)} field(s)")
        rows.append((fields[0].strip(), fields[1].strip()))
    return LabelFileOracle(rows, str(path))


Oracle = Union[LanguageIdentifier, LabelFileOracle, Callable[[str], str]]


def _label_pairs(oracle: Oracle, hyps, refs) -> list[tuple[str, str]]:
    if isinstance(oracle, LabelFileOracle):
        return oracle.label_pairs(hyps, refs)
    if isinstance(oracle, LanguageIdentifier):
        fn = oracle.__call__
    elif callable(oracle):
        fn = oracle
    else:
        raise TypeError(f"unsupported oracle type {type(oracle).__name__}")
    return [(str(fn(h)), str(fn(r))) for h, r in zip(hyps, refs)]


def otter(
    hyps: Sequence[str],
    refs: Sequence[str],
    target: LanguageTag | str,
    oracle: Oracle,
    ids: Sequence[str] | None = None,
) -> OtterReport:
    if len(hyps) != len(refs):
        raise OtterlabError(f"{len(hyps)} hypotheses but {len(refs)} references")
    if not hyps:
        raise OtterlabError("OTTER needs at least one example")
    target = language(target, permissive=True)
    if ids is None:
        ids = [str(i) for i in range(len(hyps))]
    labels = _label_pairs(oracle, hyps, refs)
    t = target.code
    numerator = sum(1 for h, _ in labels if h != t)
    denominator = sum(1 for _, r in labels if r == t)
    if denominator == 0:
        raise OtterUndefinedError(numerator, denominator, len(hyps))
    per_example = tuple(ExampleLabels(str(i), h, r) for i, (h, r) in zip(ids, labels))
    return OtterReport(target, numerator, denominator, numerator / denominator, len(hyps), per_example)


@dataclass(frozen=True)
class BleuReport:
    precisions: tuple[float, ...]
    brevity_penalty: float
    score: float
    hyp_length: int
    ref_length: int
    matches: tuple[int, ...] = field(default=(), repr=False)
    totals: tuple[int, ...] = field(default=(), repr=False)
    empty_hypotheses: bool = False

    def to_dict(self) -> dict:
        out = asdict(self)
        out["precisions"] = list(self.precisions)
        out["matches"] = list(self.matches)
        out["totals"] = list(self.totals)
        return {"metric": "bleu", **out}


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


@dataclass(frozen=True)
class BleuStats:
    """Sufficient statistics for corpus BLEU; partial stats add up."""

    matches: tuple[int, ...]
    totals: tuple[int, ...]
    hyp_length: int
    ref_length: int

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(
            tuple(a + b for a, b in zip(self.matches, other.matches)),
            tuple(a + b for a, b in zip(self.totals, other.totals)),
            self.hyp_length + other.hyp_length,
            self.ref_length + other.ref_length,
        )


def bleu_stats(hyps: Sequence[str], refs: Sequence[str], max_n: int = 4) -> BleuStats:
    if len(hyps) != len(refs):
        raise OtterlabError(f"{len(hyps)} hypotheses but {len(refs)} references")
    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = ref_len = 0
    for hyp, ref in zip(hyps, refs):
        h, r = tokenize(hyp), tokenize(ref)
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, max_n + 1):
            hc = _ngram_counts(h, n)
            rc = _ngram_counts(r, n)
            matches[n - 1] += sum(min(c, rc[g]) for g, c in hc.items())
            totals[n - 1] += max(len(h) - n + 1, 0)
    return BleuStats(tuple(matches), tuple(totals), hyp_len, ref_len)


def bleu_from_stats(stats: BleuStats) -> BleuReport:
    """Unsmoothed corpus BLEU from aggregated clipped counts.

    Any zero precision makes the score 0.  An order for which the
    hypotheses contain no n-grams at all (every segment shorter than n) has
    precision 1, so BLEU(h, h) is 100 for any non-empty corpus; brevity is
    still charged through the penalty.
    """
    matches, totals = stats.matches, stats.totals
    hyp_len, ref_len = stats.hyp_length, stats.ref_length
    max_n = len(matches)
    if hyp_len == 0:
        return BleuReport((0.0,) * max_n, 0.0 if ref_len else 1.0, 0.0, 0, ref_len, matches, totals, True)
    precisions = tuple(m / t if t else 1.0 for m, t in zip(matches, totals))
    if hyp_len >= ref_len:
        bp = 1.0
    else:
        bp = math.exp(1 - ref_len / hyp_len)
    if min(precisions) > 0:
        score = 100 * bp * math.exp(math.fsum(math.log(p) for p in precisions) / max_n)
        score = min(score, 100.0)
    else:
        score = 0.0
    return BleuReport(precisions, bp, score, hyp_len, ref_len, matches, totals)


def corpus_bleu(hyps: Sequence[str], refs: Sequence[str], max_n: int = 4) -> BleuReport:
    """Case-sensitive single-reference corpus BLEU on whitespace tokens."""
    if len(hyps) != len(refs):
        raise OtterlabError(f"{len(hyps)} hypotheses but {len(refs)} references")
    if not hyps:
        raise OtterlabError("BLEU needs at least one segment")
    return bleu_from_stats(bleu_stats(hyps, refs, max_n))
