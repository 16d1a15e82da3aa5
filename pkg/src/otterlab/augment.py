"""Prompt-conditioned synthetic examples: sentence concatenation and hard Seq2Mix.

Both techniques combine one XX->En pair with one En->YY pair.  The input
side carries XX and English text, the target side English and YY text,
and the prompt announces both language pairs, e.g.
``translate German and English to English and Arabic:``.

Every example ``i`` of :func:`augment_corpus` draws from its own generator
seeded with ``(spec.seed, i)``, so any slice of the output can be produced
independently and the concatenation is identical to a sequential run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .corpus import (
    LanguageTag,
    ParallelCorpus,
    SentencePair,
    check_seed,
    detokenize,
    language,
    tokenize,
)
from .errors import AugmentError, OtterlabError

TECHNIQUES = ("concat", "seq2mix")
DEFAULT_SEP = "<sep>"


@dataclass(frozen=True)
class MixSpec:
    alpha: float = 0.5
    beta: float = 0.5
    pad_token: str = "<pad>"
    strip_pads: bool = False
    seed: int = 0

    def __post_init__(self):
        if not self.alpha > 0 or not self.beta > 0:
            raise AugmentError(f"Beta parameters must be positive, got alpha={self.alpha}, beta={self.beta}")
        if not self.pad_token or len(self.pad_token.split()) != 1 or self.pad_token.split()[0] != self.pad_token:
            raise AugmentError(f"pad token must be a single whitespace-free token, got {self.pad_token!r}")
        check_seed(self.seed)


@dataclass(frozen=True)
class Provenance:
    technique: str
    source_ids: tuple[tuple[str, str], ...]
    lam: float | None = None
    masks: tuple[tuple[int, ...], tuple[int, ...]] | None = None

    def to_dict(self) -> dict:
        return {
            "technique": self.technique,
            "source_ids": [list(s) for s in self.source_ids],
            "lambda": self.lam,
            "masks": None if self.masks is None else ["".join(map(str, m)) for m in self.masks],
        }

    @classmethod
    def from_dict(cls, meta: dict) -> "Provenance":
        masks = meta.get("masks")
        if masks is not None:
            masks = tuple(tuple(int(c) for c in m) for m in masks)
        return cls(
            technique=meta["technique"],
            source_ids=tuple(tuple(s) for s in meta["source_ids"]),
            lam=meta.get("lambda"),
            masks=masks,
        )


@dataclass(frozen=True)
class AugmentedExample:
    prompt: str
    input_text: str
    target_text: str
    provenance: Provenance = field(default_factory=lambda: Provenance("original", ()))

    def __post_init__(self):
        if not self.prompt.endswith(":"):
            raise AugmentError(f"prompt must end with ':', got {self.prompt!r}")

    @property
    def model_input(self) -> str:
        """Prompt and input joined the way a seq2seq trainer consumes them."""
        return f"{self.prompt} {self.input_text}"

    def to_record(self) -> dict:
        return {
            "prompt": self.prompt,
            "input": self.input_text,
            "target": self.target_text,
            "meta": self.provenance.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), ensure_ascii=False)

    @classmethod
    def from_record(cls, record: dict) -> "AugmentedExample":
        return cls(record["prompt"], record["input"], record["target"], Provenance.from_dict(record["meta"]))


@dataclass(frozen=True)
class MixResult:
    tokens: list[str]
    mask: list[int]


def build_prompt(src_langs: Sequence[LanguageTag | str], tgt_langs: Sequence[LanguageTag | str]) -> str:
    if not src_langs or not tgt_langs or len(src_langs) != len(tgt_langs):
        raise AugmentError("prompt needs equally many (and at least one) source and target languages")
    if len(src_langs) > 2:
        raise AugmentError("prompts name at most two languages per side")
    src = " and ".join(language(t).display_name for t in src_langs)
    tgt = " and ".join(language(t).display_name for t in tgt_langs)
    return f"translate {src} to {tgt}:"


def sample_lambda(rng: np.random.Generator, alpha: float = 0.5, beta: float = 0.5) -> float:
    if not alpha > 0 or not beta > 0:
        raise AugmentError(f"Beta parameters must be positive, got alpha={alpha}, beta={beta}")
    return float(rng.beta(alpha, beta))


def apply_mask(a: Sequence[str], b: Sequence[str], mask: Sequence[int], pad_token: str = "<pad>") -> MixResult:
    """Pick token ``i`` from ``a`` where ``mask[i]`` is 1, else from ``b``.

    Both sequences are right-padded with ``pad_token`` to the longer length.
    """
    length = max(len(a), len(b))
    if len(mask) != length:
        raise AugmentError(f"mask length {len(mask)} does not match padded length {length}")
    pa = list(a) + [pad_token] * (length - len(a))
    pb = list(b) + [pad_token] * (length - len(b))
    tokens = [x if m else y for x, y, m in zip(pa, pb, mask)]
    return MixResult(tokens, [int(m) for m in mask])


def mix_tokens(
    a: Sequence[str],
    b: Sequence[str],
    lam: float,
    pad_token: str,
    rng: np.random.Generator,
) -> MixResult:
    """Hard mix of two token sequences, one Bernoulli(lam) draw per position."""
    if not 0.0 <= lam <= 1.0:
        raise AugmentError(f"lambda must lie in [0, 1], got {lam}")
    length = max(len(a), len(b))
    # uniform draws lie in [0, 1): lam=1 always selects a, lam=0 never does
    mask = (rng.random(length) < lam).astype(np.int8).tolist()
    return apply_mask(a, b, mask, pad_token)


def _strip_trailing(mixed: MixResult, pad_token: str) -> MixResult:
    end = len(mixed.tokens)
    while end and mixed.tokens[end - 1] == pad_token:
        end -= 1
    return MixResult(mixed.tokens[:end], mixed.mask[:end])


def _check_bridge(pair_xx_en: SentencePair, pair_en_yy: SentencePair) -> None:
    if pair_xx_en.tgt_lang.code != "en":
        raise AugmentError(
            f"pair {pair_xx_en.id} must translate into English, "
            f"got {pair_xx_en.src_lang.code}-{pair_xx_en.tgt_lang.code}"
        )
    if pair_en_yy.src_lang.code != "en":
        raise AugmentError(
            f"pair {pair_en_yy.id} must translate from English, "
            f"got {pair_en_yy.src_lang.code}-{pair_en_yy.tgt_lang.code}"
        )


def _source_ids(pair_xx_en, pair_en_yy, labels):
    if labels is None:
        labels = (
            f"{pair_xx_en.src_lang.code}-{pair_xx_en.tgt_lang.code}",
            f"{pair_en_yy.src_lang.code}-{pair_en_yy.tgt_lang.code}",
        )
    return ((labels[0], pair_xx_en.id), (labels[1], pair_en_yy.id))


def dual_prompt(pair_xx_en: SentencePair, pair_en_yy: SentencePair) -> str:
    return build_prompt(
        [pair_xx_en.src_lang, pair_xx_en.tgt_lang],
        [pair_en_yy.src_lang, pair_en_yy.tgt_lang],
    )


def seq2mix_pair(
    pair_xx_en: SentencePair,
    pair_en_yy: SentencePair,
    spec: MixSpec,
    rng: np.random.Generator,
    lam: float | None = None,
    labels: tuple[str, str] | None = None,
) -> AugmentedExample:
    """Hard Seq2Mix of an XX->En pair with an En->YY pair.

    The input mixes the XX source with the English source of the En->YY
    pair; the target mixes the English target of the XX->En pair with the
    YY target.  One lambda (drawn here unless ``lam`` is given) governs
    both sides, while each side gets its own position mask.
    """
    _check_bridge(pair_xx_en, pair_en_yy)
    if lam is None:
        lam = sample_lambda(rng, spec.alpha, spec.beta)
    src_mix = mix_tokens(tokenize(pair_xx_en.source_text), tokenize(pair_en_yy.source_text), lam, spec.pad_token, rng)
    tgt_mix = mix_tokens(tokenize(pair_xx_en.target_text), tokenize(pair_en_yy.target_text), lam, spec.pad_token, rng)
    if spec.strip_pads:
        src_mix = _strip_trailing(src_mix, spec.pad_token)
        tgt_mix = _strip_trailing(tgt_mix, spec.pad_token)
    provenance = Provenance(
        "seq2mix",
        _source_ids(pair_xx_en, pair_en_yy, labels),
        float(lam),
        (tuple(src_mix.mask), tuple(tgt_mix.mask)),
    )
    return AugmentedExample(
        dual_prompt(pair_xx_en, pair_en_yy),
        detokenize(src_mix.tokens),
        detokenize(tgt_mix.tokens),
        provenance,
    )


def concat_pair(
    pair_xx_en: SentencePair,
    pair_en_yy: SentencePair,
    sep: str = DEFAULT_SEP,
    labels: tuple[str, str] | None = None,
) -> AugmentedExample:
    _check_bridge(pair_xx_en, pair_en_yy)
    for pair in (pair_xx_en, pair_en_yy):
        if sep in pair.source_text or sep in pair.target_text:
            raise AugmentError(f"separator {sep!r} occurs inside pair {pair.id}")
    joiner = f" {sep} "
    return AugmentedExample(
        dual_prompt(pair_xx_en, pair_en_yy),
        pair_xx_en.source_text + joiner + pair_en_yy.source_text,
        pair_xx_en.target_text + joiner + pair_en_yy.target_text,
        Provenance("concat", _source_ids(pair_xx_en, pair_en_yy, labels)),
    )


def original_examples(corpus: ParallelCorpus) -> list[AugmentedExample]:
    """Wrap bilingual pairs as single-direction prompted examples."""
    prompt = build_prompt([corpus.src_lang], [corpus.tgt_lang])
    return [
        AugmentedExample(prompt, p.source_text, p.target_text, Provenance("original", ((corpus.label, p.id),)))
        for p in corpus
    ]


def blend(
    original: Sequence[AugmentedExample],
    synthetic: Sequence[AugmentedExample],
    seed: int = 0,
) -> list[AugmentedExample]:
    """Interleave originals and synthetics 1:1 after shuffling each stream.

    Synthetics are cycled when fewer than the originals and truncated when
    more, so the output is always ``2 * len(original)`` long.
    """
    if not original:
        raise AugmentError("blend needs at least one original example")
    if not synthetic:
        raise AugmentError("blend needs at least one synthetic example")
    seed = check_seed(seed)
    orig_order = np.random.default_rng([seed, 0]).permutation(len(original))
    syn_order = np.random.default_rng([seed, 1]).permutation(len(synthetic))
    out = []
    for k, i in enumerate(orig_order):
        out.append(original[i])
        out.append(synthetic[syn_order[k % len(synthetic)]])
    return out


def example_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def check_pad_absent(corpora: Iterable[ParallelCorpus], pad_token: str) -> None:
    for corpus in corpora:
        for pair in corpus:
            if pad_token in tokenize(pair.source_text) or pad_token in tokenize(pair.target_text):
                raise AugmentError(f"pad token {pad_token!r} occurs in {corpus.label} pair {pair.id}")


def _check_corpora(xx_en: ParallelCorpus, en_yy: ParallelCorpus) -> None:
    if xx_en.tgt_lang.code != "en" or en_yy.src_lang.code != "en":
        raise AugmentError(f"expected an XX-en and an en-YY corpus, got {xx_en.label} and {en_yy.label}")
    if len(xx_en) == 0 or len(en_yy) == 0:
        raise AugmentError("both corpora must be non-empty")


def iter_augmented(
    xx_en: ParallelCorpus,
    en_yy: ParallelCorpus,
    technique: str,
    spec: MixSpec,
    start: int,
    stop: int,
    sep: str = DEFAULT_SEP,
) -> Iterator[AugmentedExample]:
    """Yield examples ``start..stop-1``; no validation of the corpora."""
    labels = (xx_en.label, en_yy.label)
    n_a, n_b = len(xx_en), len(en_yy)
    for i in range(start, stop):
        rng = example_rng(spec.seed, i)
        a = xx_en.pairs[int(rng.integers(n_a))]
        b = en_yy.pairs[int(rng.integers(n_b))]
        if technique == "seq2mix":
            yield seq2mix_pair(a, b, spec, rng, labels=labels)
        else:
            yield concat_pair(a, b, sep, labels=labels)


def validate_augment_inputs(
    xx_en: ParallelCorpus, en_yy: ParallelCorpus, technique: str, spec: MixSpec, count: int
) -> None:
    if technique not in TECHNIQUES:
        raise AugmentError(f"unknown technique {technique!r}; expected one of {', '.join(TECHNIQUES)}")
    if count < 1:
        raise AugmentError(f"count must be >= 1, got {count}")
    _check_corpora(xx_en, en_yy)
    if technique == "seq2mix":
        check_pad_absent((xx_en, en_yy), spec.pad_token)


def augment_corpus(
    xx_en: ParallelCorpus,
    en_yy: ParallelCorpus,
    technique: str,
    spec: MixSpec,
    count: int,
    sep: str = DEFAULT_SEP,
) -> list[AugmentedExample]:
    """Generate ``count`` synthetic examples.

    Example ``i`` pairs a uniformly drawn XX-en pair with an independently
    drawn en-YY pair (with replacement across examples).
    """
    validate_augment_inputs(xx_en, en_yy, technique, spec, count)
    return list(iter_augmented(xx_en, en_yy, technique, spec, 0, count, sep))


def write_jsonl(examples: Iterable[AugmentedExample], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ex in examples:
            fh.write(ex.to_json() + "\n")


def read_jsonl(path) -> list[AugmentedExample]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(AugmentedExample.from_record(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise OtterlabError(f"{path}:{line_no}: bad example record ({exc})") from None
    return out
