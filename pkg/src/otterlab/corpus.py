"""Parallel corpus ingestion, whitespace tokenization and eval-set sampling.

Two on-disk layouts are understood:

* Moses / OPUS-100: two UTF-8 files, one sentence per line, aligned by
  line number (``train.de`` + ``train.en``).
* TSV: ``src_lang<TAB>tgt_lang<TAB>source<TAB>target`` per line, no header.

Pair ids are zero-based line numbers in both layouts, so a corpus can be
re-loaded and diffed without any side table.
"""

from __future__ import annotations

import os
import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import AlignmentError, CorpusDecodeError, OtterlabError, ParseError, UnknownLanguageError

MAX_SEED = 2**64 - 1

# English names as used in task prompts ("translate German to English:").
LANGUAGE_NAMES: dict[str, str] = {
    "af": "Afrikaans",
    "ar": "Arabic",
    "bg": "Bulgarian",
    "bn": "Bengali",
    "ca": "Catalan",
    "cs": "Czech",
    "da": "Danish",
    "de": "German",
    "el": "Greek",
    "en": "English",
    "es": "Spanish",
    "et": "Estonian",
    "fa": "Persian",
    "fi": "Finnish",
    "fr": "French",
    "he": "Hebrew",
    "hi": "Hindi",
    "hr": "Croatian",
    "hu": "Hungarian",
    "id": "Indonesian",
    "it": "Italian",
    "ja": "Japanese",
    "ko": "Korean",
    "lt": "Lithuanian",
    "lv": "Latvian",
    "nl": "Dutch",
    "no": "Norwegian",
    "pl": "Polish",
    "pt": "Portuguese",
    "ro": "Romanian",
    "ru": "Russian",
    "sk": "Slovak",
    "sl": "Slovenian",
    "sr": "Serbian",
    "sv": "Swedish",
    "th": "Thai",
    "tr": "Turkish",
    "uk": "Ukrainian",
    "ur": "Urdu",
    "vi": "Vietnamese",
    "zh": "Chinese",
}

# The six non-English languages of the OPUS-100 zero-shot test pairs.
ZERO_SHOT_LANGUAGES = ("ar", "de", "fr", "nl", "ru", "zh")

_CODE_RE = re.compile(r"[a-z]{2}")


@dataclass(frozen=True, order=True)
class LanguageTag:
    code: str
    display_name: str

    def __post_init__(self):
        if not isinstance(self.code, str) or not _CODE_RE.fullmatch(self.code):
            raise UnknownLanguageError(f"invalid language code {self.code!r}: expected two lowercase letters")
        if not self.display_name:
            raise UnknownLanguageError(f"language {self.code!r} has an empty display name")

    def __str__(self) -> str:
        return self.code


def language(code: str | LanguageTag, permissive: bool = False) -> LanguageTag:
    """Look up a tag by ISO 639-1 code.

    With ``permissive`` an unknown (but well-formed) code maps to a tag whose
    display name is the code itself.
    """
    if isinstance(code, LanguageTag):
        return code
    name = LANGUAGE_NAMES.get(code)
    if name is None:
        if not permissive:
            raise UnknownLanguageError(f"unknown language code {code!r}")
        name = code
    return LanguageTag(code, name)


def zero_shot_pairs() -> list[tuple[LanguageTag, LanguageTag]]:
    """The 15 unordered zero-shot pairs over fr, de, ar, ru, zh, nl."""
    codes = ZERO_SHOT_LANGUAGES
    return [
        (language(a), language(b))
        for i, a in enumerate(codes)
        for b in codes[i + 1:]
    ]


@dataclass(frozen=True)
class SentencePair:
    id: str
    src_lang: LanguageTag
    tgt_lang: LanguageTag
    source_text: str
    target_text: str

    def __post_init__(self):
        if "\n" in self.source_text or "\n" in self.target_text:
            raise OtterlabError(f"pair {self.id}: sentence text contains a newline")
        if self.src_lang == self.tgt_lang:
            raise OtterlabError(f"pair {self.id}: source and target language are both {self.src_lang.code}")


@dataclass(frozen=True)
class ParallelCorpus:
    src_lang: LanguageTag
    tgt_lang: LanguageTag
    pairs: tuple[SentencePair, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        seen = set()
        for pair in self.pairs:
            if pair.src_lang != self.src_lang or pair.tgt_lang != self.tgt_lang:
                raise OtterlabError(
                    f"pair {pair.id} is {pair.src_lang.code}-{pair.tgt_lang.code}, "
                    f"corpus is {self.label}"
                )
            if pair.id in seen:
                raise OtterlabError(f"duplicate pair id {pair.id!r} in {self.label} corpus")
            seen.add(pair.id)

    @property
    def label(self) -> str:
        return f"{self.src_lang.code}-{self.tgt_lang.code}"

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, index: int) -> SentencePair:
        return self.pairs[index]

    @classmethod
    def from_pairs(cls, pairs: Sequence[SentencePair]) -> "ParallelCorpus":
        """Build a corpus from loaded pairs; all pairs must share one direction."""
        if not pairs:
            raise OtterlabError("cannot infer corpus languages from an empty pair list")
        return cls(pairs[0].src_lang, pairs[0].tgt_lang, tuple(pairs))


def read_lines(path: str | os.PathLike) -> list[str]:
    """Strict UTF-8 lines without terminators; a final newline adds no empty line."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusDecodeError(path, exc.start, exc.reason) from None
    if not text:
        return []
    # str.splitlines would also break on U+2028, \x1c etc.
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def load_moses(
    src_path: str | os.PathLike,
    tgt_path: str | os.PathLike,
    src_lang: LanguageTag | str,
    tgt_lang: LanguageTag | str,
) -> ParallelCorpus:
    src_lang, tgt_lang = language(src_lang), language(tgt_lang)
    src_lines = read_lines(src_path)
    tgt_lines = read_lines(tgt_path)
    if len(src_lines) != len(tgt_lines):
        raise AlignmentError(src_path, len(src_lines), tgt_path, len(tgt_lines))
    pairs = tuple(
        SentencePair(str(i), src_lang, tgt_lang, s, t)
        for i, (s, t) in enumerate(zip(src_lines, tgt_lines))
    )
    return ParallelCorpus(src_lang, tgt_lang, pairs)


def load_tsv(path: str | os.PathLike, permissive: bool = False) -> list[SentencePair]:
    pairs = []
    for i, line in enumerate(read_lines(path)):
        fields = line.split("\t")
        if len(fields) != 4:
            raise ParseError(path, i + 1, f"expected 4 tab-separated fields, found {len(fields)}")
        src, tgt, source_text, target_text = fields
        try:
            pair = SentencePair(
                str(i),
                language(src, permissive),
                language(tgt, permissive),
                source_text,
                target_text,
            )
        except OtterlabError as exc:
            raise ParseError(path, i + 1, str(exc)) from None
        pairs.append(pair)
    return pairs


def load_tsv_corpus(path: str | os.PathLike, permissive: bool = False) -> ParallelCorpus:
    pairs = load_tsv(path, permissive)
    if not pairs:
        raise OtterlabError(f"{path}: empty corpus")
    try:
        return ParallelCorpus.from_pairs(pairs)
    except OtterlabError as exc:
        raise OtterlabError(f"{path}: {exc}") from None


def write_tsv(pairs: Iterable[SentencePair], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in pairs:
            fh.write(f"{p.src_lang.code}\t{p.tgt_lang.code}\t{p.source_text}\t{p.target_text}\n")


def write_moses(corpus: ParallelCorpus, src_path: str | os.PathLike, tgt_path: str | os.PathLike) -> None:
    with open(src_path, "w", encoding="utf-8", newline="\n") as fs, \
            open(tgt_path, "w", encoding="utf-8", newline="\n") as ft:
        for p in corpus:
            fs.write(p.source_text + "\n")
            ft.write(p.target_text + "\n")


def tokenize(text: str) -> list[str]:
    """Split NFC-normalized text on any run of whitespace."""
    return unicodedata.normalize("NFC", text).split()


def detokenize(tokens: Sequence[str]) -> str:
    return " ".join(tokens)


def check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool) or not 0 <= seed <= MAX_SEED:
        raise OtterlabError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def sample_eval_set(corpus: ParallelCorpus, n: int = 1000, seed: int = 0) -> ParallelCorpus:
    """Draw ``min(n, len(corpus))`` pairs uniformly without replacement.

    A partial Fisher-Yates shuffle driven by a PCG64 generator seeded with
    ``seed`` picks the indices; the result keeps the corpus order.
    """
    if n < 1:
        raise OtterlabError(f"sample size must be >= 1, got {n}")
    if len(corpus) == 0:
        raise OtterlabError("cannot sample from an empty corpus")
    rng = np.random.default_rng(check_seed(seed))
    size = len(corpus)
    k = min(n, size)
    index = list(range(size))
    for i in range(k):
        j = i + int(rng.integers(size - i))
        index[i], index[j] = index[j], index[i]
    chosen = sorted(index[:k])
    return ParallelCorpus(corpus.src_lang, corpus.tgt_lang, tuple(corpus.pairs[i] for i in chosen))
