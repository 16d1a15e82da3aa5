"""Small deterministic corpora for demos, tests and smoke benchmarks.

The 30-entry lexicon maps German -> English -> Arabic word by word, so
dictionary backends built from it compose exactly and sentences built
from it are fully translatable.
"""

from __future__ import annotations

import numpy as np

from .corpus import ParallelCorpus, SentencePair, language

# (German, English, Arabic)
LEXICON = [
    ("der", "the", "ال"),
    ("Hund", "dog", "كلب"),
    ("Katze", "cat", "قطة"),
    ("bellt", "barks", "ينبح"),
    ("schläft", "sleeps", "ينام"),
    ("läuft", "runs", "يركض"),
    ("isst", "eats", "يأكل"),
    ("trinkt", "drinks", "يشرب"),
    ("sieht", "sees", "يرى"),
    ("Haus", "house", "بيت"),
    ("Baum", "tree", "شجرة"),
    ("Wasser", "water", "ماء"),
    ("Brot", "bread", "خبز"),
    ("Mann", "man", "رجل"),
    ("Frau", "woman", "امرأة"),
    ("Kind", "child", "طفل"),
    ("groß", "big", "كبير"),
    ("klein", "small", "صغير"),
    ("alt", "old", "قديم"),
    ("neu", "new", "جديد"),
    ("und", "and", "و"),
    ("heute", "today", "اليوم"),
    ("morgen", "tomorrow", "غدا"),
    ("hier", "here", "هنا"),
    ("dort", "there", "هناك"),
    ("schnell", "quickly", "بسرعة"),
    ("langsam", "slowly", "ببطء"),
    ("gut", "good", "جيد"),
    ("Stadt", "city", "مدينة"),
    ("Garten", "garden", "حديقة"),
]

DE_EN = {de: en for de, en, _ in LEXICON}
EN_AR = {en: ar for _, en, ar in LEXICON}

_LATIN_WORDS = (
    "alpha bravo charlie delta echo foxtrot golf hotel india juliet kilo lima "
    "mike november oscar papa quebec romeo sierra tango uniform victor whiskey"
).split()
_CYRILLIC_WORDS = (
    "дом кот собака вода хлеб город сад дерево мир день ночь утро вечер "
    "книга окно стол река море лес поле небо солнце звезда"
).split()

_EN_TEXT = [
    "the weather is nice today and we walk in the park",
    "she reads a book while he cooks dinner in the kitchen",
    "this is a simple sentence written in plain english",
    "they would like to know where the train station is",
    "we think that the answer will be ready by the weekend",
    "the children play with their friends after school",
    "please bring the papers to the office before noon",
    "what time does the shop open on sunday morning",
]
_DE_TEXT = [
    "das wetter ist heute schön und wir gehen in den park",
    "sie liest ein buch während er in der küche kocht",
    "dies ist ein einfacher satz der auf deutsch geschrieben ist",
    "sie möchten wissen wo der bahnhof ist",
    "wir glauben dass die antwort bis zum wochenende fertig ist",
    "die kinder spielen nach der schule mit ihren freunden",
    "bitte bringen sie die unterlagen vor mittag ins büro",
    "wann öffnet das geschäft am sonntag morgen",
]


def _sentences(words, count, seed, min_len=3, max_len=8):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        length = int(rng.integers(min_len, max_len + 1))
        out.append(" ".join(words[int(i)] for i in rng.integers(len(words), size=length)))
    return out


def disjoint_alphabet_corpora(per_language: int = 200, seed: int = 0) -> dict[str, list[str]]:
    """Latin-script ("en") and Cyrillic-script ("ru") sentences with no shared letters."""
    return {
        "en": _sentences(_LATIN_WORDS, per_language, [seed, 0]),
        "ru": _sentences(_CYRILLIC_WORDS, per_language, [seed, 1]),
    }


def english_german_corpora() -> dict[str, list[str]]:
    return {"en": list(_EN_TEXT), "de": list(_DE_TEXT)}


def german_sentences(count: int, seed: int = 0, min_len: int = 3, max_len: int = 8) -> list[str]:
    return _sentences([de for de, _, _ in LEXICON], count, seed, min_len, max_len)


def _corpus(src, tgt, sources, mapping) -> ParallelCorpus:
    s, t = language(src), language(tgt)
    pairs = tuple(
        SentencePair(str(i), s, t, text, " ".join(mapping[w] for w in text.split()))
        for i, text in enumerate(sources)
    )
    return ParallelCorpus(s, t, pairs)


def toy_de_en(size: int = 200, seed: int = 0) -> ParallelCorpus:
    return _corpus("de", "en", german_sentences(size, [seed, 2]), DE_EN)


def toy_en_ar(size: int = 200, seed: int = 0) -> ParallelCorpus:
    english = _sentences([en for _, en, _ in LEXICON], size, [seed, 3])
    return _corpus("en", "ar", english, EN_AR)
