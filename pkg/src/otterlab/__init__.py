"""Data pipeline and evaluation toolkit for prompt-conditioned zero-shot translation."""

__version__ = "0.1.0"

from .augment import (
    AugmentedExample,
    MixResult,
    MixSpec,
    augment_corpus,
    blend,
    build_prompt,
    concat_pair,
    mix_tokens,
    sample_lambda,
    seq2mix_pair,
)
from .corpus import (
    LanguageTag,
    ParallelCorpus,
    SentencePair,
    detokenize,
    language,
    load_moses,
    load_tsv,
    sample_eval_set,
    tokenize,
)
from .errors import OtterlabError
from .langid import LanguageIdentifier, classify, load_model, save_model, train_profiles
from .metrics import BleuReport, OtterReport, corpus_bleu, label_file_oracle, otter
from .pivot import DictionaryMockBackend, RemoteBackend, TranslationBackend, pivot_translate, translate_batch
