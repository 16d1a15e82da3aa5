import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from otterlab import toy
from otterlab.errors import OtterlabError, OtterUndefinedError, ParseError
from otterlab.langid import train_profiles
from otterlab.metrics import corpus_bleu, label_file_oracle, otter

from oracles import StubOracle, brute_force_bleu

VOCAB = ["a", "b", "c", "d", "e"]


def ten_example_fixture():
    """3 of 10 hypotheses off-target, 8 of 10 references on-target."""
    hyps = [f"h{i}" for i in range(10)]
    refs = [f"r{i}" for i in range(10)]
    labels = {h: ("en" if i < 3 else "de") for i, h in enumerate(hyps)}
    labels.update({r: ("de" if i < 8 else "fr") for i, r in enumerate(refs)})
    return hyps, refs, StubOracle(labels)


class TestOtter:
    def test_three_over_eight(self):
        hyps, refs, oracle = ten_example_fixture()
        report = otter(hyps, refs, "de", oracle)
        assert (report.numerator, report.denominator) == (3, 8)
        assert report.value == 0.375
        assert report.percent == "37.5%"
        assert [e.hyp_label for e in report.per_example[:4]] == ["en", "en", "en", "de"]

    def test_all_on_target(self):
        hyps = [f"h{i}" for i in range(10)]
        refs = [f"r{i}" for i in range(10)]
        report = otter(hyps, refs, "ar", lambda t: "ar")
        assert report.value == 0.0

    def test_undefined(self):
        with pytest.raises(OtterUndefinedError) as err:
            otter(["x", "y"], ["x", "y"], "de", lambda t: "en")
        assert err.value.numerator == 2 and err.value.denominator == 0
        assert "no reference identified as target language" in str(err.value)

    def test_und_handling(self):
        oracle = StubOracle({"r1": "de", "r2": "und"}, default="und")
        report = otter(["h1", "h2"], ["r1", "r2"], "de", oracle)
        assert (report.numerator, report.denominator) == (2, 1)
        assert report.value == 2.0  # not clamped

    def test_length_mismatch(self):
        with pytest.raises(OtterlabError):
            otter(["a"], ["a", "b"], "de", lambda t: "de")
        with pytest.raises(OtterlabError):
            otter([], [], "de", lambda t: "de")

    def test_with_language_identifier(self):
        model = train_profiles(toy.english_german_corpora())
        hyps = ["the answer will be ready", "die antwort ist fertig"]
        refs = ["die kinder spielen nach der schule", "das wetter ist heute schön"]
        report = otter(hyps, refs, "de", model)
        assert (report.numerator, report.denominator) == (1, 2)

    def test_report_dict(self):
        hyps, refs, oracle = ten_example_fixture()
        d = otter(hyps, refs, "de", oracle).to_dict(per_example=True)
        assert d["value"] == 0.375 and len(d["per_example"]) == 10
        assert set(d["per_example"][0]) == {"id", "hyp_label", "ref_label"}
        assert "per_example" not in otter(hyps, refs, "de", oracle).to_dict()

    @given(st.lists(st.tuples(st.sampled_from(["de", "en", "und"]), st.sampled_from(["de", "en", "und"])),
                    min_size=1, max_size=30), st.randoms())
    def test_permutation_invariance(self, rows, rnd):
        if not any(r == "de" for _, r in rows):
            return
        labels = {}
        for i, (h, r) in enumerate(rows):
            labels[f"h{i}"], labels[f"r{i}"] = h, r
        idx = list(range(len(rows)))
        base = otter([f"h{i}" for i in idx], [f"r{i}" for i in idx], "de", StubOracle(labels))
        rnd.shuffle(idx)
        perm = otter([f"h{i}" for i in idx], [f"r{i}" for i in idx], "de", StubOracle(labels))
        assert (perm.numerator, perm.denominator, perm.value) == (base.numerator, base.denominator, base.value)


class TestLabelFileOracle:
    def test_drives_otter(self, write):
        lines = "".join(
            f"{'en' if i < 3 else 'de'}\t{'de' if i < 8 else 'fr'}\n" for i in range(10))
        oracle = label_file_oracle(write("labels.tsv", lines))
        hyps = [f"any {i}" for i in range(10)]
        report = otter(hyps, hyps, "de", oracle)
        assert report.value == 0.375

    def test_count_mismatch(self, write):
        oracle = label_file_oracle(write("labels.tsv", ""))
        with pytest.raises(OtterlabError, match="0 rows"):
            otter(["a"], ["b"], "de", oracle)

    def test_three_columns(self, write):
        with pytest.raises(ParseError):
            label_file_oracle(write("labels.tsv", "de\tde\tde\n"))

    def test_blank_label(self, write):
        with pytest.raises(ParseError):
            label_file_oracle(write("labels.tsv", "de\t\n"))


class TestBleu:
    def test_identity(self):
        sents = ["the cat sat on the mat", "a b c d e f", "one two three four"]
        report = corpus_bleu(sents, sents)
        assert report.score == 100.0
        assert report.precisions == (1.0, 1.0, 1.0, 1.0)
        assert report.brevity_penalty == 1.0

    def test_identity_short_segments(self):
        sents = ["the cat sat", "on", "the mat"]
        report = corpus_bleu(sents, sents)
        assert report.score == 100.0 and report.precisions == (1.0, 1.0, 1.0, 1.0)
        assert report.totals == (6, 3, 1, 0)

    def test_clipping(self):
        report = corpus_bleu(["the the the the"], ["the cat"])
        assert report.precisions[0] == 0.25
        assert report.precisions[1] == 0.0
        assert report.score == 0.0

    def test_brevity_penalty(self):
        report = corpus_bleu(["the cat"], ["the cat sat"])
        assert report.brevity_penalty == math.exp(1 - 3 / 2)
        assert abs(report.brevity_penalty - 0.6065) < 1e-4
        assert (report.hyp_length, report.ref_length) == (2, 3)

    def test_hand_computed_partial_match(self):
        # hyp: a b c d e ; ref: a b c d f
        # matches 4/5, 3/4, 2/3, 1/2 ; equal lengths
        report = corpus_bleu(["a b c d e"], ["a b c d f"])
        expected = 100 * (4 / 5 * 3 / 4 * 2 / 3 * 1 / 2) ** 0.25
        assert abs(report.score - expected) < 1e-12

    def test_empty_hypotheses(self):
        report = corpus_bleu(["", ""], ["a b", "c"])
        assert report.score == 0.0 and report.empty_hypotheses
        assert report.hyp_length == 0

    def test_length_mismatch(self):
        with pytest.raises(OtterlabError):
            corpus_bleu(["a"], [])

    def test_appending_identical_pair_keeps_100(self):
        corpus = ["a b c d", "c d e a b"]
        assert corpus_bleu(corpus + ["e d c b"], corpus + ["e d c b"]).score == 100.0

    def test_case_sensitive(self):
        assert corpus_bleu(["The cat sat down"], ["the cat sat down"]).score < 100

    def test_exhaustive_short_segments(self):
        sentences = [" ".join(s) for n in range(3) for s in itertools.product(VOCAB, repeat=n)]
        for hyp in sentences:
            for ref in sentences:
                assert abs(corpus_bleu([hyp], [ref]).score - brute_force_bleu([hyp], [ref])) <= 1e-9

    @settings(max_examples=300)
    @given(st.lists(st.tuples(st.lists(st.sampled_from(VOCAB), max_size=4),
                              st.lists(st.sampled_from(VOCAB), max_size=4)), min_size=1, max_size=3))
    def test_matches_oracle(self, segs):
        hyps = [" ".join(h) for h, _ in segs]
        refs = [" ".join(r) for _, r in segs]
        report = corpus_bleu(hyps, refs)
        assert abs(report.score - brute_force_bleu(hyps, refs)) <= 1e-9
        assert 0 <= report.score <= 100
        assert all(0 <= p <= 1 for p in report.precisions)


def random_corpus(rnd):
    def sent():
        return " ".join(rnd.choice(VOCAB) for _ in range(rnd.randint(0, 4)))
    n = rnd.randint(1, 3)
    return [sent() for _ in range(n)], [sent() for _ in range(n)]


def test_random_corpora_against_oracle():
    rnd = random.Random(0)
    for _ in range(2000):
        hyps, refs = random_corpus(rnd)
        assert abs(corpus_bleu(hyps, refs).score - brute_force_bleu(hyps, refs)) <= 1e-9
