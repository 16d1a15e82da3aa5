"""Command-line entry point: ``otterlab <command> ...``.

Flag values resolve in this order: command line, ``OTTERLAB_<FLAG>``
environment variables (``--pad-token`` -> ``OTTERLAB_PAD_TOKEN``), then a
``--config`` file of ``key = value`` lines using the same flag names.

Exit codes: 0 success, 1 usage error, 2 data or contract error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .augment import (
    DEFAULT_SEP,
    TECHNIQUES,
    MixSpec,
    blend,
    iter_augmented,
    original_examples,
    read_jsonl,
    validate_augment_inputs,
    write_jsonl,
)
from .corpus import (
    read_lines,
    load_moses,
    load_tsv_corpus,
    sample_eval_set,
    write_moses,
    write_tsv,
)
from .errors import OtterlabError
from .langid import load_model, save_model, train_profiles
from .metrics import LabelFileOracle, bleu_from_stats, bleu_stats, corpus_bleu, label_file_oracle, otter
from .pivot import PivotTrace, RemoteBackend, pivot_translate

log = logging.getLogger("otterlab")

ENV_PREFIX = "OTTERLAB_"
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; this CLI reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(path, command: str, args: argparse.Namespace, inputs: dict, outputs: list) -> None:
    config = {
        k: v for k, v in sorted(vars(args).items())
        if k not in ("func", "config", "manifest", "command", "subcommand") and not k.startswith("_")
    }
    manifest = {
        "tool": "otterlab",
        "version": __version__,
        "numpy": np.__version__,
        "command": command,
        "config": config,
        "inputs": {
            name: {"path": str(p), "sha256": _sha256(p)}
            for name, p in inputs.items()
        },
        "outputs": [str(o) for o in outputs],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def _manifest_path(args, output) -> str | None:
    if args.manifest:
        return args.manifest
    if output:
        return f"{output}.manifest.json"
    return None


def _emit(args, report: dict) -> None:
    text = json.dumps(report, ensure_ascii=False, sort_keys=False)
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    print(text)


# -- augment ---------------------------------------------------------------

def _augment_chunk(job):
    xx_en, en_yy, technique, spec, start, stop, sep = job
    return "".join(ex.to_json() + "\n" for ex in iter_augmented(xx_en, en_yy, technique, spec, start, stop, sep))


def _chunks(count: int, jobs: int):
    size = max(1, min(5000, -(-count // (jobs * 4))))
    return [(s, min(s + size, count)) for s in range(0, count, size)]


def cmd_augment(args) -> int:
    xx_en = load_tsv_corpus(args.xx_en, args.permissive)
    en_yy = load_tsv_corpus(args.en_yy, args.permissive)
    spec = MixSpec(args.alpha, args.beta, args.pad_token, args.strip_pads, args.seed)
    validate_augment_inputs(xx_en, en_yy, args.technique, spec, args.count)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    jobs = [(xx_en, en_yy, args.technique, spec, a, b, args.sep) for a, b in _chunks(args.count, args.jobs)]
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        if args.jobs == 1:
            for job in jobs:
                fh.write(_augment_chunk(job))
        else:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                for text in pool.map(_augment_chunk, jobs):
                    fh.write(text)
    mpath = _manifest_path(args, args.output)
    write_manifest(mpath, "augment", args, {"xx_en": args.xx_en, "en_yy": args.en_yy}, [args.output])
    log.info("wrote %d %s examples to %s", args.count, args.technique, args.output)
    return 0


# -- blend -----------------------------------------------------------------

def _load_examples(path, permissive=False):
    if str(path).endswith(".tsv"):
        return original_examples(load_tsv_corpus(path, permissive))
    return read_jsonl(path)


def cmd_blend(args) -> int:
    original = _load_examples(args.original, args.permissive)
    synthetic = _load_examples(args.synthetic, args.permissive)
    write_jsonl(blend(original, synthetic, args.seed), args.output)
    write_manifest(_manifest_path(args, args.output), "blend", args,
                   {"original": args.original, "synthetic": args.synthetic}, [args.output])
    return 0


# -- sample ----------------------------------------------------------------

def cmd_sample(args) -> int:
    paths = args.corpus
    if len(paths) == 1:
        corpus = load_tsv_corpus(paths[0], args.permissive)
    elif len(paths) == 2:
        if not args.src_lang or not args.tgt_lang:
            raise UsageError("a Moses corpus (two paths) needs --src-lang and --tgt-lang")
        corpus = load_moses(paths[0], paths[1], args.src_lang, args.tgt_lang)
    else:
        raise UsageError("--corpus takes one TSV path or two Moses paths")
    sample = sample_eval_set(corpus, args.n, args.seed)
    if len(paths) == 1:
        outputs = [args.output]
        write_tsv(sample, args.output)
    else:
        outputs = [f"{args.output}.{corpus.src_lang.code}", f"{args.output}.{corpus.tgt_lang.code}"]
        write_moses(sample, *outputs)
    ids_path = f"{args.output}.ids"
    with open(ids_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(p.id + "\n" for p in sample)
    outputs.append(ids_path)
    inputs = {f"corpus[{i}]": p for i, p in enumerate(paths)}
    write_manifest(_manifest_path(args, args.output), "sample", args, inputs, outputs)
    return 0


# -- langid ----------------------------------------------------------------

def cmd_langid_train(args) -> int:
    corpora, inputs = {}, {}
    for item in args.data:
        code, sep, path = item.partition("=")
        if not sep or not code or not path:
            raise UsageError(f"--data expects lang=path, got {item!r}")
        corpora[code] = read_lines(path)
        inputs[code] = path
    model = train_profiles(corpora, args.n_max, args.min_chars, args.threshold)
    save_model(model, args.output)
    write_manifest(_manifest_path(args, args.output), "langid train", args, inputs, [args.output])
    return 0


def cmd_langid_classify(args) -> int:
    if (args.text is None) == (args.file is None):
        raise UsageError("give exactly one of --text or --file")
    model = load_model(args.model)
    texts = [args.text] if args.text is not None else read_lines(args.file)
    for text in texts:
        result = model.classify(text)
        print(json.dumps({"label": result.label, "score": result.score}))
    mpath = _manifest_path(args, None)
    if mpath:
        inputs = {"model": args.model}
        if args.file:
            inputs["file"] = args.file
        write_manifest(mpath, "langid classify", args, inputs, [])
    return 0


# -- eval ------------------------------------------------------------------

def _split(items, parts):
    size = -(-len(items) // parts) or 1
    return [items[i:i + size] for i in range(0, len(items), size)]


def _classify_chunk(job):
    model, texts = job
    return [model(t) for t in texts]


def _bleu_chunk(job):
    hyps, refs, max_n = job
    return bleu_stats(hyps, refs, max_n)


def cmd_eval_otter(args) -> int:
    if (args.model is None) == (args.labels is None):
        raise UsageError("give exactly one of --model or --labels")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    hyps, refs = read_lines(args.hyps), read_lines(args.refs)
    if args.labels:
        oracle = label_file_oracle(args.labels)
    else:
        oracle = load_model(args.model)
        if args.jobs > 1 and len(hyps) == len(refs):
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                labels = [
                    [label for part in pool.map(_classify_chunk, [(oracle, c) for c in _split(texts, args.jobs)])
                     for label in part]
                    for texts in (hyps, refs)
                ]
            oracle = LabelFileOracle(list(zip(*labels)), args.model)
    report = otter(hyps, refs, args.target, oracle)
    _emit(args, report.to_dict(per_example=args.per_example))
    mpath = _manifest_path(args, args.output)
    if mpath:
        inputs = {"hyps": args.hyps, "refs": args.refs}
        inputs["model" if args.model else "labels"] = args.model or args.labels
        write_manifest(mpath, "eval otter", args, inputs, [args.output] if args.output else [])
    return 0


def cmd_eval_bleu(args) -> int:
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    hyps, refs = read_lines(args.hyps), read_lines(args.refs)
    if args.jobs > 1 and len(hyps) == len(refs) and hyps:
        jobs = list(zip(_split(hyps, args.jobs), _split(refs, args.jobs), [args.max_n] * args.jobs))
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            parts = list(pool.map(_bleu_chunk, jobs))
        total = parts[0]
        for part in parts[1:]:
            total = total + part
        report = bleu_from_stats(total)
    else:
        report = corpus_bleu(hyps, refs, args.max_n)
    if report.empty_hypotheses:
        log.warning("all hypotheses are empty; BLEU is 0")
    _emit(args, report.to_dict())
    mpath = _manifest_path(args, args.output)
    if mpath:
        write_manifest(mpath, "eval bleu", args, {"hyps": args.hyps, "refs": args.refs},
                       [args.output] if args.output else [])
    return 0


# -- pivot -----------------------------------------------------------------

def cmd_pivot(args) -> int:
    texts = read_lines(args.input)
    first = RemoteBackend(args.first_url, [(args.src, args.pivot)], timeout=args.timeout)
    second = RemoteBackend(args.second_url, [(args.pivot, args.tgt)], timeout=args.timeout)
    trace = PivotTrace() if args.trace else None
    out = pivot_translate(first, second, args.src, args.pivot, args.tgt, texts, trace,
                          batch_size=args.batch_size, max_workers=args.jobs)
    outputs = [args.output]
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(t + "\n" for t in out)
    if trace is not None:
        trace_path = f"{args.output}.{args.pivot}"
        with open(trace_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(t + "\n" for t in trace.pivot_texts)
        outputs.append(trace_path)
    write_manifest(_manifest_path(args, args.output), "pivot", args, {"input": args.input}, outputs)
    return 0


# -- toy -------------------------------------------------------------------

def cmd_toy(args) -> int:
    from . import toy

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    write_tsv(toy.toy_de_en(args.size, args.seed), out / "de-en.tsv")
    write_tsv(toy.toy_en_ar(args.size, args.seed), out / "en-ar.tsv")
    for code, texts in toy.disjoint_alphabet_corpora(args.size, args.seed).items():
        (out / f"langid.{code}.txt").write_text("".join(t + "\n" for t in texts), encoding="utf-8")
    print(out)
    return 0


# -- parser ----------------------------------------------------------------

def _common(p, output_required=True):
    p.add_argument("-o", "--output", required=output_required, help="output path")
    p.add_argument("--manifest", help="manifest path (default: <output>.manifest.json)")
    p.add_argument("--permissive", action="store_true", help="accept unknown language codes in TSV input")


def build_parser() -> tuple[ArgumentParser, list[ArgumentParser]]:
    parser = ArgumentParser(prog="otterlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key = value file mirroring long flag names")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)
    leaves = []

    p = sub.add_parser("augment", help="generate concat or seq2mix examples as JSONL")
    p.add_argument("--technique", choices=TECHNIQUES, required=True)
    p.add_argument("--xx-en", required=True, help="XX-en TSV corpus")
    p.add_argument("--en-yy", required=True, help="en-YY TSV corpus")
    p.add_argument("--count", type=int, required=True, help="number of examples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.5, help="Beta alpha for lambda (seq2mix)")
    p.add_argument("--beta", type=float, default=0.5, help="Beta beta for lambda (seq2mix)")
    p.add_argument("--pad-token", default="<pad>")
    p.add_argument("--strip-pads", action="store_true", help="drop trailing pad tokens (seq2mix)")
    p.add_argument("--sep", default=DEFAULT_SEP, help="separator token (concat)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes; output is identical for any value")
    _common(p)
    p.set_defaults(func=cmd_augment)
    leaves.append(p)

    p = sub.add_parser("blend", help="interleave original and synthetic examples 1:1")
    p.add_argument("--original", required=True, help="JSONL examples, or a TSV corpus")
    p.add_argument("--synthetic", required=True, help="JSONL examples, or a TSV corpus")
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_blend)
    leaves.append(p)

    p = sub.add_parser("sample", help="draw a seeded evaluation subset")
    p.add_argument("--corpus", nargs="+", required=True, help="one TSV path, or src and tgt Moses paths")
    p.add_argument("--src-lang", help="source language (Moses input)")
    p.add_argument("--tgt-lang", help="target language (Moses input)")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_sample)
    leaves.append(p)

    p = sub.add_parser("langid", help="train or apply the n-gram language identifier")
    lsub = p.add_subparsers(dest="subcommand", required=True, parser_class=ArgumentParser)
    q = lsub.add_parser("train", help="train a model from lang=path text files")
    q.add_argument("--data", action="append", required=True, metavar="LANG=PATH",
                   help="one sentence per line; repeat per language")
    q.add_argument("--n-max", type=int, default=3)
    q.add_argument("--min-chars", type=int, default=3)
    q.add_argument("--threshold", type=float, default=0.0, help="minimum top-two log-likelihood margin")
    _common(q)
    q.set_defaults(func=cmd_langid_train)
    leaves.append(q)
    q = lsub.add_parser("classify", help="label text with a trained model")
    q.add_argument("--model", required=True)
    q.add_argument("--text")
    q.add_argument("--file", help="one text per line")
    q.add_argument("--manifest")
    q.set_defaults(func=cmd_langid_classify)
    leaves.append(q)

    p = sub.add_parser("eval", help="compute OTTER or BLEU")
    esub = p.add_subparsers(dest="subcommand", required=True, parser_class=ArgumentParser)
    q = esub.add_parser("otter", help="off-target translation error rate")
    q.add_argument("--hyps", required=True)
    q.add_argument("--refs", required=True)
    q.add_argument("--target", required=True, help="target language code")
    q.add_argument("--model", help="langid model file")
    q.add_argument("--labels", help="precomputed hyp_label<TAB>ref_label file")
    q.add_argument("--per-example", action="store_true")
    q.add_argument("--jobs", type=int, default=1, help="worker processes for model-based labelling")
    _common(q, output_required=False)
    q.set_defaults(func=cmd_eval_otter)
    leaves.append(q)
    q = esub.add_parser("bleu", help="corpus BLEU")
    q.add_argument("--hyps", required=True)
    q.add_argument("--refs", required=True)
    q.add_argument("--max-n", type=int, default=4)
    q.add_argument("--jobs", type=int, default=1, help="worker processes; partial counts are merged")
    _common(q, output_required=False)
    q.set_defaults(func=cmd_eval_bleu)
    leaves.append(q)

    p = sub.add_parser("pivot", help="translate through a pivot language via two HTTP backends")
    p.add_argument("--first-url", required=True)
    p.add_argument("--second-url", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--pivot", default="en")
    p.add_argument("--tgt", required=True)
    p.add_argument("--in", dest="input", required=True, help="one sentence per line")
    p.add_argument("--trace", action="store_true", help="also write pivot-language output to <output>.<pivot>")
    p.add_argument("--timeout", type=float, default=30.0, help="seconds per request")
    p.add_argument("--batch-size", type=int, default=None, help="split requests into sub-batches")
    p.add_argument("--jobs", type=int, default=4, help="concurrent sub-batch requests")
    _common(p)
    p.set_defaults(func=cmd_pivot)
    leaves.append(p)

    p = sub.add_parser("toy", help="write the built-in toy corpora to a directory")
    p.add_argument("--size", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_toy)
    leaves.append(p)

    return parser, leaves


def read_config(path) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{line_no}: expected key = value")
            values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off", ""}


def _apply_overrides(leaves, overrides: dict[str, str]) -> None:
    for p in leaves:
        for action in p._actions:
            dest = action.dest
            if dest not in overrides or dest in ("help", "config", "version"):
                continue
            value = overrides[dest]
            if isinstance(action, argparse._StoreTrueAction):
                if value.lower() not in _TRUE | _FALSE:
                    raise UsageError(f"{dest}: expected a boolean, got {value!r}")
                value = value.lower() in _TRUE
            elif isinstance(action, argparse._AppendAction) or action.nargs in ("+", "*"):
                value = value.split()
            action.default = value
            action.required = False


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, leaves = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        overrides = read_config(known.config) if known.config else {}
        for key, value in os.environ.items():
            if key.startswith(ENV_PREFIX):
                overrides[key[len(ENV_PREFIX):].lower()] = value
        _apply_overrides(leaves, overrides)
    except (UsageError, OSError) as exc:
        print(f"otterlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"otterlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OtterlabError, OSError, UnicodeDecodeError) as exc:
        print(f"otterlab: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
