"""Pivot translation (XX -> pivot -> YY) over pluggable translation backends.

Remote backends speak a small JSON protocol::

    POST /translate
    {"src_lang": "de", "tgt_lang": "en", "texts": ["...", ...]}
    200 {"translations": ["...", ...]}      same length, same order
    400 {"error": "..."}                     undeclared language pair

:func:`make_server` serves any backend over that protocol, which is what
the tests use to exercise :class:`RemoteBackend`.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Iterable, Mapping, Sequence

import requests

from .corpus import LanguageTag, language
from .errors import BackendError, CapabilityError, ProtocolError, TransportError

log = logging.getLogger(__name__)

Pair = tuple[str, str]


def _code(tag: LanguageTag | str) -> str:
    return tag.code if isinstance(tag, LanguageTag) else language(tag, permissive=True).code


class TranslationBackend(ABC):
    """Translates batches for a fixed set of declared (src, tgt) pairs."""

    def __init__(self, pairs: Iterable[tuple[LanguageTag | str, LanguageTag | str]]):
        self._pairs = frozenset((_code(s), _code(t)) for s, t in pairs)

    @property
    def pairs(self) -> frozenset[Pair]:
        return self._pairs

    def supports(self, src, tgt) -> bool:
        return (_code(src), _code(tgt)) in self._pairs

    def translate_batch(self, src, tgt, texts: Sequence[str]) -> list[str]:
        src, tgt = _code(src), _code(tgt)
        if (src, tgt) not in self._pairs:
            raise CapabilityError(f"{type(self).__name__} does not translate {src}->{tgt}")
        texts = list(texts)
        if not texts:
            return []
        out = self._translate(src, tgt, texts)
        if len(out) != len(texts):
            raise ProtocolError(f"backend returned {len(out)} translations for {len(texts)} inputs")
        return out

    @abstractmethod
    def _translate(self, src: str, tgt: str, texts: list[str]) -> list[str]:
        ...


def translate_batch(backend: TranslationBackend, src, tgt, texts: Sequence[str]) -> list[str]:
    return backend.translate_batch(src, tgt, texts)


class DictionaryMockBackend(TranslationBackend):
    """Token-by-token dictionary lookup; unknown tokens are copied or dropped."""

    def __init__(self, src, tgt, word_map: Mapping[str, str], unknown_policy: str = "copy"):
        if unknown_policy not in ("copy", "drop"):
            raise ValueError(f"unknown_policy must be 'copy' or 'drop', got {unknown_policy!r}")
        super().__init__([(src, tgt)])
        self.word_map = dict(word_map)
        self.unknown_policy = unknown_policy

    def translate_one(self, text: str) -> str:
        out = []
        for tok in text.split():
            if tok in self.word_map:
                out.append(self.word_map[tok])
            elif self.unknown_policy == "copy":
                out.append(tok)
        return " ".join(out)

    def _translate(self, src, tgt, texts):
        return [self.translate_one(t) for t in texts]


class RemoteBackend(TranslationBackend):
    """HTTP client for the ``POST /translate`` batch protocol.

    Transport failures (connection errors, timeouts, 5xx) are retried up to
    ``max_attempts`` times with exponential backoff; protocol violations
    are raised immediately.
    """

    def __init__(
        self,
        base_url: str,
        pairs,
        timeout: float = 30.0,
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        super().__init__(pairs)
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.session = session or requests.Session()
        self._sleep = sleep

    @property
    def url(self) -> str:
        return f"{self.base_url}/translate"

    def _translate(self, src, tgt, texts):
        payload = {"src_lang": src, "tgt_lang": tgt, "texts": texts}
        last = None
        for attempt in range(1, self.max_attempts + 1):
            try:
                resp = self.session.post(self.url, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                last = f"{type(exc).__name__}: {exc}"
            else:
                if resp.status_code < 500:
                    return self._parse(resp, len(texts))
                last = f"HTTP {resp.status_code}"
            if attempt < self.max_attempts:
                delay = self.backoff_base * 2 ** (attempt - 1)
                log.warning("translate %s->%s attempt %d failed (%s); retrying in %.2fs", src, tgt, attempt, last, delay)
                self._sleep(delay)
        raise TransportError(f"{self.url}: {last}", attempts=self.max_attempts)

    def _parse(self, resp: requests.Response, expected: int) -> list[str]:
        try:
            body = resp.json()
        except ValueError:
            raise ProtocolError(f"{self.url}: HTTP {resp.status_code} with non-JSON body") from None
        if resp.status_code == 400:
            msg = body.get("error", "bad request") if isinstance(body, dict) else "bad request"
            raise CapabilityError(f"{self.url}: {msg}")
        if resp.status_code != 200:
            raise ProtocolError(f"{self.url}: unexpected HTTP {resp.status_code}")
        out = body.get("translations") if isinstance(body, dict) else None
        if not isinstance(out, list) or not all(isinstance(t, str) for t in out):
            raise ProtocolError(f"{self.url}: response lacks a 'translations' string list")
        if len(out) != expected:
            raise ProtocolError(f"{self.url}: got {len(out)} translations for {expected} inputs")
        return out


@dataclass
class PivotTrace:
    pivot_texts: list[str] = field(default_factory=list)


def _run_stage(stage, backend, src, tgt, texts, batch_size, max_workers):
    try:
        if batch_size is None or len(texts) <= batch_size:
            return backend.translate_batch(src, tgt, texts)
        chunks = [texts[i:i + batch_size] for i in range(0, len(texts), batch_size)]
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            # map preserves submission order
            results = list(pool.map(lambda c: backend.translate_batch(src, tgt, c), chunks))
        return [t for chunk in results for t in chunk]
    except BackendError as exc:
        exc.stage = stage
        raise


def pivot_translate(
    first: TranslationBackend,
    second: TranslationBackend,
    src,
    pivot,
    tgt,
    texts: Sequence[str],
    trace: PivotTrace | None = None,
    batch_size: int | None = None,
    max_workers: int = 4,
) -> list[str]:
    """Translate ``src -> pivot`` with ``first``, then ``pivot -> tgt`` with ``second``.

    Backend errors propagate with ``stage`` set to "first" or "second".
    """
    texts = list(texts)
    for stage, backend, a, b in (("first", first, src, pivot), ("second", second, pivot, tgt)):
        if not backend.supports(a, b):
            raise CapabilityError(f"{type(backend).__name__} does not translate {_code(a)}->{_code(b)}", stage)
    middle = _run_stage("first", first, src, pivot, texts, batch_size, max_workers)
    if trace is not None:
        trace.pivot_texts = list(middle)
    return _run_stage("second", second, pivot, tgt, middle, batch_size, max_workers)


def _handler_for(backend: TranslationBackend):
    class Handler(BaseHTTPRequestHandler):
        def _reply(self, status: int, body: dict):
            data = json.dumps(body, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_POST(self):
            if self.path.rstrip("/") != "/translate":
                self._reply(404, {"error": f"no route {self.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length", 0))
                req = json.loads(self.rfile.read(length).decode("utf-8"))
                src, tgt, texts = req["src_lang"], req["tgt_lang"], req["texts"]
            except (ValueError, KeyError, TypeError) as exc:
                self._reply(400, {"error": f"malformed request: {exc}"})
                return
            try:
                out = backend.translate_batch(src, tgt, texts)
            except CapabilityError as exc:
                self._reply(400, {"error": exc.message})
                return
            self._reply(200, {"translations": out})

        def log_message(self, fmt, *args):
            log.debug("%s " + fmt, self.address_string(), *args)

    return Handler


def make_server(backend: TranslationBackend, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """An HTTP server exposing ``backend`` over the batch protocol (not started)."""
    return ThreadingHTTPServer((host, port), _handler_for(backend))


def serve_in_thread(backend: TranslationBackend, host: str = "127.0.0.1", port: int = 0):
    """Start :func:`make_server` on a daemon thread; returns ``(server, base_url)``."""
    server = make_server(backend, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    h, p = server.server_address[:2]
    return server, f"http://{h}:{p}"
