"""Synthetic model adapters and a loopback chat-completion server for them.

Mocks answer in free text drawn from the formats the parser understands, so
every run goes through answer parsing. All randomness is keyed by
(seed, item, probe, prompt); concurrency never changes an answer.
"""

from __future__ import annotations

import json
import logging
import random
import re
import threading
from dataclasses import dataclass
from enum import Enum
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Iterable, Mapping, Sequence

from .core import EvalItem, GroundProbeError, Moment, QueryKind, QueryVariant, iou
from .parsing import ParseContext, TimeConvention, extract_moment
from .rng import derive_seed
from .runner import Capabilities, Message, VideoRef
from .templates import default_registry

log = logging.getLogger(__name__)


class UnknownItem(GroundProbeError, KeyError):
    pass


class BindError(GroundProbeError, OSError):
    pass


class MockKind(str, Enum):
    ORACLE = "Oracle"
    PRIOR = "Prior"
    COIN_VERIFIER = "CoinVerifier"
    BLANKET_YES = "BlanketYes"
    COMPOSITE = "Composite"


class GroundBehavior(str, Enum):
    # grounds the gt of whichever timeline it is shown
    ORACLE = "oracle"
    # ignores the edit: same answer on the shifted video as on the original
    PRIOR = "prior"


class VerifyBehavior(str, Enum):
    TRUTHFUL = "truthful"
    COIN = "coin"
    YES = "yes"


_PRESETS = {
    MockKind.ORACLE: (GroundBehavior.ORACLE, VerifyBehavior.TRUTHFUL),
    MockKind.PRIOR: (GroundBehavior.PRIOR, VerifyBehavior.TRUTHFUL),
    MockKind.COIN_VERIFIER: (GroundBehavior.ORACLE, VerifyBehavior.COIN),
    MockKind.BLANKET_YES: (GroundBehavior.ORACLE, VerifyBehavior.YES),
}


@dataclass(frozen=True)
class MockSpec:
    kind: MockKind = MockKind.ORACLE
    jitter: float = 0.0
    seed: int = 0
    # Composite only
    ground_kind: GroundBehavior = GroundBehavior.ORACLE
    verify_kind: VerifyBehavior = VerifyBehavior.TRUTHFUL
    # share of verification answers phrased indirectly (judge path)
    indirect_rate: float = 0.0

    def __post_init__(self):
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")
        if not 0 <= self.indirect_rate <= 1:
            raise ValueError("indirect_rate must be in [0, 1]")

    @property
    def behaviors(self) -> tuple[GroundBehavior, VerifyBehavior]:
        if self.kind is MockKind.COMPOSITE:
            return self.ground_kind, self.verify_kind
        return _PRESETS[self.kind]

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> MockSpec:
        """``oracle``, ``prior:jitter=0.5``, ``composite:ground=prior,verify=coin``."""
        name, _, rest = text.partition(":")
        names = {k.value.lower(): k for k in MockKind}
        names.update({"coin": MockKind.COIN_VERIFIER, "yes": MockKind.BLANKET_YES})
        try:
            kind = names[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown mock kind {name!r}") from None
        opts = dict(p.split("=", 1) for p in rest.split(",") if "=" in p)
        return cls(
            kind=kind,
            jitter=float(opts.get("jitter", 0.0)),
            seed=int(opts.get("seed", seed)),
            ground_kind=GroundBehavior(opts.get("ground", "oracle")),
            verify_kind=VerifyBehavior(opts.get("verify", "truthful")),
            indirect_rate=float(opts.get("indirect", 0.0)),
        )


def _fmt(t: float) -> str:
    return f"{t:.1f}"


def _clock(t: float) -> str:
    return f"{int(t // 60):02d}:{t - 60 * int(t // 60):04.1f}"


# every format parses back to the same moment under the seconds convention
GROUND_FORMATS = (
    lambda s, e, q: f"The given query happens in {_fmt(s)} - {_fmt(e)} seconds.",
    lambda s, e, q: f"{s:06.1f} - {e:06.1f} seconds, {q}",
    lambda s, e, q: f"The event occurs in the video at the start time of {_clock(s)} and ends at {_clock(e)}.",
    lambda s, e, q: f"From {_fmt(s)} to {_fmt(e)} seconds.",
    lambda s, e, q: f"The event happens in the {_fmt(s)} - {_fmt(e)} seconds.",
    lambda s, e, q: f"{_fmt(s)}s - {_fmt(e)}s",
)

YES_FORMATS = ("Yes.", "Yes", "Yes, that's correct.", "yes, it does.")
NO_FORMATS = ("No.", "No", "No, it is not.", "no.")

DESCRIPTION_REPLY = "The video shows a person in an indoor scene moving around and handling objects."

_NEGATED_TEMPLATE = re.compile(r"\b(?:absent|missing|not present|not happen)\b", re.IGNORECASE)
_NEGATION = re.compile(
    r"\b(?:not|no|never|none|nothing|absent|missing|without|neither|nor)\b|n't\b", re.IGNORECASE
)


class MockAdapter:
    """In-process synthetic model built from a :class:`MockSpec` and an eval set."""

    time_convention = TimeConvention.SECONDS
    template_set = "1"

    def __init__(self, spec: MockSpec, items: Iterable[EvalItem], adapter_id: str | None = None):
        self.spec = spec
        self.items = {it.item_id: it for it in items}
        self.adapter_id = adapter_id or f"mock:{spec.kind.value.lower()}"
        self.capabilities = Capabilities(True, True)
        self.ground_kind, self.verify_kind = spec.behaviors
        self._description = default_registry().description

    def _item(self, video: VideoRef) -> EvalItem:
        try:
            return self.items[video.item_id]
        except KeyError:
            raise UnknownItem(f"item {video.item_id!r} is not in the mock's eval set") from None

    def _rng(self, *parts: Any) -> random.Random:
        return random.Random(derive_seed(self.spec.seed, *parts))

    @staticmethod
    def _find_variant(item: EvalItem, prompt: str, pool: Sequence[QueryVariant]) -> QueryVariant | None:
        hits = [v for v in pool if v.text in prompt]
        return max(hits, key=lambda v: len(v.text)) if hits else None

    def _jittered(self, m: Moment, duration: float, rng: random.Random) -> Moment:
        if self.spec.jitter == 0:
            return m
        j = self.spec.jitter
        s = round(min(max(0.0, m.t_s + rng.uniform(-j, j)), duration - 0.1), 1)
        e = round(min(max(s + 0.1, m.t_e + rng.uniform(-j, j)), duration), 1)
        return Moment(s, e)

    def ground(self, video: VideoRef, prompt: str, history: Sequence[Message] = ()) -> str:
        item = self._item(video)
        variant = self._find_variant(item, prompt, (item.query, *item.aligned, *item.misaligned))
        query = variant.text if variant else item.query.text
        if self.ground_kind is GroundBehavior.PRIOR:
            # the same query gets the same words whichever video is shown
            key = (item.item_id, "ground", query)
            target = item.gt
        else:
            key = (item.item_id, "ground", query, video.shifted)
            target = item.shift.shifted_gt if video.shifted else item.gt
        if variant is not None and variant.kind is QueryKind.MISALIGNED:
            # a misaligned sentence has no true moment; guess the other end of the video
            target = item.shift.shifted_gt
        rng = self._rng(*key)
        m = self._jittered(target, item.video.duration, rng)
        return rng.choice(GROUND_FORMATS)(m.t_s, m.t_e, query)

    def truth(self, item: EvalItem, prompt: str) -> bool:
        """Whether the probe's claim holds: the variant occurs in the prompt's moment."""
        variant = self._find_variant(item, prompt, (*item.aligned, *item.misaligned, *item.compositional))
        if variant is None:
            return False
        stripped = prompt.replace(variant.text, " ")
        parsed = extract_moment(stripped, ParseContext(item.video.duration, self.time_convention))
        m = parsed.moment
        overlaps = m is not None and iou(m, item.gt) >= 0.5
        occurs = overlaps and variant.kind.is_aligned
        negated = not variant.kind.is_compositional and bool(_NEGATED_TEMPLATE.search(stripped))
        return occurs != negated

    def answer(self, video: VideoRef, prompt: str, history: Sequence[Message] = ()) -> str:
        item = self._item(video)
        if prompt.strip() == self._description:
            return DESCRIPTION_REPLY
        rng = self._rng(item.item_id, "answer", prompt)
        if self.verify_kind is VerifyBehavior.YES:
            says_yes = True
        elif self.verify_kind is VerifyBehavior.COIN:
            says_yes = rng.random() < 0.5
        else:
            says_yes = self.truth(item, prompt)
        if self.spec.indirect_rate and rng.random() < self.spec.indirect_rate:
            return indirect_reply(prompt, says_yes)
        return rng.choice(YES_FORMATS if says_yes else NO_FORMATS)


def indirect_reply(question: str, says_yes: bool) -> str:
    """A statement without a leading yes/no whose negation parity carries the verdict."""
    q_neg = len(_NEGATION.findall(question)) % 2
    odd = q_neg if says_yes else 1 - q_neg
    return "It is not shown in that part of the video." if odd else "It is shown in that part of the video."


def make_mock(spec: MockSpec, eval_set: Iterable[EvalItem], adapter_id: str | None = None) -> MockAdapter:
    return MockAdapter(spec, eval_set, adapter_id)


# loopback server


class _Handler(BaseHTTPRequestHandler):
    server: _MockHTTPServer

    def log_message(self, fmt, *args):
        log.debug("mock server: " + fmt, *args)

    def _reply(self, status: int, payload: dict[str, Any]) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        if not self.path.rstrip("/").endswith("/chat/completions"):
            self._reply(404, {"error": f"no route {self.path}"})
            return
        try:
            length = int(self.headers.get("Content-Length", 0))
            req = json.loads(self.rfile.read(length))
            messages = req["messages"]
            prompt = messages[-1]["content"]
            video = VideoRef.from_dict(req["video"])
            task = req.get("task", "answer")
        except (ValueError, KeyError, TypeError, IndexError) as exc:
            self._reply(400, {"error": f"bad request: {exc}"})
            return
        adapter = self.server.adapters.get(req.get("model", ""))
        if adapter is None:
            self._reply(404, {"error": f"unknown model {req.get('model')!r}"})
            return
        try:
            call = adapter.ground if task == "ground" else adapter.answer
            text = call(video, prompt, tuple(messages[:-1]))
        except UnknownItem as exc:
            self._reply(404, {"error": str(exc)})
            return
        self._reply(
            200,
            {
                "object": "chat.completion",
                "model": req.get("model"),
                "choices": [{"index": 0, "message": {"role": "assistant", "content": text}, "finish_reason": "stop"}],
            },
        )


class _MockHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, addr, adapters: Mapping[str, Any]):
        super().__init__(addr, _Handler)
        self.adapters = dict(adapters)


class LocalServer:
    """A running loopback endpoint; use as a context manager or call :meth:`close`."""

    def __init__(self, httpd: _MockHTTPServer):
        self._httpd = httpd
        self._thread = threading.Thread(target=httpd.serve_forever, daemon=True)
        self._thread.start()

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self.port}/v1"

    def close(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> LocalServer:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def serve_local(adapters: Mapping[str, Any] | Sequence[Any], port: int = 0, host: str = "127.0.0.1") -> LocalServer:
    """Serve adapters over loopback; the request ``model`` field selects the adapter."""
    if not isinstance(adapters, Mapping):
        adapters = {a.adapter_id: a for a in adapters}
    try:
        httpd = _MockHTTPServer((host, port), adapters)
    except OSError as exc:
        raise BindError(f"cannot bind {host}:{port}: {exc}") from exc
    return LocalServer(httpd)
