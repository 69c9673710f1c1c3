"""Probe orchestration: Ground, R-Ground, S-Ground, H-Verify and C-Verify.

Every probe of every item is collected; correctness gating happens when
scoring, so one run serves any IoU threshold.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Protocol, Sequence

from .core import EvalItem, GroundProbeError, Moment, QueryKind, Rule, Verdict
from .evalset import VerificationQuestion, build_verification_questions
from .jsonio import SchemaMismatch, dumps, header
from .llm.client import BackendRejected, BackendUnavailable, ChatClient, LLMConfig
from .llm.gateway import HeuristicJudge, Judge, JudgeRequest, MalformedGeneration
from .parsing import INDIRECT, ParseContext, ParseOutcome, TimeConvention, classify_yes_no, extract_moment
from .templates import Polarity, TemplateRegistry, default_registry, fill, render_prompt

log = logging.getLogger(__name__)

RESULTS_SCHEMA = "groundprobe.results"
RESULTS_VERSION = 1

Message = dict[str, Any]


class AdapterError(GroundProbeError):
    """Transport or server failure while talking to a model."""


class ConfigError(GroundProbeError):
    pass


class ProbeKind(str, Enum):
    GROUND = "Ground"
    RGROUND = "RGround"
    SGROUND = "SGround"
    HVERIFY = "HVerify"
    CVERIFY = "CVerify"

    @property
    def is_verification(self) -> bool:
        return self in (ProbeKind.HVERIFY, ProbeKind.CVERIFY)


class JudgedBy(str, Enum):
    PARSER = "Parser"
    JUDGE = "Judge"
    HEURISTIC = "Heuristic"


class StrategyKind(str, Enum):
    STANDARD = "Standard"
    CHAIN_OF_THOUGHT = "ChainOfThought"
    DESCRIPTION = "Description"


@dataclass(frozen=True)
class PromptStrategy:
    kind: StrategyKind = StrategyKind.STANDARD

    @property
    def keeps_history(self) -> bool:
        return self.kind is StrategyKind.DESCRIPTION

    @classmethod
    def parse(cls, name: str) -> PromptStrategy:
        aliases = {"standard": "Standard", "cot": "ChainOfThought", "description": "Description"}
        return cls(StrategyKind(aliases.get(name.lower(), name)))


@dataclass(frozen=True)
class VideoRef:
    """Opaque video handle; the harness never decodes media."""

    video_id: str
    item_id: str
    shifted: bool = False
    path: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {"video_id": self.video_id, "item_id": self.item_id, "shifted": self.shifted, "path": self.path}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> VideoRef:
        return cls(d["video_id"], d["item_id"], bool(d.get("shifted", False)), d.get("path", ""))


@dataclass(frozen=True)
class Capabilities:
    ground: bool = True
    verify: bool = True


class ModelAdapter(Protocol):
    adapter_id: str
    capabilities: Capabilities
    time_convention: TimeConvention
    # grounding template id in the registry
    template_set: str

    def ground(self, video: VideoRef, prompt: str, history: Sequence[Message] = ()) -> str: ...

    def answer(self, video: VideoRef, prompt: str, history: Sequence[Message] = ()) -> str: ...


@dataclass(frozen=True)
class ProbeRecord:
    item_id: str
    probe: ProbeKind
    # "query", "aligned[1]", "misaligned[0]", "compositional[3]"
    variant_ref: str
    rendered_prompt: str
    raw_answer: str
    parsed: ParseOutcome | None
    expected: Verdict | None = None
    judged_by: JudgedBy | None = None
    # verification only: did the answer agree with `expected`
    matched: bool | None = None
    rule: Rule | None = None
    query_kind: QueryKind | None = None
    template_id: str = ""
    # moment the probe is checked against or embeds: gt, shifted gt, or the model's own m
    reference: Moment | None = None
    history: tuple[Message, ...] = ()
    error: str = ""

    def __post_init__(self):
        if (self.expected is not None) != self.probe.is_verification:
            raise ValueError("expected verdict is present iff the probe is a verification probe")

    @property
    def moment(self) -> Moment | None:
        return self.parsed.moment if self.parsed is not None else None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "item_id": self.item_id,
            "probe": self.probe.value,
            "variant_ref": self.variant_ref,
            "prompt": self.rendered_prompt,
            "answer": self.raw_answer,
            "parsed": self.parsed.to_dict() if self.parsed is not None else None,
        }
        if self.expected is not None:
            d["expected"] = self.expected.value
        if self.judged_by is not None:
            d["judged_by"] = self.judged_by.value
        if self.matched is not None:
            d["matched"] = self.matched
        if self.rule is not None:
            d["rule"] = self.rule.value
        if self.query_kind is not None:
            d["query_kind"] = self.query_kind.value
        if self.template_id:
            d["template_id"] = self.template_id
        if self.reference is not None:
            d["reference"] = self.reference.to_list()
        if self.history:
            d["history"] = list(self.history)
        if self.error:
            d["error"] = self.error
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ProbeRecord:
        return cls(
            item_id=d["item_id"],
            probe=ProbeKind(d["probe"]),
            variant_ref=d["variant_ref"],
            rendered_prompt=d["prompt"],
            raw_answer=d["answer"],
            parsed=ParseOutcome.from_dict(d["parsed"]) if d.get("parsed") is not None else None,
            expected=Verdict(d["expected"]) if "expected" in d else None,
            judged_by=JudgedBy(d["judged_by"]) if "judged_by" in d else None,
            matched=d.get("matched"),
            rule=Rule(d["rule"]) if "rule" in d else None,
            query_kind=QueryKind(d["query_kind"]) if "query_kind" in d else None,
            template_id=d.get("template_id", ""),
            reference=Moment.from_list(d["reference"]) if "reference" in d else None,
            history=tuple(d.get("history", ())),
            error=d.get("error", ""),
        )


@dataclass
class ResultSet:
    dataset_id: str
    adapter_id: str
    strategy: PromptStrategy
    rng_seed: int
    records: list[ProbeRecord] = field(default_factory=list)
    # eval items by id, needed for scoring (gt, shifted gt, rule tags)
    items: dict[str, EvalItem] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        seen: set[str] = set()
        for r in self.records:
            if r.probe is ProbeKind.GROUND:
                if r.item_id in seen:
                    raise ValueError(f"more than one Ground record for {r.item_id}")
                seen.add(r.item_id)

    def item_ids(self) -> list[str]:
        return list(dict.fromkeys(r.item_id for r in self.records))

    def by_item(self) -> dict[str, list[ProbeRecord]]:
        out: dict[str, list[ProbeRecord]] = {}
        for r in self.records:
            out.setdefault(r.item_id, []).append(r)
        return out

    def header(self) -> dict[str, Any]:
        return header(
            RESULTS_SCHEMA,
            RESULTS_VERSION,
            dataset_id=self.dataset_id,
            adapter_id=self.adapter_id,
            strategy=self.strategy.kind.value,
            rng_seed=self.rng_seed,
        )

    def dumps(self) -> str:
        """Canonical serialization; equal runs give byte-equal text."""
        lines = [dumps(self.header())] + [dumps(r.to_dict()) for r in self.records]
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str, items: Iterable[EvalItem] = ()) -> ResultSet:
        lines = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not lines or lines[0].get("schema") != RESULTS_SCHEMA:
            raise SchemaMismatch("not a result set")
        head = lines[0]
        if head.get("version") != RESULTS_VERSION:
            raise SchemaMismatch(f"unsupported result-set version {head.get('version')}")
        records = [ProbeRecord.from_dict(d) for d in lines[1:] if "done" not in d]
        return cls(
            dataset_id=head["dataset_id"],
            adapter_id=head["adapter_id"],
            strategy=PromptStrategy(StrategyKind(head["strategy"])),
            rng_seed=head["rng_seed"],
            records=records,
            items={i.item_id: i for i in items},
        )

    @classmethod
    def read(cls, path: str | Path, items: Iterable[EvalItem] = ()) -> ResultSet:
        return cls.loads(Path(path).read_text(encoding="utf-8"), items)


@dataclass(frozen=True)
class SuiteConfig:
    strategy: PromptStrategy = field(default_factory=PromptStrategy)
    seed: int = 0
    max_workers: int = 4
    dataset_id: str = ""
    # appended verbatim to every verification prompt, e.g. "Answer with Yes or No."
    verify_suffix: str = ""
    # kept for reporting only; gating is applied when scoring
    iou_threshold: float = 0.5
    # restrict holistic templates to one polarity; None samples all eight
    template_polarity: Polarity | None = None

    def __post_init__(self):
        if self.max_workers < 1:
            raise ConfigError("max_workers must be >= 1")
        if not 0 < self.iou_threshold <= 1:
            raise ConfigError("iou_threshold must be in (0, 1]")


class ProbeRunner:
    """Runs every probe of one item against one adapter."""

    def __init__(
        self,
        adapter: ModelAdapter,
        config: SuiteConfig = SuiteConfig(),
        registry: TemplateRegistry | None = None,
        judge: Judge | None = None,
        fallback_judge: Judge | None = None,
    ):
        self.adapter = adapter
        self.config = config
        self.registry = registry or default_registry()
        self.judge = judge or HeuristicJudge()
        self.fallback = fallback_judge or HeuristicJudge()
        # the judge is "live" unless it is the offline heuristic
        self._judge_kind = JudgedBy.HEURISTIC if isinstance(self.judge, HeuristicJudge) else JudgedBy.JUDGE

    @property
    def strategy(self) -> PromptStrategy:
        return self.config.strategy

    def _ctx(self, item: EvalItem) -> ParseContext:
        return ParseContext(item.video.duration, self.adapter.time_convention, self.adapter.adapter_id)

    def grounding_prompt(self, query: str) -> str:
        if self.strategy.kind is StrategyKind.CHAIN_OF_THOUGHT:
            return render_prompt("cot.ground", {"q": query}, self.registry)
        return render_prompt(self.adapter.template_set, {"q": query}, self.registry)

    def verification_prompt(self, q: VerificationQuestion, m: Moment, item: EvalItem) -> str:
        conv, dur = self.adapter.time_convention, item.video.duration
        if self.strategy.kind is StrategyKind.CHAIN_OF_THOUGHT:
            bound = q.bind(m, conv, dur)
            if q.is_compositional:
                text = fill(self.registry.cot["compositional"], {"m": m, "question": q.variant_text}, conv, dur)
            else:
                text = fill(
                    self.registry.cot["holistic"], {"q": q.variant_text, "m": m, "question": bound.text}, conv, dur
                )
        else:
            text = q.bind(m, conv, dur).text
        if self.config.verify_suffix:
            text = f"{text} {self.config.verify_suffix}"
        return text

    def description_history(self, video: VideoRef) -> tuple[Message, ...]:
        prompt = self.registry.description
        reply = self.adapter.answer(video, prompt, ())
        return ({"role": "user", "content": prompt}, {"role": "assistant", "content": reply})

    def _history(self, video: VideoRef, cache: dict[bool, tuple[Message, ...]]) -> tuple[Message, ...]:
        if not self.strategy.keeps_history:
            return ()
        if video.shifted not in cache:
            cache[video.shifted] = self.description_history(video)
        return cache[video.shifted]

    def _ground_record(
        self,
        item: EvalItem,
        probe: ProbeKind,
        video: VideoRef,
        query: str,
        variant_ref: str,
        reference: Moment,
        history_cache: dict[bool, tuple[Message, ...]],
        rule: Rule | None = None,
    ) -> ProbeRecord:
        prompt = self.grounding_prompt(query)
        try:
            history = self._history(video, history_cache)
            raw = self.adapter.ground(video, prompt, history)
        except AdapterError as exc:
            log.warning("%s %s: adapter error: %s", item.item_id, probe.value, exc)
            return ProbeRecord(item.item_id, probe, variant_ref, prompt, "", None, rule=rule,
                               reference=reference, error=str(exc))
        parsed = extract_moment(raw, self._ctx(item))
        return ProbeRecord(
            item.item_id, probe, variant_ref, prompt, raw, parsed, rule=rule, reference=reference, history=history
        )

    def run_ground(self, item: EvalItem, history_cache: dict | None = None) -> ProbeRecord:
        video = VideoRef(item.video.video_id, item.item_id)
        return self._ground_record(
            item, ProbeKind.GROUND, video, item.query.text, "query", item.gt, {} if history_cache is None else history_cache
        )

    def grade(self, question: str, raw: str, expected: Verdict) -> tuple[ParseOutcome, JudgedBy, bool]:
        """Parser first; only Indirect answers reach the judge."""
        said = classify_yes_no(raw) if raw.strip() else INDIRECT
        if said is not INDIRECT:
            return ParseOutcome(said), JudgedBy.PARSER, said is expected
        if not raw.strip():
            return ParseOutcome.invalid("empty answer"), JudgedBy.PARSER, False
        req = JudgeRequest(question, raw, expected)
        try:
            agrees = self.judge.judge(req) is Verdict.YES
            by = self._judge_kind
            reason = "indirect"
        except (BackendUnavailable, BackendRejected, MalformedGeneration) as exc:
            log.warning("judge unavailable, heuristic grading: %s", exc)
            agrees = self.fallback.judge(req) is Verdict.YES
            by = JudgedBy.HEURISTIC
            reason = "indirect; degraded grading"
        inferred = expected if agrees else expected.flip()
        return ParseOutcome(inferred, reason), by, agrees

    def run_verification(
        self, item: EvalItem, q: VerificationQuestion, m: Moment, variant_ref: str, history: tuple[Message, ...]
    ) -> ProbeRecord:
        probe = ProbeKind.CVERIFY if q.is_compositional else ProbeKind.HVERIFY
        prompt = self.verification_prompt(q, m, item)
        video = VideoRef(item.video.video_id, item.item_id)
        common = dict(expected=q.expected, query_kind=q.query_kind, template_id=q.template_id, reference=m)
        try:
            raw = self.adapter.answer(video, prompt, history)
        except AdapterError as exc:
            log.warning("%s %s: adapter error: %s", item.item_id, probe.value, exc)
            return ProbeRecord(item.item_id, probe, variant_ref, prompt, "", None, error=str(exc), **common)
        parsed, by, matched = self.grade(prompt, raw, q.expected)
        return ProbeRecord(
            item.item_id, probe, variant_ref, prompt, raw, parsed, judged_by=by, matched=matched,
            history=history, **common,
        )

    def run_item(self, item: EvalItem) -> list[ProbeRecord]:
        caps = self.adapter.capabilities
        if not caps.ground:
            raise ConfigError(f"adapter {self.adapter.adapter_id} cannot ground")
        cache: dict[bool, tuple[Message, ...]] = {}
        records = [self.run_ground(item, cache)]
        original = VideoRef(item.video.video_id, item.item_id)
        shifted = VideoRef(item.video.video_id, item.item_id, shifted=True)
        for i, v in enumerate(item.aligned):
            records.append(
                self._ground_record(item, ProbeKind.RGROUND, original, v.text, f"aligned[{i}]", item.gt, cache, v.rule)
            )
        records.append(
            self._ground_record(item, ProbeKind.SGROUND, shifted, item.query.text, "query", item.shift.shifted_gt, cache)
        )
        m = records[0].moment
        if m is None or not caps.verify:
            return records
        try:
            history = self._history(original, cache)
        except AdapterError as exc:
            log.warning("%s: description turn failed: %s", item.item_id, exc)
            history = ()
        questions = build_verification_questions(
            item, self.registry, self.config.seed, self.config.template_polarity
        )
        n_hol = 0
        n_comp = 0
        for q in questions:
            if q.is_compositional:
                ref, n_comp = f"compositional[{n_comp}]", n_comp + 1
            else:
                group = "aligned" if q.query_kind is QueryKind.ALIGNED else "misaligned"
                ref = f"{group}[{n_hol % 3}]"
                n_hol += 1
            records.append(self.run_verification(item, q, m, ref, history))
        return records


def run_ground(adapter: ModelAdapter, item: EvalItem, strategy: PromptStrategy = PromptStrategy()) -> ProbeRecord:
    return ProbeRunner(adapter, SuiteConfig(strategy=strategy)).run_ground(item)


def _item_ok(records: Sequence[ProbeRecord]) -> bool:
    return not any(r.error for r in records)


def run_suite(
    adapter: ModelAdapter,
    items: Sequence[EvalItem],
    config: SuiteConfig = SuiteConfig(),
    registry: TemplateRegistry | None = None,
    judge: Judge | None = None,
    checkpoint: str | Path | None = None,
) -> ResultSet:
    """Run every probe for every item.

    With ``checkpoint`` set, finished items are appended there as they
    complete, each followed by a ``{"done": item_id}`` marker; an existing
    checkpoint is resumed, skipping items that finished without errors.
    """
    runner = ProbeRunner(adapter, config, registry, judge)
    done: dict[str, list[ProbeRecord]] = {}
    if checkpoint is not None and Path(checkpoint).exists():
        done = load_checkpoint(checkpoint, config, adapter.adapter_id)
    todo = [it for it in items if it.item_id not in done]

    sink = None
    if checkpoint is not None:
        fresh = not Path(checkpoint).exists()
        sink = open(checkpoint, "a", encoding="utf-8")
        if fresh:
            rs_head = ResultSet(config.dataset_id, adapter.adapter_id, config.strategy, config.seed).header()
            sink.write(dumps(rs_head) + "\n")
            sink.flush()

    def one(item: EvalItem) -> list[ProbeRecord]:
        return runner.run_item(item)

    try:
        with ThreadPoolExecutor(max_workers=config.max_workers) as ex:
            for item, recs in zip(todo, ex.map(one, todo)):
                done[item.item_id] = recs
                if sink is not None and _item_ok(recs):
                    # single writer: map() yields in submission order on this thread
                    sink.write("".join(dumps(r.to_dict()) + "\n" for r in recs))
                    sink.write(dumps({"done": item.item_id}) + "\n")
                    sink.flush()
    finally:
        if sink is not None:
            sink.close()

    records = [r for it in items for r in done.get(it.item_id, [])]
    return ResultSet(
        dataset_id=config.dataset_id,
        adapter_id=adapter.adapter_id,
        strategy=config.strategy,
        rng_seed=config.seed,
        records=records,
        items={it.item_id: it for it in items},
    )


def load_checkpoint(path: str | Path, config: SuiteConfig, adapter_id: str) -> dict[str, list[ProbeRecord]]:
    """Completed items from an append-only checkpoint; a torn last line is ignored."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        return {}
    head = json.loads(lines[0])
    if head.get("schema") != RESULTS_SCHEMA:
        raise SchemaMismatch(f"{path} is not a result checkpoint")
    expect = {"adapter_id": adapter_id, "rng_seed": config.seed, "strategy": config.strategy.kind.value}
    for k, v in expect.items():
        if head.get(k) != v:
            raise ConfigError(f"checkpoint {path} was written with {k}={head.get(k)!r}, not {v!r}")
    pending: dict[str, list[ProbeRecord]] = {}
    done: dict[str, list[ProbeRecord]] = {}
    for line in lines[1:]:
        try:
            d = json.loads(line)
        except json.JSONDecodeError:
            break
        if "done" in d:
            done[d["done"]] = pending.pop(d["done"], [])
        else:
            pending.setdefault(d["item_id"], []).append(ProbeRecord.from_dict(d))
    return done


# HTTP transport


@dataclass(frozen=True)
class AdapterSpec:
    adapter_id: str
    url: str
    model: str = ""
    time_convention: TimeConvention = TimeConvention.SECONDS
    template_set: str = "1"
    capabilities: Capabilities = field(default_factory=Capabilities)
    timeout_s: float = 60.0
    max_retries: int = 3
    backoff_s: float = 0.5
    max_in_flight: int = 8

    @classmethod
    def from_dict(cls, adapter_id: str, d: dict[str, Any]) -> AdapterSpec:
        caps = d.get("capabilities", {})
        return cls(
            adapter_id=adapter_id,
            url=d["url"],
            model=d.get("model", adapter_id),
            time_convention=TimeConvention(d.get("time_convention", "seconds")),
            template_set=str(d.get("template_set", "1")),
            capabilities=Capabilities(bool(caps.get("ground", True)), bool(caps.get("verify", True))),
            timeout_s=float(d.get("timeout_s", 60.0)),
            max_retries=int(d.get("max_retries", 3)),
            backoff_s=float(d.get("backoff_s", 0.5)),
            max_in_flight=int(d.get("max_in_flight", 8)),
        )


class HTTPAdapter:
    """Model adapter speaking the chat-completion transport.

    The request carries two extra fields: ``video`` (the opaque VideoRef) and
    ``task`` (``ground`` or ``answer``).
    """

    def __init__(self, spec: AdapterSpec, api_key: str = ""):
        self.spec = spec
        self.adapter_id = spec.adapter_id
        self.capabilities = spec.capabilities
        self.time_convention = spec.time_convention
        self.template_set = spec.template_set
        cfg = LLMConfig(
            url=spec.url,
            model=spec.model or spec.adapter_id,
            api_key=api_key,
            timeout_s=spec.timeout_s,
            max_retries=spec.max_retries,
            backoff_s=spec.backoff_s,
            max_in_flight=spec.max_in_flight,
        )
        self.client = ChatClient(cfg)

    def _call(self, task: str, video: VideoRef, prompt: str, history: Sequence[Message]) -> str:
        messages = [*history, {"role": "user", "content": prompt}]
        try:
            return self.client.complete(messages, {"video": video.to_dict(), "task": task})
        except (BackendUnavailable, BackendRejected) as exc:
            raise AdapterError(str(exc)) from exc

    def ground(self, video: VideoRef, prompt: str, history: Sequence[Message] = ()) -> str:
        return self._call("ground", video, prompt, history)

    def answer(self, video: VideoRef, prompt: str, history: Sequence[Message] = ()) -> str:
        return self._call("answer", video, prompt, history)


def load_adapters(path: str | Path, env: dict[str, str] | None = None) -> dict[str, HTTPAdapter]:
    """Adapters config: ``{"adapters": {id: {url, model, time_convention, template_set, ...}}}``.

    API keys come from ``GROUNDPROBE_ADAPTER_<ID>_API_KEY`` only.
    """
    env = os.environ if env is None else env
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    out = {}
    for adapter_id, d in raw.get("adapters", {}).items():
        key = env.get(f"GROUNDPROBE_ADAPTER_{adapter_id.upper().replace('-', '_')}_API_KEY", "")
        out[adapter_id] = HTTPAdapter(AdapterSpec.from_dict(adapter_id, d), key)
    return out


__all__ = [
    "AdapterError",
    "AdapterSpec",
    "Capabilities",
    "ConfigError",
    "HTTPAdapter",
    "JudgedBy",
    "ModelAdapter",
    "ProbeKind",
    "ProbeRecord",
    "ProbeRunner",
    "PromptStrategy",
    "ResultSet",
    "StrategyKind",
    "SuiteConfig",
    "VideoRef",
    "load_adapters",
    "run_ground",
    "run_suite",
]
