"""Generator and judge interfaces, their LLM-backed implementations and the
rule-based fallback grader."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Protocol, Union

import jsonschema

from ..core import Component, GroundProbeError, QueryKind, QueryVariant, Rule, Verdict
from ..parsing import INDIRECT, classify_yes_no
from ..templates import TemplateRegistry, default_registry, fill
from .client import BackendUnavailable, ChatClient


class MalformedGeneration(GroundProbeError):
    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class GenerationTask(str, Enum):
    ALIGNED_MISALIGNED = "AlignedMisaligned"
    COMPOSITIONAL = "Compositional"
    VERIFICATION_WITH_CORRECTION = "VerificationWithCorrection"


_DEFAULT_TEMPLATE = {
    GenerationTask.ALIGNED_MISALIGNED: "generator.aligned_misaligned",
    GenerationTask.COMPOSITIONAL: "generator.compositional",
    GenerationTask.VERIFICATION_WITH_CORRECTION: "generator.correction",
}


@dataclass(frozen=True)
class GenerationRequest:
    task: GenerationTask
    query_text: str
    prompt_template_id: str = ""
    # number of (aligned, misaligned, correction) triples for the correction task
    n: int = 3

    def __post_init__(self):
        if not self.prompt_template_id:
            object.__setattr__(self, "prompt_template_id", _DEFAULT_TEMPLATE[self.task])


@dataclass(frozen=True)
class VariantSet:
    """Aligned variants (rule-tagged, possibly more than three) and misaligned ones.

    Misaligned variants carry ``original``/``replacement``/``correction`` in
    their provenance.
    """

    aligned: tuple[QueryVariant, ...]
    misaligned: tuple[QueryVariant, ...]


@dataclass(frozen=True)
class CompositionalSet:
    subject: str
    action: str
    relations: tuple[str, ...]
    questions: tuple[QueryVariant, ...]


@dataclass(frozen=True)
class CorrectionTriple:
    aligned: str
    misaligned: str
    correction: str


@dataclass(frozen=True)
class CorrectionSet:
    items: tuple[CorrectionTriple, ...]
    provenance: dict[str, Any] = field(default_factory=dict, compare=False)


Generated = Union[VariantSet, CompositionalSet, CorrectionSet]


class VariantGenerator(Protocol):
    backend_id: str

    def generate(self, req: GenerationRequest) -> Generated: ...


def generate_variants(gen: VariantGenerator, req: GenerationRequest) -> Generated:
    return gen.generate(req)


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:12]


_ALIGNED_MISALIGNED_SCHEMA = {
    "type": "object",
    "required": ["aligned", "misaligned"],
    "properties": {
        "aligned": {
            "type": "array",
            "minItems": 3,
            "items": {
                "type": "object",
                "required": ["text", "rule"],
                "properties": {"text": {"type": "string", "minLength": 1}, "rule": {"enum": ["WR", "AP", "WO"]}},
            },
        },
        "misaligned": {
            "type": "array",
            "minItems": 3,
            "items": {
                "type": "object",
                "required": ["text"],
                "properties": {
                    "text": {"type": "string", "minLength": 1},
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                },
            },
        },
    },
}

_COMPOSITIONAL_SCHEMA = {
    "type": "object",
    "required": ["subject", "action", "questions"],
    "properties": {
        "subject": {"type": "string"},
        "action": {"type": "string"},
        "relations": {"type": "array", "items": {"type": "string"}},
        "questions": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "object",
                "required": ["text", "component", "aligned"],
                "properties": {
                    "text": {"type": "string", "minLength": 1},
                    "component": {"enum": ["Subject", "Action", "Relation"]},
                    "aligned": {"type": "boolean"},
                },
            },
        },
    },
}

_CORRECTION_SCHEMA = {
    "type": "object",
    "required": ["items"],
    "properties": {
        "items": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["aligned", "misaligned", "correction"],
                "properties": {
                    "aligned": {"type": "string", "minLength": 1},
                    "misaligned": {"type": "string", "minLength": 1},
                    "correction": {"type": "string", "minLength": 1},
                },
            },
        }
    },
}

_SCHEMAS = {
    GenerationTask.ALIGNED_MISALIGNED: _ALIGNED_MISALIGNED_SCHEMA,
    GenerationTask.COMPOSITIONAL: _COMPOSITIONAL_SCHEMA,
    GenerationTask.VERIFICATION_WITH_CORRECTION: _CORRECTION_SCHEMA,
}


def _json_payload(raw: str) -> Any:
    # models like to wrap JSON in code fences or prose
    start, end = raw.find("{"), raw.rfind("}")
    if start < 0 or end <= start:
        raise ValueError("no JSON object in response")
    return json.loads(raw[start : end + 1])


def correction_sentence(original: str, replacement: str) -> str:
    return f"The video shows '{original}', not '{replacement}'."


def parse_generation(task: GenerationTask, raw: str, provenance: dict[str, Any]) -> Generated:
    """Validate a raw generator reply against the task schema and convert it."""
    try:
        data = _json_payload(raw)
        jsonschema.validate(data, _SCHEMAS[task])
    except (ValueError, jsonschema.ValidationError) as exc:
        raise MalformedGeneration(f"{task.value}: {exc}", raw) from None

    if task is GenerationTask.ALIGNED_MISALIGNED:
        aligned = tuple(
            QueryVariant(a["text"].strip(), QueryKind.ALIGNED, rule=Rule(a["rule"]), provenance=dict(provenance))
            for a in data["aligned"]
        )
        misaligned = []
        for m in data["misaligned"]:
            prov = dict(provenance)
            if m.get("from") and m.get("to"):
                prov.update(
                    original=m["from"], replacement=m["to"], correction=correction_sentence(m["from"], m["to"])
                )
            misaligned.append(QueryVariant(m["text"].strip(), QueryKind.MISALIGNED, provenance=prov))
        return VariantSet(aligned, tuple(misaligned))

    if task is GenerationTask.COMPOSITIONAL:
        questions = tuple(
            QueryVariant(
                q["text"].strip(),
                QueryKind.COMPOSITIONAL_ALIGNED if q["aligned"] else QueryKind.COMPOSITIONAL_MISALIGNED,
                component=Component(q["component"]),
                provenance=dict(provenance),
            )
            for q in data["questions"]
        )
        return CompositionalSet(
            data["subject"].strip(), data["action"].strip(), tuple(data.get("relations", [])), questions
        )

    items = tuple(
        CorrectionTriple(i["aligned"].strip(), i["misaligned"].strip(), i["correction"].strip())
        for i in data["items"]
    )
    return CorrectionSet(items, provenance)


class LLMGenerator:
    """Variant generator backed by a chat-completion endpoint."""

    def __init__(self, client: ChatClient, registry: TemplateRegistry | None = None, max_attempts: int = 3):
        self.client = client
        self.registry = registry or default_registry()
        self.max_attempts = max_attempts
        self.backend_id = f"llm:{client.config.model}"

    def render(self, req: GenerationRequest) -> str:
        text = self.registry.lookup(req.prompt_template_id)
        return fill(text, {"query": req.query_text, "n": req.n})

    def generate(self, req: GenerationRequest) -> Generated:
        prompt = self.render(req)
        provenance = {"backend": self.backend_id, "prompt_sha": prompt_hash(prompt)}
        last: MalformedGeneration | None = None
        for _ in range(self.max_attempts):
            raw = self.client.complete([{"role": "user", "content": prompt}])
            try:
                return parse_generation(req.task, raw, provenance)
            except MalformedGeneration as exc:
                last = exc
        assert last is not None
        raise last


@dataclass(frozen=True)
class JudgeRequest:
    question: str
    model_answer: str
    expected: Verdict

    def __post_init__(self):
        if not self.question.strip() or not self.model_answer.strip():
            raise ValueError("judge request needs a question and an answer")


class Judge(Protocol):
    def judge(self, req: JudgeRequest) -> Verdict:
        """Yes when the model answer agrees with the expected verdict."""
        ...


class LLMJudge:
    def __init__(self, client: ChatClient, registry: TemplateRegistry | None = None, max_attempts: int = 3):
        self.client = client
        self.registry = registry or default_registry()
        self.max_attempts = max_attempts
        self.calls = 0

    def judge(self, req: JudgeRequest) -> Verdict:
        prompt = fill(
            self.registry.judge,
            {"question": req.question, "answer": req.model_answer, "expected": req.expected.value},
        )
        self.calls += 1
        raw = ""
        for _ in range(self.max_attempts):
            raw = self.client.complete([{"role": "user", "content": prompt}])
            verdict = classify_yes_no(raw)
            if verdict is not INDIRECT:
                return verdict
        raise MalformedGeneration("judge reply is not Yes/No", raw)


_NEGATION = re.compile(
    r"\b(?:not|no|never|none|nothing|absent|missing|without|neither|nor)\b|n't\b", re.IGNORECASE
)
_BARE_TIMESTAMPS = re.compile(r"^\W*\d[\d:.]*\s*(?:s|sec|secs|seconds)?\s*(?:-|–|to)\s*\d[\d:.]*")


def answer_polarity(question: str, answer: str) -> Verdict | None:
    """Read an indirect answer as Yes/No relative to the question.

    An answer that restates the question keeps its negation parity (Yes); an
    extra or missing negation flips it (No). Bare timestamps answer nothing
    and give None.
    """
    direct = classify_yes_no(answer)
    if direct is not INDIRECT:
        return direct
    if _BARE_TIMESTAMPS.match(answer):
        return None
    q_neg = len(_NEGATION.findall(question))
    a_neg = len(_NEGATION.findall(answer))
    return Verdict.YES if q_neg % 2 == a_neg % 2 else Verdict.NO


def heuristic_judge(req: JudgeRequest) -> Verdict:
    said = answer_polarity(req.question, req.model_answer)
    return Verdict.YES if said is req.expected else Verdict.NO


class HeuristicJudge:
    """Offline judge built on :func:`heuristic_judge`; never touches the network."""

    def __init__(self):
        self.calls = 0

    def judge(self, req: JudgeRequest) -> Verdict:
        self.calls += 1
        return heuristic_judge(req)


__all__ = [
    "BackendUnavailable",
    "CompositionalSet",
    "CorrectionSet",
    "CorrectionTriple",
    "GenerationRequest",
    "GenerationTask",
    "HeuristicJudge",
    "Judge",
    "JudgeRequest",
    "LLMGenerator",
    "LLMJudge",
    "MalformedGeneration",
    "VariantGenerator",
    "VariantSet",
    "answer_polarity",
    "generate_variants",
    "heuristic_judge",
]
