"""Verification-tuning training data: grounding (G), event verification (E)
and temporal verification (T) records, with neutral and TimeChat-style export.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

from .core import GroundProbeError, Moment, QueryKind, iou
from .evalset import GenerationFailed, RawAnnotation
from .jsonio import SchemaMismatch, dumps, header, read_records
from .llm.client import BackendUnavailable
from .llm.gateway import CorrectionSet, GenerationRequest, GenerationTask, MalformedGeneration, VariantGenerator
from .rng import derive_seed
from .shift import plan_shift
from .templates import fill

log = logging.getLogger(__name__)

VTUNE_SCHEMA = "groundprobe.vtune"
VTUNE_VERSION = 1


class DegenerateVideo(GroundProbeError):
    """No moment with IoU below the limit exists for this annotation."""


class Category(str, Enum):
    G = "G"
    E = "E"
    T = "T"


def fmt_time(t: float) -> str:
    """Integers print bare ("5"), anything else with one decimal ("12.4")."""
    return str(int(round(t))) if abs(t - round(t)) < 1e-9 else f"{t:.1f}"


def fmt_span(m: Moment) -> str:
    """``0 - 5`` for whole seconds, else one decimal on both ends (``12.4 - 27.0``)."""
    if all(abs(t - round(t)) < 1e-9 for t in (m.t_s, m.t_e)):
        return f"{int(round(m.t_s))} - {int(round(m.t_e))}"
    return f"{m.t_s:.1f} - {m.t_e:.1f}"


@dataclass(frozen=True)
class VTuneConfig:
    n_aligned: int = 3
    n_misaligned: int = 3
    per_ann: int = 1
    # sampled wrong moments must stay below this IoU with gt
    max_iou: float = 0.5
    shift_cap: float = 0.2
    max_workers: int = 8
    max_retries: int = 3
    localize_template: str = (
        "Localize the visual content described by the given textual query $q in the video, "
        "and output the start and end timestamps in seconds."
    )
    grounding_answer: str = "The given query happens in $span seconds."
    verify_template: str = "Does the event $q happen from $m in the video?"
    yes_answer: str = "Yes, the event occurs from $s to $e seconds."
    no_answer: str = "No. $correction The correct moment is $span seconds."
    relocate_answer: str = "No. The given query happens in $span seconds."

    def __post_init__(self):
        if min(self.n_aligned, self.n_misaligned, self.per_ann) < 0:
            raise ValueError("counts must be >= 0")


@dataclass(frozen=True)
class VTuneMeta:
    source_query: str
    variant_kind: QueryKind
    moment_used: Moment
    correction: str | None = None

    def to_dict(self) -> dict[str, Any]:
        d = {
            "source_query": self.source_query,
            "variant_kind": self.variant_kind.value,
            "moment_used": self.moment_used.to_list(),
        }
        if self.correction is not None:
            d["correction"] = self.correction
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> VTuneMeta:
        return cls(d["source_query"], QueryKind(d["variant_kind"]), Moment.from_list(d["moment_used"]), d.get("correction"))


@dataclass(frozen=True)
class VTuneRecord:
    video_id: str
    category: Category
    prompt: str
    answer: str
    meta: VTuneMeta
    # gt of the source annotation; T records are checked against it
    gt: Moment | None = None

    def __post_init__(self):
        if self.category is Category.E and self.meta.variant_kind is QueryKind.MISALIGNED and not self.meta.correction:
            raise ValueError("misaligned E records need a correction")
        if self.category is Category.T:
            if self.gt is None or iou(self.gt, self.meta.moment_used) >= 0.5:
                raise ValueError("T records need a moment with IoU < 0.5 against gt")
            if fmt_span(self.gt) not in self.answer:
                raise ValueError("T answers must restate the gt timestamps")

    def to_dict(self) -> dict[str, Any]:
        d = {
            "video_id": self.video_id,
            "category": self.category.value,
            "prompt": self.prompt,
            "answer": self.answer,
            "meta": self.meta.to_dict(),
        }
        if self.gt is not None:
            d["gt"] = self.gt.to_list()
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> VTuneRecord:
        return cls(
            d["video_id"],
            Category(d["category"]),
            d["prompt"],
            d["answer"],
            VTuneMeta.from_dict(d["meta"]),
            Moment.from_list(d["gt"]) if "gt" in d else None,
        )


def _seconds(m: Moment) -> str:
    return f"{m.t_s:.1f} to {m.t_e:.1f} seconds"


def gen_grounding(anns: Iterable[RawAnnotation], config: VTuneConfig = VTuneConfig()) -> list[VTuneRecord]:
    out = []
    for a in anns:
        out.append(
            VTuneRecord(
                a.video.video_id,
                Category.G,
                fill(config.localize_template, {"q": a.query_text}),
                fill(config.grounding_answer, {"span": fmt_span(a.gt)}),
                VTuneMeta(a.query_text, QueryKind.ORIGINAL, a.gt),
            )
        )
    return out


def _corrections(ann: RawAnnotation, gen: VariantGenerator, config: VTuneConfig) -> CorrectionSet:
    n = max(config.n_aligned, config.n_misaligned)
    req = GenerationRequest(GenerationTask.VERIFICATION_WITH_CORRECTION, ann.query_text, n=n)
    last: Exception | None = None
    for _ in range(max(1, config.max_retries)):
        try:
            cs = gen.generate(req)
            if not isinstance(cs, CorrectionSet) or len(cs.items) < n:
                raise MalformedGeneration(f"expected {n} correction triples")
            return cs
        except (MalformedGeneration, BackendUnavailable) as exc:
            last = exc
    raise GenerationFailed(f"{ann.video.video_id}: correction generation failed: {last}", ann.video.video_id)


def event_records(ann: RawAnnotation, gen: VariantGenerator, config: VTuneConfig = VTuneConfig()) -> list[VTuneRecord]:
    cs = _corrections(ann, gen, config)
    gt = ann.gt
    out = []
    for t in cs.items[: config.n_aligned]:
        out.append(
            VTuneRecord(
                ann.video.video_id,
                Category.E,
                fill(config.verify_template, {"q": t.aligned, "m": _seconds(gt)}),
                fill(config.yes_answer, {"s": f"{gt.t_s:.1f}", "e": f"{gt.t_e:.1f}"}),
                VTuneMeta(ann.query_text, QueryKind.ALIGNED, gt),
            )
        )
    for t in cs.items[: config.n_misaligned]:
        out.append(
            VTuneRecord(
                ann.video.video_id,
                Category.E,
                fill(config.verify_template, {"q": t.misaligned, "m": _seconds(gt)}),
                fill(config.no_answer, {"correction": t.correction, "span": fmt_span(gt)}),
                VTuneMeta(ann.query_text, QueryKind.MISALIGNED, gt, t.correction),
            )
        )
    return out


def gen_event_verification(
    anns: Sequence[RawAnnotation], gen: VariantGenerator, config: VTuneConfig = VTuneConfig()
) -> list[VTuneRecord]:
    def one(ann):
        try:
            return event_records(ann, gen, config)
        except GenerationFailed as exc:
            log.warning("skipping annotation: %s", exc)
            return []

    with ThreadPoolExecutor(max_workers=max(1, config.max_workers)) as ex:
        return [r for recs in ex.map(one, anns) for r in recs]


def sample_wrong_moment(ann: RawAnnotation, seed: int, k: int = 0, config: VTuneConfig = VTuneConfig()) -> Moment:
    """A moment of the gt's length placed away from gt (same planner as the shift probe)."""
    plan = plan_shift(ann.video.duration, ann.gt, derive_seed(seed, ann.video.video_id, ann.query_text, k), config.shift_cap)
    if plan.achieved_iou >= config.max_iou:
        raise DegenerateVideo(
            f"{ann.video.video_id}: best placement still has IoU {plan.achieved_iou:.2f} with gt"
        )
    return plan.shifted_gt


def gen_temporal_verification(
    anns: Iterable[RawAnnotation], seed: int, config: VTuneConfig = VTuneConfig()
) -> list[VTuneRecord]:
    out = []
    for ann in anns:
        for k in range(config.per_ann):
            try:
                m = sample_wrong_moment(ann, seed, k, config)
            except DegenerateVideo as exc:
                log.info("no T record: %s", exc)
                break
            out.append(
                VTuneRecord(
                    ann.video.video_id,
                    Category.T,
                    fill(config.verify_template, {"q": ann.query_text, "m": _seconds(m)}),
                    fill(config.relocate_answer, {"span": fmt_span(ann.gt)}),
                    VTuneMeta(ann.query_text, QueryKind.ORIGINAL, m),
                    gt=ann.gt,
                )
            )
    return out


def generate_all(
    anns: Sequence[RawAnnotation], gen: VariantGenerator, seed: int, config: VTuneConfig = VTuneConfig()
) -> list[VTuneRecord]:
    return (
        gen_grounding(anns, config)
        + gen_event_verification(anns, gen, config)
        + gen_temporal_verification(anns, seed, config)
    )


@dataclass(frozen=True)
class DatasetStats:
    G: int = 0
    E: int = 0
    T: int = 0
    extra: dict[str, int] = field(default_factory=dict, compare=False)

    @property
    def total(self) -> int:
        return self.G + self.E + self.T

    @property
    def e_over_g(self) -> float:
        return self.E / self.G if self.G else 0.0


def stats(records: Iterable[VTuneRecord]) -> DatasetStats:
    counts = {c: 0 for c in Category}
    for r in records:
        counts[r.category] += 1
    return DatasetStats(counts[Category.G], counts[Category.E], counts[Category.T])


class ExportFormat(str, Enum):
    NEUTRAL = "neutral"
    TIMECHAT = "timechat"


def dumps_records(records: Iterable[VTuneRecord], fmt: ExportFormat | str = ExportFormat.NEUTRAL) -> str:
    fmt = ExportFormat(fmt)
    lines = [dumps(header(VTUNE_SCHEMA, VTUNE_VERSION, format=fmt.value))]
    for r in records:
        if fmt is ExportFormat.NEUTRAL:
            lines.append(dumps(r.to_dict()))
        else:
            qa = {"q": r.prompt, "a": r.answer}
            lines.append(dumps({"video": r.video_id, "category": r.category.value, "QA": [qa]}))
    return "\n".join(lines) + "\n"


def export(records: Iterable[VTuneRecord], path: str | Path, fmt: ExportFormat | str = ExportFormat.NEUTRAL) -> None:
    Path(path).write_text(dumps_records(records, fmt), encoding="utf-8")


def import_records(path: str | Path) -> list[VTuneRecord]:
    """Read a neutral export back."""
    head, recs = read_records(path, VTUNE_SCHEMA, VTUNE_VERSION)
    if head.get("format") != ExportFormat.NEUTRAL.value:
        raise SchemaMismatch(f"{path}: only the neutral format can be imported")
    return [VTuneRecord.from_dict(r) for r in recs]
