"""Domain types, interval arithmetic and shifted-timeline remapping."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

# Tolerance used when comparing real-valued seconds.
EPS = 1e-9


class GroundProbeError(Exception):
    """Base class for all harness errors."""


class InvalidMoment(GroundProbeError, ValueError):
    pass


class DegenerateInterval(InvalidMoment):
    pass


class NegativeTime(InvalidMoment):
    pass


class OutOfRange(GroundProbeError, ValueError):
    pass


class MomentClamped(UserWarning):
    """Emitted when a moment end is clamped to the video duration."""


class Verdict(str, Enum):
    YES = "Yes"
    NO = "No"

    def flip(self) -> Verdict:
        return Verdict.NO if self is Verdict.YES else Verdict.YES


class QueryKind(str, Enum):
    ORIGINAL = "Original"
    ALIGNED = "Aligned"
    MISALIGNED = "Misaligned"
    COMPOSITIONAL_ALIGNED = "CompositionalAligned"
    COMPOSITIONAL_MISALIGNED = "CompositionalMisaligned"

    @property
    def is_compositional(self) -> bool:
        return self in (QueryKind.COMPOSITIONAL_ALIGNED, QueryKind.COMPOSITIONAL_MISALIGNED)

    @property
    def is_aligned(self) -> bool:
        return self in (QueryKind.ORIGINAL, QueryKind.ALIGNED, QueryKind.COMPOSITIONAL_ALIGNED)


class Rule(str, Enum):
    WORD_REPLACEMENT = "WR"
    ACTIVE_TO_PASSIVE = "AP"
    WORD_ORDER = "WO"


class Component(str, Enum):
    SUBJECT = "Subject"
    ACTION = "Action"
    RELATION = "Relation"


@dataclass(frozen=True)
class Moment:
    """Closed time interval ``[t_s, t_e]`` in seconds.

    Overlap arithmetic treats it as half-open so shared endpoints never
    count twice.
    """

    t_s: float
    t_e: float

    def __post_init__(self):
        for t in (self.t_s, self.t_e):
            if not isinstance(t, (int, float)) or isinstance(t, bool) or not math.isfinite(t):
                raise InvalidMoment(f"non-finite or non-numeric time: {t!r}")
        if self.t_s < 0:
            raise NegativeTime(f"start {self.t_s} < 0")
        if not self.t_s < self.t_e:
            raise DegenerateInterval(f"start {self.t_s} >= end {self.t_e}")

    @property
    def length(self) -> float:
        return self.t_e - self.t_s

    def to_list(self) -> list[float]:
        return [self.t_s, self.t_e]

    @classmethod
    def from_list(cls, raw: Sequence[float]) -> Moment:
        start, end = raw
        return cls(start, end)


def iou(a: Moment, b: Moment) -> float:
    """Temporal intersection over union; union is the total covered length."""
    inter = max(0.0, min(a.t_e, b.t_e) - max(a.t_s, b.t_s))
    union = a.length + b.length - inter
    return inter / union


def _validate(raw_start: float, raw_end: float, duration: float) -> tuple[Moment, bool]:
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration}")
    if raw_start < 0:
        raise NegativeTime(f"start {raw_start} < 0")
    clamped = raw_end > duration
    end = float(duration) if clamped else raw_end
    if raw_start >= end:
        raise DegenerateInterval(f"start {raw_start} >= end {end} (duration {duration})")
    return Moment(raw_start, end), clamped


def validate_moment(raw_start: float, raw_end: float, duration: float) -> Moment:
    """Build a Moment from raw model output, clamping the end to ``duration``.

    Raises NegativeTime for a negative start and DegenerateInterval when the
    interval is empty after clamping. Clamping emits a MomentClamped warning.
    """
    moment, clamped = _validate(raw_start, raw_end, duration)
    if clamped:
        warnings.warn(
            f"end {raw_end} clamped to video duration {duration}", MomentClamped, stacklevel=2
        )
    return moment


@dataclass(frozen=True)
class VideoMeta:
    video_id: str
    duration: float
    source_dataset: str = ""

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"video {self.video_id}: duration must be > 0")


@dataclass(frozen=True)
class QueryVariant:
    text: str
    kind: QueryKind
    rule: Rule | None = None
    component: Component | None = None
    # free-form origin info: generator backend, prompt hash, rule substitution, ...
    provenance: dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if (self.rule is not None) != (self.kind is QueryKind.ALIGNED):
            raise ValueError(f"rule must be set iff kind is Aligned: {self}")
        if (self.component is not None) != self.kind.is_compositional:
            raise ValueError(f"component must be set iff kind is compositional: {self}")

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"text": self.text, "kind": self.kind.value}
        if self.rule is not None:
            out["rule"] = self.rule.value
        if self.component is not None:
            out["component"] = self.component.value
        if self.provenance:
            out["provenance"] = self.provenance
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> QueryVariant:
        return cls(
            text=d["text"],
            kind=QueryKind(d["kind"]),
            rule=Rule(d["rule"]) if d.get("rule") else None,
            component=Component(d["component"]) if d.get("component") else None,
            provenance=d.get("provenance", {}),
        )


@dataclass(frozen=True)
class ShiftPlan:
    """Cut-and-reinsert edit of a video that relocates the ground-truth moment.

    ``segments`` are source intervals; played back in order they form the
    edited timeline.
    """

    duration: float
    original_gt: Moment
    shifted_gt: Moment
    segments: tuple[Moment, ...]
    achieved_iou: float
    # set when no offset satisfies the IoU cap and the minimum-IoU placement was used
    flagged: bool = False

    def __post_init__(self):
        total = sum(s.length for s in self.segments)
        if abs(total - self.duration) > 1e-6:
            raise ValueError(f"segments cover {total} s, expected {self.duration} s")
        ordered = sorted(self.segments, key=lambda s: s.t_s)
        for prev, nxt in zip(ordered, ordered[1:]):
            if nxt.t_s < prev.t_e - 1e-6:
                raise ValueError(f"overlapping segments {prev} and {nxt}")
        if abs(self.shifted_gt.length - self.original_gt.length) > 1e-6:
            raise ValueError("shifted moment must keep the original length")

    def to_dict(self) -> dict[str, Any]:
        return {
            "duration": self.duration,
            "original_gt": self.original_gt.to_list(),
            "shifted_gt": self.shifted_gt.to_list(),
            "segments": [s.to_list() for s in self.segments],
            "achieved_iou": self.achieved_iou,
            "flagged": self.flagged,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ShiftPlan:
        return cls(
            duration=d["duration"],
            original_gt=Moment.from_list(d["original_gt"]),
            shifted_gt=Moment.from_list(d["shifted_gt"]),
            segments=tuple(Moment.from_list(s) for s in d["segments"]),
            achieved_iou=d["achieved_iou"],
            flagged=d.get("flagged", False),
        )


def remap_instant(plan: ShiftPlan, t: float, closing: bool = False) -> float:
    """Position of original instant ``t`` on the edited timeline.

    At a cut, the instant belongs to the segment that starts there. Pass
    ``closing=True`` for interval ends so that an instant which ends a
    segment maps to the end of that segment instead.
    """
    if t < -EPS or t > plan.duration + EPS:
        raise OutOfRange(f"t={t} outside [0, {plan.duration}]")
    offset = 0.0
    for seg in plan.segments:
        if closing:
            inside = seg.t_s + EPS < t <= seg.t_e + EPS
        else:
            inside = seg.t_s - EPS <= t < seg.t_e - EPS
        if inside:
            return offset + (t - seg.t_s)
        offset += seg.length
    # t == duration on the opening side: end of the segment ending at duration
    for seg_offset, seg in _offsets(plan):
        if abs(seg.t_e - t) <= EPS:
            return seg_offset + seg.length
    raise OutOfRange(f"t={t} not covered by plan segments")


def _offsets(plan: ShiftPlan):
    offset = 0.0
    for seg in plan.segments:
        yield offset, seg
        offset += seg.length


def remap_moment(plan: ShiftPlan, m: Moment) -> Moment:
    """Map a moment that lies inside one segment onto the edited timeline."""
    return Moment(remap_instant(plan, m.t_s), remap_instant(plan, m.t_e, closing=True))


@dataclass(frozen=True)
class EvalItem:
    """One annotated query with its generated variants and shift plan."""

    item_id: str
    video: VideoMeta
    query: QueryVariant
    gt: Moment
    aligned: tuple[QueryVariant, ...]
    misaligned: tuple[QueryVariant, ...]
    compositional: tuple[QueryVariant, ...]
    shift: ShiftPlan

    def __post_init__(self):
        if self.query.kind is not QueryKind.ORIGINAL:
            raise ValueError("query must be the Original variant")
        if len(self.aligned) != 3 or len(self.misaligned) != 3:
            raise ValueError(f"{self.item_id}: need exactly 3 aligned and 3 misaligned variants")
        if any(v.kind is not QueryKind.ALIGNED for v in self.aligned):
            raise ValueError("aligned list holds a non-aligned variant")
        if any(v.kind is not QueryKind.MISALIGNED for v in self.misaligned):
            raise ValueError("misaligned list holds a non-misaligned variant")
        if not self.compositional or not all(v.kind.is_compositional for v in self.compositional):
            raise ValueError(f"{self.item_id}: compositional list must be non-empty")
        if self.gt.t_e > self.video.duration + EPS:
            raise ValueError(f"{self.item_id}: gt ends after the video")
        if self.gt.length > 0.7 * self.video.duration + EPS:
            raise ValueError(f"{self.item_id}: gt longer than 70% of the video")

    def variants(self) -> tuple[QueryVariant, ...]:
        return (self.query, *self.aligned, *self.misaligned, *self.compositional)

    def to_dict(self) -> dict[str, Any]:
        return {
            "item_id": self.item_id,
            "video_id": self.video.video_id,
            "duration": self.video.duration,
            "source_dataset": self.video.source_dataset,
            "query": self.query.to_dict(),
            "gt": self.gt.to_list(),
            "aligned": [v.to_dict() for v in self.aligned],
            "misaligned": [v.to_dict() for v in self.misaligned],
            "compositional": [v.to_dict() for v in self.compositional],
            "shift": self.shift.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> EvalItem:
        return cls(
            item_id=d["item_id"],
            video=VideoMeta(d["video_id"], d["duration"], d.get("source_dataset", "")),
            query=QueryVariant.from_dict(d["query"]),
            gt=Moment.from_list(d["gt"]),
            aligned=tuple(QueryVariant.from_dict(v) for v in d["aligned"]),
            misaligned=tuple(QueryVariant.from_dict(v) for v in d["misaligned"]),
            compositional=tuple(QueryVariant.from_dict(v) for v in d["compositional"]),
            shift=ShiftPlan.from_dict(d["shift"]),
        )
