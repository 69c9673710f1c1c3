"""Evaluation-set construction from raw grounding annotations.

Pipeline: filter annotations, generate aligned/misaligned/compositional
variants through a :class:`VariantGenerator`, attach a shift plan, and later
pair variants with verification templates.
"""

from __future__ import annotations

import logging
import random
import re
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

from .core import (
    EPS,
    Component,
    EvalItem,
    GroundProbeError,
    Moment,
    QueryKind,
    QueryVariant,
    Rule,
    Verdict,
    VideoMeta,
)
from .jsonio import header, read_records, write_records
from .llm.client import BackendUnavailable
from .llm.gateway import (
    CompositionalSet,
    GenerationRequest,
    GenerationTask,
    MalformedGeneration,
    VariantGenerator,
    VariantSet,
)
from .parsing import TimeConvention
from .rng import derive_seed
from .shift import ShiftConfig, plan_shift
from .templates import Polarity, TemplateRegistry, default_registry, fill, render_moment

log = logging.getLogger(__name__)

EVALSET_SCHEMA = "groundprobe.evalset"
EVALSET_VERSION = 1
# left in question text until the model's own prediction is known
MOMENT_SLOT = "$m"


@dataclass(frozen=True)
class RawAnnotation:
    video: VideoMeta
    query_text: str
    gt: Moment

    def __post_init__(self):
        if self.gt.t_e > self.video.duration + EPS:
            raise ValueError(f"{self.video.video_id}: gt {self.gt} ends after {self.video.duration} s")

    def to_record(self) -> dict[str, Any]:
        rec = {
            "video_id": self.video.video_id,
            "duration": self.video.duration,
            "query": self.query_text,
            "start": self.gt.t_s,
            "end": self.gt.t_e,
        }
        if self.video.source_dataset:
            rec["source_dataset"] = self.video.source_dataset
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> RawAnnotation:
        video = VideoMeta(str(rec["video_id"]), float(rec["duration"]), rec.get("source_dataset", ""))
        return cls(video, rec["query"], Moment(float(rec["start"]), float(rec["end"])))


class DropReason(str, Enum):
    SHORT_QUERY = "ShortQuery"
    SHORT_MOMENT = "ShortMoment"
    OVERLONG_MOMENT = "OverlongMoment"


@dataclass(frozen=True)
class Dropped:
    annotation: RawAnnotation
    reasons: tuple[DropReason, ...]


@dataclass(frozen=True)
class FilterConfig:
    min_words: int = 5
    min_seconds: float = 5.0
    max_fraction: float = 0.7


_TRAILING_PUNCT = re.compile(rf"[{re.escape(string.punctuation)}]+$")


def word_count(text: str) -> int:
    """Whitespace tokens after stripping terminal punctuation."""
    return len(_TRAILING_PUNCT.sub("", text.strip()).split())


def drop_reasons(ann: RawAnnotation, cfg: FilterConfig = FilterConfig()) -> tuple[DropReason, ...]:
    reasons = []
    if word_count(ann.query_text) < cfg.min_words:
        reasons.append(DropReason.SHORT_QUERY)
    if ann.gt.length < cfg.min_seconds - EPS:
        reasons.append(DropReason.SHORT_MOMENT)
    if ann.gt.length > cfg.max_fraction * ann.video.duration + EPS:
        reasons.append(DropReason.OVERLONG_MOMENT)
    return tuple(reasons)


def filter_annotations(
    raw: Iterable[RawAnnotation], cfg: FilterConfig = FilterConfig()
) -> tuple[list[RawAnnotation], list[Dropped]]:
    kept: list[RawAnnotation] = []
    dropped: list[Dropped] = []
    for ann in raw:
        reasons = drop_reasons(ann, cfg)
        if reasons:
            dropped.append(Dropped(ann, reasons))
        else:
            kept.append(ann)
    return kept, dropped


class GenerationFailed(GroundProbeError):
    def __init__(self, message: str, item_id: str = "", raw: str = ""):
        super().__init__(message)
        self.item_id = item_id
        self.raw = raw


@dataclass(frozen=True)
class BuildConfig:
    max_retries: int = 3
    shift: ShiftConfig = field(default_factory=ShiftConfig)
    # videos sampled per source set; None keeps all
    n_videos: int | None = None
    max_workers: int = 8
    dataset_id: str = ""


_RULE_ORDER = (Rule.WORD_REPLACEMENT, Rule.ACTIVE_TO_PASSIVE, Rule.WORD_ORDER)


def select_aligned(candidates: Sequence[QueryVariant]) -> tuple[QueryVariant, ...]:
    """One variant per rule in WR, AP, WO order; missing rules are padded with spare WR.

    A padded slot keeps the WR tag and names the rule it stands in for in
    ``provenance["substitutes"]``.
    """
    by_rule: dict[Rule, list[QueryVariant]] = {r: [] for r in _RULE_ORDER}
    seen: set[str] = set()
    for v in candidates:
        if v.kind is QueryKind.ALIGNED and v.text not in seen:
            seen.add(v.text)
            by_rule[v.rule].append(v)
    chosen: list[QueryVariant] = []
    missing: list[Rule] = []
    for rule in _RULE_ORDER:
        if by_rule[rule]:
            chosen.append(by_rule[rule].pop(0))
        else:
            missing.append(rule)
    spares = by_rule[Rule.WORD_REPLACEMENT]
    for rule in missing:
        if not spares:
            raise MalformedGeneration(f"not enough aligned variants to stand in for {rule.value}")
        v = spares.pop(0)
        chosen.append(replace(v, provenance={**v.provenance, "substitutes": rule.value}))
    # keep WR, AP, WO slot order stable for readers
    order = {r: i for i, r in enumerate(_RULE_ORDER)}
    chosen.sort(key=lambda v: order[Rule(v.provenance.get("substitutes", v.rule.value))])
    return tuple(chosen)


def select_misaligned(candidates: Sequence[QueryVariant], original: str) -> tuple[QueryVariant, ...]:
    seen = {original.strip()}
    out = []
    for v in candidates:
        if v.kind is QueryKind.MISALIGNED and v.text not in seen:
            seen.add(v.text)
            out.append(v)
    if len(out) < 3:
        raise MalformedGeneration(f"only {len(out)} distinct misaligned variants")
    return tuple(out[:3])


def check_compositional(cs: CompositionalSet) -> tuple[QueryVariant, ...]:
    """Every component that has questions needs at least one aligned and one misaligned."""
    kinds: dict[Component, set[QueryKind]] = {}
    for q in cs.questions:
        kinds.setdefault(q.component, set()).add(q.kind)
    if not kinds:
        raise MalformedGeneration("no compositional questions")
    for comp, ks in kinds.items():
        if len(ks) < 2:
            raise MalformedGeneration(f"component {comp.value} lacks an aligned or misaligned question")
    return cs.questions


def item_id_for(ann: RawAnnotation, index: int) -> str:
    return f"{ann.video.video_id}#{index}"


def _with_retries(gen: VariantGenerator, req: GenerationRequest, check, attempts: int, item_id: str):
    last: Exception | None = None
    for attempt in range(max(1, attempts)):
        try:
            return check(gen.generate(req))
        except (MalformedGeneration, BackendUnavailable) as exc:
            last = exc
            log.warning("%s: %s generation attempt %d failed: %s", item_id, req.task.value, attempt + 1, exc)
    raw = getattr(last, "raw", "")
    raise GenerationFailed(f"{item_id}: {req.task.value} failed after {attempts} attempts: {last}", item_id, raw)


def build_eval_item(
    ann: RawAnnotation,
    gen: VariantGenerator,
    seed: int,
    index: int = 0,
    config: BuildConfig = BuildConfig(),
) -> EvalItem:
    """Generate every variant for one annotation and attach its shift plan."""
    item_id = item_id_for(ann, index)
    query = QueryVariant(ann.query_text, QueryKind.ORIGINAL)

    def check_variants(vs):
        if not isinstance(vs, VariantSet):
            raise MalformedGeneration("expected a variant set")
        return select_aligned(vs.aligned), select_misaligned(vs.misaligned, ann.query_text)

    def check_comp(cs):
        if not isinstance(cs, CompositionalSet):
            raise MalformedGeneration("expected a compositional set")
        return check_compositional(cs)

    aligned, misaligned = _with_retries(
        gen, GenerationRequest(GenerationTask.ALIGNED_MISALIGNED, ann.query_text), check_variants, config.max_retries, item_id
    )
    compositional = _with_retries(
        gen, GenerationRequest(GenerationTask.COMPOSITIONAL, ann.query_text), check_comp, config.max_retries, item_id
    )
    sc = config.shift
    shift = plan_shift(
        ann.video.duration,
        ann.gt,
        seed=derive_seed(seed, item_id, "shift"),
        iou_cap=sc.iou_cap,
        mode=sc.mode,
        band=sc.band,
        grid_s=sc.grid_s,
    )
    return EvalItem(item_id, ann.video, query, ann.gt, aligned, misaligned, compositional, shift)


def sample_videos(anns: Sequence[RawAnnotation], n_videos: int | None, seed: int) -> list[RawAnnotation]:
    """Keep every annotation of ``n_videos`` videos drawn without replacement."""
    if n_videos is None:
        return list(anns)
    ids = sorted({a.video.video_id for a in anns})
    if n_videos >= len(ids):
        return list(anns)
    chosen = set(random.Random(derive_seed(seed, "videos")).sample(ids, n_videos))
    return [a for a in anns if a.video.video_id in chosen]


@dataclass(frozen=True)
class BuildFailure:
    item_id: str
    reason: str


def build_eval_set(
    anns: Sequence[RawAnnotation],
    gen: VariantGenerator,
    seed: int,
    config: BuildConfig = BuildConfig(),
) -> tuple[list[EvalItem], list[BuildFailure]]:
    """Build items in bounded parallel; output order and content depend only on the inputs."""
    pool = sample_videos(anns, config.n_videos, seed)

    def one(pair):
        index, ann = pair
        try:
            return build_eval_item(ann, gen, seed, index, config)
        except GenerationFailed as exc:
            return BuildFailure(exc.item_id, str(exc))

    with ThreadPoolExecutor(max_workers=max(1, config.max_workers)) as ex:
        results = list(ex.map(one, enumerate(pool)))
    items = [r for r in results if isinstance(r, EvalItem)]
    failures = [r for r in results if isinstance(r, BuildFailure)]
    return items, failures


# verification questions


def expected_verdict(kind: QueryKind, polarity: Polarity) -> Verdict:
    """Yes exactly for (aligned, affirmative) and (misaligned, negated)."""
    aligned = kind.is_aligned
    affirmative = polarity is Polarity.AFFIRMATIVE
    return Verdict.YES if aligned == affirmative else Verdict.NO


@dataclass(frozen=True)
class VerificationQuestion:
    """A yes/no probe whose moment slot is filled with the model's own prediction.

    ``text`` keeps the ``$m`` placeholder until :meth:`bind` is called.
    """

    text: str
    template_id: str
    template_polarity: Polarity
    query_kind: QueryKind
    expected: Verdict
    variant_text: str
    moment_slot: Moment | None = None

    def __post_init__(self):
        if self.expected is not expected_verdict(self.query_kind, self.template_polarity):
            raise ValueError(f"expected verdict contradicts the truth table: {self}")

    def bind(
        self, m: Moment, convention: TimeConvention = TimeConvention.SECONDS, duration: float | None = None
    ) -> VerificationQuestion:
        # plain replace: query text may itself contain "$"
        text = self.text.replace(MOMENT_SLOT, render_moment(m, convention, duration))
        return replace(self, text=text, moment_slot=m)

    @property
    def is_compositional(self) -> bool:
        return self.query_kind.is_compositional


def build_verification_questions(
    item: EvalItem,
    templates: TemplateRegistry | None = None,
    seed: int = 0,
    polarity: Polarity | None = None,
) -> list[VerificationQuestion]:
    """Six holistic questions (one sampled template each) plus the compositional ones.

    ``polarity`` restricts sampling to affirmative or negated templates.
    """
    reg = templates or default_registry()
    if len(reg.affirmative()) != 4 or len(reg.negated()) != 4:
        raise ValueError("holistic templates must hold 4 affirmative and 4 negated entries")
    pool = reg.holistic if polarity is None else tuple(t for t in reg.holistic if t.polarity is polarity)
    rng = random.Random(derive_seed(seed, item.item_id, "templates"))
    out: list[VerificationQuestion] = []
    for v in (*item.aligned, *item.misaligned):
        t = rng.choice(pool)
        text = fill(t.text, {"q": v.text, "m": MOMENT_SLOT})
        out.append(
            VerificationQuestion(
                text=text,
                template_id=t.template_id,
                template_polarity=t.polarity,
                query_kind=v.kind,
                expected=expected_verdict(v.kind, t.polarity),
                variant_text=v.text,
            )
        )
    for v in item.compositional:
        out.append(
            VerificationQuestion(
                text=fill(reg.compositional, {"question": v.text, "m": MOMENT_SLOT}),
                template_id="compositional",
                template_polarity=Polarity.AFFIRMATIVE,
                query_kind=v.kind,
                expected=expected_verdict(v.kind, Polarity.AFFIRMATIVE),
                variant_text=v.text,
            )
        )
    return out


# files


def read_annotations(path: str | Path) -> list[RawAnnotation]:
    _, recs = read_records(path)
    return [RawAnnotation.from_record(r) for r in recs]


def write_annotations(path: str | Path, anns: Iterable[RawAnnotation]) -> int:
    return write_records(path, None, (a.to_record() for a in anns))


def write_eval_set(path: str | Path, items: Iterable[EvalItem], **meta: Any) -> int:
    return write_records(path, header(EVALSET_SCHEMA, EVALSET_VERSION, **meta), (i.to_dict() for i in items))


def read_eval_set(path: str | Path) -> list[EvalItem]:
    _, recs = read_records(path, EVALSET_SCHEMA, EVALSET_VERSION)
    return [EvalItem.from_dict(r) for r in recs]
