"""Consistency scores over a collected ResultSet.

Ground correctness gates every probe at scoring time, so one result set
yields a report for any IoU threshold. Absolute scores count over all items;
relative scores are normalized by the correctly grounded ones.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from statistics import fmean
from typing import Any, Iterable, Sequence

from .core import GroundProbeError, Moment, Rule, iou
from .runner import ProbeKind, ProbeRecord, ResultSet


class EmptyResultSet(GroundProbeError):
    pass


class VerifyMode(str, Enum):
    # mean of per-item accuracies
    MACRO = "macro"
    # pooled over all questions of correctly grounded items
    MICRO = "micro"


@dataclass
class _Item:
    item_id: str
    m: Moment | None = None
    gt: Moment | None = None
    shifted: Moment | None = None
    shifted_gt: Moment | None = None
    aligned: list[tuple[Rule | None, Moment | None]] = field(default_factory=list)
    hverify: list[bool] = field(default_factory=list)
    cverify: list[bool] = field(default_factory=list)

    def correct(self, thr: float) -> bool:
        return self.m is not None and self.gt is not None and iou(self.m, self.gt) >= thr


def _collect(records: Iterable[ProbeRecord]) -> dict[str, _Item]:
    items: dict[str, _Item] = {}
    for r in records:
        it = items.setdefault(r.item_id, _Item(r.item_id))
        if r.probe is ProbeKind.GROUND:
            it.m, it.gt = r.moment, r.reference
        elif r.probe is ProbeKind.RGROUND:
            it.aligned.append((r.rule, r.moment))
        elif r.probe is ProbeKind.SGROUND:
            it.shifted, it.shifted_gt = r.moment, r.reference
        elif r.probe is ProbeKind.HVERIFY:
            it.hverify.append(bool(r.matched))
        elif r.probe is ProbeKind.CVERIFY:
            it.cverify.append(bool(r.matched))
    # items without a Ground record were never probed properly
    return {k: v for k, v in items.items() if v.gt is not None}


def _records(rs: ResultSet | Sequence[ProbeRecord]) -> Sequence[ProbeRecord]:
    return rs.records if isinstance(rs, ResultSet) else rs


def _items(rs) -> list[_Item]:
    items = list(_collect(_records(rs)).values())
    if not items:
        raise EmptyResultSet("result set holds no Ground records")
    return items


def _rel(abs_score: float, ground: float) -> float:
    return 0.0 if ground == 0 else abs_score / ground * 100.0


def ground_score(rs, thr: float = 0.5) -> float:
    items = _items(rs)
    return 100.0 * sum(it.correct(thr) for it in items) / len(items)


def _iou_or_zero(a: Moment | None, b: Moment | None) -> float:
    return iou(a, b) if a is not None and b is not None else 0.0


def rground_mean_iou(it: _Item) -> float:
    """Mean IoU between the model's own prediction and its predictions for the aligned variants."""
    if not it.aligned:
        return 0.0
    return fmean(_iou_or_zero(it.m, m2) for _, m2 in it.aligned)


def _gate(thr: float, gate: float | None) -> float:
    return thr if gate is None else gate


def rground_scores(rs, thr: float = 0.5, gate: float | None = None) -> tuple[float, float]:
    """``gate`` sets the Ground correctness threshold separately from the probe threshold."""
    items, g = _items(rs), _gate(thr, gate)
    ground = 100.0 * sum(it.correct(g) for it in items) / len(items)
    consistent = sum(it.correct(g) and rground_mean_iou(it) >= thr for it in items)
    abs_score = 100.0 * consistent / len(items)
    return abs_score, _rel(abs_score, ground)


def sground_scores(rs, thr: float = 0.5, gate: float | None = None) -> tuple[float, float]:
    items, g = _items(rs), _gate(thr, gate)
    ground = 100.0 * sum(it.correct(g) for it in items) / len(items)
    consistent = sum(it.correct(g) and _iou_or_zero(it.shifted, it.shifted_gt) >= thr for it in items)
    abs_score = 100.0 * consistent / len(items)
    return abs_score, _rel(abs_score, ground)


def verify_scores(
    rs,
    kind: ProbeKind = ProbeKind.HVERIFY,
    thr: float = 0.5,
    mode: VerifyMode | str = VerifyMode.MACRO,
    gate: float | None = None,
) -> tuple[float, float]:
    """(abs, rel) verification accuracy over correctly grounded items."""
    if not kind.is_verification:
        raise ValueError(f"{kind} is not a verification probe")
    mode = VerifyMode(mode)
    items, g = _items(rs), _gate(thr, gate)
    ground = 100.0 * sum(it.correct(g) for it in items) / len(items)
    answers = [it.hverify if kind is ProbeKind.HVERIFY else it.cverify for it in items if it.correct(g)]
    answers = [a for a in answers if a]
    if not answers:
        return 0.0, 0.0
    if mode is VerifyMode.MACRO:
        rel = 100.0 * fmean(sum(a) / len(a) for a in answers)
    else:
        rel = 100.0 * sum(sum(a) for a in answers) / sum(len(a) for a in answers)
    return rel * ground / 100.0, rel


@dataclass(frozen=True)
class SelfAgreement:
    mean_iou: float
    n_pairs: int
    n_excluded: int


def self_agreement(rs) -> SelfAgreement:
    """Mean IoU between predictions on the original and the shifted video."""
    items = _items(rs)
    pairs = [iou(it.m, it.shifted) for it in items if it.m is not None and it.shifted is not None]
    mean = fmean(pairs) if pairs else 0.0
    return SelfAgreement(mean, len(pairs), len(items) - len(pairs))


def rule_breakdown(rs) -> dict[str, float]:
    """Mean IoU(m, m~) x 100 per rewrite rule, over items with a valid prediction."""
    groups: dict[Rule, list[float]] = {}
    for it in _items(rs):
        if it.m is None:
            continue
        for rule, m2 in it.aligned:
            if rule is not None:
                groups.setdefault(rule, []).append(_iou_or_zero(it.m, m2))
    return {r.value: 100.0 * fmean(groups[r]) for r in Rule if r in groups}


@dataclass(frozen=True)
class ConsistencyReport:
    threshold: float
    n_items: int
    n_correct: int
    ground: float
    rground_abs: float
    rground_rel: float
    sground_abs: float
    sground_rel: float
    hverify_abs: float
    hverify_rel: float
    cverify_abs: float
    cverify_rel: float
    self_agreement_iou: float
    self_agreement_pairs: int
    self_agreement_excluded: int
    rule_miou: dict[str, float]
    verify_mode: str = VerifyMode.MACRO.value
    dataset_id: str = ""
    adapter_id: str = ""
    flags: tuple[str, ...] = ()
    # Ground correctness threshold; equals ``threshold`` unless set apart
    gate: float | None = None

    def probes(self) -> dict[str, tuple[float, float]]:
        return {
            "R-Ground": (self.rground_abs, self.rground_rel),
            "S-Ground": (self.sground_abs, self.sground_rel),
            "H-Verify": (self.hverify_abs, self.hverify_rel),
            "C-Verify": (self.cverify_abs, self.cverify_rel),
        }

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["flags"] = list(self.flags)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ConsistencyReport:
        d = dict(d)
        d["flags"] = tuple(d.get("flags", ()))
        return cls(**d)


def report_one(
    rs, thr: float = 0.5, mode: VerifyMode | str = VerifyMode.MACRO, gate: float | None = None
) -> ConsistencyReport:
    """Scores at probe threshold ``thr``; Ground correctness uses ``gate`` (default ``thr``)."""
    items = _items(rs)
    n_correct = sum(it.correct(_gate(thr, gate)) for it in items)
    flags = []
    if n_correct == 0:
        flags.append("no correctly grounded items; relative scores set to 0")
    ra, rr = rground_scores(rs, thr, gate)
    sa, sr = sground_scores(rs, thr, gate)
    ha, hr = verify_scores(rs, ProbeKind.HVERIFY, thr, mode, gate)
    ca, cr = verify_scores(rs, ProbeKind.CVERIFY, thr, mode, gate)
    sa_ = self_agreement(rs)
    return ConsistencyReport(
        threshold=thr,
        n_items=len(items),
        n_correct=n_correct,
        ground=100.0 * n_correct / len(items),
        rground_abs=ra,
        rground_rel=rr,
        sground_abs=sa,
        sground_rel=sr,
        hverify_abs=ha,
        hverify_rel=hr,
        cverify_abs=ca,
        cverify_rel=cr,
        self_agreement_iou=sa_.mean_iou,
        self_agreement_pairs=sa_.n_pairs,
        self_agreement_excluded=sa_.n_excluded,
        rule_miou=rule_breakdown(rs),
        verify_mode=VerifyMode(mode).value,
        dataset_id=rs.dataset_id if isinstance(rs, ResultSet) else "",
        adapter_id=rs.adapter_id if isinstance(rs, ResultSet) else "",
        flags=tuple(flags),
        gate=_gate(thr, gate),
    )


def report(
    rs,
    thresholds: Sequence[float] = (0.5,),
    mode: VerifyMode | str = VerifyMode.MACRO,
    gate: float | None = None,
) -> list[ConsistencyReport]:
    """One report per threshold, all from the same records."""
    if not _collect(_records(rs)):
        raise EmptyResultSet("result set holds no Ground records")
    return [report_one(rs, t, mode, gate) for t in thresholds]


# emission


class ReportFormat(str, Enum):
    RECORDS = "records"
    CELLS = "cells"
    MARKDOWN = "markdown"


CELL_COLUMNS = ("Ground", "R-Ground", "S-Ground", "H-Verify", "C-Verify")


def cell(abs_score: float, rel: float) -> str:
    return f"{abs_score:.1f} ({rel:.1f})"


def cells(r: ConsistencyReport) -> str:
    """Ground, then "abs (rel)" per probe, joined like a table row."""
    return " | ".join([f"{r.ground:.1f}"] + [cell(a, b) for a, b in r.probes().values()])


def markdown(reports: Sequence[ConsistencyReport]) -> str:
    lines = []
    for r in reports:
        title = f"IoU >= {r.threshold:g}"
        if r.gate is not None and r.gate != r.threshold:
            title += f" (Ground gate {r.gate:g})"
        if r.adapter_id:
            title += f", {r.adapter_id}"
        if r.dataset_id:
            title += f", {r.dataset_id}"
        lines += [f"### {title}", ""]
        lines += ["| " + " | ".join(CELL_COLUMNS) + " |", "|" + "---|" * len(CELL_COLUMNS)]
        lines += ["| " + cells(r) + " |", ""]
        lines += [
            f"Items: {r.n_items}, correctly grounded: {r.n_correct}. "
            f"Self-agreement IoU: {r.self_agreement_iou:.3f} over {r.self_agreement_pairs} pairs "
            f"({r.self_agreement_excluded} excluded). Verification aggregation: {r.verify_mode}.",
            "",
        ]
        lines += ["| Rule | mIoU |", "|---|---|"]
        names = {"WR": "WR (word replacement)", "AP": "AP (active to passive)", "WO": "WO (word order)"}
        for rule in ("WR", "AP", "WO"):
            v = r.rule_miou.get(rule)
            lines.append(f"| {names[rule]} | {'n/a' if v is None else f'{v:.1f}'} |")
        for f in r.flags:
            lines.append(f"\n> {f}")
        lines.append("")
    return "\n".join(lines)


def emit_report(reports: Sequence[ConsistencyReport], fmt: ReportFormat | str = ReportFormat.RECORDS) -> str:
    fmt = ReportFormat(fmt)
    if fmt is ReportFormat.RECORDS:
        return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in reports)
    if fmt is ReportFormat.CELLS:
        head = "threshold | " + " | ".join(CELL_COLUMNS)
        return "\n".join([head] + [f"{r.threshold:g} | {cells(r)}" for r in reports]) + "\n"
    return markdown(reports)


def read_reports(text: str) -> list[ConsistencyReport]:
    return [ConsistencyReport.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]
