"""Shift planning: relocate the ground-truth segment inside its video.

A plan cuts the gt segment out and reinserts it at a new offset, keeping the
frame order inside every segment. Offsets are enumerated on a 0.1 s grid.
"""

from __future__ import annotations

import random
import shlex
from dataclasses import dataclass
from enum import Enum

from .core import Moment, ShiftPlan, iou

GRID_S = 0.1
# places of decimals kept on plan endpoints; removes float noise from the grid
_ROUND = 6


class ShiftMode(str, Enum):
    # uniform over feasible offsets whose IoU is within `band` of the cap
    BAND = "band"
    # uniform over every feasible offset (IoU <= cap)
    UNIFORM = "uniform"


@dataclass(frozen=True)
class ShiftConfig:
    iou_cap: float = 0.2
    mode: ShiftMode = ShiftMode.BAND
    band: float = 0.05
    grid_s: float = GRID_S


def candidate_starts(duration: float, length: float, grid_s: float = GRID_S) -> list[float]:
    """Every grid offset where a segment of ``length`` fits, plus the last fitting one."""
    span = duration - length
    if span < -1e-9:
        return []
    n = int(span / grid_s + 1e-9)
    starts = [round(k * grid_s, _ROUND) for k in range(n + 1)]
    last = round(span, _ROUND)
    if last - starts[-1] > 1e-9:
        starts.append(last)
    return starts


def _merge(segments: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[tuple[float, float]] = []
    for s, e in segments:
        if e - s <= 1e-9:
            continue
        if out and abs(out[-1][1] - s) <= 1e-9:
            out[-1] = (out[-1][0], e)
        else:
            out.append((s, e))
    return out


def build_plan(duration: float, gt: Moment, new_start: float, flagged: bool = False) -> ShiftPlan:
    """Plan that moves ``gt`` so that it starts at ``new_start`` on the edited timeline."""
    length = gt.length
    if new_start < -1e-9 or new_start + length > duration + 1e-6:
        raise ValueError(f"start {new_start} does not fit a {length} s moment in {duration} s")
    # the rest of the video, in source coordinates; new_start indexes into it
    rest = _merge([(0.0, gt.t_s), (gt.t_e, duration)])
    before: list[tuple[float, float]] = []
    after: list[tuple[float, float]] = []
    pos = 0.0
    for s, e in rest:
        seg_len = e - s
        if pos + seg_len <= new_start + 1e-9:
            before.append((s, e))
        elif pos >= new_start - 1e-9:
            after.append((s, e))
        else:
            cut = s + (new_start - pos)
            before.append((s, cut))
            after.append((cut, e))
        pos += seg_len
    raw = _merge(before + [(gt.t_s, gt.t_e)] + after)
    segments = tuple(Moment(float(round(s, _ROUND)), float(round(e, _ROUND))) for s, e in raw)
    shifted = Moment(float(round(new_start, _ROUND)), float(round(new_start + length, _ROUND)))
    # keep the exact length of the original moment
    if abs(shifted.length - length) > 1e-9:
        shifted = Moment(shifted.t_s, shifted.t_s + length)
    return ShiftPlan(
        duration=duration,
        original_gt=gt,
        shifted_gt=shifted,
        segments=segments,
        achieved_iou=iou(gt, shifted),
        flagged=flagged,
    )


def plan_shift(
    duration: float,
    gt: Moment,
    seed: int,
    iou_cap: float = 0.2,
    mode: ShiftMode | str = ShiftMode.BAND,
    band: float = 0.05,
    grid_s: float = GRID_S,
) -> ShiftPlan:
    """Sample a shift plan whose achieved IoU stays at or below ``iou_cap``.

    ``BAND`` mode samples among feasible offsets with IoU in
    ``[iou_cap - band, iou_cap]`` (falling back to the highest feasible IoU),
    which keeps the mean achieved IoU near the cap. ``UNIFORM`` samples every
    feasible offset alike. With no feasible offset the minimum-IoU placement
    is returned with ``flagged=True``.
    """
    mode = ShiftMode(mode)
    if gt.t_e > duration + 1e-9:
        raise ValueError(f"gt {gt} ends after the video ({duration} s)")
    rng = random.Random(seed)
    scored = [(s, iou(gt, Moment(s, s + gt.length))) for s in candidate_starts(duration, gt.length, grid_s)]
    feasible = [(s, v) for s, v in scored if v <= iou_cap + 1e-12]
    if not feasible:
        if not scored:
            return build_plan(duration, gt, gt.t_s, flagged=True)
        best = min(v for _, v in scored)
        # several offsets can tie for the minimum (both ends of the video)
        ties = [s for s, v in scored if v <= best + 1e-12]
        return build_plan(duration, gt, rng.choice(ties), flagged=True)
    if mode is ShiftMode.UNIFORM:
        pool = [s for s, _ in feasible]
    else:
        pool = [s for s, v in feasible if v >= iou_cap - band - 1e-12]
        if not pool:
            top = max(v for _, v in feasible)
            pool = [s for s, v in feasible if v >= top - 1e-12]
    return build_plan(duration, gt, rng.choice(pool))


def frame_remap(plan: ShiftPlan, fps: float) -> list[int]:
    """Source frame index for every frame of the edited video, in playback order."""
    if fps <= 0:
        raise ValueError("fps must be positive")
    frames: list[int] = []
    for seg in plan.segments:
        frames.extend(range(round(seg.t_s * fps), round(seg.t_e * fps)))
    return frames


def ffmpeg_command(plan: ShiftPlan, src: str, dst: str, audio: bool = False) -> str:
    """Shell command that renders the plan with ffmpeg's trim/concat filters.

    Text only; the harness never runs it.
    """
    parts = []
    labels = []
    for i, seg in enumerate(plan.segments):
        parts.append(f"[0:v]trim=start={seg.t_s:g}:end={seg.t_e:g},setpts=PTS-STARTPTS[v{i}]")
        labels.append(f"[v{i}]")
        if audio:
            parts.append(f"[0:a]atrim=start={seg.t_s:g}:end={seg.t_e:g},asetpts=PTS-STARTPTS[a{i}]")
            labels.append(f"[a{i}]")
    n = len(plan.segments)
    outs = "[outv][outa]" if audio else "[outv]"
    parts.append(f"{''.join(labels)}concat=n={n}:v=1:a={1 if audio else 0}{outs}")
    cmd = ["ffmpeg", "-y", "-i", src, "-filter_complex", ";".join(parts), "-map", "[outv]"]
    if audio:
        cmd += ["-map", "[outa]"]
    cmd.append(dst)
    return " ".join(shlex.quote(c) for c in cmd)
