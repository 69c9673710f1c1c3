"""Turn free-text model answers into moments or yes/no verdicts.

Models print timestamps in many shapes (``20 - 25 seconds``,
``0020.0 - 0025.0``, ``00:00 and ends at 00:02``, ``at 0.0 seconds. It
lasts for 19.2 seconds``, frame indices on a 0-100 scale, ...). One regex
finds every time token; a pair is two consecutive tokens joined by a
connector, and the earliest pair in the text wins.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Union

from .core import InvalidMoment, Moment, Verdict, _validate


class TimeConvention(str, Enum):
    SECONDS = "seconds"
    MINUTES_SECONDS = "minutes_seconds"
    NORMALIZED_FRAMES_100 = "frames100"
    # seconds, plus "at X seconds. It lasts for Y seconds" answers
    START_PLUS_DURATION = "start_plus_duration"


@dataclass(frozen=True)
class ParseContext:
    duration: float
    time_convention: TimeConvention = TimeConvention.SECONDS
    model_tag: str = ""

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("duration must be > 0")


@dataclass(frozen=True)
class Invalid:
    reason: str


class Indirect(str, Enum):
    """Answer that needs a judge to decide; not a plain yes/no."""

    INDIRECT = "Indirect"


INDIRECT = Indirect.INDIRECT


@dataclass(frozen=True)
class ParseOutcome:
    result: Union[Moment, Verdict, Invalid]
    reason: str | None = None

    @property
    def ok(self) -> bool:
        return not isinstance(self.result, Invalid)

    @property
    def moment(self) -> Moment | None:
        return self.result if isinstance(self.result, Moment) else None

    @classmethod
    def invalid(cls, reason: str) -> ParseOutcome:
        return cls(Invalid(reason), reason)

    def to_dict(self) -> dict:
        r = self.result
        if isinstance(r, Moment):
            out = {"moment": r.to_list()}
        elif isinstance(r, Verdict):
            out = {"verdict": r.value}
        else:
            out = {"invalid": r.reason}
        if self.reason is not None:
            out["reason"] = self.reason
        return out

    @classmethod
    def from_dict(cls, d: dict) -> ParseOutcome:
        if "moment" in d:
            result = Moment.from_list(d["moment"])
        elif "verdict" in d:
            result = Verdict(d["verdict"])
        else:
            result = Invalid(d["invalid"])
        return cls(result, d.get("reason"))


NO_TIMESTAMP = "no timestamp"
SINGLE_TIMESTAMP = "single timestamp"
UNPAIRED = "unpaired timestamps"
DEGENERATE = "degenerate interval"

_NUM = r"\d+(?:\.\d+)?"
_CLOCK = r"\d{1,2}:\d{1,2}(?::\d{1,2})?(?:\.\d+)?"
_UNIT = r"(?:s|secs?|seconds?|frames?)"
# a unit may be glued to the number ("1.8s")
_TOKEN = re.compile(rf"(?<![\w.:])({_CLOCK}|{_NUM})(?:(?={_UNIT}\b)|(?![\w:]|\.\d))")
# text allowed between the two halves of a pair
_CONNECTOR = re.compile(
    rf"^\s*{_UNIT}?\s*[,.]?\s*"
    r"(?:-|–|—|~|to|and|until|till|through|thru)"
    r"(?:\s+(?:ends?|ending|finishes|finishing|stops?|lasting)(?:\s+(?:at|in|on))?)?"
    r"(?:\s+(?:the\s+)?(?:end\s+time\s+of))?"
    r"\s*(?:at\s*)?$",
    re.IGNORECASE,
)
_START_PLUS_DURATION = re.compile(
    rf"\bat\s+({_NUM})\s*{_UNIT}?\s*[.,;]?\s*(?:and\s+)?(?:it\s+)?lasts?\s+(?:for\s+)?({_NUM})",
    re.IGNORECASE,
)


def _token_seconds(token: str) -> tuple[float, bool]:
    """Return (value, is_clock). Clock tokens are already in seconds."""
    if ":" not in token:
        return float(token), False
    parts = token.split(":")
    value = 0.0
    for p in parts:
        value = value * 60 + float(p)
    # "0:65" is not valid mm:ss; minutes * 60 + 65 keeps the raw seconds
    return value, True


def _scale(value: float, is_clock: bool, ctx: ParseContext) -> float:
    if ctx.time_convention is TimeConvention.NORMALIZED_FRAMES_100 and not is_clock:
        return value / 100.0 * ctx.duration
    return value


def _candidates(text: str, ctx: ParseContext) -> tuple[list[tuple[int, float, float]], int]:
    tokens = list(_TOKEN.finditer(text))
    pairs = []
    for a, b in zip(tokens, tokens[1:]):
        if _CONNECTOR.match(text[a.end() : b.start()]):
            va, ca = _token_seconds(a.group(1))
            vb, cb = _token_seconds(b.group(1))
            pairs.append((a.start(), _scale(va, ca, ctx), _scale(vb, cb, ctx)))
    if ctx.time_convention in (TimeConvention.SECONDS, TimeConvention.START_PLUS_DURATION):
        for m in _START_PLUS_DURATION.finditer(text):
            start, length = float(m.group(1)), float(m.group(2))
            pairs.append((m.start(1), start, start + length))
    pairs.sort(key=lambda p: p[0])
    return pairs, len(tokens)


def extract_moment(text: str, ctx: ParseContext) -> ParseOutcome:
    """Parse the first start-end pair in ``text`` into a validated Moment.

    Ends past the video duration are clamped (recorded in ``reason``).
    Answers with no usable pair come back Invalid with the cause.
    """
    if not text or not text.strip():
        return ParseOutcome.invalid(NO_TIMESTAMP)
    pairs, n_tokens = _candidates(text, ctx)
    if not pairs:
        if n_tokens == 0:
            return ParseOutcome.invalid(NO_TIMESTAMP)
        if n_tokens == 1:
            return ParseOutcome.invalid(SINGLE_TIMESTAMP)
        return ParseOutcome.invalid(UNPAIRED)
    _, start, end = pairs[0]
    try:
        moment, clamped = _validate(start, end, ctx.duration)
    except InvalidMoment as exc:
        return ParseOutcome.invalid(f"{DEGENERATE}: {exc}")
    return ParseOutcome(moment, "clamped to duration" if clamped else None)


_YES_NO = re.compile(r"^[\W_]*(yes|no)\b", re.IGNORECASE)


def classify_yes_no(text: str) -> Verdict | Indirect:
    """Rule-based yes/no reading of a verification answer.

    Only a leading (or standalone) yes/no token counts; every other answer is
    Indirect and goes to the judge.
    """
    m = _YES_NO.match(text.strip())
    if not m:
        return INDIRECT
    return Verdict.YES if m.group(1).lower() == "yes" else Verdict.NO
