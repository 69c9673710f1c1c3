"""Prompt template registry and rendering."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from string import Template
from typing import Any, Mapping

import yaml

from .core import GroundProbeError, Moment
from .parsing import TimeConvention

TEMPLATE_ASSET = "templates_v1.yaml"


class MissingSlot(GroundProbeError, KeyError):
    pass


class UnknownTemplate(GroundProbeError, KeyError):
    pass


class Polarity(str, Enum):
    AFFIRMATIVE = "affirmative"
    NEGATED = "negated"


@dataclass(frozen=True)
class HolisticTemplate:
    template_id: str
    text: str
    polarity: Polarity


@dataclass(frozen=True)
class TemplateRegistry:
    version: int
    grounding: Mapping[str, str]
    holistic: tuple[HolisticTemplate, ...]
    compositional: str
    description: str
    cot: Mapping[str, str]
    generator: Mapping[str, str]
    judge: str

    def affirmative(self) -> tuple[HolisticTemplate, ...]:
        return tuple(t for t in self.holistic if t.polarity is Polarity.AFFIRMATIVE)

    def negated(self) -> tuple[HolisticTemplate, ...]:
        return tuple(t for t in self.holistic if t.polarity is Polarity.NEGATED)

    def lookup(self, template_id: str) -> str:
        """Find a template by id across every section.

        Accepts bare grounding ids (``"1"``, ``"timechat"``), holistic ids
        (``"holistic-5"``) and dotted section ids (``"cot.ground"``).
        """
        if template_id in self.grounding:
            return self.grounding[template_id]
        for t in self.holistic:
            if t.template_id == template_id:
                return t.text
        section, _, key = template_id.partition(".")
        if section in ("cot", "generator") and key in getattr(self, section):
            return getattr(self, section)[key]
        if template_id in ("compositional", "description", "judge"):
            return getattr(self, template_id)
        raise UnknownTemplate(template_id)

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> TemplateRegistry:
        return cls(
            version=int(raw["version"]),
            grounding={str(k): v for k, v in raw["grounding"].items()},
            holistic=tuple(
                HolisticTemplate(h["id"], h["text"], Polarity(h["polarity"])) for h in raw["holistic"]
            ),
            compositional=raw["compositional"],
            description=raw["description"],
            cot=dict(raw["cot"]),
            generator=dict(raw["generator"]),
            judge=raw["judge"],
        )


@lru_cache(maxsize=None)
def default_registry() -> TemplateRegistry:
    text = resources.files("groundprobe.assets").joinpath(TEMPLATE_ASSET).read_text("utf-8")
    return TemplateRegistry.from_dict(yaml.safe_load(text))


def fmt_seconds(t: float) -> str:
    return f"{t:.1f}"


def render_moment(
    m: Moment, convention: TimeConvention = TimeConvention.SECONDS, duration: float | None = None
) -> str:
    """Render a moment the way verification prompts embed it.

    Seconds use one decimal (``0.0 to 36.0 seconds``); the 0-100 frame
    convention needs ``duration`` and yields ``17 to 71 frames``.
    """
    if convention is TimeConvention.NORMALIZED_FRAMES_100:
        if duration is None:
            raise ValueError("frame rendering needs the video duration")
        return f"{round(m.t_s / duration * 100)} to {round(m.t_e / duration * 100)} frames"
    return f"{fmt_seconds(m.t_s)} to {fmt_seconds(m.t_e)} seconds"


def quote_query(text: str) -> str:
    return f"'{text}'"


def render_prompt(
    template_id: str,
    slots: Mapping[str, Any],
    registry: TemplateRegistry | None = None,
    convention: TimeConvention = TimeConvention.SECONDS,
    duration: float | None = None,
) -> str:
    """Substitute slots into a registered template.

    ``q`` is wrapped in single quotes, a Moment in ``m`` is rendered per
    ``convention``; any other slot is inserted as given.
    """
    registry = registry or default_registry()
    text = registry.lookup(template_id)
    return fill(text, slots, convention, duration)


def fill(
    text: str,
    slots: Mapping[str, Any],
    convention: TimeConvention = TimeConvention.SECONDS,
    duration: float | None = None,
) -> str:
    values = {k: v for k, v in slots.items() if v is not None}
    if "q" in values:
        values["q"] = quote_query(values["q"])
    if isinstance(values.get("m"), Moment):
        values["m"] = render_moment(values["m"], convention, duration)
    try:
        return Template(text).substitute(values)
    except KeyError as exc:
        raise MissingSlot(exc.args[0]) from None
