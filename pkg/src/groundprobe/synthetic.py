"""Charades-like synthetic annotations for desk-scale experiments and tests.

Durations and moment lengths are drawn around 30.7 s and 8.1 s; sentences
use the stub lexicon so the offline generator can rewrite them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import Moment, VideoMeta
from .evalset import RawAnnotation

SUBJECTS = ("person", "a man", "a woman", "the girl", "a boy", "the lady", "a child", "the guy")

# verb -> objects it takes
TRANSITIVE = {
    "close": ("the door", "the laptop", "the window", "the cabinet", "the refrigerator"),
    "open": ("the door", "the laptop", "the window", "the cabinet", "the box"),
    "hold": ("a cup", "the phone", "a book", "a pillow", "a towel"),
    "put": ("the bag", "a book", "the cup", "the pillow", "the clothes"),
    "take": ("a towel", "the phone", "some food", "a glass", "the blanket"),
    "wash": ("the dishes", "a cup", "the window", "the floor", "the clothes"),
    "throw": ("a pillow", "the towel", "the bag", "some clothes", "the paper"),
    "eat": ("a sandwich", "some food"),
    "drink": ("some water", "a cup of coffee", "a glass of water"),
    "fold": ("the blanket", "a towel", "the clothes", "the paper"),
    "read": ("a book", "the paper"),
    "watch": ("the laptop", "the mirror", "a picture"),
    "fix": ("the light", "the chair", "the door"),
    "carry": ("the box", "a bag of groceries", "the chair", "a pillow"),
    "clean": ("the table", "the mirror", "the floor", "the shelf"),
}
INTRANSITIVE = ("laugh", "sneeze", "sit", "stand", "walk", "run", "smile", "dance")
LOCATIONS = (
    "in the kitchen",
    "in the bedroom",
    "in the bathroom",
    "in the hallway",
    "in the garage",
    "in the doorway",
    "on the stairs",
    "in the room",
)

_THIRD = {"watch": "watches", "wash": "washes", "fix": "fixes", "carry": "carries"}
_ING = {"close": "closing", "take": "taking", "put": "putting", "dance": "dancing", "smile": "smiling",
        "run": "running", "sit": "sitting", "drink": "drinking"}


def _third(v: str) -> str:
    return _THIRD.get(v, v + "s")


def _ing(v: str) -> str:
    if v in _ING:
        return _ING[v]
    return (v[:-1] if v.endswith("e") else v) + "ing"


def sentence(rng: random.Random) -> str:
    subj = rng.choice(SUBJECTS)
    loc = rng.choice(LOCATIONS)
    if rng.random() < 0.8:
        verb = rng.choice(sorted(TRANSITIVE))
        obj = rng.choice(TRANSITIVE[verb])
        text = f"{subj} {_third(verb)} {obj} {loc}."
    else:
        text = f"{subj} is {_ing(rng.choice(INTRANSITIVE))} {loc}."
    return text[0].upper() + text[1:] if subj != "person" else text


@dataclass(frozen=True)
class SyntheticConfig:
    mean_duration: float = 30.7
    sd_duration: float = 6.0
    mean_moment: float = 8.1
    sd_moment: float = 2.5
    min_duration: float = 12.0
    # keep drawn moments inside the evaluation filters
    min_moment: float = 5.0
    max_fraction: float = 0.7
    source_dataset: str = "synthetic-charades"


def draw_duration_moment(rng: random.Random, cfg: SyntheticConfig = SyntheticConfig()) -> tuple[float, Moment]:
    duration = round(max(cfg.min_duration, rng.gauss(cfg.mean_duration, cfg.sd_duration)), 1)
    length = min(max(cfg.min_moment, rng.gauss(cfg.mean_moment, cfg.sd_moment)), cfg.max_fraction * duration)
    length = max(cfg.min_moment, int(length * 10) / 10)
    start = round(rng.uniform(0.0, duration - length), 1)
    end = round(min(start + length, duration), 1)
    return duration, Moment(start, end)


def synthetic_annotations(n: int, seed: int = 0, cfg: SyntheticConfig = SyntheticConfig()) -> list[RawAnnotation]:
    """``n`` annotations on ``n`` distinct videos."""
    rng = random.Random(seed)
    out = []
    for i in range(n):
        duration, gt = draw_duration_moment(rng, cfg)
        video = VideoMeta(f"SYN{i:05d}", duration, cfg.source_dataset)
        out.append(RawAnnotation(video, sentence(rng), gt))
    return out
