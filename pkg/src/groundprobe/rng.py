"""Seed derivation so that parallel work never changes sampled values."""

from __future__ import annotations

import hashlib
import random
from typing import Any


def derive_seed(*parts: Any) -> int:
    """Stable 64-bit seed from any printable parts (suite seed, item id, probe, ...)."""
    digest = hashlib.sha256("\x1f".join(map(str, parts)).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def stream(*parts: Any) -> random.Random:
    return random.Random(derive_seed(*parts))
