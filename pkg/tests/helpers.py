"""Shared test oracles: the parser corpus and a naive metric recomputation."""

from __future__ import annotations

import csv
import math
import random
from importlib.resources import files

from groundprobe.core import Moment, Rule, Verdict
from groundprobe.parsing import INDIRECT, ParseContext, ParseOutcome, TimeConvention, classify_yes_no, extract_moment
from groundprobe.runner import ProbeKind, ProbeRecord

# filled by the acceptance suite, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def load_corpus() -> list[dict[str, str]]:
    text = files("groundprobe.assets").joinpath("parser_corpus_v1.tsv").read_text("utf-8")
    return list(csv.DictReader(text.splitlines(), delimiter="\t", quoting=csv.QUOTE_NONE))


def corpus_outcome(row: dict[str, str]) -> str:
    if row["kind"] == "ground":
        ctx = ParseContext(float(row["duration"]), TimeConvention(row["convention"]), row["model_tag"])
        out = extract_moment(row["answer"], ctx)
        if out.moment is not None:
            return f"moment:{out.moment.t_s:g},{out.moment.t_e:g}"
        return f"invalid:{out.result.reason}"
    v = classify_yes_no(row["answer"])
    return "indirect" if v is INDIRECT else f"verdict:{v.value}"


def random_moment(rng: random.Random, allow_none: bool = True) -> Moment | None:
    if allow_none and rng.random() < 0.15:
        return None
    a, b = sorted(rng.sample(range(61), 2))
    return Moment(a / 2, b / 2)


def random_items(rng: random.Random, n: int) -> list[dict]:
    """Per-item raw facts in the shape ``to_records`` and ``naive`` expect."""
    return [
        {
            "gt": random_moment(rng, False),
            "m": random_moment(rng),
            "aligned": [random_moment(rng) for _ in range(3)],
            "shifted_gt": random_moment(rng, False),
            "shifted": random_moment(rng),
            "hverify": [rng.random() < 0.5 for _ in range(6)],
            "cverify": [rng.random() < 0.5 for _ in range(rng.randint(0, 4))],
        }
        for _ in range(n)
    ]


def out(m):
    return ParseOutcome(m) if m is not None else ParseOutcome.invalid("no timestamps")


def to_records(items):
    recs = []
    for i, it in enumerate(items):
        iid = f"v{i}#0"
        recs.append(ProbeRecord(iid, ProbeKind.GROUND, "query", "p", "a", out(it["m"]), reference=it["gt"]))
        for j, (rule, m2) in enumerate(zip(Rule, it["aligned"])):
            recs.append(ProbeRecord(iid, ProbeKind.RGROUND, f"aligned[{j}]", "p", "a", out(m2), rule=rule))
        recs.append(ProbeRecord(iid, ProbeKind.SGROUND, "query", "p", "a", out(it["shifted"]), reference=it["shifted_gt"]))
        if it["m"] is None:
            continue
        for kind, answers in ((ProbeKind.HVERIFY, it["hverify"]), (ProbeKind.CVERIFY, it["cverify"])):
            for ok in answers:
                recs.append(
                    ProbeRecord(iid, kind, "q", "p", "a", ParseOutcome(Verdict.YES), expected=Verdict.YES, matched=ok)
                )
    return recs


def naive_iou(a, b):
    if a is None or b is None:
        return 0.0
    inter = max(0.0, min(a.t_e, b.t_e) - max(a.t_s, b.t_s))
    union = (a.t_e - a.t_s) + (b.t_e - b.t_s) - inter
    return inter / union if union > 0 else float(a == b)


def naive(items, thr, gate=None):
    """Direct restatement of the metric definitions, one loop per score."""
    g = thr if gate is None else gate
    n = len(items)
    ok = [it["m"] is not None and naive_iou(it["m"], it["gt"]) >= g for it in items]
    ground = 100 * sum(ok) / n
    r_hits = 0
    s_hits = 0
    for it, c in zip(items, ok):
        if not c:
            continue
        mean = sum(naive_iou(it["m"], m2) for m2 in it["aligned"]) / 3
        r_hits += mean >= thr
        s_hits += naive_iou(it["shifted"], it["shifted_gt"]) >= thr
    accs = [sum(it["hverify"]) / 6 for it, c in zip(items, ok) if c]
    # exact summation, so float results are comparable bit for bit
    hrel = 100 * (math.fsum(accs) / len(accs)) if accs else 0.0
    out = {
        "ground": ground,
        "rground_abs": 100 * r_hits / n,
        "sground_abs": 100 * s_hits / n,
        "hverify_rel": hrel,
    }
    out["rground_rel"] = out["rground_abs"] / ground * 100 if ground else 0.0
    out["sground_rel"] = out["sground_abs"] / ground * 100 if ground else 0.0
    return out


