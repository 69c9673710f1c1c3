from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groundprobe.core import Moment
from groundprobe.metrics import (
    EmptyResultSet,
    ReportFormat,
    VerifyMode,
    emit_report,
    ground_score,
    read_reports,
    report,
    report_one,
    rule_breakdown,
)
from helpers import naive, to_records

def moments(allow_none=True):
    # half-second grid inside the video, never degenerate
    m = st.tuples(st.integers(0, 59), st.integers(1, 60)).filter(lambda p: p[0] < p[1])
    m = m.map(lambda p: Moment(p[0] / 2, p[1] / 2))
    return st.one_of(st.none(), m) if allow_none else m


item_strategy = st.fixed_dictionaries(
    {
        "gt": moments(False),
        "m": moments(),
        "aligned": st.lists(moments(), min_size=3, max_size=3),
        "shifted_gt": moments(False),
        "shifted": moments(),
        "hverify": st.lists(st.booleans(), min_size=6, max_size=6),
        "cverify": st.lists(st.booleans(), min_size=0, max_size=4),
    }
)


@settings(max_examples=150, deadline=None)
@given(
    st.lists(item_strategy, min_size=1, max_size=20),
    st.sampled_from([0.3, 0.5, 0.7]),
    st.sampled_from([None, 0.5]),
)
def test_matches_brute_force(items, thr, gate):
    r = report_one(to_records(items), thr, gate=gate)
    want = naive(items, thr, gate)
    for key, v in want.items():
        assert getattr(r, key) == pytest.approx(v, abs=1e-9), key


@settings(max_examples=100, deadline=None)
@given(st.lists(item_strategy, min_size=1, max_size=20))
def test_threshold_monotone(items):
    recs = to_records(items)
    lo, hi = report(recs, (0.5, 0.7))
    assert hi.ground <= lo.ground
    assert hi.rground_abs <= lo.rground_abs
    assert hi.sground_abs <= lo.sground_abs


@settings(max_examples=100, deadline=None)
@given(st.lists(item_strategy, min_size=1, max_size=20), st.integers(0, 2**16))
def test_permutation_invariant(items, seed):
    recs = to_records(items)
    shuffled = list(recs)
    random.Random(seed).shuffle(shuffled)
    assert report_one(recs) == report_one(shuffled)


@settings(max_examples=100, deadline=None)
@given(st.lists(item_strategy, min_size=1, max_size=20), st.sampled_from(list(VerifyMode)))
def test_abs_is_rel_times_ground(items, mode):
    r = report_one(to_records(items), 0.5, mode)
    for abs_score, rel in r.probes().values():
        if r.ground and rel:
            assert abs_score == pytest.approx(rel * r.ground / 100)


def fixed_items():
    return [
        {"gt": Moment(0, 10), "m": Moment(0, 10), "aligned": [Moment(0, 10)] * 3, "shifted_gt": Moment(20, 30),
         "shifted": Moment(20, 30), "hverify": [True] * 3 + [False] * 3, "cverify": [True, True]},
        {"gt": Moment(0, 10), "m": Moment(0, 6), "aligned": [Moment(0, 6)] * 3, "shifted_gt": Moment(20, 30),
         "shifted": Moment(20, 26), "hverify": [True] * 6, "cverify": []},
        {"gt": Moment(0, 10), "m": None, "aligned": [None] * 3, "shifted_gt": Moment(20, 30),
         "shifted": None, "hverify": [], "cverify": []},
    ]


def test_gate_splits_thresholds():
    recs = to_records(fixed_items())
    plain = report_one(recs, 0.7)
    gated = report_one(recs, 0.7, gate=0.5)
    assert plain.ground == pytest.approx(100 / 3) and plain.gate == 0.7
    assert gated.ground == pytest.approx(200 / 3) and gated.gate == 0.5
    # the second item passes the 0.5 gate but its shifted IoU is 0.6 < 0.7
    assert gated.sground_abs == pytest.approx(100 / 3)
    assert gated.sground_rel == pytest.approx(50.0)


def test_macro_and_micro():
    recs = to_records(fixed_items())
    macro = report_one(recs, 0.5, VerifyMode.MACRO)
    micro = report_one(recs, 0.5, VerifyMode.MICRO)
    assert macro.hverify_rel == pytest.approx(75.0)
    assert micro.hverify_rel == pytest.approx(75.0)
    assert macro.cverify_rel == pytest.approx(100.0)


def test_zero_ground_is_flagged():
    items = fixed_items()[2:]
    r = report_one(to_records(items))
    assert r.ground == 0 and r.rground_rel == 0 and r.flags


def test_empty():
    with pytest.raises(EmptyResultSet):
        report([], (0.5,))
    with pytest.raises(EmptyResultSet):
        ground_score([])


def test_rule_breakdown():
    out = rule_breakdown(to_records(fixed_items()))
    assert set(out) == {"WR", "AP", "WO"}
    assert out["WR"] == pytest.approx(100.0)


def test_emit_formats():
    reps = report(to_records(fixed_items()), (0.5, 0.7))
    assert read_reports(emit_report(reps, ReportFormat.RECORDS)) == reps
    cells = emit_report(reps, "cells").splitlines()
    assert cells[0].startswith("threshold | Ground")
    assert cells[1].startswith("0.5 | 66.7 | 66.7 (100.0)")
    md = emit_report(reps, "markdown")
    assert "### IoU >= 0.7" in md
    for name in ("WR (word replacement)", "AP (active to passive)", "WO (word order)"):
        assert name in md
    gated = emit_report(report(to_records(fixed_items()), (0.7,), gate=0.5), "markdown")
    assert "(Ground gate 0.5)" in gated
