from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from groundprobe.core import Moment, QueryKind, Rule, Verdict, VideoMeta
from groundprobe.evalset import (
    BuildConfig,
    DropReason,
    GenerationFailed,
    RawAnnotation,
    build_eval_item,
    build_eval_set,
    build_verification_questions,
    expected_verdict,
    filter_annotations,
    read_annotations,
    read_eval_set,
    sample_videos,
    write_annotations,
    write_eval_set,
)
from groundprobe.jsonio import SchemaMismatch
from groundprobe.llm.gateway import MalformedGeneration
from groundprobe.llm.stub import StubGenerator
from groundprobe.synthetic import synthetic_annotations
from groundprobe.templates import Polarity


def ann(query="person closes the door in the kitchen.", gt=(2, 10), duration=30.0, vid="v1"):
    return RawAnnotation(VideoMeta(vid, duration), query, Moment(*gt))


def test_filter_reasons():
    kept, dropped = filter_annotations(
        [
            ann(),
            ann(query="person sits."),
            ann(gt=(0, 3)),
            ann(gt=(0, 25)),
            ann(query="a man walks.", gt=(0, 2)),
        ]
    )
    assert len(kept) == 1
    assert [d.reasons for d in dropped] == [
        (DropReason.SHORT_QUERY,),
        (DropReason.SHORT_MOMENT,),
        (DropReason.OVERLONG_MOMENT,),
        (DropReason.SHORT_QUERY, DropReason.SHORT_MOMENT),
    ]


@pytest.mark.parametrize(
    "kind,polarity,expected",
    [
        (QueryKind.ALIGNED, Polarity.AFFIRMATIVE, Verdict.YES),
        (QueryKind.ALIGNED, Polarity.NEGATED, Verdict.NO),
        (QueryKind.MISALIGNED, Polarity.AFFIRMATIVE, Verdict.NO),
        (QueryKind.MISALIGNED, Polarity.NEGATED, Verdict.YES),
        (QueryKind.COMPOSITIONAL_ALIGNED, Polarity.AFFIRMATIVE, Verdict.YES),
        (QueryKind.COMPOSITIONAL_MISALIGNED, Polarity.AFFIRMATIVE, Verdict.NO),
    ],
)
def test_truth_table(kind, polarity, expected):
    assert expected_verdict(kind, polarity) is expected


def test_item_shape(items10):
    for it in items10:
        assert [v.provenance.get("substitutes", v.rule.value) for v in it.aligned] == ["WR", "AP", "WO"]
        assert len(it.misaligned) == 3
        assert it.compositional
        assert it.query.text not in {v.text for v in it.misaligned}
        assert it.shift.original_gt == it.gt


def test_questions(items10):
    it = items10[0]
    qs = build_verification_questions(it, seed=1)
    hol = [q for q in qs if not q.is_compositional]
    assert len(hol) == 6
    assert len(qs) == 6 + len(it.compositional)
    assert all("$m" in q.text for q in qs)
    bound = qs[0].bind(Moment(1, 4.5))
    assert "1.0 to 4.5 seconds" in bound.text and "$m" not in bound.text
    assert bound.moment_slot == Moment(1, 4.5)
    assert build_verification_questions(it, seed=1) == qs
    neg = build_verification_questions(it, seed=1, polarity=Polarity.NEGATED)
    assert {q.template_polarity for q in neg if not q.is_compositional} == {Polarity.NEGATED}


def test_eval_set_round_trip(items10, tmp_path):
    path = tmp_path / "set.jsonl"
    write_eval_set(path, items10, seed=3)
    assert read_eval_set(path) == items10
    other = tmp_path / "anns.jsonl"
    write_annotations(other, synthetic_annotations(3))
    with pytest.raises(SchemaMismatch):
        read_eval_set(other)


def test_annotation_round_trip(tmp_path):
    anns = synthetic_annotations(5, seed=2)
    p = tmp_path / "a.jsonl"
    write_annotations(p, anns)
    assert read_annotations(p) == anns


def test_build_is_deterministic():
    anns = synthetic_annotations(6, seed=9)
    a, _ = build_eval_set(anns, StubGenerator(9), 9, BuildConfig(max_workers=1))
    b, _ = build_eval_set(anns, StubGenerator(9), 9, BuildConfig(max_workers=4))
    assert a == b


class FlakyGen:
    """Fails the first ``fails`` calls, then defers to the stub."""

    def __init__(self, fails):
        self.fails = fails
        self.calls = 0
        self.inner = StubGenerator(0)
        self.backend_id = "flaky"

    def generate(self, req):
        self.calls += 1
        if self.calls <= self.fails:
            raise MalformedGeneration("bad reply", "{}")
        return self.inner.generate(req)


def test_retries_then_succeeds():
    gen = FlakyGen(2)
    item = build_eval_item(ann(), gen, 0, config=BuildConfig(max_retries=3))
    assert item.item_id == "v1#0"


def test_retries_exhausted():
    with pytest.raises(GenerationFailed):
        build_eval_item(ann(), FlakyGen(10), 0, config=BuildConfig(max_retries=3))
    _, failures = build_eval_set([ann()], FlakyGen(10), 0, BuildConfig(max_retries=2))
    assert len(failures) == 1 and failures[0].item_id == "v1#0"


def test_sample_videos():
    anns = synthetic_annotations(20, seed=1)
    picked = sample_videos(anns, 5, seed=4)
    assert len({a.video.video_id for a in picked}) == 5
    assert picked == sample_videos(anns, 5, seed=4)
    assert sample_videos(anns, None, 0) == anns


@given(st.integers(min_value=0, max_value=2**31))
def test_rule_tags_cover_all_three(seed):
    item = build_eval_item(ann(), StubGenerator(seed), seed)
    assert {Rule(v.provenance.get("substitutes", v.rule.value)) for v in item.aligned} == set(Rule)
