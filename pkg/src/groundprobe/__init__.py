"""Consistency probing for temporal grounding in video-language models."""

from .core import (
    DegenerateInterval,
    EvalItem,
    Moment,
    NegativeTime,
    OutOfRange,
    QueryKind,
    QueryVariant,
    Rule,
    ShiftPlan,
    Verdict,
    VideoMeta,
    iou,
    remap_instant,
    remap_moment,
    validate_moment,
)
from .parsing import ParseContext, ParseOutcome, TimeConvention, classify_yes_no, extract_moment

__version__ = "0.1.0"

from .evalset import BuildConfig, RawAnnotation, build_eval_set, read_eval_set, write_eval_set
from .metrics import ConsistencyReport, VerifyMode, report
from .mocks import MockAdapter, MockSpec, make_mock, serve_local
from .runner import ProbeKind, ProbeRunner, PromptStrategy, ResultSet, SuiteConfig, run_suite
from .shift import ShiftConfig, ShiftMode, plan_shift
from .vtune import VTuneConfig, generate_all
