"""Generator and judge backends: live chat-completion clients and the offline stub."""

from .client import BackendRejected, BackendUnavailable, ChatClient, LLMConfig
from .gateway import (
    CompositionalSet,
    CorrectionSet,
    CorrectionTriple,
    GenerationRequest,
    GenerationTask,
    HeuristicJudge,
    Judge,
    JudgeRequest,
    LLMGenerator,
    LLMJudge,
    MalformedGeneration,
    VariantGenerator,
    VariantSet,
    answer_polarity,
    generate_variants,
    heuristic_judge,
)
from .stub import StubGenerator

__all__ = [
    "BackendRejected",
    "BackendUnavailable",
    "ChatClient",
    "CompositionalSet",
    "CorrectionSet",
    "CorrectionTriple",
    "GenerationRequest",
    "GenerationTask",
    "HeuristicJudge",
    "Judge",
    "JudgeRequest",
    "LLMConfig",
    "LLMGenerator",
    "LLMJudge",
    "MalformedGeneration",
    "StubGenerator",
    "VariantGenerator",
    "VariantSet",
    "answer_polarity",
    "generate_variants",
    "heuristic_judge",
]
