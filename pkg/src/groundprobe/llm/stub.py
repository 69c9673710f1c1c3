"""Deterministic offline variant generator.

Lexicon driven: synonyms for word replacement, a naive subject-verb-object
inverter for the passive voice, phrase rotation for word order, and
substitution tables for misaligned sentences. Output depends only on
(seed, request).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any, Iterator

from ..core import Component, QueryKind, QueryVariant, Rule
from ..rng import derive_seed
from .gateway import (
    CompositionalSet,
    CorrectionSet,
    CorrectionTriple,
    Generated,
    GenerationRequest,
    GenerationTask,
    MalformedGeneration,
    VariantSet,
    correction_sentence,
    prompt_hash,
)

LEXICON_ASSET = "stub_lexicon_v1.json"
_TERMINAL = ".!?"


@lru_cache(maxsize=None)
def load_lexicon() -> dict[str, Any]:
    text = resources.files("groundprobe.assets").joinpath(LEXICON_ASSET).read_text("utf-8")
    return json.loads(text)


class _Lex:
    def __init__(self, raw: dict[str, Any]):
        self.raw = raw
        self.verbs = raw["verbs"]
        self.nouns = raw["nouns"]
        self.locations = raw["locations"]
        self.pronouns = raw["pronouns"]
        self.aux = set(raw["auxiliaries"])
        self.adverbs = set(raw["adverbs"])
        self.determiners = set(raw["determiners"])
        self.preps = set(raw["prepositions"])
        # surface form -> (base, form index); form index 0 base, 1 3sg, 2 ing, 3 pp
        self.verb_forms: dict[str, tuple[str, int]] = {}
        for base, entry in self.verbs.items():
            for i, form in enumerate(entry["forms"]):
                # keep the first reading for ambiguous forms ("put" is base and pp)
                self.verb_forms.setdefault(form, (base, i))

    def form(self, base: str, index: int) -> str:
        return self.verbs[base]["forms"][index]


@lru_cache(maxsize=None)
def _lex() -> _Lex:
    return _Lex(load_lexicon())


@dataclass
class _Sentence:
    words: list[str]
    terminal: str

    @classmethod
    def parse(cls, text: str) -> _Sentence:
        text = text.strip()
        terminal = ""
        while text and text[-1] in _TERMINAL:
            terminal = text[-1] + terminal
            text = text[:-1]
        return cls(text.split(), terminal or ".")

    def render(self, words: list[str] | None = None) -> str:
        words = self.words if words is None else words
        out = " ".join(words)
        return out[:1].upper() + out[1:] + self.terminal if self.capitalized else out + self.terminal

    @property
    def capitalized(self) -> bool:
        return bool(self.words) and self.words[0][:1].isupper()


def _bare(word: str) -> str:
    return word.strip(",;:").lower()


def _match_case(template: str, word: str) -> str:
    return word[:1].upper() + word[1:] if template[:1].isupper() else word


@dataclass
class _Analysis:
    sentence: _Sentence
    subject_end: int  # words[:subject_end] is the subject noun phrase
    verb_index: int | None
    verb_base: str | None
    verb_form: int | None

    @property
    def words(self) -> list[str]:
        return self.sentence.words

    @property
    def subject(self) -> str:
        return " ".join(self.words[: self.subject_end])

    @property
    def subject_head(self) -> str:
        return _bare(self.words[self.subject_end - 1])


def _analyse(text: str) -> _Analysis:
    lex = _lex()
    sent = _Sentence.parse(text)
    words = sent.words
    if not words:
        raise MalformedGeneration("empty query")
    subject_end = 0
    for i, w in enumerate(words[:5]):
        b = _bare(w)
        if i > 0 and (b in lex.aux or b in lex.verb_forms or b in lex.adverbs or b in lex.locations):
            subject_end = i
            break
    if subject_end == 0:
        subject_end = min(2, len(words)) if _bare(words[0]) in lex.determiners else 1
    verb_index = verb_base = verb_form = None
    for i in range(subject_end, len(words)):
        b = _bare(words[i])
        if b in lex.verb_forms:
            verb_index = i
            verb_base, verb_form = lex.verb_forms[b]
            break
        if b.endswith("ing") and len(b) > 4:
            verb_index, verb_form = i, 2
            break
    return _Analysis(sent, subject_end, verb_index, verb_base, verb_form)


class StubGenerator:
    """Offline :class:`VariantGenerator` for CI and desk-scale runs."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.backend_id = "stub"
        self.lex = _lex()

    def generate(self, req: GenerationRequest) -> Generated:
        prov = {"backend": self.backend_id, "prompt_sha": prompt_hash(f"{req.task.value}|{req.query_text}")}
        if req.task is GenerationTask.ALIGNED_MISALIGNED:
            return self._aligned_misaligned(req.query_text, prov)
        if req.task is GenerationTask.COMPOSITIONAL:
            return self._compositional(req.query_text, prov)
        return self._corrections(req.query_text, req.n, prov)

    def _rng(self, *parts: Any) -> random.Random:
        return random.Random(derive_seed(self.seed, *parts))

    # aligned variants

    def word_replacements(self, text: str) -> list[str]:
        """Synonym substitutions in priority order: verb, nouns, verb+noun."""
        a = _analyse(text)
        words = a.words
        lex = self.lex
        edits: list[tuple[int, str]] = []
        if a.verb_base and lex.verbs[a.verb_base]["syn"] and a.verb_index is not None:
            syn = lex.verbs[a.verb_base]["syn"][0]
            edits.append((a.verb_index, lex.form(syn, a.verb_form)))
        for i, w in enumerate(words):
            b = _bare(w)
            if i != a.verb_index and b in lex.nouns and lex.nouns[b]["syn"]:
                edits.append((i, lex.nouns[b]["syn"][0]))
        out: list[str] = []

        def apply(changes):
            new = list(words)
            for i, rep in changes:
                tail = words[i][len(words[i].rstrip(",;:")) :]
                new[i] = _match_case(words[i], rep) + tail
            return a.sentence.render(new)

        for e in edits:
            out.append(apply([e]))
        if len(edits) >= 2:
            out.append(apply(edits[:2]))
        if len(edits) >= 3:
            out.append(apply(edits))
        seen, unique = {text.strip()}, []
        for s in out:
            if s not in seen:
                seen.add(s)
                unique.append(s)
        return unique

    def passive(self, text: str) -> str | None:
        a = _analyse(text)
        lex = self.lex
        if a.verb_base is None or a.verb_form != 1 or not lex.verbs[a.verb_base]["transitive"]:
            return None
        words = a.words
        obj_start = a.verb_index + 1
        obj_end = obj_start
        while obj_end < len(words) and _bare(words[obj_end]) not in lex.preps:
            obj_end += 1
        # "starts to run" has an infinitive, not an object
        if obj_end == obj_start or _bare(words[obj_start]) == "to":
            return None
        obj_words = [_bare(w) for w in words[obj_start:obj_end]]
        obj = " ".join(words[obj_start:obj_end]).rstrip(",")
        rest = " ".join(words[obj_end:])
        # "bag of groceries" agrees with "bag"
        head = obj_words[obj_words.index("of") - 1] if "of" in obj_words[1:] else obj_words[-1]
        be = "are" if head.endswith("s") and not head.endswith("ss") and head not in lex.verb_forms else "is"
        subj = a.subject
        if _bare(words[0]) not in lex.determiners:
            subj = "the " + subj
        else:
            subj = subj[:1].lower() + subj[1:]
        pp = lex.form(a.verb_base, 3)
        parts = [obj, be, pp] + ([rest] if rest else []) + ["by", subj]
        out = " ".join(parts)
        return out[:1].upper() + out[1:] + a.sentence.terminal

    def reorder(self, text: str) -> str | None:
        a = _analyse(text)
        words = a.words
        start = (a.verb_index or a.subject_end) + 1
        for i in range(start, len(words)):
            b = _bare(words[i])
            two = b == "out" and i + 1 < len(words) and _bare(words[i + 1]) == "of"
            if b in self.lex.preps or two:
                if i == len(words) - 1:
                    return None
                phrase = " ".join(words[i:])
                head = list(words[:i])
                if head and _bare(head[0]) in self.lex.determiners:
                    head[0] = head[0].lower()
                return phrase[:1].upper() + phrase[1:] + ", " + " ".join(head) + a.sentence.terminal
        for joiner in (" while ", " and then ", " then ", " and "):
            body = " ".join(words)
            if joiner in body:
                left, right = body.split(joiner, 1)
                left = left[:1].lower() + left[1:]
                right = right[:1].upper() + right[1:]
                return f"{right}{joiner.rstrip()} {left}".replace(" then ", " after ", 1) + a.sentence.terminal
        return None

    def _aligned(self, text: str, prov: dict[str, Any]) -> list[QueryVariant]:
        variants = []
        for s in self.word_replacements(text):
            variants.append(QueryVariant(s, QueryKind.ALIGNED, rule=Rule.WORD_REPLACEMENT, provenance=dict(prov)))
        ap = self.passive(text)
        if ap and ap != text:
            variants.append(QueryVariant(ap, QueryKind.ALIGNED, rule=Rule.ACTIVE_TO_PASSIVE, provenance=dict(prov)))
        wo = self.reorder(text)
        if wo and wo != text:
            variants.append(QueryVariant(wo, QueryKind.ALIGNED, rule=Rule.WORD_ORDER, provenance=dict(prov)))
        # framing paraphrases keep the stub total when the lexicon has no synonyms
        s = _Sentence.parse(text)
        body = " ".join(s.words)
        body = body[:1].lower() + body[1:] if s.words and _bare(s.words[0]) in self.lex.determiners else body
        for prefix in ("In the video, ", "We can see that "):
            variants.append(
                QueryVariant(
                    prefix + body + s.terminal,
                    QueryKind.ALIGNED,
                    rule=Rule.WORD_REPLACEMENT,
                    provenance={**prov, "fallback": "framing"},
                )
            )
        return variants

    # misaligned variants

    def misaligned_candidates(self, text: str) -> Iterator[tuple[str, str, str]]:
        """Yield (sentence, original words, replacement words) with one element swapped."""
        a = _analyse(text)
        words = a.words
        lex = self.lex
        rng = self._rng("misaligned", text)

        def swap(i: int, rep: str) -> str:
            new = list(words)
            tail = words[i][len(words[i].rstrip(",;:")) :]
            new[i] = _match_case(words[i], rep) + tail
            return a.sentence.render(new)

        subj_i = a.subject_end - 1
        head = a.subject_head
        actor_alts = list(lex.nouns.get(head, {}).get("alt", []))
        actor_alts += [x for x in lex.raw["fallback_subjects"] if x != head and x not in actor_alts]
        action_alts: list[str] = []
        if a.verb_index is not None:
            if a.verb_base:
                action_alts = [lex.form(v, a.verb_form) for v in lex.verbs[a.verb_base]["alt"]]
            fallback = [lex.form(v, a.verb_form if a.verb_form is not None else 1) for v in lex.raw["fallback_actions"]]
            verb = _bare(words[a.verb_index])
            action_alts += [x for x in fallback if x != verb and x not in action_alts]
        obj_i = None
        for i in range((a.verb_index if a.verb_index is not None else subj_i) + 1, len(words)):
            if _bare(words[i]) in lex.nouns:
                obj_i = i
                break
        if obj_i is None and len(words) - 1 > max(subj_i, a.verb_index or 0):
            obj_i = len(words) - 1
        obj_alts: list[str] = []
        if obj_i is not None:
            ob = _bare(words[obj_i])
            obj_alts = list(lex.nouns.get(ob, {}).get("alt", []))
            extra = [x for x in lex.raw["fallback_objects"] if x != ob and x not in obj_alts]
            rng.shuffle(extra)
            obj_alts += extra

        slots = [
            (subj_i, actor_alts),
            (a.verb_index, action_alts),
            (obj_i, obj_alts),
        ]
        # round-robin across actor / action / object so the first three differ in kind
        depth = 0
        while True:
            produced = False
            for idx, alts in slots:
                if idx is None or depth >= len(alts):
                    continue
                produced = True
                original = _bare(words[idx])
                yield swap(idx, alts[depth]), original, alts[depth]
            if not produced:
                return
            depth += 1

    def _misaligned(self, text: str, n: int) -> list[tuple[str, str, str]]:
        out, seen = [], {text.strip()}
        for cand in self.misaligned_candidates(text):
            if cand[0] not in seen:
                seen.add(cand[0])
                out.append(cand)
            if len(out) == n:
                return out
        raise MalformedGeneration(f"stub could only build {len(out)} misaligned variants for {text!r}")

    def _aligned_misaligned(self, text: str, prov: dict[str, Any]) -> VariantSet:
        misaligned = tuple(
            QueryVariant(
                s,
                QueryKind.MISALIGNED,
                provenance={**prov, "original": o, "replacement": r, "correction": correction_sentence(o, r)},
            )
            for s, o, r in self._misaligned(text, 3)
        )
        return VariantSet(tuple(self._aligned(text, prov)), misaligned)

    # compositional questions

    def components(self, text: str) -> tuple[str, str, tuple[str, ...]]:
        a = _analyse(text)
        subject = a.subject.rstrip(",")
        subject = subject[:1].lower() + subject[1:]
        action = ""
        if a.verb_index is not None:
            action = _bare(a.words[a.verb_index])
            if a.verb_base and a.verb_form != 2:
                action = self.lex.form(a.verb_base, 2)
        relations = tuple(
            dict.fromkeys(_bare(w) for w in a.words[a.subject_end :] if _bare(w) in self.lex.locations)
        )
        return subject, action, relations

    def _compositional(self, text: str, prov: dict[str, Any]) -> CompositionalSet:
        lex = self.lex
        subject, action, relations = self.components(text)
        head = _bare(subject.split()[-1])
        pronoun = lex.pronouns.get(head, subject)
        alt_head = (lex.nouns.get(head, {}).get("alt") or [x for x in lex.raw["fallback_subjects"] if x != head])[0]
        alt_subject = " ".join(subject.split()[:-1] + [alt_head])
        qs: list[tuple[str, Component, bool]] = [
            (f"Is there {subject} in the video?", Component.SUBJECT, True),
            (f"Is there {alt_subject} in the video?", Component.SUBJECT, False),
        ]
        if action:
            base = lex.verb_forms.get(action, (None, None))[0]
            alts = lex.verbs[base]["alt"] if base else []
            alt_action = lex.form(alts[0], 2) if alts else lex.form(lex.raw["fallback_actions"][0], 2)
            qs.append((f"Is {subject} {action}?", Component.ACTION, True))
            qs.append((f"Is {pronoun} {alt_action}?", Component.ACTION, False))
        for r in relations:
            loc = lex.locations[r]
            qs.append((f"Is {subject} {loc['phrase']}?", Component.RELATION, True))
            qs.append((f"Is {pronoun} {loc['alt']}?", Component.RELATION, False))
        questions = tuple(
            QueryVariant(
                q[:1].upper() + q[1:],
                QueryKind.COMPOSITIONAL_ALIGNED if ok else QueryKind.COMPOSITIONAL_MISALIGNED,
                component=comp,
                provenance=dict(prov),
            )
            for q, comp, ok in qs
        )
        return CompositionalSet(subject, action, relations, questions)

    # training triples

    def _corrections(self, text: str, n: int, prov: dict[str, Any]) -> CorrectionSet:
        aligned = [v.text for v in self._aligned(text, prov)]
        mis = self._misaligned(text, n)
        items = tuple(
            CorrectionTriple(aligned[i % len(aligned)], s, correction_sentence(o, r))
            for i, (s, o, r) in enumerate(mis)
        )
        return CorrectionSet(items, prov)
