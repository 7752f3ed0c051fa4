"""Chain-of-thought recommendation over a candidate subset.

The prompt is assembled from fixed sections (role preamble, worked examples,
recent history, the user's query, the focused insight, the numbered
candidates) and sampled m times from a language-model provider. Samples are
parsed into strict answer blocks and tallied by self-consistency voting.
"""
from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass

from .narrator import InsightDescription
from .retrieval import ProviderError

logger = logging.getLogger(__name__)

__all__ = [
    "FEWSHOT_SCHEMA",
    "HISTORY_WINDOW",
    "DEFAULT_SAMPLES",
    "ParseError",
    "ReasoningError",
    "LMProvider",
    "StubLM",
    "ScriptedLM",
    "RemoteLM",
    "HistoryTurn",
    "PromptBundle",
    "Recommendation",
    "compose_prompt",
    "parse_model_output",
    "recommend",
]

FEWSHOT_SCHEMA = "iw-fewshot/1"
HISTORY_WINDOW = 5
DEFAULT_SAMPLES = 3

_ANSWER_RE = re.compile(r"^ANSWER:\s*(\d+)\s*[-–—]\s*(.+?)\s*$", re.MULTILINE)

_PREAMBLE = (
    "You are a data-analysis assistant. Given a focused insight and a numbered "
    "list of candidate insights from the same table, pick the candidates that "
    "best answer the user's question and say in one sentence how each relates "
    "to the focused insight."
)

_OUTPUT_INSTRUCTION = (
    "After your reasoning, output one line per chosen candidate in exactly this form:\n"
    "ANSWER: <candidate number> - <one sentence relating it to the focused insight>"
)


class ParseError(ValueError):
    """A single sample's output lacked a valid answer block."""


class ReasoningError(RuntimeError):
    """Every sample failed to parse; caller should fall back to ranking order."""


class LMProvider:
    """Text-completion provider; complete() must be deterministic for the stub."""

    name: str = "base"
    diversity: float = 0.0

    def complete(self, prompt: str, sample_index: int) -> str:
        raise NotImplementedError


class StubLM(LMProvider):
    """Offline provider with fixed behavior derived from the prompt alone.

    Always picks candidate 1; even-numbered samples add one rotating extra
    candidate so that voting has something to do. Deterministic given
    (prompt, sample_index).
    """

    name = "stub-lm"

    def complete(self, prompt: str, sample_index: int) -> str:
        count = _candidate_count(prompt)
        picks = [1]
        if count >= 2 and sample_index % 2 == 0:
            picks.append(2 + (sample_index // 2) % (count - 1))
        lines = ["Weighing each candidate against the focused insight and the question."]
        for n in picks:
            lines.append(f"ANSWER: {n} - it sits in a neighboring subspace and extends the focused pattern")
        return "\n".join(lines)


def _candidate_count(prompt: str) -> int:
    marker = "## Candidates"
    start = prompt.find(marker)
    section = prompt[start:] if start >= 0 else prompt
    nums = [int(m.group(1)) for m in re.finditer(r"^(\d+)\.", section, re.MULTILINE)]
    return max(nums) if nums else 1


class ScriptedLM(LMProvider):
    """Returns pre-written outputs by sample index; for tests and replay."""

    name = "scripted-lm"

    def __init__(self, outputs: list[str]):
        if not outputs:
            raise ValueError("need at least one scripted output")
        self.outputs = list(outputs)

    def complete(self, prompt: str, sample_index: int) -> str:
        return self.outputs[sample_index % len(self.outputs)]


class RemoteLM(LMProvider):
    """Chat-completion HTTP provider."""

    name = "remote-lm"

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str | None = None,
        diversity: float = 0.7,
        timeout: float = 60.0,
    ):
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self.diversity = diversity
        self.timeout = timeout

    def complete(self, prompt: str, sample_index: int) -> str:
        import httpx

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.diversity,
        }
        try:
            resp = httpx.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except Exception as exc:
            raise ProviderError(self.name, str(exc)) from exc


@dataclass(frozen=True)
class HistoryTurn:
    query: str
    chosen_text: str


@dataclass(frozen=True)
class PromptBundle:
    preamble: str
    few_shot: str
    history: tuple[HistoryTurn, ...]
    omitted_turns: int
    user_query: str
    focused: InsightDescription
    candidates: tuple[InsightDescription, ...]

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError("candidates must be non-empty")
        ids = [c.insight_id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise ValueError("candidate ids must be unique")

    def render(self) -> str:
        parts = [self.preamble, "", "## Worked examples", self.few_shot, "", "## History"]
        if self.omitted_turns:
            parts.append(f"({self.omitted_turns} earlier turns omitted)")
        if not self.history:
            parts.append("(no prior turns)")
        for turn in self.history:
            parts.append(f'- asked "{turn.query}", followed: {turn.chosen_text}')
        parts += [
            "",
            "## Question",
            self.user_query,
            "",
            "## Focused insight",
            _render_description(self.focused),
            "",
            "## Candidates",
        ]
        for n, cand in enumerate(self.candidates, start=1):
            parts.append(f"{n}. {_render_description(cand)}")
        parts += ["", _OUTPUT_INSTRUCTION]
        return "\n".join(parts)


def _render_description(desc: InsightDescription) -> str:
    header = ", ".join(desc.header)
    return f'header=({header}); type={desc.itype}; score={desc.score:.3f}; "{desc.text}"'


_FEWSHOT_CACHE: str | None = None


def _few_shot_text() -> str:
    global _FEWSHOT_CACHE
    if _FEWSHOT_CACHE is None:
        from importlib import resources

        raw = resources.files("insightweaver.resources").joinpath("few_shot_v1.json").read_text("utf-8")
        doc = json.loads(raw)
        if doc.get("version") != FEWSHOT_SCHEMA:
            raise ValueError(f"unexpected few-shot resource version: {doc.get('version')!r}")
        blocks = []
        for ex in doc["examples"]:
            lines = [f"Question: {ex['query']}"]
            foc = ex["focused"]
            header = ", ".join(foc["header"])
            lines.append(
                f'Focused: header=({header}); type={foc["itype"]}; '
                f'score={foc["score"]:.3f}; "{foc["text"]}"'
            )
            for n, cand in enumerate(ex["candidates"], start=1):
                lines.append(f"{n}. {cand}")
            lines.append(ex["reasoning"])
            for num, rel in ex["answers"]:
                lines.append(f"ANSWER: {num} - {rel}")
            blocks.append("\n".join(lines))
        _FEWSHOT_CACHE = "\n\n".join(blocks)
    return _FEWSHOT_CACHE


def compose_prompt(
    history: list[HistoryTurn],
    query: str,
    focused: InsightDescription,
    candidates: list[InsightDescription],
    window: int = HISTORY_WINDOW,
) -> PromptBundle:
    recent = tuple(history[-window:]) if window > 0 else ()
    return PromptBundle(
        preamble=_PREAMBLE,
        few_shot=_few_shot_text(),
        history=recent,
        omitted_turns=max(0, len(history) - len(recent)),
        user_query=query,
        focused=focused,
        candidates=tuple(candidates),
    )


def parse_model_output(text: str, k: int) -> set[tuple[int, str]]:
    """Extracts ANSWER lines; any reference outside 1..k poisons the sample."""
    pairs = set()
    for m in _ANSWER_RE.finditer(text):
        num = int(m.group(1))
        if not 1 <= num <= k:
            raise ParseError(f"candidate {num} out of range 1..{k}")
        pairs.add((num, m.group(2)))
    if not pairs:
        raise ParseError("no answer block found")
    return pairs


@dataclass(frozen=True)
class Recommendation:
    chosen: tuple[tuple[str, str, int], ...]  # (insight id, relation_text, vote_count)
    samples_used: int
    fallback: bool = False

    def doc(self) -> dict:
        return {
            "chosen": [
                {"insight_id": iid, "relation_text": rel, "votes": votes}
                for iid, rel, votes in self.chosen
            ],
            "samples_used": self.samples_used,
            "fallback": self.fallback,
        }


def recommend(provider: LMProvider, bundle: PromptBundle, m: int = DEFAULT_SAMPLES) -> Recommendation:
    """Sample m reasoning paths and vote.

    Candidates with at least ceil(m/2) votes win; if none do, the single
    best-voted candidate is returned with fallback set. Raises
    ReasoningError when every sample is unparseable.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    k = len(bundle.candidates)
    prompt = bundle.render()
    votes: dict[int, int] = {}
    relations: dict[int, tuple[int, str]] = {}  # num -> (sample idx, text), earliest wins
    parsed = 0
    for s in range(m):
        raw = provider.complete(prompt, s)
        try:
            pairs = parse_model_output(raw, k)
        except ParseError as exc:
            logger.warning("sample %d discarded: %s", s, exc)
            continue
        parsed += 1
        for num, rel in sorted(pairs):
            votes[num] = votes.get(num, 0) + 1
            if num not in relations:
                relations[num] = (s, rel)
    if parsed == 0:
        raise ReasoningError(f"all {m} samples unparseable")
    majority = math.ceil(m / 2)
    winners = sorted((n for n, v in votes.items() if v >= majority), key=lambda n: (-votes[n], n))
    fallback = False
    if not winners:
        winners = [sorted(votes, key=lambda n: (-votes[n], n))[0]]
        fallback = True
    chosen = tuple(
        (bundle.candidates[n - 1].insight_id, relations[n][1], votes[n]) for n in winners
    )
    return Recommendation(chosen=chosen, samples_used=parsed, fallback=fallback)
