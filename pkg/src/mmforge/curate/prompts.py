"""Response-format prompt suffixes and the per-source registry."""

from __future__ import annotations

from .pool import PoolRecord

RESPONSE_FORMAT_PROMPTS: dict[int, str] = {
    1: "Answer the question using a single word or phrase.",
    2: "Answer the question using a single number or phrase.",
    3: "Answer with the option's letter from the given choices directly.",
    4: "Give the short answer directly.",
    5: "Answer the question using a single word or phrase.",
    6: "When the provided information is insufficient, respond with <no answer>.",
    7: "Directly provide the HTML code.",
    8: "First show your reasoning process and then give the final answer.",
    9: "When the provided information is insufficient, respond with 'Unanswerable'. "
    "Answer the question using a single word or phrase.",
    10: "Answer with the letter.",
}

# source name -> prompt indices appended to its instructions
DEFAULT_PROMPT_REGISTRY: dict[str, tuple[int, ...]] = {
    "SketchyVQA": (1,),
    "OODVQA": (1,),
    "VizWiz": (9,),
    "Q-Instruct": (1, 3),
    "ChartQA": (2,),
    "DocVQA": (4,),
    "DVQA": (1,),
    "AI2D": (1,),
    "ScreenQA": (1, 6),
    "CLEVR": (1,),
    "TallyQA": (1,),
    "PathVQA": (1,),
    "MathInstruct": (8,),
    "Design2Code": (7,),
    "IconQA": (1, 10),
    "HiTab": (1,),
    "WTQ": (1,),
    "WikiSQL": (1,),
    "Inter-GPS": (10,),
    "Visual7W": (3,),
    "TQA": (10,),
    "RAVEN": (1,),
}


class UnknownSourceError(KeyError):
    """Raised in strict mode for sources without a registry entry."""


def attach_format_prompt(
    record: PoolRecord,
    registry: dict[str, tuple[int, ...]] | None = None,
    strict: bool = False,
) -> PoolRecord:
    """Append the source's response-format prompt(s) to the instruction text.

    Idempotent: a record already carrying the exact suffix passes through
    unchanged. Unmapped sources pass through in lenient mode and raise in
    strict mode.
    """
    registry = DEFAULT_PROMPT_REGISTRY if registry is None else registry
    indices = registry.get(record.source)
    if indices is None:
        if strict:
            raise UnknownSourceError(f"no response-format prompt registered for {record.source!r}")
        return record
    suffix = "".join("\n" + RESPONSE_FORMAT_PROMPTS[i] for i in indices)
    if record.text.endswith(suffix):
        return record
    return record.with_text(record.text + suffix)
