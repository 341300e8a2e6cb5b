"""Referee grading through a chat client with a frozen few-shot prompt."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from ..curate.clients import ChatClient
from .matching import Verdict

_VALID = {"CORRECT", "INCORRECT"}
_REPLY_STRIP = " \t\r\n.,;:!\"'"


class GradingError(RuntimeError):
    def __init__(self, message: str, raw_reply: str):
        super().__init__(f"{message}; raw reply: {raw_reply!r}")
        self.raw_reply = raw_reply


@lru_cache(maxsize=1)
def grader_template() -> str:
    return (
        resources.files("mmforge.evalkit").joinpath("resources/grader_prompt.txt").read_text("utf-8")
    )


def build_grader_prompt(answer: str, gt_answer: str) -> str:
    """The few-shot grading prompt with only the two answer slots substituted."""
    return grader_template().replace("{answer}", answer).replace("{gt_answer}", gt_answer)


def _parse_reply(reply: str) -> str | None:
    word = reply.strip(_REPLY_STRIP).upper()
    if word in _VALID:
        return word
    return None


def grade_llm(pred: str, gt: str, client: ChatClient, retries: int = 1) -> Verdict:
    """Ask the referee client for CORRECT/INCORRECT; lenient single-word parse.

    A reply that does not reduce to one of the two verdict words is retried
    (`retries` times) and then raised as a GradingError carrying the raw
    reply.
    """
    prompt = build_grader_prompt(pred, gt)
    last_reply = ""
    for _ in range(retries + 1):
        last_reply = client.complete(prompt)
        value = _parse_reply(last_reply)
        if value is not None:
            return Verdict(value=value, rule_fired="llm-grader")
    raise GradingError("grader reply is not CORRECT/INCORRECT", last_reply)


def grade_many(
    pairs: list[tuple[str, str]], client: ChatClient, workers: int = 4, retries: int = 1
) -> list[Verdict]:
    """Referee-grade (pred, gt) pairs with a bounded pool, preserving order."""
    from concurrent.futures import ThreadPoolExecutor

    if len(pairs) < 2 or workers <= 1:
        return [grade_llm(p, g, client, retries=retries) for p, g in pairs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda pg: grade_llm(pg[0], pg[1], client, retries=retries), pairs))
