"""Rule-based answer matching tolerant of formatting noise.

Predictions and ground truths are compared through a fixed rule ladder:
exact match after light cleanup, option-letter / option-stem extraction,
numeric comparison with a 5% relative tolerance (inclusive), and finally a
whole-token substring test. Four-digit calendar-year values are the one
numeric carve-out: a year that is off by even one is simply a different
year, so years must match exactly rather than within tolerance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_ARTICLES = {"a", "an", "the"}
_PAREN_CHOICE = re.compile(r"^\(([a-z])\)\s*(.*)$")
_DOTTED_CHOICE = re.compile(r"^([a-z])[.)]\s*(.*)$")
_STRIP_CHARS = ".,;:!?'\"()[]{}"


@dataclass(frozen=True)
class Verdict:
    value: str  # CORRECT | INCORRECT
    rule_fired: str

    @property
    def correct(self) -> bool:
        return self.value == "CORRECT"


def _correct(rule: str) -> Verdict:
    return Verdict(value="CORRECT", rule_fired=rule)


def _incorrect(rule: str) -> Verdict:
    return Verdict(value="INCORRECT", rule_fired=rule)


def _extract_choice(text: str) -> tuple[str | None, str]:
    """Pull a multiple-choice letter off patterns like "(a) apple" or "B. dog"."""
    t = text.strip().lower()
    if len(t) == 1 and t.isalpha():
        return t, ""
    for pattern in (_PAREN_CHOICE, _DOTTED_CHOICE):
        m = pattern.match(t)
        if m:
            return m.group(1), m.group(2)
    return None, t


def _tokens(text: str) -> tuple[str, ...]:
    out = []
    for word in text.lower().split():
        word = word.strip(_STRIP_CHARS)
        if word and word not in _ARTICLES:
            out.append(word)
    return tuple(out)


def _to_number(text: str) -> float | None:
    t = text.strip().lower().strip(_STRIP_CHARS)
    t = t.replace(",", "").replace("$", "")
    if t.endswith("%"):
        t = t[:-1]
    if not t:
        return None
    try:
        return float(t)
    except ValueError:
        return None


def _is_year_like(value: float) -> bool:
    return value == int(value) and 1000 <= value <= 2999


def _contains_contiguous(haystack: tuple[str, ...], needle: tuple[str, ...]) -> bool:
    if not needle or len(needle) > len(haystack):
        return False
    return any(haystack[i : i + len(needle)] == needle for i in range(len(haystack) - len(needle) + 1))


def fuzzy_match(pred: str, gt: str) -> Verdict:
    """Grade `pred` against `gt`; the verdict names the single rule that decided it."""
    p_raw = (pred or "").strip()
    g_raw = (gt or "").strip()
    if p_raw.casefold() == g_raw.casefold():
        return _correct("exact-match")

    p_letter, p_stem = _extract_choice(p_raw)
    g_letter, g_stem = _extract_choice(g_raw)
    p_tokens = _tokens(p_raw)
    g_tokens = _tokens(g_raw)

    if p_tokens and p_tokens == g_tokens:
        return _correct("normalized-match")

    if p_letter and g_letter:
        if p_letter == g_letter:
            return _correct("choice-letter")
        return _incorrect("choice-letter-mismatch")
    if g_letter and not p_letter:
        if p_tokens and p_tokens == _tokens(g_stem):
            return _correct("choice-stem")
    if p_letter and not g_letter:
        if g_tokens and g_tokens == _tokens(p_stem):
            return _correct("choice-stem")

    p_num = _to_number(p_stem if p_letter else p_raw)
    g_num = _to_number(g_stem if g_letter else g_raw)
    if p_num is not None and g_num is not None:
        if _is_year_like(p_num) and _is_year_like(g_num):
            if p_num == g_num:
                return _correct("numeric-year")
            return _incorrect("numeric-year-mismatch")
        rel_err = abs(p_num - g_num) / max(abs(g_num), 1e-12)
        # inclusive boundary, with slack for the float representation of the inputs
        if rel_err <= 0.05 + 1e-12:
            return _correct("numeric-tolerance")
        return _incorrect("numeric-mismatch")

    if _contains_contiguous(p_tokens, g_tokens) or _contains_contiguous(g_tokens, p_tokens):
        return _correct("token-substring")

    return _incorrect("mismatch")
