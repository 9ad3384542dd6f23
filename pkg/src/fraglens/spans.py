"""Locate fragment text inside a record's output.

The evaluator quotes fragments verbatim, but real completions drift in
whitespace (wrapped lines, collapsed double spaces), so resolution falls
back to a whitespace-normalized match mapped back to original coordinates.
An unresolvable fragment is a value, not an error: the assessment is kept
and scored, just rendered without a highlight.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .types import WHOLE

_WS_RUN = re.compile(r"\s+")


@dataclass(frozen=True, slots=True)
class SpanResolution:
    span: tuple[int, int] | None
    ambiguous: bool = False

    @property
    def resolved(self) -> bool:
        return self.span is not None


UNRESOLVED = SpanResolution(span=None)


def normalize_ws(text: str) -> str:
    """Collapse runs of whitespace to single spaces and strip the ends."""
    return _WS_RUN.sub(" ", text).strip()


def _normalized_with_offsets(text: str) -> tuple[str, list[int]]:
    """Whitespace-collapsed copy of ``text`` plus, per normalized character,
    the index of the original character it came from."""
    chars: list[str] = []
    offsets: list[int] = []
    in_ws = True  # leading whitespace is dropped
    for i, ch in enumerate(text):
        if ch.isspace():
            if not in_ws:
                chars.append(" ")
                offsets.append(i)
                in_ws = True
        else:
            chars.append(ch)
            offsets.append(i)
            in_ws = False
    if chars and chars[-1] == " ":  # trailing whitespace
        chars.pop()
        offsets.pop()
    return "".join(chars), offsets


def resolve_span(output: str, fragment: str) -> SpanResolution:
    """Find ``fragment`` in ``output``.

    Resolution order: the WHOLE sentinel maps to the full output; an exact
    substring match wins; otherwise a whitespace-normalized search runs and
    the match is mapped back to original coordinates. The first occurrence
    is used, with ``ambiguous=True`` when there are several.
    """
    if fragment == WHOLE:
        return SpanResolution(span=(0, len(output)))
    if not fragment:
        raise ValueError("fragment must be non-empty (or the WHOLE sentinel)")

    idx = output.find(fragment)
    if idx >= 0:
        second = output.find(fragment, idx + 1)
        return SpanResolution(span=(idx, idx + len(fragment)), ambiguous=second >= 0)

    norm_out, offsets = _normalized_with_offsets(output)
    norm_frag = normalize_ws(fragment)
    if not norm_frag:
        return UNRESOLVED
    nidx = norm_out.find(norm_frag)
    if nidx < 0:
        return UNRESOLVED
    start = offsets[nidx]
    end = offsets[nidx + len(norm_frag) - 1] + 1
    second = norm_out.find(norm_frag, nidx + 1)
    return SpanResolution(span=(start, end), ambiguous=second >= 0)


def span_matches_fragment(output: str, span: tuple[int, int], fragment: str) -> bool:
    """Invariant check: the output slice normalizes to the fragment text."""
    if fragment == WHOLE:
        return span == (0, len(output))
    return normalize_ws(output[span[0]:span[1]]) == normalize_ws(fragment)
