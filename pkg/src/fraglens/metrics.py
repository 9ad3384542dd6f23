"""Extraction and assessment metrics.

Token IoU works on token-position sets derived from character spans via
whitespace tokenization with offsets. Sentence-level precision/recall/F1
works on sentence-index sets from a pluggable splitter. Pairwise accuracy
treats ties as incorrect.

Zero-denominator conventions: perfect-empty agreement scores 1, one-sided
emptiness scores 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

Span = tuple[int, int]


@dataclass(frozen=True, slots=True)
class ExtractionScore:
    iou: float
    precision: float
    recall: float
    f1: float


def whitespace_tokenize(text: str) -> list[Span]:
    """Offsets of maximal non-whitespace runs."""
    tokens: list[Span] = []
    start = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                tokens.append((start, i))
                start = None
        elif start is None:
            start = i
    if start is not None:
        tokens.append((start, len(text)))
    return tokens


def split_sentences(text: str) -> list[Span]:
    """Rule-based sentence spans: break after terminal punctuation or at a
    newline. Spans are ordered, non-overlapping, and cover the text."""
    boundaries: list[int] = []
    n = len(text)
    i = 0
    while i < n:
        ch = text[i]
        if ch == "\n":
            boundaries.append(i + 1)
        elif ch in ".!?":
            j = i + 1
            while j < n and text[j] in ".!?\"')":
                j += 1
            if j >= n or text[j].isspace():
                boundaries.append(j)
                i = j - 1
        i += 1
    spans: list[Span] = []
    prev = 0
    for b in boundaries:
        if b > prev:
            spans.append((prev, b))
            prev = b
    if prev < n:
        spans.append((prev, n))
    if not spans and n:
        spans.append((0, n))
    return spans


def _check_bounds(spans: Sequence[Span], text: str, label: str) -> None:
    for start, end in spans:
        if start < 0 or end > len(text) or start > end:
            raise ValueError(f"{label} span ({start}, {end}) out of bounds for text of length {len(text)}")


def _overlapping_indices(spans: Sequence[Span], units: Sequence[Span]) -> set[int]:
    hit: set[int] = set()
    for s_start, s_end in spans:
        if s_start >= s_end:  # empty span covers no characters
            continue
        for idx, (u_start, u_end) in enumerate(units):
            if s_start < u_end and u_start < s_end:
                hit.add(idx)
    return hit


def token_iou(
    pred_spans: Sequence[Span],
    gold_spans: Sequence[Span],
    text: str,
    tokenizer: Callable[[str], list[Span]] = whitespace_tokenize,
) -> float:
    """|pred tokens ∩ gold tokens| / |pred tokens ∪ gold tokens|; 1 when both empty."""
    _check_bounds(pred_spans, text, "pred")
    _check_bounds(gold_spans, text, "gold")
    tokens = tokenizer(text)
    pred = _overlapping_indices(pred_spans, tokens)
    gold = _overlapping_indices(gold_spans, tokens)
    if not pred and not gold:
        return 1.0
    union = pred | gold
    return len(pred & gold) / len(union)


def sentence_prf(
    pred_spans: Sequence[Span],
    gold_spans: Sequence[Span],
    text: str,
    splitter: Callable[[str], list[Span]] = split_sentences,
) -> tuple[float, float, float]:
    """Precision/recall/F1 over sentence-index sets touched by the spans."""
    _check_bounds(pred_spans, text, "pred")
    _check_bounds(gold_spans, text, "gold")
    sentences = splitter(text)
    pred = _overlapping_indices(pred_spans, sentences)
    gold = _overlapping_indices(gold_spans, sentences)
    if not pred and not gold:
        return 1.0, 1.0, 1.0
    if not pred or not gold:
        return 0.0, 0.0, 0.0
    inter = len(pred & gold)
    precision = inter / len(pred)
    recall = inter / len(gold)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def extraction_score(
    pred_spans: Sequence[Span],
    gold_spans: Sequence[Span],
    text: str,
) -> ExtractionScore:
    p, r, f1 = sentence_prf(pred_spans, gold_spans, text)
    return ExtractionScore(
        iou=token_iou(pred_spans, gold_spans, text), precision=p, recall=r, f1=f1
    )


def pairwise_accuracy(scored_pairs: Sequence[tuple[float, float, str]]) -> float:
    """Fraction of pairs where the chosen side scored strictly higher.

    Each pair is (score_A, score_B, chosen) with chosen in {"A", "B"}; a tie
    is incorrect by definition.
    """
    if not scored_pairs:
        raise ValueError("pairwise_accuracy requires at least one pair")
    correct = 0
    for score_a, score_b, chosen in scored_pairs:
        if chosen not in ("A", "B"):
            raise ValueError(f"chosen must be 'A' or 'B', got {chosen!r}")
        if chosen == "A" and score_a > score_b:
            correct += 1
        elif chosen == "B" and score_b > score_a:
            correct += 1
    return correct / len(scored_pairs)
