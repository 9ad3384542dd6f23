"""The benchmark metrics, worked by hand on a small passage.

Covers token IoU between predicted and gold spans, sentence-level
precision/recall/F1, and pairwise preference accuracy with the
strict-win rule (ties count as incorrect).
"""

from fraglens import pairwise_accuracy, sentence_prf, split_sentences, token_iou
from fraglens.metrics import whitespace_tokenize

text = ("The lab results arrived late. The numbers were impossible. "
        "Someone had signed the report twice. Nobody worked that shift.")

sentences = split_sentences(text)
print("sentences:")
for i, (s, e) in enumerate(sentences):
    print(f"  {i}: {text[s:e]!r}")

# the evaluator extracted these two fragments
pred = [
    (text.find("The numbers were impossible."), text.find("The numbers were impossible.") + 28),
    (text.find("Someone had signed"), text.find("twice.") + 6),
]
# an annotator marked these
gold = [
    (text.find("The numbers were impossible."), text.find("The numbers were impossible.") + 28),
    (text.find("Nobody worked"), len(text)),
]

iou = token_iou(pred, gold, text)
p, r, f1 = sentence_prf(pred, gold, text)
print(f"\ntokens in text: {len(whitespace_tokenize(text))}")
print(f"token IoU: {iou:.3f}")
print(f"sentence-level precision {p:.2f}, recall {r:.2f}, F1 {f1:.2f}")

# pairwise preference accuracy over (score_A, score_B, human-chosen) rows;
# the third row is an exact tie and counts as incorrect by definition
pairs = [
    (0.75, 0.25, "A"),   # correct: A strictly higher and chosen
    (0.40, 0.90, "B"),   # correct
    (0.50, 0.50, "A"),   # tie -> incorrect
    (0.20, 0.60, "A"),   # wrong side
]
accuracy = pairwise_accuracy(pairs)
print(f"pairwise accuracy: {accuracy:.2f}  (2 of 4; the tie is incorrect)")
assert accuracy == 0.5
