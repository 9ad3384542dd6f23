"""A tiny self-contained offline backend for the demos.

Synthesizes evaluator completions from the prompt content and embeds
function descriptions near fixed anchors, so every demo runs without
credentials and produces the same output every time.
"""

from __future__ import annotations

import hashlib
import json
import re

import numpy as np

ANCHOR_FUNCTIONS = [
    "Implied threat through sound",
    "Unseen presence suggestion",
    "Silence as dread",
    "Explicit gore reveal",
    "Direct jump scare",
    "Named monster exposition",
    "Weather as mood",
    "Decaying setting detail",
    "Isolation emphasis",
]

_DIM = 12


def _code(*parts: str) -> int:
    digest = hashlib.sha256("|".join(parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _anchors() -> dict[str, np.ndarray]:
    rng = np.random.default_rng(4242)
    themes = rng.standard_normal((3, _DIM)) * 5.0
    return {
        name: themes[i // 3] + rng.standard_normal(_DIM)
        for i, name in enumerate(ANCHOR_FUNCTIONS)
    }


_ANCHORS = _anchors()


def _sentences(text: str) -> list[str]:
    parts = re.split(r"(?<=[.!?])\s+", text)
    return [p.strip() for p in parts if p.strip()]


class OfflineBackend:
    """Deterministic completions + embeddings for demo pipelines."""

    deterministic = True

    def embed_batch(self, texts):
        out = []
        for text in texts:
            anchor = next((a for a in ANCHOR_FUNCTIONS if text.startswith(a)), None)
            rng = np.random.default_rng(_code("embed", text))
            if anchor is None:
                v = rng.standard_normal(_DIM)
            else:
                v = _ANCHORS[anchor] + 0.3 * rng.standard_normal(_DIM)
            out.append([float(x) for x in v / np.linalg.norm(v)])
        return out

    def complete_once(self, req):
        user = req.user_prompt
        if "## Evaluation Criteria" in user:
            return self._evaluate(user)
        if "### Sentences" in user:
            members = re.findall(r"^- (.+)$", user, re.M)
            anchors = [a for m in members for a in ANCHOR_FUNCTIONS if m.startswith(a)]
            name = max(set(anchors), key=anchors.count) if anchors else "Mixed functions"
            return json.dumps({"summary": f"functions that use {name.lower()}", "name": name})
        if "### Target Cluster" in user:
            count = len(re.findall(r"^\d+\. ", user, re.M))
            target = re.search(r"### Target Cluster\n\n- ([^:]+):", user).group(1)
            return json.dumps({"justification": "closest theme",
                               "cluster": 1 + _code("assign", target) % count})
        if "Target length:" in user:
            pairs = re.findall(r"^- ([^:]+): (.+)$", user, re.M)
            return json.dumps({"justification": "kept all", "finals": [
                {"name": n.strip(), "description": d.strip()} for n, d in pairs]})
        if "### Clusters" in user:
            names = re.findall(r"^- ([^:]+):", user, re.M)
            return json.dumps({"description": f"theme spanning {len(names)} groups",
                               "name": f"Theme {_code('super', *names) % 100}"})
        raise RuntimeError("unrecognized prompt in offline demo backend")

    def _evaluate(self, user: str) -> str:
        output = user.split("## AI Assistant's Response\n\n", 1)[1]
        output = output.split("\n\n## Evaluation Criteria", 1)[0]
        criteria = re.findall(r"^### (.+)$", user.split("## Evaluation Criteria", 1)[1], re.M)
        sentences = _sentences(output)
        blocks = []
        for criterion in criteria:
            lines = [f"  - criterion_name: {criterion}",
                     "    reading: |",
                     "      demo read-through",
                     "    fragments:"]
            n = min(3, len(sentences))
            picked = []
            for i in range(n):
                picked.append(sentences[_code("pick", criterion, output, str(i)) % len(sentences)])
            picked = list(dict.fromkeys(picked))
            for i, frag in enumerate(picked, start=1):
                lines += [f"      - id: {i}", "        fragment: |", f"          {frag}"]
            lines.append("    features:")
            for i, frag in enumerate(picked, start=1):
                code = _code("feature", criterion, frag)
                anchor = ANCHOR_FUNCTIONS[code % len(ANCHOR_FUNCTIONS)]
                lines += [
                    f"      - fragment_id: {i}",
                    "        analysis: |",
                    f"          weighs this fragment against {criterion.lower()}",
                    "        feature: |",
                    f"          {anchor} (variant {code % 89})",
                    f"        is_excluded: {'true' if code % 6 == 0 else 'false'}",
                    f"        alignment: {'positive' if code % 3 else 'negative'}",
                ]
            lines.append(f"    overall_justification: demo summary for {criterion}")
            lines.append(f"    keyphrase: demo keyphrase {_code('kp', criterion, output) % 100}")
            blocks.append("\n".join(lines))
        return "```yaml\nevaluations:\n" + "\n".join(blocks) + "\n```\n"
