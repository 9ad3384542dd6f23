"""Shared fixtures: canned-response builders and programmable backends."""

from __future__ import annotations

import hashlib
import json
import re
import textwrap

import numpy as np
import pytest

from fraglens.gateway import (
    CompletionRequest,
    MockBackend,
    TransientBackendError,
    Transcript,
)
from fraglens.metrics import split_sentences
from fraglens.types import Criterion, ExampleFunction, Record


def yaml_block(body: str) -> str:
    return f"```yaml\n{body}```\n"


def eval_document_yaml(blocks: list[dict]) -> str:
    """Render criterion blocks in the evaluator's output format."""
    lines = ["evaluations:"]
    for block in blocks:
        lines.append(f"  - criterion_name: {block['criterion_name']}")
        lines.append("    reading: |")
        lines.append(f"      {block.get('reading', 'read the response carefully')}")
        lines.append("    fragments:")
        for fid, text in block["fragments"]:
            lines.append(f"      - id: {fid}")
            lines.append("        fragment: |")
            for frag_line in text.splitlines() or [""]:
                lines.append(f"          {frag_line}")
        lines.append("    features:")
        for feat in block["features"]:
            lines.append(f"      - fragment_id: {feat['fragment_id']}")
            lines.append("        analysis: |")
            lines.append(f"          {feat.get('analysis', 'fragment analysis')}")
            lines.append("        feature: |")
            lines.append(f"          {feat['feature']}")
            lines.append(f"        is_excluded: {'true' if feat.get('is_excluded') else 'false'}")
            lines.append(f"        alignment: {feat['alignment']}")
        lines.append(
            f"    overall_justification: {block.get('overall_justification', 'overall view')}"
        )
        lines.append(f"    keyphrase: {block.get('keyphrase', 'key phrase')}")
    return yaml_block("\n".join(lines) + "\n")


class FlakyBackend:
    """Raises transient errors for the first ``failures`` calls, then answers."""

    deterministic = False

    def __init__(self, response: str = "ok", failures: int = 0, dim: int = 8):
        self.response = response
        self.failures = failures
        self.calls = 0
        self.dim = dim

    def complete_once(self, req: CompletionRequest) -> str:
        self.calls += 1
        if self.calls <= self.failures:
            raise TransientBackendError("HTTP 429")
        return self.response

    def embed_batch(self, texts):
        self.calls += 1
        if self.calls <= self.failures:
            raise TransientBackendError("HTTP 429")
        return [[float(len(t))] * self.dim for t in texts]


class SpyBackend:
    """Wraps a backend, recording embed batch boundaries and completions."""

    def __init__(self, inner):
        self.inner = inner
        self.batches: list[list[str]] = []
        self.completion_count = 0

    @property
    def deterministic(self):
        return self.inner.deterministic

    def complete_once(self, req):
        self.completion_count += 1
        return self.inner.complete_once(req)

    def embed_batch(self, texts):
        self.batches.append(list(texts))
        return self.inner.embed_batch(texts)


@pytest.fixture
def horror_record() -> Record:
    return Record(
        record_id="story-1",
        input="keywords: closet, eyes, sigh",
        output=(
            "The closet door stood ajar. I heard a sigh behind the coats. "
            "Two eyes caught the light and blinked out of sync. "
            "I reached for the handle and the room went quiet. "
            "Something exhaled against my neck."
        ),
    )


@pytest.fixture
def horror_criterion() -> Criterion:
    return Criterion(
        criterion_id="crit-horror",
        name="Horror Atmosphere",
        description="Creates immersive and constant fear or psychological anxiety.",
        positive_examples=(
            ExampleFunction(
                example_id="ex-p1",
                function_description="Implied threat through sound",
                fragment="a wet breath behind the curtain",
                polarity_role="positive",
            ),
            ExampleFunction(
                example_id="ex-p2",
                function_description="Fear revealed on re-reading",
                fragment="the photo had always shown four people",
                polarity_role="positive",
            ),
        ),
    )


# ---- scripted world ---------------------------------------------------------
#
# A deterministic stand-in for a live evaluator + embedder. Every completion
# is synthesized from the prompt text alone; embeddings place function
# descriptions in structured blobs (12 stems around 3 super-centers) so the
# downstream geometry has something real to find. Recording its traffic into
# a Transcript yields a replayable fixture.

FUNCTION_STEMS = [
    # super-center 0: implicit dread devices
    "Implied threat through sound",
    "Fear by omission",
    "Unseen presence suggestion",
    "Silence as dread",
    # super-center 1: explicit shock devices
    "Explicit gore reveal",
    "Direct jump scare",
    "Named monster exposition",
    "On-page violence",
    # super-center 2: atmosphere dressing
    "Weather as mood",
    "Decaying setting detail",
    "Isolation emphasis",
    "Sensory cold imagery",
]

_STEM_DIM = 16


def _hash_int(*parts: str) -> int:
    h = hashlib.sha256("\x1f".join(parts).encode("utf-8")).digest()
    return int.from_bytes(h[:8], "big")


def _stem_centers() -> dict[str, np.ndarray]:
    rng = np.random.default_rng(20_250_101)
    supers = rng.standard_normal((3, _STEM_DIM)) * 6.0
    centers = {}
    for i, stem in enumerate(FUNCTION_STEMS):
        local = rng.standard_normal(_STEM_DIM) * 1.2
        centers[stem] = supers[i // 4] + local
    return centers


STEM_CENTERS = _stem_centers()


def stem_of(text: str) -> str | None:
    for stem in FUNCTION_STEMS:
        if text.startswith(stem):
            return stem
    return None


class ScriptedBackend:
    """Answers any pipeline prompt deterministically from its content."""

    deterministic = True

    def __init__(self, fragments_per_record: int = 4, exclude_every: int = 5):
        self.fragments_per_record = fragments_per_record
        self.exclude_every = exclude_every

    # -- embeddings ----------------------------------------------------------

    def embed_batch(self, texts):
        out = []
        for text in texts:
            stem = stem_of(text)
            if stem is None:
                rng = np.random.default_rng(_hash_int("embed", text))
                v = rng.standard_normal(_STEM_DIM)
            else:
                rng = np.random.default_rng(_hash_int("jitter", text))
                v = STEM_CENTERS[stem] + 0.25 * rng.standard_normal(_STEM_DIM)
            v = v / np.linalg.norm(v)
            out.append([float(x) for x in v])
        return out

    # -- completions -----------------------------------------------------------

    def complete_once(self, req: CompletionRequest) -> str:
        user = req.user_prompt
        if "## Evaluation Criteria" in user:
            return self._evaluation_response(user)
        if "## Evaluation Criterion" in user:
            return self._rating_response(user)
        if "### Sentences" in user:
            return self._base_label_response(user)
        if "### Target Cluster" in user:
            return self._reassign_response(user)
        if "Target length:" in user:
            return self._dedup_response(user)
        if "### Clusters" in user:
            return self._super_label_response(user)
        raise AssertionError(f"scripted backend got an unrecognized prompt (tag={req.tag})")

    def _evaluation_response(self, user: str) -> str:
        output = user.split("## AI Assistant's Response\n\n", 1)[1]
        output = output.split("\n\n## Evaluation Criteria", 1)[0]
        criteria = re.findall(r"^### (.+)$", user.split("## Evaluation Criteria", 1)[1], re.M)
        sentences = [output[s:e].strip() for s, e in split_sentences(output)]
        sentences = [s for s in sentences if s]
        blocks = []
        for criterion in criteria:
            n = min(self.fragments_per_record, len(sentences))
            picks = []
            for i in range(n):
                idx = _hash_int("pick", criterion, output, str(i)) % len(sentences)
                if sentences[idx] not in picks:
                    picks.append(sentences[idx])
            fragments = [(i + 1, frag) for i, frag in enumerate(picks)]
            features = []
            for i, (fid, frag) in enumerate(fragments):
                code = _hash_int("feat", criterion, frag)
                stem = FUNCTION_STEMS[code % len(FUNCTION_STEMS)]
                features.append({
                    "fragment_id": fid,
                    "analysis": f"considers how this fragment bears on {criterion.lower()}",
                    "feature": f"{stem} (variant {code % 97})",
                    "alignment": "positive" if code % 3 else "negative",
                    "is_excluded": (code % self.exclude_every) == 0,
                })
            blocks.append({
                "criterion_name": criterion,
                "reading": f"scripted read-through for {criterion}",
                "fragments": fragments,
                "features": features,
                "overall_justification": f"scripted overall view on {criterion}",
                "keyphrase": f"keyphrase {_hash_int('kp', criterion, output) % 1000}",
            })
        return eval_document_yaml(blocks)

    def _rating_response(self, user: str) -> str:
        score = 1 + _hash_int("rating", user) % 5
        return yaml_block(
            f"explanation: |\n  scripted holistic reasoning\nscore: {score}\nfragments: []\n"
        )

    def _base_label_response(self, user: str) -> str:
        members = re.findall(r"^- (.+)$", user, re.M)
        stems = [stem_of(m) for m in members]
        stems = [s for s in stems if s]
        if stems:
            name = max(set(stems), key=stems.count)
        else:
            name = f"Group {_hash_int('bl', user) % 1000}"
        return json.dumps({
            "summary": f"functions about: {name.lower()}",
            "name": name,
        })

    def _super_label_response(self, user: str) -> str:
        members = re.findall(r"^- ([^:]+):", user, re.M)
        code = _hash_int("sl", *sorted(members))
        return json.dumps({
            "description": f"higher-level theme over {len(members)} groups",
            "name": f"Theme {code % 1000}",
        })

    def _dedup_response(self, user: str) -> str:
        pairs = re.findall(r"^- ([^:]+): (.+)$", user, re.M)
        finals = [{"name": name.strip(), "description": desc.strip()} for name, desc in pairs]
        return json.dumps({"justification": "kept all distinct", "finals": finals})

    def _reassign_response(self, user: str) -> str:
        target = re.search(r"### Target Cluster\n\n- ([^:]+):", user).group(1).strip()
        numbered = re.findall(r"^(\d+)\. ", user, re.M)
        count = len(numbered)
        index = 1 + _hash_int("ra", target) % count
        return json.dumps({"justification": "best thematic fit", "cluster": index})


def transcript_for(requests_and_responses: list[tuple[CompletionRequest, str]]) -> Transcript:
    t = Transcript()
    for req, response in requests_and_responses:
        t.record_completion(req.fingerprint(), response)
    return t


def mock_backend_for(requests_and_responses, **kwargs) -> MockBackend:
    return MockBackend(transcript_for(requests_and_responses), **kwargs)


def dedent(text: str) -> str:
    return textwrap.dedent(text).lstrip("\n")
