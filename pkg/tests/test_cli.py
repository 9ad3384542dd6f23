import json
from pathlib import Path

import pytest

from fraglens.cli import main

from e2e_fixtures import compare_run_dirs, write_e2e_inputs


@pytest.fixture(scope="module")
def e2e_inputs(tmp_path_factory):
    target = tmp_path_factory.mktemp("e2e")
    return write_e2e_inputs(target)


def run_cli(*argv) -> int:
    return main([str(a) for a in argv])


class TestRunCommand:
    def test_full_pipeline_offline(self, e2e_inputs, tmp_path):
        dataset, criteria, transcript = e2e_inputs
        out = tmp_path / "run-a"
        code = run_cli(
            "run", "--dataset", dataset, "--criteria", criteria,
            "--mock-transcript", transcript, "--seed", 7, "--out", out,
        )
        assert code == 0
        for name in ("dataset.jsonl", "criteria.jsonl", "evaluations.jsonl",
                     "hierarchy.jsonl", "meta.json", "transcript.json"):
            assert (out / name).exists(), name
        hierarchy_lines = (out / "hierarchy.jsonl").read_text().splitlines()
        assert len(hierarchy_lines) == 2  # one per criterion

    def test_identical_invocations_byte_identical(self, e2e_inputs, tmp_path):
        dataset, criteria, transcript = e2e_inputs
        out_a, out_b = tmp_path / "run-a", tmp_path / "run-b"
        for out in (out_a, out_b):
            code = run_cli(
                "run", "--dataset", dataset, "--criteria", criteria,
                "--mock-transcript", transcript, "--seed", 7, "--out", out,
            )
            assert code == 0
        assert compare_run_dirs(out_a, out_b) == []

    def test_skip_clustering_omits_hierarchy(self, e2e_inputs, tmp_path):
        dataset, criteria, transcript = e2e_inputs
        out = tmp_path / "run-flat"
        code = run_cli(
            "run", "--dataset", dataset, "--criteria", criteria,
            "--mock-transcript", transcript, "--seed", 7, "--out", out,
            "--skip-clustering",
        )
        assert code == 0
        assert (out / "hierarchy.jsonl").read_text() == ""
        assert (out / "evaluations.jsonl").read_text().count("\n") == 40

    def test_missing_criteria_file_names_path(self, e2e_inputs, tmp_path, capsys):
        dataset, _, transcript = e2e_inputs
        code = run_cli(
            "run", "--dataset", dataset, "--criteria", tmp_path / "nope.json",
            "--mock-transcript", transcript, "--out", tmp_path / "x",
        )
        assert code == 2
        assert "nope.json" in capsys.readouterr().err

    def test_missing_dataset_nonzero_exit(self, e2e_inputs, tmp_path, capsys):
        _, criteria, _ = e2e_inputs
        code = run_cli("run", "--dataset", tmp_path / "missing.jsonl",
                       "--criteria", criteria, "--out", tmp_path / "x")
        assert code == 2
        assert "missing.jsonl" in capsys.readouterr().err


class TestReplayCommand:
    def test_replay_verifies_stored_run(self, e2e_inputs, tmp_path):
        dataset, criteria, transcript = e2e_inputs
        out = tmp_path / "run"
        assert run_cli(
            "run", "--dataset", dataset, "--criteria", criteria,
            "--mock-transcript", transcript, "--seed", 7, "--out", out,
        ) == 0
        assert run_cli("replay", "--run", out) == 0

    def test_replay_to_new_directory_is_identical(self, e2e_inputs, tmp_path):
        dataset, criteria, transcript = e2e_inputs
        original = tmp_path / "run"
        copy = tmp_path / "copy"
        assert run_cli(
            "run", "--dataset", dataset, "--criteria", criteria,
            "--mock-transcript", transcript, "--seed", 7, "--out", original,
        ) == 0
        assert run_cli("replay", "--run", original, "--out", copy) == 0
        assert compare_run_dirs(original, copy) == []

    def test_replay_without_transcript_fails(self, tmp_path, capsys):
        code = run_cli("replay", "--run", tmp_path)
        assert code != 0


class TestReportCommand:
    def test_extraction_report_against_self_gold(self, e2e_inputs, tmp_path, capsys):
        dataset, criteria, transcript = e2e_inputs
        out = tmp_path / "run"
        assert run_cli(
            "run", "--dataset", dataset, "--criteria", criteria,
            "--mock-transcript", transcript, "--seed", 7, "--out", out,
        ) == 0

        # gold = exactly what the run extracted -> all metrics 1.0
        evaluations = [json.loads(line) for line
                       in (out / "evaluations.jsonl").read_text().splitlines()]
        criteria_names = {"c-horror": "Horror Atmosphere", "c-pacing": "Pacing"}
        per_record: dict[str, list] = {}
        for e in evaluations:
            spans = [a["span"] for a in e["assessments"] if a["span"]]
            per_record.setdefault(e["record_id"], []).append(
                {"criterion": criteria_names[e["criterion_id"]], "spans": spans}
            )
        gold_path = tmp_path / "gold.jsonl"
        gold_path.write_text("\n".join(
            json.dumps({"id": rid, "annotations": anns})
            for rid, anns in per_record.items()
        ) + "\n", encoding="utf-8")

        report_path = tmp_path / "report.json"
        code = run_cli("report", "--ours", out, "--gold", gold_path, "--out", report_path)
        assert code == 0
        table = capsys.readouterr().out
        assert "1.000" in table
        report = json.loads(report_path.read_text())
        overall = report["extraction"]["methods"]["ours"]["overall"]
        assert overall == {"iou": 1.0, "precision": 1.0, "recall": 1.0, "f1": 1.0}

    def test_preference_pairs_table(self, e2e_inputs, tmp_path, capsys):
        dataset, criteria, transcript = e2e_inputs
        out = tmp_path / "run"
        assert run_cli(
            "run", "--dataset", dataset, "--criteria", criteria,
            "--mock-transcript", transcript, "--seed", 7, "--out", out,
        ) == 0
        evaluations = [json.loads(line) for line
                       in (out / "evaluations.jsonl").read_text().splitlines()]
        gold_path = tmp_path / "gold.jsonl"
        gold_path.write_text("\n".join(
            json.dumps({"id": e["record_id"], "annotations": [
                {"criterion": "Horror Atmosphere",
                 "spans": [a["span"] for a in e["assessments"] if a["span"]]}
            ]})
            for e in evaluations if e["criterion_id"] == "c-horror"
        ) + "\n", encoding="utf-8")
        pairs_path = tmp_path / "pairs.jsonl"
        pairs_path.write_text("\n".join([
            json.dumps({"method": "ours", "subset": "Chat",
                        "score_a": 0.9, "score_b": 0.2, "chosen": "A"}),
            json.dumps({"method": "ours", "subset": "Chat",
                        "score_a": 0.5, "score_b": 0.5, "chosen": "A"}),
        ]) + "\n", encoding="utf-8")
        code = run_cli("report", "--ours", out, "--gold", gold_path, "--pairs", pairs_path)
        assert code == 0
        stdout = capsys.readouterr().out
        assert "Chat" in stdout
        assert "0.500" in stdout  # the tie counted as incorrect
