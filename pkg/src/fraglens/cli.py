"""Command line interface: run, report, serve, replay."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .benchmark import (
    AlignmentError,
    extraction_report,
    extraction_table,
    load_gold,
    preference_report,
    preference_table,
    spans_from_run,
)
from .config import load_config, build_gateway
from .dataset import DatasetError, load_criteria, load_dataset
from .gateway import Transcript
from .pipeline import run_pipeline
from .store import load_run, load_transcript, save_run

logger = logging.getLogger(__name__)


class CliError(RuntimeError):
    def __init__(self, message: str, code: int = 1) -> None:
        super().__init__(message)
        self.code = code


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise CliError(f"{what} not found: {p}", code=2)
    return p


def cmd_run(args: argparse.Namespace) -> int:
    dataset = load_dataset(_require_file(args.dataset, "dataset file"))
    criteria = load_criteria(_require_file(args.criteria, "criteria file"))
    config = load_config(_require_file(args.config, "config file") if args.config else None)
    if args.seed is not None:
        config.seed = args.seed

    replay = None
    if args.mock_transcript:
        replay = Transcript.load(_require_file(args.mock_transcript, "transcript file"))
    recorded = Transcript()
    gateway = build_gateway(config, transcript=replay, record_to=recorded)

    run = run_pipeline(
        dataset, criteria, gateway, config.seed,
        skip_clustering=args.skip_clustering,
        parallelism=config.parallelism,
        label_language=config.label_language,
        min_cluster_size=config.min_cluster_size,
        dedup_target=config.dedup_target,
    )
    out_dir = Path(args.out) if args.out else Path("runs") / run.run_id
    save_run(out_dir, dataset, run, recorded)
    print(f"run {run.run_id} written to {out_dir}")
    print(f"  records: {len(dataset.records)}  criteria: {len(run.criteria)}  "
          f"evaluations: {len(run.evaluations)}  hierarchies: {len(run.hierarchies)}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    source = _require_file(args.run, "run directory")
    dataset, original = load_run(source)
    transcript = load_transcript(source)
    if transcript is None:
        raise CliError(f"{source} has no transcript.json to replay", code=2)

    config = load_config(_require_file(args.config, "config file") if args.config else None)
    gateway = build_gateway(config, transcript=transcript)
    run = run_pipeline(
        dataset, original.criteria, gateway, original.seed,
        skip_clustering=not original.hierarchies,
        min_cluster_size=config.min_cluster_size,
        dedup_target=config.dedup_target,
    )

    if args.out:
        save_run(Path(args.out), dataset, run, transcript)
        print(f"replayed run written to {args.out}")
        return 0

    mismatches = []
    if run.run_id != original.run_id:
        mismatches.append("run_id")
    if run.evaluations != original.evaluations:
        mismatches.append("evaluations")
    if run.assessments != original.assessments:
        mismatches.append("assessments")
    if set(run.hierarchies) != set(original.hierarchies) or any(
        run.hierarchies[c].to_doc() != original.hierarchies[c].to_doc()
        for c in run.hierarchies
    ):
        mismatches.append("hierarchy")
    if mismatches:
        raise CliError(f"replay diverged from stored run in: {', '.join(mismatches)}")
    print(f"replay of {original.run_id} matches the stored run")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    gold = load_gold(_require_file(args.gold, "gold annotation file"))
    methods = {}
    texts = {}
    for label, run_path in (("ours", args.ours), ("baseline", args.baseline)):
        if run_path is None:
            continue
        dataset, run = load_run(_require_file(run_path, f"{label} run directory"))
        methods[label] = spans_from_run(run)
        texts.update({r.record_id: r.output for r in dataset.records})
    if not methods:
        raise CliError("at least --ours is required", code=2)

    try:
        report = extraction_report(methods, gold, texts)
    except AlignmentError as exc:
        raise CliError(str(exc))
    output = {"extraction": report}
    print(extraction_table(report))

    if args.pairs:
        pairs_path = _require_file(args.pairs, "preference pairs file")
        by_method: dict[str, dict[str, list]] = {}
        for line in pairs_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            doc = json.loads(line)
            by_method.setdefault(doc["method"], {}).setdefault(
                doc.get("subset", "all"), []
            ).append((float(doc["score_a"]), float(doc["score_b"]), doc["chosen"]))
        pref = preference_report(by_method)
        output["preference"] = pref
        print()
        print(preference_table(pref))

    if args.out:
        Path(args.out).write_text(
            json.dumps(output, indent=2, sort_keys=True), encoding="utf-8"
        )
        print(f"\nreport written to {args.out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    config = load_config(_require_file(args.config, "config file") if args.config else None)
    if args.port:
        config.port = args.port
    if args.host:
        config.host = args.host
    serve(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraglens",
        description="Fragment-level evaluation of LLM outputs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a dataset and build the function map")
    run.add_argument("--dataset", required=True, help="JSONL file of {input, output, id?}")
    run.add_argument("--criteria", required=True, help="criteria JSON/JSONL file")
    run.add_argument("--config", help="YAML config file")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--mock-transcript", help="replay completions from this transcript")
    run.add_argument("--out", help="run directory to write (default runs/<run_id>)")
    run.add_argument("--skip-clustering", action="store_true",
                     help="stop after evaluation; no hierarchy files")
    run.set_defaults(fn=cmd_run)

    replay = sub.add_parser("replay", help="re-execute a stored run from its transcript")
    replay.add_argument("--run", required=True, help="existing run directory")
    replay.add_argument("--out", help="write the replayed run here instead of verifying")
    replay.add_argument("--config", help="YAML config file")
    replay.set_defaults(fn=cmd_replay)

    report = sub.add_parser("report", help="benchmark extraction against gold annotations")
    report.add_argument("--ours", required=True, help="fragment-level run directory")
    report.add_argument("--baseline", help="comparator run directory")
    report.add_argument("--gold", required=True, help="gold annotations JSONL")
    report.add_argument("--pairs", help="preference pairs JSONL for pairwise accuracy")
    report.add_argument("--out", help="write the machine-readable report here")
    report.set_defaults(fn=cmd_report)

    serve_cmd = sub.add_parser("serve", help="start the HTTP service")
    serve_cmd.add_argument("--config", help="YAML config file")
    serve_cmd.add_argument("--host", default=None)
    serve_cmd.add_argument("--port", type=int, default=None)
    serve_cmd.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        logger.exception("command failed")
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
