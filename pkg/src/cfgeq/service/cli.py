"""Command-line interface.

Exit codes for `decide`: 0 equivalent, 1 not equivalent, 2 undecided,
3 input error.
"""

from __future__ import annotations

import json
import sys
from collections import Counter
from pathlib import Path

import click

from .. import bounded, engine
from ..budget import BudgetExceeded
from ..canon import canonical_key
from ..grammar import GrammarError, parse_grammar, render_grammar
from ..transform import pipeline as pipeline_mod
from .store import ServiceStore, explanation_to_json, load_config


def _read_grammar(path: str):
    return parse_grammar(Path(path).read_text("utf-8"))


def _witness(option: str | None):
    if option is None:
        return None
    return bounded.BoundednessWitness(tuple(w for w in option.split(",") if w))


def _config(budget_ms: float | None, cache: bool, config_path: str | None) -> engine.EngineConfig:
    cfg = load_config(Path(config_path) if config_path else None)
    if budget_ms is not None:
        cfg.normalization_budget_ms = budget_ms
        cfg.set_notation_budget_ms = budget_ms
        cfg.bounded_budget_ms = budget_ms
        cfg.parikh_budget_ms = budget_ms
    cfg.use_cache = cache
    return cfg


def _registry(pipeline_path: str | None):
    registry = pipeline_mod.default_registry()
    if pipeline_path is None:
        return registry, None
    pipe = pipeline_mod.parse_pipeline(Path(pipeline_path).read_text("utf-8"), registry)
    return registry, pipe


@click.group()
def main():
    """Decide and explain (in)equivalence of context-free grammars."""


@main.command()
@click.argument("target_file")
@click.argument("attempt_file")
@click.option("--witness", default=None, help="comma-separated witness words, e.g. a,b")
@click.option("--budget-ms", type=float, default=None)
@click.option("--cache/--no-cache", default=True)
@click.option("--pipeline", "pipeline_path", default=None, help="custom pipeline file")
@click.option("--config", "config_path", default=None)
def decide(target_file, attempt_file, witness, budget_ms, cache, pipeline_path, config_path):
    """Classify ATTEMPT_FILE against TARGET_FILE and print the explanation."""
    try:
        target = _read_grammar(target_file)
        attempt = _read_grammar(attempt_file)
        registry, custom_pipe = _registry(pipeline_path)
        ctx = engine.make_exercise_context(
            target, _witness(witness), config=_config(budget_ms, cache, config_path), registry=registry
        )
        if custom_pipe is not None:
            ctx.pipeline = custom_pipe
    except (GrammarError, OSError, ValueError) as e:
        click.echo(f"input error: {e}", err=True)
        sys.exit(3)
    verdict = engine.classify(attempt, ctx)
    click.echo(f"verdict: {verdict.outcome}")
    click.echo(f"method: {verdict.method}")
    if verdict.outcome == "not_equivalent":
        explanation = engine.explain(attempt, target, verdict, ctx)
        for key, value in (explanation_to_json(explanation) or {}).items():
            click.echo(f"{key}: {json.dumps(value, ensure_ascii=False)}")
    sys.exit({"equivalent": 0, "not_equivalent": 1, "undecided": 2}[verdict.outcome])


@main.command()
@click.argument("exercises_file")
@click.argument("attempts_file")
@click.option("--output", default=None, help="write the JSON report here as well")
@click.option("--format", "fmt", type=click.Choice(["jsonl", "csv"]), default="jsonl")
@click.option("--cache/--no-cache", default=True)
@click.option("--data-dir", default=None, help="persist caches here; re-runs start warm")
@click.option("--config", "config_path", default=None)
def batch(exercises_file, attempts_file, output, fmt, cache, data_dir, config_path):
    """Evaluate a batch of attempts; print per-exercise method statistics."""
    store = ServiceStore(Path(data_dir) if data_dir else None, config=_config(None, cache, config_path))
    manifest = json.loads(Path(exercises_file).read_text("utf-8"))
    for entry in manifest:
        if entry["id"] not in store.exercises:
            store.create_exercise(
                entry["id"], entry["target"], entry.get("witness"), entry.get("description", "")
            )
    rows, errors = store.ingest(Path(attempts_file), fmt=fmt)
    report: dict = {"exercises": {}, "errors": errors}
    for exercise_id, grammar_text in rows:
        if exercise_id not in store.exercises:
            errors.append(f"unknown exercise {exercise_id!r}")
            continue
        record = store.submit_attempt(exercise_id, grammar_text, explain=True)
        stats = report["exercises"].setdefault(
            exercise_id,
            {
                "attempts": 0,
                "parse_errors": 0,
                "by_outcome": Counter(),
                "by_method": Counter(),
                "cache_tiers": Counter(),
                "counterexample_lengths": Counter(),
            },
        )
        stats["attempts"] += 1
        if record.error is not None:
            stats["parse_errors"] += 1
            continue
        assert record.verdict is not None
        stats["by_outcome"][record.verdict.outcome] += 1
        stats["by_method"][record.verdict.method] += 1
        stats["cache_tiers"][record.tier] += 1
        evidence = record.explanation or record.verdict.evidence
        if evidence and evidence.counterexample:
            stats["counterexample_lengths"][len(evidence.counterexample[0])] += 1
    for exercise_id, stats in sorted(report["exercises"].items()):
        clusters = store.clusters(exercise_id)
        stats["clusters"] = Counter(c["kind"] for c in clusters)
        click.echo(f"exercise {exercise_id}: {stats['attempts']} attempts")
        for label in ("by_outcome", "by_method", "cache_tiers", "clusters"):
            pairs = ", ".join(f"{k}={v}" for k, v in sorted(stats[label].items()))
            click.echo(f"  {label}: {pairs or '-'}")
        histogram = ", ".join(
            f"{length}:{count}" for length, count in sorted(stats["counterexample_lengths"].items())
        )
        click.echo(f"  counterexample lengths: {histogram or '-'}")
        for label in ("by_outcome", "by_method", "cache_tiers", "clusters", "counterexample_lengths"):
            stats[label] = dict(stats[label])
    if errors:
        click.echo(f"{len(errors)} record errors", err=True)
        for e in errors:
            click.echo(f"  {e}", err=True)
    if output:
        Path(output).write_text(json.dumps(report, indent=2, sort_keys=True), "utf-8")


@main.command()
@click.argument("grammar_file")
def canon(grammar_file):
    """Print the canonical key of a grammar."""
    try:
        g = _read_grammar(grammar_file)
    except (GrammarError, OSError) as e:
        click.echo(f"input error: {e}", err=True)
        sys.exit(3)
    click.echo(canonical_key(g).bytes.decode())


@main.command()
@click.argument("grammar_file")
@click.option("--pipeline", "pipeline_path", default=None)
@click.option("--budget-ms", type=float, default=10_000)
def normalize(grammar_file, pipeline_path, budget_ms):
    """Print the normal set N(G) of a grammar."""
    try:
        g = _read_grammar(grammar_file)
        registry, pipe = _registry(pipeline_path)
        if pipe is None:
            pipe, registry = pipeline_mod.normalization_pipeline(registry)
    except (GrammarError, OSError) as e:
        click.echo(f"input error: {e}", err=True)
        sys.exit(3)
    from ..budget import Budget

    result = pipeline_mod.run_pipeline(pipe, g, registry, Budget(ms=budget_ms))
    if result.partial:
        click.echo("// warning: budget exhausted, the set may be partial", err=True)
    for grammar in result.grammars:
        click.echo(render_grammar(grammar) or "// empty grammar (no productions)")
        click.echo("")


@main.command()
@click.argument("grammar_file")
@click.option("--witness", default=None, help="comma-separated witness words; discovered when omitted")
@click.option("--budget-ms", type=float, default=10_000)
def setnotation(grammar_file, witness, budget_ms):
    """Print a set-notation description of the grammar's language."""
    try:
        g = _read_grammar(grammar_file)
    except (GrammarError, OSError) as e:
        click.echo(f"input error: {e}", err=True)
        sys.exit(3)
    w = _witness(witness) or bounded.discover_witness(g)
    if w is None:
        click.echo("no boundedness witness found; the language may not be bounded", err=True)
        sys.exit(2)
    check = bounded.test_bounded_by_witness(g, w)
    if check.outcome != "bounded":
        click.echo(f"not bounded by {list(w.words)}: counterexample {check.counterexample!r}", err=True)
        sys.exit(2)
    from ..budget import Budget

    try:
        sn = bounded.set_notation(g, w, Budget(ms=budget_ms))
    except BudgetExceeded:
        click.echo("timeout while computing the set notation", err=True)
        sys.exit(2)
    click.echo(sn.rendered)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
@click.option("--data-dir", default=None)
@click.option("--config", "config_path", default=None)
def serve(host, port, data_dir, config_path):
    """Run the HTTP service."""
    import uvicorn

    from .http import create_app

    store = ServiceStore(Path(data_dir) if data_dir else None, config=load_config(Path(config_path) if config_path else None))
    uvicorn.run(create_app(store), host=host, port=port)


@main.command()
@click.argument("attempts_file")
@click.option("--format", "fmt", type=click.Choice(["jsonl", "csv"]), default="jsonl")
@click.option("--dedup/--no-dedup", default=False, help="collapse canonically identical attempts")
@click.option("--data-dir", default=None, required=True)
def ingest(attempts_file, fmt, dedup, data_dir):
    """Parse an attempts file and queue it in the data directory."""
    store = ServiceStore(Path(data_dir))
    rows, errors = store.ingest(Path(attempts_file), fmt=fmt, dedupe=dedup)
    queue = Path(data_dir) / "queue.jsonl"
    with queue.open("a", encoding="utf-8") as fh:
        for exercise_id, grammar_text in rows:
            fh.write(json.dumps({"exercise": exercise_id, "grammar": grammar_text}) + "\n")
    click.echo(f"queued {len(rows)} attempts to {queue}")
    if errors:
        click.echo(f"{len(errors)} rows failed:", err=True)
        for e in errors:
            click.echo(f"  {e}", err=True)


if __name__ == "__main__":
    main()
