"""Exercise and attempt management with file persistence.

A data directory holds exercises.jsonl (one exercise per line), cache-<id>.log
(the append-only verdict cache per exercise, replayable), and attempts.jsonl.
Everything also works fully in memory when no directory is given.
"""

from __future__ import annotations

import base64
import csv
import io
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Optional

from .. import engine
from ..bounded import BoundednessWitness
from ..canon import canonical_key
from ..budget import Budget, BudgetExceeded
from ..grammar import Grammar, GrammarError, parse_grammar, render_grammar
from ..transform import pipeline as pipeline_mod

Tier = Literal["none", "canon", "simplified", "normalized"]


def load_config(path: Optional[Path] = None) -> engine.EngineConfig:
    """Single config file plus CFGEQ_* environment overrides."""
    config = engine.EngineConfig()
    data = {}
    if path is not None:
        data = json.loads(Path(path).read_text("utf-8"))
    mapping = {
        "max_counterexample_len": int,
        "normalization_budget_ms": float,
        "set_notation_budget_ms": float,
        "bounded_budget_ms": float,
        "parikh_budget_ms": float,
        "use_cache": bool,
    }
    for name, cast in mapping.items():
        if name in data:
            setattr(config, name, cast(data[name]))
        env = os.environ.get(f"CFGEQ_{name.upper()}")
        if env is not None:
            setattr(config, name, cast(json.loads(env)) if cast is bool else cast(env))
    return config


@dataclass
class Exercise:
    id: str
    target: Grammar
    witness: Optional[BoundednessWitness]
    description: str = ""
    pipeline_name: str = "default"


@dataclass
class AttemptRecord:
    exercise_id: str
    text: str
    grammar: Optional[Grammar]
    verdict: Optional[engine.Verdict]
    explanation: Optional[engine.Explanation]
    tier: Tier
    submitted_at: float = field(default_factory=time.time)
    error: Optional[str] = None


def explanation_to_json(e: Optional[engine.Explanation]) -> Optional[dict]:
    if e is None:
        return None
    out: dict = {}
    if e.counterexample:
        word, side = e.counterexample
        out["counterexample"] = {"word": word, "side": side}
    if e.structural_counterexample:
        word, witness = e.structural_counterexample
        out["structural_counterexample"] = {"word": word, "witness": list(witness)}
    if e.parikh_difference:
        rendered, valuation, concise = e.parikh_difference
        out["parikh_difference"] = {
            "formula": rendered,
            "valuation": dict(valuation),
            "concise": concise,
        }
    if e.attempt_set_notation:
        sn, concise = e.attempt_set_notation
        out["attempt_set_notation"] = {"rendered": sn.rendered, "concise": concise}
    if e.target_set_notation:
        out["target_set_notation"] = {"rendered": e.target_set_notation.rendered}
    if e.bug_fix:
        name, fixed = e.bug_fix
        out["bug_fix"] = {"transformation": name, "grammar": render_grammar(fixed)}
    return out


class ServiceStore:
    def __init__(self, data_dir: Optional[Path] = None, config: Optional[engine.EngineConfig] = None):
        self.data_dir = Path(data_dir) if data_dir else None
        self.config = config or engine.EngineConfig()
        self.exercises: dict[str, Exercise] = {}
        self.contexts: dict[str, engine.ExerciseContext] = {}
        self.attempts: list[AttemptRecord] = []
        self.registry = pipeline_mod.default_registry()
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            manifest = self.data_dir / "exercises.jsonl"
            if manifest.exists():
                for line in manifest.read_text("utf-8").splitlines():
                    if line.strip():
                        self._register(self._exercise_from_json(json.loads(line)), persist=False)

    # ------------------------------------------------------------ exercises

    def _exercise_from_json(self, data: dict) -> Exercise:
        witness = BoundednessWitness(tuple(data["witness"])) if data.get("witness") else None
        return Exercise(
            id=data["id"],
            target=parse_grammar(data["target"]),
            witness=witness,
            description=data.get("description", ""),
        )

    def _register(self, exercise: Exercise, persist: bool = True):
        self.exercises[exercise.id] = exercise
        cache_path = self.data_dir / f"cache-{exercise.id}.log" if self.data_dir else None
        cache = engine.VerdictCache(cache_path)
        self.contexts[exercise.id] = engine.make_exercise_context(
            exercise.target,
            exercise.witness,
            config=self.config,
            cache=cache,
            registry=self.registry,
        )
        if exercise.witness is None:
            exercise.witness = self.contexts[exercise.id].witness
        if persist and self.data_dir is not None:
            with (self.data_dir / "exercises.jsonl").open("a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {
                            "id": exercise.id,
                            "target": render_grammar(exercise.target),
                            "witness": list(exercise.witness.words) if exercise.witness else None,
                            "description": exercise.description,
                        }
                    )
                    + "\n"
                )

    def create_exercise(
        self,
        exercise_id: str,
        target_text: str,
        witness_words: Optional[Iterable[str]] = None,
        description: str = "",
    ) -> Exercise:
        if exercise_id in self.exercises:
            raise KeyError(f"exercise {exercise_id!r} already exists")
        target = parse_grammar(target_text)
        witness = BoundednessWitness(tuple(witness_words)) if witness_words else None
        exercise = Exercise(exercise_id, target, witness, description)
        self._register(exercise)
        return exercise

    def context(self, exercise_id: str) -> engine.ExerciseContext:
        if exercise_id not in self.contexts:
            raise KeyError(f"unknown exercise {exercise_id!r}")
        return self.contexts[exercise_id]

    # -------------------------------------------------------------- attempts

    def _cache_tier(self, ctx: engine.ExerciseContext, attempt: Grammar) -> Tier:
        key = canonical_key(attempt).bytes
        if ctx.cache.lookup(key) is not None:
            return "canon"
        try:
            simplified = pipeline_mod.run_pipeline(ctx.basic_pipeline, attempt, ctx.registry, Budget(ms=2000))
            if any(ctx.cache.lookup(k) for k in sorted(simplified.keys)):
                return "simplified"
        except BudgetExceeded:
            pass
        return "none"

    def submit_attempt(self, exercise_id: str, text: str, explain: bool = True) -> AttemptRecord:
        ctx = self.context(exercise_id)
        try:
            attempt = parse_grammar(text)
        except GrammarError as e:
            record = AttemptRecord(exercise_id, text, None, None, None, "none", error=str(e))
            self.attempts.append(record)
            return record
        tier: Tier = self._cache_tier(ctx, attempt) if ctx.config.use_cache else "none"
        verdict = engine.classify(attempt, ctx)
        if tier == "none" and verdict.method == "cache":
            tier = "normalized"
        explanation = None
        if explain and verdict.outcome == "not_equivalent":
            explanation = engine.explain(attempt, ctx.target, verdict, ctx)
        record = AttemptRecord(exercise_id, text, attempt, verdict, explanation, tier)
        self.attempts.append(record)
        if self.data_dir is not None:
            with (self.data_dir / "attempts.jsonl").open("a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {
                            "exercise": exercise_id,
                            "grammar": text,
                            "outcome": verdict.outcome,
                            "method": verdict.method,
                            "tier": tier,
                        }
                    )
                    + "\n"
                )
        return record

    # -------------------------------------------------------------- clusters

    def clusters(self, exercise_id: str) -> list[dict]:
        ctx = self.context(exercise_id)
        grammars: dict[bytes, Grammar] = {}
        for record in self.attempts:
            if record.exercise_id == exercise_id and record.grammar is not None:
                grammars.setdefault(canonical_key(record.grammar).bytes, record.grammar)
        clusters = engine.cluster_attempts(list(grammars.values()), ctx.target, ctx)
        out = []
        for cluster in clusters:
            rep_key = canonical_key(cluster.representative).bytes
            out.append(
                {
                    "id": f"{exercise_id}:{base64.urlsafe_b64encode(rep_key).decode()}",
                    "kind": cluster.kind,
                    "representative": render_grammar(cluster.representative),
                    "member_count": len(cluster.member_keys),
                    "member_keys": sorted(base64.urlsafe_b64encode(k).decode() for k in cluster.member_keys),
                }
            )
        return out

    def classify_cluster(self, cluster_id: str, verdict_value: str, rationale: str) -> int:
        """Manual classification: a manual-origin cache entry per member key;
        returns the number of keys written."""
        if verdict_value not in ("equivalent", "not_equivalent"):
            raise ValueError("manual classification must be 'equivalent' or 'not_equivalent'")
        if not rationale.strip():
            raise ValueError("manual classification requires a rationale")
        exercise_id, rep_b64 = cluster_id.rsplit(":", 1)
        ctx = self.context(exercise_id)
        for cluster in self.clusters(exercise_id):
            if cluster["id"] == cluster_id:
                evidence = engine.Explanation() if verdict_value == "not_equivalent" else None
                verdict = engine.Verdict(verdict_value, "manual", evidence)
                keys = [base64.urlsafe_b64decode(k) for k in cluster["member_keys"]]
                keys.append(base64.urlsafe_b64decode(rep_b64))
                for key in sorted(set(keys)):
                    ctx.cache.insert(engine.CacheEntry(key, verdict, "manual"))
                return len(set(keys))
        raise KeyError(f"unknown cluster {cluster_id!r}")

    # ---------------------------------------------------------------- ingest

    def ingest(self, path: Path, fmt: str = "jsonl", dedupe: bool = False) -> tuple[list[tuple[str, str]], list[str]]:
        """Parse an attempts file into (exercise, grammar text) rows; row-level
        errors are collected, not raised."""
        rows: list[tuple[str, str]] = []
        errors: list[str] = []
        text = Path(path).read_text("utf-8")
        if fmt == "jsonl":
            for lineno, line in enumerate(text.splitlines(), start=1):
                if not line.strip():
                    continue
                try:
                    data = json.loads(line)
                    rows.append((data["exercise"], data["grammar"]))
                except (json.JSONDecodeError, KeyError) as e:
                    errors.append(f"line {lineno}: {e}")
        elif fmt == "csv":
            reader = csv.DictReader(io.StringIO(text))
            for lineno, row in enumerate(reader, start=2):
                if row.get("exercise") and row.get("grammar"):
                    rows.append((row["exercise"], row["grammar"]))
                else:
                    errors.append(f"line {lineno}: missing exercise/grammar column")
        else:
            raise ValueError(f"unknown format {fmt!r}")
        if dedupe:
            seen: set[tuple[str, bytes]] = set()
            unique: list[tuple[str, str]] = []
            for exercise_id, grammar_text in rows:
                try:
                    key = (exercise_id, canonical_key(parse_grammar(grammar_text)).bytes)
                except GrammarError as e:
                    errors.append(f"{exercise_id}: {e}")
                    continue
                if key not in seen:
                    seen.add(key)
                    unique.append((exercise_id, grammar_text))
            rows = unique
        return rows, errors
