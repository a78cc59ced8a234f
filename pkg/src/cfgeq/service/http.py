"""HTTP API over the engine.

Endpoints: POST /exercises, GET /exercises/{id},
POST /exercises/{id}/attempts, GET /exercises/{id}/clusters,
POST /clusters/{id}/classification, GET /healthz.  Attempt grammars travel as
the text format, never as AST JSON.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from ..grammar import GrammarError, render_grammar
from .store import ServiceStore, explanation_to_json


class ExerciseIn(BaseModel):
    id: str
    target: str
    witness: Optional[list[str]] = None
    description: str = ""


class AttemptIn(BaseModel):
    grammar: str


class ClassificationIn(BaseModel):
    verdict: str
    rationale: str


def create_app(store: ServiceStore) -> FastAPI:
    app = FastAPI(title="cfgeq", version="0.1.0")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "exercises": len(store.exercises)}

    @app.post("/exercises", status_code=201)
    def create_exercise(payload: ExerciseIn):
        try:
            exercise = store.create_exercise(
                payload.id, payload.target, payload.witness, payload.description
            )
        except KeyError as e:
            raise HTTPException(409, detail=str(e))
        except (GrammarError, ValueError) as e:
            raise HTTPException(422, detail=str(e))
        return {
            "id": exercise.id,
            "target": render_grammar(exercise.target),
            "witness": list(exercise.witness.words) if exercise.witness else None,
            "description": exercise.description,
        }

    @app.get("/exercises/{exercise_id}")
    def get_exercise(exercise_id: str):
        exercise = store.exercises.get(exercise_id)
        if exercise is None:
            raise HTTPException(404, detail=f"unknown exercise {exercise_id!r}")
        return {
            "id": exercise.id,
            "target": render_grammar(exercise.target),
            "witness": list(exercise.witness.words) if exercise.witness else None,
            "description": exercise.description,
        }

    @app.post("/exercises/{exercise_id}/attempts")
    def submit_attempt(exercise_id: str, payload: AttemptIn):
        if exercise_id not in store.exercises:
            raise HTTPException(404, detail=f"unknown exercise {exercise_id!r}")
        record = store.submit_attempt(exercise_id, payload.grammar)
        if record.error is not None:
            raise HTTPException(422, detail=record.error)
        assert record.verdict is not None
        return {
            "verdict": record.verdict.outcome,
            "method": record.verdict.method,
            "cache_tier": record.tier,
            "explanation": explanation_to_json(record.explanation),
        }

    @app.get("/exercises/{exercise_id}/clusters")
    def get_clusters(exercise_id: str):
        if exercise_id not in store.exercises:
            raise HTTPException(404, detail=f"unknown exercise {exercise_id!r}")
        return {"clusters": store.clusters(exercise_id)}

    @app.post("/clusters/{cluster_id}/classification")
    def classify_cluster(cluster_id: str, payload: ClassificationIn):
        try:
            written = store.classify_cluster(cluster_id, payload.verdict, payload.rationale)
        except KeyError as e:
            raise HTTPException(404, detail=str(e))
        except ValueError as e:
            raise HTTPException(422, detail=str(e))
        return {"cached_keys": written}

    return app
