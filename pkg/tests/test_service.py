import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from cfgeq.engine import EngineConfig, classify, make_exercise_context
from cfgeq.grammar import parse_grammar
from cfgeq.service.cli import main as cli_main
from cfgeq.service.http import create_app
from cfgeq.service.store import ServiceStore, load_config

INTRO_TARGET = "S -> a S b | a b b b"
INTRO_ATTEMPT = "S -> a S b | a b b"


@pytest.fixture()
def store():
    return ServiceStore()


@pytest.fixture()
def client(store):
    s = store
    s.create_exercise("intro", INTRO_TARGET, ["a", "b"], "the running example")
    return TestClient(create_app(s))


# -------------------------------------------------------------------- store


def test_store_submit_and_tiers(store):
    store.create_exercise("intro", INTRO_TARGET, ["a", "b"])
    first = store.submit_attempt("intro", INTRO_ATTEMPT)
    assert first.verdict.outcome == "not_equivalent"
    assert first.tier == "none"
    again = store.submit_attempt("intro", "X -> a X b | a b b")
    assert again.verdict.method == "cache"
    assert again.tier == "canon"


def test_store_parse_error_records(store):
    store.create_exercise("intro", INTRO_TARGET, ["a", "b"])
    record = store.submit_attempt("intro", "S -> -> b")
    assert record.error is not None and record.verdict is None


def test_store_persistence_replay(tmp_path):
    first = ServiceStore(tmp_path)
    first.create_exercise("intro", INTRO_TARGET, ["a", "b"])
    first.submit_attempt("intro", INTRO_ATTEMPT)
    entries = dict(first.contexts["intro"].cache.entries)

    second = ServiceStore(tmp_path)
    assert "intro" in second.exercises
    replayed = second.contexts["intro"].cache.entries
    assert set(replayed) == set(entries)
    assert all(replayed[k].verdict.outcome == entries[k].verdict.outcome for k in entries)
    hit = second.submit_attempt("intro", INTRO_ATTEMPT)
    assert hit.tier == "canon" and hit.verdict.method == "cache"


def test_ingest_jsonl_and_csv(tmp_path, store):
    jsonl = tmp_path / "a.jsonl"
    jsonl.write_text(
        json.dumps({"exercise": "e", "grammar": "S -> a"})
        + "\n"
        + json.dumps({"exercise": "e", "grammar": "T -> a"})
        + "\nnot json\n",
        "utf-8",
    )
    rows, errors = store.ingest(jsonl, fmt="jsonl")
    assert len(rows) == 2 and len(errors) == 1
    rows_dedup, _ = store.ingest(jsonl, fmt="jsonl", dedupe=True)
    assert len(rows_dedup) == 1  # S -> a and T -> a share one canonical key

    csv_path = tmp_path / "a.csv"
    csv_path.write_text('exercise,grammar\ne,"S -> a S b | a b"\n', "utf-8")
    rows_csv, errors_csv = store.ingest(csv_path, fmt="csv")
    assert rows_csv == [("e", "S -> a S b | a b")] and not errors_csv


def test_load_config_overrides(tmp_path, monkeypatch):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"max_counterexample_len": 9}), "utf-8")
    config = load_config(path)
    assert config.max_counterexample_len == 9
    monkeypatch.setenv("CFGEQ_MAX_COUNTEREXAMPLE_LEN", "7")
    assert load_config(path).max_counterexample_len == 7


# --------------------------------------------------------------------- HTTP


def test_http_flow(client):
    assert client.get("/healthz").json()["status"] == "ok"
    exercise = client.get("/exercises/intro").json()
    assert exercise["witness"] == ["a", "b"]
    assert client.get("/exercises/missing").status_code == 404

    response = client.post("/exercises/intro/attempts", json={"grammar": INTRO_ATTEMPT})
    body = response.json()
    assert body["verdict"] == "not_equivalent"
    assert body["explanation"]["counterexample"]["word"] == "abb"
    assert body["explanation"]["attempt_set_notation"]["concise"] is True

    assert client.post("/exercises/none/attempts", json={"grammar": "S -> a"}).status_code == 404
    assert client.post("/exercises/intro/attempts", json={"grammar": "S ->"}).status_code == 422


def test_http_duplicate_exercise(client):
    assert (
        client.post("/exercises", json={"id": "intro", "target": "S -> a"}).status_code == 409
    )


def test_http_cluster_review_flow(client):
    # an equivalent attempt no method can prove: the palindrome language in a
    # two-step recursion (unbounded, equal Parikh image, no counterexample,
    # normalization cannot bridge the recursion granularity)
    hard = "S -> a a S a a | a b S b a | b a S a b | b b S b b | a c a | b c b | c"
    client.post("/exercises", json={"id": "hard", "target": "S -> a S a | b S b | c"})
    response = client.post("/exercises/hard/attempts", json={"grammar": hard})
    assert response.json()["verdict"] == "undecided"
    clusters = client.get("/exercises/hard/clusters").json()["clusters"]
    unrecognized = [c for c in clusters if c["kind"] == "unrecognized"]
    assert len(unrecognized) == 1
    cluster_id = unrecognized[0]["id"]

    missing_rationale = client.post(
        f"/clusters/{cluster_id}/classification", json={"verdict": "not_equivalent", "rationale": " "}
    )
    assert missing_rationale.status_code == 422
    ok = client.post(
        f"/clusters/{cluster_id}/classification",
        json={"verdict": "equivalent", "rationale": "two-step palindrome recursion"},
    )
    assert ok.status_code == 200

    # identical-canon resubmission now decides via the cache
    again = client.post("/exercises/hard/attempts", json={"grammar": hard})
    assert again.json()["verdict"] == "equivalent"
    assert again.json()["method"] == "cache"
    refreshed = client.get("/exercises/hard/clusters").json()["clusters"]
    assert [c for c in refreshed if c["kind"] == "unrecognized"] == []


# ---------------------------------------------------------------------- CLI


def test_cli_decide_exit_codes(tmp_path):
    runner = CliRunner()
    target = tmp_path / "target.g"
    attempt = tmp_path / "attempt.g"
    target.write_text(INTRO_TARGET, "utf-8")
    attempt.write_text(INTRO_ATTEMPT, "utf-8")
    result = runner.invoke(cli_main, ["decide", str(target), str(attempt), "--witness", "a,b"])
    assert result.exit_code == 1
    assert "abb" in result.output

    same = runner.invoke(cli_main, ["decide", str(target), str(target)])
    assert same.exit_code == 0

    bad = tmp_path / "bad.g"
    bad.write_text("S -> ->", "utf-8")
    assert runner.invoke(cli_main, ["decide", str(target), str(bad)]).exit_code == 3


def test_cli_matches_library_verdicts(tmp_path):
    runner = CliRunner()
    target = tmp_path / "target.g"
    attempt = tmp_path / "attempt.g"
    target.write_text(INTRO_TARGET, "utf-8")
    attempt.write_text(INTRO_ATTEMPT, "utf-8")
    result = runner.invoke(cli_main, ["decide", str(target), str(attempt)])
    ctx = make_exercise_context(parse_grammar(INTRO_TARGET), config=EngineConfig())
    verdict = classify(parse_grammar(INTRO_ATTEMPT), ctx)
    assert f"verdict: {verdict.outcome}" in result.output


def test_cli_canon_normalize_setnotation(tmp_path):
    runner = CliRunner()
    path = tmp_path / "g.g"
    path.write_text("S -> a S b | a b b", "utf-8")
    canon_out = runner.invoke(cli_main, ["canon", str(path)])
    assert canon_out.output.startswith("start N0")
    norm_out = runner.invoke(cli_main, ["normalize", str(path)])
    assert "->" in norm_out.output
    sn_out = runner.invoke(cli_main, ["setnotation", str(path), "--witness", "a,b"])
    assert "{a^i b^{i + 1}" in sn_out.output


def test_cli_batch_report(tmp_path):
    runner = CliRunner()
    exercises = tmp_path / "exercises.json"
    exercises.write_text(
        json.dumps([{"id": "intro", "target": INTRO_TARGET, "witness": ["a", "b"]}]), "utf-8"
    )
    attempts = tmp_path / "attempts.jsonl"
    attempts.write_text(
        "\n".join(
            json.dumps({"exercise": "intro", "grammar": g})
            for g in [
                "X -> a X b | a b b b",  # isomorphic
                INTRO_ATTEMPT,  # counterexample abb
                "S -> a S",  # empty
            ]
        ),
        "utf-8",
    )
    out_path = tmp_path / "report.json"
    result = runner.invoke(
        cli_main, ["batch", str(exercises), str(attempts), "--output", str(out_path)]
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out_path.read_text("utf-8"))
    stats = report["exercises"]["intro"]
    assert stats["attempts"] == 3
    assert stats["by_outcome"] == {"equivalent": 1, "not_equivalent": 2}
    assert stats["counterexample_lengths"].get("3") == 1
    # re-running with the same store would hit the cache; the report is
    # deterministic either way
    result2 = runner.invoke(cli_main, ["batch", str(exercises), str(attempts)])
    assert result2.output.splitlines()[0] == result.output.splitlines()[0]


def test_cli_batch_warm_cache(tmp_path):
    runner = CliRunner()
    exercises = tmp_path / "exercises.json"
    exercises.write_text(
        json.dumps([{"id": "intro", "target": INTRO_TARGET, "witness": ["a", "b"]}]), "utf-8"
    )
    attempts = tmp_path / "attempts.jsonl"
    attempts.write_text(
        "\n".join(
            json.dumps({"exercise": "intro", "grammar": g})
            for g in ["X -> a X b | a b b b", INTRO_ATTEMPT, "S -> a S"]
        ),
        "utf-8",
    )
    data_dir = tmp_path / "store"
    cold = runner.invoke(cli_main, ["batch", str(exercises), str(attempts), "--data-dir", str(data_dir)])
    assert cold.exit_code == 0, cold.output
    warm = runner.invoke(cli_main, ["batch", str(exercises), str(attempts), "--data-dir", str(data_dir)])
    assert warm.exit_code == 0, warm.output
    tier_line = next(l for l in warm.output.splitlines() if "cache_tiers" in l)
    assert "canon=3" in tier_line  # every re-submitted attempt hits the first tier


def test_cli_ingest(tmp_path):
    runner = CliRunner()
    attempts = tmp_path / "attempts.jsonl"
    attempts.write_text(json.dumps({"exercise": "e", "grammar": "S -> a"}) + "\n", "utf-8")
    result = runner.invoke(
        cli_main, ["ingest", str(attempts), "--data-dir", str(tmp_path / "data")]
    )
    assert result.exit_code == 0
    assert (tmp_path / "data" / "queue.jsonl").exists()
