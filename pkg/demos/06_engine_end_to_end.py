"""The full engine: classification, explanations, clustering, caching.

Run: python demos/06_engine_end_to_end.py
"""

from cfgeq.bounded import BoundednessWitness
from cfgeq.engine import (
    bug_fix_search,
    classify,
    cluster_attempts,
    explain,
    make_exercise_context,
)
from cfgeq.grammar import parse_grammar
from cfgeq.service.store import explanation_to_json

# The assignment: a grammar for {a^n b^{n+2} | n >= 1}.
target = parse_grammar("S -> a S b | a b b b")
ctx = make_exercise_context(target, BoundednessWitness(("a", "b")))

# A stream of attempts, as an educational support system would see them.
attempts = {
    "identical": "S -> a S b | a b b b",
    "renamed": "X -> a X b | a b b b",
    "off by one b": "S -> a S b | a b b",
    "empty language": "S -> a S",
    "not a*b* at all": "S -> a S | T | eps ; T -> b T | S | eps",
    "renamed resubmission": "T -> a T b | a b b",
}

for label, text in attempts.items():
    attempt = parse_grammar(text)
    verdict = classify(attempt, ctx)
    print(f"{label:22} -> {verdict.outcome:15} via {verdict.method}")
    if verdict.outcome == "not_equivalent":
        explanation = explain(attempt, target, verdict, ctx)
        for key, value in (explanation_to_json(explanation) or {}).items():
            print(f"{'':26}{key}: {value}")

# Bug-fix search explains the off-by-one attempt of a different exercise.
anbn = parse_grammar("S -> a S b | a b")
fix_ctx = make_exercise_context(anbn)
fix = bug_fix_search(parse_grammar("S -> a S b | eps"), anbn, fix_ctx)
print("\nbug fix for the eps-ended recursion:", fix[0] if fix else None)

# Clustering: one manual answer settles a whole group of equivalent attempts.
group = [
    parse_grammar("S -> a S b | a b"),
    parse_grammar("X -> a X b | a b"),
    parse_grammar("S -> a S b | eps"),
    parse_grammar("S -> a S b | a b b"),
]
clusters = cluster_attempts(group, anbn, fix_ctx)
print("clusters:", [(c.kind, len(c.member_keys)) for c in clusters])
