"""Shared helpers: a grammar corpus and a configuration-level PDA simulator
used as an independent oracle against the automata constructions."""

from __future__ import annotations

from collections import deque

import pytest

from cfgeq.grammar import parse_grammar

# small mixed corpus: finite, infinite, empty, bounded, unbounded
CORPUS = [
    "S -> a S b | a b",
    "S -> a S b | a b b",
    "S -> a S b | a b b b",
    "S -> a S b | eps",
    "S -> a b | b a",
    "S -> a S",
    "S -> A ; A -> B ; B -> A",
    "S -> A B ; A -> a A | eps ; B -> b B | b",
    "S -> A b b B ; A -> a A b | eps ; B -> c B | eps",
    "S -> a S c | T ; T -> b T c | eps",
    "S -> S S | a | eps",
    "S -> a S a | b S b | c",
    "S -> b A | a B ; A -> a A | eps ; B -> b B | eps",
    "S -> a T b ; T -> a T b | a | b",
    "S -> X S | eps ; X -> a X c | B ; B -> b B | eps",
]


@pytest.fixture(scope="session")
def corpus():
    return [parse_grammar(text) for text in CORPUS]


def simulate_pda(p, word: str, fuel: int = 400_000) -> bool:
    """BFS over configurations with a stack-depth bound; oracle-only."""
    limit = 4 * (len(word) + 4)
    by_state_top = {}
    for tr in p.transitions:
        by_state_top.setdefault((tr[0], tr[2]), []).append(tr)
    start = (p.start, 0, (p.initial_stack,))
    seen = {start}
    queue = deque([start])
    while queue:
        fuel -= 1
        if fuel <= 0:
            raise RuntimeError("simulation fuel exhausted")
        state, pos, stack = queue.popleft()
        if pos == len(word) and not stack:
            return True
        if not stack or len(stack) > limit:
            continue
        for _, a, _, target, pushed in by_state_top.get((state, stack[0]), ()):
            if a is None:
                cfg = (target, pos, pushed + stack[1:])
            elif pos < len(word) and word[pos] == a:
                cfg = (target, pos + 1, pushed + stack[1:])
            else:
                continue
            if cfg not in seen:
                seen.add(cfg)
                queue.append(cfg)
    return False
