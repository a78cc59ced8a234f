"""Canonical keys for grammars.

Two grammars are isomorphic when one is obtained from the other by renaming
non-terminals and/or reordering productions.  The canonical key is the
rendered text of a relabeled grammar (non-terminals N0, N1, ... in canonical
order, productions sorted), chosen as the lexicographically least rendering
over all relabelings compatible with a color refinement of the grammar's
graph encoding.  Key equality therefore decides isomorphism, and keys double
as human-inspectable cache keys.

Terminals carry meaning and are never renamed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .grammar import Grammar, Symbol

REFINEMENT_BUDGET = 10**6


@dataclass(frozen=True)
class CanonicalKey:
    bytes: bytes
    canonical: bool = True

    def __repr__(self):
        flag = "" if self.canonical else " (fallback)"
        return f"<key {self.bytes.decode()!r}{flag}>"


@dataclass(frozen=True)
class ColoredGraph:
    """Directed graph with hashable node colors; node ids are 0..n-1."""

    colors: tuple[object, ...]
    edges: frozenset[tuple[int, int]]

    @property
    def node_count(self) -> int:
        return len(self.colors)


def encode_as_graph(g: Grammar) -> tuple[ColoredGraph, dict[Symbol, int]]:
    """Encode a grammar as a colored digraph, injectively up to isomorphism.

    One node per non-terminal (color START for the start symbol, NT
    otherwise), one per production (PROD), one per right-hand-side position
    (colored by the concrete terminal, or REF for non-terminal positions).
    Edges: lhs -> production, production -> first position -> ... (chained in
    rhs order), and REF position -> referenced non-terminal.
    """
    colors: list[object] = []
    edges: set[tuple[int, int]] = set()
    nt_node: dict[Symbol, int] = {}
    for nt in sorted(g.nonterminals):
        nt_node[nt] = len(colors)
        colors.append(("START",) if nt == g.start else ("NT",))
    for p in g.productions:
        prod = len(colors)
        colors.append(("PROD",))
        edges.add((nt_node[p.lhs], prod))
        prev = prod
        for sym in p.rhs:
            pos = len(colors)
            colors.append(("T", sym.name) if sym.terminal else ("REF",))
            edges.add((prev, pos))
            if not sym.terminal:
                edges.add((pos, nt_node[sym]))
            prev = pos
    return ColoredGraph(tuple(colors), frozenset(edges)), nt_node


def refine_colors(graph: ColoredGraph) -> list[int]:
    """Iterative color refinement; returned color ids are isomorphism-invariant.

    Each round a node's signature is (old id, sorted out-neighbor ids, sorted
    in-neighbor ids); new ids index the sorted distinct signatures, so they
    depend only on the isomorphism class of the colored graph.
    """
    n = graph.node_count
    out: list[list[int]] = [[] for _ in range(n)]
    inc: list[list[int]] = [[] for _ in range(n)]
    for a, b in graph.edges:
        out[a].append(b)
        inc[b].append(a)
    base = sorted(set(graph.colors), key=repr)
    ids = [base.index(c) for c in graph.colors]
    while True:
        sigs = [
            (ids[v], tuple(sorted(ids[u] for u in out[v])), tuple(sorted(ids[u] for u in inc[v])))
            for v in range(n)
        ]
        table = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new_ids = [table[s] for s in sigs]
        if len(set(new_ids)) == len(set(ids)):
            return new_ids
        ids = new_ids


def _render_key(g: Grammar, naming: dict[Symbol, str]) -> str:
    def sym_name(s: Symbol) -> str:
        return s.name if s.terminal else naming[s]

    lines = sorted(
        f"{naming[p.lhs]} -> {' '.join(sym_name(s) for s in p.rhs) or 'eps'}"
        for p in g.productions
    )
    alphabet = " ".join(sorted(s.name for s in g.alphabet))
    head = [
        f"start {naming[g.start]}",
        f"nonterminals {len(g.nonterminals)}",
        f"alphabet {alphabet}",
    ]
    return "\n".join(head + lines)


def _candidate_orderings(classes: list[list[Symbol]], budget: int):
    """Yield non-terminal orderings: classes in canonical order, all
    permutations within each class.  Stops silently when budget runs out."""
    counter = 0

    def rec(i: int, acc: list[Symbol]):
        nonlocal counter
        if i == len(classes):
            yield list(acc)
            return
        for perm in permutations(classes[i]):
            counter += 1
            if counter > budget:
                return
            yield from rec(i + 1, acc + list(perm))

    yield from rec(0, [])


def canonical_key(g: Grammar) -> CanonicalKey:
    graph, nt_node = encode_as_graph(g)
    colors = refine_colors(graph)
    by_color: dict[int, list[Symbol]] = {}
    for nt, node in nt_node.items():
        by_color.setdefault(colors[node], []).append(nt)
    # start symbol first (its color class is always a singleton), then classes
    # in refined-color order; within a class every permutation is a candidate.
    start_color = colors[nt_node[g.start]]
    classes = [sorted(by_color[start_color])] + [
        sorted(nts) for color, nts in sorted(by_color.items()) if color != start_color
    ]
    size = 1
    for cls in classes:
        for k in range(2, len(cls) + 1):
            size *= k
    budget_ok = size * max(1, len(g.productions)) <= REFINEMENT_BUDGET
    best: str | None = None
    if budget_ok:
        for ordering in _candidate_orderings(classes, REFINEMENT_BUDGET):
            naming = {nt: f"N{i}" for i, nt in enumerate(ordering)}
            text = _render_key(g, naming)
            if best is None or text < best:
                best = text
        if best is not None:
            return CanonicalKey(best.encode())
    if len(g.nonterminals) <= 8:
        for ordering in permutations(sorted(g.nonterminals)):
            naming = {nt: f"N{i}" for i, nt in enumerate(ordering)}
            if naming[g.start] != "N0":
                continue
            text = _render_key(g, naming)
            if best is None or text < best:
                best = text
        return CanonicalKey(best.encode())
    verbatim = _render_key(g, {nt: nt.name for nt in g.nonterminals})
    return CanonicalKey(verbatim.encode(), canonical=False)


def is_isomorphic(g1: Grammar, g2: Grammar) -> bool:
    k1, k2 = canonical_key(g1), canonical_key(g2)
    return k1.canonical and k2.canonical and k1.bytes == k2.bytes


def canonical_grammar(g: Grammar) -> Grammar:
    """The relabeled grammar whose rendering is the canonical key."""
    from .grammar import N, T, make_grammar

    key = canonical_key(g)
    lines = key.bytes.decode().split("\n")
    start_name = lines[0].split()[1]
    alpha_names = lines[2].split()[1:]
    prods = []
    for line in lines[3:]:
        lhs_name, rhs_text = line.split(" -> ")
        rhs: list[Symbol] = []
        if rhs_text != "eps":
            for tok in rhs_text.split(" "):
                rhs.append(N(tok) if tok[0].isupper() else T(tok))
        prods.append((N(lhs_name), tuple(rhs)))
    return make_grammar(prods, N(start_name), extra_alphabet=[T(a) for a in alpha_names], dedupe=True)
