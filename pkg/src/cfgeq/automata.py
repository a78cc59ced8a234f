"""Automata constructions behind the boundedness and adapted-Parikh pipelines.

PDAs accept by empty stack everywhere.  Product and inverse-homomorphism
constructions wrap the original machine's stack above a fresh bottom marker,
which is popped only when the wrapped acceptance condition holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

from .grammar import Grammar, N, Symbol, T, Word, make_grammar
from . import language

State = Hashable
StackSym = Hashable


def _fresh_bottom(stack_alphabet: frozenset) -> tuple:
    """A stack-bottom marker distinct from everything already on the stack;
    nesting-safe because the depth index is part of the marker."""
    depth = sum(
        1 for s in stack_alphabet if isinstance(s, tuple) and len(s) == 2 and s[0] == "bottom"
    )
    return ("bottom", depth)


@dataclass(frozen=True)
class Dfa:
    states: frozenset[State]
    alphabet: frozenset[str]
    transitions: Mapping[tuple[State, str], State]
    start: State
    accepting: frozenset[State]

    def step(self, state: State, ch: str) -> State:
        return self.transitions[(state, ch)]

    def accepts(self, word: Word) -> bool:
        cur = self.start
        for ch in word:
            if (cur, ch) not in self.transitions:
                return False
            cur = self.transitions[(cur, ch)]
        return cur in self.accepting


# transition: (state, input symbol or None, stack top, target state, pushed string)
PdaTransition = tuple[State, str | None, StackSym, State, tuple[StackSym, ...]]


@dataclass(frozen=True)
class Pda:
    states: frozenset[State]
    input_alphabet: frozenset[str]
    stack_alphabet: frozenset[StackSym]
    transitions: frozenset[PdaTransition]
    start: State
    initial_stack: StackSym

    def __post_init__(self):
        for _, _, top, _, pushed in self.transitions:
            assert top in self.stack_alphabet
            assert all(s in self.stack_alphabet for s in pushed)


def cfg_to_pda(g: Grammar) -> Pda:
    """Single-state empty-stack PDA for L(g) (predict/match construction)."""
    q = 0
    transitions: set[PdaTransition] = set()
    for p in g.productions:
        transitions.add((q, None, p.lhs, q, p.rhs))
    for t in g.alphabet:
        transitions.add((q, t.name, t, q, ()))
    return Pda(
        states=frozenset([q]),
        input_alphabet=g.terminal_names(),
        stack_alphabet=frozenset(g.nonterminals | g.alphabet),
        transitions=frozenset(transitions),
        start=q,
        initial_stack=g.start,
    )


def witness_dfa(words: Sequence[Word], alphabet: frozenset[str] | None = None) -> Dfa:
    """DFA for w1* w2* ... wl* via subset construction over block positions.

    The DFA is total over `alphabet` (default: the letters of the words); a
    sink state absorbs everything else.
    """
    if not words:
        raise ValueError("witness needs at least one word")
    if any(not w for w in words):
        raise ValueError("witness words must be nonempty")
    letters = frozenset(ch for w in words for ch in w)
    alphabet = letters if alphabet is None else alphabet | letters
    n = len(words)

    def boundary(i: int) -> frozenset:
        return frozenset(("b", j) for j in range(i, n + 1))

    def step_set(positions: frozenset, ch: str) -> frozenset:
        out: set = set()
        for pos in positions:
            if pos[0] == "b":
                i = pos[1]
                for j in range(i, n):
                    if words[j][0] == ch:
                        if len(words[j]) == 1:
                            out |= boundary(j)
                        else:
                            out.add((j, 1))
            else:
                j, p = pos
                if words[j][p] == ch:
                    if p + 1 == len(words[j]):
                        out |= boundary(j)
                    else:
                        out.add((j, p + 1))
        return frozenset(out)

    start = boundary(0)
    sink = frozenset()
    table: dict[tuple[State, str], State] = {}
    states = {start, sink}
    queue = [start]
    while queue:
        cur = queue.pop()
        for ch in sorted(alphabet):
            nxt = step_set(cur, ch)
            table[(cur, ch)] = nxt
            if nxt not in states:
                states.add(nxt)
                queue.append(nxt)
    for ch in sorted(alphabet):
        table[(sink, ch)] = sink
    accepting = frozenset(s for s in states if any(p[0] == "b" for p in s))
    return Dfa(frozenset(states), alphabet, table, start, accepting)


def complement(d: Dfa) -> Dfa:
    return Dfa(d.states, d.alphabet, d.transitions, d.start, d.states - d.accepting)


def intersect_pda_dfa(p: Pda, d: Dfa) -> Pda:
    """Product PDA for L(p) ∩ L(d); the DFA advances on input transitions only."""
    if not p.input_alphabet <= d.alphabet:
        raise ValueError(f"alphabet mismatch: PDA {sorted(p.input_alphabet)} vs DFA {sorted(d.alphabet)}")
    bottom = _fresh_bottom(p.stack_alphabet)
    init = "<init>"
    states: set[State] = {init}
    transitions: set[PdaTransition] = set()
    transitions.add((init, None, bottom, (p.start, d.start), (p.initial_stack, bottom)))
    for q, a, top, q2, pushed in p.transitions:
        if a is None:
            for ds in d.states:
                transitions.add((((q, ds)), None, top, (q2, ds), pushed))
                states.add((q, ds))
                states.add((q2, ds))
        else:
            for ds in d.states:
                ds2 = d.transitions[(ds, a)]
                transitions.add(((q, ds), a, top, (q2, ds2), pushed))
                states.add((q, ds))
                states.add((q2, ds2))
    for q in p.states:
        for ds in d.accepting:
            transitions.add(((q, ds), None, bottom, (q, ds), ()))
            states.add((q, ds))
    return Pda(
        states=frozenset(states),
        input_alphabet=p.input_alphabet,
        stack_alphabet=p.stack_alphabet | {bottom},
        transitions=frozenset(transitions),
        start=init,
        initial_stack=bottom,
    )


def inverse_homomorphism(p: Pda, h: Mapping[str, Word]) -> Pda:
    """Buffer construction: PDA over h's domain accepting {u : h(u) in L(p)}."""
    for sym, image in h.items():
        if not image:
            raise ValueError(f"empty image word for {sym!r}")
    suffixes = {""}
    for image in h.values():
        for i in range(len(image)):
            suffixes.add(image[i:])
    bottom = _fresh_bottom(p.stack_alphabet)
    init = "<init>"
    states: set[State] = {init}
    transitions: set[PdaTransition] = set()
    transitions.add((init, None, bottom, (p.start, ""), (p.initial_stack, bottom)))
    for q in p.states:
        states.add((q, ""))
        # load the image of a fresh symbol into the buffer
        for sym in sorted(h):
            for top in p.stack_alphabet:
                transitions.add(((q, ""), sym, top, (q, h[sym]), (top,)))
                states.add((q, h[sym]))
    for q, a, top, q2, pushed in p.transitions:
        if a is None:
            for v in suffixes:
                transitions.add(((q, v), None, top, (q2, v), pushed))
                states.add((q, v))
                states.add((q2, v))
        else:
            for v in suffixes:
                if v and v[0] == a:
                    transitions.add(((q, v), None, top, (q2, v[1:]), pushed))
                    states.add((q, v))
                    states.add((q2, v[1:]))
    for q in p.states:
        transitions.add(((q, ""), None, bottom, (q, ""), ()))
    return Pda(
        states=frozenset(states),
        input_alphabet=frozenset(h),
        stack_alphabet=p.stack_alphabet | {bottom},
        transitions=frozenset(transitions),
        start=init,
        initial_stack=bottom,
    )


def _derivable_triples(p: Pda) -> set[tuple[State, StackSym, State]]:
    """Saturation: (q, Z, r) iff the PDA can go from q with Z on top to r
    having popped Z (consuming any input)."""
    derivable: set[tuple[State, StackSym, State]] = set()
    changed = True
    while changed:
        changed = False
        for q, _, top, q2, pushed in p.transitions:
            reach = {q2}
            for sym in pushed:
                reach = {t for s in reach for (s2, z, t) in derivable if s2 == s and z == sym}
                if not reach:
                    break
            for r in reach:
                if (q, top, r) not in derivable:
                    derivable.add((q, top, r))
                    changed = True
    return derivable


def pda_to_cfg(p: Pda) -> Grammar:
    """Triple-construction grammar for an empty-stack PDA, pruned to useful
    triples before any production is emitted."""
    derivable = _derivable_triples(p)
    start_triples = sorted(
        (t for t in derivable if t[0] == p.start and t[1] == p.initial_stack), key=repr
    )
    start_sym = N("S0")
    if not start_triples:
        return make_grammar([], start_sym)

    naming: dict[tuple, Symbol] = {}

    def nt_of(triple: tuple) -> Symbol:
        if triple not in naming:
            naming[triple] = N(f"T{len(naming)}")
        return naming[triple]

    by_state_top: dict[tuple[State, StackSym], list[PdaTransition]] = {}
    for tr in sorted(p.transitions, key=repr):
        by_state_top.setdefault((tr[0], tr[2]), []).append(tr)

    needed: set[tuple] = set(start_triples)
    queue = list(start_triples)
    productions: list[tuple[Symbol, tuple[Symbol, ...]]] = [
        (start_sym, (nt_of(t),)) for t in start_triples
    ]
    emitted: set = set()
    while queue:
        q, z, r = queue.pop()
        for tq, a, top, q2, pushed in by_state_top.get((q, z), ()):
            # enumerate state chains q2 = s0, s1, ..., sk = r with every
            # (s_{i-1}, pushed_i, s_i) derivable
            chains: list[list[State]] = [[q2]]
            for sym in pushed:
                chains = [
                    chain + [t]
                    for chain in chains
                    for (s, zz, t) in derivable
                    if s == chain[-1] and zz == sym
                ]
                if not chains:
                    break
            for chain in chains:
                if chain[-1] != r:
                    continue
                rhs: list[Symbol] = [T(a)] if a is not None else []
                for i, sym in enumerate(pushed):
                    triple = (chain[i], sym, chain[i + 1])
                    rhs.append(nt_of(triple))
                    if triple not in needed:
                        needed.add(triple)
                        queue.append(triple)
                prod = (nt_of((q, z, r)), tuple(rhs))
                if prod not in emitted:
                    emitted.add(prod)
                    productions.append(prod)
    g = make_grammar(productions, start_sym, extra_alphabet=[T(c) for c in p.input_alphabet])
    return language.trim(g)


def shortest_word(p: Pda) -> Word | None:
    """A shortest word of L(p), ties broken lexicographically; None iff empty."""
    return language.shortest_member(pda_to_cfg(p))
