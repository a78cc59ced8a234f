"""Context-free grammar values, the text format, and its parser/renderer.

A grammar file is UTF-8 text.  Rules are separated by ";" or newlines, a rule
is ``LHS -> alt1 | alt2 | ...``, an alternative is a whitespace-separated
sequence of symbols or the keyword ``eps`` (the empty word; "ε" is accepted as
a synonym on input).  ``//`` starts a line comment.  The LHS of the first rule
is the start symbol.  Terminals are single characters that are not uppercase
letters; non-terminals are uppercase-initial identifiers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

_NT_RE = re.compile(r"[A-Z][A-Za-z0-9_']*")


class GrammarError(ValueError):
    """Raised for malformed grammar text or inconsistent grammar values."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


@dataclass(frozen=True, order=True)
class Symbol:
    """A terminal (single non-uppercase character) or a non-terminal."""

    terminal: bool
    name: str

    def __post_init__(self):
        if self.terminal:
            if len(self.name) != 1 or self.name.isupper():
                raise GrammarError(f"invalid terminal {self.name!r}")
        else:
            if not _NT_RE.fullmatch(self.name):
                raise GrammarError(f"invalid non-terminal {self.name!r}")

    def __repr__(self):
        return self.name


def T(name: str) -> Symbol:
    return Symbol(True, name)


def N(name: str) -> Symbol:
    return Symbol(False, name)


# A sentential form is a tuple of symbols; () is the empty word.
SForm = tuple[Symbol, ...]

# Words are plain strings of terminal characters (terminals are 1 char each).
Word = str


class Production(NamedTuple):
    lhs: Symbol
    rhs: SForm

    def __repr__(self):
        rhs = " ".join(s.name for s in self.rhs) or "eps"
        return f"{self.lhs.name} -> {rhs}"


@dataclass(frozen=True)
class Grammar:
    nonterminals: frozenset[Symbol]
    alphabet: frozenset[Symbol]
    productions: tuple[Production, ...]
    start: Symbol

    def __post_init__(self):
        if self.start not in self.nonterminals:
            raise GrammarError(f"start symbol {self.start!r} not a non-terminal of the grammar")
        seen = set()
        for p in self.productions:
            if p.lhs not in self.nonterminals:
                raise GrammarError(f"production lhs {p.lhs!r} not a non-terminal")
            for s in p.rhs:
                if s not in self.nonterminals and s not in self.alphabet:
                    raise GrammarError(f"unknown symbol {s!r} in {p!r}")
            if p in seen:
                raise GrammarError(f"duplicate production {p!r}")
            seen.add(p)

    @cached_property
    def by_lhs(self) -> dict[Symbol, tuple[Production, ...]]:
        table: dict[Symbol, list[Production]] = {nt: [] for nt in self.nonterminals}
        for p in self.productions:
            table[p.lhs].append(p)
        return {nt: tuple(ps) for nt, ps in table.items()}

    def rhs_of(self, nt: Symbol) -> tuple[SForm, ...]:
        return tuple(p.rhs for p in self.by_lhs.get(nt, ()))

    def terminal_names(self) -> frozenset[str]:
        return frozenset(s.name for s in self.alphabet)


def make_grammar(
    productions: Iterable[tuple[Symbol, Iterable[Symbol]]],
    start: Symbol,
    extra_alphabet: Iterable[Symbol] = (),
    dedupe: bool = False,
) -> Grammar:
    """Build a grammar, inferring non-terminals and alphabet from the rules.

    Non-terminals are every production lhs plus every non-terminal symbol on a
    right-hand side (a referenced non-terminal without productions is legal).
    """
    prods: list[Production] = []
    seen: set[Production] = set()
    nts: set[Symbol] = {start}
    alpha: set[Symbol] = set(extra_alphabet)
    for lhs, rhs in productions:
        p = Production(lhs, tuple(rhs))
        if p in seen:
            if dedupe:
                continue
            raise GrammarError(f"duplicate production {p!r}")
        seen.add(p)
        prods.append(p)
        nts.add(lhs)
        for s in p.rhs:
            (alpha if s.terminal else nts).add(s)
    return Grammar(frozenset(nts), frozenset(alpha), tuple(prods), start)


def grammar(text: str) -> Grammar:
    """Shorthand used all over the test-suite and the demos."""
    return parse_grammar(text)


def _classify_token(tok: str, line: int, col: int) -> Symbol:
    if _NT_RE.fullmatch(tok):
        return N(tok)
    if len(tok) == 1 and not tok.isupper():
        return T(tok)
    raise GrammarError(
        f"{tok!r} is neither a terminal (one non-uppercase character) nor a "
        "non-terminal (uppercase-initial identifier)",
        line,
        col,
    )


def parse_grammar(text: str) -> Grammar:
    """Parse the grammar file format.  The first rule's LHS is the start symbol.

    Duplicate right-hand sides under one LHS are silently deduplicated.
    Raises GrammarError with line/column information on malformed input.
    """
    rules: list[tuple[Symbol, list[SForm]]] = []
    for lineno, raw_line in enumerate(text.split("\n"), start=1):
        line = raw_line.split("//", 1)[0]
        for chunk in line.split(";"):
            if not chunk.strip():
                continue
            col = raw_line.index(chunk.strip()[0]) + 1 if chunk.strip() else 1
            if "->" not in chunk:
                raise GrammarError("rule has no '->'", lineno, col)
            lhs_text, rhs_text = chunk.split("->", 1)
            lhs_toks = lhs_text.split()
            if len(lhs_toks) != 1:
                raise GrammarError(
                    f"rule left-hand side must be a single non-terminal, got {lhs_text.strip()!r}",
                    lineno,
                    col,
                )
            lhs = _classify_token(lhs_toks[0], lineno, col)
            if lhs.terminal:
                raise GrammarError(f"left-hand side {lhs.name!r} is a terminal", lineno, col)
            alts: list[SForm] = []
            for alt_text in rhs_text.split("|"):
                toks = alt_text.split()
                if not toks:
                    raise GrammarError("empty alternative (write 'eps' for the empty word)", lineno, col)
                if any(t in ("eps", "ε") for t in toks):
                    if len(toks) != 1:
                        raise GrammarError("'eps' must stand alone in an alternative", lineno, col)
                    alts.append(())
                else:
                    alts.append(tuple(_classify_token(t, lineno, col) for t in toks))
            rules.append((lhs, alts))
    if not rules:
        raise GrammarError("empty grammar: no rules found")
    start = rules[0][0]
    prods = ((lhs, rhs) for lhs, alts in rules for rhs in alts)
    return make_grammar(prods, start, dedupe=True)


def render_grammar(g: Grammar) -> str:
    """Deterministic textual form; parses back to an equal grammar.

    The start symbol's block comes first; the remaining non-terminals follow
    in first-use order within the rendered text itself (breadth-first through
    right-hand sides, then any unreachable blocks in first-definition order),
    so re-rendering a parsed rendering is the identity.  Alternatives keep
    the original production order.

    A grammar whose start symbol has no productions cannot round-trip: the
    format defines the start as the first rule's left-hand side.
    """
    order: list[Symbol] = [g.start]
    seen = {g.start}
    queue = [g.start]
    while queue:
        nt = queue.pop(0)
        for p in g.by_lhs.get(nt, ()):
            for s in p.rhs:
                if not s.terminal and s not in seen and g.by_lhs.get(s):
                    seen.add(s)
                    order.append(s)
                    queue.append(s)
    for p in g.productions:  # blocks not reachable from the start
        if p.lhs not in seen:
            seen.add(p.lhs)
            order.append(p.lhs)

    lines = []
    for nt in order:
        alts = [" ".join(s.name for s in rhs) or "eps" for _, rhs in g.by_lhs.get(nt, ())]
        if alts:
            lines.append(f"{nt.name} -> {' | '.join(alts)}")
    return "\n".join(lines)


def word_symbols(w: Word) -> SForm:
    return tuple(T(c) for c in w)
