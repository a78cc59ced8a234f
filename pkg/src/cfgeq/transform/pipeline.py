"""The normalization-pipeline DSL: parsing and set-semantics interpretation.

Pipelines compose transformation steps over *sets* of grammars:
juxtaposition sequences, parenthesized ``|`` alternatives branch, ``T*``
iterates until the frontier's canonical-key set stabilizes, ``{T}`` is
shorthand for ``( eps | T )``, ``eps`` is the identity, and guards filter
grammars (``GUARD_NUMBER_OF_PRODUCTIONS[<=100]``,
``GUARD_NUMBER_OF_NON_CHANGING_TRANSFORMATIONS[>0]``).  ``//`` starts a line
comment.

Every step application is memoized by (canonical key, pipeline node), so a
transformation shared between branches is computed once.
"""

from __future__ import annotations

import importlib.resources
import re
from dataclasses import dataclass
from typing import Callable, Literal, Optional

from ..budget import Budget, BudgetExceeded
from ..canon import canonical_key
from ..grammar import Grammar
from .builtins import BUILTINS, apply_builtin
from .matching import apply_transformation
from .patterns import PatternTransformation, TransformError, parse_transformations

STAR_CAP = 50

GUARDS = ("GUARD_NUMBER_OF_PRODUCTIONS", "GUARD_NUMBER_OF_NON_CHANGING_TRANSFORMATIONS")


@dataclass(frozen=True)
class Pipeline:
    kind: Literal["step", "builtin", "seq", "branch", "star", "identity", "guard"]
    name: str = ""
    children: tuple["Pipeline", ...] = ()
    comparison: tuple[str, int] | None = None  # guard operator and bound

    def node_ids(self, acc=None, prefix="0"):
        acc = acc if acc is not None else {}
        acc[id(self)] = prefix
        for i, c in enumerate(self.children):
            c.node_ids(acc, f"{prefix}.{i}")
        return acc


_TOKEN = re.compile(
    r"\s*(?:(?P<guard>GUARD_[A-Z_]+\[[<>=!]*\d+\])|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<open>\()|(?P<close>\))|(?P<bar>\|)|(?P<star>\*)|(?P<obrace>\{)|(?P<cbrace>\}))"
)

_CMP = re.compile(r"(GUARD_[A-Z_]+)\[(<=|>=|<|>|=)(\d+)\]")


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    for raw_line in text.split("\n"):
        line = raw_line.split("//", 1)[0]
        pos = 0
        while pos < len(line):
            if line[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(line, pos)
            if not m:
                raise TransformError(f"pipeline syntax error near {line[pos:pos+20]!r}")
            tokens.append(m.group(0).strip())
            pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[str], known: Callable[[str], bool]):
        self.tokens = tokens
        self.pos = 0
        self.known = known

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        if self.pos >= len(self.tokens):
            raise TransformError("unexpected end of pipeline")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse_seq(self, stop: tuple[str, ...]) -> Pipeline:
        items: list[Pipeline] = []
        while self.peek() is not None and self.peek() not in stop:
            items.append(self.parse_item())
        if not items:
            return Pipeline("identity")
        return items[0] if len(items) == 1 else Pipeline("seq", children=tuple(items))

    def parse_item(self) -> Pipeline:
        node = self.parse_atom()
        while self.peek() == "*":
            self.take()
            node = Pipeline("star", children=(node,))
        return node

    def parse_atom(self) -> Pipeline:
        tok = self.take()
        if tok == "(":
            alts = [self.parse_seq(("|", ")"))]
            while self.peek() == "|":
                self.take()
                alts.append(self.parse_seq(("|", ")")))
            if self.take() != ")":
                raise TransformError("unbalanced '(' in pipeline")
            return alts[0] if len(alts) == 1 else Pipeline("branch", children=tuple(alts))
        if tok == "{":
            inner = self.parse_seq(("}",))
            if self.take() != "}":
                raise TransformError("unbalanced '{' in pipeline")
            return Pipeline("branch", children=(Pipeline("identity"), inner))
        if tok.startswith("GUARD_"):
            m = _CMP.fullmatch(tok)
            if not m or m.group(1) not in GUARDS:
                raise TransformError(f"unknown guard {tok!r}")
            return Pipeline("guard", name=m.group(1), comparison=(m.group(2), int(m.group(3))))
        if tok == "eps":
            return Pipeline("identity")
        if tok in BUILTINS:
            return Pipeline("builtin", name=tok)
        if self.known(tok):
            return Pipeline("step", name=tok)
        raise TransformError(f"unknown transformation {tok!r} in pipeline")


class TransformationRegistry:
    """Named pattern transformations plus the builtin table."""

    def __init__(self, transformations: list[PatternTransformation] = ()):  # type: ignore[assignment]
        self.patterns: dict[str, PatternTransformation] = {}
        for t in transformations or ():
            self.patterns[t.name] = t

    def add(self, t: PatternTransformation):
        self.patterns[t.name] = t

    def knows(self, name: str) -> bool:
        return name in self.patterns or name in BUILTINS

    def equivalence_transformations(self) -> list[PatternTransformation]:
        return [t for t in self.patterns.values() if t.kind == "equivalence"]


def parse_pipeline(text: str, registry: TransformationRegistry) -> Pipeline:
    tokens = _tokenize(text)
    parser = _Parser(tokens, registry.knows)
    node = parser.parse_seq(())
    if parser.peek() is not None:
        raise TransformError(f"trailing pipeline tokens at {parser.peek()!r}")
    return node


@dataclass
class PipelineResult:
    grammars: tuple[Grammar, ...]
    keys: frozenset[bytes]
    visited: dict[bytes, Grammar]
    partial: bool = False


@dataclass
class _Entry:
    grammar: Grammar
    key: bytes
    streak: int  # consecutive steps that left the grammar unchanged


def run_pipeline(
    pipeline: Pipeline,
    g: Grammar,
    registry: TransformationRegistry,
    budget: Budget | None = None,
    memoize: bool = True,
) -> PipelineResult:
    """Interpret the pipeline over the singleton frontier {g}.

    Returns the final frontier plus every intermediate grammar visited (all
    equivalence transformations, hence language-equal to g).  On budget
    exhaustion the result so far is flagged partial.  ``memoize=False``
    recomputes shared steps; results must not depend on it.
    """
    budget = budget or Budget(ms=10_000)
    memo: dict[tuple[bytes, int], tuple[tuple[bytes, ...], bool]] = {}
    pool: dict[bytes, Grammar] = {}
    partial = False

    def intern(grammar: Grammar) -> _Entry:
        key = canonical_key(grammar).bytes
        pool.setdefault(key, grammar)
        return _Entry(pool[key], key, 0)

    def apply_node(node: Pipeline, entry: _Entry) -> list[_Entry]:
        key = (entry.key, id(node))
        hit = memo.get(key) if memoize else None
        if hit is None:
            budget.tick()
            if node.kind == "builtin":
                outs = [apply_builtin(node.name, entry.grammar)]
            else:
                t = registry.patterns[node.name]
                outs = apply_transformation(t, entry.grammar) or [entry.grammar]
            out_keys = []
            for out in outs:
                k = canonical_key(out).bytes
                pool.setdefault(k, out)
                out_keys.append(k)
            changed = [k for k in out_keys if k != entry.key]
            memo[key] = (tuple(dict.fromkeys(out_keys)), not changed)
        out_keys, unchanged = memo[key]
        return [
            _Entry(pool[k], k, entry.streak + 1 if k == entry.key else 0) for k in out_keys
        ]

    def interpret(node: Pipeline, frontier: list[_Entry]) -> list[_Entry]:
        nonlocal partial
        if node.kind == "identity":
            return frontier
        if node.kind in ("step", "builtin"):
            out: dict[bytes, _Entry] = {}
            for entry in frontier:
                for res in apply_node(node, entry):
                    prev = out.get(res.key)
                    if prev is None or res.streak > prev.streak:
                        out[res.key] = res
            return [out[k] for k in sorted(out)]
        if node.kind == "seq":
            for child in node.children:
                frontier = interpret(child, frontier)
            return frontier
        if node.kind == "branch":
            out = {}
            for child in node.children:
                for res in interpret(child, list(frontier)):
                    prev = out.get(res.key)
                    if prev is None or res.streak > prev.streak:
                        out[res.key] = res
            return [out[k] for k in sorted(out)]
        if node.kind == "star":
            current = frontier
            for _ in range(STAR_CAP):
                nxt = interpret(node.children[0], current)
                if {e.key for e in nxt} == {e.key for e in current}:
                    return nxt
                current = nxt
            partial = True
            return current
        if node.kind == "guard":
            op, bound = node.comparison

            def value(entry: _Entry) -> int:
                if node.name == "GUARD_NUMBER_OF_PRODUCTIONS":
                    return len(entry.grammar.productions)
                return entry.streak

            ops = {
                "<": lambda v: v < bound,
                "<=": lambda v: v <= bound,
                ">": lambda v: v > bound,
                ">=": lambda v: v >= bound,
                "=": lambda v: v == bound,
            }
            return [e for e in frontier if ops[op](value(e))]
        raise TransformError(f"unknown pipeline node {node.kind!r}")

    start = intern(g)
    try:
        final = interpret(pipeline, [start])
    except BudgetExceeded:
        return PipelineResult(
            grammars=tuple(pool.values()),
            keys=frozenset(pool),
            visited=dict(pool),
            partial=True,
        )
    keys = frozenset(e.key for e in final)
    return PipelineResult(
        grammars=tuple(pool[k] for k in sorted(keys)),
        keys=keys,
        visited=dict(pool),
        partial=partial,
    )


def _load_text(name: str) -> str:
    return importlib.resources.files("cfgeq.transform").joinpath("data", name).read_text("utf-8")


def default_registry() -> TransformationRegistry:
    """Registry with the bundled normalization and bug-fix transformations."""
    registry = TransformationRegistry(parse_transformations(_load_text("normalization.xml")))
    for t in parse_transformations(_load_text("bugfixes.xml")):
        registry.add(t)
    for t in parse_transformations(_load_text("variations.xml")):
        registry.add(t)
    return registry


def normalization_pipeline(registry: TransformationRegistry | None = None) -> tuple[Pipeline, TransformationRegistry]:
    registry = registry or default_registry()
    return parse_pipeline(_load_text("normalization.pipeline"), registry), registry


def basic_simplification(registry: TransformationRegistry | None = None) -> tuple[Pipeline, TransformationRegistry]:
    """The fast leading segment of the normalization pipeline; cache tier 2."""
    registry = registry or default_registry()
    text = """
    EliminateNonGenVars
    EliminateUnReachVars
    EliminateSelfRecUnitRules
    EliminateDelegatingVars
    (
        EliminateLooselyIsomorphicVar
        EliminateSelfRecUnitRules
        EliminateDelegatingVars
    )*
    """
    return parse_pipeline(text, registry), registry
