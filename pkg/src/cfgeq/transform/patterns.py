"""The pattern-based grammar-transformation language: types and parsing.

A transformation definition is an XML container:

    <transformation name="..." type="EQUIVALENCE|BUGFIX">
        <sourcepattern> rules... with: constraints... </sourcepattern>
        <targetpattern> rules... </targetpattern>
        <replace> rules... </replace>               (optional)
    </transformation>

Pattern rules look like grammar rules over pattern variables:
``X -> phi_i Y psi_i | chi_i``.  Variables are single uppercase letters
(non-terminal sort), ``sigma``/``tau`` (terminal sort), or lowercase words
(sentential-form sort); an ``_i`` suffix makes a variable indexed.  Tokens
concatenate without spaces, so ``XX`` is two references and ``alpha_ibeta_i``
is two indexed references in lockstep.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Literal, Optional

Sort = Literal["nonterminal", "terminal", "sentential_form"]


class TransformError(ValueError):
    pass


@dataclass(frozen=True)
class PatternVariable:
    name: str
    indexed: bool
    sort: Sort


@dataclass(frozen=True)
class Ref:
    """One occurrence of a variable inside a rule or constraint string."""

    name: str
    index: Optional[str]  # index symbol like "i"; None for elementary


VarString = tuple[Ref, ...]  # constraint operands; () is eps

Alternative = tuple[Ref, ...]  # () is eps


@dataclass(frozen=True)
class RuleLine:
    lhs: str
    alternatives: tuple[Alternative, ...]


@dataclass(frozen=True)
class Constraint:
    kind: str  # sort | is_start | occurs_outside_match | string_relation | must_match | any_must_match
    payload: tuple


@dataclass(frozen=True)
class Pattern:
    variables: tuple[PatternVariable, ...]
    rules: tuple[RuleLine, ...]
    constraints: tuple[Constraint, ...]

    def variable(self, name: str) -> PatternVariable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    def groups(self) -> dict[str, frozenset[str]]:
        """Index-sharing groups: indexed variable names that share a name or
        co-occur in one alternative share one instantiation set."""
        parent: dict[str, str] = {}

        def find(a: str) -> str:
            while parent.setdefault(a, a) != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a: str, b: str):
            parent[find(a)] = find(b)

        indexed = {v.name for v in self.variables if v.indexed}
        for name in indexed:
            find(name)
        for line in self.rules:
            for alt in line.alternatives:
                names = [r.name for r in alt if r.index is not None]
                for a, b in zip(names, names[1:]):
                    union(a, b)
        groups: dict[str, set[str]] = {}
        for name in indexed:
            groups.setdefault(find(name), set()).add(name)
        return {root: frozenset(members) for root, members in groups.items()}

    def group_of(self, name: str) -> frozenset[str]:
        for members in self.groups().values():
            if name in members:
                return members
        raise KeyError(name)


@dataclass(frozen=True)
class PatternTransformation:
    name: str
    kind: Literal["equivalence", "bugfix"]
    source: Pattern
    target: Pattern
    replace: tuple[RuleLine, ...] = ()


_TOKEN_RE = re.compile(r"([A-Z])|([a-z]+)(?:_([A-Za-z]))?")


def _parse_refs(token: str) -> VarString:
    """Tokenize a juxtaposed variable string like ``phi_iYalpha_jpsi_i``."""
    refs: list[Ref] = []
    pos = 0
    while pos < len(token):
        m = _TOKEN_RE.match(token, pos)
        if not m or m.start() != pos:
            raise TransformError(f"cannot tokenize pattern string {token!r} at offset {pos}")
        if m.group(1):
            refs.append(Ref(m.group(1), None))
        else:
            refs.append(Ref(m.group(2), m.group(3)))
        pos = m.end()
    return tuple(refs)


def _parse_varstring(text: str) -> VarString:
    text = text.strip()
    if text in ("eps", "ε"):
        return ()
    refs: list[Ref] = []
    for token in text.split():
        refs.extend(_parse_refs(token))
    return tuple(refs)


def _default_sort(name: str) -> Sort:
    if len(name) == 1 and name.isupper():
        return "nonterminal"
    if name in ("sigma", "tau"):
        return "terminal"
    return "sentential_form"


_CONSTRAINT_FORMS = [
    (re.compile(r"^(\S+) is variable$"), lambda m: Constraint("sort", (m[1], "nonterminal"))),
    (re.compile(r"^(\S+) is terminal$"), lambda m: Constraint("sort", (m[1], "terminal"))),
    (
        re.compile(r"^(\S+) is sentential form$"),
        lambda m: Constraint("sort", (m[1], "sentential_form")),
    ),
    (re.compile(r"^(\S+) is start variable$"), lambda m: Constraint("is_start", (m[1], True))),
    (
        re.compile(r"^(\S+) is not start variable$"),
        lambda m: Constraint("is_start", (m[1], False)),
    ),
    (
        re.compile(r"^(\S+) appears only in matched rules$"),
        lambda m: Constraint("occurs_outside_match", (m[1], False)),
    ),
    (
        re.compile(r"^(\w+)_(\w) or (\w+)_(\w) has a value$"),
        lambda m: Constraint("any_must_match", (m[1], m[3])),
    ),
    (re.compile(r"^(\w+)_(\w) has a value$"), lambda m: Constraint("must_match", (m[1],))),
    (
        re.compile(r"^(\S+) does not contain (\S+)$"),
        lambda m: Constraint("string_relation", ("not_contains", m[1], m[2])),
    ),
    (
        re.compile(r"^(\S+) contains (\S+)$"),
        lambda m: Constraint("string_relation", ("contains", m[1], m[2])),
    ),
    (
        re.compile(r"^(\S+) does not start with (\S+)$"),
        lambda m: Constraint("string_relation", ("not_starts_with", m[1], m[2])),
    ),
    (
        re.compile(r"^(\S+) starts with (\S+)$"),
        lambda m: Constraint("string_relation", ("starts_with", m[1], m[2])),
    ),
    (
        re.compile(r"^(\S+) does not end with (\S+)$"),
        lambda m: Constraint("string_relation", ("not_ends_with", m[1], m[2])),
    ),
    (
        re.compile(r"^(\S+) ends with (\S+)$"),
        lambda m: Constraint("string_relation", ("ends_with", m[1], m[2])),
    ),
    (
        re.compile(r"^(\S+) is not an? (prefix|suffix|infix) of (\S+)$"),
        lambda m: Constraint("string_relation", (f"not_{m[2]}", m[1], m[3])),
    ),
    (
        re.compile(r"^(\S+) is an? (prefix|suffix|infix) of (\S+)$"),
        lambda m: Constraint("string_relation", (m[2], m[1], m[3])),
    ),
    (
        re.compile(r"^(\S+) != (\S+)$"),
        lambda m: Constraint("string_relation", ("!=", m[1], m[2])),
    ),
    (
        re.compile(r"^(\S+) = (\S+)$"),
        lambda m: Constraint("string_relation", ("=", m[1], m[2])),
    ),
]


def _parse_constraint(line: str) -> Constraint:
    line = line.rstrip(";").strip()
    for regex, build in _CONSTRAINT_FORMS:
        m = regex.match(line)
        if m:
            c = build(m)
            if c.kind == "string_relation":
                op, left, right = c.payload
                return Constraint("string_relation", (op, _parse_varstring(left), _parse_varstring(right)))
            return c
    raise TransformError(f"unknown constraint phrase: {line!r}")


def _parse_pattern_body(text: str, where: str) -> tuple[tuple[RuleLine, ...], tuple[Constraint, ...]]:
    lines = [ln.strip() for ln in text.strip().split("\n")]
    lines = [ln for ln in lines if ln]
    rule_texts: list[str] = []
    constraint_lines: list[str] = []
    in_constraints = False
    for ln in lines:
        if ln == "with:":
            in_constraints = True
            continue
        if in_constraints:
            constraint_lines.append(ln)
        elif rule_texts and rule_texts[-1].rstrip().endswith("|"):
            rule_texts[-1] += " " + ln
        else:
            rule_texts.append(ln)
    rules: list[RuleLine] = []
    for rt in rule_texts:
        if "->" not in rt:
            raise TransformError(f"{where}: rule line without '->': {rt!r}")
        lhs_text, rhs_text = rt.split("->", 1)
        lhs_refs = _parse_varstring(lhs_text)
        if len(lhs_refs) != 1 or lhs_refs[0].index is not None:
            raise TransformError(f"{where}: rule left-hand side must be one elementary variable: {rt!r}")
        alts = tuple(_parse_varstring(alt) for alt in rhs_text.split("|"))
        rules.append(RuleLine(lhs_refs[0].name, alts))
    constraints = tuple(_parse_constraint(c) for c in constraint_lines)
    return tuple(rules), constraints


def _collect_variables(
    rules: tuple[RuleLine, ...], constraints: tuple[Constraint, ...], where: str
) -> tuple[PatternVariable, ...]:
    indexed: dict[str, bool] = {}
    order: list[str] = []

    def see(ref: Ref):
        if ref.name not in indexed:
            indexed[ref.name] = ref.index is not None
            order.append(ref.name)
        elif indexed[ref.name] != (ref.index is not None):
            raise TransformError(
                f"{where}: variable {ref.name!r} used both elementary and indexed"
            )

    for line in rules:
        see(Ref(line.lhs, None))
        for alt in line.alternatives:
            for ref in alt:
                see(ref)
    for c in constraints:
        if c.kind == "string_relation":
            for side in (c.payload[1], c.payload[2]):
                for ref in side:
                    see(ref)
    sorts: dict[str, Sort] = {name: _default_sort(name) for name in order}
    for c in constraints:
        if c.kind == "sort":
            name, sort = c.payload
            if name in sorts and sorts[name] != sort and _default_sort(name) != sort:
                pass  # explicit constraint wins
            sorts[name] = sort
    for line in rules:
        if sorts.get(line.lhs) != "nonterminal":
            raise TransformError(f"{where}: rule lhs {line.lhs!r} must be non-terminal sort")
    return tuple(PatternVariable(name, indexed[name], sorts[name]) for name in order)


def _make_pattern(text: str, where: str) -> Pattern:
    rules, constraints = _parse_pattern_body(text, where)
    variables = _collect_variables(rules, constraints, where)
    return Pattern(variables, rules, constraints)


def parse_transformations(text: str) -> list[PatternTransformation]:
    """Parse a transformation container; the bundled corpus parses verbatim."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise TransformError(f"malformed transformation container: {e}") from e
    if root.tag != "transformations":
        raise TransformError(f"expected <transformations> root, got <{root.tag}>")
    out: list[PatternTransformation] = []
    for node in root.findall("transformation"):
        name = node.get("name")
        kind_text = node.get("type", "")
        if not name:
            raise TransformError("transformation without a name")
        if kind_text not in ("EQUIVALENCE", "BUGFIX"):
            raise TransformError(f"{name}: unknown type {kind_text!r}")
        source_node = node.find("sourcepattern")
        target_node = node.find("targetpattern")
        if source_node is None or target_node is None:
            raise TransformError(f"{name}: both sourcepattern and targetpattern are required")
        source = _make_pattern(source_node.text or "", f"{name}/source")
        target = _make_pattern(target_node.text or "", f"{name}/target")
        replace_node = node.find("replace")
        replace: tuple[RuleLine, ...] = ()
        if replace_node is not None:
            replace, extra = _parse_pattern_body(replace_node.text or "", f"{name}/replace")
            if extra:
                raise TransformError(f"{name}: replace block cannot carry constraints")
        _validate(name, source, target, replace)
        out.append(
            PatternTransformation(
                name=name,
                kind="equivalence" if kind_text == "EQUIVALENCE" else "bugfix",
                source=source,
                target=target,
                replace=replace,
            )
        )
    return out


def _validate(name: str, source: Pattern, target: Pattern, replace: tuple[RuleLine, ...]):
    source_names = {v.name for v in source.variables}
    for v in target.variables:
        if v.name in source_names:
            continue
        if v.sort != "nonterminal" or v.indexed:
            raise TransformError(
                f"{name}: target variable {v.name!r} is unbound and not a fresh non-terminal"
            )
    for line in replace:
        if line.lhs not in source_names:
            raise TransformError(f"{name}: replace lhs {line.lhs!r} not bound by the source pattern")
        target_names = {v.name for v in target.variables}
        for alt in line.alternatives:
            for ref in alt:
                if ref.name not in source_names and ref.name not in target_names:
                    raise TransformError(f"{name}: replace references unknown variable {ref.name!r}")
