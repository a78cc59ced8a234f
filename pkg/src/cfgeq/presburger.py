"""Linear integer arithmetic formulas: terms, the formula AST, and evaluation.

The fragment is what the Parikh constructions produce: boolean combinations
of linear comparisons and divisibility atoms, with existential quantifiers.
Quantifier elimination lives in cfgeq.qe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

Valuation = Mapping[str, int]

_FRESH = itertools.count()


@dataclass(frozen=True)
class LinearTerm:
    """Sum of coeff*var plus a constant; zero coefficients are never stored."""

    coeffs: tuple[tuple[str, int], ...]
    const: int = 0

    def __post_init__(self):
        assert all(c != 0 for _, c in self.coeffs)
        assert list(self.coeffs) == sorted(self.coeffs), "coefficients must be sorted by variable"

    def coeff(self, var: str) -> int:
        for v, c in self.coeffs:
            if v == var:
                return c
        return 0

    def variables(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.coeffs)

    def value(self, val: Valuation) -> int:
        total = self.const
        for v, c in self.coeffs:
            if v not in val:
                raise KeyError(f"unassigned variable {v!r}")
            total += c * val[v]
        return total

    def __add__(self, other: "LinearTerm") -> "LinearTerm":
        merged = dict(self.coeffs)
        for v, c in other.coeffs:
            merged[v] = merged.get(v, 0) + c
        return term(merged, self.const + other.const)

    def __sub__(self, other: "LinearTerm") -> "LinearTerm":
        return self + other.scale(-1)

    def scale(self, k: int) -> "LinearTerm":
        if k == 0:
            return const(0)
        return LinearTerm(tuple((v, c * k) for v, c in self.coeffs), self.const * k)

    def __str__(self):
        parts = []
        for v, c in self.coeffs:
            if c == 1:
                parts.append(f"+ {v}")
            elif c == -1:
                parts.append(f"- {v}")
            elif c < 0:
                parts.append(f"- {-c}{v}")
            else:
                parts.append(f"+ {c}{v}")
        if self.const or not parts:
            parts.append(f"+ {self.const}" if self.const >= 0 else f"- {-self.const}")
        out = " ".join(parts)
        return out[2:] if out.startswith("+ ") else "-" + out[2:] if out.startswith("- ") else out


def term(coeffs: Mapping[str, int] | Iterable[tuple[str, int]], constant: int = 0) -> LinearTerm:
    items = dict(coeffs)
    return LinearTerm(tuple(sorted((v, c) for v, c in items.items() if c != 0)), constant)


def var(name: str, coeff: int = 1) -> LinearTerm:
    return term({name: coeff})


def const(c: int) -> LinearTerm:
    return LinearTerm((), c)


def tsum(terms: Iterable[LinearTerm]) -> LinearTerm:
    acc = const(0)
    for t in terms:
        acc = acc + t
    return acc


# ---------------------------------------------------------------- formulas

COMPARE_OPS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Bool(Formula):
    value: bool


TRUE = Bool(True)
FALSE = Bool(False)


@dataclass(frozen=True)
class Cmp(Formula):
    op: str
    lhs: LinearTerm
    rhs: LinearTerm

    def __post_init__(self):
        assert self.op in COMPARE_OPS


@dataclass(frozen=True)
class Divides(Formula):
    modulus: int
    term: LinearTerm

    def __post_init__(self):
        assert self.modulus >= 2


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    children: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    children: tuple[Formula, ...]


@dataclass(frozen=True)
class Exists(Formula):
    variables: tuple[str, ...]
    child: Formula


def cmp(op: str, lhs: LinearTerm | int, rhs: LinearTerm | int) -> Cmp:
    if isinstance(lhs, int):
        lhs = const(lhs)
    if isinstance(rhs, int):
        rhs = const(rhs)
    return Cmp(op, lhs, rhs)


def land(*fs: Formula) -> Formula:
    flat: list[Formula] = []
    for f in fs:
        if isinstance(f, And):
            flat.extend(f.children)
        elif f == FALSE:
            return FALSE
        elif f != TRUE:
            flat.append(f)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def lor(*fs: Formula) -> Formula:
    flat: list[Formula] = []
    for f in fs:
        if isinstance(f, Or):
            flat.extend(f.children)
        elif f == TRUE:
            return TRUE
        elif f != FALSE:
            flat.append(f)
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def lnot(f: Formula) -> Formula:
    if isinstance(f, Bool):
        return Bool(not f.value)
    if isinstance(f, Not):
        return f.child
    return Not(f)


def bound_variables(f: Formula) -> frozenset[str]:
    if isinstance(f, Exists):
        return frozenset(f.variables) | bound_variables(f.child)
    if isinstance(f, (And, Or)):
        out: frozenset[str] = frozenset()
        for c in f.children:
            out |= bound_variables(c)
        return out
    if isinstance(f, Not):
        return bound_variables(f.child)
    return frozenset()


def free_variables(f: Formula) -> frozenset[str]:
    if isinstance(f, Bool):
        return frozenset()
    if isinstance(f, Cmp):
        return f.lhs.variables() | f.rhs.variables()
    if isinstance(f, Divides):
        return f.term.variables()
    if isinstance(f, Not):
        return free_variables(f.child)
    if isinstance(f, (And, Or)):
        out: frozenset[str] = frozenset()
        for c in f.children:
            out |= free_variables(c)
        return out
    if isinstance(f, Exists):
        return free_variables(f.child) - frozenset(f.variables)
    raise TypeError(f)


def rename_variables(f: Formula, mapping: Mapping[str, str]) -> Formula:
    def rt(t: LinearTerm) -> LinearTerm:
        return term({mapping.get(v, v): c for v, c in t.coeffs}, t.const)

    if isinstance(f, Bool):
        return f
    if isinstance(f, Cmp):
        return Cmp(f.op, rt(f.lhs), rt(f.rhs))
    if isinstance(f, Divides):
        return Divides(f.modulus, rt(f.term))
    if isinstance(f, Not):
        return Not(rename_variables(f.child, mapping))
    if isinstance(f, And):
        return And(tuple(rename_variables(c, mapping) for c in f.children))
    if isinstance(f, Or):
        return Or(tuple(rename_variables(c, mapping) for c in f.children))
    if isinstance(f, Exists):
        inner = {k: v for k, v in mapping.items() if k not in f.variables}
        return Exists(f.variables, rename_variables(f.child, inner))
    raise TypeError(f)


def exists(variables: Iterable[str], child: Formula) -> Formula:
    """Existential quantification; bound names colliding with names already
    bound inside the child are alpha-renamed."""
    vs = tuple(variables)
    if not vs:
        return child
    clash = set(vs) & bound_variables(child)
    if clash:
        mapping = {v: f"{v}~{next(_FRESH)}" for v in clash}
        vs = tuple(mapping.get(v, v) for v in vs)
        child = rename_variables(child, mapping)
    return Exists(vs, child)


def evaluate(f: Formula, valuation: Valuation, exists_bound: int | None = None) -> bool:
    """Standard semantics over the integers given by the valuation.

    Quantifiers range over 0..exists_bound (the brute-force oracle harness);
    evaluating a quantified formula without a bound is an error.
    """
    if isinstance(f, Bool):
        return f.value
    if isinstance(f, Cmp):
        a, b = f.lhs.value(valuation), f.rhs.value(valuation)
        return {
            "=": a == b,
            "!=": a != b,
            "<": a < b,
            "<=": a <= b,
            ">": a > b,
            ">=": a >= b,
        }[f.op]
    if isinstance(f, Divides):
        return f.term.value(valuation) % f.modulus == 0
    if isinstance(f, Not):
        return not evaluate(f.child, valuation, exists_bound)
    if isinstance(f, And):
        return all(evaluate(c, valuation, exists_bound) for c in f.children)
    if isinstance(f, Or):
        return any(evaluate(c, valuation, exists_bound) for c in f.children)
    if isinstance(f, Exists):
        if exists_bound is None:
            raise ValueError("evaluating a quantifier needs an explicit bound")
        rng = range(exists_bound + 1)
        base = dict(valuation)

        def search(i: int) -> bool:
            if i == len(f.variables):
                return evaluate(f.child, base, exists_bound)
            for x in rng:
                base[f.variables[i]] = x
                if search(i + 1):
                    return True
            del base[f.variables[i]]
            return False

        return search(0)
    raise TypeError(f)


def nonneg_constraints(variables: Iterable[str]) -> Formula:
    return land(*(cmp(">=", var(v), 0) for v in sorted(variables)))


def formula_size(f: Formula) -> int:
    """Number of atoms, used for work budgets."""
    if isinstance(f, (Bool, Cmp, Divides)):
        return 1
    if isinstance(f, Not):
        return formula_size(f.child)
    if isinstance(f, (And, Or)):
        return sum(formula_size(c) for c in f.children)
    if isinstance(f, Exists):
        return formula_size(f.child)
    raise TypeError(f)
