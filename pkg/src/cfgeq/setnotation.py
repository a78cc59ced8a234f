"""Readable descriptions of bounded languages and Parikh-set differences.

The pipeline after quantifier elimination: bring the predicate into a
comprehensible normal form (a common conjunction prefix followed by one
disjunction of conjunctive clauses), then sugar the result for display
(merged bound pairs, equations solved for a variable, exponent substitution
into the witness blocks).  The exact rendering is documented in
docs/format-setnotation.md.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .budget import Budget, BudgetExceeded
from .presburger import (
    FALSE,
    TRUE,
    And,
    Bool,
    Cmp,
    Divides,
    Formula,
    LinearTerm,
    Not,
    Or,
    const,
    land,
    lnot,
    lor,
    term,
    var,
)
from . import qe

DNF_CLAUSE_BUDGET = 5000

Atom = tuple  # internal atom tuples from cfgeq.qe


def _normalize_clause(clause: frozenset[Atom]) -> frozenset[Atom] | None:
    """Tighten bounds inside a clause; None when the clause is contradictory."""
    merged = qe.simplify(qe._iand(tuple(sorted(clause, key=repr))))
    if merged == qe.I_FALSE:
        return None
    if merged == qe.I_TRUE:
        return frozenset()
    if merged[0] == "and":
        return frozenset(merged[1])
    return frozenset({merged})


def comprehensible_normal_form(f: Formula, budget: Budget | None = None) -> Formula:
    """Common-prefix conjunction followed by a disjunction of conjunctive
    clauses; clauses deduplicated, subsumed clauses removed.

    On DNF overflow the input is returned unchanged (flagged by the caller
    noticing the shape); the formula is always semantically preserved.
    """
    internal = qe.to_internal(f)
    try:
        raw = qe.dnf_clauses(internal, DNF_CLAUSE_BUDGET, budget)
    except BudgetExceeded:
        return f
    clauses: list[frozenset[Atom]] = []
    for cl in raw:
        norm = _normalize_clause(cl)
        if norm is not None and norm not in clauses:
            clauses.append(norm)
    if not clauses:
        return FALSE
    # subsumption: a clause with a subset of another's atoms covers it
    clauses = [
        cl
        for i, cl in enumerate(clauses)
        if not any(other < cl or (other == cl and j < i) for j, other in enumerate(clauses) if j != i)
    ]
    common = frozenset.intersection(*clauses)
    residual = [sorted(cl - common, key=repr) for cl in clauses]
    residual = [r for r in residual if r] if all(residual) else []
    prefix = [qe.to_public(a) for a in sorted(common, key=repr)]
    if not residual:
        return land(*prefix)
    disjunction = lor(*(land(*(qe.to_public(a) for a in cl)) for cl in residual))
    return land(*prefix, disjunction)


def split_comprehensible(f: Formula) -> tuple[list[Formula], list[list[Formula]]]:
    """(prefix atoms, disjunction clauses) of a comprehensible-normal-form
    formula; a pure conjunction has no clauses."""

    def atoms_of(g: Formula) -> list[Formula]:
        if isinstance(g, And):
            out = []
            for c in g.children:
                out.extend(atoms_of(c))
            return out
        return [g]

    if isinstance(f, Or):
        return [], [atoms_of(c) for c in f.children]
    if not isinstance(f, And):
        return atoms_of(f), []
    prefix: list[Formula] = []
    clauses: list[list[Formula]] = []
    for child in f.children:
        if isinstance(child, Or):
            clauses = [atoms_of(c) for c in child.children]
        else:
            prefix.extend(atoms_of(child))
    return prefix, clauses


def _rebuild_cnf(prefix: list[Formula], clauses: list[list[Formula]]) -> Formula:
    if not clauses:
        return land(*prefix)
    return land(*prefix, lor(*(land(*c) for c in clauses)))


def _unsat(f: Formula, nonneg: set[str], budget: Budget | None) -> bool:
    try:
        return qe.satisfiable(f, nonneg=nonneg, budget=budget or Budget(ms=2000)) is None
    except BudgetExceeded:
        return False


def domain_simplify(f: Formula, domain_vars: set[str], budget: Budget | None = None) -> Formula:
    """Simplify a comprehensible-normal-form predicate under the assumption
    that every domain variable is a non-negative integer.

    Drops clauses impossible over the domain, drops atoms implied by the rest
    of their clause, and tightens single-variable bounds through divisibility
    atoms (i >= 0 with i odd becomes i >= 1).  Exactness of every step is
    checked with the decision procedure itself.
    """
    from .presburger import nonneg_constraints

    dom = nonneg_constraints(domain_vars)
    prefix, clauses = split_comprehensible(f)

    def tighten(atoms: list[Formula], context: list[Formula]) -> list[Formula] | None:
        if _unsat(land(dom, *context, *atoms), domain_vars, budget):
            return None
        # single-variable lower bounds snap to the least value allowed by the
        # variable's divisibility atoms
        residues: dict[str, list[tuple[int, int]]] = {}
        for a in atoms + context:
            if isinstance(a, Divides) and len(a.term.coeffs) == 1 and a.term.coeffs[0][1] == 1:
                v = a.term.coeffs[0][0]
                residues.setdefault(v, []).append((a.modulus, (-a.term.const) % a.modulus))
        out: list[Formula] = []
        for i, a in enumerate(atoms):
            rest = atoms[:i] + atoms[i + 1 :] + context
            if _unsat(land(dom, *rest, lnot(a)), domain_vars, budget):
                continue  # implied by the others over the domain
            if isinstance(a, Cmp) and a.op == "<":
                t = a.lhs - a.rhs
                if len(t.coeffs) == 1 and t.coeffs[0][1] == -1:
                    v = t.coeffs[0][0]
                    lo = t.const + 1  # -v + d < 0  <=>  v >= d+1
                    if v in residues:
                        step = 1
                        cand = max(lo, 0)
                        for _ in range(64):
                            if all(cand % m == r for m, r in residues[v]):
                                break
                            cand += step
                        a = qe.to_public(qe._norm_atom(("lt", term({v: -1}, cand - 1))))
            out.append(a)
        # divisibility atoms that exclude 0 imply a positive lower bound worth
        # spelling out (i odd reads better with an explicit i >= 1)
        bounded_vars = {
            t.coeffs[0][0]
            for a in out + context
            if isinstance(a, Cmp) and a.op == "<" and len((t := a.lhs - a.rhs).coeffs) == 1
        }
        for v, rs in sorted(residues.items()):
            if v in bounded_vars:
                continue
            cand = 0
            for _ in range(64):
                if all(cand % m == r for m, r in rs):
                    break
                cand += 1
            if cand > 0:
                out.append(qe.to_public(qe._norm_atom(("lt", term({v: -1}, cand - 1)))))
        return out

    new_prefix = tighten(prefix, [])
    if new_prefix is None:
        return FALSE
    new_clauses = []
    for cl in clauses:
        t = tighten(cl, new_prefix)
        if t is not None:
            new_clauses.append(t if t else [TRUE])
    if clauses and not new_clauses:
        return FALSE
    # a clause reduced to TRUE makes the disjunction vacuous
    if any(cl == [TRUE] for cl in new_clauses):
        new_clauses = []
    return _rebuild_cnf(new_prefix, new_clauses)


def merge_clauses(f: Formula, domain_vars: set[str], budget: Budget | None = None) -> Formula:
    """Merge disjunction clauses pairwise when one clause, after dropping or
    relaxing a single bound, exactly covers the union of the two (verified by
    unsatisfiability checks)."""
    from .presburger import nonneg_constraints

    dom = nonneg_constraints(domain_vars)
    prefix, clauses = split_comprehensible(f)
    changed = True
    rounds = 0
    while changed and rounds < 20:
        changed = False
        rounds += 1
        for i in range(len(clauses)):
            for j in range(len(clauses)):
                if i == j:
                    continue
                a, b = clauses[i], clauses[j]
                candidates: list[list[Formula]] = []
                for k, atom in enumerate(b):
                    rest = b[:k] + b[k + 1 :]
                    candidates.append(rest)  # drop
                    if isinstance(atom, Cmp) and atom.op == "<":
                        t = atom.lhs - atom.rhs
                        for delta in (1, 2, 3, 4):
                            relaxed = qe.to_public(qe._norm_atom(("lt", t + const(-delta))))
                            candidates.append(rest + [relaxed])
                merged = None
                for m in candidates:
                    body = land(dom, *prefix, *m)
                    covers_a = _unsat(land(dom, *prefix, *a, lnot(land(*m) if m else TRUE)), domain_vars, budget)
                    inside = _unsat(
                        land(body, lnot(land(*a) if a else TRUE), lnot(land(*b) if b else TRUE)),
                        domain_vars,
                        budget,
                    )
                    if covers_a and inside:
                        merged = m
                        break
                if merged is not None:
                    keep = [cl for idx, cl in enumerate(clauses) if idx not in (i, j)]
                    clauses = keep + [merged if merged else [TRUE]]
                    changed = True
                    break
            if changed:
                break
    if any(cl == [TRUE] for cl in clauses):
        clauses = []
    return _rebuild_cnf(prefix, clauses)


def polish_predicate(f: Formula, domain_vars: set[str], budget: Budget | None = None) -> Formula:
    """comprehensible normal form + domain-aware cleanup + clause merging."""
    normal = comprehensible_normal_form(f, budget)
    normal = domain_simplify(normal, domain_vars, budget)
    normal = merge_clauses(normal, domain_vars, budget)
    # merging can expose a new common prefix
    return comprehensible_normal_form(normal, budget)


def is_concise(f: Formula) -> bool:
    """The conciseness criteria for explanations: at most 3 disjunction
    clauses, at most 5 prefix atoms, at most 3 atoms per clause, and no more
    than 5 atoms in total."""
    prefix, clauses = split_comprehensible(f)

    def count(atoms: list[Formula]) -> int:
        return sum(0 if a == TRUE else 1 for a in atoms)

    m0 = count(prefix)
    total = m0 + sum(count(c) for c in clauses)
    return (
        len(clauses) <= 3
        and m0 <= 5
        and all(count(c) <= 3 for c in clauses)
        and total <= 5
    )


# --------------------------------------------------------------- rendering

EXPONENT_NAMES = "ijklmnopqrstuv"


@dataclass(frozen=True)
class SetNotation:
    witness: tuple[str, ...]
    exponents: tuple[LinearTerm, ...]  # one linear expression per block
    exponent_vars: tuple[str, ...]
    predicate: Formula
    rendered: str


def _fmt_term(t: LinearTerm) -> str:
    return str(t)


def _solve_for(t: LinearTerm) -> tuple[str, LinearTerm] | None:
    """Pick the last unit-coefficient variable of t = 0 and solve for it."""
    candidates = [v for v, c in t.coeffs if c in (1, -1)]
    if not candidates:
        return None
    v = candidates[-1]
    c = t.coeff(v)
    rest = (t + var(v, -c)).scale(-c)
    return v, rest


def _atom_str(a: Formula) -> str:
    if isinstance(a, Bool):
        return "true" if a.value else "false"
    if isinstance(a, Not) and isinstance(a.child, Divides):
        k, t = a.child.modulus, a.child.term
        u = term(dict(t.coeffs))
        r = (-t.const) % k
        return f"{_fmt_term(u)} ≢_{k} {r}"
    if isinstance(a, Divides):
        u = term(dict(a.term.coeffs))
        r = (-a.term.const) % a.modulus
        return f"{_fmt_term(u)} ≡_{a.modulus} {r}"
    if isinstance(a, Cmp):
        t = a.lhs - a.rhs
        if a.op == "=":
            solved = _solve_for(t)
            if solved:
                v, rest = solved
                return f"{v} = {_fmt_term(rest)}"
            return f"{_fmt_term(t)} = 0"
        if a.op == "<":
            # u + d < 0  <=>  pos <= neg - d - 1
            pos = term({v: c for v, c in t.coeffs if c > 0})
            neg = term({v: -c for v, c in t.coeffs if c < 0})
            bound = neg + const(-t.const - 1)
            if not pos.coeffs:
                return f"{_fmt_term(bound)} ≥ 0" if bound.coeffs else "false"
            main = f"{_fmt_term(pos)} ≤ {_fmt_term(bound)}"
            if not bound.coeffs and not pos.const:
                ge = pos.scale(1)
                return f"{_fmt_term(ge)} ≤ {bound.const}"
            return main
        return f"{_fmt_term(a.lhs)} {a.op} {_fmt_term(a.rhs)}"
    raise TypeError(a)


def _single_var_bounds(atoms: list[Formula]) -> tuple[dict[str, list[int | None]], list[Formula]]:
    """Extract per-variable lo/hi bounds (coefficient 1); rest untouched."""
    bounds: dict[str, list[int | None]] = {}
    rest: list[Formula] = []
    for a in atoms:
        if isinstance(a, Cmp) and a.op == "<":
            t = a.lhs - a.rhs
            if len(t.coeffs) == 1:
                v, c = t.coeffs[0]
                if c == 1:  # v + d < 0: v <= -d-1
                    b = bounds.setdefault(v, [None, None])
                    hi = -t.const - 1
                    b[1] = hi if b[1] is None else min(b[1], hi)
                    continue
                if c == -1:  # -v + d < 0: v >= d+1
                    b = bounds.setdefault(v, [None, None])
                    lo = t.const + 1
                    b[0] = lo if b[0] is None else max(b[0], lo)
                    continue
        rest.append(a)
    return bounds, rest


def _display_normal(a: Formula) -> Formula:
    """Comparisons arrive in assorted shapes; normalize to the internal
    <-or-= form so bound merging and presentation rules apply uniformly."""
    if isinstance(a, Cmp) and a.op not in ("=", "<"):
        return qe.to_public(qe.to_internal(a))
    return a


def _atoms_str(atoms: list[Formula]) -> list[str]:
    atoms = [_display_normal(a) for a in atoms]
    bounds, rest = _single_var_bounds(atoms)
    parts: list[str] = []
    for v in sorted(bounds):
        lo, hi = bounds[v]
        if lo is not None and hi is not None:
            parts.append(f"{lo} ≤ {v} ≤ {hi}")
        elif lo is not None:
            parts.append(f"{v} ≥ {lo}")
        else:
            parts.append(f"{v} ≤ {hi}")
    parts.extend(_atom_str(a) for a in rest)
    return parts


def render_predicate(f: Formula) -> str:
    if f == TRUE:
        return "true"
    if f == FALSE:
        return "false"
    prefix, clauses = split_comprehensible(f)
    parts = _atoms_str(prefix)
    if clauses:
        rendered_clauses = [" ∧ ".join(_atoms_str(c)) for c in clauses]
        parts.append("(" + " ∨ ".join(rendered_clauses) + ")")
    return " ∧ ".join(parts)


def _block_str(word: str, exponent: LinearTerm) -> str:
    base = word if len(word) == 1 else f"({word})"
    if not exponent.coeffs:
        if exponent.const == 0:
            return ""
        if exponent.const == 1:
            return word if len(word) == 1 else f"({word})"
        return f"{base}^{exponent.const}"
    if len(exponent.coeffs) == 1 and exponent.const == 0 and exponent.coeffs[0][1] == 1:
        return f"{base}^{exponent.coeffs[0][0]}"
    return f"{base}^{{{_fmt_term(exponent)}}}"


def render_set_notation(sn: SetNotation) -> str:
    blocks = " ".join(b for b in (_block_str(w, e) for w, e in zip(sn.witness, sn.exponents)) if b)
    if not blocks:
        blocks = "ε"
    if not sn.exponent_vars:
        if sn.predicate == FALSE:
            return "{}"
        return "{" + blocks + "}"
    head = ",".join(sn.exponent_vars) + " ∈ ℕ0"
    pred = render_predicate(sn.predicate)
    body = head if pred == "true" else f"{head} ∧ {pred}"
    return "{" + blocks + " | " + body + "}"


def make_set_notation(witness: tuple[str, ...], predicate: Formula) -> SetNotation:
    """Name the exponents i, j, k, ... and build the un-sugared notation.

    The predicate must be quantifier-free with free variables x1..xl (one per
    witness block).
    """
    names = tuple(EXPONENT_NAMES[i] for i in range(len(witness)))
    mapping = {f"x{i + 1}": names[i] for i in range(len(witness))}
    from .presburger import rename_variables

    pred = rename_variables(predicate, mapping)
    sn = SetNotation(
        witness=witness,
        exponents=tuple(var(n) for n in names),
        exponent_vars=names,
        predicate=pred,
        rendered="",
    )
    return replace(sn, rendered=render_set_notation(sn))


def apply_sugar(sn: SetNotation) -> SetNotation:
    """Substitution sugar: prefix equations pin an exponent to a term over the
    other exponents (or a constant), so the variable moves into the witness
    blocks and disappears from the predicate.

    Bound-pair merging and natural equation presentation happen at render
    time; this operation only changes the structure (exponents, variables,
    predicate) plus the rendered string.
    """
    prefix, clauses = split_comprehensible(sn.predicate)
    exponents = list(sn.exponents)
    names = list(sn.exponent_vars)
    changed = True
    while changed:
        changed = False
        for i, atom in enumerate(prefix):
            if not (isinstance(atom, Cmp) and atom.op == "="):
                continue
            t = atom.lhs - atom.rhs
            solved = _solve_for(t)
            if solved is None:
                continue
            v, rest = solved
            if v not in names or v in rest.variables():
                continue
            # substitute v := rest everywhere
            def subst_term(u: LinearTerm) -> LinearTerm:
                c = u.coeff(v)
                if c == 0:
                    return u
                return u + var(v, -c) + rest.scale(c)

            exponents = [subst_term(e) for e in exponents]
            internal = qe.to_internal(land(*prefix[:i], *prefix[i + 1 :]))
            internal = qe.isubst(internal, v, rest)
            new_prefix_f = qe.to_public(qe.simplify(internal))
            new_clauses = []
            for cl in clauses:
                ci = qe.isubst(qe.to_internal(land(*cl)), v, rest)
                new_clauses.append(qe.to_public(qe.simplify(ci)))
            names.remove(v)
            pred = land(new_prefix_f, lor(*new_clauses) if new_clauses else TRUE)
            pred = polish_predicate(pred, set(names))
            prefix, clauses = split_comprehensible(pred)
            changed = True
            break
    predicate = land(*prefix, lor(*(land(*c) for c in clauses)) if clauses else TRUE)
    out = SetNotation(
        witness=sn.witness,
        exponents=tuple(exponents),
        exponent_vars=tuple(names),
        predicate=predicate,
        rendered="",
    )
    return replace(out, rendered=render_set_notation(out))
