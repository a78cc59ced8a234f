"""Quantifier elimination via Cooper's method, plus satisfiability with models.

Divisibility atoms are first-class, which is exactly what the Parikh-image
formulas need.  Internally formulas are negation-normal nested tuples with
four atom kinds:

    ("lt", t)      t < 0
    ("eq", t)      t = 0
    ("div", k, t)  k divides t
    ("ndiv", k, t) k does not divide t

Equalities on a quantified variable with a unit coefficient are substituted
away before Cooper runs; that removes almost every variable the Parikh
construction introduces.
"""

from __future__ import annotations

from math import gcd, lcm

from .budget import Budget, BudgetExceeded
from .presburger import (
    FALSE,
    TRUE,
    And,
    Bool,
    Cmp,
    Divides,
    Exists,
    Formula,
    LinearTerm,
    Not,
    Or,
    Valuation,
    const,
    evaluate,
    free_variables,
    land,
    lnot,
    lor,
    term,
    var,
)

DEFAULT_ATOM_BUDGET = 200_000

Internal = tuple  # ("true",) ("false",) ("lt",t) ("eq",t) ("div",k,t) ("ndiv",k,t) ("and",kids) ("or",kids)

I_TRUE: Internal = ("true",)
I_FALSE: Internal = ("false",)


def _iand(children) -> Internal:
    flat = []
    for c in children:
        if c[0] == "and":
            flat.extend(c[1])
        elif c == I_FALSE:
            return I_FALSE
        elif c != I_TRUE:
            flat.append(c)
    seen, out = set(), []
    for c in flat:
        if c not in seen:
            seen.add(c)
            out.append(c)
    if not out:
        return I_TRUE
    return out[0] if len(out) == 1 else ("and", tuple(out))


def _ior(children) -> Internal:
    flat = []
    for c in children:
        if c[0] == "or":
            flat.extend(c[1])
        elif c == I_TRUE:
            return I_TRUE
        elif c != I_FALSE:
            flat.append(c)
    seen, out = set(), []
    for c in flat:
        if c not in seen:
            seen.add(c)
            out.append(c)
    if not out:
        return I_FALSE
    return out[0] if len(out) == 1 else ("or", tuple(out))


def to_internal(f: Formula, negate: bool = False) -> Internal:
    if isinstance(f, Bool):
        return I_FALSE if f.value == negate else I_TRUE
    if isinstance(f, Not):
        return to_internal(f.child, not negate)
    if isinstance(f, And):
        kids = tuple(to_internal(c, negate) for c in f.children)
        return _ior(kids) if negate else _iand(kids)
    if isinstance(f, Or):
        kids = tuple(to_internal(c, negate) for c in f.children)
        return _iand(kids) if negate else _ior(kids)
    if isinstance(f, Divides):
        kind = "ndiv" if negate else "div"
        return _norm_atom((kind, f.modulus, f.term))
    if isinstance(f, Cmp):
        op = f.op
        if negate:
            op = {"=": "!=", "!=": "=", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}[op]
        t = f.lhs - f.rhs
        if op == "=":
            return _norm_atom(("eq", t))
        if op == "!=":
            return _ior((_norm_atom(("lt", t)), _norm_atom(("lt", t.scale(-1)))))
        if op == "<":
            return _norm_atom(("lt", t))
        if op == "<=":
            return _norm_atom(("lt", t + const(-1)))
        if op == ">":
            return _norm_atom(("lt", t.scale(-1)))
        if op == ">=":
            return _norm_atom(("lt", t.scale(-1) + const(-1)))
    if isinstance(f, Exists):
        raise ValueError("quantifier reached atom conversion; eliminate first")
    raise TypeError(f)


def to_public(f: Internal) -> Formula:
    kind = f[0]
    if kind == "true":
        return TRUE
    if kind == "false":
        return FALSE
    if kind == "lt":
        return Cmp("<", f[1], const(0))
    if kind == "eq":
        return Cmp("=", f[1], const(0))
    if kind == "div":
        return Divides(f[1], f[2])
    if kind == "ndiv":
        return Not(Divides(f[1], f[2]))
    if kind == "and":
        return land(*(to_public(c) for c in f[1]))
    if kind == "or":
        return lor(*(to_public(c) for c in f[1]))
    raise TypeError(f)


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _norm_atom(a: Internal) -> Internal:
    """Canonicalize an atom; ground atoms evaluate to true/false."""
    kind = a[0]
    if kind == "lt":
        t: LinearTerm = a[1]
        if not t.coeffs:
            return I_TRUE if t.const < 0 else I_FALSE
        g = gcd(*(abs(c) for _, c in t.coeffs))
        if g > 1:
            # g*u + d < 0  <=>  u <= ceil(-d/g) - 1  <=>  u - ceil(-d/g) < 0
            u = LinearTerm(tuple((v, c // g) for v, c in t.coeffs), 0)
            t = u + const(-_ceil_div(-t.const, g))
        return ("lt", t)
    if kind == "eq":
        t = a[1]
        if not t.coeffs:
            return I_TRUE if t.const == 0 else I_FALSE
        g = gcd(*(abs(c) for _, c in t.coeffs))
        if g > 1:
            if t.const % g != 0:
                return I_FALSE
            t = LinearTerm(tuple((v, c // g) for v, c in t.coeffs), t.const // g)
        # sign-normalize so t=0 and -t=0 coincide
        if t.coeffs[0][1] < 0:
            t = t.scale(-1)
        return ("eq", t)
    if kind in ("div", "ndiv"):
        k, t = a[1], a[2]
        coeffs = {v: c % k for v, c in t.coeffs}
        t = term(coeffs, t.const % k)
        if not t.coeffs:
            hit = t.const % k == 0
            return (I_TRUE if hit else I_FALSE) if kind == "div" else (I_FALSE if hit else I_TRUE)
        g = gcd(k, *(abs(c) for _, c in t.coeffs), abs(t.const)) if t.const else gcd(k, *(abs(c) for _, c in t.coeffs))
        if g > 1 and t.const % g == 0:
            k //= g
            t = LinearTerm(tuple((v, c // g) for v, c in t.coeffs), t.const // g)
            if k == 1:
                return I_TRUE if kind == "div" else I_FALSE
            coeffs = {v: c % k for v, c in t.coeffs}
            t = term(coeffs, t.const % k)
            if not t.coeffs:
                hit = t.const % k == 0
                return (I_TRUE if hit else I_FALSE) if kind == "div" else (I_FALSE if hit else I_TRUE)
        return (kind, k, t)
    return a


def _atom_subst(a: Internal, x: str, repl: LinearTerm) -> Internal:
    kind = a[0]
    if kind in ("lt", "eq"):
        t: LinearTerm = a[1]
        c = t.coeff(x)
        if c == 0:
            return a
        return _norm_atom((kind, t + var(x, -c) + repl.scale(c)))
    if kind in ("div", "ndiv"):
        t = a[2]
        c = t.coeff(x)
        if c == 0:
            return a
        return _norm_atom((kind, a[1], t + var(x, -c) + repl.scale(c)))
    return a


def isubst(f: Internal, x: str, repl: LinearTerm) -> Internal:
    kind = f[0]
    if kind == "and":
        return _iand(tuple(isubst(c, x, repl) for c in f[1]))
    if kind == "or":
        return _ior(tuple(isubst(c, x, repl) for c in f[1]))
    if kind in ("true", "false"):
        return f
    return _atom_subst(f, x, repl)


def _atom_vars(a: Internal) -> frozenset[str]:
    if a[0] in ("lt", "eq"):
        return a[1].variables()
    if a[0] in ("div", "ndiv"):
        return a[2].variables()
    return frozenset()


def _subst_scaled(f: Internal, x: str, scale: int, rest: LinearTerm) -> Internal:
    """Substitute through the equation scale*x + rest = 0 (scale > 0): every
    atom with x-coefficient a is multiplied by scale (safe: scale > 0) and
    scale*x is then replaced by -rest."""
    kind = f[0]
    if kind == "and":
        return _iand(tuple(_subst_scaled(c, x, scale, rest) for c in f[1]))
    if kind == "or":
        return _ior(tuple(_subst_scaled(c, x, scale, rest) for c in f[1]))
    if kind in ("true", "false"):
        return f
    if kind in ("lt", "eq"):
        t = f[1]
        a = t.coeff(x)
        if a == 0:
            return f
        new_term = (t + var(x, -a)).scale(scale) + rest.scale(-a)
        return _norm_atom((kind, new_term))
    if kind in ("div", "ndiv"):
        k, t = f[1], f[2]
        a = t.coeff(x)
        if a == 0:
            return f
        new_term = (t + var(x, -a)).scale(scale) + rest.scale(-a)
        return _norm_atom((kind, k * scale, new_term))
    raise TypeError(f)


def ivars(f: Internal) -> frozenset[str]:
    if f[0] in ("and", "or"):
        out: frozenset[str] = frozenset()
        for c in f[1]:
            out |= ivars(c)
        return out
    return _atom_vars(f)


def isize(f: Internal) -> int:
    if f[0] in ("and", "or"):
        return sum(isize(c) for c in f[1])
    return 1


def _merge_bounds(children: list[Internal]) -> list[Internal] | None:
    """Tighten same-direction comparisons inside a conjunction.

    Groups lt/eq atoms by sign-normalized coefficient vector, keeps the
    strongest bounds, and reports contradictions (None means FALSE).
    """
    other: list[Internal] = []
    lo: dict = {}
    hi: dict = {}
    eqs: dict = {}
    div_residues: dict = {}
    ndiv_residues: dict = {}

    def vec_of(t: LinearTerm):
        flip = t.coeffs[0][1] < 0
        base = tuple((v, -c if flip else c) for v, c in t.coeffs)
        return base, flip

    for c in children:
        if c[0] == "lt":
            t = c[1]
            base, flip = vec_of(t)
            if flip:
                # -u + d < 0  <=>  u > d  <=>  u >= d + 1
                bound = t.const + 1
                if base not in lo or bound > lo[base]:
                    lo[base] = bound
            else:
                # u + d < 0  <=>  u <= -d - 1
                bound = -t.const - 1
                if base not in hi or bound < hi[base]:
                    hi[base] = bound
        elif c[0] == "eq":
            t = c[1]
            base, _ = vec_of(t)  # eq atoms are already sign-normalized
            val = -t.const
            if base in eqs and eqs[base] != val:
                return None
            eqs[base] = val
        elif c[0] in ("div", "ndiv"):
            k, t = c[1], c[2]
            key = (k, t.coeffs)
            residue = (-t.const) % k
            table = div_residues if c[0] == "div" else ndiv_residues
            table.setdefault(key, set()).add(residue)
            other.append(c)
        else:
            other.append(c)
    for key, residues in div_residues.items():
        if len(residues) > 1:
            return None  # the same term cannot leave two different residues
        if residues & ndiv_residues.get(key, set()):
            return None

    out = list(other)
    for base in sorted(set(lo) | set(hi) | set(eqs)):
        u = LinearTerm(base, 0)
        if base in eqs:
            v = eqs[base]
            if base in lo and v < lo[base]:
                return None
            if base in hi and v > hi[base]:
                return None
            out.append(("eq", u + const(-v)))
            continue
        lo_v, hi_v = lo.get(base), hi.get(base)
        if lo_v is not None and hi_v is not None:
            if lo_v > hi_v:
                return None
            if lo_v == hi_v:
                out.append(("eq", u + const(-lo_v)))
                continue
        if lo_v is not None:
            out.append(_norm_atom(("lt", u.scale(-1) + const(lo_v - 1))))
        if hi_v is not None:
            out.append(_norm_atom(("lt", u + const(-hi_v - 1))))
    return out


def _triangulate(children: tuple[Internal, ...]) -> list[Internal] | None:
    """Solve the conjunction's equalities for unit-coefficient variables and
    substitute through every other child in one pass; None means FALSE."""
    eq_terms = [c[1] for c in children if c[0] == "eq"]
    others = [c for c in children if c[0] != "eq"]
    if not eq_terms:
        return list(children)
    occurrences: dict[str, int] = {}
    for c in children:
        for v in _atom_vars(c) if c[0] not in ("and", "or") else ivars(c):
            occurrences[v] = occurrences.get(v, 0) + 1
    solved: list[tuple[str, LinearTerm]] = []
    kept_eqs: list[LinearTerm] = []

    def apply_solved(t: LinearTerm) -> LinearTerm:
        for v, repl in solved:
            c = t.coeff(v)
            if c:
                t = t + var(v, -c) + repl.scale(c)
        return t

    for t in eq_terms:
        a = _norm_atom(("eq", apply_solved(t)))
        if a == I_FALSE:
            return None
        if a == I_TRUE:
            continue
        t = a[1]
        units = [v for v, c in t.coeffs if c in (1, -1)]
        if units:
            # eliminating the rarest variable grows the conjunction least
            v = min(units, key=lambda u: (occurrences.get(u, 0), u))
            c0 = t.coeff(v)
            solved.append((v, (t + var(v, -c0)).scale(-c0)))
        else:
            kept_eqs.append(t)
    # compose so no replacement mentions a solved variable
    for i in range(len(solved) - 1, -1, -1):
        vi, ri = solved[i]
        for j in range(i):
            vj, rj = solved[j]
            cj = rj.coeff(vi)
            if cj:
                solved[j] = (vj, rj + var(vi, -cj) + ri.scale(cj))
    out: list[Internal] = []
    for v, repl in solved:
        out.append(_norm_atom(("eq", var(v) - repl)))
    for t in kept_eqs:
        a = _norm_atom(("eq", apply_solved(t)))
        if a == I_FALSE:
            return None
        if a != I_TRUE:
            out.append(a)
    for child in others:
        sub = child
        for v, repl in solved:
            sub = isubst(sub, v, repl)
        if sub == I_FALSE:
            return None
        if sub != I_TRUE:
            out.append(sub)
    return out


def simplify(f: Internal, budget: Budget | None = None) -> Internal:
    if budget is not None:
        budget.tick()
    kind = f[0]
    if kind == "and":
        kids = [simplify(c, budget) for c in f[1]]
        merged = _iand(kids)
        for _ in range(1 + len(ivars(merged) if merged[0] == "and" else frozenset())):
            if merged[0] != "and":
                return merged
            propagated = _triangulate(merged[1])
            if propagated is None:
                return I_FALSE
            tightened = _merge_bounds(propagated)
            if tightened is None:
                return I_FALSE
            result = _iand(tightened)
            if result == merged:
                return result
            merged = result  # bound merging may have created new equalities
        return merged
    if kind == "or":
        kids = [simplify(c, budget) for c in f[1]]
        merged = _ior(kids)
        if merged[0] != "or" or len(merged[1]) > 400:
            return merged
        # drop disjuncts that conjoin a strict superset of another's atoms
        def atom_set(c: Internal) -> frozenset | None:
            if c[0] == "and":
                return frozenset(c[1]) if all(k[0] not in ("and", "or") for k in c[1]) else None
            return frozenset((c,)) if c[0] not in ("and", "or") else None

        sets = [(c, atom_set(c)) for c in merged[1]]
        keep: list[Internal] = []
        for i, (c, s) in enumerate(sets):
            if s is not None and any(
                t is not None and t < s or (t == s and j < i)
                for j, (_, t) in enumerate(sets)
                if j != i
            ):
                continue
            keep.append(c)
        return _ior(keep)
    if kind in ("true", "false"):
        return f
    return _norm_atom(f)


def _scaled_atoms(f: Internal, x: str, delta: int) -> Internal:
    """Rewrite so the coefficient of x is +/-1 everywhere (x stands for the
    scaled variable); equalities on x are split into two strict bounds."""
    kind = f[0]
    if kind == "and":
        return _iand(tuple(_scaled_atoms(c, x, delta) for c in f[1]))
    if kind == "or":
        return _ior(tuple(_scaled_atoms(c, x, delta) for c in f[1]))
    if kind in ("true", "false"):
        return f
    if kind == "eq":
        t = f[1]
        c = t.coeff(x)
        if c == 0:
            return f
        lo = _scaled_atoms(("lt", t + const(-1)), x, delta)
        hi = _scaled_atoms(("lt", t.scale(-1) + const(-1)), x, delta)
        return _iand((lo, hi))
    if kind == "lt":
        t = f[1]
        c = t.coeff(x)
        if c == 0:
            return f
        m = delta // abs(c)
        # multiplying a strict inequality by a positive constant is safe
        t = t.scale(m)
        c = t.coeff(x)
        rest = t + var(x, -c)
        return ("lt", rest + (var(x) if c > 0 else var(x, -1)))
    if kind in ("div", "ndiv"):
        k, t = f[1], f[2]
        c = t.coeff(x)
        if c == 0:
            return f
        m = delta // abs(c)
        k, t = k * m, t.scale(m)
        c = t.coeff(x)
        if c < 0:
            t = t.scale(-1)  # k | -s  <=>  k | s
        rest = t + var(x, -abs(c))
        return (kind, k, rest + var(x))
    raise TypeError(f)


def _coeff_lcm(f: Internal, x: str) -> int:
    kind = f[0]
    if kind in ("and", "or"):
        out = 1
        for c in f[1]:
            out = lcm(out, _coeff_lcm(c, x))
        return out
    if kind in ("lt", "eq"):
        c = f[1].coeff(x)
        return abs(c) if c else 1
    if kind in ("div", "ndiv"):
        c = f[2].coeff(x)
        return abs(c) if c else 1
    return 1


def _collect_bounds(f: Internal, x: str, lowers: list, uppers: list, moduli: list):
    kind = f[0]
    if kind in ("and", "or"):
        for c in f[1]:
            _collect_bounds(c, x, lowers, uppers, moduli)
        return
    if kind == "lt":
        t = f[1]
        c = t.coeff(x)
        if c == 1:
            uppers.append((t + var(x, -1)).scale(-1))  # x < a with a = -(rest)
        elif c == -1:
            lowers.append(t + var(x, 1))  # b < x with b = rest
    elif kind in ("div", "ndiv"):
        if f[2].coeff(x) != 0:
            moduli.append(f[1])


def _inf_subst(f: Internal, x: str, j: int, positive_inf: bool) -> Internal:
    """phi[-inf] / phi[+inf]: comparisons on x collapse, divisibilities keep x:=j."""
    kind = f[0]
    if kind == "and":
        return _iand(tuple(_inf_subst(c, x, j, positive_inf) for c in f[1]))
    if kind == "or":
        return _ior(tuple(_inf_subst(c, x, j, positive_inf) for c in f[1]))
    if kind == "lt":
        c = f[1].coeff(x)
        if c == 0:
            return f
        if c == 1:  # x < a
            return I_FALSE if positive_inf else I_TRUE
        return I_TRUE if positive_inf else I_FALSE  # b < x
    if kind in ("div", "ndiv"):
        if f[2].coeff(x) != 0:
            return _atom_subst(f, x, const(j))
        return f
    return f


def cooper_eliminate(f: Internal, x: str, budget: Budget) -> Internal:
    """Eliminate ∃x from an internal NNF formula.

    The existential distributes over disjunctions and ignores x-free
    conjuncts, so the expensive expansion only ever sees the x-core of one
    disjunct at a time.
    """
    f = simplify(f, budget)
    if x not in ivars(f):
        return f
    if f[0] == "or":
        return simplify(_ior(tuple(cooper_eliminate(c, x, budget) for c in f[1])), budget)
    if f[0] == "and":
        with_x = [c for c in f[1] if x in ivars(c)]
        without = [c for c in f[1] if x not in ivars(c)]
        if without:
            core = cooper_eliminate(_iand(tuple(with_x)), x, budget)
            return simplify(_iand(tuple(without) + (core,)), budget)
        # distribute the smallest inner disjunction so each branch is a pure
        # conjunction; equations then remove most variables by substitution
        or_children = [c for c in f[1] if c[0] == "or"]
        if or_children:
            pivot = min(or_children, key=lambda c: len(c[1]))
            rest = tuple(c for c in f[1] if c != pivot)
            branches = tuple(_iand(rest + (d,)) for d in pivot[1])
            return simplify(
                _ior(tuple(cooper_eliminate(b, x, budget) for b in branches)), budget
            )
    # equality at top conjunction level: substitute and be done (a unit
    # coefficient substitutes directly; otherwise scale every atom through
    # the coefficient and add the divisibility side-condition)
    conj = f[1] if f[0] == "and" else (f,)
    for c in conj:
        if c[0] == "eq":
            coeff = c[1].coeff(x)
            if coeff in (1, -1):
                repl = (c[1] + var(x, -coeff)).scale(-coeff)
                return simplify(isubst(f, x, repl), budget)
    for c in conj:
        if c[0] == "eq" and c[1].coeff(x) != 0:
            eq_term = c[1] if c[1].coeff(x) > 0 else c[1].scale(-1)
            scale = eq_term.coeff(x)  # scale * x + rest = 0, scale > 1
            rest = eq_term + var(x, -scale)
            others = tuple(k for k in conj if k != c)
            solvable = _norm_atom(("div", scale, rest)) if scale > 1 else I_TRUE
            substituted = [_subst_scaled(k, x, scale, rest) for k in others]
            return simplify(_iand((solvable, *substituted)), budget)
    delta = _coeff_lcm(f, x)
    g = _scaled_atoms(f, x, delta)
    if delta > 1:
        g = _iand((g, ("div", delta, var(x))))
    lowers: list[LinearTerm] = []
    uppers: list[LinearTerm] = []
    moduli: list[int] = []
    _collect_bounds(g, x, lowers, uppers, moduli)
    m = 1
    for k in moduli:
        m = lcm(m, k)
    lowers = list(dict.fromkeys(lowers))
    uppers = list(dict.fromkeys(uppers))
    use_minus_inf = len(lowers) <= len(uppers)
    bounds = lowers if use_minus_inf else uppers
    branches: list[Internal] = []
    seen: set[Internal] = set()
    total = 0
    for j in range(1, m + 1):
        candidates = [_inf_subst(g, x, j, positive_inf=not use_minus_inf)]
        sign = 1 if use_minus_inf else -1
        candidates.extend(isubst(g, x, b + const(sign * j)) for b in bounds)
        for cand in candidates:
            budget.tick()
            cand = simplify(cand, budget)
            if cand == I_FALSE or cand in seen:
                continue
            if cand == I_TRUE:
                return I_TRUE
            seen.add(cand)
            branches.append(cand)
            total += isize(cand)
            if total > DEFAULT_ATOM_BUDGET:
                raise BudgetExceeded(f"cooper expansion too large ({total} atoms)")
    return simplify(_ior(tuple(branches)), budget)


def _elimination_order(f: Internal, vs: list[str]) -> list[str]:
    """Cheap first: variables with a unit equality, then by bound count."""

    def cost(x: str) -> tuple:
        conj = f[1] if f[0] == "and" else (f,)
        for c in conj:
            if c[0] == "eq" and c[1].coeff(x) in (1, -1):
                return (0, x)
        lowers: list = []
        uppers: list = []
        moduli: list = []
        _collect_bounds(f, x, lowers, uppers, moduli)
        return (1 + min(len(lowers), len(uppers)) * max(moduli, default=1), x)

    return [x for _, x in sorted(cost(v) for v in vs)]


def eliminate_quantifiers(f: Formula, budget: Budget | None = None) -> Formula:
    """Equivalent quantifier-free formula over the integers.

    Raises BudgetExceeded when the intermediate formulas outgrow the budget;
    callers report that as a timeout outcome, distinct from unsat.
    """
    budget = budget or Budget(work=5_000_000)
    if isinstance(f, Exists):
        child = eliminate_quantifiers(f.child, budget)
        g = to_internal(child)
        remaining = [v for v in f.variables if v in ivars(g)]
        while remaining:
            x = _elimination_order(g, remaining)[0]
            remaining.remove(x)
            g = cooper_eliminate(g, x, budget)
            if isize(g) > DEFAULT_ATOM_BUDGET:
                raise BudgetExceeded(f"formula grew to {isize(g)} atoms")
        return to_public(g)
    if isinstance(f, Not):
        return lnot(eliminate_quantifiers(f.child, budget))
    if isinstance(f, And):
        return land(*(eliminate_quantifiers(c, budget) for c in f.children))
    if isinstance(f, Or):
        return lor(*(eliminate_quantifiers(c, budget) for c in f.children))
    return f


def _minimal_clauses(clauses: list[frozenset]) -> list[frozenset]:
    """Drop clauses that are supersets of another (the subset clause is the
    weaker conjunction and covers the superset's models)."""
    by_size = sorted(clauses, key=len)
    kept: list[frozenset] = []
    for cl in by_size:
        if not any(k <= cl for k in kept):
            kept.append(cl)
    return kept


def dnf_clauses(f: Internal, max_clauses: int, budget: Budget | None = None) -> list[frozenset]:
    """Disjunctive normal form as atom sets, pruning contradictory clauses at
    every product step; raises BudgetExceeded past max_clauses."""
    feasible_memo: dict[frozenset, bool] = {}

    def feasible(cl: frozenset) -> bool:
        hit = feasible_memo.get(cl)
        if hit is None:
            hit = simplify(_iand(tuple(sorted(cl, key=repr)))) != I_FALSE
            feasible_memo[cl] = hit
        return hit

    def rec(g: Internal) -> list[frozenset]:
        kind = g[0]
        if kind == "true":
            return [frozenset()]
        if kind == "false":
            return []
        if kind == "and":
            # materialize the most constraining factors first
            factors = sorted((rec(c) for c in g[1]), key=len)
            acc: list[frozenset] = [frozenset()]
            for rights in factors:
                fresh: list[frozenset] = []
                seen: set[frozenset] = set()
                for a in acc:
                    for b in rights:
                        if budget is not None:
                            budget.tick()
                        cl = a | b
                        if cl in seen or not feasible(cl):
                            continue
                        seen.add(cl)
                        fresh.append(cl)
                        if len(fresh) > max_clauses:
                            raise BudgetExceeded(f"DNF exceeded {max_clauses} clauses")
                acc = _minimal_clauses(fresh)
            return acc
        if kind == "or":
            out: list[frozenset] = []
            seen2: set[frozenset] = set()
            for child in g[1]:
                for cl in rec(child):
                    if cl not in seen2:
                        seen2.add(cl)
                        out.append(cl)
                if len(out) > max_clauses:
                    raise BudgetExceeded(f"DNF exceeded {max_clauses} clauses")
            return _minimal_clauses(out)
        return [frozenset({g})]

    return rec(f)


def _scan_bound(f: Internal, x: str) -> tuple[int, int]:
    """(threshold, period): beyond the threshold truth is periodic in x."""
    x0, period = 1, 1
    kind_stack = [f]
    while kind_stack:
        cur = kind_stack.pop()
        if cur[0] in ("and", "or"):
            kind_stack.extend(cur[1])
        elif cur[0] in ("lt", "eq"):
            x0 = max(x0, abs(cur[1].const) + 1)
        elif cur[0] in ("div", "ndiv"):
            period = lcm(period, cur[1])
    return x0, period


def _eval_ground(f: Internal) -> bool:
    g = simplify(f)
    if g == I_TRUE:
        return True
    if g == I_FALSE:
        return False
    raise ValueError(f"formula is not ground: {g!r}")


def _solve_conjunction(
    g: Internal,
    order: list[str],
    nonneg: frozenset[str] | set[str],
    budget: Budget,
) -> dict[str, int] | None:
    """Least model (in variable-name order) of a conjunctive formula via a
    chain of eliminations replayed with back-substitution."""
    chain: list[Internal] = [g]
    for x in reversed(order):
        g = cooper_eliminate(g, x, budget)
        chain.append(g)
    chain.reverse()  # chain[k] has free variables order[:k]; chain[0] is ground
    if not _eval_ground(chain[0]):
        return None
    model: dict[str, int] = {}
    for k, x in enumerate(order):
        h = chain[k + 1]
        for v, value in model.items():
            h = isubst(h, v, const(value))
        h = simplify(h)
        x0, period = _scan_bound(h, x)
        hi = x0 + period
        candidates = list(range(0, hi + 1))
        if x not in nonneg:
            candidates += [-v for v in range(1, hi + 1)]
        for value in candidates:
            budget.tick()
            if _eval_ground(isubst(h, x, const(value))):
                model[x] = value
                break
        else:
            raise AssertionError(f"model reconstruction failed for {x}")
    return model


def satisfiable(
    f: Formula,
    nonneg: frozenset[str] | set[str] = frozenset(),
    budget: Budget | None = None,
) -> Valuation | None:
    """A satisfying valuation of the free variables, or None when unsat.

    The formula is split into pruned DNF clauses; each conjunctive clause is
    solved by full elimination with back-substituted model reconstruction,
    and the lexicographically least model (variable-name order, non-negative
    variables scanning up from 0) over all clauses is returned.
    """
    budget = budget or Budget(work=5_000_000)
    from .presburger import nonneg_constraints

    f = land(eliminate_quantifiers(f, budget), nonneg_constraints(set(nonneg) & free_variables(f)))
    order = sorted(free_variables(f))
    clauses = dnf_clauses(to_internal(f), DEFAULT_ATOM_BUDGET // 40, budget)
    best: dict[str, int] | None = None
    for clause in clauses:
        g = _iand(tuple(sorted(clause, key=repr)))
        model = _solve_conjunction(g, order, nonneg, budget)
        if model is None:
            continue
        for x in order:
            model.setdefault(x, 0)
        if best is None or [model[x] for x in order] < [best[x] for x in order]:
            best = model
    return best
