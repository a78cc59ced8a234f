"""Hard-coded grammar transformations used by the normalization pipeline.

All of them are language-preserving, deterministic, and (for the Eliminate*
family) idempotent.  Inlining transformations can grow a grammar; the
pipeline guards against that with production-count guards.
"""

from __future__ import annotations

from ..canon import canonical_grammar
from ..grammar import Grammar, Production, SForm, Symbol, make_grammar
from ..language import nullable_nonterminals, useful_nonterminals


def _rebuild(prods, g: Grammar, start: Symbol | None = None) -> Grammar:
    dedup = list(dict.fromkeys((lhs, tuple(rhs)) for lhs, rhs in prods))
    return make_grammar(dedup, start or g.start, extra_alphabet=g.alphabet)


def eliminate_non_gen_vars(g: Grammar) -> Grammar:
    generating, _ = useful_nonterminals(g)
    kept = [
        (p.lhs, p.rhs)
        for p in g.productions
        if p.lhs in generating and all(s.terminal or s in generating for s in p.rhs)
    ]
    return _rebuild(kept, g)


def eliminate_unreach_vars(g: Grammar) -> Grammar:
    _, reachable = useful_nonterminals(g)
    kept = [(p.lhs, p.rhs) for p in g.productions if p.lhs in reachable]
    return _rebuild(kept, g)


def eliminate_self_rec_unit_rules(g: Grammar) -> Grammar:
    kept = [(p.lhs, p.rhs) for p in g.productions if p.rhs != (p.lhs,)]
    return _rebuild(kept, g)


def eliminate_delegating_vars(g: Grammar) -> Grammar:
    """Remove variables whose only production is X -> Y, redirecting X to Y
    (the start symbol may delegate; the start then moves to Y)."""
    current = g
    for _ in range(len(g.nonterminals) + 1):
        candidate = None
        for nt in sorted({p.lhs for p in current.productions}):
            prods = current.by_lhs.get(nt, ())
            if len(prods) == 1 and len(prods[0].rhs) == 1:
                target = prods[0].rhs[0]
                if not target.terminal and target != nt:
                    candidate = (nt, target)
                    break
        if candidate is None:
            return current
        x, y = candidate
        # the start symbol keeps its name; otherwise the delegate's name wins
        survivor, loser = (x, y) if x == current.start else (y, x)
        prods = [
            (survivor if p.lhs == loser else p.lhs, tuple(survivor if s == loser else s for s in p.rhs))
            for p in current.productions
            if p != Production(x, (y,))
        ]
        current = _rebuild(prods, current, current.start)
    return current


def _inline_var(g: Grammar, nt: Symbol) -> Grammar:
    alts = g.rhs_of(nt)
    prods: list[tuple[Symbol, SForm]] = []
    for p in g.productions:
        if p.lhs == nt:
            continue
        expansions: list[tuple[Symbol, ...]] = [()]
        for s in p.rhs:
            if s == nt:
                expansions = [acc + alt for acc in expansions for alt in alts]
            else:
                expansions = [acc + (s,) for acc in expansions]
        prods.extend((p.lhs, rhs) for rhs in expansions)
    return _rebuild(prods, g)


def eliminate_single_rule_vars(g: Grammar) -> Grammar:
    """Inline variables with exactly one (non-self-referencing) production;
    the start symbol stays."""
    current = g
    for _ in range(len(g.nonterminals) + 1):
        candidate = None
        for nt in sorted({p.lhs for p in current.productions}):
            prods = current.by_lhs.get(nt, ())
            if nt != current.start and len(prods) == 1 and nt not in prods[0].rhs:
                candidate = nt
                break
        if candidate is None:
            return current
        current = _inline_var(current, candidate)
    return current


def _recursive_vars(g: Grammar) -> frozenset[Symbol]:
    """Variables X with a derivation X =>+ uXv."""
    direct: dict[Symbol, set[Symbol]] = {}
    for p in g.productions:
        direct.setdefault(p.lhs, set()).update(s for s in p.rhs if not s.terminal)
    out = set()
    for x in direct:
        seen: set[Symbol] = set()
        stack = list(direct.get(x, ()))
        while stack:
            cur = stack.pop()
            if cur == x:
                out.add(x)
                break
            if cur not in seen:
                seen.add(cur)
                stack.extend(direct.get(cur, ()))
    return frozenset(out)


def eliminate_non_rec_vars(g: Grammar) -> Grammar:
    """Inline variables with no derivation X =>+ uXv (except the start)."""
    current = g
    for _ in range(len(g.nonterminals) + 1):
        recursive = _recursive_vars(current)
        candidate = next(
            (
                nt
                for nt in sorted({p.lhs for p in current.productions})
                if nt != current.start and nt not in recursive
            ),
            None,
        )
        if candidate is None:
            return current
        current = _inline_var(current, candidate)
    return current


def eliminate_non_self_rec_vars(g: Grammar) -> Grammar:
    """Inline variables with no production X -> u X v (except the start)."""
    current = g
    for _ in range(len(g.nonterminals) + 1):
        candidate = None
        for nt in sorted({p.lhs for p in current.productions}):
            if nt == current.start:
                continue
            if all(nt not in p.rhs for p in current.by_lhs.get(nt, ())):
                candidate = nt
                break
        if candidate is None:
            return current
        current = _inline_var(current, candidate)
    return current


def eliminate_loosely_isomorphic_var(g: Grammar) -> Grammar:
    """Merge two variables whose production sets are identical after swapping
    the two names; the survivor is the start symbol or the first in
    production order."""
    current = g
    for _ in range(len(g.nonterminals) + 1):
        order = list(dict.fromkeys(p.lhs for p in current.productions))
        merged = None
        for i, x in enumerate(order):
            for y in order[i + 1 :]:
                if y == current.start:
                    x, y = y, x
                if x == y:
                    continue

                def swap(sym: Symbol) -> Symbol:
                    return y if sym == x else x if sym == y else sym

                left = {tuple(swap(s) for s in rhs) for rhs in current.rhs_of(x)}
                if left != {tuple(rhs) for rhs in current.rhs_of(y)}:
                    continue
                merged = (x, y)
                break
            if merged:
                break
        if merged is None:
            return current
        x, y = merged
        prods = [
            (p.lhs, tuple(x if s == y else s for s in p.rhs))
            for p in current.productions
            if p.lhs != y
        ]
        current = _rebuild(prods, current)
    return current


def eliminate_eps_rules(g: Grammar) -> Grammar:
    """Standard epsilon elimination; the start keeps its epsilon production
    when the empty word is in the language."""
    nullable = nullable_nonterminals(g)
    keep_start_eps = g.start in nullable
    prods: list[tuple[Symbol, SForm]] = []
    for p in g.productions:
        positions = [i for i, s in enumerate(p.rhs) if s in nullable]
        for mask in range(1 << len(positions)):
            dropped = {positions[b] for b in range(len(positions)) if mask >> b & 1}
            rhs = tuple(s for i, s in enumerate(p.rhs) if i not in dropped)
            if rhs or (p.lhs == g.start and keep_start_eps):
                prods.append((p.lhs, rhs))
    return _rebuild(prods, g)


def explicate_eps_rules(g: Grammar) -> Grammar:
    nullable = nullable_nonterminals(g)
    prods = [(p.lhs, p.rhs) for p in g.productions]
    existing = {p.lhs for p in g.productions if not p.rhs}
    for nt in sorted(nullable):
        if nt not in existing:
            prods.append((nt, ()))
    return _rebuild(prods, g)


def eliminate_unit_rules(g: Grammar) -> Grammar:
    """Standard unit-pair closure, then drop unit productions."""
    nts = sorted({p.lhs for p in g.productions})
    unit_closure: dict[Symbol, set[Symbol]] = {nt: {nt} for nt in nts}
    changed = True
    while changed:
        changed = False
        for nt in nts:
            for target in list(unit_closure[nt]):
                for p in g.by_lhs.get(target, ()):
                    if len(p.rhs) == 1 and not p.rhs[0].terminal and p.rhs[0] not in unit_closure[nt]:
                        unit_closure[nt].add(p.rhs[0])
                        changed = True
    prods: list[tuple[Symbol, SForm]] = []
    for nt in dict.fromkeys(p.lhs for p in g.productions):
        for target in sorted(unit_closure[nt]):
            for p in g.by_lhs.get(target, ()):
                if len(p.rhs) == 1 and not p.rhs[0].terminal:
                    continue
                prods.append((nt, p.rhs))
    return _rebuild(prods, g)


def eliminate_redundant_rules(g: Grammar, max_steps: int = 3) -> Grammar:
    """Remove productions derivable from their left-hand side in 2..max_steps
    steps using the other productions (short-cut rules)."""
    current = list(g.productions)

    def derivable(lhs: Symbol, target: SForm, allowed: list[Production]) -> bool:
        frontier: set[SForm] = {(lhs,)}
        limit = len(target) + max(
            (len(p.rhs) for p in allowed), default=0
        ) * (max_steps - 1) + 2
        for _ in range(max_steps):
            nxt: set[SForm] = set()
            for form in frontier:
                for i, sym in enumerate(form):
                    if sym.terminal:
                        continue
                    for p in allowed:
                        if p.lhs == sym:
                            new = form[:i] + p.rhs + form[i + 1 :]
                            if len(new) <= limit:
                                nxt.add(new)
            if target in nxt:
                return True
            frontier = nxt
        return False

    i = 0
    while i < len(current):
        p = current[i]
        rest = current[:i] + current[i + 1 :]
        if derivable(p.lhs, p.rhs, rest):
            current = rest
            continue
        i += 1
    return _rebuild([(p.lhs, p.rhs) for p in current], g)


def minimal_alphabets(g: Grammar) -> Grammar:
    used = {s for p in g.productions for s in p.rhs if s.terminal}
    dedup = list(dict.fromkeys((p.lhs, p.rhs) for p in g.productions))
    return make_grammar(dedup, g.start, extra_alphabet=used)


BUILTINS = {
    "EliminateNonGenVars": eliminate_non_gen_vars,
    "EliminateUnReachVars": eliminate_unreach_vars,
    "EliminateDelegatingVars": eliminate_delegating_vars,
    "EliminateSingleRuleVars": eliminate_single_rule_vars,
    "EliminateNonRecVars": eliminate_non_rec_vars,
    "EliminateNonSelfRecVars": eliminate_non_self_rec_vars,
    "EliminateLooselyIsomorphicVar": eliminate_loosely_isomorphic_var,
    "EliminateEpsRules": eliminate_eps_rules,
    "EliminateSelfRecUnitRules": eliminate_self_rec_unit_rules,
    "EliminateUnitRules": eliminate_unit_rules,
    "EliminateRedundantRules": eliminate_redundant_rules,
    "ExplicateEpsRules": explicate_eps_rules,
    "MinimalAlphabets": minimal_alphabets,
    "CanonicalGrammar": canonical_grammar,
}

BUILTIN_NAMES = tuple(BUILTINS)


def apply_builtin(name: str, g: Grammar) -> Grammar:
    if name not in BUILTINS:
        raise KeyError(f"unknown builtin transformation {name!r}")
    return BUILTINS[name](g)
