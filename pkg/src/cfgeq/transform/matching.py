"""Matching patterns into grammars and applying transformations.

A match assigns: one grammar non-terminal per elementary non-terminal
variable, sentential forms to the other variables, and for every index group
a size k with per-index bindings.  Matching is a backtracking search over
(production -> alternative) assignments with forward feasibility checks;
exhaustiveness (all productions of a touched non-terminal are matched) holds
by construction because a rule line always covers all productions of the
non-terminal its left-hand side binds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..canon import canonical_key
from ..grammar import Grammar, N, Production, SForm, Symbol, make_grammar
from .patterns import Alternative, Pattern, PatternTransformation, RuleLine, TransformError

MAX_SENTENTIAL_LEN = 6
MAX_DEFERRED_GROUP_SIZE = 3
MAX_INDEX_MAPPINGS = 20_000  # cap on index-value -> production enumerations

# binding key: (variable name, index value or None)
Env = dict[tuple[str, int | None], SForm]


@dataclass(frozen=True)
class Match:
    instantiation: dict
    binding: Env
    matched_productions: frozenset[Production]

    def signature(self, pattern: Pattern):
        elementary = tuple(
            sorted((k[0], v) for k, v in self.binding.items() if k[1] is None)
        )
        rows = []
        for members in sorted(pattern.groups().values(), key=sorted):
            size = self.instantiation.get(members, 0)
            group_rows = sorted(
                tuple(self.binding.get((n, i)) for n in sorted(members)) for i in range(size)
            )
            rows.append((tuple(sorted(members)), tuple(group_rows)))
        return (elementary, tuple(rows), self.matched_productions)


def _alt_symbols(alt: Alternative) -> tuple[str, ...]:
    seen: list[str] = []
    for ref in alt:
        if ref.index is not None and ref.index not in seen:
            seen.append(ref.index)
    return tuple(seen)


def _feasible(alt: Alternative, rhs: SForm, sorts: dict[str, str]) -> bool:
    lo = hi = 0
    for ref in alt:
        if sorts[ref.name] == "sentential_form":
            hi += MAX_SENTENTIAL_LEN
        else:
            lo += 1
            hi += 1
    return lo <= len(rhs) <= hi


def _unify(
    refs: list[tuple[str, int | None, str]],
    syms: SForm,
    env: Env,
):
    """Yield environments unifying instantiated refs against a symbol string."""

    def rec(ri: int, si: int, env: Env):
        if ri == len(refs):
            if si == len(syms):
                yield env
            return
        name, idx, sort = refs[ri]
        key = (name, idx)
        bound = env.get(key)
        if bound is not None:
            if syms[si : si + len(bound)] == bound:
                yield from rec(ri + 1, si + len(bound), env)
            return
        if sort == "nonterminal":
            if si < len(syms) and not syms[si].terminal:
                yield from rec(ri + 1, si + 1, {**env, key: (syms[si],)})
        elif sort == "terminal":
            if si < len(syms) and syms[si].terminal:
                yield from rec(ri + 1, si + 1, {**env, key: (syms[si],)})
        else:
            limit = min(MAX_SENTENTIAL_LEN, len(syms) - si)
            for length in range(limit + 1):
                yield from rec(ri + 1, si + length, {**env, key: tuple(syms[si : si + length])})

    yield from rec(0, 0, env)


def _instantiate_refs(alt: Alternative, idxmap: dict[str, int], sorts) -> list[tuple[str, int | None, str]]:
    return [
        (r.name, idxmap[r.index] if r.index is not None else None, sorts[r.name]) for r in alt
    ]


class _Matcher:
    def __init__(self, pattern: Pattern, grammar: Grammar):
        self.pattern = pattern
        self.grammar = grammar
        self.sorts = {v.name: v.sort for v in pattern.variables}
        self.groups = pattern.groups()
        self.group_of: dict[str, frozenset[str]] = {}
        for members in self.groups.values():
            for name in members:
                self.group_of[name] = members
        # lines whose alternatives stay within one index symbol first; they
        # anchor group sizes for the multi-symbol lines
        self.lines = sorted(
            pattern.rules,
            key=lambda line: max((len(_alt_symbols(a)) for a in line.alternatives), default=0),
        )

    def group_for_symbol(self, alt: Alternative, symbol: str) -> frozenset[str]:
        groups = {self.group_of[r.name] for r in alt if r.index == symbol}
        if len(groups) != 1:
            raise TransformError(
                f"index symbol {symbol!r} spans different instantiation groups in one alternative"
            )
        return next(iter(groups))

    def matches(self):
        seen = set()
        for match in self._match_lines(0, {}, {}, frozenset()):
            sig = match.signature(self.pattern)
            if sig not in seen:
                seen.add(sig)
                yield match

    # ------------------------------------------------------------- search

    def _elementary_conflict(self, env: Env) -> bool:
        """Cheap early pruning: constraints over fully-bound elementary
        variables (start-ness, (in)equality of bound non-terminals)."""
        for c in self.pattern.constraints:
            if c.kind == "is_start":
                name, wanted = c.payload
                bound = env.get((name, None))
                if bound is not None and (bound[0] == self.grammar.start) != wanted:
                    return True
            elif c.kind == "string_relation":
                op, left, right = c.payload
                if op not in ("=", "!=") or any(r.index is not None for r in (*left, *right)):
                    continue
                lhs = [env.get((r.name, None)) for r in left]
                rhs = [env.get((r.name, None)) for r in right]
                if any(b is None for b in (*lhs, *rhs)):
                    continue
                a = tuple(s for b in lhs for s in b)
                b = tuple(s for bb in rhs for s in bb)
                if (a == b) != (op == "="):
                    return True
        return False

    def _match_lines(self, i: int, env: Env, sizes: dict, matched: frozenset):
        if i == len(self.lines):
            if self._constraints_hold(env, sizes, matched):
                inst = {g: sizes.get(g, 0) for g in self.groups.values()}
                yield Match(inst, dict(env), matched)
            return
        line = self.lines[i]
        lhs_key = (line.lhs, None)
        if lhs_key in env:
            candidates = [env[lhs_key][0]]
        else:
            candidates = sorted(self.grammar.nonterminals)
        for nt in candidates:
            env2 = dict(env)
            env2[lhs_key] = (nt,)
            if self._elementary_conflict(env2):
                continue
            prods = list(self.grammar.by_lhs.get(nt, ()))
            yield from self._assign_line(line, prods, env2, sizes, matched | frozenset(prods), i)

    def _assign_line(self, line: RuleLine, prods, env, sizes, matched, line_index):
        alts = line.alternatives
        per_prod_options = []
        for p in prods:
            options = [ai for ai, alt in enumerate(alts) if _feasible(alt, p.rhs, self.sorts)]
            if not options:
                return
            per_prod_options.append(options)
        for assignment in itertools.product(*per_prod_options):
            buckets: list[list[Production]] = [[] for _ in alts]
            for p, ai in zip(prods, assignment):
                buckets[ai].append(p)
            ok = True
            for ai, alt in enumerate(alts):
                if not _alt_symbols(alt) and len(buckets[ai]) != 1:
                    ok = False
                    break
            if not ok:
                continue
            yield from self._match_alts(line, list(enumerate(buckets)), env, sizes, matched, line_index)

    def _match_alts(self, line, pending, env, sizes, matched, line_index):
        if not pending:
            yield from self._match_lines(line_index + 1, env, sizes, matched)
            return
        # single-symbol and plain alternatives first; multi-symbol ones need
        # their group sizes fixed
        pending = sorted(
            pending, key=lambda item: len(_alt_symbols(line.alternatives[item[0]]))
        )
        (ai, bucket), rest = pending[0], pending[1:]
        alt = line.alternatives[ai]
        symbols = _alt_symbols(alt)
        if not symbols:
            refs = _instantiate_refs(alt, {}, self.sorts)
            for env2 in _unify(refs, bucket[0].rhs, env):
                yield from self._match_alts(line, rest, env2, sizes, matched, line_index)
            return
        if len(symbols) == 1:
            group = self.group_for_symbol(alt, symbols[0])
            size = sizes.get(group)
            if size is None:
                size2 = len(bucket)
                sizes2 = {**sizes, group: size2}
                combos = [list(range(size2))] if size2 == len(bucket) else []
                for mapping in combos:

                    def unify_chain(k: int, env_k: Env):
                        if k == size2:
                            yield from self._match_alts(line, rest, env_k, sizes2, matched, line_index)
                            return
                        refs = _instantiate_refs(alt, {symbols[0]: mapping[k]}, self.sorts)
                        for env3 in _unify(refs, bucket[k].rhs, env_k):
                            yield from unify_chain(k + 1, env3)

                    yield from unify_chain(0, env)
                return
            # size known: map index values onto this bucket's productions
            if not bucket and size == 0:
                yield from self._match_alts(line, rest, env, sizes, matched, line_index)
                return
            if not bucket or size == 0:
                return
            if len(bucket) ** size > MAX_INDEX_MAPPINGS:
                return
            for mapping in itertools.product(range(len(bucket)), repeat=size):
                if set(mapping) != set(range(len(bucket))):
                    continue

                def unify_chain2(k: int, env_k: Env):
                    if k == size:
                        yield from self._match_alts(line, rest, env_k, sizes, matched, line_index)
                        return
                    refs = _instantiate_refs(alt, {symbols[0]: k}, self.sorts)
                    for env3 in _unify(refs, bucket[mapping[k]].rhs, env_k):
                        yield from unify_chain2(k + 1, env3)

                yield from unify_chain2(0, env)
            return
        # multi-symbol alternative
        groups = [self.group_for_symbol(alt, s) for s in symbols]
        sizes2 = dict(sizes)
        for group in groups:
            if group not in sizes2:
                # no anchoring line fixed this group; try small sizes
                for guess in range(MAX_DEFERRED_GROUP_SIZE + 1):
                    yield from self._match_alts(
                        line, [(ai, bucket)] + rest, env, {**sizes2, group: guess}, matched, line_index
                    )
                return
        value_tuples = list(itertools.product(*(range(sizes2[g]) for g in groups)))
        if not value_tuples:
            if not bucket:
                yield from self._match_alts(line, rest, env, sizes2, matched, line_index)
            return
        if not bucket:
            return
        if len(bucket) ** len(value_tuples) > MAX_INDEX_MAPPINGS:
            return
        for mapping in itertools.product(range(len(bucket)), repeat=len(value_tuples)):
            if set(mapping) != set(range(len(bucket))):
                continue

            def unify_combo(k: int, env_k: Env):
                if k == len(value_tuples):
                    yield from self._match_alts(line, rest, env_k, sizes2, matched, line_index)
                    return
                idxmap = dict(zip(symbols, value_tuples[k]))
                refs = _instantiate_refs(alt, idxmap, self.sorts)
                for env3 in _unify(refs, bucket[mapping[k]].rhs, env_k):
                    yield from unify_combo(k + 1, env3)

            yield from unify_combo(0, env)

    # -------------------------------------------------------- constraints

    def _expand_varstring(self, refs, env, sizes):
        """All concatenations of a constraint operand over its index symbols
        (same symbol in lockstep, distinct symbols independently)."""
        symbols: list[str] = []
        for r in refs:
            if r.index is not None and r.index not in symbols:
                symbols.append(r.index)
        ranges = []
        for s in symbols:
            groups = {self.group_of[r.name] for r in refs if r.index == s}
            if len(groups) != 1:
                raise TransformError(f"constraint index {s!r} spans several groups")
            ranges.append(range(sizes.get(next(iter(groups)), 0)))
        out = []
        for combo in itertools.product(*ranges):
            idxmap = dict(zip(symbols, combo))
            parts: list[Symbol] = []
            okay = True
            for r in refs:
                key = (r.name, idxmap[r.index] if r.index is not None else None)
                bound = env.get(key)
                if bound is None:
                    okay = False
                    break
                parts.extend(bound)
            if okay:
                out.append(tuple(parts))
        if not symbols and not refs:
            return [()]
        return out

    def _constraints_hold(self, env, sizes, matched) -> bool:
        for c in self.pattern.constraints:
            if c.kind == "sort":
                continue  # enforced during unification
            if c.kind == "is_start":
                name, wanted = c.payload
                bound = env.get((name, None))
                if bound is None or ((bound[0] == self.grammar.start) != wanted):
                    return False
            elif c.kind == "occurs_outside_match":
                name, allowed = c.payload
                bound = env.get((name, None))
                if bound is None:
                    return False
                sym = bound[0]
                outside = any(
                    p not in matched and (p.lhs == sym or sym in p.rhs)
                    for p in self.grammar.productions
                )
                if outside != allowed:
                    return False
            elif c.kind == "must_match":
                (name,) = c.payload
                if sizes.get(self.group_of[name], 0) < 1:
                    return False
            elif c.kind == "any_must_match":
                if all(sizes.get(self.group_of[n], 0) < 1 for n in c.payload):
                    return False
            elif c.kind == "string_relation":
                op, left, right = c.payload
                lefts = self._expand_varstring(left, env, sizes)
                rights = self._expand_varstring(right, env, sizes)
                shared = {r.index for r in left if r.index} & {r.index for r in right if r.index}
                if shared:
                    # same index symbol on both sides: lockstep pairing
                    pairs = self._lockstep_pairs(left, right, env, sizes)
                else:
                    pairs = [(a, b) for a in lefts for b in rights]
                for a, b in pairs:
                    if not _relation(op, a, b):
                        return False
        return True

    def _lockstep_pairs(self, left, right, env, sizes):
        symbols: list[str] = []
        for r in (*left, *right):
            if r.index is not None and r.index not in symbols:
                symbols.append(r.index)
        ranges = []
        for s in symbols:
            groups = {self.group_of[r.name] for r in (*left, *right) if r.index == s}
            if len(groups) != 1:
                raise TransformError(f"constraint index {s!r} spans several groups")
            ranges.append(range(sizes.get(next(iter(groups)), 0)))
        pairs = []
        for combo in itertools.product(*ranges):
            idxmap = dict(zip(symbols, combo))

            def concat(refs):
                parts: list[Symbol] = []
                for r in refs:
                    key = (r.name, idxmap[r.index] if r.index is not None else None)
                    bound = env.get(key)
                    if bound is None:
                        return None
                    parts.extend(bound)
                return tuple(parts)

            a, b = concat(left), concat(right)
            if a is not None and b is not None:
                pairs.append((a, b))
        return pairs


def _relation(op: str, a: SForm, b: SForm) -> bool:
    def contains(hay: SForm, needle: SForm) -> bool:
        if not needle:
            return True
        return any(hay[i : i + len(needle)] == needle for i in range(len(hay) - len(needle) + 1))

    table = {
        "=": lambda: a == b,
        "!=": lambda: a != b,
        "prefix": lambda: b[: len(a)] == a,
        "not_prefix": lambda: b[: len(a)] != a,
        "suffix": lambda: b[len(b) - len(a) :] == a if len(a) <= len(b) else False,
        "not_suffix": lambda: not (b[len(b) - len(a) :] == a if len(a) <= len(b) else False),
        "infix": lambda: contains(b, a),
        "not_infix": lambda: not contains(b, a),
        "contains": lambda: contains(a, b),
        "not_contains": lambda: not contains(a, b),
        "starts_with": lambda: a[: len(b)] == b,
        "not_starts_with": lambda: a[: len(b)] != b,
        "ends_with": lambda: a[len(a) - len(b) :] == b if len(b) <= len(a) else False,
        "not_ends_with": lambda: not (a[len(a) - len(b) :] == b if len(b) <= len(a) else False),
    }
    return table[op]()


def find_matches(pattern: Pattern, grammar: Grammar) -> list[Match]:
    return list(_Matcher(pattern, grammar).matches())


def _fresh_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


def _instantiate_line(
    line: RuleLine,
    env: Env,
    sizes,
    group_of,
    sorts,
    fresh: dict[str, Symbol],
) -> list[tuple[Symbol, SForm]]:
    out: list[tuple[Symbol, SForm]] = []
    lhs_bound = env.get((line.lhs, None))
    lhs = lhs_bound[0] if lhs_bound else fresh[line.lhs]
    for alt in line.alternatives:
        symbols = _alt_symbols(alt)
        ranges = []
        for s in symbols:
            groups = {group_of[r.name] for r in alt if r.index == s and r.name in group_of}
            if len(groups) != 1:
                raise TransformError(f"target index {s!r} spans several groups")
            ranges.append(range(sizes.get(next(iter(groups)), 0)))
        for combo in itertools.product(*ranges):
            idxmap = dict(zip(symbols, combo))
            rhs: list[Symbol] = []
            for r in alt:
                key = (r.name, idxmap[r.index] if r.index is not None else None)
                bound = env.get(key)
                if bound is None:
                    if r.name in fresh:
                        rhs.append(fresh[r.name])
                        continue
                    raise TransformError(f"target variable {r.name!r} is unbound")
                rhs.extend(bound)
            out.append((lhs, tuple(rhs)))
    return out


def _apply_match(t: PatternTransformation, match: Match, g: Grammar) -> Grammar:
    sorts = {v.name: v.sort for v in t.target.variables}
    sorts.update({v.name: v.sort for v in t.source.variables})
    group_of: dict[str, frozenset[str]] = {}
    for members in match.instantiation:
        for name in members:
            group_of[name] = members
    sizes = dict(match.instantiation)

    source_names = {v.name for v in t.source.variables}
    taken = {nt.name for nt in g.nonterminals}
    fresh: dict[str, Symbol] = {}
    for v in t.target.variables:
        if v.name not in source_names and v.sort == "nonterminal":
            sym = N(_fresh_name(v.name, taken))
            taken.add(sym.name)
            fresh[v.name] = sym

    kept = [p for p in g.productions if p not in match.matched_productions]
    added: list[tuple[Symbol, SForm]] = []
    for line in t.target.rules:
        added.extend(_instantiate_line(line, match.binding, sizes, group_of, sorts, fresh))

    prods: list[tuple[Symbol, SForm]] = [(p.lhs, p.rhs) for p in kept] + added
    prods = list(dict.fromkeys(prods))

    # post-substitution: rewrite references per the replace block, expanding
    # indexed replacement strings over all index values per occurrence
    for line in t.replace:
        bound = match.binding.get((line.lhs, None))
        if bound is None:
            continue
        target_sym = bound[0]
        replacements: list[SForm] = []
        for alt in line.alternatives:
            symbols = _alt_symbols(alt)
            ranges = []
            for s in symbols:
                groups = {group_of[r.name] for r in alt if r.index == s and r.name in group_of}
                ranges.append(range(sizes.get(next(iter(groups)), 0)) if groups else range(0))
            for combo in itertools.product(*ranges):
                idxmap = dict(zip(symbols, combo))
                parts: list[Symbol] = []
                okay = True
                for r in alt:
                    key = (r.name, idxmap[r.index] if r.index is not None else None)
                    b = match.binding.get(key)
                    if b is None:
                        if r.name in fresh:
                            parts.append(fresh[r.name])
                            continue
                        okay = False
                        break
                    parts.extend(b)
                if okay:
                    replacements.append(tuple(parts))
        if not replacements:
            continue
        rewritten: list[tuple[Symbol, SForm]] = []
        for lhs, rhs in prods:
            expansions: list[tuple[Symbol, ...]] = [()]
            for sym in rhs:
                if sym == target_sym:
                    expansions = [acc + rep for acc in expansions for rep in replacements]
                else:
                    expansions = [acc + (sym,) for acc in expansions]
            rewritten.extend((lhs, rhs2) for rhs2 in expansions)
        prods = list(dict.fromkeys(rewritten))

    # non-terminals without productions and references are dropped implicitly:
    # the rebuilt grammar only knows symbols that still occur
    return make_grammar(prods, g.start, extra_alphabet=g.alphabet, dedupe=True)


def apply_transformation(t: PatternTransformation, g: Grammar) -> list[Grammar]:
    """All result grammars over the matches, deduplicated by canonical key and
    returned in canonical-key order."""
    results: dict[bytes, Grammar] = {}
    for match in find_matches(t.source, g):
        g2 = _apply_match(t, match, g)
        results.setdefault(canonical_key(g2).bytes, g2)
    return [results[k] for k in sorted(results)]
