"""Elementary language algorithms on grammars.

Everything here is a pure function of an immutable Grammar.  The word
enumerator is the brute-force oracle that most of the test-suite leans on, so
it is deliberately simple: exact-length sets per non-terminal with a fixpoint
per length level (unit- and eps-cycles converge because same-length values
stop growing).
"""

from __future__ import annotations

from .grammar import Grammar, Production, SForm, Symbol, Word, make_grammar


def useful_nonterminals(g: Grammar) -> tuple[frozenset[Symbol], frozenset[Symbol]]:
    """Return (generating, reachable) as least fixpoints."""
    generating: set[Symbol] = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if p.lhs in generating:
                continue
            if all(s.terminal or s in generating for s in p.rhs):
                generating.add(p.lhs)
                changed = True
    reachable: set[Symbol] = {g.start}
    frontier = [g.start]
    while frontier:
        nt = frontier.pop()
        for p in g.by_lhs.get(nt, ()):
            for s in p.rhs:
                if not s.terminal and s not in reachable:
                    reachable.add(s)
                    frontier.append(s)
    return frozenset(generating), frozenset(reachable)


def trim(g: Grammar) -> Grammar:
    """Restrict to useful non-terminals (generating first, then reachable).

    If the language is empty the result keeps only the start symbol, with no
    productions.
    """
    generating, _ = useful_nonterminals(g)
    kept = [
        p
        for p in g.productions
        if p.lhs in generating and all(s.terminal or s in generating for s in p.rhs)
    ]
    # recompute reachability over the generating-only productions
    reachable: set[Symbol] = {g.start}
    frontier = [g.start]
    by_lhs: dict[Symbol, list[Production]] = {}
    for p in kept:
        by_lhs.setdefault(p.lhs, []).append(p)
    while frontier:
        nt = frontier.pop()
        for p in by_lhs.get(nt, ()):
            for s in p.rhs:
                if not s.terminal and s not in reachable:
                    reachable.add(s)
                    frontier.append(s)
    final = [p for p in kept if p.lhs in reachable]
    return make_grammar(final, g.start, extra_alphabet=g.alphabet)


def is_empty(g: Grammar) -> bool:
    generating, _ = useful_nonterminals(g)
    return g.start not in generating


def nullable_nonterminals(g: Grammar) -> frozenset[Symbol]:
    nullable: set[Symbol] = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if p.lhs not in nullable and all(not s.terminal and s in nullable for s in p.rhs):
                nullable.add(p.lhs)
                changed = True
    return frozenset(nullable)


def _can_derive_nonempty(g: Grammar) -> frozenset[Symbol]:
    """Non-terminals that derive at least one nonempty terminal word."""
    generating, _ = useful_nonterminals(g)
    fat: set[Symbol] = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if p.lhs in fat or p.lhs not in generating:
                continue
            if not all(s.terminal or s in generating for s in p.rhs):
                continue
            if any(s.terminal or s in fat for s in p.rhs):
                fat.add(p.lhs)
                changed = True
    return frozenset(fat)


def is_finite(g: Grammar) -> bool:
    """True iff L(g) is finite.

    After trimming, the language is infinite exactly when some production
    X -> alpha Y beta lies on a cycle Y =>* X while alpha beta can derive a
    nonempty string (the cycle then pumps).
    """
    t = trim(g)
    if not t.productions:
        return True
    fat_syms = _can_derive_nonempty(t)
    edges: set[tuple[Symbol, Symbol]] = set()
    fat_edges: list[tuple[Symbol, Symbol]] = []
    for p in t.productions:
        for i, s in enumerate(p.rhs):
            if s.terminal:
                continue
            context = p.rhs[:i] + p.rhs[i + 1 :]
            edges.add((p.lhs, s))
            if any(c.terminal or c in fat_syms for c in context):
                fat_edges.append((p.lhs, s))
    # adjacency for reachability queries
    succ: dict[Symbol, set[Symbol]] = {}
    for a, b in edges:
        succ.setdefault(a, set()).add(b)

    def reaches(src: Symbol, dst: Symbol) -> bool:
        seen = {src}
        stack = [src]
        while stack:
            cur = stack.pop()
            if cur == dst:
                return True
            for nxt in succ.get(cur, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    return not any(reaches(b, a) for a, b in fat_edges)


def shortest_member(g: Grammar) -> Word | None:
    """A shortest word of L(g), ties broken lexicographically; None iff empty.

    Dijkstra-style settling over non-terminals with (length, word) keys; the
    key combination is monotone under concatenation, so settling is safe.
    """
    import heapq

    best: dict[Symbol, Word] = {}
    pending: list[tuple[int, str, Symbol]] = []

    def try_production(prod: Production):
        total = ""
        for s in prod.rhs:
            if s.terminal:
                total += s.name
            elif s in best:
                total += best[s]
            else:
                return
        heapq.heappush(pending, (len(total), total, prod.lhs))

    for prod in g.productions:
        try_production(prod)
    while pending:
        _, word, nt = heapq.heappop(pending)
        if nt in best:
            continue
        best[nt] = word
        for prod in g.productions:
            if nt in prod.rhs:
                try_production(prod)
    return best.get(g.start)


def min_word_lengths(g: Grammar) -> dict[Symbol, int]:
    """Shortest derivable word length per generating non-terminal."""
    best: dict[Symbol, int] = {}
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            total = 0
            ok = True
            for s in p.rhs:
                if s.terminal:
                    total += 1
                elif s in best:
                    total += best[s]
                else:
                    ok = False
                    break
            if ok and total < best.get(p.lhs, 1 << 30):
                best[p.lhs] = total
                changed = True
    return best


def membership(g: Grammar, w: Word) -> bool:
    """Earley chart parser; handles eps- and unit-productions natively."""
    prods = g.productions
    if not prods:
        return False
    nullable = nullable_nonterminals(g)
    start_prods = [i for i, p in enumerate(prods) if p.lhs == g.start]
    if not start_prods:
        return False
    n = len(w)
    # item: (production index, dot, origin)
    charts: list[set[tuple[int, int, int]]] = [set() for _ in range(n + 1)]
    charts[0] = {(i, 0, 0) for i in start_prods}
    for pos in range(n + 1):
        chart = charts[pos]
        agenda = list(chart)
        while agenda:
            item = agenda.pop()
            pi, dot, origin = item
            rhs = prods[pi].rhs
            if dot < len(rhs):
                sym = rhs[dot]
                if sym.terminal:
                    if pos < n and w[pos] == sym.name:
                        charts[pos + 1].add((pi, dot + 1, origin))
                else:
                    for qi, p in enumerate(prods):
                        if p.lhs == sym:
                            new = (qi, 0, pos)
                            if new not in chart:
                                chart.add(new)
                                agenda.append(new)
                    if sym in nullable:  # advance over nullable predictions
                        new = (pi, dot + 1, origin)
                        if new not in chart:
                            chart.add(new)
                            agenda.append(new)
            else:
                done = prods[pi].lhs
                for other in list(charts[origin]):
                    qi, qdot, qorigin = other
                    qrhs = prods[qi].rhs
                    if qdot < len(qrhs) and qrhs[qdot] == done:
                        new = (qi, qdot + 1, qorigin)
                        if new not in chart:
                            chart.add(new)
                            agenda.append(new)
    return any(
        pi in start_prods and dot == len(prods[pi].rhs) and origin == 0
        for pi, dot, origin in charts[n]
    )


def enumerate_words(g: Grammar, max_len: int) -> set[Word]:
    """Exactly the words of L(g) with length <= max_len."""
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    t = trim(g)
    if not t.productions:
        return set()
    nts = sorted({p.lhs for p in t.productions}, key=lambda s: s.name)
    by_lhs = {nt: t.rhs_of(nt) for nt in nts}
    minlen = min_word_lengths(t)
    # gen[X][n]: words of length exactly n derivable from X
    gen: dict[Symbol, list[set[str]]] = {nt: [set() for _ in range(max_len + 1)] for nt in nts}

    def seq_words(rhs: SForm, n: int, memo) -> set[str]:
        key = (rhs, n)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if not rhs:
            result = {""} if n == 0 else set()
        else:
            head, tail = rhs[0], rhs[1:]
            tail_min = sum(1 if s.terminal else minlen.get(s, 1 << 30) for s in tail)
            result = set()
            if head.terminal:
                if n >= 1 and tail_min <= n - 1:
                    result = {head.name + w for w in seq_words(tail, n - 1, memo)}
            else:
                head_min = minlen.get(head, 1 << 30)
                for k in range(head_min, n - tail_min + 1):
                    heads = gen[head][k]
                    if not heads:
                        continue
                    tails = seq_words(tail, n - k, memo)
                    if tails:
                        result.update(h + w for h in heads for w in tails)
        memo[key] = result
        return result

    for n in range(max_len + 1):
        while True:
            grew = False
            memo: dict = {}
            for nt in nts:
                fresh = set()
                for rhs in by_lhs[nt]:
                    fresh |= seq_words(rhs, n, memo)
                if not fresh <= gen[nt][n]:
                    gen[nt][n] |= fresh
                    grew = True
            if not grew:
                break
    out: set[str] = set()
    for n in range(max_len + 1):
        out |= gen[t.start][n]
    return out


def words_up_to(g: Grammar, max_len: int) -> list[Word]:
    """enumerate_words sorted by (length, lexicographic) for deterministic output."""
    return sorted(enumerate_words(g, max_len), key=lambda w: (len(w), w))


def merge_congruent_pair(g: Grammar) -> Grammar | None:
    """Merge one pair of non-terminals whose production sets coincide after
    renaming both to a common name (they then satisfy the same equation, so
    they derive the same language).  None when no pair merges."""
    nts = sorted({p.lhs for p in g.productions}, key=lambda s: s.name)

    def unified(nt: Symbol, other: Symbol) -> frozenset[SForm]:
        out = set()
        for p in g.by_lhs.get(nt, ()):
            out.add(tuple(nt if s in (nt, other) else s for s in p.rhs))
        return frozenset(out)

    for i, x in enumerate(nts):
        for y in nts[i + 1 :]:
            if y == g.start:
                x, y = y, x  # never eliminate the start symbol
            if x == y:
                continue
            left = {tuple(x if s in (x, y) else s for s in rhs) for rhs in g.rhs_of(x)}
            right = {tuple(x if s in (x, y) else s for s in rhs) for rhs in g.rhs_of(y)}
            if left != right:
                continue
            prods = []
            for p in g.productions:
                if p.lhs == y:
                    continue
                prods.append((p.lhs, tuple(x if s == y else s for s in p.rhs)))
            seen: set = set()
            dedup = [p for p in prods if not (p in seen or seen.add(p))]
            return make_grammar(dedup, g.start, extra_alphabet=g.alphabet)
    return None


def _rebuild(prods: list[tuple[Symbol, SForm]], g: Grammar) -> Grammar:
    seen: set = set()
    dedup = [p for p in prods if not (p in seen or seen.add(p))]
    return trim(make_grammar(dedup, g.start, extra_alphabet=g.alphabet))


def _inline(g: Grammar, nt: Symbol) -> Grammar:
    """Substitute every alternative of nt into all references (cartesian over
    occurrences); nt must not be self-referencing."""
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


def binarize(g: Grammar) -> Grammar:
    """Split right-hand sides longer than two symbols into chains of fresh
    non-terminals.  Language-preserving; keeps the PDA triple construction
    polynomial for grammars with long productions."""
    taken = {nt.name for nt in g.nonterminals}
    counter = 0
    prods: list[tuple[Symbol, SForm]] = []
    for p in g.productions:
        lhs, rhs = p.lhs, p.rhs
        while len(rhs) > 2:
            while f"B{counter}" in taken:
                counter += 1
            fresh = Symbol(False, f"B{counter}")
            taken.add(fresh.name)
            prods.append((lhs, (rhs[0], fresh)))
            lhs, rhs = fresh, rhs[1:]
        prods.append((lhs, rhs))
    return make_grammar(prods, g.start, extra_alphabet=g.alphabet, dedupe=True)


def compact(g: Grammar) -> Grammar:
    """Language-preserving shrinking: trim, drop X -> X, inline single-rule
    and (when it does not grow the grammar) non-self-recursive non-terminals,
    expand non-growing unit productions, and merge non-terminals satisfying
    identical equations.  Collapses the chains the PDA-to-CFG construction
    emits; the result is for analysis, not for display.
    """
    g = trim(g)
    for _ in range(400):
        prods = [p for p in g.productions if not (len(p.rhs) == 1 and p.rhs[0] == p.lhs)]
        if len(prods) != len(g.productions):
            g = _rebuild([(p.lhs, p.rhs) for p in prods], g)
            continue
        merged = merge_congruent_pair(g)
        if merged is not None:
            g = trim(merged)
            continue
        by_lhs: dict[Symbol, list[Production]] = {}
        for p in g.productions:
            by_lhs.setdefault(p.lhs, []).append(p)
        nts = sorted(by_lhs, key=lambda s: s.name)
        # single-production inline always shrinks
        target = next(
            (nt for nt in nts if nt != g.start and len(by_lhs[nt]) == 1 and nt not in by_lhs[nt][0].rhs),
            None,
        )
        if target is not None:
            g = _inline(g, target)
            continue
        # conditional steps: keep only if the grammar does not grow
        done = False
        for nt in nts:
            if nt == g.start or any(nt in p.rhs for p in by_lhs[nt]):
                continue
            candidate = _inline(g, nt)
            if len(candidate.productions) <= len(g.productions):
                g = candidate
                done = True
                break
        if done:
            continue
        for p in g.productions:
            if len(p.rhs) == 1 and not p.rhs[0].terminal and p.rhs[0] != p.lhs:
                other = p.rhs[0]
                expanded = [(q.lhs, q.rhs) for q in g.productions if q != p]
                expanded += [(p.lhs, rhs) for rhs in g.rhs_of(other)]
                candidate = _rebuild(expanded, g)
                if len(candidate.productions) <= len(g.productions):
                    g = candidate
                    done = True
                    break
        if not done:
            break
    return g
