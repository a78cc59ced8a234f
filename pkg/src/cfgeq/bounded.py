"""The bounded-language toolchain.

Boundedness testing against a witness, Parikh-image formulas, adapted Parikh
images relative to a witness, the equivalence test for bounded languages,
heuristic witness discovery, Parikh-difference explanations, and set-notation
descriptions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

from . import automata, language, qe, setnotation
from .budget import Budget, BudgetExceeded
from .grammar import Grammar, Symbol, T, Word
from .presburger import (
    FALSE,
    Formula,
    Valuation,
    cmp,
    const,
    exists,
    land,
    lnot,
    lor,
    tsum,
    var,
)

# fresh block symbols live in a private-use range so they can never collide
# with user alphabets
FRESH_BASE = 0xE000


class InternalConsistencyError(AssertionError):
    """A solver model contradicted a membership check; an implementation bug."""


@dataclass(frozen=True)
class BoundednessWitness:
    words: tuple[Word, ...]

    def __post_init__(self):
        if not self.words or any(not w for w in self.words):
            raise ValueError("witness words must be a nonempty sequence of nonempty words")

    @property
    def fresh_symbols(self) -> tuple[Symbol, ...]:
        return tuple(T(chr(FRESH_BASE + i)) for i in range(len(self.words)))

    def homomorphism(self) -> dict[str, Word]:
        return {chr(FRESH_BASE + i): w for i, w in enumerate(self.words)}

    def expand(self, exponents: list[int]) -> Word:
        return "".join(w * k for w, k in zip(self.words, exponents))


@dataclass(frozen=True)
class BoundedCheck:
    outcome: Literal["bounded", "not_bounded", "timeout"]
    counterexample: Optional[Word] = None

    def __post_init__(self):
        assert (self.counterexample is not None) == (self.outcome == "not_bounded")


@dataclass(frozen=True)
class EquivalenceOutcome:
    outcome: Literal["equivalent", "not_equivalent", "timeout"]
    counterexample: Optional[Word] = None
    side: Optional[Literal["only_in_left", "only_in_right"]] = None


def witness_automaton(w: BoundednessWitness, alphabet: frozenset[str]) -> automata.Dfa:
    return automata.witness_dfa(list(w.words), alphabet=alphabet)


def test_bounded_by_witness(h: Grammar, w: BoundednessWitness, budget: Budget | None = None) -> BoundedCheck:
    """Is L(h) a subset of w1* ... wl*?  A shortest violating word otherwise."""
    try:
        pda = automata.cfg_to_pda(language.binarize(h))
        dfa = witness_automaton(w, h.terminal_names())
        product = automata.intersect_pda_dfa(pda, automata.complement(dfa))
        if budget:
            budget.tick(len(product.transitions))
        u = automata.shortest_word(product)
    except BudgetExceeded:
        return BoundedCheck("timeout")
    if u is None:
        return BoundedCheck("bounded")
    return BoundedCheck("not_bounded", u)


def _count(rhs, sym: Symbol) -> int:
    return sum(1 for s in rhs if s == sym)


def parikh_var(letter: str) -> str:
    return f"x_{letter}"


def parikh_formula(g: Grammar) -> Formula:
    """Existential formula whose models over the letter-count variables are
    exactly the Parikh image of L(g).

    Free variables: x_<letter> per alphabet letter.  Bound: one y-variable
    per production (usage count) and one z-variable per non-terminal
    (reachability depth), with flow equations tying them together.
    """
    trimmed = language.trim(g)
    if not trimmed.productions:
        return FALSE
    prods = list(trimmed.productions)
    nts = sorted({p.lhs for p in prods})
    letters = sorted(g.terminal_names())
    y = {i: var(f"y{i}") for i in range(len(prods))}
    z = {nt: var(f"z{nt.name}") for nt in nts}

    conjuncts: list[Formula] = []
    for nt in nts:
        produced = tsum(y[i].scale(_count(p.rhs, nt)) for i, p in enumerate(prods))
        if nt == trimmed.start:
            produced = produced + const(1)
        used = tsum(y[i] for i, p in enumerate(prods) if p.lhs == nt)
        conjuncts.append(cmp("=", produced, used))
    for letter in letters:
        sym = T(letter)
        total = tsum(y[i].scale(_count(p.rhs, sym)) for i, p in enumerate(prods))
        conjuncts.append(cmp("=", var(parikh_var(letter)), total))
    for nt in nts:
        if nt == trimmed.start:
            conjuncts.append(cmp("=", z[nt], 1))
            continue
        unused = land(
            cmp("=", z[nt], 0),
            *(cmp("=", y[i], 0) for i, p in enumerate(prods) if p.lhs == nt),
        )
        options = [unused]
        for i, p in enumerate(prods):
            if p.lhs != nt and _count(p.rhs, nt) > 0:
                options.append(
                    land(
                        cmp("=", z[nt], z[p.lhs] + const(1)),
                        cmp(">", z[p.lhs], 0),
                        cmp(">", y[i], 0),
                    )
                )
        conjuncts.append(lor(*options))
    nonneg = [cmp(">=", var(parikh_var(letter)), 0) for letter in letters]
    nonneg += [cmp(">=", y[i], 0) for i in range(len(prods))]
    nonneg += [cmp(">=", z[nt], 0) for nt in nts]
    bound = [y[i].coeffs[0][0] for i in range(len(prods))] + [z[nt].coeffs[0][0] for nt in nts]
    return exists(bound, land(*conjuncts, *nonneg))


def _cyclic_nonterminals(prods, nts) -> set:
    """Non-terminals lying on a directed cycle of the reference graph.

    Flow-balanced pseudo-derivations can only be spurious when their support
    contains a cycle disconnected from the start, so connectivity witnesses
    are needed for exactly these symbols.
    """
    succ: dict = {}
    for p in prods:
        succ.setdefault(p.lhs, set()).update(s for s in p.rhs if not s.terminal)
    cyclic = set()
    for x in nts:
        seen = set()
        stack = list(succ.get(x, ()))
        while stack:
            cur = stack.pop()
            if cur == x:
                cyclic.add(x)
                break
            if cur not in seen:
                seen.add(cur)
                stack.extend(succ.get(cur, ()))
    return cyclic


def _support_configurations(prods, nts, start, cap: int = 4000) -> list[list[tuple[str, int]]]:
    """All ways the cyclic non-terminals can hang off the rest of the grammar.

    A configuration picks a subset U of the cyclic non-terminals (acyclic
    ones connect to the start automatically) and, for every member, one
    witness production of a parent whose right-hand side mentions it, such
    that parent pointers within U are acyclic.  Returns, per configuration,
    the atom list [("zero", production index) | ("used", production index)].
    """
    cyclic = _cyclic_nonterminals(prods, nts)
    others = [nt for nt in nts if nt != start and nt in cyclic]
    parents = {
        x: [(i, p.lhs) for i, p in enumerate(prods) if p.lhs != x and x in p.rhs]
        for x in others
    }
    configs: list[list[tuple[str, int]]] = []
    seen: set[frozenset] = set()

    def assemble(used: list, unused: list):
        choice_lists = [
            [(i, y) for i, y in parents[x] if y not in unused] for x in used
        ]

        def rec(idx: int, chosen: dict):
            if len(configs) > cap:
                raise BudgetExceeded(f"more than {cap} support configurations")
            if idx == len(used):
                pointer = {x: y for x, (_, y) in chosen.items()}
                for x in used:  # pointer chains inside U must be acyclic
                    cur, steps = x, 0
                    while cur in pointer:
                        cur = pointer[cur]
                        steps += 1
                        if steps > len(used):
                            return
                atoms = [("zero", i) for x in unused for i, p in enumerate(prods) if p.lhs == x]
                atoms += sorted({("used", i) for x, (i, _) in chosen.items()})
                key = frozenset(atoms)
                if key not in seen:
                    seen.add(key)
                    configs.append(atoms)
                return
            for i, y in choice_lists[idx]:
                chosen[used[idx]] = (i, y)
                rec(idx + 1, chosen)
            chosen.pop(used[idx], None)

        rec(0, {})

    for mask in range(1 << len(others)):
        used = [x for b, x in enumerate(others) if mask >> b & 1]
        unused = [x for b, x in enumerate(others) if not mask >> b & 1]
        assemble(used, unused)
    return configs


def zfree_parikh_formula(g: Grammar) -> Formula:
    """Parikh-image formula without reachability-depth variables.

    Same models over the letter counts as parikh_formula: the depth machinery
    is replaced by a finite disjunction over support configurations, which
    quantifier elimination handles far better.
    """
    trimmed = language.trim(g)
    if not trimmed.productions:
        return FALSE
    prods = list(trimmed.productions)
    nts = sorted({p.lhs for p in prods})
    letters = sorted(g.terminal_names())
    y = {i: var(f"y{i}") for i in range(len(prods))}
    conjuncts: list[Formula] = []
    for nt in nts:
        produced = tsum(y[i].scale(_count(p.rhs, nt)) for i, p in enumerate(prods))
        if nt == trimmed.start:
            produced = produced + const(1)
        used = tsum(y[i] for i, p in enumerate(prods) if p.lhs == nt)
        conjuncts.append(cmp("=", produced, used))
    for letter in letters:
        sym = T(letter)
        total = tsum(y[i].scale(_count(p.rhs, sym)) for i, p in enumerate(prods))
        conjuncts.append(cmp("=", var(parikh_var(letter)), total))
    options = []
    for config in _support_configurations(prods, nts, trimmed.start):
        atoms = [
            cmp("=", y[i], 0) if kind == "zero" else cmp(">=", y[i], 1)
            for kind, i in config
        ]
        options.append(land(*atoms))
    conjuncts.append(lor(*options))
    nonneg = [cmp(">=", var(parikh_var(letter)), 0) for letter in letters]
    nonneg += [cmp(">=", y[i], 0) for i in range(len(prods))]
    bound = [y[i].coeffs[0][0] for i in range(len(prods))]
    return exists(bound, land(*conjuncts, *nonneg))


def adapted_parikh_formula(h: Grammar, w: BoundednessWitness) -> Formula:
    """Existential formula over x1..xl with L(h) = {w1^x1 ... wl^xl | formula}.

    Requires h bounded by w (contract; verified by the caller).
    """
    pda = automata.cfg_to_pda(language.binarize(h))
    hom = w.homomorphism()
    inv = automata.inverse_homomorphism(pda, hom)
    fresh_letters = sorted(hom)
    dfa = automata.witness_dfa(fresh_letters, alphabet=frozenset(fresh_letters))
    product = automata.intersect_pda_dfa(inv, dfa)
    restricted = language.compact(automata.pda_to_cfg(product))
    # the depth-free variant has the same models and eliminates much faster
    phi = zfree_parikh_formula(restricted)
    mapping = {parikh_var(ch): f"x{i + 1}" for i, ch in enumerate(fresh_letters)}
    from .presburger import rename_variables

    return rename_variables(phi, mapping)


def exponent_vars(w: BoundednessWitness) -> list[str]:
    return [f"x{i + 1}" for i in range(len(w.words))]


def bounded_equivalence(
    g: Grammar,
    w: BoundednessWitness,
    h: Grammar,
    budget: Budget | None = None,
) -> EquivalenceOutcome:
    """Equivalence test with g the reference grammar, bounded by w.

    Mirrors the four-step algorithm: boundedness of h, adapted Parikh images
    for both, satisfiability of the symmetric difference, counterexample
    reconstruction from the model (membership-verified on both grammars).
    """
    budget = budget or Budget(ms=20_000)
    check = test_bounded_by_witness(h, w, budget)
    if check.outcome == "timeout":
        return EquivalenceOutcome("timeout")
    if check.outcome == "not_bounded":
        u = check.counterexample
        assert u is not None
        if not language.membership(h, u) or language.membership(g, u):
            raise InternalConsistencyError(f"structural counterexample {u!r} failed verification")
        return EquivalenceOutcome("not_equivalent", u, "only_in_right")
    finite = _finite_pair_outcome(g, h)
    if finite is not None:
        return finite
    try:
        phi_g = qe.eliminate_quantifiers(adapted_parikh_formula(g, w), budget)
        phi_h = qe.eliminate_quantifiers(adapted_parikh_formula(h, w), budget)
        xs = set(exponent_vars(w))
        difference = lor(land(phi_g, lnot(phi_h)), land(phi_h, lnot(phi_g)))
        model = qe.satisfiable(difference, nonneg=xs, budget=budget)
    except BudgetExceeded:
        return EquivalenceOutcome("timeout")
    if model is None:
        return EquivalenceOutcome("equivalent")
    exponents = [model.get(x, 0) for x in exponent_vars(w)]
    u = w.expand(exponents)
    in_g, in_h = language.membership(g, u), language.membership(h, u)
    if in_g == in_h:
        raise InternalConsistencyError(
            f"model {model} produced {u!r} which is in both or neither language"
        )
    side = "only_in_left" if in_g else "only_in_right"
    return EquivalenceOutcome("not_equivalent", u, side)


def _finite_pair_outcome(g: Grammar, h: Grammar) -> Optional[EquivalenceOutcome]:
    """Two finite languages compare by full enumeration; the Presburger route
    is exact but wasteful for long base words."""
    if not (language.is_finite(g) and language.is_finite(h)):
        return None

    def bound(grammar: Grammar) -> int:
        return 2 * len(grammar.nonterminals) + sum(len(p.rhs) for p in grammar.productions)

    limit = max(bound(g), bound(h))
    left = language.enumerate_words(g, limit)
    right = language.enumerate_words(h, limit)
    if left == right:
        return EquivalenceOutcome("equivalent")
    difference = sorted(left ^ right, key=lambda w: (len(w), w))
    u = difference[0]
    side = "only_in_left" if u in left else "only_in_right"
    return EquivalenceOutcome("not_equivalent", u, side)


def parikh_difference(
    g: Grammar,
    h: Grammar,
    budget: Budget | None = None,
) -> Optional[tuple[Valuation, Formula]]:
    """A letter-count valuation separating the Parikh images, with a
    comprehensible-normal-form description of the symmetric difference;
    None when the images coincide."""
    budget = budget or Budget(ms=20_000)
    letters = sorted(g.terminal_names() | h.terminal_names())

    def image(grammar: Grammar) -> Formula:
        phi = zfree_parikh_formula(language.compact(grammar))
        missing = [ch for ch in letters if ch not in grammar.terminal_names()]
        if phi == FALSE:
            return FALSE
        return land(phi, *(cmp("=", var(parikh_var(ch)), 0) for ch in missing))

    phi_g = qe.eliminate_quantifiers(image(g), budget)
    phi_h = qe.eliminate_quantifiers(image(h), budget)
    difference = lor(land(phi_g, lnot(phi_h)), land(phi_h, lnot(phi_g)))
    xs = {parikh_var(ch) for ch in letters}
    model = qe.satisfiable(difference, nonneg=xs, budget=budget)
    if model is None:
        return None
    full = {parikh_var(ch): model.get(parikh_var(ch), 0) for ch in letters}
    description = setnotation.polish_predicate(qe.eliminate_quantifiers(difference, budget), xs, budget)
    return full, description


def discover_witness(g: Grammar, max_words: int = 50, max_len: int = 12) -> Optional[BoundednessWitness]:
    """Heuristic witness discovery: factor sample words into repeated blocks,
    merge the block sequences order-preservingly, and verify the candidate.

    Falls back to single letters in first-use order; None when both fail.
    """
    samples = language.words_up_to(g, max_len)[:max_words]
    if not samples:
        letters = sorted(g.terminal_names())
        candidate = BoundednessWitness((letters[0] if letters else "a",))
        return candidate if test_bounded_by_witness(g, candidate).outcome == "bounded" else None

    def factor(word: Word) -> list[str]:
        # maximal runs of a repeated block (block length <= 3); positions not
        # covered by any repetition contribute single letters
        blocks: list[str] = []
        i = 0
        while i < len(word):
            best_block, best_cover = word[i], 1
            for blen in (1, 2, 3):
                block = word[i : i + blen]
                if len(block) < blen:
                    break
                reps = 1
                while word[i + reps * blen : i + (reps + 1) * blen] == block:
                    reps += 1
                cover = reps * blen
                if reps >= 2 and cover > best_cover:
                    best_block, best_cover = block, cover
            blocks.append(best_block)
            i += best_cover
        return blocks

    def merge(base: list[str], extra: list[str]) -> list[str]:
        # shortest common supersequence via LCS
        n, m = len(base), len(extra)
        lcs = [[0] * (m + 1) for _ in range(n + 1)]
        for i in range(n - 1, -1, -1):
            for j in range(m - 1, -1, -1):
                if base[i] == extra[j]:
                    lcs[i][j] = lcs[i + 1][j + 1] + 1
                else:
                    lcs[i][j] = max(lcs[i + 1][j], lcs[i][j + 1])
        out: list[str] = []
        i = j = 0
        while i < n and j < m:
            if base[i] == extra[j]:
                out.append(base[i])
                i += 1
                j += 1
            elif lcs[i + 1][j] >= lcs[i][j + 1]:
                out.append(base[i])
                i += 1
            else:
                out.append(extra[j])
                j += 1
        out.extend(base[i:])
        out.extend(extra[j:])
        return out

    merged: list[str] = []
    for word in samples:
        if word:
            merged = merge(merged, factor(word))
    if merged:
        candidate = BoundednessWitness(tuple(merged))
        if test_bounded_by_witness(g, candidate).outcome == "bounded":
            return candidate
    first_use: list[str] = []
    for word in samples:
        for ch in word:
            if ch not in first_use:
                first_use.append(ch)
    if not first_use:
        first_use = sorted(g.terminal_names()) or ["a"]
    candidate = BoundednessWitness(tuple(first_use))
    if test_bounded_by_witness(g, candidate).outcome == "bounded":
        return candidate
    return None


def set_notation(
    h: Grammar,
    w: BoundednessWitness,
    budget: Budget | None = None,
) -> setnotation.SetNotation:
    """Sugared set-notation description of L(h) relative to the witness.

    Propagates BudgetExceeded; the caller reports it as a timeout.
    """
    budget = budget or Budget(ms=10_000)
    phi = adapted_parikh_formula(h, w)
    qf = qe.eliminate_quantifiers(phi, budget)
    normal = setnotation.polish_predicate(qf, set(exponent_vars(w)), budget)
    sn = setnotation.make_set_notation(tuple(w.words), normal)
    return setnotation.apply_sugar(sn)
