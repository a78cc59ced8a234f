"""Acceptance suite: one test per primary criterion, each printing a
PASS/FAIL line.  Tolerances are pinned here, nothing is deferred:

  * semantic equality of predicates is checked on exponent grids <= 8,
  * Parikh oracles compare exactly on component sums <= 10 vs words <= 10,
  * quantifier elimination compares exactly on valuations 0..6,
  * canonization invariance and distinctness must hold 100%,
  * bounded-equivalence decisions must land inside a 20s budget,
  * the end-to-end intro example must finish in under 5 seconds.
"""

import itertools
import random
import time

import pytest

from cfgeq import qe
from cfgeq.bounded import (
    BoundednessWitness,
    adapted_parikh_formula,
    bounded_equivalence,
    parikh_formula,
    parikh_var,
    set_notation,
)
from cfgeq.bounded import test_bounded_by_witness as check_bounded
from cfgeq.budget import Budget
from cfgeq.canon import canonical_key
from cfgeq.engine import (
    EngineConfig,
    classify,
    cluster_attempts,
    counterexample_search,
    explain,
    make_exercise_context,
)
from cfgeq.grammar import parse_grammar
from cfgeq.language import enumerate_words, membership
from cfgeq.presburger import Divides, cmp, const, evaluate, exists, land, lnot, lor, term, var
from cfgeq.setnotation import is_concise
from cfgeq.transform import (
    apply_transformation,
    default_registry,
    normalization_pipeline,
    run_pipeline,
)


def report(name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] {status} {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


# ----------------------------------------------------------------- corpora

PARIKH_CORPUS = [
    "S -> a S b | a b",
    "S -> a S b | a b b",
    "S -> a S b | a b b b",
    "S -> a S b | eps",
    "S -> a b | b a",
    "S -> a S",
    "S -> A B ; A -> a A | eps ; B -> b B | b",
    "S -> A b b B ; A -> a A b | eps ; B -> c B | eps",
    "S -> a S c | T ; T -> b T c | eps",
    "S -> S S | a | eps",
    "S -> a S a | b S b | c",
    "S -> b A | a B ; A -> a A | eps ; B -> b B | eps",
    "S -> a T b ; T -> a T b | a | b",
    "S -> X S | eps ; X -> a X c | B ; B -> b B | eps",
    "S -> a b",
    "S -> eps",
    "S -> a A ; A -> S",
    "S -> a S | a A ; A -> a A b | eps",
    "S -> a S b | S b | b",
    "S -> a S b | a a S b | eps",
    "S -> T C ; T -> a T b | b b ; C -> c C | eps",
    "S -> a a S b b | eps",
    "S -> A A ; A -> a A b | eps",
    "S -> a S c c | A ; A -> b A c | b c",
    "S -> b S a | S a | a",
    "S -> a X ; X -> a X | b X | eps",
    "S -> A a ; A -> A b | eps",
    "S -> a S | T ; T -> b T | eps",
    "S -> ( S ) | S S | eps",
    "S -> a S b | c",
]


def qe_formula_corpus():
    """50 formulas with bounded existential parts so brute force is complete."""
    x, y, z = var("x"), var("y"), var("z")
    fixed = [
        exists(["y"], land(cmp("=", x, y.scale(2)), cmp(">=", y, 0), cmp("<=", y, 6))),
        exists(["y"], land(cmp("=", x, y + const(1)), cmp(">=", y, 0), cmp("<=", y, 6))),
        exists(["y"], land(Divides(3, x + y), cmp(">=", y, 0), cmp("<=", y, 6))),
        exists(["y"], land(Divides(2, y), cmp("<", y, x), cmp(">=", y, 0), cmp("<=", y, 6))),
        exists(["y", "z"], land(cmp("=", x, y + z), Divides(2, y), Divides(3, z),
                                cmp(">=", y, 0), cmp("<=", y, 6), cmp(">=", z, 0), cmp("<=", z, 6))),
        exists(["y"], land(lor(cmp("=", y, x), cmp("=", y.scale(2), x)),
                           Divides(2, y + const(1)), cmp(">=", y, 0), cmp("<=", y, 6))),
        exists(["y"], land(lnot(Divides(2, y + x)), cmp("<=", y, z), cmp(">=", y, 0), cmp("<=", y, 6))),
        exists(["y"], land(cmp("<=", x, y), cmp("<=", y, z), cmp(">=", y, 0), cmp("<=", y, 6))),
        exists(["y"], land(cmp("=", x + y, z.scale(2)), cmp(">=", y, 0), cmp("<=", y, 6))),
        exists(["y"], land(Divides(4, y.scale(3) + x), cmp("!=", y, z), cmp(">=", y, 0), cmp("<=", y, 6))),
    ]
    rng = random.Random(20240810)
    vs = ["x", "y", "z"]

    def rand_term():
        return term({v: rng.randint(-3, 3) for v in vs if rng.random() < 0.7}, rng.randint(-4, 4))

    def rand_atom():
        if rng.random() < 0.3:
            return Divides(rng.choice([2, 3, 4]), rand_term())
        return cmp(rng.choice(["=", "!=", "<", "<=", ">", ">="]), rand_term(), rand_term())

    def rand_formula(depth):
        if depth == 0:
            return rand_atom()
        r = rng.random()
        if r < 0.4:
            return land(rand_formula(depth - 1), rand_formula(depth - 1))
        if r < 0.8:
            return lor(rand_formula(depth - 1), rand_formula(depth - 1))
        return lnot(rand_formula(depth - 1))

    corpus = list(fixed)
    while len(corpus) < 50:
        qv = rng.choice(vs)
        body = land(rand_formula(2), cmp(">=", var(qv), 0), cmp("<=", var(qv), 6))
        corpus.append(exists([qv], body))
    return corpus


# -------------------------------------------------------------- criteria


def test_criterion_intro_example_end_to_end():
    started = time.monotonic()
    target = parse_grammar("S -> a S b | a b b b")
    attempt = parse_grammar("S -> a S b | a b b")
    ctx = make_exercise_context(target, BoundednessWitness(("a", "b")))
    verdict = classify(attempt, ctx)
    ok = verdict.outcome == "not_equivalent"
    word, _ = verdict.evidence.counterexample
    ok = ok and word == "abb" and len(word) == 3
    # minimality verified by enumeration to length 3
    shorter = [
        w
        for n in range(3)
        for w in ["".join(t) for t in itertools.product("ab", repeat=n)]
        if membership(attempt, w) != membership(target, w)
    ]
    ok = ok and shorter == []
    explanation = explain(attempt, target, verdict, ctx)
    sn, _ = explanation.attempt_set_notation
    semantically_anbn1 = all(
        evaluate(sn.predicate, dict.fromkeys(sn.exponent_vars, i))
        == (i >= 1)  # {a^n b^{n+1}} over the merged exponent
        for i in range(9)
    ) and all(
        membership(attempt, "a" * i + "b" * j) == ((j == i + 1) and i >= 1)
        for i in range(9)
        for j in range(9)
    )
    elapsed = time.monotonic() - started
    report(
        "intro example end-to-end",
        ok and semantically_anbn1 and elapsed < 5.0,
        f"counterexample={word!r}, {elapsed:.2f}s",
    )


def test_criterion_structural_counterexample():
    g1 = parse_grammar("S -> a S | T | eps ; T -> b T | S | eps")
    witness = BoundednessWitness(("a", "b"))
    check = check_bounded(g1, witness)
    ok = check.outcome == "not_bounded"
    word = check.counterexample
    from cfgeq.automata import witness_dfa

    dfa = witness_dfa(["a", "b"])
    ok = ok and membership(g1, word) and not dfa.accepts(word)
    # minimality verified by enumeration: no shorter word of L(G1) escapes
    # a*b* ("ba" of length 2 already does, since L(G1) = {a,b}*)
    shorter = [
        w
        for n in range(len(word))
        for w in ["".join(t) for t in itertools.product("ab", repeat=n)]
        if membership(g1, w) and not dfa.accepts(w)
    ]
    ok = ok and shorter == []
    report("structural counterexample minimal", ok, f"word={word!r}, length={len(word)}")


def test_criterion_set_notation_goldens():
    witness = BoundednessWitness(("a", "b"))
    sn1 = set_notation(parse_grammar("S -> A B ; A -> A a | a ; B -> B b | b"), witness)
    ok1 = all(
        evaluate(sn1.predicate, {"i": i, "j": j}) == (i >= 1 and j >= 1)
        for i in range(9)
        for j in range(9)
    ) and is_concise(sn1.predicate)
    sn2 = set_notation(parse_grammar("S -> A ; A -> a B b ; B -> a A b | eps"), witness)
    ok2 = (
        sn2.exponent_vars == ("i",)
        and all(evaluate(sn2.predicate, {"i": i}) == (i % 2 == 1) for i in range(9))
        and is_concise(sn2.predicate)
    )
    sn3 = set_notation(
        parse_grammar("S -> a X b | a Y b ; X -> a X b | a ; Y -> a Y b | b"), witness
    )
    ok3 = all(
        evaluate(sn3.predicate, {"i": i, "j": j})
        == ((i >= 1 and j == 1 + i) or (j == i - 1 and i >= 2))
        for i in range(9)
        for j in range(9)
    )
    report(
        "set-notation goldens",
        ok1 and ok2 and ok3,
        f"{sn1.rendered} ; {sn2.rendered} ; {sn3.rendered}",
    )


def test_criterion_transformation_goldens():
    registry = default_registry()
    ck = lambda g: canonical_key(g).bytes
    rho1 = registry.patterns["RightStarLoopToDoubling"]
    results = apply_transformation(
        rho1, parse_grammar("S -> b A | a B ; A -> a A | eps ; B -> b B | eps")
    )
    ok = {ck(r) for r in results} == {
        ck(parse_grammar("S -> b A | a B ; A -> A A | a | eps ; B -> b B | eps")),
        ck(parse_grammar("S -> b A | a B ; A -> a A | eps ; B -> B B | b | eps")),
    }
    ok = ok and apply_transformation(rho1, parse_grammar("A -> a A | eps | b")) == []
    rho3 = registry.patterns["IndexedStarLoopToDoubling"]
    out3 = apply_transformation(rho3, parse_grammar("A -> a A | b A | eps"))
    ok = ok and [ck(r) for r in out3] == [ck(parse_grammar("A -> A A | a | b | eps"))]
    rho4 = registry.patterns["InlineRecursionLevel"]
    out4 = apply_transformation(
        rho4, parse_grammar("S -> a A b | b A a ; A -> a A b | b A a | a | b")
    )
    ok = ok and [ck(r) for r in out4] == [
        ck(parse_grammar("S -> a S b | b S a | a a b | b a a | a b b | b b a"))
    ]
    rho5 = registry.patterns["EpsRecursionEndToCanonical"]
    out5 = apply_transformation(rho5, parse_grammar("S -> a S b | eps"))
    ok = ok and [ck(r) for r in out5] == [ck(parse_grammar("S -> a S b | a b"))]
    report("transformation goldens", ok)


def test_criterion_parikh_oracle():
    failures = []
    for text in PARIKH_CORPUS:
        g = parse_grammar(text)
        letters = sorted(g.terminal_names())
        words = enumerate_words(g, 10)
        vectors = {tuple(w.count(ch) for ch in letters) for w in words}
        # quantifier elimination is itself oracle-verified by the QE criterion
        qf = qe.eliminate_quantifiers(parikh_formula(g), Budget(ms=30_000))
        grid = [
            vals
            for vals in itertools.product(range(11), repeat=len(letters))
            if sum(vals) <= 10
        ]
        for vals in grid:
            valuation = {parikh_var(ch): n for ch, n in zip(letters, vals)}
            want = vals in vectors
            if evaluate(qf, valuation) != want:
                failures.append((text, vals))
                break
    report("Parikh oracle (30 grammars)", not failures, f"failures={failures[:3]}")


def test_criterion_qe_oracle():
    from cfgeq.presburger import free_variables

    failures = []
    for index, formula in enumerate(qe_formula_corpus()):
        eliminated = qe.eliminate_quantifiers(formula, Budget(ms=30_000))
        free = sorted(free_variables(formula))
        for vals in itertools.product(range(0, 7), repeat=len(free)):
            valuation = dict(zip(free, vals))
            want = evaluate(formula, valuation, exists_bound=12)
            if evaluate(eliminated, valuation) != want:
                failures.append((index, valuation))
                break
    report("QE oracle (50 formulas)", not failures, f"failures={failures[:3]}")


def test_criterion_canonization_property():
    from cfgeq.grammar import N, T, make_grammar

    rng = random.Random(814)

    def rand_grammar():
        n = rng.randint(1, 5)
        nts = [N(f"X{i}") for i in range(n)]
        letters = [T(c) for c in "ab"]
        prods = dict.fromkeys(
            (rng.choice(nts), tuple(rng.choice(nts + letters) for _ in range(rng.randint(0, 3))))
            for _ in range(rng.randint(1, 7))
        )
        return make_grammar(prods, nts[0])

    def relabel_shuffle(g):
        names = [nt.name for nt in sorted(g.nonterminals)]
        fresh = [f"Y{i}" for i in range(len(names))]
        rng.shuffle(fresh)
        mapping = dict(zip(names, fresh))
        prods = [
            (N(mapping[p.lhs.name]), tuple(s if s.terminal else N(mapping[s.name]) for s in p.rhs))
            for p in g.productions
        ]
        rng.shuffle(prods)
        return make_grammar(prods, N(mapping[g.start.name]), extra_alphabet=g.alphabet)

    grammars = [rand_grammar() for _ in range(200)]
    invariant = all(
        canonical_key(relabel_shuffle(g)) == canonical_key(g) for g in grammars for _ in range(20)
    )

    def brute_iso(a, b):
        if len(a.nonterminals) != len(b.nonterminals) or a.alphabet != b.alphabet:
            return False
        b_prods = {(p.lhs, p.rhs) for p in b.productions}
        for perm in itertools.permutations(sorted(b.nonterminals)):
            mapping = dict(zip(sorted(a.nonterminals), perm))
            if mapping[a.start] != b.start:
                continue
            mapped = {
                (mapping[p.lhs], tuple(s if s.terminal else mapping[s] for s in p.rhs))
                for p in a.productions
            }
            if mapped == b_prods:
                return True
        return False

    sample = grammars[:40]
    distinct = all(
        (canonical_key(a) == canonical_key(b)) == brute_iso(a, b)
        for a in sample
        for b in sample
    )
    report("canonization property (200x20 + brute-force pairs)", invariant and distinct)


BOUNDED_PAIRS_EQUIVALENT = [
    # {a^n b^n, n>=1}
    ("S -> a S b | a b", "S -> a T b ; T -> a T b | eps", ("a", "b")),
    ("S -> a S b | a b", "S -> a a S b b | a b | a a b b", ("a", "b")),
    ("S -> a S b | a b", "S -> a B ; B -> S b | b", ("a", "b")),
    # {a^n b^m c^{n+m}}
    ("S -> a S c | T ; T -> b T c | eps", "S -> a S c | B ; B -> b B c | eps", ("a", "b", "c")),
    ("S -> a S c | T ; T -> b T c | eps", "S -> X ; X -> a X c | Y ; Y -> b Y c | eps", ("a", "b", "c")),
    # {a^n b^{n+2} c^m}
    (
        "S -> A b b B ; A -> a A b | eps ; B -> c B | eps",
        "S -> T C ; T -> a T b | b b ; C -> c C | eps",
        ("a", "b", "c"),
    ),
    ("S -> a S b | eps", "S -> a a S b b | a b | eps", ("a", "b")),
    ("S -> a S | eps", "S -> S a | eps", ("a",)),
    ("S -> a S b | a b b b", "S -> a T b ; T -> a T b | b b", ("a", "b")),
    ("S -> A B ; A -> a A | eps ; B -> b B | b", "S -> a S | T ; T -> b T | b", ("a", "b")),
]

BOUNDED_PAIRS_INEQUIVALENT = [
    ("S -> a S b | a b", "S -> a S b | eps", ("a", "b")),
    ("S -> a S b | a b", "S -> a S b b | a b b", ("a", "b")),
    ("S -> a S b | a b b b", "S -> a S b | a b b", ("a", "b")),
    ("S -> a S c | T ; T -> b T c | eps", "S -> a S c | T ; T -> b T c | b c", ("a", "b", "c")),
    (
        "S -> A b b B ; A -> a A b | eps ; B -> c B | eps",
        "S -> A b b B ; A -> a A b | eps ; B -> c c B | eps",
        ("a", "b", "c"),
    ),
    ("S -> a S b | eps", "S -> a a S b b | eps", ("a", "b")),
    ("S -> a S | eps", "S -> a a S | eps", ("a",)),
    ("S -> A B ; A -> a A | eps ; B -> b B | b", "S -> A B ; A -> a A | a ; B -> b B | b", ("a", "b")),
    ("S -> a S c | T ; T -> b T c | eps", "S -> a S c c | T ; T -> b T c | eps", ("a", "b", "c")),
    ("S -> a S b | a b", "S -> a S b | a b | a a b", ("a", "b")),
]


def test_criterion_bounded_equivalence_sanity():
    failures = []
    worst = 0.0
    for left, right, words in BOUNDED_PAIRS_EQUIVALENT:
        started = time.monotonic()
        out = bounded_equivalence(
            parse_grammar(left), BoundednessWitness(words), parse_grammar(right), Budget(ms=20_000)
        )
        worst = max(worst, time.monotonic() - started)
        if out.outcome != "equivalent":
            failures.append((left, right, out.outcome))
    for left, right, words in BOUNDED_PAIRS_INEQUIVALENT:
        started = time.monotonic()
        g, h = parse_grammar(left), parse_grammar(right)
        out = bounded_equivalence(g, BoundednessWitness(words), h, Budget(ms=20_000))
        worst = max(worst, time.monotonic() - started)
        if out.outcome != "not_equivalent":
            failures.append((left, right, out.outcome))
        elif membership(g, out.counterexample) == membership(h, out.counterexample):
            failures.append((left, right, "unverified counterexample"))
    report(
        "bounded equivalence sanity (10 + 10 pairs)",
        not failures,
        f"worst={worst:.2f}s failures={failures[:2]}",
    )


def test_criterion_normalization_clustering():
    target = parse_grammar("S -> a S b | a b")
    ctx = make_exercise_context(target, BoundednessWitness(("a", "b")))
    # three true equivalence classes, twelve attempts
    class_solution = [
        "S -> a S b | a b",
        "X -> a X b | a b",
        "S -> a T b ; T -> a T b | eps",
        "S -> a B ; B -> S b | b",
    ]
    class_with_eps = [
        "S -> a S b | eps",
        "T -> a T b | eps",
        "S -> a T b | eps ; T -> a T b | eps",
        "S -> E ; E -> a E b | eps",
    ]
    class_plus_one = [
        "S -> a S b | a b b",
        "Y -> a Y b | a b b",
        "S -> a T b ; T -> a T b | b",
        "S -> a B ; B -> S b | b b",
    ]
    attempts = [parse_grammar(t) for t in class_solution + class_with_eps + class_plus_one]
    clusters = cluster_attempts(attempts, target, ctx)
    kinds = sorted(c.kind for c in clusters)
    ok = len(clusters) == 3 and kinds == ["error", "error", "solution"]
    # every attempt's canonical key lands in exactly one cluster (isomorphic
    # attempts share a key, so member counts are counts of distinct canons)
    for g in attempts:
        key = canonical_key(g).bytes
        ok = ok and sum(key in c.member_keys for c in clusters) == 1
    # members of one cluster are language-equal (refinement of true equivalence)
    for cluster in clusters:
        member_grammars = [
            g for g in attempts if canonical_key(g).bytes in cluster.member_keys
        ]
        reference = enumerate_words(member_grammars[0], 10)
        ok = ok and all(enumerate_words(g, 10) == reference for g in member_grammars[1:])
    # disabling the cache does not change verdicts
    cold = make_exercise_context(
        target, BoundednessWitness(("a", "b")), config=EngineConfig(use_cache=False)
    )
    agree = all(
        classify(g, ctx).outcome == classify(g, cold).outcome for g in attempts
    )
    report(
        "normalization clustering (12 attempts, 3 classes)",
        ok and agree,
        f"kinds={kinds}",
    )


def test_criterion_counterexample_length_behavior():
    # finite languages over witness (a, b, a): words a^n b a^k with n+k = 16,
    # n even on the left and odd on the right; every word has length 17 and
    # the Parikh images coincide, so only the bounded branch can decide
    left = parse_grammar(
        "S -> " + " | ".join(" ".join("a" * n) + " b " + " ".join("a" * (16 - n)) for n in range(0, 17, 2))
    )
    right = parse_grammar(
        "S -> " + " | ".join(" ".join("a" * n) + " b " + " ".join("a" * (16 - n)) for n in range(1, 16, 2))
    )
    absent = counterexample_search(left, right, 15) is None
    witness = BoundednessWitness(("a", "b", "a"))
    ctx = make_exercise_context(left, witness)
    verdict = classify(right, ctx)
    decided = verdict.outcome == "not_equivalent" and verdict.method == "bounded_equivalence"
    word, _ = verdict.evidence.counterexample
    verified = membership(left, word) != membership(right, word) and len(word) > 15
    report(
        "counterexample-length behavior",
        absent and decided and verified,
        f"method={verdict.method}, |word|={len(word)}",
    )


def test_criterion_full_pipeline_on_corpus(corpus):
    pipe, registry = normalization_pipeline()
    failures = []
    for g in corpus:
        result = run_pipeline(pipe, g, registry, Budget(ms=20_000, work=500_000))
        reference = enumerate_words(g, 10)
        for out in result.grammars:
            if enumerate_words(out, 10) != reference:
                failures.append((g.productions, out.productions))
    report("full pipeline language preservation", not failures, f"failures={failures[:1]}")
