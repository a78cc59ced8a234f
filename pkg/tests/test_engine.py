import pytest

from cfgeq.bounded import BoundednessWitness
from cfgeq.canon import canonical_key
from cfgeq.engine import (
    CacheEntry,
    CacheIntegrityError,
    EngineConfig,
    Explanation,
    Verdict,
    VerdictCache,
    bug_fix_search,
    classify,
    cluster_attempts,
    counterexample_search,
    explain,
    generate_variations,
    make_exercise_context,
)
from cfgeq.grammar import parse_grammar
from cfgeq.language import enumerate_words, membership


@pytest.fixture()
def intro_ctx():
    return make_exercise_context(
        parse_grammar("S -> a S b | a b b b"), BoundednessWitness(("a", "b"))
    )


def test_counterexample_search_minimal():
    found = counterexample_search(
        parse_grammar("S -> a S b | a b b b"), parse_grammar("S -> a S b | a b b")
    )
    assert found == ("abb", "only_in_right")
    assert counterexample_search(parse_grammar("S -> a b"), parse_grammar("S -> a b")) is None


def test_counterexample_search_respects_length_cap():
    left = parse_grammar("S -> a S b | a b")
    right = parse_grammar("S -> a S b | a b | a a a a a a a a b b b b b b b b b")  # length 17
    assert counterexample_search(left, right, 15) is None
    assert counterexample_search(left, right, 17) is not None


def test_classify_method_order():
    # cache disabled so each submission shows its deciding method, not "cache"
    ctx = make_exercise_context(
        parse_grammar("S -> a S b | a b b b"),
        BoundednessWitness(("a", "b")),
        config=EngineConfig(use_cache=False),
    )
    assert classify(ctx.target, ctx).method == "equality"
    assert classify(parse_grammar("T -> a T b | a b b b"), ctx).method == "isomorphism"
    empty = classify(parse_grammar("S -> a S"), ctx)
    assert (empty.outcome, empty.method) == ("not_equivalent", "emptiness")
    finite = classify(parse_grammar("S -> a b b b"), ctx)
    assert (finite.outcome, finite.method) == ("not_equivalent", "finiteness")
    ce = classify(parse_grammar("S -> a S b | a b b"), ctx)
    assert (ce.outcome, ce.method) == ("not_equivalent", "counterexample")
    assert ce.evidence.counterexample == ("abb", "only_in_left")


def test_classify_normalization_variant():
    ctx = make_exercise_context(parse_grammar("S -> b A | a B ; A -> a A | eps ; B -> b B | eps"))
    verdict = classify(parse_grammar("S -> b A | a B ; A -> A a | eps ; B -> b B | eps"), ctx)
    assert (verdict.outcome, verdict.method) == ("equivalent", "normalization")


def test_classify_bounded_branch(intro_ctx):
    variant = parse_grammar("S -> a T b ; T -> a T b | b b")
    verdict = classify(variant, intro_ctx)
    assert verdict.outcome == "equivalent"
    assert verdict.method in ("normalization", "bounded_equivalence")


def test_classify_boundedness_witness_counterexample(intro_ctx):
    g1 = parse_grammar("S -> a S x | x")  # not over a*b* at all
    verdict = classify(g1, intro_ctx)
    assert verdict.outcome == "not_equivalent"


def test_cache_hits_on_isomorphic_resubmission(intro_ctx):
    first = classify(parse_grammar("S -> a S b | a b b"), intro_ctx)
    assert first.method == "counterexample"
    second = classify(parse_grammar("X -> a X b | a b b"), intro_ctx)
    assert second.method == "cache"
    assert second.outcome == first.outcome


def test_cache_consistency_with_and_without_cache(intro_ctx, corpus):
    cold = make_exercise_context(
        intro_ctx.target, intro_ctx.witness, config=EngineConfig(use_cache=False)
    )
    for g in corpus:
        with_cache = classify(g, intro_ctx)
        without = classify(g, cold)
        assert with_cache.outcome == without.outcome, g.productions


def test_cache_integrity_error():
    cache = VerdictCache()
    key = b"k"
    cache.insert(CacheEntry(key, Verdict("equivalent", "equality"), "attempt"))
    cache.insert(CacheEntry(key, Verdict("equivalent", "isomorphism"), "attempt"))  # idempotent
    with pytest.raises(CacheIntegrityError):
        cache.insert(
            CacheEntry(key, Verdict("not_equivalent", "manual", Explanation()), "manual")
        )


def test_cache_persistence_round_trip(tmp_path, intro_ctx):
    path = tmp_path / "cache.log"
    cache = VerdictCache(path)
    ctx = make_exercise_context(intro_ctx.target, intro_ctx.witness, cache=cache)
    classify(parse_grammar("S -> a S b | a b b"), ctx)
    replayed = VerdictCache(path)
    assert set(replayed.entries) == set(cache.entries)
    for key, entry in replayed.entries.items():
        assert entry.verdict.outcome == cache.entries[key].verdict.outcome


def test_diagnostic_mode_methods_agree(intro_ctx):
    verdict, outcomes = classify(parse_grammar("S -> a S b | a b b"), intro_ctx, diagnostic=True)
    assert verdict.outcome == "not_equivalent"
    decided = {v.outcome for v in outcomes.values()}
    assert decided == {"not_equivalent"}
    assert {"counterexample", "symbol_frequencies", "bounded_equivalence"} <= set(outcomes)


def test_cross_method_agreement_over_corpus(corpus):
    # diagnostic mode runs every method; any two deciding methods must agree
    sample = corpus[:6]
    for target in sample:
        ctx = make_exercise_context(
            target, config=EngineConfig(use_cache=False, max_counterexample_len=8)
        )
        for attempt in sample:
            _, outcomes = classify(attempt, ctx, diagnostic=True)
            decided = {v.outcome for v in outcomes.values() if v.outcome != "undecided"}
            assert len(decided) <= 1, (target.productions, attempt.productions, outcomes)


def test_explain_assembles_pieces(intro_ctx):
    attempt = parse_grammar("S -> a S b | a b b")
    verdict = classify(attempt, intro_ctx)
    explanation = explain(attempt, intro_ctx.target, verdict, intro_ctx)
    assert explanation.counterexample == ("abb", "only_in_left")
    sn, concise = explanation.attempt_set_notation
    assert "b^{i + 1}" in sn.rendered and concise
    assert explanation.target_set_notation is not None
    assert explanation.parikh_difference is not None


def test_explain_structural_counterexample(intro_ctx):
    g1 = parse_grammar("S -> a S | T | eps ; T -> b T | S | eps")
    verdict = classify(g1, intro_ctx)
    explanation = explain(g1, intro_ctx.target, verdict, intro_ctx)
    word, witness = explanation.structural_counterexample
    assert witness == ("a", "b")
    assert membership(g1, word)


def test_bug_fix_c3():
    target = parse_grammar("S -> a S b | a b")
    ctx = make_exercise_context(target)
    fix = bug_fix_search(parse_grammar("S -> a S b | eps"), target, ctx)
    assert fix is not None and fix[0] == "C3"
    assert enumerate_words(fix[1], 10) == enumerate_words(target, 10)


def test_bug_fix_c1():
    target = parse_grammar("S -> a S b | eps")
    ctx = make_exercise_context(target)
    fix = bug_fix_search(parse_grammar("S -> a S b | a b"), target, ctx)
    assert fix is not None and fix[0] == "C1"


def test_bug_fix_absent_for_wild_attempt(intro_ctx):
    assert bug_fix_search(parse_grammar("S -> c c c"), intro_ctx.target, intro_ctx) is None


def test_cluster_attempts_three_classes():
    target = parse_grammar("S -> a S b | a b")
    ctx = make_exercise_context(target, BoundednessWitness(("a", "b")))
    attempts = [
        parse_grammar("X -> a X b | a b"),            # isomorphic: solution
        parse_grammar("S -> a T b ; T -> a T b | eps"),  # equivalent encoding
        parse_grammar("S -> a S b | eps"),            # error class 1
        parse_grammar("T -> a T b | eps"),            # same error class
        parse_grammar("S -> a S b | a b b"),          # error class 2
    ]
    clusters = cluster_attempts(attempts, target, ctx)
    kinds = sorted(c.kind for c in clusters)
    assert kinds == ["error", "error", "solution"]
    solution = next(c for c in clusters if c.kind == "solution")
    assert len(solution.member_keys) == 2


def test_cluster_merging_respects_boundedness_precondition():
    # these two have identical a*b*-shaped sublanguages but different
    # languages; the pairwise bounded test must not merge them
    target = parse_grammar("S -> a S b | a b")
    ctx = make_exercise_context(target, BoundednessWitness(("a", "b")))
    all_words = parse_grammar("S -> a S | b S | eps")
    astar_bstar = parse_grammar("S -> a S | T ; T -> b T | eps")
    assert enumerate_words(all_words, 6) != enumerate_words(astar_bstar, 6)
    clusters = cluster_attempts([all_words, astar_bstar], target, ctx)
    for cluster in clusters:
        members = [
            g for g in (all_words, astar_bstar) if canonical_key(g).bytes in cluster.member_keys
        ]
        assert len(members) <= 1, "inequivalent grammars merged into one cluster"


def test_make_exercise_context_rejects_bad_witness():
    with pytest.raises(ValueError):
        make_exercise_context(
            parse_grammar("S -> a S a | b S b | c"), BoundednessWitness(("a", "b"))
        )


def test_generate_variations_cached(intro_ctx):
    g = parse_grammar("S -> b A | a B ; A -> a A | eps ; B -> b B | eps")
    ctx = make_exercise_context(g)
    verdict = classify(g, ctx)
    keys = generate_variations(g, verdict, ctx)
    assert canonical_key(g).bytes in keys
    assert len(keys) >= 3  # the star-loop family rewrites both sub-loops
    for key in keys:
        assert ctx.cache.lookup(key) is not None


def test_variation_grammars_equivalent(intro_ctx):
    g = parse_grammar("S -> b A | a B ; A -> a A | eps ; B -> b B | eps")
    ctx = make_exercise_context(g)
    from cfgeq.transform.matching import apply_transformation

    for t in ctx.registry.equivalence_transformations():
        for out in apply_transformation(t, g):
            assert enumerate_words(out, 10) == enumerate_words(g, 10), t.name
