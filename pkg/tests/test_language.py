import itertools

import pytest

from cfgeq.grammar import N, parse_grammar
from cfgeq.language import (
    compact,
    enumerate_words,
    is_empty,
    is_finite,
    membership,
    nullable_nonterminals,
    shortest_member,
    trim,
    useful_nonterminals,
    words_up_to,
)


def names(symbols):
    return sorted(s.name for s in symbols)


def test_useful_nonterminals():
    g = parse_grammar("S -> a S")
    generating, _ = useful_nonterminals(g)
    assert generating == frozenset()
    g2 = parse_grammar("S -> a S b | a b")
    generating, reachable = useful_nonterminals(g2)
    assert names(generating) == ["S"] and names(reachable) == ["S"]
    g3 = parse_grammar("S -> a b ; X -> c")
    _, reachable = useful_nonterminals(g3)
    assert names(reachable) == ["S"]


def test_is_empty():
    assert is_empty(parse_grammar("S -> a S"))
    assert not is_empty(parse_grammar("S -> a S b | a b"))
    # fixpoint oracle: unit cycle without a terminating rule
    assert is_empty(parse_grammar("S -> A ; A -> B ; B -> A"))


def test_is_finite():
    assert is_finite(parse_grammar("S -> a b | b a"))
    assert not is_finite(parse_grammar("S -> a S b | a b"))
    # useful-looking cycle that generates nothing: empty, hence finite
    g = parse_grammar("S -> a A ; A -> S")
    assert enumerate_words(g, 10) == set()
    assert is_finite(g)
    # unit cycle with an escape is finite
    assert is_finite(parse_grammar("S -> A ; A -> S | a"))
    # nullable context can still pump
    assert not is_finite(parse_grammar("S -> A S | a ; A -> a | eps"))


def test_nullable():
    assert names(nullable_nonterminals(parse_grammar("A -> a A | eps"))) == ["A"]
    assert names(nullable_nonterminals(parse_grammar("S -> A B ; A -> eps ; B -> b"))) == ["A"]
    assert names(nullable_nonterminals(parse_grammar("S -> A B ; A -> eps ; B -> eps"))) == [
        "A",
        "B",
        "S",
    ]


def test_membership_paper_examples():
    assert membership(parse_grammar("S -> a S b | a b b"), "abb")
    assert not membership(parse_grammar("S -> a S b | a b b b"), "abb")
    g = parse_grammar("S -> a S | eps")
    assert membership(g, "") and membership(g, "aaa")
    assert not membership(parse_grammar("S -> a S b | a b"), "")


def test_membership_units_and_eps():
    g = parse_grammar("S -> A ; A -> B | a ; B -> S b | eps")
    for w in ["", "a", "b", "ab", "abb"]:
        assert membership(g, w) == (w in enumerate_words(g, 4)), w


def test_enumerate_words_closed_forms():
    assert words_up_to(parse_grammar("S -> a S b | a b"), 6) == ["ab", "aabb", "aaabbb"]
    assert enumerate_words(parse_grammar("S -> a S"), 5) == set()
    assert words_up_to(parse_grammar("S -> a S b | a b b b"), 7) == ["abbb", "aabbbb"]


def test_enumerate_rejects_negative():
    with pytest.raises(ValueError):
        enumerate_words(parse_grammar("S -> a"), -1)


def test_cross_oracle_enumeration_vs_membership(corpus):
    # exhaustive over the full alphabet power up to length 8 (small alphabets)
    for g in corpus:
        letters = sorted(s.name for s in g.alphabet)
        if len(letters) > 2:
            continue
        words = enumerate_words(g, 8)
        for n in range(0, 9):
            for tup in itertools.product(letters, repeat=n):
                w = "".join(tup)
                assert membership(g, w) == (w in words), (g, w)


def test_emptiness_matches_enumeration_bound(corpus):
    for g in corpus:
        bound = 2 * len(g.nonterminals) + sum(len(p.rhs) for p in g.productions)
        assert is_empty(g) == (enumerate_words(g, bound) == set())


def test_finiteness_matches_enumeration_bound(corpus):
    for g in corpus:
        bound = 2 * len(g.nonterminals) + sum(len(p.rhs) for p in g.productions)
        if is_finite(g):
            assert enumerate_words(g, bound) == enumerate_words(g, bound + 4)
        else:
            assert enumerate_words(g, bound) != enumerate_words(g, bound + 4)


def test_trim_keeps_language():
    g = parse_grammar("S -> a b | X ; X -> X a ; Y -> b")
    t = trim(g)
    assert enumerate_words(g, 6) == enumerate_words(t, 6)
    assert N("X") not in t.nonterminals and N("Y") not in t.nonterminals


def test_compact_preserves_language(corpus):
    for g in corpus:
        assert enumerate_words(g, 7) == enumerate_words(compact(g), 7)


def test_shortest_member():
    assert shortest_member(parse_grammar("S -> a S b | a b")) == "ab"
    assert shortest_member(parse_grammar("S -> a S")) is None
    assert shortest_member(parse_grammar("S -> b a | a b")) == "ab"  # lexicographic tie-break
    assert shortest_member(parse_grammar("S -> a S | eps")) == ""
