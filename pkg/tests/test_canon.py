import itertools
import random

from hypothesis import given, settings, strategies as st

from cfgeq.canon import canonical_grammar, canonical_key, encode_as_graph, is_isomorphic
from cfgeq.grammar import Grammar, N, T, make_grammar, parse_grammar
from cfgeq.language import enumerate_words


def test_graph_encoding_node_counts():
    graph, _ = encode_as_graph(parse_grammar("S -> a b"))
    assert graph.node_count == 1 + 1 + 2  # NT + PROD + positions
    graph2, _ = encode_as_graph(parse_grammar("S -> a S b | a b"))
    assert graph2.node_count == 1 + 2 + 5
    # one REF edge back to S
    ref_edges = [
        (a, b)
        for a, b in graph2.edges
        if graph2.colors[a] == ("REF",) and graph2.colors[b] == ("START",)
    ]
    assert len(ref_edges) == 1


def test_canonical_key_examples():
    assert canonical_key(parse_grammar("S -> a S b | a b")) == canonical_key(
        parse_grammar("T -> a b | a T b")
    )
    assert canonical_key(parse_grammar("S -> a S b | a b")) != canonical_key(
        parse_grammar("S -> a S b | a b b")
    )
    assert canonical_key(parse_grammar("S -> A B ; A -> a ; B -> a")) == canonical_key(
        parse_grammar("S -> B A1 ; B -> a ; A1 -> a")
    )


def test_is_isomorphic_examples():
    assert is_isomorphic(parse_grammar("S -> a S b | a b"), parse_grammar("X -> a X b | a b"))
    assert is_isomorphic(parse_grammar("S -> a S b | a b"), parse_grammar("S -> a b | a S b"))
    assert not is_isomorphic(parse_grammar("S -> a S b | a b"), parse_grammar("S -> a S b"))


def _random_grammar(rng):
    n = rng.randint(1, 4)
    nts = [N(f"X{i}") for i in range(n)]
    letters = [T(c) for c in "ab"]
    prods = dict.fromkeys(
        (rng.choice(nts), tuple(rng.choice(nts + letters) for _ in range(rng.randint(0, 3))))
        for _ in range(rng.randint(1, 6))
    )
    return make_grammar(prods, nts[0])


def _relabel_shuffle(g: Grammar, rng) -> Grammar:
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


def _brute_force_isomorphic(a: Grammar, b: Grammar) -> bool:
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


def test_canonical_key_invariance_200x20():
    rng = random.Random(2024)
    for _ in range(200):
        g = _random_grammar(rng)
        key = canonical_key(g)
        assert key.canonical
        for _ in range(20):
            assert canonical_key(_relabel_shuffle(g, rng)) == key


def test_key_equality_matches_brute_force_isomorphism():
    rng = random.Random(77)
    grammars = [_random_grammar(rng) for _ in range(30)]
    for a in grammars:
        for b in grammars:
            assert (canonical_key(a) == canonical_key(b)) == _brute_force_isomorphic(a, b)


def test_isomorphic_encodings_for_isomorphic_grammars():
    rng = random.Random(5)
    for _ in range(25):
        g = _random_grammar(rng)
        h = _relabel_shuffle(g, rng)
        ga, _ = encode_as_graph(g)
        gb, _ = encode_as_graph(h)
        assert sorted(map(repr, ga.colors)) == sorted(map(repr, gb.colors))
        assert len(ga.edges) == len(gb.edges)


def test_key_is_stable_bytes():
    g = parse_grammar("S -> a S b | a b")
    assert canonical_key(g).bytes == canonical_key(parse_grammar("S -> a S b | a b")).bytes
    assert canonical_key(g).bytes.decode().startswith("start N0")


def test_canonical_grammar_round_trip():
    g = parse_grammar("Foo -> a Foo b | Bar ; Bar -> b")
    cg = canonical_grammar(g)
    assert canonical_key(cg) == canonical_key(g)
    assert enumerate_words(cg, 8) == enumerate_words(g, 8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**30))
def test_invariance_hypothesis(seed):
    rng = random.Random(seed)
    g = _random_grammar(rng)
    key = canonical_key(g)
    for _ in range(3):
        assert canonical_key(_relabel_shuffle(g, rng)) == key
