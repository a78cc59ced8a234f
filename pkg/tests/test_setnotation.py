import itertools

from cfgeq.presburger import Divides, cmp, const, evaluate, land, lor, var
from cfgeq.setnotation import (
    SetNotation,
    apply_sugar,
    comprehensible_normal_form,
    domain_simplify,
    is_concise,
    make_set_notation,
    polish_predicate,
    render_predicate,
    render_set_notation,
    split_comprehensible,
)

i, j, k = var("i"), var("j"), var("k")


def _agree(a, b, names, bound=8):
    for vals in itertools.product(range(bound + 1), repeat=len(names)):
        valuation = dict(zip(names, vals))
        if evaluate(a, valuation) != evaluate(b, valuation):
            return False
    return True


def test_distributive_factoring():
    a, b, c = cmp(">=", i, 1), cmp(">=", j, 1), cmp(">=", k, 1)
    f = lor(land(a, b), land(a, c))
    normal = comprehensible_normal_form(f)
    prefix, clauses = split_comprehensible(normal)
    assert len(prefix) == 1 and len(clauses) == 2
    assert _agree(f, normal, ["i", "j", "k"], 3)


def test_single_clause_stays_conjunction():
    f = land(cmp(">=", i, 1), cmp("<=", i, 5))
    normal = comprehensible_normal_form(f)
    _, clauses = split_comprehensible(normal)
    assert clauses == []


def test_cnf_preserves_semantics():
    f = lor(
        land(cmp(">=", i, 1), cmp("=", j, i + const(1))),
        land(cmp("=", j, i + const(-1)), cmp(">=", i, 2)),
    )
    normal = comprehensible_normal_form(f)
    assert _agree(f, normal, ["i", "j"])


def test_is_concise_criteria():
    two_atoms = land(cmp(">=", i, 1), cmp(">=", j, 1))
    assert is_concise(two_atoms)
    four_clauses = lor(
        cmp("=", i, 0), cmp("=", i, 2), cmp("=", i, 4), cmp("=", i, 7)
    )
    assert not is_concise(comprehensible_normal_form(four_clauses) if False else four_clauses)
    # 2 prefix atoms + 2 clauses x 2 atoms = 6 total atoms violates the total cap
    six_total = land(
        cmp(">=", i, 1),
        cmp(">=", j, 1),
        lor(land(cmp("=", i, j), cmp(">=", k, 1)), land(cmp("=", i, 2), cmp("=", j, 2))),
    )
    assert not is_concise(six_total)


def test_domain_simplify_drops_trivial_bounds():
    f = comprehensible_normal_form(land(cmp(">=", i, 0), cmp(">=", j, 1)))
    simplified = domain_simplify(f, {"i", "j"})
    assert render_predicate(simplified) == "j ≥ 1"


def test_domain_simplify_tightens_through_divisibility():
    f = comprehensible_normal_form(land(cmp(">=", i, 0), Divides(2, i + const(-1))))
    simplified = domain_simplify(f, {"i"})
    assert "i ≥ 1" in render_predicate(simplified)


def test_polish_merges_point_into_adjacent_clause():
    f = lor(
        land(cmp("=", i, 2), cmp("=", j, 1)),
        land(cmp("=", j, i + const(-1)), cmp(">=", i, 3)),
        land(cmp(">=", i, 1), cmp("=", j, i + const(1))),
    )
    normal = polish_predicate(f, {"i", "j"})
    _, clauses = split_comprehensible(normal)
    assert len(clauses) == 2
    assert _agree(f, normal, ["i", "j"])
    assert is_concise(normal)


def test_render_bound_pair_merges():
    f = land(cmp(">=", i, 1), cmp("<=", i, 4))
    assert render_predicate(f) == "1 ≤ i ≤ 4"


def test_render_equation_positive_presentation():
    # j - i = -1 renders as j = i - 1
    f = cmp("=", j - i, const(-1))
    assert render_predicate(f) == "j = i - 1"


def test_render_modulus():
    assert render_predicate(Divides(2, i + const(-1))) == "i ≡_2 1"


def test_sugar_substitutes_fixed_exponents():
    pred = polish_predicate(
        land(cmp("=", var("x3"), 1), cmp("=", var("x2"), var("x1").scale(2)), cmp(">", var("x1"), 2)),
        {"x1", "x2", "x3"},
    )
    sn = apply_sugar(make_set_notation(("a", "b", "c"), pred))
    assert sn.rendered == "{a^i b^{2i} c | i ∈ ℕ0 ∧ i ≥ 3}"
    assert sn.exponent_vars == ("i",)


def test_sugar_point_set():
    pred = land(cmp("=", var("x1"), 1), cmp("=", var("x2"), 1))
    sn = apply_sugar(make_set_notation(("a", "b"), pred))
    assert sn.rendered == "{a b}"


def test_multichar_block_rendering():
    sn = make_set_notation(("ab",), cmp(">=", var("x1"), 1))
    assert sn.rendered == "{(ab)^i | i ∈ ℕ0 ∧ i ≥ 1}"


def test_sugar_preserves_semantics():
    pred = polish_predicate(
        land(cmp("=", var("x2"), var("x1")), Divides(2, var("x1") + const(-1))), {"x1", "x2"}
    )
    sn = make_set_notation(("a", "b"), pred)
    sugared = apply_sugar(sn)
    # substituted away x2: remaining predicate over i agrees with the original
    # on the diagonal
    for value in range(9):
        want = evaluate(pred, {"x1": value, "x2": value})
        assert evaluate(sugared.predicate, {v: value for v in sugared.exponent_vars}) == want
