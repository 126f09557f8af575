import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from boomerang.errors import ParseError, PreconditionError
from boomerang.linalg import Matrix, inverse
from boomerang.oracles import (CongruenceOracle, ConjugatedOracle, FiniteSubgroup, FoldedAutomaton, FreeSubgroup,
                               UnitriangularOracle, conjugate, contains, dumps, full_group, group_order_mod,
                               intersect, invert_word, loads, principal_congruence, reduce_word,
                               upper_triangular_mod)
from boomerang.sln import elementary

from conftest import random_sl_int

SQ = FreeSubgroup(2, ["aa", "bb"])


def sl_order(n, p, k=1):
    """|SL_n(Z/p^k)| in closed form."""
    out = p ** (n * (n - 1) // 2)
    for i in range(2, n + 1):
        out *= p ** i - 1
    return out * p ** ((k - 1) * (n * n - 1))


def test_free_membership():
    assert SQ.contains("aa")
    assert not SQ.contains("ab")
    assert SQ.contains("AAbbaa")
    assert SQ.contains("1")


def test_free_word_validation():
    with pytest.raises(PreconditionError):
        SQ.contains("ac")
    assert reduce_word("abBA") == ""
    assert invert_word("aB") == "bA"


def test_free_conjugation():
    assert SQ.conjugate("1").equals(SQ)
    c = conjugate(SQ, "a")
    assert c.contains("aa")
    assert not c.equals(SQ)
    assert SQ.conjugate("aa").equals(SQ)


def test_free_intersection():
    cap = intersect(SQ, FreeSubgroup(2, ["a"]))
    assert cap.equals(FreeSubgroup(2, ["aa"]))
    assert SQ.intersect(SQ).equals(SQ)


def test_free_index():
    assert SQ.index() is None
    assert FreeSubgroup(2, ["a", "b"]).index() == 1
    # kernel of F_2 -> Z/2 sending a, b to 1
    assert FreeSubgroup(2, ["aa", "ab", "aB"]).index() == 2


words = st.text(alphabet="aAbB", min_size=1, max_size=6).map(reduce_word).filter(bool)


@given(st.lists(words, min_size=1, max_size=4), st.integers(0, 10 ** 6))
def test_folding_confluent(gens, seed):
    rng = random.Random(seed)
    shuffled = gens[:]
    rng.shuffle(shuffled)
    # the inverse of a generator and a product of generators add nothing
    extra = shuffled + [invert_word(gens[0]), reduce_word(gens[0] + gens[-1])]
    base = FoldedAutomaton.from_words(2, gens)
    assert FoldedAutomaton.from_words(2, shuffled) == base
    assert FoldedAutomaton.from_words(2, extra) == base


@given(st.lists(words, min_size=1, max_size=3), words, words)
def test_free_conjugation_invariance(gens, g, gamma):
    h = FreeSubgroup(2, gens)
    lhs = h.conjugate(gamma).contains(reduce_word(gamma + g + invert_word(gamma)))
    assert lhs == h.contains(g)


@given(st.lists(words, min_size=1, max_size=3), st.lists(words, min_size=1, max_size=3), words)
def test_free_intersection_semantics(g1, g2, w):
    h1, h2 = FreeSubgroup(2, g1), FreeSubgroup(2, g2)
    cap, pac = h1.intersect(h2), h2.intersect(h1)
    assert cap.equals(pac)
    assert cap.contains(w) == (h1.contains(w) and h2.contains(w))
    assert h1.intersect(h1).equals(h1)


def test_free_json_round_trip():
    assert loads(dumps(SQ)).equals(SQ)
    assert dumps(loads(dumps(SQ))) == dumps(SQ)


def test_group_orders():
    assert group_order_mod(2, 2) == 6
    assert group_order_mod(3, 2) == 168
    assert group_order_mod(2, 3) == 24


@pytest.mark.parametrize("n,p,k", [(2, 2, 1), (2, 3, 1), (2, 5, 1), (2, 2, 2), (2, 3, 2), (3, 2, 1), (2, 7, 1)])
def test_group_order_closed_form(n, p, k):
    assert group_order_mod(n, p ** k) == sl_order(n, p, k)


def test_upper_triangular_mod2():
    h = upper_triangular_mod(3, 2)
    assert h.contains(elementary(3, 2, 1, 2))
    assert not h.contains(elementary(3, 2, 1, 1))
    assert len(h.closure) == 8 and h.index() == 21


def test_congruence_conjugation_normal(rng):
    g2 = principal_congruence(3, 2)
    for _ in range(10):
        gamma = random_sl_int(rng, 3)
        assert g2.conjugate(gamma).equals(g2)
        assert g2.normalized_by(gamma)


def test_crt_intersection():
    cap = principal_congruence(3, 2).intersect(principal_congruence(3, 3))
    assert cap.m == 6
    assert cap.equals(principal_congruence(3, 6))


def test_non_coprime_intersection():
    cap = principal_congruence(2, 2).intersect(principal_congruence(2, 4))
    assert cap.equals(principal_congruence(2, 4))


def test_index_multiplicative_under_crt():
    a, b = upper_triangular_mod(2, 2), upper_triangular_mod(2, 3)
    assert a.intersect(b).index() == a.index() * b.index()
    g2, g3 = principal_congruence(2, 2), principal_congruence(2, 3)
    assert g2.intersect(g3).index() == g2.index() * g3.index() == sl_order(2, 2) * sl_order(2, 3)


def test_intersection_commutative(rng):
    a, b = upper_triangular_mod(3, 2), principal_congruence(3, 3)
    ab, ba = a.intersect(b), b.intersect(a)
    assert ab.equals(ba)
    for _ in range(30):
        g = random_sl_int(rng, 3)
        assert ab.contains(g) == (a.contains(g) and b.contains(g))


@given(st.integers(0, 10 ** 9))
def test_congruence_conjugation_invariance(seed):
    rng = random.Random(seed)
    h = upper_triangular_mod(3, 2)
    g, gamma = random_sl_int(rng, 3), random_sl_int(rng, 3)
    assert h.conjugate(gamma).contains(gamma @ g @ inverse(gamma)) == h.contains(g)


def test_contains_rejects_non_integral():
    with pytest.raises(PreconditionError):
        contains(principal_congruence(2, 2), Matrix([[2, 0], [0, 1]]))


def test_full_group():
    h = full_group(3)
    assert h.index() == 1
    assert h.contains(elementary(3, 1, 3, 1))


def test_congruence_json_round_trip():
    h = upper_triangular_mod(3, 2)
    h2 = loads(dumps(h))
    assert dumps(h2) == dumps(h) and h2.equals(h)


def test_bad_json():
    with pytest.raises(ParseError):
        loads("{not json")
    with pytest.raises(ParseError):
        loads('{"variant": "mystery"}')


def test_finite_subgroup():
    h = FiniteSubgroup(2, [Matrix([[-1, 0], [0, -1]])])
    assert h.is_central_only() and len(h.elements) == 2
    rot = FiniteSubgroup(2, [Matrix([[0, -1], [1, 0]])])
    assert not rot.is_central_only() and len(rot.elements) == 4


def test_unitriangular_oracle():
    h = UnitriangularOracle.from_elementary_powers(3, {(1, 2): 3, (2, 3): 3})
    assert h.contains(elementary(3, 1, 3, 9))
    assert not h.contains(elementary(3, 1, 3, 3))
    assert h.contains(elementary(3, 1, 2, 3) @ elementary(3, 2, 3, -6))


def test_unitriangular_rejects_non_group():
    with pytest.raises(PreconditionError):
        UnitriangularOracle(3, [[0, 2, 3], [0, 0, 2], [0, 0, 0]])


def test_conjugated_oracle():
    v = elementary(3, 1, 2, Fraction(1, 2))
    h = ConjugatedOracle(principal_congruence(3, 3), v)
    assert h.level == 12
    for g in h.sample_generators():
        assert h.contains(g)
    assert h.contains(elementary(3, 2, 1, 12))
    assert loads(dumps(h)).dumps() == h.dumps()
