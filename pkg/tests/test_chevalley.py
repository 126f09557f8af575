import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from boomerang.chevalley import (build_adjoint, commutator_constants, commutator_expand, g2_telescoping,
                                 verify_b2_identity, verify_double_commutator_chevalley, verify_g2_commutator)
from boomerang.errors import PreconditionError
from boomerang.linalg import Matrix, commutator, inverse
from boomerang.roots import RootSystem, classify_pair, cyclic_labels

NONZERO3 = [k for k in range(-3, 4) if k]


def _neg(a):
    return tuple(-x for x in a)


@pytest.mark.parametrize("t,r,dim", [("A", 1, 3), ("A", 2, 8), ("A", 3, 15), ("B", 2, 10), ("G", 2, 14)])
def test_dimension(t, r, dim):
    assert build_adjoint(t, r).dim == dim


def test_a1_unipotent():
    cb = build_adjoint("A", 1)
    x1 = cb.x((1,), 1)
    n = x1 - Matrix.identity(3)
    assert not (n @ n).is_identity() and all(e == 0 for e in (n @ n @ n).entries)
    assert x1 @ x1 @ x1 == cb.x((1,), 3)
    assert x1.is_upper_unitriangular() or x1.transpose().is_upper_unitriangular()


@pytest.mark.parametrize("t,r", [("A", 2), ("B", 2), ("G", 2)])
def test_structure_constants_chain_length(t, r):
    cb = build_adjoint(t, r)
    for a in cb.system.roots:
        for b in cb.system.roots:
            s = tuple(x + y for x, y in zip(a, b))
            if cb.system.is_root(s):
                assert abs(cb.N(a, b)) == cb.chain_p(a, b) + 1


@pytest.mark.parametrize("t,r", [("A", 2), ("B", 2), ("G", 2)])
def test_weyl_representatives(t, r):
    cb = build_adjoint(t, r)
    for a in cb.system.simple:
        p = cb.weyl_rep(a)
        pinv = inverse(p)
        for b in cb.system.roots:
            img = p @ cb.x(b, 2) @ pinv
            target = cb.system.reflect(a, b)
            assert img in (cb.x(target, 2), cb.x(target, -2))


@pytest.mark.parametrize("t", ["B", "G"])
@given(st.data())
def test_one_parameter_law(t, data):
    cb = build_adjoint(t, 2)
    a = data.draw(st.sampled_from(cb.system.roots))
    s, u = data.draw(st.fractions(-9, 9, max_denominator=5)), data.draw(st.fractions(-9, 9, max_denominator=5))
    assert cb.x(a, s) @ cb.x(a, u) == cb.x(a, s + u)


def test_a2_simple_pair():
    cb = build_adjoint("A", 2)
    exp = commutator_expand(cb, (1, 0), 2, (0, 1), 3)
    assert len(exp) == 1 and exp[0][0] == (1, 1) and abs(exp[0][1]) == 6


def test_orthogonal_pair_commutes():
    cb = build_adjoint("A", 3)
    assert commutator_expand(cb, (1, 0, 0), 4, (0, 0, 1), -2) == []


def test_opposite_roots_rejected():
    cb = build_adjoint("A", 2)
    with pytest.raises(PreconditionError):
        commutator_constants(cb, (1, 0), (-1, 0))


@pytest.mark.parametrize("t", ["A", "B", "G"])
@given(st.data())
def test_expansion_matches_direct(t, data):
    cb = build_adjoint(t, 2)
    roots = cb.system.roots
    a = data.draw(st.sampled_from(roots))
    b = data.draw(st.sampled_from([r for r in roots if r not in (a, _neg(a))]))
    k = data.draw(st.fractions(-4, 4, max_denominator=3).filter(bool))
    l = data.draw(st.fractions(-4, 4, max_denominator=3).filter(bool))
    rebuilt = Matrix.identity(cb.dim)
    for g, c in commutator_expand(cb, a, k, b, l):
        rebuilt = rebuilt @ cb.x(g, c)
    assert rebuilt == commutator(cb.x(a, k), cb.x(b, l))


def test_constants_bounded():
    for t in ("A", "B", "G"):
        cb = build_adjoint(t, 2)
        for a in cb.system.roots:
            for b in cb.system.roots:
                if b not in (a, _neg(a)):
                    assert all(abs(n) in (1, 2, 3) for *_, n in commutator_constants(cb, a, b))


def test_g2_pattern_small():
    cb = build_adjoint("G", 2)
    for i in range(6):
        for k in (1, 2):
            for l in (1, 2):
                rec = verify_g2_commutator(i, k, l, cb)
                exps = [abs(Fraction(e)) for e in rec.details["exponents"]]
                assert exps == [k * l, k * k * l, k ** 3 * l, k ** 3 * l * l]


def test_b2_identity():
    rec = verify_b2_identity(1, 1, 1)
    assert rec.exact_match and all(s in (1, -1) for s in rec.signs)
    rec0 = verify_b2_identity(1, 1, 0)
    assert rec0.details["exponents"] == ["0", "0"]
    rec = verify_b2_identity(2, 3, 2)
    assert [abs(Fraction(e)) for e in rec.details["exponents"]] == [12, 24]


def test_b2_signs_consistent():
    cb = build_adjoint("B", 2)
    signs = {tuple(verify_b2_identity(k0, k1, l, cb).signs) for k0 in (1, 2, -1) for k1 in (1, 3) for l in (1, -2)}
    assert len(signs) == 1


def test_telescoping_examples():
    assert g2_telescoping([1] * 6, 1).exponent == 0
    rec = g2_telescoping([2] * 6, 1)
    assert rec.exponent == -4032 and rec.details["K"] == 64
    assert g2_telescoping([1, 2, 1, 2, 1, 2], 3).exponent == -168


def test_telescoping_rejects_zero():
    with pytest.raises(PreconditionError):
        g2_telescoping([1, 0, 1, 1, 1, 1], 1)


@given(st.lists(st.sampled_from([-2, -1, 1, 2]), min_size=6, max_size=6), st.sampled_from([-2, -1, 1, 2]))
def test_telescoping_closed_form(ks, l):
    K = 1
    for k in ks:
        K *= k
    assert g2_telescoping(ks, l).exponent == (1 - K) * K * l


def test_double_commutator_identity_element():
    cb = build_adjoint("A", 2)
    one = Matrix.identity(cb.dim)
    lhs, _ = verify_double_commutator_chevalley(cb, one, (1, 1), [], one, 1, cb.x((1, 0), 1))
    assert lhs.is_identity()


@pytest.mark.parametrize("t", ["A", "B", "G"])
def test_double_commutator_weyl_and_torus(t):
    cb = build_adjoint(t, 2)
    one = Matrix.identity(cb.dim)
    v = cb.x(cb.system.simple[0], 1)
    u = cb.x(cb.system.simple[1], -2)
    a = cb.x(cb.system.simple[1], 1)
    for word, torus in (([1], (1, 1)), ([1, 2], (2, 2)), ([2, 1, 2], (2, Fraction(1, 3)))):
        lhs, s = verify_double_commutator_chevalley(cb, v, torus, word, u, 1, a)
        assert s in (1, -1)
    lhs, s = verify_double_commutator_chevalley(cb, one, (1, 1), [1], one, 1, cb.x(cb.system.simple[1], 1))
    assert s in (1, -1)


def test_pair_types_in_b2():
    b2 = RootSystem("B", 2)
    longs, shorts = cyclic_labels(b2)
    assert classify_pair(b2, longs[0], longs[1]) == "A1xA1"
    assert classify_pair(b2, shorts[0], shorts[1]) == "B2"
