import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from boomerang.dynamics import (ProjectivePoint, fixed_point_obstruction, general_position, proximal_analyze,
                                replay_obstruction)
from boomerang.errors import CertificateError, PreconditionError, SingularMatrixError
from boomerang.linalg import Matrix, inverse
from boomerang.sln import elementary

from conftest import random_sl_int

D = Matrix.diag([2, 1, Fraction(1, 2)])


def test_diagonal_proximal():
    data = proximal_analyze(D)
    assert abs(data.gap - 0.5) <= 1e-9
    assert data.attracting.close(ProjectivePoint([1, 0, 0]))
    assert abs(data.top_eigenvalue - 2) < 1e-9
    assert data.on_repelling(ProjectivePoint([0, 1, 1]))
    assert not data.on_repelling(ProjectivePoint([1, 1, 0]))


def test_double_eigenvalue_not_proximal():
    assert proximal_analyze(Matrix.diag([2, 2, Fraction(1, 4)])) is None


def test_singular_rejected():
    with pytest.raises(SingularMatrixError):
        proximal_analyze(Matrix([[1, 2], [2, 4]]))


def test_conjugated_attractor():
    h = elementary(3, 2, 1, 1)
    data = proximal_analyze(h @ D @ inverse(h))
    assert data.attracting.distance(ProjectivePoint([1, 1, 0])) <= 1e-6


@given(st.integers(0, 10 ** 9))
def test_attractor_transport(seed):
    rng = random.Random(seed)
    h = random_sl_int(rng, 3, steps=3, k=1)
    data = proximal_analyze(h @ D @ inverse(h))
    expected = ProjectivePoint(h.apply([1, 0, 0]))
    assert data.attracting.distance(expected) <= 1e-6


@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_orbit_converges(v):
    x = np.array(v) + np.array([0.0, 0.0, 0.0])
    if abs(x[0]) < 1e-3:
        return
    data = proximal_analyze(D)
    a = np.diag([2.0, 1.0, 0.5])
    dists = []
    for _ in range(40):
        x = a @ x
        x = x / np.linalg.norm(x)
        dists.append(ProjectivePoint(x).distance(data.attracting))
    assert dists[-1] < 1e-6
    for prev, cur in zip(dists[10:], dists[11:]):
        if prev > 1e-12:
            assert cur <= 0.6 * prev


def test_general_position_examples():
    assert general_position([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]])
    assert not general_position([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0]])
    perturbed = [[1, Fraction(1, 7), 0], [0, 1, Fraction(-2, 9)], [Fraction(1, 5), 0, 1], [1, 1, 1]]
    assert general_position(perturbed)
    with pytest.raises(PreconditionError):
        general_position([[1, 0], [0, 1]])


@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=4, max_size=4),
       st.permutations(range(4)), st.lists(st.integers(-4, 4).filter(bool), min_size=4, max_size=4))
def test_general_position_invariance(vecs, perm, scale):
    base = general_position(vecs)
    moved = [[scale[i] * x for x in vecs[perm[i]]] for i in range(4)]
    assert general_position(moved) == base


def test_obstruction_sl2():
    cert = fixed_point_obstruction([elementary(2, 1, 2, 1)], elementary(2, 2, 1, 1), [1, 0])
    assert cert is not None
    assert cert.limit_kind == "unipotent"
    assert cert.limit_point.close(ProjectivePoint([0, 1]))
    assert cert.to_json()["label"].startswith("numeric obstruction")
    assert replay_obstruction(cert)


def test_obstruction_tamper():
    doc = fixed_point_obstruction([elementary(2, 1, 2, 1)], elementary(2, 2, 1, 1), [1, 0]).to_json()
    doc["radius"] = 1.0
    with pytest.raises(CertificateError):
        replay_obstruction(doc)


def test_no_obstruction_for_trivial_group():
    assert fixed_point_obstruction([Matrix.identity(2)], elementary(2, 2, 1, 1), [1, 0]) is None


def test_no_obstruction_at_fixed_attractor():
    # x = a_gamma already and the generator fixes it
    gamma = Matrix.diag([2, 1, Fraction(1, 2)])
    delta = Matrix.diag([3, Fraction(1, 3), 1])
    assert fixed_point_obstruction([delta], gamma, [1, 0, 0]) is None


def test_obstruction_requires_fixed_point():
    with pytest.raises(PreconditionError):
        fixed_point_obstruction([elementary(2, 1, 2, 1)], elementary(2, 2, 1, 1), [0, 1])


def test_projective_point_normalization():
    p = ProjectivePoint([-2, 0])
    assert p == ProjectivePoint([1, 0])
    with pytest.raises(PreconditionError):
        ProjectivePoint([0, 0])
