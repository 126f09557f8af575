import json

import pytest
from hypothesis import given, strategies as st

from boomerang.derivation import (DerivationTranscript, climb_center, derive_elementary, find_big_cell_element,
                                  propagate, replay, run_pipeline, tits_certificate)
from boomerang.errors import BudgetExhausted, CentralOnlyError, CertificateError, PreconditionError
from boomerang.linalg import Matrix
from boomerang.oracles import FiniteSubgroup, UnitriangularOracle, full_group, principal_congruence
from boomerang.sln import ElementaryMatrix, elementary


def _full_map(n, r):
    return {(i, j): r for i in range(1, n + 1) for j in range(1, n + 1) if i != j}


@pytest.mark.parametrize("m", [2, 3])
def test_big_cell_element_in_congruence(m):
    h = principal_congruence(3, m)
    delta, form = find_big_cell_element(h)
    assert h.contains(delta)
    assert form.sigma(1) != 1
    assert all(x % m == (i % 4 == 0) for i, x in enumerate(delta.mod(m)))


def test_big_cell_central_only():
    h = FiniteSubgroup(3, [Matrix.diag([-1, -1, 1]) @ Matrix.diag([1, -1, -1]) @ Matrix.diag([-1, 1, -1])])
    with pytest.raises(CentralOnlyError):
        find_big_cell_element(h)


def test_big_cell_full_group_immediate():
    delta, form = find_big_cell_element(full_group(3))
    assert form.sigma(1) != 1


def test_big_cell_budget():
    with pytest.raises(BudgetExhausted):
        find_big_cell_element(principal_congruence(3, 5), search_budget=3)


def test_derive_elementary_gamma3():
    h = principal_congruence(3, 3)
    delta, form = find_big_cell_element(h)
    d = derive_elementary(h, delta, form)
    assert d.elementary.k % 3 == 0
    assert d.target.contains(d.elementary.matrix)


def test_derive_elementary_full_group():
    h = full_group(3)
    delta, form = find_big_cell_element(h)
    d = derive_elementary(h, delta, form)
    assert abs(d.elementary.k) == 1


def test_derive_elementary_identity_conjugator():
    h = full_group(3)
    delta = Matrix([[0, 0, 1], [0, -1, 0], [1, 0, 0]])
    d = derive_elementary(h, delta)
    assert d.conjugator.is_identity() and d.target is h
    assert h.contains(d.elementary.matrix)


def test_derive_rejects_non_member():
    with pytest.raises(PreconditionError):
        derive_elementary(principal_congruence(3, 2), elementary(3, 3, 1, 1))


def test_propagate_gamma3():
    found = propagate(principal_congruence(3, 3), ElementaryMatrix(3, 1, 2, 3))
    assert len(found) == 6 and all(r and r % 3 == 0 for r in found.values())
    assert tits_certificate(found, 3, principal_congruence(3, 3))


def test_propagate_full_group():
    found = propagate(full_group(3), ElementaryMatrix(3, 1, 2, 1))
    assert set(found.values()) <= {1, -1}


def test_propagate_idempotent_on_full_map():
    seed = _full_map(3, 3)
    assert propagate(principal_congruence(3, 3), seed) == seed


def test_propagate_rejects_non_member_seed():
    with pytest.raises(PreconditionError):
        propagate(principal_congruence(3, 3), ElementaryMatrix(3, 1, 2, 2))


def test_tits_certificate_cases():
    full = _full_map(3, 3)
    assert tits_certificate(full, 3)
    partial = dict(full)
    del partial[(2, 1)]
    assert not tits_certificate(partial, 3)
    zero = dict(full)
    zero[(1, 3)] = 0
    assert not tits_certificate(zero, 3)
    with pytest.raises(CertificateError):
        tits_certificate(_full_map(3, 1), 3, principal_congruence(3, 3))


@pytest.mark.parametrize("m", [2, 3])
def test_pipeline_and_replay(m):
    t = run_pipeline(principal_congruence(3, m))
    out = t.outcome
    assert out["tits_certificate"] is True
    assert all(r % m == 0 for r in out["found"].values())
    doc = json.loads(t.dumps())
    assert replay(doc)
    rules = [s["rule"] for s in doc["steps"]]
    assert rules[0] == "big_cell_search" and "double_commutator" in rules
    for step in doc["steps"]:
        assert "certificate" in step or step["produced"] is None or step["rule"] in ("conjugate_back", "denominator_clearing")


def test_replay_rejects_tampering():
    doc = json.loads(run_pipeline(principal_congruence(3, 2)).dumps())
    doc["outcome"]["found"]["1,2"] = 1
    with pytest.raises(CertificateError):
        replay(doc)


def test_transcript_rejects_non_member():
    t = DerivationTranscript({})
    with pytest.raises(Exception):
        t.add("row_propagation", {}, elementary(3, 1, 2, 1), principal_congruence(3, 2))


def test_climb_u3():
    h = UnitriangularOracle.from_elementary_powers(3, {(1, 2): 3, (2, 3): 3})
    x, t = climb_center(h, elementary(3, 1, 2, 3))
    r = x[0, 2]
    assert r != 0 and r % 9 == 0
    assert x == elementary(3, 1, 3, r)
    assert replay(t.to_json())


def test_climb_central_start_unchanged():
    h = UnitriangularOracle.from_elementary_powers(4, {(1, 2): 2, (2, 3): 2, (3, 4): 2})
    start = elementary(4, 1, 4, 8)
    x, t = climb_center(h, start)
    assert x == start and t.steps == []
    h2 = UnitriangularOracle(2, [[0, 5], [0, 0]])
    assert climb_center(h2, elementary(2, 1, 2, 5))[0] == elementary(2, 1, 2, 5)


@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(1, 4), st.integers(1, 3))
def test_climb_result_is_central_member(a, b, c, ex, pos):
    h = UnitriangularOracle.from_elementary_powers(4, {(1, 2): a, (2, 3): b, (3, 4): c})
    i = {1: (1, 2), 2: (2, 3), 3: (3, 4)}[pos]
    r = {1: a, 2: b, 3: c}[pos] * ex
    x, _ = climb_center(h, elementary(4, *i, r))
    assert h.contains(x)
    for k in range(1, 4):
        g = elementary(4, k, k + 1, 1)
        assert x @ g == g @ x
