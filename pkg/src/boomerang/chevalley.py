"""Chevalley basis, adjoint representation and the rank-2 commutator identities.

Structure constants follow the extraspecial-pair convention: positive roots
are ordered by (height, lexicographic), every extraspecial pair gets the sign
+1, and all remaining constants are forced by the standard relations among
the ``N_{a,b}``.  The result is checked against the Jacobi identity when the
basis is built.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import IdentityFailure, PreconditionError
from .linalg import Matrix, as_rational, commutator, product
from .roots import Root, RootSystem, build, cyclic_labels, highest_root

Key = Tuple[str, object]  # ("e", root) or ("h", i)


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _neg(a):
    return tuple(-x for x in a)


def _scale(c, a):
    return tuple(c * x for x in a)


def _is_pos(a) -> bool:
    return sum(a) > 0


class ChevalleyBasis:
    """Chevalley basis of the simple Lie algebra of ``system`` and its adjoint action."""

    def __init__(self, system: RootSystem):
        self.system = system
        rs = system
        self.positive = rs.positive_roots
        self._order = {r: i for i, r in enumerate(self.positive)}
        self.structure_constants = self._compute_constants()
        # basis: positive roots by decreasing height, then h_i, then negative roots
        keys: List[Key] = [("e", r) for r in reversed(self.positive)]
        keys += [("h", i) for i in range(rs.rank)]
        keys += [("e", _neg(r)) for r in self.positive]
        self.basis = keys
        self.index = {k: i for i, k in enumerate(keys)}
        self.dim = len(keys)
        self._ad_cache: Dict[Key, Matrix] = {}
        self._exp_terms: Dict[Root, List[Matrix]] = {}
        self._check_jacobi()

    # structure constants

    def chain_p(self, a: Root, b: Root) -> int:
        """Largest p with ``b - p a`` a root."""
        p = 0
        while self.system.is_root(tuple(y - (p + 1) * x for x, y in zip(a, b))):
            p += 1
        return p

    def _compute_constants(self) -> Dict[Tuple[Root, Root], int]:
        rs = self.system
        order = self._order
        table: Dict[Tuple[Root, Root], Fraction] = {}

        def nval(a, b) -> Fraction:
            if _is_pos(a) and _is_pos(b):
                return table[(a, b)]
            if not _is_pos(a) and not _is_pos(b):
                return -nval(_neg(a), _neg(b))
            c = _neg(_add(a, b))
            # N_{a,b}/(c,c) = N_{b,c}/(a,a) = N_{c,a}/(b,b)
            if _is_pos(b) == _is_pos(c):
                return Fraction(rs.norm(c), rs.norm(a)) * nval(b, c)
            return Fraction(rs.norm(c), rs.norm(b)) * nval(c, a)

        for xi in self.positive:
            pairs = [(a, tuple(x - y for x, y in zip(xi, a))) for a in self.positive]
            pairs = [(a, b) for a, b in pairs if rs.is_root(b) and _is_pos(b) and order[a] < order[b]]
            if not pairs:
                continue
            g, d = min(pairs, key=lambda ab: order[ab[0]])
            table[(g, d)] = Fraction(self.chain_p(g, d) + 1)
            table[(d, g)] = -table[(g, d)]
            for a, b in pairs:
                if (a, b) == (g, d):
                    continue
                total = Fraction(0)
                bg = tuple(x - y for x, y in zip(b, g))
                if rs.is_root(bg):
                    total += nval(b, _neg(g)) * nval(a, _neg(d)) / rs.norm(bg)
                ag = tuple(x - y for x, y in zip(a, g))
                if rs.is_root(ag):
                    total += nval(_neg(g), a) * nval(b, _neg(d)) / rs.norm(ag)
                # N_{-g,-d} = -N_{g,d}
                val = total * rs.norm(xi) / table[(g, d)]
                table[(a, b)] = val
                table[(b, a)] = -val

        out: Dict[Tuple[Root, Root], int] = {}
        for a in rs.roots:
            for b in rs.roots:
                s = _add(a, b)
                if rs.is_root(s):
                    v = nval(a, b)
                    if v.denominator != 1:
                        raise IdentityFailure(f"non-integral structure constant N{a},{b}")
                    if abs(v) != self.chain_p(a, b) + 1:
                        raise IdentityFailure(f"|N{a},{b}| != p+1")
                    out[(a, b)] = int(v)
        return out

    def N(self, a: Root, b: Root) -> int:
        return self.structure_constants.get((tuple(a), tuple(b)), 0)

    def coroot_coefficients(self, a: Root) -> Tuple[int, ...]:
        """``h_a = sum c_i h_i`` with ``a^vee = sum c_i alpha_i^vee``."""
        rs = self.system
        out = []
        for i, m in enumerate(a):
            q, r = divmod(m * rs.norm(rs.simple[i]), rs.norm(a))
            if r:
                raise IdentityFailure("non-integral coroot")
            out.append(q)
        return tuple(out)

    # adjoint action

    def bracket(self, x: Key, y: Key) -> Dict[Key, int]:
        """``[x, y]`` for basis elements, as a sparse combination."""
        rs = self.system
        if x[0] == "h" and y[0] == "h":
            return {}
        if x[0] == "h":
            c = rs.coroot_pairing(y[1], rs.simple[x[1]])
            return {y: c} if c else {}
        if y[0] == "h":
            return {k: -v for k, v in self.bracket(y, x).items()}
        a, b = x[1], y[1]
        if _add(a, b) == (0,) * rs.rank:
            return {("h", i): c for i, c in enumerate(self.coroot_coefficients(a)) if c}
        n = self.N(a, b)
        return {("e", _add(a, b)): n} if n else {}

    def ad(self, x: Key) -> Matrix:
        if x not in self._ad_cache:
            rows = [[0] * self.dim for _ in range(self.dim)]
            for j, y in enumerate(self.basis):
                for k, v in self.bracket(x, y).items():
                    rows[self.index[k]][j] = v
            self._ad_cache[x] = Matrix(rows)
        return self._ad_cache[x]

    def _check_jacobi(self):
        for x in self.basis:
            for y in self.basis:
                lhs = self.ad(x) @ self.ad(y) - self.ad(y) @ self.ad(x)
                rhs = Matrix.zero(self.dim)
                for k, v in self.bracket(x, y).items():
                    rhs = rhs + self.ad(k) * v
                if lhs != rhs:
                    raise IdentityFailure(f"Jacobi identity fails for {x}, {y}")

    # group elements

    def _terms(self, a: Root) -> List[Matrix]:
        if a not in self._exp_terms:
            x = self.ad(("e", a))
            terms = []
            power = x
            m = 1
            while any(any(r) for r in power.scaled):
                terms.append(power * Fraction(1, factorial(m)))
                power = power @ x
                m += 1
            self._exp_terms[a] = terms
        return self._exp_terms[a]

    def x(self, a: Sequence[int], t) -> Matrix:
        """Root element ``x_a(t) = exp(t ad e_a)``."""
        a = tuple(a)
        if not self.system.is_root(a):
            raise PreconditionError(f"{a} is not a root")
        t = as_rational(t)
        out = Matrix.identity(self.dim)
        tp = Fraction(1)
        for term in self._terms(a):
            tp *= t
            if tp:
                out = out + term * tp
        return out

    def weyl_rep(self, a: Sequence[int]) -> Matrix:
        """``p_{w_a} = x_a(1) x_{-a}(-1) x_a(1)``."""
        a = tuple(a)
        return self.x(a, 1) @ self.x(_neg(a), -1) @ self.x(a, 1)

    def weyl_word_rep(self, word: Sequence[int]) -> Matrix:
        out = Matrix.identity(self.dim)
        for i in word:
            out = out @ self.weyl_rep(self.system.simple[i - 1])
        return out

    def torus(self, simple_values: Sequence) -> "TorusElement":
        return TorusElement.from_simple(self, simple_values)

    def root_of_unipotent(self, m: Matrix) -> Optional[Tuple[Root, Fraction]]:
        """Recognise ``m = x_a(t)``; returns ``(a, t)`` or None."""
        for a in self.system.roots:
            t = self._read_coefficient(m, a)
            if t and self.x(a, t) == m:
                return a, t
        return None

    def _read_coefficient(self, m: Matrix, g: Root) -> Fraction:
        coeffs = self.coroot_coefficients(g)
        i = next(i for i, c in enumerate(coeffs) if c)
        return m[self.index[("h", i)], self.index[("e", _neg(g))]] / coeffs[i]


@functools.lru_cache(maxsize=None)
def build_adjoint(type_label: str, rank_: int) -> ChevalleyBasis:
    return ChevalleyBasis(build(type_label, rank_))


@dataclass(frozen=True)
class RootElement:
    alpha: Root
    t: Fraction
    matrix: Matrix = field(repr=False, compare=False)

    @classmethod
    def of(cls, cb: ChevalleyBasis, alpha, t) -> "RootElement":
        t = as_rational(t)
        return cls(tuple(alpha), t, cb.x(alpha, t))


@dataclass(frozen=True)
class TorusElement:
    weights: Dict[Root, Fraction] = field(compare=False)
    matrix: Matrix

    @classmethod
    def from_simple(cls, cb: ChevalleyBasis, values: Sequence) -> "TorusElement":
        vals = [as_rational(v) for v in values]
        if len(vals) != cb.system.rank or any(v == 0 for v in vals):
            raise PreconditionError("need one nonzero value per simple root")
        weights = {}
        for r in cb.system.roots:
            w = Fraction(1)
            for v, m in zip(vals, r):
                w *= v ** m
            weights[r] = w
        diag = [weights[k[1]] if k[0] == "e" else Fraction(1) for k in cb.basis]
        return cls(weights, Matrix.diag(diag))

    def weight(self, a: Sequence[int]) -> Fraction:
        return self.weights[tuple(a)]


# commutator formula

def _rank2_roots(cb: ChevalleyBasis, a: Root, b: Root) -> List[Tuple[int, int, Root]]:
    out = []
    for i in range(1, 4):
        for j in range(1, 4):
            g = _add(_scale(i, a), _scale(j, b))
            if cb.system.is_root(g):
                out.append((i, j, g))
    out.sort(key=lambda t: (t[0] + t[1], t[0]))
    return out


def _peel(cb: ChevalleyBasis, m: Matrix, factors: List[Tuple[int, int, Root]]) -> List[Fraction]:
    coeffs = []
    rest = m
    for _, _, g in factors:
        c = cb._read_coefficient(rest, g)
        coeffs.append(c)
        rest = cb.x(g, -c) @ rest
    if not rest.is_identity():
        raise IdentityFailure("commutator is not a product of the expected root elements")
    return coeffs


@functools.lru_cache(maxsize=None)
def _constants(cb: ChevalleyBasis, a: Root, b: Root) -> Tuple[Tuple[int, int, Root, int], ...]:
    factors = _rank2_roots(cb, a, b)
    coeffs = _peel(cb, commutator(cb.x(a, 1), cb.x(b, 1)), factors)
    out = []
    for (i, j, g), c in zip(factors, coeffs):
        if c.denominator != 1 or abs(c) not in (1, 2, 3):
            raise IdentityFailure(f"commutator constant {c} for {i}a+{j}b outside {{±1,±2,±3}}")
        out.append((i, j, g, int(c)))
    return tuple(out)


def commutator_constants(cb: ChevalleyBasis, a, b) -> List[Tuple[int, int, Root, int]]:
    """``(i, j, i a + j b, N_{a,b,i,j})`` in increasing height order."""
    a, b = tuple(a), tuple(b)
    if a == b or a == _neg(b):
        raise PreconditionError("commutator formula needs a != ±b")
    return list(_constants(cb, a, b))


def commutator_expand(cb: ChevalleyBasis, a, k, b, l) -> List[Tuple[Root, Fraction]]:
    """``[x_a(k), x_b(l)] = prod x_{i a + j b}(N_{a,b,i,j} k^i l^j)``, verified exactly."""
    k, l = as_rational(k), as_rational(l)
    consts = commutator_constants(cb, a, b)
    expansion = [(g, n * k ** i * l ** j) for i, j, g, n in consts]
    direct = commutator(cb.x(a, k), cb.x(b, l))
    rebuilt = product([Matrix.identity(cb.dim)] + [cb.x(g, c) for g, c in expansion])
    if rebuilt != direct:
        raise IdentityFailure(f"commutator expansion failed for {a}, {b}")
    return expansion


# the rank-2 identities

@dataclass
class ProofRecord:
    identity: str
    system: str
    inputs: dict
    signs: List[int]
    exponent: Optional[Fraction] = None
    exact_match: bool = True
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"identity": self.identity, "system": self.system, "inputs": self.inputs,
                "matched_signs": self.signs,
                "exponent": None if self.exponent is None else str(self.exponent),
                "exact_match": self.exact_match, "details": self.details}


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def verify_b2_identity(k0: int, k1: int, l: int, cb: ChevalleyBasis | None = None) -> ProofRecord:
    """``[x_{b0}(-k0 k1), x_{a1}(-l)] = x_{a0}(± k0 k1 l) x_{b1}(± k0 k1 l^2)``."""
    cb = cb or build_adjoint("B", 2)
    longs, shorts = cyclic_labels(cb.system)
    b0, b1 = longs[0], longs[1]
    a0, a1 = shorts[0], shorts[1]
    expansion = commutator_expand(cb, b0, -k0 * k1, a1, -l)
    roots_ = [g for g, _ in expansion]
    if roots_ != [a0, b1]:
        raise IdentityFailure(f"B2 commutator lands in {roots_}, expected {[a0, b1]}")
    targets = [k0 * k1 * l, k0 * k1 * l * l]
    signs = []
    for (_, c), t in zip(expansion, targets):
        if abs(c) != abs(t):
            raise IdentityFailure("B2 exponents do not match")
        signs.append(_sign(c) * _sign(t) if t else 0)
    return ProofRecord("b2", cb.system.name, {"k0": k0, "k1": k1, "l": l}, signs,
                       details={"roots": {"beta0": b0, "beta1": b1, "alpha0": a0, "alpha1": a1},
                                "exponents": [str(c) for _, c in expansion]})


def verify_g2_commutator(i: int, k: int, l: int, cb: ChevalleyBasis | None = None) -> ProofRecord:
    """``[x_{b_i}(-l), x_{a_{i+2}}(-k)]`` has factors ``a_i, a_{i+1}, b_{i+2}, b_{i+1}``
    with exponents ``(kl, k^2 l, k^3 l, k^3 l^2)`` up to sign."""
    cb = cb or build_adjoint("G", 2)
    longs, shorts = cyclic_labels(cb.system)
    i %= 6
    expansion = commutator_expand(cb, longs[i], -l, shorts[(i + 2) % 6], -k)
    expected_roots = [shorts[i], shorts[(i + 1) % 6], longs[(i + 2) % 6], longs[(i + 1) % 6]]
    if [g for g, _ in expansion] != expected_roots:
        raise IdentityFailure(f"G2 commutator for i={i} lands on the wrong roots")
    targets = [k * l, k * k * l, k ** 3 * l, k ** 3 * l * l]
    signs = []
    for (_, c), t in zip(expansion, targets):
        if abs(c) != abs(t):
            raise IdentityFailure("G2 exponent pattern does not match")
        signs.append(_sign(c) * _sign(t) if t else 0)
    return ProofRecord("g2_commutator", cb.system.name, {"i": i, "k": k, "l": l}, signs,
                       details={"exponents": [str(c) for _, c in expansion]})


def g2_telescoping(ks: Sequence[int], l: int, cb: ChevalleyBasis | None = None) -> ProofRecord:
    """Multiply the six two-factor elements and check the product telescopes
    to ``x_{a0}((1 - K) K l)`` with ``K = k0 k1 k2 k3 k4 k5``."""
    if len(ks) != 6:
        raise PreconditionError("need six integers k0..k5")
    if any(k == 0 for k in ks):
        raise PreconditionError("all k_i must be nonzero")
    cb = cb or build_adjoint("G", 2)
    _, a = cyclic_labels(cb.system)
    K = 1
    for k in ks:
        K *= k
    # element i is x_{a_i}(s c_i) x_{a_{i+1}}(s c_{i+1}) with s = (-1)^i,
    # c_0 = K l and c_{i+1} = k_0 ... k_i K l
    cs = [K * l]
    for k in ks:
        cs.append(cs[-1] * k)
    factors = []
    for i in range(6):
        s = -1 if i % 2 else 1
        factors.append((a[i], s * cs[i]))
        factors.append((a[(i + 1) % 6], s * cs[i + 1]))
    # interior factors cancel pairwise by the one-parameter law
    for j in range(1, 11, 2):
        (r1, t1), (r2, t2) = factors[j], factors[j + 1]
        if r1 != r2 or t1 + t2 != 0:
            raise IdentityFailure(f"factors {j} and {j + 1} do not cancel")
        if not (cb.x(r1, t1) @ cb.x(r2, t2)).is_identity():
            raise IdentityFailure("one-parameter law failed")
    exponent = Fraction((1 - K) * K * l)
    prod_ = product([cb.x(r, t) for r, t in factors])
    if prod_ != cb.x(a[0], exponent):
        raise IdentityFailure("telescoping product does not equal x_{a0}((1-K)K l)")
    return ProofRecord("telescoping", cb.system.name, {"k": list(ks), "l": l}, [],
                       exponent=exponent, details={"K": K})


def verify_double_commutator_chevalley(cb: ChevalleyBasis, v: Matrix, torus: Sequence, word: Sequence[int],
                                       u: Matrix, k, a: Matrix) -> Tuple[Matrix, int]:
    """``[[g, x_top(k)], v a v^-1] = v [x_{w(top)}(± λ_{w(top)}(t) k), a] v^-1``
    for ``g = v t p_w u``.  Returns the left side and the matching sign."""
    rs = cb.system
    top = highest_root(rs.standard_base())
    t = cb.torus(torus)
    p = cb.weyl_word_rep(word)
    if not (u.is_upper_unitriangular() and v.is_upper_unitriangular() and a.is_upper_unitriangular()):
        raise PreconditionError("v, u and a must lie in U")
    g = v @ t.matrix @ p @ u
    k = as_rational(k)
    vinv = v.inverse()
    lhs = commutator(commutator(g, cb.x(top, k)), v @ a @ vinv)
    wtop = rs.apply_word(word, top)
    lam = t.weight(wtop)
    for s in (1, -1):
        rhs = v @ commutator(cb.x(wtop, s * lam * k), a) @ vinv
        if lhs == rhs:
            return lhs, s
    raise IdentityFailure("double commutator identity failed for both signs")
