"""Elementary matrices, the commutator formula and Bruhat decomposition in SL_n(Q).

Indices are 1-based throughout this module, matching the usual ``e_{i,j}^k``
notation.  Commutators are ``[x, y] = x y x^-1 y^-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import DimensionError, IdentityFailure, PreconditionError, SingularMatrixError
from .linalg import Matrix, as_rational, commutator, det, format_matrix, inverse, parse_matrices


@dataclass(frozen=True)
class ElementaryMatrix:
    n: int
    i: int
    j: int
    k: Fraction

    def __post_init__(self):
        if not (1 <= self.i <= self.n and 1 <= self.j <= self.n):
            raise PreconditionError(f"index ({self.i},{self.j}) out of range for n={self.n}")
        if self.i == self.j:
            raise PreconditionError("elementary matrix needs i != j")
        object.__setattr__(self, "k", as_rational(self.k))

    @property
    def matrix(self) -> Matrix:
        return elementary(self.n, self.i, self.j, self.k)

    def inverse(self) -> "ElementaryMatrix":
        return ElementaryMatrix(self.n, self.i, self.j, -self.k)

    def __str__(self):
        return f"e_{{{self.i},{self.j}}}^{self.k}"


def elementary(n: int, i: int, j: int, k=1) -> Matrix:
    """The matrix ``e_{i,j}^k``: identity plus ``k`` at position (i, j)."""
    if i == j:
        raise PreconditionError("elementary matrix needs i != j")
    k = as_rational(k)
    rows = [[int(a == b) for b in range(n)] for a in range(n)]
    rows[i - 1][j - 1] = k.numerator if k.denominator == 1 else k
    return Matrix(rows)


def elementary_commutator(a: ElementaryMatrix, b: ElementaryMatrix) -> Optional[ElementaryMatrix]:
    """``[a, b]`` by the three-case formula; ``None`` stands for the identity.

    The result is checked against direct multiplication before it is returned.
    """
    if a.n != b.n:
        raise DimensionError("elementary matrices of different sizes")
    if (a.i, a.j) == (b.j, b.i):
        raise PreconditionError(f"opposite pair ({a.i},{a.j}), ({b.i},{b.j}) is excluded")
    if a.j == b.i:
        result = ElementaryMatrix(a.n, a.i, b.j, a.k * b.k)
    elif a.i == b.j:
        result = ElementaryMatrix(a.n, b.i, a.j, -a.k * b.k)
    else:
        result = None
    # a b a^-1 b^-1 applied to the identity, one row operation per factor
    n = a.n
    rows = [[int(r == c) for c in range(n)] for r in range(n)]
    for e, sign in ((b, -1), (a, -1), (b, 1), (a, 1)):
        k = sign * (e.k.numerator if e.k.denominator == 1 else e.k)
        src, dst = rows[e.j - 1], rows[e.i - 1]
        rows[e.i - 1] = [x + k * y for x, y in zip(dst, src)]
    expected = [[int(r == c) for c in range(n)] for r in range(n)]
    if result is not None:
        expected[result.i - 1][result.j - 1] = result.k
    if rows != expected:
        raise IdentityFailure(f"commutator formula failed for {a}, {b}")
    return result


# signed permutations

def permutation_sign(sigma: Sequence[int]) -> int:
    seen = [False] * len(sigma)
    sign = 1
    for start in range(len(sigma)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = sigma[j] - 1
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def cycle_notation(sigma: Sequence[int]) -> str:
    seen = set()
    out = []
    for start in range(1, len(sigma) + 1):
        if start in seen or sigma[start - 1] == start:
            continue
        cyc = [start]
        seen.add(start)
        j = sigma[start - 1]
        while j != start:
            cyc.append(j)
            seen.add(j)
            j = sigma[j - 1]
        out.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(out) or "()"


def parse_cycles(text: str, n: int) -> Tuple[int, ...]:
    sigma = list(range(1, n + 1))
    text = text.strip()
    if text in ("", "()", "id"):
        return tuple(sigma)
    for chunk in text.replace(")", ")|").split("|"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if not (chunk.startswith("(") and chunk.endswith(")")):
            raise PreconditionError(f"bad cycle {chunk!r}")
        cyc = [int(t) for t in chunk[1:-1].replace(",", " ").split()]
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            sigma[a - 1] = b
    if sorted(sigma) != list(range(1, n + 1)):
        raise PreconditionError(f"{text!r} is not a permutation of 1..{n}")
    return tuple(sigma)


@dataclass(frozen=True)
class SignedPermutationMatrix:
    """``p_sigma``: column j carries ``signs[j-1]`` in row ``sigma(j)``.

    When sigma is odd the -1 sits in the second column, so that for n >= 3
    the first and last columns are never negated.
    """

    n: int
    sigma: Tuple[int, ...]
    signs: Tuple[int, ...]

    @classmethod
    def of(cls, sigma: Sequence[int]) -> "SignedPermutationMatrix":
        sigma = tuple(sigma)
        n = len(sigma)
        if sorted(sigma) != list(range(1, n + 1)):
            raise PreconditionError(f"{sigma} is not a permutation")
        signs = [1] * n
        if permutation_sign(sigma) < 0:
            signs[1 if n > 1 else 0] = -1
        return cls(n, sigma, tuple(signs))

    @property
    def matrix(self) -> Matrix:
        rows = [[0] * self.n for _ in range(self.n)]
        for j, (s, sg) in enumerate(zip(self.sigma, self.signs)):
            rows[s - 1][j] = sg
        return Matrix(rows)

    def __call__(self, j: int) -> int:
        return self.sigma[j - 1]

    def cycles(self) -> str:
        return cycle_notation(self.sigma)


def longest_permutation(n: int) -> Tuple[int, ...]:
    return tuple(n - j for j in range(n))


# Bruhat decomposition

@dataclass(frozen=True)
class BruhatForm:
    v: Matrix
    d: Matrix
    sigma: SignedPermutationMatrix
    u: Matrix

    @property
    def n(self) -> int:
        return self.v.rows

    def recompose(self) -> Matrix:
        return self.v @ self.d @ self.sigma.matrix @ self.u

    def d_entry(self, i: int) -> Fraction:
        return self.d[i - 1, i - 1]

    def to_text(self) -> str:
        blocks = [format_matrix(m) for m in (self.v, self.d, self.sigma.matrix, self.u)]
        return "\n".join(blocks) + "\n" + self.sigma.cycles() + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BruhatForm":
        lines = text.rstrip("\n").split("\n")
        perm_line = lines[-1]
        mats = parse_matrices("\n".join(lines[:-1]))
        if len(mats) != 4:
            raise PreconditionError(f"expected four matrix blocks, found {len(mats)}")
        v, d, p, u = mats
        sp = SignedPermutationMatrix.of(parse_cycles(perm_line, v.rows))
        if sp.matrix != p:
            raise PreconditionError("permutation block does not match the cycle line")
        return cls(v, d, sp, u)

    def to_json(self) -> dict:
        def m(x):
            return [[str(e) for e in r] for r in x.tolist()]
        return {"v": m(self.v), "d": [str(self.d_entry(i)) for i in range(1, self.n + 1)],
                "sigma": list(self.sigma.sigma), "cycles": self.sigma.cycles(),
                "signs": list(self.sigma.signs), "u": m(self.u)}


def _lu_unit(a: List[List[Fraction]]):
    """Doolittle LU without pivoting; returns (L, U)."""
    n = len(a)
    lo = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    up = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            up[i][j] = a[i][j] - sum((lo[i][k] * up[k][j] for k in range(i)), Fraction(0))
        if up[i][i] == 0:
            raise IdentityFailure("zero pivot in the unipotent splitting")
        for j in range(i + 1, n):
            lo[j][i] = (a[j][i] - sum((lo[j][k] * up[k][i] for k in range(i)), Fraction(0))) / up[i][i]
    return lo, up


def _ul_unipotent(y: Matrix) -> Tuple[Matrix, Matrix]:
    """Split ``y = A L`` with A upper and L lower unitriangular."""
    n = y.rows
    rev = [[y[n - 1 - i, n - 1 - j] for j in range(n)] for i in range(n)]
    lo, up = _lu_unit(rev)
    a = Matrix([[lo[n - 1 - i][n - 1 - j] for j in range(n)] for i in range(n)])
    l_ = Matrix([[up[n - 1 - i][n - 1 - j] for j in range(n)] for i in range(n)])
    if not (a.is_upper_unitriangular() and l_.is_lower_unitriangular()):
        raise IdentityFailure("unipotent splitting is not unitriangular")
    return a, l_


def bruhat_decompose(g: Matrix) -> BruhatForm:
    """Canonical ``g = v d p_sigma u`` with ``u`` in ``U ∩ p^-1 U^- p``.

    Column by column, the lowest nonzero entry is used to clear the entries
    above it (row operations ``e_{i,r}^k``, i < r) and to its right (column
    operations ``e_{c,j}^k``, c < j).  What remains is monomial.
    """
    if not g.is_square():
        raise DimensionError("Bruhat decomposition needs a square matrix")
    n = g.rows
    dg = det(g)
    if dg == 0:
        raise SingularMatrixError("Bruhat decomposition needs an invertible matrix")
    if dg != 1:
        raise PreconditionError(f"determinant is {dg}, expected 1")
    a = g.tolist()
    # v0 and u0 are kept as the inverses of the accumulated row and column operations
    v0 = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    u0 = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    sigma = [0] * n
    for c in range(n):
        r = max(i for i in range(n) if a[i][c] != 0)
        sigma[c] = r + 1
        piv = a[r][c]
        for i in range(r):
            if a[i][c] != 0:
                f = a[i][c] / piv
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
                for row in v0:
                    row[r] += f * row[i]
        for j in range(c + 1, n):
            if a[r][j] != 0:
                f = a[r][j] / piv
                for row in a:
                    row[j] -= f * row[c]
                u0[c] = [x + f * y for x, y in zip(u0[c], u0[j])]
    mono = Matrix(a)
    mono_inv = [[Fraction(0)] * n for _ in range(n)]
    for j in range(n):
        mono_inv[j][sigma[j] - 1] = 1 / a[sigma[j] - 1][j]
    mono_inv = Matrix(mono_inv)
    v0, u0 = Matrix(v0), Matrix(u0)
    p = SignedPermutationMatrix.of(sigma)
    dvals = [Fraction(0)] * n
    for j in range(n):
        dvals[sigma[j] - 1] = a[sigma[j] - 1][j] * p.signs[j]
    d = Matrix.diag(dvals)
    # move the part of u0 that the monomial conjugates into U over to v
    y = mono @ u0 @ mono_inv
    upper, lower = _ul_unipotent(y)
    v = v0 @ upper
    u = mono_inv @ lower @ mono
    form = BruhatForm(v, d, p, u)
    if form.recompose() != g or not v.is_upper_unitriangular() or not u.is_upper_unitriangular():
        raise IdentityFailure("Bruhat recomposition failed")
    for i in range(n):
        for j in range(i + 1, n):
            if u[i, j] != 0 and sigma[i] < sigma[j]:
                raise IdentityFailure("u is not in canonical form")
    return form


def bruhat_cell(g: Matrix) -> Tuple[int, ...]:
    return bruhat_decompose(g).sigma.sigma


def double_commutator_identity(delta: Matrix, k, a: Matrix) -> Tuple[Matrix, Matrix]:
    """Both sides of ``[[δ, e_{1,n}^k], v a v^-1] = v [e_{σ(1),σ(n)}^{c k}, a] v^-1``.

    Here ``c = d_{σ(1)} / d_{σ(n)}`` times the product of the signs that
    ``p_σ`` carries in its first and last columns (1 whenever n >= 3).
    """
    if not a.is_upper_unitriangular():
        raise PreconditionError("a must be upper unitriangular")
    form = bruhat_decompose(delta)
    n = form.n
    if a.rows != n:
        raise DimensionError("a and delta differ in size")
    k = as_rational(k)
    v, vinv = form.v, inverse(form.v)
    lhs = commutator(commutator(delta, elementary(n, 1, n, k)), v @ a @ vinv)
    s1, sn = form.sigma(1), form.sigma(n)
    c = form.d_entry(s1) / form.d_entry(sn) * form.sigma.signs[0] * form.sigma.signs[n - 1]
    rhs = v @ commutator(elementary(n, s1, sn, c * k), a) @ vinv
    if lhs != rhs:
        raise IdentityFailure("double commutator identity failed")
    return lhs, rhs


def power_formula_check(x: Matrix, y: Matrix, p: int) -> Tuple[Matrix, Matrix]:
    """``(xy)^p = x^p y^p [x^-1, y^-1]^(p(1-p)/2)`` when x, y commute with the commutator."""
    c = commutator(inverse(x), inverse(y))
    if x @ c != c @ x or y @ c != c @ y:
        raise PreconditionError("x and y must commute with [x^-1, y^-1]")
    lhs = (x @ y) ** p
    rhs = (x ** p) @ (y ** p) @ (c ** (p * (1 - p) // 2))
    if lhs != rhs:
        raise IdentityFailure("power formula failed")
    return lhs, rhs
