"""Exact rational matrices.

A :class:`Matrix` is stored as an integer matrix together with one positive
common denominator, kept in lowest terms.  Structural equality is therefore
mathematical equality, and products of integer matrices never touch
``Fraction`` at all.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from operator import mul
from typing import Iterable, List, Sequence, Tuple

from .errors import BudgetExhausted, DimensionError, ParseError, PreconditionError, SingularMatrixError

Rational = Fraction


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a matrix entry")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # exact binary value; callers wanting decimals should pass strings
        return Fraction(x)
    return Fraction(x)


def _lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


class Matrix:
    """Immutable exact matrix over Q."""

    __slots__ = ("rows", "cols", "_num", "_den", "_hash")

    def __init__(self, data: Iterable[Iterable]):
        rows = [list(r) for r in data]
        if not rows:
            raise DimensionError("matrix needs at least one row")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise DimensionError("ragged rows")
        if all(type(x) is int for r in rows for x in r):
            self._set(tuple(tuple(r) for r in rows), 1, len(rows), ncols)
            return
        fr = [[as_rational(x) for x in r] for r in rows]
        den = 1
        for r in fr:
            for x in r:
                if x.denominator != 1:
                    den = _lcm(den, x.denominator)
        num = tuple(tuple(x.numerator * (den // x.denominator) for x in r) for r in fr)
        self._set(num, den, len(rows), ncols)

    def _set(self, num, den, nrows, ncols):
        if den != 1:
            g = den
            for r in num:
                for x in r:
                    if x:
                        g = math.gcd(g, x)
                        if g == 1:
                            break
                if g == 1:
                    break
            if g != 1:
                num = tuple(tuple(x // g for x in r) for r in num)
                den //= g
        self._num = num
        self._den = den
        self.rows = nrows
        self.cols = ncols
        self._hash = None

    @classmethod
    def _from_scaled(cls, num, den: int) -> "Matrix":
        m = object.__new__(cls)
        if den < 0:
            num = tuple(tuple(-x for x in r) for r in num)
            den = -den
        m._set(num, den, len(num), len(num[0]))
        return m

    # construction helpers

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls._from_scaled(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), 1)

    @classmethod
    def zero(cls, rows: int, cols: int | None = None) -> "Matrix":
        cols = rows if cols is None else cols
        return cls._from_scaled(tuple((0,) * cols for _ in range(rows)), 1)

    @classmethod
    def diag(cls, entries: Sequence) -> "Matrix":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: Sequence) -> "Matrix":
        if len(entries) != rows * cols:
            raise DimensionError(f"expected {rows * cols} entries, got {len(entries)}")
        return cls([entries[i * cols:(i + 1) * cols] for i in range(rows)])

    # accessors

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def denominator(self) -> int:
        return self._den

    @property
    def scaled(self):
        """Integer numerator matrix (tuple of tuples); ``self == scaled / denominator``."""
        return self._num

    @property
    def entries(self) -> Tuple[Fraction, ...]:
        d = self._den
        return tuple(Fraction(x, d) for r in self._num for x in r)

    def row(self, i: int) -> List[Fraction]:
        return [Fraction(x, self._den) for x in self._num[i]]

    def tolist(self) -> List[List[Fraction]]:
        return [self.row(i) for i in range(self.rows)]

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return Fraction(self._num[i][j], self._den)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_integral(self) -> bool:
        return self._den == 1

    def is_identity(self) -> bool:
        return self._den == 1 and self.rows == self.cols and all(
            x == (i == j) for i, r in enumerate(self._num) for j, x in enumerate(r))

    def is_diagonal(self) -> bool:
        return self.is_square() and all(
            x == 0 for i, r in enumerate(self._num) for j, x in enumerate(r) if i != j)

    def is_upper_unitriangular(self) -> bool:
        d = self._den
        return self.is_square() and all(
            (x == d if i == j else x == 0)
            for i, r in enumerate(self._num) for j, x in enumerate(r) if j <= i)

    def is_lower_unitriangular(self) -> bool:
        return self.transpose().is_upper_unitriangular()

    def is_scalar(self) -> bool:
        return self.is_diagonal() and len({self._num[i][i] for i in range(self.rows)}) == 1

    # arithmetic

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self._den == other._den and self._num == other._num

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._num, self._den))
        return self._hash

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return matmul(self, other)

    def __mul__(self, other):
        if isinstance(other, Matrix):
            return matmul(self, other)
        c = as_rational(other)
        return Matrix._from_scaled(
            tuple(tuple(x * c.numerator for x in r) for r in self._num), self._den * c.denominator)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        d1, d2 = self._den, other._den
        den = _lcm(d1, d2)
        f1, f2 = den // d1, den // d2
        num = tuple(tuple(a * f1 + b * f2 for a, b in zip(r1, r2))
                    for r1, r2 in zip(self._num, other._num))
        return Matrix._from_scaled(num, den)

    def __neg__(self) -> "Matrix":
        return Matrix._from_scaled(tuple(tuple(-x for x in r) for r in self._num), self._den)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def __pow__(self, p: int) -> "Matrix":
        if not self.is_square():
            raise DimensionError("power of a non-square matrix")
        if p < 0:
            return inverse(self) ** (-p)
        result = Matrix.identity(self.rows)
        base = self
        while p:
            if p & 1:
                result = result @ base
            p >>= 1
            if p:
                base = base @ base
        return result

    def transpose(self) -> "Matrix":
        return Matrix._from_scaled(tuple(zip(*self._num)), self._den)

    @property
    def T(self) -> "Matrix":
        return self.transpose()

    def inverse(self) -> "Matrix":
        return inverse(self)

    def det(self) -> Fraction:
        return det(self)

    def apply(self, vec: Sequence) -> List[Fraction]:
        v = [as_rational(x) for x in vec]
        if len(v) != self.cols:
            raise DimensionError("vector length mismatch")
        return [sum((Fraction(a, self._den) * b for a, b in zip(r, v)), Fraction(0)) for r in self._num]

    def mod(self, m: int) -> Tuple[int, ...]:
        """Flattened entries reduced mod ``m`` (integral matrices only)."""
        if self._den != 1:
            raise PreconditionError("reduction mod m needs an integral matrix")
        return tuple(x % m for r in self._num for x in r)

    def __repr__(self) -> str:
        return f"Matrix({[[str(x) for x in r] for r in self.tolist()]})"

    def __str__(self) -> str:
        return format_matrix(self)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    bt = tuple(zip(*b._num))
    num = tuple(tuple(sum(map(mul, r, c)) for c in bt) for r in a._num)
    return Matrix._from_scaled(num, a._den * b._den)


def product(mats: Iterable[Matrix]) -> Matrix:
    mats = list(mats)
    if not mats:
        raise DimensionError("empty product has no size")
    return reduce(matmul, mats)


def commutator(x: Matrix, y: Matrix) -> Matrix:
    """``x y x^-1 y^-1``."""
    return x @ y @ inverse(x) @ inverse(y)


def _unitriangular_inverse(m: Matrix, upper: bool) -> Matrix:
    if not upper:
        return _unitriangular_inverse(m.transpose(), True).transpose()
    n = m.rows
    d = m._den
    a = m._num if d == 1 else [[Fraction(x, d) for x in r] for r in m._num]
    x = [[0] * n for _ in range(n)]
    for i in range(n - 1, -1, -1):
        ai = a[i]
        xi = x[i]
        xi[i] = 1
        for j in range(i + 1, n):
            s = 0
            for k in range(i + 1, j + 1):
                if ai[k]:
                    s -= ai[k] * x[k][j]
            xi[j] = s
    return Matrix(x)


def inverse(m: Matrix) -> Matrix:
    if not m.is_square():
        raise DimensionError("inverse of a non-square matrix")
    n = m.rows
    if m.is_upper_unitriangular():
        return _unitriangular_inverse(m, upper=True)
    if m.is_lower_unitriangular():
        return _unitriangular_inverse(m, upper=False)
    if m.is_diagonal():
        if any(m._num[i][i] == 0 for i in range(n)):
            raise SingularMatrixError("singular matrix")
        return Matrix.diag([Fraction(m._den, m._num[i][i]) for i in range(n)])
    # Gauss-Jordan on the integer numerators; inverse(N/d) = d * inverse(N)
    aug = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
           for i, r in enumerate(m._num)]
    for c in range(n):
        p = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if p is None:
            raise SingularMatrixError("singular matrix")
        if p != c:
            aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        if piv != 1:
            aug[c] = [x / piv for x in aug[c]]
        rowc = aug[c]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], rowc)]
    return Matrix([r[n:] for r in aug]) * m._den


def _bareiss_det(a) -> int:
    n = len(a)
    a = [list(r) for r in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def det(m: Matrix) -> Fraction:
    if not m.is_square():
        raise DimensionError("determinant of a non-square matrix")
    return Fraction(_bareiss_det(m._num), m._den ** m.rows)


def rref(rows: Sequence[Sequence]) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form; pivot = first nonzero entry in column order."""
    a = [[as_rational(x) for x in r] for r in rows]
    if not a:
        return a, []
    nr, nc = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        p = next((i for i in range(r, nr) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        pv = a[r][c]
        if pv != 1:
            a[r] = [x / pv for x in a[r]]
        for i in range(nr):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(rows) -> int:
    if isinstance(rows, Matrix):
        rows = rows.tolist()
    return len(rref(rows)[1])


def kernel(m) -> List[List[Fraction]]:
    """Basis of the right null space ``{x : m x = 0}``."""
    rows = m.tolist() if isinstance(m, Matrix) else [list(r) for r in m]
    nc = len(rows[0])
    red, pivots = rref(rows)
    free = [c for c in range(nc) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * nc
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -red[i][f]
        basis.append(v)
    return basis


# commutant dimensions

def _commutation_system(h: Matrix) -> List[List[Fraction]]:
    # rows index (i, j) of X h - h X; columns index (a, b) of X
    n = h.rows
    e = h.tolist()
    sysm = []
    for i in range(n):
        for j in range(n):
            row = [Fraction(0)] * (n * n)
            for b in range(n):
                row[i * n + b] += e[b][j]
            for a in range(n):
                row[a * n + j] -= e[i][a]
            sysm.append(row)
    return sysm


def solve_commutant(g: Matrix, k: int) -> int:
    """Dimension of ``{X : X g^k = g^k X}`` inside all n-by-n matrices."""
    if not g.is_square():
        raise DimensionError("commutant of a non-square matrix")
    if k == 0:
        raise PreconditionError("exponent must be nonzero")
    return len(kernel(_commutation_system(g ** k)))


def finite_order(g: Matrix, bound: int) -> int | None:
    """Order of ``g`` if it is at most ``bound``, else None."""
    h = g
    for k in range(1, bound + 1):
        if h.is_identity():
            return k
        h = h @ g
    return None


def stabilization_power(g: Matrix, bound: int) -> int:
    """Least power after which the centralizer no longer changes along multiples.

    Finite-order elements stabilize exactly at their order: the cyclic
    groups they generate keep shrinking until the identity is reached.
    Otherwise the least ``k`` with ``2k <= bound`` is returned for which the
    commutant dimension of ``g^k`` equals that of ``g^(k m)`` for every
    ``k m <= bound``.
    """
    if bound < 1:
        raise PreconditionError("bound must be >= 1")
    if not g.is_square():
        raise DimensionError("non-square matrix")
    if det(g) == 0:
        raise SingularMatrixError("g must be invertible")
    order = finite_order(g, bound)
    if order is not None:
        return order
    dims = {}

    def dim(e):
        if e not in dims:
            dims[e] = solve_commutant(g, e)
        return dims[e]

    for k in range(1, bound // 2 + 1):
        base = dim(k)
        if all(dim(k * m) == base for m in range(2, bound // k + 1)):
            return k
    raise BudgetExhausted(f"no stabilization power found within bound {bound}", bound=bound)


# text format

def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_matrix(m: Matrix) -> str:
    return "\n".join(" ".join(format_rational(x) for x in m.row(i)) for i in range(m.rows)) + "\n"


def parse_matrices(text: str, source=None) -> List[Matrix]:
    """Parse blank-line separated matrix blocks."""
    blocks, current = [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            if current:
                blocks.append(current)
                current = []
            continue
        row = []
        col = 1
        for tok in line.split():
            col = line.index(tok, col - 1) + 1
            try:
                row.append(_parse_rational(tok))
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"bad entry {tok!r}", line=lineno, column=col, source=source) from None
            col += len(tok)
        if current and len(row) != len(current[0][1]):
            raise ParseError(f"expected {len(current[0][1])} entries, got {len(row)}",
                             line=lineno, column=1, source=source)
        current.append((lineno, row))
    if current:
        blocks.append(current)
    return [Matrix([r for _, r in b]) for b in blocks]


def _parse_rational(tok: str) -> Fraction:
    if "/" in tok:
        p, q = tok.split("/", 1)
        if not q.isdigit() or int(q) == 0:
            raise ValueError(tok)
        return Fraction(int(p), int(q))
    return Fraction(int(tok))


def parse_matrix(text: str, source=None) -> Matrix:
    blocks = parse_matrices(text, source=source)
    if len(blocks) != 1:
        raise ParseError(f"expected one matrix block, found {len(blocks)}", source=source)
    return blocks[0]
