"""Subgroups with decidable membership.

Five handle variants share one interface:

* ``congruence``   preimage in SL_n(Z) of a subgroup of SL_n(Z/m)
* ``free``         finitely generated subgroup of a free group (Stallings graph)
* ``finite``       an explicit finite subgroup of SL_n(Z)
* ``unitriangular`` entrywise congruence subgroup of U_n(Z)
* ``conjugated``   ``v^-1 D v`` intersected with SL_n(Z), for rational ``v``

Elements are :class:`Matrix` objects, except in the free variant where they are
reduced words over ``a..z`` with capitals for inverses.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import BudgetExhausted, DimensionError, ParseError, PreconditionError
from .linalg import Matrix, det, format_rational, inverse

DEFAULT_BUDGET = 10 ** 7


# ---------------------------------------------------------------------------
# residues mod m, stored as flat tuples

def _mulmod(a, b, n, m):
    return tuple(sum(a[i * n + k] * b[k * n + j] for k in range(n)) % m
                 for i in range(n) for j in range(n))


def _identity_mod(n, m):
    return tuple(int(i == j) % m for i in range(n) for j in range(n))


def _det_mod(a, n, m):
    return int(det(Matrix([list(a[i * n:(i + 1) * n]) for i in range(n)]))) % m


def _closure(gens, n, m, budget, what="closure"):
    """Subgroup of SL_n(Z/m) generated by ``gens`` (right-multiplication BFS)."""
    start = _identity_mod(n, m)
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = _mulmod(x, g, n, m)
            if y not in seen:
                seen.add(y)
                if len(seen) > budget:
                    raise BudgetExhausted(f"{what} exceeded {budget} elements", budget=budget,
                                          frontier=len(queue))
                queue.append(y)
    return frozenset(seen)


def _elementary_mod(n, m, i, j, k=1):
    e = list(_identity_mod(n, m))
    e[i * n + j] = k % m
    return tuple(e)


@lru_cache(maxsize=None)
def group_order_mod(n: int, m: int, budget: int = DEFAULT_BUDGET) -> int:
    """|SL_n(Z/m)|, by closure of the elementary generators."""
    if n < 1 or m < 2:
        raise PreconditionError("need n >= 1 and m >= 2")
    gens = [_elementary_mod(n, m, i, j) for i in range(n) for j in range(n) if i != j]
    return len(_closure(gens, n, m, budget, what="SL_n(Z/m) enumeration"))


def _crt_pair(a, m1, b, m2):
    t = ((b - a) * pow(m1, -1, m2)) % m2
    return (a + m1 * t) % (m1 * m2)


# ---------------------------------------------------------------------------
# element helpers

def _as_matrix(g) -> Matrix:
    if isinstance(g, Matrix):
        return g
    return Matrix(g)


def _matrix_json(g: Matrix):
    return [[x.numerator if x.denominator == 1 else format_rational(x) for x in row] for row in g.tolist()]


def _in_sl_z(g: Matrix, n: int) -> bool:
    return g.shape == (n, n) and g.is_integral() and det(g) == 1


class SubgroupHandle:
    """Common interface; see the concrete variants below."""

    variant = "abstract"

    # element arithmetic in the ambient group
    def identity(self):
        return Matrix.identity(self.n)

    def mul(self, a, b):
        return a @ b

    def inv(self, a):
        return inverse(a)

    def power(self, a, k: int):
        return a ** k

    def conj(self, g, x):
        """``g x g^-1``."""
        return self.mul(self.mul(g, x), self.inv(g))

    def parse_element(self, x):
        g = _as_matrix(x)
        if g.shape != (self.n, self.n):
            raise DimensionError(f"expected a {self.n}x{self.n} matrix, got {g.shape}")
        return g

    def element_json(self, g):
        return _matrix_json(g)

    def check_ambient(self, g):
        g = self.parse_element(g)
        if not _in_sl_z(g, self.n):
            raise PreconditionError("element is not in SL_n(Z)")
        return g

    # membership
    def member(self, g) -> bool:
        """Lenient membership: anything outside the ambient group is simply not a member."""
        raise NotImplementedError

    def contains(self, g) -> bool:
        return self.member(self.check_ambient(g))

    def evidence(self, g) -> dict:
        """Data a checker can recompute to confirm membership of ``g``."""
        return {"element": self.element_json(g)}

    # structure
    def conjugate(self, gamma) -> "SubgroupHandle":
        raise PreconditionError(f"conjugation is not supported for {self.variant} handles")

    def intersect(self, other) -> "SubgroupHandle":
        raise PreconditionError(f"intersection is not supported for {self.variant} handles")

    def equals(self, other) -> bool:
        raise PreconditionError(f"equality is not decidable for {self.variant} handles")

    def normalized_by(self, gamma) -> bool:
        return self.equals(self.conjugate(gamma))

    def sample_generators(self) -> list:
        """A finite list of members, used to build probe balls."""
        raise NotImplementedError

    def is_central_only(self) -> bool:
        return False

    def to_json(self) -> dict:
        raise NotImplementedError

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    def __eq__(self, other):
        if not isinstance(other, SubgroupHandle) or other.variant != self.variant:
            return NotImplemented
        return self.equals(other)

    __hash__ = None


# ---------------------------------------------------------------------------
# congruence subgroups

class CongruenceOracle(SubgroupHandle):
    variant = "congruence"

    def __init__(self, n: int, m: int, image_generators: Sequence = (), budget: int = DEFAULT_BUDGET,
                 _closure_set: FrozenSet | None = None):
        if n < 1 or m < 2:
            raise PreconditionError("need n >= 1 and modulus m >= 2")
        self.n, self.m, self.budget = n, m, budget
        raw = []
        for g in image_generators:
            rows = [list(r) for r in g]
            if len(rows) != n or any(len(r) != n for r in rows):
                raise DimensionError(f"image generator is not {n}x{n}")
            if not all(isinstance(x, int) and not isinstance(x, bool) for r in rows for x in r):
                raise PreconditionError("image generators must have integer entries")
            raw.append(rows)
        self.image_generators = raw
        self._gens = tuple(tuple(x % m for r in rows for x in r) for rows in raw)
        for g in self._gens:
            if _det_mod(g, n, m) != 1 % m:
                raise PreconditionError("image generator does not have determinant 1 mod m")
        self._closure_set = _closure_set

    @property
    def closure(self) -> FrozenSet[Tuple[int, ...]]:
        if self._closure_set is None:
            self._closure_set = _closure(self._gens, self.n, self.m, self.budget)
        return self._closure_set

    def __repr__(self):
        return f"CongruenceOracle(n={self.n}, m={self.m}, |image|={len(self.closure)})"

    def member(self, g) -> bool:
        g = _as_matrix(g)
        return _in_sl_z(g, self.n) and g.mod(self.m) in self.closure

    def evidence(self, g):
        return {"element": self.element_json(g), "residue": list(g.mod(self.m)), "modulus": self.m}

    def index(self) -> int:
        return group_order_mod(self.n, self.m) // len(self.closure)

    def conjugate(self, gamma) -> "CongruenceOracle":
        gamma = self.check_ambient(gamma)
        gm, gi = gamma.mod(self.m), inverse(gamma).mod(self.m)
        n, m = self.n, self.m
        conj = [_mulmod(_mulmod(gm, h, n, m), gi, n, m) for h in self._gens]
        image = frozenset(_mulmod(_mulmod(gm, h, n, m), gi, n, m) for h in self.closure)
        gens = [[list(g[i * n:(i + 1) * n]) for i in range(n)] for g in conj]
        return CongruenceOracle(n, m, gens, self.budget, _closure_set=image)

    def normalized_by(self, gamma) -> bool:
        gamma = self.check_ambient(gamma)
        n, m = self.n, self.m
        gm, gi = gamma.mod(m), inverse(gamma).mod(m)
        return all(_mulmod(_mulmod(gm, h, n, m), gi, n, m) in self.closure for h in self._gens)

    def lift(self, M: int) -> FrozenSet[Tuple[int, ...]]:
        """Image of the same subgroup in SL_n(Z/M) for a multiple M of m."""
        if M % self.m:
            raise PreconditionError(f"{M} is not a multiple of {self.m}")
        if M == self.m:
            return self.closure
        q = M // self.m
        n = self.n
        cost = len(self.closure) * q ** (n * n)
        if cost > self.budget:
            raise BudgetExhausted(f"lifting to modulus {M} needs {cost} candidates", budget=self.budget)
        out = set()
        for h in self.closure:
            for ts in itertools.product(range(q), repeat=n * n):
                x = tuple(a + self.m * t for a, t in zip(h, ts))
                if _det_mod(x, n, M) == 1 % M:
                    out.add(x)
        return frozenset(out)

    def equals(self, other) -> bool:
        if not isinstance(other, CongruenceOracle) or other.n != self.n:
            return False
        if other.m == self.m:
            return self.closure == other.closure
        M = math.lcm(self.m, other.m)
        return self.lift(M) == other.lift(M)

    def intersect(self, other) -> "CongruenceOracle":
        if not isinstance(other, CongruenceOracle):
            raise PreconditionError(f"cannot intersect congruence with {other.variant}")
        if other.n != self.n:
            raise DimensionError("ambient groups differ")
        n, m1, m2 = self.n, self.m, other.m
        if m1 == m2:
            image = self.closure & other.closure
            return _from_image(n, m1, image, self.budget)
        M = math.lcm(m1, m2)
        if math.gcd(m1, m2) == 1:
            # SL_n(Z/M) = SL_n(Z/m1) x SL_n(Z/m2); the image is a direct product
            one1, one2 = _identity_mod(n, m1), _identity_mod(n, m2)
            gens = [tuple(_crt_pair(a, m1, b, m2) for a, b in zip(g, one2)) for g in self._gens]
            gens += [tuple(_crt_pair(a, m1, b, m2) for a, b in zip(one1, g)) for g in other._gens]
            image = frozenset(tuple(_crt_pair(a, m1, b, m2) for a, b in zip(x, y))
                              for x in self.closure for y in other.closure)
            return CongruenceOracle(n, M, [_rows(g, n) for g in gens], self.budget, _closure_set=image)
        l1 = self.lift(M)
        image = frozenset(x for x in l1 if tuple(a % m2 for a in x) in other.closure)
        return _from_image(n, M, image, self.budget)

    def sample_generators(self) -> list:
        n, m = self.n, self.m
        out = []
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i == j:
                    continue
                for k in (1, m):
                    e = _elem(n, i, j, k)
                    if self.member(e) and e not in out:
                        out.append(e)
        return out

    def to_json(self) -> dict:
        return {"variant": "congruence", "n": self.n, "m": self.m,
                "image_generators": [[list(r) for r in g] for g in self.image_generators]}


def _rows(flat, n):
    return [list(flat[i * n:(i + 1) * n]) for i in range(n)]


def _elem(n, i, j, k):
    rows = [[int(a == b) for b in range(n)] for a in range(n)]
    rows[i - 1][j - 1] = k
    return Matrix(rows)


def _from_image(n, m, image, budget) -> CongruenceOracle:
    """Oracle with a prescribed image; generators are picked greedily."""
    gens, span = [], frozenset([_identity_mod(n, m)])
    for x in sorted(image):
        if x not in span:
            gens.append(x)
            span = _closure(gens, n, m, budget)
    if span != image:
        raise PreconditionError("prescribed image is not a subgroup")
    return CongruenceOracle(n, m, [_rows(g, n) for g in gens], budget, _closure_set=image)


def principal_congruence(n: int, m: int) -> CongruenceOracle:
    """Gamma(m), the kernel of reduction mod m."""
    return CongruenceOracle(n, m, [])


def full_group(n: int) -> CongruenceOracle:
    """SL_n(Z) itself, as the preimage of SL_n(Z/2)."""
    return CongruenceOracle(n, 2, [_rows(_elementary_mod(n, 2, i, j), n)
                                   for i in range(n) for j in range(n) if i != j])


def upper_triangular_mod(n: int, m: int) -> CongruenceOracle:
    """Preimage of the upper triangular matrices of SL_n(Z/m)."""
    gens = [_rows(_elementary_mod(n, m, i, j), n) for i in range(n) for j in range(i + 1, n)]
    for u in range(2, m):
        if math.gcd(u, m) == 1:
            for i in range(n - 1):
                d = list(_identity_mod(n, m))
                d[i * n + i] = u
                d[(i + 1) * n + i + 1] = pow(u, -1, m)
                gens.append(_rows(tuple(d), n))
    return CongruenceOracle(n, m, gens)


# ---------------------------------------------------------------------------
# free groups

def _check_word(word: str, rank: int) -> str:
    if word == "1":
        return ""
    for pos, ch in enumerate(word):
        if not ch.isalpha() or not ch.isascii() or ord(ch.lower()) - ord("a") >= rank:
            raise ParseError(f"letter {ch!r} is not a generator of the free group of rank {rank}",
                             column=pos + 1)
    return word


def reduce_word(word: str) -> str:
    out: List[str] = []
    for ch in word:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def invert_word(word: str) -> str:
    return word[::-1].swapcase()


def _letters(rank: int) -> List[str]:
    out = []
    for i in range(rank):
        c = chr(ord("a") + i)
        out += [c, c.upper()]
    return out


class FoldedAutomaton:
    """Stallings graph of a subgroup of the free group of given rank.

    ``edges`` holds positive edges ``(u, letter, v)``; the reverse edge with the
    capital letter is implicit.  After construction the graph is folded,
    restricted to the core at the base state 0 and canonically numbered.
    """

    def __init__(self, rank: int, nstates: int, edges: Iterable[Tuple[int, str, int]]):
        self.rank = rank
        n, e = _fold(nstates, edges)
        self.nstates, self.edges = _canonical(rank, n, e)
        self.folded = True
        self._out = [dict() for _ in range(self.nstates)]
        for u, x, v in self.edges:
            self._out[u][x] = v
            self._out[v][x.upper()] = u

    @classmethod
    def from_words(cls, rank: int, words: Iterable[str]) -> "FoldedAutomaton":
        edges, count = [], 1
        for w in words:
            w = reduce_word(_check_word(w, rank))
            if not w:
                continue
            path = [0] + list(range(count, count + len(w) - 1)) + [0]
            count += len(w) - 1
            for k, ch in enumerate(w):
                u, v = path[k], path[k + 1]
                edges.append((u, ch, v) if ch.islower() else (v, ch.lower(), u))
        return cls(rank, count, edges)

    def run(self, word: str) -> Optional[List[int]]:
        """State path read by ``word`` from the base, or None if it gets stuck."""
        s, path = 0, [0]
        for ch in word:
            s = self._out[s].get(ch)
            if s is None:
                return None
            path.append(s)
        return path

    def accepts(self, word: str) -> bool:
        path = self.run(reduce_word(word))
        return path is not None and path[-1] == 0

    def canonical(self) -> Tuple[int, Tuple[Tuple[int, str, int], ...]]:
        return (self.nstates, self.edges)

    def __eq__(self, other):
        return isinstance(other, FoldedAutomaton) and self.rank == other.rank and \
            self.canonical() == other.canonical()

    def __hash__(self):
        return hash((self.rank, self.canonical()))

    def intersect(self, other: "FoldedAutomaton") -> "FoldedAutomaton":
        if other.rank != self.rank:
            raise PreconditionError("free groups of different rank")
        index = {(0, 0): 0}
        queue = deque([(0, 0)])
        edges = []
        while queue:
            p = queue.popleft()
            for x in _letters(self.rank):
                a, b = self._out[p[0]].get(x), other._out[p[1]].get(x)
                if a is None or b is None:
                    continue
                q = (a, b)
                if q not in index:
                    index[q] = len(index)
                    queue.append(q)
                if x.islower():
                    edges.append((index[p], x, index[q]))
        return FoldedAutomaton(self.rank, len(index), edges)

    def generators(self) -> List[str]:
        """Free basis read off a BFS spanning tree."""
        label = {0: ""}
        tree = set()
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for x in _letters(self.rank):
                v = self._out[u].get(x)
                if v is not None and v not in label:
                    label[v] = label[u] + x
                    tree.add((u, x, v) if x.islower() else (v, x.lower(), u))
                    queue.append(v)
        gens = [reduce_word(label[u] + x + invert_word(label[v]))
                for (u, x, v) in self.edges if (u, x, v) not in tree]
        return gens

    def index(self) -> Optional[int]:
        """Index in the free group, or None when infinite."""
        full = all(len(o) == 2 * self.rank for o in self._out)
        return self.nstates if full else None


def _fold(nstates, edges):
    parent = list(range(nstates))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = list(edges)
    while True:
        seen = {}
        merged = False
        for u, x, v in edges:
            u, v = find(u), find(v)
            for key, target in (((u, x), v), ((v, x.upper()), u)):
                t = seen.get(key)
                if t is None:
                    seen[key] = target
                    continue
                t, target = find(t), find(target)
                if t != target:
                    lo, hi = min(t, target), max(t, target)
                    parent[hi] = lo
                    merged = True
                    break
            if merged:
                break
        if not merged:
            break
    out = {(find(u), x, find(v)) for u, x, v in edges}
    return nstates, out


def _canonical(rank, nstates, edges):
    """Core at the base, states renumbered by BFS in letter order."""
    edges = set(edges)
    while True:
        deg = {}
        for u, _, v in edges:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        leaves = {s for s, d in deg.items() if d == 1 and s != 0}
        if not leaves:
            break
        edges = {e for e in edges if e[0] not in leaves and e[2] not in leaves}
    out: Dict[int, Dict[str, int]] = {}
    for u, x, v in edges:
        out.setdefault(u, {})[x] = v
        out.setdefault(v, {})[x.upper()] = u
    number = {0: 0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for x in _letters(rank):
            v = out.get(u, {}).get(x)
            if v is not None and v not in number:
                number[v] = len(number)
                queue.append(v)
    relabeled = tuple(sorted((number[u], x, number[v]) for u, x, v in edges if u in number))
    return len(number), relabeled


class FreeSubgroup(SubgroupHandle):
    variant = "free"

    def __init__(self, rank: int, generators: Sequence[str]):
        if rank < 1 or rank > 26:
            raise PreconditionError("rank must be between 1 and 26")
        self.rank = rank
        self.generators = [str(g) for g in generators]
        for g in self.generators:
            _check_word(g, rank)
        self.automaton = FoldedAutomaton.from_words(rank, self.generators)

    def __repr__(self):
        return f"FreeSubgroup(rank={self.rank}, generators={self.generators})"

    def identity(self):
        return ""

    def mul(self, a, b):
        return reduce_word(a + b)

    def inv(self, a):
        return invert_word(a)

    def power(self, a, k: int):
        return reduce_word((a if k >= 0 else invert_word(a)) * abs(k))

    def parse_element(self, x):
        if not isinstance(x, str):
            raise PreconditionError("free group elements are words")
        return reduce_word(_check_word(x.strip(), self.rank))

    def element_json(self, g):
        return g

    def check_ambient(self, g):
        return self.parse_element(g)

    def member(self, g) -> bool:
        return self.automaton.accepts(g)

    def evidence(self, g):
        return {"element": g, "path": self.automaton.run(reduce_word(g))}

    def conjugate(self, gamma) -> "FreeSubgroup":
        w = self.parse_element(gamma)
        return FreeSubgroup(self.rank, [reduce_word(w + g + invert_word(w)) for g in self.generators])

    def intersect(self, other) -> "FreeSubgroup":
        if not isinstance(other, FreeSubgroup):
            raise PreconditionError(f"cannot intersect free with {other.variant}")
        auto = self.automaton.intersect(other.automaton)
        return FreeSubgroup(self.rank, auto.generators())

    def equals(self, other) -> bool:
        return isinstance(other, FreeSubgroup) and self.automaton == other.automaton

    def index(self) -> Optional[int]:
        return self.automaton.index()

    def sample_generators(self) -> list:
        return [g for g in self.automaton.generators()]

    def to_json(self) -> dict:
        return {"variant": "free", "rank": self.rank, "generators": list(self.generators)}


# ---------------------------------------------------------------------------
# explicit finite subgroups

class FiniteSubgroup(SubgroupHandle):
    variant = "finite"

    def __init__(self, n: int, generators: Sequence, budget: int = 10 ** 5):
        self.n = n
        self.generators = [self.check_ambient(g) for g in generators]
        seen = {Matrix.identity(n)}
        queue = deque(seen)
        while queue:
            x = queue.popleft()
            for g in self.generators:
                y = x @ g
                if y not in seen:
                    seen.add(y)
                    if len(seen) > budget:
                        raise PreconditionError("generated subgroup is not finite within the budget")
                    queue.append(y)
        self.elements = frozenset(seen)

    def member(self, g) -> bool:
        return _as_matrix(g) in self.elements

    def conjugate(self, gamma):
        gamma = self.check_ambient(gamma)
        return FiniteSubgroup(self.n, [gamma @ g @ inverse(gamma) for g in self.generators])

    def intersect(self, other):
        if not isinstance(other, FiniteSubgroup):
            raise PreconditionError(f"cannot intersect finite with {other.variant}")
        return FiniteSubgroup(self.n, sorted(self.elements & other.elements, key=lambda m: m.scaled))

    def equals(self, other) -> bool:
        return isinstance(other, FiniteSubgroup) and self.elements == other.elements

    def is_central_only(self) -> bool:
        return all(g.is_scalar() for g in self.elements)

    def sample_generators(self) -> list:
        return list(self.generators)

    def to_json(self) -> dict:
        return {"variant": "finite", "n": self.n, "generators": [_matrix_json(g) for g in self.generators]}


# ---------------------------------------------------------------------------
# entrywise congruence subgroups of U_n(Z)

class UnitriangularOracle(SubgroupHandle):
    """``{x in U_n(Z) : x[i][j] = 0 mod M[i][j]}`` for i < j.

    This set is a group exactly when ``M[i][k]`` divides ``M[i][j] * M[j][k]``.
    """

    variant = "unitriangular"

    def __init__(self, n: int, moduli: Sequence[Sequence[int]]):
        self.n = n
        mods = [[int(x) for x in r] for r in moduli]
        if len(mods) != n or any(len(r) != n for r in mods):
            raise DimensionError(f"moduli must be {n}x{n}")
        for i in range(n):
            for j in range(i + 1, n):
                if mods[i][j] < 1:
                    raise PreconditionError("moduli above the diagonal must be positive")
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    if (mods[i][j] * mods[j][k]) % mods[i][k]:
                        raise PreconditionError(f"moduli are not closed at ({i + 1},{k + 1})")
        self.moduli = mods

    @classmethod
    def from_elementary_powers(cls, n: int, powers: Dict[Tuple[int, int], int]) -> "UnitriangularOracle":
        """Group generated by ``e_{i,j}^{r}`` for the given 1-based positions."""
        mods = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                mods[i][j] = abs(powers.get((i + 1, j + 1), 0))
        for gap in range(2, n):
            for i in range(n - gap):
                k = i + gap
                g = mods[i][k]
                for j in range(i + 1, k):
                    g = math.gcd(g, mods[i][j] * mods[j][k])
                mods[i][k] = g
        if any(mods[i][j] == 0 for i in range(n) for j in range(i + 1, n)):
            raise PreconditionError("generated subgroup misses a root position; not an entrywise subgroup")
        return cls(n, mods)

    def check_ambient(self, g):
        g = self.parse_element(g)
        if not (g.is_integral() and g.is_upper_unitriangular()):
            raise PreconditionError("element is not in U_n(Z)")
        return g

    def member(self, g) -> bool:
        g = _as_matrix(g)
        if not (g.shape == (self.n, self.n) and g.is_integral() and g.is_upper_unitriangular()):
            return False
        s = g.scaled
        return all(s[i][j] % self.moduli[i][j] == 0 for i in range(self.n) for j in range(i + 1, self.n))

    def intersect(self, other):
        if not isinstance(other, UnitriangularOracle) or other.n != self.n:
            raise PreconditionError("can only intersect with a unitriangular handle of the same size")
        return UnitriangularOracle(self.n, [[math.lcm(a, b) if a and b else 0 for a, b in zip(r1, r2)]
                                            for r1, r2 in zip(self.moduli, other.moduli)])

    def equals(self, other) -> bool:
        return isinstance(other, UnitriangularOracle) and self.moduli == other.moduli

    def sample_generators(self) -> list:
        return [_elem(self.n, i + 1, j + 1, self.moduli[i][j])
                for i in range(self.n) for j in range(i + 1, self.n)]

    def to_json(self) -> dict:
        return {"variant": "unitriangular", "n": self.n, "moduli": [list(r) for r in self.moduli]}


# ---------------------------------------------------------------------------
# transport by a rational conjugator

class ConjugatedOracle(SubgroupHandle):
    """``{x in SL_n(Z) : v x v^-1 in base}`` for ``v`` in SL_n(Q).

    Every ``x`` congruent to the identity modulo ``level`` is a member when the
    base is a congruence subgroup, so this is again a congruence subgroup; the
    image at that level is never enumerated, membership is evaluated lazily.
    """

    variant = "conjugated"

    def __init__(self, base: SubgroupHandle, conjugator):
        if isinstance(base, FreeSubgroup):
            raise PreconditionError("rational conjugation needs a matrix subgroup")
        self.base = base
        self.n = base.n
        self.conjugator = _as_matrix(conjugator)
        if self.conjugator.shape != (self.n, self.n) or det(self.conjugator) == 0:
            raise PreconditionError("conjugator must be an invertible n x n matrix")
        self._inverse = inverse(self.conjugator)

    @property
    def level(self) -> Optional[int]:
        m = getattr(self.base, "m", None)
        if m is None:
            return None
        return m * self.conjugator.denominator * self._inverse.denominator

    def transport(self, x: Matrix) -> Matrix:
        return self.conjugator @ x @ self._inverse

    def member(self, g) -> bool:
        g = _as_matrix(g)
        return _in_sl_z(g, self.n) and self.base.member(self.transport(g))

    def evidence(self, g):
        t = self.transport(g)
        return {"element": self.element_json(g), "transported": self.element_json(t),
                "base_evidence": self.base.evidence(t)}

    def sample_generators(self) -> list:
        lvl = self.level
        if lvl is None:
            return []
        return [e for e in (_elem(self.n, i, j, lvl) for i in range(1, self.n + 1)
                            for j in range(1, self.n + 1) if i != j) if self.member(e)]

    def to_json(self) -> dict:
        return {"variant": "conjugated", "base": self.base.to_json(),
                "conjugator": _matrix_json(self.conjugator)}


# ---------------------------------------------------------------------------
# module-level API and JSON

def contains(h: SubgroupHandle, g) -> bool:
    return h.contains(g)


def conjugate(h: SubgroupHandle, gamma) -> SubgroupHandle:
    return h.conjugate(gamma)


def intersect(h1: SubgroupHandle, h2: SubgroupHandle) -> SubgroupHandle:
    if h1.variant != h2.variant:
        raise PreconditionError(f"variant mismatch: {h1.variant} vs {h2.variant}")
    return h1.intersect(h2)


def _parse_json_matrix(rows):
    return Matrix([[Fraction(x) if isinstance(x, str) else x for x in r] for r in rows])


def handle_from_json(doc) -> SubgroupHandle:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    try:
        variant = doc["variant"]
        if variant == "congruence":
            return CongruenceOracle(int(doc["n"]), int(doc["m"]), doc.get("image_generators", []))
        if variant == "free":
            return FreeSubgroup(int(doc["rank"]), doc.get("generators", []))
        if variant == "finite":
            return FiniteSubgroup(int(doc["n"]), [_parse_json_matrix(g) for g in doc["generators"]])
        if variant == "unitriangular":
            return UnitriangularOracle(int(doc["n"]), doc["moduli"])
        if variant == "conjugated":
            return ConjugatedOracle(handle_from_json(doc["base"]), _parse_json_matrix(doc["conjugator"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed subgroup description: {exc!r}") from None
    raise ParseError(f"unknown subgroup variant {variant!r}")


def loads(text: str) -> SubgroupHandle:
    return handle_from_json(text)


def dumps(h: SubgroupHandle) -> str:
    return h.dumps()
