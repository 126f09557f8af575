"""Crystallographic root systems in simple-root coordinates.

Every root is an integer vector of coordinates with respect to the standard
simple roots; the pairing is the symmetric integer Gram matrix of those simple
roots.  All arithmetic is exact.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import PreconditionError
from .linalg import Matrix, inverse, rank

Root = Tuple[int, ...]


def _chain(n: int, norms: Sequence[int], links: Dict[Tuple[int, int], int]) -> List[List[int]]:
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        g[i][i] = norms[i]
    for (i, j), val in links.items():
        g[i][j] = g[j][i] = val
    return g


def gram_matrix(type_label: str, rank_: int) -> List[List[int]]:
    t = type_label.upper()
    n = rank_
    if t == "A" and n >= 1:
        return _chain(n, [2] * n, {(i, i + 1): -1 for i in range(n - 1)})
    if t == "B" and n >= 2:
        links = {(i, i + 1): -2 for i in range(n - 2)}
        links[(n - 2, n - 1)] = -2
        return _chain(n, [4] * (n - 1) + [2], links)
    if t == "C" and n >= 2:
        links = {(i, i + 1): -1 for i in range(n - 2)}
        links[(n - 2, n - 1)] = -2
        return _chain(n, [2] * (n - 1) + [4], links)
    if t == "D" and n >= 4:
        links = {(i, i + 1): -1 for i in range(n - 2)}
        links[(n - 3, n - 1)] = -1
        return _chain(n, [2] * n, links)
    if t == "G" and n == 2:
        return _chain(2, [2, 6], {(0, 1): -3})
    if t == "F" and n == 4:
        return _chain(4, [4, 4, 2, 2], {(0, 1): -2, (1, 2): -2, (2, 3): -1})
    if t == "E" and n in (6, 7, 8):
        # Bourbaki labelling: 1-3-4-5-6-7-8 with 2 attached to 4
        links = {(0, 2): -1, (1, 3): -1, (2, 3): -1}
        links.update({(i, i + 1): -1 for i in range(3, n - 1)})
        return _chain(n, [2] * n, links)
    raise PreconditionError(f"unsupported root system {type_label}{rank_}")


def parse_type(label: str) -> Tuple[str, int]:
    label = label.strip()
    if len(label) < 2 or not label[1:].isdigit():
        raise PreconditionError(f"bad root system label {label!r}")
    t, r = label[0].upper(), int(label[1:])
    gram_matrix(t, r)
    return t, r


class RootSystem:
    """Root system of a given Cartan type, enumerated by reflection closure."""

    def __init__(self, type_label: str, rank_: int):
        self.type_label = type_label.upper()
        self.rank = rank_
        self.gram = tuple(tuple(r) for r in gram_matrix(type_label, rank_))
        self.simple = tuple(tuple(int(i == j) for j in range(rank_)) for i in range(rank_))
        self.roots = self._enumerate()
        self._root_set = frozenset(self.roots)

    @property
    def name(self) -> str:
        return f"{self.type_label}{self.rank}"

    def __repr__(self):
        return f"RootSystem({self.name})"

    def pairing(self, a: Sequence[int], b: Sequence[int]) -> int:
        g = self.gram
        return sum(a[i] * g[i][j] * b[j] for i in range(self.rank) for j in range(self.rank) if a[i] and b[j])

    def norm(self, a: Sequence[int]) -> int:
        return self.pairing(a, a)

    def coroot_pairing(self, beta: Sequence[int], alpha: Sequence[int]) -> int:
        """``<beta, alpha^vee> = 2 (beta, alpha) / (alpha, alpha)``."""
        q, r = divmod(2 * self.pairing(beta, alpha), self.norm(alpha))
        if r:
            raise PreconditionError("non-integral coroot pairing")
        return q

    def reflect(self, alpha: Sequence[int], beta: Sequence[int]) -> Root:
        c = self.coroot_pairing(beta, alpha)
        return tuple(b - c * a for a, b in zip(alpha, beta))

    def _enumerate(self) -> Tuple[Root, ...]:
        seen = set(self.simple)
        queue = deque(self.simple)
        while queue:
            beta = queue.popleft()
            for alpha in self.simple:
                gamma = self.reflect(alpha, beta)
                if gamma not in seen:
                    seen.add(gamma)
                    queue.append(gamma)
        # positives by (height, lex), then their negatives in the same order
        return tuple(sorted(seen, key=lambda r: (sum(r) < 0, abs(sum(r)), tuple(abs(x) for x in r))))

    def is_root(self, v: Sequence[int]) -> bool:
        return tuple(v) in self._root_set

    @cached_property
    def cartan_matrix(self) -> Tuple[Tuple[int, ...], ...]:
        """``A[i][j] = <alpha_i, alpha_j^vee>``."""
        return tuple(tuple(self.coroot_pairing(a, b) for b in self.simple) for a in self.simple)

    @cached_property
    def positive_roots(self) -> Tuple[Root, ...]:
        return tuple(r for r in self.roots if sum(r) > 0)

    def is_long(self, a: Sequence[int]) -> bool:
        return self.norm(a) == max(self.norm(r) for r in self.simple)

    def standard_base(self) -> "Base":
        return Base(self, self.simple)

    def apply_word(self, word: Sequence[int], beta: Sequence[int]) -> Root:
        """Apply ``s_{i1} s_{i2} ... s_{ik}`` (1-based simple indices) to beta."""
        out = tuple(beta)
        for i in word:
            if not 1 <= i <= self.rank:
                raise PreconditionError(f"simple index {i} out of range 1..{self.rank}")
        for i in reversed(word):
            out = self.reflect(self.simple[i - 1], out)
        return out

    def base_from_word(self, word: Sequence[int]) -> "Base":
        return Base(self, tuple(self.apply_word(word, a) for a in self.simple))

    def euclidean(self, a: Sequence[int]) -> Tuple[float, ...]:
        """Floating point Euclidean coordinates (for angle ordering only)."""
        n = self.rank
        g = [[float(x) for x in r] for r in self.gram]
        low = [[0.0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1):
                s = g[i][j] - sum(low[i][k] * low[j][k] for k in range(j))
                low[i][j] = math.sqrt(s) if i == j else s / low[j][j]
        # simple roots are the columns of low^T
        return tuple(sum(low[j][i] * a[j] for j in range(n)) for i in range(n))

    def to_json(self) -> dict:
        return {"type": self.type_label, "rank": self.rank,
                "roots": [list(r) for r in self.roots],
                "cartan_matrix": [list(r) for r in self.cartan_matrix],
                "gram": [list(r) for r in self.gram]}

    @classmethod
    def from_json(cls, doc: dict) -> "RootSystem":
        rs = cls(doc["type"], int(doc["rank"]))
        if [list(r) for r in rs.roots] != doc.get("roots", [list(r) for r in rs.roots]):
            raise PreconditionError("root list does not match the constructed system")
        return rs


def build(type_label: str, rank_: int) -> RootSystem:
    return RootSystem(type_label, rank_)


@dataclass(frozen=True)
class Base:
    system: RootSystem = field(compare=False, repr=False)
    simple_roots: Tuple[Root, ...]

    def __post_init__(self):
        if len(self.simple_roots) != self.system.rank:
            raise PreconditionError("a base needs rank-many roots")
        for r in self.simple_roots:
            if not self.system.is_root(r):
                raise PreconditionError(f"{r} is not a root")

    @cached_property
    def _change(self) -> Matrix:
        cols = Matrix([list(r) for r in self.simple_roots]).transpose()
        return inverse(cols)

    def coordinates(self, beta: Sequence[int]) -> Tuple[Fraction, ...]:
        return tuple(self._change.apply(beta))

    @cached_property
    def positive_roots(self) -> frozenset:
        pos = []
        for r in self.system.roots:
            c = self.coordinates(r)
            if all(x >= 0 for x in c):
                pos.append(r)
            elif not all(x <= 0 for x in c):
                raise PreconditionError("not a base: mixed-sign coordinates")
            if any(x.denominator != 1 for x in c):
                raise PreconditionError("not a base: non-integral coordinates")
        if 2 * len(pos) != len(self.system.roots):
            raise PreconditionError("not a base")
        return frozenset(pos)

    @property
    def key(self) -> frozenset:
        return frozenset(self.simple_roots)

    def height(self, beta: Sequence[int]) -> int:
        return int(sum(self.coordinates(beta)))

    def reflect(self, i: int) -> "Base":
        """The base ``s_{alpha_i}(self)`` (0-based i)."""
        alpha = self.simple_roots[i]
        return Base(self.system, tuple(self.system.reflect(alpha, b) for b in self.simple_roots))

    def same_chamber(self, other: "Base") -> bool:
        return self.key == other.key


def highest_root(base: Base) -> Root:
    """Dominance-order maximum among the positive roots of ``base``."""
    pos = sorted(base.positive_roots)
    best = max(pos, key=lambda r: (base.height(r), r))
    for g in pos:
        diff = tuple(b - x for b, x in zip(best, g))
        if any(c < 0 for c in base.coordinates(diff)):
            raise PreconditionError("no dominance-maximal root")
    return best


def flipped_root(b1: Base, b2: Base) -> Optional[Root]:
    """The root flipped between adjacent bases, or None if not adjacent."""
    p1, p2 = b1.positive_roots, b2.positive_roots
    if len(p1 & p2) != len(p1) - 1:
        return None
    (alpha,) = tuple(p1 - p2)
    neg = tuple(-x for x in alpha)
    if p2 != (p1 - {alpha}) | {neg}:
        return None
    return alpha


def is_adjacent_step(b1: Base, b2: Base) -> bool:
    """One-flip predicate, with the flipped root simple and never the highest root."""
    alpha = flipped_root(b1, b2)
    if alpha is None or alpha not in b1.simple_roots:
        return False
    if b1.system.rank >= 2 and (alpha == highest_root(b1) or alpha == highest_root(b2)):
        return False
    return True


def adjacent_base_path(start: Base, end: Base) -> List[Base]:
    """Shortest chain of adjacent bases by breadth-first search over chambers."""
    if start.system is not end.system and start.system.name != end.system.name:
        raise PreconditionError("bases belong to different root systems")
    if start.same_chamber(end):
        return [start]
    parent: Dict[frozenset, Tuple[Optional[frozenset], Base]] = {start.key: (None, start)}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for i in range(cur.system.rank):
            nxt = cur.reflect(i)
            if nxt.key in parent:
                continue
            parent[nxt.key] = (cur.key, nxt)
            if nxt.same_chamber(end):
                path = [end]
                k = cur.key
                while k is not None:
                    pk, b = parent[k]
                    path.append(b)
                    k = pk
                path.reverse()
                return path
            queue.append(nxt)
    raise PreconditionError("target base is not reachable")


def weyl_orbit_bases(system: RootSystem) -> List[Base]:
    start = system.standard_base()
    seen = {start.key: start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for i in range(system.rank):
            nxt = cur.reflect(i)
            if nxt.key not in seen:
                seen[nxt.key] = nxt
                queue.append(nxt)
    return list(seen.values())


_PAIR_TYPES = {4: "A1xA1", 6: "A2", 8: "B2", 12: "G2"}


def span_roots(system: RootSystem, alpha: Root, beta: Root) -> List[Root]:
    """Roots in the integer span of alpha and beta."""
    r = len(alpha)
    p, q = next((p, q) for p in range(r) for q in range(p + 1, r) if alpha[p] * beta[q] != alpha[q] * beta[p]) \
        if r > 1 else (0, 0)
    det_ = alpha[p] * beta[q] - alpha[q] * beta[p]
    out = []
    for g in system.roots:
        if rank([list(alpha), list(beta), list(g)]) != 2:
            continue
        x = Fraction(g[p] * beta[q] - g[q] * beta[p], det_)
        y = Fraction(alpha[p] * g[q] - alpha[q] * g[p], det_)
        if x.denominator == 1 and y.denominator == 1:
            out.append(g)
    return out


def classify_pair(system: RootSystem, alpha: Root, beta: Root) -> str:
    """Type of the rank-2 subsystem ``Phi ∩ (Z alpha + Z beta)``."""
    if rank([list(alpha), list(beta)]) < 2:
        raise PreconditionError("parallel roots do not span a rank-2 subsystem")
    count = len(span_roots(system, alpha, beta))
    return _PAIR_TYPES[count]


def cyclic_labels(system: RootSystem, start: Optional[Root] = None) -> Tuple[List[Root], List[Root]]:
    """Label a rank-2 non-simply-laced system clockwise ``beta_0, alpha_0, beta_1, ...``.

    Long roots are the ``beta_i``, short roots the ``alpha_i``; the labelling
    satisfies ``beta_i = alpha_{i-1} + alpha_i``.  By default ``beta_0`` is the
    highest root of the standard base.
    """
    if system.rank != 2 or system.type_label not in ("B", "C", "G"):
        raise PreconditionError("cyclic labelling needs B2, C2 or G2")
    start = start or highest_root(system.standard_base())

    def angle(r):
        x, y = system.euclidean(r)
        return math.atan2(y, x)

    a0 = angle(start)
    # clockwise = decreasing angle
    ordered = sorted(system.roots, key=lambda r: (a0 - angle(r)) % (2 * math.pi))
    longs = ordered[0::2]
    shorts = ordered[1::2]
    m = len(longs)
    if not all(system.is_long(b) for b in longs) or any(system.is_long(a) for a in shorts):
        raise PreconditionError("roots do not alternate long/short")
    for i in range(m):
        s = tuple(x + y for x, y in zip(shorts[i - 1], shorts[i]))
        if s != longs[i]:
            raise PreconditionError("labelling violates beta_i = alpha_{i-1} + alpha_i")
    return longs, shorts
