"""Projective dynamics of single matrices, in binary64.

Everything here is numeric and every result carries the tolerance it was
computed with.  Exact rational inputs are used exactly where that is cheap
(general position, unipotency).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence

import numpy as np

from .errors import DimensionError, PreconditionError, SingularMatrixError, CertificateError
from .linalg import Matrix, rank

DEFAULT_TOL = 1e-9


def _array(g) -> np.ndarray:
    if isinstance(g, Matrix):
        return np.array([[float(x) for x in r] for r in g.tolist()])
    return np.array(g, dtype=float)


def _is_rational(x) -> bool:
    return isinstance(x, (int, Fraction, str)) and not isinstance(x, bool)


class ProjectivePoint:
    """A line in R^n, stored as a unit vector whose first nonzero coordinate is positive."""

    __slots__ = ("coords",)

    def __init__(self, coords, tol: float = 1e-12):
        v = np.array([float(x) for x in coords], dtype=float)
        norm = np.linalg.norm(v)
        if not np.isfinite(norm) or norm == 0:
            raise PreconditionError("a projective point needs a nonzero finite vector")
        v = v / norm
        for x in v:
            if abs(x) > tol:
                if x < 0:
                    v = -v
                break
        self.coords = v

    @property
    def dim(self) -> int:
        return len(self.coords)

    def distance(self, other: "ProjectivePoint") -> float:
        """Sine of the angle between the lines."""
        c = abs(float(np.dot(self.coords, other.coords)))
        return float(np.sqrt(max(0.0, 1.0 - min(1.0, c) ** 2)))

    def close(self, other: "ProjectivePoint", tol: float = DEFAULT_TOL) -> bool:
        return self.distance(other) <= tol

    def __eq__(self, other):
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        return self.dim == other.dim and self.close(other, 1e-9)

    __hash__ = None

    def apply(self, g) -> "ProjectivePoint":
        return ProjectivePoint(_array(g) @ self.coords)

    def to_json(self):
        return [float(x) for x in self.coords]

    def __repr__(self):
        return f"ProjectivePoint({np.array2string(self.coords, precision=6)})"


@dataclass
class ProximalData:
    top_eigenvalue: float
    attracting: ProjectivePoint
    repelling_basis: List[np.ndarray]
    repelling_normal: np.ndarray
    gap: float
    tol: float

    def on_repelling(self, x: ProjectivePoint, tol: Optional[float] = None) -> bool:
        tol = self.tol if tol is None else tol
        return abs(float(np.dot(self.repelling_normal, x.coords))) <= max(tol, 1e-12)

    def to_json(self) -> dict:
        return {"top_eigenvalue": self.top_eigenvalue, "attracting": self.attracting.to_json(),
                "repelling_basis": [[float(x) for x in v] for v in self.repelling_basis],
                "repelling_normal": [float(x) for x in self.repelling_normal],
                "gap": self.gap, "tol": self.tol}


def _dominant_vector(a: np.ndarray, squarings: int = 60) -> np.ndarray:
    """Dominant direction by repeated squaring, then a few plain iterations."""
    p = a / np.linalg.norm(a)
    for _ in range(squarings):
        p = p @ p
        s = np.linalg.norm(p)
        if not np.isfinite(s) or s == 0:
            break
        p = p / s
    col = int(np.argmax(np.linalg.norm(p, axis=0)))
    v = p[:, col]
    for _ in range(50):
        w = a @ v
        v = w / np.linalg.norm(w)
    return v


def proximal_analyze(g, tol: float = DEFAULT_TOL) -> Optional[ProximalData]:
    """ProximalData when ``g`` has a simple eigenvalue of strictly largest modulus."""
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    a = _array(g)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError("proximal analysis needs a square matrix")
    if isinstance(g, Matrix):
        if g.det() == 0:
            raise SingularMatrixError("g must be invertible")
    elif abs(np.linalg.det(a)) == 0:
        raise SingularMatrixError("g must be invertible")
    n = a.shape[0]
    mods = np.sort(np.abs(np.linalg.eigvals(a)))[::-1]
    if n == 1:
        gap = 0.0
    else:
        gap = float(mods[1] / mods[0])
        if 1.0 - gap <= tol:
            return None
    v = _dominant_vector(a)
    lam = float(v @ a @ v)
    w = _dominant_vector(a.T)
    if np.linalg.norm(a @ v - lam * v) > 1e3 * tol * max(1.0, abs(lam)) + 1e-12:
        return None
    # orthonormal basis of the hyperplane w^perp
    q, _ = np.linalg.qr(np.column_stack([w] + [np.eye(n)[:, i] for i in range(n)]))
    basis = [q[:, i] * 1.0 for i in range(1, n)]
    return ProximalData(lam, ProjectivePoint(v), basis, w / np.linalg.norm(w), gap, tol)


def general_position(vectors: Sequence[Sequence]) -> bool:
    """Every n of the n+1 given vectors in dimension n are linearly independent."""
    vecs = [list(v) for v in vectors]
    if not vecs:
        raise PreconditionError("need n+1 vectors")
    n = len(vecs[0])
    if len(vecs) != n + 1:
        raise PreconditionError(f"need exactly {n + 1} vectors in dimension {n}, got {len(vecs)}")
    if any(len(v) != n for v in vecs):
        raise DimensionError("vectors of different dimensions")
    exact = all(_is_rational(x) for v in vecs for x in v)
    for sub in combinations(vecs, n):
        if exact:
            r = rank([[Fraction(x) for x in v] for v in sub])
        else:
            r = np.linalg.matrix_rank(np.array(sub, dtype=float))
        if r < n:
            return False
    return True


# ---------------------------------------------------------------------------
# the obstruction

def _limit_point(gamma, x: ProjectivePoint, tol: float):
    """Limit of ``gamma^n x`` with a description of how it was found."""
    data = proximal_analyze(gamma, tol)
    if data is not None:
        if data.on_repelling(x):
            raise PreconditionError("x lies on the repelling hyperplane of gamma")
        return data.attracting, "proximal"
    g = gamma if isinstance(gamma, Matrix) else None
    a = _array(gamma)
    n = a.shape[0]
    nil = a - np.eye(n)
    unipotent = (g is not None and all(x_ == 0 for x_ in ((g - Matrix.identity(n)) ** n).entries)) or \
        (g is None and np.allclose(np.linalg.matrix_power(nil, n), 0, atol=tol))
    if not unipotent:
        raise PreconditionError("gamma is not proximal (and not unipotent)")
    v = x.coords
    last = None
    while np.linalg.norm(v) > tol:
        last = v
        v = nil @ v
    if last is None:
        raise PreconditionError("x is zero")
    return ProjectivePoint(last), "unipotent"


def _lipschitz(d: np.ndarray) -> float:
    s = np.linalg.svd(d, compute_uv=False)
    return float(s[0] * s[1] / s[-1] ** 2) if len(s) > 1 else 1.0


@dataclass
class ObstructionCertificate:
    witness_index: int
    limit_point: ProjectivePoint
    limit_kind: str
    displacement: float
    lipschitz: float
    radius: float
    n0: int
    checked_until: int
    tol: float
    inputs: dict

    def to_json(self) -> dict:
        return {"label": f"numeric obstruction (tolerance {self.tol:g})",
                "witness_index": self.witness_index, "limit_point": self.limit_point.to_json(),
                "limit_kind": self.limit_kind, "displacement": self.displacement,
                "lipschitz": self.lipschitz, "radius": self.radius, "n0": self.n0,
                "checked_until": self.checked_until, "tol": self.tol, "inputs": self.inputs}


def _orbit_distances(gamma: np.ndarray, x: np.ndarray, y: ProjectivePoint, count: int) -> List[float]:
    out, v = [], x.copy()
    for _ in range(count):
        v = gamma @ v
        v = v / np.linalg.norm(v)
        out.append(ProjectivePoint(v).distance(y))
    return out


def fixed_point_obstruction(delta_gens, gamma, x, tol: float = DEFAULT_TOL, max_iter: int = 5000,
                            horizon: int = 2000) -> Optional[ObstructionCertificate]:
    """Finite data showing that ``gamma^n`` drags a fixed point of D off itself.

    Hypotheses are checked in order and each failure is raised separately:
    every generator fixes ``x``; ``gamma^n x`` has a limit (``gamma`` proximal
    with ``x`` off the repelling hyperplane, or ``gamma`` unipotent).  When
    some generator moves the limit point ``y`` the certificate records that
    generator, a radius ``rho`` with ``delta B(y, rho)`` disjoint from
    ``B(y, rho)``, and ``n0`` with ``gamma^n x`` in ``B(y, rho)`` for every
    tested ``n0 <= n <= n0 + horizon``.
    """
    x = x if isinstance(x, ProjectivePoint) else ProjectivePoint(x)
    gens = [_array(d) for d in delta_gens]
    for idx, d in enumerate(gens):
        if d.shape != (x.dim, x.dim):
            raise DimensionError(f"generator #{idx} has the wrong size")
        if x.apply(d).distance(x) > tol:
            raise PreconditionError(f"x is not fixed by generator #{idx}")
    y, kind = _limit_point(gamma, x, tol)
    witness = None
    for idx, d in enumerate(gens):
        disp = y.apply(d).distance(y)
        if disp > tol:
            witness = (idx, disp)
            break
    if witness is None:
        return None
    idx, disp = witness
    L = _lipschitz(gens[idx])
    rho = disp / (2.0 * (1.0 + L))
    a = _array(gamma)
    dists = _orbit_distances(a, x.coords, y, max_iter + horizon)
    n0 = None
    for n in range(1, max_iter + 1):
        if all(dd < rho for dd in dists[n - 1:n - 1 + horizon]):
            n0 = n
            break
    if n0 is None:
        raise PreconditionError(f"orbit does not enter the separating ball within {max_iter} steps")
    inputs = {"delta_gens": [[[float(v) for v in row] for row in d] for d in gens],
              "gamma": [[float(v) for v in row] for row in a], "x": x.to_json(),
              "max_iter": max_iter, "horizon": horizon}
    return ObstructionCertificate(idx, y, kind, disp, L, rho, n0, n0 + horizon - 1, tol, inputs)


def replay_obstruction(cert) -> bool:
    """Re-run the iteration from the embedded inputs and check every claim."""
    doc = cert.to_json() if isinstance(cert, ObstructionCertificate) else cert
    inp = doc["inputs"]
    d = np.array(inp["delta_gens"][doc["witness_index"]])
    y = ProjectivePoint(doc["limit_point"])
    tol = doc["tol"]
    if abs(y.apply(d).distance(y) - doc["displacement"]) > tol:
        raise CertificateError("displacement of the limit point does not match")
    if doc["radius"] * 2 * (1 + _lipschitz(d)) > doc["displacement"] * (1 + 1e-12):
        raise CertificateError("radius is too large to separate the ball from its image")
    dists = _orbit_distances(np.array(inp["gamma"]), ProjectivePoint(inp["x"]).coords, y, doc["checked_until"])
    if not all(dd < doc["radius"] for dd in dists[doc["n0"] - 1:]):
        raise CertificateError("orbit leaves the ball after n0")
    fresh = fixed_point_obstruction(inp["delta_gens"], inp["gamma"], inp["x"], tol,
                                    inp["max_iter"], inp["horizon"])
    if fresh is None or fresh.n0 != doc["n0"]:
        raise CertificateError("a fresh run disagrees with the certificate")
    return True
