"""Derivation of elementary matrices inside an oracle subgroup of SL_n(Z).

The pipeline is

    find_big_cell_element -> derive_elementary -> propagate -> tits_certificate

and every element it produces is checked against a membership oracle and
recorded in a :class:`DerivationTranscript`.  Where the argument needs
"infinitely many" exponents, the engine searches exponents up to a budget and
reports running out of budget as such.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import BudgetExhausted, CentralOnlyError, CertificateError, IdentityFailure, PreconditionError
from .linalg import Matrix, commutator, inverse
from .oracles import ConjugatedOracle, SubgroupHandle, UnitriangularOracle, _matrix_json, handle_from_json
from .sln import BruhatForm, ElementaryMatrix, bruhat_decompose, double_commutator_identity, elementary, \
    elementary_commutator

SCHEMA_VERSION = 1
DEFAULT_SEARCH_BUDGET = 20000
DEFAULT_WITNESS_BUDGET = 512

Position = Tuple[int, int]


@dataclass
class DerivationTranscript:
    config: dict
    steps: List[dict] = field(default_factory=list)
    outcome: dict = field(default_factory=dict)

    def add(self, rule: str, inputs: dict, produced: Optional[Matrix], oracle: Optional[SubgroupHandle] = None,
            oracle_name: str = "subgroup"):
        step = {"rule": rule, "inputs": inputs,
                "produced": None if produced is None else _matrix_json(produced)}
        if oracle is not None and produced is not None:
            if not oracle.member(produced):
                raise IdentityFailure(f"{rule} produced a non-member")
            step["certificate"] = {"oracle": oracle_name, "evidence": oracle.evidence(produced)}
        self.steps.append(step)

    def to_json(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "config": self.config, "steps": self.steps,
                "outcome": self.outcome}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)


def _pos_key(p: Position) -> str:
    return f"{p[0]},{p[1]}"


def _parse_pos(s: str) -> Position:
    i, j = s.split(",")
    return int(i), int(j)


def _signed(limit: int):
    for k in range(1, limit + 1):
        yield k
        yield -k


# ---------------------------------------------------------------------------
# step 0: an element in a Bruhat cell whose permutation moves 1

def find_big_cell_element(h: SubgroupHandle, search_budget: int = DEFAULT_SEARCH_BUDGET,
                          transcript: Optional[DerivationTranscript] = None) -> Tuple[Matrix, BruhatForm]:
    """Breadth-first search over short words for a member with sigma(1) != 1."""
    n = h.n
    if n < 3:
        raise PreconditionError("the derivation needs n >= 3")
    if h.is_central_only():
        raise CentralOnlyError("the subgroup consists of central elements only")
    letters: List[Matrix] = []
    for g in h.sample_generators():
        for x in (g, inverse(g)):
            if x not in letters:
                letters.append(x)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i != j:
                for k in (1, -1):
                    x = elementary(n, i, j, k)
                    if x not in letters:
                        letters.append(x)
    one = Matrix.identity(n)
    words = {one: ()}
    queue = deque([one])
    while queue:
        x = queue.popleft()
        for idx, a in enumerate(letters):
            y = x @ a
            if y in words:
                continue
            words[y] = words[x] + (idx,)
            if len(words) > search_budget:
                raise BudgetExhausted(f"no big-cell element among {search_budget} words",
                                      budget=search_budget, frontier=len(queue))
            if h.member(y):
                form = bruhat_decompose(y)
                if form.sigma(1) != 1:
                    if transcript is not None:
                        transcript.add("big_cell_search",
                                       {"word_length": len(words[y]), "visited": len(words),
                                        "letters": [_matrix_json(letters[i]) for i in words[y]],
                                        "bruhat": form.to_json()}, y, h)
                    return y, form
            queue.append(y)
    raise BudgetExhausted("search space exhausted without a big-cell member", budget=search_budget)


# ---------------------------------------------------------------------------
# step 1 and 2: an elementary power in the transported subgroup

@dataclass
class DerivedElementary:
    elementary: ElementaryMatrix
    conjugator: Matrix
    target: SubgroupHandle
    k: int
    l: int
    raw_exponent: Fraction


def derive_elementary(h: SubgroupHandle, delta: Matrix, form: Optional[BruhatForm] = None,
                      witness_budget: int = DEFAULT_WITNESS_BUDGET,
                      transcript: Optional[DerivationTranscript] = None) -> DerivedElementary:
    """Double-commutator construction followed by denominator clearing.

    Returns ``e_{i,j}^r`` together with the conjugator ``v`` and the handle of
    ``v^-1 D v`` intersected with SL_n(Z), which contains ``e_{i,j}^r``.
    """
    if not h.member(delta):
        raise PreconditionError("delta is not in the subgroup")
    form = form or bruhat_decompose(delta)
    n = form.n
    if n < 3:
        raise PreconditionError("the derivation needs n >= 3")
    s1, sn = form.sigma(1), form.sigma(n)
    if s1 == 1:
        raise PreconditionError("delta must lie in a Bruhat cell with sigma(1) != 1")
    if sn != 1:
        a_pos, target = (1, s1), (1, sn)
    else:
        j = min(x for x in range(2, n + 1) if x != s1)
        a_pos, target = (1, j), (s1, j)
    v = form.v
    vinv = inverse(v)
    inner_ok: Dict[int, Optional[Matrix]] = {}

    def inner(k):
        if k not in inner_ok:
            c = commutator(delta, elementary(n, 1, n, k))
            inner_ok[k] = c if h.member(c) else None
        return inner_ok[k]

    found = None
    for s in range(1, witness_budget + 1):
        pairs = [(s, l) for l in range(1, s + 1)] + [(k, s) for k in range(1, s)]
        for k, l in pairs:
            c = inner(k)
            if c is None:
                continue
            w = commutator(c, v @ elementary(n, *a_pos, l) @ vinv)
            if h.member(w):
                found = (k, l, c, w)
                break
        if found:
            break
    if found is None:
        raise BudgetExhausted(f"no exponents k, l <= {witness_budget} give a member", budget=witness_budget)
    k, l, c, w = found
    x = vinv @ w @ v
    q = x[target[0] - 1, target[1] - 1]
    if x != elementary(n, *target, q) or q == 0:
        raise IdentityFailure("double commutator is not the predicted elementary matrix")
    lhs, rhs = double_commutator_identity(delta, k, elementary(n, *a_pos, l))
    if lhs != w:
        raise IdentityFailure("double commutator disagrees with the closed form")
    r = q * q.denominator
    e = ElementaryMatrix(n, target[0], target[1], r)
    if v.is_identity():
        H = h
        name = "subgroup"
    else:
        H = ConjugatedOracle(h, v)
        name = "transported"
    if not H.member(e.matrix):
        raise IdentityFailure("cleared elementary power is not in the transported subgroup")
    if transcript is not None:
        transcript.add("recurrence_inner", {"k": k, "delta": _matrix_json(delta)}, c, h)
        transcript.add("double_commutator", {"k": k, "l": l, "a": list(a_pos),
                                             "v": _matrix_json(v)}, w, h)
        transcript.add("conjugate_back", {"position": list(target), "exponent": str(q)}, x)
        transcript.add("denominator_clearing", {"exponent": str(q), "power": q.denominator},
                       e.matrix)
        transcript.add("lattice_intersection",
                       {"conjugator": _matrix_json(v), "identity_conjugator": v.is_identity(),
                        "target": H.to_json(), "level": getattr(H, "level", getattr(H, "m", None))},
                       e.matrix, H, name)
    return DerivedElementary(e, v, H, k, l, q)


# ---------------------------------------------------------------------------
# step 3: every off-diagonal position

def propagate(h: SubgroupHandle, seed, witness_budget: int = DEFAULT_WITNESS_BUDGET,
              transcript: Optional[DerivationTranscript] = None, oracle_name: str = "subgroup"
              ) -> Dict[Position, int]:
    """Fill every off-diagonal position with a nonzero power in the subgroup.

    ``seed`` is an :class:`ElementaryMatrix` or a map ``(i, j) -> r``.  Each new
    position comes from ``[e_{i,j}^r, e_{j,j'}^k] = e_{i,j'}^{rk}`` (row moves)
    or ``[e_{i,j}^r, e_{i',i}^k] = e_{i',j}^{-rk}`` (column moves) for the least
    ``|k|`` whose commutator the oracle accepts.
    """
    if isinstance(seed, ElementaryMatrix):
        n = seed.n
        found = {(seed.i, seed.j): seed.k}
    else:
        found = {tuple(p): Fraction(r) for p, r in seed.items()}
        n = h.n
    for (i, j), r in found.items():
        if r == 0 or r.denominator != 1 or not h.member(elementary(n, i, j, r)):
            raise PreconditionError(f"seed e_{{{i},{j}}}^{r} is not in the subgroup")
    found = {p: int(r) for p, r in found.items()}
    todo = deque(sorted(found))
    positions = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    while todo and len(found) < len(positions):
        i, j = todo.popleft()
        r = found[(i, j)]
        moves = [("row", (j, jp), (i, jp)) for jp in range(1, n + 1) if jp not in (i, j)]
        moves += [("column", (ip, i), (ip, j)) for ip in range(1, n + 1) if ip not in (i, j)]
        for kind, partner, tgt in moves:
            if tgt in found:
                continue
            for k in _signed(witness_budget):
                prod = elementary_commutator(ElementaryMatrix(n, i, j, r), ElementaryMatrix(n, *partner, k))
                if prod is None or (prod.i, prod.j) != tgt:
                    raise IdentityFailure("commutator formula produced an unexpected position")
                c = prod.matrix
                if h.member(c):
                    found[tgt] = int(prod.k)
                    todo.append(tgt)
                    if transcript is not None:
                        transcript.add(f"{kind}_propagation",
                                       {"from": [i, j, r], "partner": [partner[0], partner[1], k]},
                                       c, h, oracle_name)
                    break
    missing = [p for p in positions if p not in found]
    if missing:
        raise BudgetExhausted(f"no power of e_{{{missing[0][0]},{missing[0][1]}}} found within budget",
                              budget=witness_budget, position=missing[0])
    return dict(sorted(found.items()))


def tits_certificate(found: Dict[Position, int], n: int, oracle: Optional[SubgroupHandle] = None) -> bool:
    """Checkable hypothesis of the finite-index criterion.

    True when every off-diagonal position carries a nonzero integer exponent.
    With an oracle, each ``e_{i,j}^r`` is re-verified and a failure raises.
    """
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            r = found.get((i, j))
            if r is None or r == 0:
                return False
            if Fraction(r).denominator != 1:
                return False
            if oracle is not None and not oracle.member(elementary(n, i, j, r)):
                raise CertificateError(f"e_{{{i},{j}}}^{r} is not in the subgroup")
    return True


# ---------------------------------------------------------------------------
# full pipeline and replay

def run_pipeline(h: SubgroupHandle, search_budget: int = DEFAULT_SEARCH_BUDGET,
                 witness_budget: int = DEFAULT_WITNESS_BUDGET) -> DerivationTranscript:
    t = DerivationTranscript({"subgroup": h.to_json(), "search_budget": search_budget,
                              "witness_budget": witness_budget})
    delta, form = find_big_cell_element(h, search_budget, t)
    derived = derive_elementary(h, delta, form, witness_budget, t)
    H = derived.target
    name = "subgroup" if H is h else "transported"
    found = propagate(H, derived.elementary, witness_budget, t, name)
    ok = tits_certificate(found, h.n, H)
    t.add("tits_criterion", {"positions": len(found)}, None)
    t.outcome = {"tits_certificate": ok, "target": H.to_json(),
                 "found": {_pos_key(p): r for p, r in found.items()}}
    return t


def replay(doc) -> bool:
    """Re-run the pipeline from the embedded configuration and compare byte for byte."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    cfg = doc["config"]
    if "climb_start" in cfg:
        h = handle_from_json(cfg["subgroup"])
        _, fresh = climb_center(h, Matrix(cfg["climb_start"]), cfg["witness_budget"])
    else:
        fresh = run_pipeline(handle_from_json(cfg["subgroup"]), cfg["search_budget"], cfg["witness_budget"])
    if fresh.dumps() != json.dumps(doc, sort_keys=True, indent=1):
        raise CertificateError("transcript differs from a fresh run")
    oracles = {"subgroup": handle_from_json(cfg["subgroup"])}
    if "target" in doc.get("outcome", {}):
        oracles["transported"] = handle_from_json(doc["outcome"]["target"])
    for step in doc["steps"]:
        cert = step.get("certificate")
        if cert and not oracles[cert["oracle"]].member(Matrix(_fractions(step["produced"]))):
            raise CertificateError(f"step {step['rule']} does not re-verify")
    if "found" in doc.get("outcome", {}):
        found = {_parse_pos(p): r for p, r in doc["outcome"]["found"].items()}
        n = oracles["subgroup"].n
        if tits_certificate(found, n, oracles.get("transported", oracles["subgroup"])) != \
                doc["outcome"]["tits_certificate"]:
            raise CertificateError("finite-index certificate does not re-verify")
    return True


def _fractions(rows):
    return [[Fraction(x) for x in r] for r in rows]


# ---------------------------------------------------------------------------
# unitriangular groups: climbing to the center

def _is_central_unitriangular(x: Matrix) -> bool:
    s, n = x.scaled, x.rows
    return all(s[i][j] == 0 for i in range(n) for j in range(i + 1, n) if (i, j) != (0, n - 1))


def climb_center(h: SubgroupHandle, start: Matrix, witness_budget: int = DEFAULT_WITNESS_BUDGET
                 ) -> Tuple[Matrix, DerivationTranscript]:
    """A nontrivial central member reached by iterated commutators.

    A nontrivial entry of least depth at ``(i, j)`` is pushed to the last
    column by commuting with ``e_{j,n}^t``, or to the corner by ``e_{1,i}^t``
    when it already sits in the last column; ``t`` is the least exponent whose
    commutator the oracle accepts.
    """
    if not isinstance(h, UnitriangularOracle):
        raise PreconditionError("climb_center needs a unitriangular oracle")
    x = h.check_ambient(start)
    if x.is_identity():
        raise PreconditionError("start must be nontrivial")
    if not h.member(x):
        raise PreconditionError("start is not in the subgroup")
    n = x.rows
    t_ = DerivationTranscript({"subgroup": h.to_json(), "climb_start": _matrix_json(x),
                               "witness_budget": witness_budget})
    while not _is_central_unitriangular(x):
        s = x.scaled
        cands = [(j - i, i, j) for i in range(n) for j in range(i + 1, n)
                 if s[i][j] and (i, j) != (0, n - 1)]
        _, i, j = min(cands)
        pos = (j + 1, n) if j < n - 1 else (1, i + 1)
        for t in _signed(witness_budget):
            c = commutator(x, elementary(n, pos[0], pos[1], t))
            if not c.is_identity() and h.member(c):
                t_.add("center_climb", {"entry": [i + 1, j + 1], "partner": [pos[0], pos[1], t]}, c, h)
                x = c
                break
        else:
            raise BudgetExhausted(f"no commutator partner e_{{{pos[0]},{pos[1]}}}^t within budget",
                                  budget=witness_budget, position=pos)
    for i in range(1, n):
        g = elementary(n, i, i + 1, 1)
        if x @ g != g @ x:
            raise IdentityFailure("climb ended at a non-central element")
    t_.outcome = {"central": _matrix_json(x), "exponent": int(x[0, n - 1]) if n > 1 else 0}
    return x, t_
