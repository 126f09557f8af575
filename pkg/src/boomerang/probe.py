"""Bounded search for recurrence evidence along a direction.

Only positive evidence is ever reported.  ``no_witness_up_to_bound`` carries
the bounds that were used and the refuting memberships for every exponent; it
is a statement about the search, not about the subgroup.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

from .errors import CertificateError, PreconditionError
from .oracles import CongruenceOracle, FreeSubgroup, SubgroupHandle, _mulmod, handle_from_json

NORMALIZING = "normalizing_power"
ENV = "env_witnesses"
NONE = "no_witness_up_to_bound"


@dataclass(frozen=True)
class ProbeBounds:
    max_exponent: int = 64
    ball_radius: int = 3

    def __post_init__(self):
        if self.max_exponent < 1 or self.ball_radius < 1:
            raise PreconditionError("probe bounds must be >= 1")

    def to_json(self):
        return {"max_exponent": self.max_exponent, "ball_radius": self.ball_radius}


@dataclass
class WitnessReport:
    subgroup: dict
    direction: object
    kind: str
    bounds: ProbeBounds
    witnesses: List[int]
    probed: list
    certificates: list
    transcript: list

    @property
    def normalizing_power(self) -> Optional[int]:
        return self.witnesses[0] if self.kind == NORMALIZING else None

    @property
    def verdict(self) -> dict:
        if self.kind == NORMALIZING:
            return {"kind": NORMALIZING, "n": self.witnesses[0]}
        if self.kind == ENV:
            return {"kind": ENV, "witnesses": list(self.witnesses)}
        return {"kind": NONE}

    def to_json(self) -> dict:
        return {"subgroup": self.subgroup, "direction": self.direction, "verdict": self.verdict,
                "bounds": self.bounds.to_json(), "probed_set": self.probed,
                "certificates": self.certificates, "transcript": self.transcript}


# ---------------------------------------------------------------------------
# normalizer checks, both inclusions

def _normalizer_evidence(h: SubgroupHandle, g, ginv) -> Optional[dict]:
    """Evidence that ``g D g^-1 = D``, or None when it fails."""
    if isinstance(h, CongruenceOracle):
        n, m = h.n, h.m
        gm, gi = g.mod(m), ginv.mod(m)
        fwd, bwd = [], []
        for x in h._gens:
            a = _mulmod(_mulmod(gm, x, n, m), gi, n, m)
            b = _mulmod(_mulmod(gi, x, n, m), gm, n, m)
            if a not in h.closure or b not in h.closure:
                return None
            fwd.append(list(a))
            bwd.append(list(b))
        return {"method": "image", "modulus": m, "forward": fwd, "backward": bwd}
    gens = h.sample_generators() if isinstance(h, FreeSubgroup) else None
    if gens is None:
        if not h.normalized_by(g):
            return None
        return {"method": "equality"}
    fwd, bwd = [], []
    for x in gens:
        a = h.mul(h.mul(g, x), ginv)
        b = h.mul(h.mul(ginv, x), g)
        if not (h.member(a) and h.member(b)):
            return None
        fwd.append(h.evidence(a))
        bwd.append(h.evidence(b))
    if not h.equals(h.conjugate(g)):
        raise CertificateError("generator checks and automaton equality disagree")
    return {"method": "automaton", "forward": fwd, "backward": bwd}


def _check_direction(h: SubgroupHandle, gamma):
    return h.check_ambient(gamma)


def normalizer_power(h: SubgroupHandle, gamma, bounds: ProbeBounds = ProbeBounds()) -> WitnessReport:
    """Least ``n <= max_exponent`` with ``gamma^n D gamma^-n = D``."""
    gamma = _check_direction(h, gamma)
    ginv = h.inv(gamma)
    g, gi = gamma, ginv
    transcript = []
    for n in range(1, bounds.max_exponent + 1):
        ev = _normalizer_evidence(h, g, gi)
        if ev is not None:
            ev = dict(n=n, **ev)
            return WitnessReport(h.to_json(), h.element_json(gamma), NORMALIZING, bounds, [n],
                                 [], [ev], transcript)
        transcript.append({"n": n, "normalizes": False})
        g, gi = h.mul(g, gamma), h.mul(gi, ginv)
    return WitnessReport(h.to_json(), h.element_json(gamma), NONE, bounds, [], [], [], transcript)


def env_witnesses(h: SubgroupHandle, gamma, F: Sequence, bounds: ProbeBounds = ProbeBounds()) -> WitnessReport:
    """All ``n <= max_exponent`` with ``gamma^n f gamma^-n`` in D for every f in F."""
    gamma = _check_direction(h, gamma)
    F = [h.check_ambient(f) for f in F]
    for idx, f in enumerate(F):
        if not h.member(f):
            raise PreconditionError(f"probe element #{idx} is not in the subgroup")
    ginv = h.inv(gamma)
    g, gi = gamma, ginv
    witnesses, certs, transcript = [], [], []
    for n in range(1, bounds.max_exponent + 1):
        evidence, failed = [], None
        for idx, f in enumerate(F):
            c = h.mul(h.mul(g, f), gi)
            if not h.member(c):
                failed = {"n": n, "f_index": idx, "conjugate": h.element_json(c)}
                break
            evidence.append(h.evidence(c))
        if failed is None:
            witnesses.append(n)
            certs.append({"n": n, "members": evidence})
        else:
            transcript.append(failed)
        g, gi = h.mul(g, gamma), h.mul(gi, ginv)
    kind = ENV if witnesses else NONE
    return WitnessReport(h.to_json(), h.element_json(gamma), kind, bounds, witnesses,
                         [h.element_json(f) for f in F], certs, transcript)


def ball(h: SubgroupHandle, radius: int) -> list:
    """Nontrivial products of at most ``radius`` sample generators (and inverses)."""
    gens = list(h.sample_generators())
    letters = []
    for x in gens:
        for y in (x, h.inv(x)):
            if y not in letters:
                letters.append(y)
    one = h.identity()
    seen = [one]
    keys = {_key(one)}
    frontier = [one]
    for _ in range(radius):
        nxt = []
        for x in frontier:
            for y in letters:
                z = h.mul(x, y)
                k = _key(z)
                if k not in keys:
                    keys.add(k)
                    seen.append(z)
                    nxt.append(z)
        frontier = nxt
    return seen[1:]


def _key(x):
    return x if isinstance(x, str) else (x.scaled, x.denominator)


def direction_report(h: SubgroupHandle, gamma, bounds: ProbeBounds = ProbeBounds()) -> WitnessReport:
    """Normalizing power if one exists within bounds, else Env witnesses over a ball."""
    rep = normalizer_power(h, gamma, bounds)
    if rep.kind == NORMALIZING:
        return rep
    env = env_witnesses(h, gamma, ball(h, bounds.ball_radius), bounds)
    env.transcript = rep.transcript + env.transcript
    return env


def replay(doc: dict) -> bool:
    """Recompute a serialized report from its embedded inputs and compare."""
    h = handle_from_json(doc["subgroup"])
    bounds = ProbeBounds(**doc["bounds"])
    gamma = h.parse_element(doc["direction"])
    if not doc["probed_set"] and doc["verdict"]["kind"] != ENV:
        fresh = normalizer_power(h, gamma, bounds)
    else:
        fresh = env_witnesses(h, gamma, [h.parse_element(f) for f in doc["probed_set"]], bounds)
        if doc["transcript"] and "normalizes" in doc["transcript"][0]:
            fresh.transcript = normalizer_power(h, gamma, bounds).transcript + fresh.transcript
    if fresh.to_json() != doc:
        raise CertificateError("report does not match a fresh run")
    for cert in fresh.certificates:
        for ev in cert.get("members", []):
            if not h.member(h.parse_element(ev["element"])):
                raise CertificateError(f"certificate for n={cert['n']} does not verify")
    return True
