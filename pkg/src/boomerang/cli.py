"""Command line entry point.

Every report is a JSON document with a ``schema_version``, the subcommand, the
fully resolved configuration (input data inlined, not just paths) and the
result.  ``replay`` re-runs a report's configuration and compares the result
byte for byte.

Exit codes: 0 success (a verdict was delivered), 1 precondition, parse or
certificate failure, 2 budget exhausted, 3 an identity that must hold failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import chevalley, derivation, dynamics, probe
from .errors import BoomerangError, BudgetExhausted, CertificateError, IdentityFailure, ParseError, \
    PreconditionError
from .linalg import Matrix, format_matrix, parse_matrices, parse_matrix
from .oracles import handle_from_json
from .roots import RootSystem, adjacent_base_path, cyclic_labels, highest_root, parse_type
from .sln import ElementaryMatrix, bruhat_decompose, elementary_commutator

SCHEMA_VERSION = 1


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise PreconditionError(f"cannot read {path}: {exc.strerror}") from None


def _load_json(path: str) -> dict:
    text = _read(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno, source=path) from None


def _triple(text: str):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ParseError(f"expected i,j,k but got {text!r}")
    try:
        return int(parts[0]), int(parts[1]), str(Fraction(parts[2]))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"expected i,j,k but got {text!r}") from None


def _mjson(m: Matrix):
    return [[str(x) for x in r] for r in m.tolist()]


# ---------------------------------------------------------------------------
# handlers: resolved config -> result

def run_bruhat(cfg):
    g = parse_matrix(cfg["matrix"], source="matrix")
    form = bruhat_decompose(g)
    return {"bruhat": form.to_json(), "text": form.to_text()}


def run_comm(cfg):
    if cfg.get("elementary"):
        n = cfg["n"]
        a, b = (ElementaryMatrix(n, i, j, Fraction(k)) for i, j, k in cfg["elementary"])
        c = elementary_commutator(a, b)
        return {"commutator": None if c is None else [c.i, c.j, str(c.k)],
                "matrix": _mjson((c.matrix if c else Matrix.identity(n)))}
    mats = parse_matrices(cfg["matrices"], source="matrices")
    if len(mats) != 2:
        raise PreconditionError(f"comm needs two matrices, got {len(mats)}")
    x, y = mats
    return {"matrix": _mjson(x @ y @ x.inverse() @ y.inverse())}


def run_roots(cfg):
    t, r = parse_type(cfg["system"])
    rs = RootSystem(t, r)
    base = rs.standard_base()
    out = rs.to_json()
    out["count"] = len(rs.roots)
    out["highest_root"] = list(highest_root(base))
    if cfg.get("path_word") is not None:
        end = rs.base_from_word(cfg["path_word"])
        out["path"] = [[list(a) for a in b.simple_roots] for b in adjacent_base_path(base, end)]
    if rs.rank == 2 and rs.type_label in ("B", "C", "G"):
        longs, shorts = cyclic_labels(rs)
        out["cyclic_labels"] = {"long": [list(x) for x in longs], "short": [list(x) for x in shorts]}
    return out


def run_chevalley(cfg):
    t, r = parse_type(cfg["system"])
    cb = chevalley.build_adjoint(t, r)
    ident = cfg["identity"]
    if ident == "telescoping":
        if t != "G" or len(cfg["k"] or []) != 6 or cfg["l"] is None:
            raise PreconditionError("telescoping needs --type G2, six values in --k and --l")
        return _jsonable(chevalley.g2_telescoping(cfg["k"], cfg["l"], cb).to_json())
    if ident == "b2":
        if t != "B" or len(cfg["k"] or []) != 2 or cfg["l"] is None:
            raise PreconditionError("b2 needs --type B2, two values in --k and --l")
        return _jsonable(chevalley.verify_b2_identity(cfg["k"][0], cfg["k"][1], cfg["l"], cb).to_json())
    if ident == "g2-commutator":
        if t != "G" or len(cfg["k"] or []) != 1 or cfg["l"] is None:
            raise PreconditionError("g2-commutator needs --type G2, one value in --k, --l and --i")
        return _jsonable(chevalley.verify_g2_commutator(cfg["i"], cfg["k"][0], cfg["l"], cb).to_json())
    rng = cfg["range"]
    ks = [k for k in range(-rng, rng + 1) if k]
    checked = 0
    constants = {}
    for a in cb.system.roots:
        for b in cb.system.roots:
            if a == b or all(x == -y for x, y in zip(a, b)):
                continue
            consts = chevalley.commutator_constants(cb, a, b)
            if consts:
                constants[f"{list(a)} {list(b)}"] = [[i, j, c] for i, j, _, c in consts]
            for k in ks:
                for l in ks:
                    chevalley.commutator_expand(cb, a, k, b, l)
                    checked += 1
    return _jsonable({"system": cb.system.name, "dimension": cb.dim, "expansions_checked": checked,
                      "exact_match": True, "nonzero_constants": constants})


def _jsonable(x):
    return json.loads(json.dumps(x, default=str))


def run_probe(cfg):
    h = handle_from_json(cfg["subgroup"])
    bounds = probe.ProbeBounds(cfg["max_exponent"], cfg["ball_radius"])
    gamma = h.parse_element(cfg["direction"])
    mode = cfg["mode"]
    if mode == "normalizer":
        rep = probe.normalizer_power(h, gamma, bounds)
    elif mode == "env":
        rep = probe.env_witnesses(h, gamma, [h.parse_element(f) for f in cfg["probe_set"]], bounds)
    else:
        rep = probe.direction_report(h, gamma, bounds)
    return rep.to_json()


def run_derive(cfg):
    h = handle_from_json(cfg["subgroup"])
    if cfg.get("climb_start") is not None:
        _, t = derivation.climb_center(h, Matrix([[Fraction(x) for x in r] for r in cfg["climb_start"]]),
                                       cfg["witness_budget"])
    else:
        t = derivation.run_pipeline(h, cfg["search_budget"], cfg["witness_budget"])
    return t.to_json()


def run_proximal(cfg):
    g = parse_matrix(cfg["matrix"], source="matrix")
    tol = cfg["tol"]
    data = dynamics.proximal_analyze(g, tol)
    out = {"proximal": data is not None, "data": None if data is None else data.to_json()}
    if cfg.get("fix_gens") is not None:
        gens = parse_matrices(cfg["fix_gens"], source="fix-gens")
        cert = dynamics.fixed_point_obstruction(gens, g, cfg["point"], tol)
        out["obstruction"] = None if cert is None else cert.to_json()
    return out


HANDLERS = {"bruhat": run_bruhat, "comm": run_comm, "roots": run_roots, "chevalley": run_chevalley,
            "probe": run_probe, "derive": run_derive, "proximal": run_proximal}


def _report(command, cfg):
    return {"schema_version": SCHEMA_VERSION, "command": command, "config": cfg,
            "result": HANDLERS[command](cfg)}


def _dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1)


def run_replay(doc):
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise CertificateError(f"unsupported schema_version {doc.get('schema_version')!r}")
    fresh = _report(doc["command"], doc["config"])
    if _dumps(fresh) != _dumps(doc):
        raise CertificateError("report differs from a fresh run")
    res = doc["result"]
    if doc["command"] == "probe":
        probe.replay(res)
    elif doc["command"] == "derive":
        derivation.replay(res)
    elif doc["command"] == "proximal" and res.get("obstruction"):
        dynamics.replay_obstruction(res["obstruction"])
    return {"replayed": doc["command"], "identical": True}


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boomerang", description="Exact commutator calculus and subgroup probes.")
    p.add_argument("--json", action="store_true", help="emit the JSON report")
    p.add_argument("--output", help="also write the JSON report to this file")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("bruhat", help="Bruhat decomposition of a matrix in SL_n(Q)")
    s.add_argument("--matrix", required=True)

    s = sub.add_parser("comm", help="commutators of elementary matrices or of two matrices")
    s.add_argument("--n", type=int)
    s.add_argument("--elementary", nargs=2, metavar="I,J,K")
    s.add_argument("--matrices", help="file with two matrix blocks")

    s = sub.add_parser("roots", help="enumerate a root system")
    s.add_argument("system", help="e.g. A2, B2, G2, F4")
    s.add_argument("--path-word", help="comma separated simple reflections; prints an adjacent path")

    s = sub.add_parser("chevalley", help="Chevalley group identities")
    s.add_argument("action", choices=["verify"])
    s.add_argument("--type", "--system", dest="system", default="G2")
    s.add_argument("--identity", choices=["commutator", "b2", "g2-commutator", "telescoping"],
                   default="commutator")
    s.add_argument("--k", help="comma separated integers")
    s.add_argument("--l", type=int)
    s.add_argument("--i", type=int, default=0)
    s.add_argument("--range", type=int, default=3)

    s = sub.add_parser("probe", help="recurrence probe along a direction")
    s.add_argument("--subgroup", required=True)
    s.add_argument("--direction", required=True, help="word, or path to a matrix file")
    s.add_argument("--max-exponent", type=int, default=64)
    s.add_argument("--ball-radius", type=int, default=3)
    s.add_argument("--mode", choices=["report", "normalizer", "env"], default="report")
    s.add_argument("--probe-set", help="JSON list of elements (env mode)")

    s = sub.add_parser("derive", help="derive elementary matrices and a finite-index certificate")
    s.add_argument("--subgroup")
    s.add_argument("--budget", type=int, default=derivation.DEFAULT_WITNESS_BUDGET)
    s.add_argument("--search-budget", type=int, default=derivation.DEFAULT_SEARCH_BUDGET)
    s.add_argument("--climb-start", help="matrix file; climb to the center of U_n instead")
    s.add_argument("--replay", help="re-verify a transcript or report")

    s = sub.add_parser("proximal", help="proximality analysis and fixed-point obstruction")
    s.add_argument("--matrix", required=True)
    s.add_argument("--tol", type=float, default=dynamics.DEFAULT_TOL)
    s.add_argument("--fix-gens", help="matrix file with generators fixing --point")
    s.add_argument("--point", help="comma separated coordinates")

    s = sub.add_parser("replay", help="re-verify any report")
    s.add_argument("report")
    return p


def resolve(args) -> dict:
    c = args.command
    if c == "bruhat":
        return {"matrix": _read(args.matrix)}
    if c == "comm":
        if args.elementary:
            if args.n is None:
                raise PreconditionError("--elementary needs --n")
            return {"n": args.n, "elementary": [list(_triple(t)) for t in args.elementary]}
        if not args.matrices:
            raise PreconditionError("comm needs --elementary or --matrices")
        return {"matrices": _read(args.matrices)}
    if c == "roots":
        word = None
        if args.path_word is not None:
            try:
                word = [int(x) for x in args.path_word.split(",") if x.strip()]
            except ValueError:
                raise ParseError(f"bad --path-word {args.path_word!r}") from None
        return {"system": args.system, "path_word": word}
    if c == "chevalley":
        ks = None
        if args.k:
            try:
                ks = [int(x) for x in args.k.split(",")]
            except ValueError:
                raise ParseError(f"bad --k {args.k!r}") from None
        return {"system": args.system, "identity": args.identity, "k": ks, "l": args.l, "i": args.i,
                "range": args.range}
    if c == "probe":
        sub = _load_json(args.subgroup)
        direction = args.direction
        if sub.get("variant") != "free":
            direction = [[str(x) for x in r] for r in parse_matrix(_read(direction), source=direction).tolist()]
        probe_set = None
        if args.probe_set:
            probe_set = json.loads(args.probe_set)
        return {"subgroup": sub, "direction": direction, "max_exponent": args.max_exponent,
                "ball_radius": args.ball_radius, "mode": args.mode, "probe_set": probe_set}
    if c == "derive":
        if not args.subgroup:
            raise PreconditionError("derive needs --subgroup (or --replay)")
        start = None
        if args.climb_start:
            start = [[str(x) for x in r] for r in parse_matrix(_read(args.climb_start)).tolist()]
        return {"subgroup": _load_json(args.subgroup), "witness_budget": args.budget,
                "search_budget": args.search_budget, "climb_start": start}
    if c == "proximal":
        cfg = {"matrix": _read(args.matrix), "tol": args.tol, "fix_gens": None, "point": None}
        if args.fix_gens:
            if not args.point:
                raise PreconditionError("--fix-gens needs --point")
            cfg["fix_gens"] = _read(args.fix_gens)
            try:
                cfg["point"] = [float(Fraction(x)) for x in args.point.split(",")]
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"bad point {args.point!r}") from None
        return cfg
    raise PreconditionError(f"unknown command {c}")


def _human(doc) -> str:
    res = doc.get("result", doc)
    cmd = doc.get("command")
    if cmd == "bruhat":
        return res["text"]
    if cmd == "probe":
        v = res["verdict"]
        return f"verdict: {v['kind']}" + (f" n={v['n']}" if "n" in v else "") + \
            (f" witnesses={v['witnesses']}" if "witnesses" in v else "") + \
            f" (bounds {res['bounds']})"
    if cmd == "derive":
        out = res["outcome"]
        if "found" in out:
            return f"tits_certificate: {out['tits_certificate']}\nexponents: {out['found']}"
        return f"central element exponent: {out['exponent']}"
    return json.dumps(res, indent=1, sort_keys=True, default=str)


def _emit(doc, args):
    text = _dumps(doc)
    if args.output:
        Path(args.output).write_text(text + "\n")
    print(text if args.json else _human(doc))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay" or (args.command == "derive" and args.replay):
            path = args.report if args.command == "replay" else args.replay
            doc = _load_json(path)
            if "command" not in doc:
                derivation.replay(doc)
                result = {"replayed": "transcript", "identical": True}
            else:
                result = run_replay(doc)
            _emit({"schema_version": SCHEMA_VERSION, "command": "replay", "config": {"report": path},
                   "result": result}, args)
            return 0
        cfg = resolve(args)
        _emit(_report(args.command, cfg), args)
        return 0
    except BudgetExhausted as exc:
        _error("budget", exc, details={k: str(v) for k, v in exc.details.items()})
        return 2
    except ParseError as exc:
        _error("parse", exc, details={"line": exc.line, "column": exc.column, "source": exc.source})
        return 1
    except (PreconditionError, CertificateError) as exc:
        _error("precondition" if isinstance(exc, PreconditionError) else "certificate", exc)
        return 1
    except IdentityFailure as exc:
        _error("identity", exc)
        return 3


def _error(kind, exc, details=None):
    doc = {"schema_version": SCHEMA_VERSION, "error": kind, "message": str(exc)}
    if details:
        doc.update(details)
    print(json.dumps(doc), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
