"""Command-line front end.

Exit codes: 0 success, 1 budget exhausted (partial output), 2 a mathematical
check failed, 64 bad usage or input.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from typing import Optional

from . import __version__
from .cover import CoverError, exchange_matrix_rule, lifted_seeds, orbit_mutate, validate_cover
from .explorer import BudgetExceeded, expansions_in, explore, export, monomial_rank_check, verify_structure
from .frieze import (
    FriezeError,
    FriezeSpec,
    Staircase,
    check_mesh,
    check_sl2,
    extend,
    positivity,
    required_levels,
    verify_closed_formula,
)
from .gluing import UnsupportedSurface, initial_triangulation
from .hyperbolic import run_all
from .laurent import NonExactDivision, VarRegistry
from .seed import mutate, preset_seed
from .surface import (
    InvalidSignature,
    SurfaceSignature,
    count_quasi_arcs_closed_form,
    is_finite_type,
    parse_preset,
    rank,
)

OK, PARTIAL, VIOLATION, USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    surface: Optional[SurfaceSignature]
    surface_text: str
    max_seeds: int
    fmt: str
    rng_seed: int
    tolerance: float
    mode: str
    threads: int
    args: argparse.Namespace


def _surface(args) -> tuple[Optional[SurfaceSignature], str]:
    preset = getattr(args, "surface", None)
    path = getattr(args, "surface_json", None)
    if preset and path:
        raise UsageError("--surface and --surface-json are mutually exclusive")
    try:
        if preset:
            s = parse_preset(preset)
            return s, s.describe()
        if path:
            with open(path, encoding="utf-8") as fh:
                s = SurfaceSignature.from_json(fh.read())
            return s, s.describe()
    except (InvalidSignature, OSError, json.JSONDecodeError) as exc:
        raise UsageError(str(exc)) from None
    return None, "none"


class Out:
    def __init__(self, cfg: RunConfig, stream):
        self.cfg, self.stream = cfg, stream

    def header(self):
        self.line(f"# quasicluster {__version__} surface={self.cfg.surface_text} rng_seed={self.cfg.rng_seed}")

    def line(self, text: str = ""):
        self.stream.write(text + "\n")

    def json(self, doc):
        doc = {"version": __version__, "surface": self.cfg.surface_text, "rng_seed": self.cfg.rng_seed, **doc}
        self.line(json.dumps(doc, sort_keys=True, indent=1))


def _need_surface(cfg: RunConfig) -> SurfaceSignature:
    if cfg.surface is None:
        raise UsageError(f"{cfg.command} needs --surface or --surface-json")
    return cfg.surface


def _seed(cfg: RunConfig):
    try:
        return preset_seed(_need_surface(cfg))
    except UnsupportedSurface as exc:
        raise UsageError(str(exc)) from None


def _explore(cfg: RunConfig, arcs_only: bool):
    S0, namer = _seed(cfg)
    return explore(S0, max_seeds=cfg.max_seeds, arcs_only=arcs_only, namer=namer, threads=cfg.threads), S0, namer


def _names(G) -> dict[str, str]:
    """Preferred display label of each catalogue variable."""
    out: dict[str, str] = {}
    for seed in G.vertices.values():
        for label, p in sorted(seed.vars.items()):
            out.setdefault(p.serialize(), label)
    return out


def _regular_text(report) -> str:
    if report["regular"]:
        return f"yes({report['degree']})"
    degs = ",".join(f"{d}:{n}" for d, n in report["degrees"].items())
    return f"no(degrees {degs})"


def cmd_explore(cfg: RunConfig, out: Out) -> int:
    s = _need_surface(cfg)
    code = OK
    try:
        G, _, _ = _explore(cfg, cfg.args.arcs_only)
    except BudgetExceeded as exc:
        G, code = exc.graph, PARTIAL
    report = verify_structure(G, s)
    if report["failures"] and code == OK:
        code = VIOLATION
    if cfg.args.export:
        fmt = "dot" if cfg.args.export.endswith(".dot") else "json"
        with open(cfg.args.export, "wb") as fh:
            fh.write(export(G, fmt, seeds=cfg.args.with_seeds))
    if cfg.fmt == "json":
        out.json({"command": "explore", "arcs_only": cfg.args.arcs_only, "report": report})
        return code
    if cfg.fmt == "dot":
        out.stream.write(export(G, "dot").decode())
        return code
    out.header()
    out.line(f"vertices: {report['vertices']}, variables: {report['variables']}, regular: {_regular_text(report)}")
    out.line(f"edges: {report['edges']}")
    if code == PARTIAL:
        out.line(f"partial: seed budget of {cfg.max_seeds} exhausted")
    closed = report["closed_form"]
    if closed:
        verdict = {True: "match", False: "MISMATCH", None: "not checked"}[report["catalogue_matches_closed_form"]]
        out.line(f"finite type: quasi-arcs {closed[0]}, arcs {closed[1]} ({verdict})")
    else:
        out.line("finite type: no")
    out.line(f"positive coefficients: {'yes' if report['positive'] else 'no'}")
    if code == PARTIAL:
        out.line("structure checks skipped on a partial graph")
    else:
        for f in report["failures"]:
            out.line(f"failure: {f}")
    return code


def cmd_variables(cfg: RunConfig, out: Out) -> int:
    _need_surface(cfg)
    try:
        G, S0, _ = _explore(cfg, False)
    except BudgetExceeded:
        out.header()
        out.line(f"partial: seed budget of {cfg.max_seeds} exhausted")
        return PARTIAL
    names = _names(G)
    target = cfg.args.target
    if target:
        want = sorted(t.strip() for t in target.split(","))
        keys = [k for k, seed in G.vertices.items() if sorted(seed.vars) == want]
        if not keys:
            raise UsageError(f"no quasi-cluster carries the labels {','.join(want)}")
        key = keys[0]
    else:
        key = S0.key
    expanded = expansions_in(G, key)
    rows = sorted((names[text], poly.serialize()) for text, poly in expanded.items())
    if cfg.fmt == "json":
        out.json({"command": "variables", "cluster": sorted(G.vertices[key].vars), "variables": dict(rows)})
        return OK
    out.header()
    out.line(f"cluster: {', '.join(sorted(G.vertices[key].vars))}")
    for name, text in rows:
        out.line(f"{name} = {text}")
    return OK


def cmd_flip(cfg: RunConfig, out: Out) -> int:
    S, namer = _seed(cfg)
    steps = []
    for t in [x.strip() for x in cfg.args.seq.split(",") if x.strip()]:
        if t not in S.vars:
            raise UsageError(f"{t!r} is not in the current quasi-cluster {sorted(S.vars)}")
        try:
            S2 = mutate(S, t, namer=namer)
        except NonExactDivision as exc:
            out.header()
            out.line(f"failure: Laurent property violated at {t}: {exc}")
            return VIOLATION
        new = next(l for l in S2.vars if l not in S.vars)
        steps.append({"mutated": t, "new": new, "value": S2.vars[new].serialize(), "cluster": sorted(S2.vars)})
        S = S2
    if cfg.fmt == "json":
        out.json({"command": "flip", "steps": steps})
        return OK
    out.header()
    for st in steps:
        out.line(f"{st['mutated']} -> {st['new']} = {st['value']}")
    out.line(f"cluster: {', '.join(sorted(S.vars))}")
    return OK


def cmd_cover(cfg: RunConfig, out: Out) -> int:
    s = _need_surface(cfg)
    if s.orientable:
        if cfg.fmt == "json":
            out.json({"command": "cover", "trivial": True, "passed": True})
        else:
            out.header()
            out.line("orientable surface: the double cover is two disjoint copies")
        return OK
    try:
        T = initial_triangulation(s)
    except UnsupportedSurface as exc:
        raise UsageError(str(exc)) from None
    try:
        C, base, total = lifted_seeds(s, T)
    except CoverError as exc:
        out.header()
        out.line(f"failure: {exc}")
        return VIOLATION
    problems = validate_cover(C)
    orbit = []
    rules = []
    for t in sorted(base.vars):
        r = orbit_mutate(C, t, base, total)
        orbit.append(r.report)
        if T.is_mutable(t):
            rules.append(exchange_matrix_rule(C, base, t))
    mutable_ok = all(r["ok"] for r in orbit if r["mutable"])
    immutable_caught = all(not r["ok"] for r in orbit if not r["mutable"])
    ok = not problems and mutable_ok and immutable_caught and all(r["ok"] for r in rules)
    doc = {
        "command": "cover",
        "total_surface": C.total_signature.describe(),
        "total_arcs": len(C.total.arcs()),
        "problems": problems,
        "orbit": orbit,
        "exchange_matrix": rules,
        "passed": ok,
    }
    if cfg.fmt == "json":
        out.json(doc)
        return OK if ok else VIOLATION
    out.header()
    out.line(f"total surface: {doc['total_surface']}, arcs: {doc['total_arcs']}")
    out.line(f"cover valid: {'yes' if not problems else 'no'}")
    for p in problems:
        out.line(f"failure: {p}")
    for r in orbit:
        state = "ok" if r["ok"] else ("not mutable, lifts do not commute" if not r["mutable"] else "FAILED")
        out.line(f"orbit mutation at {r['arc']}: {state}")
    for r in rules:
        out.line(f"matrix rule at {r['arc']}: {'ok' if r['ok'] else 'FAILED'} ({r['rhs_matrix']})")
    return OK if ok else VIOLATION


def cmd_frieze(cfg: RunConfig, out: Out) -> int:
    a = cfg.args
    p, q, eps = a.p, a.q, a.epsilon
    try:
        window = tuple(int(x) for x in a.window.split(","))
        if len(window) != 4:
            raise ValueError
    except ValueError:
        raise UsageError("--window takes i_min,i_max,j_min,j_max") from None
    levels = required_levels(FriezeSpec.coefficient_free(p, q, eps), 0, 0, window)
    k_levels = range(0, max(a.k_max, 2))
    levels = range(min(levels.start, 0), max(levels.stop, k_levels.stop))
    if cfg.mode == "symbolic":
        names = [f"u_{l}" if l >= 0 else f"u_m{-l}" for l in levels] + [f"w_{l}" if l >= 0 else f"w_m{-l}" for l in levels]
        if not a.coefficient_free:
            names += [f"b{t}" for t in range(p)] + [f"c{t}" for t in range(q)]
        reg = VarRegistry(names)
        stair = Staircase.generic(0, 0, levels, reg)
        if a.coefficient_free:
            spec = FriezeSpec.coefficient_free(p, q, eps)
        else:
            g = reg.gens()
            spec = FriezeSpec(p, q, eps, [g[f"b{t}"] for t in range(p)], [g[f"c{t}"] for t in range(q)])
    else:
        rnd = random.Random(cfg.rng_seed)
        if a.staircase == "ones":
            stair = Staircase.constant(0, 0, levels, 1)
        else:
            stair = Staircase.from_function(0, 0, levels, lambda l: rnd.randint(1, 9), lambda l: rnd.randint(1, 9))
        if a.coefficient_free:
            spec = FriezeSpec.coefficient_free(p, q, eps)
        else:
            spec = FriezeSpec(p, q, eps, [rnd.randint(1, 9) for _ in range(p)], [rnd.randint(1, 9) for _ in range(q)])
        if a.float:
            stair = Staircase(0, 0, {l: float(v) for l, v in stair.upper.items()}, {l: float(v) for l, v in stair.lower.items()})
    try:
        grid = extend(spec, stair, window)
        mesh = check_mesh(grid)
        sl2 = check_sl2(grid) if spec.is_coefficient_free else None
        pos = positivity(grid)
        closed = verify_closed_formula(spec, stair, a.k_max) if a.k_max >= 2 else None
    except (FriezeError, NonExactDivision, ZeroDivisionError) as exc:
        out.header()
        out.line(f"failure: {exc}")
        return VIOLATION
    ok = mesh["passed"] and (sl2 is None or sl2["passed"]) and (closed is None or closed["passed"])
    if cfg.fmt == "csv":
        out.header()
        out.stream.write(grid.to_csv())
        return OK if ok else VIOLATION
    if cfg.fmt == "json":
        out.json(
            {
                "command": "frieze",
                "grid": json.loads(grid.to_json()),
                "mesh": mesh,
                "sl2": sl2,
                "positivity": {k: v for k, v in pos.items() if k != "non_positive"} | {"non_positive": [list(c) for c in pos["non_positive"]]},
                "closed_formula": closed,
            }
        )
        return OK if ok else VIOLATION
    out.header()
    out.line(f"window: i {window[0]}..{window[1]}, j {window[2]}..{window[3]}, epsilon {eps}, mode {cfg.mode}")
    for row in grid.matrix():
        out.line(" ".join(row))
    out.line(f"mesh relations: {mesh['squares'] - mesh['violations']}/{mesh['squares']}")
    if sl2 is not None:
        out.line(f"unit determinants: {sl2['squares'] - sl2['violations']}/{sl2['squares']}")
    out.line(f"positive: {'yes' if pos['passed'] else 'no'}")
    if closed is not None:
        for r in closed["rows"]:
            extra = "" if "path_independent" not in r else f", path independent: {'yes' if r['path_independent'] else 'no'}"
            out.line(f"X_{r['k']}: {'match' if r['match'] else 'MISMATCH'}{extra}")
    return OK if ok else VIOLATION


def cmd_verify(cfg: RunConfig, out: Out) -> int:
    reports = run_all(cfg.rng_seed, cfg.args.samples, cfg.tolerance)
    ok = all(r["passed"] for r in reports)
    if cfg.fmt == "json":
        out.json({"command": "verify", "suites": reports, "passed": ok})
        return OK if ok else VIOLATION
    out.header()
    for r in reports:
        out.line(
            f"{r['identity']}: {'pass' if r['passed'] else 'FAIL'} (samples={r['samples']}, "
            f"max_rel_error={r['max_rel_error']:.3e}, failures={r['failures']}, excluded={r['excluded']}, "
            f"rng_seed={r['rng_seed']})"
        )
    return OK if ok else VIOLATION


def cmd_classify(cfg: RunConfig, out: Out) -> int:
    s = _need_surface(cfg)
    closed = count_quasi_arcs_closed_form(s)
    if cfg.fmt == "json":
        out.json({"command": "classify", "rank": rank(s), "finite_type": is_finite_type(s), "counts": closed})
        return OK
    out.header()
    if closed:
        out.line(f"finite type; quasi-arcs: {closed[0]}; arcs: {closed[1]}")
    else:
        out.line("infinite type")
    out.line(f"rank: {rank(s)}")
    return OK


def cmd_basis(cfg: RunConfig, out: Out) -> int:
    _need_surface(cfg)
    try:
        G, _, _ = _explore(cfg, False)
    except BudgetExceeded:
        out.header()
        out.line(f"partial: seed budget of {cfg.max_seeds} exhausted")
        return PARTIAL
    d = cfg.args.max_degree
    rep = monomial_rank_check(G, d, rng_seed=cfg.rng_seed, oversample=cfg.args.oversample)
    dup = monomial_rank_check(G, d, rng_seed=cfg.rng_seed, oversample=cfg.args.oversample, duplicate=True)
    ok = rep["full_rank"] and not dup["full_rank"]
    if cfg.fmt == "json":
        out.json({"command": "basis", "check": rep, "duplicate_check": dup, "passed": ok})
        return OK if ok else VIOLATION
    out.header()
    out.line(f"monomials up to degree {d}: {rep['monomials']}, evaluation points: {rep['trials']}")
    out.line(f"rank: {rep['rank']} ({'full' if rep['full_rank'] else 'DEFICIENT'})")
    out.line(f"duplicate column detected: {'yes' if not dup['full_rank'] else 'NO'}")
    return OK if ok else VIOLATION


COMMANDS = {
    "explore": cmd_explore,
    "variables": cmd_variables,
    "flip": cmd_flip,
    "cover": cmd_cover,
    "frieze": cmd_frieze,
    "verify": cmd_verify,
    "classify": cmd_classify,
    "basis": cmd_basis,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--surface", help="preset: disc:b, moebius:n or annulus:p,q")
    src.add_argument("--surface-json", help="path to a surface signature JSON file")
    common.add_argument("--max-seeds", type=int, default=100_000)
    common.add_argument("--format", dest="fmt", choices=["text", "json", "dot", "csv"], default="text")
    common.add_argument("--seed", dest="rng_seed", type=int, default=0, help="random seed")
    common.add_argument("--tolerance", type=float, default=1e-9)
    common.add_argument("--mode", choices=["symbolic", "numeric"], default="numeric")
    common.add_argument("--threads", type=int, default=1)

    parser = _Parser(prog="quasicluster", description="Quasi-cluster algebras of marked surfaces.")
    parser.add_argument("--version", action="version", version=f"quasicluster {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("explore", parents=[common], help="enumerate the quasi-exchange graph")
    p.add_argument("--arcs-only", action="store_true")
    p.add_argument("--export", help="write the graph to a .json or .dot file")
    p.add_argument("--with-seeds", action="store_true", help="embed full seeds in the JSON export")

    p = sub.add_parser("variables", parents=[common], help="list every variable expanded in one quasi-cluster")
    p.add_argument("--target", help="comma-separated labels of the quasi-cluster (default: initial)")

    p = sub.add_parser("flip", parents=[common], help="apply a sequence of quasi-mutations")
    p.add_argument("--seq", required=True, help="comma-separated labels")

    sub.add_parser("cover", parents=[common], help="build and check the orientation double cover")

    p = sub.add_parser("frieze", parents=[common], help="frieze grid, determinant and closed-formula checks")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--epsilon", type=int, choices=[1, -1], default=1)
    p.add_argument("--window", default="0,9,0,9")
    p.add_argument("--staircase", choices=["ones", "random"], default="ones")
    p.add_argument("--coefficient-free", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--float", action="store_true", help="use floating point values in numeric mode")
    p.add_argument("--k-max", type=int, default=6)

    p = sub.add_parser("verify", parents=[common], help="run the hyperbolic identity suites")
    p.add_argument("--samples", type=int, default=1000)

    sub.add_parser("classify", parents=[common], help="finite-type verdict and closed-form counts")

    p = sub.add_parser("basis", parents=[common], help="probabilistic independence of quasi-cluster monomials")
    p.add_argument("--max-degree", type=int, default=3)
    p.add_argument("--oversample", type=int, default=3)
    return parser


def main(argv: list[str] | None = None, stream=None) -> int:
    stream = stream or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        surface, text = _surface(args)
        cfg = RunConfig(
            args.command, surface, text, args.max_seeds, args.fmt, args.rng_seed,
            args.tolerance, args.mode, args.threads, args,
        )
        if cfg.max_seeds < 1 or cfg.threads < 1:
            raise UsageError("--max-seeds and --threads must be positive")
        return COMMANDS[args.command](cfg, Out(cfg, stream))
    except UsageError as exc:
        print(f"quasicluster: error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
