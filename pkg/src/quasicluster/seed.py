"""Quasi-seeds and quasi-mutation."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from .gluing import (
    AntiSelfToCurve,
    CurveToAntiSelf,
    FlipCase,
    QuasiTriangulation,
    TriangleAnnulus,
    TwoTriangles,
    canonical_label,
    classify_flip,
    flip,
    initial_triangulation,
)
from .laurent import LaurentPoly, VarRegistry, exact_div, parse
from .surface import SurfaceSignature

__all__ = [
    "Seed",
    "ClusterKey",
    "Namer",
    "KeyCollision",
    "initial_seed",
    "exchange_rhs",
    "mutate",
    "cluster_key",
    "preset_seed",
]

ClusterKey = tuple[str, ...]


class KeyCollision(UserWarning):
    """Two combinatorially different quasi-triangulations share a cluster key."""


@dataclass(frozen=True, eq=False)
class Seed:
    triangulation: QuasiTriangulation
    vars: Mapping[str, LaurentPoly]
    boundary_vars: Mapping[str, LaurentPoly]
    trace: tuple[str, ...] = ()
    _key: list = field(default_factory=list, repr=False)

    @property
    def registry(self) -> VarRegistry:
        return next(iter(self.boundary_vars.values())).registry

    def x(self, label: str) -> LaurentPoly:
        """Variable of a flippable element or boundary segment."""
        if label in self.vars:
            return self.vars[label]
        return self.boundary_vars[label]

    @property
    def key(self) -> ClusterKey:
        if not self._key:
            self._key.append(tuple(sorted(p.serialize() for p in self.vars.values())))
        return self._key[0]

    def label_of(self, poly: LaurentPoly) -> Optional[str]:
        text = poly.serialize()
        for label, p in self.vars.items():
            if p.serialize() == text:
                return label
        return None

    def to_dict(self) -> dict:
        return {
            "registry": list(self.registry.names),
            "triangulation": self.triangulation.to_dict(),
            "vars": {k: self.vars[k].serialize() for k in sorted(self.vars)},
            "boundary_vars": {k: self.boundary_vars[k].serialize() for k in sorted(self.boundary_vars)},
            "trace": list(self.trace),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping, registry: VarRegistry | None = None) -> "Seed":
        reg = registry or VarRegistry(data["registry"])
        T = QuasiTriangulation.from_dict(data["triangulation"])
        return cls(
            T,
            {k: parse(v, reg) for k, v in data["vars"].items()},
            {k: parse(v, reg) for k, v in data["boundary_vars"].items()},
            tuple(data.get("trace", ())),
        )


def cluster_key(S: Seed) -> ClusterKey:
    return S.key


def initial_seed(T: QuasiTriangulation, registry: VarRegistry | None = None) -> Seed:
    flippable = T.flippables()
    boundary = T.boundary_segments()
    reg = registry or VarRegistry(flippable + boundary)
    return Seed(
        T,
        {t: reg.gen(t) for t in flippable},
        {b: reg.gen(b) for b in boundary},
    )


def exchange_rhs(S: Seed, t: str, case: FlipCase | None = None) -> LaurentPoly:
    """Right-hand side of the exchange relation x_t * x_t' = RHS."""
    if case is None:
        case = classify_flip(S.triangulation, t)
    x = S.x
    if isinstance(case, TwoTriangles):
        return x(case.a) * x(case.c) + x(case.b) * x(case.d)
    if isinstance(case, AntiSelfToCurve):
        return x(case.outer)
    if isinstance(case, CurveToAntiSelf):
        return x(case.rim)
    if isinstance(case, TriangleAnnulus):
        xa, xb, xd = x(case.a), x(case.b), x(case.d)
        s = xa + xb
        return s * s + xd * xd * xa * xb
    raise TypeError(f"unknown flip case {case!r}")


class Namer:
    """Assigns preferred labels to variables met during exploration."""

    def __init__(self, known: Mapping[str, LaurentPoly] | None = None):
        self._by_text = {p.serialize(): name for name, p in (known or {}).items()}

    def __call__(self, poly: LaurentPoly, T: QuasiTriangulation) -> Optional[str]:
        name = self._by_text.get(poly.serialize())
        if name is not None and name not in T.kinds:
            return name
        return None

    def names(self) -> dict[str, str]:
        return dict(self._by_text)


def mutate(
    S: Seed,
    t: str,
    label: str | None = None,
    namer: Callable[[LaurentPoly, QuasiTriangulation], Optional[str]] | None = None,
) -> Seed:
    """Quasi-mutation at t; raises NonExactDivision if the Laurent property fails."""
    T = S.triangulation
    case = classify_flip(T, t)
    rhs = exchange_rhs(S, t, case)
    new_var = exact_div(rhs, S.vars[t])
    if label is None and namer is not None:
        label = namer(new_var, T)
    T2, _, new_label = flip(T, t, label)
    vars2 = {k: v for k, v in S.vars.items() if k != t}
    vars2[new_label] = new_var
    return Seed(T2, vars2, S.boundary_vars, S.trace + (t,))


def check_key_collision(a: Seed, b: Seed) -> bool:
    """Warn (and return False) if equal keys sit on non-isomorphic gluings."""
    if a.key != b.key:
        return True
    if canonical_label(a.triangulation) != canonical_label(b.triangulation):
        warnings.warn(
            f"cluster key shared by non-isomorphic quasi-triangulations: {a.key}",
            KeyCollision,
            stacklevel=2,
        )
        return False
    return True


def preset_seed(s: SurfaceSignature) -> tuple[Seed, Optional[Namer]]:
    """Initial seed of a built-in surface, with preferred names where known.

    The two-point Moebius strip starts from the quasi-triangulation made of
    the loop c_a and the one-sided curve d, with boundary segments y and z;
    the six quasi-arcs carry the names a, b, c, c_a, c_b, d.
    """
    T = initial_triangulation(s)
    if s.orientable or s.genus != 1 or s.boundary != (2,):
        return initial_seed(T), None
    T, _, _ = flip(T, "a", "d")
    S = initial_seed(T)
    g = S.registry.gens()
    ca, d, y, z = g["c_a"], g["d"], g["y"], g["z"]
    top = z * z + 2 * z * y + y * y + d * d * z * y
    known = {
        "c_a": ca,
        "d": d,
        "c_b": exact_div(top, ca),
        "b": exact_div(top, ca * d),
        "c": exact_div(z + y, d),
        "a": exact_div(ca, d),
    }
    return S, Namer(known)
