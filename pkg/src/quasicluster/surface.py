"""Signatures of unpunctured marked surfaces: rank, finite type, arc counts.

An orientable surface is given by its genus g; a non-orientable one by the
number k >= 1 of crosscaps.  ``boundary`` lists the number of marked points on
each boundary component.

To pick the frieze orientation flag for the homotopy class of a boundary
segment of a Moebius strip with itself, use ``epsilon = -1``: going once
around the crosscap reverses the direction of the boundary.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

__all__ = [
    "SurfaceSignature",
    "InvalidSignature",
    "rank",
    "is_finite_type",
    "count_quasi_arcs_closed_form",
    "parse_preset",
    "disc",
    "moebius",
    "annulus",
]


class InvalidSignature(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceSignature:
    orientable: bool
    genus: int
    boundary: tuple[int, ...]
    punctures: int = 0

    def __post_init__(self):
        object.__setattr__(self, "boundary", tuple(int(b) for b in self.boundary))
        problems = signature_problems(self)
        if problems:
            raise InvalidSignature("; ".join(problems))

    @property
    def marked_points(self) -> int:
        return sum(self.boundary)

    def to_json(self) -> str:
        return json.dumps(
            {"orientable": self.orientable, "genus": self.genus, "boundary": list(self.boundary)},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "SurfaceSignature":
        data = json.loads(text)
        try:
            return cls(
                orientable=bool(data["orientable"]),
                genus=int(data["genus"]),
                boundary=tuple(data["boundary"]),
                punctures=int(data.get("punctures", 0)),
            )
        except KeyError as exc:
            raise InvalidSignature(f"missing field {exc.args[0]!r}") from None

    def describe(self) -> str:
        b = ",".join(map(str, self.boundary))
        if self.orientable and self.genus == 0 and len(self.boundary) == 1:
            return f"disc:{b}"
        if self.orientable and self.genus == 0 and len(self.boundary) == 2:
            return f"annulus:{b}"
        if not self.orientable and self.genus == 1 and len(self.boundary) == 1:
            return f"moebius:{b}"
        kind = "orientable" if self.orientable else "nonorientable"
        return f"{kind}(genus={self.genus};boundary={b})"


def signature_problems(s: SurfaceSignature) -> list[str]:
    out = []
    if s.punctures:
        out.append("punctured surfaces are not supported")
    if s.genus < 0:
        out.append("genus must be nonnegative")
    if not s.orientable and s.genus < 1:
        out.append("a non-orientable surface needs at least one crosscap")
    if not s.boundary:
        out.append("at least one boundary component is required")
    if any(b < 1 for b in s.boundary):
        out.append("every boundary component needs a marked point")
    if s.orientable and s.genus == 0 and len(s.boundary) == 1 and s.boundary and s.boundary[0] <= 3:
        out.append("monogon, digon and triangle are excluded")
    if not out and _rank(s) < 1:
        out.append("rank must be positive")
    return out


def _rank(s: SurfaceSignature) -> int:
    n = len(s.boundary)
    if s.orientable:
        return 6 * s.genus - 6 + 3 * n + sum(s.boundary)
    return 3 * s.genus - 6 + 3 * n + sum(s.boundary)


def rank(s: SurfaceSignature) -> int:
    """Number of quasi-arcs in any quasi-triangulation."""
    return _rank(s)


def is_finite_type(s: SurfaceSignature) -> bool:
    if len(s.boundary) != 1:
        return False
    if s.orientable:
        return s.genus == 0 and s.boundary[0] >= 4
    return s.genus == 1


def count_quasi_arcs_closed_form(s: SurfaceSignature) -> tuple[int, int] | None:
    """(quasi-arcs, arcs) for finite-type surfaces, else None."""
    if not is_finite_type(s):
        return None
    b = s.boundary[0]
    if s.orientable:
        c = b * (b - 3) // 2
        return c, c
    return (3 * b * b - b + 2) // 2, b * (3 * b - 1) // 2


def disc(b: int) -> SurfaceSignature:
    return SurfaceSignature(True, 0, (b,))


def moebius(n: int) -> SurfaceSignature:
    return SurfaceSignature(False, 1, (n,))


def annulus(p: int, q: int) -> SurfaceSignature:
    return SurfaceSignature(True, 0, (p, q))


_PRESET = re.compile(r"(disc|moebius|annulus):(\d+)(?:,(\d+))?")


def parse_preset(text: str) -> SurfaceSignature:
    m = _PRESET.fullmatch(text.strip())
    if not m:
        raise InvalidSignature(f"unknown preset {text!r}; expected disc:b, moebius:n or annulus:p,q")
    kind, a, b = m.group(1), int(m.group(2)), m.group(3)
    if kind == "annulus":
        if b is None:
            raise InvalidSignature("annulus preset needs two counts, e.g. annulus:1,1")
        return annulus(a, int(b))
    if b is not None:
        raise InvalidSignature(f"{kind} preset takes a single count")
    return disc(a) if kind == "disc" else moebius(a)
