"""Quasi-triangulations as half-edge gluing data, and the four local flips.

Every face lists its sides in cyclic order together with the marked point at
the start of each side (side ``k`` runs from ``corners[k]`` to
``corners[k+1]``).  A *slot* is a pair ``(face index, side index)``.  Each
interior arc occupies two slots, glued either orientation-preservingly (the
two faces induce opposite directions on the shared side, as in an oriented
surface) or reversingly.  Boundary segments occupy one unpaired slot.  A
one-sided curve is the core of a crosscap annulus and occupies no slot.

Face shapes:

* ``TRIANGLE``: three sides.
* ``ANTI_SELF_FOLDED``: sides ``(inner, inner, outer)``; slots 0 and 1 are glued
  to each other reversingly.
* ``CROSSCAP_ANNULUS``: a single rim side plus a one-sided ``core``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Iterable, Mapping, Optional, Union

from .surface import SurfaceSignature, rank

__all__ = [
    "Kind",
    "FaceKind",
    "Face",
    "QuasiTriangulation",
    "TwoTriangles",
    "AntiSelfToCurve",
    "CurveToAntiSelf",
    "TriangleAnnulus",
    "FlipCase",
    "FlipError",
    "UnsupportedSurface",
    "classify_flip",
    "flip",
    "validate",
    "canonical_label",
    "initial_triangulation",
    "from_faces",
    "relabel",
]

Slot = tuple[int, int]


class Kind(str, Enum):
    ARC = "arc"
    BOUNDARY = "boundary"
    ONE_SIDED = "one_sided"


class FaceKind(str, Enum):
    TRIANGLE = "triangle"
    ANTI_SELF_FOLDED = "anti_self_folded"
    CROSSCAP_ANNULUS = "crosscap_annulus"


class FlipError(ValueError):
    pass


class UnsupportedSurface(ValueError):
    pass


@dataclass(frozen=True)
class Face:
    kind: FaceKind
    sides: tuple[str, ...]
    corners: tuple[str, ...]
    core: Optional[str] = None

    def span(self, k: int) -> tuple[str, str]:
        """Start and end point of side k in the stored direction."""
        n = len(self.sides)
        return self.corners[k], self.corners[(k + 1) % n]


@dataclass(frozen=True)
class TwoTriangles:
    """Quadrilateral with sides a, b, c, d in cyclic order; a/c and b/d are opposite."""

    a: str
    b: str
    c: str
    d: str


@dataclass(frozen=True)
class AntiSelfToCurve:
    outer: str


@dataclass(frozen=True)
class CurveToAntiSelf:
    rim: str


@dataclass(frozen=True)
class TriangleAnnulus:
    a: str
    b: str
    d: str


FlipCase = Union[TwoTriangles, AntiSelfToCurve, CurveToAntiSelf, TriangleAnnulus]


@dataclass(frozen=True)
class QuasiTriangulation:
    elements: tuple[tuple[str, Kind], ...]
    faces: tuple[Face, ...]
    # (slot, slot, reversed); slot pairs listed once with the smaller slot first
    pairs: tuple[tuple[Slot, Slot, bool], ...]
    serial: int = field(default=0, compare=False)

    @cached_property
    def kinds(self) -> dict[str, Kind]:
        return dict(self.elements)

    def kind(self, label: str) -> Kind:
        try:
            return self.kinds[label]
        except KeyError:
            raise FlipError(f"{label!r} is not an element of this quasi-triangulation") from None

    @cached_property
    def _partner(self) -> dict[Slot, tuple[Slot, bool]]:
        out = {}
        for u, v, r in self.pairs:
            out[u] = (v, r)
            out[v] = (u, r)
        return out

    def partner(self, slot: Slot) -> Optional[tuple[Slot, bool]]:
        return self._partner.get(slot)

    @cached_property
    def _slots(self) -> dict[str, list[Slot]]:
        out: dict[str, list[Slot]] = {}
        for f, face in enumerate(self.faces):
            for k, s in enumerate(face.sides):
                out.setdefault(s, []).append((f, k))
        return out

    def slots_of(self, label: str) -> list[Slot]:
        return list(self._slots.get(label, ()))

    @cached_property
    def _cores(self) -> dict[str, int]:
        return {F.core: f for f, F in enumerate(self.faces) if F.core is not None}

    def annulus_of(self, curve: str) -> int:
        return self._cores[curve]

    def flippables(self) -> list[str]:
        return sorted(l for l, k in self.elements if k is not Kind.BOUNDARY)

    def arcs(self) -> list[str]:
        return sorted(l for l, k in self.elements if k is Kind.ARC)

    def one_sided(self) -> list[str]:
        return sorted(l for l, k in self.elements if k is Kind.ONE_SIDED)

    def boundary_segments(self) -> list[str]:
        return sorted(l for l, k in self.elements if k is Kind.BOUNDARY)

    def marked_points(self) -> list[str]:
        return sorted({c for F in self.faces for c in F.corners})

    def endpoints(self, label: str) -> tuple[str, str]:
        if self.kind(label) is Kind.ONE_SIDED:
            raise FlipError("one-sided curves have no endpoints")
        f, k = self._slots[label][0]
        return self.faces[f].span(k)

    def anti_self_folded_inner(self) -> list[str]:
        return sorted(F.sides[0] for F in self.faces if F.kind is FaceKind.ANTI_SELF_FOLDED)

    def is_mutable(self, label: str) -> bool:
        """True for arcs that are not the inner side of an anti-self-folded face."""
        return self.kind(label) is Kind.ARC and label not in self.anti_self_folded_inner()

    def fresh_label(self) -> tuple[str, int]:
        n = self.serial
        while True:
            n += 1
            cand = f"e{n}"
            if cand not in self.kinds:
                return cand, n

    # ---- JSON ------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "elements": [{"id": l, "kind": k.value} for l, k in self.elements],
            "faces": [
                {
                    "kind": F.kind.value,
                    "sides": list(F.sides),
                    "corners": list(F.corners),
                    **({"core": F.core} if F.core is not None else {}),
                }
                for F in self.faces
            ],
            "pairings": [
                {"slots": [list(u), list(v)], "reversed": r} for u, v, r in self.pairs
            ],
            "serial": self.serial,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping) -> "QuasiTriangulation":
        elements = tuple(sorted((e["id"], Kind(e["kind"])) for e in data["elements"]))
        faces = tuple(
            Face(
                FaceKind(F["kind"]),
                tuple(F["sides"]),
                tuple(F["corners"]),
                F.get("core"),
            )
            for F in data["faces"]
        )
        pairs = []
        for p in data["pairings"]:
            u, v = (tuple(s) for s in p["slots"])
            u, v = sorted((u, v))
            pairs.append((u, v, bool(p["reversed"])))
        return cls(elements, faces, tuple(sorted(pairs)), int(data.get("serial", 0)))

    @classmethod
    def from_json(cls, text: str) -> "QuasiTriangulation":
        return cls.from_dict(json.loads(text))


# ---- construction helpers --------------------------------------------------


def _make(elements: Mapping[str, Kind], faces: list[Face], pairs: Iterable, serial=0):
    norm = []
    for u, v, r in pairs:
        u, v = sorted((u, v))
        norm.append((u, v, bool(r)))
    return QuasiTriangulation(
        tuple(sorted(elements.items())), tuple(faces), tuple(sorted(norm)), serial
    )


def from_faces(
    faces: list[Face],
    boundary: Iterable[str],
    loop_flags: Mapping[str, bool] | None = None,
    serial: int = 0,
) -> QuasiTriangulation:
    """Assemble gluing data, deriving pairing flags from corner labels.

    Arcs whose two endpoints coincide need an explicit entry in
    ``loop_flags`` (True = reversing) unless both slots sit in one
    anti-self-folded face.
    """
    loop_flags = dict(loop_flags or {})
    boundary = set(boundary)
    elements: dict[str, Kind] = {}
    where: dict[str, list[Slot]] = {}
    for f, F in enumerate(faces):
        for k, s in enumerate(F.sides):
            where.setdefault(s, []).append((f, k))
        if F.core is not None:
            elements[F.core] = Kind.ONE_SIDED
    pairs = []
    for label, slots in where.items():
        if label in boundary:
            elements[label] = Kind.BOUNDARY
            continue
        elements[label] = Kind.ARC
        if len(slots) != 2:
            raise FlipError(f"arc {label!r} occupies {len(slots)} slots")
        u, v = slots
        if u[0] == v[0] and faces[u[0]].kind is FaceKind.ANTI_SELF_FOLDED:
            pairs.append((u, v, True))
            continue
        su, eu = faces[u[0]].span(u[1])
        sv, ev = faces[v[0]].span(v[1])
        if su != eu:
            pairs.append((u, v, su == sv))
        elif label in loop_flags:
            pairs.append((u, v, loop_flags[label]))
        else:
            raise FlipError(f"loop {label!r} needs an explicit gluing flag")
    for b in boundary:
        elements.setdefault(b, Kind.BOUNDARY)
    return _make(elements, faces, pairs, serial)


def initial_triangulation(s: SurfaceSignature) -> QuasiTriangulation:
    """Built-in triangulations for discs, Moebius strips and annuli."""
    n = len(s.boundary)
    if s.orientable and s.genus == 0 and n == 1:
        return _disc(s.boundary[0])
    if not s.orientable and s.genus == 1 and n == 1:
        return _moebius(s.boundary[0])
    if s.orientable and s.genus == 0 and n == 2:
        return _annulus(*s.boundary)
    raise UnsupportedSurface(
        f"no built-in triangulation for {s.describe()}; supply a gluing file"
    )


def _disc(b: int) -> QuasiTriangulation:
    pts = [f"p{k}" for k in range(b)]
    seg = [f"b{k + 1}" for k in range(b)]  # seg[k] joins p_k and p_{k+1}
    arc = {k: f"t{k - 1}" for k in range(2, b - 1)}  # arc[k] joins p_0 and p_k
    faces = []
    for k in range(1, b - 1):
        first = seg[0] if k == 1 else arc[k]
        last = seg[b - 1] if k + 1 == b - 1 else arc[k + 1]
        faces.append(Face(FaceKind.TRIANGLE, (first, seg[k], last), (pts[0], pts[k], pts[k + 1])))
    return from_faces(faces, seg)


def _moebius(n: int) -> QuasiTriangulation:
    pts = [f"p{k + 1}" for k in range(n)]
    if n == 1:
        faces = [Face(FaceKind.ANTI_SELF_FOLDED, ("t1", "t1", "b1"), (pts[0],) * 3)]
        return from_faces(faces, ["b1"])
    if n == 2:
        inner, loop, seg = "a", "c_a", ["y", "z"]
    else:
        inner, loop, seg = "t1", "t2", [f"b{k + 1}" for k in range(n)]
    # polygon A_0 = p1, A_1 = p2, ..., A_{n-1} = pn, A_n = p1 fanned from A_0
    A = pts + [pts[0]]
    diag = {k: f"t{k + 1}" for k in range(2, n)}  # joins A_0 and A_k
    faces = [Face(FaceKind.ANTI_SELF_FOLDED, (inner, inner, loop), (pts[0],) * 3)]
    for k in range(1, n):
        first = seg[0] if k == 1 else diag[k]
        last = loop if k + 1 == n else diag[k + 1]
        faces.append(Face(FaceKind.TRIANGLE, (first, seg[k], last), (A[0], A[k], A[k + 1])))
    return from_faces(faces, seg, loop_flags={loop: False})


def _annulus(p: int, q: int) -> QuasiTriangulation:
    P = [f"p{k + 1}" for k in range(p)]
    Q = [f"q{k + 1}" for k in range(q)]
    outer = [f"b{k + 1}" for k in range(p)]
    inner = [f"b{p + k + 1}" for k in range(q)]
    m = p + q
    rung = [f"t{k + 1}" for k in range(m)]
    faces = []
    for k in range(p):
        # P_k -> P_{k+1} -> Q_1
        faces.append(
            Face(
                FaceKind.TRIANGLE,
                (outer[k], rung[(k + 1) % m], rung[k]),
                (P[k], P[(k + 1) % p], Q[0]),
            )
        )
    for l in range(q):
        # Q_{l+1} -> Q_l -> P_1
        faces.append(
            Face(
                FaceKind.TRIANGLE,
                (inner[l], rung[(p + l) % m], rung[(p + l + 1) % m]),
                (Q[(l + 1) % q], Q[l], P[0]),
            )
        )
    return from_faces(faces, outer + inner)


def relabel(T: QuasiTriangulation, mapping: Mapping[str, str]) -> QuasiTriangulation:
    """Rename elements (not marked points); unmapped labels are kept."""
    ren = lambda x: mapping.get(x, x)  # noqa: E731
    faces = [
        Face(F.kind, tuple(ren(s) for s in F.sides), F.corners, None if F.core is None else ren(F.core))
        for F in T.faces
    ]
    elements = {ren(l): k for l, k in T.elements}
    return _make(elements, faces, T.pairs, T.serial)


def permute_faces(T: QuasiTriangulation, order: list[int]) -> QuasiTriangulation:
    """Reorder faces: new face i is old face order[i]."""
    new_of = {old: new for new, old in enumerate(order)}
    faces = [T.faces[o] for o in order]
    pairs = [((new_of[u[0]], u[1]), (new_of[v[0]], v[1]), r) for u, v, r in T.pairs]
    return _make(T.kinds, faces, pairs, T.serial)


# ---- flips -----------------------------------------------------------------


def _view(F: Face, entry: int, d: int):
    """Slots, sides and start corners of a triangle read from ``entry`` in direction d."""
    ks = [entry % 3, (entry + d) % 3, (entry + 2 * d) % 3]
    sides = [F.sides[k] for k in ks]
    corners = [F.corners[k] if d == 1 else F.corners[(k + 1) % 3] for k in ks]
    return ks, sides, corners


def _quad(T: QuasiTriangulation, t: str):
    (f1, s1), (f2, s2) = T.slots_of(t)
    _, rev = T.partner((f1, s1))
    d2 = -1 if rev else 1
    v1 = _view(T.faces[f1], s1, 1)
    v2 = _view(T.faces[f2], s2, d2)
    return f1, f2, d2, v1, v2


def classify_flip(T: QuasiTriangulation, t: str) -> FlipCase:
    kind = T.kind(t)
    if kind is Kind.BOUNDARY:
        raise FlipError(f"boundary segment {t!r} cannot be flipped")
    if kind is Kind.ONE_SIDED:
        return CurveToAntiSelf(T.faces[T.annulus_of(t)].sides[0])
    slots = T.slots_of(t)
    if len(slots) != 2:
        raise FlipError(f"arc {t!r} occupies {len(slots)} slots")
    (f1, _), (f2, _) = slots
    F1, F2 = T.faces[f1], T.faces[f2]
    if f1 == f2:
        if F1.kind is not FaceKind.ANTI_SELF_FOLDED or F1.sides[0] != t:
            raise FlipError(f"arc {t!r} is glued to itself outside an anti-self-folded face")
        return AntiSelfToCurve(F1.sides[2])
    ann = [f for f in (f1, f2) if T.faces[f].kind is FaceKind.CROSSCAP_ANNULUS]
    if ann:
        if len(ann) == 2:
            raise FlipError(f"arc {t!r} bounds two crosscap annuli")
        tri = f2 if ann[0] == f1 else f1
        if T.faces[tri].kind is not FaceKind.TRIANGLE:
            raise FlipError(f"arc {t!r} separates an annulus from a folded face")
        s = [k for (f, k) in slots if f == tri][0]
        _, sides, _ = _view(T.faces[tri], s, 1)
        return TriangleAnnulus(sides[1], sides[2], T.faces[ann[0]].core)
    _, _, _, (_, sa, _), (_, sb, _) = _quad(T, t)
    return TwoTriangles(sa[1], sa[2], sb[1], sb[2])


def flip(
    T: QuasiTriangulation, t: str, new_label: str | None = None
) -> tuple[QuasiTriangulation, FlipCase, str]:
    """Replace t by the unique other quasi-arc completing T minus t."""
    case = classify_flip(T, t)
    serial = T.serial
    if new_label is None:
        new_label, serial = T.fresh_label()
    elif new_label in T.kinds and new_label != t:
        raise FlipError(f"label {new_label!r} already in use")
    kinds = dict(T.kinds)
    del kinds[t]
    faces = list(T.faces)
    moves: dict[Slot, tuple[Slot, bool]] = {}
    drop: set[Slot] = set(T.slots_of(t))
    extra: list[tuple[Slot, Slot, bool]] = []

    if isinstance(case, TwoTriangles):
        kinds[new_label] = Kind.ARC
        f1, f2, d2, (k1, _, P), (k2, _, Q) = _quad(T, t)
        x1, y1 = T.faces[f1].sides[k1[1]], T.faces[f1].sides[k1[2]]
        x2, y2 = T.faces[f2].sides[k2[1]], T.faces[f2].sides[k2[2]]
        faces[f1] = Face(FaceKind.TRIANGLE, (y1, x2, new_label), (P[2], P[0], Q[2]))
        faces[f2] = Face(FaceKind.TRIANGLE, (y2, x1, new_label), (Q[2], P[1], P[2]))
        refl = d2 == -1
        moves[(f1, k1[1])] = ((f2, 1), False)
        moves[(f1, k1[2])] = ((f1, 0), False)
        moves[(f2, k2[1])] = ((f1, 1), refl)
        moves[(f2, k2[2])] = ((f2, 0), refl)
        extra.append(((f1, 2), (f2, 2), False))
    elif isinstance(case, AntiSelfToCurve):
        kinds[new_label] = Kind.ONE_SIDED
        (f, _), _ = T.slots_of(t)
        F = T.faces[f]
        faces[f] = Face(FaceKind.CROSSCAP_ANNULUS, (F.sides[2],), (F.corners[2],), new_label)
        moves[(f, 2)] = ((f, 0), False)
    elif isinstance(case, CurveToAntiSelf):
        kinds[new_label] = Kind.ARC
        f = T.annulus_of(t)
        F = T.faces[f]
        faces[f] = Face(FaceKind.ANTI_SELF_FOLDED, (new_label, new_label, F.sides[0]), (F.corners[0],) * 3)
        moves[(f, 0)] = ((f, 2), False)
        extra.append(((f, 0), (f, 1), True))
    else:
        kinds[new_label] = Kind.ARC
        slots = T.slots_of(t)
        ann = [f for f, _ in slots if T.faces[f].kind is FaceKind.CROSSCAP_ANNULUS][0]
        tri, s = [(f, k) for f, k in slots if f != ann][0]
        ks, sides, corners = _view(T.faces[tri], s, 1)
        P, Q = corners[0], corners[2]
        faces[tri] = Face(FaceKind.TRIANGLE, (new_label, sides[2], sides[1]), (Q, Q, P))
        faces[ann] = Face(FaceKind.CROSSCAP_ANNULUS, (new_label,), (Q,), T.faces[ann].core)
        moves[(tri, ks[1])] = ((tri, 2), False)
        moves[(tri, ks[2])] = ((tri, 1), False)
        extra.append(((tri, 0), (ann, 0), False))

    pairs = []
    for u, v, r in T.pairs:
        if u in drop or v in drop:
            continue
        nu, ru = moves.get(u, (u, False))
        nv, rv = moves.get(v, (v, False))
        pairs.append((nu, nv, r ^ ru ^ rv))
    pairs.extend(extra)
    faces, pairs = _fold_repeated(faces, pairs)
    return _make(kinds, faces, pairs, serial), case, new_label


def _fold_repeated(faces: list[Face], pairs):
    """Turn triangles with a repeated side into anti-self-folded faces."""
    perm: dict[int, list[int]] = {}
    for f, F in enumerate(faces):
        if F.kind is not FaceKind.TRIANGLE:
            continue
        s = F.sides
        if s[0] == s[1]:
            rot = 0
        elif s[1] == s[2]:
            rot = 1
        elif s[2] == s[0]:
            rot = 2
        else:
            continue
        order = [(rot + i) % 3 for i in range(3)]
        faces[f] = Face(
            FaceKind.ANTI_SELF_FOLDED,
            tuple(s[k] for k in order),
            tuple(F.corners[k] for k in order),
        )
        perm[f] = [order.index(k) for k in range(3)]  # old slot -> new slot
    if not perm:
        return faces, pairs
    out = []
    for u, v, r in pairs:
        if u[0] in perm:
            u = (u[0], perm[u[0]][u[1]])
        if v[0] in perm:
            v = (v[0], perm[v[0]][v[1]])
        out.append((u, v, r))
    for f in perm:
        inner = [p for p in out if p[0][0] == f and p[1][0] == f]
        if not inner or not inner[0][2]:
            raise FlipError("a triangle glued to itself without reversal encloses a puncture")
    return faces, out


# ---- validation ------------------------------------------------------------


def validate(T: QuasiTriangulation, s: SurfaceSignature | None = None) -> list[str]:
    """Return a list of violated invariants (empty means valid)."""
    out: list[str] = []
    kinds = T.kinds
    if len(kinds) != len(T.elements):
        out.append("duplicate element labels")
    seen_slots: dict[str, list[Slot]] = {}
    for f, F in enumerate(T.faces):
        want = 1 if F.kind is FaceKind.CROSSCAP_ANNULUS else 3
        if len(F.sides) != want or len(F.corners) != want:
            out.append(f"face {f}: wrong number of sides")
            continue
        for k, side in enumerate(F.sides):
            seen_slots.setdefault(side, []).append((f, k))
            if side not in kinds:
                out.append(f"face {f}: unknown side {side!r}")
            elif kinds[side] is Kind.ONE_SIDED:
                out.append(f"face {f}: one-sided curve {side!r} used as a side")
        if F.kind is FaceKind.ANTI_SELF_FOLDED:
            if F.sides[0] != F.sides[1] or F.sides[2] == F.sides[0]:
                out.append(f"face {f}: anti-self-folded face needs sides (inner, inner, outer)")
            elif kinds.get(F.sides[0]) is not Kind.ARC:
                out.append(f"face {f}: inner side must be an arc")
            else:
                p = T.partner((f, 0))
                if p is None or p[0] != (f, 1) or not p[1]:
                    out.append(f"face {f}: inner slots must be glued reversingly")
        elif F.kind is FaceKind.TRIANGLE and len(set(F.sides)) != 3:
            out.append(f"face {f}: triangle with a repeated side")
        if F.kind is FaceKind.CROSSCAP_ANNULUS:
            if F.core is None or kinds.get(F.core) is not Kind.ONE_SIDED:
                out.append(f"face {f}: annulus core must be a one-sided curve")
        elif F.core is not None:
            out.append(f"face {f}: only annuli carry a core")
    for label, kind in kinds.items():
        n = len(seen_slots.get(label, ()))
        want = {Kind.ARC: 2, Kind.BOUNDARY: 1, Kind.ONE_SIDED: 0}[kind]
        if n != want:
            out.append(f"arc multiplicity: {label!r} ({kind.value}) occupies {n} slots, expected {want}")
    cores = [F.core for F in T.faces if F.kind is FaceKind.CROSSCAP_ANNULUS]
    if sorted(cores) != T.one_sided():
        out.append("annuli and one-sided curves are not in bijection")
    # pairing structure
    used: dict[Slot, int] = {}
    for u, v, r in T.pairs:
        for w in (u, v):
            used[w] = used.get(w, 0) + 1
            if not (0 <= w[0] < len(T.faces)) or not (0 <= w[1] < len(T.faces[w[0]].sides)):
                out.append(f"pairing references missing slot {w}")
        if u == v:
            out.append(f"slot {u} paired with itself")
            continue
        try:
            lu = T.faces[u[0]].sides[u[1]]
            lv = T.faces[v[0]].sides[v[1]]
        except IndexError:
            continue
        if lu != lv:
            out.append(f"pairing joins different elements {lu!r} and {lv!r}")
        elif kinds.get(lu) is not Kind.ARC:
            out.append(f"pairing on non-arc {lu!r}")
        else:
            su, eu = T.faces[u[0]].span(u[1])
            sv, ev = T.faces[v[0]].span(v[1])
            ok = (su == sv and eu == ev) if r else (su == ev and eu == sv)
            if not ok:
                out.append(f"endpoints of {lu!r} disagree across its gluing")
    if any(c > 1 for c in used.values()):
        out.append("a slot is paired more than once")
    for label, slots in seen_slots.items():
        if kinds.get(label) is Kind.ARC and len(slots) == 2 and not all(w in used for w in slots):
            out.append(f"arc {label!r} is not glued")
    if out:
        return out
    # topology
    out.extend(_topology_problems(T, s))
    return out


def _components(T: QuasiTriangulation) -> int:
    parent = list(range(len(T.faces)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, _ in T.pairs:
        parent[find(u[0])] = find(v[0])
    return len({find(f) for f in range(len(T.faces))})


def is_orientable(T: QuasiTriangulation) -> bool:
    if any(F.kind is not FaceKind.TRIANGLE for F in T.faces):
        return False
    sign: dict[int, int] = {}
    for start in range(len(T.faces)):
        if start in sign:
            continue
        sign[start] = 1
        stack = [start]
        while stack:
            f = stack.pop()
            for k in range(3):
                p = T.partner((f, k))
                if p is None:
                    continue
                (g, _), r = p
                want = -sign[f] if r else sign[f]
                if g in sign:
                    if sign[g] != want:
                        return False
                else:
                    sign[g] = want
                    stack.append(g)
    return True


def boundary_cycles(T: QuasiTriangulation) -> list[int]:
    """Number of boundary segments on each boundary component, sorted."""
    parent: dict[str, str] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            x = parent[x]
        return x

    ends = [T.endpoints(b) for b in T.boundary_segments()]
    for a, b in ends:
        parent[find(a)] = find(b)
    count: dict[str, int] = {}
    for a, _ in ends:
        r = find(a)
        count[r] = count.get(r, 0) + 1
    return sorted(count.values())


def _topology_problems(T: QuasiTriangulation, s: SurfaceSignature | None) -> list[str]:
    out = []
    if _components(T) != 1:
        out.append("gluing is disconnected")
    points = T.marked_points()
    edges = len(T.arcs()) + len(T.boundary_segments())
    cells = sum(1 for F in T.faces if F.kind is not FaceKind.CROSSCAP_ANNULUS)
    chi = len(points) - edges + cells
    if s is None:
        return out
    nflip = len(T.flippables())
    if nflip != rank(s):
        out.append(f"flippable count {nflip} differs from rank {rank(s)}")
    if len(points) != s.marked_points:
        out.append(f"{len(points)} marked points, expected {s.marked_points}")
    want_chi = (2 - 2 * s.genus if s.orientable else 2 - s.genus) - len(s.boundary)
    if chi != want_chi:
        out.append(f"Euler characteristic {chi}, expected {want_chi}")
    if boundary_cycles(T) != sorted(s.boundary):
        out.append(f"boundary components {boundary_cycles(T)} differ from {sorted(s.boundary)}")
    if is_orientable(T) != s.orientable:
        out.append("orientability of the gluing differs from the signature")
    return out


# ---- canonical labels ------------------------------------------------------


def canonical_label(T: QuasiTriangulation, anchor: Callable[[str], str] | None = None) -> bytes:
    """Relabeling-invariant fingerprint.

    Boundary segments and marked points are anchors: their names (passed
    through ``anchor``) enter the code, while arcs and one-sided curves are
    anonymous.
    """
    anchor = anchor or (lambda x: x)
    starts = [T.slots_of(b)[0] for b in T.boundary_segments()]
    if not starts:
        starts = [(f, k) for f, F in enumerate(T.faces) for k in range(len(F.sides))]
    best = None
    for slot in starts:
        for d in (1, -1):
            code = _traverse(T, slot, d, anchor)
            if best is None or code < best:
                best = code
    return best if best is not None else b""


def _traverse(T, slot, d, anchor) -> bytes:
    number = {slot[0]: 0}
    frame = {slot[0]: (slot[1], d)}
    queue = [slot[0]]
    tokens = []
    head = 0
    while head < len(queue):
        f = queue[head]
        head += 1
        F = T.faces[f]
        entry, df = frame[f]
        if F.kind is FaceKind.CROSSCAP_ANNULUS:
            seq = [0]
            corners = [F.corners[0]]
        else:
            seq, _, corners = _view(F, entry, df)
        face_tok = [F.kind.value[0]]
        for k, c in zip(seq, corners):
            p = T.partner((f, k))
            if p is None:
                face_tok.append((anchor(c), "b", anchor(F.sides[k])))
                continue
            (g, r), rev = p
            if g not in number:
                number[g] = len(queue)
                frame[g] = (r, -df if rev else df)
                queue.append(g)
            eg, dg = frame[g]
            pos = 0 if T.faces[g].kind is FaceKind.CROSSCAP_ANNULUS else ((r - eg) * dg) % 3
            face_tok.append((anchor(c), number[g], pos, rev ^ (df != dg)))
        tokens.append(tuple(face_tok))
    return repr(tokens).encode()
