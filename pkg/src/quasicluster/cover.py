"""Orientation double covers, orbit mutations and exchange matrices.

Lifted elements are named ``"<label>.<sheet>"`` with sheet 0 or 1; the deck
involution swaps the sheets.  Marked points lift to ``"<point>.0"`` and
``"<point>.1"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gluing import (
    Face,
    FaceKind,
    Kind,
    QuasiTriangulation,
    _make,
    canonical_label,
    flip,
    validate,
)
from .laurent import LaurentPoly, VarRegistry, exact_div
from .seed import Seed, exchange_rhs, initial_seed, mutate
from .surface import SurfaceSignature

__all__ = [
    "DoubleCover",
    "CoverError",
    "build_double_cover",
    "lift_name",
    "base_name",
    "project_pi",
    "orbit_mutate",
    "OrbitResult",
    "exchange_matrix",
    "matrix_mutation",
    "exchange_matrix_rule",
]


class CoverError(ValueError):
    pass


def lift_name(label: str, sheet: int) -> str:
    return f"{label}.{sheet}"


def base_name(label: str) -> str:
    return label.rpartition(".")[0] or label


@dataclass(frozen=True)
class DoubleCover:
    base_signature: SurfaceSignature
    base: QuasiTriangulation
    total_signature: Optional[SurfaceSignature]  # None for the trivial cover
    total: QuasiTriangulation
    tau: dict[str, str]
    lift: dict[str, tuple[str, str]]
    point_tau: dict[str, str]

    def project_label(self, label: str) -> str:
        return base_name(label)


def _copy_slot(k: int, sheet: int) -> int:
    return k if sheet == 0 else (-k) % 3


def build_double_cover(
    sig: SurfaceSignature, T: QuasiTriangulation, allow_trivial: bool = False
) -> DoubleCover:
    """Orientation double cover of a triangulated surface.

    Sheet-1 faces are stored with reversed cyclic order, so every gluing of
    the total surface preserves orientation and sheet-0 faces are positively
    oriented.  Orientable bases are rejected unless ``allow_trivial``, in
    which case two disjoint copies are returned.
    """
    if sig.orientable and not allow_trivial:
        raise CoverError("the base surface is orientable")
    if T.one_sided():
        raise CoverError("quasi-triangulations with a one-sided curve do not lift")
    # which sheet of the lift each base slot belongs to
    sheet_shift: dict[tuple[int, int], int] = {}
    for u, v, r in T.pairs:
        sheet_shift[u] = 0
        sheet_shift[v] = int(r)
    named = []
    for f, F in enumerate(T.faces):
        for sheet in (0, 1):
            sides = []
            for j in range(3):
                k = _copy_slot(j, sheet)
                label = F.sides[k]
                lift_sheet = sheet ^ sheet_shift.get((f, k), 0)
                sides.append(lift_name(label, lift_sheet))
            named.append(sides)
    pairs = []
    for u, v, r in T.pairs:
        for sheet in (0, 1):
            other = sheet ^ int(r)
            pairs.append(
                (
                    (2 * u[0] + sheet, _copy_slot(u[1], sheet)),
                    (2 * v[0] + other, _copy_slot(v[1], other)),
                    False,
                )
            )
    corners = _lift_corners(T, pairs)
    faces = [
        Face(FaceKind.TRIANGLE, tuple(named[i]), tuple(corners[i])) for i in range(len(named))
    ]
    kinds = {}
    tau, lift = {}, {}
    for label, kind in T.elements:
        a, b = lift_name(label, 0), lift_name(label, 1)
        kinds[a] = kinds[b] = kind
        tau[a], tau[b] = b, a
        lift[label] = (a, b)
    total = _make(kinds, faces, pairs)
    point_tau = {}
    for f in range(len(T.faces)):
        for k in range(3):
            c0 = corners[2 * f][k]
            c1 = corners[2 * f + 1][(1 - k) % 3]
            point_tau[c0], point_tau[c1] = c1, c0
    total_sig = None
    if not sig.orientable:
        total_sig = SurfaceSignature(True, sig.genus - 1, tuple(sorted(sig.boundary * 2)))
    return DoubleCover(sig, T, total_sig, total, tau, lift, point_tau)


def _lift_corners(T: QuasiTriangulation, pairs) -> list[list[str]]:
    nf = 2 * len(T.faces)
    parent = list(range(3 * nf))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def join(a, b):
        parent[find(a)] = find(b)

    for (f, k), (g, j), _ in pairs:
        join(3 * f + k, 3 * g + (j + 1) % 3)
        join(3 * f + (k + 1) % 3, 3 * g + j)
    base_point = {}
    for f, F in enumerate(T.faces):
        for sheet in (0, 1):
            for k in range(3):
                src = k if sheet == 0 else (1 - k) % 3
                base_point[3 * (2 * f + sheet) + k] = F.corners[src]
    classes: dict[int, list[int]] = {}
    for x in range(3 * nf):
        classes.setdefault(find(x), []).append(x)
    by_point: dict[str, list[int]] = {}
    for root, members in classes.items():
        pts = {base_point[m] for m in members}
        if len(pts) != 1:
            raise CoverError("lifted corners disagree on their base point")
        by_point.setdefault(pts.pop(), []).append(min(members))
    name = {}
    for point, mins in by_point.items():
        for i, m in enumerate(sorted(mins)):
            name[find(m)] = lift_name(point, i)
    out = [[""] * 3 for _ in range(nf)]
    for x in range(3 * nf):
        out[x // 3][x % 3] = name[find(x)]
    return out


def project_pi(poly: LaurentPoly, base_registry: VarRegistry) -> LaurentPoly:
    """Send both lifts of every generator to the base generator."""
    mapping = {n: base_name(n) for n in poly.registry.names}
    return poly.remap(base_registry, mapping)


def _tau_poly(poly: LaurentPoly) -> LaurentPoly:
    names = poly.registry.names
    mapping = {}
    for n in names:
        b, _, s = n.rpartition(".")
        mapping[n] = f"{b}.{1 - int(s)}"
    return poly.remap(poly.registry, mapping)


@dataclass
class OrbitResult:
    report: dict
    base: Seed
    total: Seed


def _strip(label: str) -> str:
    return base_name(label)


def orbit_mutate(C: DoubleCover, t: str, base_seed: Seed, total_seed: Seed) -> OrbitResult:
    """Mutate both lifts of t in either order and compare with the lifted base mutation."""
    new_base = mutate(base_seed, t)
    t_new = next(l for l in new_base.vars if l not in base_seed.vars)
    a, b = lift_name(t, 0), lift_name(t, 1)
    na, nb = lift_name(t_new, 0), lift_name(t_new, 1)
    first = mutate(mutate(total_seed, a, label=na), b, label=nb)
    second = mutate(mutate(total_seed, b, label=nb), a, label=na)
    commute = first.key == second.key and canonical_label(first.triangulation) == canonical_label(
        second.triangulation
    )
    tau_ok = sorted(_tau_poly(p).serialize() for p in first.vars.values()) == list(first.key)
    report = {"arc": t, "new_arc": t_new, "mutable": base_seed.triangulation.is_mutable(t)}
    if not report["mutable"]:
        # the base flip produces a one-sided curve, which has no lift
        report.update(commute=commute, lift_matches=None, projection=None, tau_invariant=tau_ok)
        report["ok"] = False
        return OrbitResult(report, new_base, first)
    lifted = build_double_cover(C.base_signature, new_base.triangulation)
    lift_ok = canonical_label(lifted.total, _strip) == canonical_label(first.triangulation, _strip)
    base_reg = new_base.registry
    projected = sorted(project_pi(p, base_reg).serialize() for p in first.vars.values())
    expected = sorted(2 * [p.serialize() for p in new_base.vars.values()])
    pi_ok = projected == expected and all(
        project_pi(first.vars[lift_name(l, s)], base_reg) == new_base.vars[l]
        for l in new_base.vars
        for s in (0, 1)
    )
    report.update(commute=commute, lift_matches=lift_ok, projection=pi_ok, tau_invariant=tau_ok)
    report["ok"] = commute and lift_ok and pi_ok and tau_ok
    return OrbitResult(report, new_base, first)


def lifted_seeds(sig: SurfaceSignature, T: QuasiTriangulation) -> tuple[DoubleCover, Seed, Seed]:
    """A base seed on T together with the initial seed of its lift."""
    C = build_double_cover(sig, T)
    return C, initial_seed(T), initial_seed(C.total)


# ---- exchange matrices ---------------------------------------------------------


def exchange_matrix(T: QuasiTriangulation, orientation: int = 1) -> tuple[list[str], np.ndarray]:
    """Signed adjacency counts of an oriented triangulation (no folded faces).

    Rows and columns are indexed by arcs and boundary segments.  The stored
    cyclic order of each face is taken as positive; ``orientation=-1`` uses
    the opposite orientation.
    """
    labels = sorted(T.kinds)
    idx = {l: i for i, l in enumerate(labels)}
    n = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for F in T.faces:
        if F.kind is not FaceKind.TRIANGLE:
            raise CoverError("exchange matrices need a triangulation without folded faces")
        for k in range(3):
            n[idx[F.sides[k]], idx[F.sides[(k + 1) % 3]]] += 1
    B = (n - n.T) * orientation
    return labels, B


def matrix_mutation(B: np.ndarray, k: int) -> np.ndarray:
    """Standard mutation of a skew-symmetric (extended) matrix at index k."""
    B = np.asarray(B, dtype=np.int64)
    out = B + (np.abs(B[:, [k]]) * B[[k], :] + B[:, [k]] * np.abs(B[[k], :])) // 2
    out[k, :] = -B[k, :]
    out[:, k] = -B[:, k]
    return out


def _b_pm(labels, B, row_label, base_labels):
    idx = {l: i for i, l in enumerate(labels)}
    r = idx[row_label]
    plus, minus = {}, {}
    for v in base_labels:
        p = m = 0
        for s in (0, 1):
            key = lift_name(v, s)
            if key in idx:
                e = int(B[r, idx[key]])
                p += max(e, 0)
                m += min(e, 0)
        plus[v], minus[v] = p, m
    return plus, minus


def _monomial_pair(plus, minus):
    return sorted([tuple(sorted(plus.items())), tuple(sorted((k, -v) for k, v in minus.items()))])


def exchange_matrix_rule(C: DoubleCover, base_seed: Seed, t: str) -> dict:
    """Check the matrix form of the exchange relation at a mutable arc t."""
    T = base_seed.triangulation
    if not T.is_mutable(t):
        raise CoverError(f"{t!r} is not a mutable arc")
    cover = build_double_cover(C.base_signature, T, allow_trivial=True)
    labels, B = exchange_matrix(cover.total)
    base_labels = sorted(T.kinds)
    a, b = lift_name(t, 0), lift_name(t, 1)
    plus, minus = _b_pm(labels, B, a, base_labels)
    plus2, minus2 = _b_pm(labels, B, b, base_labels)
    # the deck map reverses orientation, so the two lift rows differ by a sign;
    # only the unordered pair of exponent vectors has to agree
    pair = _monomial_pair(plus, minus)
    well_defined = pair == _monomial_pair(plus2, minus2)
    _, Bneg = exchange_matrix(cover.total, orientation=-1)
    orientation_free = pair == _monomial_pair(*_b_pm(labels, Bneg, a, base_labels))

    reg = base_seed.registry
    one = reg.one()
    m1, m2 = one, one
    for v in base_labels:
        x = base_seed.x(v)
        if plus[v]:
            m1 = m1 * x ** plus[v]
        if minus[v]:
            m2 = m2 * x ** (-minus[v])
    rhs_matrix = m1 + m2
    rhs_case = exchange_rhs(base_seed, t)
    mutated = mutate(base_seed, t)
    t_new = next(l for l in mutated.vars if l not in base_seed.vars)
    relation_ok = rhs_matrix == rhs_case and exact_div(rhs_matrix, base_seed.vars[t]) == mutated.vars[t_new]

    entries_ok = bool(np.all(np.abs(B) <= 2)) and bool(np.all(B == -B.T))
    # mutate the matrix at both lifts and compare with the flipped total triangulation
    na, nb = lift_name(t_new, 0), lift_name(t_new, 1)
    T1, _, _ = flip(cover.total, a, na)
    T2, _, _ = flip(T1, b, nb)
    labels2, B2 = exchange_matrix(T2)
    rename = {a: na, b: nb}
    i_a, i_b = labels.index(a), labels.index(b)
    mutated_ab = matrix_mutation(matrix_mutation(B, i_a), i_b)
    mutated_ba = matrix_mutation(matrix_mutation(B, i_b), i_a)
    perm = [labels2.index(rename.get(l, l)) for l in labels]
    B2_old_order = B2[np.ix_(perm, perm)]
    mutable = np.array([cover.total.kinds[l] is Kind.ARC for l in labels])
    mask = mutable[:, None] | mutable[None, :]
    matrix_ok = bool(
        np.all((mutated_ab == B2_old_order)[mask]) and np.all((mutated_ba == B2_old_order)[mask])
    )
    report = {
        "arc": t,
        "b_plus": {k: v for k, v in plus.items() if v},
        "b_minus": {k: v for k, v in minus.items() if v},
        "well_defined": well_defined,
        "orientation_independent": orientation_free,
        "relation": relation_ok,
        "matrix_mutation": matrix_ok,
        "entries_in_range": entries_ok,
        "rhs_matrix": rhs_matrix.serialize(),
        "rhs_exchange": rhs_case.serialize(),
    }
    report["ok"] = all(
        report[k]
        for k in ("well_defined", "orientation_independent", "relation", "matrix_mutation", "entries_in_range")
    )
    return report


def validate_cover(C: DoubleCover) -> list[str]:
    problems = validate(C.total, C.total_signature)
    for a, b in C.tau.items():
        if C.tau[b] != a or a == b:
            problems.append(f"deck map is not a fixed-point-free involution at {a!r}")
    for label, (a, b) in C.lift.items():
        if C.tau[a] != b:
            problems.append(f"lifts of {label!r} are not swapped by the deck map")
    for F in C.total.faces:
        if F.kind is not FaceKind.TRIANGLE:
            problems.append("total surface has a folded face")
    if any(r for _, _, r in C.total.pairs):
        problems.append("total gluing has an orientation-reversing pairing")
    return problems
