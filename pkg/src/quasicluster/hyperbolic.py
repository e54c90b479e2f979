"""Floating-point checks of lambda-length identities in the upper half-plane.

Horocycles are ``(center, diameter)`` pairs; a horocycle centred at infinity
is a horizontal line and its "diameter" is its height.  Isometries are real
2x2 matrices with ``|det| = 1``.  Matrices of determinant -1 act on the upper
half-plane by ``z -> (a conj(z) + b) / (c conj(z) + d)``; on the real line
both kinds act by the same fractional linear formula.

Every ``verify_*`` suite draws its instances from ``numpy.random.default_rng``
with an explicit integer seed and returns a JSON-friendly report dict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

__all__ = [
    "Horocycle",
    "Isometry",
    "DegenerateGeometry",
    "lambda_arc",
    "lambda_closed",
    "verify_ptolemy",
    "verify_trace_skein",
    "verify_antiself",
    "verify_antiself_suite",
    "verify_d_squared",
    "verify_d_squared_suite",
    "verify_arc_curve_resolution",
    "verify_self_intersection_resolution",
    "verify_invariance",
    "run_all",
    "arc_curve_instance",
    "self_intersection_instance",
    "antiself_triple",
    "random_isometry",
]

INF = math.inf
DET_TOL = 1e-12
TRACE_FLOOR = 1e-6


class DegenerateGeometry(ValueError):
    """Coincident centres, zero traces and similar degenerate inputs."""


@dataclass(frozen=True)
class Horocycle:
    center: float
    diameter: float

    def __post_init__(self):
        if not self.diameter > 0:
            raise DegenerateGeometry(f"horocycle diameter must be positive, got {self.diameter}")

    @property
    def at_infinity(self) -> bool:
        return math.isinf(self.center)


@dataclass(frozen=True)
class Isometry:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if abs(abs(self.det) - 1.0) > DET_TOL * max(1.0, self.norm2):
            raise DegenerateGeometry(f"|det| must be 1, got {self.det!r}")

    @classmethod
    def from_matrix(cls, m) -> "Isometry":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @classmethod
    def normalized(cls, m) -> "Isometry":
        """Rescale an invertible matrix to |det| = 1."""
        m = np.asarray(m, dtype=float)
        det = float(np.linalg.det(m))
        if det == 0:
            raise DegenerateGeometry("singular matrix")
        return cls.from_matrix(m / math.sqrt(abs(det)))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def norm2(self) -> float:
        return self.a**2 + self.b**2 + self.c**2 + self.d**2

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def orientation(self) -> int:
        return 1 if self.det > 0 else -1

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "Isometry":
        # adjugate over determinant
        det = self.det
        return Isometry(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def conjugate(self, g: "Isometry") -> "Isometry":
        return g @ self @ g.inverse()

    def apply(self, U: Horocycle) -> Horocycle:
        a, b, c, d = self.a, self.b, self.c, self.d
        det = abs(self.det)
        if U.at_infinity:
            if c == 0:
                return Horocycle(INF, U.diameter * abs(a / d))
            return Horocycle(a / c, det / (c * c * U.diameter))
        u, h = U.center, U.diameter
        den = c * u + d
        if den == 0:
            return Horocycle(INF, det / (c * c * h))
        return Horocycle((a * u + b) / den, h * det / (den * den))


def lambda_arc(U: Horocycle, V: Horocycle) -> float:
    """Penner lambda-length of the decorated geodesic (U, V)."""
    if U.at_infinity and V.at_infinity:
        raise DegenerateGeometry("both horocycles are centred at infinity")
    if U.at_infinity or V.at_infinity:
        H, W = (U, V) if U.at_infinity else (V, U)
        return math.sqrt(H.diameter / W.diameter)
    if U.center == V.center:
        raise DegenerateGeometry("coincident centres")
    return abs(V.center - U.center) / math.sqrt(U.diameter * V.diameter)


def lambda_closed(M: Isometry) -> float:
    """|trace| of a hyperbolic element or glide reflection."""
    t = abs(M.trace)
    if t < DET_TOL:
        raise DegenerateGeometry("zero trace: elliptic element or reflection")
    return t


def diag(x: float, y: float) -> Isometry:
    return Isometry(x, 0.0, 0.0, y)


# reports -------------------------------------------------------------------


def _rel(lhs: float, rhs: float, scale: float | None = None) -> float:
    s = scale if scale is not None else max(abs(lhs), abs(rhs))
    return abs(lhs - rhs) / s if s > 0 else abs(lhs - rhs)


class _Tally:
    def __init__(self, identity: str, seed, tol: float):
        self.identity, self.seed, self.tol = identity, seed, tol
        self.samples = self.excluded = self.failures = 0
        self.max_err = 0.0
        self.worst: dict | None = None

    def record(self, err: float, detail: Callable[[], dict]):
        self.samples += 1
        if err > self.max_err:
            self.max_err = err
        if not err <= self.tol:
            self.failures += 1
            if self.worst is None:
                self.worst = detail()

    def report(self) -> dict:
        out = {
            "identity": self.identity,
            "samples": self.samples,
            "max_rel_error": self.max_err,
            "failures": self.failures,
            "excluded": self.excluded,
            "rng_seed": self.seed,
            "tolerance": self.tol,
            "passed": self.failures == 0 and self.samples > 0,
        }
        if self.worst is not None:
            out["first_failure"] = self.worst
        return out


def _log_uniform(rng, lo: float, hi: float) -> float:
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def random_isometry(rng, orientation: int = 0) -> Isometry:
    """A random matrix with |det| = 1; orientation 0 picks the sign at random."""
    while True:
        m = rng.normal(size=(2, 2))
        det = float(np.linalg.det(m))
        if abs(det) < 1e-3:
            continue
        want = orientation or (1 if rng.random() < 0.5 else -1)
        if (det > 0) != (want > 0):
            m[:, 0] = -m[:, 0]
        return Isometry.normalized(m)


def _samples(n: int) -> Iterator[int]:
    if n < 1:
        raise ValueError("need at least one sample")
    return iter(range(n))


# suites ----------------------------------------------------------------------


def verify_ptolemy(seed: int = 0, samples: int = 1000, tol: float = 1e-9, min_gap: float = 1e-3) -> dict:
    """lambda(13) lambda(24) = lambda(12) lambda(34) + lambda(14) lambda(23) on ordered centres."""
    rng = np.random.default_rng(seed)
    tally = _Tally("ptolemy", seed, tol)
    n = 0
    while n < samples:
        centers = np.sort(rng.uniform(-10, 10, size=4))
        if np.min(np.diff(centers)) < min_gap:
            tally.excluded += 1
            continue
        n += 1
        H = [Horocycle(float(u), _log_uniform(rng, 0.05, 20)) for u in centers]
        L = lambda i, j: lambda_arc(H[i], H[j])
        lhs = L(0, 2) * L(1, 3)
        rhs = L(0, 1) * L(2, 3) + L(0, 3) * L(1, 2)
        tally.record(_rel(lhs, rhs), lambda: {"centers": centers.tolist(), "lhs": lhs, "rhs": rhs})
    return tally.report()


def verify_trace_skein(seed: int = 0, samples: int = 1000, tol: float = 1e-9) -> dict:
    """tr(A) tr(B) = tr(AB) + det(B) tr(AB^-1), for every pair of determinant signs.

    ``samples`` instances are drawn for each of the four sign combinations.
    Errors are measured against the largest of the three trace products,
    since the right-hand side may cancel.
    """
    rng = np.random.default_rng(seed)
    tally = _Tally("trace_skein", seed, tol)
    roundtrip = 0.0
    for sa in (1, -1):
        for sb in (1, -1):
            n = 0
            while n < samples:
                A, B = random_isometry(rng, sa), random_isometry(rng, sb)
                if abs(A.trace) < TRACE_FLOOR or abs(B.trace) < TRACE_FLOOR:
                    tally.excluded += 1
                    continue
                n += 1
                Binv = B.inverse()
                cond = math.sqrt(B.norm2 * Binv.norm2)
                roundtrip = max(roundtrip, float(np.max(np.abs(B.matrix @ Binv.matrix - np.eye(2)))) / cond)
                lhs = A.trace * B.trace
                t1, t2 = (A @ B).trace, (A @ Binv).trace
                rhs = t1 + B.det * t2
                scale = max(abs(lhs), abs(t1), abs(t2))
                tally.record(_rel(lhs, rhs, scale), lambda: {"A": A.matrix.tolist(), "B": B.matrix.tolist()})
    rep = tally.report()
    rep["inverse_roundtrip_error"] = roundtrip
    rep["passed"] = rep["passed"] and roundtrip <= 1e-12
    return rep


def antiself_triple(c: float, d: float, u: float = 1.0, h: float = 1.0):
    """Horocycles U, V, W and the glide reflection D with lambda(U,V) = c and |tr D| = d.

    Only the ratio ``|u| / h`` is constrained; the given ``u`` fixes the scale.
    """
    if not (c > 0 and d > 0):
        raise DegenerateGeometry("c and d must be positive")
    mu = (d + math.sqrt(d * d + 4)) / 2
    ratio = c / (mu**2 - mu**-2)
    h = abs(u) / ratio
    U = Horocycle(u, h)
    W = Horocycle(-(mu**2) * u, mu**2 * h)
    V = Horocycle(mu**4 * u, mu**4 * h)
    return U, V, W, diag(mu, -1 / mu), mu


def _horo_err(X: Horocycle, Y: Horocycle) -> float:
    return max(_rel(X.center, Y.center), _rel(X.diameter, Y.diameter))


def verify_antiself(c: float, d: float, g: Isometry | None = None, tol: float = 1e-9) -> dict:
    """Check the anti-self-folded triple for given (c, d), optionally moved by g."""
    U, V, W, D, mu = antiself_triple(c, d)
    if g is not None:
        U, V, W, D = g.apply(U), g.apply(V), g.apply(W), D.conjugate(g)
    checks = {
        "trace": _rel(abs(D.trace), d),
        "lambda_UV": _rel(lambda_arc(U, V), c),
        "lambda_UW": _rel(lambda_arc(U, W), c / d),
        "lambda_WV": _rel(lambda_arc(W, V), c / d),
        "D(U)=W": _horo_err(D.apply(U), W),
        "D(W)=V": _horo_err(D.apply(W), V),
        "orientation_reversing": 0.0 if D.orientation < 0 else 1.0,
    }
    return {
        "c": c,
        "d": d,
        "mu": mu,
        "errors": checks,
        "max_rel_error": max(checks.values()),
        "passed": max(checks.values()) <= tol,
    }


def verify_antiself_suite(seed: int = 0, samples: int = 1000, tol: float = 1e-9) -> dict:
    rng = np.random.default_rng(seed)
    tally = _Tally("antiself", seed, tol)
    for _ in _samples(samples):
        c, d = _log_uniform(rng, 0.05, 20), _log_uniform(rng, 0.05, 20)
        rep = verify_antiself(c, d, random_isometry(rng), tol)
        tally.record(rep["max_rel_error"], lambda: rep)
    return tally.report()


def verify_d_squared(mu: float, g: Isometry | None = None, tol: float = 1e-9) -> dict:
    """|tr(D^2)| = tr(D)^2 + 2 for D = diag(mu, -1/mu), optionally conjugated."""
    if not mu > 1:
        raise DegenerateGeometry("mu must exceed 1")
    D = diag(mu, -1 / mu)
    if g is not None:
        D = D.conjugate(g)
    lam_d = lambda_closed(D)
    lam_d2 = abs((D @ D).trace)
    err = _rel(lam_d2, lam_d**2 + 2)
    return {"mu": mu, "lambda_d": lam_d, "lambda_d2": lam_d2, "max_rel_error": err, "passed": err <= tol}


def verify_d_squared_suite(seed: int = 0, samples: int = 1000, tol: float = 1e-9) -> dict:
    rng = np.random.default_rng(seed)
    tally = _Tally("d_squared", seed, tol)
    n = 0
    while n < samples:
        mu = float(rng.uniform(1.0, 100.0))
        if mu - 1 / mu < TRACE_FLOOR:
            tally.excluded += 1
            continue
        n += 1
        rep = verify_d_squared(mu, random_isometry(rng), tol)
        tally.record(rep["max_rel_error"], lambda: rep)
    return tally.report()


def _eta(rng, tally: _Tally, one_sided: bool) -> float | None:
    eta = float(rng.uniform(1.0, 10.0))
    t = eta - 1 / eta if one_sided else eta + 1 / eta
    if t < TRACE_FLOOR:
        tally.excluded += 1
        return None
    return eta


def arc_curve_instance(eta: float, U: Horocycle, V: Horocycle, one_sided: bool) -> dict:
    """lambda-lengths of a, b and the two resolutions e=(U,B(V)), f=(B(U),V)."""
    B = diag(eta, -1 / eta if one_sided else 1 / eta)
    return {
        "a": lambda_arc(U, V),
        "b": lambda_closed(B),
        "e": lambda_arc(U, B.apply(V)),
        "f": lambda_arc(B.apply(U), V),
    }


def verify_arc_curve_resolution(seed: int = 0, samples: int = 1000, tol: float = 1e-9) -> dict:
    """lambda(a) lambda(b) = lambda(e) + lambda(f) for an arc crossing a closed curve.

    The arc joins u < 0 < v.  In the one-sided case both resolutions are
    honest arcs only when -eta^2 v < u < -v / eta^2, so the sampler draws u
    from that window.
    """
    rng = np.random.default_rng(seed)
    out = {}
    for one_sided in (False, True):
        tally = _Tally("arc_curve_" + ("one_sided" if one_sided else "two_sided"), seed, tol)
        n = 0
        while n < samples:
            eta = _eta(rng, tally, one_sided)
            if eta is None:
                continue
            v = _log_uniform(rng, 0.05, 20)
            if one_sided:
                lo, hi = -(eta**2) * v, -v / eta**2
                u = float(lo + (hi - lo) * rng.uniform(0.02, 0.98))
            else:
                u = -_log_uniform(rng, 0.05, 20)
            n += 1
            U, V = Horocycle(u, _log_uniform(rng, 0.05, 20)), Horocycle(v, _log_uniform(rng, 0.05, 20))
            lam = arc_curve_instance(eta, U, V, one_sided)
            lhs, rhs = lam["a"] * lam["b"], lam["e"] + lam["f"]
            tally.record(_rel(lhs, rhs), lambda: {"eta": eta, "u": u, "v": v, **lam})
        out["one_sided" if one_sided else "two_sided"] = tally.report()
    return _merge("arc_curve", seed, out)


def self_intersection_instance(eta: float, U: Horocycle, V: Horocycle, one_sided: bool) -> dict:
    """lambda-lengths for the arc a = (U, B(V)) winding once around b."""
    B = diag(eta, -1 / eta if one_sided else 1 / eta)
    return {
        "a": lambda_arc(U, B.apply(V)),
        "b": lambda_closed(B),
        "c": lambda_arc(U, V),
        "d": lambda_arc(V, B.apply(U)),
    }


def verify_self_intersection_resolution(seed: int = 0, samples: int = 1000, tol: float = 1e-9) -> dict:
    """lambda(a) = lambda(b) lambda(c) + lambda(d) for a self-crossing arc.

    Both branches take 0 < u < v.  In the two-sided branch the identity with
    a positive lambda(d) needs v < eta^2 u, i.e. lambda(d) = (eta^2 u - v) / (eta sqrt(hk)).
    """
    rng = np.random.default_rng(seed)
    out = {}
    for one_sided in (False, True):
        tally = _Tally("self_intersection_" + ("one_sided" if one_sided else "two_sided"), seed, tol)
        n = 0
        while n < samples:
            eta = _eta(rng, tally, one_sided)
            if eta is None:
                continue
            u = _log_uniform(rng, 0.05, 20)
            hi = eta**2 * u if not one_sided else 20 * u
            v = float(u + (hi - u) * rng.uniform(0.02, 0.98))
            n += 1
            U, V = Horocycle(u, _log_uniform(rng, 0.05, 20)), Horocycle(v, _log_uniform(rng, 0.05, 20))
            lam = self_intersection_instance(eta, U, V, one_sided)
            lhs, rhs = lam["a"], lam["b"] * lam["c"] + lam["d"]
            tally.record(_rel(lhs, rhs), lambda: {"eta": eta, "u": u, "v": v, **lam})
        out["one_sided" if one_sided else "two_sided"] = tally.report()
    return _merge("self_intersection", seed, out)


def verify_invariance(seed: int = 0, samples: int = 1000, tol: float = 1e-9) -> dict:
    """lambda(gU, gV) = lambda(U, V) and |tr(g M g^-1)| = |tr M| for random g of either orientation."""
    rng = np.random.default_rng(seed)
    tally = _Tally("invariance", seed, tol)
    n = 0
    while n < samples:
        u, v = rng.uniform(-10, 10, size=2)
        if abs(u - v) < 1e-3:
            tally.excluded += 1
            continue
        M = random_isometry(rng)
        if abs(M.trace) < TRACE_FLOOR:
            tally.excluded += 1
            continue
        n += 1
        U, V = Horocycle(float(u), _log_uniform(rng, 0.05, 20)), Horocycle(float(v), _log_uniform(rng, 0.05, 20))
        g = random_isometry(rng)
        err = max(
            _rel(lambda_arc(g.apply(U), g.apply(V)), lambda_arc(U, V)),
            _rel(lambda_closed(M.conjugate(g)), lambda_closed(M)),
        )
        tally.record(err, lambda: {"u": float(u), "v": float(v), "g": g.matrix.tolist()})
    return tally.report()


def _merge(identity: str, seed, parts: dict) -> dict:
    return {
        "identity": identity,
        "samples": sum(p["samples"] for p in parts.values()),
        "max_rel_error": max(p["max_rel_error"] for p in parts.values()),
        "failures": sum(p["failures"] for p in parts.values()),
        "excluded": sum(p["excluded"] for p in parts.values()),
        "rng_seed": seed,
        "branches": parts,
        "passed": all(p["passed"] for p in parts.values()),
    }


SUITES = {
    "ptolemy": verify_ptolemy,
    "trace_skein": verify_trace_skein,
    "antiself": verify_antiself_suite,
    "d_squared": verify_d_squared_suite,
    "arc_curve": verify_arc_curve_resolution,
    "self_intersection": verify_self_intersection_resolution,
    "invariance": verify_invariance,
}


def run_all(seed: int = 0, samples: int = 1000, tol: float = 1e-9) -> list[dict]:
    """Every suite, each seeded from ``seed`` and its position in the list."""
    seeds = np.random.SeedSequence(seed).generate_state(len(SUITES))
    return [fn(seed=int(s), samples=samples, tol=tol) for fn, s in zip(SUITES.values(), seeds)]
