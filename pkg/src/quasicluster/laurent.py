"""Exact multivariate Laurent polynomials with integer coefficients.

A polynomial is a mapping from dense exponent tuples (one slot per registry
variable, negative entries allowed) to nonzero Python ints.  Values are
immutable once built; arithmetic always returns fresh objects.
"""

from __future__ import annotations

import heapq
import re
from fractions import Fraction
from operator import add, sub
from typing import Iterable, Mapping, Union

__all__ = [
    "VarRegistry",
    "LaurentPoly",
    "NonExactDivision",
    "RegistryMismatch",
    "exact_div",
    "eval_numeric",
    "eval_exact",
    "parse",
]

Number = Union[int, Fraction, float]


class NonExactDivision(ArithmeticError):
    """The quotient is not a Laurent polynomial."""


class RegistryMismatch(ValueError):
    pass


class VarRegistry:
    """Ordered, immutable list of variable names."""

    __slots__ = ("names", "_index", "_zero")

    def __init__(self, names: Iterable[str]):
        self.names = tuple(names)
        self._index = {n: i for i, n in enumerate(self.names)}
        if len(self._index) != len(self.names):
            raise ValueError("duplicate variable names")
        for n in self.names:
            if not _NAME_RE.fullmatch(n):
                raise ValueError(f"illegal variable name {n!r}")
        self._zero = (0,) * len(self.names)

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, VarRegistry) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"VarRegistry({list(self.names)!r})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def zero(self) -> "LaurentPoly":
        return LaurentPoly(self, {})

    def const(self, c: int) -> "LaurentPoly":
        return LaurentPoly(self, {self._zero: c} if c else {})

    def one(self) -> "LaurentPoly":
        return self.const(1)

    def gen(self, name: str) -> "LaurentPoly":
        return self.monomial({name: 1})

    def monomial(self, exps: Mapping[str, int], coeff: int = 1) -> "LaurentPoly":
        e = [0] * len(self.names)
        for name, k in exps.items():
            e[self.index(name)] += k
        return LaurentPoly(self, {tuple(e): coeff} if coeff else {})

    def gens(self) -> dict[str, "LaurentPoly"]:
        return {n: self.gen(n) for n in self.names}


_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.']*")


def _lift(x, registry: VarRegistry) -> "LaurentPoly":
    if isinstance(x, LaurentPoly):
        if x.registry is not registry and x.registry != registry:
            raise RegistryMismatch("operands live in different registries")
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return registry.const(x)
    return NotImplemented


class LaurentPoly:
    __slots__ = ("registry", "terms", "_hash", "_text")

    def __init__(self, registry: VarRegistry, terms: Mapping[tuple, int]):
        self.registry = registry
        self.terms = {e: c for e, c in terms.items() if c}
        self._hash = None
        self._text = None

    @classmethod
    def _raw(cls, registry, terms):
        # caller guarantees no zero coefficients
        obj = cls.__new__(cls)
        obj.registry = registry
        obj.terms = terms
        obj._hash = None
        obj._text = None
        return obj

    # ---- predicates -------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def variables(self) -> list[str]:
        """Names that occur with a nonzero exponent."""
        used = set()
        for e in self.terms:
            used.update(i for i, k in enumerate(e) if k)
        return [self.registry.names[i] for i in sorted(used)]

    def coefficients(self) -> list[int]:
        return [self.terms[e] for e in sorted(self.terms, reverse=True)]

    def degree_bounds(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Componentwise minimum and maximum exponent."""
        es = list(self.terms)
        if not es:
            z = self.registry._zero
            return z, z
        return tuple(map(min, *es)) if len(es) > 1 else es[0], (
            tuple(map(max, *es)) if len(es) > 1 else es[0]
        )

    # ---- arithmetic -------------------------------------------------
    def __add__(self, other):
        other = _lift(other, self.registry)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return LaurentPoly._raw(self.registry, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw(self.registry, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = _lift(other, self.registry)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            if not other:
                return self.registry.zero()
            return LaurentPoly._raw(self.registry, {e: c * other for e, c in self.terms.items()})
        other = _lift(other, self.registry)
        if other is NotImplemented:
            return other
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict[tuple, int] = {}
        get = out.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple(map(add, ea, eb))
                out[e] = get(e, 0) + ca * cb
        return LaurentPoly._raw(self.registry, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            if not self.is_monomial():
                raise NonExactDivision("negative power of a non-monomial")
            ((e, c),) = self.terms.items()
            if c not in (1, -1):
                raise NonExactDivision("negative power of a non-unit coefficient")
            return LaurentPoly._raw(self.registry, {tuple(x * k for x in e): c ** (-k)})
        result = self.registry.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def shift(self, e: tuple, coeff: int = 1) -> "LaurentPoly":
        """Multiply by the monomial coeff * x^e."""
        return LaurentPoly._raw(
            self.registry, {tuple(map(add, k, e)): c * coeff for k, c in self.terms.items()}
        )

    def exact_div(self, other) -> "LaurentPoly":
        return exact_div(self, other)

    # ---- comparison & hashing --------------------------------------
    def __eq__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            other = self.registry.const(other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.registry == other.registry and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.registry.names, frozenset(self.terms.items())))
        return self._hash

    # ---- text ----------------------------------------------------------
    def serialize(self) -> str:
        if self._text is None:
            self._text = _serialize(self)
        return self._text

    __str__ = serialize

    def __repr__(self) -> str:
        return f"LaurentPoly({self.serialize()!r})"

    # ---- substitution -----------------------------------------------
    def remap(self, target: VarRegistry, mapping: Mapping[str, str]) -> "LaurentPoly":
        """Ring map sending each generator to a generator of ``target``.

        Names absent from ``mapping`` keep their own name in ``target``.
        """
        idx = [target.index(mapping.get(n, n)) for n in self.registry.names]
        width = len(target)
        out: dict[tuple, int] = {}
        for e, c in self.terms.items():
            t = [0] * width
            for i, k in enumerate(e):
                if k:
                    t[idx[i]] += k
            key = tuple(t)
            out[key] = out.get(key, 0) + c
        return LaurentPoly(target, out)

    def substitute(self, values: Mapping[str, object], one=1, divide=None):
        """Evaluate in an arbitrary commutative ring of values.

        Negative exponents are cleared with a common denominator and removed
        at the end by ``divide`` (defaults to exact division for polynomials
        and true division otherwise).
        """
        if divide is None:
            divide = divide_values
        names = self.registry.names
        lo, _ = self.degree_bounds()
        neg = tuple(-min(k, 0) for k in lo)
        cache: dict[tuple[int, int], object] = {}

        def power(i, k):
            key = (i, k)
            if key not in cache:
                try:
                    v = values[names[i]]
                except KeyError:
                    raise KeyError(f"no value for variable {names[i]!r}") from None
                r = one
                for _ in range(k):
                    r = r * v
                cache[key] = r
            return cache[key]

        num = None
        for e in sorted(self.terms, reverse=True):
            term = self.terms[e]
            acc = None
            for i, k in enumerate(e):
                k += neg[i]
                if k:
                    acc = power(i, k) if acc is None else acc * power(i, k)
            val = term * one if acc is None else acc * term
            num = val if num is None else num + val
        if num is None:
            num = 0 * one
        den = None
        for i, k in enumerate(neg):
            if k:
                den = power(i, k) if den is None else den * power(i, k)
        return num if den is None else divide(num, den)


def divide_values(num, den):
    """Exact quotient for Laurent polynomials and ints, true division otherwise."""
    if isinstance(num, LaurentPoly) or isinstance(den, LaurentPoly):
        if not isinstance(den, LaurentPoly):
            den = num.registry.const(den)
        if not isinstance(num, LaurentPoly):
            num = den.registry.const(num)
        return exact_div(num, den)
    if isinstance(num, int) and isinstance(den, int):
        if den == 0:
            raise ZeroDivisionError("division by zero value")
        q, r = divmod(num, den)
        return q if r == 0 else Fraction(num, den)
    if den == 0:
        raise ZeroDivisionError("division by zero value")
    return num / den


def exact_div(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    """Return r with r * q == p, or raise NonExactDivision."""
    if isinstance(q, int):
        q = p.registry.const(q)
    if p.registry is not q.registry and p.registry != q.registry:
        raise RegistryMismatch("operands live in different registries")
    if not q.terms:
        raise ZeroDivisionError("division by the zero polynomial")
    reg = p.registry
    if not p.terms:
        return reg.zero()
    if len(q.terms) == 1:
        ((eq, cq),) = q.terms.items()
        out = {}
        for e, c in p.terms.items():
            quo, rem = divmod(c, cq)
            if rem:
                raise NonExactDivision(f"coefficient {c} not divisible by {cq}")
            out[tuple(map(sub, e, eq))] = quo
        return LaurentPoly._raw(reg, out)
    # strip the content monomials, then divide honest polynomials
    plo, _ = p.degree_bounds()
    qlo, _ = q.degree_bounds()
    p0 = {tuple(map(sub, e, plo)): c for e, c in p.terms.items()}
    q0 = {tuple(map(sub, e, qlo)): c for e, c in q.terms.items()}
    r0 = _poly_divide(p0, q0)
    offset = tuple(map(sub, plo, qlo))
    return LaurentPoly._raw(reg, {tuple(map(add, e, offset)): c for e, c in r0.items()})


def _poly_divide(p: dict, q: dict) -> dict:
    # lex-leading-term long division; q has no monomial factor, so any
    # Laurent quotient is already a polynomial
    lt = max(q)
    lc = q[lt]
    tail = [(e, c) for e, c in q.items() if e != lt]
    rem = dict(p)
    heap = [tuple(-x for x in e) for e in rem]
    heapq.heapify(heap)
    quot: dict[tuple, int] = {}
    while heap:
        key = heapq.heappop(heap)
        e = tuple(-x for x in key)
        c = rem.pop(e, 0)
        if not c:
            continue
        shift = tuple(map(sub, e, lt))
        if min(shift) < 0:
            raise NonExactDivision("leading term not divisible")
        k, r = divmod(c, lc)
        if r:
            raise NonExactDivision("leading coefficient not divisible")
        quot[shift] = k
        for de, dc in tail:
            t = tuple(map(add, shift, de))
            old = rem.get(t)
            if old is None:
                rem[t] = -k * dc
                heapq.heappush(heap, tuple(-x for x in t))
            else:
                v = old - k * dc
                if v:
                    rem[t] = v
                else:
                    del rem[t]
    return quot


# ---- evaluation ------------------------------------------------------------


def eval_exact(p: LaurentPoly, assignment: Mapping[str, Number]) -> Fraction:
    values = {}
    for name in p.variables():
        if name not in assignment:
            raise KeyError(f"no value for variable {name!r}")
        values[name] = Fraction(assignment[name])
    _check_nonzero(p, values)
    return Fraction(p.substitute(values, one=Fraction(1), divide=lambda a, b: a / b))


def eval_numeric(p: LaurentPoly, assignment: Mapping[str, Number]) -> float:
    """Evaluate p; exact when all inputs are rational, then rounded once."""
    names = p.variables()
    for name in names:
        if name not in assignment:
            raise KeyError(f"no value for variable {name!r}")
    if all(isinstance(assignment[n], (int, Fraction)) for n in names):
        return float(eval_exact(p, assignment))
    values = {n: float(assignment[n]) for n in names}
    _check_nonzero(p, values)
    total = 0.0
    for e, c in p.terms.items():
        t = float(c)
        for i, k in enumerate(e):
            if k:
                t *= values[p.registry.names[i]] ** k
        total += t
    return total


def _check_nonzero(p, values):
    lo, _ = p.degree_bounds()
    for i, k in enumerate(lo):
        name = p.registry.names[i]
        if k < 0 and values.get(name) == 0:
            raise ZeroDivisionError(f"variable {name!r} is zero but appears inverted")


# ---- text format -----------------------------------------------------------


def _serialize(p: LaurentPoly) -> str:
    if not p.terms:
        return "0"
    names = p.registry.names
    parts = []
    for e in sorted(p.terms, reverse=True):
        c = p.terms[e]
        factors = [str(abs(c))]
        for i, k in enumerate(e):
            if k == 1:
                factors.append(names[i])
            elif k:
                factors.append(f"{names[i]}^{k}")
        body = "*".join(factors)
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts)


_TERM_SPLIT = re.compile(r"(?<![\^*])\s*([+-])\s*")


def parse(text: str, registry: VarRegistry) -> LaurentPoly:
    """Read the canonical text form (coefficients and factors in any order)."""
    s = text.strip()
    if not s:
        raise ValueError("empty polynomial text")
    if s[0] not in "+-":
        s = "+" + s
    pieces = _TERM_SPLIT.split(s)
    # split yields ['', sign, term, sign, term, ...]
    if pieces[0].strip():
        raise ValueError(f"cannot parse {text!r}")
    out: dict[tuple, int] = {}
    width = len(registry)
    for sign, body in zip(pieces[1::2], pieces[2::2]):
        body = body.strip()
        if not body:
            raise ValueError(f"cannot parse {text!r}")
        coeff = -1 if sign == "-" else 1
        e = [0] * width
        for factor in body.split("*"):
            factor = factor.strip()
            if not factor:
                raise ValueError(f"empty factor in {text!r}")
            if factor.isdigit():
                coeff *= int(factor)
                continue
            name, _, power = factor.partition("^")
            e[registry.index(name.strip())] += int(power) if power else 1
        key = tuple(e)
        out[key] = out.get(key, 0) + coeff
    return LaurentPoly(registry, out)
