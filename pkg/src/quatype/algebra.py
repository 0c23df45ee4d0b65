"""Exact multivector arithmetic in the real Clifford algebras Cl(p,q).

A basis blade is a bit set over the n = p+q generators (bit i-1 stands for
the i-th generator, 1-based); a multivector is a sparse map from blade to an
exact rational coefficient.  Coefficients are Python ints whenever the
denominator is 1 and :class:`fractions.Fraction` otherwise, so identities
proved over the rationals can be asserted with ``==``.

All values are immutable after construction and every operation is a pure
function.  Products of integer multivectors are routed through the dense
kernels in :mod:`quatype._accel` when that is profitable and provably safe
against int64 overflow; the sparse path is the reference implementation and
the only one that handles Fraction coefficients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from random import Random
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from . import _accel

MAX_DIMENSION = 12

Coeff = Union[int, Fraction]

# dense dispatch: below this many blade pairs the sparse dict loop wins
_DENSE_MIN_PAIRS = 64
# any product whose coefficient bound stays under this is int64-safe
_INT64_SAFE_BOUND = 1 << 62


class SignatureMismatchError(ValueError):
    """Operands constructed over different algebras were combined."""


@dataclass(frozen=True)
class Signature:
    """The algebra Cl(p,q): p generators square to +1, q to -1."""

    p: int
    q: int

    def __post_init__(self) -> None:
        if self.p < 0 or self.q < 0:
            raise ValueError("generator counts must be nonnegative")
        if not 1 <= self.p + self.q <= MAX_DIMENSION:
            raise ValueError(f"need 1 <= p+q <= {MAX_DIMENSION}, got p+q={self.p + self.q}")

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def neg_mask(self) -> int:
        """Bit mask of the generators squaring to -1."""
        return ((1 << self.n) - 1) ^ ((1 << self.p) - 1)

    def metric(self, a: int) -> int:
        """Square of generator ``a`` (1-based): +1 or -1."""
        if not 1 <= a <= self.n:
            raise ValueError(f"generator index {a} outside 1..{self.n}")
        return 1 if a <= self.p else -1

    def __str__(self) -> str:
        return f"Cl({self.p},{self.q})"


# ---------------------------------------------------------------------------
# blades


def blade_bits(indices: Iterable[int]) -> int:
    """Bit set for the blade on the given distinct 1-based generator indices."""
    bits = 0
    for a in indices:
        if a < 1:
            raise ValueError(f"generator indices are 1-based, got {a}")
        bit = 1 << (a - 1)
        if bits & bit:
            raise ValueError(f"repeated generator index {a}")
        bits |= bit
    return bits


def blade_indices(bits: int) -> tuple[int, ...]:
    """Sorted 1-based generator indices of a blade bit set."""
    return tuple(i + 1 for i in range(bits.bit_length()) if bits >> i & 1)


def blade_grade(bits: int) -> int:
    return bits.bit_count()


def blade_name(bits: int) -> str:
    """Canonical display name: ``e`` for the identity, ``e12`` for e^1 e^2.

    Indices above 9 are comma-separated to stay unambiguous.
    """
    if bits == 0:
        return "e"
    idx = blade_indices(bits)
    if idx[-1] <= 9:
        return "e" + "".join(str(i) for i in idx)
    return "e" + ",".join(str(i) for i in idx)


def _swap_parity(a: int, b: int) -> int:
    """Parity of the transposition count to merge blades a and b."""
    s = 0
    t = a >> 1
    while t:
        s += (t & b).bit_count()
        t >>= 1
    return s & 1


def blade_product(sig: Signature, a: int, b: int) -> tuple[int, int]:
    """Geometric product of two basis blades: (sign, result blade).

    The result blade is ``a ^ b``; the sign folds reordering parity with the
    metric squares of all shared generators, so it is always +1 or -1.
    """
    limit = 1 << sig.n
    if not (0 <= a < limit and 0 <= b < limit):
        raise ValueError(f"blade outside {sig}")
    s = _swap_parity(a, b) ^ ((a & b & sig.neg_mask).bit_count() & 1)
    return (-1 if s else 1), a ^ b


def ext_blade_product(a: int, b: int) -> tuple[int, int]:
    """Exterior product of two basis blades: (sign, blade); sign 0 on overlap."""
    if a & b:
        return 0, 0
    return (-1 if _swap_parity(a, b) else 1), a | b


# ---------------------------------------------------------------------------
# coefficient plumbing


def _as_coeff(value) -> Coeff:
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else value
    raise TypeError(f"exact coefficients must be int or Fraction, got {type(value).__name__}")


def _mul_sparse(ca: dict, cb: dict, neg_mask: int, exterior: bool) -> dict:
    out: dict = {}
    for a, x in ca.items():
        a1 = a >> 1
        for b, y in cb.items():
            if exterior and a & b:
                continue
            s = (a & b & neg_mask).bit_count()
            t = a1
            while t:
                s += (t & b).bit_count()
                t >>= 1
            key = a ^ b
            v = x * y
            cur = out.get(key, 0)
            out[key] = cur - v if s & 1 else cur + v
    return {k: v for k, v in out.items() if v}


def _int_bound(coeffs: dict) -> int | None:
    """Max abs value if every coefficient is an int, else None."""
    m = 0
    for v in coeffs.values():
        if not isinstance(v, int):
            return None
        if v < 0:
            v = -v
        if v > m:
            m = v
    return m


def _mul_dense(ca: dict, cb: dict, sig: Signature, exterior: bool, dtype) -> dict:
    ia = np.fromiter(ca.keys(), np.int64, len(ca))
    va = np.fromiter(ca.values(), dtype, len(ca))
    ib = np.fromiter(cb.keys(), np.int64, len(cb))
    vb = np.fromiter(cb.values(), dtype, len(cb))
    out = _accel.product_dense(ia, va, ib, vb, sig.neg_mask, sig.n, exterior=exterior)
    nz = np.flatnonzero(out)
    if dtype is np.int64:
        return {int(k): int(out[k]) for k in nz}
    return {int(k): float(out[k]) for k in nz}


def _mul_coeffs(ca: dict, cb: dict, sig: Signature, exterior: bool, approx: bool) -> dict:
    if not ca or not cb:
        return {}
    if _accel.BACKEND != "python" and len(ca) * len(cb) >= _DENSE_MIN_PAIRS:
        if approx:
            return _mul_dense(ca, cb, sig, exterior, np.float64)
        ma = _int_bound(ca)
        mb = _int_bound(cb) if ma is not None else None
        if mb is not None and ma * mb * min(len(ca), len(cb)) < _INT64_SAFE_BOUND:
            return _mul_dense(ca, cb, sig, exterior, np.int64)
    return _mul_sparse(ca, cb, sig.neg_mask, exterior)


# ---------------------------------------------------------------------------
# multivectors


class Multivector:
    """Sparse exact multivector; zero coefficients are never stored."""

    __slots__ = ("sig", "_coeffs")

    def __init__(self, sig: Signature, coeffs: Mapping[int, Coeff] | Iterable[tuple[int, Coeff]] = ()):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        limit = 1 << sig.n
        acc: dict[int, Coeff] = {}
        for blade, value in items:
            blade = int(blade)
            if not 0 <= blade < limit:
                raise ValueError(f"blade {blade} outside {sig}")
            acc[blade] = acc.get(blade, 0) + _as_coeff(value)
        self.sig = sig
        self._coeffs = {k: _as_coeff(v) for k, v in acc.items() if v}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, sig: Signature) -> "Multivector":
        return cls(sig)

    @classmethod
    def scalar(cls, sig: Signature, value: Coeff) -> "Multivector":
        return cls(sig, {0: value})

    @classmethod
    def blade(cls, sig: Signature, indices: Iterable[int], value: Coeff = 1) -> "Multivector":
        return cls(sig, {blade_bits(indices): value})

    @classmethod
    def generator(cls, sig: Signature, a: int) -> "Multivector":
        sig.metric(a)  # validates the index
        return cls(sig, {1 << (a - 1): 1})

    # -- inspection --------------------------------------------------------

    def coefficient(self, blade: int) -> Coeff:
        return self._coeffs.get(blade, 0)

    def terms(self) -> list[tuple[int, Coeff]]:
        """(blade, coefficient) pairs sorted by grade then blade bits."""
        return sorted(self._coeffs.items(), key=lambda kv: (blade_grade(kv[0]), kv[0]))

    def grades(self) -> frozenset[int]:
        return frozenset(blade_grade(b) for b in self._coeffs)

    def max_abs(self):
        return max((abs(v) for v in self._coeffs.values()), default=0)

    def __len__(self) -> int:
        return len(self._coeffs)

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.sig == other.sig and self._coeffs == other._coeffs

    __hash__ = None

    def __str__(self) -> str:
        return format_multivector(self)

    def __repr__(self) -> str:
        return f"Multivector({self.sig}, {format_multivector(self)})"

    # -- arithmetic --------------------------------------------------------

    def _require_same_sig(self, other: "Multivector") -> None:
        if self.sig != other.sig:
            raise SignatureMismatchError(f"cannot combine {self.sig} with {other.sig}")

    def __add__(self, other: "Multivector") -> "Multivector":
        if not isinstance(other, Multivector):
            return NotImplemented
        self._require_same_sig(other)
        out = dict(self._coeffs)
        for b, v in other._coeffs.items():
            out[b] = out.get(b, 0) + v
        return Multivector(self.sig, out)

    def __sub__(self, other: "Multivector") -> "Multivector":
        if not isinstance(other, Multivector):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "Multivector":
        return Multivector(self.sig, {b: -v for b, v in self._coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, Multivector):
            self._require_same_sig(other)
            return Multivector(self.sig, _mul_coeffs(self._coeffs, other._coeffs, self.sig, False, False))
        if isinstance(other, (int, Fraction)):
            if not other:
                return Multivector.zero(self.sig)
            return Multivector(self.sig, {b: v * other for b, v in self._coeffs.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __xor__(self, other: "Multivector") -> "Multivector":
        """Exterior (wedge) product.  Binds loosely in Python: parenthesize."""
        if not isinstance(other, Multivector):
            return NotImplemented
        self._require_same_sig(other)
        return Multivector(self.sig, _mul_coeffs(self._coeffs, other._coeffs, self.sig, True, False))

    def __pow__(self, m: int) -> "Multivector":
        if not isinstance(m, int) or m < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Multivector.scalar(self.sig, 1)
        base = self
        while m:
            if m & 1:
                result = result * base
            m >>= 1
            if m:
                base = base * base
        return result


def geo_mul(u: Multivector, v: Multivector) -> Multivector:
    """Geometric (Clifford) product."""
    return u * v


def ext_mul(u: Multivector, v: Multivector) -> Multivector:
    """Exterior (wedge) product: index-alternated part of the geometric product."""
    return u ^ v


def geo_chain(us: Sequence[Multivector]) -> Multivector:
    """Left-folded geometric product of one or more multivectors."""
    if not us:
        raise ValueError("empty product")
    return reduce(geo_mul, us)


def grade_project(u: Multivector, k: int) -> Multivector:
    """Keep only the grade-k part of u."""
    if not 0 <= k <= u.sig.n:
        raise ValueError(f"grade {k} outside 0..{u.sig.n}")
    return Multivector(u.sig, {b: v for b, v in u._coeffs.items() if blade_grade(b) == k})


def parity_split(u: Multivector) -> tuple[Multivector, Multivector]:
    """Split into (even, odd) grade parts; the two sum back to u."""
    even: dict = {}
    odd: dict = {}
    for b, v in u._coeffs.items():
        (odd if blade_grade(b) & 1 else even)[b] = v
    return Multivector(u.sig, even), Multivector(u.sig, odd)


def qtype_project(u: Multivector, t: int) -> Multivector:
    """Keep the grades congruent to t mod 4; the four projections sum to u."""
    if t not in (0, 1, 2, 3):
        raise ValueError(f"residue class must be 0..3, got {t}")
    return Multivector(u.sig, {b: v for b, v in u._coeffs.items() if blade_grade(b) % 4 == t})


# ---------------------------------------------------------------------------
# approximate (float) multivectors for the power-series operations


class ApproxMultivector:
    """Float-coefficient twin of :class:`Multivector`, used by series code.

    Shares the blade encoding and product machinery; the exact class never
    consumes these.
    """

    __slots__ = ("sig", "_coeffs")

    def __init__(self, sig: Signature, coeffs: Mapping[int, float] | Iterable[tuple[int, float]] = ()):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        limit = 1 << sig.n
        acc: dict[int, float] = {}
        for blade, value in items:
            blade = int(blade)
            if not 0 <= blade < limit:
                raise ValueError(f"blade {blade} outside {sig}")
            acc[blade] = acc.get(blade, 0.0) + float(value)
        self.sig = sig
        self._coeffs = {k: v for k, v in acc.items() if v != 0.0}

    @classmethod
    def zero(cls, sig: Signature) -> "ApproxMultivector":
        return cls(sig)

    @classmethod
    def scalar(cls, sig: Signature, value: float) -> "ApproxMultivector":
        return cls(sig, {0: float(value)})

    @classmethod
    def from_exact(cls, u: Multivector) -> "ApproxMultivector":
        return cls(u.sig, {b: float(v) for b, v in u._coeffs.items()})

    def coefficient(self, blade: int) -> float:
        return self._coeffs.get(blade, 0.0)

    def terms(self) -> list[tuple[int, float]]:
        return sorted(self._coeffs.items(), key=lambda kv: (blade_grade(kv[0]), kv[0]))

    def grades(self) -> frozenset[int]:
        return frozenset(blade_grade(b) for b in self._coeffs)

    def max_abs(self) -> float:
        return max((abs(v) for v in self._coeffs.values()), default=0.0)

    def __len__(self) -> int:
        return len(self._coeffs)

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __str__(self) -> str:
        return format_multivector(self)

    def __repr__(self) -> str:
        return f"ApproxMultivector({self.sig}, {format_multivector(self)})"

    def _require_same_sig(self, other) -> None:
        if self.sig != other.sig:
            raise SignatureMismatchError(f"cannot combine {self.sig} with {other.sig}")

    def __add__(self, other: "ApproxMultivector") -> "ApproxMultivector":
        if not isinstance(other, ApproxMultivector):
            return NotImplemented
        self._require_same_sig(other)
        out = dict(self._coeffs)
        for b, v in other._coeffs.items():
            out[b] = out.get(b, 0.0) + v
        return ApproxMultivector(self.sig, out)

    def __sub__(self, other: "ApproxMultivector") -> "ApproxMultivector":
        if not isinstance(other, ApproxMultivector):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "ApproxMultivector":
        return ApproxMultivector(self.sig, {b: -v for b, v in self._coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, ApproxMultivector):
            self._require_same_sig(other)
            return ApproxMultivector(self.sig, _mul_coeffs(self._coeffs, other._coeffs, self.sig, False, True))
        if isinstance(other, (int, float, Fraction)):
            f = float(other)
            return ApproxMultivector(self.sig, {b: v * f for b, v in self._coeffs.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, Fraction)):
            return self * other
        return NotImplemented

    def __xor__(self, other: "ApproxMultivector") -> "ApproxMultivector":
        if not isinstance(other, ApproxMultivector):
            return NotImplemented
        self._require_same_sig(other)
        return ApproxMultivector(self.sig, _mul_coeffs(self._coeffs, other._coeffs, self.sig, True, True))

    def __pow__(self, m: int) -> "ApproxMultivector":
        if not isinstance(m, int) or m < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = ApproxMultivector.scalar(self.sig, 1.0)
        base = self
        while m:
            if m & 1:
                result = result * base
            m >>= 1
            if m:
                base = base * base
        return result


# ---------------------------------------------------------------------------
# random generation (verification sweeps sample through here)


@lru_cache(maxsize=None)
def blades_by_grade(n: int) -> tuple[tuple[int, ...], ...]:
    """All blade bit sets of an n-generator algebra, grouped by grade."""
    groups: list[list[int]] = [[] for _ in range(n + 1)]
    for bits in range(1 << n):
        groups[blade_grade(bits)].append(bits)
    return tuple(tuple(g) for g in groups)


def random_multivector(
    sig: Signature,
    rng: Random,
    grades: Iterable[int] | None = None,
    lo: int = -9,
    hi: int = 9,
    ensure_nonzero: bool = True,
) -> Multivector:
    """Random integer-coefficient multivector supported on the given grades.

    Every admissible blade draws a coefficient uniformly from [lo, hi]
    (zero allowed); with ``ensure_nonzero`` an all-zero draw is patched so
    the result is nonzero.
    """
    groups = blades_by_grade(sig.n)
    wanted = range(sig.n + 1) if grades is None else sorted(set(grades))
    blades: list[int] = []
    for g in wanted:
        if not 0 <= g <= sig.n:
            raise ValueError(f"grade {g} outside 0..{sig.n}")
        blades.extend(groups[g])
    coeffs = {b: rng.randint(lo, hi) for b in blades}
    coeffs = {b: v for b, v in coeffs.items() if v}
    if ensure_nonzero and not coeffs and blades:
        b = rng.choice(blades)
        coeffs[b] = rng.randint(1, max(hi, 1)) * rng.choice((-1, 1))
    return Multivector(sig, coeffs)


# ---------------------------------------------------------------------------
# rendering and JSON


def _format_coeff(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def format_multivector(u) -> str:
    """Canonical display form: terms sorted by grade then blade bits."""
    items = u.terms()
    if not items:
        return "0"
    parts: list[str] = []
    for i, (blade, v) in enumerate(items):
        neg = v < 0
        body = f"{_format_coeff(-v if neg else v)} {blade_name(blade)}"
        if i == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts)


def to_obj(u: Multivector) -> dict:
    """JSON-ready form: {"sig": [p, q], "terms": [{"blade": [...], "num": N, "den": D}, ...]}."""
    terms = []
    for blade, v in u.terms():
        f = Fraction(v)
        terms.append({"blade": list(blade_indices(blade)), "num": f.numerator, "den": f.denominator})
    return {"sig": [u.sig.p, u.sig.q], "terms": terms}


def from_obj(obj: Mapping) -> Multivector:
    try:
        p, q = obj["sig"]
        sig = Signature(int(p), int(q))
        coeffs: dict[int, Coeff] = {}
        for term in obj["terms"]:
            num = term["num"]
            den = term["den"]
            if not (isinstance(num, int) and isinstance(den, int)):
                raise ValueError("num/den must be integers")
            if den < 1:
                raise ValueError("denominators must be positive")
            bits = blade_bits(term["blade"])
            coeffs[bits] = coeffs.get(bits, 0) + Fraction(num, den)
        return Multivector(sig, coeffs)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed multivector object: {exc}") from exc


def to_json(u: Multivector) -> str:
    return json.dumps(to_obj(u))


def from_json(text: str) -> Multivector:
    return from_obj(json.loads(text))


def approx_to_obj(u: ApproxMultivector) -> dict:
    """Same layout as :func:`to_obj` but with decimal "coeff" entries."""
    terms = [{"blade": list(blade_indices(b)), "coeff": v} for b, v in u.terms()]
    return {"sig": [u.sig.p, u.sig.q], "terms": terms}


def approx_from_obj(obj: Mapping) -> ApproxMultivector:
    try:
        p, q = obj["sig"]
        sig = Signature(int(p), int(q))
        coeffs: dict[int, float] = {}
        for term in obj["terms"]:
            bits = blade_bits(term["blade"])
            coeffs[bits] = coeffs.get(bits, 0.0) + float(term["coeff"])
        return ApproxMultivector(sig, coeffs)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed multivector object: {exc}") from exc
