"""
HJF — Exact cyclotomic arithmetic

Elements of Q(zeta_n) stored in the power basis 1, zeta, ..., zeta^(d-1)
modulo the n-th cyclotomic polynomial (d = deg Phi_n). The canonical form is
fully reduced, so equality and the zero test are coordinate-wise. Mixed
orders are lifted to their lcm before any arithmetic.
"""
import cmath
from fractions import Fraction
from functools import lru_cache
from math import gcd

from sympy import Poly, Symbol, cyclotomic_poly

from src.config import LCM_CAP
from src.errors import PreconditionError

_X = Symbol("x")

Rational = int | Fraction


# ═════════════════════════════════════════════════════════════════════
# 1. CYCLOTOMIC POLYNOMIALS
# ═════════════════════════════════════════════════════════════════════

@lru_cache(maxsize=None)
def phi_coeffs(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    if n < 1:
        raise PreconditionError(f"cyclotomic order must be >= 1, got {n}")
    poly = Poly(cyclotomic_poly(n, _X), _X)
    return tuple(int(c) for c in reversed(poly.all_coeffs()))


def _normalize(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def _reduce(poly: list, n: int) -> tuple:
    """Reduce a polynomial (low-to-high) modulo the monic Phi_n."""
    phi = phi_coeffs(n)
    d = len(phi) - 1
    p = list(poly)
    for i in range(len(p) - 1, d - 1, -1):
        c = p[i]
        if c:
            shift = i - d
            for j in range(d):
                if phi[j]:
                    p[shift + j] -= c * phi[j]
            p[i] = 0
    p = p[:d] + [0] * (d - len(p))
    return tuple(_normalize(c) for c in p)


def _lcm(a: int, b: int) -> int:
    L = a // gcd(a, b) * b
    if L > LCM_CAP:
        raise PreconditionError(
            f"common cyclotomic order {L} exceeds HJF_LCM_CAP={LCM_CAP}"
        )
    return L


# ═════════════════════════════════════════════════════════════════════
# 2. CYCLOTOMIC NUMBER
# ═════════════════════════════════════════════════════════════════════

class CyclotomicNumber:
    """An exact element of Q(zeta_order) in canonical power-basis form."""

    __slots__ = ("order", "coeffs")
    __hash__ = None

    def __init__(self, order: int, poly):
        self.order = order
        self.coeffs = _reduce(list(poly), order)

    @classmethod
    def rational(cls, q: Rational, order: int = 1) -> "CyclotomicNumber":
        return cls(order, [q])

    @classmethod
    def from_exponent_counts(cls, counts, order: int) -> "CyclotomicNumber":
        """Sum of counts[j] * zeta^j; counts may be a list or a {j: weight} dict."""
        poly = [0] * order
        items = counts.items() if isinstance(counts, dict) else enumerate(counts)
        for j, w in items:
            poly[j % order] += w
        return cls(order, poly)

    # ── lifting ───────────────────────────────────────────────────
    def lift(self, order: int) -> "CyclotomicNumber":
        """Same number viewed in Q(zeta_order); order must be a multiple."""
        if order == self.order:
            return self
        if order % self.order:
            raise PreconditionError(f"cannot lift order {self.order} to {order}")
        step = order // self.order
        poly = [0] * ((len(self.coeffs) - 1) * step + 1)
        for j, c in enumerate(self.coeffs):
            poly[j * step] = c
        return CyclotomicNumber(order, poly)

    def _pair(self, other):
        if isinstance(other, CyclotomicNumber):
            L = _lcm(self.order, other.order)
            return self.lift(L), other.lift(L)
        if isinstance(other, (int, Fraction)):
            return self, CyclotomicNumber.rational(other, self.order)
        return None, None

    # ── arithmetic ────────────────────────────────────────────────
    def __add__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return CyclotomicNumber(a.order, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.order, [-c for c in self.coeffs])

    def __sub__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return CyclotomicNumber(a.order, [x - y for x, y in zip(a.coeffs, b.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber(self.order, [c * other for c in self.coeffs])
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        poly = [0] * (len(a.coeffs) + len(b.coeffs) - 1)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        poly[i + j] += x * y
        return CyclotomicNumber(a.order, poly)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber(
                self.order, [Fraction(c) / other for c in self.coeffs]
            )
        return NotImplemented

    def conj(self) -> "CyclotomicNumber":
        """Complex conjugate: zeta -> zeta^-1."""
        n = self.order
        poly = [0] * n
        for j, c in enumerate(self.coeffs):
            poly[(-j) % n] += c
        return CyclotomicNumber(n, poly)

    # ── predicates ────────────────────────────────────────────────
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise PreconditionError(f"{self!r} is not rational")
        return Fraction(self.coeffs[0])

    def __eq__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return a.coeffs == b.coeffs

    def __repr__(self):
        terms = [f"{c}*z^{j}" for j, c in enumerate(self.coeffs) if c]
        return f"CyclotomicNumber({self.order}: {' + '.join(terms) or '0'})"


# ═════════════════════════════════════════════════════════════════════
# 3. OPERATIONS
# ═════════════════════════════════════════════════════════════════════

def zeta_pow(j: int, n: int) -> CyclotomicNumber:
    """zeta_n^j in canonical form."""
    if n < 1:
        raise PreconditionError(f"cyclotomic order must be >= 1, got {n}")
    poly = [0] * n
    poly[j % n] = 1
    return CyclotomicNumber(n, poly)


def canonicalize(order: int, poly) -> CyclotomicNumber:
    """Reduce an arbitrary polynomial in zeta_order to canonical form."""
    return CyclotomicNumber(order, poly)


def embed_complex(z) -> complex:
    """Numerical value under zeta_n -> exp(2 pi i / n). Reporting only."""
    if isinstance(z, (int, Fraction)):
        return complex(float(z), 0.0)
    root = cmath.exp(2j * cmath.pi / z.order)
    return sum(float(c) * root**j for j, c in enumerate(z.coeffs) if c) + 0j


def root_of_unity(angle: Fraction):
    """e(angle) as an exact number: +-1 stay integers, others are cyclotomic."""
    angle = Fraction(angle) % 1
    if angle == 0:
        return 1
    if angle == Fraction(1, 2):
        return -1
    return zeta_pow(angle.numerator, angle.denominator)


def simplify(value):
    """Collapse rational cyclotomic values to Fraction; leave others alone."""
    if isinstance(value, CyclotomicNumber):
        return value.to_rational() if value.is_rational() else value
    return Fraction(value)


def is_zero(value) -> bool:
    if isinstance(value, CyclotomicNumber):
        return value.is_zero()
    return value == 0


def conj(value):
    if isinstance(value, CyclotomicNumber):
        return value.conj()
    return value


def weighted_root_sum(terms) -> Fraction | CyclotomicNumber:
    """Exact sum of weight * e(angle) over (angle, weight) pairs.

    Rational weights are bucketed by exponent and reduced once; cyclotomic
    weights are multiplied out individually.
    """
    buckets: dict[int, dict[int, Fraction]] = {}
    extra = Fraction(0)
    for angle, weight in terms:
        if is_zero(weight):
            continue
        angle = Fraction(angle) % 1
        if isinstance(weight, CyclotomicNumber):
            extra = extra + weight * root_of_unity(angle)
            continue
        den = angle.denominator
        row = buckets.setdefault(den, {})
        row[angle.numerator] = row.get(angle.numerator, 0) + weight
    total = extra
    for den, row in buckets.items():
        if den == 1:
            total = total + sum(row.values(), Fraction(0))
        else:
            total = total + CyclotomicNumber.from_exponent_counts(row, den)
    return simplify(total)
