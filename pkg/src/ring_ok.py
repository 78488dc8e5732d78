"""
HJF — Ring of integers of the nine class-number-one imaginary quadratic fields

Elements are a + b*w with integer coordinates, where
    w = sqrt(D)/2        (D even, w^2 = D/4)
    w = (1 + sqrt(D))/2  (D odd,  w^2 = w + (D-1)/4).
Divisibility is an exact 2x2 division test (x * conj(rho) / N(rho)), so no
Euclidean gcd is ever needed; ideal coprimality goes through the prime
ideal factorisation of the norm.
"""
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import gcd, isqrt

from sympy import factorint, isprime, jacobi_symbol
from sympy.core.intfunc import igcdex

from src.config import get_field_row
from src.cyclotomic import CyclotomicNumber, simplify, weighted_root_sum
from src.errors import ParseError, PreconditionError


# ═════════════════════════════════════════════════════════════════════
# 1. FIELDS
# ═════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class QuadField:
    D: int
    p_K: int
    w: int
    euclidean: bool
    label: str
    ramified: tuple[int, int]

    @property
    def even(self) -> bool:
        return self.D % 2 == 0

    @property
    def omega_convention(self) -> str:
        return "sqrt(D)/2" if self.even else "(1+sqrt(D))/2"


@lru_cache(maxsize=None)
def quad_field(D: int) -> QuadField:
    row = get_field_row(D)
    return QuadField(D=D, p_K=row["p_K"], w=row["w"],
                     euclidean=row["euclidean"], label=row["label"], ramified=tuple(row["ramified"]))


def as_field(field) -> QuadField:
    """Accept a QuadField or a bare discriminant."""
    return field if isinstance(field, QuadField) else quad_field(int(field))


# ═════════════════════════════════════════════════════════════════════
# 2. ELEMENTS
# ═════════════════════════════════════════════════════════════════════

_ELEMENT_RE = re.compile(r"^\s*(-?\d+)\s*([+-])\s*(-?\d+)\s*\*\s*w\s*@\s*(-?\d+)\s*$")


@dataclass(frozen=True)
class RingElement:
    """a + b*w in O_K, K = Q(sqrt(D))."""
    a: int
    b: int
    D: int

    @property
    def field(self) -> QuadField:
        return quad_field(self.D)

    # ── arithmetic ────────────────────────────────────────────────
    def _coerce(self, other) -> "RingElement":
        if isinstance(other, RingElement):
            if other.D != self.D:
                raise PreconditionError(f"mixed fields {self.D} and {other.D}")
            return other
        if isinstance(other, int):
            return RingElement(other, 0, self.D)
        raise TypeError(f"cannot combine RingElement with {type(other).__name__}")

    def __add__(self, other):
        o = self._coerce(other)
        return RingElement(self.a + o.a, self.b + o.b, self.D)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return RingElement(self.a - o.a, self.b - o.b, self.D)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return RingElement(-self.a, -self.b, self.D)

    def __mul__(self, other):
        o = self._coerce(other)
        a, b, c, d = self.a, self.b, o.a, o.b
        if self.D % 2 == 0:
            return RingElement(a * c + b * d * (self.D // 4), a * d + b * c, self.D)
        return RingElement(a * c + b * d * ((self.D - 1) // 4), a * d + b * c + b * d, self.D)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise PreconditionError("negative powers are not ring elements")
        out, base = RingElement(1, 0, self.D), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conj(self) -> "RingElement":
        if self.D % 2 == 0:
            return RingElement(self.a, -self.b, self.D)
        return RingElement(self.a + self.b, -self.b, self.D)

    def norm(self) -> int:
        a, b = self.a, self.b
        if self.D % 2 == 0:
            return a * a + (-self.D // 4) * b * b
        return a * a + a * b + ((1 - self.D) // 4) * b * b

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_unit(self) -> bool:
        return self.norm() == 1

    def __str__(self):
        sign = "+" if self.b >= 0 else "-"
        return f"{self.a}{sign}{abs(self.b)}*w@{self.D}"


def element(a: int, b: int, field) -> RingElement:
    return RingElement(a, b, as_field(field).D)


def parse_element(text: str) -> RingElement:
    """Parse the "a+b*w@D" literal."""
    match = _ELEMENT_RE.match(text)
    if not match:
        raise ParseError(f"bad ring element literal {text!r}; expected 'a+b*w@D'")
    a, sign, b, D = match.groups()
    b = int(b) if sign == "+" else -int(b)
    D = int(D)
    quad_field(D)
    return RingElement(int(a), b, D)


def canonical_key(alpha: RingElement) -> tuple:
    """Ordering used to pick canonical residue representatives."""
    return (alpha.norm(), abs(alpha.a), abs(alpha.b), alpha.a < 0, alpha.b < 0)


def norm_conj(alpha: RingElement) -> tuple[int, RingElement]:
    return alpha.norm(), alpha.conj()


@lru_cache(maxsize=None)
def units(field) -> tuple[RingElement, ...]:
    """eps0^j for j < w, where eps0 = e(1/w)."""
    F = as_field(field)
    eps0 = RingElement(0, 1, F.D) if F.w > 2 else RingElement(-1, 0, F.D)
    out = [RingElement(1, 0, F.D)]
    for _ in range(F.w - 1):
        out.append(out[-1] * eps0)
    return tuple(out)


def unit_exponent(eps: RingElement) -> int:
    """j with eps = eps0^j."""
    for j, u in enumerate(units(eps.D)):
        if u == eps:
            return j
    raise PreconditionError(f"{eps} is not a unit")


def sqrt_D(field) -> RingElement:
    """sqrt(D) = i*sqrt(|D|) as an element of O_K."""
    F = as_field(field)
    return RingElement(0, 2, F.D) if F.even else RingElement(-1, 2, F.D)


def div_exact(x: RingElement, rho: RingElement) -> RingElement | None:
    """x / rho if it lies in O_K, else None."""
    if rho.is_zero():
        raise PreconditionError("zero modulus")
    N = rho.norm()
    y = x * rho.conj()
    if y.a % N or y.b % N:
        return None
    return RingElement(y.a // N, y.b // N, x.D)


def divides(rho: RingElement, x: RingElement) -> bool:
    return div_exact(x, rho) is not None


def elements_up_to_norm(field, R: int):
    """Every element of norm <= R (finite; small R only)."""
    F = as_field(field)
    bmax = isqrt(4 * R // abs(F.D)) + 1
    amax = isqrt(R) + 1
    for b in range(-bmax, bmax + 1):
        spread = amax + abs(b)
        for a in range(-spread, spread + 1):
            alpha = RingElement(a, b, F.D)
            if alpha.norm() <= R:
                yield alpha


# ═════════════════════════════════════════════════════════════════════
# 3. RESIDUE SYSTEMS
# ═════════════════════════════════════════════════════════════════════

class ResidueSystem:
    """O / rho*O with canonical minimal representatives.

    rho*O is spanned by rho and rho*w; in Hermite normal form it is
    Z*(A, 0) + Z*(u, g), which gives constant-time reduction keys.
    """

    def __init__(self, modulus: RingElement):
        if modulus.is_zero():
            raise PreconditionError("zero modulus")
        self.modulus = modulus
        self.D = modulus.D
        v1 = modulus
        v2 = modulus * RingElement(0, 1, modulus.D)
        x, y, g = igcdex(v1.b, v2.b)
        if g < 0:
            x, y, g = -x, -y, -g
        self.g = int(g)
        self.u = int(x * v1.a + y * v2.a)
        self.A = modulus.norm() // self.g
        self.size = modulus.norm()
        self._reps = None

    def key(self, x: RingElement) -> tuple[int, int]:
        q, t = divmod(x.b, self.g)
        return ((x.a - q * self.u) % self.A, t)

    def congruent(self, x: RingElement, y: RingElement) -> bool:
        return self.key(x) == self.key(y)

    def _build(self):
        if self._reps is None:
            best: dict[tuple, RingElement] = {}
            R = max(1, self.size)
            while len(best) < self.size:
                for alpha in elements_up_to_norm(self.D, R):
                    k = self.key(alpha)
                    cur = best.get(k)
                    if cur is None or canonical_key(alpha) < canonical_key(cur):
                        best[k] = alpha
                R *= 2
            self._reps = best
        return self._reps

    @property
    def representatives(self) -> list[RingElement]:
        return sorted(self._build().values(), key=canonical_key)

    def reduce(self, x: RingElement) -> RingElement:
        """Canonical representative of x mod rho."""
        return self._build()[self.key(x)]


@lru_cache(maxsize=4096)
def residue_system(modulus: RingElement) -> ResidueSystem:
    return ResidueSystem(modulus)


def residues_mod(rho: RingElement) -> list[RingElement]:
    """A full system of residues mod rho; 1..p when N(rho) = p is prime."""
    if rho.is_zero():
        raise PreconditionError("zero modulus")
    N = rho.norm()
    if isprime(N):
        return [RingElement(j, 0, rho.D) for j in range(1, N + 1)]
    return residue_system(rho).representatives


# ═════════════════════════════════════════════════════════════════════
# 4. CHARACTERS AND PRIMES
# ═════════════════════════════════════════════════════════════════════

def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for a discriminant-like a (a = 0 or 1 mod 4)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    if gcd(n, a) > 1:
        return 0
    result = 1
    if n < 0:
        result, n = (-result if a < 0 else result), -n
    while n % 2 == 0:
        n //= 2
        result *= 1 if a % 8 in (1, 7) else -1
    if n > 1:
        result *= int(jacobi_symbol(a % n, n))
    return result


def chi_D(n: int, field) -> int:
    """Kronecker symbol (D/n)."""
    return kronecker(as_field(field).D, n)


@dataclass(frozen=True)
class SplitInfo:
    p: int
    kind: str  # split | inert | ramified
    pi: RingElement | None = None


def _prime_key(alpha: RingElement) -> tuple:
    """Pick among the associates and conjugates of norm p: smallest |b| first, then |a|,
    then non-negative signs. Over Q(i) this gives 5 = (2+i)(2-i) with pi = 2+i."""
    return (abs(alpha.b), abs(alpha.a), alpha.a < 0, alpha.b < 0)


@lru_cache(maxsize=None)
def _split_cached(p: int, D: int) -> SplitInfo:
    if not isprime(p):
        raise PreconditionError(f"{p} is not prime")
    chi = chi_D(p, D)
    if chi == -1:
        return SplitInfo(p, "inert", None)
    if chi == 0:
        return SplitInfo(p, "ramified", RingElement(*quad_field(D).ramified, D))
    candidates = [alpha for alpha in elements_up_to_norm(D, p) if alpha.norm() == p]
    return SplitInfo(p, "split", min(candidates, key=_prime_key))


def split_rational_prime(p: int, field) -> SplitInfo:
    return _split_cached(p, as_field(field).D)


def valuation(alpha: RingElement, pi: RingElement) -> int:
    if alpha.is_zero():
        raise PreconditionError("valuation of zero")
    v = 0
    while True:
        q = div_exact(alpha, pi)
        if q is None:
            return v
        alpha, v = q, v + 1


def prime_ideal_factors(alpha: RingElement) -> list[tuple[RingElement, int]]:
    """(generator, exponent) for each prime ideal dividing (alpha)."""
    if alpha.is_zero():
        raise PreconditionError("factorisation of zero")
    out = []
    for p, e in sorted(factorint(alpha.norm()).items()):
        info = split_rational_prime(p, alpha.D)
        if info.kind == "inert":
            out.append((RingElement(p, 0, alpha.D), e // 2))
        elif info.kind == "ramified":
            out.append((info.pi, e))
        else:
            for pi in (info.pi, info.pi.conj()):
                v = valuation(alpha, pi)
                if v:
                    out.append((pi, v))
    return out


def moebius(alpha: RingElement) -> int:
    """Moebius function on the ideal (alpha)."""
    if alpha.is_zero():
        raise PreconditionError("moebius of zero")
    factors = prime_ideal_factors(alpha)
    if any(e >= 2 for _, e in factors):
        return 0
    return -1 if len(factors) % 2 else 1


def ideals_coprime(alpha: RingElement, beta: RingElement) -> bool:
    """(alpha) + (beta) = O, read off the prime ideal factors."""
    if alpha.is_zero() or beta.is_zero():
        return alpha.is_unit() or beta.is_unit()
    return not any(divides(pi, beta) for pi, _ in prime_ideal_factors(alpha))


def divisors(alpha: RingElement) -> list[RingElement]:
    """Generators of every ideal dividing (alpha), one per ideal."""
    out = [RingElement(1, 0, alpha.D)]
    for pi, e in prime_ideal_factors(alpha):
        out = [d * pi**j for d in out for j in range(e + 1)]
    return sorted(out, key=canonical_key)


# ═════════════════════════════════════════════════════════════════════
# 5. EXPONENTIAL SUMS
# ═════════════════════════════════════════════════════════════════════

def _trace_angle(y: RingElement, n: int) -> Fraction:
    """2Re(i*y/(sqrt|D|*n)) = -b(y)/n for y in O_K."""
    return Fraction(-y.b, n)


def exponential_sum(x: RingElement, s: RingElement) -> int:
    """Sum over r in O/sO of e(2Re(i r x/(sqrt|D| s))): N(s) if s | x else 0."""
    if s.is_zero():
        raise PreconditionError("zero modulus")
    return s.norm() if divides(s, x) else 0


def exponential_sum_bruteforce(x: RingElement, s: RingElement):
    """Direct evaluation of the same sum in exact cyclotomic arithmetic."""
    if s.is_zero():
        raise PreconditionError("zero modulus")
    N, s_bar = norm_conj(s)
    xs = x * s_bar
    counts = [0] * N
    for r in residues_mod(s):
        counts[(-(r * xs).b) % N] += 1
    value = simplify(CyclotomicNumber.from_exponent_counts(counts, N))
    if isinstance(value, Fraction) and value.denominator == 1:
        return int(value)
    return value


def mobius_vanishing_sum(r: RingElement, s: RingElement):
    """Sum over t | s of mu(t) * prod_{pi | t} e(2Re(i r/pi)/sqrt|D|).

    Zero whenever r and s share a prime divisor.
    """
    primes = [pi for pi, _ in prime_ideal_factors(s)]
    angles = [_trace_angle(r * bar, n) for n, bar in map(norm_conj, primes)]
    terms = []
    for size in range(len(primes) + 1):
        for subset in combinations(range(len(primes)), size):
            terms.append((sum((angles[j] for j in subset), Fraction(0)), (-1) ** size))
    return weighted_root_sum(terms)
