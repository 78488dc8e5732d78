"""
HJF — Hermitian forms of degree 2 over O_K

T = (n r; conj(r) m) with r = i*s/sqrt|D| = -s/sqrt(D), s in O_K, so every
form is stored as the integer triple (n, m, s). Conjugation by g in GL_2(O_K):

    (g*Tg)_11 = N(alpha) n - b(conj(alpha) gamma s) + N(gamma) m
    (g*Tg)_22 = N(beta) n  - b(conj(beta) delta s)  + N(delta) m
    s'        = -sqrt(D) (conj(alpha) beta n + conj(gamma) delta m)
                + conj(alpha) delta s - conj(gamma) beta conj(s)

where b(.) is the w-coordinate.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from sympy import isprime

from src.config import SHELL_BOUND
from src.cyclotomic import is_zero, root_of_unity, simplify
from src.errors import NotFound, PreconditionError
from src.jacobi_coeffs import JacobiCoefficientSystem
from src.ring_ok import RingElement, as_field, canonical_key, sqrt_D, unit_exponent


# ═════════════════════════════════════════════════════════════════════
# 1. FORMS AND MATRICES
# ═════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class HermitianForm:
    n: int
    m: int
    s: RingElement

    @property
    def D(self) -> int:
        return self.s.D

    def scaled(self, a: int) -> "HermitianForm":
        return HermitianForm(a * self.n, a * self.m, self.s * a)

    def __str__(self):
        return f"({self.n}, {self.m}, {self.s})"


def scaled_det(T: HermitianForm) -> int:
    """|D| det(T) = |D| n m - N(s)."""
    value = abs(T.D) * T.n * T.m - T.s.norm()
    if value <= 0 or T.n <= 0 or T.m <= 0:
        raise PreconditionError(f"not positive definite: {T} has |D|det = {value}")
    return value


def content(T: HermitianForm) -> tuple[int, bool]:
    """(largest a with T/a in the lattice, primitive flag)."""
    c = gcd(gcd(T.n, T.m), gcd(T.s.a, T.s.b))
    return c, c == 1


@dataclass(frozen=True)
class Matrix2:
    """(alpha beta; gamma delta) over O_K."""
    alpha: RingElement
    beta: RingElement
    gamma: RingElement
    delta: RingElement

    @classmethod
    def identity(cls, D: int) -> "Matrix2":
        one, zero = RingElement(1, 0, D), RingElement(0, 0, D)
        return cls(one, zero, zero, one)

    @classmethod
    def upper(cls, beta: RingElement) -> "Matrix2":
        one, zero = RingElement(1, 0, beta.D), RingElement(0, 0, beta.D)
        return cls(one, beta, zero, one)

    @classmethod
    def swap(cls, delta: RingElement) -> "Matrix2":
        one, zero = RingElement(1, 0, delta.D), RingElement(0, 0, delta.D)
        return cls(zero, one, -one, delta)

    def det(self) -> RingElement:
        return self.alpha * self.delta - self.beta * self.gamma

    def __str__(self):
        return f"[[{self.alpha}, {self.beta}], [{self.gamma}, {self.delta}]]"


def gl2_conjugate(g: Matrix2, T: HermitianForm) -> HermitianForm:
    """g* T g in (n, m, s) coordinates; det g must be a unit."""
    if not g.det().is_unit():
        raise PreconditionError(f"det g = {g.det()} is not a unit")
    a, b, c, d, s = g.alpha, g.beta, g.gamma, g.delta, T.s
    n11 = a.norm() * T.n - (a.conj() * c * s).b + c.norm() * T.m
    n22 = b.norm() * T.n - (b.conj() * d * s).b + d.norm() * T.m
    s12 = (-sqrt_D(s.D) * (a.conj() * b * T.n + c.conj() * d * T.m)
           + a.conj() * d * s - c.conj() * b * s.conj())
    return HermitianForm(n11, n22, s12)


# ═════════════════════════════════════════════════════════════════════
# 2. COEFFICIENT TABLES
# ═════════════════════════════════════════════════════════════════════

@dataclass
class CoefficientTable:
    """a(F, T) for finitely many T, weight k."""
    k: int
    D: int
    entries: dict[HermitianForm, object] = field(default_factory=dict)

    def __post_init__(self):
        as_field(self.D)

    def __len__(self):
        return len(self.entries)

    def get(self, T: HermitianForm):
        return self.entries.get(T, Fraction(0))

    def indices(self) -> list[int]:
        return sorted({T.m for T in self.entries})

    def transformed(self, g: Matrix2) -> "CoefficientTable":
        """Add g*Tg -> det(g)^k a(T) for every recorded T."""
        factor = root_of_unity(Fraction(unit_exponent(g.det()) * self.k, as_field(self.D).w))
        out = dict(self.entries)
        for T, value in self.entries.items():
            out.setdefault(gl2_conjugate(g, T), simplify(factor * value))
        return CoefficientTable(self.k, self.D, out)

    def sorted_items(self):
        return sorted(self.entries.items(), key=lambda t: (t[0].m, t[0].n, canonical_key(t[0].s)))


def gl2_violations(table: CoefficientTable, g: Matrix2) -> list[HermitianForm]:
    """Recorded T whose image g*Tg is recorded with the wrong value."""
    factor = root_of_unity(Fraction(unit_exponent(g.det()) * table.k, as_field(table.D).w))
    bad = []
    for T, value in table.entries.items():
        image = gl2_conjugate(g, T)
        if image in table.entries and not (table.entries[image] == simplify(factor * value)):
            bad.append(T)
    return bad


# ═════════════════════════════════════════════════════════════════════
# 3. PRIME REPRESENTATION
# ═════════════════════════════════════════════════════════════════════

def _shell(R: int) -> list[tuple[int, int]]:
    """Points with max(|x|, |y|) = R, ordered by (|x|, |y|, x < 0, y < 0)."""
    if R == 0:
        return [(0, 0)]
    pts = {(x, y) for x in range(-R, R + 1) for y in (-R, R)}
    pts |= {(x, y) for x in (-R, R) for y in range(-R, R + 1)}
    return sorted(pts, key=lambda t: (abs(t[0]), abs(t[1]), t[0] < 0, t[1] < 0))


def _families(T: HermitianForm):
    """Completions g(beta) and the bottom-right entry they produce."""
    yield "upper", Matrix2.upper, lambda beta: beta.norm() * T.n - (beta.conj() * T.s).b + T.m
    yield "swap", Matrix2.swap, lambda delta: T.n - (delta * T.s).b + delta.norm() * T.m


def prime_rep_search(T: HermitianForm, search_bound: int = SHELL_BOUND) -> tuple[Matrix2, int]:
    """First g (smallest shell, then shell order) with (g*Tg)_22 an odd prime.

    Only the parity classes of (x, y) on which the entry can be odd are
    visited.
    """
    scaled_det(T)
    if not content(T)[1]:
        raise PreconditionError(f"primitive required: content of {T} is {content(T)[0]}")
    families = []
    for name, build, entry in _families(T):
        odd = {(ex, ey) for ex in (0, 1) for ey in (0, 1)
               if entry(RingElement(ex, ey, T.D)) % 2}
        families.append((name, build, entry, odd))
    for R in range(search_bound + 1):
        for x, y in _shell(R):
            for _, build, entry, odd in families:
                if (x % 2, y % 2) not in odd:
                    continue
                value = entry(RingElement(x, y, T.D))
                if value > 2 and isprime(value):
                    return build(RingElement(x, y, T.D)), value
    raise NotFound(f"no odd prime represented by {T} within shell bound {search_bound}")


# ═════════════════════════════════════════════════════════════════════
# 4. FOURIER–JACOBI SLICES
# ═════════════════════════════════════════════════════════════════════

def fj_extract(table: CoefficientTable, m: int) -> JacobiCoefficientSystem:
    """Index-m slice: c(n, s) = a(F, (n, m, s)); empty when no entry has bottom-right m."""
    rows = [(T, v) for T, v in table.sorted_items() if T.m == m and not is_zero(v)]
    bound = max((scaled_det(T) for T, _ in rows), default=0)
    entries = [(scaled_det(T), T.s, v) for T, v in rows]
    return JacobiCoefficientSystem(table.D, table.k, m, bound, entries)


def table_from_system(sys: JacobiCoefficientSystem) -> CoefficientTable:
    """Every (n, m, s) with s a residue representative and d <= disc_bound."""
    D = abs(sys.field.D)
    entries = {}
    for r in sys.residue_reps():
        for d in sys.discriminants_for(r):
            v = sys.value_at(d, r)
            if not is_zero(v):
                n = (d + r.norm()) // (D * sys.m)
                entries[HermitianForm(n, sys.m, r)] = v
    return CoefficientTable(sys.k, sys.field.D, entries)
