"""
HJF — Elliptic q-expansions

Truncated q-expansions with weight / level / character metadata, the test
forms (eta quotients, Eisenstein series), Hecke / U / B operators, coprime
and square-free sieves, second-moment partial sums and the slope-ratio
predictions they are checked against. Every operator declares the window
it can guarantee; reading past a window raises PrecisionError.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

import numpy as np
import pandas as pd
from sympy import bernoulli, factorint, primerange

from src.characters import DirichletCharacter, kronecker_character, principal_character
from src.config import SIEVE_PRIMES_BELOW, SIEVE_TRUNCATION
from src.cyclotomic import CyclotomicNumber, embed_complex, is_zero, simplify
from src.errors import PrecisionError, PreconditionError


# ═════════════════════════════════════════════════════════════════════
# 1. Q-EXPANSIONS
# ═════════════════════════════════════════════════════════════════════

@dataclass
class QExpansion:
    """sum a(n) q^n for 0 <= n <= precision."""
    weight: int | Fraction
    level: int
    character: DirichletCharacter | None
    coeffs: list = field(default_factory=lambda: [0])

    @property
    def precision(self) -> int:
        return len(self.coeffs) - 1

    def a(self, n: int):
        if n < 0:
            return 0
        if n > self.precision:
            raise PrecisionError(f"coefficient {n} beyond precision {self.precision}", required=n)
        return self.coeffs[n]

    def normalized(self, n: int) -> float:
        """|a(n)| / n^((k-1)/2)."""
        return abs(embed_complex(self.a(n))) / n ** ((float(self.weight) - 1) / 2)

    def is_zero(self) -> bool:
        return all(is_zero(c) for c in self.coeffs)

    def support(self) -> list[int]:
        return [n for n, c in enumerate(self.coeffs) if not is_zero(c)]

    def window(self, X: int) -> "QExpansion":
        return QExpansion(self.weight, self.level, self.character, self.coeffs[: X + 1])

    def with_coeffs(self, coeffs, level: int | None = None) -> "QExpansion":
        level = self.level if level is None else level
        chi = self.character
        if chi is not None and level != chi.modulus:
            chi = chi.to_modulus(level)
        return QExpansion(self.weight, level, chi, list(coeffs))

    def agrees_with(self, other: "QExpansion") -> bool:
        X = min(self.precision, other.precision)
        return all(self.coeffs[n] == other.coeffs[n] for n in range(X + 1))

    def __add__(self, other):
        return linear_combination([(1, self), (1, other)])

    def __sub__(self, other):
        return linear_combination([(1, self), (-1, other)])

    def __mul__(self, scalar):
        return linear_combination([(scalar, self)])

    __rmul__ = __mul__

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"n": range(self.precision + 1), "value": [str(c) for c in self.coeffs]})


def linear_combination(terms) -> QExpansion:
    """sum coef * f over forms of one weight, on the common window."""
    terms = list(terms)
    first = terms[0][1]
    if any(f.weight != first.weight for _, f in terms):
        raise PreconditionError("forms differ in weight")
    X = min(f.precision for _, f in terms)
    level = first.level
    for _, f in terms:
        level = level // gcd(level, f.level) * f.level
    coeffs = []
    for n in range(X + 1):
        total = 0
        for coef, f in terms:
            c = f.coeffs[n]
            if not is_zero(c):
                total = total + coef * c
        coeffs.append(_clean(total))
    return first.with_coeffs(coeffs, level)


def _clean(value):
    if isinstance(value, CyclotomicNumber):
        return simplify(value)
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value


# ═════════════════════════════════════════════════════════════════════
# 2. EXACT SERIES ARITHMETIC
# ═════════════════════════════════════════════════════════════════════

def _pack(coeffs: list[int], slot: int) -> int:
    pos = b"".join(max(c, 0).to_bytes(slot, "little") for c in coeffs)
    neg = b"".join(max(-c, 0).to_bytes(slot, "little") for c in coeffs)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def mul_series(a: list[int], b: list[int], X: int) -> list[int]:
    """Product of integer series mod q^(X+1), by Kronecker substitution."""
    a, b = a[: X + 1], b[: X + 1]
    if not a or not b:
        return [0] * (X + 1)
    bound = max(map(abs, a)) * max(map(abs, b)) * min(len(a), len(b))
    slot = (bound.bit_length() + 2 + 7) // 8
    L = len(a) + len(b) - 1
    off = 1 << (8 * slot - 1)
    offsets = int.from_bytes(off.to_bytes(slot, "little") * L, "little")
    raw = (_pack(a, slot) * _pack(b, slot) + offsets).to_bytes(L * slot, "little")
    n = min(L, X + 1)
    out = [int.from_bytes(raw[i * slot:(i + 1) * slot], "little") - off for i in range(n)]
    return out + [0] * (X + 1 - n)


def pow_series(a: list[int], e: int, X: int) -> list[int]:
    out = [1] + [0] * X
    base = a[: X + 1] + [0] * max(0, X + 1 - len(a))
    while e:
        if e & 1:
            out = mul_series(out, base, X)
        e >>= 1
        if e:
            base = mul_series(base, base, X)
    return out


def _euler_series(delta: int, X: int) -> list[int]:
    """prod (1 - q^(delta n)) via the pentagonal number theorem."""
    out = [0] * (X + 1)
    j = 0
    while True:
        hit = False
        for g in {j * (3 * j - 1) // 2, j * (3 * j + 1) // 2}:
            if delta * g <= X:
                out[delta * g] = -1 if j % 2 else 1
                hit = True
        if not hit:
            return out
        j += 1


def _euler_cube(delta: int, X: int) -> list[int]:
    """prod (1 - q^(delta n))^3 = sum (-1)^j (2j+1) q^(delta j(j+1)/2)."""
    out = [0] * (X + 1)
    j = 0
    while delta * j * (j + 1) // 2 <= X:
        out[delta * j * (j + 1) // 2] = (-1) ** j * (2 * j + 1)
        j += 1
    return out


def _partition_series(delta: int, X: int) -> list[int]:
    """1 / prod (1 - q^(delta n))."""
    top = X // delta
    p = [1] + [0] * top
    for n in range(1, top + 1):
        total, k = 0, 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > n:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[n - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= n:
                total += sign * p[n - g2]
            k += 1
        p[n] = total
    out = [0] * (X + 1)
    for n, v in enumerate(p):
        out[n * delta] = v
    return out


# ═════════════════════════════════════════════════════════════════════
# 3. TEST FORMS
# ═════════════════════════════════════════════════════════════════════

def eta_quotient_level_character(spec: list[tuple[int, int]]):
    """(weight, level, character) of prod eta(delta tau)^r.

    Level: least N with every delta | N and N * sum(r/delta) = 0 mod 24.
    Character: d -> ((-1)^k prod delta^r / d) for integral weight k.
    """
    total_r = sum(r for _, r in spec)
    weight = Fraction(total_r, 2)
    weight = weight.numerator if weight.denominator == 1 else weight
    base = 1
    for delta, _ in spec:
        base = base // gcd(base, delta) * delta
    inv = sum(Fraction(r, delta) for delta, r in spec)
    level = next(N for N in range(base, 24 * base + 1, base) if (N * inv) % 24 == 0)
    if isinstance(weight, Fraction):
        return weight, level, None
    s = 1
    for delta, r in spec:
        s *= delta ** abs(r)
    return weight, level, kronecker_character((-1) ** weight * s, level)


def eta_quotient(spec: list[tuple[int, int]], X: int) -> QExpansion:
    """prod eta(delta tau)^(r_delta) to precision X, exact integers."""
    lead = sum(Fraction(delta * r, 24) for delta, r in spec)
    if lead.denominator != 1:
        raise PreconditionError(f"fractional leading exponent {lead}; need sum(delta r) = 0 mod 24")
    lead = int(lead)
    if lead < 0:
        raise PreconditionError(f"negative leading exponent {lead}")
    weight, level, chi = eta_quotient_level_character(spec)
    top = max(X - lead, 0)
    series = [1] + [0] * top
    for delta, r in spec:
        if delta < 1:
            raise PreconditionError(f"eta argument must be positive, got {delta}")
        if r > 0:
            factor = mul_series(pow_series(_euler_cube(delta, top), r // 3, top),
                                pow_series(_euler_series(delta, top), r % 3, top), top)
        elif r < 0:
            factor = pow_series(_partition_series(delta, top), -r, top)
        else:
            continue
        series = mul_series(series, factor, top)
    coeffs = ([0] * lead + series)[: X + 1]
    coeffs += [0] * (X + 1 - len(coeffs))
    return QExpansion(weight, level, chi, coeffs)


def delta(X: int) -> QExpansion:
    """Ramanujan's Delta = eta(tau)^24."""
    return eta_quotient([(1, 24)], X)


def eisenstein(k: int, X: int) -> QExpansion:
    """E_k = 1 - (2k/B_k) sum sigma_(k-1)(n) q^n."""
    if k < 4 or k % 2:
        raise PreconditionError(f"Eisenstein series need even k >= 4, got {k}")
    B = bernoulli(k)
    factor = -Fraction(2 * k) / Fraction(int(B.p), int(B.q))
    sigma = [0] * (X + 1)
    for d in range(1, X + 1):
        dk = d ** (k - 1)
        for n in range(d, X + 1, d):
            sigma[n] += dk
    coeffs = [1] + [_clean(factor * s) for s in sigma[1:]]
    return QExpansion(k, 1, principal_character(1), coeffs)


# ═════════════════════════════════════════════════════════════════════
# 4. OPERATORS
# ═════════════════════════════════════════════════════════════════════

def _rad(n: int) -> int:
    out = 1
    for p in factorint(n):
        out *= p
    return out


def _chi(f: QExpansion, d: int):
    return 1 if f.character is None else f.character(d)


def hecke_T(f: QExpansion, n: int) -> QExpansion:
    """a(T_n f, m) = sum over d | (m, n) of chi(d) d^(k-1) a(mn/d^2); window X // n."""
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    if gcd(n, f.level) != 1:
        raise PreconditionError(f"gcd({n}, N={f.level}) > 1; use U_op")
    if isinstance(f.weight, Fraction):
        raise PreconditionError("Hecke operators need integral weight")
    k = f.weight
    divs = [d for d in range(1, n + 1) if n % d == 0]
    weights = {d: _chi(f, d) * d ** (k - 1) for d in divs}
    coeffs = []
    for m in range(f.precision // n + 1):
        total = 0
        for d in divs:
            if m % d == 0 and not is_zero(weights[d]):
                total = total + weights[d] * f.coeffs[m * n // (d * d)]
        coeffs.append(_clean(total))
    return f.with_coeffs(coeffs)


def U_op(f: QExpansion, n: int) -> QExpansion:
    """a(U_n f, m) = a(f, nm); window X // n."""
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    level = f.level // gcd(f.level, _rad(n)) * _rad(n)
    return f.with_coeffs([f.coeffs[n * m] for m in range(f.precision // n + 1)], level)


def undo_dilation(f: QExpansion, p: int) -> QExpansion:
    """U_p applied to a form supported on multiples of p, i.e. f = B_p g.

    The result lives at level N/p when p | N and the character is defined
    mod N/p; otherwise the U_op level is kept.
    """
    if any(n % p for n in f.support()):
        raise PreconditionError(f"support is not contained in {p}Z; nothing to undo")
    g = U_op(f, p)
    if f.level % p:
        return g
    lower = f.level // p
    if f.character is not None and lower % f.character.conductor:
        return g
    return f.with_coeffs(g.coeffs, lower)


def B_op(f: QExpansion, d: int) -> QExpansion:
    """a(B_d f, m) = a(f, m/d), zero unless d | m; window X."""
    if d < 1:
        raise PreconditionError(f"d must be >= 1, got {d}")
    coeffs = [f.coeffs[m // d] if m % d == 0 else 0 for m in range(f.precision + 1)]
    return f.with_coeffs(coeffs, f.level * d)


def is_squarefree(n: int) -> bool:
    return n >= 1 and all(e == 1 for e in factorint(n).values())


def coprime_sieve(f: QExpansion, M: int) -> QExpansion:
    """Keep a(n) with gcd(n, M) = 1; level N M^2 / M0, M0 = gcd(M, N)-part of M."""
    if M < 1 or not is_squarefree(M):
        raise PreconditionError(f"M must be square-free, got {M}")
    M0 = 1
    for p in factorint(M):
        if f.level % p == 0:
            M0 *= p
    coeffs = [c if gcd(n, M) == 1 else 0 for n, c in enumerate(f.coeffs)]
    return f.with_coeffs(coeffs, f.level * M * M // M0)


def _mobius_table(n: int) -> np.ndarray:
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    for p in primerange(2, n + 1):
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
    return mu


def squarefree_indicator(X: int) -> np.ndarray:
    """sum over r^2 | n of mu(r), for 0 <= n <= X."""
    root = isqrt(X)
    mu = _mobius_table(root)
    out = np.zeros(X + 1, dtype=np.int64)
    for r in range(1, root + 1):
        if mu[r]:
            out[r * r::r * r] += mu[r]
    out[0] = 0
    return out


def squarefree_select(f: QExpansion) -> QExpansion:
    ind = squarefree_indicator(f.precision)
    return f.with_coeffs([c if ind[n] else 0 for n, c in enumerate(f.coeffs)])


# ═════════════════════════════════════════════════════════════════════
# 5. MOMENTS
# ═════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Constraints:
    """Restrictions on the summation index n."""
    modulus: int | None = None
    residue: int = 0
    coprime_to: int = 1
    squarefree: bool = False

    def mask(self, X: int) -> np.ndarray:
        n = np.arange(X + 1)
        keep = n >= 1
        if self.modulus:
            keep &= (n % self.modulus) == (self.residue % self.modulus)
        if self.coprime_to > 1:
            keep &= np.gcd(n, self.coprime_to) == 1
        if self.squarefree:
            keep &= squarefree_indicator(X) != 0
        return keep


@dataclass
class MomentReport:
    grid: list[int]
    sums: list[float]
    slope: float
    residual: float
    drift: float
    dilation: int = 1

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "X": self.grid,
            "S": self.sums,
            "S_over_X": [s / x for s, x in zip(self.sums, self.grid)],
        })


def _normalized_squares(f: QExpansion, X: int, r: int) -> np.ndarray:
    k1 = float(f.weight) - 1
    out = np.zeros(X + 1)
    for n in range(1, X + 1):
        c = f.coeffs[n * r]
        if is_zero(c):
            continue
        if isinstance(c, CyclotomicNumber):
            sq = abs(embed_complex(c)) ** 2
        else:
            sq = float(c * c)
        out[n] = sq / float(n * r) ** k1
    return out


def second_moment(f: QExpansion, grid: list[int], constraints: Constraints | None = None, dilation: int = 1) -> MomentReport:
    """S(X) = sum over constrained n <= X of |a'(f, n r)|^2, and the slope through the origin."""
    grid = sorted(int(x) for x in grid)
    if not grid or grid[0] < 1:
        raise PreconditionError("grid must hold positive integers")
    X = grid[-1]
    if X * dilation > f.precision:
        raise PrecisionError(f"need precision {X * dilation}, have {f.precision}", required=X * dilation)
    terms = _normalized_squares(f, X, dilation)
    terms[~(constraints or Constraints()).mask(X)] = 0.0
    sums = [math.fsum(terms[1:x + 1]) for x in grid]
    xs = np.array(grid, dtype=float).reshape(-1, 1)
    ys = np.array(sums)
    sol, *_ = np.linalg.lstsq(xs, ys, rcond=None)
    slope = float(sol[0])
    norm = float(np.linalg.norm(ys)) or 1.0
    residual = float(np.linalg.norm(xs[:, 0] * slope - ys)) / norm
    drift = 0.0
    if len(grid) >= 2 and sums[-2]:
        a, b = sums[-2] / grid[-2], sums[-1] / grid[-1]
        drift = abs(b - a) / abs(a)
    return MomentReport(grid, sums, slope, residual, drift, dilation)


def nonvanish_count(f: QExpansion, X: int, constraints: Constraints | None = None) -> int:
    if X > f.precision:
        raise PrecisionError(f"need precision {X}, have {f.precision}", required=X)
    keep = (constraints or Constraints()).mask(X)
    return sum(1 for n in range(1, X + 1) if keep[n] and not is_zero(f.coeffs[n]))


def deligne_diagnostic(f: QExpansion, eps: float = 0.0) -> dict:
    """max |a'(n)| n^(-eps) over the window; a report, never an assertion."""
    best, where = 0.0, 0
    for n in range(1, f.precision + 1):
        if is_zero(f.coeffs[n]):
            continue
        v = f.normalized(n) / n ** eps
        if v > best:
            best, where = v, n
    return {"max": best, "argmax": where, "eps": eps}


# ═════════════════════════════════════════════════════════════════════
# 6. SLOPE-RATIO PREDICTIONS
# ═════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class RatioPrediction:
    ratio: Fraction | float
    bound: int
    within_bound: bool


def _is_real(x) -> bool:
    return not isinstance(x, complex)


def _local_ratio(k: int, p: int, e: int, lam_p, lam_p2, chi_p):
    if e == 1:
        if _is_real(lam_p):
            return Fraction(1, p ** (k - 1)) * (p ** (k - 2) + Fraction((p - 1) * lam_p * lam_p, p + 1))
        return (p ** (k - 2) + (p - 1) * abs(lam_p) ** 2 / (p + 1)) / p ** (k - 1)
    if lam_p2 is None:
        lam_p2 = lam_p * lam_p - chi_p * p ** (k - 1)
    if _is_real(lam_p) and _is_real(lam_p2):
        lam_p, lam_p2 = Fraction(lam_p), Fraction(lam_p2)
        core = lam_p2 * lam_p2 + p ** (k - 2) * lam_p * lam_p - 2 * lam_p2 * lam_p * lam_p / (p + 1)
        return core / p ** (2 * k - 2)
    core = (abs(lam_p2) ** 2 + p ** (k - 2) * abs(lam_p) ** 2
            - 2 * (lam_p2 * lam_p.conjugate() ** 2).real / (p + 1))
    return core / p ** (2 * k - 2)


def predicted_moment_ratio(k: int, N: int, eigen: dict, r: int, chi=None) -> RatioPrediction:
    """Predicted A_{f,r} / A_f for a Hecke eigenform.

    Args:
        k: weight.
        N: level; r must be coprime to it.
        eigen: {p: lambda(p)} or {p: (lambda(p), lambda(p^2))}.
        r: dilation, each prime to exponent 1 or 2.
        chi: optional character; chi(p) is needed when lambda(p^2) is omitted.
    """
    if gcd(r, N) != 1:
        raise PreconditionError(f"gcd(r={r}, N={N}) > 1")
    ratio = Fraction(1)
    factors = factorint(r)
    for p, e in sorted(factors.items()):
        if e > 2:
            raise PreconditionError(f"prime {p} appears to exponent {e} > 2 in r")
        data = eigen.get(p)
        if data is None:
            raise PreconditionError(f"missing eigenvalue for p = {p}")
        lam_p, lam_p2 = data if isinstance(data, tuple) else (data, None)
        chi_p = 1 if chi is None else chi(p)
        if isinstance(chi_p, CyclotomicNumber):
            chi_p = embed_complex(chi_p)
        ratio = ratio * _local_ratio(k, p, e, lam_p, lam_p2, chi_p)
    bound = 19 ** len(factors)
    value = ratio if isinstance(ratio, Fraction) else float(ratio)
    return RatioPrediction(value, bound, value <= bound)


# ═════════════════════════════════════════════════════════════════════
# 7. SQUARE-FREE SIEVE CONSTANT
# ═════════════════════════════════════════════════════════════════════

def _exp_upper(x: Fraction, terms: int = 16) -> Fraction:
    """Rational upper bound for e^x, 0 <= x <= 1."""
    total, term = Fraction(0), Fraction(1)
    for j in range(terms + 1):
        total += term
        term = term * x / (j + 1)
    return total + 3 * term


@dataclass(frozen=True)
class SieveConstant:
    lower_bound: Fraction
    estimate: float
    positive: bool
    tail_ok: bool


def squarefree_sieve_constant(level: int = 1, below: int = SIEVE_PRIMES_BELOW,
                              truncation: int = SIEVE_TRUNCATION) -> SieveConstant:
    """Lower bound for 5/2 - 2 prod over p not dividing M of (1 + 19/p^2),
    M = primes below `below` times the primes of the level.

    The product is bounded by exp(sum 19/p^2); primes beyond the truncation
    contribute at most 19/truncation.
    """
    excluded = set(factorint(level))
    scale = 10**12
    numer = 0
    product = 1.0
    for p in primerange(below, truncation + 1):
        if p in excluded:
            continue
        numer += -((-19 * scale) // (p * p))
        product *= 1 + 19 / (p * p)
    exponent = Fraction(numer, scale) + Fraction(19, truncation)
    lower = Fraction(5, 2) - 2 * _exp_upper(exponent)
    tail_ok = _exp_upper(Fraction(19, below)) < Fraction(5, 4)
    return SieveConstant(lower, 2.5 - 2 * product, lower > 0, tail_ok)


# ═════════════════════════════════════════════════════════════════════
# 8. COMPONENT ELIMINATION AND DESCENT
# ═════════════════════════════════════════════════════════════════════

def apply_ledger(f: QExpansion, ledger: dict[Fraction, object], X: int) -> list:
    """A(n) = sum beta * a(f, gamma n), a(f, x) = 0 off the integers."""
    out = []
    for n in range(X + 1):
        total = 0
        for gamma, beta in ledger.items():
            x = gamma * n
            if x.denominator == 1:
                c = f.a(int(x))
                if not is_zero(c):
                    total = total + beta * c
        out.append(_clean(total))
    return out


def eliminate_component(f: QExpansion, p: int, b, ledger: dict | None = None) -> tuple[QExpansion, dict]:
    """g = T_p f - b f, and the ledger {gamma: beta} of g in terms of the original form."""
    g = linear_combination([(1, hecke_T(f, p)), (-b, f)])
    if g.precision < 1:
        raise PrecisionError(f"window exhausted eliminating p = {p}", required=p)
    chi_p = _chi(f, p)
    step = {Fraction(p): 1, Fraction(1, p): chi_p * p ** (f.weight - 1), Fraction(1): -b}
    new: dict[Fraction, object] = {}
    for gamma, beta in (ledger or {Fraction(1): 1}).items():
        for mult, c in step.items():
            key = gamma * mult
            new[key] = new.get(key, 0) + beta * c
    return g, {k: _clean(v) for k, v in new.items() if not is_zero(v)}


def descend_sequence(f: QExpansion, primes: list[int]) -> list[QExpansion]:
    """f_0 = f; for each p keep the part coprime to p, undoing a dilation by p first when
    that part vanishes. Undoing B_p drops the level back to N/p."""
    if f.is_zero():
        raise PreconditionError("descent needs a nonzero form")
    out = [f]
    current = f
    for p in primes:
        sieved = coprime_sieve(current, p)
        while sieved.is_zero():
            undone = undo_dilation(current, p)
            if undone.is_zero() or undone.precision < 1:
                raise PreconditionError("square-free level hypothesis violated")
            current = undone
            sieved = coprime_sieve(current, p)
        current = sieved
        out.append(current)
    return out
