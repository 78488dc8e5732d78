"""
HJF — Hermitian Jacobi coefficient systems

A cusp form of weight k and index m over O_K is stored by its Fourier
coefficients c(n, s), s in O_K, grouped into classes

    (d, s mod i*sqrt|D|*m),   d = |D|nm - N(s) > 0,

since c only depends on that pair. Each class is stored once, under the
canonical representative of its unit orbit; the other members follow from

    c(d, eps*s) = eps^(-k) * c(d, s).

Operators declare their output window (disc_bound) from the input's:
U_rho multiplies it by N(rho), u_rho divides it (floored), everything else
keeps it.
"""
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from sys import stderr

import numpy as np

from src.characters import (
    ExtendedCharacter, GCharacter, build_G, chi_D_character, dirichlet_product,
    extensions_of, g_characters, restrict_to_dirichlet,
)
from src.cyclotomic import conj, is_zero, root_of_unity, simplify, weighted_root_sum
from src.elliptic import QExpansion
from src.errors import PrecisionError, PreconditionError
from src.ring_ok import (
    RingElement, as_field, canonical_key, div_exact, divides, residue_system,
    residues_mod, split_rational_prime, sqrt_D, units,
)


# ═════════════════════════════════════════════════════════════════════
# 1. UNIT ORBITS
# ═════════════════════════════════════════════════════════════════════

@lru_cache(maxsize=200_000)
def _orbit_info(modulus: RingElement, r: RingElement) -> tuple[RingElement, int, tuple[int, ...]]:
    """(orbit representative o, j with r = eps0^j * o, stabiliser of o)."""
    system = residue_system(modulus)
    us = units(modulus.D)
    r = system.reduce(r)
    rep = min((system.reduce(u * r) for u in us), key=canonical_key)
    j = next(i for i, u in enumerate(us) if system.congruent(u * rep, r))
    stab = tuple(i for i, u in enumerate(us) if system.congruent(u * rep, rep))
    return rep, j, stab


def forced_zero(field, k: int, m: int, s: RingElement) -> bool:
    """True when some unit fixes s mod i*sqrt|D|m but eps^(-k) != 1."""
    F = as_field(field)
    _, _, stab = _orbit_info(sqrt_D(F) * m, s)
    return any((i * k) % F.w for i in stab)


def _total(values) -> Fraction:
    out = Fraction(0)
    for v in values:
        out = out + v
    return out


# ═════════════════════════════════════════════════════════════════════
# 2. COEFFICIENT SYSTEMS
# ═════════════════════════════════════════════════════════════════════

class JacobiCoefficientSystem:
    """Truncated Fourier data of a Hermitian Jacobi cusp form.

    Args:
        field: QuadField or discriminant D.
        k: weight.
        m: index.
        disc_bound: largest discriminant d carried.
        entries: (d, s, value) triples; s may be any element of its class.
    """

    def __init__(self, field, k: int, m: int, disc_bound: int, entries=()):
        if m < 1:
            raise PreconditionError(f"index must be >= 1, got {m}")
        self.field = as_field(field)
        self.k = k
        self.m = m
        self.disc_bound = max(0, int(disc_bound))
        self.level = abs(self.field.D) * m
        self.modulus = sqrt_D(self.field) * m
        self.residues = residue_system(self.modulus)
        self.classes: dict[tuple[int, RingElement], object] = {}
        for d, s, value in entries:
            self._store(d, s, value)

    # ── class bookkeeping ─────────────────────────────────────────
    def orbit(self, s: RingElement) -> tuple[RingElement, int, bool]:
        """(orbit representative, unit exponent j, forced-zero flag) for s."""
        rep, j, stab = _orbit_info(self.modulus, s)
        return rep, j, any((i * self.k) % self.field.w for i in stab)

    def residue_reps(self) -> list[RingElement]:
        return self.residues.representatives

    def orbit_reps(self) -> list[RingElement]:
        seen, out = set(), []
        for r in self.residue_reps():
            rep = self.orbit(r)[0]
            if rep not in seen:
                seen.add(rep)
                out.append(rep)
        return out

    def supported(self, d: int, s: RingElement) -> bool:
        return d > 0 and (d + s.norm()) % self.level == 0

    def discriminants_for(self, s: RingElement) -> range:
        """Every d <= disc_bound on which class s can carry a coefficient."""
        first = (-s.norm()) % self.level or self.level
        return range(first, self.disc_bound + 1, self.level)

    def _unit_factor(self, j: int):
        return root_of_unity(Fraction(-j * self.k, self.field.w))

    def _store(self, d: int, s: RingElement, value):
        if d <= 0:
            raise PreconditionError(f"not cuspidal support: d = {d}")
        if d > self.disc_bound:
            raise PrecisionError(f"d = {d} beyond disc_bound {self.disc_bound}", required=d)
        if not self.supported(d, s):
            raise PreconditionError(f"d = {d} violates d = -N(s) mod {self.level} for s = {s}")
        if is_zero(value):
            return
        rep, j, zero = self.orbit(s)
        if zero:
            raise PreconditionError(f"class ({d}, {s}) is forced to vanish at weight {self.k}")
        normalized = simplify(value * conj(self._unit_factor(j)))
        key = (d, rep)
        old = self.classes.get(key)
        if old is not None and not (old == normalized):
            raise PreconditionError(f"inconsistent coefficients for class ({d}, {rep})")
        self.classes[key] = normalized

    # ── coefficient access ────────────────────────────────────────
    def value_at(self, d: int, s: RingElement):
        """Coefficient of class (d, s mod i*sqrt|D|m); zero off support."""
        if d > self.disc_bound:
            raise PrecisionError(f"d = {d} beyond precision {self.disc_bound}", required=d)
        if not self.supported(d, s):
            return Fraction(0)
        rep, j, zero = self.orbit(s)
        if zero:
            return Fraction(0)
        value = self.classes.get((d, rep))
        if value is None:
            return Fraction(0)
        return simplify(value * self._unit_factor(j))

    def discriminants(self) -> list[int]:
        return sorted({d for d, _ in self.classes})

    def items(self):
        for (d, rep), value in sorted(self.classes.items(), key=lambda t: (t[0][0], canonical_key(t[0][1]))):
            yield d, rep, value

    def is_zero(self) -> bool:
        return not self.classes

    def like(self, disc_bound: int | None = None, m: int | None = None, entries=()) -> "JacobiCoefficientSystem":
        return JacobiCoefficientSystem(
            self.field, self.k, self.m if m is None else m,
            self.disc_bound if disc_bound is None else disc_bound, entries,
        )

    def truncate(self, disc_bound: int) -> "JacobiCoefficientSystem":
        return self.like(min(disc_bound, self.disc_bound),
                         entries=((d, rep, v) for d, rep, v in self.items() if d <= disc_bound))

    def check_invariants(self) -> bool:
        """Re-validate every stored class."""
        for d, rep, value in self.items():
            if not (0 < d <= self.disc_bound) or not self.supported(d, rep):
                return False
            if self.orbit(rep)[2] or self.orbit(rep)[0] != rep or is_zero(value):
                return False
        return True

    # ── algebra ───────────────────────────────────────────────────
    def __eq__(self, other):
        if not isinstance(other, JacobiCoefficientSystem):
            return NotImplemented
        return (self.field == other.field and self.k == other.k and self.m == other.m
                and self.disc_bound == other.disc_bound and self.classes == other.classes)

    __hash__ = None

    def agrees_with(self, other: "JacobiCoefficientSystem") -> bool:
        """Equal on the common window."""
        B = min(self.disc_bound, other.disc_bound)
        return self.truncate(B).classes == other.truncate(B).classes

    def __add__(self, other):
        return linear_combination([(1, self), (1, other)])

    def __sub__(self, other):
        return linear_combination([(1, self), (-1, other)])

    def __mul__(self, scalar):
        return linear_combination([(scalar, self)])

    __rmul__ = __mul__

    def __repr__(self):
        return (f"JacobiCoefficientSystem(D={self.field.D}, k={self.k}, m={self.m}, "
                f"B={self.disc_bound}, {len(self.classes)} classes)")


def linear_combination(terms) -> JacobiCoefficientSystem:
    """Sum of coef * system over systems of one field, weight and index."""
    terms = list(terms)
    if not terms:
        raise PreconditionError("empty linear combination")
    first = terms[0][1]
    for _, s in terms:
        if (s.field, s.k, s.m) != (first.field, first.k, first.m):
            raise PreconditionError("systems differ in field, weight or index")
    B = min(s.disc_bound for _, s in terms)
    acc: dict[tuple[int, RingElement], object] = {}
    for coef, s in terms:
        for d, rep, value in s.items():
            if d <= B:
                acc[(d, rep)] = acc.get((d, rep), Fraction(0)) + coef * value
    return first.like(B, entries=((d, rep, v) for (d, rep), v in acc.items()))


def lookup(sys: JacobiCoefficientSystem, n: int, s: RingElement):
    """c(n, s) through its class, with the unit factor applied."""
    d = abs(sys.field.D) * n * sys.m - s.norm()
    if d <= 0:
        raise PreconditionError(f"not cuspidal support: |D|nm - N(s) = {d}")
    if d > sys.disc_bound:
        raise PrecisionError(f"discriminant {d} beyond precision {sys.disc_bound}", required=d)
    return sys.value_at(d, s)


def random_admissible(field, k: int, m: int, B: int, seed: int = 0, spread: int = 9) -> JacobiCoefficientSystem:
    """Seeded random system honouring support and forced-zero classes."""
    if B < 1:
        raise PreconditionError("disc_bound must be >= 1")
    rng = np.random.default_rng(seed)
    shell = JacobiCoefficientSystem(field, k, m, B)
    entries = []
    for rep in shell.orbit_reps():
        if shell.orbit(rep)[2]:
            continue
        for d in shell.discriminants_for(rep):
            entries.append((d, rep, Fraction(int(rng.integers(-spread, spread + 1)))))
    return shell.like(entries=entries)


# ═════════════════════════════════════════════════════════════════════
# 3. THETA COMPONENTS
# ═════════════════════════════════════════════════════════════════════

@dataclass
class ThetaComponent:
    """h_s as {d: coefficient of q^(d/(|D|m))}."""
    residue: RingElement
    series: dict[int, object] = dc_field(default_factory=dict)


def theta_components(sys: JacobiCoefficientSystem) -> dict[RingElement, ThetaComponent]:
    out = {}
    for r in sys.residue_reps():
        series = {}
        for d in sys.discriminants_for(r):
            v = sys.value_at(d, r)
            if not is_zero(v):
                series[d] = v
        out[r] = ThetaComponent(r, series)
    return out


def assemble(components: dict[RingElement, ThetaComponent], field, k: int, m: int, disc_bound: int) -> JacobiCoefficientSystem:
    """Inverse of theta_components."""
    entries = ((d, comp.residue, v) for comp in components.values() for d, v in comp.series.items())
    return JacobiCoefficientSystem(field, k, m, disc_bound, entries)


# ═════════════════════════════════════════════════════════════════════
# 4. EICHLER–ZAGIER MAPS
# ═════════════════════════════════════════════════════════════════════

def ez_map(sys: JacobiCoefficientSystem) -> QExpansion:
    """A(n) = sum over residues s of c(n, s); weight k-1, level |D|m, chi_D."""
    coeffs = [Fraction(0)] * (sys.disc_bound + 1)
    for r in sys.residue_reps():
        for d in sys.discriminants_for(r):
            v = sys.value_at(d, r)
            if not is_zero(v):
                coeffs[d] = coeffs[d] + v
    return QExpansion(sys.k - 1, sys.level, chi_D_character(sys.field).lift(sys.level),
                      [simplify(c) for c in coeffs])


def _check_character(sys: JacobiCoefficientSystem, ext: ExtendedCharacter):
    g = ext.group
    if g.field != sys.field or g.m != sys.m:
        raise PreconditionError(
            f"character modulus (D={g.field.D}, m={g.m}) does not match system (D={sys.field.D}, m={sys.m})"
        )


def twisted_level(field, m: int) -> int:
    F = as_field(field)
    q = abs(F.D) * m
    f = q if F.D % 2 else q // 2
    return 2 * f * q


def twisted_ez_map(sys: JacobiCoefficientSystem, ext: ExtendedCharacter) -> QExpansion:
    """B(n) = sum over unit residues s of conj(eta~(s)) * c(n, s)."""
    _check_character(sys, ext)
    group = ext.group
    terms: dict[int, list] = {}
    for r in sys.residue_reps():
        angle = ext.angle(r)
        if angle is None:
            continue
        for d in sys.discriminants_for(r):
            v = sys.value_at(d, r)
            if not is_zero(v):
                terms.setdefault(d, []).append((-angle, v))
    coeffs = [Fraction(0)] * (sys.disc_bound + 1)
    for d, pairs in terms.items():
        coeffs[d] = weighted_root_sum(pairs)
    character = dirichlet_product(chi_D_character(sys.field), restrict_to_dirichlet(ext).conj())
    level = twisted_level(sys.field, sys.m)
    return QExpansion(sys.k - 1, level, character.lift(level), coeffs)


def all_twisted_maps(sys: JacobiCoefficientSystem) -> list[tuple[GCharacter, ExtendedCharacter, QExpansion]]:
    """Every twisted image over every admissible eta and every extension."""
    G = build_G(sys.field, sys.m)
    out = []
    for eta in g_characters(G, sys.k):
        for ext in extensions_of(eta):
            out.append((eta, ext, twisted_ez_map(sys, ext)))
    return out


# ═════════════════════════════════════════════════════════════════════
# 5. W_mu AND ETA-PROJECTIONS
# ═════════════════════════════════════════════════════════════════════

def _check_in_G(sys: JacobiCoefficientSystem, mu: RingElement):
    if mu.norm() % sys.level != 1 % sys.level:
        raise PreconditionError(f"{mu} is not in G: N(mu) = {mu.norm()} != 1 mod {sys.level}")


def w_mu(sys: JacobiCoefficientSystem, mu: RingElement) -> JacobiCoefficientSystem:
    """Relabel classes: new (d, s) takes the value at (d, mu*s)."""
    _check_in_G(sys, mu)
    entries = []
    for rep in sys.orbit_reps():
        for d in sys.discriminants_for(rep):
            v = sys.value_at(d, mu * rep)
            if not is_zero(v):
                entries.append((d, rep, v))
    return sys.like(entries=entries)


def eta_project(sys: JacobiCoefficientSystem, eta: GCharacter) -> JacobiCoefficientSystem:
    """|G|^-1 * sum over mu in G of conj(eta(mu)) W_mu(sys)."""
    G = eta.group
    if G.parent.field != sys.field or G.parent.m != sys.m:
        raise PreconditionError("character of G does not match the system")
    members = [(G.parent.elements[i], eta.angles[i]) for i in G.members]
    size = len(members)
    entries = []
    for rep in sys.orbit_reps():
        for d in sys.discriminants_for(rep):
            pairs = []
            for mu, angle in members:
                v = sys.value_at(d, mu * rep)
                if not is_zero(v):
                    pairs.append((-angle, v))
            if pairs:
                total = weighted_root_sum(pairs)
                if not is_zero(total):
                    entries.append((d, rep, total / size))
    return sys.like(entries=entries)


def extension_sum_identity(sys: JacobiCoefficientSystem, eta: GCharacter, s: RingElement, n: int):
    """Both sides of
        sum_{eta~ | eta} eta~(s) B_eta~(n) = #(G~/G) sum_{mu in G} conj(eta(mu)) c(n, mu s)
    for a unit residue s.
    """
    G = eta.group
    lhs = Fraction(0)
    for ext in extensions_of(eta):
        lhs = lhs + ext(s) * twisted_ez_map(sys, ext).a(n)
    pairs = [(-eta.angles[i], sys.value_at(n, G.parent.elements[i] * s)) for i in G.members]
    rhs = weighted_root_sum(pairs) * G.index_in_parent
    return simplify(lhs), simplify(rhs)


def twist_blocks(sys: JacobiCoefficientSystem, eta: GCharacter) -> dict[int, tuple[RingElement, object]]:
    """n -> (coset representative t, block value) with
        B_xi(n) = conj(xi(t)) * block   for every extension xi of eta.

    Only one coset of G can meet discriminant n, because the norm
    separates the cosets of G modulo |D|m.
    """
    G = eta.group
    parent = G.parent
    cosets: dict[int, RingElement] = {}
    for x in parent.elements:
        cosets.setdefault(x.norm() % sys.level, x)
    out = {}
    for n in range(1, sys.disc_bound + 1):
        t = cosets.get((-n) % sys.level)
        if t is None:
            continue
        pairs = [(-eta.angles[i], sys.value_at(n, parent.elements[i] * t)) for i in G.members]
        block = weighted_root_sum(pairs)
        if not is_zero(block):
            out[n] = (t, block)
    return out


# ═════════════════════════════════════════════════════════════════════
# 6. INDEX OPERATORS
# ═════════════════════════════════════════════════════════════════════

def apply_U_rho(sys: JacobiCoefficientSystem, rho: RingElement) -> JacobiCoefficientSystem:
    """phi(tau, rho z1, conj(rho) z2): c_out(n, r) = c(n, r/rho), index m*N(rho)."""
    if rho.is_zero():
        raise PreconditionError("rho must be nonzero")
    N = rho.norm()
    out = sys.like(disc_bound=sys.disc_bound * N, m=sys.m * N)
    entries = []
    for rep in out.orbit_reps():
        t = div_exact(rep, rho)
        if t is None:
            continue
        for d in out.discriminants_for(rep):
            if d % N:
                continue
            v = sys.value_at(d // N, t)
            if not is_zero(v):
                entries.append((d, rep, v))
    return out.like(entries=entries)


def apply_u_rho(sys: JacobiCoefficientSystem, rho: RingElement) -> JacobiCoefficientSystem:
    """Index-lowering operator, index m/N(rho):
        c_out(d, r) = sum over u in O/conj(rho) of c(N(rho) d, rho (r + sqrt(D) m_out u)).
    """
    if rho.is_zero():
        raise PreconditionError("rho must be nonzero")
    N = rho.norm()
    if sys.m % N:
        raise PreconditionError(f"N(rho) = {N} does not divide the index {sys.m}")
    if not divides(rho, sys.modulus):
        raise PreconditionError(f"{rho} does not divide i*sqrt|D|*{sys.m}")
    if not divides(rho, RingElement(sys.m, 0, sys.field.D)):
        print(f"  ⚠️ u_rho: {rho} does not divide m = {sys.m}; using the relaxed condition", file=stderr)
    m_out = sys.m // N
    out = sys.like(disc_bound=sys.disc_bound // N, m=m_out)
    step = sqrt_D(sys.field) * m_out
    lifts = residues_mod(rho.conj())
    entries = []
    for rep in out.orbit_reps():
        for d in out.discriminants_for(rep):
            total = _total(sys.value_at(N * d, rho * (rep + step * u)) for u in lifts)
            if not is_zero(total):
                entries.append((d, rep, total))
    return out.like(entries=entries)


def apply_V_l(sys: JacobiCoefficientSystem, l: int) -> JacobiCoefficientSystem:
    """c_out(n, r) = sum over a | (n, l), a | r of a^(k-1) c(nl/a^2, r/a), index m*l.

    Evaluated on the canonical representative r of each output class.
    """
    if l < 1:
        raise PreconditionError(f"l must be >= 1, got {l}")
    out = sys.like(m=sys.m * l)
    D = abs(sys.field.D)
    entries = []
    for rep in out.orbit_reps():
        for d in out.discriminants_for(rep):
            n = (d + rep.norm()) // (D * out.m)
            terms = []
            for a in range(1, l + 1):
                if l % a or n % a or rep.a % a or rep.b % a:
                    continue
                r_a = RingElement(rep.a // a, rep.b // a, rep.D)
                terms.append(a ** (sys.k - 1) * sys.value_at(d // (a * a), r_a))
            total = _total(terms)
            if not is_zero(total):
                entries.append((d, rep, total))
    return out.like(entries=entries)


# ═════════════════════════════════════════════════════════════════════
# 7. SPEZ SYSTEMS
# ═════════════════════════════════════════════════════════════════════

def spez_profile(sys: JacobiCoefficientSystem) -> dict[int, object] | None:
    """d -> common value when every supported class at d agrees, else None."""
    profile = {}
    for r in sys.residue_reps():
        for d in sys.discriminants_for(r):
            v = sys.value_at(d, r)
            if d in profile:
                if not (profile[d] == v):
                    return None
            else:
                profile[d] = v
    return {d: v for d, v in profile.items() if not is_zero(v)}


def is_spez(sys: JacobiCoefficientSystem) -> bool:
    """c(n, r) depends only on the discriminant |D|nm - N(r)."""
    return spez_profile(sys) is not None


def spez_system(field, k: int, m: int, disc_bound: int, values: dict[int, object]) -> JacobiCoefficientSystem:
    """The system with c(d, s) = values[d] on every supported class."""
    F = as_field(field)
    if k % F.w:
        raise PreconditionError(f"spez systems need k = 0 mod {F.w}, got k = {k}")
    shell = JacobiCoefficientSystem(F, k, m, disc_bound)
    entries = [(d, rep, values[d]) for rep in shell.orbit_reps()
               for d in shell.discriminants_for(rep) if d in values]
    return shell.like(entries=entries)


def spez_from_ez(field, k: int, m: int, disc_bound: int, image: QExpansion) -> JacobiCoefficientSystem:
    """Invert ez_map on spez systems: c(d) = A(d) / #{s : d = -N(s) mod |D|m}."""
    shell = JacobiCoefficientSystem(field, k, m, disc_bound)
    counts: dict[int, int] = {}
    for r in shell.residue_reps():
        counts[r.norm() % shell.level] = counts.get(r.norm() % shell.level, 0) + 1
    values = {}
    for d in range(1, disc_bound + 1):
        c = counts.get((-d) % shell.level, 0)
        if c:
            values[d] = simplify(image.a(d)) / c
    return spez_system(field, k, m, disc_bound, values)


# ═════════════════════════════════════════════════════════════════════
# 8. PSI-COMBINATION
# ═════════════════════════════════════════════════════════════════════

def psi_combination(sys: JacobiCoefficientSystem, pi: RingElement) -> JacobiCoefficientSystem:
    """psi = p^4 phi - p^3 U_pi(u_pi phi) - p^3 U_pibar(u_pibar phi) + p^2 U_pi(u_pibar phi)."""
    p = pi.norm()
    info = split_rational_prime(p, sys.field) if p > 1 else None
    if info is None or info.kind != "split":
        raise PreconditionError(f"N(pi) = {p} must be a split rational prime")
    if sys.m != p:
        raise PreconditionError(f"psi needs index p = {p}, got m = {sys.m}")
    pibar = pi.conj()
    terms = [
        (p**4, sys),
        (-p**3, apply_U_rho(apply_u_rho(sys, pi), pi)),
        (-p**3, apply_U_rho(apply_u_rho(sys, pibar), pibar)),
        (p**2, apply_U_rho(apply_u_rho(sys, pibar), pi)),
    ]
    return linear_combination(terms)
