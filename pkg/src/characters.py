"""
HJF — Residue unit groups and their characters

    G~ = (O / i*sqrt|D|*m O)^x
    G  = { mu in G~ : N(mu) = 1 mod |D|m }

Characters are angle tables (Fraction mod 1, value e(angle)) over the group
elements, built by extending one cyclic layer at a time. Dirichlet
characters are angle tables over Z/q with None off the units.
"""
from fractions import Fraction
from functools import lru_cache
from math import gcd

from sympy import divisors as int_divisors

from src.config import CHARACTER_CAP
from src.cyclotomic import root_of_unity, weighted_root_sum
from src.errors import ParseError, PreconditionError
from src.ring_ok import (
    RingElement, as_field, canonical_key, divides, kronecker, parse_element,
    prime_ideal_factors, residue_system, sqrt_D, units,
)

ZERO = Fraction(0)


# ═════════════════════════════════════════════════════════════════════
# 1. GROUPS
# ═════════════════════════════════════════════════════════════════════

class ResidueUnitGroup:
    """(O / i*sqrt|D|*m O)^x with canonical representatives."""

    def __init__(self, field, m: int):
        if m < 1:
            raise PreconditionError(f"index must be >= 1, got {m}")
        self.field = as_field(field)
        self.m = m
        q = abs(self.field.D) * m
        if q > CHARACTER_CAP:
            raise PreconditionError(f"|D|m = {q} exceeds HJF_CHARACTER_CAP={CHARACTER_CAP}")
        self.modulus = sqrt_D(self.field) * m
        self.system = residue_system(self.modulus)
        primes = [pi for pi, _ in prime_ideal_factors(self.modulus)]
        self.elements: list[RingElement] = [
            x for x in self.system.representatives
            if not x.is_zero() and not any(divides(pi, x) for pi in primes)
        ]
        self._index = {self.system.key(x): i for i, x in enumerate(self.elements)}
        self.identity = self.index(RingElement(1, 0, self.field.D))

    def __len__(self):
        return len(self.elements)

    def index(self, x: RingElement) -> int:
        i = self._index.get(self.system.key(x))
        if i is None:
            raise PreconditionError(f"{x} is not a unit mod {self.modulus}")
        return i

    def contains(self, x: RingElement) -> bool:
        return self.system.key(x) in self._index

    def mul(self, i: int, j: int) -> int:
        return self.index(self.elements[i] * self.elements[j])

    def order_of(self, i: int) -> int:
        n, x = 1, i
        while x != self.identity:
            x, n = self.mul(x, i), n + 1
        return n

    def structure(self) -> list[tuple[RingElement, int]]:
        """Generators with the orders of the cyclic layers they add."""
        current = {self.identity}
        out = []
        for g in range(len(self)):
            if g in current:
                continue
            n, x = 1, g
            while x not in current:
                x, n = self.mul(x, g), n + 1
            layer, gj = set(), self.identity
            for _ in range(n):
                layer |= {self.mul(h, gj) for h in current}
                gj = self.mul(gj, g)
            current = layer
            out.append((self.elements[g], n))
        return out


class GSubgroup:
    """Norm-one residues: N(mu) = 1 mod |D|m."""

    def __init__(self, parent: ResidueUnitGroup):
        self.parent = parent
        q = abs(parent.field.D) * parent.m
        self.members = [i for i, x in enumerate(parent.elements) if x.norm() % q == 1 % q]
        self._members = set(self.members)

    @property
    def elements(self) -> list[RingElement]:
        return [self.parent.elements[i] for i in self.members]

    def __len__(self):
        return len(self.members)

    def contains(self, x: RingElement) -> bool:
        return self.parent.contains(x) and self.parent.index(x) in self._members

    def is_subgroup(self) -> bool:
        return all(self.parent.mul(i, j) in self._members
                   for i in self.members for j in self.members)

    @property
    def index_in_parent(self) -> int:
        return len(self.parent) // len(self)


@lru_cache(maxsize=64)
def unit_group(field, m: int) -> ResidueUnitGroup:
    return ResidueUnitGroup(as_field(field), m)


@lru_cache(maxsize=64)
def build_G(field, m: int) -> GSubgroup:
    return GSubgroup(unit_group(field, m))


# ═════════════════════════════════════════════════════════════════════
# 2. CHARACTER CONSTRUCTION
# ═════════════════════════════════════════════════════════════════════

def _extend(group: ResidueUnitGroup, base: list[int], tables: list[dict], targets: list[int]) -> list[dict]:
    """All extensions of characters on the subgroup `base` to <base, targets>.

    For g outside the current subgroup H, with n minimal such that g^n in H,
    a character chi0 of H extends by chi(h g^j) = chi0(h) + j*theta where
    n*theta = chi0(g^n) mod 1, giving n choices of theta.
    """
    current = list(base)
    present = set(current)
    for g in targets:
        if g in present:
            continue
        n, x = 1, g
        while x not in present:
            x, n = group.mul(x, g), n + 1
        extended = []
        for chi in tables:
            for t in range(n):
                theta = (chi[x] + t) / n
                new, gj = {}, group.identity
                for j in range(n):
                    for h in current:
                        new[group.mul(h, gj)] = (chi[h] + j * theta) % 1
                    gj = group.mul(gj, g)
                extended.append(new)
        tables = extended
        current = list(tables[0])
        present = set(current)
    return tables


class GCharacter:
    """A character of G, stored as angles over G's members."""

    def __init__(self, group: GSubgroup, angles: dict[int, Fraction], k: int | None = None, label: int = 0):
        self.group = group
        self.angles = angles
        self.k = k
        self.label = label

    def angle(self, x: RingElement) -> Fraction:
        if not self.group.contains(x):
            raise PreconditionError(f"{x} is not in G")
        return self.angles[self.group.parent.index(x)]

    def __call__(self, x: RingElement):
        return root_of_unity(self.angle(x))

    def is_trivial(self) -> bool:
        return not any(self.angles.values())

    def __repr__(self):
        return f"GCharacter(D={self.group.parent.field.D}, m={self.group.parent.m}, k={self.k}, #{self.label})"


class ExtendedCharacter:
    """A character of G~ restricting to `base` on G; zero off the units."""

    def __init__(self, base: GCharacter, angles: dict[int, Fraction], label: int = 0):
        self.base = base
        self.angles = angles
        self.label = label

    @property
    def group(self) -> ResidueUnitGroup:
        return self.base.group.parent

    def angle(self, x: RingElement) -> Fraction | None:
        if not self.group.contains(x):
            return None
        return self.angles[self.group.index(x)]

    def __call__(self, x: RingElement):
        a = self.angle(x)
        return 0 if a is None else root_of_unity(a)

    def restricts_to_base(self) -> bool:
        return all(self.angles[i] == a for i, a in self.base.angles.items())

    def __repr__(self):
        return f"ExtendedCharacter({self.base!r}, ext #{self.label})"


def all_characters(G: GSubgroup) -> list[GCharacter]:
    """Every character of G, no unit condition."""
    parent = G.parent
    tables = _extend(parent, [parent.identity], [{parent.identity: ZERO}], G.members)
    return [GCharacter(G, t, None, j) for j, t in enumerate(tables)]


def g_characters(G: GSubgroup, k: int) -> list[GCharacter]:
    """Characters of G with eta(eps) = eps^(-k) on every unit image."""
    F = G.parent.field
    constraints = [(G.parent.index(eps), Fraction(-j * k, F.w) % 1)
                   for j, eps in enumerate(units(F))]
    out = []
    for chi in all_characters(G):
        if all(chi.angles[i] == a for i, a in constraints):
            out.append(GCharacter(G, chi.angles, k, len(out)))
    return out


def extensions_of(eta: GCharacter) -> list[ExtendedCharacter]:
    """The [G~ : G] characters of G~ restricting to eta."""
    parent = eta.group.parent
    tables = _extend(parent, eta.group.members, [dict(eta.angles)], list(range(len(parent))))
    return [ExtendedCharacter(eta, t, j) for j, t in enumerate(tables)]


def quotient_characters(G: GSubgroup) -> list[ExtendedCharacter]:
    """Characters of G~/G, i.e. extensions of the trivial character of G."""
    trivial = GCharacter(G, {i: ZERO for i in G.members}, None, 0)
    return extensions_of(trivial)


def lemma_sum(eta: GCharacter, alpha: RingElement):
    """Sum of eta~(alpha) over all extensions eta~ of eta."""
    return weighted_root_sum(
        (a, 1) for ext in extensions_of(eta) if (a := ext.angle(alpha)) is not None
    )


# ═════════════════════════════════════════════════════════════════════
# 3. DIRICHLET CHARACTERS
# ═════════════════════════════════════════════════════════════════════

class DirichletCharacter:
    """Angle table over Z/q; None marks non-units."""

    def __init__(self, modulus: int, table: list[Fraction | None]):
        if modulus < 1 or len(table) != modulus:
            raise PreconditionError("table length must equal the modulus")
        self.modulus = modulus
        self.table = tuple(None if a is None else Fraction(a) % 1 for a in table)

    def angle(self, n: int) -> Fraction | None:
        return self.table[n % self.modulus]

    def __call__(self, n: int):
        a = self.angle(n)
        return 0 if a is None else root_of_unity(a)

    @property
    def conductor(self) -> int:
        q = self.modulus
        for d in int_divisors(q):
            if all(self.table[a] == 0 for a in range(1, q, d) if self.table[a] is not None):
                return d
        return q

    def is_principal(self) -> bool:
        return all(a == 0 for a in self.table if a is not None)

    def is_real(self) -> bool:
        return all(a in (0, Fraction(1, 2)) for a in self.table if a is not None)

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, [None if a is None else -a for a in self.table])

    def lift(self, modulus: int) -> "DirichletCharacter":
        if modulus % self.modulus:
            raise PreconditionError(f"cannot lift modulus {self.modulus} to {modulus}")
        return DirichletCharacter(modulus, [
            None if gcd(n, modulus) > 1 else self.table[n % self.modulus]
            for n in range(modulus)
        ])

    def reduce_to(self, modulus: int) -> "DirichletCharacter":
        """The same character read mod a divisor that the conductor divides."""
        if self.modulus % modulus or modulus % self.conductor:
            raise PreconditionError(
                f"cannot reduce modulus {self.modulus} (conductor {self.conductor}) to {modulus}")
        table = []
        for n in range(modulus):
            if gcd(n, modulus) > 1:
                table.append(None)
                continue
            rep = next(n + t * modulus for t in range(self.modulus // modulus + 1)
                       if gcd(n + t * modulus, self.modulus) == 1)
            table.append(self.table[rep % self.modulus])
        return DirichletCharacter(modulus, table)

    def to_modulus(self, modulus: int) -> "DirichletCharacter":
        """Lift, or reduce then lift, so the table lives mod `modulus`."""
        if modulus % self.modulus == 0:
            return self.lift(modulus)
        return self.reduce_to(gcd(self.modulus, modulus)).lift(modulus)

    def __eq__(self, other):
        if not isinstance(other, DirichletCharacter):
            return NotImplemented
        return self.modulus == other.modulus and self.table == other.table

    __hash__ = None

    def __repr__(self):
        return f"DirichletCharacter(mod {self.modulus}, conductor {self.conductor})"


def principal_character(q: int) -> DirichletCharacter:
    return DirichletCharacter(q, [ZERO if gcd(n, q) == 1 else None for n in range(q)])


def kronecker_character(a: int, q: int) -> DirichletCharacter:
    """n -> (a/n) as a character mod q (caller picks q as a period)."""
    table = []
    for n in range(q):
        if gcd(n, q) > 1:
            table.append(None)
            continue
        v = kronecker(a, n) if n else kronecker(a, q)
        table.append(ZERO if v == 1 else Fraction(1, 2))
    return DirichletCharacter(q, table)


def chi_D_character(field) -> DirichletCharacter:
    D = as_field(field).D
    return kronecker_character(D, abs(D))


def dirichlet_product(chi1: DirichletCharacter, chi2: DirichletCharacter) -> DirichletCharacter:
    q = chi1.modulus // gcd(chi1.modulus, chi2.modulus) * chi2.modulus
    table = []
    for n in range(q):
        a, b = chi1.angle(n), chi2.angle(n)
        table.append(None if a is None or b is None else a + b)
    return DirichletCharacter(q, table)


def restrict_to_dirichlet(ext: ExtendedCharacter) -> DirichletCharacter:
    """n -> eta~(n mod i*sqrt|D|m), as a character mod |D|m."""
    group = ext.group
    q = abs(group.field.D) * group.m
    table = [ext.angle(RingElement(n, 0, group.field.D)) if gcd(n, q) == 1 else None
             for n in range(q)]
    return DirichletCharacter(q, table)


# ═════════════════════════════════════════════════════════════════════
# 4. SERIALISATION
# ═════════════════════════════════════════════════════════════════════

def _angle_str(a: Fraction | None) -> str | None:
    return None if a is None else f"{a.numerator}/{a.denominator}"


def _angle_parse(text: str | None) -> Fraction | None:
    if text is None:
        return None
    try:
        return Fraction(text)
    except ValueError as e:
        raise ParseError(f"bad angle {text!r}") from e


def character_to_dict(chi) -> dict:
    """JSON-ready form of a GCharacter, ExtendedCharacter or DirichletCharacter."""
    if isinstance(chi, DirichletCharacter):
        return {"type": "dirichlet", "modulus": chi.modulus,
                "angles": [_angle_str(a) for a in chi.table]}
    if isinstance(chi, ExtendedCharacter):
        parent = chi.group
        return {"type": "extended", "D": parent.field.D, "m": parent.m, "k": chi.base.k,
                "base": character_to_dict(chi.base)["angles"],
                "angles": {str(parent.elements[i]): _angle_str(a)
                           for i, a in sorted(chi.angles.items(), key=lambda t: canonical_key(parent.elements[t[0]]))}}
    parent = chi.group.parent
    return {"type": "g", "D": parent.field.D, "m": parent.m, "k": chi.k,
            "angles": {str(parent.elements[i]): _angle_str(a)
                       for i, a in sorted(chi.angles.items(), key=lambda t: canonical_key(parent.elements[t[0]]))}}


def character_from_dict(data: dict):
    kind = data.get("type")
    if kind == "dirichlet":
        return DirichletCharacter(int(data["modulus"]), [_angle_parse(a) for a in data["angles"]])
    if kind not in ("g", "extended"):
        raise ParseError(f"unknown character type {kind!r}")
    G = build_G(int(data["D"]), int(data["m"]))
    parent = G.parent

    def table(angles: dict) -> dict[int, Fraction]:
        return {parent.index(parse_element(s)): _angle_parse(a) for s, a in angles.items()}

    if kind == "g":
        return GCharacter(G, table(data["angles"]), data.get("k"))
    base = GCharacter(G, table(data["base"]), data.get("k"))
    return ExtendedCharacter(base, table(data["angles"]))
