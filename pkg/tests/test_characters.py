"""
Tests for residue unit groups, G-characters, extensions and Dirichlet characters.
Run: pytest tests/ -v
"""
from fractions import Fraction
from math import prod

import pytest


def _make_G(D=-4, m=3):
    from src.characters import build_G
    return build_G(D, m)


# ═══════════════════════════════════════════════════════════════════════
# GROUPS
# ═══════════════════════════════════════════════════════════════════════

class TestResidueUnitGroup:
    """(O / i*sqrt|D|*m O)^x and its norm-one subgroup."""

    def test_gaussian_index_one(self):
        from src.ring_ok import RingElement
        G = _make_G(-4, 1)
        assert len(G.parent) == 2
        assert set(G.parent.elements) == {RingElement(1, 0, -4), RingElement(0, 1, -4)}
        assert len(G) == 2

    def test_gaussian_index_three(self):
        G = _make_G(-4, 3)
        assert len(G.parent) == 16
        assert len(G) == 8
        assert G.index_in_parent == 2
        assert G.is_subgroup()

    def test_structure_multiplies_to_order(self):
        for D, m in ((-4, 3), (-3, 2), (-7, 1), (-8, 5)):
            group = _make_G(D, m).parent
            assert prod(n for _, n in group.structure()) == len(group)

    def test_element_orders_divide_group_order(self):
        group = _make_G(-3, 2).parent
        for i in range(len(group)):
            assert len(group) % group.order_of(i) == 0

    def test_membership(self):
        from src.ring_ok import RingElement
        G = _make_G(-4, 3)
        assert G.contains(RingElement(1, 0, -4))
        assert not G.parent.contains(RingElement(3, 0, -4))
        assert not G.contains(RingElement(1, 1, -4))

    def test_character_cap(self):
        from src.characters import ResidueUnitGroup
        from src.errors import PreconditionError
        with pytest.raises(PreconditionError, match="HJF_CHARACTER_CAP"):
            ResidueUnitGroup(-163, 2)


# ═══════════════════════════════════════════════════════════════════════
# G-CHARACTERS
# ═══════════════════════════════════════════════════════════════════════

class TestGCharacters:
    """Enumeration, the unit condition and orthogonality."""

    def test_all_characters_count(self):
        from src.characters import all_characters
        G = _make_G(-4, 3)
        chars = all_characters(G)
        assert len(chars) == len(G)
        assert len({tuple(sorted(c.angles.items())) for c in chars}) == len(G)

    def test_orthogonality(self):
        from src.characters import all_characters
        from src.cyclotomic import weighted_root_sum
        G = _make_G(-4, 3)
        chars = all_characters(G)
        for x in G.elements:
            total = weighted_root_sum((c.angle(x), 1) for c in chars)
            assert total == (len(G) if x == G.parent.elements[G.parent.identity] else 0)

    def test_gaussian_index_one_unit_condition(self):
        from src.characters import g_characters
        G = _make_G(-4, 1)
        assert len(g_characters(G, 8)) == 1
        assert len(g_characters(G, 10)) == 1
        assert g_characters(G, 8)[0].is_trivial()
        assert not g_characters(G, 10)[0].is_trivial()
        assert g_characters(G, 9) == []

    def test_unit_condition_holds(self):
        from src.characters import g_characters
        from src.ring_ok import units
        for D, m, k in ((-4, 3, 10), (-3, 2, 12), (-7, 3, 8)):
            G = _make_G(D, m)
            w = G.parent.field.w
            for eta in g_characters(G, k):
                for j, eps in enumerate(units(D)):
                    assert eta.angle(eps) == Fraction(-j * k, w) % 1

    def test_angle_outside_G(self):
        from src.characters import all_characters
        from src.errors import PreconditionError
        from src.ring_ok import RingElement
        eta = all_characters(_make_G(-4, 3))[0]
        with pytest.raises(PreconditionError, match="not in G"):
            eta.angle(RingElement(1, 1, -4))


class TestExtensions:
    """Characters of G~ restricting to a given eta."""

    def test_extension_count_and_restriction(self):
        from src.characters import all_characters, extensions_of
        G = _make_G(-4, 3)
        for eta in all_characters(G):
            exts = extensions_of(eta)
            assert len(exts) == G.index_in_parent
            assert all(ext.restricts_to_base() for ext in exts)

    def test_quotient_characters(self):
        from src.characters import quotient_characters
        G = _make_G(-4, 5)
        quotient = quotient_characters(G)
        assert len(quotient) == G.index_in_parent
        assert all(ext(x) == 1 for ext in quotient for x in G.elements)

    def test_extended_character_vanishes_off_units(self):
        from src.characters import extensions_of, g_characters
        from src.ring_ok import RingElement
        ext = extensions_of(g_characters(_make_G(-4, 3), 10)[0])[0]
        assert ext(RingElement(3, 0, -4)) == 0
        assert ext.angle(RingElement(1, 1, -4)) is None

    def test_lemma_sum(self):
        from src.characters import all_characters, lemma_sum
        from src.ring_ok import RingElement
        G = _make_G(-4, 5)
        index = G.index_in_parent
        for eta in all_characters(G)[:4]:
            for x in G.parent.elements:
                expected = index * eta(x) if G.contains(x) else 0
                assert lemma_sum(eta, x) == expected
            assert lemma_sum(eta, RingElement(5, 0, -4)) == 0


# ═══════════════════════════════════════════════════════════════════════
# DIRICHLET CHARACTERS
# ═══════════════════════════════════════════════════════════════════════

class TestDirichletCharacters:
    """Tables over Z/q, conductors and products."""

    def test_chi_minus_four(self):
        from src.characters import chi_D_character
        chi = chi_D_character(-4)
        assert chi.modulus == 4
        assert chi(1) == 1 and chi(3) == -1 and chi(2) == 0
        assert chi.conductor == 4
        assert chi.is_real() and not chi.is_principal()

    def test_lift(self):
        from src.characters import chi_D_character
        chi = chi_D_character(-4).lift(12)
        assert chi(5) == 1
        assert chi(7) == -1
        assert chi(3) == 0
        assert chi.conductor == 4

    def test_reduce_to_conductor_multiple(self):
        from src.characters import chi_D_character
        from src.errors import PreconditionError
        chi = chi_D_character(-4).lift(24)
        assert chi.reduce_to(8) == chi_D_character(-4).lift(8)
        assert chi.reduce_to(4) == chi_D_character(-4)
        with pytest.raises(PreconditionError, match="cannot reduce"):
            chi.reduce_to(6)

    def test_to_modulus_across_primes(self):
        from src.characters import chi_D_character, principal_character
        chi = chi_D_character(-4).lift(12).to_modulus(20)
        assert chi.modulus == 20
        assert chi(3) == -1 and chi(9) == 1 and chi(5) == 0
        assert principal_character(2).to_modulus(1).modulus == 1

    def test_principal_conductor(self):
        from src.characters import principal_character
        assert principal_character(5).conductor == 1
        assert principal_character(5).is_principal()

    def test_product(self):
        from src.characters import chi_D_character, dirichlet_product
        chi = dirichlet_product(chi_D_character(-4), chi_D_character(-3))
        assert chi.modulus == 12
        assert chi(5) == -1
        assert chi(11) == 1
        assert chi.is_real()

    def test_conjugate(self):
        from src.characters import DirichletCharacter
        chi = DirichletCharacter(5, [None, 0, Fraction(1, 4), Fraction(3, 4), Fraction(1, 2)])
        assert chi.conj().angle(2) == Fraction(3, 4)
        assert not chi.is_real()

    def test_bad_table(self):
        from src.characters import DirichletCharacter
        from src.errors import PreconditionError
        with pytest.raises(PreconditionError):
            DirichletCharacter(4, [None, 0])

    def test_restriction_to_integers(self):
        from src.characters import extensions_of, g_characters, restrict_to_dirichlet
        ext = extensions_of(g_characters(_make_G(-4, 3), 10)[0])[1]
        chi = restrict_to_dirichlet(ext)
        assert chi.modulus == 12
        assert chi(1) == 1
        assert chi(2) == 0


class TestSerialisation:
    """character_to_dict / character_from_dict."""

    def test_dirichlet_round_trip(self):
        from src.characters import character_from_dict, character_to_dict, chi_D_character
        chi = chi_D_character(-8)
        assert character_from_dict(character_to_dict(chi)) == chi

    def test_g_and_extended_round_trip(self):
        from src.characters import character_from_dict, character_to_dict, extensions_of, g_characters
        eta = g_characters(_make_G(-4, 3), 10)[0]
        back = character_from_dict(character_to_dict(eta))
        assert back.angles == eta.angles
        ext = extensions_of(eta)[1]
        back_ext = character_from_dict(character_to_dict(ext))
        assert back_ext.angles == ext.angles

    def test_unknown_type(self):
        from src.characters import character_from_dict
        from src.errors import ParseError
        with pytest.raises(ParseError):
            character_from_dict({"type": "hecke"})
