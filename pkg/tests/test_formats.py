"""
Tests for coefficient, system, table and q-expansion file formats.
Run: pytest tests/ -v
"""
import json
from fractions import Fraction

import pytest


# ═══════════════════════════════════════════════════════════════════════
# VALUES
# ═══════════════════════════════════════════════════════════════════════

class TestValues:
    """Exact coefficient encoding."""

    def test_rationals(self):
        from src.formats import decode_value, encode_value
        assert encode_value(Fraction(3, 4)) == "3/4"
        assert encode_value(5) == "5"
        assert decode_value("3/4") == Fraction(3, 4)
        assert decode_value(-2) == -2

    def test_cyclotomic(self):
        from src.cyclotomic import zeta_pow
        from src.formats import decode_value, encode_value
        z = zeta_pow(1, 3) * Fraction(1, 2)
        encoded = encode_value(z)
        assert encoded == {"order": 3, "coeffs": ["0", "1/2"]}
        assert decode_value(encoded) == z
        assert decode_value(json.dumps(encoded)) == z

    def test_rational_cyclotomic_collapses(self):
        from src.cyclotomic import zeta_pow
        from src.formats import encode_value
        assert encode_value(zeta_pow(2, 4)) == "-1"

    def test_floats_rejected(self):
        from src.errors import ParseError
        from src.formats import decode_value
        with pytest.raises(ParseError, match="inexact"):
            decode_value(0.5)

    def test_garbage_rejected(self):
        from src.errors import ParseError
        from src.formats import decode_value
        for raw in ("abc", "1/0", {"order": 3}, [1, 2]):
            with pytest.raises(ParseError):
                decode_value(raw)


# ═══════════════════════════════════════════════════════════════════════
# SYSTEMS AND TABLES
# ═══════════════════════════════════════════════════════════════════════

class TestSystems:
    """JSON coefficient systems."""

    def test_file_round_trip(self, tmp_path, gaussian_index3_system):
        from src.formats import read_system, write_system
        path = write_system(gaussian_index3_system, tmp_path / "sys.json")
        assert read_system(path) == gaussian_index3_system

    def test_output_is_deterministic(self, tmp_path, gaussian_index3_system):
        from src.formats import write_system
        a = write_system(gaussian_index3_system, tmp_path / "a.json").read_text()
        b = write_system(gaussian_index3_system, tmp_path / "b.json").read_text()
        assert a == b

    def test_field_mismatch(self):
        from src.errors import ParseError
        from src.formats import system_from_dict
        doc = {"D": -4, "k": 8, "m": 1, "disc_bound": 12,
               "entries": [{"d": 3, "s": "1+0*w@-3", "value": "7"}]}
        with pytest.raises(ParseError, match="does not live over"):
            system_from_dict(doc)

    def test_missing_key(self):
        from src.errors import ParseError
        from src.formats import system_from_dict
        with pytest.raises(ParseError, match="bad system document"):
            system_from_dict({"D": -4, "k": 8})

    def test_missing_file(self, tmp_path):
        from src.errors import ParseError
        from src.formats import read_system
        with pytest.raises(ParseError, match="no such file"):
            read_system(tmp_path / "nope.json")


class TestTables:
    """JSON-lines coefficient tables."""

    def _make_table(self):
        from src.hermitian_lattice import CoefficientTable, HermitianForm
        from src.ring_ok import RingElement
        return CoefficientTable(10, -4, {
            HermitianForm(1, 1, RingElement(1, 0, -4)): Fraction(7),
            HermitianForm(2, 3, RingElement(1, 1, -4)): Fraction(-3, 2),
        })

    def test_parse_form(self):
        from src.formats import parse_form
        from src.hermitian_lattice import HermitianForm
        from src.ring_ok import RingElement
        assert parse_form("2, 3, 1+1*w@-4") == HermitianForm(2, 3, RingElement(1, 1, -4))

    def test_bad_form(self):
        from src.errors import ParseError
        from src.formats import parse_form
        with pytest.raises(ParseError):
            parse_form("2,3")
        with pytest.raises(ParseError):
            parse_form("x,3,1+0*w@-4")

    def test_lines_round_trip(self):
        from src.formats import table_from_lines, table_to_lines
        table = self._make_table()
        text = table_to_lines(table)
        assert json.loads(text.splitlines()[0]) == {"D": -4, "k": 10}
        assert table_from_lines(text) == table

    def test_explicit_weight_overrides_header(self):
        from src.formats import table_from_lines, table_to_lines
        assert table_from_lines(table_to_lines(self._make_table()), k=12).k == 12

    def test_headerless_table(self):
        from src.errors import ParseError
        from src.formats import table_from_lines
        line = '{"m": 1, "n": 1, "s": "1+0*w@-4", "value": "7"}\n'
        with pytest.raises(ParseError, match="weight unknown"):
            table_from_lines(line)
        table = table_from_lines(line, k=8)
        assert table.D == -4 and len(table) == 1

    def test_empty_table_needs_discriminant(self):
        from src.errors import ParseError
        from src.formats import table_from_lines
        with pytest.raises(ParseError, match="empty"):
            table_from_lines("", k=8)
        assert len(table_from_lines("", k=8, D=-3)) == 0

    def test_bad_rows_report_line(self):
        from src.errors import ParseError
        from src.formats import table_from_lines
        with pytest.raises(ParseError, match="line 2"):
            table_from_lines('{"D": -4, "k": 8}\n{"n": 1, "m": 1}\n')
        with pytest.raises(ParseError, match="line 2"):
            table_from_lines('{"D": -4, "k": 8}\n{"n": 1, "m": 1, "s": "1+0*w@-3", "value": "1"}\n')
        with pytest.raises(ParseError, match="line 1"):
            table_from_lines("not json\n", k=8)

    def test_file_round_trip(self, tmp_path):
        from src.formats import read_table, write_table
        table = self._make_table()
        assert read_table(write_table(table, tmp_path / "t.jsonl")) == table


# ═══════════════════════════════════════════════════════════════════════
# Q-EXPANSIONS
# ═══════════════════════════════════════════════════════════════════════

class TestQExpansions:
    """CSV plus sidecar JSON."""

    def test_integer_round_trip(self, tmp_path):
        from src.elliptic import delta
        from src.formats import read_qexpansion, sidecar_path, write_qexpansion
        f = delta(50)
        path = write_qexpansion(f, tmp_path / "delta.csv")
        assert sidecar_path(path).exists()
        assert read_qexpansion(path) == f

    def test_cyclotomic_round_trip(self, tmp_path, gaussian_index3_system):
        from src.formats import read_qexpansion, write_qexpansion
        from src.jacobi_coeffs import all_twisted_maps
        _, _, f = all_twisted_maps(gaussian_index3_system)[0]
        back = read_qexpansion(write_qexpansion(f, tmp_path / "twist.csv"))
        assert back.weight == f.weight
        assert back.level == f.level
        assert back.character == f.character
        assert back.coeffs == f.coeffs

    def test_half_integral_weight_metadata(self, tmp_path):
        from src.elliptic import QExpansion
        from src.formats import read_qexpansion, write_qexpansion
        f = QExpansion(Fraction(3, 2), 4, None, [0, 1, 0, 0, 2])
        back = read_qexpansion(write_qexpansion(f, tmp_path / "half.csv"))
        assert back.weight == Fraction(3, 2)
        assert back.character is None

    def test_bad_columns(self, tmp_path):
        from src.errors import ParseError
        from src.formats import read_qexpansion
        path = tmp_path / "bad.csv"
        path.write_text("index,coeff\n0,0\n")
        with pytest.raises(ParseError, match="expected columns"):
            read_qexpansion(path)

    def test_gap_in_indices(self, tmp_path):
        from src.errors import ParseError
        from src.formats import read_qexpansion
        path = tmp_path / "gap.csv"
        path.write_text("n,value\n0,0\n2,5\n")
        with pytest.raises(ParseError, match="without gaps"):
            read_qexpansion(path)
