"""
HJF — File formats

Coefficient values are exact: rationals as "p/q" strings, cyclotomic values
as {"order": n, "coeffs": [...]} in the canonical power basis.

    system      JSON  {"D", "k", "m", "disc_bound", "entries": [{"d", "s", "value"}]}
    table       JSON lines, optional header {"D", "k"}, then {"n", "m", "s", "value"}
    q-expansion CSV "n,value" plus a sidecar JSON {"k", "N", "character", "precision"}
"""
import json
from fractions import Fraction
from pathlib import Path

import pandas as pd

from src.characters import character_from_dict, character_to_dict
from src.cyclotomic import CyclotomicNumber, simplify
from src.elliptic import QExpansion
from src.errors import ParseError
from src.hermitian_lattice import CoefficientTable, HermitianForm
from src.jacobi_coeffs import JacobiCoefficientSystem
from src.ring_ok import parse_element


# ═════════════════════════════════════════════════════════════════════
# 1. VALUES
# ═════════════════════════════════════════════════════════════════════

def encode_value(value):
    value = simplify(value)
    if isinstance(value, CyclotomicNumber):
        return {"order": value.order, "coeffs": [str(Fraction(c)) for c in value.coeffs]}
    return str(value)


def decode_value(raw):
    """Inverse of encode_value; ints and numeric strings are accepted too."""
    if isinstance(raw, float):
        raise ParseError(f"inexact coefficient {raw!r}; write it as 'p/q'")
    try:
        if isinstance(raw, dict):
            coeffs = [Fraction(c) for c in raw["coeffs"]]
            return simplify(CyclotomicNumber(int(raw["order"]), coeffs))
        if isinstance(raw, str) and raw.lstrip().startswith("{"):
            return decode_value(json.loads(raw))
        return Fraction(raw)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise ParseError(f"bad coefficient value {raw!r}") from e


def _load_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as e:
        raise ParseError(f"no such file: {path}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON ({e})") from e


def dumps(data) -> str:
    """Deterministic JSON text used by every writer."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


# ═════════════════════════════════════════════════════════════════════
# 2. COEFFICIENT SYSTEMS
# ═════════════════════════════════════════════════════════════════════

def system_to_dict(sys: JacobiCoefficientSystem) -> dict:
    return {
        "D": sys.field.D, "k": sys.k, "m": sys.m, "disc_bound": sys.disc_bound,
        "entries": [{"d": d, "s": str(rep), "value": encode_value(v)} for d, rep, v in sys.items()],
    }


def system_from_dict(data: dict) -> JacobiCoefficientSystem:
    try:
        D, k, m, B = (int(data[key]) for key in ("D", "k", "m", "disc_bound"))
        rows = data.get("entries", [])
        entries = [(int(row["d"]), parse_element(row["s"]), decode_value(row["value"])) for row in rows]
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"bad system document: {e}") from e
    for _, s, _ in entries:
        if s.D != D:
            raise ParseError(f"element {s} does not live over D = {D}")
    return JacobiCoefficientSystem(D, k, m, B, entries)


def write_system(sys: JacobiCoefficientSystem, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dumps(system_to_dict(sys)))
    return path


def read_system(path: str | Path) -> JacobiCoefficientSystem:
    return system_from_dict(_load_json(path))


# ═════════════════════════════════════════════════════════════════════
# 3. COEFFICIENT TABLES
# ═════════════════════════════════════════════════════════════════════

def parse_form(text: str) -> HermitianForm:
    """"n,m,a+b*w@D" -> HermitianForm."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ParseError(f"bad form literal {text!r}; expected 'n,m,a+b*w@D'")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError as e:
        raise ParseError(f"bad form literal {text!r}") from e
    return HermitianForm(n, m, parse_element(parts[2]))


def table_to_lines(table: CoefficientTable) -> str:
    lines = [json.dumps({"D": table.D, "k": table.k}, sort_keys=True)]
    for T, value in table.sorted_items():
        lines.append(json.dumps({"n": T.n, "m": T.m, "s": str(T.s), "value": encode_value(value)},
                                sort_keys=True))
    return "\n".join(lines) + "\n"


def table_from_lines(text: str, k: int | None = None, D: int | None = None) -> CoefficientTable:
    """Header values are overridden by explicit k / D."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"line {lineno}: invalid JSON ({e})") from e
        if "n" not in row:
            k = row.get("k", k) if k is None else k
            D = row.get("D", D) if D is None else D
            continue
        rows.append((lineno, row))
    if k is None:
        raise ParseError("table weight unknown: no header line and no k given")
    entries = {}
    for lineno, row in rows:
        try:
            T = HermitianForm(int(row["n"]), int(row["m"]), parse_element(row["s"]))
            value = decode_value(row["value"])
        except ParseError as e:
            raise ParseError(f"line {lineno}: {e}") from e
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"line {lineno}: bad table row ({e})") from e
        if D is None:
            D = T.D
        if T.D != D:
            raise ParseError(f"line {lineno}: element {T.s} does not live over D = {D}")
        entries[T] = value
    if D is None:
        raise ParseError("table is empty and names no discriminant")
    return CoefficientTable(int(k), int(D), entries)


def write_table(table: CoefficientTable, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(table_to_lines(table))
    return path


def read_table(path: str | Path, k: int | None = None, D: int | None = None) -> CoefficientTable:
    try:
        text = Path(path).read_text()
    except FileNotFoundError as e:
        raise ParseError(f"no such file: {path}") from e
    return table_from_lines(text, k, D)


# ═════════════════════════════════════════════════════════════════════
# 4. Q-EXPANSIONS
# ═════════════════════════════════════════════════════════════════════

def sidecar_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".json")


def qexpansion_meta(f: QExpansion) -> dict:
    return {
        "k": str(f.weight),
        "N": f.level,
        "character": None if f.character is None else character_to_dict(f.character),
        "precision": f.precision,
    }


def write_qexpansion(f: QExpansion, path: str | Path) -> Path:
    path = Path(path)
    frame = pd.DataFrame({
        "n": range(f.precision + 1),
        "value": [json.dumps(v, sort_keys=True) if isinstance(v, dict) else v
                  for v in (encode_value(c) for c in f.coeffs)],
    })
    frame.to_csv(path, index=False)
    sidecar_path(path).write_text(dumps(qexpansion_meta(f)))
    return path


def read_qexpansion(path: str | Path) -> QExpansion:
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str)
    except FileNotFoundError as e:
        raise ParseError(f"no such file: {path}") from e
    if list(frame.columns) != ["n", "value"]:
        raise ParseError(f"{path}: expected columns n,value, got {','.join(frame.columns)}")
    indices = [int(n) for n in frame["n"]]
    if indices != list(range(len(indices))):
        raise ParseError(f"{path}: indices must run 0, 1, 2, ... without gaps")
    coeffs = [_as_int(decode_value(v)) for v in frame["value"]]

    meta_file = sidecar_path(path)
    meta = _load_json(meta_file) if meta_file.exists() else {}
    weight = Fraction(meta.get("k", "0"))
    weight = weight.numerator if weight.denominator == 1 else weight
    chi = meta.get("character")
    return QExpansion(weight, int(meta.get("N", 1)),
                      None if chi is None else character_from_dict(chi), coeffs or [0])


def _as_int(value):
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value
