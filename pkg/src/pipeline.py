"""
HJF — Reduction pipeline
Run manually: python -m src.pipeline <table.jsonl> [--D -4] [--dry-run]

Coefficient table of a degree-2 Hermitian cusp form -> Fourier-Jacobi slice at
a prime index -> Eichler-Zagier images, plain and twisted:

1. Locate a primitive T0 with a(F, T0) != 0 (rescale by the content if needed)
2. Find g in GL_2(O_K) with (g*T0 g)_22 = p an odd prime
3. Extract the index-p Fourier-Jacobi coefficient of F|g
4. Compute ez_map and every twisted_ez_map
5. Report which images are nonzero and their first square-free support index
"""
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from src.characters import build_G, extensions_of, g_characters
from src.config import EXIT_NOT_FOUND, EXIT_PRECONDITION, NUM_THREADS, SHELL_BOUND, get_field_row
from src.cyclotomic import embed_complex, is_zero
from src.elliptic import is_squarefree
from src.errors import HJFError, NotFound, ParseError, PreconditionError, StageError
from src.formats import dumps, encode_value, read_table
from src.hermitian_lattice import (
    CoefficientTable, HermitianForm, content, fj_extract, prime_rep_search, scaled_det,
)
from src.jacobi_coeffs import ez_map, twisted_ez_map
from src.ring_ok import RingElement

BACKENDS = ("exact", "float-report")
INDEX_POLICIES = ("first", "smallest-det")

# Fixed, documented column order of the CSV report: one row per image.
REPORT_COLUMNS = [
    "D", "k", "status", "T0", "content", "prime", "m",
    "map", "eta", "extension", "level", "nonzero", "first_squarefree", "value", "error",
]


@dataclass
class PipelineConfig:
    """Inputs of one pipeline run; either table_path or table must be given."""
    D: int
    table_path: str | None = None
    table: CoefficientTable | None = None
    k: int | None = None
    index_policy: str = "first"
    search_bound: int = SHELL_BOUND
    output_dir: str | None = None
    backend: str = "exact"
    dry_run: bool = False

    def __post_init__(self):
        get_field_row(self.D)
        if self.backend not in BACKENDS:
            raise PreconditionError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.index_policy not in INDEX_POLICIES:
            raise PreconditionError(f"index policy must be one of {INDEX_POLICIES}, got {self.index_policy!r}")
        if self.search_bound < 1:
            raise PreconditionError(f"search bound must be positive, got {self.search_bound}")
        if self.table is None:
            if self.table_path is None:
                raise PreconditionError("no coefficient table given")
            if not Path(self.table_path).exists():
                raise PreconditionError(f"table file not found: {self.table_path}")
        if self.output_dir is not None and not Path(self.output_dir).is_dir():
            raise PreconditionError(f"output directory not found: {self.output_dir}")

    def load_table(self) -> CoefficientTable:
        table = self.table if self.table is not None else read_table(self.table_path, self.k, self.D)
        if table.D != self.D:
            raise PreconditionError(f"table lives over D = {table.D}, config says D = {self.D}")
        return table


# ═════════════════════════════════════════════════════════════════════
# 1. STAGES
# ═════════════════════════════════════════════════════════════════════

def locate_primitive(table: CoefficientTable, policy: str = "first"):
    """(T0, a(T0), content, table) for the chosen nonzero entry.

    A non-primitive choice is divided by its content; the table is re-indexed
    by the same division on every entry the content divides.
    """
    rows = [(T, v) for T, v in table.sorted_items() if not is_zero(v)]
    if not rows:
        raise PreconditionError("input table has no nonzero entry")
    if policy == "smallest-det":
        rows.sort(key=lambda t: scaled_det(t[0]))
    primitive = [(T, v) for T, v in rows if content(T)[1]]
    if primitive:
        T0, value = primitive[0]
        return T0, value, 1, table
    T0, value = rows[0]
    c = content(T0)[0]
    rescaled = {}
    for T, v in table.entries.items():
        if content(T)[0] % c == 0:
            rescaled[_divide(T, c)] = v
    return _divide(T0, c), value, c, CoefficientTable(table.k, table.D, rescaled)


def _divide(T, c: int):
    return HermitianForm(T.n // c, T.m // c, RingElement(T.s.a // c, T.s.b // c, T.s.D))


def first_squarefree(f) -> int | None:
    for n in f.support():
        if is_squarefree(n):
            return n
    return None


def _image_row(kind: str, f, backend: str, eta=None, ext=None) -> dict:
    n = first_squarefree(f)
    value = None
    if n is not None:
        value = str(embed_complex(f.coeffs[n])) if backend == "float-report" else encode_value(f.coeffs[n])
    return {
        "map": kind,
        "eta": None if eta is None else eta.label,
        "extension": None if ext is None else ext.label,
        "level": f.level,
        "nonzero": not f.is_zero(),
        "first_squarefree": n,
        "value": value,
    }


def _twisted_images(system) -> list:
    G = build_G(system.field, system.m)
    pairs = [(eta, ext) for eta in g_characters(G, system.k) for ext in extensions_of(eta)]
    if NUM_THREADS > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=NUM_THREADS) as pool:
            images = list(pool.map(lambda pair: twisted_ez_map(system, pair[1]), pairs))
    else:
        images = [twisted_ez_map(system, ext) for _, ext in pairs]
    return [(eta, ext, f) for (eta, ext), f in zip(pairs, images)]


# ═════════════════════════════════════════════════════════════════════
# 2. ORCHESTRATOR
# ═════════════════════════════════════════════════════════════════════

def run_reduction_pipeline(cfg: PipelineConfig) -> dict:
    """
    Full reduction:
    1. Locate a primitive nonzero coefficient
    2. Prime representation search
    3. Fourier-Jacobi extraction at the prime index
    4. Plain and twisted Eichler-Zagier images
    5. Nonvanishing report
    """
    print("🔄 Reduction pipeline — Starting...")
    result = {"D": cfg.D, "k": None, "status": "failed", "stages": [], "error": None,
              "T0": None, "content": None, "value": None, "g": None, "prime": None,
              "system": None, "images": [], "any_nonzero": False, "case": None}

    # 1. Locate
    print("\n📥 Stage 1: locating a primitive coefficient...")
    try:
        table = cfg.load_table()
        result["k"] = table.k
        T0, value, c, table = locate_primitive(table, cfg.index_policy)
    except (HJFError, ValueError) as e:
        return _fail(result, "locate", e)
    result.update({"T0": str(T0), "content": c, "value": encode_value(value)})
    result["stages"].append("locate")
    if c > 1:
        print(f"   ⚠️ content {c} > 1, rescaled")
    print(f"   T0 = {T0}, a = {value}")

    if cfg.dry_run:
        print("\n🏃 DRY RUN — skipping search and extraction")
        result["status"] = "dry-run"
        return result

    # 2. Prime representation
    print("\n🔍 Stage 2: searching for a prime representation...")
    try:
        g, p = prime_rep_search(T0, cfg.search_bound)
    except NotFound as e:
        print(f"   ⚠️ {e}")
        result["status"] = "not_found"
        result["error"] = f"prime_search: {e}"
        return result
    except HJFError as e:
        return _fail(result, "prime_search", e)
    result.update({"g": str(g), "prime": p})
    result["stages"].append("prime_search")
    print(f"   g = {g}, (g*T0 g)_22 = {p}")

    # 3. Fourier-Jacobi slice
    print(f"\n📐 Stage 3: extracting the index-{p} Fourier-Jacobi coefficient...")
    try:
        system = fj_extract(table.transformed(g), p)
    except HJFError as e:
        return _fail(result, "fj_extract", e)
    result["system"] = {"m": system.m, "disc_bound": system.disc_bound, "classes": len(system.classes)}
    result["stages"].append("fj_extract")
    print(f"   {len(system.classes)} classes up to d = {system.disc_bound}")

    # 4. Images
    print("\n🧮 Stage 4: Eichler-Zagier images...")
    try:
        images = [_image_row("ez", ez_map(system), cfg.backend)]
        for eta, ext, f in _twisted_images(system):
            images.append(_image_row("twisted", f, cfg.backend, eta, ext))
    except HJFError as e:
        return _fail(result, "images", e)
    result["images"] = images
    result["stages"].append("images")
    nonzero = [row for row in images if row["nonzero"]]
    print(f"   ✅ {len(nonzero)} of {len(images)} image(s) nonzero")

    # 5. Report
    result["any_nonzero"] = bool(nonzero)
    result["case"] = "odd D" if cfg.D % 2 else "even D"
    result["stages"].append("report")
    result["status"] = "ok"

    print(f"\n{'='*50}")
    print("📊 Reduction Summary:")
    print(f"   T0 = {result['T0']} (content {c}), prime index {p}, {result['case']}")
    for row in images:
        tag = "ι" if row["map"] == "ez" else f"ι_η̃ (η #{row['eta']}, ext #{row['extension']})"
        mark = "✅" if row["nonzero"] else "·"
        print(f"   {mark} {tag}: first square-free n = {row['first_squarefree']}")

    if cfg.output_dir is not None:
        emit_report([result], "json", Path(cfg.output_dir) / "reduction.json")
        emit_report([result], "csv", Path(cfg.output_dir) / "reduction.csv")
        print(f"\n💾 Report written to {cfg.output_dir}")
    return result


def _fail(result: dict, stage: str, cause: Exception) -> dict:
    error = StageError(stage, cause)
    result["error"] = str(error)
    result["status"] = "failed"
    print(f"   ❌ Stage {stage} FAILED: {cause}")
    return result


# ═════════════════════════════════════════════════════════════════════
# 3. REPORTS
# ═════════════════════════════════════════════════════════════════════

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, dict):
        return dumps(value).strip().replace("\n", "")
    return str(value)


def report_rows(results: list[dict]) -> list[dict]:
    """One row per image (one bare row for runs without images), all cells as text."""
    rows = []
    for res in results:
        base = {
            "D": res.get("D"), "k": res.get("k"), "status": res.get("status"), "T0": res.get("T0"),
            "content": res.get("content"), "prime": res.get("prime"),
            "m": (res.get("system") or {}).get("m"), "error": res.get("error"),
        }
        for image in res.get("images") or [{}]:
            row = {col: None for col in REPORT_COLUMNS}
            row.update(base)
            row.update({key: image.get(key) for key in REPORT_COLUMNS if key in image})
            rows.append({col: _cell(row[col]) for col in REPORT_COLUMNS})
    return rows


def emit_report(results: list[dict], fmt: str, path: str | Path) -> Path:
    """Deterministic report file: JSON document or CSV with REPORT_COLUMNS."""
    path = Path(path)
    if fmt == "json":
        text = dumps({"reports": list(results)})
    elif fmt == "csv":
        text = pd.DataFrame(report_rows(results), columns=REPORT_COLUMNS).to_csv(index=False, lineterminator="\n")
    else:
        raise PreconditionError(f"report format must be json or csv, got {fmt!r}")
    try:
        path.write_text(text)
    except OSError as e:
        raise PreconditionError(f"cannot write report to {path}: {e}") from e
    return path


def read_report(path: str | Path, fmt: str) -> list[dict]:
    """Inverse of emit_report (CSV comes back as report_rows)."""
    path = Path(path)
    if fmt == "json":
        try:
            return json.loads(path.read_text())["reports"]
        except (OSError, KeyError, ValueError) as e:
            raise ParseError(f"bad report {path}: {e}") from e
    if fmt == "csv":
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
        return frame.to_dict(orient="records")
    raise PreconditionError(f"report format must be json or csv, got {fmt!r}")


if __name__ == "__main__":
    args = sys.argv[1:]
    dry = "--dry-run" in args
    D = int(args[args.index("--D") + 1]) if "--D" in args else -4
    paths = [a for a in args if not a.startswith("--") and a != str(D)]
    if not paths:
        print("usage: python -m src.pipeline <table.jsonl> [--D -4] [--dry-run]")
        sys.exit(EXIT_PRECONDITION)
    try:
        outcome = run_reduction_pipeline(PipelineConfig(D=D, table_path=paths[0], dry_run=dry))
    except HJFError as e:
        print(f"\n❌ Reduction FAILED: {e}")
        sys.exit(e.exit_code)
    if outcome.get("error"):
        print(f"⚠️  {outcome['error']}")
        sys.exit(EXIT_NOT_FOUND if outcome["status"] == "not_found" else EXIT_PRECONDITION)
