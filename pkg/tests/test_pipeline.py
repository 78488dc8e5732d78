"""
Tests for the reduction pipeline and its reports.
Run: pytest tests/ -v
"""
from fractions import Fraction

import pytest


def _form(n, m, a, b, D=-4):
    from src.hermitian_lattice import HermitianForm
    from src.ring_ok import RingElement
    return HermitianForm(n, m, RingElement(a, b, D))


def _make_config(table, **kwargs):
    from src.pipeline import PipelineConfig
    return PipelineConfig(D=table.D, table=table, **kwargs)


def _make_content_two_table():
    """No primitive nonzero entry; the first one has content 2."""
    from src.hermitian_lattice import CoefficientTable
    return CoefficientTable(10, -4, {
        _form(2, 2, 2, 0): Fraction(5),
        _form(4, 2, 0, 2): Fraction(3),
        _form(3, 3, 3, 0): Fraction(2),
    })


# ═══════════════════════════════════════════════════════════════════════
# CONFIG
# ═══════════════════════════════════════════════════════════════════════

class TestPipelineConfig:
    """Validation up front."""

    def test_needs_a_table(self):
        from src.errors import PreconditionError
        from src.pipeline import PipelineConfig
        with pytest.raises(PreconditionError, match="no coefficient table"):
            PipelineConfig(D=-4)

    def test_missing_table_file(self, tmp_path):
        from src.errors import PreconditionError
        from src.pipeline import PipelineConfig
        with pytest.raises(PreconditionError, match="not found"):
            PipelineConfig(D=-4, table_path=str(tmp_path / "missing.jsonl"))

    def test_bad_options(self):
        from src.errors import PreconditionError
        table = _make_content_two_table()
        with pytest.raises(PreconditionError, match="backend"):
            _make_config(table, backend="gpu")
        with pytest.raises(PreconditionError, match="index policy"):
            _make_config(table, index_policy="random")
        with pytest.raises(PreconditionError, match="search bound"):
            _make_config(table, search_bound=0)

    def test_unsupported_field(self):
        from src.errors import PreconditionError
        from src.hermitian_lattice import CoefficientTable
        from src.pipeline import PipelineConfig
        with pytest.raises(PreconditionError):
            PipelineConfig(D=-5, table=CoefficientTable(10, -4))


# ═══════════════════════════════════════════════════════════════════════
# STAGE 1
# ═══════════════════════════════════════════════════════════════════════

class TestLocatePrimitive:
    """Choice of T0 and content rescaling."""

    def test_first_policy(self):
        from src.hermitian_lattice import CoefficientTable
        from src.pipeline import locate_primitive
        table = CoefficientTable(10, -4, {_form(5, 1, 1, 0): 1, _form(1, 2, 1, 0): 2, _form(1, 1, 1, 0): 0})
        T0, value, c, same = locate_primitive(table, "first")
        assert (T0, value, c) == (_form(5, 1, 1, 0), 1, 1)
        assert same is table

    def test_smallest_det_policy(self):
        from src.hermitian_lattice import CoefficientTable
        from src.pipeline import locate_primitive
        table = CoefficientTable(10, -4, {_form(5, 1, 1, 0): 1, _form(1, 2, 1, 0): 2})
        T0, value, _, _ = locate_primitive(table, "smallest-det")
        assert (T0, value) == (_form(1, 2, 1, 0), 2)

    def test_content_rescaling(self):
        from src.pipeline import locate_primitive
        T0, value, c, table = locate_primitive(_make_content_two_table())
        assert T0 == _form(1, 1, 1, 0)
        assert value == 5
        assert c == 2
        assert table.entries == {_form(1, 1, 1, 0): 5, _form(2, 1, 0, 1): 3}

    def test_empty_table(self):
        from src.errors import PreconditionError
        from src.hermitian_lattice import CoefficientTable
        from src.pipeline import locate_primitive
        with pytest.raises(PreconditionError, match="no nonzero entry"):
            locate_primitive(CoefficientTable(10, -4, {_form(1, 1, 1, 0): 0}))


# ═══════════════════════════════════════════════════════════════════════
# FULL RUNS
# ═══════════════════════════════════════════════════════════════════════

class TestRunReductionPipeline:
    """End-to-end runs on in-memory tables."""

    def test_index_three_table(self, gaussian_index3_system):
        from src.hermitian_lattice import Matrix2, table_from_system
        from src.pipeline import run_reduction_pipeline
        result = run_reduction_pipeline(_make_config(table_from_system(gaussian_index3_system)))
        assert result["status"] == "ok"
        assert result["stages"] == ["locate", "prime_search", "fj_extract", "images", "report"]
        assert result["prime"] == 3
        assert result["g"] == str(Matrix2.identity(-4))
        assert result["system"]["classes"] == len(gaussian_index3_system.classes)
        assert len(result["images"]) == 5
        assert result["images"][0]["map"] == "ez"
        assert result["case"] == "even D"
        assert result["any_nonzero"] == any(row["nonzero"] for row in result["images"])

    def test_synthetic_prime_index_tables(self):
        from src.hermitian_lattice import CoefficientTable, Matrix2, gl2_conjugate, table_from_system
        from src.jacobi_coeffs import random_admissible
        from src.pipeline import run_reduction_pipeline
        from src.ring_ok import RingElement
        swap = Matrix2.swap(RingElement(0, 0, -4))
        moved = 0
        for j in range(20):
            p = (3, 5)[j % 2]
            table = table_from_system(random_admissible(-4, 10, p, 48, seed=40 + j))
            if j % 4 >= 2:
                # (n, m, s) -> (m, n, conj s): the bottom-right entry is no longer p
                table = CoefficientTable(10, -4, {gl2_conjugate(swap, T): v for T, v in table.entries.items()})
            result = run_reduction_pipeline(_make_config(table))
            assert result["status"] == "ok", result["error"]
            if result["g"] != str(Matrix2.identity(-4)):
                moved += 1
            if result["system"]["classes"]:
                assert result["any_nonzero"], (j, p)
        assert moved >= 1

    def test_content_rescaled_run(self):
        from src.pipeline import run_reduction_pipeline
        result = run_reduction_pipeline(_make_config(_make_content_two_table()))
        assert result["status"] == "ok"
        assert result["content"] == 2
        assert result["T0"] == str(_form(1, 1, 1, 0))
        assert result["prime"] == 3
        assert result["system"]["classes"] == 2

    def test_dry_run_stops_after_locate(self):
        from src.pipeline import run_reduction_pipeline
        result = run_reduction_pipeline(_make_config(_make_content_two_table(), dry_run=True))
        assert result["status"] == "dry-run"
        assert result["stages"] == ["locate"]
        assert result["prime"] is None

    def test_empty_table_fails_in_stage_one(self, capsys):
        from src.hermitian_lattice import CoefficientTable
        from src.pipeline import run_reduction_pipeline
        result = run_reduction_pipeline(_make_config(CoefficientTable(10, -4)))
        assert result["status"] == "failed"
        assert result["error"].startswith("locate:")
        assert "FAILED" in capsys.readouterr().out

    def test_wrong_field_fails_in_stage_one(self):
        from src.hermitian_lattice import CoefficientTable
        from src.pipeline import PipelineConfig, run_reduction_pipeline
        cfg = PipelineConfig(D=-3, table=CoefficientTable(10, -4, {_form(1, 1, 1, 0): 1}))
        result = run_reduction_pipeline(cfg)
        assert result["status"] == "failed"
        assert "D = -4" in result["error"]

    def test_prime_search_not_found(self):
        from src.hermitian_lattice import CoefficientTable
        from src.pipeline import run_reduction_pipeline
        table = CoefficientTable(10, -4, {_form(26, 25, 0, 0): 1})
        result = run_reduction_pipeline(_make_config(table, search_bound=1))
        assert result["status"] == "not_found"
        assert result["error"].startswith("prime_search:")
        assert result["stages"] == ["locate"]

    def test_float_backend(self, gaussian_index3_system):
        from src.hermitian_lattice import table_from_system
        from src.pipeline import run_reduction_pipeline
        result = run_reduction_pipeline(_make_config(table_from_system(gaussian_index3_system),
                                                     backend="float-report"))
        for row in result["images"]:
            if row["value"] is not None:
                complex(row["value"])

    def test_output_dir(self, tmp_path, gaussian_index3_system):
        from src.hermitian_lattice import table_from_system
        from src.pipeline import run_reduction_pipeline
        run_reduction_pipeline(_make_config(table_from_system(gaussian_index3_system),
                                            output_dir=str(tmp_path)))
        assert (tmp_path / "reduction.json").exists()
        assert (tmp_path / "reduction.csv").exists()


# ═══════════════════════════════════════════════════════════════════════
# REPORTS
# ═══════════════════════════════════════════════════════════════════════

class TestReports:
    """Deterministic JSON / CSV emission."""

    def _result(self):
        from src.pipeline import run_reduction_pipeline
        return run_reduction_pipeline(_make_config(_make_content_two_table()))

    def test_json_is_deterministic(self, tmp_path):
        from src.pipeline import emit_report, read_report
        result = self._result()
        a = emit_report([result], "json", tmp_path / "a.json").read_bytes()
        b = emit_report([self._result()], "json", tmp_path / "b.json").read_bytes()
        assert a == b
        assert read_report(tmp_path / "a.json", "json")[0]["status"] == "ok"

    def test_csv_columns_and_rows(self, tmp_path):
        from src.pipeline import REPORT_COLUMNS, emit_report, read_report
        result = self._result()
        path = emit_report([result], "csv", tmp_path / "r.csv")
        rows = read_report(path, "csv")
        assert path.read_text().splitlines()[0] == ",".join(REPORT_COLUMNS)
        assert len(rows) == len(result["images"])
        assert all(row["status"] == "ok" and row["content"] == "2" for row in rows)

    def test_failed_run_has_a_bare_row(self):
        from src.hermitian_lattice import CoefficientTable
        from src.pipeline import REPORT_COLUMNS, report_rows, run_reduction_pipeline
        result = run_reduction_pipeline(_make_config(CoefficientTable(10, -4)))
        rows = report_rows([result])
        assert len(rows) == 1
        assert list(rows[0]) == REPORT_COLUMNS
        assert rows[0]["status"] == "failed"
        assert rows[0]["map"] == ""

    def test_bad_format(self, tmp_path):
        from src.errors import PreconditionError
        from src.pipeline import emit_report
        with pytest.raises(PreconditionError, match="report format"):
            emit_report([], "xml", tmp_path / "r.xml")

    def test_unwritable_path(self, tmp_path):
        from src.errors import PreconditionError
        from src.pipeline import emit_report
        with pytest.raises(PreconditionError, match="cannot write"):
            emit_report([], "json", tmp_path / "missing" / "r.json")
