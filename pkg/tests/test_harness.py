import math

import numpy as np
import orjson
import pytest

from app import VerificationOrchestrator
from core.config import (
    DEFAULT_SAMPLES,
    SuiteConfig,
    get_settings,
    load_suite_config,
    parse_selector,
    substream,
    with_uniform_samples,
)
from core.errors import EXIT_USAGE, UsageError
from core.repository import ConstantsRepository
from core.scoring import ERROR, FAIL, PASS, XFAIL, CheckRecord, Outcome, Report, grade, run_check
from geometry.bryant_salamon import SearchResult, chart_panel, panel_residual
from geometry.errors import ChartDomainError
from main import main
from suites import SUITE_CLASSES
from suites.calculus import G2FormSuite
from suites.calibrated import SpecialLagrangianSuite
from suites.graph import VerificationGraph
from suites.holonomy import BryantSalamonSuite, HomeomorphismSuite
from suites.hypersurfaces import AustereSuite, MunznerSuite
from utils.report_writer import CSV_COLUMNS, emit_report


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    monkeypatch.setenv("VERIFY_OUTPUT_DIR", str(tmp_path / "reports"))
    monkeypatch.setenv("VERIFY_CONSTANTS_PATH", str(tmp_path / "data" / "constants.json"))
    monkeypatch.setenv("VERIFY_MANIFEST_DIR", str(tmp_path / "manifests"))
    get_settings.cache_clear()
    yield tmp_path
    get_settings.cache_clear()


def small_config(suite, **samples):
    return SuiteConfig(suite=suite, seed=11, samples={**{key: 5 for key in DEFAULT_SAMPLES}, **samples})


def record(status):
    return CheckRecord("x", "anchor", status, 0.0, 1.0, 1, 0.1)


def test_substreams_are_deterministic_and_independent():
    first = substream(7, "homeo", "inverse").standard_normal(4)
    np.testing.assert_array_equal(first, substream(7, "homeo", "inverse").standard_normal(4))
    assert not np.array_equal(first, substream(7, "homeo", "stratification").standard_normal(4))
    assert not np.array_equal(first, substream(8, "homeo", "inverse").standard_normal(4))


def test_parse_selector():
    assert parse_selector("g2:k=3,n=7") == ("g2", {"k": 3, "n": 7})
    assert parse_selector("g3") == ("g3", {})
    with pytest.raises(UsageError):
        parse_selector("g2:k")
    with pytest.raises(UsageError):
        parse_selector("g2:k=two")


def test_config_rejects_unknown_keys():
    with pytest.raises(UsageError):
        SuiteConfig(suite="g2", seed=1, tolerances={"g2.nonsense": 1e-3})
    with pytest.raises(UsageError):
        SuiteConfig(suite="g2", seed=1, tolerances={"g2.metric": -1.0})
    with pytest.raises(UsageError):
        SuiteConfig(suite="torus", seed=1)
    with pytest.raises(UsageError):
        SuiteConfig(suite="g2", seed=1, samples={"homeo": 0})


def test_config_file_merges_with_overrides(workspace):
    path = workspace / "run.json"
    path.write_bytes(orjson.dumps({"suite": "munzner", "seed": 3, "tolerances": {"munzner.pde": 1e-8}}))
    config = load_suite_config(path, {"seed": 5, "tolerances": {"g2.metric": 1e-11}})
    assert (config.suite, config.seed) == ("munzner", 5)
    assert config.tolerance("munzner.pde") == 1e-8
    assert config.tolerance("g2.metric") == 1e-11
    assert config.tolerance("slag.phase") == 1e-6


def test_config_file_errors(workspace):
    with pytest.raises(UsageError):
        load_suite_config(workspace / "missing.json")
    broken = workspace / "broken.json"
    broken.write_text("{suite:", encoding="utf-8")
    with pytest.raises(UsageError):
        load_suite_config(broken)
    extra = workspace / "extra.json"
    extra.write_bytes(orjson.dumps({"suite": "g2", "colour": "red"}))
    with pytest.raises(UsageError):
        load_suite_config(extra)


def test_uniform_samples_cover_every_key():
    config = with_uniform_samples(SuiteConfig(suite="ad", seed=0), 3)
    assert all(config.sample_count(key) == 3 for key in DEFAULT_SAMPLES)


def test_grading():
    assert grade(1e-9, 1e-6) == PASS
    assert grade(1e-3, 1e-6) == FAIL
    assert grade(math.nan, 1e-6) == FAIL
    assert grade(0.2, 1e-3, expected_fail=True) == XFAIL
    assert grade(1e-9, 1e-3, expected_fail=True) == FAIL
    assert grade(math.nan, 1e-3, expected_fail=True) == FAIL


def test_geometry_errors_become_error_records():
    def body():
        raise ChartDomainError("outside the chart")

    result = run_check("homeo.inverse", "anchor", 1e-12, body)
    assert result.status == ERROR
    assert math.isnan(result.residual)
    assert "ChartDomainError" in result.detail["error"]


def test_run_check_records_the_outcome():
    result = run_check("g2.volume", "anchor", 1e-12, lambda: Outcome(0.0, 3, {"k": 1}))
    assert (result.status, result.samples, result.detail) == (PASS, 3, {"k": 1})
    assert result.ms >= 0.0


@pytest.mark.parametrize(
    "statuses,code",
    [([PASS, XFAIL], 0), ([PASS, FAIL, XFAIL], 1), ([FAIL, ERROR], 2), ([], 0)],
)
def test_exit_code_is_the_worst_status(statuses, code):
    assert Report(config={}, records=[record(s) for s in statuses]).exit_code == code


def test_summary_counts():
    summary = Report(config={}, records=[record(PASS), record(PASS), record(XFAIL)]).summary
    assert summary == {PASS: 2, XFAIL: 1, FAIL: 0, ERROR: 0, "total": 3}


def test_json_report(tmp_path):
    report = Report(config={"suite": "g2"}, records=[record(PASS)])
    path = tmp_path / "out" / "report.json"
    document = orjson.loads(emit_report(report, "json", path))
    assert path.exists()
    assert document["version"] == "1.0"
    assert document["summary"]["total"] == 1
    assert document["records"][0]["check_id"] == "x"


def test_csv_report_columns():
    report = Report(config={}, records=[record(PASS), record(FAIL)])
    lines = emit_report(report, "csv").decode("utf-8").splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3
    untimed = emit_report(report, "csv", include_timing=False).decode("utf-8").splitlines()
    assert untimed[0] == ",".join(c for c in CSV_COLUMNS if c != "ms")


def test_constants_repository(tmp_path):
    repository = ConstantsRepository(tmp_path / "constants.json")
    assert repository.find("spin") is None
    repository.insert({"spec_id": "spin", "panel_seed": 1, "residual": 1e-3})
    repository.insert({"spec_id": "spin", "panel_seed": 1, "residual": 1e-8})
    repository.insert({"spec_id": "spin", "panel_seed": 2, "residual": 1e-7})
    assert repository.find("spin", 1)["residual"] == 1e-8
    assert repository.find("spin")["panel_seed"] == 2
    assert len(repository.list_recent()) == 2


def test_unreadable_constants_start_empty(tmp_path):
    path = tmp_path / "constants.json"
    path.write_text("not json", encoding="utf-8")
    assert ConstantsRepository(path).find("spin") is None


def test_every_suite_is_registered():
    assert set(SUITE_CLASSES) == {"ad", "g2", "munzner", "isoparametric", "austere", "bs-ricci", "homeo", "slag", "gauss"}


def test_g2_suite_passes():
    records = G2FormSuite().run(small_config("g2"))
    assert [r.status for r in records] == [PASS] * 4


def test_homeomorphism_suite_passes():
    records = HomeomorphismSuite().run(small_config("homeo", homeo=50, **{"homeo.pairs": 200}))
    assert {r.check_id: r.status for r in records} == {
        "homeo.stratification": PASS,
        "homeo.level_roundtrip": PASS,
        "homeo.inverse": PASS,
        "homeo.injective": PASS,
        "homeo.orbit_levels": PASS,
    }


def test_same_seed_reproduces_the_report():
    config = small_config("munzner", munzner=10)
    first = Report(config=config.as_dict(), records=MunznerSuite().run(config))
    second = Report(config=config.as_dict(), records=MunznerSuite().run(config))
    assert first.as_dict(include_timing=False) == second.as_dict(include_timing=False)


@pytest.fixture
def analytic_search(monkeypatch):
    calls = []

    def search(spec, panel_seed=0, panel_size=20, **kwargs):
        calls.append((spec.spec_id, panel_size))
        residual = panel_residual(spec, spec.constants, chart_panel(spec, panel_size, panel_seed))
        return SearchResult(spec.spec_id, spec.constants, residual, True, panel_seed, 0, 0, panel_size)

    monkeypatch.setattr("suites.holonomy.normalization_search", search)
    return calls


def run_bryant_salamon(panel):
    config = SuiteConfig(
        suite="bs-ricci", seed=4, samples={"bs.panel": panel, "bs.offpanel": 3}, negative_controls=False
    )
    return Report(config=config.as_dict(), records=BryantSalamonSuite().run(config))


def test_bryant_salamon_report_is_the_same_with_stored_constants(workspace, analytic_search):
    first = run_bryant_salamon(3)
    assert len(analytic_search) == 3
    assert len(ConstantsRepository().list_recent()) == 3
    second = run_bryant_salamon(3)
    assert len(analytic_search) == 3
    assert first.as_dict(include_timing=False) == second.as_dict(include_timing=False)


def test_stored_constants_from_another_panel_size_are_refitted(workspace, analytic_search):
    run_bryant_salamon(3)
    run_bryant_salamon(2)
    assert [size for _, size in analytic_search] == [3, 3, 3, 2, 2, 2]
    assert {record["panel_size"] for record in ConstantsRepository().list_recent()} == {2}


def test_focal_defaults_sample_enough_points_and_directions():
    assert DEFAULT_SAMPLES["focal"] >= 10
    assert DEFAULT_SAMPLES["focal.directions"] >= 10


def test_focal_spectra_use_every_normal_direction():
    config = SuiteConfig(
        suite="austere", seed=3, families=("g3",), samples={"focal": 2, "focal.directions": 3}, negative_controls=False
    )
    records = AustereSuite().run(config)
    spectra = [r for r in records if r.check_id.endswith(".spectrum")]
    assert len(spectra) == 2
    assert all(r.samples == 6 for r in spectra)


def test_graph_runs_suites_in_order():
    state = VerificationGraph([G2FormSuite(), HomeomorphismSuite()]).run(small_config("all"))
    assert state["completed"] == ["g2", "homeo"]
    assert [r.check_id.split(".")[0] for r in state["records"]] == ["g2"] * 4 + ["homeo"] * 5


def test_graph_needs_a_suite():
    with pytest.raises(ValueError):
        VerificationGraph([])


@pytest.mark.slow
def test_slag_suite_has_exactly_one_expected_failure(workspace):
    records = SpecialLagrangianSuite().run(small_config("slag"))
    report = Report(config={}, records=records)
    assert report.summary[XFAIL] == 1
    assert report.summary[FAIL] == report.summary[ERROR] == 0
    assert report.exit_code == 0


def test_negative_controls_can_be_switched_off(workspace, monkeypatch):
    monkeypatch.setattr("suites.calibrated.CERTIFIED_CHARTS", [("equator", {"n": 4})])
    config = SuiteConfig(suite="slag", seed=2, negative_controls=False)
    records = SpecialLagrangianSuite().run(config)
    assert [r.status for r in records] == [PASS] * 3


def test_orchestrator_writes_the_report(workspace):
    config = small_config("g2")
    orchestrator = VerificationOrchestrator()
    path = orchestrator.write_report(orchestrator.run_suite(config), config)
    assert path == workspace / "reports" / "g2-11.json"
    assert orjson.loads(path.read_bytes())["summary"][PASS] == 4


def test_cli_usage_errors(workspace, capsys):
    assert main(["torus"]) == EXIT_USAGE
    assert main(["g2", "--tol", "g2.metric"]) == EXIT_USAGE
    assert main(["g2", "--tol", "nonsense=1e-3"]) == EXIT_USAGE
    assert main(["g2", "--samples", "0"]) == EXIT_USAGE
    assert "verify:" in capsys.readouterr().err


def test_cli_runs_a_suite(workspace, capsys):
    out = workspace / "g2.csv"
    assert main(["g2", "--samples", "3", "--format", "csv", "--out", str(out)]) == 0
    assert out.read_text(encoding="utf-8").splitlines()[0] == ",".join(CSV_COLUMNS)
    assert "4 pass" in capsys.readouterr().out
