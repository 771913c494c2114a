"""Suite runner: job construction, determinism, error capture, emitters."""

import csv
import io
import json

import pytest

from bksverify import config, suite
from bksverify import pairing as pairing_mod

FAST_TORUS = dict(
    group="torus",
    torus_rank=1,
    band_limit=158.0,  # k <= 2
    s_grid=(0.5, 1.0),
    s_prime_grid=(0.0, 1.0),
    pairs_per_cell=1,
    identities=("wedge", "pairing", "bks-factor", "factorization", "continuity"),
)


def fast_cfg(**kw):
    merged = dict(FAST_TORUS)
    merged.update(kw)
    return config.default_config(**merged)


def test_build_jobs_keys_and_selection():
    cfg = fast_cfg()
    keys = [job.key for job in suite.build_jobs(cfg)]
    assert "wedge/torus" in keys
    assert "pairing/torus/random/s=0.5:sp=1" in keys
    assert "bks-factor/torus/(2,)/s=1:sp=1" in keys
    assert "factorization/torus/(0,)" in keys
    assert not any(k.startswith("delta") for k in keys)
    # prequantum has no torus job: phi is constant there
    cfg2 = fast_cfg(identities=("prequantum",))
    assert suite.build_jobs(cfg2) == []


def test_default_band_limit_values():
    from bksverify import groups
    assert suite.default_band_limit(groups.group_spec("torus", n=1)) == pytest.approx(
        25 * 4 * 3.14159265358979 ** 2, rel=1e-9)
    assert suite.default_band_limit(groups.group_spec("su2")) == pytest.approx(
        groups.casimir(groups.group_spec("su2"), (4,)), rel=1e-9)


def test_run_suite_passes_and_summary_counts():
    rep = suite.run_suite(fast_cfg())
    assert rep.summary["total"] == len(rep.reports) > 0
    assert rep.summary["failed"] == 0 and rep.summary["errors"] == 0
    assert rep.summary["passed"] == rep.summary["total"]
    assert all(r.passed for _, r in rep.reports)
    keys = [k for k, _ in rep.reports]
    assert keys == sorted(keys)
    assert rep.wall_clock > 0.0


def test_render_json_reproducible_across_runs_and_threads(monkeypatch):
    cfg = fast_cfg()
    monkeypatch.setenv("BKS_VERIFIER_THREADS", "1")
    first = suite.render_json(suite.run_suite(cfg))
    monkeypatch.setenv("BKS_VERIFIER_THREADS", "4")
    second = suite.render_json(suite.run_suite(cfg))
    assert first == second
    payload = json.loads(first)
    assert "wall_clock_seconds" not in payload
    assert list(payload) == ["version", "config", "summary", "reports"]


def test_seed_moves_sampled_rows_only():
    rows0 = {k: suite.render_csv(suite.SuiteReport({}, [(k, r)], {}, 0.0, ""))
             for k, r in suite.run_suite(fast_cfg(seed=0)).reports}
    rows1 = {k: suite.render_csv(suite.SuiteReport({}, [(k, r)], {}, 0.0, ""))
             for k, r in suite.run_suite(fast_cfg(seed=1)).reports}
    assert rows0.keys() == rows1.keys()
    for key in rows0:
        if key.startswith(("bks-factor", "factorization")):
            assert rows0[key] == rows1[key], key
    changed = [k for k in rows0 if rows0[k] != rows1[k]]
    assert any(k.startswith("pairing") for k in changed)


def test_errors_are_recorded_not_raised(monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("injected failure")

    monkeypatch.setattr(pairing_mod, "verify_unitarity", boom)
    cfg = fast_cfg(identities=("unitarity",), s_grid=(1.0,), s_prime_grid=(0.5,))
    rep = suite.run_suite(cfg)
    assert rep.summary["total"] > 0
    assert rep.summary["errors"] == rep.summary["total"]
    for _, r in rep.reports:
        assert not r.passed
        assert "RuntimeError: injected failure" in r.params["error"]
        assert r.abs_residual == float("inf")


def test_empty_selection_yields_header_only_csv():
    rep = suite.run_suite(fast_cfg(identities=()))
    assert rep.summary == {"total": 0, "passed": 0, "failed": 0, "errors": 0}
    text = suite.render_csv(rep)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows == [list(suite._CSV_COLUMNS)]


def test_csv_shape_matches_json():
    rep = suite.run_suite(fast_cfg(identities=("bks-factor",)))
    rows = list(csv.reader(io.StringIO(suite.render_csv(rep))))
    assert rows[0] == list(suite._CSV_COLUMNS)
    assert len(rows) == 1 + rep.summary["total"]
    payload = json.loads(suite.render_json(rep))
    for line, entry in zip(rows[1:], payload["reports"]):
        assert line[0] == entry["key"]
        assert line[-1] == str(entry["passed"])
        assert float(line[8]) == entry["abs_residual"]
        assert json.loads(line[3]) == entry["params"]


def test_emit_table_writes_report_and_summary(tmp_path):
    rep = suite.run_suite(fast_cfg(identities=("wedge",)))
    paths = suite.emit_table(rep, "json", str(tmp_path))
    assert [p.rsplit("/", 1)[1] for p in paths] == ["reports.json", "summary.json"]
    with open(paths[0], encoding="utf-8") as fh:
        assert json.load(fh)["summary"] == rep.summary
    with open(paths[1], encoding="utf-8") as fh:
        summary = json.load(fh)
    assert summary["wall_clock_seconds"] == rep.wall_clock
    csv_paths = suite.emit_table(rep, "csv", str(tmp_path))
    assert csv_paths[0].endswith("reports.csv")


def test_factor_table_rows_and_emitter(tmp_path):
    cfg = fast_cfg()
    rows = suite.pairing_factor_rows(cfg)
    # two irreps k = 1, 2 over the four positive cells
    assert len(rows) == 8
    for row in rows:
        assert row["residual"] <= 1e-9
        assert row["numeric_factor"] == pytest.approx(row["closed_factor"], rel=1e-9)
    path = suite.emit_factor_table(rows, "csv", str(tmp_path))
    with open(path, encoding="utf-8") as fh:
        table = list(csv.reader(fh))
    assert len(table) == 1 + len(rows)
    assert table[0][0] == "irrep"


def test_tolerance_scale_and_override_reach_reports():
    rep = suite.run_suite(fast_cfg(identities=("wedge",), tolerance_scale=10.0))
    assert rep.reports[0][1].tolerance == pytest.approx(1e-7)
    cfg = fast_cfg(identities=("wedge",),
                   tolerance_overrides={"wedge": 1e-5})
    rep2 = suite.run_suite(cfg)
    assert rep2.reports[0][1].tolerance == pytest.approx(1e-5)
