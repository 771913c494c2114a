"""Command line interface and the frozen golden report."""

import json
import os

import pytest

from bksverify import cli, config, suite

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")
GOLDEN_CFG = os.path.join(GOLDEN_DIR, "torus.cfg")
GOLDEN_JSON = os.path.join(GOLDEN_DIR, "reports.json")


def test_golden_report_bytes():
    # regenerate with:
    #   python -c "from bksverify import config, suite; \
    #     print(suite.render_json(suite.run_suite(config.load_config(
    #     'tests/golden/torus.cfg'))), end='')" > tests/golden/reports.json
    cfg = config.load_config(GOLDEN_CFG)
    text = suite.render_json(suite.run_suite(cfg))
    with open(GOLDEN_JSON, encoding="utf-8") as fh:
        assert text == fh.read()


def test_verify_all_with_config(tmp_path, capsys):
    code = cli.main(["verify", "all", "--config", GOLDEN_CFG,
                     "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "16/16 passed, 0 failed (0 errors)" in out
    assert out.count(" PASS") == 16
    with open(tmp_path / "reports.json", encoding="utf-8") as fh:
        payload = json.load(fh)
    assert payload["summary"]["passed"] == 16
    assert (tmp_path / "summary.json").exists()


def test_verify_single_identity_flag_overrides(tmp_path, capsys):
    code = cli.main(["verify", "wedge", "--config", GOLDEN_CFG,
                     "--out", str(tmp_path), "--format", "csv", "--seed", "5"])
    assert code == 0
    with open(tmp_path / "reports.csv", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    assert len(lines) == 2 and lines[1].startswith("wedge/torus")


def test_verify_failure_exit_code(tmp_path, capsys):
    code = cli.main(["verify", "pairing", "--config", GOLDEN_CFG,
                     "--out", str(tmp_path), "--tolerance-scale", "1e-30"])
    captured = capsys.readouterr()
    assert code == 1
    assert "FAIL pairing/torus" in captured.err


def test_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[run]\ngroup = so3\n", encoding="utf-8")
    code = cli.main(["verify", "all", "--config", str(bad)])
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_unknown_identity_rejected_by_argparse():
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "nosuch"])
    assert exc.value.code == 2


def test_table_pairing_factors(tmp_path, capsys):
    code = cli.main(["table", "pairing-factors", "--config", GOLDEN_CFG,
                     "--out", str(tmp_path), "--format", "csv"])
    out = capsys.readouterr().out
    assert code == 0
    assert "wrote" in out and "worst residual" in out
    with open(tmp_path / "pairing-factors.csv", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    assert lines[0].startswith("irrep")
    assert len(lines) == 1 + 8


def test_calibrate(tmp_path, capsys):
    code = cli.main(["calibrate", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    with open(tmp_path / "calibrate.json", encoding="utf-8") as fh:
        rows = json.load(fh)
    assert [r["dim"] for r in rows] == [1, 3, 8]
    su2 = rows[1]
    assert su2["scale"] == pytest.approx(0.0684568393076929, rel=1e-13)
    assert su2["rho_norm_sq"] == pytest.approx(7.30387211937511, rel=1e-13)
    assert "scale" in out


def test_convergence_torus(tmp_path, capsys):
    code = cli.main(["convergence", "--group", "torus", "--out", str(tmp_path)])
    assert code == 0
    with open(tmp_path / "convergence.json", encoding="utf-8") as fh:
        rows = json.load(fh)
    assert {r["backend"] for r in rows} == {"gauss-hermite"}
    finest = [r for r in rows if r["resolution"] == 32]
    assert finest and finest[0]["rel_error"] <= 1e-12


def test_parser_help_mentions_subcommands():
    parser = cli.build_parser()
    text = parser.format_help()
    for word in ("verify", "table", "calibrate", "convergence"):
        assert word in text
