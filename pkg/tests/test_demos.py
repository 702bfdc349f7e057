import runpy
import sys
from pathlib import Path

import pytest

DEMOS = Path(__file__).resolve().parents[1] / "demos"


@pytest.mark.parametrize("name", ["fk_estimator", "gap_scan", "qso_vs_sa"])
def test_demo_runs(name, capsys, monkeypatch):
    monkeypatch.setattr(sys, "argv", [name, "12"])
    runpy.run_path(str(DEMOS / f"{name}.py"), run_name="__main__")
    assert capsys.readouterr().out.strip()


@pytest.mark.slow
def test_chain_demo_runs(capsys):
    runpy.run_path(str(DEMOS / "chain_dynamics.py"), run_name="__main__")
    assert "bloch_friction" in capsys.readouterr().out
