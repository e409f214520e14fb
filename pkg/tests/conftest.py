# tests/conftest.py
import os
import sys

import pytest

# Add the project root directory to sys.path
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

EXPERIMENTS_DIR = os.path.join(PROJECT_ROOT, "experiments")


@pytest.fixture
def app(monkeypatch, tmp_path):
    monkeypatch.setenv("CREMONA_ENV", "testing")

    from cremona_clt.config import TestingConfig

    # Logs and default outputs go to the per-test temp dir.
    monkeypatch.setattr(TestingConfig, "LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setattr(TestingConfig, "OUTPUT_DIR", str(tmp_path / "output"))

    from cremona_clt import create_app

    app_instance = create_app()
    assert app_instance.config["TESTING"]

    with app_instance.app_context():
        yield app_instance


@pytest.fixture
def runner(app):
    """A test runner for the app's Click commands."""
    return app.test_cli_runner()


@pytest.fixture
def experiments_dir():
    return EXPERIMENTS_DIR


@pytest.fixture
def quadratic():
    from cremona_clt.algebra.expr_parser import parse_polynomial

    return parse_polynomial("x^2")


@pytest.fixture
def henon_pair(quadratic):
    """``(h, h^-1)`` for ``P = x^2``."""
    from cremona_clt.services import families

    return families.henon(quadratic)


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict as JSON next to the test's temp outputs; returns the path."""
    import json

    def _write(payload, name="experiment.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    return _write


@pytest.fixture
def henon_config():
    """Small symmetric Hénon experiment (fast backend)."""
    return {
        "schema_version": 1,
        "name": "henon_small",
        "generators": [{"name": "h", "family": "henon", "params": {"P": "x^2"}}],
        "measure": {
            "atoms": [
                {"generator": "h", "weight": "1/2"},
                {"generator": "h^-1", "weight": "1/2"},
            ],
            "free_basis": True,
        },
        "walk": {
            "length": 400,
            "checkpoints": [100, 400],
            "trials": 300,
            "seed": 7,
            "backend": "fast",
        },
        "outputs": {
            "csv": "out/trajectories.csv",
            "summary": "out/summary.json",
            "histogram": "out/histogram.csv",
        },
        "thresholds": {"ks": 0.2},
    }
