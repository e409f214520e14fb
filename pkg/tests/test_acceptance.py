"""Statistical checks on the shipped experiments.

The ``slow`` runs use the configs as written; the others shrink them with
the same overrides the CLI exposes.
"""

import math
import os
import random
from fractions import Fraction

import pytest

from cremona_clt.errors import SingularMatrixError
from cremona_clt.services import families
from cremona_clt.services.experiment_service import run_experiment
from cremona_clt.services.limitlaw import LawKind, check_checkpoint, predict
from cremona_clt.services.walk import Measure, WalkConfig, apply_letters, run_trials


def run(experiments_dir, tmp_path, name, **overrides):
    overrides["out"] = str(tmp_path / name)
    return run_experiment(os.path.join(experiments_dir, f"{name}.json"), overrides)


def test_arithmetic_equal_degrees_is_dirac(app, experiments_dir, tmp_path):
    outcome = run(experiments_dir, tmp_path, "arithmetic", trials=50, length=200)
    summary = outcome.summary
    assert outcome.status == 0
    assert summary["prediction"]["law"] == "Dirac"
    assert summary["prediction"]["ell"] == pytest.approx(math.log(2))
    assert all(c["max_abs_deviation"] < 1e-9 for c in summary["checks"])


def test_monomial_walk_estimates(app, experiments_dir, tmp_path):
    outcome = run(experiments_dir, tmp_path, "monomial", trials=200, length=100)
    summary = outcome.summary
    assert summary["backend"] == "matrix"
    assert summary["estimates"]["ell_hat_positive"] is True


def random_invertible_linear(rng, name):
    while True:
        entries = [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(9)]
        rows = [entries[0:3], entries[3:6], entries[6:9]]
        try:
            return families.linear(rows, name)
        except SingularMatrixError:
            continue


def test_random_projective_linear_products_stay_at_degree_one():
    rng = random.Random(2024)
    generators = [random_invertible_linear(rng, f"e{i}") for i in range(100)]
    measure = Measure.uniform(generators)
    config = WalkConfig(
        measure, length=40, checkpoints=(10, 40), trials=20, seed=5, backend="symbolic"
    )
    result = run_trials(config)
    assert not result.failures
    prediction = predict(measure)
    assert prediction.law is LawKind.DIRAC and prediction.ell == 0.0
    for n in config.checkpoints:
        values = result.values_at(n)
        assert (values == 0.0).all()
        assert check_checkpoint(prediction, values, n).passed


@pytest.mark.slow
def test_symmetric_henon_reduced(app, experiments_dir, tmp_path):
    outcome = run(experiments_dir, tmp_path, "henon_symmetric", trials=2000, length=2500)
    final = outcome.summary["checks"][-1]
    assert final["law_tested"] == "FoldedGaussian"
    assert final["ks_statistic"] <= 0.06


@pytest.mark.slow
@pytest.mark.parametrize(
    "name", ["henon_symmetric", "henon_biased", "arithmetic", "nonelementary", "monomial"]
)
def test_shipped_experiment_passes(app, experiments_dir, tmp_path, name):
    outcome = run(experiments_dir, tmp_path, name)
    assert outcome.summary["failed_trials"] == 0
    assert outcome.status == 0, outcome.summary["checks"]


@pytest.mark.slow
def test_biased_henon_parameters(app, experiments_dir, tmp_path):
    summary = run(experiments_dir, tmp_path, "henon_biased").summary
    assert summary["prediction"]["ell"] == pytest.approx(0.4 * math.log(2))
    final = summary["checks"][-1]
    assert final["mean_log_deg"] / final["step"] == pytest.approx(0.4 * math.log(2), rel=0.01)


@pytest.mark.slow
def test_parabolic_trend(app, experiments_dir, tmp_path):
    outcome = run(experiments_dir, tmp_path, "parabolic")
    summary = outcome.summary
    assert summary["prediction"]["group_type"] == "parabolic"
    assert not any(c["gating"] for c in summary["checks"])
    assert summary["trend"]["passed"]
    assert outcome.status == 0


@pytest.mark.slow
def test_elliptic_full(app, experiments_dir, tmp_path):
    outcome = run(experiments_dir, tmp_path, "elliptic")
    assert outcome.status == 0
    assert all(c["ks_statistic"] == 0.0 for c in outcome.summary["checks"])


@pytest.mark.slow
def test_constant_henon_symbolic_exact(henon_pair):
    measure = Measure.uniform([henon_pair[0]], free_basis=True)
    sample = apply_letters(measure, [0] * 12, range(13), "symbolic", None)
    assert sample.log_degrees == tuple(math.log(2**n) for n in range(13))
