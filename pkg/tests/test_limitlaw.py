import math
from fractions import Fraction
from functools import partial

import numpy as np
import pytest
from scipy.special import ndtri

from cremona_clt.algebra.expr_parser import parse_polynomial
from cremona_clt.errors import LawError
from cremona_clt.services import families
from cremona_clt.services.families import Family
from cremona_clt.services.limitlaw import (
    LawKind,
    LimitLawPrediction,
    check_checkpoint,
    dirac_statistic,
    estimate_parameters,
    folded_cdf,
    gaussian_cdf,
    histogram,
    ks_statistic,
    normalize,
    predict,
    sigma_vanishes,
    trend_check,
)
from cremona_clt.services.walk import Measure

LOG2 = math.log(2)


def test_gaussian_cdf_values():
    values = gaussian_cdf(1.0, [0.0, 1.0, -1.0])
    assert values == pytest.approx([0.5, 0.841345, 0.158655], abs=1e-6)


def test_folded_cdf_values():
    assert folded_cdf(1.0, 1.0) == pytest.approx(0.682689, abs=1e-6)
    assert folded_cdf(1.0, -0.5) == 0.0
    assert folded_cdf(1.0, 0.0) == 0.0


def test_cdfs_need_positive_sigma():
    with pytest.raises(LawError):
        gaussian_cdf(0.0, 1.0)
    with pytest.raises(LawError):
        folded_cdf(-1.0, 1.0)


def test_ks_single_sample():
    assert ks_statistic([0.0], lambda z: gaussian_cdf(1.0, z)).statistic == pytest.approx(0.5)
    report = ks_statistic([0.0], lambda z: folded_cdf(1.0, z))
    assert report.statistic == pytest.approx(1.0)
    with pytest.raises(LawError):
        ks_statistic([], lambda z: z)


def test_ks_on_exact_quantiles():
    m = 1000
    z = ndtri((np.arange(m) + 0.5) / m)
    report = ks_statistic(z, lambda v: gaussian_cdf(1.0, v), "Gaussian", 0.03)
    assert report.statistic == pytest.approx(0.5 / m, abs=1e-9)
    assert report.passed


def test_dirac_statistic():
    report = dirac_statistic([1.0, 1.0, 1.5, 1.0], 1.0, tolerance=1e-9)
    assert report.statistic == pytest.approx(0.25)
    assert not report.passed
    assert dirac_statistic([2.0, 2.0], 2.0).passed


def test_normalize_and_estimates():
    values = np.array([10.0, 12.0, 14.0])
    assert normalize(values, 3.0, 4) == pytest.approx([-1.0, 0.0, 1.0])
    ell_hat, sigma_hat = estimate_parameters(values, 4)
    assert ell_hat == pytest.approx(3.0)
    assert sigma_hat == pytest.approx(1.0)
    with pytest.raises(LawError):
        estimate_parameters([1.0], 4)
    with pytest.raises(LawError):
        normalize(values, 0.0, 0)


def test_predict_elliptic_and_parabolic():
    e = families.linear([[0, 1, 0], [-1, 0, 0], [0, 0, 1]])
    prediction = predict(Measure.uniform([e, e.inverse]))
    assert (prediction.law, prediction.ell, prediction.sigma) == (LawKind.DIRAC, 0.0, 0.0)
    assert sigma_vanishes(prediction)


def test_lineal_lambda_must_respect_degree_bound():
    p, q = parse_polynomial("y + x^2"), parse_polynomial("x")
    ok = families.affine(p, q, Family.LINEAL, "g", Fraction(4))
    assert predict(Measure.uniform([ok])).ell == pytest.approx(math.log(4))
    too_big = families.affine(p, q, Family.LINEAL, "g", Fraction(5))
    with pytest.raises(LawError, match="2\\*deg = 4"):
        predict(Measure.uniform([too_big]))
    too_small = families.affine(p, q, Family.LINEAL, "g", Fraction(1, 5))
    with pytest.raises(LawError):
        predict(Measure.uniform([too_small]))


def test_predict_lineal_rows(henon_pair):
    h, h_inv = henon_pair
    folded = predict(Measure.uniform([h, h_inv]))
    assert folded.law is LawKind.FOLDED_GAUSSIAN
    assert folded.ell == 0.0 and folded.Lambda_mu == 0.0
    assert folded.sigma == pytest.approx(LOG2)

    biased = predict(Measure.from_weights([h, h_inv], ["7/10", "3/10"]))
    assert biased.law is LawKind.GAUSSIAN
    assert biased.ell == pytest.approx(0.4 * LOG2)
    assert biased.sigma == pytest.approx(math.sqrt(0.84) * LOG2)
    assert not sigma_vanishes(biased)

    constant = predict(Measure.uniform([h]))
    assert constant.law is LawKind.DIRAC
    assert constant.ell == pytest.approx(LOG2)
    assert constant.sigma == 0.0


def test_lambda_mean_is_decided_exactly(quadratic):
    h, h_inv = families.henon(quadratic)
    g, g_inv = families.henon(parse_polynomial("x^4"), name="g", basis=h.basis)
    # (1/2)^(2/3) * 4^(1/3) = 1
    measure = Measure.from_weights([h_inv, g], ["2/3", "1/3"])
    assert predict(measure).law is LawKind.FOLDED_GAUSSIAN


def test_predict_arithmetic():
    F, G = families.arithmetic_pair(parse_polynomial("x^2"), parse_polynomial("x^3"))
    prediction = predict(Measure.uniform([F, G]))
    assert prediction.law is LawKind.GAUSSIAN
    assert prediction.ell == pytest.approx((LOG2 + math.log(3)) / 2)
    assert prediction.sigma == pytest.approx((math.log(3) - LOG2) / 2)
    F2, G2 = families.arithmetic_pair(parse_polynomial("x^2"), parse_polynomial("x^2 + x"))
    equal = predict(Measure.uniform([F2, G2]))
    assert equal.law is LawKind.DIRAC and equal.ell == pytest.approx(LOG2)


def test_predict_nonelementary_is_estimated(quadratic):
    pairs = families.henon_system([quadratic, parse_polynomial("x^3")])
    prediction = predict(Measure.uniform([g for pair in pairs for g in pair], free_basis=True))
    assert prediction.estimated
    assert prediction.ell is None
    assert sigma_vanishes(prediction) is None


def test_mixed_families_need_group_type(henon_pair):
    e = families.linear([[0, 1, 0], [-1, 0, 0], [0, 0, 1]])
    measure = Measure.uniform([henon_pair[0], e])
    with pytest.raises(LawError):
        predict(measure)
    declared = Measure.uniform([henon_pair[0], e], group_type="nonelementary_free")
    assert predict(declared).group_type is Family.NONELEMENTARY_FREE


def test_prediction_invariants():
    with pytest.raises(LawError):
        LimitLawPrediction(0.0, 1.0, LawKind.DIRAC)
    with pytest.raises(LawError):
        LimitLawPrediction(1.0, 1.0, LawKind.FOLDED_GAUSSIAN, 0.0)


def test_check_checkpoint_dirac(henon_pair):
    prediction = predict(Measure.uniform([henon_pair[0]]))
    values = np.full(20, 10 * LOG2)
    result = check_checkpoint(prediction, values, 10)
    assert result.passed and result.statistic == 0.0 and result.law == "Dirac"


def test_check_checkpoint_gaussian(henon_pair):
    prediction = predict(Measure.uniform(henon_pair))
    n = 100
    z = np.abs(ndtri((np.arange(2000) + 0.5) / 2000)) * prediction.sigma
    result = check_checkpoint(prediction, z * math.sqrt(n), n, 0.03)
    assert result.law == "FoldedGaussian"
    assert result.passed


def test_check_checkpoint_estimated(quadratic):
    pairs = families.henon_system([quadratic, parse_polynomial("x^3")])
    prediction = predict(Measure.uniform([g for pair in pairs for g in pair], free_basis=True))
    n = 400
    z = ndtri((np.arange(1000) + 0.5) / 1000) * 0.3
    values = n * 0.8 + math.sqrt(n) * z
    result = check_checkpoint(prediction, values, n, fitted_threshold=0.05)
    assert result.passed
    assert result.notes
    fixed = check_checkpoint(prediction, values, n, fitted=(0.8, 0.3), fitted_threshold=0.05)
    assert fixed.statistic == pytest.approx(0.0005, abs=1e-6)


def test_trend_check():
    trend = trend_check({16: 2.0, 36: 1.8, 144: 1.2})
    assert trend["passed"]
    assert (trend["first_step"], trend["last_step"]) == (16, 144)
    assert not trend_check({0: 0.0, 4: 1.0, 9: 1.0})["passed"]
    with pytest.raises(LawError):
        trend_check({0: 0.0, 4: 1.0})


def test_histogram_columns():
    table = histogram(np.linspace(-1, 1, 101), bins=4)
    assert list(table.columns) == ["count", "left_edge", "width"]
    assert table["count"].sum() == 101
    assert table["width"].tolist() == pytest.approx([0.5] * 4)


def test_weights_are_exact_fractions(henon_pair):
    measure = Measure.from_weights(henon_pair, ["1/3", "2/3"])
    assert sum(a.weight for a in measure.atoms) == Fraction(1)


def test_symmetric_log_d_walk_is_folded_normal():
    d, n, m = 3, 10**4, 10**4
    rng = np.random.Generator(np.random.Philox(12))
    # A sum of n fair +1/-1 steps is 2 * Binomial(n, 1/2) - n.
    walk = (2 * rng.binomial(n, 0.5, size=m) - n) * math.log(d)
    z = np.abs(walk) / math.sqrt(n)
    report = ks_statistic(z, partial(folded_cdf, math.log(d)))
    assert report.statistic < 0.03
