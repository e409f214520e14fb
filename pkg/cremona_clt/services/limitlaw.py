"""Predicted limit laws of ``(log deg f_n - n ell) / sqrt(n)`` and fit checks.

The prediction depends on the type of the group the measure generates:

================  =========================  ====================================
type              law                        parameters
================  =========================  ====================================
elliptic          Dirac at 0                 ell = sigma = 0
parabolic         Dirac at 0                 ell = sigma = 0
lineal, Λ = 0     folded Gaussian            sigma² = ∫ (log λ)²
lineal, Λ ≠ 0     Gaussian                   ell = |Λ|, sigma² = ∫ (log λ - Λ)²
arithmetic        Dirac or Gaussian          ell = ∫ log deg, sigma² its variance
non-elementary    Gaussian                   estimated from the ensemble
================  =========================  ====================================

Λ is ``∫ log λ dμ``; it vanishes exactly when ``prod λ_i^(w_i L) = 1`` for
``L`` the common denominator of the weights, which is decided in exact
rational arithmetic.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import partial
from typing import Optional

import numpy as np
import pandas as pd
from scipy.special import erf, ndtr

from ..app_config import DIRAC_TOLERANCE, KS_THRESHOLD, KS_THRESHOLD_FITTED
from ..errors import LawError
from .dyndeg import lineal_degree_bound
from .families import Family, FreeLetter

logger = logging.getLogger(__name__)

FITTED_CAVEAT = (
    "ell and sigma were estimated from the same ensemble that is tested; "
    "the KS threshold is descriptive and the fit is weaker than against a predicted law"
)


class LawKind(str, Enum):
    DIRAC = "Dirac"
    GAUSSIAN = "Gaussian"
    FOLDED_GAUSSIAN = "FoldedGaussian"


@dataclass(frozen=True)
class LimitLawPrediction:
    ell: Optional[float]
    sigma: Optional[float]
    law: LawKind
    Lambda_mu: Optional[float] = None
    group_type: Optional[Family] = None
    estimated: bool = False

    def __post_init__(self):
        if self.sigma is not None and (self.law is LawKind.DIRAC) != (self.sigma == 0):
            raise LawError("law is Dirac exactly when sigma = 0")
        if self.law is LawKind.FOLDED_GAUSSIAN and (self.ell != 0 or self.Lambda_mu != 0):
            raise LawError("a folded Gaussian prediction needs ell = 0 and Lambda_mu = 0")

    def as_dict(self):
        return {
            "law": self.law.value,
            "group_type": self.group_type.value if self.group_type else None,
            "ell": self.ell,
            "sigma": self.sigma,
            "Lambda_mu": self.Lambda_mu,
            "estimated": self.estimated,
        }


@dataclass(frozen=True)
class KSReport:
    statistic: float
    sample_count: int
    law: str
    threshold: Optional[float] = None

    @property
    def passed(self):
        return self.threshold is None or self.statistic <= self.threshold


@dataclass(frozen=True)
class CheckResult:
    step: int
    law: str
    statistic: float
    threshold: float
    passed: bool
    notes: tuple = field(default_factory=tuple)

    def as_dict(self):
        return {
            "step": self.step,
            "law_tested": self.law,
            "ks_statistic": self.statistic,
            "threshold": self.threshold,
            "passed": self.passed,
            "notes": list(self.notes),
        }


# --- predictions ----------------------------------------------------------------


def _group_type(measure):
    if measure.group_type is not None:
        return Family(measure.group_type)
    families = measure.families()
    if len(families) != 1:
        names = sorted(f.value for f in families)
        raise LawError(f"mixed family tags {names} and no declared group_type")
    return families.pop()


def _weighted(values, weights):
    return math.fsum(float(w) * v for v, w in zip(values, weights))


def _lambda_mean_vanishes(lams, weights):
    common = math.lcm(*(w.denominator for w in weights))
    product = Fraction(1)
    for lam, w in zip(lams, weights):
        product *= lam ** int(w * common)
    return product == 1


def _lineal_prediction(measure):
    weights = [atom.weight for atom in measure.atoms]
    lams = []
    for atom in measure.atoms:
        if atom.generator.lam is None:
            raise LawError(f"lineal generator {atom.generator.name} carries no lambda")
        if not lineal_degree_bound(atom.generator.lam, atom.generator.degree):
            raise LawError(
                f"lineal generator {atom.generator.name}: lambda {atom.generator.lam} "
                f"exceeds the bound 2*deg = {2 * atom.generator.degree}"
            )
        lams.append(atom.generator.lam)
    logs = [math.log(lam) for lam in lams]
    if len(set(lams)) == 1:
        ell = abs(logs[0])
        return LimitLawPrediction(ell, 0.0, LawKind.DIRAC, logs[0], Family.LINEAL)
    if _lambda_mean_vanishes(lams, weights):
        sigma = math.sqrt(_weighted([v * v for v in logs], weights))
        return LimitLawPrediction(0.0, sigma, LawKind.FOLDED_GAUSSIAN, 0.0, Family.LINEAL)
    Lambda = _weighted(logs, weights)
    sigma = math.sqrt(_weighted([(v - Lambda) ** 2 for v in logs], weights))
    return LimitLawPrediction(abs(Lambda), sigma, LawKind.GAUSSIAN, Lambda, Family.LINEAL)


def _arithmetic_prediction(measure):
    weights = [atom.weight for atom in measure.atoms]
    degrees = []
    for atom in measure.atoms:
        letter = atom.generator.fast
        if not isinstance(letter, FreeLetter) or letter.sign != 1:
            raise LawError("arithmetic predictions need positive letters of the constructed pair")
        degrees.append(letter.degree)
    logs = [math.log(d) for d in degrees]
    ell = _weighted(logs, weights)
    if len(set(degrees)) == 1:
        return LimitLawPrediction(logs[0], 0.0, LawKind.DIRAC, None, Family.ARITHMETIC)
    sigma = math.sqrt(_weighted([(v - ell) ** 2 for v in logs], weights))
    return LimitLawPrediction(ell, sigma, LawKind.GAUSSIAN, None, Family.ARITHMETIC)


def predict(measure):
    group = _group_type(measure)
    if group is Family.ELLIPTIC:
        return LimitLawPrediction(0.0, 0.0, LawKind.DIRAC, None, group)
    if group is Family.PARABOLIC:
        return LimitLawPrediction(0.0, 0.0, LawKind.DIRAC, 0.0, group)
    if group is Family.LINEAL:
        return _lineal_prediction(measure)
    if group is Family.ARITHMETIC:
        return _arithmetic_prediction(measure)
    return LimitLawPrediction(None, None, LawKind.GAUSSIAN, None, group, estimated=True)


def sigma_vanishes(prediction):
    """Whether sigma = 0 is forced (elliptic, parabolic, lineal with constant λ)."""
    if prediction.estimated:
        return None
    return prediction.sigma == 0


# --- distributions ---------------------------------------------------------------


def gaussian_cdf(sigma, x):
    """Φ(x/σ) via scipy's ndtr (double-precision normal CDF)."""
    if sigma <= 0:
        raise LawError("sigma must be positive")
    return ndtr(np.asarray(x, dtype=float) / sigma)


def folded_cdf(sigma, x):
    """CDF of |N(0, σ)|: 0 below zero, 2Φ(x/σ) - 1 = erf(x/(σ√2)) above."""
    if sigma <= 0:
        raise LawError("sigma must be positive")
    x = np.asarray(x, dtype=float)
    return np.where(x < 0, 0.0, erf(np.maximum(x, 0.0) / (sigma * math.sqrt(2.0))))


def normalize(values, ell, n):
    if n < 1:
        raise LawError("normalize needs n >= 1")
    return (np.asarray(values, dtype=float) - n * ell) / math.sqrt(n)


def ks_statistic(z, cdf, law="custom", threshold=None):
    """Two-sided Kolmogorov-Smirnov distance between samples and a continuous CDF."""
    z = np.sort(np.asarray(z, dtype=float))
    m = z.size
    if m == 0:
        raise LawError("KS statistic needs at least one sample")
    F = np.asarray(cdf(z), dtype=float)
    i = np.arange(1, m + 1)
    upper = np.abs(i / m - F)
    lower = np.abs((i - 1) / m - F)
    statistic = float(max(upper.max(), lower.max()))
    return KSReport(statistic, m, law, threshold)


def dirac_statistic(values, center, tolerance=DIRAC_TOLERANCE, threshold=0.0):
    """Fraction of samples farther than ``tolerance`` from ``center``."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise LawError("Dirac check needs at least one sample")
    off = np.abs(values - center) > tolerance
    return KSReport(float(off.mean()), int(values.size), LawKind.DIRAC.value, threshold)


def estimate_parameters(values, n):
    """``(ell_hat, sigma_hat)``: mean drift and sample std of the z-scores."""
    values = np.asarray(values, dtype=float)
    if n < 1 or values.size < 2:
        raise LawError("estimation needs n >= 1 and at least two samples")
    ell_hat = float(values.mean()) / n
    sigma_hat = float(np.std(normalize(values, ell_hat, n), ddof=1))
    return ell_hat, sigma_hat


def check_checkpoint(
    prediction,
    values,
    n,
    ks_threshold=KS_THRESHOLD,
    fitted_threshold=KS_THRESHOLD_FITTED,
    tolerance=DIRAC_TOLERANCE,
    fitted=None,
):
    """Compare the ensemble at step ``n`` with the predicted law.

    ``fitted`` carries ``(ell_hat, sigma_hat)`` for estimated predictions.
    """
    values = np.asarray(values, dtype=float)
    if prediction.estimated:
        ell, sigma = fitted if fitted else estimate_parameters(values, n)
        if sigma == 0:
            report = dirac_statistic(values, n * ell, tolerance)
            return CheckResult(
                n, report.law, report.statistic, 0.0, report.passed, (FITTED_CAVEAT,)
            )
        z = normalize(values, ell, n)
        report = ks_statistic(
            z, partial(gaussian_cdf, sigma), LawKind.GAUSSIAN.value, fitted_threshold
        )
        return CheckResult(
            n, report.law, report.statistic, fitted_threshold, report.passed, (FITTED_CAVEAT,)
        )

    if prediction.law is LawKind.DIRAC:
        report = dirac_statistic(values, n * prediction.ell, tolerance)
        return CheckResult(n, report.law, report.statistic, 0.0, report.passed)

    z = normalize(values, prediction.ell, n)
    if prediction.law is LawKind.FOLDED_GAUSSIAN:
        cdf = partial(folded_cdf, prediction.sigma)
    else:
        cdf = partial(gaussian_cdf, prediction.sigma)
    report = ks_statistic(z, cdf, prediction.law.value, ks_threshold)
    return CheckResult(n, report.law, report.statistic, ks_threshold, report.passed)


def trend_check(mean_by_step):
    """Mean of ``log deg f_n / sqrt(n)`` must decrease from the first to the last step."""
    steps = sorted(s for s in mean_by_step if s > 0)
    if len(steps) < 2:
        raise LawError("trend check needs at least two positive checkpoints")
    first, last = mean_by_step[steps[0]], mean_by_step[steps[-1]]
    return {
        "first_step": steps[0],
        "last_step": steps[-1],
        "first_mean": first,
        "last_mean": last,
        "passed": bool(last < first),
    }


def histogram(z, bins=50):
    """Histogram table with columns ``count, left_edge, width``."""
    counts, edges = np.histogram(np.asarray(z, dtype=float), bins=bins)
    return pd.DataFrame(
        {"count": counts, "left_edge": edges[:-1], "width": np.diff(edges)}
    )
