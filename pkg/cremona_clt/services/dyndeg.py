"""Dynamical degree: exact routes and a certified Fekete upper bound."""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from ..algebra.cremona import RationalMap, compose
from ..app_config import DEFAULT_DEGREE_CAP
from ..errors import BackendError, DegreeCapExceeded
from .families import (
    FreeLetter,
    FreeWord,
    Generator,
    MatrixRepr,
    MatrixState,
    cyclically_reduce,
)

logger = logging.getLogger(__name__)

# Above this size the float closed form overflows; use integer square roots.
_FLOAT_SAFE = 2**500


@dataclass(frozen=True)
class DynDegEstimate:
    value: float
    exact: bool
    upper_bounds: Tuple[Tuple[int, float], ...] = ()
    truncated: bool = False
    route: str = ""


def _radius_parts(m):
    t = m.a + m.d
    det = m.determinant
    return t, det, t * t - 4 * det


def spectral_radius(m):
    """Largest absolute eigenvalue of a 2x2 integer matrix."""
    if isinstance(m, MatrixState):
        m = m.matrix
    t, det, disc = _radius_parts(m)
    if disc >= 0:
        value = (abs(t) + math.sqrt(disc)) / 2
    else:
        value = math.sqrt(det)
    return DynDegEstimate(value, True, route="spectral_radius")


# Products of walk matrices; same closed form.
lambda1_matrix_word = spectral_radius


def log_spectral_radius(m):
    t, det, disc = _radius_parts(m)
    if disc < 0:
        return 0.5 * math.log(det)
    if abs(t) < _FLOAT_SAFE and disc < _FLOAT_SAFE:
        return math.log((abs(t) + math.sqrt(disc)) / 2)
    return math.log(abs(t) + math.isqrt(disc)) - math.log(2)


def _core_degree(letters):
    core = cyclically_reduce(letters)
    if len({letter.basis for letter in core}) > 1:
        raise BackendError("cyclically reduced word mixes letters of different free bases")
    return math.prod(letter.degree for letter in core)


def log_lambda1_letters(letters):
    return math.log(_core_degree(letters))


def lambda1_word(word):
    """Exact dynamical degree of a freely reduced word of certified letters."""
    letters = word.letters if isinstance(word, FreeWord) else tuple(word)
    for letter in letters:
        if not isinstance(letter, FreeLetter):
            raise BackendError(f"{letter!r} is not a free letter")
    return DynDegEstimate(float(_core_degree(letters)), True, route="word")


def lambda1_lineal(lam):
    lam = Fraction(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return DynDegEstimate(float(max(lam, 1 / lam)), True, route="lineal")


def lambda1_fekete(f, budget, max_degree=DEFAULT_DEGREE_CAP):
    """Upper bound ``min_k deg(f^k)^(1/k)`` over ``k = 1..budget``."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    bounds = []
    truncated = False
    current = f
    for k in range(1, budget + 1):
        if k > 1:
            try:
                current = compose(current, f, max_degree)
            except DegreeCapExceeded as exc:
                logger.warning(f"Fekete bound stopped at k={k}: {exc}")
                truncated = True
                break
        bounds.append((k, current.degree ** (1.0 / k)))
    value = min(bound for _, bound in bounds)
    return DynDegEstimate(value, False, tuple(bounds), truncated, route="fekete")


def lineal_degree_bound(lam, degree):
    """``max(lambda, 1/lambda) <= 2 deg(f)``, the degree bound on a lineal eigenvalue."""
    lam = Fraction(lam)
    return max(lam, 1 / lam) <= 2 * degree


def estimate(target, budget=10, max_degree=DEFAULT_DEGREE_CAP):
    """Best available estimate: an exact route when one exists, else Fekete."""
    if isinstance(target, Generator):
        if isinstance(target.fast, MatrixRepr):
            return spectral_radius(target.fast.matrix)
        if target.lam is not None:
            return lambda1_lineal(target.lam)
        if isinstance(target.fast, FreeLetter):
            return lambda1_word([target.fast])
        return lambda1_fekete(target.map, budget, max_degree)
    if isinstance(target, FreeWord):
        return lambda1_word(target)
    if isinstance(target, MatrixState):
        return spectral_radius(target.matrix)
    if isinstance(target, RationalMap):
        return lambda1_fekete(target, budget, max_degree)
    raise TypeError(f"cannot estimate the dynamical degree of {target!r}")
