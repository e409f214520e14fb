"""Property suites behind the ``verify`` command.

Each suite draws its cases from a seeded ``random.Random`` and returns a
``VerifyReport``; the default sizes are the ones the command runs.
"""

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Optional

from flask import current_app

from ..algebra.cremona import (
    MonomialMatrix,
    compose,
    from_monomial_matrix,
    projectively_equal,
)
from ..algebra.exactpoly import SparsePoly, gcd_multivar, substitute
from ..algebra.expr_parser import parse_polynomial
from ..app_config import VERIFY_SUITES
from ..errors import ConfigError, FamilyError, SingularMatrixError
from . import families
from .families import Family
from .limitlaw import LawKind, predict
from .walk import Measure, apply_letters

# Keeps randomized composition pairs cheap enough for 500 cases.
SUBMULT_MAX_RAW_DEGREE = 24


@dataclass
class VerifyReport:
    name: str
    checked: int = 0
    counterexamples: int = 0
    first_counterexample: Optional[str] = None
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return self.counterexamples == 0

    def record(self, ok, describe):
        self.checked += 1
        if not ok:
            self.counterexamples += 1
            if self.first_counterexample is None:
                self.first_counterexample = describe()

    def lines(self):
        out = [
            f"suite: {self.name}",
            f"checked: {self.checked}",
            f"counterexamples: {self.counterexamples}",
        ]
        if self.first_counterexample:
            out.append(f"first counterexample: {self.first_counterexample}")
        out.extend(self.notes)
        return out


# --- random inputs ------------------------------------------------------------------


def random_univariate(rng, degree, bound=3):
    """Polynomial in x of exact degree ``degree`` with integer coefficients in [-bound, bound]."""
    terms = {(k, 0): rng.randint(-bound, bound) for k in range(degree)}
    terms[(degree, 0)] = rng.choice([c for c in range(-bound, bound + 1) if c])
    return SparsePoly(terms, 2)


def random_matrix(rng, size, bound):
    return [[rng.randint(-bound, bound) for _ in range(size)] for _ in range(size)]


def random_monomial_matrix(rng, bound):
    while True:
        try:
            return MonomialMatrix.from_rows(random_matrix(rng, 2, bound))
        except SingularMatrixError:
            continue


def random_jonquiere(rng, max_degree=2, name="j"):
    """Random Jonquière generator; coefficient polynomials have degree <= max_degree."""
    while True:
        polys = [random_univariate(rng, rng.randint(0, max_degree), 2) for _ in range(4)]
        a = rng.choice([1, -1, 2, -2])
        b = rng.randint(-2, 2)
        try:
            return families.jonquiere(a, b, *polys, name=name)
        except FamilyError:
            continue


def _random_linear(rng):
    while True:
        try:
            return families.linear(random_matrix(rng, 3, 2))
        except SingularMatrixError:
            continue


def _random_generator(rng):
    kind = rng.choice(("henon", "linear", "jonquiere", "monomial", "elementary"))
    if kind == "henon":
        return rng.choice(families.henon(random_univariate(rng, rng.randint(2, 3))))
    if kind == "linear":
        return _random_linear(rng)
    if kind == "jonquiere":
        return random_jonquiere(rng)
    if kind == "monomial":
        return families.monomial(random_monomial_matrix(rng, 2))
    P = random_univariate(rng, rng.randint(2, 3))
    return families.Generator("e", families.elementary(P), Family.NONELEMENTARY_FREE)


def _random_word_map(rng, length):
    f = _random_generator(rng).map
    for _ in range(length - 1):
        f = compose(f, _random_generator(rng).map, None)
    return f


# --- suites ----------------------------------------------------------------------


def suite_submult(rng, pairs=500):
    """``deg(f ∘ g) <= deg f * deg g``, with any drop explained by a common factor.

    The substituted triple is rebuilt from the components of f and g.
    """
    report = VerifyReport("submult")
    while report.checked < pairs:
        f = _random_word_map(rng, rng.randint(1, 2))
        g = _random_word_map(rng, rng.randint(1, 2))
        bound = f.degree * g.degree
        if bound > SUBMULT_MAX_RAW_DEGREE:
            continue
        h = compose(f, g, None)
        triple = [substitute(p, g.components, None) for p in f.components]
        nonzero = [p for p in triple if not p.is_zero()]
        common = reduce(gcd_multivar, nonzero)
        raw_degree = nonzero[0].degree
        ok = h.degree <= bound and h.degree == raw_degree - common.degree
        report.record(
            ok,
            lambda: (
                f"f={f} g={g} deg(f∘g)={h.degree} bound={bound} "
                f"raw={raw_degree} common factor degree={common.degree}"
            ),
        )
    return report


def _sqrt_subadditive(c, a, b):
    """Exact test of ``sqrt(c) <= sqrt(a) + sqrt(b)`` for nonnegative integers."""
    excess = c - a - b
    return excess <= 0 or excess * excess <= 4 * a * b


def suite_sqrt_subadd(rng, pairs=200):
    """Square-root subadditivity of degrees on random Jonquière pairs."""
    report = VerifyReport("sqrt_subadd")
    for _ in range(pairs):
        f = random_jonquiere(rng, name="f")
        g = random_jonquiere(rng, name="g")
        f = rng.choice((f, f.inverse))
        g = rng.choice((g, g.inverse))
        h = compose(f.map, g.map, None)
        report.record(
            _sqrt_subadditive(h.degree, f.degree, g.degree),
            lambda: f"f={f.map} g={g.map} degrees {f.degree}, {g.degree} -> {h.degree}",
        )
    return report


def suite_functorial(rng, pairs=100, bound=3):
    """``f_{MN} = f_M ∘ f_N`` for random nonsingular integer matrices."""
    report = VerifyReport("functorial")
    for _ in range(pairs):
        M = random_monomial_matrix(rng, bound)
        N = random_monomial_matrix(rng, bound)
        lhs = from_monomial_matrix(M @ N)
        rhs = compose(from_monomial_matrix(M), from_monomial_matrix(N), None)
        report.record(projectively_equal(lhs, rhs), lambda: f"M={M.rows} N={N.rows}")
    return report


def _oracle_case(report, measure, letters, label, symbolic_cap=None):
    steps = tuple(range(len(letters) + 1))
    fast = apply_letters(measure, letters, steps, "fast")
    slow = apply_letters(measure, letters, steps, "symbolic", symbolic_cap)
    report.record(
        fast.log_degrees == slow.log_degrees,
        lambda: f"{label} word {list(letters)}: fast {fast.log_degrees} "
        f"symbolic {slow.log_degrees}",
    )


def _random_letters(rng, measure, length):
    return [rng.randrange(len(measure.atoms)) for _ in range(length)]


def suite_fast_oracle(
    rng,
    henon_words=200,
    monomial_words=100,
    max_length=6,
    cubic_length=6,
    monomial_length=12,
):
    """Fast-path degrees equal symbolic-composition degrees, step by step."""
    report = VerifyReport("fast_oracle")
    for i in range(henon_words):
        d = rng.choice((2, 3))
        limit = max_length if d == 2 else min(max_length, cubic_length)
        if i % 4 == 3:
            polys = [random_univariate(rng, 2), random_univariate(rng, d)]
            pairs = families.henon_system(polys)
            gens = [g for pair in pairs for g in pair]
            limit = min(limit, cubic_length)
            label = "hénon system"
        else:
            gens = list(families.henon(random_univariate(rng, d)))
            label = f"hénon d={d}"
        measure = Measure.uniform(gens, free_basis=True)
        letters = _random_letters(rng, measure, rng.randint(1, limit))
        _oracle_case(report, measure, letters, label)
    for _ in range(monomial_words):
        count = rng.randint(1, 3)
        gens = [families.monomial(random_monomial_matrix(rng, 2)) for _ in range(count)]
        measure = Measure.uniform(gens)
        letters = _random_letters(rng, measure, rng.randint(1, monomial_length))
        _oracle_case(report, measure, letters, "monomial")
    return report


def suite_arithmetic(rng=None, max_length=5, P1="x^2", P2="x^2 + x"):
    """Every positive word of length n in the constructed pair has degree d^n."""
    F, G = families.arithmetic_pair(parse_polynomial(P1), parse_polynomial(P2))
    measure = Measure.uniform([F, G], free_basis=True)
    report = VerifyReport("arithmetic")
    for n in range(1, max_length + 1):
        for code in range(2**n):
            letters = [(code >> k) & 1 for k in range(n)]
            sample = apply_letters(measure, letters, (n,), "symbolic", None)
            expected = math.prod(measure.atoms[i].generator.degree for i in letters)
            report.record(
                sample.log_degrees[0] == math.log(expected),
                lambda: f"word {''.join('FG'[i] for i in letters)}: "
                f"log deg {sample.log_degrees[0]} != log {expected}",
            )
    return report


def _table_rows():
    x2 = SparsePoly({(2, 0): 1}, 2)
    x3 = SparsePoly({(3, 0): 1}, 2)
    log2, log3 = math.log(2), math.log(3)
    h, h_inv = families.henon(x2)
    e = families.linear([[0, 1, 0], [-1, 0, 0], [0, 0, 1]])
    one, x = SparsePoly.constant(1), SparsePoly({(1, 0): 1}, 2)
    j = families.jonquiere(1, 1, one, SparsePoly(), x, one)
    F2, G2 = families.arithmetic_pair(x2, x2 + x)
    F3, G3 = families.arithmetic_pair(x2, x3)
    pairs = families.henon_system([x2, x3])
    system = [g for pair in pairs for g in pair]
    half = Fraction(1, 2)
    return [
        ("elliptic", Measure.uniform([e, e.inverse]), LawKind.DIRAC, 0.0, 0.0),
        ("parabolic", Measure.uniform([j, j.inverse]), LawKind.DIRAC, 0.0, 0.0),
        (
            "lineal, Lambda = 0",
            Measure.from_weights([h, h_inv], [half, half]),
            LawKind.FOLDED_GAUSSIAN,
            0.0,
            log2,
        ),
        (
            "lineal, Lambda > 0",
            Measure.from_weights([h, h_inv], ["7/10", "3/10"]),
            LawKind.GAUSSIAN,
            0.4 * log2,
            math.sqrt(0.84) * log2,
        ),
        ("lineal, constant lambda", Measure.uniform([h]), LawKind.DIRAC, log2, 0.0),
        ("arithmetic, equal degrees", Measure.uniform([F2, G2]), LawKind.DIRAC, log2, 0.0),
        (
            "arithmetic, distinct degrees",
            Measure.uniform([F3, G3]),
            LawKind.GAUSSIAN,
            (log2 + log3) / 2,
            (log3 - log2) / 2,
        ),
        (
            "non-elementary",
            Measure.uniform(system, free_basis=True),
            LawKind.GAUSSIAN,
            None,
            None,
        ),
    ]


def suite_table(rng=None, tolerance=1e-12):
    """``predict`` against the classification table on canonical measures."""
    report = VerifyReport("table")
    for label, measure, law, ell, sigma in _table_rows():
        got = predict(measure)
        if ell is None:
            ok = got.law is law and got.estimated
        else:
            ok = (
                got.law is law
                and not got.estimated
                and abs(got.ell - ell) <= tolerance
                and abs(got.sigma - sigma) <= tolerance
            )
        report.record(
            ok, lambda: f"{label}: got {got.law.value} ell={got.ell} sigma={got.sigma}"
        )
    return report


SUITES = {
    "submult": suite_submult,
    "sqrt_subadd": suite_sqrt_subadd,
    "functorial": suite_functorial,
    "fast_oracle": suite_fast_oracle,
    "arithmetic": suite_arithmetic,
    "table": suite_table,
}


def verify_suite(name, seed=None, **sizes):
    """Run one named suite with a fixed seed (the app's VERIFY_SEED by default)."""
    if name not in VERIFY_SUITES:
        expected = ", ".join(VERIFY_SUITES)
        raise ConfigError("suite", f"unknown suite {name!r}; expected one of {expected}")
    if seed is None:
        seed = current_app.config["VERIFY_SEED"]
    current_app.logger.info(f"Running verify suite {name} (seed {seed})")
    report = SUITES[name](random.Random(seed), **sizes)
    if not report.passed:
        current_app.logger.warning(
            f"Suite {name}: {report.counterexamples} counterexamples of {report.checked}"
        )
    return report
