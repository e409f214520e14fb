import itertools
import math
import random
from fractions import Fraction

import pytest

from cremona_clt.algebra.cremona import MonomialMatrix, from_monomial_matrix, parse_map
from cremona_clt.algebra.exactpoly import AFFINE_X, SparsePoly
from cremona_clt.algebra.expr_parser import parse_polynomial
from cremona_clt.errors import BackendError
from cremona_clt.services import families
from cremona_clt.services.dyndeg import (
    estimate,
    lambda1_fekete,
    lambda1_lineal,
    lambda1_word,
    lineal_degree_bound,
    log_lambda1_letters,
    log_spectral_radius,
    spectral_radius,
)
from cremona_clt.services.families import FreeWord
from cremona_clt.services.verify_service import random_monomial_matrix

GOLDEN = (1 + math.sqrt(5)) / 2
FIBONACCI = MonomialMatrix.from_rows([[1, 1], [1, 0]])


def test_spectral_radius():
    assert spectral_radius(FIBONACCI).value == pytest.approx(GOLDEN)
    assert spectral_radius(FIBONACCI).exact
    # elliptic rotation: complex eigenvalues of modulus 1
    assert spectral_radius(MonomialMatrix.from_rows([[0, -1], [1, 0]])).value == 1.0
    assert spectral_radius(MonomialMatrix.from_rows([[1, 2], [0, 1]])).value == 1.0


def test_log_spectral_radius_for_huge_entries():
    m = FIBONACCI
    for _ in range(11):
        m = m @ m
    # m = FIBONACCI^2048
    assert log_spectral_radius(m) == pytest.approx(2048 * math.log(GOLDEN), rel=1e-12)


def test_fekete_bound_on_monomial_map():
    f = from_monomial_matrix(FIBONACCI)
    result = lambda1_fekete(f, 10)
    assert not result.exact
    assert result.value == pytest.approx(144 ** (1 / 10), abs=1e-12)
    assert result.value == pytest.approx(1.64375, abs=1e-5)
    assert [k for k, _ in result.upper_bounds] == list(range(1, 11))
    assert not result.truncated


def test_fekete_bound_approaches_exact_value():
    f = from_monomial_matrix(FIBONACCI)
    result = lambda1_fekete(f, 20, max_degree=None)
    assert GOLDEN <= result.value < GOLDEN + 0.05


def test_fekete_truncates_at_cap():
    h = parse_map("[Y*Z + X^2 : X*Z : Z^2]")
    result = lambda1_fekete(h, 10, max_degree=64)
    assert result.truncated
    assert len(result.upper_bounds) == 6
    assert result.value == pytest.approx(2.0)


def test_fekete_budget_must_be_positive():
    with pytest.raises(ValueError):
        lambda1_fekete(from_monomial_matrix(FIBONACCI), 0)


def test_word_route(quadratic):
    h, h_inv = families.henon(quadratic)
    g, g_inv = families.henon(SparsePoly({(3, 0): 1}, 2), name="g", basis=h.basis)
    word = FreeWord((h.fast, g.fast, h_inv.fast))
    # conjugate of g: dynamical degree 3
    assert lambda1_word(word).value == 3.0
    assert log_lambda1_letters((h.fast, g.fast)) == pytest.approx(math.log(6))
    with pytest.raises(BackendError):
        lambda1_word([FIBONACCI])


def test_lineal_route():
    assert lambda1_lineal(Fraction(1, 3)).value == 3.0
    assert lambda1_lineal(2).value == 2.0
    with pytest.raises(ValueError):
        lambda1_lineal(0)
    assert lineal_degree_bound(Fraction(4), 2)
    assert not lineal_degree_bound(Fraction(1, 5), 2)


def test_estimate_dispatch(quadratic):
    h = families.henon(quadratic)[0]
    assert estimate(h).route == "lineal"
    assert estimate(h).value == 2.0
    assert estimate(families.monomial(FIBONACCI)).route == "spectral_radius"
    system = families.henon_system([quadratic, SparsePoly({(3, 0): 1}, 2)])
    assert estimate(system[1][0]).route == "word"
    one = SparsePoly.constant(1)
    j = families.jonquiere(1, 1, one, SparsePoly(), AFFINE_X, one)
    assert estimate(j).route == "lineal"
    e = families.linear([[0, 1, 0], [-1, 0, 0], [0, 0, 1]])
    result = estimate(e, budget=4)
    assert result.route == "fekete"
    assert result.value == 1.0
    with pytest.raises(TypeError):
        estimate("h")


def random_word(rng, letters, length):
    word = FreeWord()
    for _ in range(length):
        word = word.append(rng.choice(letters))
    return word


def test_word_degree_is_conjugation_invariant():
    rng = random.Random(31)
    pairs = families.henon_system([parse_polynomial(p) for p in ("x^2", "x^3", "x^5")])
    letters = [g.fast for pair in pairs for g in pair]
    for _ in range(200):
        w = random_word(rng, letters, rng.randint(0, 8))
        u = random_word(rng, letters, rng.randint(1, 6))
        conjugate = FreeWord()
        inverse_u = tuple(letter.inverse() for letter in reversed(u.letters))
        for letter in u.letters + w.letters + inverse_u:
            conjugate = conjugate.append(letter)
        assert lambda1_word(conjugate).value == lambda1_word(w).value


@pytest.mark.parametrize("seed", range(5))
def test_fekete_bounds_form_a_decreasing_envelope(seed):
    m = random_monomial_matrix(random.Random(seed), 2)
    result = lambda1_fekete(from_monomial_matrix(m), 6, None)
    bounds = [b for _, b in result.upper_bounds]
    envelope = list(itertools.accumulate(bounds, min))
    assert all(a >= b for a, b in zip(envelope, envelope[1:]))
    assert result.value == envelope[-1]
    assert result.value >= spectral_radius(m).value - 1e-9
    degrees = {k: round(b**k) for k, b in result.upper_bounds}
    for j in range(1, 6):
        for k in range(1, 7 - j):
            assert degrees[j + k] <= degrees[j] * degrees[k]
