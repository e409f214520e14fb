"""Named generator families with exact metadata.

Each constructor returns ``Generator`` objects carrying the reduced map, a
family tag, the boundary eigenvalue ``lam`` where one is known, linked
inverses and, when a product rule for degrees is certified, a fast
representation (a free-group letter or a 2x2 integer matrix).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Tuple, Union

from ..algebra.cremona import (
    MonomialMatrix,
    RationalMap,
    compose,
    from_affine_pair,
    from_linear_matrix,
    from_monomial_matrix,
    from_rational_pair,
    identity,
    inverse3,
    monomial_degree,
)
from ..algebra.exactpoly import AFFINE_X, AFFINE_Y, SparsePoly
from ..app_config import INVERSE_SUFFIX
from ..errors import BackendError, FamilyError

logger = logging.getLogger(__name__)


class Family(str, Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    LINEAL = "lineal"
    NONELEMENTARY_FREE = "nonelementary_free"
    ARITHMETIC = "arithmetic"


@dataclass(frozen=True)
class FreeLetter:
    """Letter of a free basis; ``sign`` is +1 for a generator and -1 for its inverse.

    ``basis`` is the certificate shared by letters for which the degree of a
    reduced word is the product of its letters' degrees.
    """

    symbol: str
    sign: int
    degree: int
    basis: str

    @property
    def log_degree(self):
        return math.log(self.degree)

    def inverse(self):
        return FreeLetter(self.symbol, -self.sign, self.degree, self.basis)

    def is_inverse_of(self, other):
        return (
            self.symbol == other.symbol
            and self.basis == other.basis
            and self.sign == -other.sign
        )


@dataclass(frozen=True)
class MatrixRepr:
    matrix: MonomialMatrix


FastRepr = Union[FreeLetter, MatrixRepr]


@dataclass(eq=False)
class Generator:
    name: str
    map: RationalMap
    family: Family
    lam: Optional[Fraction] = None
    fast: Optional[FastRepr] = None
    inverse: Optional["Generator"] = field(default=None, repr=False)

    def __post_init__(self):
        self.family = Family(self.family)
        if self.lam is not None:
            self.lam = Fraction(self.lam)
            if self.lam <= 0:
                raise FamilyError(f"{self.name}: lambda must be positive")
            if self.family not in (Family.LINEAL, Family.PARABOLIC):
                raise FamilyError(
                    f"{self.name}: lambda is only defined for lineal or parabolic generators"
                )
            if self.family is Family.PARABOLIC and self.lam != 1:
                raise FamilyError(f"{self.name}: parabolic generators have lambda = 1")
        if isinstance(self.fast, FreeLetter) and self.fast.degree != self.map.degree:
            raise FamilyError(
                f"{self.name}: letter degree {self.fast.degree} "
                f"differs from map degree {self.map.degree}"
            )

    @property
    def degree(self):
        return self.map.degree

    @property
    def basis(self):
        return self.fast.basis if isinstance(self.fast, FreeLetter) else None


def link_inverses(g, h):
    g.inverse = h
    h.inverse = g
    return g, h


def _require_univariate(p, what):
    if not isinstance(p, SparsePoly) or p.nvars != 2:
        raise FamilyError(f"{what} must be a polynomial in x")
    if p.degree_in(1) > 0:
        raise FamilyError(f"{what} must not involve y")
    return p


def _in_y(p):
    return p.compose([AFFINE_Y, AFFINE_Y])


# --- building blocks ----------------------------------------------------------


def cat_map():
    """``a = (2x + y, x + y)``."""
    return from_affine_pair(2 * AFFINE_X + AFFINE_Y, AFFINE_X + AFFINE_Y)


def cat_map_inverse():
    """``a^-1 = (x - y, -x + 2y)``."""
    return from_affine_pair(AFFINE_X - AFFINE_Y, 2 * AFFINE_Y - AFFINE_X)


def _power(f, k):
    result = identity()
    for _ in range(k):
        result = compose(result, f)
    return result


def elementary(P):
    """``e_P = (x + P(y), y)``."""
    P = _require_univariate(P, "P")
    return from_affine_pair(AFFINE_X + _in_y(P), AFFINE_Y)


# --- families -------------------------------------------------------------------


def _henon_maps(P):
    h = from_affine_pair(AFFINE_Y + P, AFFINE_X)
    h_inv = from_affine_pair(AFFINE_Y, AFFINE_X - _in_y(P))
    return h, h_inv


def henon(P, name="h", basis=None):
    """Hénon pair ``h = (y + P(x), x)`` and ``h^-1 = (y, x - P(y))``."""
    P = _require_univariate(P, "P")
    d = P.degree
    if d < 2:
        raise FamilyError(f"Hénon polynomial must have degree >= 2, got {d}")
    h_map, h_inv_map = _henon_maps(P)
    basis = basis or f"henon:{name}"
    letter = FreeLetter(name, 1, d, basis)
    h = Generator(name, h_map, Family.LINEAL, Fraction(d), letter)
    h_inv = Generator(
        name + INVERSE_SUFFIX, h_inv_map, Family.LINEAL, Fraction(1, d), letter.inverse()
    )
    logger.debug(f"Built Hénon pair {name} of degree {d}")
    return link_inverses(h, h_inv)


def henon_system(polynomials, names=None):
    """Several Hénon pairs on one free basis.

    The i-th pair (counting from 0) is conjugated by ``a^i``, ``a`` the cat
    map, so that every freely reduced word in all the letters alternates
    between elementary and affine pieces; the degree of such a word is the
    product of its letters' degrees.
    """
    polynomials = list(polynomials)
    if not polynomials:
        raise FamilyError("henon_system needs at least one polynomial")
    names = list(names) if names else [f"h{i + 1}" for i in range(len(polynomials))]
    if len(names) != len(polynomials) or len(set(names)) != len(names):
        raise FamilyError("henon_system needs one distinct name per polynomial")
    if len(polynomials) == 1:
        return [henon(polynomials[0], names[0])]

    basis = "henon_system:" + ",".join(names)
    a, a_inv = cat_map(), cat_map_inverse()
    pairs = []
    for i, (P, name) in enumerate(zip(polynomials, names)):
        P = _require_univariate(P, f"polynomials[{i}]")
        d = P.degree
        if d < 2:
            raise FamilyError(f"polynomials[{i}] must have degree >= 2, got {d}")
        h_map, h_inv_map = _henon_maps(P)
        if i:
            conj, conj_inv = _power(a, i), _power(a_inv, i)
            h_map = compose(compose(conj, h_map), conj_inv)
            h_inv_map = compose(compose(conj, h_inv_map), conj_inv)
        letter = FreeLetter(name, 1, d, basis)
        h = Generator(name, h_map, Family.NONELEMENTARY_FREE, None, letter)
        h_inv = Generator(
            name + INVERSE_SUFFIX,
            h_inv_map,
            Family.NONELEMENTARY_FREE,
            None,
            letter.inverse(),
        )
        pairs.append(link_inverses(h, h_inv))
    return pairs


def _jonquiere_map(a, b, alpha, beta, gamma, delta):
    one = SparsePoly.constant(1)
    first = (a * AFFINE_X + b, one)
    second = (alpha * AFFINE_Y + beta, gamma * AFFINE_Y + delta)
    return from_rational_pair(first, second)


def jonquiere(a, b, alpha, beta, gamma, delta, name="j"):
    """``(x, y) -> (ax + b, (alpha(x) y + beta(x)) / (gamma(x) y + delta(x)))``."""
    a, b = Fraction(a), Fraction(b)
    alpha, beta, gamma, delta = (
        _require_univariate(p, label)
        for p, label in zip(
            (alpha, beta, gamma, delta), ("alpha", "beta", "gamma", "delta")
        )
    )
    if a == 0:
        raise FamilyError("jonquiere: a must be nonzero")
    if (alpha * delta - beta * gamma).is_zero():
        raise FamilyError("jonquiere: alpha*delta - beta*gamma vanishes identically")
    if gamma.is_constant() and delta.is_constant():
        raise FamilyError("jonquiere: gamma or delta must be nonconstant")

    forward = _jonquiere_map(a, b, alpha, beta, gamma, delta)
    # Inverse: x -> (x - b)/a, and the Möbius inverse [[delta, -beta], [-gamma, alpha]].
    s = (AFFINE_X - b) * (1 / a)
    back = [p.compose([s, AFFINE_Y]) for p in (delta, -beta, -gamma, alpha)]
    backward = _jonquiere_map(1 / a, -b / a, *back)

    g = Generator(name, forward, Family.PARABOLIC, Fraction(1))
    g_inv = Generator(name + INVERSE_SUFFIX, backward, Family.PARABOLIC, Fraction(1))
    return link_inverses(g, g_inv)[0]


def monomial(matrix, family=Family.NONELEMENTARY_FREE, name="m", lam=None):
    """Monomial map of an integer matrix; the inverse is linked when ``|det| = 1``."""
    m = matrix if isinstance(matrix, MonomialMatrix) else MonomialMatrix.from_rows(matrix)
    g = Generator(name, from_monomial_matrix(m), family, lam, MatrixRepr(m))
    if abs(m.determinant) == 1:
        m_inv = m.inverse()
        inv_lam = None if lam is None else 1 / Fraction(lam)
        g_inv = Generator(
            name + INVERSE_SUFFIX,
            from_monomial_matrix(m_inv),
            family,
            inv_lam,
            MatrixRepr(m_inv),
        )
        link_inverses(g, g_inv)
    return g


def linear(matrix, name="e"):
    """Projective linear map of an invertible 3x3 rational matrix."""
    g = Generator(name, from_linear_matrix(matrix), Family.ELLIPTIC)
    g_inv = Generator(
        name + INVERSE_SUFFIX, from_linear_matrix(inverse3(matrix)), Family.ELLIPTIC
    )
    return link_inverses(g, g_inv)[0]


def affine(p, q, family, name="f", lam=None):
    """Polynomial map ``(p, q)`` with a caller-supplied family tag."""
    return Generator(name, from_affine_pair(p, q), family, lam)


def arithmetic_pair(P1, P2, names=("F", "G")):
    """``F = e1 ∘ a`` and ``G = a ∘ e2 ∘ a^2`` with ``e_i = (x + P_i(y), y)``.

    Only positive letters are produced; every positive word alternates
    between elementary and affine pieces, so its degree is the product of
    the letters' degrees.
    """
    P1 = _require_univariate(P1, "P1")
    P2 = _require_univariate(P2, "P2")
    d1, d2 = P1.degree, P2.degree
    if min(d1, d2) < 2:
        raise FamilyError(f"arithmetic_pair needs degrees >= 2, got {d1} and {d2}")
    if (P1 + P2).degree != max(d1, d2):
        raise FamilyError("arithmetic_pair: P1 + P2 drops degree")

    a = cat_map()
    f_map = compose(elementary(P1), a)
    g_map = compose(compose(a, elementary(P2)), compose(a, a))
    if (f_map.degree, g_map.degree) != (d1, d2):
        raise FamilyError(
            f"arithmetic_pair: expected degrees ({d1}, {d2}), "
            f"got ({f_map.degree}, {g_map.degree})"
        )
    basis = "arithmetic:" + ",".join(names)
    F = Generator(names[0], f_map, Family.ARITHMETIC, None, FreeLetter(names[0], 1, d1, basis))
    G = Generator(names[1], g_map, Family.ARITHMETIC, None, FreeLetter(names[1], 1, d2, basis))
    return F, G


# --- fast states ------------------------------------------------------------------


@dataclass(frozen=True)
class FreeWord:
    """Freely reduced word of FreeLetters."""

    letters: Tuple[FreeLetter, ...] = ()

    def append(self, letter):
        if self.letters and self.letters[-1].is_inverse_of(letter):
            return FreeWord(self.letters[:-1])
        return FreeWord(self.letters + (letter,))

    def __len__(self):
        return len(self.letters)


@dataclass(frozen=True)
class MatrixState:
    matrix: MonomialMatrix = field(default_factory=MonomialMatrix.identity)


def fast_kind(generator):
    if isinstance(generator.fast, FreeLetter):
        return "free"
    if isinstance(generator.fast, MatrixRepr):
        return "matrix"
    return None


def fast_initial(kind):
    if kind == "free":
        return FreeWord()
    if kind == "matrix":
        return MatrixState()
    raise BackendError(f"no fast backend of kind {kind!r}")


def fast_compose(state, generator):
    """Right-multiply the state by the generator's fast representation."""
    rep = generator.fast
    if isinstance(rep, FreeLetter):
        if state is None:
            state = FreeWord()
        if not isinstance(state, FreeWord):
            raise BackendError(f"{generator.name}: free letter applied to a matrix state")
        if state.letters and state.letters[0].basis != rep.basis:
            raise BackendError(f"{generator.name}: letter from a different free basis")
        return state.append(rep)
    if isinstance(rep, MatrixRepr):
        if state is None:
            state = MatrixState()
        if not isinstance(state, MatrixState):
            raise BackendError(f"{generator.name}: matrix applied to a free-word state")
        return MatrixState(state.matrix @ rep.matrix)
    raise BackendError(f"{generator.name} has no fast representation")


def fast_degree(state):
    """Exact integer degree of the map represented by a fast state."""
    if isinstance(state, FreeWord):
        return math.prod(letter.degree for letter in state.letters)
    if isinstance(state, MatrixState):
        return monomial_degree(state.matrix)
    raise BackendError(f"not a fast state: {state!r}")


def fast_log_degree(state):
    return math.log(fast_degree(state))


def cyclically_reduce(letters):
    """Strip matching first/last inverse pairs from a freely reduced word."""
    letters = tuple(letters)
    i, j = 0, len(letters) - 1
    while i < j and letters[i].is_inverse_of(letters[j]):
        i += 1
        j -= 1
    return letters[i : j + 1]  # noqa: E203
