"""Rational self-maps of the projective plane, in lowest terms.

A map is a triple of homogeneous integer polynomials with no common factor,
scaled to integer content 1 with the first nonzero component's leading
coefficient positive. Every constructor funnels through ``make_map`` so that
``degree`` and equality are always the reduced ones.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from ..app_config import DEFAULT_DEGREE_CAP
from ..errors import DegreeMismatchError, MapConstructionError, SingularMatrixError
from .exactpoly import (
    HomPoly,
    SparsePoly,
    clear_denominators,
    dehomogenize,
    divide_exact,
    gcd_multivar,
    substitute,
    to_text,
)
from .expr_parser import parse_hompoly, split_map_text

logger = logging.getLogger(__name__)


class RationalMap:
    """Reduced triple ``[P0 : P1 : P2]``; construct with ``make_map``."""

    __slots__ = ("components", "degree")

    def __init__(self, components, degree):
        self.components = tuple(components)
        self.degree = degree

    def __eq__(self, other):
        if not isinstance(other, RationalMap):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __str__(self):
        return map_to_text(self)

    def __repr__(self):
        return f"RationalMap({map_to_text(self)!r})"

    def compose(self, other, max_degree=DEFAULT_DEGREE_CAP):
        """``self ∘ other``."""
        return compose(self, other, max_degree)


def make_map(components):
    """Reduce a raw triple of equal-degree homogeneous polynomials to lowest terms."""
    components = tuple(components)
    if len(components) != 3:
        raise MapConstructionError("a plane map needs exactly three components")
    nonzero = [p for p in components if not p.is_zero()]
    if not nonzero:
        raise MapConstructionError("all three components are zero")
    degrees = {p.degree for p in nonzero}
    if len(degrees) != 1:
        raise DegreeMismatchError(f"components have different degrees {sorted(degrees)}")

    # Start from the sparsest component; stop as soon as the gcd is constant.
    ordered = sorted(nonzero, key=len)
    g = ordered[0].primitive()
    for p in ordered[1:]:
        if g.degree == 0:
            break
        g = gcd_multivar(g, p)
    if g.degree > 0:
        components = tuple(divide_exact(p, g) for p in components)

    content = 0
    for p in components:
        content = gcd(content, p.content())
    lead = next(p for p in components if not p.is_zero()).leading_term()[1]
    if lead < 0:
        content = -content
    if content != 1:
        components = tuple(p.exact_quotient_by_integer(content) for p in components)
    degree = next(p for p in components if not p.is_zero()).degree
    if degree == 0:
        raise MapConstructionError("triple reduces to a constant map")
    return RationalMap(components, degree)


def identity():
    return RationalMap(tuple(HomPoly.variable(v) for v in ("X", "Y", "Z")), 1)


def compose_detailed(f, g, max_degree=DEFAULT_DEGREE_CAP):
    """Return ``(f ∘ g, raw degree)``; the raw degree is ``deg f * deg g``.

    The reduced degree falls below the raw one exactly when the substituted
    triple acquired a common factor.
    """
    raw = [substitute(p, g.components, max_degree) for p in f.components]
    if all(p.is_zero() for p in raw):
        raise MapConstructionError("composition undefined: g maps into the base locus of f")
    h = make_map(raw)
    raw_degree = f.degree * g.degree
    if h.degree < raw_degree:
        logger.debug("Composition dropped degree %s -> %s", raw_degree, h.degree)
    return h, raw_degree


def compose(f, g, max_degree=DEFAULT_DEGREE_CAP):
    """Return ``f ∘ g`` in lowest terms."""
    return compose_detailed(f, g, max_degree)[0]


def iterate(f, n, max_degree=DEFAULT_DEGREE_CAP):
    """``f^n`` by sequential left composition, ``f^k = f^(k-1) ∘ f``."""
    if n < 0:
        raise ValueError("iterate needs n >= 0")
    result = identity()
    for _ in range(n):
        result = compose(result, f, max_degree)
    return result


def iterates(f, max_degree=DEFAULT_DEGREE_CAP):
    """Yield ``f, f^2, f^3, ...`` until the degree cap stops the sequence."""
    current = f
    while True:
        yield current
        current = compose(current, f, max_degree)


def degree(f):
    return f.degree


def projectively_equal(f, g):
    return f.components == g.components


# --- constructors ----------------------------------------------------------


def _joint_map(term_maps):
    return make_map(clear_denominators(term_maps))


def from_affine_pair(p, q):
    """Homogenize the polynomial map ``(x, y) -> (p, q)``."""
    d = max(p.degree, q.degree)
    if d < 1:
        raise MapConstructionError("both affine components are constant")
    return _joint_map([p.homogenize(d), q.homogenize(d), SparsePoly.constant(1).homogenize(d)])


def from_rational_pair(r1, r2):
    """Map ``(x, y) -> (N1/D1, N2/D2)`` for pairs ``r_i = (N_i, D_i)``.

    Each fraction is homogenized at ``k_i = max(deg N_i, deg D_i)``; the
    triple ``[N1 D2 : N2 D1 : D1 D2]`` is then reduced.
    """
    (n1, d1), (n2, d2) = r1, r2
    if d1.is_zero() or d2.is_zero():
        raise MapConstructionError("zero denominator")
    k1 = max(n1.degree, d1.degree, 0)
    k2 = max(n2.degree, d2.degree, 0)
    if k1 + k2 == 0:
        raise MapConstructionError("both components are constant")
    N1, D1, N2, D2 = clear_denominators(
        [n1.homogenize(k1), d1.homogenize(k1), n2.homogenize(k2), d2.homogenize(k2)]
    )
    return make_map([N1 * D2, N2 * D1, D1 * D2])


@dataclass(frozen=True)
class MonomialMatrix:
    """Integer 2x2 matrix ``((a, b), (c, d))`` acting by ``(x, y) -> (x^a y^b, x^c y^d)``."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.determinant == 0:
            raise SingularMatrixError(f"matrix {self.rows} is singular")

    @classmethod
    def from_rows(cls, rows):
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @property
    def rows(self):
        return ((self.a, self.b), (self.c, self.d))

    @property
    def determinant(self):
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other):
        return MonomialMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self):
        """Integer inverse; exists only when the determinant is +1 or -1."""
        det = self.determinant
        if det not in (1, -1):
            raise SingularMatrixError(f"matrix {self.rows} is not invertible over Z")
        return MonomialMatrix(self.d * det, -self.b * det, -self.c * det, self.a * det)


def monomial_lift_exponents(m):
    """Exponent triples of the reduced lift of the monomial map ``m``."""
    rows = ((m.a, m.b, -m.a - m.b), (m.c, m.d, -m.c - m.d), (0, 0, 0))
    shift = [-min(r[i] for r in rows) for i in range(3)]
    return tuple(tuple(r[i] + shift[i] for i in range(3)) for r in rows)


def monomial_degree(m):
    """Degree of the monomial map: max(0,-a,-c) + max(0,-b,-d) + max(0,a+b,c+d)."""
    return max(0, -m.a, -m.c) + max(0, -m.b, -m.d) + max(0, m.a + m.b, m.c + m.d)


def from_monomial_matrix(m):
    if not isinstance(m, MonomialMatrix):
        m = MonomialMatrix.from_rows(m)
    exps = monomial_lift_exponents(m)
    return make_map([HomPoly.monomial(e) for e in exps])


def _as_fraction_matrix(rows):
    matrix = [[Fraction(v) for v in row] for row in rows]
    if len(matrix) != 3 or any(len(r) != 3 for r in matrix):
        raise MapConstructionError("linear maps need a 3x3 matrix")
    return matrix


def determinant3(rows):
    m = _as_fraction_matrix(rows)
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def inverse3(rows):
    m = _as_fraction_matrix(rows)
    det = determinant3(m)
    if det == 0:
        raise SingularMatrixError("linear map matrix is singular")
    cof = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r = [k for k in range(3) if k != i]
            c = [k for k in range(3) if k != j]
            minor = m[r[0]][c[0]] * m[r[1]][c[1]] - m[r[0]][c[1]] * m[r[1]][c[0]]
            cof[i][j] = (-1) ** (i + j) * minor
    return [[cof[j][i] / det for j in range(3)] for i in range(3)]


def from_linear_matrix(rows):
    """Projective linear map ``[X : Y : Z] -> A (X, Y, Z)``."""
    m = _as_fraction_matrix(rows)
    if determinant3(m) == 0:
        raise SingularMatrixError("linear map matrix is singular")
    units = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    term_maps = [{units[j]: m[i][j] for j in range(3) if m[i][j]} for i in range(3)]
    return _joint_map(term_maps)


def affine_pair(f):
    """Inverse of ``from_affine_pair`` for maps whose last component is ``c * Z^d``."""
    last = f.components[2]
    d = f.degree
    if not last.is_monomial() or last.leading_term()[0] != (0, 0, d):
        raise MapConstructionError("map is not polynomial in the affine chart Z = 1")
    c = Fraction(last.leading_term()[1])
    return tuple(dehomogenize(p).scale(1 / c) for p in f.components[:2])


# --- text form ---------------------------------------------------------------


def map_to_text(f):
    return "[" + " : ".join(to_text(p) for p in f.components) + "]"


def parse_map(text):
    """Parse ``[P0 : P1 : P2]`` and reduce it."""
    return make_map([parse_hompoly(part) for part in split_map_text(text)])
