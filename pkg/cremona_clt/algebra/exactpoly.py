"""Exact integer arithmetic on homogeneous polynomials in X, Y, Z.

``HomPoly`` is the value type used for the components of plane maps. Terms
are kept in a dict keyed by exponent triples; the canonical order is graded
lexicographic, which for a homogeneous polynomial is plain lexicographic
order on ``(a, b, c)``.

``SparsePoly`` is a small companion type with rational coefficients in any
number of variables. The expression parser produces it, and the generator
families use it for affine formulas such as ``(y + P(x), x)`` before they are
homogenized.
"""

import heapq
import logging
from fractions import Fraction
from math import gcd, lcm
from numbers import Integral, Rational

from sympy.polys.densebasic import dmp_from_dict, dmp_to_dict
from sympy.polys.domains import ZZ
from sympy.polys.euclidtools import dmp_gcd

from ..app_config import DEFAULT_DEGREE_CAP
from ..errors import DegreeCapExceeded, DegreeMismatchError, NonExactDivisionError

logger = logging.getLogger(__name__)

VARIABLES = ("X", "Y", "Z")
_ONE_KEY = (0, 0, 0)

# Power-cache gaps above this are filled by binary powering.
_STEP_LIMIT = 8


def _as_int(value):
    if isinstance(value, bool):
        raise TypeError("booleans are not polynomial coefficients")
    if isinstance(value, Integral):
        return int(value)
    if isinstance(value, Rational) and value.denominator == 1:
        return int(value.numerator)
    raise TypeError(
        f"HomPoly coefficients must be integers, got {value!r}; "
        "use HomPoly.from_terms for rational input"
    )


def _items(terms):
    return terms.items() if hasattr(terms, "items") else terms


# --- raw dict kernels (shared by HomPoly methods and substitute) -----------


def _mul_terms(a, b):
    if not a or not b:
        return {}
    if len(b) == 1:
        [((b0, b1, b2), cb)] = b.items()
        return {(a0 + b0, a1 + b1, a2 + b2): ca * cb for (a0, a1, a2), ca in a.items()}
    if len(a) == 1:
        [((a0, a1, a2), ca)] = a.items()
        return {(a0 + b0, a1 + b1, a2 + b2): ca * cb for (b0, b1, b2), cb in b.items()}
    out = {}
    get = out.get
    for (a0, a1, a2), ca in a.items():
        for (b0, b1, b2), cb in b.items():
            key = (a0 + b0, a1 + b1, a2 + b2)
            out[key] = get(key, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


def _iadd_terms(acc, b, scale=1):
    """``acc += scale * b`` in place."""
    get = acc.get
    for key, c in b.items():
        v = get(key, 0) + scale * c
        if v:
            acc[key] = v
        else:
            acc.pop(key, None)
    return acc


class HomPoly:
    """Homogeneous polynomial in X, Y, Z with integer coefficients.

    The zero polynomial has degree 0 by convention and is accepted wherever a
    polynomial of any degree is.
    """

    __slots__ = ("_terms", "_degree")

    def __init__(self, terms=(), degree=None):
        clean = {}
        for exps, coeff in _items(terms):
            exps = tuple(int(e) for e in exps)
            if len(exps) != 3 or min(exps) < 0:
                raise ValueError(f"invalid exponent triple {exps!r}")
            c = _as_int(coeff)
            clean[exps] = clean.get(exps, 0) + c
        clean = {k: v for k, v in clean.items() if v}
        degrees = {sum(k) for k in clean}
        if len(degrees) > 1:
            raise DegreeMismatchError(
                f"terms of degrees {sorted(degrees)} in one homogeneous polynomial"
            )
        if clean:
            d = degrees.pop()
            if degree is not None and degree != d:
                raise DegreeMismatchError(f"declared degree {degree}, terms have {d}")
        else:
            d = 0
        self._terms = clean
        self._degree = d

    @classmethod
    def _raw(cls, terms, degree):
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._degree = degree if terms else 0
        return obj

    @classmethod
    def from_terms(cls, terms):
        """Build from rational coefficients, clearing denominators by their LCM."""
        return clear_denominators([terms])[0]

    @classmethod
    def monomial(cls, exps, coeff=1):
        return cls({tuple(exps): coeff})

    @classmethod
    def constant(cls, c):
        return cls({_ONE_KEY: c})

    @classmethod
    def variable(cls, name):
        idx = VARIABLES.index(name)
        exps = [0, 0, 0]
        exps[idx] = 1
        return cls._raw({tuple(exps): 1}, 1)

    # --- inspection ---------------------------------------------------------

    @property
    def degree(self):
        return self._degree

    @property
    def terms(self):
        """Terms as ``((a, b, c), coeff)`` pairs in canonical order."""
        return tuple(sorted(self._terms.items(), reverse=True))

    def __len__(self):
        return len(self._terms)

    def coefficient(self, exps):
        return self._terms.get(tuple(exps), 0)

    def is_zero(self):
        return not self._terms

    def is_monomial(self):
        return len(self._terms) == 1

    def leading_term(self):
        if not self._terms:
            return None
        key = max(self._terms)
        return key, self._terms[key]

    def content(self):
        """Nonnegative GCD of the coefficients."""
        return gcd(*self._terms.values()) if self._terms else 0

    def monomial_content(self):
        """Largest monomial X^a Y^b Z^c dividing every term."""
        if not self._terms:
            return _ONE_KEY
        keys = list(self._terms)
        return tuple(min(k[i] for k in keys) for i in range(3))

    def evaluate(self, point):
        x, y, z = (Fraction(v) for v in point)
        return sum(
            (c * x**a * y**b * z**e for (a, b, e), c in self._terms.items()),
            Fraction(0),
        )

    # --- arithmetic ---------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, HomPoly):
            return self._terms == other._terms
        if isinstance(other, Integral):
            return self == HomPoly.constant(other) if other else self.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __neg__(self):
        return HomPoly._raw({k: -v for k, v in self._terms.items()}, self._degree)

    def __add__(self, other):
        if not isinstance(other, HomPoly):
            return NotImplemented
        return add(self, other)

    def __sub__(self, other):
        if not isinstance(other, HomPoly):
            return NotImplemented
        return add(self, -other)

    def __mul__(self, other):
        if isinstance(other, HomPoly):
            return mul(self, other)
        if isinstance(other, Integral) and not isinstance(other, bool):
            return self.scale(int(other))
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, Integral) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = HomPoly._raw({_ONE_KEY: 1}, 0)
        base = self
        while n:
            if n & 1:
                result = mul(result, base)
            n >>= 1
            if n:
                base = mul(base, base)
        return result

    def scale(self, c):
        if not c:
            return HomPoly()
        return HomPoly._raw({k: v * c for k, v in self._terms.items()}, self._degree)

    def exact_quotient_by_integer(self, c):
        out = {}
        for k, v in self._terms.items():
            q, r = divmod(v, c)
            if r:
                raise NonExactDivisionError(f"coefficient {v} not divisible by {c}")
            out[k] = q
        return HomPoly._raw(out, self._degree)

    def multiply_monomial(self, exps):
        a0, a1, a2 = exps
        if not self._terms:
            return self
        return HomPoly._raw(
            {(k0 + a0, k1 + a1, k2 + a2): v for (k0, k1, k2), v in self._terms.items()},
            self._degree + a0 + a1 + a2,
        )

    def divide_monomial(self, exps):
        a0, a1, a2 = exps
        out = {}
        for (k0, k1, k2), v in self._terms.items():
            if k0 < a0 or k1 < a1 or k2 < a2:
                raise NonExactDivisionError("monomial does not divide every term")
            out[(k0 - a0, k1 - a1, k2 - a2)] = v
        return HomPoly._raw(out, self._degree - a0 - a1 - a2)

    def primitive(self):
        """Divide out the integer content and make the leading coefficient positive."""
        if not self._terms:
            return self
        c = self.content()
        if self.leading_term()[1] < 0:
            c = -c
        if c == 1:
            return self
        return self.exact_quotient_by_integer(c)

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"HomPoly({to_text(self)!r})"


_ZERO = HomPoly()


def add(p, q):
    """Sum of two homogeneous polynomials of equal degree."""
    if p.is_zero():
        return q
    if q.is_zero():
        return p
    if p.degree != q.degree:
        raise DegreeMismatchError(f"cannot add degree {p.degree} and degree {q.degree}")
    acc = dict(p._terms)
    _iadd_terms(acc, q._terms)
    return HomPoly._raw(acc, p.degree)


def mul(p, q):
    terms = _mul_terms(p._terms, q._terms)
    return HomPoly._raw(terms, p.degree + q.degree)


def _common_degree(polys):
    degrees = {q.degree for q in polys if not q.is_zero()}
    if len(degrees) != 1:
        if not degrees:
            raise DegreeMismatchError("cannot substitute three zero polynomials")
        raise DegreeMismatchError(
            f"substituted polynomials have different degrees {sorted(degrees)}"
        )
    e = degrees.pop()
    if e < 1:
        raise DegreeMismatchError("substituted polynomials must have degree >= 1")
    return e


class _PowerCache:
    """Powers of the substituted polynomials; short gaps step, long gaps square."""

    def __init__(self, subs):
        self._subs = subs
        self._cache = [{0: {_ONE_KEY: 1}, 1: s} for s in subs]

    def get(self, var, k):
        cache = self._cache[var]
        found = cache.get(k)
        if found is not None:
            return found
        top = max(j for j in cache if j <= k)
        if k - top > _STEP_LIMIT:
            value = _pow_terms(self._subs[var], k)
            cache[k] = value
            return value
        value = cache[top]
        for j in range(top + 1, k + 1):
            value = _mul_terms(value, self._subs[var])
            cache[j] = value
        return value


def _pow_terms(terms, k):
    result = {_ONE_KEY: 1}
    base = terms
    while k:
        if k & 1:
            result = _mul_terms(result, base)
        k >>= 1
        if k:
            base = _mul_terms(base, base)
    return result


def _horner(terms, degree, subs):
    """Evaluate ``p(s0, s1, s2)`` by nested Horner schemes in X, then Y."""
    powers = _PowerCache(subs)
    by_x = {}
    for (a, b, _), coeff in terms.items():
        by_x.setdefault(a, {})[b] = coeff

    def inner(a, column):
        rest = degree - a
        acc = None
        prev = None
        for b in sorted(column, reverse=True):
            term = powers.get(2, rest - b)
            coeff = column[b]
            if acc is None:
                acc = {k: v * coeff for k, v in term.items()}
            else:
                acc = _mul_terms(acc, powers.get(1, prev - b))
                _iadd_terms(acc, term, coeff)
            prev = b
        if prev:
            acc = _mul_terms(acc, powers.get(1, prev))
        return acc

    acc = None
    prev = None
    for a in sorted(by_x, reverse=True):
        column = inner(a, by_x[a])
        if acc is None:
            acc = column
        else:
            acc = _mul_terms(acc, powers.get(0, prev - a))
            _iadd_terms(acc, column)
        prev = a
    if prev:
        acc = _mul_terms(acc, powers.get(0, prev))
    return acc


def substitute(p, s, max_degree=DEFAULT_DEGREE_CAP):
    """Return ``p(s0, s1, s2)``.

    The three substituted polynomials must share a degree ``e >= 1`` (zero
    components are compatible with any degree). The result has degree
    ``deg(p) * e`` or is zero; the degree cap is checked before expanding.
    """
    s = tuple(s)
    if len(s) != 3:
        raise DegreeMismatchError("substitute needs exactly three polynomials")
    e = _common_degree(s)
    if p.is_zero():
        return _ZERO
    target = p.degree * e
    if max_degree is not None and target > max_degree:
        raise DegreeCapExceeded(target, max_degree)
    result = _horner(p._terms, p.degree, [q._terms for q in s])
    return HomPoly._raw(result, target)


# --- gcd and exact division ---------------------------------------------------


def _dehomogenized(p):
    """``p`` at Z = 1 as a sympy dense polynomial in Y over ZZ[X]."""
    return dmp_from_dict({(b, a): ZZ(c) for (a, b, _), c in p._terms.items()}, 1, ZZ)


def _homogenized(f):
    """Homogenize a dense ZZ[X][Y] polynomial at its total degree."""
    raw = {(a, b): int(c) for (b, a), c in dmp_to_dict(f, 1, ZZ).items() if c}
    total = max(a + b for a, b in raw)
    return HomPoly._raw({(a, b, total - a - b): c for (a, b), c in raw.items()}, total)


def gcd_multivar(p, q):
    """Greatest common divisor of two homogeneous polynomials.

    The result is primitive with a positive leading coefficient. At most one
    of ``p`` and ``q`` may be zero.
    """
    if p.is_zero() and q.is_zero():
        raise ValueError("gcd of two zero polynomials is undefined")
    if p.is_zero():
        return q.primitive()
    if q.is_zero():
        return p.primitive()
    mp, mq = p.monomial_content(), q.monomial_content()
    mono = tuple(min(u, v) for u, v in zip(mp, mq))
    pr, qr = p.divide_monomial(mp), q.divide_monomial(mq)
    if pr.is_monomial() or qr.is_monomial():
        core = HomPoly._raw({_ONE_KEY: 1}, 0)
    else:
        # Z no longer divides pr or qr, so dehomogenizing at Z = 1 is faithful.
        core = _homogenized(dmp_gcd(_dehomogenized(pr), _dehomogenized(qr), 1, ZZ))
    return core.multiply_monomial(mono).primitive()


def divide_exact(p, g):
    """Exact quotient ``p / g``; raises NonExactDivisionError on a remainder."""
    if g.is_zero():
        raise NonExactDivisionError("division by the zero polynomial")
    if p.is_zero():
        return _ZERO
    if p.degree < g.degree:
        raise NonExactDivisionError(
            f"degree {p.degree} polynomial is not divisible by degree {g.degree}"
        )
    if g.is_monomial():
        [(exps, c)] = g._terms.items()
        return p.divide_monomial(exps).exact_quotient_by_integer(c)

    g_terms = list(g._terms.items())
    lt_g = max(g._terms)
    lc_g = g._terms[lt_g]
    r = dict(p._terms)
    heap = [tuple(-e for e in key) for key in r]
    heapq.heapify(heap)
    q = {}
    while r:
        key = tuple(-e for e in heapq.heappop(heap))
        c = r.get(key)
        if c is None:
            continue
        m = (key[0] - lt_g[0], key[1] - lt_g[1], key[2] - lt_g[2])
        if min(m) < 0:
            raise NonExactDivisionError("leading monomial not divisible")
        k, rem = divmod(c, lc_g)
        if rem:
            raise NonExactDivisionError("leading coefficient not divisible")
        q[m] = k
        for (g0, g1, g2), gc in g_terms:
            target = (m[0] + g0, m[1] + g1, m[2] + g2)
            v = r.get(target, 0) - k * gc
            if v:
                if target not in r:
                    heapq.heappush(heap, (-target[0], -target[1], -target[2]))
                r[target] = v
            else:
                r.pop(target, None)
    return HomPoly._raw(q, p.degree - g.degree)


def content(p):
    return p.content()


def primitive(p):
    """Return ``(content, primitive part)``; the content carries the sign."""
    part = p.primitive()
    if part.is_zero():
        return 0, part
    return p.leading_term()[1] // part.leading_term()[1], part


def monomial_content(p):
    return p.monomial_content()


def dehomogenize(p):
    """Affine polynomial ``p(x, y, 1)``."""
    return SparsePoly({(a, b): c for (a, b, _), c in p._terms.items()}, 2)


def homogenize(q, degree=None):
    """``Z^degree * q(X/Z, Y/Z)`` with denominators cleared; degree defaults to deg q."""
    if degree is None:
        degree = max(q.degree, 0)
    return HomPoly.from_terms(q.homogenize(degree))


def clear_denominators(term_maps):
    """Scale several rational term maps by one common LCM of denominators.

    Projective scaling makes this lossless for map components.
    """
    fractions = [{tuple(k): Fraction(v) for k, v in _items(t)} for t in term_maps]
    den = 1
    for t in fractions:
        for v in t.values():
            den = lcm(den, v.denominator)
    return [HomPoly({k: v * den for k, v in t.items()}) for t in fractions]


# --- text form -----------------------------------------------------------------


def _monomial_text(exps, names):
    parts = []
    for name, e in zip(names, exps):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _terms_text(terms, names):
    if not terms:
        return "0"
    pieces = []
    for i, (exps, c) in enumerate(terms):
        mono = _monomial_text(exps, names)
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if i == 0:
            pieces.append(f"-{body}" if c < 0 else body)
        else:
            pieces.append(f" - {body}" if c < 0 else f" + {body}")
    return "".join(pieces)


def to_text(p):
    """Canonical text form, e.g. ``X^2 + 2*X*Y - Y^2``."""
    return _terms_text(p.terms, VARIABLES)


# --- rational sparse polynomials ----------------------------------------------------


class SparsePoly:
    """Polynomial with rational coefficients in ``nvars`` variables.

    Affine formulas use two variables ``(x, y)``. The zero polynomial has
    degree -1 here so that ``deg(P) >= 2`` checks read naturally.
    """

    __slots__ = ("_terms", "nvars")

    def __init__(self, terms=(), nvars=2):
        clean = {}
        for exps, coeff in _items(terms):
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or min(exps, default=0) < 0:
                raise ValueError(f"invalid exponent tuple {exps!r} for {nvars} variables")
            clean[exps] = clean.get(exps, Fraction(0)) + Fraction(coeff)
        self._terms = {k: v for k, v in clean.items() if v}
        self.nvars = nvars

    @classmethod
    def _raw(cls, terms, nvars):
        obj = cls.__new__(cls)
        obj._terms = terms
        obj.nvars = nvars
        return obj

    @classmethod
    def constant(cls, c, nvars=2):
        return cls({(0,) * nvars: c}, nvars)

    @classmethod
    def variable(cls, index, nvars=2):
        exps = [0] * nvars
        exps[index] = 1
        return cls._raw({tuple(exps): Fraction(1)}, nvars)

    @property
    def terms(self):
        return tuple(sorted(self._terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True))

    @property
    def degree(self):
        return max((sum(k) for k in self._terms), default=-1)

    def degree_in(self, index):
        return max((k[index] for k in self._terms), default=-1)

    def is_zero(self):
        return not self._terms

    def is_constant(self):
        return self.degree <= 0

    def constant_value(self):
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def is_homogeneous(self):
        return len({sum(k) for k in self._terms}) <= 1

    def _check(self, other):
        if isinstance(other, SparsePoly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        if isinstance(other, Rational):
            return SparsePoly.constant(other, self.nvars)
        return None

    def __eq__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self._terms.items())))

    def __neg__(self):
        return SparsePoly._raw({k: -v for k, v in self._terms.items()}, self.nvars)

    def __add__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        out = dict(self._terms)
        for k, v in other._terms.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return SparsePoly._raw(out, self.nvars)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        out = {}
        for ka, va in self._terms.items():
            for kb, vb in other._terms.items():
                key = tuple(x + y for x, y in zip(ka, kb))
                out[key] = out.get(key, 0) + va * vb
        return SparsePoly._raw({k: v for k, v in out.items() if v}, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, Integral) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = SparsePoly.constant(1, self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c):
        return self * Fraction(c)

    def compose(self, polys):
        """Substitute ``polys[i]`` for variable ``i``."""
        if len(polys) != self.nvars:
            raise ValueError(f"need {self.nvars} polynomials to substitute")
        target = polys[0].nvars if polys else self.nvars
        result = SparsePoly({}, target)
        cache = {}
        for exps, c in self._terms.items():
            term = SparsePoly.constant(c, target)
            for i, e in enumerate(exps):
                if e:
                    key = (i, e)
                    if key not in cache:
                        cache[key] = polys[i] ** e
                    term = term * cache[key]
            result = result + term
        return result

    def homogenize(self, degree):
        """Rational term map of ``Z^degree * p(X/Z, Y/Z)`` (two variables only)."""
        if self.nvars != 2:
            raise ValueError("homogenize applies to affine polynomials in (x, y)")
        if degree < self.degree:
            raise DegreeMismatchError(f"cannot homogenize degree {self.degree} at {degree}")
        return {(a, b, degree - a - b): c for (a, b), c in self._terms.items()}

    def to_hompoly(self):
        """Clear denominators of a homogeneous three-variable polynomial."""
        if self.nvars != 3:
            raise ValueError("to_hompoly needs a polynomial in (X, Y, Z)")
        if not self.is_homogeneous():
            raise DegreeMismatchError("polynomial is not homogeneous")
        return HomPoly.from_terms(self._terms)

    def __str__(self):
        names = ("x", "y") if self.nvars == 2 else VARIABLES[: self.nvars]
        return _terms_text(self.terms, names)

    def __repr__(self):
        return f"SparsePoly({str(self)!r})"


AFFINE_X = SparsePoly.variable(0, 2)
AFFINE_Y = SparsePoly.variable(1, 2)
