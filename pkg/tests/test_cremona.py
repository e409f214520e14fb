import logging

import pytest

from cremona_clt.algebra.cremona import (
    MonomialMatrix,
    affine_pair,
    compose,
    compose_detailed,
    from_affine_pair,
    from_linear_matrix,
    from_monomial_matrix,
    from_rational_pair,
    identity,
    iterate,
    make_map,
    map_to_text,
    parse_map,
    projectively_equal,
)
from cremona_clt.algebra.expr_parser import parse_hompoly as P
from cremona_clt.algebra.expr_parser import parse_polynomial, parse_rational
from cremona_clt.errors import (
    DegreeCapExceeded,
    DegreeMismatchError,
    MapConstructionError,
    ParseError,
    SingularMatrixError,
)

SIGMA = "[Y*Z : X*Z : X*Y]"


def raw(*texts):
    return [P(t) for t in texts]


def henon_map():
    return from_affine_pair(parse_polynomial("y + x^2"), parse_polynomial("x"))


def test_make_map_clears_common_factor():
    f = make_map(raw("X^2*Z", "X*Y*Z", "X*Z^2"))
    assert f == identity()
    assert f.degree == 1


def test_make_map_keeps_reduced_triple():
    f = make_map(raw("Y*Z", "X*Z", "X*Y"))
    assert f.components == tuple(raw("Y*Z", "X*Z", "X*Y"))
    assert f.degree == 2


@pytest.mark.parametrize("triple", [("2*X", "2*Y", "2*Z"), ("-X", "-Y", "-Z")])
def test_make_map_normalizes_content_and_sign(triple):
    assert make_map(raw(*triple)) == identity()


def test_make_map_errors():
    with pytest.raises(DegreeMismatchError):
        make_map(raw("X^2", "Y", "Z"))
    with pytest.raises(MapConstructionError):
        make_map(raw("0", "0", "0"))
    with pytest.raises(MapConstructionError):
        make_map(raw("X", "X", "X"))


def test_from_affine_pair():
    assert henon_map() == parse_map("[Y*Z + X^2 : X*Z : Z^2]")
    assert henon_map().degree == 2
    cat = from_affine_pair(parse_polynomial("2*x + y"), parse_polynomial("x + y"))
    assert cat == parse_map("[2*X + Y : X + Y : Z]")
    assert from_affine_pair(parse_polynomial("x"), parse_polynomial("y")) == identity()


def test_affine_pair_inverts_from_affine_pair():
    p, q = affine_pair(henon_map())
    assert p == parse_polynomial("y + x^2")
    assert q == parse_polynomial("x")
    with pytest.raises(MapConstructionError):
        affine_pair(parse_map(SIGMA))


def test_from_rational_pair():
    jonq = from_rational_pair(parse_rational("x"), parse_rational("(x*y + 1)/x"))
    assert jonq == parse_map("[X^2 : X*Y + Z^2 : X*Z]")
    assert jonq.degree == 2
    assert from_rational_pair(parse_rational("1/x"), parse_rational("1/y")) == parse_map(SIGMA)
    assert from_rational_pair(parse_rational("x"), parse_rational("y")) == identity()


@pytest.mark.parametrize(
    "rows, expected, degree",
    [
        ([[1, 1], [1, 0]], "[X*Y : X*Z : Z^2]", 2),
        ([[1, 0], [0, 1]], "[X : Y : Z]", 1),
        ([[1, 0], [0, -1]], "[X*Y : Z^2 : Y*Z]", 2),
    ],
)
def test_from_monomial_matrix(rows, expected, degree):
    f = from_monomial_matrix(MonomialMatrix.from_rows(rows))
    assert f == parse_map(expected)
    assert f.degree == degree


def test_monomial_matrix_algebra():
    m = MonomialMatrix.from_rows([[2, 1], [1, 1]])
    assert m.determinant == 1
    assert m @ m.inverse() == MonomialMatrix.identity()
    with pytest.raises(SingularMatrixError):
        MonomialMatrix.from_rows([[1, 2], [2, 4]])
    with pytest.raises(SingularMatrixError):
        MonomialMatrix.from_rows([[2, 0], [0, 1]]).inverse()


def test_compose_involution_collapses():
    sigma = parse_map(SIGMA)
    h, raw_degree = compose_detailed(sigma, sigma)
    assert h == identity()
    assert raw_degree == 4
    assert projectively_equal(iterate(sigma, 2), identity())


def test_degree_drop_is_logged_lazily(caplog):
    sigma = parse_map(SIGMA)
    with caplog.at_level(logging.DEBUG, logger="cremona_clt.algebra.cremona"):
        compose(sigma, sigma)
    [record] = [r for r in caplog.records if r.name == "cremona_clt.algebra.cremona"]
    assert record.args == (4, 1)
    assert record.getMessage() == "Composition dropped degree 4 -> 1"


def test_henon_degrees():
    h = henon_map()
    assert compose(h, h).degree == 4
    assert iterate(h, 3).degree == 8
    assert iterate(h, 0) == identity()


def test_henon_inverse():
    h = henon_map()
    h_inv = from_affine_pair(parse_polynomial("y"), parse_polynomial("x - y^2"))
    assert projectively_equal(compose(h, h_inv), identity())
    assert projectively_equal(compose(h_inv, h), identity())


def test_fibonacci_monomial_iterates():
    f = from_monomial_matrix(MonomialMatrix.from_rows([[1, 1], [1, 0]]))
    degrees = [iterate(f, k).degree for k in range(1, 11)]
    assert degrees == [2, 3, 5, 8, 13, 21, 34, 55, 89, 144]


@pytest.mark.parametrize(
    "m, n",
    [
        ([[1, 1], [1, 0]], [[2, -1], [3, 1]]),
        ([[0, 1], [-1, 0]], [[1, 3], [0, 1]]),
        ([[-2, 1], [1, 2]], [[3, -3], [1, 2]]),
    ],
)
def test_monomial_functoriality(m, n):
    M, N = MonomialMatrix.from_rows(m), MonomialMatrix.from_rows(n)
    lhs = from_monomial_matrix(M @ N)
    rhs = compose(from_monomial_matrix(M), from_monomial_matrix(N), None)
    assert projectively_equal(lhs, rhs)


def test_composition_is_associative():
    maps = [
        henon_map(),
        parse_map(SIGMA),
        from_linear_matrix([[1, 2, 0], [0, 1, 0], ["1/2", 0, 1]]),
        from_monomial_matrix(MonomialMatrix.from_rows([[1, 1], [1, 0]])),
    ]
    for f in maps:
        for g in maps:
            for k in maps:
                left = compose(compose(f, g), k)
                right = compose(f, compose(g, k))
                assert projectively_equal(left, right)


def test_submultiplicativity_on_fixed_pairs():
    maps = [henon_map(), parse_map(SIGMA), parse_map("[X^2 : X*Y + Z^2 : X*Z]")]
    for f in maps:
        for g in maps:
            assert compose(f, g).degree <= f.degree * g.degree


def test_projective_equality():
    assert projectively_equal(parse_map("[2*X : 2*Y : 2*Z]"), identity())
    assert not projectively_equal(parse_map(SIGMA), identity())


def test_linear_maps():
    f = from_linear_matrix([[0, 1, 0], [-1, 0, 0], [0, 0, 1]])
    assert f.degree == 1
    assert iterate(f, 4) == identity()
    with pytest.raises(SingularMatrixError):
        from_linear_matrix([[1, 2, 3], [2, 4, 6], [0, 0, 1]])


def test_degree_cap_propagates():
    h = henon_map()
    with pytest.raises(DegreeCapExceeded):
        iterate(h, 6, max_degree=32)


def test_text_round_trip_and_separators():
    f = parse_map("[Y*Z + X^2 ; X*Z ; Z^2]")
    assert f == henon_map()
    assert parse_map(map_to_text(f)) == f
    assert parse_map("X : Y : Z") == identity()
    with pytest.raises(ParseError):
        parse_map("[X : Y]")
