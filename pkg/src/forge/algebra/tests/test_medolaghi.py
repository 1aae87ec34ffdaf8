# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
import random
from math import comb

import pytest
from sympy import QQ

from forge.algebra.exactlin import matrix_rows, qmatrix, rank
from forge.algebra.jetcalc import JetPoint
from forge.algebra.medolaghi import (
    FiniteLiftUnavailable,
    NonInvertibleGerm,
    ProlongationRule,
    RuleValidationError,
    builtin_rule,
    degree_shift_bridge,
    homogeneity_test,
    inverse_germ,
    isotropy_dim,
    isotropy_projection_oracle,
    lambda_matrix,
    metric,
    mv_blocks,
    mv_test,
    oneform,
    orbit_tangent_dim,
    rule_symbol,
    tangent_kernel,
    tangent_kernel_family,
    transform_jet,
    vectorfield,
    zero_rule,
)
from forge.algebra.polyalg import (
    evaluate,
    parse_poly,
    partial_derivative,
    poly_ring,
    truncate,
)
from forge.algebra.spencer import cohomology_dim, prolong_symbol_times
from forge.main.support import DimensionMismatch, InvalidProblem

RULES = {
    "oneform1": lambda: oneform(1),
    "oneform2": lambda: oneform(2),
    "vectorfield1": lambda: vectorfield(1),
    "vectorfield2": lambda: vectorfield(2),
    "metric1": lambda: metric(1),
    "metric2": lambda: metric(2),
    "zero2": lambda: zero_rule(2, 1),
}


def jet(rule: ProlongationRule, values) -> JetPoint:
    return JetPoint.from_flat(rule.jet_spec(0), values)


def random_jet(rule: ProlongationRule, k: int, rng: random.Random) -> JetPoint:
    spec = rule.jet_spec(k)
    count = spec.n + len(spec.coordinates)
    values = [QQ(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(count)]
    return jet(rule, values)


def test_builtin_rules_preserve_brackets():
    for n in (1, 2):
        assert builtin_rule("oneform", n).tensor_type == "covector"
        assert builtin_rule("vectorfield", n).tensor_type == "vector"
    assert metric(2).fibre == ("y11", "y12", "y22")
    with pytest.raises(InvalidProblem):
        builtin_rule("spinor", 2)


def test_bracket_violation_is_rejected():
    ring = poly_ring(["x", "y"])
    with pytest.raises(RuleValidationError):
        ProlongationRule("bad", ("x",), ("y",), 2, {(0, 0, (2,)): ring.one})


@pytest.mark.parametrize(
    "kwargs",
    (
        {"tensor_type": "covector", "base": ("x1", "x2"), "fibre": ("y",)},
        {"tensor_type": "spinor", "base": ("x",), "fibre": ("y",)},
        {"base": ("x",), "fibre": ("y",), "order": -1},
        {"base": ("x",), "fibre": ("y",), "coefficients": {(0, 0, (2,)): None}},
        {"base": ("x",), "fibre": ("y",), "coefficients": {(1, 0, (1,)): None}},
    ),
)
def test_malformed_rules(kwargs):
    ring = poly_ring(["x", "y"])
    kwargs = {"order": 1, **kwargs}
    if "coefficients" in kwargs:
        kwargs["coefficients"] = {key: ring.one for key in kwargs["coefficients"]}
    with pytest.raises(RuleValidationError):
        ProlongationRule("bad", **kwargs)


def test_render_coefficients():
    assert oneform(1).render_coefficients() == ["y, x, 1 = -y"]
    assert zero_rule(1, 1).render_coefficients() == []


def test_isotropy_matrix_of_a_covector_jet():
    rule = oneform(1)
    matrix = lambda_matrix(rule, jet(rule, [0, 1, 1]))
    # Columns x d/dx and x^2/2 d/dx; rows y and y_1.
    assert matrix_rows(matrix) == [[-1, 0], [-2, -1]]
    assert isotropy_dim(rule, jet(rule, [0, 1, 1])) == 0
    assert lambda_matrix(rule, jet(rule, [0, 1])).shape == (1, 1)


def test_oneform_blocks_at_a_first_order_jet():
    rule = oneform(1)
    point = jet(rule, [0, 1, 1])
    blocks = mv_blocks(rule, point)
    assert matrix_rows(blocks.A) == [[-1]]
    assert matrix_rows(blocks.B) == [[-2]]
    assert matrix_rows(blocks.C) == [[-1]]
    assert blocks.ranks == {"full": 2, "A": 1, "B": 1, "C": 1}
    assert blocks.low_columns == (((1,), 0),)
    assert blocks.high_columns == (((2,), 0),)
    assert mv_test(rule, point)
    oracle = isotropy_projection_oracle(rule, point)
    assert (oracle.dim_upper, oracle.dim_projection, oracle.dim_lower) == (0, 0, 0)
    assert oracle.surjective
    assert orbit_tangent_dim(rule, point) == 3


def test_zero_rule_fails_the_block_test():
    rule = zero_rule(1, 1)
    point = jet(rule, [0, 2, 3])
    assert not mv_test(rule, point)
    oracle = isotropy_projection_oracle(rule, point)
    assert oracle.dim_upper == 1
    assert oracle.dim_projection == 0
    assert oracle.dim_lower == 1
    assert not oracle.surjective
    assert orbit_tangent_dim(rule, point) == 2


def test_block_test_needs_a_first_order_jet():
    rule = oneform(1)
    with pytest.raises(DimensionMismatch):
        mv_blocks(rule, jet(rule, [0, 1]))


def test_point_must_fit_the_rule():
    with pytest.raises(DimensionMismatch):
        mv_test(oneform(2), jet(oneform(1), [0, 1, 1]))


@pytest.mark.parametrize("name", sorted(RULES))
def test_block_test_agrees_with_projection_oracle(name):
    rule = RULES[name]()
    rng = random.Random(name)
    orders = (1, 2) if rule.n == 1 else (1,)
    for draw in range(50):
        point = random_jet(rule, orders[draw % len(orders)], rng)
        oracle = isotropy_projection_oracle(rule, point)
        assert mv_test(rule, point) == oracle.surjective


@pytest.mark.parametrize("name", sorted(RULES))
def test_top_block_rank_is_the_symbol_codimension(name):
    rule = RULES[name]()
    rng = random.Random(name)
    orders = (1, 2) if rule.n == 1 else (1,)
    for draw in range(10):
        point = random_jet(rule, orders[draw % len(orders)], rng)
        symbol = rule_symbol(rule, point.truncate(0))
        prolonged = prolong_symbol_times(symbol, point.order)
        assert rank(mv_blocks(rule, point).C) == prolonged.space.codim


@pytest.mark.parametrize("name", sorted(RULES))
def test_isotropy_and_orbit_fill_the_engel_fields(name):
    rule = RULES[name]()
    rng = random.Random(name)
    for k in (0, 1):
        point = random_jet(rule, k, rng)
        total = rule.n * comb(rule.n + rule.order + k, rule.n)
        assert isotropy_dim(rule, point) + orbit_tangent_dim(rule, point) == total


def test_inverse_germ():
    ring = poly_ring(["x"])
    (x,) = ring.gens
    germ = [x + x**2]
    inverse, image_point = inverse_germ(germ, (QQ(0),), 3)
    assert image_point == (QQ(0),)
    # x = v - v^2 + 2 v^3 + ... inverts v = x + x^2.
    assert inverse == [x - x**2 + 2 * x**3]
    with pytest.raises(NonInvertibleGerm):
        inverse_germ([x**2], (QQ(0),), 2)


def test_inverse_germ_composes_to_identity():
    ring = poly_ring(["x1", "x2"])
    x1, x2 = ring.gens
    germ = [x1 + x2**2, x2 + x1 * x2]
    z = (QQ(1), QQ(2))
    inverse, image_point = inverse_germ(germ, z, 3)
    shifted = [
        component.compose([(x1, x1 + 1), (x2, x2 + 2)]) - value
        for component, value in zip(germ, image_point)
    ]
    composed = [
        truncate(component.compose(list(zip(ring.gens, inverse))), 3)
        for component in shifted
    ]
    assert composed == [x1, x2]


def test_scaling_moves_a_covector_jet():
    rule = oneform(1)
    (x,) = rule.base_ring.gens
    point = jet(rule, [1, 2, 3])
    moved = transform_jet(rule, [2 * x], point)
    assert moved.base == (QQ(2),)
    assert moved.values == (QQ(1), QQ(3, 4))


def test_identity_germ_fixes_jets():
    rule = metric(2)
    rng = random.Random(8)
    point = random_jet(rule, 1, rng)
    assert transform_jet(rule, list(rule.base_ring.gens), point) == point


def random_germ(rule: ProlongationRule, base, rng: random.Random):
    """A quadratic polynomial map with invertible linear part at `base`."""
    ring = rule.base_ring
    gens = ring.gens
    while True:
        germ = []
        for _ in gens:
            poly = ring(rng.randint(-2, 2))
            for i, x in enumerate(gens):
                poly += x * rng.randint(-2, 2)
                for y in gens[i:]:
                    poly += x * y * QQ(rng.randint(-1, 1), 2)
            germ.append(poly)
        jacobian = [
            [evaluate(partial_derivative(c, j), base) for j in range(rule.n)]
            for c in germ
        ]
        if rank(qmatrix(jacobian, rule.n)) == rule.n:
            return germ


@pytest.mark.parametrize("name", ("oneform2", "vectorfield2", "metric1", "metric2"))
def test_block_test_is_invariant_under_diffeomorphisms(name):
    rule = RULES[name]()
    rng = random.Random(name)
    for _ in range(10):
        point = random_jet(rule, 1, rng)
        germ = random_germ(rule, point.base, rng)
        moved = transform_jet(rule, germ, point)
        assert moved.base == tuple(evaluate(c, point.base) for c in germ)
        assert mv_test(rule, moved) == mv_test(rule, point)
        assert isotropy_dim(rule, moved) == isotropy_dim(rule, point)
        assert orbit_tangent_dim(rule, moved) == orbit_tangent_dim(rule, point)


def test_transform_needs_a_tensorial_rule():
    rule = zero_rule(1, 1)
    with pytest.raises(FiniteLiftUnavailable):
        transform_jet(rule, list(rule.base_ring.gens), jet(rule, [0, 2, 3]))
    with pytest.raises(DimensionMismatch):
        transform_jet(oneform(1), [], jet(oneform(1), [0, 1, 1]))


def test_homogeneity():
    rule = zero_rule(1, 1)
    ring = rule.base_ring
    assert homogeneity_test(rule, [parse_poly("2", ring)], [0], 1)
    assert not homogeneity_test(rule, [parse_poly("2 + 3*x", ring)], [0], 1)
    assert homogeneity_test(oneform(1), [parse_poly("1 + x", ring)], [0], 1)


def test_rule_symbol():
    point = jet(oneform(2), [0, 0, 1, 2])
    assert rule_symbol(oneform(2), point).dim == 2
    assert rule_symbol(zero_rule(2, 1), jet(zero_rule(2, 1), [0, 0, 1])).is_full()


def test_tangent_kernel_of_an_open_orbit_is_full():
    rule = oneform(1)
    point = jet(rule, [0, 1, 1, 0])
    assert point.order == 2
    assert tangent_kernel(rule, point).is_full()


def test_tangent_kernel_family():
    rule = oneform(1)
    family = tangent_kernel_family(rule, jet(rule, [0, 1, 1, 0]), (1, 2))
    assert family.start == 1
    assert family.symbol(1).is_full()
    assert family.symbol(2).is_full()


def test_bridge_on_covector_jets():
    rule = oneform(1)
    point = jet(rule, [0, 1, 1, 2])
    report = degree_shift_bridge(rule, point)
    assert report.window == (1,)
    assert [row.order for row in report.rows] == [1]
    assert all(row.tangent_vanishes for row in report.rows)
    assert 0 in report.observed_offsets
    with pytest.raises(DimensionMismatch):
        degree_shift_bridge(rule, point, window=(2,))


@pytest.mark.parametrize("name", ("oneform1", "oneform2", "vectorfield2", "metric2"))
def test_tangent_kernel_cohomology_is_never_negative(name):
    rule = RULES[name]()
    rng = random.Random(name)
    for _ in range(3):
        point = random_jet(rule, 3, rng)
        family = tangent_kernel_family(rule, point, (1, 2, 3))
        for k in (1, 2):
            for q in range(rule.n + 1):
                assert cohomology_dim(family, k, q) >= 0


def test_bridge_on_plane_covector_jets():
    rule = oneform(2)
    point = random_jet(rule, 5, random.Random(21))
    report = degree_shift_bridge(rule, point, window=range(1, 5))
    assert report.window == (1, 2, 3, 4)
    assert [(row.order, row.degree) for row in report.rows] == [
        (k, q) for k in range(1, 5) for q in (1, 2)
    ]
    assert set(report.observed_offsets) <= set(report.offsets)
    tangents = tangent_kernel_family(rule, point, range(1, 6))
    for row in report.rows:
        dim = cohomology_dim(tangents, row.order, row.degree)
        assert dim >= 0
        assert row.tangent_vanishes == (dim == 0)


def test_bridge_without_window_is_empty():
    rule = oneform(1)
    report = degree_shift_bridge(rule, jet(rule, [0, 1, 1]), offsets=(0, 1))
    assert report.rows == ()
    assert report.observed_offsets == (0, 1)


def test_nonvanishing_vector_has_trivial_isotropy():
    rule = vectorfield(1)
    point = jet(rule, [0, 1, 0])
    blocks = mv_blocks(rule, point)
    assert rank(blocks.full) == 2
    assert mv_test(rule, point)
    assert isotropy_dim(rule, point) == 0
