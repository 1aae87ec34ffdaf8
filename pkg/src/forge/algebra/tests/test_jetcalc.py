# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
import random

import pytest
from sympy import QQ

from forge.algebra.jetcalc import (
    JetPoint,
    JetSpec,
    engel_basis,
    engel_labels,
    factorial,
    lower_index,
    multiindices,
    multiindices_upto,
    prolong_field,
    sym_dim,
    total_derivative,
)
from forge.algebra.medolaghi import random_field
from forge.algebra.polyalg import PolyVectorField, parse_poly, poly_ring
from forge.main.support import DimensionMismatch

PLANE = JetSpec(("x",), ("y",), 2)


def test_multiindices_are_graded_lex():
    assert multiindices(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert multiindices(3, 1) == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    assert multiindices(2, -1) == []
    assert multiindices_upto(2, 1) == [(0, 0), (1, 0), (0, 1)]
    assert multiindices_upto(2, 2, start=2) == multiindices(2, 2)


@pytest.mark.parametrize("n,k", ((1, 3), (2, 2), (3, 4), (4, 0)))
def test_sym_dim_counts_multiindices(n, k):
    assert sym_dim(n, k) == len(multiindices(n, k))


def test_index_helpers():
    assert lower_index((2, 1), 0) == (1, 1)
    assert lower_index((0, 1), 0) is None
    assert factorial((2, 3)) == 12


def test_standard_spec_names_and_indices():
    spec = JetSpec.standard(2, 1, 2)
    assert spec.names == ("x1", "x2", "y", "y_10", "y_01", "y_20", "y_11", "y_02")
    assert spec.coordinate_count == 6
    assert spec.index(0, (1, 1)) == 4
    assert spec.indices_of_order(1) == [1, 2]
    assert spec.indices_below(2) == [0, 1, 2]
    with pytest.raises(DimensionMismatch):
        spec.index(0, (3, 0))


def test_coordinates_put_fibre_inside_multiindex():
    spec = JetSpec.standard(1, 2, 1)
    assert spec.coordinates == ((0, (0,)), (1, (0,)), (0, (1,)), (1, (1,)))
    assert spec.names == ("x", "y1", "y2", "y1_1", "y2_1")


def test_spec_validation():
    with pytest.raises(DimensionMismatch):
        JetSpec((), ("y",), 1)
    with pytest.raises(DimensionMismatch):
        JetSpec(("x",), ("y",), -1)


def test_jet_point_from_flat_infers_order():
    template = JetSpec.standard(2, 1, 0)
    point = JetPoint.from_flat(template, [0, 0, 1, 2, 3])
    assert point.order == 1
    assert point.value(0, (0, 1)) == QQ(3)
    with pytest.raises(DimensionMismatch):
        JetPoint.from_flat(template, [0, 0, 1, 2])


def test_jet_point_from_mapping_requires_every_coordinate():
    spec = PLANE.with_order(1)
    point = JetPoint.from_mapping(spec, {"x": 0, "y": "1/2", "y_1": 3})
    assert point.as_dict() == {"x": "0", "y": "1/2", "y_1": "3"}
    with pytest.raises(DimensionMismatch):
        JetPoint.from_mapping(spec, {"x": 0, "y": 1})
    with pytest.raises(DimensionMismatch):
        JetPoint.from_mapping(spec, {"x": 0, "y": 1, "y_1": 1, "y_2": 0})


def test_jet_of_a_section():
    spec = JetSpec.standard(2, 1, 2)
    section = [parse_poly("x1^2*x2", spec.base_ring)]
    point = JetPoint.from_section(spec, section, [1, 2])
    assert point.value(0, (0, 0)) == 2
    assert point.value(0, (1, 0)) == 4
    assert point.value(0, (0, 1)) == 1
    assert point.value(0, (2, 0)) == 4
    assert point.value(0, (1, 1)) == 2
    assert point.value(0, (0, 2)) == 0


def test_truncate_and_taylor_section():
    spec = JetSpec.standard(2, 2, 2)
    rng = random.Random(3)
    values = [QQ(rng.randint(-5, 5), rng.randint(1, 3)) for _ in spec.coordinates]
    point = JetPoint(spec, (QQ(1), QQ(-2)), tuple(values))
    again = JetPoint.from_section(spec, point.taylor_section(), point.base)
    assert again == point
    lower = point.truncate(1)
    assert lower.order == 1
    assert lower.value(1, (0, 1)) == point.value(1, (0, 1))
    with pytest.raises(DimensionMismatch):
        lower.truncate(2)


def test_total_derivative():
    x, y, y1, y2 = PLANE.ring.gens
    assert total_derivative(x * y1, 0, PLANE) == y1 + x * y2
    assert total_derivative(y**2, 0, PLANE) == 2 * y * y1
    with pytest.raises(DimensionMismatch):
        total_derivative(y2, 0, PLANE)


def test_prolonged_rotation():
    bundle = PLANE.bundle_ring
    x, y = bundle.gens
    rotation = PolyVectorField(bundle, (-y, x))
    prolonged = prolong_field(rotation, PLANE)
    _, _, y1, y2 = PLANE.ring.gens
    assert prolonged.components[2] == 1 + y1**2
    assert prolonged.components[3] == 3 * y1 * y2


def test_prolongation_rejects_foreign_fields():
    ring = poly_ring(["a", "b"])
    with pytest.raises(DimensionMismatch):
        prolong_field(PolyVectorField.zero(ring), PLANE)


def test_prolongation_preserves_brackets():
    spec = JetSpec.standard(2, 1, 2)
    rng = random.Random(5)
    for _ in range(3):
        first = random_field(spec.bundle_ring, 2, rng)
        second = random_field(spec.bundle_ring, 2, rng)
        lhs = prolong_field(first.bracket(second), spec)
        rhs = prolong_field(first, spec).bracket(prolong_field(second, spec))
        assert lhs == rhs


def test_engel_basis():
    fields = engel_basis(2, 1, (0, 0))
    assert len(fields) == 4
    assert len(engel_basis(2, 1, (0, 0), start=0)) == 6
    assert engel_labels(1, 2) == [((1,), 0), ((2,), 0)]
    ring = poly_ring(["x"])
    (square,) = engel_basis(ring, 2, (1,), start=2)
    x = ring.gens[0]
    assert square.components == ((x - 1) ** 2 * QQ(1, 2),)
    with pytest.raises(DimensionMismatch):
        engel_basis(2, 1, (0,))
