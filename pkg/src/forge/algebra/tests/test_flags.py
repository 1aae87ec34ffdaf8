# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
import random

import pytest
from sympy import QQ

from forge.algebra.exactlin import qmatrix, rank
from forge.algebra.flags import (
    DependentGenerators,
    PfaffianSystem,
    contact_system,
    darboux_model,
    derived_flag,
    derived_space_at,
    derived_system,
    genericity_scan,
    polynomial_kernel,
    random_points,
    sample_flag,
    truncated_kernel,
)
from forge.algebra.polyalg import poly_ring, truncate
from forge.main.support import DimensionMismatch, InvalidProblem, ProblemParseError

# A flag only away from x2 = 0.
MARTINET = PfaffianSystem.parse(["x1", "x2", "x3"], ["dx3 - x2^2*dx1"], "martinet")
SHEAR = [[1, 0, 0], [1, 1, 0], [0, 0, 1]]
SHEAR_5 = [[1 if i == j or j == i + 1 else 0 for j in range(5)] for i in range(5)]


def test_darboux_model_is_a_flag():
    flag = derived_flag(darboux_model(), [0, 1, 2])
    assert flag.dims == (1, 0)
    assert flag.is_flag


@pytest.mark.parametrize("k", range(1, 6))
def test_contact_systems_are_flags(k):
    system = contact_system(k)
    point = [QQ(i + 1, 2) for i in range(k + 2)]
    flag = derived_flag(system, point)
    assert flag.dims == tuple(range(k, -1, -1))
    assert flag.is_flag


def test_contact_system_needs_positive_order():
    with pytest.raises(InvalidProblem):
        contact_system(0)


def test_integrable_system_is_not_a_flag():
    system = PfaffianSystem.parse(["x1", "x2", "x3"], ["dx1", "dx2"])
    flag = derived_flag(system, [1, 2, 3])
    assert flag.dims == (2, 2)
    assert not flag.is_flag


def test_empty_system_is_not_a_flag():
    system = PfaffianSystem.parse(["x1", "x2"], [])
    assert derived_flag(system, [0, 0]).dims == (0,)
    assert not derived_flag(system, [0, 0]).is_flag
    assert system.dim_at([0, 0]) == 0


def test_derived_system_matches_pointwise_criterion():
    system = contact_system(3)
    point = [1, -1, 2, QQ(1, 2), 3]
    derived = derived_system(system, point)
    assert len(derived.generators) == 2
    assert derived.span_at(point) == derived_space_at(system, point)


def test_flag_depends_on_the_point():
    assert sample_flag(MARTINET, [0, 1, 0]).dims == (1, 0)
    degenerate = sample_flag(MARTINET, [0, 0, 0])
    assert degenerate.dims == (1, 1)
    assert degenerate.is_flag is False
    scan = genericity_scan(MARTINET, [[0, 1, 0], [0, 0, 0]])
    assert not scan.agree


def test_flag_is_invariant_under_linear_changes_of_coordinates():
    pulled = MARTINET.pullback_linear(SHEAR)
    # x = SHEAR * x' sends (0, 1, 0) to itself and (1, -1, 0) to (1, 0, 0).
    assert derived_flag(pulled, [0, 1, 0]) == derived_flag(MARTINET, [0, 1, 0])
    assert derived_flag(pulled, [1, -1, 0]) == derived_flag(MARTINET, [1, 0, 0])
    contact = contact_system(2)
    matrix = [[2, 0, 0, 0], [0, 1, 0, 0], [0, 1, 1, 0], [0, 0, 0, 3]]
    assert derived_flag(contact.pullback_linear(matrix), [1, 2, 3, 4]).is_flag


def test_dependent_generators_become_an_error_sample():
    system = PfaffianSystem.parse(["x1", "x2"], ["x1*dx1 + dx2", "dx2"])
    assert system.dim_at([0, 5]) == 1
    with pytest.raises(DependentGenerators):
        derived_flag(system, [0, 5])
    sample = sample_flag(system, [0, 5])
    assert sample.dims is None
    assert "dependent" in sample.error
    scan = genericity_scan(system, [[1, 1], [0, 5]])
    assert not scan.agree
    assert scan.samples[0].dims == (2, 2)


def test_genericity_scan_on_random_points():
    system = contact_system(2)
    points = random_points(3, 4, seed=5)
    assert points == random_points(3, 4, seed=5)
    assert all(len(point) == 4 for point in points)
    scan = genericity_scan(system, points)
    assert scan.agree
    assert {sample.dims for sample in scan.samples} == {(2, 1, 0)}


def test_polynomial_kernel():
    ring = poly_ring(["x", "y", "z"])
    x, y, _ = ring.gens
    rows = [[ring.one, ring.zero, -y], [ring.zero, ring.one, -x]]
    (vector,) = polynomial_kernel(ring, rows, [0, 0, 0])
    assert vector == (y, x, ring.one)
    assert len(polynomial_kernel(ring, [], [0, 0, 0])) == 3
    with pytest.raises(DependentGenerators):
        polynomial_kernel(ring, [[x, ring.zero, ring.zero]], [0, 1, 1])


def test_point_and_generator_checks():
    with pytest.raises(DimensionMismatch):
        derived_flag(darboux_model(), [0, 1])
    with pytest.raises(ProblemParseError):
        PfaffianSystem.parse(["x1", "x2"], ["dx1*dx2"])
    assert darboux_model().render() == ["(-x3)*dx1 + dx2"]


def random_change(rng: random.Random, size: int) -> list[list[int]]:
    while True:
        matrix = [[rng.randint(-2, 2) for _ in range(size)] for _ in range(size)]
        if rank(qmatrix(matrix, size)) == size:
            return matrix


@pytest.mark.parametrize("k", range(1, 6))
def test_contact_flag_survives_random_linear_changes(k):
    system = contact_system(k)
    size = k + 2
    rng = random.Random(k)
    for _ in range(10):
        matrix = random_change(rng, size)
        point = [QQ(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(size)]
        image = [sum(a * b for a, b in zip(row, point)) for row in matrix]
        pulled = derived_flag(system.pullback_linear(matrix), point)
        assert pulled == derived_flag(system, image)
        assert pulled.dims == tuple(range(k, -1, -1))


def test_martinet_flag_survives_random_linear_changes():
    rng = random.Random(11)
    for _ in range(10):
        matrix = random_change(rng, 3)
        pulled = MARTINET.pullback_linear(matrix)
        for point in ([1, 0, 2], [0, 1, -1]):
            image = [sum(a * b for a, b in zip(row, point)) for row in matrix]
            assert derived_flag(pulled, point) == derived_flag(MARTINET, image)


def test_truncated_derived_system_agrees_with_the_exact_one():
    system = contact_system(3).pullback_linear(SHEAR_5)
    point = [1, -1, 2, QQ(1, 2), 3]
    exact = derived_system(system, point)
    for order in (0, 1, 2):
        truncated = derived_system(system, point, order=order)
        assert truncated.span_at(point) == exact.span_at(point)
    local = system.shifted(point).truncated(1)
    assert local.span_at([0] * 5) == system.span_at(point)


def test_truncated_kernel():
    ring = poly_ring(["x", "y", "z"])
    x, y, _ = ring.gens
    # (1 + x) a - y c = 0 and b - x c = 0 near the origin.
    rows = [[ring.one + x, ring.zero, -y], [ring.zero, ring.one, -x]]
    (vector,) = truncated_kernel(ring, rows, 2)
    assert vector == (y - x * y, x, ring.one)
    for row in rows:
        value = sum((a * b for a, b in zip(row, vector)), ring.zero)
        assert truncate(value, 2) == 0
    with pytest.raises(DependentGenerators):
        truncated_kernel(ring, [[x, ring.zero, ring.zero]], 1)
