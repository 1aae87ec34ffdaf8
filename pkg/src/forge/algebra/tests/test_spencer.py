# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
import random
from math import comb

import pytest

from forge.algebra.exactlin import matmul, matrix_rows, nullspace, qmatrix, vstack
from forge.algebra.jetcalc import multiindices
from forge.algebra.spencer import (
    CharacterVector,
    DeltaComplex,
    MissingOrder,
    SymbolSpace,
    acyclicity_onset,
    cartan_characters,
    cartan_test,
    cohomology_dim,
    cohomology_table,
    contraction_matrix,
    delta_ambient,
    delta_map,
    finite_type_order,
    involutivity_onset,
    prolong_symbol,
    prolong_symbol_times,
    prolong_symbol_via_delta,
    symbol_coordinates,
    symbol_dim,
)
from forge.main.support import DimensionMismatch

# Coordinates of S^1 V* (x) W for n = m = 2: v^1_x, v^2_x, v^1_y, v^2_y.
SO2 = SymbolSpace.from_equations(
    2, 2, 1, [[1, 0, 0, 0], [0, 0, 0, 1], [0, 1, 1, 0]]
)
# u_xx + u_yy = 0 on the coordinates u_xx, u_xy, u_yy.
LAPLACE = SymbolSpace.from_equations(2, 1, 2, [[1, 0, 1]])


def is_zero(matrix) -> bool:
    return not any(any(row) for row in matrix_rows(matrix))


def random_symbol(rng: random.Random, n: int, m: int, k: int) -> SymbolSpace:
    dim = symbol_dim(n, m, k)
    rows = [
        [rng.randint(-2, 2) for _ in range(dim)] for _ in range(rng.randint(0, dim))
    ]
    return SymbolSpace.from_equations(n, m, k, rows)


def direct_prolongation(g: SymbolSpace, times: int) -> SymbolSpace:
    """Elements of S^{k+times} all of whose `times`-fold contractions lie in g."""
    n, m, k = g.n, g.m, g.k
    annihilator = g.space.annihilator().matrix
    constraints = []
    for gamma in multiindices(n, times):
        contraction = None
        order = k + times
        for i, power in enumerate(gamma):
            for _ in range(power):
                step = contraction_matrix(n, m, order, i)
                if contraction is not None:
                    step = matmul(step, contraction)
                contraction = step
                order -= 1
        constraints.append(matmul(annihilator, contraction))
    stacked = vstack(constraints, symbol_dim(n, m, k + times))
    return SymbolSpace(n, m, k + times, nullspace(stacked))


def test_symbol_coordinates_put_fibre_inside():
    assert symbol_coordinates(2, 2, 1) == [
        ((1, 0), 0),
        ((1, 0), 1),
        ((0, 1), 0),
        ((0, 1), 1),
    ]
    assert symbol_dim(3, 2, 2) == 12


def test_contraction_lowers_the_index():
    matrix = matrix_rows(contraction_matrix(2, 1, 2, 0))
    # d_x maps (u_xx, u_xy, u_yy) to (u_x, u_y) = (u_xx, u_xy).
    assert matrix == [[1, 0, 0], [0, 1, 0]]


def test_symbol_checks_its_ambient_dimension():
    with pytest.raises(DimensionMismatch):
        SymbolSpace(2, 1, 2, nullspace(qmatrix([[1, 0]])))


def test_so2_prolongation_vanishes():
    assert SO2.dim == 1
    assert prolong_symbol(SO2).is_zero()
    assert prolong_symbol_via_delta(SO2).is_zero()


def test_laplace_prolongations():
    assert LAPLACE.dim == 2
    assert prolong_symbol(LAPLACE).dim == 2
    assert prolong_symbol_times(LAPLACE, 3).dim == 2


@pytest.mark.parametrize("n,m,k", ((1, 1, 2), (2, 1, 1), (2, 2, 2), (3, 1, 2)))
def test_full_symbol_prolongs_to_full(n, m, k):
    assert prolong_symbol(SymbolSpace.full(n, m, k)).is_full()
    assert prolong_symbol(SymbolSpace.zero(n, m, k)).is_zero()


def test_prolongation_agrees_with_delta_characterization():
    rng = random.Random(1)
    for _ in range(50):
        n, m, k = rng.randint(1, 3), rng.randint(1, 2), rng.randint(1, 2)
        g = random_symbol(rng, n, m, k)
        assert prolong_symbol(g) == prolong_symbol_via_delta(g)


def test_iterated_prolongation_matches_direct_kernel():
    rng = random.Random(2)
    for _ in range(50):
        n, m, k = rng.randint(1, 3), rng.randint(1, 2), rng.randint(1, 2)
        g = random_symbol(rng, n, m, k)
        times = rng.randint(1, 2)
        assert prolong_symbol_times(g, times) == direct_prolongation(g, times)


@pytest.mark.parametrize(
    "n,m,k,q", ((2, 1, 3, 0), (3, 1, 3, 0), (3, 2, 3, 1), (2, 2, 4, 0))
)
def test_ambient_delta_squares_to_zero(n, m, k, q):
    second = delta_ambient(n, m, k - 1, q + 1)
    assert is_zero(matmul(second, delta_ambient(n, m, k, q)))


def test_delta_squares_to_zero_on_random_families():
    rng = random.Random(3)
    for _ in range(100):
        n, m = rng.randint(1, 3), rng.randint(1, 2)
        seed = random_symbol(rng, n, m, rng.randint(1, 2))
        family = DeltaComplex.from_seed(seed)
        for k in range(seed.k, seed.k + 3):
            for q in range(0, n):
                assert is_zero(
                    matmul(delta_map(family, k - 1, q + 1), delta_map(family, k, q))
                )


@pytest.mark.parametrize("n,m", ((1, 1), (2, 1), (2, 2), (3, 1)))
def test_full_symbol_cohomology_vanishes(n, m):
    family = DeltaComplex.from_seed(SymbolSpace.full(n, m, 1))
    for k in range(1, 5):
        for q in range(1, n + 1):
            assert cohomology_dim(family, k, q) == 0


def test_so2_cohomology():
    family = DeltaComplex.from_seed(SO2)
    assert cohomology_dim(family, 1, 2) == 1
    assert cohomology_dim(family, 1, 3) == 0
    assert cohomology_dim(family, 1, -1) == 0
    table = cohomology_table(family, range(2, 4), range(1, 3))
    assert table == {2: {1: 0, 2: 0}, 3: {1: 0, 2: 0}}
    assert acyclicity_onset(family, 2, 4) == 2
    assert finite_type_order(family, 4) == 2
    with pytest.raises(DimensionMismatch):
        acyclicity_onset(family, 2, 0)


def test_seeded_family_members():
    family = DeltaComplex.from_seed(LAPLACE)
    assert family.start == 2
    assert family.symbol(1).is_full()
    assert family.symbol(-1).dim == 0
    assert family.symbol(4).dim == 2


def test_explicit_family_only_knows_its_members():
    family = DeltaComplex.explicit([LAPLACE, prolong_symbol(LAPLACE)])
    assert family.start == 2
    assert family.symbol(3).dim == 2
    with pytest.raises(MissingOrder):
        family.symbol(5)
    with pytest.raises(MissingOrder):
        DeltaComplex.explicit([])
    with pytest.raises(DimensionMismatch):
        DeltaComplex.explicit([LAPLACE, SO2])


def test_explicit_family_members_must_nest():
    full = SymbolSpace.full(2, 1, 3)
    with pytest.raises(DimensionMismatch):
        DeltaComplex.explicit([LAPLACE, full])
    family = DeltaComplex.explicit([LAPLACE, full], nested=False)
    assert family.symbol(3).is_full()
    # δ(g_3) reaches outside V* (x) g_2; only the part inside counts.
    for q in range(0, 3):
        assert cohomology_dim(family, 2, q) >= 0
    assert DeltaComplex.explicit([SymbolSpace.zero(2, 1, 3), LAPLACE]).start == 2


def test_laplace_characters_and_cartan_test():
    characters = cartan_characters(LAPLACE, seed=0)
    assert characters.as_list() == [2, 0]
    assert characters.weighted_sum == 2
    assert cartan_test(LAPLACE)
    family = DeltaComplex.from_seed(LAPLACE)
    assert involutivity_onset(family, 5) == 2
    assert acyclicity_onset(family, 2, 5) == 2
    assert finite_type_order(family, 5) is None


def test_full_symbol_is_involutive():
    full = SymbolSpace.full(2, 1, 2)
    assert cartan_characters(full).as_list() == [2, 1]
    assert cartan_test(full)


def test_so2_is_not_involutive_until_it_vanishes():
    assert not cartan_test(SO2)
    assert involutivity_onset(DeltaComplex.from_seed(SO2), 4) == 2


def test_order_zero_characters():
    g = SymbolSpace.full(3, 2, 0)
    assert cartan_characters(g).as_list() == [0, 0, 2]


def test_characters_are_seed_deterministic():
    rng = random.Random(4)
    g = random_symbol(rng, 3, 1, 2)
    assert cartan_characters(g, seed=9) == cartan_characters(g, seed=9)
    assert CharacterVector((1, 2)).weighted_sum == 5


def test_euler_characteristic_of_each_diagonal():
    rng = random.Random(12)
    for _ in range(30):
        n, m = rng.randint(1, 3), rng.randint(1, 2)
        seed = random_symbol(rng, n, m, rng.randint(1, 2))
        family = DeltaComplex.from_seed(seed)
        for total in range(seed.k + n, seed.k + n + 2):
            chains = sum(
                (-1) ** q * comb(n, q) * family.symbol(total - q).dim
                for q in range(n + 1)
            )
            homology = sum(
                (-1) ** q * cohomology_dim(family, total - q, q) for q in range(n + 1)
            )
            assert chains == homology


def test_characters_decrease_and_bound_the_prolongation():
    rng = random.Random(13)
    for _ in range(30):
        n, m, k = rng.randint(1, 3), rng.randint(1, 2), rng.randint(1, 2)
        g = random_symbol(rng, n, m, k)
        characters = cartan_characters(g).as_list()
        assert characters == sorted(characters, reverse=True)
        assert sum(characters) == g.dim
        assert prolong_symbol(g).dim <= cartan_characters(g).weighted_sum
