# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""Symbols, algebraic prolongation and the Spencer delta-complex.

A symbol of order k is a subspace of S^k V* (x) W written in jet coordinates
v^λ_α with |α| = k, α outer and λ inner. Contraction with the i-th basis
vector shifts indices: (d_i v)^λ_β = v^λ_{β+e_i}. Linear maps are matrices
acting on column vectors.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import (
    Iterable,
    Optional,
    Sequence,
)

from sympy import QQ

from forge.algebra.exactlin import (
    QMatrix,
    Subspace,
    hstack,
    image,
    matmul,
    matrix_rows,
    nullspace,
    qmatrix,
    rank,
    transpose,
    vstack,
    zeros,
)
from forge.algebra.jetcalc import (
    MultiIndex,
    lower_index,
    multiindices,
    sym_dim,
)
from forge.main.support import DimensionMismatch

logger = logging.getLogger(__name__)

DEFAULT_CHARACTER_DRAWS = 5


class MissingOrder(DimensionMismatch):
    """A family member of the requested order is not available."""


def symbol_coordinates(n: int, m: int, k: int) -> list[tuple[MultiIndex, int]]:
    """(α, λ) labels of S^k V* (x) W in storage order."""
    return [(alpha, fibre) for alpha in multiindices(n, k) for fibre in range(m)]


def symbol_dim(n: int, m: int, k: int) -> int:
    return m * sym_dim(n, k)


def contraction_matrix(n: int, m: int, k: int, i: int) -> QMatrix:
    """The contraction d_i: S^k V* (x) W -> S^{k-1} V* (x) W."""
    source = symbol_coordinates(n, m, k)
    target = {
        label: row for row, label in enumerate(symbol_coordinates(n, m, k - 1))
    }
    entries = [[QQ.zero] * len(source) for _ in range(len(target))]
    for column, (alpha, fibre) in enumerate(source):
        lowered = lower_index(alpha, i)
        if lowered is not None:
            entries[target[(lowered, fibre)]][column] = QQ.one
    return qmatrix(entries, len(source))


@dataclass(frozen=True)
class SymbolSpace:
    """A subspace g of S^k V* (x) W with dim V = n and dim W = m."""

    n: int
    m: int
    k: int
    space: Subspace

    def __post_init__(self):
        if self.space.ambient_dim != symbol_dim(self.n, self.m, self.k):
            raise DimensionMismatch(
                f"a symbol of order {self.k} with n={self.n}, m={self.m} lives in "
                f"dimension {symbol_dim(self.n, self.m, self.k)}, "
                f"not {self.space.ambient_dim}"
            )

    @classmethod
    def full(cls, n: int, m: int, k: int) -> SymbolSpace:
        return cls(n, m, k, Subspace.full(symbol_dim(n, m, k)))

    @classmethod
    def zero(cls, n: int, m: int, k: int) -> SymbolSpace:
        return cls(n, m, k, Subspace.zero(symbol_dim(n, m, k)))

    @classmethod
    def from_equations(
        cls, n: int, m: int, k: int, equations: Iterable[Sequence]
    ) -> SymbolSpace:
        """The kernel of linear forms given as coefficient rows."""
        rows = list(equations)
        return cls(n, m, k, nullspace(qmatrix(rows, symbol_dim(n, m, k))))

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def ambient_dim(self) -> int:
        return self.space.ambient_dim

    def is_zero(self) -> bool:
        return not self.space.dim

    def is_full(self) -> bool:
        return self.space.dim == self.space.ambient_dim


def prolong_symbol(g: SymbolSpace) -> SymbolSpace:
    """g^(1) = {v in S^{k+1} V* (x) W : d_i v in g for every i}."""
    n, m, k = g.n, g.m, g.k
    constraints = g.space.annihilator().matrix
    target_dim = symbol_dim(n, m, k + 1)
    stacked = vstack(
        [matmul(constraints, contraction_matrix(n, m, k + 1, i)) for i in range(n)],
        target_dim,
    )
    prolonged = SymbolSpace(n, m, k + 1, nullspace(stacked))
    logger.debug(
        "prolonged symbol",
        extra={"order": k + 1, "dim": prolonged.dim, "ambient": target_dim},
    )
    return prolonged


def prolong_symbol_times(g: SymbolSpace, times: int) -> SymbolSpace:
    for _ in range(times):
        g = prolong_symbol(g)
    return g


@dataclass
class DeltaComplex:
    """A family of symbols g_k indexed by order, with the δ-maps between them.

    A seeded family holds the full spaces below the seed order, the seed
    itself, and its prolongations above, generated on demand. An explicit
    family only knows the members it was given.
    """

    n: int
    m: int
    members: dict[int, SymbolSpace] = field(default_factory=dict)
    seed: Optional[SymbolSpace] = None

    @classmethod
    def from_seed(cls, seed: SymbolSpace) -> DeltaComplex:
        return cls(seed.n, seed.m, {seed.k: seed}, seed)

    @classmethod
    def explicit(
        cls, members: Iterable[SymbolSpace], nested: bool = True
    ) -> DeltaComplex:
        """A family holding exactly `members`.

        With `nested`, every member must lie in the prolongation of the
        member one order below it, when that member is given.
        """
        members = list(members)
        if not members:
            raise MissingOrder("an explicit family needs at least one member")
        n, m = members[0].n, members[0].m
        if any((g.n, g.m) != (n, m) for g in members):
            raise DimensionMismatch("family members disagree on n or m")
        by_order = {g.k: g for g in members}
        if nested:
            for k, g in sorted(by_order.items()):
                below = by_order.get(k - 1)
                if below is not None and not g.space <= prolong_symbol(below).space:
                    raise DimensionMismatch(
                        f"the member of order {k} does not lie in the "
                        f"prolongation of the member of order {k - 1}"
                    )
        return cls(n, m, by_order)

    @property
    def start(self) -> int:
        if self.seed is not None:
            return self.seed.k
        return min(self.members)

    @property
    def max_q(self) -> int:
        return self.n

    def symbol(self, k: int) -> SymbolSpace:
        if k < 0:
            return SymbolSpace.zero(self.n, self.m, k)
        if k in self.members:
            return self.members[k]
        if self.seed is None:
            raise MissingOrder(f"the family has no member of order {k}")
        if k < self.seed.k:
            member = SymbolSpace.full(self.n, self.m, k)
        else:
            member = prolong_symbol(self.symbol(k - 1))
        self.members[k] = member
        return member

    def delta(self, k: int, q: int) -> QMatrix:
        return delta_map(self, k, q)


def forms(n: int, q: int) -> list[tuple[int, ...]]:
    """Increasing index tuples spanning the q-th exterior power."""
    if q < 0:
        return []
    return list(itertools.combinations(range(n), q))


def delta_ambient(n: int, m: int, k: int, q: int) -> QMatrix:
    """δ: Λ^q V* (x) S^k V* (x) W -> Λ^{q+1} V* (x) S^{k-1} V* (x) W.

    Coordinates are (I, α, λ) with I outer.
    """
    source_forms, target_forms = forms(n, q), forms(n, q + 1)
    source_block, target_block = symbol_dim(n, m, k), symbol_dim(n, m, k - 1)
    target_positions = {I: index for index, I in enumerate(target_forms)}
    contractions = [matrix_rows(contraction_matrix(n, m, k, i)) for i in range(n)]
    rows = len(target_forms) * target_block
    cols = len(source_forms) * source_block
    entries = [[QQ.zero] * cols for _ in range(rows)]
    if not target_block:
        return qmatrix(entries, cols)
    for source_index, I in enumerate(source_forms):
        for i in range(n):
            if i in I:
                continue
            J = tuple(sorted(I + (i,)))
            sign = QQ(-1) ** J.index(i)
            row_offset = target_positions[J] * target_block
            column_offset = source_index * source_block
            for r, row in enumerate(contractions[i]):
                for c, value in enumerate(row):
                    if value:
                        entries[row_offset + r][column_offset + c] += sign * value
    return qmatrix(entries, cols)


def _embedding(family: DeltaComplex, k: int, q: int) -> QMatrix:
    """Columns e_I (x) b for every q-form index I and basis vector b of g_k."""
    g = family.symbol(k)
    block = symbol_dim(family.n, family.m, k)
    form_count = len(forms(family.n, q))
    columns = []
    for form_index in range(form_count):
        for vector in g.space.basis:
            column = [QQ.zero] * (form_count * block)
            column[form_index * block : (form_index + 1) * block] = vector
            columns.append(column)
    if not columns:
        return zeros(form_count * block, 0)
    return transpose(qmatrix(columns, form_count * block))


def _selection(family: DeltaComplex, k: int, q: int) -> QMatrix:
    """Reads Λ^q (x) g_k coordinates off an ambient vector lying in it."""
    g = family.symbol(k)
    block = symbol_dim(family.n, family.m, k)
    form_count = len(forms(family.n, q))
    rows = []
    for form_index in range(form_count):
        for pivot in g.space.pivots:
            row = [QQ.zero] * (form_count * block)
            row[form_index * block + pivot] = QQ.one
            rows.append(row)
    return qmatrix(rows, form_count * block)


def delta_image(family: DeltaComplex, k: int, q: int) -> QMatrix:
    """δ on Λ^q (x) g_k, with values in ambient Λ^{q+1} (x) S^{k-1} V* (x) W."""
    return matmul(
        delta_ambient(family.n, family.m, k, q), _embedding(family, k, q)
    )


def delta_map(family: DeltaComplex, k: int, q: int) -> QMatrix:
    """The matrix of δ: Λ^q (x) g_k -> Λ^{q+1} (x) g_{k-1} in the families' bases.

    Assumes δ maps Λ^q (x) g_k into Λ^{q+1} (x) g_{k-1}, which holds for
    seeded and nested families.
    """
    image = delta_image(family, k, q)
    return matmul(_selection(family, k - 1, q + 1), image)


def cohomology_dim(family: DeltaComplex, k: int, q: int) -> int:
    """dim H^{k,q} = dim ker δ^{k,q} - dim(δ(Λ^{q-1} (x) g_{k+1}) ∩ Λ^q (x) g_k).

    Only the part of the incoming image lying in Λ^q (x) g_k counts, so
    families that δ does not map into themselves still get a
    non-negative dimension.
    """
    if q < 0 or q > family.n:
        return 0
    outgoing = delta_image(family, k, q)
    kernel = outgoing.shape[1] - rank(outgoing)
    if q < 1:
        return kernel
    arriving = image(transpose(delta_image(family, k + 1, q - 1)))
    target = image(transpose(_embedding(family, k, q)))
    return kernel - arriving.intersect(target).dim


def cohomology_table(
    family: DeltaComplex, orders: Iterable[int], degrees: Iterable[int]
) -> dict[int, dict[int, int]]:
    degrees = list(degrees)
    return {
        k: {q: cohomology_dim(family, k, q) for q in degrees} for k in orders
    }


@dataclass(frozen=True)
class CharacterVector:
    alpha: tuple[int, ...]

    @property
    def weighted_sum(self) -> int:
        return sum(i * a for i, a in enumerate(self.alpha, start=1))

    def __iter__(self):
        return iter(self.alpha)

    def as_list(self) -> list[int]:
        return list(self.alpha)


def _random_basis(n: int, rng: random.Random) -> list[list]:
    while True:
        matrix = [[QQ(rng.randint(-5, 5)) for _ in range(n)] for _ in range(n)]
        if rank(qmatrix(matrix, n)) == n:
            return matrix


def _characters_for_basis(
    g: SymbolSpace, directions: Sequence[Sequence]
) -> CharacterVector:
    """Characters of g against the flag spanned by `directions` (one per column)."""
    n, m, k = g.n, g.m, g.k
    if k == 0:
        return CharacterVector((0,) * (n - 1) + (g.dim,))
    basis = transpose(g.space.matrix) if g.dim else zeros(g.ambient_dim, 0)
    contractions = [contraction_matrix(n, m, k, l) for l in range(n)]
    dims = [g.dim]
    constraints = []
    for j in range(n):
        combined = [
            [QQ.zero] * symbol_dim(n, m, k) for _ in range(symbol_dim(n, m, k - 1))
        ]
        for l in range(n):
            weight = directions[l][j]
            if not weight:
                continue
            for r, row in enumerate(matrix_rows(contractions[l])):
                for c, value in enumerate(row):
                    if value:
                        combined[r][c] += weight * value
        direction = qmatrix(combined, symbol_dim(n, m, k))
        constraints.append(matmul(direction, basis))
        stacked = vstack(constraints, g.dim)
        dims.append(g.dim - rank(stacked))
    return CharacterVector(tuple(dims[i] - dims[i + 1] for i in range(n)))


def cartan_characters(
    g: SymbolSpace, seed: int = 0, draws: int = DEFAULT_CHARACTER_DRAWS
) -> CharacterVector:
    """Cartan characters for a generic flag.

    The coordinate flag and `draws` random integer bases are tried; the
    lexicographically largest character vector is generic.
    """
    rng = random.Random(seed)
    identity = [[QQ.one if i == j else QQ.zero for j in range(g.n)] for i in range(g.n)]
    best = _characters_for_basis(g, identity)
    for _ in range(draws):
        candidate = _characters_for_basis(g, _random_basis(g.n, rng))
        if candidate.alpha > best.alpha:
            best = candidate
    logger.debug(
        "cartan characters",
        extra={"order": g.k, "dim": g.dim, "characters": list(best.alpha)},
    )
    return best


def cartan_test(
    g: SymbolSpace, seed: int = 0, draws: int = DEFAULT_CHARACTER_DRAWS
) -> bool:
    """Cartan's test: g is involutive iff dim g^(1) = sum i * α_i."""
    characters = cartan_characters(g, seed=seed, draws=draws)
    return prolong_symbol(g).dim == characters.weighted_sum


def acyclicity_onset(
    family: DeltaComplex, s: int, cap: int, start: int | None = None
) -> int | None:
    """Least k <= cap with H^{k',q} = 0 for k <= k' <= cap and 1 <= q <= s.

    Returns None when even order `cap` carries cohomology; nothing is
    claimed beyond `cap`.
    """
    start = family.start if start is None else start
    if cap < start:
        raise DimensionMismatch(f"cap {cap} is below the starting order {start}")
    degrees = range(1, min(s, family.n) + 1)
    onset = None
    for k in range(cap, start - 1, -1):
        if any(cohomology_dim(family, k, q) for q in degrees):
            break
        onset = k
    logger.debug(
        "acyclicity onset",
        extra={"s": s, "cap": cap, "start": start, "onset": onset},
    )
    return onset


def involutivity_onset(
    family: DeltaComplex, cap: int, seed: int = 0, draws: int = DEFAULT_CHARACTER_DRAWS
) -> int | None:
    """Least order k <= cap at which the family member passes Cartan's test."""
    for k in range(family.start, cap + 1):
        if cartan_test(family.symbol(k), seed=seed, draws=draws):
            return k
    return None


def finite_type_order(family: DeltaComplex, cap: int) -> int | None:
    """First order <= cap at which the family member vanishes."""
    for k in range(family.start, cap + 1):
        if family.symbol(k).is_zero():
            return k
    return None


def prolong_symbol_via_delta(g: SymbolSpace) -> SymbolSpace:
    """g^(1) as the elements of S^{k+1} whose δ lies in V* (x) g."""
    n, m, k = g.n, g.m, g.k
    delta = delta_ambient(n, m, k + 1, 0)
    annihilator = g.space.annihilator().matrix
    blank = zeros(annihilator.shape[0], g.ambient_dim)
    block_constraints = [
        matmul(
            hstack(
                [
                    annihilator if j == i else blank
                    for j in range(n)
                ],
                annihilator.shape[0],
            ),
            delta,
        )
        for i in range(n)
    ]
    stacked = vstack(block_constraints, symbol_dim(n, m, k + 1))
    return SymbolSpace(n, m, k + 1, nullspace(stacked))
