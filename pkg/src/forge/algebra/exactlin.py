# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""Exact rational linear algebra.

Scalars are elements of sympy's `QQ` domain and matrices are dense
`DomainMatrix` instances over `QQ`. Subspaces of a coordinate space are kept
as the nonzero rows of their reduced row-echelon form, so two subspaces are
equal exactly when their stored bases are equal.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import (
    Iterable,
    Sequence,
)

from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix

from forge.main.support import DimensionMismatch, ProblemParseError

logger = logging.getLogger(__name__)

Rational = QQ.dtype
QMatrix = DomainMatrix
Vector = tuple[Rational, ...]


class CoordinateOutOfRange(DimensionMismatch):
    """A coordinate index does not exist in the ambient space."""


def to_rational(value) -> Rational:
    """Convert `value` to an element of `QQ`.

    Accepts ints, `fractions.Fraction`, strings such as "3", "-2/7" or "0.25",
    sympy numbers and `QQ` elements.
    """
    if QQ.of_type(value):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            fraction = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ProblemParseError(f"not a rational number: {value!r}") from exc
        return QQ(fraction.numerator, fraction.denominator)
    return QQ.convert(value)


def format_rational(value: Rational) -> str:
    """Render a rational as `p` or `p/q`."""
    value = to_rational(value)
    numerator, denominator = int(value.numerator), int(value.denominator)
    if denominator == 1:
        return str(numerator)
    return f"{numerator}/{denominator}"


def qmatrix(rows: Iterable[Sequence], cols: int | None = None) -> QMatrix:
    """Build a dense rational matrix from a sequence of rows."""
    converted = [[to_rational(entry) for entry in row] for row in rows]
    if cols is None:
        if not converted:
            raise DimensionMismatch("an empty matrix needs an explicit column count")
        cols = len(converted[0])
    for index, row in enumerate(converted):
        if len(row) != cols:
            raise DimensionMismatch(
                f"row {index} has {len(row)} entries, expected {cols}"
            )
    return DomainMatrix(converted, (len(converted), cols), QQ)


def zeros(rows: int, cols: int) -> QMatrix:
    return qmatrix([[QQ.zero] * cols for _ in range(rows)], cols)


def identity(size: int) -> QMatrix:
    return qmatrix(
        [[QQ.one if i == j else QQ.zero for j in range(size)] for i in range(size)],
        size,
    )


def matrix_rows(matrix: QMatrix) -> list[list[Rational]]:
    """Return the entries of `matrix` as a list of rows."""
    rows, cols = matrix.shape
    if not rows:
        return []
    if not cols:
        return [[] for _ in range(rows)]
    return [list(row) for row in matrix.to_list()]


def transpose(matrix: QMatrix) -> QMatrix:
    rows, cols = matrix.shape
    entries = matrix_rows(matrix)
    return qmatrix([[entries[i][j] for i in range(rows)] for j in range(cols)], rows)


def vstack(matrices: Sequence[QMatrix], cols: int) -> QMatrix:
    """Stack matrices vertically; `cols` fixes the width when the list is empty."""
    stacked = []
    for matrix in matrices:
        if matrix.shape[1] != cols:
            raise DimensionMismatch(
                f"cannot stack a matrix with {matrix.shape[1]} columns onto {cols}"
            )
        stacked.extend(matrix_rows(matrix))
    return qmatrix(stacked, cols)


def hstack(matrices: Sequence[QMatrix], rows: int) -> QMatrix:
    """Stack matrices side by side; `rows` fixes the height when the list is empty."""
    joined: list[list[Rational]] = [[] for _ in range(rows)]
    for matrix in matrices:
        if matrix.shape[0] != rows:
            raise DimensionMismatch(
                f"cannot join a matrix with {matrix.shape[0]} rows onto {rows}"
            )
        for target, row in zip(joined, matrix_rows(matrix)):
            target.extend(row)
    return qmatrix(joined, sum(matrix.shape[1] for matrix in matrices))


def matmul(left: QMatrix, right: QMatrix) -> QMatrix:
    if left.shape[1] != right.shape[0]:
        raise DimensionMismatch(
            f"cannot multiply {left.shape} by {right.shape} matrices"
        )
    if 0 in left.shape or 0 in right.shape:
        return zeros(left.shape[0], right.shape[1])
    return (left * right).to_dense()


def apply(matrix: QMatrix, vector: Sequence[Rational]) -> Vector:
    """Apply `matrix` to a column vector."""
    if matrix.shape[1] != len(vector):
        raise DimensionMismatch(
            f"vector of length {len(vector)} does not fit a {matrix.shape} matrix"
        )
    return tuple(
        sum((entry * value for entry, value in zip(row, vector)), QQ.zero)
        for row in matrix_rows(matrix)
    )


def _integral_rows(matrix: QMatrix) -> list[list]:
    """Scale every row by the lcm of its denominators."""
    integral = []
    for row in matrix_rows(matrix):
        scale = math.lcm(*(int(entry.denominator) for entry in row))
        integral.append(
            [
                ZZ(int(entry.numerator) * (scale // int(entry.denominator)))
                for entry in row
            ]
        )
    return integral


def rank(matrix: QMatrix) -> int:
    """Rank over the rationals, by fraction-free elimination over the integers."""
    rows, cols = matrix.shape
    if not rows or not cols:
        return 0
    integral = DomainMatrix(_integral_rows(matrix), (rows, cols), ZZ)
    _, _, pivots = integral.rref_den(method="FF")
    return len(pivots)


def rref(matrix: QMatrix) -> tuple[QMatrix, tuple[int, ...]]:
    """Reduced row-echelon form and the pivot columns."""
    rows, cols = matrix.shape
    if not rows or not cols:
        return matrix, ()
    reduced, pivots = matrix.to_dense().rref()
    return reduced.to_dense(), tuple(pivots)


@dataclass(frozen=True)
class Subspace:
    """A subspace of QQ^ambient_dim stored in canonical echelon form.

    Use `Subspace.span` to build one; the constructor trusts its input.
    """

    ambient_dim: int
    basis: tuple[Vector, ...]

    @classmethod
    def span(cls, vectors: Iterable[Sequence], ambient_dim: int) -> Subspace:
        matrix = qmatrix(vectors, ambient_dim)
        reduced, pivots = rref(matrix)
        rows = matrix_rows(reduced)[: len(pivots)]
        return cls(ambient_dim, tuple(tuple(row) for row in rows))

    @classmethod
    def zero(cls, ambient_dim: int) -> Subspace:
        return cls(ambient_dim, ())

    @classmethod
    def full(cls, ambient_dim: int) -> Subspace:
        return cls.span(matrix_rows(identity(ambient_dim)), ambient_dim)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.dim

    @property
    def matrix(self) -> QMatrix:
        return qmatrix(self.basis, self.ambient_dim)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(
            next(index for index, entry in enumerate(row) if entry)
            for row in self.basis
        )

    def vectors(self) -> list[Vector]:
        return list(self.basis)

    def _residue(self, vector: Sequence) -> list[Rational]:
        if len(vector) != self.ambient_dim:
            raise DimensionMismatch(
                f"vector of length {len(vector)} is not in a space of dimension "
                f"{self.ambient_dim}"
            )
        residue = [to_rational(entry) for entry in vector]
        for pivot, row in zip(self.pivots, self.basis):
            factor = residue[pivot]
            if factor:
                residue = [value - factor * entry for value, entry in zip(residue, row)]
        return residue

    def __contains__(self, vector: Sequence) -> bool:
        return not any(self._residue(vector))

    def __le__(self, other: Subspace) -> bool:
        self._check_ambient(other)
        return all(row in other for row in self.basis)

    def __add__(self, other: Subspace) -> Subspace:
        self._check_ambient(other)
        return Subspace.span(self.basis + other.basis, self.ambient_dim)

    def coordinates_of(self, vector: Sequence) -> Vector:
        """Coordinates of a member of the subspace in the canonical basis."""
        if vector not in self:
            raise DimensionMismatch("vector does not lie in the subspace")
        return tuple(to_rational(vector[pivot]) for pivot in self.pivots)

    def annihilator(self) -> Subspace:
        """The vectors orthogonal to every basis vector."""
        return nullspace(qmatrix(self.basis, self.ambient_dim))

    def intersect(self, other: Subspace) -> Subspace:
        return intersect(self, other)

    def project_coords(self, kept: Sequence[int]) -> Subspace:
        return project_coords(self, kept)

    def _check_ambient(self, other: Subspace):
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch(
                f"subspaces of dimension {self.ambient_dim} and {other.ambient_dim} "
                "are not comparable"
            )


def nullspace(matrix: QMatrix) -> Subspace:
    """The subspace of vectors v with matrix * v = 0."""
    cols = matrix.shape[1]
    reduced, pivots = rref(matrix)
    reduced_rows = matrix_rows(reduced)
    vectors = []
    for free in (column for column in range(cols) if column not in pivots):
        vector = [QQ.zero] * cols
        vector[free] = QQ.one
        for row, pivot in enumerate(pivots):
            vector[pivot] = -reduced_rows[row][free]
        vectors.append(vector)
    return Subspace.span(vectors, cols)


def image(matrix: QMatrix) -> Subspace:
    """The row space of `matrix`."""
    return Subspace.span(matrix_rows(matrix), matrix.shape[1])


def intersect(first: Subspace, second: Subspace) -> Subspace:
    """Intersection, as the kernel of both subspaces' orthogonal constraints."""
    first._check_ambient(second)
    constraints = first.annihilator().basis + second.annihilator().basis
    return nullspace(qmatrix(constraints, first.ambient_dim))


def project_coords(subspace: Subspace, kept: Sequence[int]) -> Subspace:
    """Drop every coordinate not listed in `kept` and canonicalize."""
    kept = list(kept)
    for index in kept:
        if not 0 <= index < subspace.ambient_dim:
            raise CoordinateOutOfRange(
                f"coordinate {index} is outside a space of dimension "
                f"{subspace.ambient_dim}"
            )
    return Subspace.span(
        [[row[index] for index in kept] for row in subspace.basis], len(kept)
    )
