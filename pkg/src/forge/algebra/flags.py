# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""Pfaffian systems, derived systems and flag verification.

A Pfaffian system is a list of 1-forms with polynomial coefficients. Its
derived system near a point p is computed from the distribution D it
annihilates: the derived system annihilates D + [D, D]. Generators are kept
polynomial so the construction can be iterated into the derived flag; the
pointwise criterion dω = 0 mod the system is computed separately and checked
against it.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import (
    Iterable,
    Optional,
    Sequence,
)

from sympy import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import PolyRing

from forge.algebra.exactlin import (
    Rational,
    Subspace,
    format_rational,
    image,
    nullspace,
    qmatrix,
    rank,
    rref,
    to_rational,
)
from forge.algebra.polyalg import (
    DiffForm,
    Poly,
    PolyVectorField,
    eval_form,
    evaluate,
    parse_one_form,
    poly_ring,
    shift,
    truncate,
    truncated_product,
    variable_names,
)
from forge.main.support import (
    DimensionMismatch,
    InvalidProblem,
    OracleMismatch,
)

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 3


class DependentGenerators(InvalidProblem):
    """The generators of a Pfaffian system are dependent at the point."""


def _check_point(ring: PolyRing, point: Sequence) -> tuple[Rational, ...]:
    if len(point) != ring.ngens:
        raise DimensionMismatch(
            f"point {tuple(point)} does not have {ring.ngens} coordinates"
        )
    return tuple(to_rational(value) for value in point)


def evaluate_rows(rows: Sequence[Sequence[Poly]], point: Sequence) -> list[list]:
    return [[evaluate(entry, point) for entry in row] for row in rows]


def _determinant(ring: PolyRing, rows: list[list[Poly]]) -> Poly:
    if not rows:
        return ring.one
    domain = ring.to_domain()
    return DomainMatrix(rows, (len(rows), len(rows)), domain).det()


def polynomial_kernel(
    ring: PolyRing, rows: Sequence[Sequence[Poly]], point: Sequence
) -> list[tuple[Poly, ...]]:
    """Polynomial vectors spanning the kernel of `rows` near `point`.

    The rows must be independent at the point. Pivot columns are chosen where
    the evaluated matrix is invertible and every free column gives one
    kernel vector by Cramer's rule; their values at the point are independent.
    """
    width = ring.ngens
    rows = [list(row) for row in rows]
    if not rows:
        return [
            tuple(ring.one if i == j else ring.zero for i in range(width))
            for j in range(width)
        ]
    values = qmatrix(evaluate_rows(rows, point), width)
    _, pivots = rref(values)
    if len(pivots) != len(rows):
        raise DependentGenerators(
            f"{len(rows)} generators span only {len(pivots)} dimensions at "
            f"{tuple(format_rational(v) for v in point)}"
        )
    square = [[row[p] for p in pivots] for row in rows]
    determinant = _determinant(ring, square)
    kernel = []
    for free in (column for column in range(width) if column not in pivots):
        vector = [ring.zero] * width
        vector[free] = determinant
        for position, pivot in enumerate(pivots):
            replaced = [
                [row[free] if s == position else entry for s, entry in enumerate(line)]
                for row, line in zip(rows, square)
            ]
            vector[pivot] = -_determinant(ring, replaced)
        kernel.append(tuple(vector))
    return kernel


def _series_inverse(unit: Poly, degree: int) -> Poly:
    """1 / unit up to terms of total degree above `degree`, about the origin."""
    ring = unit.ring
    constant = evaluate(unit, (QQ.zero,) * ring.ngens)
    scale = ring.ground_new(QQ.one / constant)
    rest = ring.one - unit * scale
    result, power = ring.one, ring.one
    for _ in range(degree):
        power = truncated_product(power, rest, degree)
        result = result + power
    return truncated_product(result, scale, degree)


def truncated_kernel(
    ring: PolyRing, rows: Sequence[Sequence[Poly]], degree: int
) -> list[tuple[Poly, ...]]:
    """Kernel of `rows` near the origin, as Taylor polynomials of order `degree`.

    Each vector annihilates the rows up to terms of total degree above
    `degree`, and their values at the origin are independent.
    """
    width = ring.ngens
    origin = (QQ.zero,) * width
    rows = [[truncate(entry, degree) for entry in row] for row in rows]
    if not rows:
        return [
            tuple(ring.one if i == j else ring.zero for i in range(width))
            for j in range(width)
        ]
    _, pivots = rref(qmatrix(evaluate_rows(rows, origin), width))
    if len(pivots) != len(rows):
        raise DependentGenerators(
            f"{len(rows)} generators span only {len(pivots)} dimensions at the origin"
        )
    for position, pivot in enumerate(pivots):
        chosen = next(
            t for t in range(position, len(rows)) if evaluate(rows[t][pivot], origin)
        )
        rows[position], rows[chosen] = rows[chosen], rows[position]
        inverse = _series_inverse(rows[position][pivot], degree)
        lead = [truncated_product(entry, inverse, degree) for entry in rows[position]]
        rows[position] = lead
        for t, row in enumerate(rows):
            factor = row[pivot]
            if t == position or not factor:
                continue
            rows[t] = [
                entry - truncated_product(factor, value, degree)
                for entry, value in zip(row, lead)
            ]
    kernel = []
    for free in (column for column in range(width) if column not in pivots):
        vector = [ring.zero] * width
        vector[free] = ring.one
        for position, pivot in enumerate(pivots):
            vector[pivot] = -rows[position][free]
        kernel.append(tuple(vector))
    return kernel


@dataclass(frozen=True)
class PfaffianSystem:
    """A Pfaffian system on the variables of `ring`."""

    ring: PolyRing
    generators: tuple[DiffForm, ...]
    name: str = ""

    def __post_init__(self):
        for form in self.generators:
            if form.degree != 1:
                raise InvalidProblem("Pfaffian generators must be 1-forms")
            if form.ring != self.ring:
                raise DimensionMismatch("generators live on different variables")

    @classmethod
    def parse(
        cls, names: Sequence[str], texts: Iterable[str], name: str = ""
    ) -> PfaffianSystem:
        ring = poly_ring(names)
        return cls(ring, tuple(parse_one_form(text, ring) for text in texts), name)

    @property
    def variables(self) -> tuple[str, ...]:
        return variable_names(self.ring)

    @property
    def rows(self) -> list[list[Poly]]:
        return [form.coefficients() for form in self.generators]

    def evaluate(self, point: Sequence) -> list[list[Rational]]:
        """Coefficient rows of the generators at `point`."""
        return evaluate_rows(self.rows, _check_point(self.ring, point))

    def dim_at(self, point: Sequence) -> int:
        if not self.generators:
            return 0
        return rank(qmatrix(self.evaluate(point), self.ring.ngens))

    def check_independent(self, point: Sequence):
        if self.dim_at(point) != len(self.generators):
            shown = tuple(format_rational(v) for v in point)
            raise DependentGenerators(f"generators are dependent at {shown}")

    def span_at(self, point: Sequence) -> Subspace:
        return image(qmatrix(self.evaluate(point), self.ring.ngens))

    def pullback_linear(self, matrix: Sequence[Sequence]) -> PfaffianSystem:
        """The system in coordinates x' with x = matrix * x'."""
        return PfaffianSystem(
            self.ring,
            tuple(form.pullback_linear(matrix) for form in self.generators),
            self.name,
        )

    def _map_coefficients(self, function) -> PfaffianSystem:
        return PfaffianSystem(
            self.ring,
            tuple(
                DiffForm(self.ring, 1, {i: function(c) for i, c in form.terms.items()})
                for form in self.generators
            ),
            self.name,
        )

    def shifted(self, offsets: Sequence) -> PfaffianSystem:
        """The system in coordinates x' = x - offsets."""
        return self._map_coefficients(lambda coeff: shift(coeff, offsets))

    def truncated(self, degree: int) -> PfaffianSystem:
        """Coefficients cut to their Taylor polynomials of order `degree` at 0."""
        return self._map_coefficients(lambda coeff: truncate(coeff, degree))

    def render(self) -> list[str]:
        return [form.render() for form in self.generators]


def distribution(system: PfaffianSystem, point: Sequence) -> list[PolyVectorField]:
    """Polynomial vector fields spanning the annihilated distribution near `point`."""
    return [
        PolyVectorField(system.ring, vector)
        for vector in polynomial_kernel(system.ring, system.rows, point)
    ]


def derived_space_at(system: PfaffianSystem, point: Sequence) -> Subspace:
    """Covectors at `point` of the forms ω in the system with dω = 0 mod it.

    For ω = sum a_i ω_i, dω restricted to the annihilated plane is
    sum a_i dω_i there, so the condition is linear in a.
    """
    point = _check_point(system.ring, point)
    system.check_independent(point)
    N = system.ring.ngens
    if not system.generators:
        return Subspace.zero(N)
    plane = nullspace(qmatrix(system.evaluate(point), N)).basis
    pairs = [(a, b) for a in range(len(plane)) for b in range(a + 1, len(plane))]
    conditions = [[QQ.zero] * len(system.generators) for _ in pairs]
    for column, form in enumerate(system.generators):
        if not pairs:
            break
        values = eval_form(form.d(), point)
        for row, (a, b) in enumerate(pairs):
            X, Y = plane[a], plane[b]
            total = QQ.zero
            for (i, j), value in values.items():
                total += value * (X[i] * Y[j] - X[j] * Y[i])
            conditions[row][column] = total
    combinations = nullspace(qmatrix(conditions, len(system.generators)))
    evaluated = system.evaluate(point)
    covectors = [
        [
            sum((a * evaluated[i][j] for i, a in enumerate(vector)), QQ.zero)
            for j in range(N)
        ]
        for vector in combinations.basis
    ]
    return Subspace.span(covectors, N)


def derived_system(
    system: PfaffianSystem, point: Sequence, order: Optional[int] = None
) -> PfaffianSystem:
    """The derived system near `point`, with polynomial generators.

    With `order`, the generators are Taylor polynomials of that order about
    `point`, which still determine `order` further derived systems there.
    """
    point = _check_point(system.ring, point)
    system.check_independent(point)
    ring = system.ring
    N = ring.ngens
    if order is None:
        local = point
        fields = distribution(system, point)
    else:
        local = (QQ.zero,) * N
        nearby = system.shifted(point)
        fields = [
            PolyVectorField(ring, vector)
            for vector in truncated_kernel(ring, nearby.rows, order + 1)
        ]
    brackets = [
        fields[a].bracket(fields[b], order)
        for a in range(len(fields))
        for b in range(a + 1, len(fields))
    ]
    chosen: list[PolyVectorField] = []
    span = Subspace.zero(N)
    for candidate in list(fields) + brackets:
        value = candidate.evaluate(local)
        if value not in span:
            chosen.append(candidate)
            span = span + Subspace.span([value], N)
    rows = [list(f.components) for f in chosen]
    if order is None:
        forms = polynomial_kernel(ring, rows, point)
    else:
        forms = truncated_kernel(ring, rows, order)
    derived = PfaffianSystem(
        ring, tuple(DiffForm.one_form(ring, vector) for vector in forms), system.name
    )
    if order is not None:
        derived = derived.shifted([-value for value in point])
    expected = derived_space_at(system, point)
    if derived.span_at(point) != expected:
        logger.error(
            "derived system disagrees with the pointwise criterion",
            extra={
                "point": [format_rational(v) for v in point],
                "bracket_dim": len(derived.generators),
                "pointwise_dim": expected.dim,
            },
        )
        raise OracleMismatch("derived system disagrees with the pointwise criterion")
    logger.debug(
        "derived system",
        extra={"from": len(system.generators), "to": len(derived.generators)},
    )
    return derived


@dataclass(frozen=True)
class DerivedFlag:
    dims: tuple[int, ...]
    is_flag: bool


def derived_flag(
    system: PfaffianSystem, point: Sequence, cap: int | None = None
) -> DerivedFlag:
    """Iterate derived systems until the dimension stabilizes or reaches 0.

    A flag loses exactly one dimension per step and ends at 0. Each step
    works with Taylor polynomials about the point, of the order the
    remaining steps need.
    """
    point = _check_point(system.ring, point)
    system.check_independent(point)
    steps = len(system.generators) + 1 if cap is None else cap
    dims = [len(system.generators)]
    current = system.shifted(point).truncated(min(steps, dims[0]))
    origin = (QQ.zero,) * system.ring.ngens
    for step in range(steps):
        if not dims[-1]:
            break
        remaining = min(steps - step, dims[-1])
        current = derived_system(current, origin, order=remaining - 1)
        dims.append(len(current.generators))
        if dims[-1] == dims[-2]:
            break
    is_flag = (
        dims[0] > 0
        and dims[-1] == 0
        and all(a - b == 1 for a, b in zip(dims, dims[1:]))
    )
    return DerivedFlag(tuple(dims), is_flag)


def contact_system(k: int) -> PfaffianSystem:
    """{dy - y1 dx, dy1 - y2 dx, ..., dy_(k-1) - y_k dx} on J^k(R, R)."""
    if k < 1:
        raise InvalidProblem(f"contact systems need k >= 1, not {k}")
    names = ["x", "y"] + [f"y{i}" for i in range(1, k + 1)]
    texts = [f"d{names[i + 1]} - {names[i + 2]}*dx" for i in range(k)]
    return PfaffianSystem.parse(names, texts, name=f"contact{k}")


def darboux_model() -> PfaffianSystem:
    """dx2 - x3 dx1 on R^3."""
    return PfaffianSystem.parse(["x1", "x2", "x3"], ["dx2 - x3*dx1"], name="darboux")


@dataclass(frozen=True)
class FlagSample:
    point: tuple[Rational, ...]
    dims: Optional[tuple[int, ...]] = None
    is_flag: Optional[bool] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class GenericityScan:
    samples: tuple[FlagSample, ...]
    agree: bool = False


def random_points(
    count: int, dimension: int, seed: int = 0
) -> list[tuple[Rational, ...]]:
    rng = random.Random(seed)
    return [
        tuple(QQ(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(dimension))
        for _ in range(count)
    ]


def sample_flag(
    system: PfaffianSystem, point: Sequence, cap: int | None = None
) -> FlagSample:
    """The derived flag at one point; dependent generators become an error entry."""
    point = _check_point(system.ring, point)
    try:
        flag = derived_flag(system, point, cap)
    except DependentGenerators as exc:
        return FlagSample(point, error=exc.detail)
    return FlagSample(point, flag.dims, flag.is_flag)


def genericity_scan(
    system: PfaffianSystem, points: Iterable[Sequence], cap: int | None = None
) -> GenericityScan:
    samples = tuple(sample_flag(system, point, cap) for point in points)
    dims = {sample.dims for sample in samples if sample.error is None}
    agree = len(dims) == 1 and all(sample.error is None for sample in samples)
    logger.info(
        "genericity scan",
        extra={"samples": len(samples), "agree": agree, "system": system.name},
    )
    return GenericityScan(samples, agree)

