# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""Jet coordinates, prolongation of vector fields and the Engel basis.

Multi-indices are tuples of exponents. Every enumeration in forge uses the
same graded-lex order: by total order first, then lexicographically
descending exponents, so `multiindices(2, 2)` is `[(2, 0), (1, 1), (0, 2)]`.
Jet coordinates (λ, α) are enumerated by order, then α, then λ.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import (
    Mapping,
    Sequence,
)

from sympy import QQ
from sympy.polys.rings import PolyRing

from forge.algebra.exactlin import Rational, format_rational, to_rational
from forge.algebra.polyalg import (
    Poly,
    PolyVectorField,
    change_ring,
    evaluate,
    poly_ring,
    variable_names,
)
from forge.main.support import DimensionMismatch

logger = logging.getLogger(__name__)

MultiIndex = tuple[int, ...]
JetCoordinate = tuple[int, MultiIndex]


def multiindices(n: int, k: int) -> list[MultiIndex]:
    """Every multi-index of length `n` and order `k`, in graded-lex order."""
    if k < 0:
        return []
    indices = []
    for combination in itertools.combinations_with_replacement(range(n), k):
        exponents = [0] * n
        for variable in combination:
            exponents[variable] += 1
        indices.append(tuple(exponents))
    return indices


def multiindices_upto(n: int, k: int, start: int = 0) -> list[MultiIndex]:
    return [alpha for order in range(start, k + 1) for alpha in multiindices(n, order)]


def sym_dim(n: int, k: int) -> int:
    """Dimension of the k-th symmetric power of an n-dimensional space."""
    if k < 0:
        return 0
    return math.comb(n + k - 1, k)


def unit(n: int, i: int) -> MultiIndex:
    return tuple(1 if j == i else 0 for j in range(n))


def add_index(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a + b for a, b in zip(alpha, beta))


def lower_index(alpha: MultiIndex, i: int) -> MultiIndex | None:
    """alpha - e_i, or None when alpha_i is zero."""
    if not alpha[i]:
        return None
    return tuple(a - 1 if j == i else a for j, a in enumerate(alpha))


def factorial(alpha: MultiIndex) -> int:
    return math.prod(math.factorial(a) for a in alpha)


def order(alpha: MultiIndex) -> int:
    return sum(alpha)


@dataclass(frozen=True)
class JetSpec:
    """Coordinates of J_k E for E with base coordinates `base` and fibre `fibre`."""

    base: tuple[str, ...]
    fibre: tuple[str, ...]
    order: int

    def __post_init__(self):
        if not self.base:
            raise DimensionMismatch("a jet space needs at least one base variable")
        if self.order < 0:
            raise DimensionMismatch(f"negative jet order {self.order}")

    @classmethod
    def standard(cls, n: int, m: int, order: int) -> JetSpec:
        base = ("x",) if n == 1 else tuple(f"x{i + 1}" for i in range(n))
        fibre = ("y",) if m == 1 else tuple(f"y{i + 1}" for i in range(m))
        return cls(base, fibre, order)

    @property
    def n(self) -> int:
        return len(self.base)

    @property
    def m(self) -> int:
        return len(self.fibre)

    def with_order(self, order: int) -> JetSpec:
        return JetSpec(self.base, self.fibre, order)

    @cached_property
    def coordinates(self) -> tuple[JetCoordinate, ...]:
        return tuple(
            (fibre, alpha)
            for alpha in multiindices_upto(self.n, self.order)
            for fibre in range(self.m)
        )

    @cached_property
    def _positions(self) -> dict[JetCoordinate, int]:
        return {coordinate: index for index, coordinate in enumerate(self.coordinates)}

    def index(self, fibre: int, alpha: MultiIndex) -> int:
        """Position of y^fibre_alpha among the jet coordinates."""
        try:
            return self._positions[(fibre, tuple(alpha))]
        except KeyError:
            raise DimensionMismatch(
                f"({fibre}, {alpha}) is not a coordinate of a jet space of order "
                f"{self.order} over {self.n} variables"
            )

    def indices_of_order(self, k: int) -> list[int]:
        return [
            index
            for index, (_, alpha) in enumerate(self.coordinates)
            if order(alpha) == k
        ]

    def indices_below(self, k: int) -> list[int]:
        return [
            index
            for index, (_, alpha) in enumerate(self.coordinates)
            if order(alpha) < k
        ]

    @property
    def coordinate_count(self) -> int:
        return self.m * math.comb(self.n + self.order, self.order)

    def coordinate_name(self, fibre: int, alpha: MultiIndex) -> str:
        if not order(alpha):
            return self.fibre[fibre]
        return f"{self.fibre[fibre]}_{''.join(str(a) for a in alpha)}"

    @cached_property
    def names(self) -> tuple[str, ...]:
        return self.base + tuple(
            self.coordinate_name(fibre, alpha) for fibre, alpha in self.coordinates
        )

    @cached_property
    def ring(self) -> PolyRing:
        """Polynomial ring in the base variables followed by every jet coordinate."""
        return poly_ring(self.names)

    @cached_property
    def bundle_ring(self) -> PolyRing:
        """Polynomial ring on E itself (base then fibre variables)."""
        return poly_ring(self.base + self.fibre)

    @cached_property
    def base_ring(self) -> PolyRing:
        return poly_ring(self.base)

    def variable(self, fibre: int, alpha: MultiIndex) -> Poly:
        return self.ring.gens[self.n + self.index(fibre, alpha)]


@dataclass(frozen=True)
class JetPoint:
    """A rational point of J_k E: base coordinates and every y^λ_α, |α| <= k."""

    spec: JetSpec
    base: tuple[Rational, ...]
    values: tuple[Rational, ...]

    def __post_init__(self):
        if len(self.base) != self.spec.n:
            raise DimensionMismatch(
                f"{len(self.base)} base values for {self.spec.n} base variables"
            )
        if len(self.values) != len(self.spec.coordinates):
            raise DimensionMismatch(
                f"{len(self.values)} jet values for {len(self.spec.coordinates)} "
                f"coordinates of order {self.spec.order}"
            )
        object.__setattr__(self, "base", tuple(to_rational(v) for v in self.base))
        object.__setattr__(self, "values", tuple(to_rational(v) for v in self.values))

    @classmethod
    def from_flat(cls, template: JetSpec, values: Sequence) -> JetPoint:
        """Build a jet from base values followed by jet values, inferring the order.

        `template` supplies the variable names; its order is ignored.
        """
        n, m = template.n, template.m
        remaining = len(values) - n
        order = 0
        while remaining > m * math.comb(n + order, order):
            order += 1
        if remaining != m * math.comb(n + order, order):
            raise DimensionMismatch(
                f"{len(values)} values do not form a jet over {n} base and {m} "
                "fibre variables"
            )
        spec = template.with_order(order)
        return cls(spec, tuple(values[:n]), tuple(values[n:]))

    @classmethod
    def from_mapping(cls, spec: JetSpec, assignment: Mapping[str, object]) -> JetPoint:
        """Build a jet from `{name: value}`; every coordinate must be assigned."""
        unknown = sorted(set(assignment) - set(spec.names))
        if unknown:
            raise DimensionMismatch(f"unknown jet coordinate(s) {unknown}")
        missing = [name for name in spec.names if name not in assignment]
        if missing:
            raise DimensionMismatch(f"no value for jet coordinate(s) {missing}")
        values = [assignment[name] for name in spec.names]
        return cls(spec, tuple(values[: spec.n]), tuple(values[spec.n :]))

    @classmethod
    def from_section(
        cls, spec: JetSpec, section: Sequence[Poly], point: Sequence
    ) -> JetPoint:
        """The k-jet at `point` of the section x -> (section^λ(x))."""
        if len(section) != spec.m:
            raise DimensionMismatch(
                f"{len(section)} section components for {spec.m} fibre variables"
            )
        ring = spec.base_ring
        components = [change_ring(component, ring) for component in section]
        values = []
        for fibre, alpha in spec.coordinates:
            derivative = components[fibre]
            for i, power in enumerate(alpha):
                for _ in range(power):
                    derivative = derivative.diff(ring.gens[i])
            values.append(evaluate(derivative, point))
        return cls(spec, tuple(point), tuple(values))

    @property
    def order(self) -> int:
        return self.spec.order

    def value(self, fibre: int, alpha: MultiIndex) -> Rational:
        return self.values[self.spec.index(fibre, alpha)]

    def as_vector(self) -> tuple[Rational, ...]:
        """Coordinates in the order of `spec.ring` generators."""
        return self.base + self.values

    def truncate(self, k: int) -> JetPoint:
        """The projection to J_k E."""
        if k > self.order:
            raise DimensionMismatch(
                f"cannot project a jet of order {self.order} to {k}"
            )
        spec = self.spec.with_order(k)
        return JetPoint(
            spec,
            self.base,
            tuple(self.value(f, alpha) for f, alpha in spec.coordinates),
        )

    def taylor_section(self) -> tuple[Poly, ...]:
        """Polynomial section whose k-jet at the base point is this jet."""
        ring = self.spec.base_ring
        shifted = [gen - z for gen, z in zip(ring.gens, self.base)]
        section = [ring.zero for _ in range(self.spec.m)]
        for (fibre, alpha), value in zip(self.spec.coordinates, self.values):
            if not value:
                continue
            term = ring.ground_new(value * QQ(1, factorial(alpha)))
            for factor, power in zip(shifted, alpha):
                term *= factor**power
            section[fibre] += term
        return tuple(section)

    def as_dict(self) -> dict[str, str]:
        return {
            name: format_rational(value)
            for name, value in zip(self.spec.names, self.as_vector())
        }


def total_derivative(poly: Poly, i: int, spec: JetSpec) -> Poly:
    """D_i = d/dx^i + sum y^λ_{α+e_i} d/dy^λ_α, on polynomials of order < k."""
    ring = spec.ring
    poly = change_ring(poly, ring)
    result = poly.diff(ring.gens[i])
    step = unit(spec.n, i)
    for fibre, alpha in spec.coordinates:
        derivative = poly.diff(spec.variable(fibre, alpha))
        if not derivative:
            continue
        if order(alpha) == spec.order:
            raise DimensionMismatch(
                f"total derivative needs coordinates of order {spec.order + 1}"
            )
        result += spec.variable(fibre, add_index(alpha, step)) * derivative
    return result


def prolong_field(field: PolyVectorField, spec: JetSpec) -> PolyVectorField:
    """The k-th prolongation of a vector field on E to J_k E."""
    expected = spec.base + spec.fibre
    if variable_names(field.ring) != expected:
        raise DimensionMismatch(
            f"field lives on {variable_names(field.ring)}, expected {expected}"
        )
    ring = spec.ring
    horizontal = [change_ring(c, ring) for c in field.components[: spec.n]]
    vertical: dict[JetCoordinate, Poly] = {
        (fibre, multiindices(spec.n, 0)[0]): change_ring(c, ring)
        for fibre, c in enumerate(field.components[spec.n :])
    }
    derived_horizontal: dict[int, list[Poly]] = {}
    for alpha in multiindices_upto(spec.n, spec.order, start=1):
        i = next(j for j, a in enumerate(alpha) if a)
        parent = lower_index(alpha, i)
        if i not in derived_horizontal:
            derived_horizontal[i] = [
                total_derivative(a, i, spec) for a in field.components[: spec.n]
            ]
        for fibre in range(spec.m):
            component = total_derivative(vertical[(fibre, parent)], i, spec)
            for j, derivative in enumerate(derived_horizontal[i]):
                if derivative:
                    component -= spec.variable(
                        fibre, add_index(parent, unit(spec.n, j))
                    ) * derivative
            vertical[(fibre, alpha)] = component
    logger.debug(
        "prolonged vector field",
        extra={"order": spec.order, "coordinates": len(spec.coordinates)},
    )
    return PolyVectorField(
        ring, tuple(horizontal) + tuple(vertical[c] for c in spec.coordinates)
    )


def engel_labels(n: int, top: int, start: int = 1) -> list[tuple[MultiIndex, int]]:
    """(β, i) labels of the Engel fields with start <= |β| <= top."""
    return [(beta, i) for beta in multiindices_upto(n, top, start) for i in range(n)]


def engel_basis(
    n: int | PolyRing, top: int, z: Sequence, start: int = 1
) -> list[PolyVectorField]:
    """The fields (1/β!)(x - z)^β d/dx^i for start <= |β| <= top."""
    ring = n if isinstance(n, PolyRing) else JetSpec.standard(n, 1, 0).base_ring
    if len(z) != ring.ngens:
        raise DimensionMismatch(f"base point {tuple(z)} has the wrong length")
    shifted = [gen - to_rational(c) for gen, c in zip(ring.gens, z)]
    fields = []
    for beta, i in engel_labels(ring.ngens, top, start):
        monomial = ring.ground_new(QQ(1, factorial(beta)))
        for factor, power in zip(shifted, beta):
            monomial *= factor**power
        components = [ring.zero] * ring.ngens
        components[i] = monomial
        fields.append(PolyVectorField(ring, tuple(components)))
    return fields
