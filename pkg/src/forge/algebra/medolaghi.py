# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""Prolongation rules, isotropy matrices and the Medolaghi-Vessiot rank test.

A prolongation rule of order ℓ lifts a vector field ξ = ξ^i d/dx^i on the
base to

    pξ = ξ^i d/dx^i + (sum c^λ_(i,β)(x, y) d^β ξ^i) d/dy^λ,   |β| <= ℓ.

Everything here is pointwise: matrices are evaluated at a rational jet. Engel
columns are labelled (β, i) with β outer, and jet rows (λ, α) follow
`JetSpec.coordinates`.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import (
    Iterable,
    Mapping,
    Optional,
    Sequence,
)

from sympy import QQ
from sympy.polys.rings import PolyRing

from forge.algebra.exactlin import (
    QMatrix,
    Rational,
    Subspace,
    image,
    matrix_rows,
    nullspace,
    project_coords,
    qmatrix,
    rank,
    to_rational,
    transpose,
    zeros,
)
from forge.algebra.jetcalc import (
    JetPoint,
    JetSpec,
    MultiIndex,
    engel_basis,
    engel_labels,
    multiindices,
    multiindices_upto,
    order,
    prolong_field,
)
from forge.algebra.polyalg import (
    Poly,
    PolyVectorField,
    change_ring,
    evaluate,
    poly_ring,
    shift,
    truncate,
    variable_names,
)
from forge.algebra.spencer import (
    DeltaComplex,
    SymbolSpace,
    cohomology_dim,
)
from forge.main.support import (
    DimensionMismatch,
    InvalidProblem,
    OracleMismatch,
)

logger = logging.getLogger(__name__)

TENSOR_TYPES = ("covector", "vector", "symmetric2")
DEFAULT_BRIDGE_OFFSETS = (-1, 0, 1, 2)
VALIDATION_PAIRS = 2

CoefficientKey = tuple[int, int, MultiIndex]


class RuleValidationError(InvalidProblem):
    """The lift does not respect brackets, or the rule is malformed."""


class NonInvertibleGerm(InvalidProblem):
    """A germ handed to `transform_jet` has a singular linear part."""


class FiniteLiftUnavailable(InvalidProblem):
    """The rule has no finite (tensorial) transformation law."""


def _symmetric_pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations_with_replacement(range(n), 2))


@dataclass(frozen=True)
class ProlongationRule:
    """An order-ℓ lift of base vector fields to the bundle.

    `coefficients` maps (λ, i, β) to a polynomial on the bundle variables.
    Bracket compatibility is checked on construction unless `validate` is
    false.
    """

    name: str
    base: tuple[str, ...]
    fibre: tuple[str, ...]
    order: int
    coefficients: Mapping[CoefficientKey, Poly] = field(default_factory=dict)
    tensor_type: Optional[str] = None
    seed: int = 0
    validate: bool = True

    def __post_init__(self):
        n, m = len(self.base), len(self.fibre)
        if not n or not m:
            raise RuleValidationError("a rule needs base and fibre variables")
        if self.order < 0:
            raise RuleValidationError(f"negative rule order {self.order}")
        if self.tensor_type is not None:
            if self.tensor_type not in TENSOR_TYPES:
                raise RuleValidationError(f"unknown tensor type {self.tensor_type!r}")
            expected = n * (n + 1) // 2 if self.tensor_type == "symmetric2" else n
            if m != expected:
                raise RuleValidationError(
                    f"a {self.tensor_type} rule over {n} variables needs {expected} "
                    f"fibre variables, not {m}"
                )
        ring = poly_ring(self.base + self.fibre)
        cleaned = {}
        for (fibre, i, beta), coefficient in self.coefficients.items():
            beta = tuple(beta)
            if not 0 <= fibre < m or not 0 <= i < n or len(beta) != n:
                raise RuleValidationError(
                    f"coefficient index ({fibre}, {i}, {beta}) does not fit the rule"
                )
            if order(beta) > self.order:
                raise RuleValidationError(
                    f"derivative {beta} exceeds the rule order {self.order}"
                )
            coefficient = change_ring(coefficient, ring)
            if coefficient:
                cleaned[(fibre, i, beta)] = coefficient
        object.__setattr__(self, "coefficients", dict(sorted(cleaned.items())))
        if self.validate:
            self._check_brackets()

    @property
    def n(self) -> int:
        return len(self.base)

    @property
    def m(self) -> int:
        return len(self.fibre)

    @cached_property
    def bundle_ring(self) -> PolyRing:
        return poly_ring(self.base + self.fibre)

    @cached_property
    def base_ring(self) -> PolyRing:
        return poly_ring(self.base)

    def jet_spec(self, k: int) -> JetSpec:
        return JetSpec(self.base, self.fibre, k)

    def lift(self, xi: PolyVectorField) -> PolyVectorField:
        """pξ for a vector field ξ on the base."""
        if variable_names(xi.ring) != self.base:
            raise DimensionMismatch(
                f"field lives on {variable_names(xi.ring)}, expected {self.base}"
            )
        ring = self.bundle_ring
        derivatives: dict[tuple[int, MultiIndex], Poly] = {}

        def derivative(i: int, beta: MultiIndex) -> Poly:
            if (i, beta) not in derivatives:
                value = xi.components[i]
                for variable, power in enumerate(beta):
                    for _ in range(power):
                        value = value.diff(xi.ring.gens[variable])
                derivatives[(i, beta)] = change_ring(value, ring)
            return derivatives[(i, beta)]

        vertical = [ring.zero] * self.m
        for (fibre, i, beta), coefficient in self.coefficients.items():
            vertical[fibre] += coefficient * derivative(i, beta)
        horizontal = [change_ring(c, ring) for c in xi.components]
        return PolyVectorField(ring, tuple(horizontal) + tuple(vertical))

    def _check_brackets(self):
        rng = random.Random(self.seed)
        degree = self.order + 1
        for _ in range(VALIDATION_PAIRS):
            first = random_field(self.base_ring, degree, rng)
            second = random_field(self.base_ring, degree, rng)
            lifted = self.lift(first.bracket(second))
            bracket = self.lift(first).bracket(self.lift(second))
            if lifted != bracket:
                logger.error(
                    "lift does not preserve brackets",
                    extra={
                        "rule": self.name,
                        "first": str(first),
                        "second": str(second),
                    },
                )
                raise RuleValidationError(
                    f"rule {self.name!r} does not satisfy p[ξ,η] = [pξ,pη] "
                    f"for ξ = {first}, η = {second}"
                )

    def render_coefficients(self) -> list[str]:
        """`fibre, base, beta = poly` lines, re-readable by the problem parser."""
        lines = []
        for (fibre, i, beta), coefficient in self.coefficients.items():
            label = "".join(str(b) for b in beta)
            lines.append(
                f"{self.fibre[fibre]}, {self.base[i]}, {label} = "
                f"{coefficient.as_expr()}"
            )
        return lines


def random_field(ring: PolyRing, degree: int, rng: random.Random) -> PolyVectorField:
    """A vector field with small random integer polynomial coefficients."""
    n = ring.ngens
    components = []
    for _ in range(n):
        component = ring.zero
        for alpha in multiindices_upto(n, degree):
            coefficient = rng.randint(-3, 3)
            if coefficient:
                component += ring.from_dict({alpha: QQ(coefficient)})
        components.append(component)
    return PolyVectorField(ring, tuple(components))


def _names(prefix: str, count: int) -> tuple[str, ...]:
    if count == 1:
        return (prefix,)
    return tuple(f"{prefix}{i + 1}" for i in range(count))


def _unit(n: int, i: int) -> MultiIndex:
    return tuple(1 if j == i else 0 for j in range(n))


def oneform(n: int, seed: int = 0) -> ProlongationRule:
    """1-forms y_i dx^i: (pξ)_(y_i) = -y_j d_i ξ^j."""
    base, fibre = _names("x", n), _names("y", n)
    ring = poly_ring(base + fibre)
    coefficients: dict[CoefficientKey, Poly] = {}
    for i in range(n):
        for j in range(n):
            coefficients[(i, j, _unit(n, i))] = -ring.gens[n + j]
    return ProlongationRule(
        "oneform", base, fibre, 1, coefficients, tensor_type="covector", seed=seed
    )


def vectorfield(n: int, seed: int = 0) -> ProlongationRule:
    """Vector fields y^i d/dx^i: (pξ)^(y^i) = y^j d_j ξ^i."""
    base, fibre = _names("x", n), _names("y", n)
    ring = poly_ring(base + fibre)
    coefficients: dict[CoefficientKey, Poly] = {}
    for i in range(n):
        for j in range(n):
            coefficients[(i, i, _unit(n, j))] = ring.gens[n + j]
    return ProlongationRule(
        "vectorfield", base, fibre, 1, coefficients, tensor_type="vector", seed=seed
    )


def metric(n: int, seed: int = 0) -> ProlongationRule:
    """Symmetric 2-tensors g_ij: (pξ)_(g_ij) = -(g_kj d_i ξ^k + g_ik d_j ξ^k)."""
    pairs = _symmetric_pairs(n)
    base = _names("x", n)
    fibre = tuple(f"y{a + 1}{b + 1}" for a, b in pairs)
    ring = poly_ring(base + fibre)
    position = {pair: index for index, pair in enumerate(pairs)}

    def g(a: int, b: int) -> Poly:
        return ring.gens[n + position[(min(a, b), max(a, b))]]

    coefficients: dict[CoefficientKey, Poly] = {}
    for index, (i, j) in enumerate(pairs):
        for k in range(n):
            for key, value in (
                ((index, k, _unit(n, i)), -g(k, j)),
                ((index, k, _unit(n, j)), -g(i, k)),
            ):
                coefficients[key] = coefficients.get(key, ring.zero) + value
    return ProlongationRule(
        "metric", base, fibre, 1, coefficients, tensor_type="symmetric2", seed=seed
    )


def zero_rule(n: int, m: int, order: int = 1) -> ProlongationRule:
    """The purely horizontal lift."""
    return ProlongationRule("zero", _names("x", n), _names("y", m), order, {})


BUILTIN_RULES = {
    "oneform": oneform,
    "vectorfield": vectorfield,
    "metric": metric,
}


def builtin_rule(name: str, n: int, seed: int = 0) -> ProlongationRule:
    try:
        factory = BUILTIN_RULES[name]
    except KeyError:
        raise InvalidProblem(
            f"unknown built-in rule {name!r}; expected one of {sorted(BUILTIN_RULES)}"
        )
    return factory(n, seed=seed)


def _check_point(rule: ProlongationRule, point: JetPoint):
    if point.spec.base != rule.base or point.spec.fibre != rule.fibre:
        raise DimensionMismatch(
            f"jet over {point.spec.base}/{point.spec.fibre} does not fit rule "
            f"{rule.name!r} over {rule.base}/{rule.fibre}"
        )


def _prolonged_columns(
    rule: ProlongationRule,
    point: JetPoint,
    fields: Iterable[PolyVectorField],
    horizontal: bool = False,
) -> list[list[Rational]]:
    """Values at `point` of p_k(pξ) for every field, one list per field."""
    spec = point.spec
    values = point.as_vector()
    columns = []
    for base_field in fields:
        prolonged = prolong_field(rule.lift(base_field), spec)
        components = prolonged.components
        if not horizontal:
            components = components[spec.n :]
        columns.append([evaluate(component, values) for component in components])
    return columns


def _as_matrix(columns: list[list[Rational]], rows: int) -> QMatrix:
    if not columns:
        return zeros(rows, 0)
    return transpose(qmatrix(columns, rows))


def lambda_matrix(rule: ProlongationRule, point: JetPoint) -> QMatrix:
    """The isotropy matrix at a jet of order k.

    Rows are the jet coordinates (λ, α) with |α| <= k, columns the Engel
    fields (β, i) with 1 <= |β| <= ℓ + k. Its kernel is the isotropy.
    """
    _check_point(rule, point)
    top = rule.order + point.order
    fields = engel_basis(rule.base_ring, top, point.base)
    columns = _prolonged_columns(rule, point, fields)
    matrix = _as_matrix(columns, len(point.spec.coordinates))
    logger.debug(
        "isotropy matrix",
        extra={"rule": rule.name, "order": point.order, "shape": list(matrix.shape)},
    )
    return matrix


def isotropy(rule: ProlongationRule, point: JetPoint) -> Subspace:
    """The isotropy at a jet, in Engel coordinates."""
    return nullspace(lambda_matrix(rule, point))


def isotropy_dim(rule: ProlongationRule, point: JetPoint) -> int:
    matrix = lambda_matrix(rule, point)
    return matrix.shape[1] - rank(matrix)


@dataclass(frozen=True)
class MVBlocks:
    """The isotropy matrix at W of order k + 1 in block form [[B, C], [A, 0]].

    Top rows are the order-(k+1) jet coordinates, bottom rows the rest. Left
    columns are the Engel fields with |β| <= ℓ + k, right columns those with
    |β| = ℓ + k + 1.
    """

    full: QMatrix
    A: QMatrix
    B: QMatrix
    C: QMatrix
    top_rows: tuple[tuple[int, MultiIndex], ...]
    bottom_rows: tuple[tuple[int, MultiIndex], ...]
    low_columns: tuple[tuple[MultiIndex, int], ...]
    high_columns: tuple[tuple[MultiIndex, int], ...]

    @property
    def ranks(self) -> dict[str, int]:
        return {
            "full": rank(self.full),
            "A": rank(self.A),
            "B": rank(self.B),
            "C": rank(self.C),
        }


def _submatrix(rows: list[list[Rational]], keep_rows, keep_cols) -> QMatrix:
    return qmatrix(
        [[rows[r][c] for c in keep_cols] for r in keep_rows], len(keep_cols)
    )


def mv_blocks(rule: ProlongationRule, point: JetPoint) -> MVBlocks:
    """Split the isotropy matrix at a jet of order k + 1 into its blocks."""
    _check_point(rule, point)
    if point.order < 1:
        raise DimensionMismatch("the block test needs a jet of order at least 1")
    k = point.order - 1
    matrix = lambda_matrix(rule, point)
    entries = matrix_rows(matrix)
    coordinates = point.spec.coordinates
    top_rows = [r for r, (_, alpha) in enumerate(coordinates) if order(alpha) == k + 1]
    bottom_rows = [r for r, (_, alpha) in enumerate(coordinates) if order(alpha) <= k]
    labels = engel_labels(rule.n, rule.order + k + 1)
    low_columns = [
        c for c, (beta, _) in enumerate(labels) if order(beta) <= rule.order + k
    ]
    high_columns = [
        c for c, (beta, _) in enumerate(labels) if order(beta) == rule.order + k + 1
    ]
    corner = _submatrix(entries, bottom_rows, high_columns)
    if rank(corner):
        logger.error(
            "lower-right block of the isotropy matrix is not zero",
            extra={"rule": rule.name, "order": point.order},
        )
        raise OracleMismatch("fields of top order act on lower jet coordinates")
    return MVBlocks(
        full=matrix,
        A=_submatrix(entries, bottom_rows, low_columns),
        B=_submatrix(entries, top_rows, low_columns),
        C=_submatrix(entries, top_rows, high_columns),
        top_rows=tuple(coordinates[r] for r in top_rows),
        bottom_rows=tuple(coordinates[r] for r in bottom_rows),
        low_columns=tuple(labels[c] for c in low_columns),
        high_columns=tuple(labels[c] for c in high_columns),
    )


def mv_test(rule: ProlongationRule, point: JetPoint) -> bool:
    """rank [[B, C], [A, 0]] == rank A + rank C at a jet of order k + 1."""
    blocks = mv_blocks(rule, point)
    return rank(blocks.full) == rank(blocks.A) + rank(blocks.C)


@dataclass(frozen=True)
class IsotropyProjection:
    dim_upper: int
    dim_projection: int
    dim_lower: int

    @property
    def surjective(self) -> bool:
        return self.dim_projection == self.dim_lower


def isotropy_projection_oracle(
    rule: ProlongationRule, point: JetPoint
) -> IsotropyProjection:
    """Isotropy at W, its projection to order ℓ + k, and the isotropy at ρ(W).

    Computed from kernels directly, without the block decomposition.
    """
    _check_point(rule, point)
    if point.order < 1:
        raise DimensionMismatch("the projection oracle needs a jet of order at least 1")
    k = point.order - 1
    upper = isotropy(rule, point)
    labels = engel_labels(rule.n, rule.order + k + 1)
    kept = [c for c, (beta, _) in enumerate(labels) if order(beta) <= rule.order + k]
    projection = project_coords(upper, kept)
    lower = isotropy(rule, point.truncate(k))
    if not projection <= lower:
        raise OracleMismatch("projected isotropy is not contained in the lower one")
    return IsotropyProjection(upper.dim, projection.dim, lower.dim)


def orbit_tangent_matrix(rule: ProlongationRule, point: JetPoint) -> QMatrix:
    """Rows are values at the jet of the prolonged fields (1/β!)(x - z)^β d/dx^i.

    0 <= |β| <= ℓ + k; columns are the base then the jet coordinates.
    """
    _check_point(rule, point)
    fields = engel_basis(
        rule.base_ring, rule.order + point.order, point.base, start=0
    )
    rows = _prolonged_columns(rule, point, fields, horizontal=True)
    return qmatrix(rows, point.spec.n + len(point.spec.coordinates))


def orbit_tangent(rule: ProlongationRule, point: JetPoint) -> Subspace:
    return image(orbit_tangent_matrix(rule, point))


def orbit_tangent_dim(rule: ProlongationRule, point: JetPoint) -> int:
    return rank(orbit_tangent_matrix(rule, point))


def section_tangents(
    spec: JetSpec, section: Sequence[Poly], z: Sequence
) -> list[list[Rational]]:
    """Tangent vectors of x -> j_k S(x) at z, one per base direction."""
    higher = JetPoint.from_section(spec.with_order(spec.order + 1), section, z)
    vectors = []
    for i in range(spec.n):
        vector = [QQ.one if j == i else QQ.zero for j in range(spec.n)]
        for fibre, alpha in spec.coordinates:
            shifted = tuple(a + 1 if j == i else a for j, a in enumerate(alpha))
            vector.append(higher.value(fibre, shifted))
        vectors.append(vector)
    return vectors


def homogeneity_test(
    rule: ProlongationRule, section: Sequence[Poly], z: Sequence, k: int
) -> bool:
    """Whether j_k S is tangent to the orbit distribution at z."""
    spec = rule.jet_spec(k)
    z = tuple(to_rational(value) for value in z)
    point = JetPoint.from_section(spec, section, z)
    tangent = orbit_tangent(rule, point)
    return all(vector in tangent for vector in section_tangents(spec, section, z))


def rule_symbol(rule: ProlongationRule, point: JetPoint) -> SymbolSpace:
    """The order-ℓ symbol at the base point and fibre values of `point`.

    g_ℓ is the kernel of v -> (sum c^λ_(i,β) v^i_β)_λ over |β| = ℓ, a
    subspace of S^ℓ V* (x) V.
    """
    _check_point(rule, point)
    values = point.base + tuple(point.value(f, (0,) * rule.n) for f in range(rule.m))
    columns = [
        (beta, i) for beta in multiindices(rule.n, rule.order) for i in range(rule.n)
    ]
    rows = [[QQ.zero] * len(columns) for _ in range(rule.m)]
    position = {label: index for index, label in enumerate(columns)}
    for (fibre, i, beta), coefficient in rule.coefficients.items():
        if order(beta) == rule.order:
            rows[fibre][position[(beta, i)]] += evaluate(coefficient, values)
    space = nullspace(qmatrix(rows, len(columns)))
    return SymbolSpace(rule.n, rule.n, rule.order, space)


def tangent_kernel(rule: ProlongationRule, point: JetPoint) -> SymbolSpace:
    """Orbit tangent vectors at a jet of order k that vanish on J_{k-1}.

    Returned inside S^k V* (x) W, in symbol coordinates.
    """
    tangent = orbit_tangent(rule, point)
    spec = point.spec
    k = point.order
    top = [spec.n + index for index in spec.indices_of_order(k)]
    ambient = spec.n + len(spec.coordinates)
    vertical = Subspace.span(
        [[QQ.one if c == index else QQ.zero for c in range(ambient)] for index in top],
        ambient,
    )
    kernel = project_coords(tangent.intersect(vertical), top)
    return SymbolSpace(rule.n, rule.m, k, kernel)


def tangent_kernel_family(
    rule: ProlongationRule, point: JetPoint, orders: Iterable[int]
) -> DeltaComplex:
    """Tangent kernels at the truncations of `point` to each of `orders`.

    They are images of symbol maps rather than prolongations of one
    another, so the family is not checked for nesting.
    """
    return DeltaComplex.explicit(
        [tangent_kernel(rule, point.truncate(k)) for k in orders], nested=False
    )


@dataclass(frozen=True)
class BridgeRow:
    order: int
    degree: int
    tangent_vanishes: bool
    symbol_vanishes: dict[int, bool]


@dataclass(frozen=True)
class BridgeReport:
    """δ-cohomology of tangent kernels in degree q against the symbol family in q + 1.

    The symbol family order compared with tangent-kernel order k is
    ℓ + k + offset; `observed_offsets` lists the offsets for which vanishing
    agrees on every row.
    """

    window: tuple[int, ...]
    offsets: tuple[int, ...]
    rows: tuple[BridgeRow, ...]
    observed_offsets: tuple[int, ...]


def degree_shift_bridge(
    rule: ProlongationRule,
    point: JetPoint,
    window: Iterable[int] | None = None,
    offsets: Sequence[int] = DEFAULT_BRIDGE_OFFSETS,
) -> BridgeReport:
    """Compare tangent-kernel and symbol-family cohomology over `window`.

    `window` defaults to 1 .. order(point) - 1, the orders whose next
    tangent kernel is available.
    """
    window = tuple(range(1, point.order) if window is None else window)
    if window and max(window) + 1 > point.order:
        raise DimensionMismatch(
            f"window {list(window)} needs a jet of order {max(window) + 1}"
        )
    rows = []
    if window:
        tangents = tangent_kernel_family(
            rule, point, range(min(window), max(window) + 2)
        )
        symbols = DeltaComplex.from_seed(rule_symbol(rule, point.truncate(0)))
        for k in window:
            for q in range(1, rule.n + 1):
                tangent_vanishes = cohomology_dim(tangents, k, q) == 0
                symbol_vanishes = {
                    offset: cohomology_dim(symbols, rule.order + k + offset, q + 1) == 0
                    for offset in offsets
                }
                rows.append(BridgeRow(k, q, tangent_vanishes, symbol_vanishes))
    observed = tuple(
        offset
        for offset in offsets
        if all(row.symbol_vanishes[offset] == row.tangent_vanishes for row in rows)
    )
    logger.info(
        "degree shift bridge",
        extra={"rule": rule.name, "window": list(window), "observed": list(observed)},
    )
    return BridgeReport(window, tuple(offsets), tuple(rows), observed)


def _compose(poly: Poly, images: Sequence[Poly]) -> Poly:
    ring = poly.ring
    return poly.compose(list(zip(ring.gens, images)))


def inverse_germ(
    germ: Sequence[Poly], z: Sequence[Rational], degree: int
) -> tuple[list[Poly], tuple[Rational, ...]]:
    """Taylor polynomial of degree `degree` at φ(z) of the inverse of φ.

    Both the germ and the result use shifted coordinates: the result maps
    v = x' - φ(z) to u = x - z.
    """
    ring = germ[0].ring
    n = ring.ngens
    image_point = tuple(evaluate(component, z) for component in germ)
    shifted = [shift(component, z) - c for component, c in zip(germ, image_point)]
    linear = [
        [shifted[i].coeff(ring.gens[j]) for j in range(n)] for i in range(n)
    ]
    matrix = qmatrix(linear, n)
    if rank(matrix) < n:
        raise NonInvertibleGerm("the germ has a singular linear part")
    inverse = matrix_rows(matrix.inv().to_dense())
    nonlinear = [
        component - sum((ring.gens[j] * linear[i][j] for j in range(n)), ring.zero)
        for i, component in enumerate(shifted)
    ]

    def apply_inverse(vector: Sequence[Poly]) -> list[Poly]:
        return [
            sum((vector[j] * inverse[i][j] for j in range(n)), ring.zero)
            for i in range(n)
        ]

    result = apply_inverse(list(ring.gens))
    for _ in range(degree):
        correction = [_compose(component, result) for component in nonlinear]
        result = [
            truncate(value, degree)
            for value in apply_inverse(
                [gen - c for gen, c in zip(ring.gens, correction)]
            )
        ]
    return result, image_point


def transform_jet(
    rule: ProlongationRule, germ: Sequence[Poly], point: JetPoint
) -> JetPoint:
    """The jet at φ(z) of the structure transported by φ.

    Requires a tensorial rule; `germ` is a polynomial map on the base.
    """
    _check_point(rule, point)
    if rule.tensor_type is None:
        raise FiniteLiftUnavailable(f"rule {rule.name!r} has no finite lift")
    ring = rule.base_ring
    n = rule.n
    if len(germ) != n:
        raise DimensionMismatch(f"a germ on {n} variables needs {n} components")
    germ = [change_ring(component, ring) for component in germ]
    k = point.order
    psi, image_point = inverse_germ(germ, point.base, k + 1)
    section = [shift(component, point.base) for component in point.taylor_section()]
    composed = [truncate(_compose(component, psi), k + 1) for component in section]

    def d(poly: Poly, i: int) -> Poly:
        return poly.diff(ring.gens[i])

    if rule.tensor_type == "covector":
        transformed = [
            sum((composed[j] * d(psi[j], i) for j in range(n)), ring.zero)
            for i in range(n)
        ]
    elif rule.tensor_type == "vector":
        shifted = [shift(component, point.base) for component in germ]
        jacobian = [
            [truncate(_compose(d(shifted[i], j), psi), k + 1) for j in range(n)]
            for i in range(n)
        ]
        transformed = [
            sum((jacobian[i][j] * composed[j] for j in range(n)), ring.zero)
            for i in range(n)
        ]
    else:
        pairs = _symmetric_pairs(n)
        position = {pair: index for index, pair in enumerate(pairs)}

        def g(a: int, b: int) -> Poly:
            return composed[position[(min(a, b), max(a, b))]]

        transformed = [
            sum(
                (
                    d(psi[i], a) * d(psi[j], b) * g(i, j)
                    for i in range(n)
                    for j in range(n)
                ),
                ring.zero,
            )
            for a, b in pairs
        ]
    transformed = [truncate(component, k) for component in transformed]
    origin = JetPoint.from_section(point.spec, transformed, (QQ.zero,) * n)
    return JetPoint(point.spec, image_point, origin.values)

