# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""Polynomials, differential forms and polynomial vector fields over QQ.

Polynomials are elements of a sympy `PolyRing` over `QQ` with graded-lex term
order; the ring's generators are the ordered variable list. Forms and vector
fields carry the ring they live on and refuse to mix with other rings.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from tokenize import TokenError
from typing import (
    Iterable,
    Mapping,
    Sequence,
)

from sympy import QQ, Symbol
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    rationalize,
    standard_transformations,
)
from sympy.polys.orderings import grlex
from sympy.polys.polyerrors import CoercionFailed
from sympy.polys.rings import PolyElement, PolyRing

from forge.algebra.exactlin import Rational, to_rational
from forge.main.support import DimensionMismatch, ProblemParseError

logger = logging.getLogger(__name__)

Poly = PolyElement

PARSE_TRANSFORMATIONS = standard_transformations + (convert_xor, rationalize)
NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


class UnknownVariable(ProblemParseError):
    """A variable name is not one of the ring's generators."""


class MismatchedVariables(DimensionMismatch):
    """Two objects live on different variable lists."""


def poly_ring(names: Sequence[str]) -> PolyRing:
    """The polynomial ring over QQ with generators `names`, in graded-lex order."""
    for name in names:
        if not NAME_RE.match(name):
            raise ProblemParseError(f"invalid variable name: {name!r}")
    if len(set(names)) != len(names):
        raise ProblemParseError(f"repeated variable name in {list(names)}")
    return PolyRing(list(names), QQ, grlex)


def variable_names(ring: PolyRing) -> tuple[str, ...]:
    return tuple(str(symbol) for symbol in ring.symbols)


def generator(ring: PolyRing, name: str) -> Poly:
    """The generator of `ring` called `name`."""
    try:
        index = variable_names(ring).index(name)
    except ValueError:
        raise UnknownVariable(
            f"unknown variable {name!r}; expected one of {variable_names(ring)}"
        )
    return ring.gens[index]


def partial_derivative(poly: Poly, variable: str | int) -> Poly:
    """Derivative with respect to a variable given by name or index."""
    ring = poly.ring
    if isinstance(variable, int):
        if not 0 <= variable < ring.ngens:
            raise UnknownVariable(f"variable index {variable} out of range")
        return poly.diff(ring.gens[variable])
    return poly.diff(generator(ring, variable))


def evaluate(poly: Poly, point: Sequence | Mapping[str, object]) -> Rational:
    """Value of `poly` at a point given in generator order or by name."""
    ring = poly.ring
    if isinstance(point, Mapping):
        missing = [name for name in variable_names(ring) if name not in point]
        if missing:
            raise UnknownVariable(f"no value given for {missing}")
        values = [to_rational(point[name]) for name in variable_names(ring)]
    else:
        if len(point) != ring.ngens:
            raise MismatchedVariables(
                f"point has {len(point)} coordinates, ring has {ring.ngens} variables"
            )
        values = [to_rational(value) for value in point]
    return to_rational(poly(*values))


def change_ring(poly: Poly, ring: PolyRing) -> Poly:
    """Re-express `poly` in a ring whose variables include those it uses."""
    if poly.ring == ring:
        return poly
    names = variable_names(ring)
    source = variable_names(poly.ring)
    terms = {}
    for monom, coeff in poly.items():
        exponents = [0] * ring.ngens
        for name, power in zip(source, monom):
            if not power:
                continue
            if name not in names:
                raise MismatchedVariables(
                    f"variable {name!r} does not exist in {names}"
                )
            exponents[names.index(name)] = power
        terms[tuple(exponents)] = coeff
    return ring.from_dict(terms) if terms else ring.zero


def total_degree(poly: Poly) -> int:
    return max((sum(monom) for monom in poly.keys()), default=0)


def truncate(poly: Poly, degree: int) -> Poly:
    """Drop every term of total degree above `degree`."""
    ring = poly.ring
    kept = {monom: coeff for monom, coeff in poly.items() if sum(monom) <= degree}
    return ring.from_dict(kept) if kept else ring.zero


def _homogeneous_parts(poly: Poly, degree: int) -> list[Poly]:
    ring = poly.ring
    parts: list[dict] = [{} for _ in range(degree + 1)]
    for monom, coeff in poly.items():
        if sum(monom) <= degree:
            parts[sum(monom)][monom] = coeff
    return [ring.from_dict(part) if part else ring.zero for part in parts]


def truncated_product(first: Poly, second: Poly, degree: int) -> Poly:
    """truncate(first * second, degree), without forming the dropped terms."""
    left = _homogeneous_parts(first, degree)
    right = _homogeneous_parts(second, degree)
    result = first.ring.zero
    for d, a in enumerate(left):
        if not a:
            continue
        for b in right[: degree - d + 1]:
            if b:
                result += a * b
    return result


def shift(poly: Poly, offsets: Sequence) -> Poly:
    """p(x + offsets)."""
    ring = poly.ring
    replacements = [
        (gen, gen + to_rational(c)) for gen, c in zip(ring.gens, offsets) if c
    ]
    return poly.compose(replacements) if replacements else poly


def parse_poly(text: str, ring: PolyRing) -> Poly:
    """Parse an infix polynomial such as `x^2 - 3/2*x*y + 1` in `ring`."""
    local = {name: Symbol(name) for name in variable_names(ring)}
    try:
        expression = parse_expr(
            text, local_dict=local, transformations=PARSE_TRANSFORMATIONS
        )
    except (SyntaxError, TypeError, ValueError, TokenError) as exc:
        raise ProblemParseError(f"cannot parse polynomial {text!r}: {exc}")
    unknown = sorted(
        str(symbol) for symbol in expression.free_symbols if str(symbol) not in local
    )
    if unknown:
        raise UnknownVariable(f"unknown variable(s) {unknown} in {text!r}")
    try:
        return ring.from_expr(expression)
    except (CoercionFailed, ValueError) as exc:
        raise ProblemParseError(f"{text!r} is not a polynomial: {exc}")


def _wedge_sign(indices: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation and the sorted tuple; sign 0 on repeats."""
    if len(set(indices)) != len(indices):
        return 0, ()
    values = list(indices)
    sign = 1
    for i in range(len(values)):
        for j in range(len(values) - 1 - i):
            if values[j] > values[j + 1]:
                values[j], values[j + 1] = values[j + 1], values[j]
                sign = -sign
    return sign, tuple(values)


@dataclass(frozen=True)
class DiffForm:
    """A differential q-form sum_I f_I dx^I with strictly increasing I.

    Degree n + 1 is allowed on n variables; the only such form is zero.
    """

    ring: PolyRing
    degree: int
    terms: Mapping[tuple[int, ...], Poly] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.degree <= self.ring.ngens + 1:
            raise MismatchedVariables(
                f"a {self.degree}-form cannot live on {self.ring.ngens} variables"
            )
        cleaned = {}
        for indices, coeff in self.terms.items():
            indices = tuple(indices)
            if len(indices) != self.degree or list(indices) != sorted(set(indices)):
                raise MismatchedVariables(f"invalid index tuple {indices}")
            if indices[-1:] and indices[-1] >= self.ring.ngens:
                raise MismatchedVariables(f"index tuple {indices} out of range")
            coeff = change_ring(coeff, self.ring)
            if coeff:
                cleaned[indices] = coeff
        object.__setattr__(self, "terms", dict(sorted(cleaned.items())))

    @classmethod
    def zero(cls, ring: PolyRing, degree: int) -> DiffForm:
        return cls(ring, degree, {})

    @classmethod
    def function(cls, poly: Poly) -> DiffForm:
        return cls(poly.ring, 0, {(): poly})

    @classmethod
    def differential(cls, ring: PolyRing, name: str | int) -> DiffForm:
        """The coordinate 1-form dx for a variable given by name or index."""
        index = name if isinstance(name, int) else ring.index(generator(ring, name))
        return cls(ring, 1, {(index,): ring.one})

    @classmethod
    def one_form(cls, ring: PolyRing, coefficients: Sequence[Poly]) -> DiffForm:
        if len(coefficients) != ring.ngens:
            raise MismatchedVariables(
                f"{len(coefficients)} coefficients for {ring.ngens} variables"
            )
        return cls(ring, 1, {(i,): c for i, c in enumerate(coefficients)})

    def coefficient(self, indices: Sequence[int]) -> Poly:
        return self.terms.get(tuple(indices), self.ring.zero)

    def coefficients(self) -> list[Poly]:
        """The coefficient list of a 1-form, one entry per variable."""
        if self.degree != 1:
            raise MismatchedVariables("only 1-forms have a coefficient list")
        return [self.coefficient((i,)) for i in range(self.ring.ngens)]

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: DiffForm):
        if self.ring != other.ring:
            raise MismatchedVariables(
                f"forms on {variable_names(self.ring)} and "
                f"{variable_names(other.ring)} cannot be combined"
            )

    def __add__(self, other: DiffForm) -> DiffForm:
        self._check(other)
        if self.degree != other.degree:
            raise MismatchedVariables("cannot add forms of different degrees")
        terms = dict(self.terms)
        for indices, coeff in other.terms.items():
            terms[indices] = terms.get(indices, self.ring.zero) + coeff
        return DiffForm(self.ring, self.degree, terms)

    def __neg__(self) -> DiffForm:
        return DiffForm(self.ring, self.degree, {i: -c for i, c in self.terms.items()})

    def __sub__(self, other: DiffForm) -> DiffForm:
        return self + (-other)

    def scale(self, factor) -> DiffForm:
        """Multiply by a polynomial or a rational."""
        if isinstance(factor, PolyElement):
            factor = change_ring(factor, self.ring)
        else:
            factor = self.ring.ground_new(to_rational(factor))
        return DiffForm(
            self.ring, self.degree, {i: c * factor for i, c in self.terms.items()}
        )

    def wedge(self, other: DiffForm) -> DiffForm:
        return wedge(self, other)

    def d(self) -> DiffForm:
        return exterior_derivative(self)

    def evaluate(self, point: Sequence | Mapping[str, object]) -> dict:
        return eval_form(self, point)

    def pullback_linear(self, matrix: Sequence[Sequence]) -> DiffForm:
        """Pull back along the linear substitution x = matrix * x'."""
        n = self.ring.ngens
        rows = [[to_rational(entry) for entry in row] for row in matrix]
        if len(rows) != n or any(len(row) != n for row in rows):
            raise MismatchedVariables(f"expected a {n}x{n} matrix")
        images = [
            sum(
                (self.ring.gens[j] * rows[i][j] for j in range(n) if rows[i][j]),
                self.ring.zero,
            )
            for i in range(n)
        ]
        substitution = list(zip(self.ring.gens, images))
        differentials = [
            DiffForm(
                self.ring,
                1,
                {(j,): self.ring.ground_new(rows[i][j]) for j in range(n)},
            )
            for i in range(n)
        ]
        result = DiffForm.zero(self.ring, self.degree)
        for indices, coeff in self.terms.items():
            term = DiffForm.function(coeff.compose(substitution))
            for index in indices:
                term = wedge(term, differentials[index])
            result = result + term
        return result

    def render(self) -> str:
        names = variable_names(self.ring)
        if not self.terms:
            return "0"
        parts = []
        for indices, coeff in self.terms.items():
            basis = "^".join(f"d{names[i]}" for i in indices)
            if not indices:
                parts.append(f"({coeff.as_expr()})")
            elif coeff == self.ring.one:
                parts.append(basis)
            else:
                parts.append(f"({coeff.as_expr()})*{basis}")
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.render()


def exterior_derivative(form: DiffForm) -> DiffForm:
    """d(sum f_I dx^I) = sum_j df_I/dx_j dx^j ^ dx^I.

    Top-degree forms go to the zero form of degree n + 1.
    """
    ring = form.ring
    if form.degree > ring.ngens:
        raise MismatchedVariables(
            f"a {form.degree}-form on {ring.ngens} variables has no derivative"
        )
    terms: dict[tuple[int, ...], Poly] = {}
    for indices, coeff in form.terms.items():
        for j, gen in enumerate(ring.gens):
            derivative = coeff.diff(gen)
            if not derivative:
                continue
            sign, ordered = _wedge_sign((j,) + indices)
            if sign:
                terms[ordered] = terms.get(ordered, ring.zero) + derivative * sign
    return DiffForm(ring, form.degree + 1, terms)


def wedge(first: DiffForm, second: DiffForm) -> DiffForm:
    first._check(second)
    degree = first.degree + second.degree
    if degree > first.ring.ngens + 1:
        raise MismatchedVariables(
            f"a {degree}-form cannot live on {first.ring.ngens} variables"
        )
    terms: dict[tuple[int, ...], Poly] = {}
    for left, a in first.terms.items():
        for right, b in second.terms.items():
            sign, ordered = _wedge_sign(left + right)
            if sign:
                terms[ordered] = terms.get(ordered, first.ring.zero) + a * b * sign
    return DiffForm(first.ring, degree, terms)


def eval_form(
    form: DiffForm, point: Sequence | Mapping[str, object]
) -> dict[tuple[int, ...], Rational]:
    """The alternating tensor at `point`, as its increasing-index components."""
    values = {}
    for indices, coeff in form.terms.items():
        value = evaluate(coeff, point)
        if value:
            values[indices] = value
    return values


def parse_one_form(text: str, ring: PolyRing) -> DiffForm:
    """Parse a 1-form such as `dy - y1*dx` whose differentials are `d<name>`."""
    names = variable_names(ring)
    placeholders = {name: f"__d{index}" for index, name in enumerate(names)}
    pattern = re.compile(
        r"\bd("
        + "|".join(re.escape(n) for n in sorted(names, key=len, reverse=True))
        + r")\b"
    )
    substituted = pattern.sub(lambda match: placeholders[match.group(1)], text)
    extended = PolyRing(list(names) + list(placeholders.values()), QQ, grlex)
    poly = parse_poly(substituted, extended)
    n = len(names)
    coefficients = [{} for _ in range(n)]
    for monom, coeff in poly.items():
        differential = monom[n:]
        if sum(differential) != 1:
            raise ProblemParseError(f"{text!r} is not a 1-form")
        index = differential.index(1)
        coefficients[index][monom[:n]] = coeff
    return DiffForm.one_form(
        ring,
        [ring.from_dict(terms) if terms else ring.zero for terms in coefficients],
    )


@dataclass(frozen=True)
class PolyVectorField:
    """A vector field sum_i a^i d/dx^i with polynomial components."""

    ring: PolyRing
    components: tuple[Poly, ...]

    def __post_init__(self):
        if len(self.components) != self.ring.ngens:
            raise MismatchedVariables(
                f"{len(self.components)} components for {self.ring.ngens} variables"
            )
        object.__setattr__(
            self,
            "components",
            tuple(change_ring(c, self.ring) for c in self.components),
        )

    @classmethod
    def zero(cls, ring: PolyRing) -> PolyVectorField:
        return cls(ring, (ring.zero,) * ring.ngens)

    @classmethod
    def from_mapping(
        cls, ring: PolyRing, components: Mapping[str, Poly]
    ) -> PolyVectorField:
        names = variable_names(ring)
        for name in components:
            if name not in names:
                raise UnknownVariable(f"unknown variable {name!r}")
        return cls(ring, tuple(components.get(name, ring.zero) for name in names))

    def __call__(self, poly: Poly, degree: int | None = None) -> Poly:
        """Apply the field to a polynomial as a derivation.

        With `degree`, terms of total degree above it are dropped.
        """
        poly = change_ring(poly, self.ring)
        result = self.ring.zero
        for component, gen in zip(self.components, self.ring.gens):
            if not component:
                continue
            if degree is None:
                result += component * poly.diff(gen)
            else:
                result += truncated_product(component, poly.diff(gen), degree)
        return result

    def __add__(self, other: PolyVectorField) -> PolyVectorField:
        self._check(other)
        return PolyVectorField(
            self.ring, tuple(a + b for a, b in zip(self.components, other.components))
        )

    def __sub__(self, other: PolyVectorField) -> PolyVectorField:
        self._check(other)
        return PolyVectorField(
            self.ring, tuple(a - b for a, b in zip(self.components, other.components))
        )

    def scale(self, factor) -> PolyVectorField:
        if isinstance(factor, PolyElement):
            factor = change_ring(factor, self.ring)
        else:
            factor = self.ring.ground_new(to_rational(factor))
        return PolyVectorField(self.ring, tuple(c * factor for c in self.components))

    def bracket(
        self, other: PolyVectorField, degree: int | None = None
    ) -> PolyVectorField:
        """[X, Y]^i = X(Y^i) - Y(X^i), cut at total degree `degree` when given."""
        self._check(other)
        return PolyVectorField(
            self.ring,
            tuple(
                self(b, degree) - other(a, degree)
                for a, b in zip(self.components, other.components)
            ),
        )

    def evaluate(self, point: Sequence | Mapping[str, object]) -> tuple[Rational, ...]:
        return tuple(evaluate(component, point) for component in self.components)

    def is_zero(self) -> bool:
        return not any(self.components)

    def change_ring(self, ring: PolyRing) -> PolyVectorField:
        """Extend to a ring with more variables, with zero new components."""
        names = variable_names(self.ring)
        mapping = dict(zip(names, self.components))
        return PolyVectorField(
            ring,
            tuple(
                change_ring(mapping[name], ring) if name in mapping else ring.zero
                for name in variable_names(ring)
            ),
        )

    def _check(self, other: PolyVectorField):
        if self.ring != other.ring:
            raise MismatchedVariables("vector fields live on different variables")

    def render(self) -> str:
        parts = [
            f"({component.as_expr()})*d/d{name}"
            for component, name in zip(self.components, variable_names(self.ring))
            if component
        ]
        return " + ".join(parts) or "0"

    def __str__(self) -> str:
        return self.render()


def polynomials(ring: PolyRing, texts: Iterable[str]) -> list[Poly]:
    return [parse_poly(text, ring) for text in texts]
