# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""Constant-coefficient linear PDE systems and their completion.

An equation is a tuple of terms (coefficient, fibre index, multi-index),
read as sum c * y^λ_α = 0. The solution space R_k of a system at order k is
the set of k-jets at a point annihilated by every formal derivative of every
equation that still fits in order k.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import (
    Iterable,
    Optional,
    Sequence,
)

from sympy import QQ

from forge.algebra.exactlin import (
    QMatrix,
    Rational,
    Subspace,
    format_rational,
    image,
    matrix_rows,
    nullspace,
    project_coords,
    qmatrix,
    rref,
    to_rational,
)
from forge.algebra.jetcalc import (
    JetSpec,
    MultiIndex,
    add_index,
    multiindices_upto,
    order,
    unit,
)
from forge.algebra.polyalg import Poly, parse_poly
from forge.algebra.spencer import DeltaComplex, SymbolSpace, acyclicity_onset
from forge.main.support import (
    DimensionMismatch,
    InvalidProblem,
    OracleMismatch,
    ProblemParseError,
)

logger = logging.getLogger(__name__)

Term = tuple[Rational, int, MultiIndex]
Equation = tuple[Term, ...]


class CapTooSmall(InvalidProblem):
    """The prolongation cap leaves no room for a single prolongation."""


@enum.unique
class Verdict(enum.Enum):
    """Outcome of the completion loop."""

    FORMALLY_INTEGRABLE = "formally-integrable"
    NEW_EQUATIONS_FOUND = "new-equations-found"
    CAP_REACHED = "cap-reached"


def normalize_equation(terms: Iterable[Sequence]) -> Equation:
    """Merge repeated jet coordinates, drop zeros and sort by (order, α, λ)."""
    merged: dict[tuple[int, MultiIndex], Rational] = {}
    for coefficient, fibre, alpha in terms:
        key = (int(fibre), tuple(alpha))
        merged[key] = merged.get(key, QQ.zero) + to_rational(coefficient)
    ordered = sorted(
        ((c, fibre, alpha) for (fibre, alpha), c in merged.items() if c),
        key=lambda term: (order(term[2]), tuple(-a for a in term[2]), term[1]),
    )
    return tuple(ordered)


def equation_order(equation: Equation) -> int:
    return max(order(alpha) for _, _, alpha in equation)


def differentiate(equation: Equation, gamma: MultiIndex) -> Equation:
    """The formal derivative d^γ of an equation."""
    return tuple((c, fibre, add_index(alpha, gamma)) for c, fibre, alpha in equation)


@dataclass(frozen=True)
class LinearPDESystem:
    """A linear system of order `order` on the fibre unknowns over the base."""

    base: tuple[str, ...]
    fibre: tuple[str, ...]
    order: int
    equations: tuple[Equation, ...]

    def __post_init__(self):
        n, m = len(self.base), len(self.fibre)
        if not n or not m:
            raise DimensionMismatch("a system needs base and fibre variables")
        normalized = []
        for equation in self.equations:
            equation = normalize_equation(equation)
            if not equation:
                continue
            for _, fibre, alpha in equation:
                if not 0 <= fibre < m:
                    raise DimensionMismatch(f"fibre index {fibre} out of range")
                if len(alpha) != n:
                    raise DimensionMismatch(
                        f"multi-index {alpha} does not have length {n}"
                    )
                if order(alpha) > self.order:
                    raise DimensionMismatch(
                        f"derivative {alpha} exceeds the system order {self.order}"
                    )
            if equation not in normalized:
                normalized.append(equation)
        object.__setattr__(self, "equations", tuple(normalized))

    @classmethod
    def build(
        cls,
        base: Sequence[str],
        fibre: Sequence[str],
        equations: Iterable[Iterable[Sequence]],
        order: int | None = None,
    ) -> LinearPDESystem:
        """Build a system whose order defaults to its highest derivative."""
        equations = [normalize_equation(equation) for equation in equations]
        equations = [equation for equation in equations if equation]
        if order is None:
            if not equations:
                raise InvalidProblem("a system without equations needs an order")
            order = max(equation_order(equation) for equation in equations)
        return cls(tuple(base), tuple(fibre), order, tuple(equations))

    @property
    def n(self) -> int:
        return len(self.base)

    @property
    def m(self) -> int:
        return len(self.fibre)

    def spec(self, k: int) -> JetSpec:
        return JetSpec(self.base, self.fibre, k)

    def with_equations(self, equations: Iterable[Equation]) -> LinearPDESystem:
        equations = [normalize_equation(equation) for equation in equations]
        top = max([self.order] + [equation_order(e) for e in equations if e])
        return LinearPDESystem(
            self.base, self.fibre, top, self.equations + tuple(equations)
        )

    def stacked_matrix(self, k: int) -> QMatrix:
        """Rows d^γ E over J_k coordinates, for each E and |γ| <= k - ord(E)."""
        spec = self.spec(k)
        rows = []
        for equation in self.equations:
            for gamma in multiindices_upto(self.n, k - equation_order(equation)):
                row = [QQ.zero] * spec.coordinate_count
                for coefficient, fibre, alpha in differentiate(equation, gamma):
                    row[spec.index(fibre, alpha)] += coefficient
                rows.append(row)
        return qmatrix(rows, spec.coordinate_count)

    def solution_space(self, k: int) -> Subspace:
        """The fibre of R_k at a point, in J_k coordinates."""
        if k < self.order:
            raise DimensionMismatch(
                f"order {k} is below the system order {self.order}"
            )
        return nullspace(self.stacked_matrix(k))

    def symbol(self, k: int) -> SymbolSpace:
        """g_k: the order-k jets in R_k whose lower coordinates vanish."""
        if k < self.order:
            raise DimensionMismatch(
                f"order {k} is below the system order {self.order}"
            )
        spec = self.spec(k)
        top = spec.indices_of_order(k)
        rows = matrix_rows(self.stacked_matrix(k))
        restricted = qmatrix([[row[index] for index in top] for row in rows], len(top))
        return SymbolSpace(self.n, self.m, k, nullspace(restricted))

    def render_equation(self, equation: Equation) -> str:
        spec = self.spec(equation_order(equation))
        parts = []
        for coefficient, fibre, alpha in equation:
            name = spec.coordinate_name(fibre, alpha)
            if coefficient == 1:
                parts.append(name)
            elif coefficient == -1:
                parts.append(f"-{name}")
            else:
                parts.append(f"{format_rational(coefficient)}*{name}")
        return " + ".join(parts).replace("+ -", "- ")

    def render(self) -> list[str]:
        return [self.render_equation(equation) for equation in self.equations]


def equation_from_poly(poly: Poly, spec: JetSpec) -> Equation:
    """Read a linear homogeneous polynomial in the jet coordinates of `spec`."""
    terms = []
    for monom, coefficient in poly.items():
        if sum(monom) != 1 or any(monom[: spec.n]):
            raise ProblemParseError(
                "equations must be linear and homogeneous in the jet coordinates"
            )
        fibre, alpha = spec.coordinates[monom.index(1) - spec.n]
        terms.append((coefficient, fibre, alpha))
    return normalize_equation(terms)


def parse_equation(text: str, spec: JetSpec) -> Equation:
    """Parse an equation such as `u_20 + u_02` over the coordinates of `spec`."""
    equation = equation_from_poly(parse_poly(text, spec.ring), spec)
    if not equation:
        raise ProblemParseError(f"equation {text!r} is identically zero")
    return equation


def solution_fibre_dim(system: LinearPDESystem, k: int) -> int:
    return system.solution_space(k).dim


def solution_space(system: LinearPDESystem, k: int) -> Subspace:
    return system.solution_space(k)


def prolong_system(system: LinearPDESystem) -> LinearPDESystem:
    """The system of order + 1: every equation and each of its first derivatives."""
    derived = [
        differentiate(equation, unit(system.n, i))
        for equation in system.equations
        for i in range(system.n)
    ]
    return LinearPDESystem(
        system.base, system.fibre, system.order + 1, system.equations + tuple(derived)
    )


def _relation_rows(system: LinearPDESystem, top: int) -> list[list[Rational]]:
    """Rows of the order-`top` stacked matrix free of order-`top` coordinates.

    Returned in J_{top-1} coordinates, spanning the annihilator of rho(R_top).
    """
    spec = system.spec(top)
    high = spec.indices_of_order(top)
    low = spec.indices_below(top)
    rows = matrix_rows(system.stacked_matrix(top))
    reordered = qmatrix(
        [[row[i] for i in high + low] for row in rows], spec.coordinate_count
    )
    reduced, pivots = rref(reordered)
    return [
        row[len(high) :]
        for row, pivot in zip(matrix_rows(reduced), pivots)
        if pivot >= len(high)
    ]


def project_system(
    system: LinearPDESystem, top: int | None = None
) -> tuple[Equation, ...]:
    """Relations of order < `top` implied by the stacked system at `top`.

    Only relations outside the row space of the order-(top - 1) stacked
    matrix are returned, lowest order first. `top` defaults to the system
    order, so passing a prolonged system projects back one order.
    """
    top = system.order if top is None else top
    if top < 1:
        return ()
    lower = system.spec(top - 1)
    width = lower.coordinate_count
    relations = _relation_rows(system, top)
    if not relations:
        return ()
    known = image(system.stacked_matrix(top - 1))
    # Reversing the columns puts the highest-order coordinates first, so the
    # bottom rows of the reduced form carry the lowest-order relations.
    reversed_rows = qmatrix([row[::-1] for row in relations], width)
    reduced, pivots = rref(reversed_rows)
    candidates = [row[::-1] for row in matrix_rows(reduced)[: len(pivots)]][::-1]
    new = []
    for row in candidates:
        if row in known:
            continue
        known = known + Subspace.span([row], width)
        terms = [
            (value, fibre, alpha)
            for value, (fibre, alpha) in zip(row, lower.coordinates)
            if value
        ]
        new.append(normalize_equation(terms))
    return tuple(sorted(new, key=lambda equation: equation_order(equation)))


@dataclass(frozen=True)
class CompletionStep:
    """One pass of the loop at order k: R_k, R_{k+1} and g_{k+1}.

    `dim_next == dim_solutions + dim_symbol` is the rank identity; it holds
    exactly when `surjective` is set.
    """

    order: int
    dim_solutions: int
    dim_next: int
    dim_symbol: int
    dim_projection: int
    surjective: bool
    acyclic: Optional[bool]
    new_equations: tuple[Equation, ...] = ()

    @property
    def rank_identity_holds(self) -> bool:
        return self.dim_next == self.dim_solutions + self.dim_symbol


@dataclass(frozen=True)
class NewEquationEvent:
    checked_order: int
    lowest_order: int
    equations: tuple[Equation, ...]


@dataclass
class KuranishiReport:
    original: LinearPDESystem
    system: LinearPDESystem
    cap: int
    verdict: Verdict = Verdict.CAP_REACHED
    stabilization_order: Optional[int] = None
    stable_dim: Optional[int] = None
    steps: list[CompletionStep] = field(default_factory=list)
    events: list[NewEquationEvent] = field(default_factory=list)

    @property
    def new_equations_order(self) -> Optional[int]:
        if not self.events:
            return None
        return self.events[0].lowest_order

    @property
    def final_steps(self) -> list[CompletionStep]:
        """Steps taken after the last absorption of new equations."""
        last = max(
            (index for index, step in enumerate(self.steps) if step.new_equations),
            default=-1,
        )
        return self.steps[last + 1 :]

    @property
    def h_integrability(self) -> int:
        """Consecutive surjective projections from the final system's order."""
        count = 0
        for step in self.final_steps:
            if not step.surjective:
                break
            count += 1
        return count


def _step(
    system: LinearPDESystem, k: int, cap: int
) -> tuple[CompletionStep, tuple[Equation, ...]]:
    current = system.solution_space(k)
    following = system.solution_space(k + 1)
    symbol = system.symbol(k + 1)
    lower = system.spec(k + 1).indices_below(k + 1)
    projection = project_coords(following, lower)
    surjective = projection.dim == current.dim
    identity = following.dim == current.dim + symbol.dim
    if surjective != identity:
        logger.error(
            "rank identity disagrees with the projection",
            extra={
                "order": k,
                "dim_solutions": current.dim,
                "dim_next": following.dim,
                "dim_symbol": symbol.dim,
                "dim_projection": projection.dim,
            },
        )
        raise OracleMismatch(
            f"at order {k} the projection and the rank identity disagree"
        )
    new_equations: tuple[Equation, ...] = ()
    acyclic = None
    if surjective:
        family = DeltaComplex.from_seed(system.symbol(k))
        acyclic = acyclicity_onset(family, 2, cap, start=k) == k
    else:
        new_equations = project_system(system, k + 1)
        if not new_equations:
            raise OracleMismatch(
                f"projection at order {k} is not surjective but yields no relation"
            )
    step = CompletionStep(
        order=k,
        dim_solutions=current.dim,
        dim_next=following.dim,
        dim_symbol=symbol.dim,
        dim_projection=projection.dim,
        surjective=surjective,
        acyclic=acyclic,
        new_equations=new_equations,
    )
    logger.info(
        "completion step",
        extra={
            "order": k,
            "dim_solutions": current.dim,
            "dim_next": following.dim,
            "dim_symbol": symbol.dim,
            "surjective": surjective,
            "acyclic": acyclic,
            "new_equations": len(new_equations),
        },
    )
    return step, new_equations


def complete(system: LinearPDESystem, cap: int) -> KuranishiReport:
    """Prolong and project until a surjective step meets a 2-acyclic symbol.

    New relations found by projection are absorbed and the search restarts
    at the system order. Nothing is claimed beyond `cap`.
    """
    if cap < system.order + 1:
        raise CapTooSmall(
            f"cap {cap} is below order + 1 = {system.order + 1}"
        )
    if not system.equations:
        raise InvalidProblem("the system has no equations")
    report = KuranishiReport(original=system, system=system, cap=cap)
    k = system.order
    while k + 1 <= cap:
        step, new_equations = _step(system, k, cap)
        report.steps.append(step)
        if new_equations:
            system = system.with_equations(new_equations)
            report.system = system
            report.events.append(
                NewEquationEvent(
                    checked_order=k,
                    lowest_order=min(equation_order(e) for e in new_equations),
                    equations=new_equations,
                )
            )
            k = system.order
            continue
        if step.acyclic:
            report.verdict = Verdict.FORMALLY_INTEGRABLE
            report.stabilization_order = k
            report.stable_dim = step.dim_solutions
            break
        k += 1
    else:
        report.verdict = (
            Verdict.NEW_EQUATIONS_FOUND if report.events else Verdict.CAP_REACHED
        )
    logger.info(
        "completion finished",
        extra={
            "verdict": report.verdict.value,
            "stabilization_order": report.stabilization_order,
            "events": len(report.events),
            "cap": cap,
        },
    )
    return report
